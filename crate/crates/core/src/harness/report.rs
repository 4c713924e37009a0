use std::fmt::Write as _;

use serde::Serialize;

use super::aggregate::AggregateReport;
use super::config::OutputFormat;
use crate::judge::{DimensionRow, JudgeReport};

fn score(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.2}")
}

fn prob(x: f64) -> String {
    format!("{x:.4}")
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map_or_else(|| "-".to_string(), f)
}

fn round_to(x: f64, places: i32) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let k = 10f64.powi(places);
    (x * k).round() / k
}

/// Copy of the report with scores at 2 decimals and probabilities at 4.
pub fn rounded(report: &AggregateReport) -> AggregateReport {
    let mut r = report.clone();
    for table in &mut r.metrics {
        for row in &mut table.rows {
            row.mean = round_to(row.mean, 2);
            row.sd = round_to(row.sd, 2);
            row.t = row.t.map(|t| round_to(t, 2));
            row.p = row.p.map(|p| round_to(p, 4));
        }
    }
    for c in &mut r.correlations {
        c.r = c.r.map(|x| round_to(x, 4));
    }
    if let Some(k) = &mut r.kappa {
        k.kappa = k.kappa.map(|x| round_to(x, 4));
    }
    for g in &mut r.groups {
        g.mean_elrm = g.mean_elrm.map(|x| round_to(x, 2));
    }
    r
}

fn numeric(cell: &str) -> bool {
    cell == "-" || cell.parse::<f64>().is_ok()
}

/// Columns holding only numbers are right-aligned, the rest left-aligned.
fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    let mut right = vec![!rows.is_empty(); header.len()];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
            right[i] &= numeric(cell);
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| if right[i] { format!("{c:>w$}", w = widths[i]) } else { format!("{c:<w$}", w = widths[i]) })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", line(header.to_vec()).trim_end());
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for row in rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()).trim_end());
    }
    out.push('\n');
}

fn metric_rows(report: &AggregateReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in &report.metrics {
        for r in &t.rows {
            rows.push(vec![
                t.metric.name().to_string(),
                r.model.clone(),
                r.n.to_string(),
                score(r.mean),
                score(r.sd),
                r.compared_with.clone().unwrap_or_else(|| "-".into()),
                r.pairs.map_or_else(|| "-".into(), |p| p.to_string()),
                opt(r.t, score),
                opt(r.p, prob),
            ]);
        }
    }
    rows
}

const METRIC_HEADER: [&str; 9] = ["metric", "model", "n", "mean", "sd", "vs", "pairs", "t", "p"];

fn correlation_rows(report: &AggregateReport) -> Vec<Vec<String>> {
    report
        .correlations
        .iter()
        .map(|c| vec![c.scope.clone(), c.metric.name().to_string(), c.n.to_string(), opt(c.r, prob)])
        .collect()
}

fn dimension_cells(r: &DimensionRow) -> Vec<String> {
    let (neg, pos) = r.percentages();
    let pct = |x: f64| if r.judged() == 0 { "-".to_string() } else { format!("{x:.1}") };
    vec![
        r.dimension.title().to_string(),
        r.negative.short().to_string(),
        r.negative_count.to_string(),
        pct(neg),
        r.positive.short().to_string(),
        r.positive_count.to_string(),
        pct(pos),
    ]
}

fn dimension_rows(report: &AggregateReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in &report.dimensions {
        for r in &t.rows {
            rows.push(std::iter::once(t.model.clone()).chain(dimension_cells(r)).collect());
        }
    }
    rows
}

const DIMENSION_HEADER: [&str; 8] = ["model", "dimension", "negative", "count", "%", "positive", "count", "%"];

fn group_rows(report: &AggregateReport) -> Vec<Vec<String>> {
    report
        .groups
        .iter()
        .map(|g| vec![g.by.clone(), g.key.clone(), g.records.to_string(), g.scored.to_string(), opt(g.mean_elrm, score)])
        .collect()
}

fn render_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fixeval {}: {} records, {} scored\n", report.tool_version, report.records, report.scored);
    table(&mut out, &METRIC_HEADER, &metric_rows(report));
    if !report.correlations.is_empty() {
        table(&mut out, &["scope", "metric", "n", "pearson r"], &correlation_rows(report));
    }
    if let Some(k) = &report.kappa {
        let _ = writeln!(out, "Cohen's kappa ({} vs {}, n = {}): {}\n", k.rater_a, k.rater_b, k.n, opt(k.kappa, prob));
    }
    table(&mut out, &DIMENSION_HEADER, &dimension_rows(report));
    table(&mut out, &["by", "group", "records", "scored", "mean ELRM"], &group_rows(report));
    if !report.unmatched_judgments.is_empty() {
        let _ = writeln!(out, "Judgments without a scored record: {}", report.unmatched_judgments.join(", "));
    }
    for e in &report.errors {
        let _ = writeln!(out, "error: {} ({}): {}", e.id, e.model, e.error);
    }
    let _ = write!(out, "configuration:\n{}", report.config.to_toml());
    out
}

/// One CSV document with a leading `section` column so every table fits.
fn render_csv(report: &AggregateReport) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let section = |w: &mut csv::Writer<Vec<u8>>, name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), csv::Error> {
        w.write_record(std::iter::once("section").chain(header.iter().copied()))?;
        for row in rows {
            w.write_record(std::iter::once(name.to_string()).chain(row))?;
        }
        Ok(())
    };
    section(&mut w, "metric", &METRIC_HEADER, metric_rows(report))?;
    section(&mut w, "correlation", &["scope", "metric", "n", "r"], correlation_rows(report))?;
    if let Some(k) = &report.kappa {
        let row = vec![k.rater_a.clone(), k.rater_b.clone(), k.n.to_string(), opt(k.kappa, prob)];
        section(&mut w, "kappa", &["rater_a", "rater_b", "n", "kappa"], vec![row])?;
    }
    section(&mut w, "dimension", &DIMENSION_HEADER, dimension_rows(report))?;
    section(&mut w, "group", &["by", "group", "records", "scored", "mean_elrm"], group_rows(report))?;
    section(&mut w, "config", &["tool_version", "toml"], vec![vec![report.tool_version.clone(), report.config.to_toml()]])?;
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(report: &AggregateReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(report),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rounded(report)).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => render_csv(report).expect("writing csv to memory"),
    }
}

#[derive(Serialize)]
struct JudgeRowOut<'a> {
    #[serde(flatten)]
    row: &'a DimensionRow,
    negative_pct: f64,
    positive_pct: f64,
}

#[derive(Serialize)]
struct JudgeSummary<'a> {
    model: &'a str,
    kind: crate::judge::JudgeKind,
    mode: crate::judge::JudgeMode,
    rows: Vec<JudgeRowOut<'a>>,
}

/// Category counts and percentages per dimension, one row each. Call logs
/// are left out.
pub fn render_judge(report: &JudgeReport, format: OutputFormat) -> String {
    let header = ["dimension", "negative", "count", "%", "positive", "count", "%", "unjudged"];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = dimension_cells(r);
            cells.push(r.unjudged.to_string());
            cells
        })
        .collect();
    match format {
        OutputFormat::Table => {
            let mut out = format!("{} ({}, {})\n\n", report.model, report.kind.as_str(), report.mode.as_str());
            table(&mut out, &header, &rows);
            out
        }
        OutputFormat::Json => {
            let summary = JudgeSummary {
                model: &report.model,
                kind: report.kind,
                mode: report.mode,
                rows: report
                    .rows
                    .iter()
                    .map(|row| {
                        let (negative_pct, positive_pct) = row.percentages();
                        JudgeRowOut { row, negative_pct, positive_pct }
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).expect("writing csv to memory");
            for row in rows {
                w.write_record(row).expect("writing csv to memory");
            }
            String::from_utf8(w.into_inner().expect("flushing csv")).expect("csv output is utf-8")
        }
    }
}
