use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::InstanceRecord;
use crate::dimensions::{DimensionReport, ELeRelv, FixCap, PlanQul, PtFixCap};
use crate::judge::{Dimension, DimensionRow};
use crate::stats::{cohens_kappa, paired_t, pearson, summarize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One human or LLM rating of one model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Judgment {
    pub id: String,
    pub model: String,
    pub rater: String,
    pub score: f64,
}

pub fn parse_judgments(reader: impl std::io::BufRead) -> Result<Vec<Judgment>, super::dataset::DatasetError> {
    use super::dataset::DatasetError;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Malformed { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasetError::Malformed { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ELRM")]
    Elrm,
    #[serde(rename = "BLEU (whitespace)")]
    BleuCoarse,
    #[serde(rename = "BLEU (fine)")]
    BleuFine,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Elrm, Metric::BleuCoarse, Metric::BleuFine];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Elrm => "ELRM",
            Metric::BleuCoarse => "BLEU (whitespace)",
            Metric::BleuFine => "BLEU (fine)",
        }
    }

    fn of(self, r: &InstanceRecord) -> Option<f64> {
        if !r.is_scored() {
            return None;
        }
        match self {
            Metric::Elrm => r.metrics.as_ref().map(|m| m.elrm),
            Metric::BleuCoarse => r.bleu_coarse,
            Metric::BleuFine => r.bleu_fine,
        }
    }
}

/// Summary of one model, with a paired t-test against the model it is chained to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compared_with: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub metric: Metric,
    pub rows: Vec<ModelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    /// `all` or a model name.
    pub scope: String,
    pub metric: Metric,
    pub n: usize,
    /// Absent when a series is constant or too short.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub rater_a: String,
    pub rater_b: String,
    pub n: usize,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub model: String,
    pub rows: Vec<DimensionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    /// `language`, `cwe` or `transform`.
    pub by: String,
    pub key: String,
    pub records: usize,
    pub scored: usize,
    pub mean_elrm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub id: String,
    pub model: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub tool_version: String,
    pub config: RunConfig,
    pub records: usize,
    pub scored: usize,
    pub errors: Vec<RecordError>,
    pub metrics: Vec<MetricTable>,
    pub correlations: Vec<CorrelationRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaRow>,
    /// Judgments without a matching scored record, as `id/model/rater`.
    pub unmatched_judgments: Vec<String>,
    pub dimensions: Vec<DimensionTable>,
    pub groups: Vec<GroupRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("no records to aggregate")]
    Empty,
}

fn models(records: &[InstanceRecord]) -> Vec<&str> {
    let mut seen: IndexMap<&str, ()> = IndexMap::new();
    for r in records {
        seen.insert(r.model.as_str(), ());
    }
    seen.into_keys().collect()
}

/// Scores of `model` by instance id, in record order.
fn scores<'a>(records: &'a [InstanceRecord], model: &str, metric: Metric) -> IndexMap<&'a str, f64> {
    records
        .iter()
        .filter(|r| r.model == model)
        .filter_map(|r| metric.of(r).map(|s| (r.id.as_str(), s)))
        .collect()
}

/// Rows in model order. Each model is compared with the one above it and the
/// first with the last, pairing scores by instance id.
fn metric_table(records: &[InstanceRecord], models: &[&str], metric: Metric) -> MetricTable {
    let per_model: Vec<IndexMap<&str, f64>> = models.iter().map(|m| scores(records, m, metric)).collect();
    let mut rows = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let values: Vec<f64> = per_model[i].values().copied().collect();
        let summary = summarize(&values).ok();
        let mut row = ModelRow {
            model: model.to_string(),
            n: values.len(),
            mean: summary.map_or(0.0, |s| s.mean),
            sd: summary.map_or(0.0, |s| s.sd),
            compared_with: None,
            pairs: None,
            t: None,
            p: None,
        };
        if models.len() > 1 {
            let other = if i == 0 { models.len() - 1 } else { i - 1 };
            let (xs, ys): (Vec<f64>, Vec<f64>) = per_model[i]
                .iter()
                .filter_map(|(id, x)| per_model[other].get(id).map(|y| (*x, *y)))
                .unzip();
            row.compared_with = Some(models[other].to_string());
            row.pairs = Some(xs.len());
            if let Ok(t) = paired_t(&xs, &ys) {
                row.t = Some(t.t);
                row.p = Some(t.p);
            }
        }
        rows.push(row);
    }
    MetricTable { metric, rows }
}

fn correlation(records: &[&InstanceRecord], judged: &HashMap<(&str, &str), f64>, scope: &str, metric: Metric) -> CorrelationRow {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| Some((metric.of(r)?, *judged.get(&(r.id.as_str(), r.model.as_str()))?)))
        .unzip();
    CorrelationRow { scope: scope.to_string(), metric, n: xs.len(), r: pearson(&xs, &ys).ok() }
}

fn dimension_rows(reports: &[(&InstanceRecord, &DimensionReport)]) -> Vec<DimensionRow> {
    let mut rows: Vec<DimensionRow> = Dimension::ALL
        .iter()
        .map(|&dimension| {
            let (negative, positive) = dimension.labels();
            DimensionRow { dimension, negative, positive, negative_count: 0, positive_count: 0, unjudged: 0 }
        })
        .collect();
    let bump = |row: &mut DimensionRow, positive: bool| {
        if positive {
            row.positive_count += 1
        } else {
            row.negative_count += 1
        }
    };
    for (record, d) in reports {
        bump(&mut rows[0], d.planqul == PlanQul::Good);
        // a Poor output has no repair verdict and counts as not fixed
        if record.transform.is_transformed() {
            bump(&mut rows[2], d.ptfixcap == Some(PtFixCap::Resolved));
        } else {
            bump(&mut rows[1], d.fixcap == Some(FixCap::Fixed));
        }
        if let Some(e) = d.elerelv {
            bump(&mut rows[3], e == ELeRelv::Relevant);
        }
    }
    rows
}

type GroupKey = (&'static str, fn(&InstanceRecord) -> String);

fn groups(records: &[InstanceRecord]) -> Vec<GroupRow> {
    let mut out = Vec::new();
    let keys: [GroupKey; 3] = [
        ("language", |r| r.language.to_string()),
        ("cwe", |r| r.cwe.clone()),
        ("transform", |r| r.transform.to_string()),
    ];
    for (by, key_of) in keys {
        let mut grouped: BTreeMap<String, Vec<&InstanceRecord>> = BTreeMap::new();
        for r in records {
            grouped.entry(key_of(r)).or_default().push(r);
        }
        for (key, members) in grouped {
            let elrm: Vec<f64> = members.iter().filter_map(|r| Metric::Elrm.of(r)).collect();
            out.push(GroupRow {
                by: by.to_string(),
                key,
                records: members.len(),
                scored: elrm.len(),
                mean_elrm: summarize(&elrm).ok().map(|s| s.mean),
            });
        }
    }
    out
}

/// Builds every report table from evaluation records and optional judgments.
///
/// Judgments are averaged over raters per (instance, model) before
/// correlating. Kappa compares the first two raters, in order of appearance,
/// on the instances both rated, treating rounded scores as categories.
pub fn aggregate(records: &[InstanceRecord], judgments: &[Judgment], config: &RunConfig) -> Result<AggregateReport, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::Empty);
    }
    let models = models(records);
    let errors = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| RecordError { id: r.id.clone(), model: r.model.clone(), error: e.clone() }))
        .collect();
    let metrics = Metric::ALL.iter().map(|&m| metric_table(records, &models, m)).collect();

    let scored_keys: HashMap<(&str, &str), &InstanceRecord> = records
        .iter()
        .filter(|r| r.is_scored())
        .map(|r| ((r.id.as_str(), r.model.as_str()), r))
        .collect();
    let mut unmatched = Vec::new();
    let mut sums: HashMap<(&str, &str), (f64, usize)> = HashMap::new();
    for j in judgments {
        let key = (j.id.as_str(), j.model.as_str());
        if scored_keys.contains_key(&key) {
            let e = sums.entry(key).or_insert((0.0, 0));
            e.0 += j.score;
            e.1 += 1;
        } else {
            unmatched.push(format!("{}/{}/{}", j.id, j.model, j.rater));
        }
    }
    let averaged: HashMap<(&str, &str), f64> = sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();

    let mut correlations = Vec::new();
    if !averaged.is_empty() {
        let all: Vec<&InstanceRecord> = records.iter().collect();
        for metric in Metric::ALL {
            correlations.push(correlation(&all, &averaged, "all", metric));
        }
        for model in &models {
            let mine: Vec<&InstanceRecord> = records.iter().filter(|r| r.model == *model).collect();
            for metric in Metric::ALL {
                correlations.push(correlation(&mine, &averaged, model, metric));
            }
        }
    }

    let kappa = {
        let raters: Vec<&str> = {
            let mut seen: IndexMap<&str, ()> = IndexMap::new();
            for j in judgments {
                seen.insert(j.rater.as_str(), ());
            }
            seen.into_keys().collect()
        };
        (raters.len() >= 2).then(|| {
            let (a, b) = (raters[0], raters[1]);
            let of_b: HashMap<(&str, &str), i64> = judgments
                .iter()
                .filter(|j| j.rater == b)
                .map(|j| ((j.id.as_str(), j.model.as_str()), j.score.round() as i64))
                .collect();
            let (xs, ys): (Vec<i64>, Vec<i64>) = judgments
                .iter()
                .filter(|j| j.rater == a)
                .filter_map(|j| Some((j.score.round() as i64, *of_b.get(&(j.id.as_str(), j.model.as_str()))?)))
                .unzip();
            KappaRow { rater_a: a.to_string(), rater_b: b.to_string(), n: xs.len(), kappa: cohens_kappa(&xs, &ys).ok() }
        })
    };

    let dimensions = models
        .iter()
        .map(|model| {
            let reports: Vec<(&InstanceRecord, &DimensionReport)> = records
                .iter()
                .filter(|r| r.model == *model)
                .filter_map(|r| r.dimensions.as_ref().map(|d| (r, d)))
                .collect();
            DimensionTable { model: model.to_string(), rows: dimension_rows(&reports) }
        })
        .collect();

    Ok(AggregateReport {
        tool_version: TOOL_VERSION.to_string(),
        config: config.provenance(),
        records: records.len(),
        scored: records.iter().filter(|r| r.is_scored()).count(),
        errors,
        metrics,
        correlations,
        kappa,
        unmatched_judgments: unmatched,
        dimensions,
        groups: groups(records),
    })
}
