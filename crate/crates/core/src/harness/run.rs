use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::dataset::ModelOutputs;
use crate::dimensions::{evaluate_instance, DimensionReport, EvalInstance, ScoringConfig, Transform};
use crate::elrm::{baseline_bleu_scores, elrm_score, MetricBreakdown};
use crate::lexer::Language;

/// The evaluation of one model's output for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub model: String,
    pub language: Language,
    pub cwe: String,
    pub transform: Transform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<DimensionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu_coarse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu_fine: Option<f64>,
    /// Why the instance could not be scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceRecord {
    pub fn is_scored(&self) -> bool {
        self.error.is_none() && self.metrics.is_some()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("writing records: {0}")]
    Sink(#[from] std::io::Error),
}

/// Scores one instance whose `generated` field holds the model's output.
///
/// A missing generation scores 0 on every metric. A generation that does not
/// lex, or references that all fail to lex, yield a record with `error` set
/// and no scores.
pub fn evaluate_record(instance: &EvalInstance, model: &str, config: &ScoringConfig) -> InstanceRecord {
    let mut record = InstanceRecord {
        id: instance.id.clone(),
        model: model.to_string(),
        language: instance.language,
        cwe: instance.cwe.clone(),
        transform: instance.transform,
        dimensions: None,
        metrics: None,
        bleu_coarse: None,
        bleu_fine: None,
        error: None,
    };
    let report = match evaluate_instance(instance, config) {
        Ok(r) => r,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.dimensions = Some(report);
    let code = instance.generated.as_deref().unwrap_or_default();
    let lang = instance.language;
    let scored = elrm_score(code, &instance.references, lang, &config.metric, &config.ngram)
        .and_then(|m| baseline_bleu_scores(code, &instance.references, lang, &config.ngram).map(|b| (m, b)));
    match scored {
        Ok((metrics, _)) if metrics.lex_error.is_some() => {
            record.error = metrics.lex_error.map(|e| format!("generated code: {e}"));
        }
        Ok((metrics, (coarse, fine))) => {
            record.metrics = Some(metrics);
            record.bleu_coarse = Some(coarse);
            record.bleu_fine = Some(fine);
        }
        Err(e) => record.error = Some(format!("instance {}: {e}", instance.id)),
    }
    record
}

/// Every (model, instance) pair in model order, then dataset order.
fn jobs(instances: &[EvalInstance], outputs: &ModelOutputs) -> Vec<(String, EvalInstance)> {
    let mut out = Vec::new();
    for (model, generated) in &outputs.by_model {
        for inst in instances {
            let mut with = inst.clone();
            with.generated = generated.get(&inst.id).cloned().flatten();
            out.push((model.clone(), with));
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn score_chunk(chunk: &[(String, EvalInstance)], scoring: &ScoringConfig, pool: &rayon::ThreadPool) -> Vec<InstanceRecord> {
    use rayon::prelude::*;
    pool.install(|| chunk.par_iter().map(|(m, i)| evaluate_record(i, m, scoring)).collect())
}

/// Evaluates every model output, handing records to `sink` chunk by chunk in a
/// fixed order, and returns them all. The result does not depend on the
/// number of worker threads. Per-instance failures become records with
/// `error` set and never stop the run.
pub fn run_eval(
    instances: &[EvalInstance],
    outputs: &ModelOutputs,
    config: &RunConfig,
    mut sink: impl FnMut(&InstanceRecord) -> std::io::Result<()>,
) -> Result<Vec<InstanceRecord>, RunError> {
    config.validate()?;
    let scoring = config.scoring();
    let jobs = jobs(instances, outputs);
    #[cfg(feature = "parallel")]
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.run.parallelism {
            builder = builder.num_threads(n);
        }
        builder.build().map_err(|e| RunError::Pool(e.to_string()))?
    };
    let mut records = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(config.run.chunk_size) {
        #[cfg(feature = "parallel")]
        let scored = score_chunk(chunk, &scoring, &pool);
        #[cfg(not(feature = "parallel"))]
        let scored: Vec<InstanceRecord> = chunk.iter().map(|(m, i)| evaluate_record(i, m, &scoring)).collect();
        for r in &scored {
            sink(r)?;
        }
        records.extend(scored);
    }
    Ok(records)
}

pub fn write_records(records: &[InstanceRecord], mut out: impl std::io::Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_records(reader: impl std::io::BufRead) -> Result<Vec<InstanceRecord>, super::dataset::DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| super::dataset::DatasetError::Malformed { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| super::dataset::DatasetError::Malformed { line: i + 1, message: e.to_string() })?,
        );
    }
    Ok(out)
}
