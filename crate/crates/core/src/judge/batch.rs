use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{build_prompt, parse_verdict, Dimension, JudgeKind, JudgeMode, JudgeRequest, JudgeVerdict, PromptError, Tag, Transport};
use crate::dimensions::EvalInstance;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JudgeError {
    #[error("no instances to judge")]
    EmptyBatch,
    #[error("no dimensions requested")]
    NoDimensions,
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeSettings {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Attempts per call, counting the first.
    pub max_attempts: u32,
    /// Calls in flight at once.
    pub concurrency: usize,
    /// Lowest score counted as the passing category.
    pub positive_from: u8,
    pub timeout_secs: u64,
}

impl Default for JudgeSettings {
    fn default() -> Self {
        JudgeSettings {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            api_key_env: "FIXEVAL_API_KEY".into(),
            max_attempts: 3,
            concurrency: 4,
            positive_from: 3,
            timeout_secs: 60,
        }
    }
}

impl JudgeSettings {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts == 0 {
            return Err("judge.max_attempts must be at least 1".into());
        }
        if self.concurrency == 0 {
            return Err("judge.concurrency must be at least 1".into());
        }
        if !(1..=5).contains(&self.positive_from) {
            return Err(format!("judge.positive_from {} outside 1-5", self.positive_from));
        }
        Ok(())
    }
}

/// One request/response exchange, kept for auditing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallLog {
    pub key: String,
    pub model: String,
    pub timestamp_ms: u128,
    pub attempt: u32,
    pub request: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeOutcome {
    pub instance_id: String,
    pub dimension: Dimension,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<JudgeVerdict>,
    /// `None` when the instance could not be judged.
    pub category: Option<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Category counts for one dimension over the judged instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub dimension: Dimension,
    pub negative: Tag,
    pub positive: Tag,
    pub negative_count: usize,
    pub positive_count: usize,
    pub unjudged: usize,
}

impl DimensionRow {
    pub fn judged(&self) -> usize {
        self.negative_count + self.positive_count
    }

    /// Percentages of the failing and passing category, one decimal each,
    /// always summing to exactly 100 (both 0 when nothing was judged).
    pub fn percentages(&self) -> (f64, f64) {
        let n = self.judged();
        if n == 0 {
            return (0.0, 0.0);
        }
        let neg = (1000.0 * self.negative_count as f64 / n as f64).round() / 10.0;
        (neg, (1000.0 - neg * 10.0).round() / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeReport {
    pub model: String,
    pub kind: JudgeKind,
    pub mode: JudgeMode,
    pub outcomes: Vec<JudgeOutcome>,
    pub rows: Vec<DimensionRow>,
    pub logs: Vec<CallLog>,
}

fn applies(dimension: Dimension, instance: &EvalInstance) -> bool {
    match dimension {
        Dimension::FixCap => !instance.transform.is_transformed(),
        Dimension::PtFixCap => instance.transform.is_transformed(),
        Dimension::PlanQul | Dimension::ELeRelv => true,
    }
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

type Slot = Mutex<Option<(JudgeOutcome, Vec<CallLog>)>>;

fn judge_one(
    request: &JudgeRequest,
    transport: &dyn Transport,
    settings: &JudgeSettings,
) -> (JudgeOutcome, Vec<CallLog>) {
    let mut logs = Vec::new();
    let mut outcome = JudgeOutcome {
        instance_id: request.instance_id.clone(),
        dimension: request.dimension,
        verdict: None,
        category: None,
        error: None,
    };
    for attempt in 1..=settings.max_attempts {
        let timestamp_ms = now_ms();
        let result = transport.send(request);
        logs.push(CallLog {
            key: request.key(),
            model: transport.model_id().to_string(),
            timestamp_ms,
            attempt,
            request: request.prompt.clone(),
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(ToString::to_string),
        });
        match result {
            Ok(text) => {
                match parse_verdict(&text, request.kind, request.dimension) {
                    Ok(v) => {
                        outcome.category = v.category(request.dimension, settings.positive_from);
                        outcome.verdict = Some(v);
                        outcome.error = None;
                    }
                    Err(e) => outcome.error = Some(e.to_string()),
                }
                break;
            }
            Err(e) => outcome.error = Some(e.to_string()),
        }
    }
    (outcome, logs)
}

/// Asks `transport` about every applicable (instance, dimension) pair.
///
/// FixCap applies to original instances only and PTFixCap to transformed
/// ones. Calls that still fail after the allowed attempts, and answers that
/// cannot be parsed, leave the instance unjudged: it is counted but kept out
/// of the percentages. Outcomes and logs come back in instance order whatever
/// the concurrency.
pub fn judge_batch(
    instances: &[EvalInstance],
    dimensions: &[Dimension],
    kind: JudgeKind,
    mode: JudgeMode,
    transport: &dyn Transport,
    settings: &JudgeSettings,
) -> Result<JudgeReport, JudgeError> {
    if instances.is_empty() {
        return Err(JudgeError::EmptyBatch);
    }
    if dimensions.is_empty() {
        return Err(JudgeError::NoDimensions);
    }
    let mut requests = Vec::new();
    for inst in instances {
        for &dim in dimensions {
            if applies(dim, inst) {
                let prompt = build_prompt(inst, dim, kind, mode)?;
                requests.push(JudgeRequest {
                    instance_id: inst.id.clone(),
                    dimension: dim,
                    kind,
                    mode,
                    prompt: prompt.text,
                });
            }
        }
    }

    let slots: Vec<Slot> = requests.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = settings.concurrency.max(1).min(requests.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(request) = requests.get(i) else { break };
                let result = judge_one(request, transport, settings);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(result);
            });
        }
    });

    let mut outcomes = Vec::with_capacity(requests.len());
    let mut logs = Vec::new();
    for slot in slots {
        if let Some((outcome, mut call_logs)) = slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
            outcomes.push(outcome);
            logs.append(&mut call_logs);
        }
    }

    let rows = dimensions
        .iter()
        .map(|&dim| {
            let (negative, positive) = dim.labels();
            let mut row = DimensionRow { dimension: dim, negative, positive, negative_count: 0, positive_count: 0, unjudged: 0 };
            for o in outcomes.iter().filter(|o| o.dimension == dim) {
                match o.category {
                    Some(t) if t == positive => row.positive_count += 1,
                    Some(_) => row.negative_count += 1,
                    None => row.unjudged += 1,
                }
            }
            row
        })
        .collect();

    Ok(JudgeReport { model: transport.model_id().to_string(), kind, mode, outcomes, rows, logs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensions::Transform;
    use crate::judge::{ReplayRecord, ReplayTransport, TransportError};
    use crate::lexer::Language;
    use std::sync::atomic::AtomicU32;

    fn instances(n: usize) -> Vec<EvalInstance> {
        (0..n)
            .map(|i| EvalInstance {
                id: format!("i{i}"),
                language: Language::Python,
                cwe: "CWE-20".into(),
                transform: Transform::Original,
                function: "def f(x): return x".into(),
                vulnerable_code: "return x".into(),
                references: vec!["return int(x)".into()],
                generated: Some("return str(x)".into()),
            })
            .collect()
    }

    fn replay(answers: &[&str]) -> ReplayTransport {
        ReplayTransport::new(
            "judge",
            answers.iter().enumerate().map(|(i, a)| ReplayRecord {
                key: format!("i{i}/planqul/tagger/reference_based"),
                response: Some(a.to_string()),
                error: None,
                request: None,
            }),
        )
    }

    #[test]
    fn counts_table_shape() {
        let answers: Vec<&str> = (0..20).map(|i| if i < 12 { "Poor" } else { "Good" }).collect();
        let report = judge_batch(
            &instances(20),
            &[Dimension::PlanQul],
            JudgeKind::Tagger,
            JudgeMode::ReferenceBased,
            &replay(&answers),
            &JudgeSettings::default(),
        )
        .unwrap();
        let row = &report.rows[0];
        assert_eq!((row.negative_count, row.positive_count, row.unjudged), (12, 8, 0));
        assert_eq!(row.percentages(), (60.0, 40.0));
        assert_eq!(report.logs.len(), 20);
        assert!(report.logs.iter().all(|l| l.model == "judge" && l.timestamp_ms > 0));
    }

    #[test]
    fn failures_are_unjudged() {
        let report = judge_batch(
            &instances(3),
            &[Dimension::PlanQul],
            JudgeKind::Tagger,
            JudgeMode::ReferenceBased,
            &replay(&["Good", "no idea"]),
            &JudgeSettings { max_attempts: 2, ..Default::default() },
        )
        .unwrap();
        let row = &report.rows[0];
        assert_eq!((row.positive_count, row.unjudged), (1, 2));
        assert_eq!(row.percentages(), (0.0, 100.0));
        // the missing record was tried twice, the unparsable answer once
        assert_eq!(report.logs.len(), 4);
    }

    struct Flaky(AtomicU32);

    impl Transport for Flaky {
        fn model_id(&self) -> &str {
            "flaky"
        }
        fn send(&self, _: &JudgeRequest) -> Result<String, TransportError> {
            if self.0.fetch_add(1, Ordering::SeqCst).is_multiple_of(2) {
                Err(TransportError::Failed("503".into()))
            } else {
                Ok("4".into())
            }
        }
    }

    #[test]
    fn retries_recover_and_scores_are_cut() {
        let report = judge_batch(
            &instances(1),
            &[Dimension::FixCap],
            JudgeKind::Scorer,
            JudgeMode::ReferenceFree,
            &Flaky(AtomicU32::new(0)),
            &JudgeSettings { concurrency: 1, ..Default::default() },
        )
        .unwrap();
        assert_eq!(report.outcomes[0].category, Some(Tag::Fixed));
        assert_eq!(report.logs.len(), 2);
        assert_eq!(report.rows[0].percentages(), (0.0, 100.0));
    }

    #[test]
    fn rejects_empty_batches() {
        let t = replay(&[]);
        let s = JudgeSettings::default();
        assert_eq!(
            judge_batch(&[], &[Dimension::PlanQul], JudgeKind::Tagger, JudgeMode::ReferenceFree, &t, &s),
            Err(JudgeError::EmptyBatch)
        );
    }

    #[test]
    fn percentages_round_to_one_hundred() {
        for n in 1..60 {
            for neg in 0..=n {
                let row = DimensionRow {
                    dimension: Dimension::PlanQul,
                    negative: Tag::Poor,
                    positive: Tag::Good,
                    negative_count: neg,
                    positive_count: n - neg,
                    unjudged: 0,
                };
                let (a, b) = row.percentages();
                assert!((a + b - 100.0).abs() < 1e-9);
            }
        }
    }
}
