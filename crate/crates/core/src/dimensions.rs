//! The four evaluation dimensions.
//!
//! * PLanQul: is the generated code well formed at all?
//! * FixCap: does it fix the vulnerability (original instances)?
//! * PTFixCap: does it fix the vulnerability after transformation?
//! * ELeRelv: when it does not fix it, is it still close to the fix?
//!
//! Poor language quality gates everything else: a Poor output gets no repair
//! verdict and no relevance verdict.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elrm::{elrm_score, ElrmError, MetricBreakdown, MetricConfig};
use crate::lexer::{tables, tokenize_fine, texts, Language, LexError, Token, TokenKind};
use crate::ngram::NgramConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Original,
    Renamed,
    Restructured,
    RenamedRestructured,
}

impl Transform {
    pub const ALL: [Transform; 4] = [
        Transform::Original,
        Transform::Renamed,
        Transform::Restructured,
        Transform::RenamedRestructured,
    ];

    pub fn is_transformed(self) -> bool {
        self != Transform::Original
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Original => "original",
            Transform::Renamed => "renamed",
            Transform::Restructured => "restructured",
            Transform::RenamedRestructured => "renamed_restructured",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One vulnerability instance: the vulnerable function `function`, the
/// vulnerable lines inside it, the secure reference fixes and optionally the
/// code a model generated for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalInstance {
    pub id: String,
    pub language: Language,
    pub cwe: String,
    pub transform: Transform,
    pub function: String,
    pub vulnerable_code: String,
    pub references: Vec<String>,
    #[serde(default)]
    pub generated: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanQul {
    Poor,
    Good,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixCap {
    Fixed,
    NotFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtFixCap {
    Resolved,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ELeRelv {
    Relevant,
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub planqul: PlanQul,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixcap: Option<FixCap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ptfixcap: Option<PtFixCap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elerelv: Option<ELeRelv>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<MetricBreakdown>,
}

impl DimensionReport {
    fn poor() -> Self {
        DimensionReport { planqul: PlanQul::Poor, fixcap: None, ptfixcap: None, elerelv: None, breakdown: None }
    }

    /// Whether the output was judged a working fix.
    pub fn is_fixed(&self) -> bool {
        self.fixcap == Some(FixCap::Fixed) || self.ptfixcap == Some(PtFixCap::Resolved)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    /// Minimum ELRM for a Relevant verdict.
    pub threshold: f64,
    /// Reject fragments that start or end with a token from the boundary tables.
    pub check_boundaries: bool,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        DimensionConfig { threshold: 50.0, check_boundaries: true }
    }
}

impl DimensionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if (0.0..=100.0).contains(&self.threshold) {
            Ok(())
        } else {
            Err(format!("relevance threshold {} outside [0, 100]", self.threshold))
        }
    }
}

/// Why a generation was rated Poor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoorReason {
    Absent,
    Empty,
    Lex(LexError),
    UnmatchedClose { offset: usize },
    UnclosedOpen { offset: usize },
    MismatchedClose { offset: usize },
    BadStart(String),
    BadEnd(String),
}

impl fmt::Display for PoorReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoorReason::Absent => f.write_str("no code was generated"),
            PoorReason::Empty => f.write_str("generated code is empty"),
            PoorReason::Lex(e) => write!(f, "{e}"),
            PoorReason::UnmatchedClose { offset } => write!(f, "unmatched closing bracket at byte {offset}"),
            PoorReason::UnclosedOpen { offset } => write!(f, "bracket opened at byte {offset} is never closed"),
            PoorReason::MismatchedClose { offset } => write!(f, "mismatched closing bracket at byte {offset}"),
            PoorReason::BadStart(t) => write!(f, "fragment cannot start with {t:?}"),
            PoorReason::BadEnd(t) => write!(f, "fragment cannot end with {t:?}"),
        }
    }
}

fn bracket_problem(tokens: &[Token]) -> Option<PoorReason> {
    let mut stack: Vec<(char, usize)> = Vec::new();
    for t in tokens {
        if !matches!(t.kind, TokenKind::Delimiter | TokenKind::Operator) {
            continue;
        }
        let open = match t.text.as_str() {
            "(" | "[" | "{" => {
                stack.push((t.text.chars().next().unwrap_or('('), t.offset));
                continue;
            }
            ")" => '(',
            "]" => '[',
            "}" => '{',
            _ => continue,
        };
        match stack.pop() {
            None => return Some(PoorReason::UnmatchedClose { offset: t.offset }),
            Some((o, _)) if o != open => return Some(PoorReason::MismatchedClose { offset: t.offset }),
            Some(_) => {}
        }
    }
    stack.first().map(|&(_, offset)| PoorReason::UnclosedOpen { offset })
}

/// The first reason `generated` fails PLanQul, or `None` when it passes.
pub fn planqul_problem(
    generated: Option<&str>,
    language: Language,
    check_boundaries: bool,
) -> Option<PoorReason> {
    let Some(code) = generated else { return Some(PoorReason::Absent) };
    let tokens = match tokenize_fine(code, language) {
        Ok(t) => t,
        Err(e) => return Some(PoorReason::Lex(e)),
    };
    let (Some(first), Some(last)) = (tokens.first(), tokens.last()) else {
        return Some(PoorReason::Empty);
    };
    if let Some(problem) = bracket_problem(&tokens) {
        return Some(problem);
    }
    if check_boundaries {
        let t = tables(language);
        if t.invalid_first.contains(first.text.as_str()) {
            return Some(PoorReason::BadStart(first.text.clone()));
        }
        if t.invalid_last.contains(last.text.as_str()) {
            return Some(PoorReason::BadEnd(last.text.clone()));
        }
    }
    None
}

pub fn check_planqul(generated: Option<&str>, language: Language) -> PlanQul {
    match planqul_problem(generated, language, true) {
        Some(_) => PlanQul::Poor,
        None => PlanQul::Good,
    }
}

/// Token-level equality with any reference; whitespace and comments are ignored.
pub fn check_exact_match<S: AsRef<str>>(generated: &str, references: &[S], language: Language) -> bool {
    let Ok(gen) = tokenize_fine(generated, language) else { return false };
    let gen = texts(&gen);
    references.iter().any(|r| {
        tokenize_fine(r.as_ref(), language).is_ok_and(|toks| texts(&toks) == gen)
    })
}

pub fn check_elerelv(breakdown: &MetricBreakdown, threshold: f64) -> ELeRelv {
    if breakdown.elrm >= threshold {
        ELeRelv::Relevant
    } else {
        ELeRelv::Irrelevant
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("instance {id}: {source}")]
pub struct InstanceError {
    pub id: String,
    #[source]
    pub source: ElrmError,
}

/// Every setting needed to score one instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoringConfig {
    pub metric: MetricConfig,
    pub ngram: NgramConfig,
    pub dimensions: DimensionConfig,
}

pub fn evaluate_instance(
    instance: &EvalInstance,
    config: &ScoringConfig,
) -> Result<DimensionReport, InstanceError> {
    let language = instance.language;
    let generated = instance.generated.as_deref();
    if planqul_problem(generated, language, config.dimensions.check_boundaries).is_some() {
        return Ok(DimensionReport::poor());
    }
    let code = generated.unwrap_or_default();
    let fixed = check_exact_match(code, &instance.references, language);
    let mut report = DimensionReport {
        planqul: PlanQul::Good,
        fixcap: None,
        ptfixcap: None,
        elerelv: None,
        breakdown: None,
    };
    if instance.transform.is_transformed() {
        report.ptfixcap = Some(if fixed { PtFixCap::Resolved } else { PtFixCap::Unresolved });
    } else {
        report.fixcap = Some(if fixed { FixCap::Fixed } else { FixCap::NotFixed });
    }
    if !fixed {
        let breakdown = elrm_score(code, &instance.references, language, &config.metric, &config.ngram)
            .map_err(|source| InstanceError { id: instance.id.clone(), source })?;
        report.elerelv = Some(check_elerelv(&breakdown, config.dimensions.threshold));
        report.breakdown = Some(breakdown);
    }
    Ok(report)
}
