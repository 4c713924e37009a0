//! The element-level relevance metric.
//!
//! ```text
//! ELRM = α·BLEU + β·BLEU_weight + λ·BLEU_kwop + μ·literal_sim
//! ```
//!
//! Every component is on a 0–100 scale before the weights are applied.

use serde::{Deserialize, Serialize};

use crate::lexer::{
    extract_keywords_ops, extract_string_literals, texts, tokenize_coarse, tokenize_fine,
    Language, LexError, Token,
};
use crate::ngram::{self, EmptyPolicy, NgramConfig, NgramError, TokenWeights};
use crate::strings::literal_similarity_with;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElrmError {
    #[error(transparent)]
    Ngram(#[from] NgramError),
    #[error("invalid ELRM weights: {0}")]
    InvalidWeights(String),
    #[error("no reference could be tokenized: {0}")]
    UnlexableReferences(LexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElrmWeights {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Default for ElrmWeights {
    fn default() -> Self {
        ElrmWeights { alpha: 0.10, beta: 0.05, lambda: 0.80, mu: 0.05 }
    }
}

impl ElrmWeights {
    pub fn validate(&self) -> Result<(), ElrmError> {
        let all = [self.alpha, self.beta, self.lambda, self.mu];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ElrmError::InvalidWeights("weights must be non-negative".into()));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ElrmError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// The four sub-scores, each 0–100.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub kwop_bleu: f64,
    pub literal_sim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBreakdown {
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub kwop_bleu: f64,
    pub literal_sim: f64,
    pub elrm: f64,
    /// Set when the candidate failed to lex; all scores are then 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lex_error: Option<String>,
}

impl MetricBreakdown {
    pub fn components(&self) -> Components {
        Components {
            bleu: self.bleu,
            weighted_bleu: self.weighted_bleu,
            kwop_bleu: self.kwop_bleu,
            literal_sim: self.literal_sim,
        }
    }

    fn from_components(c: Components, elrm: f64) -> Self {
        MetricBreakdown {
            bleu: c.bleu,
            weighted_bleu: c.weighted_bleu,
            kwop_bleu: c.kwop_bleu,
            literal_sim: c.literal_sim,
            elrm,
            lex_error: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub weights: ElrmWeights,
    pub token_weights: TokenWeights,
    /// Literal score when neither side has string literals.
    pub literal_empty: EmptyPolicy,
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), ElrmError> {
        self.weights.validate()?;
        self.token_weights.validate()?;
        Ok(())
    }
}

pub fn combine(c: &Components, w: &ElrmWeights) -> Result<f64, ElrmError> {
    w.validate()?;
    Ok(w.alpha * c.bleu + w.beta * c.weighted_bleu + w.lambda * c.kwop_bleu + w.mu * c.literal_sim)
}

/// ELRM of already tokenized code; see [`elrm_score`].
pub fn score_tokens(
    candidate: &[Token],
    references: &[Vec<Token>],
    metric: &MetricConfig,
    ngram: &NgramConfig,
) -> Result<MetricBreakdown, ElrmError> {
    metric.validate()?;
    let cand_texts = texts(candidate);
    let ref_texts: Vec<Vec<&str>> = references.iter().map(|r| texts(r)).collect();
    let bleu = ngram::bleu(&cand_texts, &ref_texts, ngram)?;
    let weighted_bleu = ngram::weighted_bleu(candidate, references, &metric.token_weights, ngram)?;

    let cand_kwops = extract_keywords_ops(candidate);
    let ref_kwops: Vec<Vec<Token>> = references.iter().map(|r| extract_keywords_ops(r)).collect();
    let ref_kwop_texts: Vec<Vec<&str>> = ref_kwops.iter().map(|r| texts(r)).collect();
    let kwop_bleu = ngram::kwop_bleu(&texts(&cand_kwops), &ref_kwop_texts, ngram)?;

    let cand_lits = extract_string_literals(candidate);
    let literal_sim = references
        .iter()
        .map(|r| literal_similarity_with(&cand_lits, &extract_string_literals(r), metric.literal_empty))
        .fold(0.0, f64::max);

    let c = Components { bleu, weighted_bleu, kwop_bleu, literal_sim };
    let elrm = combine(&c, &metric.weights)?;
    Ok(MetricBreakdown::from_components(c, elrm))
}

fn lex_references<S: AsRef<str>>(
    references: &[S],
    language: Language,
) -> Result<Vec<Vec<Token>>, ElrmError> {
    if references.is_empty() {
        return Err(NgramError::NoReferences.into());
    }
    let mut lexed = Vec::new();
    let mut first_error = None;
    for r in references {
        match tokenize_fine(r.as_ref(), language) {
            Ok(t) => lexed.push(t),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) if lexed.is_empty() => Err(ElrmError::UnlexableReferences(e)),
        _ => Ok(lexed),
    }
}

/// Scores `candidate` against every reference that lexes.
///
/// A candidate that fails to lex scores 0 on every component and carries the
/// lexer error in [`MetricBreakdown::lex_error`].
pub fn elrm_score<S: AsRef<str>>(
    candidate: &str,
    references: &[S],
    language: Language,
    metric: &MetricConfig,
    ngram: &NgramConfig,
) -> Result<MetricBreakdown, ElrmError> {
    metric.validate()?;
    ngram.validate()?;
    let refs = lex_references(references, language)?;
    match tokenize_fine(candidate, language) {
        Ok(cand) => score_tokens(&cand, &refs, metric, ngram),
        Err(e) => Ok(MetricBreakdown {
            lex_error: Some(e.to_string()),
            ..MetricBreakdown::from_components(Components::default(), 0.0)
        }),
    }
}

/// Plain BLEU over whitespace tokens and over fine tokens, in that order.
pub fn baseline_bleu_scores<S: AsRef<str>>(
    candidate: &str,
    references: &[S],
    language: Language,
    ngram: &NgramConfig,
) -> Result<(f64, f64), ElrmError> {
    let refs = lex_references(references, language)?;
    let coarse_refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| tokenize_coarse(r.as_ref()).into_iter().map(|t| t.text).collect())
        .collect();
    let coarse_cand: Vec<String> = tokenize_coarse(candidate).into_iter().map(|t| t.text).collect();
    let coarse = ngram::bleu(&coarse_cand, &coarse_refs, ngram)?;
    let fine = match tokenize_fine(candidate, language) {
        Ok(cand) => {
            let fine_refs: Vec<Vec<&str>> = refs.iter().map(|r| texts(r)).collect();
            ngram::bleu(&texts(&cand), &fine_refs, ngram)?
        }
        Err(_) => 0.0,
    };
    Ok((coarse, fine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn score(c: &str, r: &[&str], lang: Language) -> MetricBreakdown {
        elrm_score(c, r, lang, &MetricConfig::default(), &NgramConfig::default()).unwrap()
    }

    #[test]
    fn combines_published_components() {
        let w = ElrmWeights::default();
        let ex1 = Components { bleu: 25.27, weighted_bleu: 70.7, kwop_bleu: 9.55, literal_sim: 0.0 };
        assert!((combine(&ex1, &w).unwrap() - 13.71).abs() < 0.01);
        let ex2 = Components { bleu: 64.07, weighted_bleu: 70.89, kwop_bleu: 100.0, literal_sim: 100.0 };
        assert!((combine(&ex2, &w).unwrap() - 94.95).abs() < 0.01);
        assert_eq!(combine(&Components::default(), &w).unwrap(), 0.0);
    }

    #[test]
    fn rejects_weights_not_summing_to_one() {
        let w = ElrmWeights { alpha: 0.5, ..Default::default() };
        assert!(matches!(combine(&Components::default(), &w), Err(ElrmError::InvalidWeights(_))));
        let neg = ElrmWeights { alpha: -0.1, beta: 0.25, ..Default::default() };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn identity_with_and_without_literals() {
        let with = score("msg = \"too long\"", &["msg = \"too long\""], Language::Python);
        assert_eq!(with.elrm, 100.0);
        let without = score("return a + b;", &["return a + b;"], Language::Java);
        assert!((without.elrm - 95.0).abs() < 1e-9);
        let vacuous = MetricConfig { literal_empty: EmptyPolicy::VacuousMatch, ..Default::default() };
        let v = elrm_score("return a;", &["return a;"], Language::Java, &vacuous, &NgramConfig::default());
        assert_eq!(v.unwrap().elrm, 100.0);
    }

    #[test]
    fn lex_errors() {
        let broken = score("x = 'open", &["x = 1"], Language::Python);
        assert_eq!(broken.elrm, 0.0);
        assert!(broken.lex_error.is_some());
        let all_bad = elrm_score(
            "x",
            &["'a", "'b"],
            Language::Python,
            &MetricConfig::default(),
            &NgramConfig::default(),
        );
        assert!(matches!(all_bad, Err(ElrmError::UnlexableReferences(_))));
        let some_bad = score("x = 1", &["'a", "x = 1"], Language::Python);
        assert!((some_bad.elrm - 95.0).abs() < 1e-9);
    }

    #[test]
    fn empty_reference_list_is_an_error() {
        let r: [&str; 0] = [];
        let out = elrm_score("x", &r, Language::Ruby, &MetricConfig::default(), &NgramConfig::default());
        assert_eq!(out, Err(ElrmError::Ngram(NgramError::NoReferences)));
    }

    #[test]
    fn baselines_differ_on_spacing() {
        let cfg = NgramConfig::default();
        let (coarse, fine) = baseline_bleu_scores("x==1", &["x == 1"], Language::Python, &cfg).unwrap();
        assert!(coarse < 100.0);
        assert_eq!(fine, 100.0);
        let same = baseline_bleu_scores("a = b", &["a = b"], Language::Python, &cfg).unwrap();
        assert_eq!(same, (100.0, 100.0));
        assert_eq!(baseline_bleu_scores("", &["a"], Language::Python, &cfg).unwrap(), (0.0, 0.0));
    }

    fn comps() -> impl Strategy<Value = Components> {
        (0.0..=100.0f64, 0.0..=100.0f64, 0.0..=100.0f64, 0.0..=100.0f64).prop_map(|(a, b, c, d)| {
            Components { bleu: a, weighted_bleu: b, kwop_bleu: c, literal_sim: d }
        })
    }

    proptest! {
        #[test]
        fn combine_is_linear_and_monotone(x in comps(), y in comps(), bump in 0.0..10.0f64) {
            let w = ElrmWeights::default();
            let sum = Components {
                bleu: x.bleu + y.bleu,
                weighted_bleu: x.weighted_bleu + y.weighted_bleu,
                kwop_bleu: x.kwop_bleu + y.kwop_bleu,
                literal_sim: x.literal_sim + y.literal_sim,
            };
            let lhs = combine(&x, &w).unwrap() + combine(&y, &w).unwrap();
            prop_assert!((lhs - combine(&sum, &w).unwrap()).abs() < 1e-9);
            let up = Components { kwop_bleu: x.kwop_bleu + bump, ..x };
            prop_assert!(combine(&up, &w).unwrap() >= combine(&x, &w).unwrap());
            let e = combine(&x, &w).unwrap();
            prop_assert!((0.0..=100.0).contains(&e));
        }
    }
}
