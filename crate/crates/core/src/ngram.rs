//! BLEU-family scores over token sequences, all on a 0–100 scale.
//!
//! Three variants share one engine:
//!
//! * [`bleu`]: clipped n-gram precision with a brevity penalty.
//! * [`weighted_bleu`]: the same with per-token weights, so that keywords
//!   count more than the rest of the code.
//! * [`kwop_bleu`]: plain BLEU over keyword/operator subsequences, with an
//!   explicit policy for the case where there is nothing to compare.
//!
//! Orders with no n-grams on the counted side (for example 3- and 4-grams of a
//! two-token candidate) are left out and the remaining order weights are
//! renormalized. An identical pair of non-empty sequences therefore always
//! scores 100, however short.

use std::collections::HashMap;

use indexmap::IndexMap;

use serde::{Deserialize, Serialize};

use crate::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NgramError {
    #[error("at least one reference is required")]
    NoReferences,
    #[error("invalid n-gram configuration: {0}")]
    InvalidConfig(String),
}

/// How a zero clipped count at some order is replaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Smoothing {
    /// Any zero count drives the score to 0.
    None,
    /// A zero count becomes `epsilon / denominator`.
    Epsilon { epsilon: f64 },
    /// Orders above the first use `(m + 1) / (d + 1)`.
    AddOne,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Epsilon { epsilon: 0.1 }
    }
}

/// Score of a keyword/operator comparison when every sequence is empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyPolicy {
    #[default]
    Zero,
    VacuousMatch,
}

/// Which n-gram orders carry token weights in [`weighted_bleu`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScope {
    /// Unigrams are weighted, longer n-grams count 1 each.
    #[default]
    Unigram,
    /// Every n-gram weighs the mean of its tokens' weights.
    AllOrders,
}

/// Which side's n-grams form the denominator in [`weighted_bleu`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Reference n-grams, clipped by the candidate.
    #[default]
    Recall,
    /// Candidate n-grams, clipped by the reference.
    Precision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramConfig {
    pub max_n: usize,
    /// One weight per order; empty means uniform.
    pub order_weights: Vec<f64>,
    pub smoothing: Smoothing,
    pub empty_kwops: EmptyPolicy,
    pub weight_scope: WeightScope,
    pub direction: Direction,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            max_n: 4,
            order_weights: Vec::new(),
            smoothing: Smoothing::default(),
            empty_kwops: EmptyPolicy::Zero,
            weight_scope: WeightScope::Unigram,
            direction: Direction::Recall,
        }
    }
}

impl NgramConfig {
    pub fn validate(&self) -> Result<(), NgramError> {
        let bad = |msg: String| Err(NgramError::InvalidConfig(msg));
        if self.max_n == 0 {
            return bad("max_n must be at least 1".into());
        }
        if !self.order_weights.is_empty() {
            if self.order_weights.len() != self.max_n {
                return bad(format!(
                    "{} order weights given for max_n = {}",
                    self.order_weights.len(),
                    self.max_n
                ));
            }
            if self.order_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return bad("order weights must be non-negative".into());
            }
            let sum: f64 = self.order_weights.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return bad(format!("order weights sum to {sum}, not 1"));
            }
        }
        if let Smoothing::Epsilon { epsilon } = self.smoothing {
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return bad(format!("smoothing epsilon {epsilon} outside (0, 1]"));
            }
        }
        Ok(())
    }

    /// The order weights with the uniform default filled in.
    pub fn weights(&self) -> Vec<f64> {
        if self.order_weights.is_empty() {
            vec![1.0 / self.max_n as f64; self.max_n]
        } else {
            self.order_weights.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenWeights {
    pub keyword_weight: f64,
    pub default_weight: f64,
}

impl Default for TokenWeights {
    fn default() -> Self {
        TokenWeights { keyword_weight: 1.0, default_weight: 0.2 }
    }
}

impl TokenWeights {
    pub fn validate(&self) -> Result<(), NgramError> {
        let ok = |w: f64| w.is_finite() && w > 0.0;
        if ok(self.keyword_weight) && ok(self.default_weight) {
            Ok(())
        } else {
            Err(NgramError::InvalidConfig("token weights must be strictly positive".into()))
        }
    }

    pub fn of(&self, token: &Token) -> f64 {
        if token.kind == TokenKind::Keyword {
            self.keyword_weight
        } else {
            self.default_weight
        }
    }
}

/// `1` when the candidate is longer than the reference, `e^(1 - r/c)` otherwise,
/// and `0` for an empty candidate.
pub fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

fn counts<T: AsRef<str>>(seq: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut map = HashMap::new();
    if seq.len() >= n {
        for window in seq.windows(n) {
            let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *map.entry(key).or_insert(0) += 1;
        }
    }
    map
}

/// Matched and total mass at one order.
struct Order {
    weight: f64,
    matched: f64,
    total: f64,
}

fn combine(orders: &[Order], smoothing: Smoothing, bp: f64) -> f64 {
    let Some(first) = orders.first() else { return 0.0 };
    if first.matched <= 0.0 {
        return 0.0;
    }
    let weight_sum: f64 = orders.iter().map(|o| o.weight).sum();
    if weight_sum <= 0.0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (i, o) in orders.iter().enumerate() {
        if o.weight == 0.0 {
            continue;
        }
        let p = match smoothing {
            _ if o.matched > 0.0 && !(smoothing == Smoothing::AddOne && i > 0) => {
                o.matched / o.total
            }
            Smoothing::None => return 0.0,
            Smoothing::Epsilon { epsilon } => epsilon / o.total,
            Smoothing::AddOne => (o.matched + 1.0) / (o.total + 1.0),
        };
        log_sum += o.weight * p.ln();
    }
    (bp * (log_sum / weight_sum).exp() * 100.0).clamp(0.0, 100.0)
}

/// Corpus-style BLEU of one candidate against several references.
///
/// Counts are clipped by their maximum over the references, and the
/// brevity penalty uses the shortest reference, so adding a reference never
/// lowers the score.
pub fn bleu<T: AsRef<str>>(
    candidate: &[T],
    references: &[Vec<T>],
    config: &NgramConfig,
) -> Result<f64, NgramError> {
    config.validate()?;
    if references.is_empty() {
        return Err(NgramError::NoReferences);
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let mut orders = Vec::new();
    for (i, weight) in config.weights().into_iter().enumerate() {
        let n = i + 1;
        if candidate.len() < n {
            break;
        }
        let cand = counts(candidate, n);
        let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
        for reference in references {
            for (gram, count) in counts(reference, n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let matched: usize =
            cand.iter().map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0))).sum();
        orders.push(Order {
            weight,
            matched: matched as f64,
            total: (candidate.len() + 1 - n) as f64,
        });
    }
    let r = references.iter().map(Vec::len).min().unwrap_or(0);
    Ok(combine(&orders, config.smoothing, brevity_penalty(candidate.len(), r)))
}

/// Keyword-weighted BLEU: the best score over the references.
pub fn weighted_bleu(
    candidate: &[Token],
    references: &[Vec<Token>],
    weights: &TokenWeights,
    config: &NgramConfig,
) -> Result<f64, NgramError> {
    config.validate()?;
    weights.validate()?;
    if references.is_empty() {
        return Err(NgramError::NoReferences);
    }
    Ok(references
        .iter()
        .map(|r| weighted_single(candidate, r, weights, config))
        .fold(0.0, f64::max))
}

fn weighted_single(
    candidate: &[Token],
    reference: &[Token],
    weights: &TokenWeights,
    config: &NgramConfig,
) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let (counted, clipping) = match config.direction {
        Direction::Recall => (reference, candidate),
        Direction::Precision => (candidate, reference),
    };
    let clip_texts = crate::lexer::texts(clipping);
    let mut orders = Vec::new();
    for (i, order_weight) in config.weights().into_iter().enumerate() {
        let n = i + 1;
        if counted.len() < n {
            break;
        }
        let weighted = n == 1 || config.weight_scope == WeightScope::AllOrders;
        // n-gram text -> (count, weight), in order of first appearance so the
        // float sums below do not depend on hashing
        let mut grams: IndexMap<Vec<&str>, (usize, f64)> = IndexMap::new();
        for window in counted.windows(n) {
            let key: Vec<&str> = window.iter().map(|t| t.text.as_str()).collect();
            let w = if weighted {
                window.iter().map(|t| weights.of(t)).sum::<f64>() / n as f64
            } else {
                1.0
            };
            grams.entry(key).or_insert((0, w)).0 += 1;
        }
        let clip = counts(&clip_texts, n);
        let mut matched = 0.0;
        let mut total = 0.0;
        for (gram, (count, w)) in &grams {
            let available = clip.get(gram).copied().unwrap_or(0);
            matched += (*count).min(available) as f64 * w;
            total += *count as f64 * w;
        }
        orders.push(Order { weight: order_weight, matched, total });
    }
    let bp = brevity_penalty(candidate.len(), reference.len());
    combine(&orders, config.smoothing, bp)
}

/// BLEU over keyword/operator subsequences, with [`EmptyPolicy`] deciding the
/// score when the candidate and every reference are empty.
pub fn kwop_bleu<T: AsRef<str>>(
    candidate: &[T],
    references: &[Vec<T>],
    config: &NgramConfig,
) -> Result<f64, NgramError> {
    config.validate()?;
    if references.is_empty() {
        return Err(NgramError::NoReferences);
    }
    if candidate.is_empty() && references.iter().all(Vec::is_empty) {
        return Ok(match config.empty_kwops {
            EmptyPolicy::Zero => 0.0,
            EmptyPolicy::VacuousMatch => 100.0,
        });
    }
    bleu(candidate, references, config)
}
