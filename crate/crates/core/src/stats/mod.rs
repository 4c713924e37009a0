//! Descriptive statistics, paired t-tests, Pearson correlation and Cohen's kappa.

mod beta;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use beta::{ln_gamma, regularized_incomplete_beta, t_two_sided_p};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("no observations")]
    Empty,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least {needed} observations are required, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("correlation is undefined for a constant series")]
    ConstantSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 when `n == 1`.
    pub sd: f64,
}

impl Summary {
    /// A single observation has no spread to estimate.
    pub fn is_degenerate(&self) -> bool {
        self.n < 2
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn summarize(scores: &[f64]) -> Result<Summary, StatsError> {
    if scores.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = scores.len();
    let m = mean(scores);
    let sd = if n < 2 {
        0.0
    } else {
        (scores.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(Summary { n, mean: m, sd })
}

fn check_pair(xs: &[f64], ys: &[f64], needed: usize) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < needed {
        return Err(StatsError::TooShort { needed, got: xs.len() });
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys, 2)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: usize,
}

/// Paired t-test on `xs - ys`.
///
/// All-zero differences give `t = 0, p = 1`. Constant non-zero differences
/// give an infinite `t` and `p = 0`.
pub fn paired_t(xs: &[f64], ys: &[f64]) -> Result<TTest, StatsError> {
    check_pair(xs, ys, 2)?;
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let df = d.len() - 1;
    let s = summarize(&d)?;
    if s.sd == 0.0 {
        return Ok(if s.mean == 0.0 {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest { t: f64::INFINITY.copysign(s.mean), p: 0.0, df }
        });
    }
    let t = s.mean / (s.sd / (d.len() as f64).sqrt());
    Ok(TTest { t, p: t_two_sided_p(t, df as f64), df })
}

/// Cohen's kappa for two raters over the same items.
pub fn cohens_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = a.len() as f64;
    let categories: BTreeSet<&T> = a.iter().chain(b).collect();
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let expected: f64 = categories
        .iter()
        .map(|c| {
            let pa = a.iter().filter(|x| x == c).count() as f64 / n;
            let pb = b.iter().filter(|x| x == c).count() as f64 / n;
            pa * pb
        })
        .sum();
    if expected >= 1.0 {
        return Ok(1.0);
    }
    Ok(((observed - expected) / (1.0 - expected)).clamp(-1.0, 1.0))
}
