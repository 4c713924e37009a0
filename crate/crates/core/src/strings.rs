//! Similarity of string literals.
//!
//! Each literal pair is scored by three measures in `[0, 1]`: normalized
//! Levenshtein similarity, the Ratcliff/Obershelp matching-blocks ratio and
//! word-level Jaccard similarity. Their mean is the pair score. Lists of
//! literals are compared by greedily pairing the best-scoring literals first.
//! All comparisons are case-sensitive and work on Unicode scalar values.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ngram::EmptyPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiteralPairScore {
    pub levenshtein_sim: f64,
    pub matching_blocks_ratio: f64,
    pub jaccard_sim: f64,
    pub mean: f64,
}

impl LiteralPairScore {
    pub fn new(a: &str, b: &str) -> Self {
        let levenshtein_sim = levenshtein_sim(a, b);
        let matching_blocks_ratio = matching_blocks_ratio(a, b);
        let jaccard_sim = jaccard_sim(a, b);
        LiteralPairScore {
            levenshtein_sim,
            matching_blocks_ratio,
            jaccard_sim,
            mean: (levenshtein_sim + matching_blocks_ratio + jaccard_sim) / 3.0,
        }
    }
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(ca != cb)).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - distance / max(|a|, |b|)`; two empty strings are identical.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Longest common block of `a[alo..ahi]` and `b[blo..bhi]` as `(i, j, len)`,
/// earliest in `a` and then in `b` on ties.
fn longest_match(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let mut best = (alo, blo, 0);
    let mut prev = vec![0usize; bhi - blo + 1];
    let mut cur = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        for j in blo..bhi {
            let k = j - blo + 1;
            cur[k] = if a[i] == b[j] { prev[k - 1] + 1 } else { 0 };
            let len = cur[k];
            if len > best.2 {
                best = (i + 1 - len, j + 1 - len, len);
            } else if len == best.2 && len > 0 {
                let start = (i + 1 - len, j + 1 - len);
                if start < (best.0, best.1) {
                    best = (start.0, start.1, len);
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Total size of the matching blocks found by Ratcliff/Obershelp.
pub fn matched_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(&a, &b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        total += k;
        stack.push((alo, i, blo, j));
        stack.push((i + k, ahi, j + k, bhi));
    }
    total
}

/// `2M / (|a| + |b|)`, where `M` is the larger of [`matched_chars`] taken in
/// either argument order. Tie-breaking makes the block search order-dependent,
/// the maximum keeps the ratio symmetric. Two empty strings give 1.
pub fn matching_blocks_ratio(a: &str, b: &str) -> f64 {
    let len = a.chars().count() + b.chars().count();
    if len == 0 {
        return 1.0;
    }
    2.0 * matched_chars(a, b).max(matched_chars(b, a)) as f64 / len as f64
}

/// Jaccard index of the whitespace-separated word sets.
pub fn jaccard_sim(a: &str, b: &str) -> f64 {
    let wa: HashSet<&str> = a.split_whitespace().collect();
    let wb: HashSet<&str> = b.split_whitespace().collect();
    let union = wa.union(&wb).count();
    if union == 0 {
        return 1.0;
    }
    wa.intersection(&wb).count() as f64 / union as f64
}

/// Literal similarity on a 0–100 scale with the default policy: two empty
/// lists score 0.
pub fn literal_similarity<A: AsRef<str>, B: AsRef<str>>(candidate: &[A], reference: &[B]) -> f64 {
    literal_similarity_with(candidate, reference, EmptyPolicy::Zero)
}

/// Pairs literals greedily by best mean score and averages over the longer
/// list, so unpaired literals count as 0.
pub fn literal_similarity_with<A: AsRef<str>, B: AsRef<str>>(
    candidate: &[A],
    reference: &[B],
    both_empty: EmptyPolicy,
) -> f64 {
    if candidate.is_empty() && reference.is_empty() {
        return match both_empty {
            EmptyPolicy::Zero => 0.0,
            EmptyPolicy::VacuousMatch => 100.0,
        };
    }
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, c) in candidate.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            pairs.push((LiteralPairScore::new(c.as_ref(), r.as_ref()).mean, i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut used_c = vec![false; candidate.len()];
    let mut used_r = vec![false; reference.len()];
    let mut sum = 0.0;
    for (mean, i, j) in pairs {
        if !used_c[i] && !used_r[j] {
            used_c[i] = true;
            used_r[j] = true;
            sum += mean;
        }
    }
    (100.0 * sum / candidate.len().max(reference.len()) as f64).clamp(0.0, 100.0)
}
