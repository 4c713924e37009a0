use super::{Dimension, JudgeKind, JudgeVerdict, Tag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no {dimension} label in response {raw:?}")]
    NoLabel { dimension: Dimension, raw: String },
    #[error("no score in response {0:?}")]
    NoScore(String),
    #[error("score {0} outside 1-5")]
    OutOfRange(i64),
}

/// Word sequences accepted for each category, longest first.
fn phrases(tag: Tag) -> &'static [&'static [&'static str]] {
    match tag {
        Tag::Poor => &[&["poor"]],
        Tag::Good => &[&["good"]],
        Tag::NotFixed => &[&["not", "fixed"], &["notfixed"], &["unfixed"]],
        Tag::Fixed => &[&["fixed"]],
        Tag::Unresolved => &[&["not", "resolved"], &["unresolved"], &["unres"]],
        Tag::Resolved => &[&["resolved"], &["res"]],
        Tag::Irrelevant => &[&["not", "relevant"], &["irrelevant"], &["irre"]],
        Tag::Relevant => &[&["relevant"], &["rel"]],
    }
}

fn parse_tag(raw: &str, dimension: Dimension) -> Result<Tag, ParseError> {
    let lowered = raw.to_lowercase();
    let words: Vec<&str> = lowered.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).collect();
    let (neg, pos) = dimension.labels();
    for i in 0..words.len() {
        // the negative label first so "not fixed" is not read as "fixed"
        for tag in [neg, pos] {
            if phrases(tag).iter().any(|p| words[i..].starts_with(p)) {
                return Ok(tag);
            }
        }
    }
    Err(ParseError::NoLabel { dimension, raw: raw.to_string() })
}

fn parse_score(raw: &str) -> Result<u8, ParseError> {
    let start = raw.find(|c: char| c.is_ascii_digit()).ok_or_else(|| ParseError::NoScore(raw.to_string()))?;
    let digits: String = raw[start..].chars().take_while(char::is_ascii_digit).collect();
    let negative = raw[..start].ends_with('-');
    let value: i64 = digits.parse().unwrap_or(i64::MAX);
    let value = if negative { -value } else { value };
    match u8::try_from(value) {
        Ok(v @ 1..=5) => Ok(v),
        _ => Err(ParseError::OutOfRange(value)),
    }
}

/// Extracts the first label (tagger) or the first integer (scorer) from a response.
pub fn parse_verdict(response: &str, kind: JudgeKind, dimension: Dimension) -> Result<JudgeVerdict, ParseError> {
    let raw = response.to_string();
    match kind {
        JudgeKind::Tagger => Ok(JudgeVerdict { kind, tag: Some(parse_tag(response, dimension)?), score: None, raw }),
        JudgeKind::Scorer => Ok(JudgeVerdict { kind, tag: None, score: Some(parse_score(response)?), raw }),
    }
}
