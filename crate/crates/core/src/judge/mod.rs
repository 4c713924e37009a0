//! LLM-as-judge harness.
//!
//! A *tagger* answers with a dimension category (`Good`, `NotFixed`, ...). A
//! *scorer* answers with a 1–5 quality score, which is then cut into the same
//! two categories. Prompts either show the reference fixes or withhold them.
//!
//! Models are reached through a [`Transport`], so recorded responses can be
//! replayed in place of a live endpoint.

mod batch;
mod parse;
mod prompt;
mod transport;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use batch::{judge_batch, CallLog, DimensionRow, JudgeError, JudgeOutcome, JudgeReport, JudgeSettings};
pub use parse::{parse_verdict, ParseError};
pub use prompt::{build_prompt, PromptError};
pub use transport::{JudgeRequest, ReplayRecord, ReplayTransport, Transport, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    PlanQul,
    FixCap,
    PtFixCap,
    ELeRelv,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::PlanQul, Dimension::FixCap, Dimension::PtFixCap, Dimension::ELeRelv];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::PlanQul => "planqul",
            Dimension::FixCap => "fixcap",
            Dimension::PtFixCap => "ptfixcap",
            Dimension::ELeRelv => "elerelv",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dimension::PlanQul => "PLanQul",
            Dimension::FixCap => "FixCap",
            Dimension::PtFixCap => "PTFixCap",
            Dimension::ELeRelv => "ELeRelv",
        }
    }

    /// The failing and the passing category.
    pub fn labels(self) -> (Tag, Tag) {
        match self {
            Dimension::PlanQul => (Tag::Poor, Tag::Good),
            Dimension::FixCap => (Tag::NotFixed, Tag::Fixed),
            Dimension::PtFixCap => (Tag::Unresolved, Tag::Resolved),
            Dimension::ELeRelv => (Tag::Irrelevant, Tag::Relevant),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

impl std::str::FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown dimension {s:?} (expected planqul, fixcap, ptfixcap or elerelv)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeKind {
    Tagger,
    Scorer,
}

impl JudgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgeKind::Tagger => "tagger",
            JudgeKind::Scorer => "scorer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeMode {
    ReferenceBased,
    ReferenceFree,
}

impl JudgeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgeMode::ReferenceBased => "reference_based",
            JudgeMode::ReferenceFree => "reference_free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Poor,
    Good,
    NotFixed,
    Fixed,
    Unresolved,
    Resolved,
    Irrelevant,
    Relevant,
}

impl Tag {
    pub fn dimension(self) -> Dimension {
        match self {
            Tag::Poor | Tag::Good => Dimension::PlanQul,
            Tag::NotFixed | Tag::Fixed => Dimension::FixCap,
            Tag::Unresolved | Tag::Resolved => Dimension::PtFixCap,
            Tag::Irrelevant | Tag::Relevant => Dimension::ELeRelv,
        }
    }

    pub fn is_positive(self) -> bool {
        self.dimension().labels().1 == self
    }

    /// Column heading in percentage tables.
    pub fn short(self) -> &'static str {
        match self {
            Tag::Poor => "Poor",
            Tag::Good => "Good",
            Tag::NotFixed => "Not Fixed",
            Tag::Fixed => "Fixed",
            Tag::Unresolved => "UnRes.",
            Tag::Resolved => "Res.",
            Tag::Irrelevant => "Irre.",
            Tag::Relevant => "Rel.",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgePrompt {
    pub dimension: Dimension,
    pub mode: JudgeMode,
    pub kind: JudgeKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub kind: JudgeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<u8>,
    pub raw: String,
}

impl JudgeVerdict {
    /// The category, cutting scores at `positive_from` (scores at or above are positive).
    pub fn category(&self, dimension: Dimension, positive_from: u8) -> Option<Tag> {
        match (self.tag, self.score) {
            (Some(tag), _) => Some(tag),
            (None, Some(score)) => {
                let (neg, pos) = dimension.labels();
                Some(if score >= positive_from { pos } else { neg })
            }
            (None, None) => None,
        }
    }
}
