//! Element-level relevance metrics for generated vulnerability fixes.
//!
//! The crate tokenizes code for Python, Java, C++ and Ruby, scores a generated
//! fix against reference fixes with ELRM (a blend of BLEU, keyword-weighted
//! BLEU, keyword/operator BLEU and string-literal similarity), assigns the
//! PLanQul, FixCap, PTFixCap and ELeRelv verdicts, renames identifiers for
//! memorization checks, and runs batch evaluations with statistics and
//! optional LLM judging.

pub mod dimensions;
pub mod elrm;
pub mod harness;
pub mod judge;
pub mod lexer;
pub mod ngram;
pub mod stats;
pub mod strings;
pub mod transforms;

pub use elrm::{elrm_score, MetricBreakdown, MetricConfig};
pub use lexer::Language;
