//! Browser bindings: score a candidate, tokenize a snippet, rename identifiers.
//!
//! Every export returns a JSON string; errors surface as thrown JS errors.

use std::collections::HashSet;

use fixeval::dimensions::{check_elerelv, planqul_problem, PlanQul};
use fixeval::elrm::{baseline_bleu_scores, elrm_score, MetricConfig};
use fixeval::lexer::{extract_keywords_ops, extract_string_literals, texts, tokenize_fine, Language};
use fixeval::ngram::NgramConfig;
use fixeval::transforms::{build_rename_map, rename_source};
use serde_json::json;
use wasm_bindgen::prelude::*;

const ELERELV_THRESHOLD: f64 = 50.0;

fn language(name: &str) -> Result<Language, String> {
    name.parse().map_err(|e| format!("{e}"))
}

pub fn score_json(lang: &str, candidate: &str, references: &[String]) -> Result<String, String> {
    let language = language(lang)?;
    let ngram = NgramConfig::default();
    let breakdown =
        elrm_score(candidate, references, language, &MetricConfig::default(), &ngram).map_err(|e| e.to_string())?;
    let (coarse, fine) = baseline_bleu_scores(candidate, references, language, &ngram).map_err(|e| e.to_string())?;
    let problem = planqul_problem(Some(candidate), language, true);
    let planqul = if problem.is_some() { PlanQul::Poor } else { PlanQul::Good };
    Ok(json!({
        "breakdown": breakdown,
        "bleu_coarse": coarse,
        "bleu_fine": fine,
        "planqul": planqul,
        "planqul_reason": problem.map(|p| p.to_string()),
        "elerelv": check_elerelv(&breakdown, ELERELV_THRESHOLD),
    })
    .to_string())
}

pub fn tokenize_json(lang: &str, source: &str) -> Result<String, String> {
    let tokens = tokenize_fine(source, language(lang)?).map_err(|e| e.to_string())?;
    let kwop = extract_keywords_ops(&tokens);
    Ok(json!({
        "tokens": tokens,
        "keywords_ops": texts(&kwop),
        "literals": extract_string_literals(&tokens),
    })
    .to_string())
}

pub fn rename_json(lang: &str, source: &str, preserve: &str) -> Result<String, String> {
    let language = language(lang)?;
    let tokens = tokenize_fine(source, language).map_err(|e| e.to_string())?;
    let mut preserve: HashSet<String> =
        preserve.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    preserve.extend(language.builtin_names().map(String::from));
    let map = build_rename_map(&tokens, language, &preserve);
    let renamed = rename_source(source, language, &map).map_err(|e| e.to_string())?;
    Ok(json!({ "renamed": renamed, "map": map }).to_string())
}

/// ELRM breakdown, baseline BLEU and the PLanQul/ELeRelv verdicts.
#[wasm_bindgen]
pub fn score(lang: &str, candidate: &str, references: Vec<String>) -> Result<String, JsError> {
    score_json(lang, candidate, &references).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tokenize(lang: &str, source: &str) -> Result<String, JsError> {
    tokenize_json(lang, source).map_err(|e| JsError::new(&e))
}

/// `preserve` is a comma-separated list of names to leave alone.
#[wasm_bindgen]
pub fn rename(lang: &str, source: &str, preserve: &str) -> Result<String, JsError> {
    rename_json(lang, source, preserve).map_err(|e| JsError::new(&e))
}
