use std::fmt::Write;

use super::{Dimension, JudgeKind, JudgeMode, JudgePrompt};
use crate::dimensions::EvalInstance;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("instance {0} has no references for a reference-based prompt")]
    NoReferences(String),
}

fn question(dimension: Dimension) -> &'static str {
    match dimension {
        Dimension::PlanQul => {
            "Is the generated code well-formed for its language? Look for syntax errors such as \
             unbalanced brackets or quotes and invalid starting or ending characters."
        }
        Dimension::FixCap => "Does the generated code fix the vulnerability present in the vulnerable code?",
        Dimension::PtFixCap => {
            "The function was rewritten with semantics-preserving transformations. Does the \
             generated code still fix the vulnerability?"
        }
        Dimension::ELeRelv => {
            "The generated code may not fully fix the vulnerability. How relevant are its \
             elements (identifiers, keywords, operators, string literals) to a correct fix?"
        }
    }
}

fn block(out: &mut String, title: &str, language: &str, code: &str) {
    let _ = write!(out, "\n### {title}\n```{language}\n{code}\n```\n");
}

/// Renders the prompt for one instance. Identical arguments give identical text.
pub fn build_prompt(
    instance: &EvalInstance,
    dimension: Dimension,
    kind: JudgeKind,
    mode: JudgeMode,
) -> Result<JudgePrompt, PromptError> {
    if mode == JudgeMode::ReferenceBased && instance.references.is_empty() {
        return Err(PromptError::NoReferences(instance.id.clone()));
    }
    let lang = instance.language.as_str();
    let (neg, pos) = dimension.labels();
    let mut text = format!(
        "You are reviewing a code fix for a {cwe} vulnerability in {lang}.\n\
         Dimension: {title}.\n{q}\n",
        cwe = instance.cwe,
        title = dimension.title(),
        q = question(dimension),
    );
    block(&mut text, "Vulnerable function", lang, &instance.function);
    block(&mut text, "Vulnerable code", lang, &instance.vulnerable_code);
    match &instance.generated {
        Some(code) => block(&mut text, "Generated code", lang, code),
        None => {
            let _ = write!(
                text,
                "\n### Generated code\nThe model produced no code. An absent generation fails this dimension.\n"
            );
        }
    }
    if mode == JudgeMode::ReferenceBased {
        for (i, r) in instance.references.iter().enumerate() {
            block(&mut text, &format!("Reference fix {}", i + 1), lang, r);
        }
    }
    let _ = match kind {
        JudgeKind::Tagger => write!(
            text,
            "\nAnswer with exactly one word: {} or {}.\n",
            tag_word(neg),
            tag_word(pos)
        ),
        JudgeKind::Scorer => write!(
            text,
            "\nRate the generated code on a 5-point scale (1 = very poor, 5 = excellent). \
             Answer with a single digit.\n"
        ),
    };
    Ok(JudgePrompt { dimension, mode, kind, text })
}

fn tag_word(tag: super::Tag) -> &'static str {
    use super::Tag::*;
    match tag {
        Poor => "Poor",
        Good => "Good",
        NotFixed => "NotFixed",
        Fixed => "Fixed",
        Unresolved => "Unresolved",
        Resolved => "Resolved",
        Irrelevant => "Irrelevant",
        Relevant => "Relevant",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensions::Transform;
    use crate::lexer::Language;

    fn inst(generated: Option<&str>) -> EvalInstance {
        EvalInstance {
            id: "p1".into(),
            language: Language::Java,
            cwe: "CWE-79".into(),
            transform: Transform::Original,
            function: "void show(String s) { out.print(s); }".into(),
            vulnerable_code: "out.print(s);".into(),
            references: vec!["out.print(escape(s));".into()],
            generated: generated.map(String::from),
        }
    }

    #[test]
    fn reference_based_tagger_shows_everything() {
        let p = build_prompt(&inst(Some("out.print(clean(s));")), Dimension::PlanQul, JudgeKind::Tagger, JudgeMode::ReferenceBased)
            .unwrap();
        assert!(p.text.contains("out.print(clean(s));"));
        assert!(p.text.contains("out.print(escape(s));"));
        assert!(p.text.contains("Poor or Good"));
    }

    #[test]
    fn scorer_asks_for_a_digit() {
        let p = build_prompt(&inst(Some("x")), Dimension::FixCap, JudgeKind::Scorer, JudgeMode::ReferenceBased).unwrap();
        assert!(p.text.contains("5-point scale"));
    }

    #[test]
    fn reference_free_hides_references() {
        let p = build_prompt(&inst(Some("x")), Dimension::FixCap, JudgeKind::Tagger, JudgeMode::ReferenceFree).unwrap();
        assert!(!p.text.contains("escape"));
        assert!(!p.text.contains("Reference fix"));
    }

    #[test]
    fn absent_generation_and_determinism() {
        let a = build_prompt(&inst(None), Dimension::PlanQul, JudgeKind::Tagger, JudgeMode::ReferenceFree).unwrap();
        let b = build_prompt(&inst(None), Dimension::PlanQul, JudgeKind::Tagger, JudgeMode::ReferenceFree).unwrap();
        assert_eq!(a, b);
        assert!(a.text.contains("produced no code"));
        let mut no_refs = inst(Some("x"));
        no_refs.references.clear();
        assert!(build_prompt(&no_refs, Dimension::FixCap, JudgeKind::Tagger, JudgeMode::ReferenceBased).is_err());
    }
}
