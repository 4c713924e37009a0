use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dimensions::{EvalInstance, Transform};
use crate::lexer::Language;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown language {tag:?}")]
    UnknownLanguage { line: usize, tag: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: instance {id:?} has no references")]
    NoReferences { line: usize, id: String },
    #[error("line {line}: output for unknown instance {id:?}")]
    UnknownInstance { line: usize, id: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    id: String,
    language: String,
    cwe: String,
    transform: Transform,
    function: String,
    vulnerable_code: String,
    references: Vec<String>,
    #[serde(default)]
    generated: Option<String>,
}

fn lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String), DatasetError>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(DatasetError::Malformed { line: i + 1, message: e.to_string() })),
    })
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, DatasetError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
}

/// Parses one instance per line, skipping blank lines.
pub fn parse_dataset(reader: impl BufRead) -> Result<Vec<EvalInstance>, DatasetError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let raw: RawInstance =
            serde_json::from_str(&text).map_err(|e| DatasetError::Malformed { line, message: e.to_string() })?;
        let language: Language =
            raw.language.parse().map_err(|_| DatasetError::UnknownLanguage { line, tag: raw.language.clone() })?;
        if raw.references.is_empty() {
            return Err(DatasetError::NoReferences { line, id: raw.id });
        }
        if !seen.insert(raw.id.clone()) {
            return Err(DatasetError::DuplicateId { line, id: raw.id });
        }
        out.push(EvalInstance {
            id: raw.id,
            language,
            cwe: raw.cwe,
            transform: raw.transform,
            function: raw.function,
            vulnerable_code: raw.vulnerable_code,
            references: raw.references,
            generated: raw.generated,
        });
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<EvalInstance>, DatasetError> {
    parse_dataset(open(path)?)
}

pub fn write_dataset(instances: &[EvalInstance], mut out: impl Write) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// One model's generation for one instance; `null` means it produced nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOutput {
    pub id: String,
    pub model: String,
    pub generated: Option<String>,
}

/// Generations per model, models in the order they first appear.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelOutputs {
    pub by_model: IndexMap<String, IndexMap<String, Option<String>>>,
}

impl ModelOutputs {
    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.by_model.keys().map(String::as_str)
    }

    /// Generations given inline in the dataset, under one model name.
    pub fn inline(instances: &[EvalInstance], model: &str) -> Self {
        let outputs = instances.iter().map(|i| (i.id.clone(), i.generated.clone())).collect();
        ModelOutputs { by_model: [(model.to_string(), outputs)].into_iter().collect() }
    }
}

/// Reads a sidecar outputs file, checking ids against `instances` when given.
pub fn parse_outputs(reader: impl BufRead, instances: Option<&[EvalInstance]>) -> Result<ModelOutputs, DatasetError> {
    let known: Option<HashSet<&str>> = instances.map(|all| all.iter().map(|i| i.id.as_str()).collect());
    let mut outputs = ModelOutputs::default();
    for item in lines(reader) {
        let (line, text) = item?;
        let rec: ModelOutput =
            serde_json::from_str(&text).map_err(|e| DatasetError::Malformed { line, message: e.to_string() })?;
        if known.as_ref().is_some_and(|k| !k.contains(rec.id.as_str())) {
            return Err(DatasetError::UnknownInstance { line, id: rec.id });
        }
        let per_model = outputs.by_model.entry(rec.model.clone()).or_default();
        if per_model.insert(rec.id.clone(), rec.generated).is_some() {
            return Err(DatasetError::DuplicateId { line, id: format!("{}/{}", rec.model, rec.id) });
        }
    }
    Ok(outputs)
}

pub fn load_outputs(path: &Path, instances: Option<&[EvalInstance]>) -> Result<ModelOutputs, DatasetError> {
    parse_outputs(open(path)?, instances)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"a","language":"python","cwe":"CWE-22","transform":"original","function":"def f(): pass","vulnerable_code":"pass","references":["return"]}"#;

    #[test]
    fn loads_valid_lines() {
        let text = format!("{LINE}\n\n{}\n{}\n", LINE.replace("\"a\"", "\"b\""), LINE.replace("\"a\"", "\"c\""));
        let got = parse_dataset(text.as_bytes()).unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(got[1].id, "b");
        let mut buf = Vec::new();
        write_dataset(&got, &mut buf).unwrap();
        assert_eq!(parse_dataset(buf.as_slice()).unwrap(), got);
    }

    #[test]
    fn load_errors() {
        let dup = format!("{LINE}\n{LINE}\n");
        assert!(matches!(parse_dataset(dup.as_bytes()), Err(DatasetError::DuplicateId { line: 2, ref id }) if id == "a"));
        let no_refs = LINE.replace(r#"["return"]"#, "[]");
        assert!(matches!(parse_dataset(no_refs.as_bytes()), Err(DatasetError::NoReferences { line: 1, .. })));
        let lang = LINE.replace("python", "cobol");
        assert!(matches!(parse_dataset(lang.as_bytes()), Err(DatasetError::UnknownLanguage { .. })));
        let bad = format!("{LINE}\n{{oops\n");
        assert!(matches!(parse_dataset(bad.as_bytes()), Err(DatasetError::Malformed { line: 2, .. })));
    }

    #[test]
    fn outputs_keep_model_order() {
        let insts = parse_dataset(LINE.as_bytes()).unwrap();
        let text = concat!(
            r#"{"id":"a","model":"m2","generated":"x"}"#, "\n",
            r#"{"id":"a","model":"m1","generated":null}"#, "\n",
        );
        let outs = parse_outputs(text.as_bytes(), Some(&insts)).unwrap();
        assert_eq!(outs.models().collect::<Vec<_>>(), ["m2", "m1"]);
        assert_eq!(outs.by_model["m1"]["a"], None);
        let unknown = r#"{"id":"zz","model":"m","generated":"x"}"#;
        assert!(matches!(parse_outputs(unknown.as_bytes(), Some(&insts)), Err(DatasetError::UnknownInstance { .. })));
        let dup = format!("{}\n{}\n", r#"{"id":"a","model":"m","generated":"x"}"#, r#"{"id":"a","model":"m","generated":"y"}"#);
        assert!(parse_outputs(dup.as_bytes(), None).is_err());
    }
}
