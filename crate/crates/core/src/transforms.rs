//! Semantics-preserving rewrites of evaluation instances.
//!
//! Only identifier renaming is implemented. Renaming is purely lexical: one
//! map from identifier text to a fresh name, built from the vulnerable
//! function and applied to the function, the vulnerable lines and every
//! reference. Names that look external are left alone:
//!
//! * the language's builtin names and any caller-supplied names,
//! * identifiers that ever appear after `.`, `->`, `::` or `&.`, since those
//!   are usually attributes or members of types defined elsewhere.
//!
//! Fresh names are `v1`, `v2`, ... (`V1`, ... for Ruby constants, keeping
//! Ruby sigils and `?`/`!` suffixes).

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dimensions::{EvalInstance, Transform};
use crate::lexer::{lex, tokenize_fine, Language, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("{part} does not lex: {source}")]
    Lex {
        part: String,
        #[source]
        source: LexError,
    },
    #[error("rename key {0:?} also appears as a non-identifier token")]
    KeyCollision(String),
    #[error("instance {0} is already renamed")]
    AlreadyRenamed(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RenameMap {
    pairs: IndexMap<String, String>,
}

impl RenameMap {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.pairs.get(name).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in the order their keys first appeared.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn inverse(&self) -> RenameMap {
        RenameMap { pairs: self.pairs.iter().map(|(k, v)| (v.clone(), k.clone())).collect() }
    }
}

impl FromIterator<(String, String)> for RenameMap {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        RenameMap { pairs: iter.into_iter().collect() }
    }
}

const MEMBER_ACCESS: &[&str] = &[".", "->", "::", "&."];

/// Identifier texts that follow a member-access operator anywhere in `tokens`.
fn member_names(tokens: &[Token]) -> HashSet<&str> {
    tokens
        .windows(2)
        .filter(|w| w[1].kind == TokenKind::Identifier && MEMBER_ACCESS.contains(&w[0].text.as_str()))
        .map(|w| w[1].text.as_str())
        .collect()
}

/// Splits a Ruby identifier into sigil, bare name and suffix.
fn ruby_parts(name: &str) -> (&str, &str, &str) {
    let sigil_len = if name.starts_with("@@") {
        2
    } else if name.starts_with('@') || name.starts_with('$') {
        1
    } else {
        0
    };
    let rest = &name[sigil_len..];
    let suffix_len = usize::from(rest.ends_with('?') || rest.ends_with('!'));
    (&name[..sigil_len], &rest[..rest.len() - suffix_len], &rest[rest.len() - suffix_len..])
}

fn fresh_name(original: &str, k: usize, language: Language) -> String {
    if language == Language::Ruby {
        let (sigil, bare, suffix) = ruby_parts(original);
        let base = if sigil.is_empty() && bare.starts_with(|c: char| c.is_uppercase()) { "V" } else { "v" };
        format!("{sigil}{base}{k}{suffix}")
    } else {
        format!("v{k}")
    }
}

fn build_map<'a>(
    domain: &'a [Token],
    avoid: impl IntoIterator<Item = &'a Token>,
    language: Language,
    preserve: &HashSet<String>,
) -> RenameMap {
    let members = member_names(domain);
    let taken: HashSet<&str> = avoid.into_iter().chain(domain).map(|t| t.text.as_str()).collect();
    let mut pairs = IndexMap::new();
    let mut k = 0;
    for t in domain {
        let name = t.text.as_str();
        if t.kind != TokenKind::Identifier
            || pairs.contains_key(name)
            || members.contains(name)
            || preserve.contains(name)
        {
            continue;
        }
        let fresh = loop {
            k += 1;
            let candidate = fresh_name(name, k, language);
            if !taken.contains(candidate.as_str()) && !language.is_keyword(&candidate) {
                break candidate;
            }
        };
        pairs.insert(name.to_string(), fresh);
    }
    RenameMap { pairs }
}

/// Maps each renameable identifier of `tokens`, in first-appearance order, to a
/// fresh name absent from `tokens` and from the keyword table.
pub fn build_rename_map(tokens: &[Token], language: Language, preserve: &HashSet<String>) -> RenameMap {
    build_map(tokens, [], language, preserve)
}

fn check_keys(tokens: &[Token], map: &RenameMap) -> Result<(), TransformError> {
    match tokens.iter().find(|t| t.kind != TokenKind::Identifier && map.get(&t.text).is_some()) {
        Some(t) => Err(TransformError::KeyCollision(t.text.clone())),
        None => Ok(()),
    }
}

/// Replaces the text of every mapped identifier token.
pub fn apply_rename(tokens: &[Token], map: &RenameMap) -> Result<Vec<Token>, TransformError> {
    check_keys(tokens, map)?;
    Ok(tokens
        .iter()
        .map(|t| match map.get(&t.text) {
            Some(new) if t.kind == TokenKind::Identifier => Token { text: new.to_string(), ..t.clone() },
            _ => t.clone(),
        })
        .collect())
}

/// Applies `map` to source text, leaving whitespace, comments and literals untouched.
pub fn rename_source(source: &str, language: Language, map: &RenameMap) -> Result<String, TransformError> {
    let tokens = lex(source, language).map_err(|source| TransformError::Lex { part: "source".into(), source })?;
    check_keys(&tokens, map)?;
    let mut out = String::with_capacity(source.len());
    let mut last = 0;
    for t in &tokens {
        if t.kind != TokenKind::Identifier {
            continue;
        }
        if let Some(new) = map.get(&t.text) {
            out.push_str(&source[last..t.offset]);
            out.push_str(new);
            last = t.offset + t.text.len();
        }
    }
    out.push_str(&source[last..]);
    Ok(out)
}

/// A rewrite producing a semantically equivalent variant of an instance.
pub trait TransformRule {
    fn name(&self) -> &'static str;
    fn apply(&self, instance: &EvalInstance) -> Result<EvalInstance, TransformError>;
}

/// Consistent identifier renaming across the function, vulnerable code and references.
#[derive(Debug, Clone, Default)]
pub struct IdentifierRenaming {
    /// Names kept in addition to the language builtins.
    pub preserve: HashSet<String>,
}

impl IdentifierRenaming {
    pub fn new(preserve: HashSet<String>) -> Self {
        IdentifierRenaming { preserve }
    }

    /// The map this rule would apply to `instance`.
    pub fn map_for(&self, instance: &EvalInstance) -> Result<RenameMap, TransformError> {
        let lang = instance.language;
        let lexed = |part: &str, code: &str| {
            tokenize_fine(code, lang).map_err(|source| TransformError::Lex { part: part.to_string(), source })
        };
        let function = lexed("function", &instance.function)?;
        let mut others = vec![lexed("vulnerable_code", &instance.vulnerable_code)?];
        for (i, r) in instance.references.iter().enumerate() {
            others.push(lexed(&format!("reference {i}"), r)?);
        }
        let mut preserve = self.preserve.clone();
        preserve.extend(lang.builtin_names().map(String::from));
        // member names anywhere keep the text map consistent across all parts
        for part in &others {
            preserve.extend(member_names(part).into_iter().map(String::from));
        }
        Ok(build_map(&function, others.iter().flatten(), lang, &preserve))
    }
}

impl TransformRule for IdentifierRenaming {
    fn name(&self) -> &'static str {
        "identifier-renaming"
    }

    fn apply(&self, instance: &EvalInstance) -> Result<EvalInstance, TransformError> {
        let transform = match instance.transform {
            Transform::Original => Transform::Renamed,
            Transform::Restructured => Transform::RenamedRestructured,
            Transform::Renamed | Transform::RenamedRestructured => {
                return Err(TransformError::AlreadyRenamed(instance.id.clone()))
            }
        };
        let map = self.map_for(instance)?;
        let lang = instance.language;
        Ok(EvalInstance {
            transform,
            function: rename_source(&instance.function, lang, &map)?,
            vulnerable_code: rename_source(&instance.vulnerable_code, lang, &map)?,
            references: instance
                .references
                .iter()
                .map(|r| rename_source(r, lang, &map))
                .collect::<Result<_, _>>()?,
            ..instance.clone()
        })
    }
}

pub fn transform_instance(instance: &EvalInstance, preserve: &HashSet<String>) -> Result<EvalInstance, TransformError> {
    IdentifierRenaming::new(preserve.clone()).apply(instance)
}
