//! Per-language lexical tables, bundled from the plain-text files under `data/`.
//!
//! Every file holds one entry per line. Blank lines and lines starting with
//! `#!` (used for the version header) are ignored.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::{Language, TokenKind};

pub(crate) struct LangTables {
    pub keywords: HashSet<&'static str>,
    /// Operators and delimiters, longest first so the scanner can munch greedily.
    pub punctuation: Vec<(&'static str, TokenKind)>,
    pub invalid_first: HashSet<&'static str>,
    pub invalid_last: HashSet<&'static str>,
    pub builtins: HashSet<&'static str>,
}

struct RawTables {
    keywords: &'static str,
    operators: &'static str,
    delimiters: &'static str,
    boundaries: &'static str,
    builtins: &'static str,
}

fn raw(language: Language) -> RawTables {
    macro_rules! bundle {
        ($dir:literal) => {
            RawTables {
                keywords: include_str!(concat!("../../data/", $dir, "/keywords.txt")),
                operators: include_str!(concat!("../../data/", $dir, "/operators.txt")),
                delimiters: include_str!(concat!("../../data/", $dir, "/delimiters.txt")),
                boundaries: include_str!(concat!("../../data/", $dir, "/boundaries.txt")),
                builtins: include_str!(concat!("../../data/", $dir, "/builtins.txt")),
            }
        };
    }
    match language {
        Language::Python => bundle!("python"),
        Language::Java => bundle!("java"),
        Language::Cpp => bundle!("cpp"),
        Language::Ruby => bundle!("ruby"),
    }
}

fn entries(text: &'static str) -> impl Iterator<Item = &'static str> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with("#!"))
}

fn build(language: Language) -> LangTables {
    let raw = raw(language);
    let mut punctuation: Vec<(&'static str, TokenKind)> = entries(raw.operators)
        .map(|op| (op, TokenKind::Operator))
        .chain(entries(raw.delimiters).map(|d| (d, TokenKind::Delimiter)))
        .collect();
    // a delimiter listed in both files wins
    punctuation.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(b.1.cmp(&a.1)));
    punctuation.dedup_by(|a, b| a.0 == b.0);

    let mut invalid_first = HashSet::new();
    let mut invalid_last = HashSet::new();
    for line in entries(raw.boundaries) {
        match line.split_once(' ') {
            Some(("first", tok)) => {
                invalid_first.insert(tok.trim());
            }
            Some(("last", tok)) => {
                invalid_last.insert(tok.trim());
            }
            _ => panic!("malformed boundary entry {line:?} for {language}"),
        }
    }

    LangTables {
        keywords: entries(raw.keywords).collect(),
        punctuation,
        invalid_first,
        invalid_last,
        builtins: entries(raw.builtins).collect(),
    }
}

pub(crate) fn tables(language: Language) -> &'static LangTables {
    static PYTHON: OnceLock<LangTables> = OnceLock::new();
    static JAVA: OnceLock<LangTables> = OnceLock::new();
    static CPP: OnceLock<LangTables> = OnceLock::new();
    static RUBY: OnceLock<LangTables> = OnceLock::new();
    let cell = match language {
        Language::Python => &PYTHON,
        Language::Java => &JAVA,
        Language::Cpp => &CPP,
        Language::Ruby => &RUBY,
    };
    cell.get_or_init(|| build(language))
}
