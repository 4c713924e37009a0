//! Heuristic lexing of Python, Java, C++ and Ruby fragments.
//!
//! Two tokenizers live here. [`tokenize_fine`] splits code into identifiers,
//! keywords, operators, delimiters and literals even when no whitespace
//! separates them, so `x==1` becomes `x`, `==`, `1`. [`tokenize_coarse`] is
//! plain whitespace splitting, kept as the baseline that treats `x==1` as a
//! single token.
//!
//! No grammar is involved. Fragments that would not parse on their own (a lone
//! `if` line, half a call) still lex, which is the point: generated fixes are
//! usually short snippets.

mod scan;
mod tables;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use tables::tables;

/// Source language of a snippet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
    Cpp,
    Ruby,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::Python, Language::Java, Language::Cpp, Language::Ruby];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
            Language::Cpp => "cpp",
            Language::Ruby => "ruby",
        }
    }

    /// Whether `word` is a reserved word of this language.
    pub fn is_keyword(self, word: &str) -> bool {
        tables(self).keywords.contains(word)
    }

    /// Names left untouched by identifier renaming unless the caller says otherwise.
    pub fn builtin_names(self) -> impl Iterator<Item = &'static str> {
        tables(self).builtins.iter().copied()
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language tag {0:?} (expected python, java, cpp or ruby)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "java" => Ok(Language::Java),
            "cpp" | "c++" | "c" | "cxx" => Ok(Language::Cpp),
            "ruby" | "rb" => Ok(Language::Ruby),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Operator,
    Delimiter,
    StringLiteral,
    NumberLiteral,
    Comment,
    Other,
}

impl TokenKind {
    /// Keywords, operators and delimiters: the structural skeleton of a snippet.
    pub fn is_structural(self) -> bool {
        matches!(self, TokenKind::Keyword | TokenKind::Operator | TokenKind::Delimiter)
    }
}

/// One lexical unit. `offset` is the byte position of `text` in the source it
/// was lexed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub index: usize,
    pub offset: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind, index: usize, offset: usize) -> Self {
        Token { text: text.into(), kind, index, offset }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unterminated string literal starting at byte {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated block comment starting at byte {offset}")]
    UnterminatedComment { offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match *self {
            LexError::UnterminatedString { offset } | LexError::UnterminatedComment { offset } => {
                offset
            }
        }
    }
}

/// Lexes `source`, keeping comment tokens.
pub fn lex(source: &str, language: Language) -> Result<Vec<Token>, LexError> {
    scan::Scanner::new(source, language).run()
}

/// Fine-grained tokens of `source` with comments removed and indices renumbered.
pub fn tokenize_fine(source: &str, language: Language) -> Result<Vec<Token>, LexError> {
    let mut tokens = lex(source, language)?;
    tokens.retain(|t| t.kind != TokenKind::Comment);
    for (i, t) in tokens.iter_mut().enumerate() {
        t.index = i;
    }
    Ok(tokens)
}

/// Maximal runs of non-whitespace, all of kind [`TokenKind::Other`].
pub fn tokenize_coarse(source: &str) -> Vec<Token> {
    let base = source.as_ptr() as usize;
    source
        .split_whitespace()
        .enumerate()
        .map(|(i, word)| Token::new(word, TokenKind::Other, i, word.as_ptr() as usize - base))
        .collect()
}

/// The keyword/operator/delimiter subsequence, in order.
pub fn extract_keywords_ops(tokens: &[Token]) -> Vec<Token> {
    tokens.iter().filter(|t| t.kind.is_structural()).cloned().collect()
}

/// Contents of every string literal with prefixes and quotes removed.
pub fn extract_string_literals(tokens: &[Token]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.kind == TokenKind::StringLiteral)
        .map(|t| literal_content(&t.text).to_string())
        .collect()
}

/// Strips a literal's prefix letters and delimiting quotes; escapes stay verbatim.
pub fn literal_content(literal: &str) -> &str {
    let body = literal.trim_start_matches(|c: char| c.is_ascii_alphanumeric());
    let prefix = &literal[..literal.len() - body.len()];
    if prefix.contains('R') && body.starts_with('"') {
        // C++ raw string: R"delim( ... )delim"
        if let Some(open) = body.find('(') {
            let delim = &body[1..open];
            let close = format!("){delim}\"");
            if body.len() >= open + 1 + close.len() && body.ends_with(&close) {
                return &body[open + 1..body.len() - close.len()];
            }
        }
    }
    for quote in ["\"\"\"", "'''"] {
        if body.len() >= 6 && body.starts_with(quote) && body.ends_with(quote) {
            return &body[3..body.len() - 3];
        }
    }
    let mut chars = body.chars();
    match (chars.next(), chars.next_back()) {
        (Some(open), Some(close)) if open == close && matches!(open, '"' | '\'' | '`') => {
            &body[1..body.len() - 1]
        }
        _ => body,
    }
}

/// Token texts, the form every metric consumes.
pub fn texts(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(|t| t.text.as_str()).collect()
}
