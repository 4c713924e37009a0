//! Random code fragments for property checks.
#![allow(dead_code)]

use fixeval::lexer::{tokenize_fine, Language, TokenKind};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

pub const NAMES: &[&str] = &[
    "alpha", "beta", "count", "name", "data", "item", "total", "value", "idx", "buf", "path", "user",
    "query", "token", "size", "limit", "entry", "node",
];
pub const WORDS: &[&str] = &["too", "long", "invalid", "input", "error", "user", "path", "denied", "ok", "Username"];
const ARITH: &[&str] = &["+", "-", "*"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub struct Gen<'r> {
    pub lang: Language,
    pub rng: &'r mut StdRng,
}

impl Gen<'_> {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(self.rng).copied().unwrap()
    }

    pub fn ident(&mut self) -> String {
        let base = self.pick(NAMES).to_string();
        if self.lang == Language::Ruby && self.rng.random_bool(0.15) {
            format!("@{base}")
        } else {
            base
        }
    }

    pub fn string(&mut self) -> String {
        let n = self.rng.random_range(1..4);
        let words: Vec<&str> = (0..n).map(|_| self.pick(WORDS)).collect();
        let body = words.join(" ");
        let single = matches!(self.lang, Language::Python | Language::Ruby) && self.rng.random_bool(0.3);
        if single {
            format!("'{body}'")
        } else {
            format!("\"{body}\"")
        }
    }

    fn number(&mut self) -> String {
        self.rng.random_range(0..100).to_string()
    }

    pub fn expr(&mut self, depth: u32) -> String {
        let choice = if depth == 0 { self.rng.random_range(0..3) } else { self.rng.random_range(0..8) };
        match choice {
            0 => self.ident(),
            1 => self.number(),
            2 => self.string(),
            3 => format!("{} {} {}", self.ident(), self.pick(ARITH), self.expr(depth - 1)),
            4 => {
                let n = self.rng.random_range(0..3);
                let args: Vec<String> = (0..n).map(|_| self.expr(depth - 1)).collect();
                format!("{}({})", self.pick(NAMES), args.join(", "))
            }
            5 => {
                let sep = if self.lang == Language::Cpp && self.rng.random_bool(0.5) { "->" } else { "." };
                format!("{}{sep}{}", self.pick(NAMES), self.pick(NAMES))
            }
            6 => format!("{}[{}]", self.ident(), self.expr(depth - 1)),
            _ => format!("{}.{}({})", self.pick(NAMES), self.pick(NAMES), self.expr(depth - 1)),
        }
    }

    pub fn statement(&mut self) -> String {
        let lhs = self.ident();
        let rhs = self.expr(2);
        let kind = self.rng.random_range(0..4);
        match self.lang {
            Language::Python => match kind {
                0 => format!("{lhs} = {rhs}"),
                1 => format!("if {lhs} == {rhs}:\n    {} = {}", self.ident(), self.expr(1)),
                2 => format!("return {rhs}"),
                _ => format!("{lhs} = [{}, {}]", self.expr(1), self.expr(1)),
            },
            Language::Java | Language::Cpp => match kind {
                0 => format!("{lhs} = {rhs};"),
                1 => format!("if ({lhs} == {rhs}) {{ {} = {}; }}", self.ident(), self.expr(1)),
                2 => format!("return {rhs};"),
                _ => {
                    let ty = if self.lang == Language::Java { "String" } else { "auto" };
                    format!("{ty} {lhs} = {}({rhs});", self.pick(NAMES))
                }
            },
            Language::Ruby => match kind {
                0 => format!("{lhs} = {rhs}"),
                1 => format!("if {lhs} == {rhs}\n  {} = {}\nend", self.ident(), self.expr(1)),
                2 => format!("return {rhs}"),
                _ => format!("{lhs} = [{}, {}]", self.expr(1), self.expr(1)),
            },
        }
    }

    /// One to three statements, one per line.
    pub fn snippet(&mut self) -> String {
        let n = self.rng.random_range(1..4);
        (0..n).map(|_| self.statement()).collect::<Vec<_>>().join("\n")
    }

    /// A snippet guaranteed to contain at least one string literal.
    pub fn snippet_with_literal(&mut self) -> String {
        let s = self.snippet();
        let lhs = self.ident();
        let lit = self.string();
        let end = if matches!(self.lang, Language::Java | Language::Cpp) { ";" } else { "" };
        format!("{s}\n{lhs} = {lit}{end}")
    }

    /// A snippet without string literals.
    pub fn snippet_without_literal(&mut self) -> String {
        loop {
            let s = self.snippet();
            let toks = tokenize_fine(&s, self.lang).unwrap();
            if toks.iter().all(|t| t.kind != TokenKind::StringLiteral) {
                return s;
            }
        }
    }

    /// A light edit of `s`: one token replaced, dropped or duplicated.
    pub fn perturb(&mut self, s: &str) -> String {
        let toks = tokenize_fine(s, self.lang).unwrap();
        let i = self.rng.random_range(0..toks.len());
        let t = &toks[i];
        let (start, end) = (t.offset, t.offset + t.text.len());
        let replacement = match self.rng.random_range(0..3) {
            0 if t.kind == TokenKind::Identifier => self.ident(),
            0 | 1 => String::new(),
            _ => format!("{} {}", t.text, t.text),
        };
        let out = format!("{} {replacement} {}", &s[..start], &s[end..]);
        if tokenize_fine(&out, self.lang).is_ok() {
            out
        } else {
            s.to_string()
        }
    }
}
