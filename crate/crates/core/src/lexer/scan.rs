use super::tables::LangTables;
use super::{tables, Language, LexError, Token, TokenKind};

pub(super) struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    language: Language,
    tables: &'static LangTables,
    tokens: Vec<Token>,
}

const PYTHON_PREFIXES: &[&str] = &["r", "u", "b", "f", "br", "rb", "fr", "rf"];
const CPP_PREFIXES: &[&str] = &["u8", "u", "U", "L", "R", "u8R", "uR", "UR", "LR"];

impl<'a> Scanner<'a> {
    pub(super) fn new(src: &'a str, language: Language) -> Self {
        Scanner { src, pos: 0, language, tables: tables(language), tokens: Vec::new() }
    }

    pub(super) fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek(0) {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                continue;
            }
            let start = self.pos;
            let (end, kind) = if let Some(end) = self.comment()? {
                (end, TokenKind::Comment)
            } else if let Some(end) = self.string()? {
                (end, TokenKind::StringLiteral)
            } else if c.is_ascii_digit() {
                (self.number(), TokenKind::NumberLiteral)
            } else if let Some(end) = self.identifier() {
                let word = &self.src[start..end];
                let kind = if self.tables.keywords.contains(word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                };
                (end, kind)
            } else if let Some((len, kind)) = self.punctuation() {
                (start + len, kind)
            } else {
                (start + c.len_utf8(), TokenKind::Other)
            };
            let index = self.tokens.len();
            self.tokens.push(Token::new(&self.src[start..end], kind, index, start));
            self.pos = end;
        }
        Ok(self.tokens)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn at_line_start(&self) -> bool {
        self.src[..self.pos].chars().next_back().is_none_or(|c| c == '\n')
    }

    fn line_end(&self, from: usize) -> usize {
        self.src[from..].find('\n').map_or(self.src.len(), |i| from + i)
    }

    fn comment(&self) -> Result<Option<usize>, LexError> {
        let rest = self.rest();
        match self.language {
            Language::Python => Ok(rest.starts_with('#').then(|| self.line_end(self.pos))),
            Language::Ruby => {
                if self.at_line_start() && is_ruby_begin(rest) {
                    let mut line = self.line_end(self.pos);
                    while line < self.src.len() {
                        let next = line + 1;
                        let text = &self.src[next..self.line_end(next)];
                        if text.starts_with("=end")
                            && text[4..].chars().next().is_none_or(char::is_whitespace)
                        {
                            return Ok(Some(self.line_end(next)));
                        }
                        line = self.line_end(next);
                    }
                    return Err(LexError::UnterminatedComment { offset: self.pos });
                }
                Ok(rest.starts_with('#').then(|| self.line_end(self.pos)))
            }
            Language::Java | Language::Cpp => {
                if rest.starts_with("//") {
                    Ok(Some(self.line_end(self.pos)))
                } else if let Some(body) = rest.strip_prefix("/*") {
                    match body.find("*/") {
                        Some(i) => Ok(Some(self.pos + 2 + i + 2)),
                        None => Err(LexError::UnterminatedComment { offset: self.pos }),
                    }
                } else {
                    Ok(None)
                }
            }
        }
    }

    fn is_quote(&self, c: char) -> bool {
        match self.language {
            Language::Ruby => matches!(c, '"' | '\'' | '`'),
            _ => matches!(c, '"' | '\''),
        }
    }

    /// Length of a string prefix (`rb`, `u8R`, ...) directly followed by a quote.
    fn prefix_len(&self) -> usize {
        let prefixes = match self.language {
            Language::Python => PYTHON_PREFIXES,
            Language::Cpp => CPP_PREFIXES,
            Language::Java | Language::Ruby => return 0,
        };
        let rest = self.rest();
        let run = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_alphanumeric()).len();
        if run == 0 || run > 3 {
            return 0;
        }
        let word = &rest[..run];
        let known = match self.language {
            Language::Python => prefixes.contains(&word.to_ascii_lowercase().as_str()),
            _ => prefixes.contains(&word),
        };
        let quoted = rest[run..].chars().next().is_some_and(|c| self.is_quote(c));
        if known && quoted {
            run
        } else {
            0
        }
    }

    fn string(&self) -> Result<Option<usize>, LexError> {
        let start = self.pos;
        let prefix = self.prefix_len();
        let body = &self.src[start + prefix..];
        let Some(quote) = body.chars().next().filter(|&c| self.is_quote(c)) else {
            return Ok(None);
        };
        let open = start + prefix;
        let unterminated = Err(LexError::UnterminatedString { offset: start });

        if self.language == Language::Cpp && self.src[start..open].contains('R') && quote == '"' {
            let Some(paren) = body.find('(') else { return unterminated };
            let delim = &body[1..paren];
            let close = format!("){delim}\"");
            return match body[paren..].find(&close) {
                Some(i) => Ok(Some(open + paren + i + close.len())),
                None => unterminated,
            };
        }

        let triple_ok = match self.language {
            Language::Python => true,
            Language::Java => quote == '"',
            _ => false,
        };
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        if triple_ok && body.starts_with(&triple) {
            let mut chars = body[3..].char_indices();
            while let Some((i, c)) = chars.next() {
                if c == '\\' {
                    chars.next();
                } else if body[3 + i..].starts_with(&triple) {
                    return Ok(Some(open + 3 + i + 3));
                }
            }
            return unterminated;
        }

        let multiline = self.language == Language::Ruby;
        let mut chars = body.char_indices().skip(1);
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    chars.next();
                }
                '\n' if !multiline => return unterminated,
                c if c == quote => return Ok(Some(open + i + c.len_utf8())),
                _ => {}
            }
        }
        unterminated
    }

    fn number(&self) -> usize {
        let rest = self.rest().as_bytes();
        let cpp = self.language == Language::Cpp;
        let mut i = 0;
        let is_digit_run = |b: u8| b.is_ascii_digit() || b == b'_';
        if rest.len() > 1 && rest[0] == b'0' && matches!(rest[1], b'x' | b'X' | b'b' | b'B' | b'o' | b'O') {
            i = 2;
        } else {
            while i < rest.len()
                && (is_digit_run(rest[i])
                    || (cpp && rest[i] == b'\'' && rest.get(i + 1).is_some_and(u8::is_ascii_digit)))
            {
                i += 1;
            }
            if rest.get(i) == Some(&b'.') && rest.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
                while i < rest.len() && is_digit_run(rest[i]) {
                    i += 1;
                }
            }
            if matches!(rest.get(i), Some(b'e' | b'E')) {
                let sign = matches!(rest.get(i + 1), Some(b'+' | b'-'));
                let digit_at = if sign { i + 2 } else { i + 1 };
                if rest.get(digit_at).is_some_and(u8::is_ascii_digit) {
                    i = digit_at;
                }
            }
        }
        // digits, hex digits and suffixes (L, f, u, j, ...)
        while i < rest.len() && (rest[i].is_ascii_alphanumeric() || rest[i] == b'_') {
            i += 1;
        }
        self.pos + i
    }

    fn identifier(&self) -> Option<usize> {
        let rest = self.rest();
        let mut chars = rest.char_indices().peekable();
        let (_, first) = *chars.peek()?;
        let java = self.language == Language::Java;
        let ruby = self.language == Language::Ruby;
        let is_start = |c: char| c.is_alphabetic() || c == '_' || (java && c == '$');
        let is_continue = |c: char| c.is_alphanumeric() || c == '_' || (java && c == '$');

        let mut end = 0;
        if ruby && matches!(first, '@' | '$') {
            let sigil = if rest.starts_with("@@") { 2 } else { 1 };
            if !rest[sigil..].chars().next().is_some_and(is_start) {
                return None;
            }
            end = sigil;
        } else if !is_start(first) {
            return None;
        }
        end += rest[end..]
            .char_indices()
            .find(|&(_, c)| !is_continue(c))
            .map_or(rest.len() - end, |(i, _)| i);

        if ruby {
            let mut tail = rest[end..].chars();
            if let Some(mark @ ('?' | '!')) = tail.next() {
                let next = tail.next();
                if !next.is_some_and(|c| c == '=' || c == '_' || c.is_alphanumeric()) {
                    end += mark.len_utf8();
                }
            }
        }
        Some(self.pos + end)
    }

    fn punctuation(&self) -> Option<(usize, TokenKind)> {
        let rest = self.rest();
        self.tables
            .punctuation
            .iter()
            .find(|(p, _)| rest.starts_with(p))
            .map(|&(p, kind)| (p.len(), kind))
    }
}

fn is_ruby_begin(rest: &str) -> bool {
    rest.starts_with("=begin") && rest[6..].chars().next().is_none_or(char::is_whitespace)
}

#[cfg(test)]
mod tests {
    use super::super::{lex, tokenize_fine, Language, LexError, TokenKind};

    fn kinds(src: &str, lang: Language) -> Vec<(String, TokenKind)> {
        lex(src, lang).unwrap().into_iter().map(|t| (t.text, t.kind)).collect()
    }

    #[test]
    fn comments_per_language() {
        let py = kinds("x = 1  # note\ny", Language::Python);
        assert_eq!(py[3], ("# note".to_string(), TokenKind::Comment));
        assert_eq!(py[4].0, "y");
        let java = kinds("a /* b */ c // d\ne", Language::Java);
        let texts: Vec<_> = java.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(texts, ["a", "/* b */", "c", "// d", "e"]);
        let rb = kinds("x\n=begin\nhidden\n=end\ny", Language::Ruby);
        assert_eq!(rb.len(), 3);
        assert_eq!(rb[1].1, TokenKind::Comment);
        // `#` is the preprocessor operator in C++
        assert_eq!(kinds("#include", Language::Cpp)[0].1, TokenKind::Operator);
    }

    #[test]
    fn unterminated_constructs_report_offsets() {
        assert_eq!(
            tokenize_fine("x = 'abc", Language::Python),
            Err(LexError::UnterminatedString { offset: 4 })
        );
        assert_eq!(
            tokenize_fine("s = \"a\nb\"", Language::Java),
            Err(LexError::UnterminatedString { offset: 4 })
        );
        assert_eq!(
            tokenize_fine("a /* b", Language::Cpp),
            Err(LexError::UnterminatedComment { offset: 2 })
        );
        assert!(tokenize_fine("x = \"\"\"open", Language::Python).is_err());
        // Ruby strings may span lines
        assert!(tokenize_fine("s = \"a\nb\"", Language::Ruby).is_ok());
    }

    #[test]
    fn string_forms() {
        let py = kinds("f'{x}' + rb\"\\d\" + '''a\n'b'''", Language::Python);
        assert_eq!(py[0], ("f'{x}'".into(), TokenKind::StringLiteral));
        assert_eq!(py[2], ("rb\"\\d\"".into(), TokenKind::StringLiteral));
        assert_eq!(py[4], ("'''a\n'b'''".into(), TokenKind::StringLiteral));
        let esc = kinds(r#"s = "a\"b""#, Language::Java);
        assert_eq!(esc[2].0, r#""a\"b""#);
        let raw = kinds(r#"auto s = R"x(a ")" b)x";"#, Language::Cpp);
        assert_eq!(raw[3], (r#"R"x(a ")" b)x""#.into(), TokenKind::StringLiteral));
        let ch = kinds("char c = '\\'';", Language::Cpp);
        assert_eq!(ch[3], ("'\\''".into(), TokenKind::StringLiteral));
        // an identifier that only looks like a prefix
        let word = kinds("bar\"x\"", Language::Python);
        assert_eq!(word[0], ("bar".into(), TokenKind::Identifier));
    }

    #[test]
    fn numbers() {
        let texts = |src, lang| -> Vec<String> {
            tokenize_fine(src, lang).unwrap().into_iter().map(|t| t.text).collect()
        };
        assert_eq!(texts("1.5e-3+0x1F", Language::Python), ["1.5e-3", "+", "0x1F"]);
        assert_eq!(texts("1..5", Language::Ruby), ["1", "..", "5"]);
        assert_eq!(texts("1'000'000u", Language::Cpp), ["1'000'000u"]);
        assert_eq!(texts("10L", Language::Java), ["10L"]);
    }

    #[test]
    fn ruby_identifier_forms() {
        let rb = kinds("@name.empty? && $g != @@c && defined?(x)", Language::Ruby);
        let texts: Vec<_> = rb.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(
            texts,
            ["@name", ".", "empty?", "&&", "$g", "!=", "@@c", "&&", "defined?", "(", "x", ")"]
        );
        assert_eq!(rb[8].1, TokenKind::Keyword);
        assert_eq!(kinds("a!=b", Language::Ruby)[1].0, "!=");
    }

    #[test]
    fn unknown_characters_become_other() {
        let toks = kinds("x = a \\\n + b", Language::Python);
        assert_eq!(toks[3], ("\\".into(), TokenKind::Other));
        let java = kinds("int $x = 1;", Language::Java);
        assert_eq!(java[1], ("$x".into(), TokenKind::Identifier));
    }
}
