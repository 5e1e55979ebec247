use super::AstError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Keyword(&'static str),
    Number(String),
    Str(String),
    Punct(&'static str),
    Placeholder(String),
    Comment(String),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
    /// A line break separates this token from the previous one.
    pub newline_before: bool,
}

const KEYWORDS: &[&str] = &[
    "const",
    "let",
    "var",
    "function",
    "return",
    "true",
    "false",
    "null",
    "this",
    "typeof",
    "undefined",
];

/// Reserved words outside the supported subset; they produce
/// `UnsupportedConstruct` rather than a syntax error.
const UNSUPPORTED: &[&str] = &[
    "if",
    "else",
    "for",
    "while",
    "do",
    "switch",
    "case",
    "break",
    "continue",
    "class",
    "new",
    "try",
    "catch",
    "finally",
    "throw",
    "import",
    "export",
    "async",
    "await",
    "yield",
    "delete",
    "in",
    "instanceof",
    "void",
    "with",
    "default",
    "extends",
    "super",
    "debugger",
];

// Longest first so that maximal munch works by linear scan.
const PUNCT: &[&str] = &[
    "===", "!==", "...", "**=", "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "+=", "-=", "*=",
    "/=", "%=", "++", "--", "?.", "**", "{", "}", "(", ")", "[", "]", ";", ",", ".", ":", "?", "=",
    "+", "-", "*", "/", "%", "<", ">", "!", "&", "|", "^", "~", "`", "@", "#",
];

pub(crate) fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || UNSUPPORTED.contains(&name)
}

pub(crate) fn is_unsupported_keyword(name: &str) -> bool {
    UNSUPPORTED.contains(&name)
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, AstError> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
    newline_pending: bool,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            line_start: 0,
            newline_pending: false,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
            self.newline_pending = true;
        }
        Some(c)
    }

    fn column_at(&self, byte: usize) -> usize {
        self.src[self.line_start..byte].chars().count() + 1
    }

    fn error(&self, start: usize, lexeme: &str, message: &str) -> AstError {
        AstError::Syntax {
            line: self.line,
            column: self.column_at(start),
            lexeme: lexeme.to_string(),
            message: message.to_string(),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, AstError> {
        let mut out = Vec::new();
        loop {
            self.skip_whitespace();
            let start = self.pos;
            let line = self.line;
            let column = self.column_at(start);
            let newline_before = std::mem::take(&mut self.newline_pending);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    start,
                    end: start,
                    line,
                    column,
                    newline_before,
                });
                return Ok(out);
            };
            let tok = if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                Tok::Comment(self.src[start..self.pos].trim_end().to_string())
            } else if c == '/' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                loop {
                    match self.bump() {
                        Some('*') if self.peek() == Some('/') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {}
                        None => return Err(self.error(start, "/*", "unterminated comment")),
                    }
                }
                // The comment's own line breaks do not separate it from the
                // previous token.
                self.newline_pending = false;
                Tok::Comment(self.src[start..self.pos].to_string())
            } else if c == '{' && self.peek_at(1) == Some('{') {
                self.placeholder(start)?
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.number(start)?
            } else if c == '"' || c == '\'' {
                self.string(start, c)?
            } else if c.is_alphabetic() || c == '_' || c == '$' {
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '$' {
                        self.bump();
                    } else {
                        break;
                    }
                }
                let word = &self.src[start..self.pos];
                match KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => Tok::Keyword(k),
                    None => Tok::Ident(word.to_string()),
                }
            } else {
                let rest = &self.src[self.pos..];
                match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                    Some(p) => {
                        for _ in 0..p.len() {
                            self.bump();
                        }
                        Tok::Punct(p)
                    }
                    None => {
                        let lexeme = c.to_string();
                        return Err(self.error(start, &lexeme, "unexpected character"));
                    }
                }
            };
            out.push(Token {
                tok,
                start,
                end: self.pos,
                line,
                column,
                newline_before,
            });
        }
    }

    fn skip_whitespace(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn placeholder(&mut self, start: usize) -> Result<Tok, AstError> {
        self.bump();
        self.bump();
        let name_start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        let name = self.src[name_start..self.pos].to_string();
        if name.is_empty() || self.peek() != Some('}') || self.peek_at(1) != Some('}') {
            return Err(self.error(start, "{{", "malformed placeholder"));
        }
        self.bump();
        self.bump();
        Ok(Tok::Placeholder(name))
    }

    fn number(&mut self, start: usize) -> Result<Tok, AstError> {
        if self.peek() == Some('0') && matches!(self.peek_at(1), Some('x' | 'X')) {
            self.bump();
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                self.bump();
            }
        } else {
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            if self.peek() == Some('.') {
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                self.bump();
                if matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
                if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let lexeme = self.src[start..self.pos].to_string();
                    return Err(self.error(start, &lexeme, "malformed number"));
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        if self.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
            let lexeme = self.src[start..self.pos + 1].to_string();
            return Err(self.error(start, &lexeme, "malformed number"));
        }
        Ok(Tok::Number(self.src[start..self.pos].to_string()))
    }

    fn string(&mut self, start: usize, quote: char) -> Result<Tok, AstError> {
        self.bump();
        let mut value = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error(start, &quote.to_string(), "unterminated string"));
            };
            match c {
                c if c == quote => break,
                '\n' => return Err(self.error(start, &quote.to_string(), "unterminated string")),
                '\\' => {
                    let Some(e) = self.bump() else {
                        return Err(self.error(start, "\\", "unterminated string"));
                    };
                    match e {
                        'n' => value.push('\n'),
                        't' => value.push('\t'),
                        'r' => value.push('\r'),
                        'b' => value.push('\u{8}'),
                        'f' => value.push('\u{c}'),
                        'v' => value.push('\u{b}'),
                        '0' => value.push('\0'),
                        '\n' => {}
                        'x' => value.push(self.hex_escape(start, 2)?),
                        'u' => value.push(self.hex_escape(start, 4)?),
                        other => value.push(other),
                    }
                }
                other => value.push(other),
            }
        }
        Ok(Tok::Str(value))
    }

    fn hex_escape(&mut self, start: usize, digits: usize) -> Result<char, AstError> {
        let from = self.pos;
        for _ in 0..digits {
            if !self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
                return Err(self.error(start, "\\", "malformed escape"));
            }
            self.bump();
        }
        u32::from_str_radix(&self.src[from..self.pos], 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error(start, "\\", "malformed escape"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn maximal_munch_on_operators() {
        assert_eq!(
            kinds("a === b => c"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("==="),
                Tok::Ident("b".into()),
                Tok::Punct("=>"),
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            kinds(r#"'it\'s' "aA\n""#)[..2],
            [Tok::Str("it's".into()), Tok::Str("aA\n".into())]
        );
    }

    #[test]
    fn placeholders_and_comments() {
        let toks = kinds("d.{{X_ATTR}} // note\n/* block */");
        assert_eq!(toks[2], Tok::Placeholder("X_ATTR".into()));
        assert_eq!(toks[3], Tok::Comment("// note".into()));
        assert_eq!(toks[4], Tok::Comment("/* block */".into()));
    }

    #[test]
    fn columns_are_one_based_chars() {
        let toks = tokenize("const x = 1;\n  y").unwrap();
        let y = toks
            .iter()
            .find(|t| t.tok == Tok::Ident("y".into()))
            .unwrap();
        assert_eq!((y.line, y.column), (2, 3));
        assert!(y.newline_before);
    }

    #[test]
    fn stray_character_is_reported() {
        let err = tokenize("a \u{00a7} b").unwrap_err();
        assert!(matches!(err, AstError::Syntax { column: 3, .. }));
    }
}
