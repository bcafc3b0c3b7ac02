use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u32),
    Sym(&'static str),
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

// longest first so that `->` wins over `-`
const SYMBOLS: &[&str] = &[
    "->", ":=", "!=", "=", "&", "|", "!", "(", ")", "[", "]", "{", "}", ",", "/", "*", "@", "-",
];

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let span = |start: usize, end: usize, line: usize, line_start: usize| SourceSpan {
        line,
        column: text[line_start..start].chars().count() + 1,
        start,
        end,
    };
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                out.push(Token { tok: Tok::Newline, span: span(i, i + 1, line, line_start) });
                i += 1;
                line += 1;
                line_start = i;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let sp = span(start, i, line, line_start);
                let n = text[start..i].parse::<u32>().map_err(|_| {
                    ParseError::new(sp, format!("number `{}` is too large", &text[start..i]))
                })?;
                out.push(Token { tok: Tok::Num(n), span: sp });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: span(start, i, line, line_start),
                });
            }
            _ => {
                let rest = &text[i..];
                match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                    Some(s) => {
                        out.push(Token { tok: Tok::Sym(s), span: span(i, i + s.len(), line, line_start) });
                        i += s.len();
                    }
                    None => {
                        let ch = rest.chars().next().expect("non-empty");
                        return Err(ParseError::new(
                            span(i, i + ch.len_utf8(), line, line_start),
                            format!("unexpected character `{ch}`"),
                        ));
                    }
                }
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: span(text.len(), text.len(), line, line_start) });
    Ok(out)
}

/// Cursor over a token list.
pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    /// A parser that treats line breaks as whitespace.
    pub(crate) fn ignoring_newlines(text: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(text)?.into_iter().filter(|t| t.tok != Tok::Newline).collect();
        Ok(Parser::new(tokens))
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    pub(crate) fn at_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            span: t.span,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> Result<SourceSpan, ParseError> {
        if self.at_sym(s) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&[&format!("`{s}`")]))
        }
    }

    pub(crate) fn expect_keyword(&mut self, k: &str) -> Result<SourceSpan, ParseError> {
        if self.at_ident(k) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&[&format!("`{k}`")]))
        }
    }

    pub(crate) fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => Ok((s, self.next().span)),
            _ => Err(self.unexpected(&[what])),
        }
    }

    pub(crate) fn expect_num(&mut self, what: &str) -> Result<(u32, SourceSpan), ParseError> {
        match self.peek().tok {
            Tok::Num(n) => Ok((n, self.next().span)),
            _ => Err(self.unexpected(&[what])),
        }
    }

    pub(crate) fn at_line_end(&self) -> bool {
        matches!(self.peek().tok, Tok::Newline | Tok::Eof)
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek().tok, Tok::Eof) {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }
}
