use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Pipe,
    Turnstile,
    Dot,
    Le,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn parse_error(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Splits `text` into tokens; `%` starts a comment running to end of line.
pub(crate) fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut bump = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {
                bump(1, &mut i);
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '|' => Tok::Pipe,
            '.' => Tok::Dot,
            ':' if chars.get(i + 1) == Some(&'-') => {
                bump(1, &mut i);
                Tok::Turnstile
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                bump(1, &mut i);
                Tok::Le
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump(1, &mut i);
                }
                out.push(Spanned { tok: Tok::Ident(s), line: l0, col: c0 });
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump(1, &mut i);
                }
                out.push(Spanned { tok: Tok::Number(s), line: l0, col: c0 });
                continue;
            }
            other => return Err(parse_error(l0, c0, format!("unexpected character `{other}`"))),
        };
        bump(1, &mut i);
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Cursor over a token stream.
pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Cursor> {
        Ok(Cursor { toks: lex(text)?, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    pub(crate) fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<Spanned> {
        let t = self.next();
        if &t.tok == tok {
            Ok(t)
        } else {
            Err(parse_error(t.line, t.col, format!("expected {}, found {}", tok.describe(), t.tok.describe())))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, Spanned)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(parse_error(t.line, t.col, format!("expected an identifier, found {}", other.describe()))),
        }
    }
}
