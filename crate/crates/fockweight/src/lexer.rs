//! Line/column tracking tokenizer shared by the weight-rule language and the
//! scenario config format.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Lt,
    Percent,
    Slash,
    FatArrow, // =>
    Arrow,    // ->
    Newline,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Percent => write!(f, "`%`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::FatArrow => write!(f, "`=>`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Newline => write!(f, "end of line"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct LexParseError {
    pub pos: Pos,
    pub message: String,
}

pub fn err_at(pos: Pos, message: impl Into<String>) -> LexParseError {
    LexParseError {
        pos,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '-'
}

/// Tokenizes `text`. `#` comments run to end of line. Newlines are emitted
/// as tokens so line-oriented grammars can treat them as separators.
pub fn lex(text: &str) -> Result<Vec<Spanned>, LexParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(Spanned { tok: $tok, pos: $pos })
        };
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                push!(Tok::Newline, pos);
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '{' => {
                chars.next();
                col += 1;
                push!(Tok::LBrace, pos);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(Tok::RBrace, pos);
            }
            '[' => {
                chars.next();
                col += 1;
                push!(Tok::LBracket, pos);
            }
            ']' => {
                chars.next();
                col += 1;
                push!(Tok::RBracket, pos);
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, pos);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, pos);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, pos);
            }
            ';' => {
                chars.next();
                col += 1;
                push!(Tok::Semi, pos);
            }
            '<' => {
                chars.next();
                col += 1;
                push!(Tok::Lt, pos);
            }
            '%' => {
                chars.next();
                col += 1;
                push!(Tok::Percent, pos);
            }
            '/' => {
                chars.next();
                col += 1;
                push!(Tok::Slash, pos);
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push!(Tok::FatArrow, pos);
                } else {
                    push!(Tok::Eq, pos);
                }
            }
            '-' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Arrow, pos);
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let mut n = String::from("-");
                        while let Some(&d) = chars.peek() {
                            if d.is_ascii_digit() {
                                n.push(d);
                                chars.next();
                                col += 1;
                            } else {
                                break;
                            }
                        }
                        let v: i64 = n
                            .parse()
                            .map_err(|_| err_at(pos, format!("integer out of range: {n}")))?;
                        push!(Tok::Int(v), pos);
                    }
                    _ => return Err(err_at(pos, "stray `-` (expected `->` or a number)")),
                }
            }
            d if d.is_ascii_digit() => {
                let mut n = String::new();
                while let Some(&d2) = chars.peek() {
                    if d2.is_ascii_digit() {
                        n.push(d2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let v: i64 = n
                    .parse()
                    .map_err(|_| err_at(pos, format!("integer out of range: {n}")))?;
                push!(Tok::Int(v), pos);
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if is_ident_continue(c2) {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(s), pos);
            }
            other => {
                return Err(err_at(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

/// Cursor over a token stream with skip/expect helpers.
pub struct Cursor {
    toks: Vec<Spanned>,
    pub at: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Spanned>) -> Cursor {
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.at)
    }

    pub fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn eof_pos(&self) -> Pos {
        self.toks
            .last()
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    pub fn pos(&self) -> Pos {
        self.peek().map(|t| t.pos).unwrap_or_else(|| self.eof_pos())
    }

    /// Skips newline tokens.
    pub fn skip_newlines(&mut self) {
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Newline)) {
            self.at += 1;
        }
    }

    /// Skips newlines and semicolons (item separators).
    pub fn skip_separators(&mut self) {
        while matches!(
            self.peek().map(|t| &t.tok),
            Some(Tok::Newline) | Some(Tok::Semi)
        ) {
            self.at += 1;
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos, LexParseError> {
        match self.bump() {
            Some(t) if &t.tok == tok => Ok(t.pos),
            Some(t) => Err(err_at(t.pos, format!("expected {tok}, found {}", t.tok))),
            None => Err(err_at(self.eof_pos(), format!("expected {tok}, found end of input"))),
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), LexParseError> {
        match self.bump() {
            Some(Spanned {
                tok: Tok::Ident(s),
                pos,
            }) => Ok((s, pos)),
            Some(t) => Err(err_at(t.pos, format!("expected identifier, found {}", t.tok))),
            None => Err(err_at(self.eof_pos(), "expected identifier, found end of input")),
        }
    }

    pub fn expect_int(&mut self) -> Result<(i64, Pos), LexParseError> {
        match self.bump() {
            Some(Spanned {
                tok: Tok::Int(n),
                pos,
            }) => Ok((n, pos)),
            Some(t) => Err(err_at(t.pos, format!("expected integer, found {}", t.tok))),
            None => Err(err_at(self.eof_pos(), "expected integer, found end of input")),
        }
    }
}
