//! Tokenizer for `.rabc` source text.

use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(i64),
    KwFn,
    KwLet,
    KwIf,
    KwElse,
    KwMatch,
    KwNil,
    KwCons,
    KwBox,
    KwMove,
    KwCopy,
    KwDrop,
    KwTick,
    KwReturn,
    KwTrue,
    KwFalse,
    KwI32,
    KwBool,
    KwList,
    KwUnit,
    KwMut,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Arrow,
    Assign,
    FatArrow,
    Amp,
    Star,
    Plus,
    Minus,
    Lt,
    Le,
    EqEq,
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Ident(s) => write!(f, "identifier `{}`", s),
            TokKind::Int(n) => write!(f, "integer `{}`", n),
            TokKind::KwFn => write!(f, "`fn`"),
            TokKind::KwLet => write!(f, "`let`"),
            TokKind::KwIf => write!(f, "`if`"),
            TokKind::KwElse => write!(f, "`else`"),
            TokKind::KwMatch => write!(f, "`match`"),
            TokKind::KwNil => write!(f, "`nil`"),
            TokKind::KwCons => write!(f, "`cons`"),
            TokKind::KwBox => write!(f, "`box`"),
            TokKind::KwMove => write!(f, "`move`"),
            TokKind::KwCopy => write!(f, "`copy`"),
            TokKind::KwDrop => write!(f, "`drop`"),
            TokKind::KwTick => write!(f, "`tick`"),
            TokKind::KwReturn => write!(f, "`return`"),
            TokKind::KwTrue => write!(f, "`true`"),
            TokKind::KwFalse => write!(f, "`false`"),
            TokKind::KwI32 => write!(f, "`i32`"),
            TokKind::KwBool => write!(f, "`bool`"),
            TokKind::KwList => write!(f, "`list`"),
            TokKind::KwUnit => write!(f, "`unit`"),
            TokKind::KwMut => write!(f, "`mut`"),
            TokKind::LParen => write!(f, "`(`"),
            TokKind::RParen => write!(f, "`)`"),
            TokKind::LBrace => write!(f, "`{{`"),
            TokKind::RBrace => write!(f, "`}}`"),
            TokKind::Comma => write!(f, "`,`"),
            TokKind::Colon => write!(f, "`:`"),
            TokKind::Semi => write!(f, "`;`"),
            TokKind::Arrow => write!(f, "`->`"),
            TokKind::Assign => write!(f, "`:=`"),
            TokKind::FatArrow => write!(f, "`=>`"),
            TokKind::Amp => write!(f, "`&`"),
            TokKind::Star => write!(f, "`*`"),
            TokKind::Plus => write!(f, "`+`"),
            TokKind::Minus => write!(f, "`-`"),
            TokKind::Lt => write!(f, "`<`"),
            TokKind::Le => write!(f, "`<=`"),
            TokKind::EqEq => write!(f, "`==`"),
            TokKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub span: Span,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let span = Span {
                line: self.line,
                col: self.col,
            };
            let Some(c) = self.peek() else {
                out.push(Token {
                    kind: TokKind::Eof,
                    span,
                });
                return Ok(out);
            };
            let kind = match c {
                b'(' => self.one(TokKind::LParen),
                b')' => self.one(TokKind::RParen),
                b'{' => self.one(TokKind::LBrace),
                b'}' => self.one(TokKind::RBrace),
                b',' => self.one(TokKind::Comma),
                b';' => self.one(TokKind::Semi),
                b'&' => self.one(TokKind::Amp),
                b'*' => self.one(TokKind::Star),
                b'+' => self.one(TokKind::Plus),
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        TokKind::Assign
                    } else {
                        TokKind::Colon
                    }
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        TokKind::Arrow
                    } else {
                        TokKind::Minus
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        TokKind::Le
                    } else {
                        TokKind::Lt
                    }
                }
                b'=' => {
                    self.bump();
                    match self.peek() {
                        Some(b'=') => {
                            self.bump();
                            TokKind::EqEq
                        }
                        Some(b'>') => {
                            self.bump();
                            TokKind::FatArrow
                        }
                        _ => {
                            return Err(LexError {
                                span,
                                message: "expected `==` or `=>`".into(),
                            })
                        }
                    }
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'0'..=b'9')) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match text.parse::<i64>() {
                        Ok(n) => TokKind::Int(n),
                        Err(_) => {
                            return Err(LexError {
                                span,
                                message: format!("integer literal `{}` out of range", text),
                            })
                        }
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    keyword(text).unwrap_or_else(|| TokKind::Ident(text.to_string()))
                }
                other => {
                    return Err(LexError {
                        span,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push(Token { kind, span });
        }
    }

    fn one(&mut self, kind: TokKind) -> TokKind {
        self.bump();
        kind
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += 1;
            if c == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }
}

fn keyword(text: &str) -> Option<TokKind> {
    Some(match text {
        "fn" => TokKind::KwFn,
        "let" => TokKind::KwLet,
        "if" => TokKind::KwIf,
        "else" => TokKind::KwElse,
        "match" => TokKind::KwMatch,
        "nil" => TokKind::KwNil,
        "cons" => TokKind::KwCons,
        "box" => TokKind::KwBox,
        "move" => TokKind::KwMove,
        "copy" => TokKind::KwCopy,
        "drop" => TokKind::KwDrop,
        "tick" => TokKind::KwTick,
        "return" => TokKind::KwReturn,
        "true" => TokKind::KwTrue,
        "false" => TokKind::KwFalse,
        "i32" => TokKind::KwI32,
        "bool" => TokKind::KwBool,
        "list" => TokKind::KwList,
        "unit" => TokKind::KwUnit,
        "mut" => TokKind::KwMut,
        _ => return None,
    })
}
