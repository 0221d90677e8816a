//! Tokenizer with byte offsets.

use super::ast::{is_bare_continue, is_bare_start};
use super::SqlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Select,
    From,
    Where,
    Group,
    By,
    Having,
    Order,
    Asc,
    Desc,
    Limit,
    Join,
    Inner,
    On,
    As,
    And,
    Or,
    Not,
    Null,
    Sum,
    Avg,
    Count,
    Min,
    Max,
    // Recognized only to be rejected.
    Distinct,
    Like,
    In,
    Between,
    Union,
    Intersect,
    Except,
    Case,
    When,
    Left,
    Right,
    Full,
    Outer,
    Cross,
    Natural,
    Is,
    Exists,
    With,
    Offset,
}

const KEYWORDS: &[(&str, Keyword)] = &[
    ("SELECT", Keyword::Select),
    ("FROM", Keyword::From),
    ("WHERE", Keyword::Where),
    ("GROUP", Keyword::Group),
    ("BY", Keyword::By),
    ("HAVING", Keyword::Having),
    ("ORDER", Keyword::Order),
    ("ASC", Keyword::Asc),
    ("DESC", Keyword::Desc),
    ("LIMIT", Keyword::Limit),
    ("JOIN", Keyword::Join),
    ("INNER", Keyword::Inner),
    ("ON", Keyword::On),
    ("AS", Keyword::As),
    ("AND", Keyword::And),
    ("OR", Keyword::Or),
    ("NOT", Keyword::Not),
    ("NULL", Keyword::Null),
    ("SUM", Keyword::Sum),
    ("AVG", Keyword::Avg),
    ("COUNT", Keyword::Count),
    ("MIN", Keyword::Min),
    ("MAX", Keyword::Max),
    ("DISTINCT", Keyword::Distinct),
    ("LIKE", Keyword::Like),
    ("IN", Keyword::In),
    ("BETWEEN", Keyword::Between),
    ("UNION", Keyword::Union),
    ("INTERSECT", Keyword::Intersect),
    ("EXCEPT", Keyword::Except),
    ("CASE", Keyword::Case),
    ("WHEN", Keyword::When),
    ("LEFT", Keyword::Left),
    ("RIGHT", Keyword::Right),
    ("FULL", Keyword::Full),
    ("OUTER", Keyword::Outer),
    ("CROSS", Keyword::Cross),
    ("NATURAL", Keyword::Natural),
    ("IS", Keyword::Is),
    ("EXISTS", Keyword::Exists),
    ("WITH", Keyword::With),
    ("OFFSET", Keyword::Offset),
];

pub fn keyword(word: &str) -> Option<Keyword> {
    KEYWORDS
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(word))
        .map(|(_, kw)| *kw)
}

pub fn is_keyword(word: &str) -> bool {
    keyword(word).is_some()
}

impl Keyword {
    pub fn as_str(self) -> &'static str {
        KEYWORDS
            .iter()
            .find(|(_, k)| *k == self)
            .map(|(s, _)| *s)
            .expect("every keyword is listed")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    QuotedIdent(String),
    Str(String),
    /// Unsigned numeric literal; the raw text is kept for LIMIT.
    Number(f64, String),
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Minus,
    /// `+ / % ||`: only ever reported as unsupported arithmetic.
    Arith(&'static str),
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Semicolon,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Keyword(k) => k.as_str().to_string(),
            TokenKind::Ident(s) => format!("identifier {s}"),
            TokenKind::QuotedIdent(s) => format!("identifier \"{s}\""),
            TokenKind::Str(s) => format!("string '{s}'"),
            TokenKind::Number(_, raw) => format!("number {raw}"),
            TokenKind::Comma => "','".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Arith(op) => format!("'{op}'"),
            TokenKind::Eq => "'='".into(),
            TokenKind::NotEq => "'<>'".into(),
            TokenKind::Lt => "'<'".into(),
            TokenKind::LtEq => "'<='".into(),
            TokenKind::Gt => "'>'".into(),
            TokenKind::GtEq => "'>='".into(),
            TokenKind::Semicolon => "';'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first character.
    pub offset: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SqlError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let simple = match c {
            ',' => Some(TokenKind::Comma),
            '.' if !src[start + 1..].starts_with(|d: char| d.is_ascii_digit()) => Some(TokenKind::Dot),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '*' => Some(TokenKind::Star),
            '-' => Some(TokenKind::Minus),
            '+' => Some(TokenKind::Arith("+")),
            '/' => Some(TokenKind::Arith("/")),
            '%' => Some(TokenKind::Arith("%")),
            ';' => Some(TokenKind::Semicolon),
            '=' => Some(TokenKind::Eq),
            _ => None,
        };
        if let Some(kind) = simple {
            chars.next();
            out.push(Token { kind, offset: start });
            continue;
        }
        let rest = &src[start..];
        let two = |s: &str| rest.starts_with(s);
        let (kind, len) = if two("<>") || two("!=") {
            (TokenKind::NotEq, 2)
        } else if two("<=") {
            (TokenKind::LtEq, 2)
        } else if two(">=") {
            (TokenKind::GtEq, 2)
        } else if two("||") {
            (TokenKind::Arith("||"), 2)
        } else if c == '<' {
            (TokenKind::Lt, 1)
        } else if c == '>' {
            (TokenKind::Gt, 1)
        } else if c == '\'' || c == '"' {
            let (text, len) = quoted(src, start, c)?;
            let kind = if c == '\'' {
                TokenKind::Str(text)
            } else {
                TokenKind::QuotedIdent(text)
            };
            (kind, len)
        } else if c.is_ascii_digit() || c == '.' {
            let len = rest
                .find(|d: char| !(d.is_ascii_digit() || d == '.'))
                .unwrap_or(rest.len());
            let raw = &rest[..len];
            let after = rest[len..].chars().next();
            let value = match crate::sql::value::parse_number(raw) {
                Some(v) if !after.is_some_and(is_bare_continue) => v,
                _ => {
                    return Err(SqlError::Syntax {
                        offset: start,
                        expected: vec!["number".into()],
                        found: format!("'{}'", &rest[..len + after.map_or(0, char::len_utf8)]),
                    })
                }
            };
            (TokenKind::Number(value, raw.to_string()), len)
        } else if is_bare_start(c) {
            let len = rest
                .find(|d: char| !is_bare_continue(d))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let kind = match keyword(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_string()),
            };
            (kind, len)
        } else {
            return Err(SqlError::Syntax {
                offset: start,
                expected: vec!["token".into()],
                found: format!("'{c}'"),
            });
        };
        out.push(Token { kind, offset: start });
        while chars.peek().is_some_and(|&(i, _)| i < start + len) {
            chars.next();
        }
    }
    out.push(Token {
        kind: TokenKind::Eof,
        offset: src.len(),
    });
    Ok(out)
}

/// Read a quoted run starting at `start`; a doubled quote is an escaped quote.
fn quoted(src: &str, start: usize, quote: char) -> Result<(String, usize), SqlError> {
    let mut text = String::new();
    let mut iter = src[start + 1..].char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c == quote {
            if iter.peek().is_some_and(|&(_, n)| n == quote) {
                iter.next();
                text.push(quote);
            } else {
                return Ok((text, i + 2));
            }
        } else {
            text.push(c);
        }
    }
    Err(SqlError::Syntax {
        offset: src.len(),
        expected: vec![format!("closing {quote}")],
        found: "end of input".into(),
    })
}
