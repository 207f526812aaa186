use crate::expr::Span;

use super::Diagnostic;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    At,
    Cmp(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::At => "`@`".into(),
            Tok::Cmp(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c == b'/' && bytes.get(pos + 1) == Some(&b'/') {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        let col = (text[line_start..start].chars().count() + 1) as u32;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            Tok::Ident(text[start..pos].to_string())
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit)) {
            pos = scan_number(bytes, pos);
            Tok::Number(text[start..pos].to_string())
        } else {
            let two = &bytes[pos..(pos + 2).min(bytes.len())];
            let (tok, len) = match two {
                b"<=" => (Tok::Cmp("<="), 2),
                b">=" => (Tok::Cmp(">="), 2),
                b"==" => (Tok::Cmp("=="), 2),
                b"!=" => (Tok::Cmp("!="), 2),
                _ => match c {
                    b'<' => (Tok::Cmp("<"), 1),
                    b'>' => (Tok::Cmp(">"), 1),
                    b'(' => (Tok::LParen, 1),
                    b')' => (Tok::RParen, 1),
                    b'{' => (Tok::LBrace, 1),
                    b'}' => (Tok::RBrace, 1),
                    b'[' => (Tok::LBracket, 1),
                    b']' => (Tok::RBracket, 1),
                    b';' => (Tok::Semi, 1),
                    b':' => (Tok::Colon, 1),
                    b'=' => (Tok::Assign, 1),
                    b'+' => (Tok::Plus, 1),
                    b'-' => (Tok::Minus, 1),
                    b'*' => (Tok::Star, 1),
                    b'/' => (Tok::Slash, 1),
                    b'@' => (Tok::At, 1),
                    _ => {
                        let ch = text[start..].chars().next().expect("non-empty");
                        let span = Span::new(line, col, start, start + ch.len_utf8());
                        return Err(Diagnostic::error(format!("unexpected character `{ch}`"), span));
                    }
                },
            };
            pos += len;
            tok
        };
        tokens.push(Token { tok, span: Span::new(line, col, start, pos) });
    }
    let col = (text[line_start..].chars().count() + 1) as u32;
    tokens.push(Token { tok: Tok::Eof, span: Span::new(line, col, text.len(), text.len()) });
    Ok(tokens)
}

/// End of a numeric literal starting at `pos`. Validation happens when the
/// literal is converted to an exact value.
fn scan_number(bytes: &[u8], mut pos: usize) -> usize {
    let hex = bytes[pos] == b'0' && matches!(bytes.get(pos + 1), Some(b'x' | b'X'));
    if hex {
        pos += 2;
    }
    let exp_marks: &[u8] = if hex { b"pP" } else { b"eE" };
    while pos < bytes.len() {
        let c = bytes[pos];
        if exp_marks.contains(&c) {
            pos += 1;
            if matches!(bytes.get(pos), Some(b'+' | b'-')) {
                pos += 1;
            }
        } else if c.is_ascii_alphanumeric() || c == b'.' {
            pos += 1;
        } else {
            break;
        }
    }
    pos
}
