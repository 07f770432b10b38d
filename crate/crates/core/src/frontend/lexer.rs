//! Tokenizer for the supported header subset.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Punct,
    Literal,
    /// A `/** ... */` block.
    Doc,
    /// A whole preprocessor line.
    Directive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub start: usize,
}

impl Token<'_> {
    pub fn end(&self) -> usize {
        self.start + self.text.len()
    }

    pub fn span(&self) -> Range<usize> {
        self.start..self.end()
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text && matches!(self.kind, TokenKind::Ident | TokenKind::Punct)
    }

    pub fn is_word(&self) -> bool {
        matches!(self.kind, TokenKind::Ident | TokenKind::Number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

/// Maps byte offsets to 1-based line and column numbers.
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    pub fn position(&self, offset: usize) -> (usize, usize) {
        let line = self.starts.partition_point(|&s| s <= offset) - 1;
        (line + 1, offset - self.starts[line] + 1)
    }
}

const PUNCT: &str = "{}()[];:,<>=~*&+-/!%^|?.";

pub fn tokenize(text: &str) -> Result<Vec<Token<'_>>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line_start = true;

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let at_line_start = std::mem::replace(&mut line_start, false);

        if c == b'#' && at_line_start {
            // Runs to end of line, honouring backslash continuations.
            while i < bytes.len() && bytes[i] != b'\n' {
                if bytes[i] == b'\\' && bytes.get(i + 1) == Some(&b'\n') {
                    i += 2;
                    continue;
                }
                i += 1;
            }
            let end = if i > start && bytes[i - 1] == b'\r' { i - 1 } else { i };
            tokens.push(Token {
                kind: TokenKind::Directive,
                text: &text[start..end],
                start,
            });
            continue;
        }

        if text[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if text[i..].starts_with("/*") {
            let close = text[i + 2..].find("*/").ok_or(LexError {
                offset: start,
                message: "unterminated comment".into(),
            })?;
            i = i + 2 + close + 2;
            let body = &text[start..i];
            if body.starts_with("/**") && body != "/**/" {
                tokens.push(Token {
                    kind: TokenKind::Doc,
                    text: body,
                    start,
                });
            }
            continue;
        }

        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: &text[start..i],
                start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'.' | b'\'')) {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                text: &text[start..i],
                start,
            });
            continue;
        }
        if c == b'"' || c == b'\'' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => {
                        return Err(LexError {
                            offset: start,
                            message: "unterminated literal".into(),
                        })
                    }
                    Some(b'\\') => i += 2,
                    Some(&q) if q == c => {
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
            tokens.push(Token {
                kind: TokenKind::Literal,
                text: &text[start..i],
                start,
            });
            continue;
        }
        if text[i..].starts_with("::") {
            i += 2;
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: &text[start..i],
                start,
            });
            continue;
        }
        if c.is_ascii() && PUNCT.as_bytes().contains(&c) {
            i += 1;
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: &text[start..i],
                start,
            });
            continue;
        }

        let ch = text[i..].chars().next().unwrap_or('?');
        return Err(LexError {
            offset: start,
            message: format!("unexpected character {ch:?}"),
        });
    }
    Ok(tokens)
}
