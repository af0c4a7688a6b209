//! Indentation-aware tokenizer.
//!
//! Emits INDENT/DEDENT tokens from leading whitespace, suppresses newlines
//! inside brackets (implicit line joining), and rejects constructs outside
//! the MiniLang grammar with a named error.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Kw(Kw),
    Op(Op),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Def,
    Return,
    If,
    Elif,
    Else,
    While,
    For,
    In,
    And,
    Or,
    Not,
    Assert,
    Pass,
    True,
    False,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Plus,
    Minus,
    Star,
    SlashSlash,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashSlashAssign,
    SlashAssign,
    PercentAssign,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    Semicolon,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

/// Keywords of full Python that MiniLang deliberately excludes. Seeing one
/// as a statement head is an `UnsupportedConstruct`, not a syntax error.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "class", "import", "from", "try", "except", "finally", "with", "lambda", "global",
    "nonlocal", "yield", "raise", "del", "break", "continue", "async", "await", "is", "match",
];

pub fn is_unsupported_keyword(s: &str) -> bool {
    UNSUPPORTED_KEYWORDS.contains(&s)
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut tokens = Vec::new();
    let mut indents: Vec<u32> = vec![0];
    let mut bracket_depth: usize = 0;

    for (line_idx, raw_line) in source.lines().enumerate() {
        let line_no = (line_idx + 1) as u32;

        if bracket_depth == 0 {
            // Measure indentation; skip blank and comment-only lines.
            let mut width: u32 = 0;
            let mut chars = raw_line.chars();
            let mut rest_start = 0usize;
            for c in chars.by_ref() {
                match c {
                    ' ' => {
                        width += 1;
                        rest_start += 1;
                    }
                    '\t' => {
                        return Err(FrontendError::Syntax {
                            line: line_no,
                            col: width + 1,
                            message: "tab indentation is not supported".into(),
                        })
                    }
                    _ => break,
                }
            }
            let rest = &raw_line[rest_start..];
            if rest.is_empty() || rest.starts_with('#') {
                continue;
            }
            let current = *indents.last().unwrap();
            if width > current {
                indents.push(width);
                tokens.push(Token { tok: Tok::Indent, line: line_no, col: 1 });
            } else if width < current {
                while *indents.last().unwrap() > width {
                    indents.pop();
                    tokens.push(Token { tok: Tok::Dedent, line: line_no, col: 1 });
                }
                if *indents.last().unwrap() != width {
                    return Err(FrontendError::Syntax {
                        line: line_no,
                        col: 1,
                        message: "inconsistent dedent".into(),
                    });
                }
            }
            lex_line(rest, line_no, rest_start as u32, &mut tokens, &mut bracket_depth)?;
            if bracket_depth == 0 {
                tokens.push(Token { tok: Tok::Newline, line: line_no, col: 1 });
            }
        } else {
            // Continuation line inside brackets: no indent handling.
            let trimmed = raw_line.trim_start();
            let offset = (raw_line.len() - trimmed.len()) as u32;
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            lex_line(trimmed, line_no, offset, &mut tokens, &mut bracket_depth)?;
            if bracket_depth == 0 {
                tokens.push(Token { tok: Tok::Newline, line: line_no, col: 1 });
            }
        }
    }
    if bracket_depth > 0 {
        return Err(FrontendError::Syntax {
            line: source.lines().count() as u32,
            col: 1,
            message: "unclosed bracket at end of input".into(),
        });
    }
    let last_line = source.lines().count().max(1) as u32;
    while indents.len() > 1 {
        indents.pop();
        tokens.push(Token { tok: Tok::Dedent, line: last_line, col: 1 });
    }
    tokens.push(Token { tok: Tok::Eof, line: last_line, col: 1 });
    Ok(tokens)
}

fn lex_line(
    text: &str,
    line: u32,
    col_offset: u32,
    out: &mut Vec<Token>,
    bracket_depth: &mut usize,
) -> Result<(), FrontendError> {
    let bytes = text.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = col_offset + i as u32 + 1;
        match c {
            ' ' => {
                i += 1;
            }
            '#' => break,
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] as char == '.' || bytes[i] as char == 'e') {
                    return Err(FrontendError::Unsupported {
                        construct: "float literal".into(),
                        line,
                    });
                }
                let value: i64 = text[start..i].parse().map_err(|_| FrontendError::Syntax {
                    line,
                    col,
                    message: "integer literal out of range".into(),
                })?;
                out.push(Token { tok: Tok::Int(value), line, col });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] as char == '_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "def" => Tok::Kw(Kw::Def),
                    "return" => Tok::Kw(Kw::Return),
                    "if" => Tok::Kw(Kw::If),
                    "elif" => Tok::Kw(Kw::Elif),
                    "else" => Tok::Kw(Kw::Else),
                    "while" => Tok::Kw(Kw::While),
                    "for" => Tok::Kw(Kw::For),
                    "in" => Tok::Kw(Kw::In),
                    "and" => Tok::Kw(Kw::And),
                    "or" => Tok::Kw(Kw::Or),
                    "not" => Tok::Kw(Kw::Not),
                    "assert" => Tok::Kw(Kw::Assert),
                    "pass" => Tok::Kw(Kw::Pass),
                    "True" => Tok::Kw(Kw::True),
                    "False" => Tok::Kw(Kw::False),
                    "None" => Tok::Kw(Kw::None),
                    w if is_unsupported_keyword(w) => {
                        return Err(FrontendError::Unsupported { construct: w.into(), line })
                    }
                    _ => Tok::Ident(word.to_string()),
                };
                out.push(Token { tok, line, col });
            }
            '"' | '\'' => {
                return Err(FrontendError::Unsupported {
                    construct: "string literal".into(),
                    line,
                })
            }
            _ => {
                let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
                let (op, len) = match two {
                    "//" => {
                        if i + 2 < bytes.len() && bytes[i + 2] as char == '=' {
                            (Op::SlashSlashAssign, 3)
                        } else {
                            (Op::SlashSlash, 2)
                        }
                    }
                    "==" => (Op::EqEq, 2),
                    "!=" => (Op::NotEq, 2),
                    "<=" => (Op::Le, 2),
                    ">=" => (Op::Ge, 2),
                    "+=" => (Op::PlusAssign, 2),
                    "-=" => (Op::MinusAssign, 2),
                    "*=" => (Op::StarAssign, 2),
                    "/=" => (Op::SlashAssign, 2),
                    "%=" => (Op::PercentAssign, 2),
                    _ => match c {
                        '+' => (Op::Plus, 1),
                        '-' => (Op::Minus, 1),
                        '*' => (Op::Star, 1),
                        '/' => (Op::Slash, 1),
                        '%' => (Op::Percent, 1),
                        '<' => (Op::Lt, 1),
                        '>' => (Op::Gt, 1),
                        '=' => (Op::Assign, 1),
                        '(' => (Op::LParen, 1),
                        ')' => (Op::RParen, 1),
                        '[' => (Op::LBracket, 1),
                        ']' => (Op::RBracket, 1),
                        ':' => (Op::Colon, 1),
                        ',' => (Op::Comma, 1),
                        '.' => (Op::Dot, 1),
                        ';' => (Op::Semicolon, 1),
                        '{' | '}' => {
                            return Err(FrontendError::Unsupported {
                                construct: "dict or set literal".into(),
                                line,
                            })
                        }
                        other => {
                            return Err(FrontendError::Syntax {
                                line,
                                col,
                                message: format!("unexpected character '{other}'"),
                            })
                        }
                    },
                };
                match op {
                    Op::LParen | Op::LBracket => *bracket_depth += 1,
                    Op::RParen | Op::RBracket => {
                        *bracket_depth = bracket_depth.saturating_sub(1)
                    }
                    _ => {}
                }
                out.push(Token { tok: Tok::Op(op), line, col });
                i += len;
                continue;
            }
        }
        if matches!(c, '0'..='9' | 'a'..='z' | 'A'..='Z' | '_' | ' ' | '#') {
            continue;
        }
    }
    Ok(())
}
