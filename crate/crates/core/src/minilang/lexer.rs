use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Double(String),
    Str(String),
    Comment(String),
    Punct(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Double(s) => format!("`{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Comment(_) => "comment".to_string(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of file".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
}

const PUNCTS2: &[&str] = &["==", "!=", "<=", ">=", "&&", "||"];
const PUNCTS1: &str = "{}()[];,.=<>+-*/!";

pub(crate) fn lex(file: &str, text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && i + 1 < chars.len() && chars[i + 1] == '/' {
            let start = i + 2;
            let mut j = start;
            while j < chars.len() && chars[j] != '\n' {
                j += 1;
            }
            let body: String = chars[start..j].iter().collect();
            tokens.push(Token {
                tok: Tok::Comment(body.trim().to_string()),
                line,
            });
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(chars[i..j].iter().collect()),
                line,
            });
            i = j;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '.' && j + 1 < chars.len() && chars[j + 1].is_ascii_digit()
            {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                tokens.push(Token {
                    tok: Tok::Double(chars[i..j].iter().collect()),
                    line,
                });
            } else {
                let text: String = chars[i..j].iter().collect();
                let value = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                    file: file.to_string(),
                    line,
                    expected: "integer literal".to_string(),
                    found: format!("`{text}`"),
                })?;
                tokens.push(Token {
                    tok: Tok::Int(value),
                    line,
                });
            }
            i = j;
        } else if c == '"' {
            let mut j = i + 1;
            let mut value = String::new();
            let mut closed = false;
            while j < chars.len() {
                match chars[j] {
                    '"' => {
                        closed = true;
                        j += 1;
                        break;
                    }
                    '\\' if j + 1 < chars.len() => {
                        value.push(match chars[j + 1] {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        j += 2;
                    }
                    '\n' => break,
                    other => {
                        value.push(other);
                        j += 1;
                    }
                }
            }
            if !closed {
                return Err(ParseError::Syntax {
                    file: file.to_string(),
                    line,
                    expected: "closing `\"`".to_string(),
                    found: "end of line".to_string(),
                });
            }
            tokens.push(Token {
                tok: Tok::Str(value),
                line,
            });
            i = j;
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if let Some(p) = PUNCTS2.iter().find(|p| **p == two) {
                tokens.push(Token {
                    tok: Tok::Punct(p),
                    line,
                });
                i += 2;
            } else if let Some(pos) = PUNCTS1.find(c) {
                // index into the static str to get a 'static slice
                tokens.push(Token {
                    tok: Tok::Punct(&PUNCTS1[pos..pos + c.len_utf8()]),
                    line,
                });
                i += 1;
            } else {
                return Err(ParseError::Syntax {
                    file: file.to_string(),
                    line,
                    expected: "token".to_string(),
                    found: format!("`{c}`"),
                });
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
    });
    Ok(tokens)
}
