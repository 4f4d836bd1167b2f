//! A small lexer for brace-delimited languages.
//!
//! It keeps only what method detection and decision-point counting need:
//! braces, parentheses, semicolons, identifiers and the `&&`, `||` and `?`
//! operators, each tagged with its 1-based line. Comments are dropped and
//! string/character literal contents are discarded.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    OpenBrace,
    CloseBrace,
    OpenParen,
    CloseParen,
    Semicolon,
    Ident(String),
    AndAnd,
    OrOr,
    Question,
    /// A string or character literal with its contents removed.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    /// `code_lines[i]` is true when line `i + 1` has text outside comments.
    pub code_lines: Vec<bool>,
}

impl TokenStream {
    pub fn loc(&self) -> usize {
        self.code_lines.iter().filter(|c| **c).count()
    }

    /// Code lines within `first..=last` (1-based).
    pub fn loc_between(&self, first: usize, last: usize) -> usize {
        if first == 0 || last < first {
            return 0;
        }
        let end = last.min(self.code_lines.len());
        self.code_lines[first - 1..end].iter().filter(|c| **c).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TokenizeError {
    #[error("unterminated block comment starting on line {0}")]
    UnterminatedComment(usize),
    #[error("unterminated string literal starting on line {0}")]
    UnterminatedString(usize),
}

pub fn tokenize(text: &str) -> Result<TokenStream, TokenizeError> {
    let chars: Vec<char> = text.chars().collect();
    let line_count = if text.is_empty() { 0 } else { text.lines().count() };
    let mut code_lines = vec![false; line_count];
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut i = 0usize;

    let mark = |code_lines: &mut Vec<bool>, line: usize| {
        if line > code_lines.len() {
            code_lines.resize(line, false);
        }
        code_lines[line - 1] = true;
    };

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if next == Some('*') => {
                let start = line;
                i += 2;
                loop {
                    match chars.get(i) {
                        None => return Err(TokenizeError::UnterminatedComment(start)),
                        Some('*') if chars.get(i + 1) == Some(&'/') => {
                            i += 2;
                            break;
                        }
                        Some('\n') => {
                            line += 1;
                            i += 1;
                        }
                        Some(_) => i += 1,
                    }
                }
            }
            '"' => {
                let start = line;
                mark(&mut code_lines, line);
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(TokenizeError::UnterminatedString(start)),
                        Some('\\') => {
                            if chars.get(i + 1) == Some(&'\n') {
                                line += 1;
                                mark(&mut code_lines, line);
                            }
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\n') => {
                            line += 1;
                            mark(&mut code_lines, line);
                            i += 1;
                        }
                        Some(_) => i += 1,
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Literal,
                    line: start,
                });
            }
            '\'' => {
                mark(&mut code_lines, line);
                match char_literal_end(&chars, i) {
                    Some(end) => {
                        tokens.push(Token {
                            kind: TokenKind::Literal,
                            line,
                        });
                        i = end;
                    }
                    // Not a character literal (e.g. a Rust lifetime).
                    None => i += 1,
                }
            }
            _ => {
                mark(&mut code_lines, line);
                let kind = match c {
                    '{' => Some(TokenKind::OpenBrace),
                    '}' => Some(TokenKind::CloseBrace),
                    '(' => Some(TokenKind::OpenParen),
                    ')' => Some(TokenKind::CloseParen),
                    ';' => Some(TokenKind::Semicolon),
                    '?' => Some(TokenKind::Question),
                    '&' if next == Some('&') => {
                        i += 1;
                        Some(TokenKind::AndAnd)
                    }
                    '|' if next == Some('|') => {
                        i += 1;
                        Some(TokenKind::OrOr)
                    }
                    c if c.is_alphabetic() || c == '_' || c == '$' => {
                        let start = i;
                        while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                            i += 1;
                        }
                        let word: String = chars[start..i].iter().collect();
                        tokens.push(Token {
                            kind: TokenKind::Ident(word),
                            line,
                        });
                        continue;
                    }
                    c if c.is_ascii_digit() => {
                        while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                            i += 1;
                        }
                        continue;
                    }
                    _ => None,
                };
                if let Some(kind) = kind {
                    tokens.push(Token { kind, line });
                }
                i += 1;
            }
        }
    }

    Ok(TokenStream { tokens, code_lines })
}

/// End index (exclusive) of a character literal opening at `start`: one
/// character, or an escape sequence closed on the same line.
fn char_literal_end(chars: &[char], start: usize) -> Option<usize> {
    match chars.get(start + 1)? {
        '\\' => {
            let mut i = start + 2;
            while i < chars.len() && i <= start + 12 {
                match chars[i] {
                    '\n' => return None,
                    '\'' if i > start + 2 => return Some(i + 1),
                    _ => i += 1,
                }
            }
            None
        }
        '\n' | '\'' => None,
        _ => (chars.get(start + 2) == Some(&'\'')).then_some(start + 3),
    }
}
