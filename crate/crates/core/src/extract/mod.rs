//! Product metrics from source text: lines of code, method lengths and
//! McCabe cyclomatic complexity.
//!
//! Methods are found without a grammar. A method is an identifier followed
//! by a parenthesised list and then `{`, opened directly inside a type body
//! (`class`, `interface`, `enum`, `struct`, `union`, `record`, `trait`,
//! `impl`, `namespace`, `mod`, `object`) or at the top level of the file. A method spans its matched braces; its
//! length counts code lines from the line of its name to its closing brace.
//!
//! Per-method complexity is `1 +` the number of `if`, `for`, `while`,
//! `case`, `catch`, `&&`, `||` and `?` tokens inside the span. `else if`
//! counts once, through its `if`.

mod tokenize;
mod tree;

use serde::Serialize;

pub use tokenize::{tokenize, Token, TokenKind, TokenStream, TokenizeError};
pub use tree::{extract_tree, load_mapping, records_for, CyclomaticAggregation, ExtractedUnit, SOURCE_EXTENSIONS};

const TYPE_KEYWORDS: &[&str] = &[
    "class",
    "interface",
    "enum",
    "struct",
    "union",
    "record",
    "trait",
    "impl",
    "namespace",
    "mod",
    "object",
];

/// Keywords that look like a call followed by a block.
const NOT_METHOD_NAMES: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "return",
    "new",
    "synchronized",
    "using",
    "lock",
    "foreach",
    "do",
    "else",
    "try",
    "fixed",
    "match",
    "loop",
    "sizeof",
];

const DECISION_KEYWORDS: &[&str] = &["if", "for", "while", "case", "catch"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodMetrics {
    pub name: String,
    pub line: usize,
    pub length: usize,
    pub cyclomatic: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceUnitMetrics {
    pub name: String,
    /// Lines holding anything besides whitespace and comments.
    pub loc: usize,
    pub method_count: usize,
    /// Total method lines / method count; 0 without methods.
    pub mean_method_length: f64,
    /// 0 without methods.
    pub cyclomatic_max: u32,
    /// 0 without methods.
    pub cyclomatic_mean: f64,
    pub methods: Vec<MethodMetrics>,
}

impl SourceUnitMetrics {
    pub fn from_methods(name: impl Into<String>, loc: usize, methods: Vec<MethodMetrics>) -> Self {
        let count = methods.len();
        let (mean_len, max_cc, mean_cc) = if count == 0 {
            (0.0, 0, 0.0)
        } else {
            let total_len: usize = methods.iter().map(|m| m.length).sum();
            let total_cc: u64 = methods.iter().map(|m| u64::from(m.cyclomatic)).sum();
            (
                total_len as f64 / count as f64,
                methods.iter().map(|m| m.cyclomatic).max().unwrap_or(0),
                total_cc as f64 / count as f64,
            )
        };
        Self {
            name: name.into(),
            loc,
            method_count: count,
            mean_method_length: mean_len,
            cyclomatic_max: max_cc,
            cyclomatic_mean: mean_cc,
            methods,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("{path}: {source}")]
    Tokenize {
        path: String,
        #[source]
        source: TokenizeError,
    },
    #[error("{path}: unbalanced braces near line {line}")]
    Unbalanced { path: String, line: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Mapping { path: String, row: u64, message: String },
}

fn ident(t: &Token) -> Option<&str> {
    match &t.kind {
        TokenKind::Ident(s) => Some(s),
        _ => None,
    }
}

/// Index of the matching close brace for every open brace.
fn match_braces(tokens: &[Token]) -> Result<Vec<Option<usize>>, usize> {
    let mut matches = vec![None; tokens.len()];
    let mut open = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.kind {
            TokenKind::OpenBrace => open.push(i),
            TokenKind::CloseBrace => {
                let start = open.pop().ok_or(t.line)?;
                matches[start] = Some(i);
            }
            _ => {}
        }
    }
    match open.last() {
        Some(&i) => Err(tokens[i].line),
        None => Ok(matches),
    }
}

/// If the `{` at `open` starts a method body, the index of the name token.
fn method_header(tokens: &[Token], open: usize) -> Option<usize> {
    let mut j = open.checked_sub(1)?;
    while ident(&tokens[j]).is_some() {
        j = j.checked_sub(1)?;
    }
    if tokens[j].kind != TokenKind::CloseParen {
        return None;
    }
    let mut depth = 0usize;
    loop {
        match tokens[j].kind {
            TokenKind::CloseParen => depth += 1,
            TokenKind::OpenParen => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            TokenKind::OpenBrace | TokenKind::CloseBrace | TokenKind::Semicolon => return None,
            _ => {}
        }
        j = j.checked_sub(1)?;
    }
    let name_idx = j.checked_sub(1)?;
    let name = ident(&tokens[name_idx])?;
    if NOT_METHOD_NAMES.contains(&name) {
        return None;
    }
    if name_idx > 0 && ident(&tokens[name_idx - 1]) == Some("new") {
        return None;
    }
    Some(name_idx)
}

/// Which open braces start a type body.
fn type_bodies(tokens: &[Token]) -> Vec<bool> {
    let mut out = vec![false; tokens.len()];
    let mut pending: Option<&str> = None;
    for (i, t) in tokens.iter().enumerate() {
        match &t.kind {
            TokenKind::Ident(k) if TYPE_KEYWORDS.contains(&k.as_str()) => {
                if tokens.get(i + 1).and_then(ident).is_some() || k == "impl" {
                    pending = Some(k.as_str());
                }
            }
            TokenKind::Semicolon => pending = None,
            TokenKind::OpenBrace => {
                if let Some(k) = pending.take() {
                    // `struct point make(void) {` is a function returning a struct.
                    let c_function = matches!(k, "struct" | "union" | "enum") && method_header(tokens, i).is_some();
                    out[i] = !c_function;
                }
            }
            _ => {}
        }
    }
    out
}

fn is_decision(t: &Token) -> bool {
    match &t.kind {
        TokenKind::Ident(s) => DECISION_KEYWORDS.contains(&s.as_str()),
        TokenKind::AndAnd | TokenKind::OrOr | TokenKind::Question => true,
        _ => false,
    }
}

/// Metrics of one source text.
pub fn extract_metrics(name: &str, text: &str) -> Result<SourceUnitMetrics, ExtractError> {
    let ts = tokenize(text).map_err(|source| ExtractError::Tokenize {
        path: name.to_owned(),
        source,
    })?;
    let tokens = &ts.tokens;
    let matches = match_braces(tokens).map_err(|line| ExtractError::Unbalanced {
        path: name.to_owned(),
        line,
    })?;
    let bodies = type_bodies(tokens);

    // Stack entries: is this block a type body?
    let mut stack: Vec<bool> = Vec::new();
    let mut methods = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match tokens[i].kind {
            TokenKind::OpenBrace => {
                if bodies[i] {
                    stack.push(true);
                } else {
                    let in_container = stack.last().copied().unwrap_or(true);
                    let close = matches[i].expect("braces are balanced");
                    match method_header(tokens, i).filter(|_| in_container) {
                        Some(name_idx) => {
                            let decisions = tokens[i + 1..close].iter().filter(|t| is_decision(t)).count();
                            methods.push(MethodMetrics {
                                name: ident(&tokens[name_idx]).unwrap_or_default().to_owned(),
                                line: tokens[name_idx].line,
                                length: ts.loc_between(tokens[name_idx].line, tokens[close].line),
                                cyclomatic: 1 + decisions as u32,
                            });
                            i = close + 1;
                            continue;
                        }
                        None => stack.push(false),
                    }
                }
            }
            TokenKind::CloseBrace => {
                stack.pop();
            }
            _ => {}
        }
        i += 1;
    }

    Ok(SourceUnitMetrics::from_methods(name, ts.loc(), methods))
}
