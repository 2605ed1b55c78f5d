//! Keyword-in-context lines with token-measured windows.

use serde::{Deserialize, Serialize};

use crate::tokenizer::Token;

pub const DEFAULT_WIDTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KwicLine {
    pub doc_id: String,
    pub offset: usize,
    pub left: String,
    pub keyword: String,
    pub right: String,
}

impl KwicLine {
    /// `left|keyword|right`
    pub fn to_field(&self) -> String {
        format!("{}|{}|{}", self.left, self.keyword, self.right)
    }
}

/// Builds the line for `tokens[idx]`, using up to `width` tokens on each side
/// from the same document.
pub fn kwic_line(tokens: &[Token], idx: usize, width: usize) -> KwicLine {
    let target = &tokens[idx];
    let same_doc = |t: &&Token| t.doc_id == target.doc_id;
    let mut left: Vec<&str> = tokens[..idx]
        .iter()
        .rev()
        .take_while(same_doc)
        .take(width)
        .map(|t| t.surface.as_str())
        .collect();
    left.reverse();
    let right: Vec<&str> = tokens[idx + 1..]
        .iter()
        .take_while(same_doc)
        .take(width)
        .map(|t| t.surface.as_str())
        .collect();
    KwicLine {
        doc_id: target.doc_id.clone(),
        offset: target.char_offset,
        left: left.join(" "),
        keyword: target.surface.clone(),
        right: right.join(" "),
    }
}

/// Every occurrence whose key (as computed by `key_of`) equals `form`.
pub fn concordance<F>(tokens: &[Token], form: &str, width: usize, key_of: F) -> Vec<KwicLine>
where
    F: Fn(&Token) -> String,
{
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| key_of(t) == form)
        .map(|(i, _)| kwic_line(tokens, i, width))
        .collect()
}
