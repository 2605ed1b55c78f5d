//! Loading corpus documents and turning raw edition text into clean, annotated text.
//!
//! Cleaning runs in three passes over the raw text:
//!
//! 1. editorial footnote bodies are removed (`⟦…⟧` by default),
//! 2. square-bracket expansions of abbreviations are resolved (`КС[ЬОНДЗ]` → `КСЬОНДЗ`),
//! 3. inline sense annotations `word{tag}` are lifted out of the running text.
//!
//! All offsets produced here are character (code point) offsets.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },
    #[error("unbalanced note delimiter at char {position}")]
    UnbalancedNote { position: usize },
    #[error("unbalanced square bracket at char {position}")]
    UnbalancedBracket { position: usize },
    #[error("nested square bracket at char {position}")]
    NestedBracket { position: usize },
    #[error("unterminated sense tag opened at char {position}")]
    UnterminatedTag { position: usize },
    #[error("sense tag at char {position} does not follow a word")]
    DetachedTag { position: usize },
    #[error("unknown orthography profile `{0}`")]
    UnknownProfile(String),
}

/// Spelling conventions of the edition a document was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthographyProfile {
    /// Modern academic edition: reflexive `-ся` written together with the verb.
    ModernEdition,
    /// Lifetime first edition: `ся` may be written as a separate word.
    FirstEdition,
}

impl OrthographyProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            OrthographyProfile::ModernEdition => "modern_edition",
            OrthographyProfile::FirstEdition => "first_edition",
        }
    }
}

impl fmt::Display for OrthographyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OrthographyProfile {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "modern_edition" | "modern" => Ok(OrthographyProfile::ModernEdition),
            "first_edition" | "first" => Ok(OrthographyProfile::FirstEdition),
            other => Err(IngestError::UnknownProfile(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub doc_id: String,
    pub title: String,
    pub raw_text: String,
    pub orthography_profile: OrthographyProfile,
    pub metadata: BTreeMap<String, String>,
}

/// A sense tag attached to a span of clean text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseAnnotation {
    pub range: Range<usize>,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanText {
    pub text: String,
    pub annotations: Vec<SenseAnnotation>,
    pub provenance: String,
}

/// Delimiters enclosing editorial footnote bodies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteMarkers {
    pub open: char,
    pub close: char,
}

impl Default for NoteMarkers {
    fn default() -> Self {
        NoteMarkers {
            open: '⟦',
            close: '⟧',
        }
    }
}

/// Replaces CRLF and lone CR with LF.
pub fn normalize_newlines(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_string();
    }
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Reads a document from disk. The id and title default to the file stem.
pub fn load_document(
    path: impl AsRef<Path>,
    profile: OrthographyProfile,
) -> Result<SourceDocument, IngestError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(SourceDocument {
        doc_id: stem.clone(),
        title: stem,
        raw_text: normalize_newlines(&text),
        orthography_profile: profile,
        metadata: BTreeMap::new(),
    })
}

/// Removes every delimited footnote body, delimiters included. Notes may nest.
pub fn strip_editorial_notes(raw: &str, markers: &NoteMarkers) -> Result<String, IngestError> {
    let mut out = String::with_capacity(raw.len());
    let mut depth = 0usize;
    let mut opened_at = 0usize;
    for (pos, c) in raw.chars().enumerate() {
        if c == markers.open {
            if depth == 0 {
                opened_at = pos;
            }
            depth += 1;
        } else if c == markers.close {
            if depth == 0 {
                return Err(IngestError::UnbalancedNote { position: pos });
            }
            depth -= 1;
        } else if depth == 0 {
            out.push(c);
        }
    }
    if depth > 0 {
        return Err(IngestError::UnbalancedNote {
            position: opened_at,
        });
    }
    Ok(out)
}

/// Resolves editorial expansions: `X[YZ]` becomes `XYZ`.
pub fn expand_bracketed_abbreviations(text: &str) -> Result<String, IngestError> {
    let mut out = String::with_capacity(text.len());
    let mut open: Option<usize> = None;
    for (pos, c) in text.chars().enumerate() {
        match c {
            '[' => {
                if open.is_some() {
                    return Err(IngestError::NestedBracket { position: pos });
                }
                open = Some(pos);
            }
            ']' => {
                if open.take().is_none() {
                    return Err(IngestError::UnbalancedBracket { position: pos });
                }
            }
            _ => out.push(c),
        }
    }
    match open {
        Some(position) => Err(IngestError::UnbalancedBracket { position }),
        None => Ok(out),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || crate::tokenizer::is_apostrophe(c) || c == '-' || is_combining_mark(c)
}

pub(crate) fn is_combining_mark(c: char) -> bool {
    matches!(c, '\u{0300}'..='\u{036F}')
}

/// Lifts `word{tag}` annotations out of the text.
///
/// The annotated range is the run of word characters immediately before `{`.
pub fn parse_sense_annotations(text: &str, doc_id: &str) -> Result<CleanText, IngestError> {
    let mut out: Vec<char> = Vec::with_capacity(text.len());
    let mut annotations = Vec::new();
    let mut chars = text.chars().enumerate();
    while let Some((pos, c)) = chars.next() {
        if c != '{' {
            out.push(c);
            continue;
        }
        let mut tag = String::new();
        let mut closed = false;
        for (_, inner) in chars.by_ref() {
            match inner {
                '}' => {
                    closed = true;
                    break;
                }
                '{' => return Err(IngestError::UnterminatedTag { position: pos }),
                _ => tag.push(inner),
            }
        }
        if !closed {
            return Err(IngestError::UnterminatedTag { position: pos });
        }
        let end = out.len();
        let start = out
            .iter()
            .rposition(|&ch| !is_word_char(ch))
            .map_or(0, |i| i + 1);
        if start == end {
            return Err(IngestError::DetachedTag { position: pos });
        }
        annotations.push(SenseAnnotation {
            range: start..end,
            tag: tag.trim().to_string(),
        });
    }
    Ok(CleanText {
        text: out.into_iter().collect(),
        annotations,
        provenance: doc_id.to_string(),
    })
}

/// Runs all three cleaning passes over a document.
pub fn clean_document(doc: &SourceDocument, markers: &NoteMarkers) -> Result<CleanText, IngestError> {
    let without_notes = strip_editorial_notes(&doc.raw_text, markers)?;
    let expanded = expand_bracketed_abbreviations(&without_notes)?;
    parse_sense_annotations(&expanded, &doc.doc_id)
}
