//! Word segmentation and script classification.
//!
//! A word is a maximal run of letters in which apostrophes and hyphens count as
//! letters when they sit between two letters. Digit runs form separate tokens.
//! Combining accents stay attached to the letter they follow.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{is_combining_mark, CleanText, SenseAnnotation};

/// Apostrophe code point every apostrophe variant is normalized to.
pub const APOSTROPHE: char = '\'';

const COMBINING_ACUTE: char = '\u{0301}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Script {
    Cyrillic,
    Latin,
    Digit,
    Mixed,
}

impl Script {
    pub const ALL: [Script; 4] = [Script::Cyrillic, Script::Latin, Script::Digit, Script::Mixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Script::Cyrillic => "cyrillic",
            Script::Latin => "latin",
            Script::Digit => "digit",
            Script::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Script {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Script::ALL
            .into_iter()
            .find(|script| script.as_str() == s)
            .ok_or_else(|| format!("unknown script class `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Lowercased surface; accents removed unless the form is accent-distinguished.
    pub norm: String,
    pub script: Script,
    pub doc_id: String,
    pub char_offset: usize,
    /// Length in chars of the span in the clean text.
    pub char_len: usize,
    pub sense_tag: Option<String>,
    pub hyphenated: bool,
    pub standalone_particle: bool,
}

/// Enclitic particles attached with a hyphen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Enclitic {
    Bo,
    No,
    Taky,
    To,
}

impl Enclitic {
    pub const ALL: [Enclitic; 4] = [Enclitic::Bo, Enclitic::No, Enclitic::Taky, Enclitic::To];

    pub fn as_str(self) -> &'static str {
        match self {
            Enclitic::Bo => "бо",
            Enclitic::No => "но",
            Enclitic::Taky => "таки",
            Enclitic::To => "то",
        }
    }
}

impl fmt::Display for Enclitic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}')
}

pub fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

fn is_digit(c: char) -> bool {
    c.is_numeric() && !c.is_alphabetic()
}

fn is_letter(c: char) -> bool {
    c.is_alphabetic() && !is_apostrophe(c)
}

fn is_cyrillic(c: char) -> bool {
    matches!(c,
        '\u{0400}'..='\u{052F}' | '\u{1C80}'..='\u{1C8F}' | '\u{2DE0}'..='\u{2DFF}' | '\u{A640}'..='\u{A69F}')
}

fn is_latin(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c,
            'ª' | 'º' | '\u{00C0}'..='\u{00D6}' | '\u{00D8}'..='\u{00F6}' | '\u{00F8}'..='\u{024F}'
            | '\u{1E00}'..='\u{1EFF}' | '\u{2C60}'..='\u{2C7F}' | '\u{A720}'..='\u{A7FF}'
            | '\u{FB00}'..='\u{FB06}')
}

/// Options controlling token normalization.
#[derive(Debug, Clone, Default)]
pub struct TokenizerConfig {
    /// Lowercased forms whose accent marks distinguish meaning; these keep
    /// their combining accents in `norm`.
    pub accent_distinguished: HashSet<String>,
}

impl TokenizerConfig {
    pub fn with_accent_forms<I, S>(forms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenizerConfig {
            accent_distinguished: forms.into_iter().map(Into::into).collect(),
        }
    }
}

/// Classifies a surface by the scripts of its letters.
pub fn classify_script(surface: &str) -> Script {
    let mut cyrillic = false;
    let mut latin = false;
    let mut digit = false;
    let mut other = false;
    for c in surface.chars() {
        if is_digit(c) {
            digit = true;
        } else if is_cyrillic(c) {
            cyrillic = true;
        } else if is_latin(c) {
            latin = true;
        } else if is_letter(c) {
            other = true;
        }
    }
    match (cyrillic, latin, digit, other) {
        (true, false, false, false) => Script::Cyrillic,
        (false, true, false, false) => Script::Latin,
        (false, false, true, false) => Script::Digit,
        _ => Script::Mixed,
    }
}

/// Lowercases and strips combining accents, unless the accented form is registered.
pub fn normalize_form(surface: &str, config: &TokenizerConfig) -> String {
    let lower = surface.to_lowercase();
    if !lower.contains(is_combining_mark) {
        return lower;
    }
    if config.accent_distinguished.contains(&lower) {
        return lower;
    }
    lower.chars().filter(|&c| c != COMBINING_ACUTE && c != '\u{0300}').collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RunKind {
    Word,
    Number,
}

fn finish_token(
    chars: &[char],
    span: Range<usize>,
    kind: RunKind,
    doc_id: &str,
    annotations: &[&SenseAnnotation],
    config: &TokenizerConfig,
    out: &mut Vec<Token>,
) {
    let Range { start, end } = span;
    let surface: String = chars[start..end]
        .iter()
        .map(|&c| {
            if is_apostrophe(c) {
                APOSTROPHE
            } else if is_hyphen(c) {
                '-'
            } else {
                c
            }
        })
        .collect();
    let norm = match kind {
        RunKind::Number => surface.clone(),
        RunKind::Word => normalize_form(&surface, config),
    };
    let first = annotations.partition_point(|a| a.range.end <= start);
    let sense_tag = annotations
        .get(first)
        .filter(|a| a.range.end <= end)
        .map(|a| a.tag.clone());
    let standalone_particle = norm == "ся" || norm == "сь";
    out.push(Token {
        hyphenated: surface.contains('-'),
        script: classify_script(&surface),
        surface,
        norm,
        doc_id: doc_id.to_string(),
        char_offset: start,
        char_len: end - start,
        sense_tag,
        standalone_particle,
    });
}

/// Splits clean text into tokens, in text order.
pub fn tokenize(clean: &CleanText, config: &TokenizerConfig) -> Vec<Token> {
    let chars: Vec<char> = clean.text.chars().collect();
    let mut annotations: Vec<&SenseAnnotation> = clean.annotations.iter().collect();
    annotations.sort_by_key(|a| a.range.end);
    let mut tokens = Vec::new();
    let mut run: Option<(usize, RunKind)> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next_is_letter = chars.get(i + 1).is_some_and(|&n| is_letter(n));
        match run {
            Some((start, RunKind::Word)) => {
                let prev = chars[i - 1];
                let joins = is_letter(c)
                    || is_combining_mark(c)
                    || ((is_apostrophe(c) || is_hyphen(c))
                        && (is_letter(prev) || is_combining_mark(prev))
                        && next_is_letter);
                if !joins {
                    finish_token(&chars, start..i, RunKind::Word, &clean.provenance, &annotations, config, &mut tokens);
                    run = None;
                    continue;
                }
            }
            Some((start, RunKind::Number)) => {
                if !is_digit(c) {
                    finish_token(&chars, start..i, RunKind::Number, &clean.provenance, &annotations, config, &mut tokens);
                    run = None;
                    continue;
                }
            }
            None => {
                if is_letter(c) {
                    run = Some((i, RunKind::Word));
                } else if is_digit(c) {
                    run = Some((i, RunKind::Number));
                }
            }
        }
        i += 1;
    }
    if let Some((start, kind)) = run {
        finish_token(&chars, start..chars.len(), kind, &clean.provenance, &annotations, config, &mut tokens);
    }
    tokens
}

/// Splits a trailing enclitic particle off a hyphenated token.
pub fn detect_hyphen_enclitic(token: &Token) -> Option<(String, Enclitic)> {
    if !token.hyphenated {
        return None;
    }
    let (base, suffix) = token.norm.rsplit_once('-')?;
    if base.is_empty() {
        return None;
    }
    Enclitic::ALL
        .into_iter()
        .find(|e| e.as_str() == suffix)
        .map(|e| (base.to_string(), e))
}

/// Occurrence counts per script class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptCounts {
    pub cyrillic: usize,
    pub latin: usize,
    pub digit: usize,
    pub mixed: usize,
}

impl ScriptCounts {
    pub fn get(&self, script: Script) -> usize {
        match script {
            Script::Cyrillic => self.cyrillic,
            Script::Latin => self.latin,
            Script::Digit => self.digit,
            Script::Mixed => self.mixed,
        }
    }

    pub fn add(&mut self, script: Script, n: usize) {
        match script {
            Script::Cyrillic => self.cyrillic += n,
            Script::Latin => self.latin += n,
            Script::Digit => self.digit += n,
            Script::Mixed => self.mixed += n,
        }
    }

    pub fn total(&self) -> usize {
        self.cyrillic + self.latin + self.digit + self.mixed
    }
}

pub fn count_script_classes<'a, I>(tokens: I) -> ScriptCounts
where
    I: IntoIterator<Item = &'a Token>,
{
    let mut counts = ScriptCounts::default();
    for token in tokens {
        counts.add(token.script, 1);
    }
    counts
}

fn flags(token: &Token) -> String {
    let mut flags = Vec::new();
    if token.hyphenated {
        flags.push("hyphenated");
    }
    if token.standalone_particle {
        flags.push("standalone_particle");
    }
    if flags.is_empty() {
        "-".to_string()
    } else {
        flags.join(",")
    }
}

/// Writes tokens as TSV: doc_id, offset, surface, norm, script, sense_tag, flags.
pub fn write_tokens_tsv<W: Write>(mut out: W, tokens: &[Token]) -> io::Result<()> {
    writeln!(out, "doc_id\toffset\tsurface\tnorm\tscript\tsense_tag\tflags")?;
    for t in tokens {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.doc_id,
            t.char_offset,
            t.surface,
            t.norm,
            t.script,
            t.sense_tag.as_deref().unwrap_or(""),
            flags(t)
        )?;
    }
    Ok(())
}
