//! Wordform and lemma counting, ranking, and the three dictionary lists:
//! lemmas by descending frequency, wordforms by descending frequency, and the
//! alphabetical lemma index.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lemmatizer::LemmatizedToken;
use crate::lexicon::{data_lines, Candidate, Pos, VariantTable};
use crate::tokenizer::{classify_script, ScriptCounts, Token};

#[derive(Debug, Error)]
pub enum FreqError {
    #[error("{count} tokens are still pending a lemma decision")]
    PendingTokens { count: usize },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("inconsistent lists: {0}")]
    Inconsistent(String),
}

/// Grouping key of the lemma list. Provisional keys hold pending tokens
/// counted under their own form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LemmaKey {
    pub candidate: Candidate,
    pub provisional: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaCount {
    pub abs_freq: usize,
    pub forms: BTreeSet<String>,
}

/// Counts wordforms by variant-canonical `norm`.
pub fn count_forms<'a, I>(tokens: I, variants: &VariantTable) -> BTreeMap<String, usize>
where
    I: IntoIterator<Item = &'a Token>,
{
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts
            .entry(variants.canonicalize(&t.norm).to_string())
            .or_insert(0) += 1;
    }
    counts
}

/// Counts lemmas grouped by (lemma, pos, disambiguator, language).
///
/// Pending tokens are an error unless `allow_pending` is set, in which case
/// each is counted under its own form as a provisional entry.
pub fn count_lemmas(
    tokens: &[LemmatizedToken],
    allow_pending: bool,
) -> Result<BTreeMap<LemmaKey, LemmaCount>, FreqError> {
    let pending = tokens.iter().filter(|t| t.is_pending()).count();
    if pending > 0 && !allow_pending {
        return Err(FreqError::PendingTokens { count: pending });
    }
    let mut counts: BTreeMap<LemmaKey, LemmaCount> = BTreeMap::new();
    for t in tokens {
        let key = match &t.lemma {
            Some(c) => LemmaKey {
                candidate: c.clone(),
                provisional: false,
            },
            None => LemmaKey {
                candidate: Candidate::new(t.form_key.clone(), Pos::Other),
                provisional: true,
            },
        };
        let entry = counts.entry(key).or_default();
        entry.abs_freq += 1;
        entry.forms.insert(t.wordform.clone());
    }
    Ok(counts)
}

/// Per-corpus tallies; merging is associative and commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counts {
    pub forms: BTreeMap<String, usize>,
    pub lemmas: BTreeMap<LemmaKey, LemmaCount>,
    pub tokens_by_script: ScriptCounts,
}

impl Counts {
    pub fn from_tokens(tokens: &[LemmatizedToken], allow_pending: bool) -> Result<Self, FreqError> {
        let mut forms = BTreeMap::new();
        let mut scripts = ScriptCounts::default();
        for t in tokens {
            *forms.entry(t.wordform.clone()).or_insert(0) += 1;
            scripts.add(t.token.script, 1);
        }
        Ok(Counts {
            forms,
            lemmas: count_lemmas(tokens, allow_pending)?,
            tokens_by_script: scripts,
        })
    }

    pub fn merge(mut self, other: Counts) -> Counts {
        for (form, n) in other.forms {
            *self.forms.entry(form).or_insert(0) += n;
        }
        for (key, count) in other.lemmas {
            let entry = self.lemmas.entry(key).or_default();
            entry.abs_freq += count.abs_freq;
            entry.forms.extend(count.forms);
        }
        for script in crate::tokenizer::Script::ALL {
            self.tokens_by_script.add(script, other.tokens_by_script.get(script));
        }
        self
    }

    pub fn total(&self) -> usize {
        self.forms.values().sum()
    }
}

/// Orders by descending frequency, then by key (code point order for text).
/// Ranks run 1..=len without gaps.
pub fn assign_ranks<K, I>(freqs: I) -> Vec<(usize, K, usize)>
where
    K: Ord,
    I: IntoIterator<Item = (K, usize)>,
{
    let mut items: Vec<(K, usize)> = freqs.into_iter().collect();
    items.sort_by(|(ka, fa), (kb, fb)| fb.cmp(fa).then_with(|| ka.cmp(kb)));
    items
        .into_iter()
        .enumerate()
        .map(|(i, (k, f))| (i + 1, k, f))
        .collect()
}

const UKRAINIAN_ALPHABET: &str = "абвгґдеєжзиіїйклмнопрстуфхцчшщьюя";

/// Primary collation weights: digits, then the Ukrainian alphabet, then other
/// Cyrillic, Latin and everything else. Apostrophes, hyphens and accents are ignored.
pub fn alphabetical_key(s: &str) -> Vec<(u8, u32)> {
    s.chars()
        .flat_map(char::to_lowercase)
        .filter_map(|c| {
            if crate::tokenizer::is_apostrophe(c) || c == '-' || crate::ingest::is_combining_mark(c) {
                return None;
            }
            if let Some(idx) = UKRAINIAN_ALPHABET.chars().position(|a| a == c) {
                return Some((2, idx as u32));
            }
            let class = if c.is_numeric() {
                1
            } else if ('\u{0400}'..='\u{052F}').contains(&c) {
                3
            } else if c.is_ascii_alphabetic() || ('\u{00C0}'..='\u{024F}').contains(&c) {
                4
            } else {
                5
            };
            Some((class, c as u32))
        })
        .collect()
}

pub fn alphabetical_cmp(a: &str, b: &str) -> Ordering {
    alphabetical_key(a)
        .cmp(&alphabetical_key(b))
        .then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub rank: usize,
    pub lemma: Candidate,
    pub provisional: bool,
    pub abs_freq: usize,
    pub rel_freq: f64,
    pub distinct_forms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormEntry {
    pub rank: usize,
    pub form: String,
    pub abs_freq: usize,
    pub rel_freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub lemma: Candidate,
    pub provisional: bool,
    pub abs_freq: usize,
    pub rel_freq: f64,
}

/// Distinct units and occurrences per script class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptBreakdown {
    pub tokens: ScriptCounts,
    pub forms: ScriptCounts,
    pub lemmas: ScriptCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDictionary {
    pub total_tokens: usize,
    pub lemma_entries: Vec<LemmaEntry>,
    pub form_entries: Vec<FormEntry>,
    pub alpha_index: Vec<AlphaEntry>,
    pub scripts: ScriptBreakdown,
}

fn rel(abs: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        abs as f64 / total as f64
    }
}

impl FrequencyDictionary {
    pub fn from_counts(counts: Counts) -> Result<Self, FreqError> {
        let n = counts.total();
        let lemma_total: usize = counts.lemmas.values().map(|c| c.abs_freq).sum();
        if lemma_total != n {
            return Err(FreqError::Inconsistent(format!(
                "lemma total {lemma_total} differs from wordform total {n}"
            )));
        }
        let mut scripts = ScriptBreakdown {
            tokens: counts.tokens_by_script,
            ..ScriptBreakdown::default()
        };
        for (form, abs) in &counts.forms {
            let _ = abs;
            scripts.forms.add(classify_script(form), 1);
        }
        for key in counts.lemmas.keys() {
            scripts.lemmas.add(classify_script(&key.candidate.lemma), 1);
        }
        let distinct: BTreeMap<&LemmaKey, usize> =
            counts.lemmas.iter().map(|(k, c)| (k, c.forms.len())).collect();
        let lemma_entries = assign_ranks(counts.lemmas.iter().map(|(k, c)| (k, c.abs_freq)))
            .into_iter()
            .map(|(rank, key, abs)| LemmaEntry {
                rank,
                lemma: key.candidate.clone(),
                provisional: key.provisional,
                abs_freq: abs,
                rel_freq: rel(abs, n),
                distinct_forms: distinct[key],
            })
            .collect();
        let form_entries = assign_ranks(counts.forms.iter().map(|(f, &c)| (f, c)))
            .into_iter()
            .map(|(rank, form, abs)| FormEntry {
                rank,
                form: form.clone(),
                abs_freq: abs,
                rel_freq: rel(abs, n),
            })
            .collect();
        let mut dict = FrequencyDictionary {
            total_tokens: n,
            lemma_entries,
            form_entries,
            alpha_index: Vec::new(),
            scripts,
        };
        dict.rebuild_alpha_index();
        Ok(dict)
    }

    fn rebuild_alpha_index(&mut self) {
        let mut alpha: Vec<AlphaEntry> = self
            .lemma_entries
            .iter()
            .map(|e| AlphaEntry {
                lemma: e.lemma.clone(),
                provisional: e.provisional,
                abs_freq: e.abs_freq,
                rel_freq: e.rel_freq,
            })
            .collect();
        alpha.sort_by(|a, b| {
            alphabetical_cmp(&a.lemma.lemma, &b.lemma.lemma)
                .then_with(|| a.lemma.cmp(&b.lemma))
                .then_with(|| a.provisional.cmp(&b.provisional))
        });
        self.alpha_index = alpha;
    }

    pub fn lemma_vocabulary(&self) -> usize {
        self.lemma_entries.len()
    }

    pub fn form_vocabulary(&self) -> usize {
        self.form_entries.len()
    }

    /// Wordform-to-token economy: average occurrences per distinct wordform.
    pub fn tokens_per_form(&self) -> f64 {
        if self.form_entries.is_empty() {
            0.0
        } else {
            self.total_tokens as f64 / self.form_entries.len() as f64
        }
    }

    pub fn write_lemma_ranks<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "rank\theadword\tpos\tdisamb\tabs\trel\tn_forms")?;
        for e in &self.lemma_entries {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{}",
                e.rank,
                e.lemma.lemma,
                pos_column(&e.lemma, e.provisional),
                disamb_column(&e.lemma),
                e.abs_freq,
                e.rel_freq,
                e.distinct_forms
            )?;
        }
        Ok(())
    }

    pub fn write_form_ranks<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "rank\tform\tabs\trel")?;
        for e in &self.form_entries {
            writeln!(out, "{}\t{}\t{}\t{:.6}", e.rank, e.form, e.abs_freq, e.rel_freq)?;
        }
        Ok(())
    }

    pub fn write_alphabetical<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "entry\tpos\tabs\trel")?;
        for e in &self.alpha_index {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                e.lemma.display_headword(),
                pos_column(&e.lemma, e.provisional),
                e.abs_freq,
                e.rel_freq
            )?;
        }
        Ok(())
    }

    fn render(&self, which: fn(&Self, &mut Vec<u8>) -> io::Result<()>) -> Vec<u8> {
        let mut buf = Vec::new();
        which(self, &mut buf).expect("writing to memory");
        buf
    }

    pub fn lemma_ranks_tsv(&self) -> Vec<u8> {
        self.render(|d, b| d.write_lemma_ranks(b))
    }

    pub fn form_ranks_tsv(&self) -> Vec<u8> {
        self.render(|d, b| d.write_form_ranks(b))
    }

    pub fn alphabetical_tsv(&self) -> Vec<u8> {
        self.render(|d, b| d.write_alphabetical(b))
    }

    /// SHA-256 of each rendered list: (lemma ranks, wordform ranks, alphabetical).
    pub fn list_digests(&self) -> (String, String, String) {
        (
            sha256_hex(&self.lemma_ranks_tsv()),
            sha256_hex(&self.form_ranks_tsv()),
            sha256_hex(&self.alphabetical_tsv()),
        )
    }

    /// Rebuilds a dictionary from exported lemma and wordform rank lists.
    pub fn from_rank_files(lemma_path: &Path, form_path: &Path) -> Result<Self, FreqError> {
        let lemmas = read_lemma_ranks(lemma_path)?;
        let forms = read_form_ranks(form_path)?;
        let mut counts = Counts::default();
        for (form, abs) in forms {
            if counts.forms.insert(form.clone(), abs).is_some() {
                return Err(FreqError::Inconsistent(format!("wordform `{form}` listed twice")));
            }
            counts.tokens_by_script.add(classify_script(&form), abs);
        }
        for (key, abs, n_forms) in lemmas {
            // distinct member forms are not in the list itself; keep the count via placeholders
            let forms = (0..n_forms).map(|i| i.to_string()).collect();
            if counts
                .lemmas
                .insert(key.clone(), LemmaCount { abs_freq: abs, forms })
                .is_some()
            {
                return Err(FreqError::Inconsistent(format!(
                    "lemma `{}` listed twice",
                    key.candidate.label()
                )));
            }
        }
        FrequencyDictionary::from_counts(counts)
    }
}

fn pos_column(c: &Candidate, provisional: bool) -> &'static str {
    if provisional {
        "pending"
    } else {
        c.pos.as_str()
    }
}

fn disamb_column(c: &Candidate) -> String {
    match (&c.disambiguator, &c.language) {
        (Some(d), Some(l)) => format!("{d}; {l}"),
        (Some(d), None) => d.clone(),
        (None, Some(l)) => format!("; {l}"),
        (None, None) => String::new(),
    }
}

fn parse_disamb_column(field: &str) -> (Option<String>, Option<String>) {
    let non_empty = |s: &str| Some(s.trim().to_string()).filter(|s| !s.is_empty());
    match field.split_once("; ") {
        Some((d, l)) => (non_empty(d), non_empty(l)),
        None => (non_empty(field), None),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Header line and numbered data rows of a list file.
type Rows = (String, Vec<(usize, Vec<String>)>);

fn read_rows(path: &Path) -> Result<Rows, FreqError> {
    let text = fs::read_to_string(path).map_err(|source| FreqError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let rows = data_lines(&text)
        .map(|(line, fields)| (line, fields.into_iter().map(str::to_string).collect()))
        .collect();
    Ok((text, rows))
}

fn parse_usize(path: &Path, line: usize, field: &str, what: &str) -> Result<usize, FreqError> {
    field.trim().parse().map_err(|_| FreqError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("bad {what} `{field}`"),
    })
}

/// Parses a lemma rank list into (key, abs, n_forms) rows.
pub fn read_lemma_ranks(path: &Path) -> Result<Vec<(LemmaKey, usize, usize)>, FreqError> {
    let (_, rows) = read_rows(path)?;
    let mut out = Vec::new();
    for (line, fields) in rows.into_iter() {
        if fields.first().map(String::as_str) == Some("rank") {
            continue;
        }
        if fields.len() != 7 {
            return Err(FreqError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let (provisional, pos) = match fields[2].as_str() {
            "pending" => (true, Pos::Other),
            p => (
                false,
                p.parse::<Pos>().map_err(|message| FreqError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message,
                })?,
            ),
        };
        let (disambiguator, language) = parse_disamb_column(&fields[3]);
        let key = LemmaKey {
            candidate: Candidate {
                lemma: fields[1].clone(),
                pos,
                disambiguator,
                language,
            },
            provisional,
        };
        let abs = parse_usize(path, line, &fields[4], "frequency")?;
        let n_forms = parse_usize(path, line, &fields[6], "form count")?;
        out.push((key, abs, n_forms));
    }
    Ok(out)
}

/// Parses a wordform rank list into (form, abs) rows.
pub fn read_form_ranks(path: &Path) -> Result<Vec<(String, usize)>, FreqError> {
    let (_, rows) = read_rows(path)?;
    let mut out = Vec::new();
    for (line, fields) in rows {
        if fields.first().map(String::as_str) == Some("rank") {
            continue;
        }
        if fields.len() != 4 {
            return Err(FreqError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        out.push((fields[1].clone(), parse_usize(path, line, &fields[2], "frequency")?));
    }
    Ok(out)
}

/// Counts per document in parallel, merges, and builds all three lists.
pub fn build_dictionary(tokens: &[LemmatizedToken], allow_pending: bool) -> Result<FrequencyDictionary, FreqError> {
    let mut runs: Vec<&[LemmatizedToken]> = Vec::new();
    let mut start = 0;
    for i in 1..=tokens.len() {
        if i == tokens.len() || tokens[i].token.doc_id != tokens[start].token.doc_id {
            if start < i {
                runs.push(&tokens[start..i]);
            }
            start = i;
        }
    }
    let counts = runs
        .into_par_iter()
        .map(|run| Counts::from_tokens(run, allow_pending))
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    if tokens.is_empty() {
        return FrequencyDictionary::from_counts(Counts::default());
    }
    FrequencyDictionary::from_counts(counts)
}
