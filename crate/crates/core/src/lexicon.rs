//! The tagging lexicon: wordform → lemma candidates, variant-merge tables and
//! the human decisions that refine them.
//!
//! Files are tab-separated so philologists can edit them by hand:
//!
//! * lexicon: `form_key  lemma  pos  [disambiguator]  [language]  [priority]`
//! * variants: `kind  head  member,member,…`
//! * decision log: `timestamp  annotator  scope  [doc_id]  [offset]  form_key  lemma  pos  [disambiguator]  [language]`
//!
//! Blank lines and lines starting with `#` are ignored in every file.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::is_combining_mark;
use crate::tokenizer::Token;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("occurrence {0} not found in corpus")]
    OccurrenceNotFound(OccurrenceRef),
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("field `{0}` contains a tab or newline")]
    InvalidField(String),
    #[error("variant form `{form}` belongs to both `{first}` and `{second}`")]
    OverlappingVariants {
        form: String,
        first: String,
        second: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LexiconError + '_ {
    move |source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Noun,
    NounPlTantum,
    Adjective,
    Pronoun,
    Numeral,
    Verb,
    Participle,
    Adverb,
    Preposition,
    Conjunction,
    Particle,
    Interjection,
    Abbreviation,
    Foreign,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 15] = [
        Pos::Noun,
        Pos::NounPlTantum,
        Pos::Adjective,
        Pos::Pronoun,
        Pos::Numeral,
        Pos::Verb,
        Pos::Participle,
        Pos::Adverb,
        Pos::Preposition,
        Pos::Conjunction,
        Pos::Particle,
        Pos::Interjection,
        Pos::Abbreviation,
        Pos::Foreign,
        Pos::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::NounPlTantum => "noun_pl_tantum",
            Pos::Adjective => "adjective",
            Pos::Pronoun => "pronoun",
            Pos::Numeral => "numeral",
            Pos::Verb => "verb",
            Pos::Participle => "participle",
            Pos::Adverb => "adverb",
            Pos::Preposition => "preposition",
            Pos::Conjunction => "conjunction",
            Pos::Particle => "particle",
            Pos::Interjection => "interjection",
            Pos::Abbreviation => "abbreviation",
            Pos::Foreign => "foreign",
            Pos::Other => "other",
        }
    }

    /// Inflecting parts of speech that drop an attached enclitic particle
    /// before lemmatization. Adverbs and function words keep it (ДУЖЕ-ТО, АЛЕ-БО).
    pub fn sheds_enclitic(self) -> bool {
        matches!(
            self,
            Pos::Noun
                | Pos::NounPlTantum
                | Pos::Adjective
                | Pos::Pronoun
                | Pos::Numeral
                | Pos::Verb
                | Pos::Participle
        )
    }

    /// Maps a conventional Ukrainian part-of-speech label ("ім.", "дієсл.") to a POS.
    pub fn from_label(label: &str) -> Option<Pos> {
        let pos = match label.trim().trim_end_matches('.') {
            "ім" | "імен" => Pos::Noun,
            "дієсл" => Pos::Verb,
            "прикм" => Pos::Adjective,
            "присл" => Pos::Adverb,
            "займ" => Pos::Pronoun,
            "числ" => Pos::Numeral,
            "дієприкм" => Pos::Participle,
            "прийм" => Pos::Preposition,
            "спол" => Pos::Conjunction,
            "част" => Pos::Particle,
            "виг" => Pos::Interjection,
            _ => return None,
        };
        Some(pos)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| format!("unknown part of speech `{s}`"))
    }
}

/// One possible reading of a wordform.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub lemma: String,
    pub pos: Pos,
    pub disambiguator: Option<String>,
    pub language: Option<String>,
}

impl Candidate {
    pub fn new(lemma: impl Into<String>, pos: Pos) -> Self {
        Candidate {
            lemma: lemma.into(),
            pos,
            disambiguator: None,
            language: None,
        }
    }

    pub fn with_disambiguator(mut self, d: impl Into<String>) -> Self {
        self.disambiguator = Some(d.into());
        self
    }

    pub fn with_language(mut self, lang: impl Into<String>) -> Self {
        self.language = Some(lang.into());
        self
    }

    /// Headword as printed in dictionary lists: `МІЛЯ (ім'я)`.
    pub fn display_headword(&self) -> String {
        match &self.disambiguator {
            Some(d) => format!("{} ({})", self.lemma, d),
            None => self.lemma.clone(),
        }
    }

    /// Button label for reviewers: `МАТИ (noun, ім.)`.
    pub fn label(&self) -> String {
        let mut extra = vec![self.pos.as_str().to_string()];
        if let Some(d) = &self.disambiguator {
            extra.push(d.clone());
        }
        if let Some(l) = &self.language {
            extra.push(l.clone());
        }
        format!("{} ({})", self.lemma, extra.join(", "))
    }

    fn validate(&self) -> Result<(), LexiconError> {
        if self.lemma.trim().is_empty() {
            return Err(LexiconError::InvalidDecision("empty lemma".into()));
        }
        if self.pos == Pos::Foreign && self.language.is_none() {
            return Err(LexiconError::InvalidDecision(format!(
                "foreign candidate {} needs a language code",
                self.lemma
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub form_key: String,
    pub candidates: Vec<RankedCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Euphonic,
    Orthographic,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Euphonic => "euphonic",
            VariantKind::Orthographic => "orthographic",
        }
    }
}

impl FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "euphonic" => Ok(VariantKind::Euphonic),
            "orthographic" => Ok(VariantKind::Orthographic),
            other => Err(format!("unknown variant kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantGroup {
    pub head: String,
    pub members: BTreeSet<String>,
    pub kind: VariantKind,
}

/// Groups of wordforms counted as one form; every member maps to the head.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariantTable {
    groups: Vec<VariantGroup>,
    index: HashMap<String, usize>,
}

const EUPHONIC_GROUPS: &[&[&str]] = &[
    &["ся", "сь"],
    &["би", "б"],
    &["же", "ж"],
    &["в", "у"],
    &["і", "й"],
    &["з", "із", "зі", "зо"],
    &["під", "підо"],
    &["весь", "увесь", "ввесь"],
    &["всякий", "усякий"],
    &["щоб", "щоби"],
];

const ORTHOGRAPHIC_GROUPS: &[&[&str]] = &[
    &["тільки", "тілько"],
    &["скільки", "скілько"],
    &["ледве", "ледво"],
    &["трохи", "троха"],
];

impl VariantTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Built-in euphonic and orthographic groups; the first form of each group is the head.
    pub fn ukrainian_default() -> Self {
        let mut table = VariantTable::new();
        for (kind, groups) in [
            (VariantKind::Euphonic, EUPHONIC_GROUPS),
            (VariantKind::Orthographic, ORTHOGRAPHIC_GROUPS),
        ] {
            for group in groups {
                table
                    .add_group(group[0], group.iter().copied(), kind)
                    .expect("built-in variant groups are disjoint");
            }
        }
        table
    }

    pub fn add_group<I, S>(&mut self, head: &str, members: I, kind: VariantKind) -> Result<(), LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut members: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        members.insert(head.to_string());
        for m in &members {
            if let Some(&existing) = self.index.get(m) {
                return Err(LexiconError::OverlappingVariants {
                    form: m.clone(),
                    first: self.groups[existing].head.clone(),
                    second: head.to_string(),
                });
            }
        }
        let idx = self.groups.len();
        for m in &members {
            self.index.insert(m.clone(), idx);
        }
        self.groups.push(VariantGroup {
            head: head.to_string(),
            members,
            kind,
        });
        Ok(())
    }

    pub fn groups(&self) -> &[VariantGroup] {
        &self.groups
    }

    /// Maps a member form to its group head; other forms come back unchanged.
    pub fn canonicalize<'a>(&'a self, form: &'a str) -> &'a str {
        match self.index.get(form) {
            Some(&idx) => &self.groups[idx].head,
            None => form,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut table = VariantTable::new();
        for (line_no, fields) in data_lines(&text) {
            let parse_err = |message: String| LexiconError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message,
            };
            if fields.len() < 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", fields.len())));
            }
            let kind = fields[0].parse::<VariantKind>().map_err(parse_err)?;
            let members = fields[2].split(',').map(str::trim).filter(|m| !m.is_empty());
            table
                .add_group(fields[1].trim(), members, kind)
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        let path = path.as_ref();
        let mut out = String::from("# kind\thead\tmembers\n");
        for g in &self.groups {
            let members: Vec<&str> = g.members.iter().map(String::as_str).collect();
            out.push_str(&format!("{}\t{}\t{}\n", g.kind.as_str(), g.head, members.join(",")));
        }
        fs::write(path, out).map_err(io_err(path))
    }
}

/// Reference to one token occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccurrenceRef {
    pub doc_id: String,
    pub offset: usize,
}

impl OccurrenceRef {
    pub fn new(doc_id: impl Into<String>, offset: usize) -> Self {
        OccurrenceRef {
            doc_id: doc_id.into(),
            offset,
        }
    }
}

impl fmt::Display for OccurrenceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.doc_id, self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionScope {
    Global,
    Occurrence,
}

impl DecisionScope {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionScope::Global => "global",
            DecisionScope::Occurrence => "occurrence",
        }
    }
}

impl FromStr for DecisionScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "global" => Ok(DecisionScope::Global),
            "occurrence" => Ok(DecisionScope::Occurrence),
            other => Err(format!("unknown decision scope `{other}`")),
        }
    }
}

/// An annotator's resolution of an ambiguous or unknown wordform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub form_key: String,
    pub scope: DecisionScope,
    pub occurrence: Option<OccurrenceRef>,
    pub chosen: Candidate,
    pub annotator: String,
    pub timestamp: DateTime<Utc>,
}

impl Decision {
    pub fn global(form_key: impl Into<String>, chosen: Candidate, annotator: impl Into<String>) -> Self {
        Decision {
            form_key: form_key.into(),
            scope: DecisionScope::Global,
            occurrence: None,
            chosen,
            annotator: annotator.into(),
            timestamp: Utc::now(),
        }
    }

    pub fn for_occurrence(
        form_key: impl Into<String>,
        occurrence: OccurrenceRef,
        chosen: Candidate,
        annotator: impl Into<String>,
    ) -> Self {
        Decision {
            form_key: form_key.into(),
            scope: DecisionScope::Occurrence,
            occurrence: Some(occurrence),
            chosen,
            annotator: annotator.into(),
            timestamp: Utc::now(),
        }
    }

    pub fn at(mut self, timestamp: DateTime<Utc>) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        if self.form_key.trim().is_empty() {
            return Err(LexiconError::InvalidDecision("empty form key".into()));
        }
        match (self.scope, &self.occurrence) {
            (DecisionScope::Occurrence, None) => {
                return Err(LexiconError::InvalidDecision(
                    "occurrence-scoped decision without an occurrence".into(),
                ))
            }
            (DecisionScope::Global, Some(_)) => {
                return Err(LexiconError::InvalidDecision(
                    "global decision must not name an occurrence".into(),
                ))
            }
            _ => {}
        }
        self.chosen.validate()
    }

    /// True when both decisions bind the same target to the same candidate.
    pub fn same_effect(&self, other: &Decision) -> bool {
        self.form_key == other.form_key
            && self.scope == other.scope
            && self.occurrence == other.occurrence
            && self.chosen == other.chosen
    }
}

/// The occurrences of a corpus run, used to validate occurrence-scoped decisions.
#[derive(Debug, Clone, Default)]
pub struct OccurrenceIndex {
    offsets: HashMap<String, HashSet<usize>>,
}

impl OccurrenceIndex {
    pub fn from_tokens<'a, I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a Token>,
    {
        let mut offsets: HashMap<String, HashSet<usize>> = HashMap::new();
        for t in tokens {
            match offsets.get_mut(&t.doc_id) {
                Some(set) => {
                    set.insert(t.char_offset);
                }
                None => {
                    offsets.insert(t.doc_id.clone(), HashSet::from([t.char_offset]));
                }
            }
        }
        OccurrenceIndex { offsets }
    }

    pub fn contains(&self, occurrence: &OccurrenceRef) -> bool {
        self.offsets
            .get(&occurrence.doc_id)
            .is_some_and(|set| set.contains(&occurrence.offset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionOutcome {
    Applied,
    Unchanged,
}

/// What the lexicon knows about a wordform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Unique(Candidate),
    Ambiguous(Vec<Candidate>),
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<RankedCandidate>>,
    variants: VariantTable,
    occurrence_bindings: BTreeMap<OccurrenceRef, Candidate>,
    log: Vec<Decision>,
}

impl Lexicon {
    pub fn new(variants: VariantTable) -> Self {
        Lexicon {
            variants,
            ..Lexicon::default()
        }
    }

    pub fn variants(&self) -> &VariantTable {
        &self.variants
    }

    pub fn set_variants(&mut self, variants: VariantTable) {
        self.variants = variants;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = LexiconEntry> + '_ {
        self.entries.iter().map(|(k, v)| LexiconEntry {
            form_key: k.clone(),
            candidates: v.clone(),
        })
    }

    /// Adds a candidate for a form; a duplicate only raises the stored priority.
    pub fn insert(&mut self, form_key: &str, candidate: Candidate, priority: u32) {
        let list = self.entries.entry(form_key.to_string()).or_default();
        match list.iter_mut().find(|rc| rc.candidate == candidate) {
            Some(existing) => existing.priority = existing.priority.max(priority),
            None => list.push(RankedCandidate { candidate, priority }),
        }
    }

    pub fn canonicalize_variant<'a>(&'a self, form: &'a str) -> &'a str {
        self.variants.canonicalize(form)
    }

    fn ranked(&self, form: &str) -> Option<&Vec<RankedCandidate>> {
        let canonical = self.variants.canonicalize(form);
        self.entries
            .get(canonical)
            .or_else(|| self.entries.get(form))
    }

    fn storage_key(&self, form: &str) -> String {
        let canonical = self.variants.canonicalize(form);
        if !self.entries.contains_key(canonical) && self.entries.contains_key(form) {
            form.to_string()
        } else {
            canonical.to_string()
        }
    }

    pub fn contains(&self, form: &str) -> bool {
        self.ranked(form).is_some_and(|list| !list.is_empty())
    }

    /// Candidates for a form after variant canonicalization, highest priority first.
    pub fn lookup(&self, form: &str) -> Vec<Candidate> {
        let Some(list) = self.ranked(form) else {
            return Vec::new();
        };
        let mut sorted: Vec<&RankedCandidate> = list.iter().collect();
        sorted.sort_by_key(|rc| std::cmp::Reverse(rc.priority));
        sorted.into_iter().map(|rc| rc.candidate.clone()).collect()
    }

    /// A form resolves when it has one candidate, or one candidate whose
    /// priority is strictly above every other.
    pub fn resolve(&self, form: &str) -> Resolution {
        let Some(list) = self.ranked(form) else {
            return Resolution::Unknown;
        };
        if list.len() == 1 {
            return Resolution::Unique(list[0].candidate.clone());
        }
        let top = list.iter().map(|rc| rc.priority).max().unwrap_or(0);
        let mut best = list.iter().filter(|rc| rc.priority == top);
        match (best.next(), best.next()) {
            (Some(only), None) => Resolution::Unique(only.candidate.clone()),
            _ => Resolution::Ambiguous(self.lookup(form)),
        }
    }

    pub fn occurrence_binding(&self, occurrence: &OccurrenceRef) -> Option<&Candidate> {
        self.occurrence_bindings.get(occurrence)
    }

    pub fn decision_log(&self) -> &[Decision] {
        &self.log
    }

    /// Lowercased forms that carry a combining accent and therefore keep it.
    pub fn accented_forms(&self) -> impl Iterator<Item = &str> {
        self.entries
            .keys()
            .filter(|k| k.contains(is_combining_mark))
            .map(String::as_str)
    }

    /// Applies a human decision. Global decisions lift the chosen candidate above
    /// all others for the form; occurrence decisions bind a single token.
    ///
    /// When `index` is given, occurrence references are checked against it.
    pub fn record_decision(
        &mut self,
        decision: Decision,
        index: Option<&OccurrenceIndex>,
    ) -> Result<DecisionOutcome, LexiconError> {
        decision.validate()?;
        let outcome = match decision.scope {
            DecisionScope::Global => {
                let key = self.storage_key(&decision.form_key);
                let list = self.entries.entry(key).or_default();
                let others_top = list
                    .iter()
                    .filter(|rc| rc.candidate != decision.chosen)
                    .map(|rc| rc.priority)
                    .max();
                match list.iter_mut().find(|rc| rc.candidate == decision.chosen) {
                    Some(rc) if others_top.is_none_or(|top| rc.priority > top) => DecisionOutcome::Unchanged,
                    Some(rc) => {
                        rc.priority = others_top.map_or(0, |top| top + 1);
                        DecisionOutcome::Applied
                    }
                    None => {
                        list.push(RankedCandidate {
                            candidate: decision.chosen.clone(),
                            priority: others_top.map_or(0, |top| top + 1),
                        });
                        DecisionOutcome::Applied
                    }
                }
            }
            DecisionScope::Occurrence => {
                let occurrence = decision.occurrence.clone().expect("validated");
                if let Some(index) = index {
                    if !index.contains(&occurrence) {
                        return Err(LexiconError::OccurrenceNotFound(occurrence));
                    }
                }
                if self.occurrence_bindings.get(&occurrence) == Some(&decision.chosen) {
                    DecisionOutcome::Unchanged
                } else {
                    self.occurrence_bindings
                        .insert(occurrence, decision.chosen.clone());
                    DecisionOutcome::Applied
                }
            }
        };
        if outcome == DecisionOutcome::Applied {
            self.log.push(decision);
        }
        Ok(outcome)
    }

    /// Reads a lexicon TSV file; the built-in variant table is attached.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut lexicon = Lexicon::new(VariantTable::ukrainian_default());
        for (line_no, fields) in data_lines(&text) {
            let parse_err = |message: String| LexiconError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message,
            };
            if fields.len() < 3 {
                return Err(parse_err(format!(
                    "expected at least 3 fields, found {}",
                    fields.len()
                )));
            }
            let form_key = fields[0].trim();
            let lemma = fields[1].trim();
            if form_key.is_empty() || lemma.is_empty() {
                return Err(parse_err("empty form or lemma".into()));
            }
            let pos = fields[2].parse::<Pos>().map_err(parse_err)?;
            let candidate = Candidate {
                lemma: lemma.to_string(),
                pos,
                disambiguator: optional(fields.get(3)),
                language: optional(fields.get(4)),
            };
            candidate.validate().map_err(|e| parse_err(e.to_string()))?;
            let priority = match optional(fields.get(5)) {
                Some(p) => p
                    .parse::<u32>()
                    .map_err(|_| parse_err(format!("bad priority `{p}`")))?,
                None => 0,
            };
            lexicon.insert(form_key, candidate, priority);
        }
        Ok(lexicon)
    }

    /// Writes the entries (not variants or bindings) as TSV, sorted by form.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        let path = path.as_ref();
        let mut out = String::from("# form_key\tlemma\tpos\tdisambiguator\tlanguage\tpriority\n");
        for (form, list) in &self.entries {
            for rc in list {
                let c = &rc.candidate;
                let fields = [
                    form.as_str(),
                    c.lemma.as_str(),
                    c.pos.as_str(),
                    c.disambiguator.as_deref().unwrap_or(""),
                    c.language.as_deref().unwrap_or(""),
                ];
                for f in fields {
                    check_field(f)?;
                }
                out.push_str(&fields.join("\t"));
                out.push('\t');
                out.push_str(&rc.priority.to_string());
                out.push('\n');
            }
        }
        fs::write(path, out).map_err(io_err(path))
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    Lexicon::load(path)
}

pub fn save_lexicon(lexicon: &Lexicon, path: impl AsRef<Path>) -> Result<(), LexiconError> {
    lexicon.save(path)
}

fn optional(field: Option<&&str>) -> Option<String> {
    field
        .map(|f| f.trim())
        .filter(|f| !f.is_empty())
        .map(str::to_string)
}

fn check_field(field: &str) -> Result<(), LexiconError> {
    if field.contains(['\t', '\n', '\r']) {
        Err(LexiconError::InvalidField(field.to_string()))
    } else {
        Ok(())
    }
}

/// Non-comment, non-blank lines split on tabs, with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').collect()))
        }
    })
}

pub fn format_decision(d: &Decision) -> Result<String, LexiconError> {
    let offset = d.occurrence.as_ref().map(|o| o.offset.to_string());
    let timestamp = d.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true);
    let fields = [
        timestamp.as_str(),
        d.annotator.as_str(),
        d.scope.as_str(),
        d.occurrence.as_ref().map_or("", |o| o.doc_id.as_str()),
        offset.as_deref().unwrap_or(""),
        d.form_key.as_str(),
        d.chosen.lemma.as_str(),
        d.chosen.pos.as_str(),
        d.chosen.disambiguator.as_deref().unwrap_or(""),
        d.chosen.language.as_deref().unwrap_or(""),
    ];
    for f in fields {
        check_field(f)?;
    }
    Ok(fields.join("\t"))
}

fn parse_decision(fields: &[&str]) -> Result<Decision, String> {
    if fields.len() < 8 {
        return Err(format!("expected at least 8 fields, found {}", fields.len()));
    }
    let timestamp = DateTime::parse_from_rfc3339(fields[0].trim())
        .map_err(|e| format!("bad timestamp `{}`: {e}", fields[0]))?
        .with_timezone(&Utc);
    let scope = fields[2].parse::<DecisionScope>()?;
    let doc_id = fields[3].trim();
    let offset = fields[4].trim();
    let occurrence = match (doc_id.is_empty(), offset.is_empty()) {
        (true, true) => None,
        (false, false) => Some(OccurrenceRef::new(
            doc_id,
            offset
                .parse::<usize>()
                .map_err(|_| format!("bad offset `{offset}`"))?,
        )),
        _ => return Err("doc_id and offset must be given together".into()),
    };
    let chosen = Candidate {
        lemma: fields[6].trim().to_string(),
        pos: fields[7].parse::<Pos>()?,
        disambiguator: optional(fields.get(8)),
        language: optional(fields.get(9)),
    };
    let decision = Decision {
        form_key: fields[5].trim().to_string(),
        scope,
        occurrence,
        chosen,
        annotator: fields[1].trim().to_string(),
        timestamp,
    };
    decision.validate().map_err(|e| e.to_string())?;
    Ok(decision)
}

/// Reads a decision log. A missing file is an empty log.
pub fn read_decision_log(path: impl AsRef<Path>) -> Result<Vec<Decision>, LexiconError> {
    let path = path.as_ref();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    data_lines(&text)
        .map(|(line, fields)| {
            parse_decision(&fields).map_err(|message| LexiconError::Parse {
                path: path.to_path_buf(),
                line,
                message,
            })
        })
        .collect()
}

/// Appends one decision as a single write so a crash never leaves half a line.
pub fn append_decision(path: impl AsRef<Path>, decision: &Decision) -> Result<(), LexiconError> {
    let path = path.as_ref();
    let mut line = format_decision(decision)?;
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    file.write_all(line.as_bytes()).map_err(io_err(path))?;
    file.sync_data().map_err(io_err(path))
}
