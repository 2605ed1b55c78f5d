//! Reduction of wordforms to lemmas.
//!
//! The engine is lookup-driven: per-form grammatical features come from
//! paradigm data, and [`reduce_by_scheme`] picks the dictionary form each part
//! of speech reduces to. Running text is lemmatized against the [`Lexicon`];
//! anything the lexicon cannot settle is queued for a human decision.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kwic::{kwic_line, KwicLine};
use crate::lexicon::{data_lines, Candidate, Decision, DecisionScope, Lexicon, OccurrenceRef, Pos, Resolution};
use crate::tokenizer::{detect_hyphen_enclitic, Script, Token};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("no reduction scheme for part of speech {pos} (form `{form}`)")]
    Undefined { form: String, pos: Pos },
    #[error("form `{form}` is not in paradigm `{paradigm}`")]
    NotInParadigm { form: String, paradigm: String },
    #[error("paradigm `{paradigm}` has no {wanted} form to reduce `{form}` to")]
    MissingTarget {
        form: String,
        paradigm: String,
        wanted: String,
    },
    #[error("cannot read {path}: {source}")]
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
}

/// Grammatical features of one inflected form, e.g. `instr.pl` or `masc.nom.sg.comp`.
///
/// Recognized labels: cases `nom gen dat acc instr loc voc`, numbers `sg pl`,
/// genders `masc fem neut`, degrees `pos comp superl`, verb forms
/// `inf pres past fut imper advp impers`, and the flags `person_class`
/// (plural denotes persons of both sexes) and `suppletive`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Features(BTreeSet<String>);

impl Features {
    pub fn parse(spec: &str) -> Self {
        Features(
            spec.split(['.', ',', ' ', '+'])
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn has(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    fn has_all(&self, labels: &[&str]) -> bool {
        labels.iter().all(|l| self.has(l))
    }

    fn has_any(&self, labels: &[&str]) -> bool {
        labels.iter().any(|l| self.has(l))
    }
}

impl fmt::Display for Features {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.0.iter().map(String::as_str).collect();
        f.write_str(&labels.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmRow {
    pub form: String,
    pub features: Features,
}

/// All inflected forms of one lexeme with their features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paradigm {
    pub id: String,
    pub pos: Pos,
    pub disambiguator: Option<String>,
    pub rows: Vec<ParadigmRow>,
}

impl Paradigm {
    pub fn new(id: impl Into<String>, pos: Pos) -> Self {
        Paradigm {
            id: id.into(),
            pos,
            disambiguator: None,
            rows: Vec::new(),
        }
    }

    pub fn row(mut self, form: &str, features: &str) -> Self {
        self.rows.push(ParadigmRow {
            form: form.to_lowercase(),
            features: Features::parse(features),
        });
        self
    }

    fn is_person_class(&self) -> bool {
        self.rows.iter().any(|r| r.features.has("person_class"))
    }

    /// Lemma of one member form under the paradigm's reduction scheme.
    pub fn lemma_of(&self, form: &str) -> Result<String, SchemeError> {
        let form = form.to_lowercase();
        let row = self
            .rows
            .iter()
            .find(|r| r.form == form)
            .ok_or_else(|| SchemeError::NotInParadigm {
                form: form.clone(),
                paradigm: self.id.clone(),
            })?;
        reduce_by_scheme(&form, self.pos, &row.features, self)
    }

    /// Lexicon rows (form, candidate) for every member form.
    pub fn lexicon_rows(&self) -> Result<Vec<(String, Candidate)>, SchemeError> {
        self.rows
            .iter()
            .map(|r| {
                let lemma = reduce_by_scheme(&r.form, self.pos, &r.features, self)?;
                let mut candidate = Candidate::new(lemma, self.pos);
                candidate.disambiguator = self.disambiguator.clone();
                Ok((r.form.clone(), candidate))
            })
            .collect()
    }
}

const DEGREES: &[&str] = &["comp", "superl"];

/// Which paradigm cell a form reduces to.
struct Target {
    required: Vec<&'static str>,
    excluded: Vec<&'static str>,
    /// Tie-break preferences among matching rows, most important first.
    preferred: Vec<&'static str>,
}

fn scheme_target(form: &str, pos: Pos, features: &Features, paradigm: &Paradigm) -> Result<Target, SchemeError> {
    let target = |required: &[&'static str], excluded: &[&'static str]| Target {
        required: required.to_vec(),
        excluded: excluded.to_vec(),
        preferred: Vec::new(),
    };
    let suppletive = features.has("suppletive") && features.has_any(DEGREES);
    Ok(match pos {
        Pos::NounPlTantum => target(&["nom", "pl"], &[]),
        Pos::Noun if features.has("pl") && paradigm.is_person_class() => target(&["nom", "pl"], &[]),
        Pos::Noun => target(&["nom", "sg"], &[]),
        Pos::Adjective | Pos::Participle if suppletive => target(&["nom", "sg", "masc", "comp", "suppletive"], &[]),
        Pos::Adjective | Pos::Participle => target(&["nom", "sg", "masc"], DEGREES),
        Pos::Verb => target(&["inf"], &[]),
        Pos::Adverb if suppletive => target(&["comp", "suppletive"], &[]),
        Pos::Adverb => target(&[], DEGREES),
        Pos::Pronoun | Pos::Numeral => Target {
            required: vec!["nom"],
            excluded: Vec::new(),
            preferred: vec!["masc", "sg"],
        },
        _ => {
            return Err(SchemeError::Undefined {
                form: form.to_string(),
                pos,
            })
        }
    })
}

/// Reduces an inflected form to its dictionary form.
///
/// Nouns go to nom.sg (pluralia tantum and person-class plurals to nom.pl);
/// adjectives and participles to masc.nom.sg with degrees merged, except that
/// suppletive comparatives reduce to their own comparative headword; verbs to
/// the infinitive; adverbs to the positive degree (suppletives to the
/// comparative); pronouns and numerals to the nominative of their declension.
pub fn reduce_by_scheme(
    form: &str,
    pos: Pos,
    features: &Features,
    paradigm: &Paradigm,
) -> Result<String, SchemeError> {
    let target = scheme_target(form, pos, features, paradigm)?;
    let mut best: Option<(&ParadigmRow, Vec<bool>)> = None;
    for row in paradigm
        .rows
        .iter()
        .filter(|r| r.features.has_all(&target.required) && !r.features.has_any(&target.excluded))
    {
        let score: Vec<bool> = target.preferred.iter().map(|p| row.features.has(p)).collect();
        if best.as_ref().is_none_or(|(_, top)| score > *top) {
            best = Some((row, score));
        }
    }
    match best.map(|(row, _)| row) {
        Some(row) => Ok(row.form.to_uppercase()),
        None => Err(SchemeError::MissingTarget {
            form: form.to_string(),
            paradigm: paradigm.id.clone(),
            wanted: if target.required.is_empty() {
                "positive-degree".to_string()
            } else {
                target.required.join(".")
            },
        }),
    }
}

/// Reads paradigms from TSV: `paradigm_id  pos  form  features  [disambiguator]`.
pub fn load_paradigms(path: impl AsRef<Path>) -> Result<Vec<Paradigm>, SchemeError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SchemeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, Paradigm> = HashMap::new();
    for (line, fields) in data_lines(&text) {
        let parse_err = |message: String| SchemeError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if fields.len() < 4 {
            return Err(parse_err(format!("expected at least 4 fields, found {}", fields.len())));
        }
        let id = fields[0].trim().to_string();
        let pos = fields[1].parse::<Pos>().map_err(parse_err)?;
        let disambiguator = fields.get(4).map(|d| d.trim()).filter(|d| !d.is_empty());
        let paradigm = by_id.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            let mut p = Paradigm::new(id.clone(), pos);
            p.disambiguator = disambiguator.map(str::to_string);
            p
        });
        if paradigm.pos != pos {
            return Err(parse_err(format!("paradigm `{id}` mixes parts of speech")));
        }
        paradigm.rows.push(ParadigmRow {
            form: fields[2].trim().to_lowercase(),
            features: Features::parse(fields[3]),
        });
    }
    Ok(order.into_iter().map(|id| by_id.remove(&id).expect("ordered id")).collect())
}

/// Adds every paradigm form to the lexicon under its scheme lemma.
pub fn register_paradigms(lexicon: &mut Lexicon, paradigms: &[Paradigm]) -> Result<(), SchemeError> {
    for paradigm in paradigms {
        for (form, candidate) in paradigm.lexicon_rows()? {
            lexicon.insert(&form, candidate, 0);
        }
    }
    Ok(())
}

/// Lexicon key a token is looked up under.
///
/// A hyphenated token registered as a whole is kept whole. Otherwise a trailing
/// enclitic (-бо, -но, -таки, -то) is dropped when the base reads as an
/// inflecting word; adverbs and function words keep it (ДУЖЕ-ТО, АЛЕ-БО).
pub fn strip_enclitic_if_content_word(token: &Token, lexicon: &Lexicon) -> String {
    let full = lexicon.canonicalize_variant(&token.norm).to_string();
    if lexicon.contains(&token.norm) {
        return full;
    }
    if let Some((base, _)) = detect_hyphen_enclitic(token) {
        let candidates = lexicon.lookup(&base);
        if candidates.iter().any(|c| c.pos.sheds_enclitic()) {
            return lexicon.canonicalize_variant(&base).to_string();
        }
    }
    full
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionKind {
    LexiconUnique,
    SenseAnnotation,
    HumanDecision,
    SelfLemma,
    Pending,
}

impl ResolutionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResolutionKind::LexiconUnique => "lexicon_unique",
            ResolutionKind::SenseAnnotation => "sense_annotation",
            ResolutionKind::HumanDecision => "human_decision",
            ResolutionKind::SelfLemma => "self_lemma",
            ResolutionKind::Pending => "pending",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmatizedToken {
    pub token: Token,
    /// Variant-canonical wordform, as counted in the wordform list.
    pub wordform: String,
    /// Key the lexicon was consulted with (variant-canonical, enclitic handled).
    pub form_key: String,
    /// `None` exactly when `resolution` is pending.
    pub lemma: Option<Candidate>,
    pub resolution: ResolutionKind,
}

impl LemmatizedToken {
    pub fn is_pending(&self) -> bool {
        self.resolution == ResolutionKind::Pending
    }

    pub fn occurrence(&self) -> OccurrenceRef {
        OccurrenceRef::new(self.token.doc_id.clone(), self.token.char_offset)
    }

    fn resolve(&mut self, candidate: Candidate, how: ResolutionKind) {
        self.lemma = Some(candidate);
        self.resolution = how;
    }
}

/// A wordform occurrence awaiting a human decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityItem {
    pub occurrence: OccurrenceRef,
    pub form_key: String,
    /// Empty for forms the lexicon does not know.
    pub candidates: Vec<Candidate>,
    pub kwic: KwicLine,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmatizeOutput {
    pub tokens: Vec<LemmatizedToken>,
    pub queue: Vec<AmbiguityItem>,
    /// Sense tags that created annotator-authored candidates, and similar notices.
    pub notes: Vec<String>,
}

impl LemmatizeOutput {
    pub fn pending_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_pending()).count()
    }
}

/// Presentation case for a lemma built from a wordform: Latin-script lemmas stay lowercase.
fn headword_case(form: &str) -> String {
    match crate::tokenizer::classify_script(form) {
        Script::Latin => form.to_lowercase(),
        _ => form.to_uppercase(),
    }
}

fn sense_candidate(tag: &str, key: &str, candidates: &[Candidate]) -> (Candidate, bool) {
    if let Some(c) = candidates
        .iter()
        .find(|c| c.disambiguator.as_deref() == Some(tag))
    {
        return (c.clone(), false);
    }
    if let Some(pos) = Pos::from_label(tag) {
        let mut with_pos = candidates.iter().filter(|c| c.pos == pos);
        if let (Some(c), None) = (with_pos.next(), with_pos.next()) {
            return (c.clone(), false);
        }
    }
    let lemmas: BTreeSet<&str> = candidates.iter().map(|c| c.lemma.as_str()).collect();
    let lemma = match (lemmas.len(), lemmas.iter().next()) {
        (1, Some(l)) => l.to_string(),
        _ => headword_case(key),
    };
    let pos = Pos::from_label(tag)
        .or_else(|| {
            let poses: BTreeSet<Pos> = candidates.iter().map(|c| c.pos).collect();
            (poses.len() == 1).then(|| *poses.iter().next().expect("one pos"))
        })
        .unwrap_or(Pos::Other);
    (Candidate::new(lemma, pos).with_disambiguator(tag), true)
}

fn lemmatize_one(token: &Token, lexicon: &Lexicon, notes: &mut Vec<String>) -> (LemmatizedToken, Option<Vec<Candidate>>) {
    let occurrence = OccurrenceRef::new(token.doc_id.clone(), token.char_offset);
    let wordform = lexicon.canonicalize_variant(&token.norm).to_string();
    let mut out = LemmatizedToken {
        token: token.clone(),
        form_key: wordform.clone(),
        wordform,
        lemma: None,
        resolution: ResolutionKind::Pending,
    };
    if token.script == Script::Digit {
        out.resolve(Candidate::new(token.surface.clone(), Pos::Numeral), ResolutionKind::SelfLemma);
        return (out, None);
    }
    let key = strip_enclitic_if_content_word(token, lexicon);
    out.form_key = key.clone();
    if let Some(bound) = lexicon.occurrence_binding(&occurrence) {
        out.resolve(bound.clone(), ResolutionKind::HumanDecision);
        return (out, None);
    }
    if let Some(tag) = &token.sense_tag {
        let (candidate, authored) = sense_candidate(tag, &key, &lexicon.lookup(&key));
        if authored {
            notes.push(format!(
                "{occurrence}: sense tag `{tag}` matched no candidate of `{key}`; authored {}",
                candidate.label()
            ));
        }
        out.resolve(candidate, ResolutionKind::SenseAnnotation);
        return (out, None);
    }
    match lexicon.resolve(&key) {
        Resolution::Unique(c) => {
            out.resolve(c, ResolutionKind::LexiconUnique);
            (out, None)
        }
        Resolution::Ambiguous(all) => (out, Some(all)),
        Resolution::Unknown => {
            // particle kept on an adverb or function word not registered as a whole
            if let Some((base, _)) = detect_hyphen_enclitic(token) {
                if let Resolution::Unique(c) = lexicon.resolve(&base) {
                    if !c.pos.sheds_enclitic() {
                        let mut kept = Candidate::new(headword_case(&token.norm), c.pos);
                        kept.language = c.language;
                        out.resolve(kept, ResolutionKind::LexiconUnique);
                        return (out, None);
                    }
                }
            }
            (out, Some(Vec::new()))
        }
    }
}

fn lemmatize_document(tokens: &[Token], lexicon: &Lexicon, width: usize) -> LemmatizeOutput {
    let mut output = LemmatizeOutput::default();
    for (idx, token) in tokens.iter().enumerate() {
        let (lemmatized, queued) = lemmatize_one(token, lexicon, &mut output.notes);
        if let Some(candidates) = queued {
            output.queue.push(AmbiguityItem {
                occurrence: lemmatized.occurrence(),
                form_key: lemmatized.form_key.clone(),
                candidates,
                kwic: kwic_line(tokens, idx, width),
            });
        }
        output.tokens.push(lemmatized);
    }
    output
}

/// Splits a token stream into per-document runs, preserving order.
pub(crate) fn document_runs(tokens: &[Token]) -> Vec<&[Token]> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=tokens.len() {
        if i == tokens.len() || tokens[i].doc_id != tokens[start].doc_id {
            if start < i {
                runs.push(&tokens[start..i]);
            }
            start = i;
        }
    }
    runs
}

/// Lemmatizes every token. Documents are processed in parallel against the
/// read-only lexicon; the queue is ordered by (doc_id, offset).
pub fn lemmatize_stream(tokens: &[Token], lexicon: &Lexicon, kwic_width: usize) -> LemmatizeOutput {
    let parts: Vec<LemmatizeOutput> = document_runs(tokens)
        .into_par_iter()
        .map(|run| lemmatize_document(run, lexicon, kwic_width))
        .collect();
    let mut output = LemmatizeOutput::default();
    for part in parts {
        output.tokens.extend(part.tokens);
        output.queue.extend(part.queue);
        output.notes.extend(part.notes);
    }
    output
        .queue
        .sort_by(|a, b| a.occurrence.cmp(&b.occurrence));
    output
}

/// Resolves pending tokens from a decision log. Occurrence decisions take
/// precedence over global ones; among global decisions for a form the latest wins.
///
/// Returns warnings for forms with conflicting global decisions.
pub fn apply_decisions(tokens: &mut [LemmatizedToken], decisions: &[Decision]) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut global: BTreeMap<&str, &Candidate> = BTreeMap::new();
    let mut by_occurrence: HashMap<&OccurrenceRef, &Candidate> = HashMap::new();
    for d in decisions {
        match d.scope {
            DecisionScope::Global => {
                if let Some(previous) = global.insert(d.form_key.as_str(), &d.chosen) {
                    if previous != &d.chosen {
                        warnings.push(format!(
                            "conflicting global decisions for `{}`: {} replaced by {}",
                            d.form_key,
                            previous.label(),
                            d.chosen.label()
                        ));
                    }
                }
            }
            DecisionScope::Occurrence => {
                if let Some(occ) = &d.occurrence {
                    by_occurrence.insert(occ, &d.chosen);
                }
            }
        }
    }
    for t in tokens.iter_mut().filter(|t| t.is_pending()) {
        let occ = t.occurrence();
        let chosen = by_occurrence
            .get(&occ)
            .copied()
            .or_else(|| global.get(t.form_key.as_str()).copied());
        if let Some(c) = chosen {
            t.resolve(c.clone(), ResolutionKind::HumanDecision);
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    warnings
}

/// Writes the queue as TSV: doc_id, offset, form, candidates, left|keyword|right.
pub fn write_queue_tsv<W: Write>(mut out: W, queue: &[AmbiguityItem]) -> io::Result<()> {
    writeln!(out, "doc_id\toffset\tform\tcandidates\tkwic")?;
    for item in queue {
        let candidates: Vec<String> = item.candidates.iter().map(Candidate::label).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            item.occurrence.doc_id,
            item.occurrence.offset,
            item.form_key,
            candidates.join("; "),
            item.kwic.to_field()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_sense_annotations;
    use crate::lexicon::VariantTable;
    use crate::tokenizer::{tokenize, TokenizerConfig};
    use proptest::prelude::*;

    fn advokat() -> Paradigm {
        Paradigm::new("адвокат", Pos::Noun)
            .row("адвокат", "nom.sg")
            .row("адвоката", "gen.sg")
            .row("адвокатові", "dat.sg")
            .row("адвокатом", "instr.sg")
            .row("адвокати", "nom.pl")
            .row("адвокатам", "dat.pl")
            .row("адвокатами", "instr.pl")
    }

    fn velykyi() -> Paradigm {
        Paradigm::new("великий", Pos::Adjective)
            .row("великий", "masc.nom.sg.pos")
            .row("велика", "fem.nom.sg.pos")
            .row("великих", "gen.pl.pos")
            .row("більший", "masc.nom.sg.comp.suppletive")
            .row("більша", "fem.nom.sg.comp.suppletive")
            .row("найбільший", "masc.nom.sg.superl.suppletive")
            .row("найбільшого", "masc.gen.sg.superl.suppletive")
    }

    fn selianyn() -> Paradigm {
        Paradigm::new("селянин", Pos::Noun)
            .row("селянин", "nom.sg")
            .row("селянина", "gen.sg")
            .row("селяни", "nom.pl.person_class")
            .row("селян", "gen.pl.person_class")
            .row("селянами", "instr.pl.person_class")
    }

    #[test]
    fn noun_paradigm_reduces_to_nominative_singular() {
        let p = advokat();
        for row in &p.rows {
            assert_eq!(p.lemma_of(&row.form).unwrap(), "АДВОКАТ");
        }
        assert_eq!(
            reduce_by_scheme("адвокатами", Pos::Noun, &Features::parse("instr.pl"), &p).unwrap(),
            "АДВОКАТ"
        );
    }

    #[test]
    fn suppletive_degrees_have_their_own_head() {
        let p = velykyi();
        assert_eq!(p.lemma_of("найбільший").unwrap(), "БІЛЬШИЙ");
        assert_eq!(p.lemma_of("найбільшого").unwrap(), "БІЛЬШИЙ");
        assert_eq!(p.lemma_of("більша").unwrap(), "БІЛЬШИЙ");
        assert_eq!(p.lemma_of("великих").unwrap(), "ВЕЛИКИЙ");
        assert_eq!(p.lemma_of("велика").unwrap(), "ВЕЛИКИЙ");
    }

    #[test]
    fn regular_degrees_merge() {
        let p = Paradigm::new("новий", Pos::Adjective)
            .row("новий", "masc.nom.sg")
            .row("новіший", "masc.nom.sg.comp")
            .row("найновішої", "fem.gen.sg.superl");
        assert_eq!(p.lemma_of("найновішої").unwrap(), "НОВИЙ");
        let adv = Paradigm::new("швидко", Pos::Adverb)
            .row("швидко", "pos")
            .row("швидше", "comp")
            .row("найшвидше", "superl");
        assert_eq!(adv.lemma_of("найшвидше").unwrap(), "ШВИДКО");
        let supp = Paradigm::new("добре", Pos::Adverb)
            .row("добре", "pos")
            .row("краще", "comp.suppletive")
            .row("найкраще", "superl.suppletive");
        assert_eq!(supp.lemma_of("найкраще").unwrap(), "КРАЩЕ");
    }

    #[test]
    fn person_class_plurals_stay_plural() {
        let p = selianyn();
        assert_eq!(p.lemma_of("селяни").unwrap(), "СЕЛЯНИ");
        assert_eq!(p.lemma_of("селянами").unwrap(), "СЕЛЯНИ");
        assert_eq!(p.lemma_of("селянина").unwrap(), "СЕЛЯНИН");
        let tantum = Paradigm::new("двері", Pos::NounPlTantum)
            .row("двері", "nom.pl")
            .row("дверима", "instr.pl");
        assert_eq!(tantum.lemma_of("дверима").unwrap(), "ДВЕРІ");
    }

    #[test]
    fn verbs_reduce_to_infinitive() {
        let p = Paradigm::new("ходити", Pos::Verb)
            .row("ходити", "inf")
            .row("ходи", "imper.sg")
            .row("ходив", "past.masc.sg")
            .row("ходячи", "advp");
        assert_eq!(p.lemma_of("ходячи").unwrap(), "ХОДИТИ");
    }

    #[test]
    fn pronouns_prefer_masculine_singular_nominative() {
        let p = Paradigm::new("мій", Pos::Pronoun)
            .row("моя", "fem.nom.sg")
            .row("мої", "nom.pl")
            .row("мій", "masc.nom.sg")
            .row("мойого", "masc.gen.sg");
        assert_eq!(p.lemma_of("мойого").unwrap(), "МІЙ");
    }

    #[test]
    fn scheme_errors() {
        let p = Paradigm::new("але", Pos::Conjunction).row("але", "");
        assert!(matches!(p.lemma_of("але"), Err(SchemeError::Undefined { .. })));
        let p = Paradigm::new("x", Pos::Noun).row("адвоката", "gen.sg");
        assert!(matches!(p.lemma_of("адвоката"), Err(SchemeError::MissingTarget { .. })));
        assert!(matches!(p.lemma_of("інше"), Err(SchemeError::NotInParadigm { .. })));
    }

    #[test]
    fn paradigm_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        fs::write(
            &path,
            "# id\tpos\tform\tfeatures\n\
             адвокат\tnoun\tадвокат\tnom.sg\n\
             адвокат\tnoun\tадвокатами\tinstr.pl\n\
             міля\tnoun\tміля\tnom.sg\tім'я\n",
        )
        .unwrap();
        let ps = load_paradigms(&path).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].lemma_of("адвокатами").unwrap(), "АДВОКАТ");
        assert_eq!(ps[1].disambiguator.as_deref(), Some("ім'я"));
        let mut lex = Lexicon::new(VariantTable::new());
        register_paradigms(&mut lex, &ps).unwrap();
        assert_eq!(lex.lookup("міля")[0].display_headword(), "МІЛЯ (ім'я)");
    }

    fn lexicon() -> Lexicon {
        let mut lex = Lexicon::new(VariantTable::ukrainian_default());
        register_paradigms(&mut lex, &[advokat(), velykyi(), selianyn()]).unwrap();
        let verbs = [
            ("говорить", "ГОВОРИТИ"),
            ("ходи", "ХОДИТИ"),
            ("колупнули", "КОЛУПНУТИ"),
        ];
        for (form, lemma) in verbs {
            lex.insert(form, Candidate::new(lemma, Pos::Verb), 0);
        }
        lex.insert("дуже", Candidate::new("ДУЖЕ", Pos::Adverb), 0);
        lex.insert("колись", Candidate::new("КОЛИСЬ", Pos::Adverb), 0);
        lex.insert("але", Candidate::new("АЛЕ", Pos::Conjunction), 0);
        lex.insert("якби-сте", Candidate::new("ЯКБИ-СТЕ", Pos::Conjunction), 0);
        lex.insert("мати", Candidate::new("МАТИ", Pos::Noun).with_disambiguator("ім."), 0);
        lex.insert("мати", Candidate::new("МАТИ", Pos::Verb).with_disambiguator("дієсл."), 0);
        lex.insert("maxima", Candidate::new("maximus", Pos::Foreign).with_language("la").with_disambiguator("прикм."), 0);
        lex.insert("maxima", Candidate::new("maximum", Pos::Foreign).with_language("la").with_disambiguator("ім."), 0);
        lex.insert("die", Candidate::new("der", Pos::Foreign).with_language("de"), 0);
        lex.insert("тільки", Candidate::new("ТІЛЬКИ", Pos::Particle), 0);
        lex
    }

    fn run(text: &str) -> LemmatizeOutput {
        let clean = parse_sense_annotations(text, "doc").unwrap();
        let tokens = tokenize(&clean, &TokenizerConfig::default());
        lemmatize_stream(&tokens, &lexicon(), 5)
    }

    fn lemma_of(text: &str) -> String {
        let out = run(text);
        out.tokens[0].lemma.as_ref().map(|c| c.lemma.clone()).unwrap_or_default()
    }

    #[test]
    fn enclitics_on_content_words_are_stripped() {
        assert_eq!(lemma_of("говорить-бо"), "ГОВОРИТИ");
        assert_eq!(lemma_of("ходи-но"), "ХОДИТИ");
        assert_eq!(lemma_of("колупнули-таки"), "КОЛУПНУТИ");
    }

    #[test]
    fn enclitics_on_function_words_are_kept() {
        assert_eq!(lemma_of("дуже-то"), "ДУЖЕ-ТО");
        assert_eq!(lemma_of("колись-то"), "КОЛИСЬ-ТО");
        assert_eq!(lemma_of("але-бо"), "АЛЕ-БО");
        assert_eq!(lemma_of("якби-сте"), "ЯКБИ-СТЕ");
        let lex = lexicon();
        let t = |s: &str| tokenize(&parse_sense_annotations(s, "d").unwrap(), &TokenizerConfig::default()).remove(0);
        assert_eq!(strip_enclitic_if_content_word(&t("говорить-бо"), &lex), "говорить");
        assert_eq!(strip_enclitic_if_content_word(&t("дуже-то"), &lex), "дуже-то");
        assert_eq!(strip_enclitic_if_content_word(&t("якби-сте"), &lex), "якби-сте");
    }

    #[test]
    fn homographs_queue_unless_tagged() {
        let out = run("мати");
        assert_eq!(out.tokens[0].resolution, ResolutionKind::Pending);
        assert!(out.tokens[0].lemma.is_none());
        assert_eq!(out.queue.len(), 1);
        assert_eq!(out.queue[0].candidates.len(), 2);

        let out = run("мати{ім.}");
        assert_eq!(out.tokens[0].resolution, ResolutionKind::SenseAnnotation);
        assert_eq!(out.tokens[0].lemma.as_ref().unwrap().pos, Pos::Noun);
        assert!(out.queue.is_empty());
    }

    #[test]
    fn unmatched_sense_tag_authors_candidate() {
        let out = run("мати{рідна}");
        let lemma = out.tokens[0].lemma.as_ref().unwrap();
        assert_eq!(lemma.lemma, "МАТИ");
        assert_eq!(lemma.disambiguator.as_deref(), Some("рідна"));
        assert_eq!(out.notes.len(), 1);
    }

    #[test]
    fn latin_forms_use_language_tagged_entries() {
        let out = run("maxima die");
        assert_eq!(out.queue.len(), 1);
        assert_eq!(out.queue[0].form_key, "maxima");
        let poses: Vec<_> = out.queue[0]
            .candidates
            .iter()
            .map(|c| c.disambiguator.clone().unwrap())
            .collect();
        assert_eq!(poses, ["прикм.", "ім."]);
        assert_eq!(out.tokens[1].lemma.as_ref().unwrap().lemma, "der");
    }

    #[test]
    fn digits_are_their_own_lemma() {
        let out = run("1900");
        assert_eq!(out.tokens[0].resolution, ResolutionKind::SelfLemma);
        assert_eq!(out.tokens[0].lemma.as_ref().unwrap().lemma, "1900");
    }

    #[test]
    fn variants_resolve_through_head() {
        assert_eq!(lemma_of("тілько"), "ТІЛЬКИ");
        let out = run("тілько");
        assert_eq!(out.tokens[0].form_key, "тільки");
    }

    #[test]
    fn unknown_forms_queue_with_context() {
        let out = run("великий адвокат панцю й селяни");
        assert_eq!(out.queue.len(), 2);
        assert_eq!(out.queue[0].form_key, "панцю");
        assert!(out.queue[0].candidates.is_empty());
        assert_eq!(out.queue[0].kwic.left, "великий адвокат");
        assert_eq!(out.queue[0].kwic.keyword, "панцю");
        assert_eq!(out.queue[1].form_key, "і");
    }

    #[test]
    fn decisions_resolve_pending_tokens() {
        let mut out = run("мати мати мати");
        let noun = Candidate::new("МАТИ", Pos::Noun).with_disambiguator("ім.");
        let verb = Candidate::new("МАТИ", Pos::Verb).with_disambiguator("дієсл.");

        let mut untouched = out.tokens.clone();
        assert!(apply_decisions(&mut untouched, &[]).is_empty());
        assert_eq!(untouched, out.tokens);

        let mut occ_only = out.tokens.clone();
        let d = Decision::for_occurrence("мати", OccurrenceRef::new("doc", 5), verb.clone(), "a");
        apply_decisions(&mut occ_only, std::slice::from_ref(&d));
        assert_eq!(occ_only.iter().filter(|t| t.is_pending()).count(), 2);
        assert_eq!(occ_only[1].lemma.as_ref(), Some(&verb));

        let g1 = Decision::global("мати", verb.clone(), "a");
        let g2 = Decision::global("мати", noun.clone(), "a");
        let warnings = apply_decisions(&mut out.tokens, &[g1, g2, d]);
        assert_eq!(warnings.len(), 1);
        assert!(out.tokens.iter().all(|t| t.resolution == ResolutionKind::HumanDecision));
        assert_eq!(out.tokens[0].lemma.as_ref(), Some(&noun));
        assert_eq!(out.tokens[1].lemma.as_ref(), Some(&verb));
    }

    #[test]
    fn merged_decisions_clear_the_queue() {
        let clean = parse_sense_annotations("мати панцю мати", "doc").unwrap();
        let tokens = tokenize(&clean, &TokenizerConfig::default());
        let mut lex = lexicon();
        assert_eq!(lemmatize_stream(&tokens, &lex, 5).queue.len(), 3);
        lex.record_decision(
            Decision::global("мати", Candidate::new("МАТИ", Pos::Noun).with_disambiguator("ім."), "a"),
            None,
        )
        .unwrap();
        lex.record_decision(
            Decision::global("панцю", Candidate::new("ПАНЦЮ", Pos::Noun).with_disambiguator("?"), "a"),
            None,
        )
        .unwrap();
        let out = lemmatize_stream(&tokens, &lex, 5);
        assert!(out.queue.is_empty());
        assert_eq!(out.pending_count(), 0);
    }

    #[test]
    fn queue_tsv() {
        let out = run("мати панцю");
        let mut buf = Vec::new();
        write_queue_tsv(&mut buf, &out.queue).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[1], "doc\t0\tмати\tМАТИ (noun, ім.); МАТИ (verb, дієсл.)\t|мати|панцю");
        assert_eq!(lines[2], "doc\t5\tпанцю\t\tмати|панцю|");
    }

    proptest! {
        #[test]
        fn tokens_are_conserved(words in proptest::collection::vec(
            prop::sample::select(vec!["мати", "адвоката", "панцю", "1900", "дуже-то", "селяни", "maxima", "мати{ім.}"]), 0..40)
        ) {
            let text = words.join(" ");
            let clean = parse_sense_annotations(&text, "doc").unwrap();
            let tokens = tokenize(&clean, &TokenizerConfig::default());
            let lex = lexicon();
            let out = lemmatize_stream(&tokens, &lex, 3);
            prop_assert_eq!(out.tokens.len(), tokens.len());
            let pending = out.tokens.iter().filter(|t| t.is_pending()).count();
            prop_assert_eq!(pending, out.queue.len());
            for t in &out.tokens {
                prop_assert_eq!(t.is_pending(), t.lemma.is_none());
            }
            prop_assert_eq!(&out, &lemmatize_stream(&tokens, &lex, 3));
        }

        #[test]
        fn suppletive_families_never_merge(idx in 0usize..7) {
            let p = velykyi();
            let lemma = p.lemma_of(&p.rows[idx].form).unwrap();
            let suppletive = p.rows[idx].features.has("suppletive");
            prop_assert_eq!(lemma == "БІЛЬШИЙ", suppletive);
            prop_assert_eq!(lemma == "ВЕЛИКИЙ", !suppletive);
        }
    }
}
