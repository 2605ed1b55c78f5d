//! Corpus manifests and the end-to-end run: ingest, tokenize, lemmatize
//! against the lexicon plus the replayed decision log, count, and write the
//! dictionary, statistics and review queue.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freqdict::{build_dictionary, FreqError, FrequencyDictionary};
use crate::ingest::{clean_document, load_document, IngestError, NoteMarkers, OrthographyProfile};
use crate::kwic::{concordance, KwicLine, DEFAULT_WIDTH};
use crate::lemmatizer::{
    apply_decisions, lemmatize_stream, load_paradigms, register_paradigms, write_queue_tsv, LemmatizeOutput,
    SchemeError,
};
use crate::lexicon::{
    append_decision, data_lines, read_decision_log, Decision, DecisionOutcome, Lexicon, LexiconError,
    OccurrenceIndex, VariantTable,
};
use crate::quantstats::{
    compute_profile, fit_all, plot_freqs, profile_toml, write_fits_tsv, write_plot_tsv, IndexBasis, StatProfile,
    StatsError, DEFAULT_THRESHOLD,
};
use crate::tokenizer::{normalize_form, tokenize, write_tokens_tsv, Token, TokenizerConfig};

pub const LEMMAS_BY_FREQ: &str = "lemmas_by_freq.tsv";
pub const FORMS_BY_FREQ: &str = "forms_by_freq.tsv";
pub const LEMMAS_ALPHA: &str = "lemmas_alpha.tsv";
pub const PROFILE: &str = "profile.toml";
pub const FITS: &str = "fits.tsv";
pub const PLOT: &str = "rank_freq_plot.tsv";
pub const QUEUE: &str = "queue.tsv";
pub const TOKENS: &str = "tokens.tsv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Freq(#[from] FreqError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub profile: OrthographyProfile,
    pub metadata: BTreeMap<String, String>,
}

/// Reads a corpus manifest: TSV rows of `id  path  profile  [k=v;k=v]`.
/// Paths are relative to the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, PipelineError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, fields) in data_lines(&text) {
        let err = |message: String| PipelineError::Manifest {
            path: path.to_path_buf(),
            line,
            message,
        };
        if fields.first().map(|f| f.trim()) == Some("id") {
            continue;
        }
        if fields.len() < 3 {
            return Err(err(format!("expected at least 3 fields, found {}", fields.len())));
        }
        let id = fields[0].trim().to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(err(format!("missing or duplicate document id `{id}`")));
        }
        let profile = fields[2].trim().parse().map_err(|e: IngestError| err(e.to_string()))?;
        let mut metadata = BTreeMap::new();
        for pair in fields.get(3).map(|f| f.trim()).unwrap_or("").split(';') {
            if pair.trim().is_empty() {
                continue;
            }
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| err(format!("metadata `{pair}` is not key=value")))?;
            metadata.insert(k.trim().to_string(), v.trim().to_string());
        }
        entries.push(ManifestEntry {
            id,
            path: base.join(fields[1].trim()),
            profile,
            metadata,
        });
    }
    Ok(entries)
}

/// Ingests and tokenizes every manifest document, in manifest order.
pub fn load_corpus(
    entries: &[ManifestEntry],
    markers: &NoteMarkers,
    tokenizer: &TokenizerConfig,
    profile_override: Option<OrthographyProfile>,
) -> Result<Vec<Token>, PipelineError> {
    let parts: Vec<Vec<Token>> = entries
        .par_iter()
        .map(|entry| -> Result<Vec<Token>, PipelineError> {
            let mut doc = load_document(&entry.path, profile_override.unwrap_or(entry.profile))?;
            doc.doc_id = entry.id.clone();
            doc.title = entry.metadata.get("title").cloned().unwrap_or_else(|| entry.id.clone());
            doc.metadata = entry.metadata.clone();
            let clean = clean_document(&doc, markers)?;
            Ok(tokenize(&clean, tokenizer))
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub lexicon: PathBuf,
    pub paradigms: Option<PathBuf>,
    pub variants: Option<PathBuf>,
    pub decision_log: PathBuf,
    pub out_dir: PathBuf,
    /// Applied to every document instead of the manifest's profile column.
    pub profile: Option<OrthographyProfile>,
    pub threshold: usize,
    pub basis: IndexBasis,
    pub allow_pending: bool,
    pub kwic_width: usize,
    pub write_tokens: bool,
    pub markers: NoteMarkers,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, lexicon: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        let out_dir = out_dir.into();
        RunConfig {
            manifest: manifest.into(),
            lexicon: lexicon.into(),
            paradigms: None,
            variants: None,
            decision_log: out_dir.join("decisions.tsv"),
            out_dir,
            profile: None,
            threshold: DEFAULT_THRESHOLD,
            basis: IndexBasis::Lemma,
            allow_pending: false,
            kwic_width: DEFAULT_WIDTH,
            write_tokens: false,
            markers: NoteMarkers::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub resolved: usize,
    pub pending: usize,
    pub queue_items: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildSummary {
    pub n: usize,
    pub v_form: usize,
    /// None when pending tokens kept the lemma lists from being built.
    pub v_lemma: Option<usize>,
    pub pending: usize,
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ImportReport {
    pub applied: usize,
    pub unchanged: usize,
}

/// A loaded corpus with its lexicon and current lemmatization.
#[derive(Debug)]
pub struct Session {
    pub config: RunConfig,
    pub tokens: Vec<Token>,
    pub lexicon: Lexicon,
    pub output: LemmatizeOutput,
    index: OccurrenceIndex,
    tokenizer: TokenizerConfig,
}

impl Session {
    /// Loads lexicon, paradigms, variants and corpus, replays the decision log
    /// into the lexicon and lemmatizes.
    pub fn open(config: RunConfig) -> Result<Self, PipelineError> {
        let mut lexicon = Lexicon::load(&config.lexicon)?;
        if let Some(path) = &config.variants {
            lexicon.set_variants(VariantTable::load(path)?);
        }
        if let Some(path) = &config.paradigms {
            register_paradigms(&mut lexicon, &load_paradigms(path)?)?;
        }
        let tokenizer = TokenizerConfig::with_accent_forms(lexicon.accented_forms().map(str::to_string));
        let entries = load_manifest(&config.manifest)?;
        let tokens = load_corpus(&entries, &config.markers, &tokenizer, config.profile)?;
        let index = OccurrenceIndex::from_tokens(&tokens);
        for decision in read_decision_log(&config.decision_log)? {
            lexicon.record_decision(decision, Some(&index))?;
        }
        let output = lemmatize_stream(&tokens, &lexicon, config.kwic_width);
        Ok(Session {
            config,
            tokens,
            lexicon,
            output,
            index,
            tokenizer,
        })
    }

    /// Lemmatizes again against the current lexicon.
    pub fn rerun(&mut self) {
        self.output = lemmatize_stream(&self.tokens, &self.lexicon, self.config.kwic_width);
    }

    pub fn progress(&self) -> Progress {
        let pending = self.output.pending_count();
        Progress {
            total: self.output.tokens.len(),
            resolved: self.output.tokens.len() - pending,
            pending,
            queue_items: self.output.queue.len(),
        }
    }

    /// Normalizes the decision's form key the way tokens are keyed.
    fn normalize(&self, mut decision: Decision) -> Decision {
        let norm = normalize_form(&decision.form_key, &self.tokenizer);
        decision.form_key = self.lexicon.canonicalize_variant(&norm).to_string();
        decision
    }

    fn check(&self, decision: &Decision) -> Result<(), PipelineError> {
        decision.validate()?;
        if let Some(occ) = &decision.occurrence {
            if !self.index.contains(occ) {
                return Err(LexiconError::OccurrenceNotFound(occ.clone()).into());
            }
        }
        Ok(())
    }

    /// Records one decision, appends it to the log when it changes anything,
    /// and resolves the affected pending tokens in place.
    pub fn record(&mut self, decision: Decision) -> Result<DecisionOutcome, PipelineError> {
        let decision = self.normalize(decision);
        self.check(&decision)?;
        if let Some(dir) = self.config.decision_log.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let outcome = self.lexicon.record_decision(decision.clone(), Some(&self.index))?;
        if outcome == DecisionOutcome::Applied {
            append_decision(&self.config.decision_log, &decision)?;
        }
        apply_decisions(&mut self.output.tokens, std::slice::from_ref(&decision));
        let still_pending: BTreeSet<_> = self
            .output
            .tokens
            .iter()
            .filter(|t| t.is_pending())
            .map(|t| t.occurrence())
            .collect();
        self.output.queue.retain(|item| still_pending.contains(&item.occurrence));
        Ok(outcome)
    }

    /// Validates every decision first, then records them in order.
    pub fn import(&mut self, decisions: Vec<Decision>) -> Result<ImportReport, PipelineError> {
        let decisions: Vec<Decision> = decisions.into_iter().map(|d| self.normalize(d)).collect();
        for d in &decisions {
            self.check(d)?;
        }
        let mut report = ImportReport::default();
        for d in decisions {
            match self.record(d)? {
                DecisionOutcome::Applied => report.applied += 1,
                DecisionOutcome::Unchanged => report.unchanged += 1,
            }
        }
        Ok(report)
    }

    /// Concordance of a form (matched on the variant-canonical wordform).
    pub fn kwic(&self, form: &str, width: usize) -> Vec<KwicLine> {
        let norm = normalize_form(form, &self.tokenizer);
        let key = self.lexicon.canonicalize_variant(&norm).to_string();
        concordance(&self.tokens, &key, width, |t| {
            self.lexicon.canonicalize_variant(&t.norm).to_string()
        })
    }

    pub fn dictionary(&self, allow_pending: bool) -> Result<FrequencyDictionary, PipelineError> {
        Ok(build_dictionary(&self.output.tokens, allow_pending)?)
    }

    pub fn queue_tsv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_queue_tsv(&mut buf, &self.output.queue).expect("writing to memory");
        buf
    }

    /// Writes all artifacts into the output directory. With pending tokens and
    /// no `allow_pending`, only the wordform list and the queue are written and
    /// stale lemma-based files are removed.
    pub fn write_artifacts(&self) -> Result<BuildSummary, PipelineError> {
        let dir = &self.config.out_dir;
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<(), PipelineError> {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(io_err(&path))?;
            written.push(path);
            Ok(())
        };
        let pending = self.output.pending_count();
        put(QUEUE, &self.queue_tsv())?;
        if self.config.write_tokens {
            let mut buf = Vec::new();
            write_tokens_tsv(&mut buf, &self.tokens).expect("writing to memory");
            put(TOKENS, &buf)?;
        }
        let mut notes = self.output.notes.clone();
        let v_lemma = if pending == 0 || self.config.allow_pending {
            let fd = self.dictionary(true)?;
            put(LEMMAS_BY_FREQ, &fd.lemma_ranks_tsv())?;
            put(FORMS_BY_FREQ, &fd.form_ranks_tsv())?;
            put(LEMMAS_ALPHA, &fd.alphabetical_tsv())?;
            if fd.total_tokens > 0 {
                let stats = StatsArtifacts::compute(&fd, self.config.threshold, self.config.basis)?;
                put(PROFILE, stats.profile_toml.as_bytes())?;
                put(FITS, &stats.fits_tsv)?;
                put(PLOT, &stats.plot_tsv)?;
                notes.extend(stats.notes);
            }
            Some(fd.lemma_vocabulary())
        } else {
            let fd = self.dictionary(true)?;
            put(FORMS_BY_FREQ, &fd.form_ranks_tsv())?;
            for stale in [LEMMAS_BY_FREQ, LEMMAS_ALPHA, PROFILE, FITS, PLOT] {
                let path = dir.join(stale);
                if path.exists() {
                    fs::remove_file(&path).map_err(io_err(&path))?;
                }
            }
            None
        };
        Ok(BuildSummary {
            n: self.output.tokens.len(),
            v_form: self.dictionary(true)?.form_vocabulary(),
            v_lemma,
            pending,
            written,
            notes,
        })
    }
}

/// Profile document, fit table and plot data for one dictionary.
#[derive(Debug, Clone)]
pub struct StatsArtifacts {
    pub profile: StatProfile,
    pub profile_toml: String,
    pub fits_tsv: Vec<u8>,
    pub plot_tsv: Vec<u8>,
    pub notes: Vec<String>,
}

impl StatsArtifacts {
    pub fn compute(fd: &FrequencyDictionary, threshold: usize, basis: IndexBasis) -> Result<Self, PipelineError> {
        let profile = compute_profile(fd, threshold, basis)?;
        let (fits, notes) = fit_all(fd, &profile);
        let mut fits_tsv = Vec::new();
        write_fits_tsv(&mut fits_tsv, &fits).expect("writing to memory");
        let mut plot_tsv = Vec::new();
        write_plot_tsv(&mut plot_tsv, &plot_freqs(fd, basis)).expect("writing to memory");
        Ok(StatsArtifacts {
            profile_toml: profile_toml(&profile, fd),
            profile,
            fits_tsv,
            plot_tsv,
            notes,
        })
    }
}

/// Runs the whole pipeline and writes artifacts.
pub fn run_build(config: RunConfig) -> Result<BuildSummary, PipelineError> {
    Session::open(config)?.write_artifacts()
}
