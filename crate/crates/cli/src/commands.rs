//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use parking_lot::RwLock;

use freqlex_core::freqdict::FrequencyDictionary;
use freqlex_core::ingest::OrthographyProfile;
use freqlex_core::kwic::DEFAULT_WIDTH;
use freqlex_core::lexicon::read_decision_log;
use freqlex_core::pipeline::{self, RunConfig, Session, StatsArtifacts};
use freqlex_core::quantstats::{write_comparison_tsv, IndexBasis, DEFAULT_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PENDING: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "freqlex", version, about = "Build frequency dictionaries of literary corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, lemmatize and count; write the lists, statistics and review queue.
    /// Exits 2 when tokens still await a decision.
    Build(RunArgs),
    /// Profile and model fits from list files written by `build`.
    Stats(StatsArgs),
    /// Serve the review API over the current queue.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Write the pending-decision queue as TSV.
    ExportQueue {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check decisions from a TSV file against the corpus and append them to the decision log.
    ImportDecisions {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "from")]
        from: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Corpus manifest (TSV: id, path, profile, metadata).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Lexicon TSV.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Paradigm table whose rows are added to the lexicon.
    #[arg(long)]
    pub paradigms: Option<PathBuf>,
    /// Variant groups replacing the built-in table.
    #[arg(long)]
    pub variants: Option<PathBuf>,
    /// Append-only decision log [default: OUT/decisions.tsv].
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Orthography profile for every document, overriding the manifest.
    #[arg(long)]
    pub profile: Option<OrthographyProfile>,
    /// Frequency threshold of the concentration index.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: usize,
    /// Compute indices over lemmas or wordforms.
    #[arg(long, default_value = "lemma")]
    pub basis: IndexBasis,
    /// Write lemma lists even while tokens are pending (counted under their own form).
    #[arg(long)]
    pub allow_pending: bool,
    /// Context tokens on each side of a queue item.
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    pub kwic_width: usize,
    /// Also write tokens.tsv.
    #[arg(long)]
    pub tokens: bool,
}

impl RunArgs {
    pub fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(&self.manifest, &self.lexicon, &self.out);
        c.paradigms = self.paradigms.clone();
        c.variants = self.variants.clone();
        if let Some(d) = &self.decisions {
            c.decision_log = d.clone();
        }
        c.profile = self.profile;
        c.threshold = self.threshold;
        c.basis = self.basis;
        c.allow_pending = self.allow_pending;
        c.kwic_width = self.kwic_width;
        c.write_tokens = self.tokens;
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Directory holding lemmas_by_freq.tsv and forms_by_freq.tsv; repeat to compare corpora.
    #[arg(long = "lists", required = true)]
    pub lists: Vec<PathBuf>,
    #[arg(long, default_value = "stats")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: usize,
    #[arg(long, default_value = "lemma")]
    pub basis: IndexBasis,
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Build(args) => build(&args),
        Command::Stats(args) => stats(&args),
        Command::Serve { run, host, port } => serve(&run, &host, port),
        Command::ExportQueue { run, output } => export_queue(&run, output.as_deref()),
        Command::ImportDecisions { run, from } => import_decisions(&run, &from),
    }
}

pub fn build(args: &RunArgs) -> Result<i32> {
    let session = Session::open(args.config())?;
    let summary = session.write_artifacts()?;
    for note in &summary.notes {
        log::info!("{note}");
    }
    let v_lemma = summary
        .v_lemma
        .map_or_else(|| "-".to_string(), |v| v.to_string());
    println!(
        "N={} V_form={} V_lemma={} pending={}",
        summary.n, summary.v_form, v_lemma, summary.pending
    );
    if summary.pending > 0 {
        println!(
            "{} tokens await a decision; see {}",
            summary.pending,
            args.out.join(pipeline::QUEUE).display()
        );
        Ok(EXIT_PENDING)
    } else {
        Ok(EXIT_OK)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn list_name(dir: &Path, i: usize) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty() && n != "." && n != "..")
        .unwrap_or_else(|| format!("corpus{}", i + 1))
}

pub fn stats(args: &StatsArgs) -> Result<i32> {
    let mut profiles = Vec::new();
    for (i, dir) in args.lists.iter().enumerate() {
        let fd = FrequencyDictionary::from_rank_files(
            &dir.join(pipeline::LEMMAS_BY_FREQ),
            &dir.join(pipeline::FORMS_BY_FREQ),
        )?;
        if fd.total_tokens == 0 {
            bail!("{}: empty corpus", dir.display());
        }
        let artifacts = StatsArtifacts::compute(&fd, args.threshold, args.basis)?;
        let mut name = list_name(dir, i);
        if profiles.iter().any(|(n, _)| n == &name) {
            name = format!("{name}_{}", i + 1);
        }
        let out = if args.lists.len() == 1 {
            args.out.clone()
        } else {
            args.out.join(&name)
        };
        fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
        write(&out.join(pipeline::PROFILE), artifacts.profile_toml.as_bytes())?;
        write(&out.join(pipeline::FITS), &artifacts.fits_tsv)?;
        write(&out.join(pipeline::PLOT), &artifacts.plot_tsv)?;
        for note in &artifacts.notes {
            log::info!("{name}: {note}");
        }
        let p = &artifacts.profile;
        println!(
            "{name}: N={} V_lemma={} V_form={} richness={:.6} exclusivity={:.6} concentration={:.6}",
            p.n, p.v_lemma, p.v_form, p.richness, p.exclusivity, p.concentration
        );
        profiles.push((name, artifacts.profile));
    }
    if profiles.len() > 1 {
        let mut buf = Vec::new();
        write_comparison_tsv(&mut buf, &profiles)?;
        write(&args.out.join("comparison.tsv"), &buf)?;
    }
    Ok(EXIT_OK)
}

pub fn export_queue(args: &RunArgs, output: Option<&Path>) -> Result<i32> {
    let session = Session::open(args.config())?;
    let tsv = session.queue_tsv();
    match output {
        Some(path) => write(path, &tsv)?,
        None => io::stdout().write_all(&tsv)?,
    }
    eprintln!("{} queue items", session.output.queue.len());
    Ok(EXIT_OK)
}

pub fn import_decisions(args: &RunArgs, from: &Path) -> Result<i32> {
    if !from.exists() {
        bail!("decision file {} does not exist", from.display());
    }
    let decisions = read_decision_log(from)?;
    let mut session = Session::open(args.config())?;
    let report = session.import(decisions)?;
    let progress = session.progress();
    println!(
        "applied={} unchanged={} pending={}",
        report.applied, report.unchanged, progress.pending
    );
    Ok(EXIT_OK)
}

pub fn serve(args: &RunArgs, host: &str, port: u16) -> Result<i32> {
    let session = Session::open(args.config())?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("cannot listen on {host}:{port}"))?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        let app = crate::service::router(Arc::new(RwLock::new(session)));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(EXIT_OK)
    })
}
