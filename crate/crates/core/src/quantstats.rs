//! Lexical-statistics profile (richness, exclusivity, concentration, coverage,
//! length distributions) and rank-frequency / Menzerath model fitting.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freqdict::FrequencyDictionary;
use crate::ingest::is_combining_mark;
use crate::tokenizer::{classify_script, is_apostrophe, is_hyphen, Script, Token};

pub const DEFAULT_THRESHOLD: usize = 10;
pub const COVERAGE_CUTOFFS: [usize; 5] = [10, 100, 500, 1000, 5000];
const ZM_MAX_ITERATIONS: usize = 500;
const ZM_GRID: usize = 160;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("cutoff {cutoff} outside 1..={vocabulary}")]
    CutoffOutOfRange { cutoff: usize, vocabulary: usize },
    #[error("{model} needs at least {need} points, got {got}")]
    TooFewPoints { model: Model, need: usize, got: usize },
    #[error("{model}: non-positive value {value}")]
    NonPositive { model: Model, value: f64 },
    #[error("{model}: all x values are equal")]
    Degenerate { model: Model },
    #[error("{model}: no convergence after {iterations} iterations (best: {best})")]
    NoConvergence {
        model: Model,
        iterations: usize,
        best: Box<FitResult>,
    },
}

/// Unit the indices are computed over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBasis {
    #[default]
    Lemma,
    Form,
}

impl IndexBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexBasis::Lemma => "lemma",
            IndexBasis::Form => "form",
        }
    }
}

impl FromStr for IndexBasis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lemma" => Ok(IndexBasis::Lemma),
            "form" => Ok(IndexBasis::Form),
            other => Err(format!("unknown index basis `{other}` (expected lemma or form)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Zipf,
    ZipfMandelbrot,
    Menzerath,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Zipf => "zipf",
            Model::ZipfMandelbrot => "zipf_mandelbrot",
            Model::Menzerath => "menzerath",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub params: Vec<(String, f64)>,
    pub r_squared: f64,
    pub n_points: usize,
    /// Residual sum of squares in the log space the model was fitted in.
    pub rss: f64,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("{} has no parameter {name}", self.model))
    }

    pub fn params_field(&self) -> String {
        self.params
            .iter()
            .map(|(n, v)| format!("{n}={v:.6}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for FitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} r2={:.6} n={}", self.model, self.params_field(), self.r_squared, self.n_points)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthDistributions {
    /// syllable count -> tokens
    pub syllables: BTreeMap<usize, usize>,
    /// phoneme count -> tokens
    pub phonemes: BTreeMap<usize, usize>,
    /// syllable count -> mean phonemes per syllable, x = 0 excluded
    pub mean_constituent: BTreeMap<usize, f64>,
}

impl LengthDistributions {
    /// (x, mean syllable length, token weight) rows for the Menzerath fit.
    pub fn menzerath_points(&self) -> Vec<(f64, f64, f64)> {
        self.mean_constituent
            .iter()
            .map(|(&x, &y)| (x as f64, y, self.syllables[&x] as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatProfile {
    pub basis: IndexBasis,
    pub threshold: usize,
    pub n: usize,
    pub v_lemma: usize,
    pub v_form: usize,
    pub hapax: usize,
    pub high_freq_count: usize,
    pub richness: f64,
    pub exclusivity: f64,
    pub concentration: f64,
    pub exclusivity_by_v: f64,
    pub concentration_by_v: f64,
    pub tokens_per_form: f64,
    pub coverage: Vec<(usize, f64)>,
    pub lengths: LengthDistributions,
}

fn basis_freqs(fd: &FrequencyDictionary, basis: IndexBasis) -> Vec<usize> {
    match basis {
        IndexBasis::Lemma => fd.lemma_entries.iter().map(|e| e.abs_freq).collect(),
        IndexBasis::Form => fd.form_entries.iter().map(|e| e.abs_freq).collect(),
    }
}

fn coverage_of(freqs: &[usize], n: usize, cutoff: usize) -> Result<f64, StatsError> {
    if cutoff == 0 || cutoff > freqs.len() {
        return Err(StatsError::CutoffOutOfRange {
            cutoff,
            vocabulary: freqs.len(),
        });
    }
    Ok(freqs[..cutoff].iter().sum::<usize>() as f64 / n as f64)
}

/// Cumulative relative frequency of the `cutoff` top-ranked lemmas.
pub fn coverage_at(fd: &FrequencyDictionary, cutoff: usize) -> Result<f64, StatsError> {
    if fd.total_tokens == 0 {
        return Err(StatsError::EmptyCorpus);
    }
    coverage_of(&basis_freqs(fd, IndexBasis::Lemma), fd.total_tokens, cutoff)
}

pub fn compute_profile(fd: &FrequencyDictionary, threshold: usize, basis: IndexBasis) -> Result<StatProfile, StatsError> {
    let n = fd.total_tokens;
    if n == 0 {
        return Err(StatsError::EmptyCorpus);
    }
    let freqs = basis_freqs(fd, basis);
    let v = freqs.len();
    let hapax = freqs.iter().filter(|&&f| f == 1).count();
    let high = freqs.iter().filter(|&&f| f >= threshold).count();
    let mut cutoffs: Vec<usize> = COVERAGE_CUTOFFS.iter().copied().filter(|&c| c < v).collect();
    cutoffs.push(v);
    let coverage = cutoffs
        .into_iter()
        .map(|c| coverage_of(&freqs, n, c).map(|cov| (c, cov)))
        .collect::<Result<_, _>>()?;
    let lengths = length_distributions(fd.form_entries.iter().map(|e| (e.form.as_str(), e.abs_freq)));
    Ok(StatProfile {
        basis,
        threshold,
        n,
        v_lemma: fd.lemma_vocabulary(),
        v_form: fd.form_vocabulary(),
        hapax,
        high_freq_count: high,
        richness: v as f64 / n as f64,
        exclusivity: hapax as f64 / n as f64,
        concentration: high as f64 / n as f64,
        exclusivity_by_v: hapax as f64 / v as f64,
        concentration_by_v: high as f64 / v as f64,
        tokens_per_form: fd.tokens_per_form(),
        coverage,
        lengths,
    })
}

const VOWELS: &str = "аеиіоуяюєї";

fn is_vowel(c: char) -> bool {
    VOWELS.contains(c)
}

fn letters(form: &str) -> Vec<char> {
    form.chars()
        .flat_map(char::to_lowercase)
        .filter(|&c| !is_combining_mark(c))
        .collect()
}

/// Vowel letters in the case-folded form.
pub fn count_syllables(form: &str) -> usize {
    letters(form).into_iter().filter(|&c| is_vowel(c)).count()
}

/// Phoneme estimate from a fixed letter table: ь, apostrophe and hyphen are
/// silent, щ and ї are two sounds, дз/дж one, iotated я/ю/є two at word start
/// or after a vowel, apostrophe or ь.
pub fn estimate_phonemes(form: &str) -> usize {
    let chars = letters(form);
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prev = if i == 0 { None } else { Some(chars[i - 1]) };
        count += match c {
            'ь' => 0,
            c if is_apostrophe(c) || is_hyphen(c) => 0,
            'щ' | 'ї' => 2,
            'д' if matches!(chars.get(i + 1), Some('з' | 'ж')) => {
                i += 1;
                1
            }
            'я' | 'ю' | 'є' => match prev {
                None => 2,
                Some(p) if is_vowel(p) || p == 'ь' || is_apostrophe(p) || is_hyphen(p) => 2,
                Some(_) => 1,
            },
            _ => 1,
        };
        i += 1;
    }
    count
}

/// Token-weighted length histograms over Cyrillic (form, occurrences) pairs.
pub fn length_distributions<'a, I>(forms: I) -> LengthDistributions
where
    I: IntoIterator<Item = (&'a str, usize)>,
{
    let mut out = LengthDistributions::default();
    let mut phoneme_sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (form, count) in forms {
        if count == 0 || classify_script(form) != Script::Cyrillic {
            continue;
        }
        let syl = count_syllables(form);
        let ph = estimate_phonemes(form);
        *out.syllables.entry(syl).or_insert(0) += count;
        *out.phonemes.entry(ph).or_insert(0) += count;
        if syl > 0 {
            let slot = phoneme_sums.entry(syl).or_insert((0.0, 0));
            slot.0 += count as f64 * ph as f64 / syl as f64;
            slot.1 += count;
        }
    }
    out.mean_constituent = phoneme_sums
        .into_iter()
        .map(|(x, (sum, n))| (x, sum / n as f64))
        .collect();
    out
}

pub fn token_length_distributions(tokens: &[Token]) -> LengthDistributions {
    length_distributions(tokens.iter().map(|t| (t.norm.as_str(), 1)))
}

struct LineFit {
    intercept: f64,
    slope: f64,
    rss: f64,
    tss: f64,
}

fn r_squared(rss: f64, tss: f64) -> f64 {
    if tss <= f64::EPSILON * f64::EPSILON {
        0.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    }
}

fn ols(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let tss = ys.iter().map(|y| (y - my).powi(2)).sum();
    Some(LineFit {
        intercept,
        slope,
        rss,
        tss,
    })
}

fn check_points(model: Model, points: &[(f64, f64)], need: usize) -> Result<(), StatsError> {
    if points.len() < need {
        return Err(StatsError::TooFewPoints {
            model,
            need,
            got: points.len(),
        });
    }
    for &(r, f) in points {
        if r.is_nan() || r <= 0.0 {
            return Err(StatsError::NonPositive { model, value: r });
        }
        if f.is_nan() || f <= 0.0 {
            return Err(StatsError::NonPositive { model, value: f });
        }
    }
    Ok(())
}

/// Rank-frequency points from a frequency list in rank order.
pub fn rank_points(freqs: &[usize]) -> Vec<(f64, f64)> {
    freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64, f as f64))
        .collect()
}

/// f = C·r^−a by least squares on (ln r, ln f).
pub fn fit_zipf(points: &[(f64, f64)]) -> Result<FitResult, StatsError> {
    check_points(Model::Zipf, points, 2)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = ols(&xs, &ys).ok_or(StatsError::Degenerate { model: Model::Zipf })?;
    Ok(FitResult {
        model: Model::Zipf,
        params: vec![("C".into(), line.intercept.exp()), ("a".into(), -line.slope)],
        r_squared: r_squared(line.rss, line.tss),
        n_points: points.len(),
        rss: line.rss,
    })
}

/// f = C·(r+b)^−a with `b` held fixed.
pub fn fit_zipf_mandelbrot_fixed(points: &[(f64, f64)], b: f64) -> Result<FitResult, StatsError> {
    check_points(Model::ZipfMandelbrot, points, 2)?;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 + b).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = ols(&xs, &ys).ok_or(StatsError::Degenerate {
        model: Model::ZipfMandelbrot,
    })?;
    Ok(FitResult {
        model: Model::ZipfMandelbrot,
        params: vec![
            ("C".into(), line.intercept.exp()),
            ("a".into(), -line.slope),
            ("b".into(), b),
        ],
        r_squared: r_squared(line.rss, line.tss),
        n_points: points.len(),
        rss: line.rss,
    })
}

/// f = C·(r+b)^−a: scans b over a log-spaced grid on [0, r_max], then refines
/// the best bracket by golden-section search with the closed-form inner fit.
pub fn fit_zipf_mandelbrot(points: &[(f64, f64)]) -> Result<FitResult, StatsError> {
    check_points(Model::ZipfMandelbrot, points, 4)?;
    let r_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let rss = |b: f64| fit_zipf_mandelbrot_fixed(points, b).map(|f| f.rss);

    let mut grid = vec![0.0];
    let lo = (r_max * 1e-6).max(1e-6);
    for i in 0..ZM_GRID {
        grid.push(lo * (r_max / lo).powf(i as f64 / (ZM_GRID - 1) as f64));
    }
    let mut best_i = 0;
    let mut best_rss = f64::INFINITY;
    for (i, &b) in grid.iter().enumerate() {
        let v = rss(b)?;
        if v < best_rss {
            best_rss = v;
            best_i = i;
        }
    }
    let mut a = grid[best_i.saturating_sub(1)];
    let mut d = grid[(best_i + 1).min(grid.len() - 1)];

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut b1 = d - phi * (d - a);
    let mut b2 = a + phi * (d - a);
    let mut f1 = rss(b1)?;
    let mut f2 = rss(b2)?;
    let tol = 1e-10 * (1.0 + r_max);
    let mut iterations = 0;
    while d - a > tol {
        if iterations == ZM_MAX_ITERATIONS {
            let b = if f1 < f2 { b1 } else { b2 };
            return Err(StatsError::NoConvergence {
                model: Model::ZipfMandelbrot,
                iterations,
                best: Box::new(fit_zipf_mandelbrot_fixed(points, b)?),
            });
        }
        iterations += 1;
        if f1 <= f2 {
            d = b2;
            b2 = b1;
            f2 = f1;
            b1 = d - phi * (d - a);
            f1 = rss(b1)?;
        } else {
            a = b1;
            b1 = b2;
            f1 = f2;
            b2 = a + phi * (d - a);
            f2 = rss(b2)?;
        }
    }
    let mut b = (a + d) / 2.0;
    if best_rss < rss(b)? {
        b = grid[best_i];
    }
    fit_zipf_mandelbrot_fixed(points, b)
}

struct WeightedFit {
    coef: Vec<f64>,
    rss: f64,
    r_squared: f64,
    adj_r_squared: f64,
}

fn weighted_least_squares(design: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> WeightedFit {
    let sw = w.map(f64::sqrt);
    let mut a = design.clone();
    for (mut row, s) in a.row_iter_mut().zip(sw.iter()) {
        row *= *s;
    }
    let yw = y.component_mul(&sw);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&yw, 1e-12)
        .expect("both SVD factors requested");
    let resid = &yw - &a * &coef;
    let rss = resid.norm_squared();
    let wsum = w.sum();
    let ymean = y.dot(w) / wsum;
    let tss: f64 = y.iter().zip(w.iter()).map(|(yi, wi)| wi * (yi - ymean).powi(2)).sum();
    let r2 = r_squared(rss, tss);
    let n = y.len() as f64;
    let p = (design.ncols() - 1) as f64;
    let adj = if n - p - 1.0 > 0.0 {
        1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0)
    } else {
        f64::NEG_INFINITY
    };
    WeightedFit {
        coef: coef.iter().copied().collect(),
        rss,
        r_squared: r2,
        adj_r_squared: adj,
    }
}

/// Both Menzerath variants; `selected` is whichever has the better adjusted r²,
/// preferring the reduced form on ties.
#[derive(Debug, Clone, PartialEq)]
pub struct MenzerathFits {
    pub full: FitResult,
    pub reduced: FitResult,
    pub selected: FitResult,
}

/// y = A·x^b·e^(−c·x), weighted least squares of ln y on (ln x, x), plus the
/// reduced form with c = 0. Points are (x, y, weight).
pub fn fit_menzerath_models(points: &[(f64, f64, f64)]) -> Result<MenzerathFits, StatsError> {
    let model = Model::Menzerath;
    for &(x, y, w) in points {
        for v in [x, y, w] {
            if v.is_nan() || v <= 0.0 {
                return Err(StatsError::NonPositive { model, value: v });
            }
        }
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(StatsError::TooFewPoints {
            model,
            need: 3,
            got: xs.len(),
        });
    }
    let n = points.len();
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1.ln()));
    let w = DVector::from_iterator(n, points.iter().map(|p| p.2));
    let full_design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => points[i].0.ln(),
        _ => -points[i].0,
    });
    let reduced_design = full_design.columns(0, 2).into_owned();
    let full = weighted_least_squares(&full_design, &y, &w);
    let reduced = weighted_least_squares(&reduced_design, &y, &w);
    let to_result = |fit: &WeightedFit| FitResult {
        model,
        params: vec![
            ("A".into(), fit.coef[0].exp()),
            ("b".into(), fit.coef[1]),
            ("c".into(), fit.coef.get(2).copied().unwrap_or(0.0)),
        ],
        r_squared: fit.r_squared,
        n_points: n,
        rss: fit.rss,
    };
    let selected = if reduced.adj_r_squared >= full.adj_r_squared - 1e-12 {
        to_result(&reduced)
    } else {
        to_result(&full)
    };
    Ok(MenzerathFits {
        full: to_result(&full),
        reduced: to_result(&reduced),
        selected,
    })
}

pub fn fit_menzerath(points: &[(f64, f64, f64)]) -> Result<FitResult, StatsError> {
    fit_menzerath_models(points).map(|m| m.selected)
}

/// Zipf, Zipf–Mandelbrot and Menzerath fits for a profile; models whose
/// preconditions the data does not meet are skipped with a note.
pub fn fit_all(fd: &FrequencyDictionary, profile: &StatProfile) -> (Vec<FitResult>, Vec<String>) {
    let points = rank_points(&basis_freqs(fd, profile.basis));
    let menz = profile.lengths.menzerath_points();
    let mut fits = Vec::new();
    let mut notes = Vec::new();
    for result in [
        fit_zipf(&points),
        fit_zipf_mandelbrot(&points),
        fit_menzerath(&menz),
    ] {
        match result {
            Ok(fit) => fits.push(fit),
            Err(e) => notes.push(e.to_string()),
        }
    }
    (fits, notes)
}

pub fn write_fits_tsv<W: Write>(mut out: W, fits: &[FitResult]) -> io::Result<()> {
    writeln!(out, "model\tparams\tr_squared\tn_points")?;
    for fit in fits {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}",
            fit.model,
            fit.params_field(),
            fit.r_squared,
            fit.n_points
        )?;
    }
    Ok(())
}

/// (rank, freq, ln rank, ln freq) rows for external plotting.
pub fn write_plot_tsv<W: Write>(mut out: W, freqs: &[usize]) -> io::Result<()> {
    writeln!(out, "rank\tfreq\tlog_rank\tlog_freq")?;
    for (i, &f) in freqs.iter().enumerate() {
        let r = i + 1;
        writeln!(out, "{r}\t{f}\t{:.6}\t{:.6}", (r as f64).ln(), (f as f64).ln())?;
    }
    Ok(())
}

pub fn plot_freqs(fd: &FrequencyDictionary, basis: IndexBasis) -> Vec<usize> {
    basis_freqs(fd, basis)
}

#[derive(Debug, Serialize)]
struct ProfileDoc<'a> {
    note: &'static str,
    basis: &'static str,
    threshold: usize,
    counts: Counts,
    indices: Indices,
    coverage: BTreeMap<String, f64>,
    scripts: &'a crate::freqdict::ScriptBreakdown,
    digests: Digests,
    syllable_histogram: BTreeMap<String, usize>,
    phoneme_histogram: BTreeMap<String, usize>,
    mean_syllable_length: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct Counts {
    tokens: usize,
    lemmas: usize,
    forms: usize,
    hapax: usize,
    high_freq: usize,
    tokens_per_form: f64,
}

#[derive(Debug, Serialize)]
struct Indices {
    richness: f64,
    exclusivity: f64,
    concentration: f64,
    exclusivity_by_vocabulary: f64,
    concentration_by_vocabulary: f64,
}

#[derive(Debug, Serialize)]
struct Digests {
    lemmas_by_freq: String,
    forms_by_freq: String,
    lemmas_alpha: String,
}

fn keyed<V: Copy>(map: &BTreeMap<usize, V>) -> BTreeMap<String, V> {
    // zero-padded so the document lists keys in numeric order
    map.iter().map(|(k, v)| (format!("{k:03}"), *v)).collect()
}

/// Profile as a TOML document, including SHA-256 digests of the three lists.
pub fn profile_toml(profile: &StatProfile, fd: &FrequencyDictionary) -> String {
    let (l, f, a) = fd.list_digests();
    let doc = ProfileDoc {
        note: "syllables are counted as vowel letters; phonemes are estimated from a letter table",
        basis: profile.basis.as_str(),
        threshold: profile.threshold,
        counts: Counts {
            tokens: profile.n,
            lemmas: profile.v_lemma,
            forms: profile.v_form,
            hapax: profile.hapax,
            high_freq: profile.high_freq_count,
            tokens_per_form: profile.tokens_per_form,
        },
        indices: Indices {
            richness: profile.richness,
            exclusivity: profile.exclusivity,
            concentration: profile.concentration,
            exclusivity_by_vocabulary: profile.exclusivity_by_v,
            concentration_by_vocabulary: profile.concentration_by_v,
        },
        coverage: profile
            .coverage
            .iter()
            .map(|(c, v)| (format!("top_{c}"), *v))
            .collect(),
        scripts: &fd.scripts,
        digests: Digests {
            lemmas_by_freq: l,
            forms_by_freq: f,
            lemmas_alpha: a,
        },
        syllable_histogram: keyed(&profile.lengths.syllables),
        phoneme_histogram: keyed(&profile.lengths.phonemes),
        mean_syllable_length: keyed(&profile.lengths.mean_constituent),
    };
    toml::to_string(&doc).expect("profile serializes")
}

/// Side-by-side table of the main profile values for several corpora.
pub fn write_comparison_tsv<W: Write>(mut out: W, profiles: &[(String, StatProfile)]) -> io::Result<()> {
    write!(out, "metric")?;
    for (name, _) in profiles {
        write!(out, "\t{name}")?;
    }
    writeln!(out)?;
    type Getter = fn(&StatProfile) -> String;
    let rows: [(&str, Getter); 10] = [
        ("tokens", |p| p.n.to_string()),
        ("lemmas", |p| p.v_lemma.to_string()),
        ("forms", |p| p.v_form.to_string()),
        ("hapax", |p| p.hapax.to_string()),
        ("high_freq", |p| p.high_freq_count.to_string()),
        ("richness", |p| format!("{:.6}", p.richness)),
        ("exclusivity", |p| format!("{:.6}", p.exclusivity)),
        ("concentration", |p| format!("{:.6}", p.concentration)),
        ("tokens_per_form", |p| format!("{:.6}", p.tokens_per_form)),
        ("coverage_top_10", |p| {
            p.coverage
                .iter()
                .find(|(c, _)| *c == 10)
                .map(|(_, v)| format!("{v:.6}"))
                .unwrap_or_else(|| "-".into())
        }),
    ];
    for (name, get) in rows {
        write!(out, "{name}")?;
        for (_, p) in profiles {
            write!(out, "\t{}", get(p))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
