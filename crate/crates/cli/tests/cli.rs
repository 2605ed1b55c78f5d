use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn freqlex(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqlex"))
        .args(args)
        .output()
        .expect("run freqlex")
}

fn p(s: &str) -> &Path {
    Path::new(s)
}

fn run_args(corpus: &str, out: &Path) -> Vec<PathBuf> {
    let dir = data_dir().join(corpus);
    vec![
        "--manifest".into(),
        dir.join("manifest.tsv"),
        "--lexicon".into(),
        dir.join("lexicon.tsv"),
        "--out".into(),
        out.join("out"),
        "--decisions".into(),
        out.join("decisions.tsv"),
    ]
}

fn call(cmd: &str, corpus: &str, tmp: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<PathBuf> = vec![cmd.into()];
    args.extend(run_args(corpus, tmp));
    args.extend(extra.iter().map(PathBuf::from));
    let refs: Vec<&Path> = args.iter().map(PathBuf::as_path).collect();
    freqlex(&refs)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn complete_build_exits_zero_with_totals() {
    let tmp = tempfile::tempdir().unwrap();
    let o = call("build", "mini", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "N=2226 V_form=977 V_lemma=634 pending=0");
    for file in [
        "lemmas_by_freq.tsv",
        "forms_by_freq.tsv",
        "lemmas_alpha.tsv",
        "profile.toml",
        "fits.tsv",
        "rank_freq_plot.tsv",
        "queue.tsv",
    ] {
        assert!(tmp.path().join("out").join(file).exists(), "{file}");
    }
}

#[test]
fn pending_build_exits_two_and_allow_pending_writes_provisional_lists() {
    let tmp = tempfile::tempdir().unwrap();
    let o = call("build", "loop", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("pending=6"));
    let out = tmp.path().join("out");
    assert!(!out.join("lemmas_by_freq.tsv").exists());
    assert!(out.join("forms_by_freq.tsv").exists());

    let o = call("build", "loop", tmp.path(), &["--allow-pending"]);
    assert_eq!(o.status.code(), Some(2));
    let lemmas = fs::read_to_string(out.join("lemmas_by_freq.tsv")).unwrap();
    assert!(lemmas.lines().any(|l| l.contains("\tpending\t")));

    let o = call("build", "loop", tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("lemmas_by_freq.tsv").exists(), "stale provisional list kept");
}

#[test]
fn errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = freqlex(&[
        p("build"),
        p("--manifest"),
        &tmp.path().join("missing.tsv"),
        p("--lexicon"),
        &data_dir().join("mini/lexicon.tsv"),
        p("--out"),
        tmp.path(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = call("build", "mini", tmp.path(), &["--basis", "sideways"]);
    assert_eq!(o.status.code(), Some(1));

    let missing = tmp.path().join("nope.tsv");
    let o = call("import-decisions", "loop", tmp.path(), &["--from", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn export_queue_lists_pending_items() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("q.tsv");
    let o = call("export-queue", "loop", tmp.path(), &["--output", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&file).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("extra\t0\tмати\t"));
}

#[test]
fn stats_recomputes_from_written_lists() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(call("build", "mini", tmp.path(), &[]).status.code(), Some(0));
    let lists = tmp.path().join("out");
    let stats = tmp.path().join("stats");
    let o = freqlex(&[p("stats"), p("--lists"), &lists, p("--out"), &stats]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(stats.join("profile.toml")).unwrap(),
        fs::read(lists.join("profile.toml")).unwrap()
    );
    assert!(stats.join("fits.tsv").exists());

    let both = tmp.path().join("both");
    let o = freqlex(&[p("stats"), p("--lists"), &lists, p("--lists"), &lists, p("--out"), &both]);
    assert_eq!(o.status.code(), Some(0));
    assert!(both.join("out/profile.toml").exists());
    assert!(both.join("out_2/profile.toml").exists());
    let comparison = fs::read_to_string(both.join("comparison.tsv")).unwrap();
    assert_eq!(comparison.lines().next(), Some("metric\tout\tout_2"));
    assert!(comparison.lines().any(|l| l == "tokens\t2226\t2226"));
}

#[test]
fn serve_on_busy_port_exits_one() {
    let busy = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let tmp = tempfile::tempdir().unwrap();
    let o = call("serve", "mini", tmp.path(), &["--host", "127.0.0.1", "--port", &port]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot listen"));
}
