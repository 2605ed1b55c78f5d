use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use parking_lot::RwLock;
use serde_json::{json, Value};
use tower::ServiceExt;

use freqlex_cli::service::{router, KwicResponse, QueuePage};
use freqlex_core::pipeline::{Progress, RunConfig, Session};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn app(corpus: &str, tmp: &Path) -> Router {
    let dir = data_dir().join(corpus);
    let config = RunConfig::new(dir.join("manifest.tsv"), dir.join("lexicon.tsv"), tmp.join("out"));
    let session = Session::open(config).expect("session");
    router(Arc::new(RwLock::new(session)))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.expect("response");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    send(app, req).await
}

fn log_lines(tmp: &Path) -> usize {
    fs::read_to_string(tmp.join("out/decisions.tsv"))
        .map(|t| t.lines().filter(|l| !l.starts_with('#')).count())
        .unwrap_or(0)
}

fn encode(s: &str) -> String {
    s.bytes().map(|b| format!("%{b:02X}")).collect()
}

#[tokio::test]
async fn queue_pages_and_filters() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app("loop", tmp.path());

    let (status, body) = get(&app, "/api/queue?limit=2").await;
    assert_eq!(status, StatusCode::OK);
    let page: QueuePage = serde_json::from_value(body).unwrap();
    assert_eq!(page.total, 6);
    assert_eq!(page.items.len(), 2);
    assert_eq!(page.items[0].occurrence.doc_id, "extra");
    assert_eq!(page.items[0].form_key, "мати");
    assert_eq!(page.items[0].candidates.len(), 2);
    assert_eq!(page.items[0].kwic.keyword, "Мати");

    let (_, body) = get(&app, "/api/queue?offset=5&limit=20").await;
    let page: QueuePage = serde_json::from_value(body).unwrap();
    assert_eq!((page.total, page.offset, page.items.len()), (6, 5, 1));

    let (_, body) = get(&app, &format!("/api/queue?form={}", encode("корову"))).await;
    assert_eq!(body["total"], 2);
    let (_, body) = get(&app, "/api/queue?unknown_only=true").await;
    assert_eq!(body["total"], 5);
}

#[tokio::test]
async fn kwic_matches_recount_windows() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app("mini", tmp.path());
    let (status, body) = get(&app, &format!("/api/kwic?form={}&width=5", encode("мати"))).await;
    assert_eq!(status, StatusCode::OK);
    let resp: KwicResponse = serde_json::from_value(body).unwrap();
    assert_eq!(resp.width, 5);

    let golden = fs::read_to_string(data_dir().join("mini/golden/kwic_maty.tsv")).unwrap();
    let want: Vec<Vec<&str>> = golden.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(resp.lines.len(), want.len());
    for (line, row) in resp.lines.iter().zip(&want) {
        let offset = line.offset.to_string();
        let got = [
            line.doc_id.as_str(),
            offset.as_str(),
            line.left.as_str(),
            line.keyword.as_str(),
            line.right.as_str(),
        ];
        assert_eq!(got.as_slice(), row.as_slice());
    }

    let (_, body) = get(&app, &format!("/api/kwic?form={}", encode("мати"))).await;
    assert_eq!(body["width"], 5);
}

#[tokio::test]
async fn decisions_shrink_the_queue_and_grow_the_log() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app("loop", tmp.path());

    let (_, body) = get(&app, "/api/progress").await;
    let before: Progress = serde_json::from_value(body).unwrap();
    assert_eq!((before.pending, before.queue_items), (6, 6));

    let global = json!({
        "form_key": "корову", "scope": "global", "lemma": "КОРОВА", "pos": "noun",
        "annotator": "tester"
    });
    let (status, body) = post(&app, "/api/decision", global.clone()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["applied"], true);
    assert_eq!(body["progress"]["pending"], 4);
    assert_eq!(log_lines(tmp.path()), 1);

    let (status, body) = post(&app, "/api/decision", global).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["applied"], false);
    assert_eq!(log_lines(tmp.path()), 1);

    let occurrence = json!({
        "form_key": "мати", "scope": "occurrence", "occurrence": {"doc_id": "extra", "offset": 0},
        "lemma": "МАТИ", "pos": "noun", "disambiguator": "ім.", "annotator": "tester"
    });
    let (status, body) = post(&app, "/api/decision", occurrence).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["progress"]["pending"], 3);
    assert_eq!(log_lines(tmp.path()), 2);

    let (_, body) = post(&app, "/api/rerun", Value::Null).await;
    let after: Progress = serde_json::from_value(body).unwrap();
    assert_eq!(after.pending, 3);
    assert_eq!(after.total, before.total);
}

#[tokio::test]
async fn bad_decisions_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app("loop", tmp.path());

    let missing = json!({
        "form_key": "мати", "scope": "occurrence", "occurrence": {"doc_id": "extra", "offset": 3},
        "lemma": "МАТИ", "pos": "noun", "annotator": "tester"
    });
    let (status, _) = post(&app, "/api/decision", missing).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let foreign = json!({
        "form_key": "панцю", "scope": "global", "lemma": "ПАНЦЯ", "pos": "foreign", "annotator": "tester"
    });
    let (status, body) = post(&app, "/api/decision", foreign).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("language"));

    let (status, _) = post(&app, "/api/decision", json!({"form_key": "мати"})).await;
    assert!(status.is_client_error());
    assert_eq!(log_lines(tmp.path()), 0);
}
