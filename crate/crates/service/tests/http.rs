use std::fs;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use comlex::corpus::CorpusIndex;
use comlex::store::{LexiconStore, StoreConfig};
use comlex_service::{router, AppState};

const ABANDON_VERB: &str = r#"(verb :orth "abandon" :subc ((np-pp :pval ("to")) (np)))"#;
const ABANDON_NOUN: &str = r#"(noun :orth "abandon" :features ((countable :pval ("with"))))"#;

fn app(dir: &std::path::Path) -> Router {
    let store = LexiconStore::open(dir, StoreConfig::default()).unwrap();
    let corpus = CorpusIndex::ingest([
        ("a.txt", "The plants will wilt. Wilting happens."),
        ("b.txt", "They abandoned the ship and abandon hope."),
    ])
    .unwrap();
    router(AppState::new(store, Some(corpus)))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn put(app: &Router, text: &str, expected: Option<u64>) -> (StatusCode, Value) {
    call(
        app,
        Method::PUT,
        "/entries",
        Some(json!({ "text": text, "expected_version": expected, "annotator": "elf1" })),
    )
    .await
}

#[tokio::test]
async fn save_then_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = put(&app, ABANDON_VERB, None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 1);
    let (s, _) = put(&app, ABANDON_NOUN, None).await;
    assert_eq!(s, StatusCode::OK);

    let (s, v) = call(&app, Method::GET, "/entries/abandon", None).await;
    assert_eq!(s, StatusCode::OK);
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[0]["pos"], "noun");
    assert_eq!(list[1]["pos"], "verb");
    assert_eq!(list[1]["text"], ABANDON_VERB);

    let (s, v) = call(&app, Method::GET, "/entries/abandon/noun", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 1);

    let (s, v) = call(&app, Method::GET, "/entries/zzz", None).await;
    assert_eq!((s, v), (StatusCode::OK, json!([])));
    let (s, _) = call(&app, Method::GET, "/entries/zzz/verb", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let on_disk = fs::read_to_string(dir.path().join("main.lex")).unwrap();
    assert!(on_disk.lines().any(|l| l == ABANDON_VERB));
}

#[tokio::test]
async fn stale_save_is_409() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    put(&app, ABANDON_VERB, None).await;
    let (s, v) = put(&app, ABANDON_VERB, Some(1)).await;
    assert_eq!((s, v["version"].clone()), (StatusCode::OK, json!(2)));
    let (s, v) = put(&app, ABANDON_VERB, Some(1)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["current"], 2);
}

#[tokio::test]
async fn invalid_save_is_422_and_leaves_file() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    put(&app, ABANDON_VERB, None).await;
    let before = fs::read(dir.path().join("main.lex")).unwrap();
    let (s, v) = put(&app, r#"(verb :orth "jab" :subc ((pp)))"#, None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["diagnostics"][0]["code"], "MissingPval");
    assert_eq!(fs::read(dir.path().join("main.lex")).unwrap(), before);

    let (s, v) = put(&app, "(verb :orth", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["span"].is_object());
}

#[tokio::test]
async fn validate_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = call(&app, Method::POST, "/validate", Some(json!({ "text": ABANDON_VERB }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["ok"], true);
    assert_eq!(v["canonical"], ABANDON_VERB);
    let (_, v) = call(&app, Method::POST, "/validate", Some(json!({ "text": r#"(verb :orth "x" :subc ((nope)))"# }))).await;
    assert_eq!(v["ok"], false);
    assert_eq!(v["diagnostics"][0]["code"], "UnknownFrame");
    assert!(!dir.path().join("main.lex").exists());
}

#[tokio::test]
async fn frames() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = call(&app, Method::GET, "/frames", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_array().unwrap().iter().any(|f| f["name"] == "to-inf-sc"));
    let (s, v) = call(&app, Method::GET, "/frames/to-inf-rs", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v[0]["text"].as_str().unwrap().contains("(:raising subject)"));
    assert!(!v[0]["examples"].as_array().unwrap().is_empty());
    let (s, _) = call(&app, Method::GET, "/frames/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn kwic_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = call(&app, Method::GET, "/kwic?forms=wilt&window=10&limit=5", None).await;
    assert_eq!(s, StatusCode::OK);
    let lines = v.as_array().unwrap();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["match"], "wilt");
    let (_, v) = call(&app, Method::GET, "/kwic?forms=abandon,abandoned", None).await;
    assert_eq!(v.as_array().unwrap().len(), 2);
    let (_, v) = call(&app, Method::GET, "/kwic?forms=", None).await;
    assert_eq!(v, json!([]));
    let (s, _) = call(&app, Method::GET, "/kwic?forms=wilt&limit=0", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn kwic_without_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let store = LexiconStore::open(dir.path(), StoreConfig::default()).unwrap();
    let app = router(AppState::new(store, None));
    let (s, _) = call(&app, Method::GET, "/kwic?forms=wilt", None).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
}

fn inst(id: &str, frame: &str, labels: &str, flag: Option<&str>) -> Value {
    json!({
        "id": id, "lemma": "abandon", "pos": "verb", "frame": frame, "preps": [],
        "labels": labels.chars().map(|c| if c == 'a' { "argument" } else { "adjunct" }).collect::<Vec<_>>(),
        "flag": flag, "annotator": "elf1", "sentence": "They abandoned it."
    })
}

#[tokio::test]
async fn instances_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    put(&app, ABANDON_VERB, None).await;

    let gold = json!({ "store": "gold", "instances": [inst("1", "np", "a", None), inst("2", "intrans", "", Some("difficult"))] });
    let (s, v) = call(&app, Method::POST, "/instances", Some(gold)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["appended"], 2);

    let (s, v) = call(&app, Method::GET, "/reports/coverage?mode=complements-only", None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let union = v["rows"].as_array().unwrap().last().unwrap().clone();
    assert_eq!((union["covered"].clone(), union["total"].clone()), (json!(1), json!(2)));

    let (_, v) = call(&app, Method::GET, "/reports/coverage?mode=complements-only&exclude_flagged=true", None).await;
    assert_eq!(v["rows"][0]["total"], 1);
    let (s, _) = call(&app, Method::GET, "/reports/coverage?mode=bogus", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, Method::GET, "/reports/coverage?mode=full-pdir&gold=empty", None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    let other = json!({ "store": "elf2", "instances": [inst("1", "np", "a", None), inst("2", "intrans", "j", None)] });
    call(&app, Method::POST, "/instances", Some(other)).await;
    let (s, v) = call(&app, Method::GET, "/reports/agreement?a=gold&b=elf2", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["overall_rate"], 0.5);
    assert_eq!(v["unflagged_rate"], 1.0);

    // Flag survives the store round trip.
    let tsv = fs::read_to_string(dir.path().join("gold.tsv")).unwrap();
    assert!(tsv.contains("difficult"));

    let dup = json!({ "store": "gold", "instances": [inst("1", "np", "a", None)] });
    let (s, _) = call(&app, Method::POST, "/instances", Some(dup)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn reads_during_slow_save() {
    use std::sync::mpsc;
    use std::time::{Duration, Instant};

    let dir = tempfile::tempdir().unwrap();
    let store = LexiconStore::open(dir.path(), StoreConfig::default()).unwrap();
    let state = AppState::new(store, None);
    let app = router(state.clone());
    put(&app, ABANDON_NOUN, None).await;

    let (started_tx, started_rx) = mpsc::channel::<()>();
    let started_tx = std::sync::Mutex::new(started_tx);
    state.store.set_fault_hook(Some(Box::new(move |stage| {
        if stage == comlex::store::WriteStage::MidWrite {
            let _ = started_tx.lock().unwrap().send(());
            std::thread::sleep(Duration::from_millis(400));
        }
        Ok(())
    })));
    let writer = {
        let app = app.clone();
        tokio::spawn(async move { put(&app, ABANDON_VERB, None).await })
    };
    tokio::task::spawn_blocking(move || started_rx.recv().unwrap()).await.unwrap();
    let t = Instant::now();
    let (s, v) = call(&app, Method::GET, "/entries/abandon", None).await;
    assert!(t.elapsed() < Duration::from_millis(300), "read blocked for {:?}", t.elapsed());
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 1);
    let (s, _) = writer.await.unwrap();
    assert_eq!(s, StatusCode::OK);
    let (_, v) = call(&app, Method::GET, "/entries/abandon", None).await;
    assert_eq!(v.as_array().unwrap().len(), 2);
}
