use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use sift_core::context::{build_bundle, SourceIndex, DEFAULT_EXTENSIONS};
use sift_core::ingest::{load_report, WarningKind};
use sift_core::par::Execution;
use sift_core::verifier::{
    build_input, verify_all, verify_warning, BackendError, Completion, CompletionBackend, CompletionRequest,
    CompletionResult, HttpBackend, HttpConfig, RecordingBackend, ReplayBackend, VerifierConfig,
};
use sift_core::{ContextBundle, Prediction, Provenance, Warning};

fn figs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/figs")
}

fn fig(name: &str) -> (Warning, ContextBundle) {
    let idx = SourceIndex::build(&figs(), DEFAULT_EXTENSIONS, Execution::Sequential).unwrap();
    let w = load_report(&figs().join("report.json"), "figs")
        .unwrap()
        .into_iter()
        .find(|w| w.file.starts_with(name))
        .unwrap();
    let b = build_bundle(&w, &idx).unwrap();
    (w, b)
}

/// Answers every request with the same fixed beam.
struct Fixed(Vec<&'static str>);

impl CompletionBackend for Fixed {
    fn tag(&self) -> &str {
        "fixed"
    }
    fn complete(&self, r: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        Ok(CompletionResult {
            texts: self
                .0
                .iter()
                .take(r.beam_size)
                .map(|t| Completion { text: t.to_string(), score: 0.5 })
                .collect(),
            backend: "fixed".into(),
        })
    }
}

struct Failing;

impl CompletionBackend for Failing {
    fn tag(&self) -> &str {
        "failing"
    }
    fn complete(&self, _: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        Err(BackendError::Http { attempts: 1, message: "refused".into() })
    }
}

#[test]
fn thirty_five_requests_per_null_deref_warning() {
    let (w, b) = fig("fig6");
    let rec = RecordingBackend::new(Fixed(vec!["x", "y", "z", "u", "v"]));
    let v = verify_warning(&w, &b, &rec, &VerifierConfig::default()).unwrap();
    let reqs = rec.requests();
    assert_eq!(reqs.len(), 7);
    assert_eq!(reqs.iter().map(|r| r.beam_size).sum::<usize>(), 35);
    assert_eq!(v.predicted, Prediction::FalsePositive);
    assert_eq!(v.provenance, Provenance::NoSignal);
    assert_eq!(v.score, 0.0);
}

#[test]
fn fig6_null_check_completion_is_legitimate() {
    let (w, b) = fig("fig6");
    let key = sift_core::verifier::replay_key(&build_input(&b, "if ("), "if (");
    let table = serde_json::json!({
        key: [
            {"text": "disk == null) {", "score": -0.2},
            {"text": "disk.freeCapacity < replicaSize) {", "score": -0.9}
        ]
    });
    let replay = ReplayBackend::from_json(table.to_string().as_bytes()).unwrap();
    let v = verify_warning(&w, &b, &replay, &VerifierConfig::default()).unwrap();
    assert_eq!(v.predicted, Prediction::Legitimate);
    assert_eq!(v.provenance, Provenance::SignalHit { prompt: 0, beam: 0 });
    assert!((v.score - 1.0 / 35.0).abs() < 1e-12);
    assert_eq!(replay.misses(), 6);
}

#[test]
fn chained_call_is_kept_without_queries() {
    let (w, b) = fig("fig5");
    assert!(b.is_chained_call);
    let rec = RecordingBackend::new(Fixed(vec![]));
    let v = verify_warning(&w, &b, &rec, &VerifierConfig::default()).unwrap();
    assert_eq!(v.predicted, Prediction::Legitimate);
    assert_eq!(v.provenance, Provenance::ChainedFallback);
    assert_eq!(v.score, 1.0);
    assert!(rec.requests().is_empty());
}

#[test]
fn backend_failure_leaves_warning_unresolved() {
    let (w, b) = fig("fig6");
    let bundles: HashMap<_, _> = [(w.id.clone(), b)].into_iter().collect();
    let out = verify_all(std::slice::from_ref(&w), &bundles, &Failing, &VerifierConfig::default(), Execution::Sequential);
    assert!(out.verdicts.is_empty());
    assert_eq!(out.unresolved.len(), 1);
    assert_eq!(out.unresolved[0].warning_id, w.id);
}

#[test]
fn other_kinds_are_unresolved_not_dropped() {
    let w = Warning::new(WarningKind::Other("THREAD_SAFETY_VIOLATION".into()), "A.java", 3, None, "m", "race", "r");
    let b = ContextBundle {
        warning_id: w.id.clone(),
        local_context: String::new(),
        nonlocal_contexts: vec![],
        is_chained_call: false,
        target_in_local: false,
    };
    let bundles: HashMap<_, _> = [(w.id.clone(), b)].into_iter().collect();
    let out = verify_all(std::slice::from_ref(&w), &bundles, &Fixed(vec![]), &VerifierConfig::default(), Execution::Sequential);
    assert_eq!(out.unresolved.len(), 1);
    assert!(out.unresolved[0].reason.contains("unsupported kind"));
}

fn read_request(stream: &mut std::net::TcpStream) -> (String, String) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut head = String::new();
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if line == "\r\n" || line.is_empty() {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        head.push_str(&line);
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    (head, String::from_utf8(body).unwrap())
}

fn respond(stream: &mut std::net::TcpStream, status: &str, body: &str) {
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
}

#[test]
fn http_backend_round_trip_with_retry() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(AtomicUsize::new(0));
    let seen2 = Arc::clone(&seen);
    let server = thread::spawn(move || {
        let mut captured = None;
        for stream in listener.incoming().take(2) {
            let mut s = stream.unwrap();
            let (head, body) = read_request(&mut s);
            if seen2.fetch_add(1, Ordering::SeqCst) == 0 {
                respond(&mut s, "503 Service Unavailable", "{}");
            } else {
                captured = Some((head, body));
                respond(
                    &mut s,
                    "200 OK",
                    r#"{"completions":[{"text":"a","score":0.1},{"text":"b","score":0.9},{"text":"c","score":0.5}]}"#,
                );
            }
        }
        captured.unwrap()
    });

    let mut cfg = HttpConfig::new(format!("http://{addr}/complete"));
    cfg.token = Some("s3cret".into());
    cfg.retries = 1;
    cfg.timeout = Duration::from_secs(5);
    let backend = HttpBackend::new(cfg);
    let req = CompletionRequest {
        context: "int x;\n    if (".into(),
        prompt: "if (".into(),
        beam_size: 2,
        max_tokens: 16,
    };
    let res = backend.complete(&req).unwrap();
    assert_eq!(res.texts.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), ["b", "c"]);
    assert_eq!(res.backend, "http");

    let (head, body) = server.join().unwrap();
    assert!(head.to_ascii_lowercase().contains("authorization: bearer s3cret"));
    let sent: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(sent, serde_json::json!({"context": "int x;\n    if (", "prompt": "if (", "beam_size": 2, "max_tokens": 16}));
    assert_eq!(seen.load(Ordering::SeqCst), 2);
}

#[test]
fn http_backend_gives_up_after_retries() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        for stream in listener.incoming().take(3) {
            let mut s = stream.unwrap();
            read_request(&mut s);
            respond(&mut s, "500 Internal Server Error", "{}");
        }
    });
    let mut cfg = HttpConfig::new(format!("http://{addr}/"));
    cfg.retries = 2;
    let err = HttpBackend::new(cfg)
        .complete(&CompletionRequest { context: "c".into(), prompt: "p".into(), beam_size: 5, max_tokens: 8 })
        .unwrap_err();
    assert!(matches!(err, BackendError::Http { attempts: 3, .. }), "{err}");
    server.join().unwrap();
}
