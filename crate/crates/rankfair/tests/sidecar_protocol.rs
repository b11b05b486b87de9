mod common;

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use common::{dead_url, fixture, Request, Stub};
use rankfair::core::{EmbedError, Embedder, Role};
use rankfair::provider::{CachedEmbedder, HttpEmbedder, ProviderOptions, ProviderSpec, ENDPOINT_ENV};

fn golden(name: &str) -> String {
    fs::read_to_string(fixture(&format!("sidecar/{name}"))).unwrap()
}

fn json_of(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

/// Serves the golden info, and echoes a deterministic vector per text.
fn echo_sidecar(request: &Request) -> (u16, String) {
    match (request.method.as_str(), request.path.as_str()) {
        ("GET", "/v1/info") => (200, golden("info_response.json")),
        ("GET", "/v1/health") => (200, "{}".into()),
        ("POST", "/v1/embed") => {
            let body = json_of(&request.body);
            let vectors: Vec<Value> = body["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| {
                    let n = t.as_str().unwrap().len() as f64;
                    json!([n, 1.0, if body["role"] == "query" { 0.5 } else { -0.5 }])
                })
                .collect();
            (200, json!({"model": "stub-encoder", "dim": 3, "vectors": vectors}).to_string())
        }
        _ => (404, "{\"error\":\"not found\"}".into()),
    }
}

fn connect(url: &str, batch: usize) -> Result<HttpEmbedder, EmbedError> {
    HttpEmbedder::connect(url, Duration::from_secs(5), batch)
}

#[test]
fn golden_request_and_response() {
    let stub = Stub::start(|r| match r.path.as_str() {
        "/v1/info" => (200, golden("info_response.json")),
        _ => (200, golden("embed_response.json")),
    });
    let client = connect(&stub.url, 64).unwrap();
    assert_eq!(client.model_name(), "stub-encoder");
    assert_eq!(client.dim(), 3);
    let vectors = client.embed_batch(&["abogada", "abogado"], Role::Query).unwrap();
    assert_eq!(vectors[0].as_slice(), &[0.6, 0.8, 0.0]);
    assert_eq!(vectors[1].as_slice(), &[0.0, 0.0, 1.0]);

    let requests = stub.requests();
    assert_eq!(requests.len(), 2);
    assert_eq!((requests[0].method.as_str(), requests[0].path.as_str()), ("GET", "/v1/info"));
    assert_eq!((requests[1].method.as_str(), requests[1].path.as_str()), ("POST", "/v1/embed"));
    assert_eq!(json_of(&requests[1].body), json_of(&golden("embed_request.json")));
}

#[test]
fn order_role_and_determinism() {
    let stub = Stub::start(echo_sidecar);
    let client = connect(&stub.url, 64).unwrap();
    let texts = ["a", "bbbb", "cc"];
    let first = client.embed_batch(&texts, Role::Passage).unwrap();
    let again = client.embed_batch(&texts, Role::Passage).unwrap();
    assert_eq!(first, again);
    // longer text, larger first coordinate: order is kept
    assert!(first[1].as_slice()[0] > first[2].as_slice()[0]);
    assert!(first[2].as_slice()[0] > first[0].as_slice()[0]);
    assert!(first[0].as_slice()[2] < 0.0);
    let query = client.embed_batch(&["a"], Role::Query).unwrap();
    assert!(query[0].as_slice()[2] > 0.0);
    for v in &first {
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
    let bodies: Vec<Value> = stub.requests().iter().skip(1).map(|r| json_of(&r.body)).collect();
    assert_eq!(bodies[0], json!({"texts": ["a", "bbbb", "cc"], "role": "passage"}));
    assert_eq!(bodies[2]["role"], "query");
}

#[test]
fn large_batches_are_chunked_in_order() {
    let stub = Stub::start(echo_sidecar);
    let client = connect(&stub.url, 2).unwrap();
    let texts = ["a", "bb", "ccc", "dddd", "eeeee"];
    let vectors = client.embed_batch(&texts, Role::Passage).unwrap();
    assert_eq!(vectors.len(), 5);
    let embeds: Vec<Value> = stub
        .requests()
        .iter()
        .filter(|r| r.path == "/v1/embed")
        .map(|r| json_of(&r.body)["texts"].clone())
        .collect();
    assert_eq!(embeds, vec![json!(["a", "bb"]), json!(["ccc", "dddd"]), json!(["eeeee"])]);
    let firsts: Vec<f64> = vectors.iter().map(|v| v.as_slice()[0] / v.as_slice()[1]).collect();
    for (i, f) in firsts.iter().enumerate() {
        assert!((f - (i + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn non_200_is_a_status_error() {
    let stub = Stub::start(|r| match r.path.as_str() {
        "/v1/info" => (200, golden("info_response.json")),
        _ => (503, "{\"error\":\"loading\"}".into()),
    });
    let client = connect(&stub.url, 8).unwrap();
    match client.embed_batch(&["x"], Role::Query) {
        Err(EmbedError::Status { status: 503, body }) => assert!(body.contains("loading")),
        other => panic!("{other:?}"),
    }
    let loading = Stub::start(|_| (503, "{}".into()));
    assert!(matches!(connect(&loading.url, 8), Err(EmbedError::Status { status: 503, .. })));
}

#[test]
fn malformed_replies_are_rejected() {
    type Check = fn(&EmbedError) -> bool;
    let cases: Vec<(&str, Check)> = vec![
        ("{\"model\":\"stub-encoder\",\"dim\":3,\"vectors\":[[1,0,0]]}", |e| matches!(e, EmbedError::CountMismatch { .. })),
        ("{\"model\":\"stub-encoder\",\"dim\":3,\"vectors\":[[1,0],[0,1]]}", |e| matches!(e, EmbedError::DimMismatch { .. })),
        ("{\"model\":\"stub-encoder\",\"dim\":4,\"vectors\":[[1,0,0,0],[0,1,0,0]]}", |e| matches!(e, EmbedError::DimMismatch { .. })),
        ("{\"model\":\"other\",\"dim\":3,\"vectors\":[[1,0,0],[0,1,0]]}", |e| matches!(e, EmbedError::Malformed(_))),
        ("{\"model\":\"stub-encoder\",\"dim\":3,\"vectors\":[[0,0,0],[0,1,0]]}", |e| matches!(e, EmbedError::InvalidVector { .. })),
        ("not json", |e| matches!(e, EmbedError::Malformed(_))),
    ];
    for (reply, check) in cases {
        let reply = reply.to_string();
        let stub = Stub::start(move |r| match r.path.as_str() {
            "/v1/info" => (200, golden("info_response.json")),
            _ => (200, reply.clone()),
        });
        let err = connect(&stub.url, 8).unwrap().embed_batch(&["a", "b"], Role::Query).unwrap_err();
        assert!(check(&err), "{err:?}");
    }
}

#[test]
fn unreachable_endpoint() {
    assert!(matches!(connect(&dead_url(), 8), Err(EmbedError::Unreachable(_))));
}

#[test]
fn empty_batches_never_reach_the_wire() {
    let stub = Stub::start(echo_sidecar);
    let client = connect(&stub.url, 8).unwrap();
    assert!(client.embed_batch(&[], Role::Query).is_err());
    assert!(client.embed_batch(&["ok", "  "], Role::Query).is_err());
    assert_eq!(stub.requests().len(), 1);
}

#[test]
fn cache_calls_the_sidecar_once_per_text() {
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let stub = Stub::start(move |r| {
        if r.path == "/v1/embed" {
            counter.fetch_add(json_of(&r.body)["texts"].as_array().unwrap().len(), Ordering::SeqCst);
        }
        echo_sidecar(r)
    });
    let dir = tempfile::tempdir().unwrap();
    let first = CachedEmbedder::open(connect(&stub.url, 8).unwrap(), dir.path()).unwrap();
    let a = first.embed_batch(&["abogada", "juez", "abogada"], Role::Query).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 2);
    let reopened = CachedEmbedder::open(connect(&stub.url, 8).unwrap(), dir.path()).unwrap();
    let b = reopened.embed_batch(&["juez", "abogada"], Role::Query).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 2);
    assert_eq!(a[1], b[0]);
    assert!(dir.path().join("stub-encoder.query.jsonl").exists());
}

#[test]
fn endpoint_env_overrides_spec() {
    let stub = Stub::start(echo_sidecar);
    let spec: ProviderSpec = format!("http:{}", dead_url()).parse().unwrap();
    std::env::set_var(ENDPOINT_ENV, &stub.url);
    let opened = spec.open(&ProviderOptions::default());
    let ignored = spec.open(&ProviderOptions { use_env: false, ..ProviderOptions::default() });
    std::env::remove_var(ENDPOINT_ENV);
    assert_eq!(opened.unwrap().model_name(), "stub-encoder");
    assert!(ignored.is_err());
}
