#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

use rankfair::core::fixtures::{generate, FixtureShape};
use rankfair::core::{evaluate_run, EvalOptions, EvalRun, SyntheticEmbedder, TestSet, ViewKind};

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub body: String,
}

pub type Handler = dyn Fn(&Request) -> (u16, String) + Send + Sync;

/// A one-request-per-connection HTTP/1.1 server on a loopback port.
pub struct Stub {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
}

impl Stub {
    pub fn start(handler: impl Fn(&Request) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let seen = requests.clone();
        let handler: Arc<Handler> = Arc::new(handler);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let seen = seen.clone();
                let handler = handler.clone();
                thread::spawn(move || serve(stream, &*handler, &seen));
            }
        });
        Self { url, requests }
    }

    pub fn requests(&self) -> Vec<Request> {
        self.requests.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, handler: &Handler, seen: &Mutex<Vec<Request>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut length = 0;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).unwrap();
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap();
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    let request = Request {
        method,
        path,
        body: String::from_utf8(body).unwrap(),
    };
    let (status, reply) = handler(&request);
    seen.lock().unwrap().push(request);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    );
    let _ = stream.flush();
}

/// A loopback address with nothing listening.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    url
}

pub const GRID_LANGUAGES: [&str; 4] = ["de", "es", "fr", "pt"];

/// Five synthetic models with increasing gender weight.
pub fn grid_models() -> Vec<SyntheticEmbedder> {
    [("dial-a", 0.05), ("dial-b", 0.2), ("dial-c", 0.4), ("dial-d", 0.7), ("dial-e", 1.2)]
        .iter()
        .enumerate()
        .map(|(i, (name, w))| SyntheticEmbedder::new(100 + i as u64, 32, *w).unwrap().with_name(*name))
        .collect()
}

/// Small sets with roughly the per-language paired/neutral proportions of
/// the reference sets.
pub fn grid_sets() -> Vec<TestSet> {
    let shapes = [((12, 1), (45, 4)), ((10, 3), (41, 11)), ((8, 6), (31, 20)), ((9, 4), (34, 18))];
    GRID_LANGUAGES
        .iter()
        .zip(shapes)
        .enumerate()
        .map(|(i, (lang, (q, c)))| generate(&FixtureShape::new(*lang, q, c).with_seed(i as u64 + 1)))
        .collect()
}

/// The 5-model by 4-language grid over masculine corpora.
pub fn grid_runs() -> Vec<EvalRun> {
    let sets = grid_sets();
    let mut runs = Vec::new();
    for model in grid_models() {
        for set in &sets {
            runs.push(evaluate_run(set, ViewKind::MasculineCorpus, &model, EvalOptions::default()).unwrap());
        }
    }
    runs
}
