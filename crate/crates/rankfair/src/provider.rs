//! Embedding providers: a JSONL vector store, the synthetic gender-dial
//! embedder, an HTTP client for the embedding sidecar, and a content-keyed
//! on-disk cache that wraps any of them.
//!
//! Sidecar wire protocol:
//!
//! ```text
//! GET  /v1/info   -> {"model": string, "dim": int}
//! GET  /v1/health -> 200 once the model is loaded
//! POST /v1/embed  {"texts": [string, ...], "role": "query" | "passage"}
//!                 -> {"model": string, "dim": int, "vectors": [[float, ...], ...]}
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rankfair_core::embed::{check_batch, check_output};
use rankfair_core::{EmbedError, Embedder, Embedding, Role, SyntheticEmbedder};

/// Overrides the endpoint of `http:` providers when set.
pub const ENDPOINT_ENV: &str = "RANKFAIR_EMBED_ENDPOINT";

pub const DEFAULT_SYNTHETIC_DIM: usize = 384;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("invalid provider spec {spec:?}: {reason}")]
    Spec { spec: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Store {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// How to obtain vectors: `file:<path>`, `synthetic:<seed>,<weight>[,<dim>]`
/// or `http:<url>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    File { path: PathBuf },
    Synthetic { seed: u64, gender_weight: f64, dim: usize },
    Http { endpoint: String },
}

impl FromStr for ProviderSpec {
    type Err = ProviderError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| ProviderError::Spec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<value>"))?;
        match kind {
            "file" if !rest.is_empty() => Ok(ProviderSpec::File { path: rest.into() }),
            "http" if !rest.is_empty() => {
                // `http:http://host` and `http:host:port` both accepted
                let endpoint = if rest.starts_with("http://") || rest.starts_with("https://") {
                    rest.to_string()
                } else {
                    format!("http:{rest}")
                };
                Ok(ProviderSpec::Http { endpoint })
            }
            "synthetic" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                if !(2..=3).contains(&parts.len()) {
                    return Err(bad("expected synthetic:<seed>,<weight>[,<dim>]"));
                }
                let seed = parts[0].parse().map_err(|_| bad("seed is not a u64"))?;
                let gender_weight: f64 = parts[1].parse().map_err(|_| bad("weight is not a number"))?;
                let dim = match parts.get(2) {
                    Some(d) => d.parse().map_err(|_| bad("dim is not an integer"))?,
                    None => DEFAULT_SYNTHETIC_DIM,
                };
                SyntheticEmbedder::new(seed, dim, gender_weight).map_err(|e| bad(&e.to_string()))?;
                Ok(ProviderSpec::Synthetic {
                    seed,
                    gender_weight,
                    dim,
                })
            }
            _ => Err(bad("kind must be file, synthetic or http")),
        }
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderSpec::File { path } => write!(f, "file:{}", path.display()),
            ProviderSpec::Synthetic {
                seed,
                gender_weight,
                dim,
            } => write!(f, "synthetic:{seed},{gender_weight},{dim}"),
            ProviderSpec::Http { endpoint } => write!(f, "http:{endpoint}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProviderOptions {
    /// Wraps the provider in a [`CachedEmbedder`] rooted here.
    pub cache_dir: Option<PathBuf>,
    pub timeout: Duration,
    /// Texts per sidecar request.
    pub batch_size: usize,
    /// Honor [`ENDPOINT_ENV`].
    pub use_env: bool,
}

impl Default for ProviderOptions {
    fn default() -> Self {
        Self {
            cache_dir: None,
            timeout: Duration::from_secs(60),
            batch_size: 64,
            use_env: true,
        }
    }
}

impl ProviderSpec {
    pub fn open(&self, options: &ProviderOptions) -> Result<Box<dyn Embedder>, ProviderError> {
        let inner: Box<dyn Embedder> = match self {
            ProviderSpec::File { path } => Box::new(FileEmbedder::open(path)?),
            ProviderSpec::Synthetic {
                seed,
                gender_weight,
                dim,
            } => Box::new(SyntheticEmbedder::new(*seed, *dim, *gender_weight)?),
            ProviderSpec::Http { endpoint } => {
                let endpoint = match std::env::var(ENDPOINT_ENV) {
                    Ok(env) if options.use_env && !env.trim().is_empty() => env,
                    _ => endpoint.clone(),
                };
                Box::new(HttpEmbedder::connect(
                    &endpoint,
                    options.timeout,
                    options.batch_size,
                )?)
            }
        };
        match &options.cache_dir {
            Some(dir) => Ok(Box::new(CachedEmbedder::open(inner, dir)?)),
            None => Ok(inner),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreEntry {
    text: String,
    vector: Vec<f64>,
}

/// Vectors looked up from a JSONL store of `{"text", "vector"}` lines.
#[derive(Debug)]
pub struct FileEmbedder {
    name: String,
    dim: usize,
    vectors: HashMap<String, Embedding>,
}

impl FileEmbedder {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| ProviderError::Io {
            path: path.into(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into());
        Self::from_reader(name, path, file)
    }

    fn from_reader<R: Read>(name: String, path: &Path, reader: R) -> Result<Self, ProviderError> {
        let err = |line, message: String| ProviderError::Store {
            path: path.into(),
            line,
            message,
        };
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| err(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: StoreEntry =
                serde_json::from_str(&line).map_err(|e| err(i + 1, e.to_string()))?;
            let expected = *dim.get_or_insert(entry.vector.len());
            if entry.vector.len() != expected {
                return Err(err(i + 1, format!("dimension {} != {expected}", entry.vector.len())));
            }
            let vector = Embedding::new(entry.vector).map_err(|e| err(i + 1, e.to_string()))?;
            if vectors.insert(entry.text.clone(), vector).is_some() {
                return Err(err(i + 1, format!("duplicate text {:?}", entry.text)));
            }
        }
        let dim = dim.ok_or_else(|| err(0, "empty store".into()))?;
        Ok(Self { name, dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Writes a store readable by [`FileEmbedder`].
pub fn write_store<W: Write>(mut writer: W, entries: &[(&str, &Embedding)]) -> std::io::Result<()> {
    for (text, vector) in entries {
        let entry = StoreEntry {
            text: text.to_string(),
            vector: vector.as_slice().to_vec(),
        };
        serde_json::to_writer(&mut writer, &entry)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

impl Embedder for FileEmbedder {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[&str], _role: Role) -> Result<Vec<Embedding>, EmbedError> {
        check_batch(texts)?;
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(*t)
                    .cloned()
                    .ok_or_else(|| EmbedError::UnknownText(t.to_string()))
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct EmbedRequest<'a> {
    pub texts: &'a [&'a str],
    pub role: Role,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub model: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoResponse {
    pub model: String,
    pub dim: usize,
}

/// Client for the embedding sidecar.
#[derive(Debug)]
pub struct HttpEmbedder {
    endpoint: String,
    agent: ureq::Agent,
    info: InfoResponse,
    batch_size: usize,
}

fn transport(e: ureq::Error) -> EmbedError {
    EmbedError::Unreachable(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(
    mut response: ureq::http::Response<ureq::Body>,
) -> Result<T, EmbedError> {
    let status = response.status().as_u16();
    if status != 200 {
        let body = response.body_mut().read_to_string().unwrap_or_default();
        return Err(EmbedError::Status { status, body });
    }
    response
        .body_mut()
        .read_json()
        .map_err(|e| EmbedError::Malformed(e.to_string()))
}

impl HttpEmbedder {
    /// Fetches `/v1/info` to learn the served model and dimension.
    pub fn connect(endpoint: &str, timeout: Duration, batch_size: usize) -> Result<Self, EmbedError> {
        if batch_size == 0 {
            return Err(EmbedError::Config("batch size must be positive".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let endpoint = endpoint.trim_end_matches('/').to_string();
        let response = agent
            .get(format!("{endpoint}/v1/info"))
            .call()
            .map_err(transport)?;
        let info: InfoResponse = read_json(response)?;
        if info.dim == 0 {
            return Err(EmbedError::Malformed("sidecar reports dim 0".into()));
        }
        Ok(Self {
            endpoint,
            agent,
            info,
            batch_size,
        })
    }

    pub fn info(&self) -> &InfoResponse {
        &self.info
    }

    fn embed_chunk(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
        let response = self
            .agent
            .post(format!("{}/v1/embed", self.endpoint))
            .send_json(EmbedRequest { texts, role })
            .map_err(transport)?;
        let body: EmbedResponse = read_json(response)?;
        if body.model != self.info.model {
            return Err(EmbedError::Malformed(format!(
                "served model changed from {:?} to {:?}",
                self.info.model, body.model
            )));
        }
        if body.dim != self.info.dim {
            return Err(EmbedError::DimMismatch {
                expected: self.info.dim,
                found: body.dim,
            });
        }
        if body.vectors.len() != texts.len() {
            return Err(EmbedError::CountMismatch {
                expected: texts.len(),
                found: body.vectors.len(),
            });
        }
        texts
            .iter()
            .zip(body.vectors)
            .map(|(text, values)| {
                if values.len() != self.info.dim {
                    return Err(EmbedError::DimMismatch {
                        expected: self.info.dim,
                        found: values.len(),
                    });
                }
                Embedding::new(values).map_err(|source| EmbedError::InvalidVector {
                    text: text.to_string(),
                    source,
                })
            })
            .collect()
    }
}

impl Embedder for HttpEmbedder {
    fn model_name(&self) -> &str {
        &self.info.model
    }

    fn dim(&self) -> usize {
        self.info.dim
    }

    fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
        check_batch(texts)?;
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            out.extend(self.embed_chunk(chunk, role)?);
        }
        Ok(out)
    }
}

/// SHA-256 of the exact UTF-8 bytes of `text`, hex encoded.
pub fn content_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    content_key: String,
    text: String,
    vector: Vec<f64>,
}

fn shard_name(model: &str, role: Role) -> String {
    let safe: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{safe}.{}.jsonl", role.as_str())
}

/// Memoizes another provider in one JSONL shard per (model, role).
///
/// Reads run concurrently; misses are embedded, appended and inserted under
/// a single writer lock.
#[derive(Debug)]
pub struct CachedEmbedder<E> {
    inner: E,
    dir: PathBuf,
    entries: RwLock<HashMap<(Role, String), Embedding>>,
    writer: Mutex<()>,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn open(inner: E, dir: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|source| ProviderError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut entries = HashMap::new();
        for role in [Role::Query, Role::Passage] {
            let path = dir.join(shard_name(inner.model_name(), role));
            let Ok(file) = File::open(&path) else { continue };
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let err = |message: String| ProviderError::Store {
                    path: path.clone(),
                    line: i + 1,
                    message,
                };
                let line = line.map_err(|e| err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
                if entry.content_key != content_key(&entry.text) {
                    return Err(err("content key does not match text".into()));
                }
                if entry.vector.len() != inner.dim() {
                    return Err(err(format!("cached dimension {} != {}", entry.vector.len(), inner.dim())));
                }
                let vector = Embedding::new(entry.vector).map_err(|e| err(e.to_string()))?;
                entries.insert((role, entry.content_key), vector);
            }
        }
        Ok(Self {
            inner,
            dir,
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
        })
    }

    pub fn cached(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    fn append(&self, role: Role, fresh: &[(&str, String, Embedding)]) -> Result<(), EmbedError> {
        let path = self.dir.join(shard_name(self.inner.model_name(), role));
        let io = |e: std::io::Error| EmbedError::Other(format!("{}: {e}", path.display()));
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        let mut buf = Vec::new();
        for (text, key, vector) in fresh {
            let entry = CacheEntry {
                content_key: key.clone(),
                text: text.to_string(),
                vector: vector.as_slice().to_vec(),
            };
            serde_json::to_writer(&mut buf, &entry).map_err(|e| EmbedError::Other(e.to_string()))?;
            buf.push(b'\n');
        }
        file.write_all(&buf).map_err(io)
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn model_name(&self) -> &str {
        self.inner.model_name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
        check_batch(texts)?;
        let keys: Vec<String> = texts.iter().map(|t| content_key(t)).collect();
        let misses: Vec<(&str, &String)> = {
            let entries = self.entries.read().expect("cache lock");
            let mut seen = HashSet::new();
            texts
                .iter()
                .zip(&keys)
                .filter(|(_, k)| !entries.contains_key(&(role, (*k).clone())) && seen.insert(*k))
                .map(|(t, k)| (*t, k))
                .collect()
        };
        if !misses.is_empty() {
            let miss_texts: Vec<&str> = misses.iter().map(|(t, _)| *t).collect();
            let vectors = self.inner.embed_batch(&miss_texts, role)?;
            check_output(&miss_texts, &vectors, self.inner.dim())?;
            let _guard = self.writer.lock().expect("cache writer lock");
            let mut entries = self.entries.write().expect("cache lock");
            let fresh: Vec<(&str, String, Embedding)> = misses
                .iter()
                .zip(vectors)
                .filter(|((_, k), _)| !entries.contains_key(&(role, (*k).clone())))
                .map(|((t, k), v)| (*t, (*k).clone(), v))
                .collect();
            self.append(role, &fresh)?;
            for (_, key, vector) in fresh {
                entries.insert((role, key), vector);
            }
        }
        let entries = self.entries.read().expect("cache lock");
        Ok(keys
            .into_iter()
            .map(|k| entries[&(role, k)].clone())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn parses_specs() {
        assert_eq!(
            "synthetic:7,0.5".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Synthetic { seed: 7, gender_weight: 0.5, dim: 384 }
        );
        assert_eq!(
            "synthetic:7, 0, 16".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Synthetic { seed: 7, gender_weight: 0.0, dim: 16 }
        );
        assert_eq!(
            "file:/tmp/v.jsonl".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::File { path: "/tmp/v.jsonl".into() }
        );
        assert_eq!(
            "http:http://localhost:8080".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Http { endpoint: "http://localhost:8080".into() }
        );
        assert_eq!(
            "http://localhost:8080".parse::<ProviderSpec>().unwrap(),
            ProviderSpec::Http { endpoint: "http://localhost:8080".into() }
        );
        for bad in ["", "synthetic:1", "synthetic:x,1", "synthetic:1,-2", "synthetic:1,0,1", "grpc:x", "file:"] {
            assert!(bad.parse::<ProviderSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn spec_display_round_trips() {
        for s in ["synthetic:7,0.5,32", "file:a/b.jsonl", "http:http://h:1"] {
            let spec: ProviderSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn file_store_lookup_and_renormalization() {
        let store = "{\"text\":\"abogada\",\"vector\":[3.0,4.0]}\n{\"text\":\"abogado\",\"vector\":[0.0,2.0]}\n{\"text\":\"juez\",\"vector\":[1.0,0.0]}\n";
        let p = FileEmbedder::from_reader("m".into(), Path::new("mem"), store.as_bytes()).unwrap();
        assert_eq!(p.dim(), 2);
        let v = p.embed_batch(&["abogada"], Role::Query).unwrap();
        assert_eq!(v[0].as_slice(), &[0.6, 0.8]);
        assert_eq!(
            p.embed_batch(&["fiscal"], Role::Query),
            Err(EmbedError::UnknownText("fiscal".into()))
        );
    }

    #[test]
    fn file_store_rejects_bad_input() {
        let mixed = "{\"text\":\"a\",\"vector\":[1.0,0.0]}\n{\"text\":\"b\",\"vector\":[1.0]}\n";
        assert!(FileEmbedder::from_reader("m".into(), Path::new("mem"), mixed.as_bytes()).is_err());
        let zero = "{\"text\":\"a\",\"vector\":[0.0,0.0]}\n";
        assert!(FileEmbedder::from_reader("m".into(), Path::new("mem"), zero.as_bytes()).is_err());
        let dup = "{\"text\":\"a\",\"vector\":[1.0]}\n{\"text\":\"a\",\"vector\":[1.0]}\n";
        assert!(FileEmbedder::from_reader("m".into(), Path::new("mem"), dup.as_bytes()).is_err());
        assert!(FileEmbedder::from_reader("m".into(), Path::new("mem"), "".as_bytes()).is_err());
    }

    #[test]
    fn store_round_trip() {
        let synth = SyntheticEmbedder::new(3, 12, 0.4).unwrap();
        let texts = ["a#f", "a#m", "b"];
        let vectors = synth.embed_batch(&texts, Role::Passage).unwrap();
        let entries: Vec<(&str, &Embedding)> = texts.iter().copied().zip(&vectors).collect();
        let mut buf = Vec::new();
        write_store(&mut buf, &entries).unwrap();
        let file = FileEmbedder::from_reader("m".into(), Path::new("mem"), buf.as_slice()).unwrap();
        let again = file.embed_batch(&texts, Role::Passage).unwrap();
        for (a, b) in vectors.iter().zip(&again) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn content_key_is_sha256() {
        assert_eq!(
            content_key("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[derive(Debug)]
    struct Counting {
        inner: SyntheticEmbedder,
        texts_seen: AtomicUsize,
    }

    impl Embedder for Counting {
        fn model_name(&self) -> &str {
            "counting/model"
        }
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
            self.texts_seen.fetch_add(texts.len(), Ordering::SeqCst);
            self.inner.embed_batch(texts, role)
        }
    }

    #[test]
    fn cache_embeds_each_text_once_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let counting = || Counting {
            inner: SyntheticEmbedder::new(1, 8, 0.3).unwrap(),
            texts_seen: AtomicUsize::new(0),
        };
        let cache = CachedEmbedder::open(counting(), dir.path()).unwrap();
        let first = cache.embed_batch(&["x#f", "y", "x#f"], Role::Query).unwrap();
        assert_eq!(first[0], first[2]);
        assert_eq!(cache.inner.texts_seen.load(Ordering::SeqCst), 2);
        cache.embed_batch(&["y", "x#f"], Role::Query).unwrap();
        assert_eq!(cache.inner.texts_seen.load(Ordering::SeqCst), 2);
        // roles are cached separately
        cache.embed_batch(&["y"], Role::Passage).unwrap();
        assert_eq!(cache.inner.texts_seen.load(Ordering::SeqCst), 3);
        assert!(dir.path().join("counting_model.query.jsonl").exists());

        let reopened = CachedEmbedder::open(counting(), dir.path()).unwrap();
        assert_eq!(reopened.cached(), 3);
        let again = reopened.embed_batch(&["x#f", "y", "x#f"], Role::Query).unwrap();
        assert_eq!(reopened.inner.texts_seen.load(Ordering::SeqCst), 0);
        for (a, b) in first.iter().zip(&again) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn corrupt_cache_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let shard = dir.path().join(shard_name("synthetic(seed=1,weight=0,dim=4)", Role::Query));
        fs::write(&shard, "{\"content_key\":\"00\",\"text\":\"a\",\"vector\":[1,0,0,0]}\n").unwrap();
        let inner = SyntheticEmbedder::new(1, 4, 0.0).unwrap();
        assert!(matches!(
            CachedEmbedder::open(inner, dir.path()),
            Err(ProviderError::Store { line: 1, .. })
        ));
    }
}
