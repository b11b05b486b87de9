//! The embedding-provider contract and the synthetic gender-dial embedder.
//!
//! # Synthetic embedder
//!
//! A text is split at the last `#` into a lemma and a gender suffix (`f` or
//! `m`); any other text is a bare lemma with no gender. The first `dim - 1`
//! coordinates are a unit Gaussian direction seeded from the lemma, the last
//! coordinate is `+w` for `f`, `-w` for `m` and `0` otherwise, and the whole
//! vector is then L2-normalized.
//!
//! Seeding is fully specified so vectors are bit-identical across platforms:
//!
//! 1. `h = FNV-1a-64(lemma bytes)`
//! 2. `state = splitmix64_finalize(h ^ splitmix64_finalize(seed))`
//! 3. SplitMix64 from `state` yields `u64`s; each becomes a uniform in
//!    `(0, 1]` as `((x >> 11) + 1) * 2^-53`.
//! 4. Box–Muller on consecutive uniform pairs `(u1, u2)` yields
//!    `sqrt(-2 ln u1) * cos(2π u2)` and `sqrt(-2 ln u1) * sin(2π u2)`.
//!
//! All transcendental functions come from `libm`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::retrieval::{Embedding, RetrievalError};

/// Separates the lemma from the gender suffix in synthetic texts.
pub const GENDER_MARKER: char = '#';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Query,
    Passage,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Query => "query",
            Role::Passage => "passage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("text at index {0} is empty")]
    EmptyText(usize),
    #[error("no stored vector for text {0:?}")]
    UnknownText(String),
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("provider dimension is {expected} but a vector has {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("expected {expected} vectors, got {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("invalid vector for {text:?}: {source}")]
    InvalidVector {
        text: String,
        #[source]
        source: RetrievalError,
    },
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Other(String),
}

/// Turns job-title strings into unit vectors.
///
/// Implementations return one vector per text, in input order, each with
/// dimension [`Embedder::dim`].
pub trait Embedder: Send + Sync {
    fn model_name(&self) -> &str;

    fn dim(&self) -> usize;

    fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError>;
}

impl<E: Embedder + ?Sized> Embedder for &E {
    fn model_name(&self) -> &str {
        (**self).model_name()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
        (**self).embed_batch(texts, role)
    }
}

impl<E: Embedder + ?Sized> Embedder for alloc::boxed::Box<E> {
    fn model_name(&self) -> &str {
        (**self).model_name()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn embed_batch(&self, texts: &[&str], role: Role) -> Result<Vec<Embedding>, EmbedError> {
        (**self).embed_batch(texts, role)
    }
}

/// Shared batch preconditions: non-empty batch, no blank text.
pub fn check_batch(texts: &[&str]) -> Result<(), EmbedError> {
    if texts.is_empty() {
        return Err(EmbedError::EmptyBatch);
    }
    match texts.iter().position(|t| t.trim().is_empty()) {
        Some(i) => Err(EmbedError::EmptyText(i)),
        None => Ok(()),
    }
}

/// Validates a provider's output against its declared dimension and count.
pub fn check_output(
    texts: &[&str],
    vectors: &[Embedding],
    dim: usize,
) -> Result<(), EmbedError> {
    if vectors.len() != texts.len() {
        return Err(EmbedError::CountMismatch {
            expected: texts.len(),
            found: vectors.len(),
        });
    }
    match vectors.iter().find(|v| v.dim() != dim) {
        Some(v) => Err(EmbedError::DimMismatch {
            expected: dim,
            found: v.dim(),
        }),
        None => Ok(()),
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        splitmix_finalize(self.state)
    }

    /// Uniform in `(0, 1]`.
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (`bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        // Lemire's multiply-shift; bias is negligible for fixture sizes.
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }
}

fn lemma_stream(seed: u64, lemma: &str) -> SplitMix64 {
    SplitMix64::new(splitmix_finalize(fnv1a64(lemma.as_bytes()) ^ splitmix_finalize(seed)))
}

/// Splits `"lemma#f"` into `("lemma", Some(+1.0))`, `"lemma#m"` into
/// `("lemma", Some(-1.0))`; anything else is a bare lemma.
pub fn split_gender_marker(text: &str) -> (&str, f64) {
    match text.rsplit_once(GENDER_MARKER) {
        Some((lemma, "f")) => (lemma, 1.0),
        Some((lemma, "m")) => (lemma, -1.0),
        _ => (text, 0.0),
    }
}

/// The deterministic gender-dial vector for `text`.
pub fn synthetic_embed(
    seed: u64,
    text: &str,
    dim: usize,
    gender_weight: f64,
) -> Result<Embedding, EmbedError> {
    if dim < 2 {
        return Err(EmbedError::Config(alloc::format!(
            "synthetic dimension must be at least 2, got {dim}"
        )));
    }
    if !(gender_weight >= 0.0 && gender_weight.is_finite()) {
        return Err(EmbedError::Config(alloc::format!(
            "gender weight must be finite and non-negative, got {gender_weight}"
        )));
    }
    let (lemma, sign) = split_gender_marker(text);
    let mut rng = lemma_stream(seed, lemma);
    let mut values = Vec::with_capacity(dim);
    while values.len() < dim - 1 {
        let r = libm::sqrt(-2.0 * libm::log(rng.next_unit()));
        let theta = core::f64::consts::TAU * rng.next_unit();
        values.push(r * libm::cos(theta));
        if values.len() < dim - 1 {
            values.push(r * libm::sin(theta));
        }
    }
    let norm = libm::sqrt(values.iter().map(|v| v * v).sum::<f64>());
    for v in &mut values {
        *v /= norm;
    }
    values.push(sign * gender_weight);
    Embedding::new(values).map_err(|source| EmbedError::InvalidVector {
        text: text.to_string(),
        source,
    })
}

/// [`synthetic_embed`] behind the [`Embedder`] contract. With
/// `gender_weight = 0` it is gender-blind on `#f`/`#m` texts.
#[derive(Debug, Clone)]
pub struct SyntheticEmbedder {
    name: String,
    seed: u64,
    dim: usize,
    gender_weight: f64,
}

impl SyntheticEmbedder {
    pub fn new(seed: u64, dim: usize, gender_weight: f64) -> Result<Self, EmbedError> {
        // validates parameters once
        synthetic_embed(seed, "probe", dim, gender_weight)?;
        Ok(Self {
            name: alloc::format!("synthetic(seed={seed},weight={gender_weight},dim={dim})"),
            seed,
            dim,
            gender_weight,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gender_weight(&self) -> f64 {
        self.gender_weight
    }
}

impl Embedder for SyntheticEmbedder {
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
            .map(|t| synthetic_embed(self.seed, t, self.dim, self.gender_weight))
            .collect()
    }
}
