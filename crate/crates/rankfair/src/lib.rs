//! File formats, embedding providers, the dataset builder and the `rankfair`
//! command line on top of [`rankfair_core`].

#![warn(missing_debug_implementations, rust_2018_idioms)]

pub mod builder;
pub mod cli;
pub mod error;
pub mod matrix;
pub mod provider;
pub mod render;
pub mod strip;
pub mod testset_io;

pub use error::Error;
pub use rankfair_core as core;
