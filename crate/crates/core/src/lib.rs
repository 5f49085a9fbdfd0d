//! Chained per-time-span skip-gram embeddings and self-similarity drift detection.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the parallel trainer and the
//! command line live in the `semdrift` crate.
//!
//! Pipeline, in order:
//!
//! 1. [`corpus`]: tokenize documents and bucket them into fixed-width year spans, or
//!    synthesize a corpus with a planted sense shift.
//! 2. [`vocab`]: one vocabulary over all spans, plus the smoothed unigram table used for
//!    negative sampling.
//! 3. [`sgns`]: skip-gram with negative sampling on one span, starting from given matrices.
//! 4. [`chrono`]: train every span, each initialized from the previously trained one.
//! 5. [`shift`]: cosine self-similarity between consecutive spans, a random-sample baseline
//!    band, and drop detection.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod chrono;
pub mod corpus;
mod error;
mod math;
pub mod rng;
pub mod sgns;
pub mod shift;
pub mod vocab;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
