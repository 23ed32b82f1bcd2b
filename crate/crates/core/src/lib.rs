//! M-channel critically sampled spectral graph filter banks.
//!
//! This crate implements analysis/synthesis filter banks for graph signals in
//! which the decimation happens in the *graph frequency domain* rather than by
//! deleting vertices. A signal is transformed into the spectral domain, filtered
//! per channel, and folded down to `N/M` coefficients by block index arithmetic;
//! the synthesis side mirrors the structure. Because sampling acts on spectral
//! indices, the construction works on arbitrary undirected graphs and with any
//! symmetric variation operator (combinatorial or normalized Laplacian, or the
//! adjacency matrix), and the subband coefficients retain the spectral layout of
//! the input.
//!
//! The main pieces:
//!
//! - [`graph`]: graph representation, edge-list parsing, generators, variation
//!   operators.
//! - [`spectral`]: dense symmetric eigendecomposition, graph Fourier transform,
//!   spectral filtering.
//! - [`sampling`]: frequency-domain down/upsampling by index folding.
//! - [`design`]: filter kernels — ideal (brick-wall) sets, classical
//!   linear-phase sets (DCT block transform, lapped orthogonal transform), and
//!   their conversion onto a graph spectrum through a frequency warp.
//! - [`bank`]: the M-channel transform itself plus machine-precision perfect
//!   reconstruction and orthogonality checks, and 2-channel octave cascades.
//! - [`denoise`]: a seeded denoising harness with per-subband soft thresholding
//!   and SNR tables.
//!
//! ```
//! use sgfb_core::graph::{Graph, VariationKind};
//! use sgfb_core::spectral::{SpectralBasis, GraphSignal};
//! use sgfb_core::design::ideal_kernels;
//! use sgfb_core::bank::FilterBank;
//! use std::sync::Arc;
//!
//! let graph = Graph::path(16).unwrap();
//! let basis = Arc::new(SpectralBasis::new(&graph, VariationKind::CombinatorialLaplacian).unwrap());
//! let bank = FilterBank::new(basis, ideal_kernels(16, 4).unwrap()).unwrap();
//!
//! let f = GraphSignal::new((0..16).map(|i| (i as f64).sin()).collect::<Vec<_>>());
//! let coeffs = bank.analyze(&f).unwrap();
//! let fhat = bank.synthesize(&coeffs).unwrap();
//! let err: f64 = f.values()
//!     .iter()
//!     .zip(fhat.values())
//!     .map(|(a, b)| (a - b).powi(2))
//!     .sum::<f64>()
//!     .sqrt();
//! assert!(err < 1e-10);
//! ```

use thiserror::Error;

// Re-exported because public signatures use its types.
pub use ndarray;

pub mod bank;
pub mod denoise;
pub mod design;
pub mod graph;
pub mod sampling;
pub mod spectral;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge list parse error at line {line}: {msg}")]
    GraphFormat { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length {n} is not divisible by {m} channels")]
    NotDivisible { n: usize, m: usize },

    #[error("channel count {0} must be even and at least 2")]
    BadChannelCount(usize),

    #[error("could not generate a connected graph after {0} attempts")]
    Connectivity(usize),

    #[error("normalized variation operator undefined: vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("filter design error: {0}")]
    Design(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dense size limit exceeded: n = {n}, limit = {limit}")]
    DenseLimit { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
