//! Multiscale local scales of sampled functions, curves and surfaces.
//!
//! The transform `S(x, t) = ψ_t * μ(x)` with `ψ_t = t ∂_t K_t` (Gaussian
//! `K_t`) measures how far a function or a set deviates from affine at
//! location `x` and scale `t`. Local maxima of `|S|` along `τ = log_a t`
//! are the local scales at `x`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beta;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod scalespace;
pub mod signal;
pub mod surface_scales;
pub mod synth;

pub use error::{Error, Result};
