//! Invariant densities and metric entropies of piecewise-affine expanding
//! maps on polygonal planar domains.
//!
//! The library discretizes the transfer (Perron–Frobenius) operator of a
//! piecewise-affine map by Ulam's method: the domain is cut into grid cells,
//! and transition weights are computed by *exact* convex-polygon clipping
//! rather than sampling, so the resulting row-stochastic matrix carries no
//! Monte Carlo noise. Stationary densities come out of power iteration,
//! entropies out of the Jacobian integral, and continuity of both in a map
//! parameter can be quantified by log-log regression over parameter sweeps.
//!
//! The built-in fixture is the two-dimensional tent family `φ_t = t·φ_1` on
//! the triangle with vertices (0,0), (2,0), (1,1), defined for
//! `t ∈ [τ, 1]` with `τ = (1/√2)(√2+1)^{1/4}`. Both branches of `φ_t` are
//! affine with constant Jacobian `2t²`, which makes every quantity of
//! interest (branch inverses, comparison maps, entropy) available in closed
//! form for cross-checking the numerics.
//!
//! Modules:
//! - [`geometry`]: convex polygons, clipping, affine images, shared edges.
//! - [`maps`]: piecewise-affine maps, the tent family, comparison maps,
//!   expansion constants.
//! - [`ulam`]: partitions, transfer matrices, stationary densities.
//! - [`bv`]: discrete bounded-variation machinery and the Lasota–Yorke
//!   check.
//! - [`analysis`]: parameter sweeps, Hölder fits, entropy, bound
//!   verification, operator-gap estimates.

pub mod analysis;
pub mod bv;
pub mod geometry;
pub mod maps;
pub mod ulam;

use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("singular linear part (|det| = {0:e})")]
    SingularAffine(f64),

    #[error("point ({0}, {1}) lies outside the map domain")]
    OutsideDomain(f64, f64),

    #[error("parameter t = {t} outside [{lo}, {hi}]")]
    ParamOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("map has no branches")]
    EmptyMap,

    #[error("invalid piecewise map: {0}")]
    InvalidMap(String),

    #[error("empty comparison set for branch {0}")]
    EmptyComparisonSet(usize),

    #[error("grid resolution {0} invalid: must be even and >= 2")]
    InvalidResolution(usize),

    #[error("power iteration did not converge after {iterations} iterations (t = {t:?}, residual {residual:e})")]
    NonConvergence {
        t: Option<f64>,
        iterations: usize,
        residual: f64,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least 3 usable pairs for a fit, got {0}")]
    TooFewPairs(usize),

    #[error("zero variance in gaps: cannot fit an exponent")]
    DegenerateGaps,

    #[error("zero discrete variation")]
    ZeroVariation,

    #[error("Jacobian {0} not positive at a sample point")]
    NonPositiveJacobian(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
