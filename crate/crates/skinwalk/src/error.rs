//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    /// A physical parameter is outside its allowed range or combination.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The walker support touches the lattice edge, so a shift would move
    /// amplitude off the lattice.
    #[error("state support reaches the lattice edge (half_width = {half_width})")]
    LatticeOverflow { half_width: usize },

    /// Two operands refer to lattices of different sizes.
    #[error("dimension mismatch: expected half_width {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The surviving population has decayed below what is representable.
    #[error("survival probability underflowed ({survival:e}) at step {step}")]
    VanishingSurvival { survival: f64, step: usize },

    /// No single eigenvalue branch dominates, so a drift velocity cannot be
    /// attributed to one mode.
    #[error("degenerate spectrum at gamma = {gamma}: no dominant branch")]
    DegenerateSpectrum { gamma: f64 },

    /// A fit window does not lie inside the trajectory or is too short.
    #[error(
        "fit window [{start}, {end}] invalid for a {len}-step trajectory \
         (need {min_len} or more points inside [0, {len}])"
    )]
    InvalidWindow {
        start: usize,
        end: usize,
        len: usize,
        min_len: usize,
    },

    /// An operation that requires a fully incoherent regime was called with
    /// partially coherent parameters.
    #[error("classical propagation requires eta = 1 or mu = 1 (got eta = {eta}, mu = {mu})")]
    NotIncoherent { eta: f64, mu: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WalkError>;
