//! Single-step dynamics of the lossy discrete-time quantum walk.
//!
//! One step applies, in order: the decoherence channel (if any), the
//! coin-selective loss diag(1, sqrt(1-gamma)), the coin rotation by theta,
//! and the coin-conditional shift (coin 0 to x+1, coin 1 to x-1). When
//! amplitude damping is active its Kraus operators are folded together with
//! the loss into a composite pair, one pair per ordering, and that pair
//! replaces the bare loss in the step.

use crate::channels::{
    compose_damping_loss, dephasing_channel, CompositeLossSet, DampingOrder, KrausChannel,
};
use crate::error::{Result, WalkError};
use crate::state::{DensityMatrix, PureState};

/// Every physical knob of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    /// Coin rotation angle in radians.
    pub theta: f64,
    /// Loss strength applied to coin 1, in [0, 1].
    pub gamma: f64,
    /// Dephasing strength in [0, 1].
    pub eta: f64,
    /// Amplitude-damping strength in [0, 1].
    pub mu: f64,
    /// Where damping acts relative to the loss operator.
    pub damping_order: DampingOrder,
    /// Number of steps T.
    pub steps: usize,
    /// Lattice half width; sites span [-half_width, +half_width].
    pub half_width: usize,
}

impl WalkParams {
    /// Coherent walk (no decoherence) with the minimal safe lattice.
    pub fn coherent(gamma: f64, theta: f64, steps: usize) -> Self {
        WalkParams {
            theta,
            gamma,
            eta: 0.0,
            mu: 0.0,
            damping_order: DampingOrder::None,
            steps,
            half_width: steps.max(1),
        }
    }

    /// Walk with coin dephasing of strength `eta`.
    pub fn dephasing(gamma: f64, theta: f64, eta: f64, steps: usize) -> Self {
        WalkParams {
            eta,
            ..WalkParams::coherent(gamma, theta, steps)
        }
    }

    /// Walk with amplitude damping of strength `mu` in the given order.
    pub fn damping(gamma: f64, theta: f64, mu: f64, order: DampingOrder, steps: usize) -> Self {
        WalkParams {
            mu,
            damping_order: order,
            ..WalkParams::coherent(gamma, theta, steps)
        }
    }

    pub fn with_half_width(mut self, half_width: usize) -> Self {
        self.half_width = half_width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(WalkError::InvalidParameter {
                name: "theta",
                value: self.theta,
                reason: "must be finite",
            });
        }
        for (name, value) in [("gamma", self.gamma), ("eta", self.eta), ("mu", self.mu)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(WalkError::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        if self.half_width == 0 {
            return Err(WalkError::InvalidParameter {
                name: "half_width",
                value: 0.0,
                reason: "must be positive",
            });
        }
        if self.half_width < self.steps {
            return Err(WalkError::InvalidParameter {
                name: "half_width",
                value: self.half_width as f64,
                reason: "must be at least the step count so the walker cannot reach the edge",
            });
        }
        if self.eta > 0.0 && self.damping_order != DampingOrder::None {
            return Err(WalkError::InvalidParameter {
                name: "eta",
                value: self.eta,
                reason: "dephasing and amplitude damping are studied separately; \
                         pick one channel per run",
            });
        }
        if self.mu > 0.0 && self.damping_order == DampingOrder::None {
            return Err(WalkError::InvalidParameter {
                name: "mu",
                value: self.mu,
                reason: "damping strength given without a damping order",
            });
        }
        Ok(())
    }
}

/// Coin rotation matrix: [[cos, -sin], [sin, cos]].
///
/// This is the matrix exponential of the Pauli-y generator, which is real.
pub fn build_coin(theta: f64) -> Result<[[f64; 2]; 2]> {
    if !theta.is_finite() {
        return Err(WalkError::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "must be finite",
        });
    }
    let (s, c) = theta.sin_cos();
    Ok([[c, -s], [s, c]])
}

/// Diagonal loss amplitudes (1, sqrt(1-gamma)) applied to the coin.
pub fn build_loss(gamma: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(WalkError::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must lie in [0, 1]",
        });
    }
    Ok([1.0, (1.0 - gamma).sqrt()])
}

/// The loss and coin matrices of one step; the shift is applied by the state
/// types directly since it is a pure re-indexing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOperators {
    pub loss: [f64; 2],
    pub coin: [[f64; 2]; 2],
}

impl StepOperators {
    pub fn new(params: &WalkParams) -> Result<Self> {
        Ok(StepOperators {
            loss: build_loss(params.gamma)?,
            coin: build_coin(params.theta)?,
        })
    }
}

/// The decoherence stage of one step, resolved from the run parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum StepChannel {
    /// Purely coherent: only loss, coin, shift.
    None,
    /// Coin dephasing applied before the loss (the two commute, so the
    /// placement is a convention, not a physical choice).
    Dephasing(KrausChannel),
    /// Amplitude damping composed with the loss; replaces the bare loss.
    Damping(CompositeLossSet),
}

impl StepChannel {
    pub fn for_params(params: &WalkParams) -> Result<Self> {
        params.validate()?;
        if params.damping_order != DampingOrder::None {
            return Ok(StepChannel::Damping(compose_damping_loss(
                params.gamma,
                params.mu,
                params.damping_order,
            )?));
        }
        if params.eta > 0.0 {
            return Ok(StepChannel::Dephasing(dephasing_channel(params.eta)?));
        }
        Ok(StepChannel::None)
    }
}

/// One coherent step S C M |psi>. The pure-state path exists only for
/// eta = mu = 0; decohered runs go through [`step_density`].
pub fn step_pure(state: &PureState, params: &WalkParams) -> Result<PureState> {
    if params.eta != 0.0 || params.mu != 0.0 {
        return Err(WalkError::InvalidParameter {
            name: "eta",
            value: params.eta.max(params.mu),
            reason: "pure-state propagation is defined for the coherent walk only",
        });
    }
    let ops = StepOperators::new(params)?;
    if state.half_width() != params.half_width {
        return Err(WalkError::DimensionMismatch {
            expected: params.half_width,
            got: state.half_width(),
        });
    }
    let mut next = state.clone();
    next.apply_loss(ops.loss);
    next.apply_coin(ops.coin);
    next.shift()
}

/// One step of the density-matrix evolution under the given channel.
///
/// The caller is responsible for passing a channel consistent with `params`
/// (build it with [`StepChannel::for_params`]). The output trace is left
/// unnormalized so the survival probability can be read off.
pub fn step_density(
    rho: &DensityMatrix,
    params: &WalkParams,
    channel: &StepChannel,
) -> Result<DensityMatrix> {
    if rho.half_width() != params.half_width {
        return Err(WalkError::DimensionMismatch {
            expected: params.half_width,
            got: rho.half_width(),
        });
    }
    let ops = StepOperators::new(params)?;
    let mut next = rho.clone();
    match channel {
        StepChannel::None => {
            next.apply_loss(ops.loss);
        }
        StepChannel::Dephasing(ch) => {
            next.apply_coin_ops(&ch.coin_ops().collect::<Vec<_>>());
            next.apply_loss(ops.loss);
        }
        StepChannel::Damping(set) => {
            next.apply_coin_ops(&set.coin_ops().collect::<Vec<_>>());
        }
    }
    next.apply_coin_rotation(ops.coin);
    next.shift()
}
