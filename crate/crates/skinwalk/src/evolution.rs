//! Multi-step propagation and drift-velocity extraction.
//!
//! [`evolve`] dispatches on the parameters: the coherent walk runs on pure
//! states, the fully incoherent limits (eta = 1 or mu = 1) run on classical
//! populations, and everything in between propagates the full density matrix.
//! The fast paths are not approximations; in their regimes they agree with
//! the density-matrix path to machine precision, and the tests hold them to
//! that.
//!
//! Reported distributions are conditioned on survival: the state is
//! renormalized every step and the removed weight is accumulated into the
//! survival series. This matches detection-conditioned measurements and keeps
//! the numbers representable at strong loss.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::state::{DensityMatrix, PureState, COIN_DISPLACEMENT};
use crate::walk::{step_density, step_pure, StepChannel, StepOperators, WalkParams};

/// Cumulative survival below which a run aborts instead of dividing by ~0.
const MIN_SURVIVAL: f64 = 1e-300;

/// Distributions drop tiny negative rounding dust below this magnitude.
const DISTRIBUTION_FLOOR: f64 = 1e-12;

/// Per-step position distributions and their summary series.
///
/// Row `t` of `distributions` is P(x, t) over x = -half_width..=half_width,
/// renormalized to sum to 1. `survival[t]` is the raw trace before
/// renormalization, i.e. the probability that the walker has not been lost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    half_width: usize,
    distributions: Vec<Vec<f64>>,
    center_of_mass: Vec<f64>,
    survival: Vec<f64>,
    variance: Vec<f64>,
}

impl Trajectory {
    fn new(half_width: usize) -> Self {
        Trajectory {
            half_width,
            distributions: Vec::new(),
            center_of_mass: Vec::new(),
            survival: Vec::new(),
            variance: Vec::new(),
        }
    }

    /// Normalize a raw weight row and append it together with its moments.
    fn record(&mut self, raw: &[f64], survival: f64, step: usize) -> Result<()> {
        let total: f64 = raw.iter().sum();
        let alive = total > 0.0 && survival >= MIN_SURVIVAL;
        if !alive {
            return Err(WalkError::VanishingSurvival { survival, step });
        }
        let half = self.half_width as i64;
        let mut row = Vec::with_capacity(raw.len());
        let mut mean = 0.0;
        let mut second = 0.0;
        for (i, w) in raw.iter().enumerate() {
            let mut p = w / total;
            if p < 0.0 && p > -DISTRIBUTION_FLOOR {
                p = 0.0;
            }
            let x = (i as i64 - half) as f64;
            mean += x * p;
            second += x * x * p;
            row.push(p);
        }
        self.distributions.push(row);
        self.center_of_mass.push(mean);
        self.variance.push(second - mean * mean);
        self.survival.push(survival);
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Number of steps T; the trajectory holds T+1 rows.
    pub fn steps(&self) -> usize {
        self.distributions.len() - 1
    }

    /// Lattice coordinates matching each distribution column.
    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        let half = self.half_width as i64;
        -half..=half
    }

    pub fn distribution(&self, t: usize) -> &[f64] {
        &self.distributions[t]
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.distributions
    }

    pub fn probability(&self, t: usize, x: i64) -> f64 {
        self.distributions[t][(x + self.half_width as i64) as usize]
    }

    pub fn center_of_mass(&self) -> &[f64] {
        &self.center_of_mass
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }
}

/// How a drift velocity was extracted from a center-of-mass series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftMethod {
    LinearFit,
    FinalDifference,
}

/// A fitted drift velocity with the window needed to audit it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    /// Lattice sites per step.
    pub velocity: f64,
    /// Inclusive step range the estimate used.
    pub window: (usize, usize),
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub method: DriftMethod,
}

/// Propagate a walk for `params.steps` steps.
///
/// Dispatch: coherent parameters use the pure-state path, fully incoherent
/// ones (eta = 1, or mu = 1 with either order) the classical path, everything
/// else the density matrix.
pub fn evolve(params: &WalkParams) -> Result<Trajectory> {
    params.validate()?;
    if params.eta == 0.0 && params.mu == 0.0 {
        return evolve_pure(params);
    }
    if params.eta == 1.0 || params.mu == 1.0 {
        return classical_markov_evolve(params);
    }
    evolve_density(params)
}

/// Coherent pure-state propagation (eta = mu = 0 only).
pub fn evolve_pure(params: &WalkParams) -> Result<Trajectory> {
    params.validate()?;
    let mut psi = PureState::initial(params.half_width);
    let mut traj = Trajectory::new(params.half_width);
    traj.record(&psi.position_distribution(), 1.0, 0)?;
    let mut survival = 1.0;
    for step in 1..=params.steps {
        psi = step_pure(&psi, params)?;
        let factor = psi.norm_sqr();
        survival *= factor;
        let alive = factor > 0.0 && survival >= MIN_SURVIVAL;
        if !alive {
            return Err(WalkError::VanishingSurvival { survival, step });
        }
        psi.scale_re(1.0 / factor.sqrt());
        traj.record(&psi.position_distribution(), survival, step)?;
    }
    Ok(traj)
}

/// Full density-matrix propagation; valid for every parameter set and used
/// as the oracle for both fast paths.
pub fn evolve_density(params: &WalkParams) -> Result<Trajectory> {
    params.validate()?;
    let channel = StepChannel::for_params(params)?;
    let mut rho = DensityMatrix::initial(params.half_width);
    let mut traj = Trajectory::new(params.half_width);
    traj.record(&rho.position_distribution(), 1.0, 0)?;
    let mut survival = 1.0;
    for step in 1..=params.steps {
        rho = step_density(&rho, params, &channel)?;
        let factor = rho.trace_re();
        survival *= factor;
        let alive = factor > 0.0 && survival >= MIN_SURVIVAL;
        if !alive {
            return Err(WalkError::VanishingSurvival { survival, step });
        }
        rho.scale_re(1.0 / factor);
        traj.record(&rho.position_distribution(), survival, step)?;
    }
    Ok(traj)
}

/// Classical population dynamics for the fully incoherent limits.
///
/// One step applies the squared moduli of the active loss/damping operators
/// to the per-coin populations, then the classical coin flip
/// [[cos^2, sin^2], [sin^2, cos^2]], then the deterministic shift. At eta = 1
/// or mu = 1 this reproduces the density-matrix evolution exactly because no
/// coin coherence survives into the populations.
pub fn classical_markov_evolve(params: &WalkParams) -> Result<Trajectory> {
    params.validate()?;
    if params.eta != 1.0 && params.mu != 1.0 {
        return Err(WalkError::NotIncoherent {
            eta: params.eta,
            mu: params.mu,
        });
    }
    let weights = classical_transfer_weights(params)?;
    let coin = StepOperators::new(params)?.coin;
    let flip = [
        [coin[0][0] * coin[0][0], coin[0][1] * coin[0][1]],
        [coin[1][0] * coin[1][0], coin[1][1] * coin[1][1]],
    ];

    let sites = 2 * params.half_width + 1;
    let mut p = vec![0.0f64; 2 * sites];
    // initial coin (|0> + i|1>)/sqrt(2): populations 1/2 each at x = 0
    p[2 * params.half_width] = 0.5;
    p[2 * params.half_width + 1] = 0.5;

    let mut traj = Trajectory::new(params.half_width);
    traj.record(&site_populations(&p, sites), 1.0, 0)?;
    let mut survival = 1.0;
    for step in 1..=params.steps {
        if p[2 * (sites - 1)] > 0.0 || p[1] > 0.0 {
            return Err(WalkError::LatticeOverflow {
                half_width: params.half_width,
            });
        }
        let mut next = vec![0.0f64; 2 * sites];
        let mut total = 0.0;
        for s in 0..sites {
            let held = [p[2 * s], p[2 * s + 1]];
            let damped = [
                weights[0][0] * held[0] + weights[0][1] * held[1],
                weights[1][0] * held[0] + weights[1][1] * held[1],
            ];
            for a in 0..2 {
                let flowed = flip[a][0] * damped[0] + flip[a][1] * damped[1];
                if flowed == 0.0 {
                    continue;
                }
                let t = s as i64 + COIN_DISPLACEMENT[a];
                next[2 * t as usize + a] = flowed;
                total += flowed;
            }
        }
        survival *= total;
        let alive = total > 0.0 && survival >= MIN_SURVIVAL;
        if !alive {
            return Err(WalkError::VanishingSurvival { survival, step });
        }
        for v in &mut next {
            *v /= total;
        }
        p = next;
        traj.record(&site_populations(&p, sites), survival, step)?;
    }
    Ok(traj)
}

/// Squared moduli of the active loss/damping operator set, as a classical
/// coin-to-coin transfer matrix.
fn classical_transfer_weights(params: &WalkParams) -> Result<[[f64; 2]; 2]> {
    match StepChannel::for_params(params)? {
        StepChannel::Damping(set) => {
            let mut w = [[0.0f64; 2]; 2];
            for (m, _) in set.coin_ops() {
                for (a, row) in w.iter_mut().enumerate() {
                    for (c, entry) in row.iter_mut().enumerate() {
                        *entry += m.0[a][c].norm_sqr();
                    }
                }
            }
            Ok(w)
        }
        // eta = 1: dephasing leaves populations alone; only the loss weighs in
        _ => {
            let loss = StepOperators::new(params)?.loss;
            Ok([[loss[0] * loss[0], 0.0], [0.0, loss[1] * loss[1]]])
        }
    }
}

fn site_populations(p: &[f64], sites: usize) -> Vec<f64> {
    (0..sites).map(|s| p[2 * s] + p[2 * s + 1]).collect()
}

/// Ordinary least-squares slope of n(t) over an inclusive window.
pub fn estimate_drift(traj: &Trajectory, window: (usize, usize)) -> Result<DriftEstimate> {
    let (start, end) = window;
    let steps = traj.steps();
    if start > end || end > steps || end - start + 1 < 3 {
        return Err(WalkError::InvalidWindow {
            start,
            end,
            len: steps,
            min_len: 3,
        });
    }
    let xs: Vec<f64> = (start..=end).map(|t| t as f64).collect();
    let ys: Vec<f64> = (start..=end).map(|t| traj.center_of_mass()[t]).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(DriftEstimate {
        velocity: fit.slope,
        window,
        residual: fit.rms_residual,
        method: DriftMethod::LinearFit,
    })
}

/// Last-step difference n(T) - n(T-1); a cheap diagnostic, not a fit.
pub fn final_difference_drift(traj: &Trajectory) -> Result<DriftEstimate> {
    let steps = traj.steps();
    if steps < 1 {
        return Err(WalkError::InvalidWindow {
            start: 0,
            end: 0,
            len: 0,
            min_len: 2,
        });
    }
    let n = traj.center_of_mass();
    Ok(DriftEstimate {
        velocity: n[steps] - n[steps - 1],
        window: (steps - 1, steps),
        residual: 0.0,
        method: DriftMethod::FinalDifference,
    })
}

/// Default fit window: the last third of the run, at least 5 points.
pub fn default_fit_window(steps: usize) -> (usize, usize) {
    let start = steps.saturating_sub((steps / 3).max(4));
    (start, steps)
}

/// A straight-line least-squares fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for exact linearity.
    pub r_squared: f64,
    pub rms_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss_res += r * r;
    }
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / n).sqrt(),
    }
}
