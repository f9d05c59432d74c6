//! Momentum-space analysis of the walk and its incoherent limits.
//!
//! Position invariance makes one step block diagonal in quasimomentum. With
//! the transform f~(k) = sum_x e^{-ikx} f(x), the shift contributes
//! diag(e^{-ik}, e^{+ik}) and the coherent step becomes the 2x2 operator
//! U_k = S_k C M. Its eigenvalues u(k) define quasienergies E = i ln u: the
//! imaginary part ln|u| is the per-step gain of that mode and the real part
//! of dE/dk its group velocity. The long-time drift of the walk is the group
//! velocity of the mode with the largest gain,
//!
//! ```text
//! v = Re dE/dk at k* = argmax_k Im E(k).
//! ```
//!
//! The fully incoherent limits are classical Markov chains on the coin
//! populations. Their transfer matrix T_k (shift phases times coin-flip
//! probabilities times survival weights) plays the same role through
//! lambda = ln tau for the dominant eigenvalue tau(k):
//!
//! ```text
//! v = -Im dlambda/dk at k* = argmax_k Re lambda(k).
//! ```
//!
//! Both extractions reduce to the log-derivative of a tracked eigenvalue at a
//! located extremum, and both must reproduce the closed-form velocities to
//! tight tolerance; the sign convention is fixed once, here, so that positive
//! velocities point toward +x exactly as in the real-space simulation.
//!
//! Eigenvalue branches are matched by continuity (nearest neighbor along the
//! k grid), never by a fixed ordering, since plain sorting flips branches at
//! crossings and produces spurious derivative jumps.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, WalkError};
use crate::mat2::{dot, row_mul, Mat2};
use crate::walk::{build_coin, build_loss};

/// Scan points used to bracket an extremum before refining it.
const SCAN_POINTS: usize = 1024;
/// Interval width at which the golden-section refinement stops.
const REFINE_TOL: f64 = 1e-10;
/// Central-difference step for eigenvalue derivatives.
const DERIVATIVE_STEP: f64 = 1e-6;
/// Eigenvalue separation below which a band point is flagged degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

/// Which incoherent Markov limit a spectral quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncoherentRegime {
    /// Full dephasing (eta = 1): populations keep the bare loss weights.
    Dephased,
    /// Full damping applied after the loss (mu = 1, reversed ordering).
    DampedAfterLoss,
}

/// Qualifiers attached to a reported velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocityFlag {
    /// No single mode dominates (gamma = 0); the value is a formal limit.
    DegenerateSpectrum,
    /// gamma = 1: coin 1 is annihilated every step and the drift saturates.
    Saturated,
    /// The dominant transport points toward -x.
    ReversedDirection,
    /// theta within 1e-9 of a multiple of pi/2; the extremum is flat.
    NearDegenerate,
}

/// Which eigenvalue branch of the 2x2 operator dominated at k*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandBranch {
    Plus,
    Minus,
}

/// Drift velocities for one parameter point from the routes that exist for
/// its regime, with the audit trail (k*, branch, flags).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityReport {
    pub v_closed: f64,
    pub v_spectral: f64,
    pub v_realspace: Option<f64>,
    pub k_star: f64,
    pub branch: BandBranch,
    pub flag: Option<VelocityFlag>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(WalkError::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// The one-step Bloch operator U_k = S_k C M at quasimomentum `k`.
pub fn bloch_operator(gamma: f64, theta: f64, k: f64) -> Result<Mat2> {
    check_gamma(gamma)?;
    let coin = build_coin(theta)?;
    let loss = build_loss(gamma)?;
    Ok(bloch_raw(&coin, &loss, k))
}

fn bloch_raw(coin: &[[f64; 2]; 2], loss: &[f64; 2], k: f64) -> Mat2 {
    let right = C64::from_polar(1.0, -k); // coin 0 moves toward +x
    let left = C64::from_polar(1.0, k);
    Mat2([
        [right * coin[0][0] * loss[0], right * coin[0][1] * loss[1]],
        [left * coin[1][0] * loss[0], left * coin[1][1] * loss[1]],
    ])
}

/// d U_k / dk: the shift phases contribute a factor -i (+i) to the top
/// (bottom) row.
pub fn bloch_operator_dk(gamma: f64, theta: f64, k: f64) -> Result<Mat2> {
    let u = bloch_operator(gamma, theta, k)?;
    Ok(row_phase_derivative(&u))
}

fn row_phase_derivative(m: &Mat2) -> Mat2 {
    let mi = C64::new(0.0, -1.0);
    let pi_ = C64::new(0.0, 1.0);
    Mat2([
        [m.0[0][0] * mi, m.0[0][1] * mi],
        [m.0[1][0] * pi_, m.0[1][1] * pi_],
    ])
}

/// The classical transfer matrix T_k of a fully incoherent limit.
///
/// Entry (a, c) is e^{-ik d_a} |C_ac|^2 w_c with d = (+1, -1) and survival
/// weights w from the active regime; for the damped chain the coin-1 column
/// is routed through coin 0 because the damping resets the coin each step.
pub fn markov_bloch(gamma: f64, theta: f64, regime: IncoherentRegime, k: f64) -> Result<Mat2> {
    check_gamma(gamma)?;
    let coin = build_coin(theta)?;
    let flip = [
        [coin[0][0] * coin[0][0], coin[0][1] * coin[0][1]],
        [coin[1][0] * coin[1][0], coin[1][1] * coin[1][1]],
    ];
    let survive = 1.0 - gamma;
    // population transfer before the coin flip
    let weights = match regime {
        IncoherentRegime::Dephased => [[1.0, 0.0], [0.0, survive]],
        IncoherentRegime::DampedAfterLoss => [[1.0, survive], [0.0, 0.0]],
    };
    let mut w = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for c in 0..2 {
            w[a][c] = flip[a][0] * weights[0][c] + flip[a][1] * weights[1][c];
        }
    }
    Ok(row_phase_matrix(&w, k))
}

fn row_phase_matrix(w: &[[f64; 2]; 2], k: f64) -> Mat2 {
    let right = C64::from_polar(1.0, -k);
    let left = C64::from_polar(1.0, k);
    Mat2([
        [right * w[0][0], right * w[0][1]],
        [left * w[1][0], left * w[1][1]],
    ])
}

/// One point of the two quasienergy bands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub k: f64,
    pub e_plus: (f64, f64),
    pub e_minus: (f64, f64),
    /// The two step-operator eigenvalues are closer than 1e-10 here.
    pub degenerate: bool,
}

impl BandPoint {
    pub fn im_sum(&self) -> f64 {
        self.e_plus.1 + self.e_minus.1
    }
}

/// Quasienergy bands E(k) = i ln u(k) over a sorted grid, with branches
/// matched by continuity and the real part unwound along the grid.
pub fn quasienergy_bands(gamma: f64, theta: f64, k_grid: &[f64]) -> Result<Vec<BandPoint>> {
    check_gamma(gamma)?;
    let coin = build_coin(theta)?;
    let loss = build_loss(gamma)?;
    let mut out = Vec::with_capacity(k_grid.len());
    let mut prev: Option<[C64; 2]> = None;
    let mut prev_phase = [0.0f64; 2];
    for &k in k_grid {
        let mut pair = bloch_raw(&coin, &loss, k).eigenvalues();
        if let Some(p) = prev {
            let direct = (pair[0] - p[0]).norm() + (pair[1] - p[1]).norm();
            let swapped = (pair[1] - p[0]).norm() + (pair[0] - p[1]).norm();
            if swapped < direct {
                pair.swap(0, 1);
            }
        }
        let mut phases = [0.0f64; 2];
        for (i, u) in pair.iter().enumerate() {
            let mut phi = u.arg();
            if prev.is_some() {
                // unwind toward the previous phase of the same branch
                while phi - prev_phase[i] > PI {
                    phi -= 2.0 * PI;
                }
                while phi - prev_phase[i] < -PI {
                    phi += 2.0 * PI;
                }
            }
            phases[i] = phi;
        }
        // E = i ln u = -arg(u) + i ln|u|
        out.push(BandPoint {
            k,
            e_plus: (-phases[0], pair[0].norm().ln()),
            e_minus: (-phases[1], pair[1].norm().ln()),
            degenerate: (pair[0] - pair[1]).norm() < DEGENERACY_TOL,
        });
        prev = Some(pair);
        prev_phase = phases;
    }
    Ok(out)
}

/// Uniform grid of `n` quasimomenta over [-pi, pi).
pub fn k_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -PI + 2.0 * PI * i as f64 / n as f64)
        .collect()
}

/// First-order perturbation theory for an eigenvalue derivative:
/// du/dk = <L| dM/dk |R> / <L|R> with left/right eigenvectors of `m` at `u`.
pub fn eigenvalue_derivative_perturbative(m: &Mat2, dm: &Mat2, u: C64) -> C64 {
    let (left, right) = m.eigenvectors(u);
    let numer = dot(&row_mul(&left, dm), &right);
    let denom = dot(&left, &right);
    numer / denom
}

/// Golden-section search for the maximum of `f` on [a, b].
fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Locate the maximizer of `f` over [-pi, pi): coarse scan, ties resolved
/// toward the smaller |k|, then golden-section refinement.
fn locate_extremum(f: impl Fn(f64) -> f64) -> f64 {
    let dk = 2.0 * PI / SCAN_POINTS as f64;
    let mut best_k = -PI;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..SCAN_POINTS {
        let k = -PI + dk * i as f64;
        let v = f(k);
        let better = v > best_v + 1e-12 || (v > best_v - 1e-12 && k.abs() < best_k.abs());
        if better {
            best_v = v.max(best_v);
            best_k = k;
        }
    }
    golden_section_max(&f, best_k - dk, best_k + dk, REFINE_TOL)
}

/// Dominant eigenvalue (largest modulus) of a 2x2 operator.
fn dominant_eigenvalue(m: &Mat2) -> (C64, BandBranch) {
    let [plus, minus] = m.eigenvalues();
    if plus.norm() >= minus.norm() {
        (plus, BandBranch::Plus)
    } else {
        (minus, BandBranch::Minus)
    }
}

fn nearest_eigenvalue(m: &Mat2, target: C64) -> C64 {
    let [a, b] = m.eigenvalues();
    if (a - target).norm() <= (b - target).norm() {
        a
    } else {
        b
    }
}

/// Branch-matched central difference of ln(eigenvalue) at `k`.
///
/// The eigenvalues at k ± h are matched to the one at k, and the two logs are
/// taken as a single principal log of their ratio, which is near 1 for small
/// h, so no branch cut can interfere.
fn log_eigenvalue_derivative(op: impl Fn(f64) -> Mat2, k: f64, u0: C64) -> C64 {
    let h = DERIVATIVE_STEP;
    let up = nearest_eigenvalue(&op(k + h), u0);
    let um = nearest_eigenvalue(&op(k - h), u0);
    (up / um).ln() / (2.0 * h)
}

fn near_axis_flag(theta: f64) -> Option<VelocityFlag> {
    let s = theta.sin().abs();
    let c = theta.cos().abs();
    (s < 1e-9 || c < 1e-9).then_some(VelocityFlag::NearDegenerate)
}

/// Drift velocity of the coherent walk from the band structure: locate
/// k* = argmax Im E on the dominant branch and differentiate there.
pub fn coherent_drift_spectral(gamma: f64, theta: f64) -> Result<VelocityReport> {
    check_gamma(gamma)?;
    let coin = build_coin(theta)?;
    let loss = build_loss(gamma)?;
    if gamma == 0.0 {
        // unitary walk: every mode has |u| = 1 and no branch dominates
        return Err(WalkError::DegenerateSpectrum { gamma });
    }
    let op = |k: f64| bloch_raw(&coin, &loss, k);
    let gain = |k: f64| dominant_eigenvalue(&op(k)).0.norm().ln();
    let k_star = locate_extremum(gain);
    let (u0, branch) = dominant_eigenvalue(&op(k_star));
    // dE/dk = i dln(u)/dk, so Re dE/dk = -Im dln(u)/dk
    let v_spectral = -log_eigenvalue_derivative(op, k_star, u0).im;
    if !v_spectral.is_finite() {
        // every mode annihilated (gamma = 1 with a fully transverse coin)
        return Err(WalkError::DegenerateSpectrum { gamma });
    }
    let closed = closed_form_velocities(gamma, theta)?;
    let flag = if gamma == 1.0 {
        Some(VelocityFlag::Saturated)
    } else {
        near_axis_flag(theta)
    };
    Ok(VelocityReport {
        v_closed: closed.coherent,
        v_spectral,
        v_realspace: None,
        k_star,
        branch,
        flag,
    })
}

/// Drift velocity of a fully incoherent limit from its transfer matrix:
/// locate k* = argmax Re lambda and differentiate lambda = ln tau there.
pub fn incoherent_drift_spectral(
    gamma: f64,
    theta: f64,
    regime: IncoherentRegime,
) -> Result<VelocityReport> {
    check_gamma(gamma)?;
    build_coin(theta)?;
    if regime == IncoherentRegime::DampedAfterLoss && gamma == 1.0 {
        return Err(WalkError::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "the damped-after-loss chain needs gamma < 1",
        });
    }
    let op = move |k: f64| markov_bloch(gamma, theta, regime, k).expect("validated parameters");
    let growth = |k: f64| dominant_eigenvalue(&op(k)).0.norm().ln();
    let k_star = locate_extremum(growth);
    let (tau0, branch) = dominant_eigenvalue(&op(k_star));
    let v_spectral = -log_eigenvalue_derivative(op, k_star, tau0).im;
    if !v_spectral.is_finite() {
        return Err(WalkError::DegenerateSpectrum { gamma });
    }
    let closed = closed_form_velocities(gamma, theta)?;
    let (v_closed, mut flag) = match regime {
        IncoherentRegime::Dephased => (closed.dephased, closed.dephased_flag),
        IncoherentRegime::DampedAfterLoss => (closed.damped_after_loss, closed.damped_flag),
    };
    if flag.is_none() {
        flag = near_axis_flag(theta);
    }
    Ok(VelocityReport {
        v_closed,
        v_spectral,
        v_realspace: None,
        k_star,
        branch,
        flag,
    })
}

/// The three closed-form drift velocities and their qualifiers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormVelocities {
    /// Coherent walk.
    pub coherent: f64,
    /// Fully dephased walk (eta = 1).
    pub dephased: f64,
    /// Fully damped walk with damping after the loss (mu = 1).
    pub damped_after_loss: f64,
    pub coherent_flag: Option<VelocityFlag>,
    pub dephased_flag: Option<VelocityFlag>,
    pub damped_flag: Option<VelocityFlag>,
}

/// Evaluate the closed-form drift velocities.
///
/// With g = sqrt(1 - gamma), c = cos(theta), s = sin(theta):
///
/// ```text
/// coherent:  (1 + g) c / sqrt(4 g + (1 - g)^2 c^2)
/// dephased:  gamma c^2 / sqrt(4 (1 - gamma) s^4 + gamma^2 c^4)
/// damped:    (c^2 - (1 - gamma) s^2) / (1 - gamma s^2)
/// ```
///
/// Positive values point toward +x. At gamma = 0 no mode dominates and the
/// coherent/dephased values are formal limits, flagged as degenerate; the
/// damped form can legitimately reverse sign for tan^2(theta) > 1/(1-gamma)
/// and is then flagged.
pub fn closed_form_velocities(gamma: f64, theta: f64) -> Result<ClosedFormVelocities> {
    check_gamma(gamma)?;
    build_coin(theta)?;
    let g = (1.0 - gamma).sqrt();
    let c = theta.cos();
    let s = theta.sin();

    let den_coherent = (4.0 * g + (1.0 - g).powi(2) * c * c).sqrt();
    let coherent = if den_coherent > 0.0 {
        (1.0 + g) * c / den_coherent
    } else {
        0.0
    };

    let den_dephased = (4.0 * (1.0 - gamma) * s.powi(4) + gamma * gamma * c.powi(4)).sqrt();
    let dephased = if den_dephased > 0.0 {
        gamma * c * c / den_dephased
    } else {
        0.0
    };

    let den_damped = 1.0 - gamma * s * s;
    let damped = if den_damped != 0.0 {
        (c * c - (1.0 - gamma) * s * s) / den_damped
    } else {
        0.0
    };

    let degenerate = (gamma == 0.0).then_some(VelocityFlag::DegenerateSpectrum);
    Ok(ClosedFormVelocities {
        coherent,
        dephased,
        damped_after_loss: damped,
        coherent_flag: if gamma == 1.0 {
            Some(VelocityFlag::Saturated)
        } else {
            degenerate
        },
        dephased_flag: degenerate,
        damped_flag: (damped < 0.0).then_some(VelocityFlag::ReversedDirection),
    })
}

/// Loss strength at which the coherent and fully dephased drift velocities
/// coincide, by bisection on their closed forms.
///
/// Returns `Ok(None)` when the difference does not change sign inside (0, 1),
/// which happens for theta close enough to the degenerate axes.
pub fn crossover_gamma(theta: f64) -> Result<Option<f64>> {
    if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::FRAC_PI_2 {
        return Err(WalkError::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "crossover search needs theta strictly inside (0, pi/2)",
        });
    }
    let diff = |gamma: f64| -> Result<f64> {
        let v = closed_form_velocities(gamma, theta)?;
        Ok(v.coherent - v.dephased)
    };
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    let mut f_lo = diff(lo)?;
    let f_hi = diff(hi)?;
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid)?;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
