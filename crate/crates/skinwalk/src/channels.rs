//! Decoherence channels acting on the coin.
//!
//! All channels here are position independent: a coin-space operator K is
//! applied site-diagonally, i.e. as sum_x |x><x| ⊗ K. Channels are therefore
//! stored as small sets of 2x2 matrices and lifted to the full lattice only
//! when applied to a state.
//!
//! Two kinds of sets appear:
//!
//! * mixture channels (dephasing), where each operator carries a probability
//!   weight and the state evolves as the weighted sum of the branch
//!   evolutions, and
//! * Kraus-sum channels (amplitude damping), where the operators are summed
//!   without weights and completeness sum_i K_i† K_i = 1 makes the channel
//!   trace preserving.
//!
//! Emptied operators (for example the damping branch at mu = 0) are kept in
//! the set with zero weight so every channel takes the same code path.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::mat2::Mat2;

/// Whether a channel conserves the trace of every density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    TracePreserving,
    TraceNonincreasing,
}

/// When amplitude damping acts relative to the loss operator within a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingOrder {
    #[default]
    None,
    BeforeLoss,
    AfterLoss,
}

/// A finite family of coin-space operators with optional mixture weights.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<Mat2>,
    weights: Option<Vec<f64>>,
    classification: Completeness,
}

impl KrausChannel {
    /// Build a channel and classify it from its completeness sum.
    pub fn new(operators: Vec<Mat2>, weights: Option<Vec<f64>>) -> Self {
        let mut channel = KrausChannel {
            operators,
            weights,
            classification: Completeness::TraceNonincreasing,
        };
        let dev = channel.completeness_sum().max_abs_diff(&Mat2::identity());
        channel.classification = if dev <= 1e-12 {
            Completeness::TracePreserving
        } else {
            Completeness::TraceNonincreasing
        };
        channel
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.operators
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn classification(&self) -> Completeness {
        self.classification
    }

    /// `sum_i w_i K_i† K_i` (weights default to 1).
    pub fn completeness_sum(&self) -> Mat2 {
        self.coin_ops().fold(Mat2::zero(), |acc, (a, w)| {
            acc + (a.adjoint() * a).scale_re(w)
        })
    }

    /// Operator/weight pairs; the channel action on a coin block B is
    /// `sum_i w_i K_i B K_i†`.
    pub fn coin_ops(&self) -> impl Iterator<Item = (Mat2, f64)> + '_ {
        self.operators.iter().enumerate().map(move |(i, a)| {
            let w = self.weights.as_ref().map_or(1.0, |ws| ws[i]);
            (*a, w)
        })
    }

    /// Apply the channel to a single coin block.
    pub fn apply_to_block(&self, b: &Mat2) -> Mat2 {
        self.coin_ops()
            .fold(Mat2::zero(), |acc, (a, w)| acc + a.sandwich(b).scale_re(w))
    }
}

fn check_unit_range(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(WalkError::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// Coin dephasing of strength `eta` in its two-operator mixture form:
/// identity with weight 1 - eta/2 and sigma_z with weight eta/2.
pub fn dephasing_channel(eta: f64) -> Result<KrausChannel> {
    check_unit_range("eta", eta)?;
    Ok(KrausChannel::new(
        vec![Mat2::identity(), Mat2::sigma_z()],
        Some(vec![1.0 - eta / 2.0, eta / 2.0]),
    ))
}

/// The equivalent projector form of coin dephasing: the state is left alone
/// with weight 1 - eta and projected onto each coin basis state with weight
/// eta. Produces exactly the same channel action as [`dephasing_channel`].
pub fn dephasing_channel_projector_form(eta: f64) -> Result<KrausChannel> {
    check_unit_range("eta", eta)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    Ok(KrausChannel::new(
        vec![
            Mat2::identity(),
            Mat2::diag(one, zero),
            Mat2::diag(zero, one),
        ],
        Some(vec![1.0 - eta, eta, eta]),
    ))
}

/// Coin amplitude damping of strength `mu`: population is transferred from
/// coin 1 to coin 0 by the Kraus pair {diag(1, sqrt(1 - mu)), sqrt(mu)|0><1|}.
pub fn amplitude_damping(mu: f64) -> Result<KrausChannel> {
    check_unit_range("mu", mu)?;
    let zero = C64::new(0.0, 0.0);
    let k0 = Mat2::diag(C64::new(1.0, 0.0), C64::new((1.0 - mu).sqrt(), 0.0));
    let k1 = Mat2([[zero, C64::new(mu.sqrt(), 0.0)], [zero, zero]]);
    Ok(KrausChannel::new(vec![k0, k1], None))
}

/// The pair of coin operators obtained by composing amplitude damping with
/// the loss operator in a fixed order. Applying this set replaces the bare
/// loss operator in a step.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeLossSet {
    operators: [Mat2; 2],
    order: DampingOrder,
}

impl CompositeLossSet {
    pub fn operators(&self) -> &[Mat2; 2] {
        &self.operators
    }

    pub fn order(&self) -> DampingOrder {
        self.order
    }

    /// `sum_i M_i† M_i`, the total transmission of the composed step.
    pub fn completeness_sum(&self) -> Mat2 {
        self.operators
            .iter()
            .fold(Mat2::zero(), |acc, m| acc + m.adjoint() * *m)
    }

    pub fn coin_ops(&self) -> impl Iterator<Item = (Mat2, f64)> + '_ {
        self.operators.iter().map(|m| (*m, 1.0))
    }
}

/// Compose damping of strength `mu` with loss of strength `gamma`.
///
/// Both orders share the diagonal operator diag(1, sqrt((1-gamma)(1-mu))).
/// The off-diagonal transfer operator picks up the loss factor only when the
/// damping acts after the loss: sqrt(mu)|0><1| before, sqrt(mu(1-gamma))|0><1|
/// after. The ordering is physically observable; see the order-sensitivity
/// tests below.
pub fn compose_damping_loss(gamma: f64, mu: f64, order: DampingOrder) -> Result<CompositeLossSet> {
    check_unit_range("gamma", gamma)?;
    check_unit_range("mu", mu)?;
    if order == DampingOrder::None {
        return Err(WalkError::InvalidParameter {
            name: "damping_order",
            value: mu,
            reason: "composing damping with loss requires an ordering",
        });
    }
    let zero = C64::new(0.0, 0.0);
    let diagonal = Mat2::diag(
        C64::new(1.0, 0.0),
        C64::new(((1.0 - gamma) * (1.0 - mu)).sqrt(), 0.0),
    );
    let transfer_amp = match order {
        DampingOrder::BeforeLoss => mu.sqrt(),
        DampingOrder::AfterLoss => (mu * (1.0 - gamma)).sqrt(),
        DampingOrder::None => unreachable!(),
    };
    let transfer = Mat2([[zero, C64::new(transfer_amp, 0.0)], [zero, zero]]);
    Ok(CompositeLossSet {
        operators: [diagonal, transfer],
        order,
    })
}
