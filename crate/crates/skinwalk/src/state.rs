//! Walker states on the joint position (x) ⊗ coin (2-level) space.
//!
//! The lattice holds sites x ∈ [-half_width, +half_width] and states are
//! indexed as `2 * (x + half_width) + coin`, so the two coin amplitudes of a
//! site sit next to each other and every coin-space operator acts on
//! contiguous 2x2 blocks.
//!
//! Coin 0 shifts toward +x and coin 1 toward -x. Nothing wraps or absorbs at
//! the lattice edge: callers guarantee `half_width >= steps`, so the walker
//! support can never reach the boundary and a shift that would leave the
//! lattice is reported as an error instead.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Result, WalkError};
use crate::mat2::Mat2;

/// Displacement of each coin component under one shift.
pub const COIN_DISPLACEMENT: [i64; 2] = [1, -1];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A (possibly sub-normalized) pure state of the walker.
///
/// The squared norm starts at 1 and can only shrink under the loss operator,
/// so it doubles as the survival probability of the coherent walk.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    half_width: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// The walk's initial state: the walker at x = 0 with coin
    /// (|0> + i|1>)/sqrt(2).
    pub fn initial(half_width: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * (2 * half_width + 1)];
        amplitudes[2 * half_width] = C64::new(FRAC_1_SQRT_2, 0.0);
        amplitudes[2 * half_width + 1] = C64::new(0.0, FRAC_1_SQRT_2);
        PureState {
            half_width,
            amplitudes,
        }
    }

    pub fn from_amplitudes(half_width: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = 2 * (2 * half_width + 1);
        if amplitudes.len() != expected {
            return Err(WalkError::DimensionMismatch {
                expected: half_width,
                got: amplitudes.len() / 2,
            });
        }
        Ok(PureState {
            half_width,
            amplitudes,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn sites(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn amplitude(&self, x: i64, coin: usize) -> C64 {
        self.amplitudes[self.index(x, coin)]
    }

    fn index(&self, x: i64, coin: usize) -> usize {
        2 * (x + self.half_width as i64) as usize + coin
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Per-site probability weights |psi(x, 0)|^2 + |psi(x, 1)|^2, not
    /// renormalized.
    pub fn position_distribution(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(2)
            .map(|pair| pair[0].norm_sqr() + pair[1].norm_sqr())
            .collect()
    }

    pub fn scale_re(&mut self, factor: f64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    pub(crate) fn apply_loss(&mut self, loss: [f64; 2]) {
        for pair in self.amplitudes.chunks_exact_mut(2) {
            pair[0] *= loss[0];
            pair[1] *= loss[1];
        }
    }

    pub(crate) fn apply_coin(&mut self, coin: [[f64; 2]; 2]) {
        for pair in self.amplitudes.chunks_exact_mut(2) {
            let a = pair[0];
            let b = pair[1];
            pair[0] = a * coin[0][0] + b * coin[0][1];
            pair[1] = a * coin[1][0] + b * coin[1][1];
        }
    }

    /// True when a shift would push amplitude past the lattice edge
    /// (coin 0 occupied at +half_width or coin 1 at -half_width).
    pub fn touches_edge(&self) -> bool {
        let top = self.sites() - 1;
        self.amplitudes[2 * top].norm_sqr() > 0.0 || self.amplitudes[1].norm_sqr() > 0.0
    }

    pub(crate) fn shift(&self) -> Result<PureState> {
        if self.touches_edge() {
            return Err(WalkError::LatticeOverflow {
                half_width: self.half_width,
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        let sites = self.sites();
        for s in 0..sites {
            for (coin, d) in COIN_DISPLACEMENT.iter().enumerate() {
                let t = s as i64 + d;
                if (0..sites as i64).contains(&t) {
                    out[2 * t as usize + coin] = self.amplitudes[2 * s + coin];
                }
            }
        }
        Ok(PureState {
            half_width: self.half_width,
            amplitudes: out,
        })
    }
}

/// Density operator on the position ⊗ coin space.
///
/// The trace starts at 1 and decays under loss; evolution code renormalizes
/// per step and tracks the accumulated survival probability separately.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    half_width: usize,
    entries: Array2<C64>,
}

impl DensityMatrix {
    pub fn initial(half_width: usize) -> Self {
        DensityMatrix::from_pure(&PureState::initial(half_width))
    }

    pub fn from_pure(state: &PureState) -> Self {
        let dim = state.amplitudes.len();
        let mut entries = Array2::zeros((dim, dim));
        for (i, a) in state.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, b) in state.amplitudes.iter().enumerate() {
                entries[[i, j]] = a * b.conj();
            }
        }
        DensityMatrix {
            half_width: state.half_width,
            entries,
        }
    }

    pub fn from_entries(half_width: usize, entries: Array2<C64>) -> Result<Self> {
        let dim = 2 * (2 * half_width + 1);
        if entries.shape() != [dim, dim] {
            return Err(WalkError::DimensionMismatch {
                expected: half_width,
                got: entries.shape()[0] / 2,
            });
        }
        Ok(DensityMatrix {
            half_width,
            entries,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn sites(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.sites()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn entry(&self, x: i64, coin: usize, xp: i64, coinp: usize) -> C64 {
        let i = 2 * (x + self.half_width as i64) as usize + coin;
        let j = 2 * (xp + self.half_width as i64) as usize + coinp;
        self.entries[[i, j]]
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    /// Per-site populations (diagonal summed over the coin), not
    /// renormalized.
    pub fn position_distribution(&self) -> Vec<f64> {
        (0..self.sites())
            .map(|s| self.entries[[2 * s, 2 * s]].re + self.entries[[2 * s + 1, 2 * s + 1]].re)
            .collect()
    }

    pub fn scale_re(&mut self, factor: f64) {
        self.entries.mapv_inplace(|v| v * factor);
    }

    /// Largest entrywise deviation from the adjoint.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, for positivity spot checks on small lattices.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    fn block(&self, si: usize, sj: usize) -> Mat2 {
        Mat2([
            [
                self.entries[[2 * si, 2 * sj]],
                self.entries[[2 * si, 2 * sj + 1]],
            ],
            [
                self.entries[[2 * si + 1, 2 * sj]],
                self.entries[[2 * si + 1, 2 * sj + 1]],
            ],
        ])
    }

    fn set_block(&mut self, si: usize, sj: usize, b: &Mat2) {
        self.entries[[2 * si, 2 * sj]] = b.0[0][0];
        self.entries[[2 * si, 2 * sj + 1]] = b.0[0][1];
        self.entries[[2 * si + 1, 2 * sj]] = b.0[1][0];
        self.entries[[2 * si + 1, 2 * sj + 1]] = b.0[1][1];
    }

    /// Apply a weighted family of coin-space operators site-diagonally:
    /// every 2x2 coin block B becomes sum_i w_i A_i B A_i†.
    pub fn apply_coin_ops(&mut self, ops: &[(Mat2, f64)]) {
        let sites = self.sites();
        for si in 0..sites {
            for sj in 0..sites {
                let b = self.block(si, sj);
                let mut acc = Mat2::zero();
                for (a, w) in ops {
                    if *w == 0.0 {
                        continue;
                    }
                    acc = acc + a.sandwich(&b).scale_re(*w);
                }
                self.set_block(si, sj, &acc);
            }
        }
    }

    /// Apply the coin-diagonal loss operator on both sides.
    pub fn apply_loss(&mut self, loss: [f64; 2]) {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                let f = loss[i & 1] * loss[j & 1];
                if f != 1.0 {
                    self.entries[[i, j]] *= f;
                }
            }
        }
    }

    /// Apply the (real) coin rotation: B -> C B C^T on every block.
    pub fn apply_coin_rotation(&mut self, coin: [[f64; 2]; 2]) {
        self.apply_coin_ops(&[(Mat2::from_real(coin), 1.0)]);
    }

    /// True when a shift would push weight past the lattice edge.
    pub fn touches_edge(&self) -> bool {
        let top = self.dim() - 2;
        self.entries[[top, top]].norm_sqr() > 0.0 || self.entries[[1, 1]].norm_sqr() > 0.0
    }

    /// Coin-conditional shift of both indices.
    pub fn shift(&self) -> Result<DensityMatrix> {
        if self.touches_edge() {
            return Err(WalkError::LatticeOverflow {
                half_width: self.half_width,
            });
        }
        let sites = self.sites();
        let mut out = Array2::zeros(self.entries.raw_dim());
        for si in 0..sites {
            for a in 0..2 {
                let ti = si as i64 + COIN_DISPLACEMENT[a];
                if !(0..sites as i64).contains(&ti) {
                    continue;
                }
                for sj in 0..sites {
                    for b in 0..2 {
                        let tj = sj as i64 + COIN_DISPLACEMENT[b];
                        if !(0..sites as i64).contains(&tj) {
                            continue;
                        }
                        out[[2 * ti as usize + a, 2 * tj as usize + b]] =
                            self.entries[[2 * si + a, 2 * sj + b]];
                    }
                }
            }
        }
        Ok(DensityMatrix {
            half_width: self.half_width,
            entries: out,
        })
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Meant for small diagnostic problems (positivity spot checks); it makes no
/// attempt at being a general-purpose eigensolver.
pub fn hermitian_eigenvalues(matrix: &Array2<C64>) -> Vec<f64> {
    let n = matrix.shape()[0];
    let mut a = matrix.clone();
    let scale = a.iter().map(|v| v.norm()).fold(0.0f64, f64::max).max(1.0);
    let tol = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[[p, q]].norm());
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let mag = apq.norm();
                if mag < tol * 1e-2 {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let angle = 0.5 * (2.0 * mag).atan2(app - aqq);
                let (s, c) = angle.sin_cos();
                let sp = phase * s; // s e^{i phi}
                                    // rows/columns outside the (p, q) plane
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * c + aiq * sp.conj();
                    a[[i, q]] = aiq * c - aip * sp;
                    a[[p, i]] = a[[i, p]].conj();
                    a[[q, i]] = a[[i, q]].conj();
                }
                let shift = 2.0 * c * s * mag;
                a[[p, p]] = C64::new(c * c * app + s * s * aqq + shift, 0.0);
                a[[q, q]] = C64::new(s * s * app + c * c * aqq - shift, 0.0);
                a[[p, q]] = C64::new(0.0, 0.0);
                a[[q, p]] = C64::new(0.0, 0.0);
            }
        }
    }
    (0..n).map(|i| a[[i, i]].re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_is_normalized_and_local() {
        let psi = PureState::initial(4);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((psi.amplitude(0, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitude(0, 1).im - FRAC_1_SQRT_2).abs() < 1e-15);
        let dist = psi.position_distribution();
        assert!((dist[4] - 1.0).abs() < 1e-15);
        assert_eq!(dist.iter().filter(|p| **p > 0.0).count(), 1);
    }

    #[test]
    fn shift_moves_coins_in_opposite_directions() {
        let mut psi = PureState::initial(3);
        psi.apply_coin([[1.0, 0.0], [0.0, 1.0]]);
        let shifted = psi.shift().unwrap();
        assert!((shifted.amplitude(1, 0) - psi.amplitude(0, 0)).norm() < 1e-15);
        assert!((shifted.amplitude(-1, 1) - psi.amplitude(0, 1)).norm() < 1e-15);
        assert!((shifted.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_errors_when_support_reaches_edge() {
        let mut amps = vec![C64::new(0.0, 0.0); 2 * 3];
        amps[4] = C64::new(1.0, 0.0); // coin 0 at x = +1 on a half_width-1 lattice
        let psi = PureState::from_amplitudes(1, amps).unwrap();
        assert!(matches!(
            psi.shift(),
            Err(WalkError::LatticeOverflow { half_width: 1 })
        ));
    }

    #[test]
    fn density_from_pure_has_unit_trace_and_is_hermitian() {
        let rho = DensityMatrix::initial(3);
        assert!((rho.trace_re() - 1.0).abs() < 1e-15);
        assert!(rho.hermiticity_deviation() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn density_shift_matches_pure_shift() {
        let psi = PureState::initial(2);
        let rho = DensityMatrix::from_pure(&psi);
        let rho_shifted = rho.shift().unwrap();
        let psi_shifted = psi.shift().unwrap();
        let expected = DensityMatrix::from_pure(&psi_shifted);
        let mut worst = 0.0f64;
        for (a, b) in rho_shifted.entries.iter().zip(expected.entries.iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-15);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(3, 1) rotated by a complex unitary similarity
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = C64::new(2.0, 0.0);
        m[[0, 1]] = C64::new(0.5, 0.5);
        m[[1, 0]] = C64::new(0.5, -0.5);
        m[[1, 1]] = C64::new(2.0, 0.0);
        let mut eigs = hermitian_eigenvalues(&m);
        eigs.sort_by(f64::total_cmp);
        // |0.5 + 0.5i| = sqrt(0.5); eigenvalues are 2 ± sqrt(0.5)
        assert!((eigs[0] - (2.0 - 0.5f64.sqrt())).abs() < 1e-10);
        assert!((eigs[1] - (2.0 + 0.5f64.sqrt())).abs() < 1e-10);
    }
}
