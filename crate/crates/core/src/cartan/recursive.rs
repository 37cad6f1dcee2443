//! Four spatial modes: one level of recursion on top of the two-mode factorization.
//!
//! An 8×8 unitary in SP order `{a₁H, a₁V, …, a₄V}` is split at `{a₁, a₂ | a₃, a₄}`:
//!
//! ```text
//! U = (L_top ⊕ L_bot) · CS(θ₀, θ₁, θ₂, θ₃) · (R_top ⊕ R_bot)
//! ```
//!
//! `CS` couples `a₁H↔a₃H`, `a₁V↔a₃V`, `a₂H↔a₄H`, `a₂V↔a₄V`. Restricted to the
//! mode pair `(a₁, a₃)` it is the two-mode cosine-sine factor, which equals
//! `G·(−iσz ⊕ −iσz)·core(θ₀/2, θ₁/2)·G` with `G = σx ⊕ σz`; likewise for
//! `(a₂, a₄)`. The fixed factors are folded into the four 4×4 blocks.

use super::pbs_sp;
use crate::error::{Error, Result};
use crate::matrix::{cis, csd_halves, ensure_unitary, pauli, ComplexMatrix, ToleranceConfig, I};
use crate::waveplate::hwp_matrix;

/// Factors `(L_top ⊕ L_bot)·central_layer(angles)·(R_top ⊕ R_bot)·e^{i·global_phase}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveFactors {
    /// 4×4 blocks on `(a₁, a₂)` and `(a₃, a₄)`, SP order.
    pub left_blocks: [ComplexMatrix; 2],
    pub right_blocks: [ComplexMatrix; 2],
    /// Cosine-sine angles for `a₁H↔a₃H`, `a₁V↔a₃V`, `a₂H↔a₄H`, `a₂V↔a₄V`, each in `[0, π/2]`.
    pub angles: [f64; 4],
    pub global_phase: f64,
}

impl RecursiveFactors {
    pub fn reassemble(&self) -> ComplexMatrix {
        let l = ComplexMatrix::direct_sum(&[&self.left_blocks[0], &self.left_blocks[1]]);
        let r = ComplexMatrix::direct_sum(&[&self.right_blocks[0], &self.right_blocks[1]]);
        (&(&l * &central_layer(&self.angles)) * &r).scale(cis(self.global_phase))
    }

    /// HWP angles of the central layer as `(mode, angle)`, mode-pair gadgets
    /// `(a₁, a₃)` then `(a₂, a₄)`.
    pub fn hwp_angles(&self) -> [(usize, f64); 4] {
        let a = self.angles;
        [
            (0, a[0] / 2.0),
            (2, a[1] / 2.0),
            (1, a[2] / 2.0),
            (3, a[3] / 2.0),
        ]
    }
}

/// The two `PBS·(HWP ⊕ HWP)·PBS` gadgets on `(a₁, a₃)` and `(a₂, a₄)`, SP order.
pub fn central_layer(angles: &[f64; 4]) -> ComplexMatrix {
    let mut gates = vec![ComplexMatrix::identity(2); 4];
    gates[0] = hwp_matrix(angles[0] / 2.0);
    gates[2] = hwp_matrix(angles[1] / 2.0);
    gates[1] = hwp_matrix(angles[2] / 2.0);
    gates[3] = hwp_matrix(angles[3] / 2.0);
    let refs: Vec<&ComplexMatrix> = gates.iter().collect();
    let plates = ComplexMatrix::direct_sum(&refs);
    let pbs = &pbs_sp(4, 0, 2) * &pbs_sp(4, 1, 3);
    &(&pbs * &plates) * &pbs
}

/// Recursive factorization of an 8×8 unitary in SP order.
pub fn decompose_m4(u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<RecursiveFactors> {
    if u.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: u.dim(),
        });
    }
    ensure_unitary(u, tol)?;
    let csd = csd_halves(u, tol)?;
    let [lt, lb] = &csd.left;
    let [rt, rb] = &csd.right;
    let global_phase = u.determinant().arg() / 8.0;
    let unphase = cis(-global_phase);

    let x_mz = (&pauli::x() * &pauli::z()).scale(-I);
    let x2 = ComplexMatrix::direct_sum(&[&pauli::x(), &pauli::x()]);
    let z2 = ComplexMatrix::direct_sum(&[&pauli::z(), &pauli::z()]);
    let left_top = (lt * &ComplexMatrix::direct_sum(&[&x_mz, &x_mz])).scale(unphase);
    let left_bottom = lb.scale(-I * unphase);
    Ok(RecursiveFactors {
        left_blocks: [left_top, left_bottom],
        right_blocks: [&x2 * rt, &z2 * rb],
        angles: [csd.angles[0], csd.angles[1], csd.angles[2], csd.angles[3]],
        global_phase,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::matrix::{cs_matrix, haar_random_unitary, is_unitary};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn central_layer_is_a_conjugated_cs_factor() {
        let angles = [1.1, 0.3, 0.9, 0.0];
        let g = ComplexMatrix::direct_sum(&[&pauli::x(), &pauli::x(), &pauli::z(), &pauli::z()]);
        let mz = pauli::z().scale(-I);
        let b = ComplexMatrix::direct_sum(&[&mz, &mz, &mz, &mz]);
        let want = cs_matrix(&angles);
        let got = &(&(&g * &b) * &central_layer(&angles)) * &g;
        assert!(got.max_diff(&want) < 1e-15);
    }

    #[test]
    fn identity_gives_zero_angles() {
        let f = decompose_m4(&ComplexMatrix::identity(8), &tol()).unwrap();
        assert_eq!(f.angles, [0.0; 4]);
        assert!(f.reassemble().max_diff(&ComplexMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn outer_mode_swap_gives_quarter_turns() {
        // a₁ ↔ a₃, a₂ ↔ a₄
        let x = pauli::x().kron(&ComplexMatrix::identity(4));
        let f = decompose_m4(&x, &tol()).unwrap();
        for a in f.angles {
            assert!((a - FRAC_PI_2).abs() < 1e-12, "{:?}", f.angles);
        }
        assert!(f.reassemble().max_diff(&x) < 1e-12);
    }

    #[test]
    fn block_diagonal_input_has_no_coupling() {
        let v = haar_random_unitary(4, 1).unwrap();
        let w = haar_random_unitary(4, 2).unwrap();
        let u = ComplexMatrix::direct_sum(&[&v, &w]);
        let f = decompose_m4(&u, &tol()).unwrap();
        assert!(f.angles.iter().all(|a| a.abs() < 1e-12));
        assert!(f.reassemble().max_diff(&u) < 1e-12);
    }

    #[test]
    fn haar_round_trip() {
        for seed in 0..200 {
            let u = haar_random_unitary(8, seed).unwrap();
            let f = decompose_m4(&u, &tol()).unwrap();
            assert!(f.reassemble().max_diff(&u) < 1e-11, "seed {seed}");
            for b in f.left_blocks.iter().chain(&f.right_blocks) {
                assert!(is_unitary(b, &tol()));
            }
        }
    }

    #[test]
    fn hwp_angles_follow_gadget_order() {
        let f = RecursiveFactors {
            left_blocks: [ComplexMatrix::identity(4), ComplexMatrix::identity(4)],
            right_blocks: [ComplexMatrix::identity(4), ComplexMatrix::identity(4)],
            angles: [0.4, 0.2, 0.6, 0.8],
            global_phase: 0.0,
        };
        assert_eq!(f.hwp_angles(), [(0, 0.2), (2, 0.1), (1, 0.3), (3, 0.4)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decompose_m4(&ComplexMatrix::identity(4), &tol()).is_err());
        let m = ComplexMatrix::from_fn(8, |_, _| I);
        assert!(decompose_m4(&m, &tol()).is_err());
    }
}
