//! Two-qubit Cartan factorizations of single-photon unitaries.
//!
//! Both conventions write a 4×4 unitary as `(L₁ ⊕ L₂)·A·(R₁ ⊕ R₂)`, where the
//! `L`, `R` are polarization gates local to spatial modes `a₁`, `a₂` and `A`
//! is generated by a two-dimensional Cartan subalgebra with parameters
//! `θ₁ = α + β`, `θ₂ = α − β`.
//!
//! Numerically the split is a cosine-sine decomposition in spatial-polarization
//! order, where mode-local gates are block diagonal. The central factor `A`
//! is in turn a fixed conjugate of the physical core
//! `PBS·(HWP ⊕ HWP)·PBS`; [`CartanFactors::physical`] folds those fixed
//! matrices into the outer gates.

mod lie;
mod recursive;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lie::{check_cartan_conditions, lie_span, CartanConditions, LieSpan};
pub use recursive::{central_layer, decompose_m4, RecursiveFactors};

use crate::error::{Error, Result};
use crate::matrix::{
    block_csd, cis, ensure_unitary, pauli, ComplexMatrix, ToleranceConfig, C64, I,
};
use crate::waveplate::hwp_matrix;

/// Which degree of freedom is the outer tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DofConvention {
    /// Basis `{|Ha₁⟩, |Ha₂⟩, |Va₁⟩, |Va₂⟩}`.
    #[serde(rename = "ps")]
    PolarizationSpatial,
    /// Basis `{|a₁H⟩, |a₁V⟩, |a₂H⟩, |a₂V⟩}`, and likewise for four modes.
    #[serde(rename = "sp")]
    SpatialPolarization,
}

impl DofConvention {
    pub fn tag(self) -> &'static str {
        match self {
            Self::PolarizationSpatial => "ps",
            Self::SpatialPolarization => "sp",
        }
    }

    /// Basis labels in this convention's order for `modes` spatial modes.
    pub fn basis_labels(self, modes: usize) -> Vec<String> {
        (0..2 * modes)
            .map(|i| {
                let (mode, pol) = self.mode_and_pol(i, modes);
                let p = if pol == 0 { 'H' } else { 'V' };
                match self {
                    Self::PolarizationSpatial => format!("{p}a{}", mode + 1),
                    Self::SpatialPolarization => format!("a{}{p}", mode + 1),
                }
            })
            .collect()
    }

    /// `(mode, polarization)` of basis index `i`.
    fn mode_and_pol(self, i: usize, modes: usize) -> (usize, usize) {
        match self {
            Self::PolarizationSpatial => (i % modes, i / modes),
            Self::SpatialPolarization => (i / 2, i % 2),
        }
    }

    /// Index of `(mode, pol)` in this convention's order.
    fn index_of(self, mode: usize, pol: usize, modes: usize) -> usize {
        match self {
            Self::PolarizationSpatial => pol * modes + mode,
            Self::SpatialPolarization => 2 * mode + pol,
        }
    }

    /// Re-expresses `m`, given in this convention's order, in SP order.
    pub fn to_sp_order(self, m: &ComplexMatrix) -> ComplexMatrix {
        let modes = m.dim() / 2;
        let perm: Vec<usize> = (0..m.dim())
            .map(|s| self.index_of(s / 2, s % 2, modes))
            .collect();
        m.permuted(&perm)
    }

    /// Re-expresses `m`, given in SP order, in this convention's order.
    pub fn from_sp_order(self, m: &ComplexMatrix) -> ComplexMatrix {
        let modes = m.dim() / 2;
        let perm: Vec<usize> = (0..m.dim())
            .map(|i| {
                let (mode, pol) = self.mode_and_pol(i, modes);
                2 * mode + pol
            })
            .collect();
        m.permuted(&perm)
    }
}

impl fmt::Display for DofConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DofConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ps" => Ok(Self::PolarizationSpatial),
            "sp" => Ok(Self::SpatialPolarization),
            other => Err(Error::Schema(format!(
                "unknown convention {other:?}, expected \"ps\" or \"sp\""
            ))),
        }
    }
}

/// Mode-local polarization gates as one matrix in the convention's order.
pub fn embed_mode_gates(gates: &[&ComplexMatrix], convention: DofConvention) -> ComplexMatrix {
    convention.from_sp_order(&ComplexMatrix::direct_sum(gates))
}

/// The central factor `A = exp(i(α·h₁ + β·h₂))` in the convention's basis order.
///
/// PS: `h = {I⊗σx, σz⊗σx}`, giving `diag(e^{iθ₁σx}, e^{iθ₂σx})`.
/// SP: `h = {σx⊗σy, σy⊗σx}`, a real rotation by `θ₁` on `{a₁H, a₂V}` and by
/// `−θ₂` on `{a₁V, a₂H}`.
pub fn central_a(alpha: f64, beta: f64, convention: DofConvention) -> ComplexMatrix {
    let (s1, c1) = (alpha + beta).sin_cos();
    let (s2, c2) = (alpha - beta).sin_cos();
    let re = |x: f64| C64::new(x, 0.0);
    let mut m = ComplexMatrix::identity(4);
    match convention {
        DofConvention::PolarizationSpatial => {
            for (off, c, s) in [(0, c1, s1), (2, c2, s2)] {
                m[(off, off)] = re(c);
                m[(off + 1, off + 1)] = re(c);
                m[(off, off + 1)] = I * s;
                m[(off + 1, off)] = I * s;
            }
        }
        DofConvention::SpatialPolarization => {
            m[(0, 0)] = re(c1);
            m[(3, 3)] = re(c1);
            m[(0, 3)] = re(s1);
            m[(3, 0)] = re(-s1);
            m[(1, 1)] = re(c2);
            m[(2, 2)] = re(c2);
            m[(1, 2)] = re(-s2);
            m[(2, 1)] = re(s2);
        }
    }
    m
}

/// PBS between two spatial modes in SP order: swaps their H components.
pub(crate) fn pbs_sp(modes: usize, p: usize, q: usize) -> ComplexMatrix {
    let mut perm: Vec<usize> = (0..2 * modes).collect();
    perm.swap(2 * p, 2 * q);
    ComplexMatrix::from_fn(2 * modes, |i, j| {
        if perm[i] == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `PBS·(HWP(φ₁) ⊕ HWP(φ₂))·PBS` on two modes, SP order.
pub fn hwp_core(phi_a1: f64, phi_a2: f64) -> ComplexMatrix {
    let pbs = pbs_sp(2, 0, 1);
    let plates = ComplexMatrix::direct_sum(&[&hwp_matrix(phi_a1), &hwp_matrix(phi_a2)]);
    &(&pbs * &plates) * &pbs
}

/// Factors `(L₁ ⊕ L₂)·A(α, β)·(R₁ ⊕ R₂)·e^{i·global_phase}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanFactors {
    pub convention: DofConvention,
    /// `[L₁, L₂]`, acting on modes `a₁`, `a₂`.
    pub left_gates: [ComplexMatrix; 2],
    /// `[R₁, R₂]`, acting on modes `a₁`, `a₂`.
    pub right_gates: [ComplexMatrix; 2],
    pub alpha: f64,
    pub beta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub global_phase: f64,
}

/// Gates around the physical core `PBS·(HWP ⊕ HWP)·PBS`, with the fixed
/// bookend matrices and the global phase folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFactors {
    pub left_gates: [ComplexMatrix; 2],
    pub right_gates: [ComplexMatrix; 2],
    /// Central HWP angles on `a₁` and `a₂`.
    pub hwp_angles: [f64; 2],
}

impl PhysicalFactors {
    /// Exact product in the given convention's order.
    pub fn reassemble(&self, convention: DofConvention) -> ComplexMatrix {
        let l = ComplexMatrix::direct_sum(&[&self.left_gates[0], &self.left_gates[1]]);
        let r = ComplexMatrix::direct_sum(&[&self.right_gates[0], &self.right_gates[1]]);
        let core = hwp_core(self.hwp_angles[0], self.hwp_angles[1]);
        convention.from_sp_order(&(&(&l * &core) * &r))
    }
}

impl CartanFactors {
    /// `θ₁ = θ₂ = 0` with identity gates.
    pub fn identity(convention: DofConvention) -> Self {
        Self {
            convention,
            left_gates: [ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            right_gates: [ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            alpha: 0.0,
            beta: 0.0,
            theta1: 0.0,
            theta2: 0.0,
            global_phase: 0.0,
        }
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let [l1, l2] = &self.left_gates;
        let [r1, r2] = &self.right_gates;
        let l = embed_mode_gates(&[l1, l2], self.convention);
        let r = embed_mode_gates(&[r1, r2], self.convention);
        let a = central_a(self.alpha, self.beta, self.convention);
        (&(&l * &a) * &r).scale(cis(self.global_phase))
    }

    /// The same factorization around `PBS·(HWP ⊕ HWP)·PBS`.
    ///
    /// PS: `A = (iσx ⊕ σz)·core(θ₁/2, θ₂/2)·(−iσy ⊕ −iI)`.
    /// SP: `Ã = (−iσz ⊕ −iσz)·core(θ₂/2, θ₁/2)`.
    pub fn physical(&self) -> PhysicalFactors {
        let ph = cis(self.global_phase);
        let [l1, l2] = &self.left_gates;
        let [r1, r2] = &self.right_gates;
        match self.convention {
            DofConvention::PolarizationSpatial => PhysicalFactors {
                left_gates: [
                    (l1 * &pauli::x()).scale(I * ph),
                    (l2 * &pauli::z()).scale(ph),
                ],
                right_gates: [(&pauli::y() * r1).scale(-I), r2.scale(-I)],
                hwp_angles: [self.theta1 / 2.0, self.theta2 / 2.0],
            },
            DofConvention::SpatialPolarization => PhysicalFactors {
                left_gates: [
                    (l1 * &pauli::z()).scale(-I * ph),
                    (l2 * &pauli::z()).scale(-I * ph),
                ],
                right_gates: [r1.clone(), r2.clone()],
                hwp_angles: [self.theta2 / 2.0, self.theta1 / 2.0],
            },
        }
    }
}

/// Cartan factorization of a 4×4 unitary given in `convention`'s basis order.
///
/// The global phase is `arg(det U)/4`; the remaining `U(2)` freedom stays in
/// the left gates. Both `θ` lie in `[0, π/2]`. When both vanish (within
/// `angle_tol`) the right gates are folded into the left ones and set to `I`.
pub fn decompose(
    u: &ComplexMatrix,
    convention: DofConvention,
    tol: &ToleranceConfig,
) -> Result<CartanFactors> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: u.dim(),
        });
    }
    ensure_unitary(u, tol)?;
    let csd = block_csd(&convention.to_sp_order(u), tol)?;
    let [lt, lb] = &csd.left_blocks;
    let [rt, rb] = &csd.right_blocks;
    let [ta, tb] = csd.angles;
    let global_phase = u.determinant().arg() / 4.0;
    let unphase = cis(-global_phase);

    // With C, S = diag(cos, sin)(θa, θb):
    //   PS: [[C, −S], [S, C]] = diag(I, −iI)·A·diag(I, iI), A coupling a₁ ↔ a₂ per polarization.
    //   SP: [[C, −S], [S, C]] = G·Ã(θ₁ = θb, θ₂ = θa)·G with G = σx ⊕ σz.
    let (left_gates, right_gates, theta1, theta2) = match convention {
        DofConvention::PolarizationSpatial => (
            [lt.scale(unphase), lb.scale(-I * unphase)],
            [rt.clone(), rb.scale(I)],
            ta,
            tb,
        ),
        DofConvention::SpatialPolarization => (
            [
                (lt * &pauli::x()).scale(unphase),
                (lb * &pauli::z()).scale(unphase),
            ],
            [&pauli::x() * rt, &pauli::z() * rb],
            tb,
            ta,
        ),
    };
    // A vanishing central factor leaves only the products L_k·R_k.
    if theta1 <= tol.angle_tol && theta2 <= tol.angle_tol {
        let [l1, l2] = left_gates;
        let [r1, r2] = right_gates;
        return Ok(CartanFactors {
            left_gates: [&l1 * &r1, &l2 * &r2],
            global_phase,
            ..CartanFactors::identity(convention)
        });
    }
    Ok(CartanFactors {
        convention,
        left_gates,
        right_gates,
        alpha: 0.5 * (theta1 + theta2),
        beta: 0.5 * (theta1 - theta2),
        theta1,
        theta2,
        global_phase,
    })
}

impl ComplexMatrix {
    /// True when `self` is `e^{iφ}·I` within `tol`.
    pub fn is_scalar(&self, tol: f64) -> bool {
        let z = self[(0, 0)];
        (z.norm() - 1.0).abs() <= tol
            && self.max_diff(&ComplexMatrix::identity(self.dim()).scale(z)) <= tol
    }
}
