//! Dense complex matrices and the numerical kernels the compiler is built on.
//!
//! Everything here works in the max-entry norm: `‖M‖_max = max |M_ij|`.
//! Tolerances are absolute thresholds in that norm.

mod csd;
mod json;
pub mod pauli;
mod random;

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) use csd::csd_halves;
pub use csd::{block_csd, cs_matrix, BlockCsdResult};
pub use json::MatrixJson;
pub use random::haar_random_unitary;

/// Shorthand for the scalar type used throughout.
pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `[0, π)`.
pub fn wrap_pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(PI);
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Dense square complex matrix, row-major when viewed through indexing.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::from_element(dim, dim, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (k, &z) in entries.iter().enumerate() {
            m[(k, k)] = z;
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be `dim²`.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_slice(dim, &flat)
    }

    /// Builds a matrix of real entries from rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`; panics on dimension mismatch.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_diff on mismatched dims");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.dim(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    /// The `size × size` block whose top-left corner sits at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        Self(self.0.view((row, col), (size, size)).into_owned())
    }

    /// Block-diagonal direct sum of the given matrices.
    pub fn direct_sum(blocks: &[&ComplexMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim()).sum();
        let mut m = Self::zeros(dim);
        let mut off = 0;
        for b in blocks {
            m.0.view_mut((off, off), (b.dim(), b.dim())).copy_from(&b.0);
            off += b.dim();
        }
        m
    }

    /// Relabels basis states: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`. Equivalent to `P·M·Pᵀ` with `P e_{perm[i]} = e_i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim());
        Self::from_fn(self.dim(), |i, j| self.0[(perm[i], perm[j])])
    }

    /// Embeds a 2×2 operator on the basis pair `(p, q)` of a `dim`-dimensional
    /// space, identity elsewhere.
    pub fn embed_pair(dim: usize, op: &ComplexMatrix, p: usize, q: usize) -> Self {
        assert_eq!(op.dim(), 2);
        let mut m = Self::identity(dim);
        let idx = [p, q];
        for (a, &r) in idx.iter().enumerate() {
            for (b, &c) in idx.iter().enumerate() {
                m.0[(r, c)] = op.0[(a, b)];
            }
        }
        m
    }

    /// True when every off-diagonal entry is at most `tol` in modulus.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim()).all(|r| (0..self.dim()).all(|c| r == c || self.0[(r, c)].norm() <= tol))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix product on mismatched dims");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum on mismatched dims");
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "matrix difference on mismatched dims"
        );
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.0[(r, c)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Numerical thresholds shared by every stage of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Max-entry bound on `M†M − I` for a matrix to count as unitary.
    pub unitarity_tol: f64,
    /// Max-entry bound for two unitaries to count as equal (up to phase where stated).
    pub equivalence_tol: f64,
    /// Threshold below which an angle, plate, or residual is treated as zero.
    pub angle_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            unitarity_tol: 1e-10,
            equivalence_tol: 1e-9,
            angle_tol: 1e-12,
        }
    }
}

impl ToleranceConfig {
    /// Defaults with a caller-supplied equivalence tolerance. The unitarity
    /// tolerance is lowered to match when the override is tighter than it.
    pub fn with_equivalence(tol: f64) -> Result<Self> {
        let base = Self::default();
        let cfg = Self {
            unitarity_tol: base.unitarity_tol.min(tol),
            equivalence_tol: tol,
            angle_tol: base.angle_tol.min(tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.unitarity_tol, self.equivalence_tol, self.angle_tol]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !all_positive {
            return Err(Error::InvalidTolerance(format!(
                "all tolerances must be finite and strictly positive: {self:?}"
            )));
        }
        if self.equivalence_tol < self.unitarity_tol {
            return Err(Error::InvalidTolerance(format!(
                "equivalence_tol {} is smaller than unitarity_tol {}",
                self.equivalence_tol, self.unitarity_tol
            )));
        }
        Ok(())
    }
}

/// `‖M†M − I‖_max`.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let g = m.adjoint() * m.clone();
    g.max_diff(&ComplexMatrix::identity(m.dim()))
}

pub fn is_unitary(m: &ComplexMatrix, tol: &ToleranceConfig) -> bool {
    unitarity_residual(m) <= tol.unitarity_tol
}

/// Fails with [`Error::NotUnitary`] naming the residual when `m` is not unitary.
pub fn ensure_unitary(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    let residual = unitarity_residual(m);
    if residual <= tol.unitarity_tol {
        Ok(())
    } else {
        Err(Error::NotUnitary {
            residual,
            tol: tol.unitarity_tol,
        })
    }
}

/// Result of a global-phase-aware comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDistance {
    /// `‖e^{i·phase}·A − B‖_max`.
    pub distance: f64,
    /// `arg tr(A†B)`, or 0 when the trace vanishes.
    pub phase: f64,
}

/// Compares `a` and `b` up to a global phase.
///
/// The phase is taken from `tr(A†B)`, which is the maximizer of
/// `Re tr(e^{-iφ}A†B)` and so aligns `a` onto `b` in the Frobenius sense.
pub fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<PhaseDistance> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let overlap = (a.adjoint() * b.clone()).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap.arg()
    } else {
        0.0
    };
    let distance = a.scale(cis(phase)).max_diff(b);
    Ok(PhaseDistance { distance, phase })
}
