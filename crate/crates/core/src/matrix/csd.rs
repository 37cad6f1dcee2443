//! Equal-partition cosine-sine decomposition.
//!
//! For a unitary `U` of even dimension `2n` split into `n × n` blocks,
//!
//! ```text
//! U = diag(L_top, L_bottom) · [[C, −S], [S, C]] · diag(R_top, R_bottom)
//! ```
//!
//! with `C = diag(cos θ_k)`, `S = diag(sin θ_k)`, `θ_k ∈ [0, π/2]`.
//!
//! The top blocks come from an SVD of `U₁₁`. The bottom-left factor is read off
//! `U₂₁·R_top†`, whose columns are mutually orthogonal with norms `sin θ_k`;
//! the angles use `atan2(‖col‖, σ_k)` so that neither the sine nor the cosine
//! is recovered through `sqrt(1 − x²)`. `R_bottom` is then assembled row by row
//! as `c_k·(L_bottom†U₂₂)_k − s_k·(L_top†U₁₂)_k`, which needs no division and is
//! unitary whenever the input is.

use nalgebra::{DMatrix, DVector, SVD};

use super::{ensure_unitary, ComplexMatrix, ToleranceConfig, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// The central cosine-sine factor `[[C, −S], [S, C]]` for the given angles.
pub fn cs_matrix(angles: &[f64]) -> ComplexMatrix {
    let n = angles.len();
    let mut m = ComplexMatrix::zeros(2 * n);
    for (k, &t) in angles.iter().enumerate() {
        let (s, c) = t.sin_cos();
        m[(k, k)] = C64::new(c, 0.0);
        m[(n + k, n + k)] = C64::new(c, 0.0);
        m[(k, n + k)] = C64::new(-s, 0.0);
        m[(n + k, k)] = C64::new(s, 0.0);
    }
    m
}

/// Factors of a cosine-sine decomposition at the midpoint partition.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HalfCsd {
    pub left: [ComplexMatrix; 2],
    pub right: [ComplexMatrix; 2],
    pub angles: Vec<f64>,
}

#[cfg(test)]
impl HalfCsd {
    pub fn reassemble(&self) -> ComplexMatrix {
        let l = ComplexMatrix::direct_sum(&[&self.left[0], &self.left[1]]);
        let r = ComplexMatrix::direct_sum(&[&self.right[0], &self.right[1]]);
        &(&l * &cs_matrix(&self.angles)) * &r
    }
}

/// Two-by-two block CSD of a 4×4 unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCsdResult {
    pub left_blocks: [ComplexMatrix; 2],
    pub right_blocks: [ComplexMatrix; 2],
    /// `(θ_a, θ_b)`, each in `[0, π/2]`, with `θ_a ≥ θ_b`.
    pub angles: [f64; 2],
}

impl BlockCsdResult {
    pub fn reassemble(&self) -> ComplexMatrix {
        let l = ComplexMatrix::direct_sum(&[&self.left_blocks[0], &self.left_blocks[1]]);
        let r = ComplexMatrix::direct_sum(&[&self.right_blocks[0], &self.right_blocks[1]]);
        &(&l * &cs_matrix(&self.angles)) * &r
    }
}

/// Cosine-sine decomposition of a 4×4 unitary in its natural 2 + 2 partition.
pub fn block_csd(u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<BlockCsdResult> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: u.dim(),
        });
    }
    let HalfCsd {
        left,
        right,
        angles,
    } = csd_halves(u, tol)?;
    Ok(BlockCsdResult {
        left_blocks: left,
        right_blocks: right,
        angles: [angles[0], angles[1]],
    })
}

pub(crate) fn csd_halves(u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<HalfCsd> {
    if u.dim() < 2 || !u.dim().is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(u.dim()));
    }
    ensure_unitary(u, tol)?;
    let n = u.dim() / 2;
    let m = u.inner();
    let u11 = m.view((0, 0), (n, n)).into_owned();
    let u12 = m.view((0, n), (n, n)).into_owned();
    let u21 = m.view((n, 0), (n, n)).into_owned();
    let u22 = m.view((n, n), (n, n)).into_owned();

    let svd = SVD::try_new_unordered(u11, true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD of the upper-left block did not converge".into()))?;
    let (w, vt) = match (svd.u, svd.v_t) {
        (Some(w), Some(vt)) => (w, vt),
        _ => return Err(Error::Numerical("SVD returned no singular vectors".into())),
    };

    // Ascending singular values put the largest angle first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));

    let mut l_top = DMatrix::from_element(n, n, ZERO);
    let mut r_top = DMatrix::from_element(n, n, ZERO);
    let mut cosines = vec![0.0; n];
    for (k, &src) in order.iter().enumerate() {
        let mut col = w.column(src).into_owned();
        let mut row = vt.row(src).into_owned();
        // First non-negligible component of each left singular vector is real and >= 0.
        if let Some(lead) = col.iter().find(|z| z.norm() > tol.angle_tol) {
            let ph = lead.conj() / lead.norm();
            col *= ph;
            row *= ph.conj();
        }
        l_top.set_column(k, &col);
        r_top.set_row(k, &row);
        cosines[k] = svd.singular_values[src].clamp(0.0, 1.0);
    }

    let y = &u21 * r_top.adjoint();
    let sines: Vec<f64> = (0..n).map(|k| y.column(k).norm()).collect();
    let angles: Vec<f64> = (0..n).map(|k| sines[k].atan2(cosines[k])).collect();

    let l_bottom = orthonormal_columns_like(&y);

    let t = l_top.adjoint() * &u12;
    let b = l_bottom.adjoint() * &u22;
    let mut r_bottom = DMatrix::from_element(n, n, ZERO);
    for (k, a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        let row = b.row(k) * C64::new(c, 0.0) - t.row(k) * C64::new(s, 0.0);
        r_bottom.set_row(k, &row);
    }

    Ok(HalfCsd {
        left: [
            ComplexMatrix::from_inner(l_top),
            ComplexMatrix::from_inner(l_bottom),
        ],
        right: [
            ComplexMatrix::from_inner(r_top),
            ComplexMatrix::from_inner(r_bottom),
        ],
        angles,
    })
}

/// Orthonormal basis `Q` whose column `k` is parallel to column `k` of `y`
/// with a real non-negative overlap, for `y` with (numerically) orthogonal
/// columns. Columns are processed largest-first; vanishing columns are
/// completed deterministically from the standard basis.
fn orthonormal_columns_like(y: &DMatrix<C64>) -> DMatrix<C64> {
    let n = y.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y.column(b).norm().total_cmp(&y.column(a).norm()));

    let mut q = DMatrix::from_element(y.nrows(), n, ZERO);
    let mut done: Vec<usize> = Vec::with_capacity(n);
    for &k in &order {
        let basis: Vec<DVector<C64>> = done.iter().map(|&j| q.column(j).into_owned()).collect();
        let mut v = y.column(k).into_owned();
        let mut ok = false;
        if v.norm() > 0.0 {
            v /= C64::new(v.norm(), 0.0);
            project_out(&mut v, &basis);
            project_out(&mut v, &basis);
            let norm = v.norm();
            if norm > 0.5 {
                v /= C64::new(norm, 0.0);
                ok = true;
            }
        }
        if !ok {
            v = completion_vector(y.nrows(), &basis);
        }
        q.set_column(k, &v);
        done.push(k);
    }
    q
}

fn project_out(v: &mut DVector<C64>, basis: &[DVector<C64>]) {
    for b in basis {
        let coeff = b.dotc(v);
        *v -= b * coeff;
    }
}

fn completion_vector(dim: usize, basis: &[DVector<C64>]) -> DVector<C64> {
    let mut best: Option<DVector<C64>> = None;
    let mut best_norm = -1.0;
    for e in 0..dim {
        let mut v = DVector::from_element(dim, ZERO);
        v[e] = ONE;
        project_out(&mut v, basis);
        project_out(&mut v, basis);
        let norm = v.norm();
        if norm > best_norm + 1e-12 {
            best_norm = norm;
            best = Some(v);
        }
    }
    let v = best.expect("dimension is positive");
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}
