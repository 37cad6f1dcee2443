//! Recursive Lie-algebra splittings `g = l ⊕ p` with Cartan subalgebra `h ⊂ p`.
//!
//! Generators are `i` times Pauli words, so every basis element is
//! anti-Hermitian. Words are written outermost factor first.
//!
//! PS convention (new qubit innermost):
//!
//! ```text
//! l = { su(2^{n−1}) ⊗ I, u(2^{n−1}) ⊗ σz },  p = { u(2^{n−1}) ⊗ σx, u(2^{n−1}) ⊗ σy }
//! h_{2^n} = { I ⊗ h_{2^{n−1}}, σz ⊗ h_{2^{n−1}} },  h_2 = { σx }
//! ```
//!
//! SP convention (new qubit outermost):
//!
//! ```text
//! l = { I ⊗ su(2^{n−1}), σz ⊗ u(2^{n−1}) },  p = { σx ⊗ u(2^{n−1}), σy ⊗ u(2^{n−1}) }
//! h_4 = { σx⊗σy, σy⊗σx },  h_{2^n} = { h_{2^{n−1}} ⊗ I, h_{2^{n−1}} ⊗ σz }
//! ```

use nalgebra::{DMatrix, DVector};

use super::DofConvention;
use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, ToleranceConfig, I};

const ID: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

/// Bases of `l`, `p` and `h` at level `n` (matrices of dimension `2^n`).
#[derive(Debug, Clone, PartialEq)]
pub struct LieSpan {
    pub n: usize,
    pub convention: DofConvention,
    pub l_basis: Vec<ComplexMatrix>,
    pub p_basis: Vec<ComplexMatrix>,
    pub h_basis: Vec<ComplexMatrix>,
}

/// Outcome of the brute-force commutator checks on a [`LieSpan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartanConditions {
    /// `[l, l] ⊆ l`
    pub ll_in_l: bool,
    /// `[l, p] ⊆ p`
    pub lp_in_p: bool,
    /// `[p, p] ⊆ l`
    pub pp_in_l: bool,
    /// Every pair of `h` elements commutes.
    pub h_abelian: bool,
    /// Every `p` element outside `span(h)` fails to commute with some `h` element.
    pub h_maximal: bool,
    /// Every `h` element lies in `span(p)`.
    pub h_in_p: bool,
}

impl CartanConditions {
    pub fn all_hold(&self) -> bool {
        self.ll_in_l
            && self.lp_in_p
            && self.pp_in_l
            && self.h_abelian
            && self.h_maximal
            && self.h_in_p
    }
}

/// All Pauli words of length `len`, in lexicographic index order.
fn words(len: usize) -> Vec<Vec<usize>> {
    (0..4usize.pow(len as u32))
        .map(|mut code| {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = code % 4;
                code /= 4;
            }
            w
        })
        .collect()
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn cartan_words(n: usize, convention: DofConvention) -> Vec<Vec<usize>> {
    match (convention, n) {
        (_, 1) => vec![vec![X]],
        (DofConvention::SpatialPolarization, 2) => vec![vec![X, Y], vec![Y, X]],
        (DofConvention::PolarizationSpatial, _) => {
            let prev = cartan_words(n - 1, convention);
            [ID, Z]
                .iter()
                .flat_map(|&head| prev.iter().map(move |w| concat(&[head], w)))
                .collect()
        }
        (DofConvention::SpatialPolarization, _) => {
            let prev = cartan_words(n - 1, convention);
            [ID, Z]
                .iter()
                .flat_map(|&tail| prev.iter().map(move |w| concat(w, &[tail])))
                .collect()
        }
    }
}

/// Generators of the splitting at level `n ∈ {1, 2, 3}`.
pub fn lie_span(n: usize, convention: DofConvention) -> Result<LieSpan> {
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!(
            "Lie span level {n} is outside 1..=3"
        )));
    }
    let rest = words(n - 1);
    let identity = vec![ID; n - 1];
    let attach = |w: &[usize], q: usize| match convention {
        DofConvention::PolarizationSpatial => concat(w, &[q]),
        DofConvention::SpatialPolarization => concat(&[q], w),
    };
    let mut l_words = Vec::new();
    let mut p_words = Vec::new();
    for w in &rest {
        if *w != identity {
            l_words.push(attach(w, ID));
        }
        l_words.push(attach(w, Z));
        p_words.push(attach(w, X));
        p_words.push(attach(w, Y));
    }
    let gen = |ws: Vec<Vec<usize>>| ws.iter().map(|w| pauli::word(w).scale(I)).collect();
    Ok(LieSpan {
        n,
        convention,
        l_basis: gen(l_words),
        p_basis: gen(p_words),
        h_basis: gen(cartan_words(n, convention)),
    })
}

/// Least-squares membership test for the real span of a set of matrices.
struct RealSpan {
    basis: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

fn realify(m: &ComplexMatrix) -> DVector<f64> {
    let entries = m.inner();
    DVector::from_iterator(2 * entries.len(), entries.iter().flat_map(|z| [z.re, z.im]))
}

impl RealSpan {
    fn new(mats: &[ComplexMatrix]) -> Self {
        let len = mats.first().map_or(0, |m| 2 * m.dim() * m.dim());
        let cols: Vec<DVector<f64>> = mats.iter().map(realify).collect();
        let basis = if cols.is_empty() {
            DMatrix::zeros(len, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        let pinv = if cols.is_empty() {
            DMatrix::zeros(0, len)
        } else {
            basis
                .clone()
                .pseudo_inverse(1e-12)
                .expect("pseudo-inverse with non-negative epsilon")
        };
        Self { basis, pinv }
    }

    /// Max-entry residual of the orthogonal projection of `m` onto the span.
    fn residual(&self, m: &ComplexMatrix) -> f64 {
        let v = realify(m);
        if self.basis.ncols() == 0 {
            return v.amax();
        }
        let proj = &self.basis * (&self.pinv * &v);
        (v - proj).amax()
    }

    fn contains(&self, m: &ComplexMatrix, tol: f64) -> bool {
        self.residual(m) <= tol
    }
}

fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

/// Brute-force check of the Cartan conditions with membership residual
/// threshold `tol.angle_tol`.
pub fn check_cartan_conditions(span: &LieSpan, tol: &ToleranceConfig) -> CartanConditions {
    let t = tol.angle_tol;
    let l = RealSpan::new(&span.l_basis);
    let p = RealSpan::new(&span.p_basis);
    let h = RealSpan::new(&span.h_basis);
    let closed = |xs: &[ComplexMatrix], ys: &[ComplexMatrix], target: &RealSpan| {
        xs.iter()
            .all(|x| ys.iter().all(|y| target.contains(&commutator(x, y), t)))
    };
    let commute = |a: &ComplexMatrix, b: &ComplexMatrix| commutator(a, b).max_abs() <= t;
    CartanConditions {
        ll_in_l: closed(&span.l_basis, &span.l_basis, &l),
        lp_in_p: closed(&span.l_basis, &span.p_basis, &p),
        pp_in_l: closed(&span.p_basis, &span.p_basis, &l),
        h_abelian: span
            .h_basis
            .iter()
            .all(|a| span.h_basis.iter().all(|b| commute(a, b))),
        h_maximal: span
            .p_basis
            .iter()
            .filter(|q| !h.contains(q, t))
            .all(|q| span.h_basis.iter().any(|g| !commute(g, q))),
        h_in_p: span.h_basis.iter().all(|g| p.contains(g, t)),
    }
}
