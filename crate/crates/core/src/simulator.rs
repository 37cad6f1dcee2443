//! Element-level simulation of optical circuits on the single-photon state space.
//!
//! Internally everything is computed in SP order and permuted at the boundary
//! for PS-convention circuits.

use serde::{Deserialize, Serialize};

use crate::cartan::DofConvention;
use crate::circuit::{OpticalCircuit, OpticalElement};
use crate::error::{Error, Result};
use crate::matrix::{phase_distance, ComplexMatrix, ToleranceConfig};
use crate::waveplate::{hwp_matrix, ps_matrix, qwp_matrix};

/// Polarization matrix of a single-mode element.
pub fn polarization_matrix(e: &OpticalElement) -> Option<ComplexMatrix> {
    match *e {
        OpticalElement::Pbs { .. } => None,
        OpticalElement::Hwp { angle, .. } => Some(hwp_matrix(angle)),
        OpticalElement::Qwp { angle, .. } => Some(qwp_matrix(angle)),
        OpticalElement::Ps { angle, .. } => Some(ps_matrix(angle)),
    }
}

fn check_modes(e: &OpticalElement, modes: usize) -> Result<()> {
    if let Some(&m) = e.modes().iter().find(|&&m| m >= modes) {
        return Err(Error::InvalidCircuit(format!(
            "{} on mode {m} is out of range for {modes} spatial modes",
            e.kind()
        )));
    }
    if let OpticalElement::Pbs { modes: (p, q) } = e {
        if p == q {
            return Err(Error::InvalidCircuit("pbs needs two distinct modes".into()));
        }
    }
    Ok(())
}

/// Left-multiplies `state` (SP order) by the element's action.
fn apply_sp(e: &OpticalElement, state: &mut ComplexMatrix) {
    let cols = state.dim();
    match *e {
        OpticalElement::Pbs { modes: (p, q) } => {
            for c in 0..cols {
                let tmp = state[(2 * p, c)];
                state[(2 * p, c)] = state[(2 * q, c)];
                state[(2 * q, c)] = tmp;
            }
        }
        _ => {
            let g = polarization_matrix(e).expect("single-mode element");
            let m = e.single_mode().expect("single-mode element");
            let (h, v) = (2 * m, 2 * m + 1);
            for c in 0..cols {
                let (a, b) = (state[(h, c)], state[(v, c)]);
                state[(h, c)] = g[(0, 0)] * a + g[(0, 1)] * b;
                state[(v, c)] = g[(1, 0)] * a + g[(1, 1)] * b;
            }
        }
    }
}

/// The element as a `2m × 2m` unitary in `convention`'s basis order.
///
/// A PBS is the pure permutation exchanging `|H aᵢ⟩` and `|H aⱼ⟩`; wave plates
/// and phase shifters act on `{|aᵢH⟩, |aᵢV⟩}` and as identity elsewhere.
pub fn element_unitary(
    e: &OpticalElement,
    convention: DofConvention,
    modes: usize,
) -> Result<ComplexMatrix> {
    check_modes(e, modes)?;
    let mut m = ComplexMatrix::identity(2 * modes);
    apply_sp(e, &mut m);
    Ok(convention.from_sp_order(&m))
}

/// Product of the element unitaries, first element rightmost.
pub fn simulate(c: &OpticalCircuit) -> Result<ComplexMatrix> {
    let modes = c.num_spatial_modes;
    let mut state = ComplexMatrix::identity(2 * modes);
    for e in &c.elements {
        check_modes(e, modes)?;
        apply_sp(e, &mut state);
    }
    Ok(c.convention.from_sp_order(&state))
}

/// Phase-aware comparison of a circuit with its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `‖e^{i·global_phase}·simulate(c) − target‖_max`.
    pub distance: f64,
    pub global_phase: f64,
    /// `distance ≤ equivalence_tol`.
    pub passed: bool,
    pub element_total: usize,
}

pub fn verify(
    c: &OpticalCircuit,
    target: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<VerificationReport> {
    if target.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: target.dim(),
        });
    }
    let d = phase_distance(&simulate(c)?, target)?;
    Ok(VerificationReport {
        distance: d.distance,
        global_phase: d.phase,
        passed: d.distance <= tol.equivalence_tol,
        element_total: c.len(),
    })
}
