//! Single-qubit polarization gates from wave plates and a phase shifter.
//!
//! A chain is applied in the fixed order PS, QWP, HWP, QWP, so its matrix is
//! `QWP(q2)·HWP(h)·QWP(q1)·PS(p)`. Every `U(2)` is reachable: with
//! `Ry(t) = e^{-itσy}` and `Rx(t) = e^{-itσx}`,
//!
//! ```text
//! QWP(a)·HWP(b)·QWP(c) = −Ry(a)·Rx(2b − a − c)·Ry(−c)
//! ```
//!
//! which is a Y-X-Y Euler product. Conjugating by the axis-cycling unitary
//! `T` (x→y→z→x) turns it into the familiar Z-Y-Z form, solved in closed
//! form. The phase shifter then carries whatever scalar is left, so the
//! synthesized chain matches its target exactly rather than up to phase.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::matrix::{
    cis, ensure_unitary, pauli, wrap_pi, wrap_two_pi, ComplexMatrix, ToleranceConfig, C64, I, ONE,
};

/// `e^{iθ}·I₂`.
pub fn ps_matrix(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[cis(theta), cis(theta)])
}

/// Half-wave plate with fast axis at `theta`: `i·[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn hwp_matrix(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    ComplexMatrix::from_rows(&[vec![I * c, I * s], vec![I * s, I * -c]]).unwrap()
}

/// Quarter-wave plate with fast axis at `theta`:
/// `(1/√2)·[[1 + i·cos2θ, i·sin2θ], [i·sin2θ, 1 − i·cos2θ]]`.
pub fn qwp_matrix(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[
        vec![(ONE + I * c) * r, I * s * r],
        vec![I * s * r, (ONE - I * c) * r],
    ])
    .unwrap()
}

/// Plate angles for one polarization gate, in propagation order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveplateChain {
    pub ps_angle: Option<f64>,
    pub qwp1_angle: Option<f64>,
    pub hwp_angle: Option<f64>,
    pub qwp2_angle: Option<f64>,
}

impl WaveplateChain {
    pub fn element_count(&self) -> usize {
        [
            self.ps_angle,
            self.qwp1_angle,
            self.hwp_angle,
            self.qwp2_angle,
        ]
        .iter()
        .filter(|a| a.is_some())
        .count()
    }

    pub fn is_empty(&self) -> bool {
        self.element_count() == 0
    }

    /// The chain with its phase shifter removed.
    pub fn without_phase(&self) -> Self {
        Self {
            ps_angle: None,
            ..*self
        }
    }
}

/// Ordered product of the chain's elements; absent elements act as identity.
pub fn chain_matrix(chain: &WaveplateChain) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(2);
    if let Some(p) = chain.ps_angle {
        m = &ps_matrix(p) * &m;
    }
    if let Some(a) = chain.qwp1_angle {
        m = &qwp_matrix(a) * &m;
    }
    if let Some(b) = chain.hwp_angle {
        m = &hwp_matrix(b) * &m;
    }
    if let Some(c) = chain.qwp2_angle {
        m = &qwp_matrix(c) * &m;
    }
    m
}

/// Plates present in a candidate layout.
#[derive(Debug, Clone, Copy)]
enum Layout {
    Empty,
    Hwp,
    Qwp,
    QwpHwp,
    HwpQwp,
    Full,
}

const LAYOUTS: [Layout; 6] = [
    Layout::Empty,
    Layout::Hwp,
    Layout::Qwp,
    Layout::QwpHwp,
    Layout::HwpQwp,
    Layout::Full,
];

/// Synthesizes `u` as a phase shifter plus at most QWP–HWP–QWP.
///
/// Layouts are tried shortest first; a shortened layout is accepted only if it
/// reproduces `u` within `tol.angle_tol`. Plate angles are reported in `[0, π)`
/// and the phase shifter in `[0, 2π)`, omitted when it is within `angle_tol`
/// of zero.
pub fn synthesize_u2(u: &ComplexMatrix, tol: &ToleranceConfig) -> Result<WaveplateChain> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    ensure_unitary(u, tol)?;
    for layout in LAYOUTS {
        let Some(plates) = solve_layout(u, layout) else {
            continue;
        };
        let chain = with_phase(u, plates, tol);
        let err = chain_matrix(&chain).max_diff(u);
        let limit = match layout {
            Layout::Full => tol.unitarity_tol,
            _ => tol.angle_tol,
        };
        if err <= limit {
            return Ok(chain);
        }
    }
    Err(Error::Numerical(
        "wave-plate synthesis failed to reproduce the target".into(),
    ))
}

/// Fills in the phase shifter so that the chain equals `u` exactly.
fn with_phase(u: &ComplexMatrix, plates: WaveplateChain, tol: &ToleranceConfig) -> WaveplateChain {
    let plates = WaveplateChain {
        ps_angle: None,
        qwp1_angle: plates.qwp1_angle.map(wrap_pi),
        hwp_angle: plates.hwp_angle.map(wrap_pi),
        qwp2_angle: plates.qwp2_angle.map(wrap_pi),
    };
    let m = chain_matrix(&plates);
    let overlap = (m.adjoint() * u.clone()).trace();
    let phase = wrap_two_pi(overlap.arg());
    let negligible = phase <= tol.angle_tol || 2.0 * PI - phase <= tol.angle_tol;
    WaveplateChain {
        ps_angle: (!negligible).then_some(phase),
        ..plates
    }
}

/// `T·u·T†` with `T = (I − i(σx + σy + σz))/2`, which maps σx→σy, σy→σz, σz→σx.
fn cycle_axes(u: &ComplexMatrix) -> ComplexMatrix {
    let h = C64::new(0.5, 0.0);
    let t = ComplexMatrix::from_rows(&[
        vec![C64::new(1.0, -1.0) * h, C64::new(-1.0, -1.0) * h],
        vec![C64::new(1.0, -1.0) * h, C64::new(1.0, 1.0) * h],
    ])
    .unwrap();
    &(&t * u) * &t.adjoint()
}

fn solve_layout(u: &ComplexMatrix, layout: Layout) -> Option<WaveplateChain> {
    let none = WaveplateChain::default();
    match layout {
        Layout::Empty => Some(none),
        Layout::Hwp => {
            // HWP(b) ∝ cos2b·σz + sin2b·σx
            let [_, vx, _, vz] = pauli::coefficients(u);
            let refc = if vx.norm() > vz.norm() { vx } else { vz };
            if refc.norm() < 0.5 {
                return None;
            }
            let ph = refc.conj() / refc.norm();
            let b = 0.5 * (vx * ph).re.atan2((vz * ph).re);
            Some(WaveplateChain {
                hwp_angle: Some(b),
                ..none
            })
        }
        Layout::Qwp => {
            // QWP(a) ∝ (I + i·cos2a·σz + i·sin2a·σx)/√2
            let [v0, vx, _, vz] = pauli::coefficients(u);
            if v0.norm() < 0.5 {
                return None;
            }
            let ph = v0.conj() / v0.norm();
            let a = 0.5 * (vx * ph / I).re.atan2((vz * ph / I).re);
            Some(WaveplateChain {
                qwp1_angle: Some(a),
                ..none
            })
        }
        Layout::QwpHwp | Layout::HwpQwp => {
            // Both are ∝ Ry(s)·S†·Ry(t), S = e^{iπ/4·σz}; in the cycled frame
            // Rz(s)·Rx(π/4)·Rz(t).
            let w = cycle_axes(u);
            if w[(0, 0)].norm() < 0.1 || w[(0, 1)].norm() < 0.1 || w[(1, 0)].norm() < 0.1 {
                return None;
            }
            let a00 = w[(0, 0)].arg();
            let t = 0.5 * (w[(0, 1)].arg() - a00 + PI / 2.0);
            let s = 0.5 * (w[(1, 0)].arg() - a00 + PI / 2.0);
            let hwp = 0.5 * (s - t);
            Some(match layout {
                // HWP(b)·QWP(a) = −Ry(2b − a)·S†·Ry(−a)
                Layout::QwpHwp => WaveplateChain {
                    qwp1_angle: Some(-t),
                    hwp_angle: Some(hwp),
                    ..none
                },
                // QWP(c)·HWP(b) = −Ry(c)·S†·Ry(c − 2b)
                _ => WaveplateChain {
                    hwp_angle: Some(hwp),
                    qwp2_angle: Some(s),
                    ..none
                },
            })
        }
        Layout::Full => {
            let w = cycle_axes(u);
            let w = w.scale(cis(-0.5 * w.determinant().arg()));
            let (x, y) = (w[(0, 0)], w[(1, 0)]);
            let q = y.norm().atan2(x.norm());
            let sum = if x.norm() > 1e-14 { -x.arg() } else { 0.0 };
            let diff = if y.norm() > 1e-14 { y.arg() } else { 0.0 };
            let (p, r) = (0.5 * (sum + diff), 0.5 * (sum - diff));
            // W ∝ Rz(p)·Ry(q)·Rz(r) ↔ QWP(p)·HWP(b)·QWP(−r) with q = 2b − p + r
            let last = p;
            let first = -r;
            let hwp = 0.5 * (q + last + first);
            Some(WaveplateChain {
                ps_angle: None,
                qwp1_angle: Some(first),
                hwp_angle: Some(hwp),
                qwp2_angle: Some(last),
            })
        }
    }
}
