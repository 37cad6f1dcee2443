//! Built-in two-qubit targets and their hand-written factorizations.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use crate::cartan::DofConvention;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, I};

/// Named 4×4 targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// Grover-type quantum walk step: `−1/2` on the diagonal, `+1/2` elsewhere.
    Walk,
    /// Two-qubit quantum Fourier transform, `F_{jk} = i^{jk}/2`.
    Qft,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Walk, Target::Qft];

    pub fn name(self) -> &'static str {
        match self {
            Self::Walk => "walk",
            Self::Qft => "qft",
        }
    }

    /// Hand-optimized element counts for the worked circuits, for reporting.
    pub fn hand_count(self, convention: DofConvention) -> usize {
        match (self, convention) {
            (Self::Walk, DofConvention::PolarizationSpatial) => 11,
            (Self::Qft, DofConvention::PolarizationSpatial) => 12,
            (Self::Walk, DofConvention::SpatialPolarization) => 12,
            (Self::Qft, DofConvention::SpatialPolarization) => 19,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Self::Walk => {
                ComplexMatrix::from_fn(4, |r, c| C64::new(if r == c { -0.5 } else { 0.5 }, 0.0))
            }
            Self::Qft => ComplexMatrix::from_fn(4, |r, c| I.powi((r * c % 4) as i32) * 0.5),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walk" => Ok(Self::Walk),
            "qft" => Ok(Self::Qft),
            other => Err(Error::Schema(format!(
                "unknown target {other:?}, expected \"walk\" or \"qft\""
            ))),
        }
    }
}

/// The target matrix. The basis convention only changes how the four basis
/// states are labeled, never the matrix itself.
pub fn builtin_target(target: Target) -> ComplexMatrix {
    target.matrix()
}

/// A worked factorization `target = L·A·R`, written out as data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDecomposition {
    pub target: Target,
    pub convention: DofConvention,
    /// `[L, A, R]`, leftmost first.
    pub factors: Vec<ComplexMatrix>,
    /// `A` expanded into fixed phases, PBS and HWP layers, leftmost first.
    pub central: Vec<ComplexMatrix>,
}

impl ReferenceDecomposition {
    pub fn product(&self) -> ComplexMatrix {
        product(&self.factors)
    }

    pub fn central_product(&self) -> ComplexMatrix {
        product(&self.central)
    }
}

fn product(ms: &[ComplexMatrix]) -> ComplexMatrix {
    ms.iter()
        .fold(ComplexMatrix::identity(4), |acc, m| &acc * m)
}

fn real(rows: [[f64; 4]; 4]) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, |r, c| C64::new(rows[r][c], 0.0))
}

fn cplx(rows: [[C64; 4]; 4]) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, |r, c| rows[r][c])
}

fn swap(p: usize, q: usize) -> ComplexMatrix {
    let mut perm = [0, 1, 2, 3];
    perm.swap(p, q);
    ComplexMatrix::from_fn(4, |r, c| C64::new(f64::from(u8::from(perm[r] == c)), 0.0))
}

/// Hand-written factorizations keyed `walk_ps`, `qft_ps`, `walk_sp`, `qft_sp`.
pub fn reference_decompositions() -> BTreeMap<&'static str, ReferenceDecomposition> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let (s1, c1) = FRAC_PI_8.sin_cos();
    let (s3, c3) = (3.0 * FRAC_PI_8).sin_cos();
    let r = |x: f64| C64::new(x, 0.0);

    // PS order {Ha₁, Ha₂, Va₁, Va₂}: PBS swaps Ha₁ ↔ Ha₂; HWP(π/4) on a₁, HWP(0) on a₂.
    let pbs_ps = swap(0, 1);
    let hwp_ps = cplx([[o, o, I, o], [o, I, o, o], [I, o, o, o], [o, o, o, -I]]);
    let a_w = &(&pbs_ps * &hwp_ps) * &pbs_ps;
    let central_ps = vec![pbs_ps.clone(), hwp_ps, pbs_ps];

    let walk_ps = ReferenceDecomposition {
        target: Target::Walk,
        convention: DofConvention::PolarizationSpatial,
        factors: vec![
            real([
                [-1.0, 0.0, -1.0, 0.0],
                [0.0, -1.0, 0.0, -1.0],
                [1.0, 0.0, -1.0, 0.0],
                [0.0, -1.0, 0.0, 1.0],
            ]),
            a_w.clone(),
            real([
                [-1.0, 0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, 1.0],
                [1.0, 0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, -1.0],
            ])
            .scale(I * 0.5),
        ],
        central: central_ps.clone(),
    };

    let qft_ps = ReferenceDecomposition {
        target: Target::Qft,
        convention: DofConvention::PolarizationSpatial,
        factors: vec![
            real([
                [-1.0, 0.0, -1.0, 0.0],
                [0.0, -1.0, 0.0, -1.0],
                [-1.0, 0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0, 1.0],
            ]),
            a_w,
            cplx([
                [one, o, one, o],
                [o, one, o, one],
                [one, o, -one, o],
                [o, -I, o, I],
            ])
            .scale(I * 0.5),
        ],
        central: central_ps,
    };

    // SP order {a₁H, a₁V, a₂H, a₂V}: PBS swaps a₁H ↔ a₂H; D = −iσz ⊕ −iσz.
    let pbs_sp = swap(0, 2);
    let d = ComplexMatrix::diagonal(&[-I, I, -I, I]);
    let hwp_walk = cplx([[o, I, o, o], [I, o, o, o], [o, o, I, o], [o, o, o, -I]]);
    let walk_central = vec![d.clone(), pbs_sp.clone(), hwp_walk, pbs_sp.clone()];

    let walk_sp = ReferenceDecomposition {
        target: Target::Walk,
        convention: DofConvention::SpatialPolarization,
        factors: vec![
            real([
                [-1.0, -1.0, 0.0, 0.0],
                [1.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, -1.0, -1.0],
                [0.0, 0.0, -1.0, 1.0],
            ]),
            real([
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, -1.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]),
            real([
                [1.0, -1.0, 0.0, 0.0],
                [-1.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 1.0, -1.0],
            ])
            .scale(r(0.5)),
        ],
        central: walk_central,
    };

    let h = r(FRAC_1_SQRT_2);
    let hwp_qft = cplx([
        [I * c1, I * s1, o, o],
        [I * s1, -I * c1, o, o],
        [o, o, I * c3, I * s3],
        [o, o, I * s3, -I * c3],
    ]);
    let qft_sp = ReferenceDecomposition {
        target: Target::Qft,
        convention: DofConvention::SpatialPolarization,
        factors: vec![
            cplx([
                [I * s1 - c1, -s1 - I * c1, o, o],
                [c1 + I * s1, s1 - I * c1, o, o],
                [o, o, c1 - I * s1, -s1 - I * c1],
                [o, o, -c1 - I * s1, s1 - I * c1],
            ]),
            real([
                [c3, 0.0, 0.0, s3],
                [0.0, c1, -s1, 0.0],
                [0.0, s1, c1, 0.0],
                [-s3, 0.0, 0.0, c3],
            ]),
            cplx([
                [-I, (I - one) * h, o, o],
                [I, (I - one) * h, o, o],
                [o, o, one, -(I + one) * h],
                [o, o, -one, -(I + one) * h],
            ])
            .scale(r(0.5)),
        ],
        central: vec![d, pbs_sp.clone(), hwp_qft, pbs_sp],
    };

    BTreeMap::from([
        ("walk_ps", walk_ps),
        ("qft_ps", qft_ps),
        ("walk_sp", walk_sp),
        ("qft_sp", qft_sp),
    ])
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;
    use crate::circuit::{OpticalCircuit, OpticalElement};
    use crate::matrix::{is_unitary, ToleranceConfig};
    use crate::simulator::{element_unitary, simulate};

    #[test]
    fn targets_match_their_definitions() {
        let w = builtin_target(Target::Walk);
        assert_eq!(w[(0, 0)], C64::new(-0.5, 0.0));
        assert_eq!(w[(2, 1)], C64::new(0.5, 0.0));
        let f = builtin_target(Target::Qft);
        let row1 = [1.0, 0.0, -1.0, 0.0];
        let row1_im = [0.0, 1.0, 0.0, -1.0];
        for c in 0..4 {
            assert_eq!(f[(1, c)], C64::new(row1[c], row1_im[c]) * 0.5);
        }
        for t in Target::ALL {
            assert!(is_unitary(&t.matrix(), &ToleranceConfig::default()));
        }
    }

    #[test]
    fn names_round_trip() {
        for t in Target::ALL {
            assert_eq!(t.name().parse::<Target>().unwrap(), t);
        }
        assert!("grover".parse::<Target>().is_err());
    }

    #[test]
    fn factorizations_multiply_out() {
        let refs = reference_decompositions();
        assert_eq!(refs.len(), 4);
        for (name, d) in &refs {
            assert!(d.product().max_diff(&d.target.matrix()) < 1e-12, "{name}");
            assert!(
                d.central_product().max_diff(&d.factors[1]) < 1e-12,
                "{name}"
            );
        }
    }

    #[test]
    fn central_layers_are_simulator_elements() {
        let refs = reference_decompositions();
        for (name, angles) in [
            ("walk_ps", [FRAC_PI_4, 0.0]),
            ("walk_sp", [FRAC_PI_4, 0.0]),
            ("qft_sp", [FRAC_PI_8 / 2.0, 3.0 * FRAC_PI_8 / 2.0]),
        ] {
            let d = &refs[name];
            let conv = d.convention;
            let mut c = OpticalCircuit::new(conv, 2).unwrap();
            c.extend([
                OpticalElement::Pbs { modes: (0, 1) },
                OpticalElement::Hwp {
                    mode: 0,
                    angle: angles[0],
                },
                OpticalElement::Hwp {
                    mode: 1,
                    angle: angles[1],
                },
                OpticalElement::Pbs { modes: (0, 1) },
            ])
            .unwrap();
            let pbs = element_unitary(&OpticalElement::Pbs { modes: (0, 1) }, conv, 2).unwrap();
            let k = d.central.len();
            assert_eq!(d.central[k - 1], pbs, "{name}");
            assert_eq!(d.central[k - 3], pbs, "{name}");
            let core = product(&d.central[k - 3..]);
            assert!(simulate(&c).unwrap().max_diff(&core) < 1e-15, "{name}");
        }
    }
}
