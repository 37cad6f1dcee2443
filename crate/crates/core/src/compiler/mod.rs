//! Matrix → Cartan factors → wave-plate chains → optical circuit.
//!
//! Two-mode layout, in propagation order:
//!
//! ```text
//! R₁ on a₁, R₂ on a₂ → PBS → HWP on a₁, HWP on a₂ → PBS → L₁ on a₁, L₂ on a₂
//! ```
//!
//! Four-mode layout (SP only): compiled 4×4 right blocks on `(a₁, a₂)` and
//! `(a₃, a₄)`, two `PBS–HWP–HWP–PBS` gadgets on `(a₁, a₃)` and `(a₂, a₄)`,
//! then compiled 4×4 left blocks.

mod targets;

use sha2::{Digest, Sha256};

pub use targets::{builtin_target, reference_decompositions, ReferenceDecomposition, Target};

use crate::cartan::{decompose, decompose_m4, DofConvention};
use crate::circuit::{
    chain_elements, optimize, strip_global_phase, OpticalCircuit, OpticalElement,
};
use crate::error::{Error, Result};
use crate::matrix::{cis, ensure_unitary, pauli, ComplexMatrix, ToleranceConfig};
use crate::simulator::{verify, VerificationReport};
use crate::waveplate::{synthesize_u2, WaveplateChain};

pub const COMPILER_VERSION: &str = concat!("photon-cartan ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub convention: DofConvention,
    /// Run the peephole optimizer on the assembled circuit.
    pub optimize: bool,
    /// Simulate the result and compare it with the input.
    pub verify: bool,
    pub tolerances: ToleranceConfig,
    /// Keep every phase shifter so the circuit equals the input exactly,
    /// not just up to a global phase.
    pub emit_global_phase_ps: bool,
}

impl CompileOptions {
    /// Verification on, optimizer off, phase-equivalent output.
    pub fn new(convention: DofConvention) -> Self {
        Self {
            convention,
            optimize: false,
            verify: true,
            tolerances: ToleranceConfig::default(),
            emit_global_phase_ps: false,
        }
    }

    pub fn optimized(self) -> Self {
        Self {
            optimize: true,
            ..self
        }
    }

    pub fn exact(self) -> Self {
        Self {
            emit_global_phase_ps: true,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compilation {
    pub circuit: OpticalCircuit,
    /// Present when [`CompileOptions::verify`] is set.
    pub report: Option<VerificationReport>,
}

/// Compiles a 4×4 unitary given in `opts.convention`'s basis order.
pub fn compile(u: &ComplexMatrix, opts: &CompileOptions) -> Result<Compilation> {
    opts.tolerances.validate()?;
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: u.dim(),
        });
    }
    let tol = &opts.tolerances;
    let f = decompose(u, opts.convention, tol)?;
    let p = f.physical();
    let mut right = [
        synthesize_u2(&p.right_gates[0], tol)?,
        synthesize_u2(&p.right_gates[1], tol)?,
    ];
    let mut left = [
        synthesize_u2(&p.left_gates[0], tol)?,
        synthesize_u2(&p.left_gates[1], tol)?,
    ];
    if !opts.emit_global_phase_ps {
        let (r, l) = drop_one_phase(&p.right_gates, &p.left_gates, right, left, tol)?;
        right = r;
        left = l;
    }

    let mut c = OpticalCircuit::new(opts.convention, 2)?;
    c.extend(chain_elements(0, &right[0]))?;
    c.extend(chain_elements(1, &right[1]))?;
    c.extend([
        OpticalElement::Pbs { modes: (0, 1) },
        OpticalElement::Hwp {
            mode: 0,
            angle: p.hwp_angles[0],
        },
        OpticalElement::Hwp {
            mode: 1,
            angle: p.hwp_angles[1],
        },
        OpticalElement::Pbs { modes: (0, 1) },
    ])?;
    c.extend(chain_elements(0, &left[0]))?;
    c.extend(chain_elements(1, &left[1]))?;

    let meta = [
        ("theta1", f.theta1.to_string()),
        ("theta2", f.theta2.to_string()),
        ("global_phase", f.global_phase.to_string()),
    ];
    finish(c, u, opts, &meta)
}

/// Compiles an 8×8 unitary in SP order on four spatial modes.
pub fn compile_m4(u: &ComplexMatrix, opts: &CompileOptions) -> Result<Compilation> {
    opts.tolerances.validate()?;
    if opts.convention != DofConvention::SpatialPolarization {
        return Err(Error::Unsupported(
            "four-mode compilation is only defined in the sp convention".into(),
        ));
    }
    if u.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: u.dim(),
        });
    }
    let tol = &opts.tolerances;
    ensure_unitary(u, tol)?;
    let f = decompose_m4(u, tol)?;
    let [lt, lb] = &f.left_blocks;
    let [rt, rb] = &f.right_blocks;
    let ph = cis(f.global_phase);

    let mut c = OpticalCircuit::new(DofConvention::SpatialPolarization, 4)?;
    if f.angles.iter().all(|a| a.abs() <= tol.angle_tol) {
        // Each gadget is then PBS·(iσz ⊕ iσz)·PBS = iσz ⊕ iσz, so the blocks
        // multiply straight through.
        let s = pauli::z().scale(crate::matrix::I);
        let iz = ComplexMatrix::direct_sum(&[&s, &s]);
        c.extend(block_elements(&(&(lt * &iz) * rt).scale(ph), 0, tol)?)?;
        c.extend(block_elements(&(&(lb * &iz) * rb).scale(ph), 2, tol)?)?;
    } else {
        c.extend(block_elements(rt, 0, tol)?)?;
        c.extend(block_elements(rb, 2, tol)?)?;
        for ((m, n), (ka, kb)) in [((0, 2), (0, 1)), ((1, 3), (2, 3))] {
            c.extend([
                OpticalElement::Pbs { modes: (m, n) },
                OpticalElement::Hwp {
                    mode: m,
                    angle: f.angles[ka] / 2.0,
                },
                OpticalElement::Hwp {
                    mode: n,
                    angle: f.angles[kb] / 2.0,
                },
                OpticalElement::Pbs { modes: (m, n) },
            ])?;
        }
        c.extend(block_elements(&lt.scale(ph), 0, tol)?)?;
        c.extend(block_elements(&lb.scale(ph), 2, tol)?)?;
    }

    let angles = f.angles.map(|a| a.to_string()).join(",");
    let meta = [
        ("central_angles", angles),
        ("global_phase", f.global_phase.to_string()),
    ];
    finish(c, u, opts, &meta)
}

/// Exact SP compilation of a 4×4 block, shifted onto modes `offset`, `offset + 1`.
fn block_elements(
    block: &ComplexMatrix,
    offset: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<OpticalElement>> {
    let opts = CompileOptions {
        verify: false,
        tolerances: *tol,
        ..CompileOptions::new(DofConvention::SpatialPolarization).exact()
    };
    let c = compile(block, &opts)?;
    Ok(c.circuit
        .elements
        .iter()
        .map(|e| e.remapped(|m| m + offset))
        .collect())
}

/// Removes the phase shifter of one chain by moving a global phase onto the
/// other chain on the same side, choosing the cheapest of the four options.
fn drop_one_phase(
    right_gates: &[ComplexMatrix; 2],
    left_gates: &[ComplexMatrix; 2],
    right: [WaveplateChain; 2],
    left: [WaveplateChain; 2],
    tol: &ToleranceConfig,
) -> Result<([WaveplateChain; 2], [WaveplateChain; 2])> {
    let count = |cs: &[WaveplateChain; 2]| cs[0].element_count() + cs[1].element_count();
    let mut best = (right, left);
    let mut best_count = count(&right) + count(&left);
    for side in 0..2 {
        let (gates, chains) = if side == 0 {
            (left_gates, &left)
        } else {
            (right_gates, &right)
        };
        for k in 0..2 {
            let Some(phi) = chains[k].ps_angle else {
                continue;
            };
            let mut new = *chains;
            new[k] = chains[k].without_phase();
            new[1 - k] = synthesize_u2(&gates[1 - k].scale(cis(-phi)), tol)?;
            let (r, l) = if side == 0 { (right, new) } else { (new, left) };
            let n = count(&r) + count(&l);
            if n < best_count {
                best = (r, l);
                best_count = n;
            }
        }
    }
    Ok(best)
}

fn finish(
    mut c: OpticalCircuit,
    u: &ComplexMatrix,
    opts: &CompileOptions,
    meta: &[(&str, String)],
) -> Result<Compilation> {
    if opts.optimize {
        c = optimize(&c, &opts.tolerances);
        if !opts.emit_global_phase_ps {
            c = strip_global_phase(&c, &opts.tolerances);
        }
    }
    let md = &mut c.metadata;
    md.insert("compiler".into(), COMPILER_VERSION.into());
    md.insert("source_sha256".into(), source_hash(u));
    for (k, v) in meta {
        md.insert((*k).into(), v.clone());
    }
    let phase = if opts.emit_global_phase_ps {
        "exact"
    } else {
        "up_to_global_phase"
    };
    md.insert("phase".into(), phase.into());
    let report = if opts.verify {
        Some(verify(&c, u, &opts.tolerances)?)
    } else {
        None
    };
    Ok(Compilation { circuit: c, report })
}

/// SHA-256 of the matrix's JSON wire form, lowercase hex.
pub fn source_hash(u: &ComplexMatrix) -> String {
    Sha256::digest(u.to_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    use super::*;
    use crate::cartan::central_a;
    use crate::circuit::ElementKind;
    use crate::matrix::haar_random_unitary;
    use crate::simulator::simulate;

    const PS: DofConvention = DofConvention::PolarizationSpatial;
    const SP: DofConvention = DofConvention::SpatialPolarization;

    fn hwps(c: &OpticalCircuit) -> Vec<(usize, f64)> {
        let pbs: Vec<usize> = c
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind() == ElementKind::Pbs)
            .map(|(i, _)| i)
            .collect();
        c.elements[pbs[0] + 1..pbs[1]]
            .iter()
            .map(|e| (e.single_mode().unwrap(), e.angle().unwrap()))
            .collect()
    }

    #[test]
    fn walk_ps_central_plates() {
        let c = compile(&Target::Walk.matrix(), &CompileOptions::new(PS)).unwrap();
        assert!(c.report.unwrap().passed);
        assert!(c.circuit.len() <= 20);
        let h = hwps(&c.circuit);
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].0, 0);
        assert!((h[0].1 - FRAC_PI_4).abs() < 1e-9);
        assert!(h[1].1.abs() < 1e-9);
    }

    #[test]
    fn walk_ps_optimizes_strictly() {
        let plain = compile(&Target::Walk.matrix(), &CompileOptions::new(PS)).unwrap();
        let opt = compile(&Target::Walk.matrix(), &CompileOptions::new(PS).optimized()).unwrap();
        assert!(opt.report.unwrap().passed);
        assert!(opt.circuit.len() < plain.circuit.len());
    }

    #[test]
    fn qft_sp_central_plates() {
        let c = compile(&Target::Qft.matrix(), &CompileOptions::new(SP)).unwrap();
        assert!(c.report.unwrap().passed);
        // The arms carry {θ₂/2, θ₁/2}; compare as a set.
        let mut h: Vec<f64> = hwps(&c.circuit).iter().map(|p| p.1).collect();
        h.sort_by(f64::total_cmp);
        assert!((h[0] - FRAC_PI_8 / 2.0).abs() < 1e-9, "{h:?}");
        assert!((h[1] - 3.0 * FRAC_PI_8 / 2.0).abs() < 1e-9, "{h:?}");
    }

    #[test]
    fn identity_optimizes_away() {
        for conv in [PS, SP] {
            let c = compile(
                &ComplexMatrix::identity(4),
                &CompileOptions::new(conv).optimized(),
            )
            .unwrap();
            assert!(c.circuit.is_empty(), "{:?}", c.circuit.elements);
            assert!(c.report.unwrap().passed);
        }
        let c = compile_m4(
            &ComplexMatrix::identity(8),
            &CompileOptions::new(SP).optimized(),
        )
        .unwrap();
        assert!(c.circuit.is_empty(), "{:?}", c.circuit.elements);
    }

    #[test]
    fn haar_inputs_verify_within_budget() {
        for conv in [PS, SP] {
            for seed in 0..100 {
                let u = haar_random_unitary(4, seed).unwrap();
                let c = compile(&u, &CompileOptions::new(conv)).unwrap();
                let r = c.report.unwrap();
                assert!(r.passed, "{conv} seed {seed}: {}", r.distance);
                assert!(c.circuit.len() <= 19, "{conv} seed {seed}");
            }
        }
    }

    #[test]
    fn exact_mode_matches_without_phase() {
        for conv in [PS, SP] {
            for seed in 0..50 {
                let u = haar_random_unitary(4, seed).unwrap();
                let c = compile(&u, &CompileOptions::new(conv).exact()).unwrap();
                assert!(simulate(&c.circuit).unwrap().max_diff(&u) < 1e-9);
                assert!(c.circuit.len() <= 21);
            }
        }
    }

    /// Lengths of the chains before the first and after the last PBS, per mode.
    fn bookend_lengths(c: &OpticalCircuit) -> Vec<usize> {
        let first = c
            .elements
            .iter()
            .position(|e| e.kind() == ElementKind::Pbs)
            .unwrap();
        let last = c
            .elements
            .iter()
            .rposition(|e| e.kind() == ElementKind::Pbs)
            .unwrap();
        let mut out = Vec::new();
        for range in [&c.elements[..first], &c.elements[last + 1..]] {
            for m in 0..2 {
                out.push(range.iter().filter(|e| e.touches(m)).count());
            }
        }
        out
    }

    #[test]
    fn central_factor_bookends_are_short() {
        for conv in [PS, SP] {
            for (a, b) in [
                (0.7, 0.2),
                (0.3, -0.5),
                (0.6, 0.45),
                (-0.3, 0.5),
                (0.2, 0.7),
                (-0.4, -0.1),
            ] {
                let u = central_a(a, b, conv);
                let c = compile(&u, &CompileOptions::new(conv).optimized()).unwrap();
                assert!(c.report.unwrap().passed);
                let lens = bookend_lengths(&c.circuit);
                assert!(lens.iter().all(|&n| n <= 2), "{conv} ({a}, {b}): {lens:?}");
            }
        }
    }

    #[test]
    fn m4_haar_inputs_verify() {
        let opts = CompileOptions::new(SP);
        for seed in 0..20 {
            let u = haar_random_unitary(8, seed).unwrap();
            let c = compile_m4(&u, &opts).unwrap();
            assert!(c.report.unwrap().passed, "seed {seed}");
            assert_eq!(c.circuit.num_spatial_modes, 4);
        }
    }

    #[test]
    fn m4_block_diagonal() {
        let v = haar_random_unitary(4, 11).unwrap();
        let w = haar_random_unitary(4, 12).unwrap();
        let u = ComplexMatrix::direct_sum(&[&v, &w]);
        let c = compile_m4(&u, &CompileOptions::new(SP).optimized()).unwrap();
        assert!(c.report.unwrap().passed);
        assert!(c.circuit.len() <= 40, "{}", c.circuit.len());
        assert!(c.circuit.metadata["central_angles"].split(',').all(|a| a
            .parse::<f64>()
            .unwrap()
            .abs()
            < 1e-12));
    }

    #[test]
    fn m4_rejects_ps_and_bad_dims() {
        let u = ComplexMatrix::identity(8);
        assert!(matches!(
            compile_m4(&u, &CompileOptions::new(PS)),
            Err(Error::Unsupported(_))
        ));
        assert!(compile_m4(&ComplexMatrix::identity(4), &CompileOptions::new(SP)).is_err());
        assert!(compile(&u, &CompileOptions::new(SP)).is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ComplexMatrix::from_fn(4, |r, c| crate::matrix::C64::new((r + c) as f64, 0.0));
        assert!(matches!(
            compile(&m, &CompileOptions::new(PS)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn metadata_and_determinism() {
        let u = haar_random_unitary(4, 5).unwrap();
        let a = compile(&u, &CompileOptions::new(SP)).unwrap().circuit;
        let b = compile(&u, &CompileOptions::new(SP)).unwrap().circuit;
        assert_eq!(a.serialize(), b.serialize());
        assert_eq!(a.metadata["source_sha256"].len(), 64);
        assert_eq!(a.metadata["compiler"], COMPILER_VERSION);
        assert!(a.metadata.contains_key("theta1"));
    }
}
