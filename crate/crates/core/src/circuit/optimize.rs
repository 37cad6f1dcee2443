//! Semantics-preserving peephole optimization.
//!
//! Local rules, applied to a fixpoint:
//!
//! - drop single-mode elements whose matrix is the identity;
//! - merge every run of single-mode elements on one mode (consecutive in the
//!   sense that no PBS touching that mode intervenes) into a freshly
//!   synthesized chain, when that is strictly shorter (real rotations may also
//!   become two HWPs and a phase shifter);
//! - cancel two PBSs on the same mode pair with nothing on those modes between.
//!
//! Two rewrites around a PBS are then tried, and kept only when the circuit,
//! after the local rules, has strictly fewer elements:
//!
//! - a polarization-diagonal run `diag(d_H, d_V)` on mode `p` next to
//!   `PBS(p, q)` moves to its other side as `diag(1, d_V)` on `p` and
//!   `diag(d_H, 1)` on `q`;
//! - `PBS(p, q)·(diag(a_H, a_V) ⊕ diag(b_H, b_V))·PBS(p, q)` becomes
//!   `diag(b_H, a_V)` on `p` and `diag(a_H, b_V)` on `q`.
//!
//! Every step is exact, so the simulated unitary is unchanged up to rounding;
//! no phase is discarded.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{chain_elements, OpticalCircuit, OpticalElement};
use crate::matrix::{cis, wrap_pi, wrap_two_pi, ComplexMatrix, ToleranceConfig, C64};
use crate::simulator::polarization_matrix;
use crate::waveplate::synthesize_u2;

/// Optimized copy of `c`. Never increases the element count.
pub fn optimize(c: &OpticalCircuit, tol: &ToleranceConfig) -> OpticalCircuit {
    let modes = c.num_spatial_modes;
    let mut elems = normalize(c.elements.clone(), modes, tol);
    while let Some(better) = best_rewrite(&elems, modes, tol) {
        elems = better;
    }
    let mut out = c.clone();
    out.elements = elems;
    if out.len() < c.len() {
        out.metadata
            .insert("optimized_from".into(), c.len().to_string());
    }
    out
}

/// Copy of `c` with a global phase removed, when that saves elements.
///
/// A scalar commutes with every element, so it can be taken out of the first
/// (or the last) single-mode run of every mode at once. Candidate phases are
/// those of the phase shifters the resynthesized runs would need. A rewrite is
/// kept when it saves elements, or saves none but shortens the longest run it
/// touches. The result equals `c` only up to a global phase.
pub fn strip_global_phase(c: &OpticalCircuit, tol: &ToleranceConfig) -> OpticalCircuit {
    let mut out = c.clone();
    for _ in 0..4 {
        match strip_once(&out, tol) {
            Some(e) => out.elements = e,
            None => break,
        }
    }
    out
}

fn strip_once(c: &OpticalCircuit, tol: &ToleranceConfig) -> Option<Vec<OpticalElement>> {
    let modes = c.num_spatial_modes;
    let elems = &c.elements;
    let coupling = |m: usize, e: &OpticalElement| e.touches(m) && e.single_mode().is_none();
    let heads: Vec<Vec<usize>> = (0..modes)
        .map(|m| {
            let end = elems
                .iter()
                .position(|e| coupling(m, e))
                .unwrap_or(elems.len());
            (0..end)
                .filter(|&i| elems[i].single_mode() == Some(m))
                .collect()
        })
        .collect();
    let tails: Vec<Vec<usize>> = (0..modes)
        .map(|m| {
            let start = elems
                .iter()
                .rposition(|e| coupling(m, e))
                .map_or(0, |i| i + 1);
            (start..elems.len())
                .filter(|&i| elems[i].single_mode() == Some(m))
                .collect()
        })
        .collect();

    let mut best: Option<Vec<OpticalElement>> = None;
    let mut best_score = (c.len(), usize::MAX);
    for (runs, at) in [(heads, 0), (tails, elems.len())] {
        let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
        let products: Vec<ComplexMatrix> = runs
            .iter()
            .map(|r| product(r.iter().map(|&i| &elems[i])))
            .collect();
        let candidates: Vec<f64> = products
            .iter()
            .enumerate()
            .filter_map(|(m, u)| resynthesize(m, u, tol))
            .flatten()
            .filter_map(|e| match e {
                OpticalElement::Ps { angle, .. } => Some(angle),
                _ => None,
            })
            .collect();
        let removed: Vec<usize> = runs.concat();
        for phi in candidates {
            let Some(new) = products
                .iter()
                .enumerate()
                .map(|(m, u)| resynthesize(m, &u.scale(cis(-phi)), tol))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let new_longest = new.iter().map(Vec::len).max().unwrap_or(0);
            let new = new.concat();
            let len = c.len() - removed.len() + new.len();
            let improves = len < c.len() || (len == c.len() && new_longest < longest);
            if improves && (len, new_longest) < best_score {
                best = Some(splice(elems, &removed, BTreeMap::from([(at, new)])));
                best_score = (len, new_longest);
            }
        }
    }
    best
}

fn normalize(
    mut elems: Vec<OpticalElement>,
    modes: usize,
    tol: &ToleranceConfig,
) -> Vec<OpticalElement> {
    loop {
        let before = elems.len();
        elems = drop_identities(elems, tol);
        elems = merge_runs(elems, modes, tol);
        elems = cancel_pbs_pairs(elems);
        if elems.len() == before {
            return elems;
        }
    }
}

fn drop_identities(elems: Vec<OpticalElement>, tol: &ToleranceConfig) -> Vec<OpticalElement> {
    let id = ComplexMatrix::identity(2);
    elems
        .into_iter()
        .filter(|e| polarization_matrix(e).is_none_or(|m| m.max_diff(&id) > tol.angle_tol))
        .collect()
}

/// Product of single-mode elements in propagation order.
fn product<'a>(run: impl IntoIterator<Item = &'a OpticalElement>) -> ComplexMatrix {
    run.into_iter().fold(ComplexMatrix::identity(2), |acc, e| {
        &polarization_matrix(e).expect("single-mode element") * &acc
    })
}

/// Minimal chain on `mode` for `u`, or `None` if synthesis fails.
fn resynthesize(
    mode: usize,
    u: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Option<Vec<OpticalElement>> {
    let chain = synthesize_u2(u, tol)
        .ok()
        .map(|chain| chain_elements(mode, &chain));
    match (chain, hwp_pair(mode, u, tol)) {
        (Some(c), Some(p)) if p.len() < c.len() => Some(p),
        (Some(c), _) => Some(c),
        (None, p) => p,
    }
}

/// `u = e^{iα}·R` with `R` a real rotation, realized as `HWP(0)`, `HWP(Δ)` and
/// a phase shifter, using `HWP(Δ)·HWP(0) = −[[cos2Δ, −sin2Δ], [sin2Δ, cos2Δ]]`.
fn hwp_pair(mode: usize, u: &ComplexMatrix, tol: &ToleranceConfig) -> Option<Vec<OpticalElement>> {
    let alpha = 0.5 * u.determinant().arg();
    let r = u.scale(cis(-alpha));
    if (0..2).any(|i| (0..2).any(|j| r[(i, j)].im.abs() > tol.angle_tol)) {
        return None;
    }
    let delta = 0.5 * (-r[(1, 0)].re).atan2(-r[(0, 0)].re);
    let mut out = vec![
        OpticalElement::Hwp { mode, angle: 0.0 },
        OpticalElement::Hwp {
            mode,
            angle: wrap_pi(delta),
        },
    ];
    let phase = wrap_two_pi(alpha);
    if phase > tol.angle_tol && 2.0 * PI - phase > tol.angle_tol {
        out.insert(0, OpticalElement::Ps { mode, angle: phase });
    }
    (product(&out).max_diff(u) <= tol.angle_tol).then_some(out)
}

/// Indices of maximal single-mode runs on `mode`.
fn runs_on(elems: &[OpticalElement], mode: usize) -> Vec<Vec<usize>> {
    let mut runs = Vec::new();
    let mut cur = Vec::new();
    for (i, e) in elems.iter().enumerate() {
        if e.single_mode() == Some(mode) {
            cur.push(i);
        } else if e.touches(mode) && !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}

/// Rebuilds `elems` without the indices in `remove`, inserting each
/// `insert[i]` list just before position `i` (or at the end for `i = len`).
fn splice(
    elems: &[OpticalElement],
    remove: &[usize],
    insert: BTreeMap<usize, Vec<OpticalElement>>,
) -> Vec<OpticalElement> {
    let mut out = Vec::with_capacity(elems.len());
    for (i, e) in elems.iter().enumerate() {
        if let Some(new) = insert.get(&i) {
            out.extend_from_slice(new);
        }
        if !remove.contains(&i) {
            out.push(*e);
        }
    }
    if let Some(new) = insert.get(&elems.len()) {
        out.extend_from_slice(new);
    }
    out
}

fn merge_runs(
    mut elems: Vec<OpticalElement>,
    modes: usize,
    tol: &ToleranceConfig,
) -> Vec<OpticalElement> {
    for mode in 0..modes {
        let mut remove = Vec::new();
        let mut insert = BTreeMap::new();
        for run in runs_on(&elems, mode) {
            if run.len() < 2 {
                continue;
            }
            let u = product(run.iter().map(|&i| &elems[i]));
            if let Some(new) = resynthesize(mode, &u, tol) {
                if new.len() < run.len() {
                    let last = *run.last().unwrap();
                    remove.extend_from_slice(&run);
                    // The last run element is removed too; insert in its place.
                    insert.insert(last, new);
                }
            }
        }
        if !remove.is_empty() {
            elems = splice(&elems, &remove, insert);
        }
    }
    elems
}

fn same_pair(a: (usize, usize), b: (usize, usize)) -> bool {
    a == b || a == (b.1, b.0)
}

/// Index of the next element after `i` touching mode `p` or `q`.
fn next_touching(elems: &[OpticalElement], i: usize, p: usize, q: usize) -> Option<usize> {
    (i + 1..elems.len()).find(|&j| elems[j].touches(p) || elems[j].touches(q))
}

fn cancel_pbs_pairs(mut elems: Vec<OpticalElement>) -> Vec<OpticalElement> {
    'outer: loop {
        for i in 0..elems.len() {
            let OpticalElement::Pbs { modes: (p, q) } = elems[i] else {
                continue;
            };
            if let Some(j) = next_touching(&elems, i, p, q) {
                if let OpticalElement::Pbs { modes } = elems[j] {
                    if same_pair(modes, (p, q)) {
                        elems.remove(j);
                        elems.remove(i);
                        continue 'outer;
                    }
                }
            }
        }
        return elems;
    }
}

/// `(d_H, d_V)` when `u` is diagonal within `tol`.
fn diagonal(u: &ComplexMatrix, tol: f64) -> Option<(C64, C64)> {
    u.is_diagonal(tol).then(|| (u[(0, 0)], u[(1, 1)]))
}

fn diag_gate(h: C64, v: C64) -> ComplexMatrix {
    // Renormalize so that rounding in the run product does not accumulate.
    ComplexMatrix::diagonal(&[h / h.norm(), v / v.norm()])
}

fn best_rewrite(
    elems: &[OpticalElement],
    modes: usize,
    tol: &ToleranceConfig,
) -> Option<Vec<OpticalElement>> {
    let one = C64::new(1.0, 0.0);
    let mut best: Option<Vec<OpticalElement>> = None;
    let mut consider = |cand: Vec<OpticalElement>| {
        let cand = normalize(cand, modes, tol);
        let bound = best.as_ref().map_or(elems.len(), Vec::len);
        if cand.len() < bound {
            best = Some(cand);
        }
    };
    for (i, e) in elems.iter().enumerate() {
        let OpticalElement::Pbs { modes: (p, q) } = *e else {
            continue;
        };
        for (m, other) in [(p, q), (q, p)] {
            // Diagonal run on m right after the PBS moves in front of it.
            let after: Vec<usize> = (i + 1..elems.len())
                .take_while(|&j| !elems[j].touches(m) || elems[j].single_mode() == Some(m))
                .filter(|&j| elems[j].single_mode() == Some(m))
                .collect();
            // Diagonal run on m right before the PBS moves behind it.
            let before: Vec<usize> = (0..i)
                .rev()
                .take_while(|&j| !elems[j].touches(m) || elems[j].single_mode() == Some(m))
                .filter(|&j| elems[j].single_mode() == Some(m))
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect();
            for (run, at) in [(after, i), (before, i + 1)] {
                if run.is_empty() {
                    continue;
                }
                let Some((dh, dv)) =
                    diagonal(&product(run.iter().map(|&j| &elems[j])), tol.angle_tol)
                else {
                    continue;
                };
                let (Some(on_m), Some(on_other)) = (
                    resynthesize(m, &diag_gate(one, dv), tol),
                    resynthesize(other, &diag_gate(dh, one), tol),
                ) else {
                    continue;
                };
                let new: Vec<OpticalElement> = on_m.into_iter().chain(on_other).collect();
                consider(splice(elems, &run, BTreeMap::from([(at, new)])));
            }
        }
        // Diagonal sandwich between this PBS and a matching one.
        let Some(j) = (i + 1..elems.len()).find(|&j| {
            matches!(elems[j], OpticalElement::Pbs { .. })
                && (elems[j].touches(p) || elems[j].touches(q))
        }) else {
            continue;
        };
        let OpticalElement::Pbs { modes: pair } = elems[j] else {
            unreachable!()
        };
        if !same_pair(pair, (p, q)) {
            continue;
        }
        let on = |m: usize| -> Vec<usize> {
            (i + 1..j)
                .filter(|&k| elems[k].single_mode() == Some(m))
                .collect()
        };
        let (run_p, run_q) = (on(p), on(q));
        let (Some((ah, av)), Some((bh, bv))) = (
            diagonal(&product(run_p.iter().map(|&k| &elems[k])), tol.angle_tol),
            diagonal(&product(run_q.iter().map(|&k| &elems[k])), tol.angle_tol),
        ) else {
            continue;
        };
        let (Some(new_p), Some(new_q)) = (
            resynthesize(p, &diag_gate(bh, av), tol),
            resynthesize(q, &diag_gate(ah, bv), tol),
        ) else {
            continue;
        };
        let mut remove = vec![i, j];
        remove.extend(run_p);
        remove.extend(run_q);
        let new: Vec<OpticalElement> = new_p.into_iter().chain(new_q).collect();
        consider(splice(elems, &remove, BTreeMap::from([(j, new)])));
    }
    best
}
