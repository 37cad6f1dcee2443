//! Optical circuits: PBS, HWP, QWP and PS elements placed on spatial modes.
//!
//! Elements are listed in propagation order. Spatial modes are numbered from
//! zero (`a₁` is mode 0).

mod optimize;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use optimize::{optimize, strip_global_phase};

use crate::cartan::DofConvention;
use crate::error::{Error, Result};
use crate::waveplate::WaveplateChain;

/// Element counts of the reference CSD constructions this compiler is compared against.
pub const BASELINE_PS_CSD_SWAP: usize = 25;
pub const BASELINE_SP_CSD: usize = 21;
pub const BASELINE_M4_CSD: usize = 74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Pbs,
    Hwp,
    Qwp,
    Ps,
}

impl ElementKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Pbs => "pbs",
            Self::Hwp => "hwp",
            Self::Qwp => "qwp",
            Self::Ps => "ps",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    /// Swaps the H components of two modes.
    Pbs {
        modes: (usize, usize),
    },
    Hwp {
        mode: usize,
        angle: f64,
    },
    Qwp {
        mode: usize,
        angle: f64,
    },
    /// `e^{iθ}` on both polarizations of one mode.
    Ps {
        mode: usize,
        angle: f64,
    },
}

impl OpticalElement {
    pub fn kind(&self) -> ElementKind {
        match self {
            Self::Pbs { .. } => ElementKind::Pbs,
            Self::Hwp { .. } => ElementKind::Hwp,
            Self::Qwp { .. } => ElementKind::Qwp,
            Self::Ps { .. } => ElementKind::Ps,
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Self::Pbs { modes: (p, q) } => vec![p, q],
            Self::Hwp { mode, .. } | Self::Qwp { mode, .. } | Self::Ps { mode, .. } => vec![mode],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Self::Pbs { .. } => None,
            Self::Hwp { angle, .. } | Self::Qwp { angle, .. } | Self::Ps { angle, .. } => {
                Some(angle)
            }
        }
    }

    /// The mode of a single-mode element.
    pub fn single_mode(&self) -> Option<usize> {
        match *self {
            Self::Pbs { .. } => None,
            Self::Hwp { mode, .. } | Self::Qwp { mode, .. } | Self::Ps { mode, .. } => Some(mode),
        }
    }

    pub fn touches(&self, mode: usize) -> bool {
        self.modes().contains(&mode)
    }

    /// The same element moved to another set of modes via `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        match *self {
            Self::Pbs { modes: (p, q) } => Self::Pbs {
                modes: (map(p), map(q)),
            },
            Self::Hwp { mode, angle } => Self::Hwp {
                mode: map(mode),
                angle,
            },
            Self::Qwp { mode, angle } => Self::Qwp {
                mode: map(mode),
                angle,
            },
            Self::Ps { mode, angle } => Self::Ps {
                mode: map(mode),
                angle,
            },
        }
    }

    pub fn validate(&self, num_modes: usize) -> Result<()> {
        for m in self.modes() {
            if m >= num_modes {
                return Err(Error::InvalidCircuit(format!(
                    "{} on mode {m}, but the circuit has {num_modes} spatial modes",
                    self.kind()
                )));
            }
        }
        if let Self::Pbs { modes: (p, q) } = self {
            if p == q {
                return Err(Error::InvalidCircuit(format!(
                    "pbs needs two distinct modes, got ({p}, {q})"
                )));
            }
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidCircuit(format!(
                    "{} angle must be finite, got {a}",
                    self.kind()
                )));
            }
        }
        Ok(())
    }
}

/// Elements realizing a wave-plate chain on `mode`, in propagation order.
pub fn chain_elements(mode: usize, chain: &WaveplateChain) -> Vec<OpticalElement> {
    let mut out = Vec::with_capacity(chain.element_count());
    if let Some(angle) = chain.ps_angle {
        out.push(OpticalElement::Ps { mode, angle });
    }
    if let Some(angle) = chain.qwp1_angle {
        out.push(OpticalElement::Qwp { mode, angle });
    }
    if let Some(angle) = chain.hwp_angle {
        out.push(OpticalElement::Hwp { mode, angle });
    }
    if let Some(angle) = chain.qwp2_angle {
        out.push(OpticalElement::Qwp { mode, angle });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalCircuit {
    pub convention: DofConvention,
    pub num_spatial_modes: usize,
    pub elements: Vec<OpticalElement>,
    pub metadata: BTreeMap<String, String>,
}

impl OpticalCircuit {
    /// An empty circuit on 2 or 4 spatial modes.
    pub fn new(convention: DofConvention, num_spatial_modes: usize) -> Result<Self> {
        if !matches!(num_spatial_modes, 2 | 4) {
            return Err(Error::InvalidCircuit(format!(
                "spatial_modes must be 2 or 4, got {num_spatial_modes}"
            )));
        }
        Ok(Self {
            convention,
            num_spatial_modes,
            elements: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    /// Dimension of the single-photon state space.
    pub fn dim(&self) -> usize {
        2 * self.num_spatial_modes
    }

    pub fn push(&mut self, e: OpticalElement) -> Result<()> {
        e.validate(self.num_spatial_modes)?;
        self.elements.push(e);
        Ok(())
    }

    pub fn extend(&mut self, es: impl IntoIterator<Item = OpticalElement>) -> Result<()> {
        for e in es {
            self.push(e)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.num_spatial_modes, 2 | 4) {
            return Err(Error::InvalidCircuit(format!(
                "spatial_modes must be 2 or 4, got {}",
                self.num_spatial_modes
            )));
        }
        self.elements
            .iter()
            .try_for_each(|e| e.validate(self.num_spatial_modes))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_count(&self) -> CountReport {
        let mut by_kind = BTreeMap::new();
        for e in &self.elements {
            *by_kind.entry(e.kind()).or_insert(0) += 1;
        }
        let total = self.elements.len();
        let mut baseline_comparisons = BTreeMap::new();
        let baseline = match (self.convention, self.num_spatial_modes) {
            (DofConvention::PolarizationSpatial, 2) => Some(("ps_csd_swap", BASELINE_PS_CSD_SWAP)),
            (DofConvention::SpatialPolarization, 2) => Some(("sp_csd", BASELINE_SP_CSD)),
            (_, 4) => Some(("m4_csd", BASELINE_M4_CSD)),
            _ => None,
        };
        if let Some((name, count)) = baseline {
            baseline_comparisons.insert(
                name.to_string(),
                BaselineDelta {
                    baseline: count,
                    compiled: total,
                    delta: count as i64 - total as i64,
                },
            );
        }
        CountReport {
            total,
            by_kind,
            baseline_comparisons,
        }
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string_pretty(&CircuitJson::from(self)).expect("circuit JSON is infallible")
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let j: CircuitJson = serde_json::from_str(text)?;
        Self::try_from(j)
    }
}

/// Savings of a compiled circuit against a reference element count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BaselineDelta {
    pub baseline: usize,
    pub compiled: usize,
    /// `baseline − compiled`; positive when the compiled circuit is smaller.
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub total: usize,
    pub by_kind: BTreeMap<ElementKind, usize>,
    pub baseline_comparisons: BTreeMap<String, BaselineDelta>,
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} elements", self.total)?;
        if !self.by_kind.is_empty() {
            let parts: Vec<String> = self
                .by_kind
                .iter()
                .map(|(k, n)| format!("{k} {n}"))
                .collect();
            write!(f, " ({})", parts.join(", "))?;
        }
        for (name, d) in &self.baseline_comparisons {
            write!(
                f,
                "; {} vs {} for {name} (delta {:+})",
                d.compiled, d.baseline, d.delta
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementJson {
    kind: String,
    modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    version: u32,
    convention: DofConvention,
    spatial_modes: usize,
    elements: Vec<ElementJson>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

const SCHEMA_VERSION: u32 = 1;

impl From<&OpticalCircuit> for CircuitJson {
    fn from(c: &OpticalCircuit) -> Self {
        Self {
            version: SCHEMA_VERSION,
            convention: c.convention,
            spatial_modes: c.num_spatial_modes,
            elements: c
                .elements
                .iter()
                .map(|e| ElementJson {
                    kind: e.kind().tag().to_string(),
                    modes: e.modes(),
                    angle_rad: e.angle(),
                })
                .collect(),
            metadata: c.metadata.clone(),
        }
    }
}

impl TryFrom<ElementJson> for OpticalElement {
    type Error = Error;

    fn try_from(j: ElementJson) -> Result<Self> {
        let single = |modes: &[usize]| match modes {
            [m] => Ok(*m),
            _ => Err(Error::Schema(format!(
                "{} takes exactly one mode, got {modes:?}",
                j.kind
            ))),
        };
        let angle = || {
            j.angle_rad
                .ok_or_else(|| Error::Schema(format!("{} requires angle_rad", j.kind)))
        };
        match j.kind.as_str() {
            "pbs" => {
                if j.angle_rad.is_some() {
                    return Err(Error::Schema("pbs takes no angle_rad".into()));
                }
                match j.modes[..] {
                    [p, q] => Ok(Self::Pbs { modes: (p, q) }),
                    _ => Err(Error::Schema(format!(
                        "pbs takes exactly two modes, got {:?}",
                        j.modes
                    ))),
                }
            }
            "hwp" => Ok(Self::Hwp {
                mode: single(&j.modes)?,
                angle: angle()?,
            }),
            "qwp" => Ok(Self::Qwp {
                mode: single(&j.modes)?,
                angle: angle()?,
            }),
            "ps" => Ok(Self::Ps {
                mode: single(&j.modes)?,
                angle: angle()?,
            }),
            other => Err(Error::Schema(format!(
                "unsupported element kind {other:?}; expected pbs, hwp, qwp or ps"
            ))),
        }
    }
}

impl TryFrom<CircuitJson> for OpticalCircuit {
    type Error = Error;

    fn try_from(j: CircuitJson) -> Result<Self> {
        if j.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported circuit version {}, expected {SCHEMA_VERSION}",
                j.version
            )));
        }
        let mut c = OpticalCircuit::new(j.convention, j.spatial_modes)
            .map_err(|e| Error::Schema(e.to_string()))?;
        c.metadata = j.metadata;
        for (i, e) in j.elements.into_iter().enumerate() {
            let e = OpticalElement::try_from(e)
                .map_err(|err| Error::Schema(format!("element {i}: {err}")))?;
            c.push(e)
                .map_err(|err| Error::Schema(format!("element {i}: {err}")))?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OpticalCircuit {
        let mut c = OpticalCircuit::new(DofConvention::PolarizationSpatial, 2).unwrap();
        c.extend([
            OpticalElement::Qwp {
                mode: 0,
                angle: 0.1,
            },
            OpticalElement::Pbs { modes: (0, 1) },
            OpticalElement::Hwp {
                mode: 0,
                angle: std::f64::consts::FRAC_PI_4,
            },
            OpticalElement::Hwp {
                mode: 1,
                angle: 0.0,
            },
            OpticalElement::Pbs { modes: (0, 1) },
            OpticalElement::Ps {
                mode: 1,
                angle: 1.0 / 3.0,
            },
        ])
        .unwrap();
        c.metadata
            .insert("theta1".into(), "1.5707963267948966".into());
        c
    }

    #[test]
    fn empty_circuit_counts_zero() {
        let c = OpticalCircuit::new(DofConvention::SpatialPolarization, 2).unwrap();
        let r = c.element_count();
        assert_eq!(r.total, 0);
        assert!(r.by_kind.is_empty());
        assert_eq!(r.baseline_comparisons["sp_csd"].delta, 21);
    }

    #[test]
    fn counts_by_kind_and_baseline() {
        let r = sample().element_count();
        assert_eq!(r.total, 6);
        assert_eq!(r.by_kind[&ElementKind::Pbs], 2);
        assert_eq!(r.by_kind[&ElementKind::Hwp], 2);
        assert_eq!(r.by_kind[&ElementKind::Qwp], 1);
        assert_eq!(r.by_kind[&ElementKind::Ps], 1);
        assert_eq!(r.by_kind.values().sum::<usize>(), r.total);
        let d = r.baseline_comparisons["ps_csd_swap"];
        assert_eq!((d.baseline, d.compiled, d.delta), (25, 6, 19));
        assert_eq!(r.baseline_comparisons.len(), 1);

        let m4 = OpticalCircuit::new(DofConvention::SpatialPolarization, 4).unwrap();
        assert_eq!(
            m4.element_count().baseline_comparisons["m4_csd"].baseline,
            74
        );
    }

    #[test]
    fn report_display() {
        let s = sample().element_count().to_string();
        assert!(
            s.starts_with("6 elements (pbs 2, hwp 2, qwp 1, ps 1)"),
            "{s}"
        );
        assert!(s.contains("6 vs 25 for ps_csd_swap (delta +19)"), "{s}");
    }

    #[test]
    fn round_trip_is_structurally_identical() {
        let c = sample();
        let back = OpticalCircuit::deserialize(&c.serialize()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn wire_layout() {
        let v: serde_json::Value = serde_json::from_str(&sample().serialize()).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["convention"], "ps");
        assert_eq!(v["spatial_modes"], 2);
        assert_eq!(v["elements"][1]["kind"], "pbs");
        assert_eq!(v["elements"][1]["modes"], serde_json::json!([0, 1]));
        assert!(v["elements"][1].get("angle_rad").is_none());
        assert_eq!(v["elements"][5]["angle_rad"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["metadata"]["theta1"], "1.5707963267948966");
    }

    fn with_element(e: &str) -> String {
        format!(
            r#"{{"version": 1, "convention": "sp", "spatial_modes": 2, "elements": [{e}], "metadata": {{}}}}"#
        )
    }

    #[test]
    fn rejects_unknown_kind() {
        let err = OpticalCircuit::deserialize(&with_element(
            r#"{"kind": "bs", "modes": [0, 1], "angle_rad": 0.5}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(
            err.to_string().contains("unsupported element kind"),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_modes_and_angles() {
        for e in [
            r#"{"kind": "hwp", "modes": [2], "angle_rad": 0.5}"#,
            r#"{"kind": "hwp", "modes": [0, 1], "angle_rad": 0.5}"#,
            r#"{"kind": "pbs", "modes": [1, 1]}"#,
            r#"{"kind": "pbs", "modes": [0]}"#,
            r#"{"kind": "pbs", "modes": [0, 1], "angle_rad": 0.5}"#,
            r#"{"kind": "qwp", "modes": [0]}"#,
            r#"{"kind": "ps", "modes": [0], "angle_rad": 0.5, "extra": 1}"#,
        ] {
            let err = OpticalCircuit::deserialize(&with_element(e)).unwrap_err();
            assert!(
                matches!(err, Error::Schema(_) | Error::Json(_)),
                "{e}: {err:?}"
            );
        }
    }

    #[test]
    fn rejects_bad_header() {
        let text = r#"{"version": 2, "convention": "sp", "spatial_modes": 2, "elements": []}"#;
        assert!(OpticalCircuit::deserialize(text).is_err());
        let text = r#"{"version": 1, "convention": "xy", "spatial_modes": 2, "elements": []}"#;
        assert!(OpticalCircuit::deserialize(text).is_err());
        let text = r#"{"version": 1, "convention": "sp", "spatial_modes": 3, "elements": []}"#;
        assert!(OpticalCircuit::deserialize(text).is_err());
        assert!(OpticalCircuit::deserialize("[1, 2").is_err());
    }

    #[test]
    fn push_validates() {
        let mut c = OpticalCircuit::new(DofConvention::SpatialPolarization, 2).unwrap();
        assert!(c
            .push(OpticalElement::Ps {
                mode: 2,
                angle: 0.0
            })
            .is_err());
        assert!(c
            .push(OpticalElement::Hwp {
                mode: 0,
                angle: f64::NAN
            })
            .is_err());
        assert!(c.is_empty());
        assert!(OpticalCircuit::new(DofConvention::SpatialPolarization, 3).is_err());
    }

    #[test]
    fn chain_elements_follow_plate_order() {
        let chain = WaveplateChain {
            ps_angle: Some(0.5),
            qwp1_angle: Some(0.1),
            hwp_angle: None,
            qwp2_angle: Some(0.2),
        };
        let kinds: Vec<_> = chain_elements(1, &chain).iter().map(|e| e.kind()).collect();
        assert_eq!(kinds, [ElementKind::Ps, ElementKind::Qwp, ElementKind::Qwp]);
        assert!(chain_elements(1, &chain).iter().all(|e| e.touches(1)));
    }
}
