//! Input documents: JSON payloads describing one or two spectral data.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spectral_orbits::geometry::{GridBox, GridSet, IsolatedPoint};
use spectral_orbits::kdata::{AlgebraProfile, KElement, KGroup, ProfileFlags, SpectralDatum};

use crate::error::CliError;

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: u32,
    pub profile: ProfileSpec,
    pub resolution: f64,
    #[serde(default)]
    pub spectra: Vec<SpectrumPayload>,
    #[serde(default, skip_serializing_if = "Options::is_empty")]
    pub options: Options,
}

/// A built-in profile name or an inline presentation of the K-groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Builtin(String),
    Inline(InlineProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProfile {
    pub name: String,
    pub k0: GroupSpec,
    pub unit_class: Vec<i64>,
    pub k1: GroupSpec,
    #[serde(default)]
    pub flags: ProfileFlags,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default)]
    pub free_rank: usize,
    #[serde(default)]
    pub torsion: Vec<u64>,
}

/// `[re, im, is_cluster]`.
pub type PointSpec = (f64, f64, bool);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumPayload {
    /// Overrides the document resolution for this spectrum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default)]
    pub boxes: Vec<[i64; 2]>,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    /// `K_0` coordinates keyed by derived component id.
    #[serde(default)]
    pub component_labels: BTreeMap<usize, Vec<i64>>,
    /// `K_1` coordinates keyed by derived hole id.
    #[serde(default)]
    pub hole_labels: BTreeMap<usize, Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Bipartite,
    Tree,
    Partitioned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub side1: Vec<usize>,
    pub side2: Vec<usize>,
}

/// Command-specific parameters; absent fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Two real measures as `[atom, weight]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<[Vec<(f64, f64)>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    /// Regions (ids of components of the union of both spectra) for the
    /// contour lower bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_regions: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockSpec>>,
}

impl Options {
    pub fn is_empty(&self) -> bool {
        self == &Options::default()
    }
}

/// Parse a document; syntax and schema errors carry line and column.
pub fn parse(text: &str) -> Result<Document, CliError> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed document: {e}")))?;
    if doc.version != VERSION {
        return Err(CliError::Input(format!("version: expected {VERSION}, got {}", doc.version)));
    }
    if !(doc.resolution.is_finite() && doc.resolution > 0.0) {
        return Err(CliError::Input(format!("resolution: must be positive, got {}", doc.resolution)));
    }
    Ok(doc)
}

/// Sorted, deduplicated boxes and points sorted by value. Labels are keyed by
/// derived ids, so reordering never changes their meaning.
pub fn canonicalize(mut doc: Document) -> Document {
    for s in &mut doc.spectra {
        s.boxes.sort_unstable();
        s.boxes.dedup();
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    doc
}

/// Canonical text form: pretty JSON with a trailing newline.
pub fn serialize(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn group(spec: &GroupSpec, field: &str) -> Result<KGroup, CliError> {
    KGroup::new(spec.free_rank, spec.torsion.clone()).map_err(|e| CliError::Input(format!("{field}: {e}")))
}

impl ProfileSpec {
    pub fn resolve(&self) -> Result<AlgebraProfile, CliError> {
        match self {
            ProfileSpec::Builtin(name) => {
                AlgebraProfile::builtin(name).map_err(|e| CliError::Input(format!("profile: {e}")))
            }
            ProfileSpec::Inline(p) => {
                let k0 = group(&p.k0, "profile.k0")?;
                let k1 = group(&p.k1, "profile.k1")?;
                AlgebraProfile::new(p.name.clone(), k0, &p.unit_class, k1, p.flags)
                    .map_err(|e| CliError::Input(format!("profile.unit_class: {e}")))
            }
        }
    }
}

fn element(g: &KGroup, coords: &[i64], field: &str) -> Result<KElement, CliError> {
    g.element(coords).map_err(|e| CliError::Input(format!("{field}: {e}")))
}

impl Document {
    pub fn profile(&self, override_name: Option<&str>) -> Result<AlgebraProfile, CliError> {
        match override_name {
            Some(name) => ProfileSpec::Builtin(name.to_string()).resolve(),
            None => self.profile.resolve(),
        }
    }

    /// Require exactly `n` spectra.
    pub fn expect_spectra(&self, n: usize) -> Result<(), CliError> {
        if self.spectra.len() != n {
            return Err(CliError::Input(format!("spectra: expected {n} entries, got {}", self.spectra.len())));
        }
        Ok(())
    }

    /// Spectral datum `i`, with every label id resolved against the derived
    /// components and holes and the datum invariants checked.
    pub fn datum(&self, i: usize, profile: &AlgebraProfile) -> Result<SpectralDatum, CliError> {
        let field = format!("spectra[{i}]");
        let payload = self.spectra.get(i).ok_or_else(|| CliError::Input(format!("{field}: missing")))?;
        let eps = payload.resolution.unwrap_or(self.resolution);
        let boxes = payload.boxes.iter().map(|&[n, m]| GridBox::new(n, m));
        let points = payload.points.iter().map(|&(re, im, cluster)| {
            let z = Complex64::new(re, im);
            if cluster {
                IsolatedPoint::cluster(z)
            } else {
                IsolatedPoint::new(z)
            }
        });
        let g = GridSet::new(eps, boxes, points).map_err(|e| CliError::Input(format!("{field}: {e}")))?;
        let bare = SpectralDatum::new(g.clone(), profile.clone(), BTreeMap::new(), BTreeMap::new());
        let (n_comp, n_holes) = (bare.components().len(), bare.complement().holes().len());

        let mut k0 = BTreeMap::new();
        for (&id, coords) in &payload.component_labels {
            let f = format!("{field}.component_labels.{id}");
            if id >= n_comp {
                return Err(CliError::Input(format!("{f}: no such component ({n_comp} derived)")));
            }
            k0.insert(id, element(&profile.k0, coords, &f)?);
        }
        let mut k1 = BTreeMap::new();
        for (&id, coords) in &payload.hole_labels {
            let f = format!("{field}.hole_labels.{id}");
            if id >= n_holes {
                return Err(CliError::Input(format!("{f}: no such hole ({n_holes} derived)")));
            }
            k1.insert(id, element(&profile.k1, coords, &f)?);
        }
        let d = SpectralDatum::new(g, profile.clone(), k0, k1);
        let violations = d.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(CliError::Input(format!("{field}: {}", msgs.join("; "))));
        }
        Ok(d)
    }

    /// Isolated points closer than one resolution to a region box of the same
    /// spectrum cannot be told apart from the region at this grid.
    pub fn resolution_check(&self) -> Result<(), CliError> {
        for (i, s) in self.spectra.iter().enumerate() {
            let eps = s.resolution.unwrap_or(self.resolution);
            for &(re, im, _) in &s.points {
                let z = Complex64::new(re, im);
                let home = GridBox::containing(z, eps);
                let close = s.boxes.iter().any(|&[n, m]| {
                    let r = GridBox::new(n, m).rect(eps);
                    (n - home.n).abs() <= 2 && (m - home.m).abs() <= 2 && r.dist(z) < eps
                });
                if close {
                    return Err(CliError::Input(format!(
                        "spectra[{i}].points: point {re}+{im}i lies within one resolution ({eps}) of a region box"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const O3: &str = r#"{
        "version": 1, "profile": "O3", "resolution": 0.25,
        "spectra": [
            {"points": [[1.0, 0.0, false], [0.0, 0.0, false]], "component_labels": {"1": [1]}},
            {"points": [[0.0, 0.0, false], [1.0, 0.0, false]], "component_labels": {"0": [1]}}
        ]
    }"#;

    #[test]
    fn parses_and_resolves_labels() {
        let doc = parse(O3).unwrap();
        let p = doc.profile(None).unwrap();
        let d1 = doc.datum(0, &p).unwrap();
        // components are derived from sorted points, so the label refers to 1
        assert_eq!(d1.components()[1].point().unwrap().value, Complex64::new(1.0, 0.0));
        assert_eq!(d1.component_class(1).coords(), &[1]);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let doc = canonicalize(parse(O3).unwrap());
        let text = serialize(&doc);
        assert_eq!(serialize(&canonicalize(parse(&text).unwrap())), text);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad_version = O3.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(parse(&bad_version), Err(CliError::Input(m)) if m.starts_with("version")));

        let bad_id = O3.replace("{\"1\": [1]}", "{\"7\": [1]}");
        let doc = parse(&bad_id).unwrap();
        let err = doc.datum(0, &doc.profile(None).unwrap()).unwrap_err();
        assert!(matches!(err, CliError::Input(m) if m.starts_with("spectra[0].component_labels.7")));

        let unknown = O3.replace("\"resolution\": 0.25", "\"resolution\": 0.25, \"extra\": 1");
        assert!(matches!(parse(&unknown), Err(CliError::Input(m)) if m.contains("line")));
    }

    #[test]
    fn inline_profile() {
        let text = r#"{"version": 1, "resolution": 1.0,
            "profile": {"name": "Z2", "k0": {"torsion": [2]}, "unit_class": [1], "k1": {},
                        "flags": {"purely_infinite_simple": true, "all_nonzero_projections_equivalent": false, "weak_FN": false}},
            "spectra": [{"boxes": [[0, 0]], "component_labels": {"0": [1]}}]}"#;
        let doc = parse(text).unwrap();
        let p = doc.profile(None).unwrap();
        assert_eq!(p.k0, KGroup::cyclic(2).unwrap());
        assert!(doc.datum(0, &p).is_ok());
        assert!(doc.profile(Some("Nope")).is_err());
    }

    #[test]
    fn resolution_check_flags_points_near_boxes() {
        let text = r#"{"version": 1, "profile": "O2", "resolution": 1.0,
            "spectra": [{"boxes": [[0, 0]], "points": [[1.2, 0.0, false]]}]}"#;
        let doc = parse(text).unwrap();
        assert!(doc.resolution_check().is_err());
        let far = text.replace("1.2", "3.0");
        assert!(parse(&far).unwrap().resolution_check().is_ok());
    }
}
