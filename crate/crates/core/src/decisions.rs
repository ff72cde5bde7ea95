//! Orbit classification predicates over spectral data.
//!
//! * [`decide_aue`]: approximate unitary equivalence.
//! * [`decide_similarity`]: membership of the target in the closed similarity
//!   orbit of the source.
//! * [`decide_nilpotent_limit`]: norm limit of nilpotents.
//! * [`ii1_moment_obstruction`]: the trace obstruction in a II_1 factor.
//!
//! Every predicate evaluates all of its conditions and reports each failure
//! with a witness, rather than stopping at the first one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ComplementRegion, GridBox};
use crate::kdata::{KElement, SpectralDatum, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("profile mismatch: {0} vs {1}")]
    ProfileMismatch(String, String),
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(f64, f64),
    #[error("profile {0} does not support this decision")]
    UnsupportedProfile(String),
    #[error("invalid spectral datum: {}", .0.iter().map(|v| v.message.clone()).collect::<Vec<_>>().join("; "))]
    InvalidDatum(Vec<Violation>),
    #[error("invalid measure: {0}")]
    BadMeasure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    Component(usize),
    Hole(usize),
    UnboundedRegion,
    #[serde(serialize_with = "ser_complex")]
    Point(Complex64),
    Moment(usize),
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Component(i) => write!(f, "component {i}"),
            Witness::Hole(i) => write!(f, "hole {i}"),
            Witness::UnboundedRegion => write!(f, "unbounded complement region"),
            Witness::Point(z) => write!(f, "point {z}"),
            Witness::Moment(k) => write!(f, "moment k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedCondition {
    pub condition_id: &'static str,
    pub reason: String,
    pub witness: Witness,
}

/// Outcome of one named condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition_id: &'static str,
    pub description: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Decision with every evaluated condition; `answer()` is true iff no
/// condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub checks: Vec<ConditionCheck>,
    pub failed_conditions: Vec<FailedCondition>,
}

impl Verdict {
    pub fn answer(&self) -> bool {
        self.failed_conditions.is_empty()
    }

    pub fn failed_ids(&self) -> BTreeSet<&'static str> {
        self.failed_conditions.iter().map(|f| f.condition_id).collect()
    }

    pub fn status_of(&self, id: &str) -> Option<Status> {
        self.checks.iter().find(|c| c.condition_id == id).map(|c| c.status)
    }
}

#[derive(Default)]
struct VerdictBuilder {
    checks: Vec<ConditionCheck>,
    failed: Vec<FailedCondition>,
}

impl VerdictBuilder {
    fn check(&mut self, id: &'static str, description: &'static str, failures: Vec<(String, Witness)>) {
        let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
        self.checks.push(ConditionCheck { condition_id: id, description, status, note: None });
        self.failed.extend(
            failures.into_iter().map(|(reason, witness)| FailedCondition { condition_id: id, reason, witness }),
        );
    }

    fn skip(&mut self, id: &'static str, description: &'static str, note: impl Into<String>) {
        self.checks.push(ConditionCheck { condition_id: id, description, status: Status::Skipped, note: Some(note.into()) });
    }

    fn finish(self) -> Verdict {
        Verdict { checks: self.checks, failed_conditions: self.failed }
    }
}

fn validated(d: &SpectralDatum) -> Result<(), DecisionError> {
    let v = d.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(DecisionError::InvalidDatum(v))
    }
}

/// Shared preconditions for two-datum decisions.
pub(crate) fn check_pair(a: &SpectralDatum, b: &SpectralDatum) -> Result<(), DecisionError> {
    if a.profile() != b.profile() {
        return Err(DecisionError::ProfileMismatch(a.profile().name.clone(), b.profile().name.clone()));
    }
    if a.resolution() != b.resolution() {
        return Err(DecisionError::ResolutionMismatch(a.resolution(), b.resolution()));
    }
    validated(a)?;
    validated(b)
}

pub mod aue {
    pub const SPECTRA: &str = "aue-(a)";
    pub const INDEX: &str = "aue-(b)";
    pub const PROJECTIONS: &str = "aue-(c)";
}

/// Approximate unitary equivalence: equal spectra, equal index labels, and
/// equal `K_0` classes of every spectral component.
pub fn decide_aue(d1: &SpectralDatum, d2: &SpectralDatum) -> Result<Verdict, DecisionError> {
    check_pair(d1, d2)?;
    let profile = d1.profile();
    if !(profile.flags.purely_infinite_simple || profile.flags.all_nonzero_projections_equivalent) {
        return Err(DecisionError::UnsupportedProfile(profile.name.clone()));
    }
    let mut v = VerdictBuilder::default();

    let spectra_equal = d1.spectrum() == d2.spectrum();
    let mut failures = Vec::new();
    if !spectra_equal {
        failures.push(spectrum_difference(d1, d2));
    }
    v.check(aue::SPECTRA, "spectra coincide", failures);

    if !spectra_equal {
        v.skip(aue::INDEX, "index labels agree on every hole", "spectra differ, holes cannot be paired");
        v.skip(aue::PROJECTIONS, "component classes agree", "spectra differ, components cannot be paired");
        return Ok(v.finish());
    }

    if profile.k1.is_trivial() {
        v.skip(aue::INDEX, "index labels agree on every hole", "K1 is trivial");
    } else {
        let failures = d1
            .complement()
            .holes()
            .iter()
            .filter_map(|h| {
                let (a, b) = (d1.hole_class(h.id), d2.hole_class(h.id));
                (a != b).then(|| (format!("index label {a} vs {b}"), Witness::Hole(h.id)))
            })
            .collect();
        v.check(aue::INDEX, "index labels agree on every hole", failures);
    }

    if profile.flags.all_nonzero_projections_equivalent {
        v.skip(aue::PROJECTIONS, "component classes agree", "all nonzero projections are equivalent");
    } else {
        let failures = (0..d1.components().len())
            .filter_map(|id| {
                let (a, b) = (d1.component_class(id), d2.component_class(id));
                (a != b).then(|| (format!("K0 class {a} vs {b}"), Witness::Component(id)))
            })
            .collect();
        v.check(aue::PROJECTIONS, "component classes agree", failures);
    }
    Ok(v.finish())
}

fn spectrum_difference(d1: &SpectralDatum, d2: &SpectralDatum) -> (String, Witness) {
    let (s1, s2) = (d1.spectrum(), d2.spectrum());
    let eps = s1.resolution();
    if let Some(b) = s1.boxes().symmetric_difference(s2.boxes()).next() {
        return (format!("box ({}, {}) lies in only one spectrum", b.n, b.m), Witness::Point(b.center(eps)));
    }
    for p in s1.points().iter().chain(s2.points()) {
        let other = if s1.points().contains(p) { s2 } else { s1 };
        if !other.points().contains(p) {
            return (
                format!("isolated point {} differs (value or cluster flag)", p.value),
                Witness::Point(p.value),
            );
        }
    }
    ("spectra differ".into(), Witness::UnboundedRegion)
}

pub mod sim {
    pub const CONTAINMENT: &str = "(1)";
    pub const MEETS_EVERY_COMPONENT: &str = "(2)";
    pub const INDEX: &str = "(3)";
    pub const NON_ISOLATED: &str = "(4)";
    pub const PROJECTIONS: &str = "(5)";
}

/// Whether `target` lies in the closure of the similarity orbit of `source`.
pub fn decide_similarity(source: &SpectralDatum, target: &SpectralDatum) -> Result<Verdict, DecisionError> {
    check_pair(source, target)?;
    let profile = target.profile();
    let eps = target.resolution();
    let mut v = VerdictBuilder::default();

    // (1) source spectrum inside target spectrum.
    let failures = source
        .components()
        .iter()
        .filter(|s| !piece_inside(s, target))
        .map(|s| ("source component is not contained in the target spectrum".to_string(), Witness::Component(s.id)))
        .collect();
    v.check(sim::CONTAINMENT, "source spectrum is contained in target spectrum", failures);

    // (2) every target component meets the source spectrum.
    let failures = target
        .components()
        .iter()
        .filter(|k| !source.components().iter().any(|s| s.intersects(k, eps)))
        .map(|k| ("target component misses the source spectrum".to_string(), Witness::Component(k.id)))
        .collect();
    v.check(sim::MEETS_EVERY_COMPONENT, "every target component meets the source spectrum", failures);

    // (3) index labels agree off the target spectrum.
    v.check(sim::INDEX, "index labels agree off the target spectrum", index_mismatches(source, target));

    // (4) non-isolated parts of the target meet non-isolated points of the source.
    let failures = target
        .components()
        .iter()
        .filter(|k| k.has_non_isolated_point())
        .filter(|k| {
            !source
                .components()
                .iter()
                .any(|s| s.has_non_isolated_point() && s.intersects(k, eps))
        })
        .map(|k| ("component contains no non-isolated point of the source".to_string(), Witness::Component(k.id)))
        .collect();
    v.check(sim::NON_ISOLATED, "non-isolated target components contain a non-isolated source point", failures);

    // (5) equivalent common spectral projections.
    if profile.flags.all_nonzero_projections_equivalent {
        v.skip(sim::PROJECTIONS, "component classes match", "all nonzero projections are equivalent");
    } else if profile.k0.is_trivial() {
        v.skip(sim::PROJECTIONS, "component classes match", "K0 is trivial");
    } else {
        let failures = projection_mismatches(source, target)
            .into_iter()
            .map(|(id, want, got)| (format!("target class {want}, source classes sum to {got}"), Witness::Component(id)))
            .collect();
        v.check(sim::PROJECTIONS, "component classes match", failures);
    }
    Ok(v.finish())
}

/// Whether a source component lies in the target spectrum.
pub(crate) fn piece_inside(s: &crate::geometry::Component, target: &SpectralDatum) -> bool {
    let t = target.spectrum();
    match s.point() {
        Some(p) => t.contains(p.value),
        None => s.boxes().iter().all(|b| t.boxes().contains(b)),
    }
}

/// Target components paired with the source components they contain.
pub(crate) fn contained_source_components(source: &SpectralDatum, target: &SpectralDatum) -> BTreeMap<usize, Vec<usize>> {
    let eps = target.resolution();
    let mut out: BTreeMap<usize, Vec<usize>> = target.components().iter().map(|k| (k.id, Vec::new())).collect();
    for s in source.components() {
        if let Some(k) = target.components().iter().find(|k| s.contained_in(k, eps)) {
            out.get_mut(&k.id).expect("target id").push(s.id);
        }
    }
    out
}

/// `(target component, target class, summed source class)` for every mismatch.
pub(crate) fn projection_mismatches(source: &SpectralDatum, target: &SpectralDatum) -> Vec<(usize, KElement, KElement)> {
    contained_source_components(source, target)
        .into_iter()
        .filter_map(|(k, ids)| {
            let want = target.component_class(k);
            let got = source
                .clopen_class(&ids.into_iter().collect())
                .expect("ids come from the source components");
            (want != got).then_some((k, want, got))
        })
        .collect()
}

/// Cells of the union frame of both complements.
fn frame_cells(a: &SpectralDatum, b: &SpectralDatum) -> impl Iterator<Item = GridBox> {
    let (a0, a1, a2, a3) = a.complement().frame();
    let (b0, b1, b2, b3) = b.complement().frame();
    let (n0, n1, m0, m1) = (a0.min(b0), a1.max(b1), a2.min(b2), a3.max(b3));
    (n0..=n1).flat_map(move |n| (m0..=m1).map(move |m| GridBox::new(n, m)))
}

/// Index-label disagreements off the target spectrum, one per target region.
fn index_mismatches(source: &SpectralDatum, target: &SpectralDatum) -> Vec<(String, Witness)> {
    let mut seen: BTreeMap<ComplementRegion, (KElement, KElement)> = BTreeMap::new();
    for cell in frame_cells(source, target) {
        let Some(t_region) = target.complement().region_of_cell(cell) else { continue };
        // Cells inside the source spectrum but outside the target are a
        // containment failure, reported by (1).
        let Some(s_region) = source.complement().region_of_cell(cell) else { continue };
        let (t_label, s_label) = (target.region_class(t_region), source.region_class(s_region));
        if t_label != s_label {
            seen.entry(t_region).or_insert((t_label, s_label));
        }
    }
    seen.into_iter()
        .map(|(region, (t, s))| {
            let witness = match region {
                ComplementRegion::Hole(h) => Witness::Hole(h),
                ComplementRegion::Unbounded => Witness::UnboundedRegion,
            };
            (format!("target index {t}, source index {s}"), witness)
        })
        .collect()
}

pub mod nil {
    pub const ZERO: &str = "zero-in-spectrum";
    pub const CONNECTED: &str = "connected";
    pub const INDEX: &str = "index-trivial";
}

/// Whether the datum is a norm limit of nilpotents: `0 ∈ σ`, `σ` connected,
/// index function trivial.
pub fn decide_nilpotent_limit(d: &SpectralDatum) -> Result<Verdict, DecisionError> {
    let flags = d.profile().flags;
    if !(flags.purely_infinite_simple || (flags.weak_fn && flags.all_nonzero_projections_equivalent)) {
        return Err(DecisionError::UnsupportedProfile(d.profile().name.clone()));
    }
    validated(d)?;
    let mut v = VerdictBuilder::default();
    let zero = Complex64::new(0.0, 0.0);
    let mut failures = Vec::new();
    if !d.spectrum().contains(zero) {
        failures.push(("0 is not in the spectrum".to_string(), Witness::Point(zero)));
    }
    v.check(nil::ZERO, "0 lies in the spectrum", failures);

    let failures = d
        .components()
        .iter()
        .skip(1)
        .map(|c| ("spectrum has more than one component".to_string(), Witness::Component(c.id)))
        .collect();
    v.check(nil::CONNECTED, "spectrum is connected", failures);

    let failures = d
        .complement()
        .holes()
        .iter()
        .filter_map(|h| {
            let label = d.hole_class(h.id);
            (!label.is_zero()).then(|| (format!("index label {label}"), Witness::Hole(h.id)))
        })
        .collect();
    v.check(nil::INDEX, "index function is trivial", failures);
    Ok(v.finish())
}

/// Finite measure on the real line, as `(atom, weight)` pairs.
pub type DiscreteMeasure = [(Complex64, f64)];

pub const MOMENT: &str = "moments";

/// `∫ x^k dμ` for `k = 1..=max_degree`.
pub fn moments(mu: &DiscreteMeasure, max_degree: usize) -> Vec<f64> {
    (1..=max_degree)
        .map(|k| mu.iter().map(|(x, w)| w * x.re.powi(k as i32)).sum())
        .collect()
}

fn check_measure(mu: &DiscreteMeasure, tol: f64, which: &str) -> Result<(), DecisionError> {
    if mu.is_empty() {
        return Err(DecisionError::BadMeasure(format!("{which} has no atoms")));
    }
    for (x, w) in mu {
        if x.im != 0.0 || !x.re.is_finite() {
            return Err(DecisionError::BadMeasure(format!("{which} atom {x} is not real")));
        }
        if !(*w > 0.0 && w.is_finite()) {
            return Err(DecisionError::BadMeasure(format!("{which} weight {w} is not positive")));
        }
    }
    let total: f64 = mu.iter().map(|(_, w)| w).sum();
    // Summation rounding is allowed on top of the caller's tolerance.
    if (total - 1.0).abs() > tol + 1e-12 {
        return Err(DecisionError::BadMeasure(format!("{which} weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Moment comparison of two spectral distributions. A failed moment is a
/// certificate that neither self-adjoint operator lies in the closed
/// similarity orbit of the other in a II_1 factor.
pub fn ii1_moment_obstruction(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    max_degree: usize,
    tol: f64,
) -> Result<Verdict, DecisionError> {
    if max_degree < 1 {
        return Err(DecisionError::BadMeasure("max_degree must be at least 1".into()));
    }
    check_measure(mu1, tol, "first measure")?;
    check_measure(mu2, tol, "second measure")?;
    let (a, b) = (moments(mu1, max_degree), moments(mu2, max_degree));
    let failures = a
        .iter()
        .zip(&b)
        .enumerate()
        .filter(|(_, (x, y))| (*x - *y).abs() > tol)
        .map(|(i, (x, y))| (format!("moment {} differs: {x} vs {y} (|Δ| = {})", i + 1, (x - y).abs()), Witness::Moment(i + 1)))
        .collect();
    let mut v = VerdictBuilder::default();
    v.check(MOMENT, "moments agree up to max_degree", failures);
    Ok(v.finish())
}
