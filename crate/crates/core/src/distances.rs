//! Distances between unitary orbits: the ρ pseudometric, upper-bound rules,
//! and a contour lower bound for data with inequivalent spectral projections.

use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::decisions::{check_pair, piece_inside, projection_mismatches, DecisionError};
use crate::geometry::{connected_components, hausdorff_distance, Component, GridBox, Rect};
use crate::kdata::{KElement, SpectralDatum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(f64, f64),
    #[error("K1 groups differ: {0} vs {1}")]
    K1Mismatch(String, String),
    #[error("unknown region component {0}")]
    UnknownRegion(usize),
    #[error("offset must be positive, got {0}")]
    BadOffset(f64),
    #[error("refinement must be positive, got {0}")]
    BadRefinement(f64),
    #[error("offset too large: contour meets component {0}")]
    OffsetTooLarge(usize),
    #[error("offset too small for refinement {refinement}: contour within {distance} of a spectrum")]
    OffsetTooSmall { distance: f64, refinement: f64 },
}

/// Rule tags reported with distance bounds.
pub mod rules {
    pub const RHO: &str = "rho";
    pub const CONTAINED_SPECTRUM: &str = "hausdorff-contained-spectrum";
    pub const EQUIVALENT_PROJECTIONS: &str = "hausdorff-equivalent-projections";
    pub const TWICE_RHO: &str = "twice-rho";
    pub const UNKNOWN: &str = "unknown";
}

/// Corner estimate of ρ. The true value lies in `[value, value + slack]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub value: f64,
    pub hausdorff: f64,
    /// Largest `dist(c, σ1) + dist(c, σ2)` over corners `c` of label-mismatch
    /// cells; `None` when the labels agree everywhere.
    pub mismatch_corner_max: Option<f64>,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub lower: f64,
    /// `None` means unknown.
    pub upper: Option<f64>,
    pub lower_rule: &'static str,
    pub upper_rule: &'static str,
    pub discretization_slack: f64,
    pub rho: RhoEstimate,
}

fn check_rho_inputs(d1: &SpectralDatum, d2: &SpectralDatum) -> Result<(), DistanceError> {
    if d1.resolution() != d2.resolution() {
        return Err(DistanceError::ResolutionMismatch(d1.resolution(), d2.resolution()));
    }
    if d1.profile().k1 != d2.profile().k1 {
        return Err(DistanceError::K1Mismatch(d1.profile().k1.to_string(), d2.profile().k1.to_string()));
    }
    Ok(())
}

fn union_frame(d1: &SpectralDatum, d2: &SpectralDatum) -> impl Iterator<Item = GridBox> {
    let (a0, a1, a2, a3) = d1.complement().frame();
    let (b0, b1, b2, b3) = d2.complement().frame();
    let (n0, n1, m0, m1) = (a0.min(b0), a1.max(b1), a2.min(b2), a3.max(b3));
    (n0..=n1).flat_map(move |n| (m0..=m1).map(move |m| GridBox::new(n, m)))
}

/// Complement cells, outside both spectra, on which the index labels differ.
pub fn mismatch_cells(d1: &SpectralDatum, d2: &SpectralDatum) -> Vec<GridBox> {
    union_frame(d1, d2)
        .filter(|&cell| {
            match (d1.complement().region_of_cell(cell), d2.complement().region_of_cell(cell)) {
                (Some(r1), Some(r2)) => d1.region_class(r1) != d2.region_class(r2),
                _ => false,
            }
        })
        .collect()
}

/// ρ estimated from cell corners, with slack `√2·ε` when any label differs.
pub fn rho(d1: &SpectralDatum, d2: &SpectralDatum) -> Result<RhoEstimate, DistanceError> {
    check_rho_inputs(d1, d2)?;
    let eps = d1.resolution();
    let (s1, s2) = (d1.spectrum(), d2.spectrum());
    let hausdorff = hausdorff_distance(s1, s2);
    let corner_max = mismatch_cells(d1, d2)
        .into_iter()
        .flat_map(|cell| cell.rect(eps).corners())
        .map(|c| s1.dist(c) + s2.dist(c))
        .reduce(f64::max);
    let value = corner_max.map_or(hausdorff, |c| c.max(hausdorff));
    let slack = if corner_max.is_some() { SQRT_2 * eps } else { 0.0 };
    Ok(RhoEstimate { value, hausdorff, mismatch_corner_max: corner_max, slack })
}

/// Whether `small ⊆ big`, `small` meets every component of `big`, and the
/// component classes of `big` are the sums of those of `small`.
fn contained_with_classes(small: &SpectralDatum, big: &SpectralDatum) -> bool {
    let eps = big.resolution();
    let inside = small.components().iter().all(|s| piece_inside(s, big));
    let meets = big
        .components()
        .iter()
        .all(|k| small.components().iter().any(|s| s.intersects(k, eps)));
    let flags = big.profile().flags;
    let classes = flags.all_nonzero_projections_equivalent
        || big.profile().k0.is_trivial()
        || projection_mismatches(small, big).is_empty();
    inside && meets && classes
}

/// Classes of the clopen pieces of `d` lying in each component of `union`.
fn classes_on(union: &[Component], d: &SpectralDatum) -> Vec<KElement> {
    let eps = d.resolution();
    union
        .iter()
        .map(|u| {
            let ids: BTreeSet<usize> = d
                .components()
                .iter()
                .filter(|c| c.contained_in(u, eps))
                .map(|c| c.id)
                .collect();
            d.clopen_class(&ids).expect("component ids of d")
        })
        .collect()
}

fn union_components(d1: &SpectralDatum, d2: &SpectralDatum) -> Vec<Component> {
    let u = d1.spectrum().union(d2.spectrum()).expect("resolutions already checked");
    connected_components(&u)
}

/// Lower bound ρ and the sharpest applicable upper bound on the distance
/// between the unitary orbits.
pub fn distance_bounds(d1: &SpectralDatum, d2: &SpectralDatum) -> Result<DistanceReport, DistanceError> {
    check_pair(d1, d2)?;
    let r = rho(d1, d2)?;
    let report = |upper: Option<f64>, rule: &'static str, slack: f64| DistanceReport {
        lower: r.value,
        upper,
        lower_rule: rules::RHO,
        upper_rule: rule,
        discretization_slack: slack,
        rho: r,
    };
    let labels_agree = r.mismatch_corner_max.is_none();
    if labels_agree && (contained_with_classes(d1, d2) || contained_with_classes(d2, d1)) {
        return Ok(report(Some(r.hausdorff), rules::CONTAINED_SPECTRUM, 0.0));
    }
    let profile = d1.profile();
    if profile.flags.all_nonzero_projections_equivalent && d1.index_trivial() && d2.index_trivial() {
        return Ok(report(Some(r.hausdorff), rules::EQUIVALENT_PROJECTIONS, 0.0));
    }
    let union = union_components(d1, d2);
    if profile.k0.is_trivial() || classes_on(&union, d1) == classes_on(&union, d2) {
        return Ok(report(Some(2.0 * r.value), rules::TWICE_RHO, 2.0 * r.slack));
    }
    Ok(report(None, rules::UNKNOWN, r.slack))
}

/// Contour lower bound on the distance between unitary orbits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourBound {
    /// Certified bound `2π / (l₀ · sup)` with the sup inflated between samples.
    pub bound: f64,
    /// Same formula with the sup over the samples only.
    pub sampled_bound: f64,
    pub contour_length: f64,
    pub certified_sup: f64,
    pub sampled_sup: f64,
    pub samples: usize,
    pub refinement: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GapBound {
    NotApplicable { class1: String, class2: String },
    Applicable(ContourBound),
}

/// A straight piece of a rectilinear contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Complex64,
    pub b: Complex64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

fn closed_rect(c: &Component, eps: f64) -> Vec<Rect> {
    match c.point() {
        Some(p) => vec![Rect { x0: p.value.re, x1: p.value.re, y0: p.value.im, y1: p.value.im }],
        None => c.boxes().iter().map(|b| b.rect(eps)).collect(),
    }
}

fn grow(r: &Rect, by: f64) -> Rect {
    Rect { x0: r.x0 - by, x1: r.x1 + by, y0: r.y0 - by, y1: r.y1 + by }
}

/// Boundary of a union of axis-aligned rectangles, as maximal edges of the
/// compressed grid between covered and uncovered cells.
pub fn union_boundary(rects: &[Rect]) -> Vec<Segment> {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let (nx, ny) = (xs.len().saturating_sub(1), ys.len().saturating_sub(1));
    let inside = |i: isize, j: isize| -> bool {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            return false;
        }
        let (i, j) = (i as usize, j as usize);
        let cx = 0.5 * (xs[i] + xs[i + 1]);
        let cy = 0.5 * (ys[j] + ys[j + 1]);
        rects.iter().any(|r| r.x0 < cx && cx < r.x1 && r.y0 < cy && cy < r.y1)
    };
    let mut out = Vec::new();
    // Vertical edges at xs[i], between cells i-1 and i.
    for i in 0..xs.len() {
        for j in 0..ny {
            if inside(i as isize - 1, j as isize) != inside(i as isize, j as isize) {
                out.push(Segment { a: Complex64::new(xs[i], ys[j]), b: Complex64::new(xs[i], ys[j + 1]) });
            }
        }
    }
    for j in 0..ys.len() {
        for i in 0..nx {
            if inside(i as isize, j as isize - 1) != inside(i as isize, j as isize) {
                out.push(Segment { a: Complex64::new(xs[i], ys[j]), b: Complex64::new(xs[i + 1], ys[j]) });
            }
        }
    }
    out
}

/// Lower bound on the distance between the unitary orbits from the
/// inequivalence of the spectral projections onto `region`.
///
/// `region` holds component ids of the union of both spectra. The contour is
/// the boundary of the selected pieces grown by `offset` in the max-norm; it
/// is sampled at spacing `refinement / 2` and the sup of
/// `1/(dist(z,σ1)·dist(z,σ2))` is certified by shrinking each distance by
/// `refinement / 4`.
pub fn projection_gap_lower_bound(
    d1: &SpectralDatum,
    d2: &SpectralDatum,
    region: &BTreeSet<usize>,
    offset: f64,
    refinement: Option<f64>,
) -> Result<GapBound, DistanceError> {
    check_pair(d1, d2)?;
    if !(offset > 0.0 && offset.is_finite()) {
        return Err(DistanceError::BadOffset(offset));
    }
    let eps = d1.resolution();
    let h = refinement.unwrap_or(eps / 4.0);
    if !(h > 0.0 && h.is_finite()) {
        return Err(DistanceError::BadRefinement(h));
    }
    let union = union_components(d1, d2);
    if let Some(&bad) = region.iter().find(|&&id| id >= union.len()) {
        return Err(DistanceError::UnknownRegion(bad));
    }
    let selected: Vec<&Component> = union.iter().filter(|c| region.contains(&c.id)).collect();
    let sum = |d: &SpectralDatum| {
        let ids: BTreeSet<usize> = d
            .components()
            .iter()
            .filter(|c| selected.iter().any(|u| c.contained_in(u, eps)))
            .map(|c| c.id)
            .collect();
        d.clopen_class(&ids).expect("component ids of d")
    };
    let (c1, c2) = (sum(d1), sum(d2));
    if c1 == c2 {
        return Ok(GapBound::NotApplicable { class1: c1.to_string(), class2: c2.to_string() });
    }

    let grown: Vec<Rect> = selected.iter().flat_map(|c| closed_rect(c, eps)).map(|r| grow(&r, offset)).collect();
    for other in union.iter().filter(|c| !region.contains(&c.id)) {
        let hit = closed_rect(other, eps).iter().any(|r| grown.iter().any(|g| g.intersects(r)));
        if hit {
            return Err(DistanceError::OffsetTooLarge(other.id));
        }
    }

    let contour = union_boundary(&grown);
    let length: f64 = contour.iter().map(Segment::length).sum();
    let (s1, s2) = (d1.spectrum(), d2.spectrum());
    let spacing = h / 2.0;
    let margin = h / 4.0;
    let mut samples = 0usize;
    let mut sampled_sup = 0.0f64;
    let mut certified_sup = 0.0f64;
    for seg in &contour {
        let k = (seg.length() / spacing).ceil().max(1.0) as usize;
        for t in 0..=k {
            let z = seg.a + (seg.b - seg.a) * (t as f64 / k as f64);
            let (a, b) = (s1.dist(z), s2.dist(z));
            if a.min(b) <= margin {
                return Err(DistanceError::OffsetTooSmall { distance: a.min(b), refinement: h });
            }
            samples += 1;
            sampled_sup = sampled_sup.max(1.0 / (a * b));
            certified_sup = certified_sup.max(1.0 / ((a - margin) * (b - margin)));
        }
    }
    Ok(GapBound::Applicable(ContourBound {
        bound: 2.0 * PI / (length * certified_sup),
        sampled_bound: 2.0 * PI / (length * sampled_sup),
        contour_length: length,
        certified_sup,
        sampled_sup,
        samples,
        refinement: h,
        offset,
    }))
}

/// Sup of the ρ term over a rectangle by dense sampling.
/// Used by tests as an independent reference.
#[cfg(test)]
pub(crate) fn dense_sup(rect: &Rect, s1: &crate::geometry::GridSet, s2: &crate::geometry::GridSet, per_side: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..=per_side {
        for j in 0..=per_side {
            let z = Complex64::new(
                rect.x0 + (rect.x1 - rect.x0) * i as f64 / per_side as f64,
                rect.y0 + (rect.y1 - rect.y0) * j as f64 / per_side as f64,
            );
            best = best.max(s1.dist(z) + s2.dist(z));
        }
    }
    best
}
