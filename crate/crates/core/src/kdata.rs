//! K-theory labels: finitely generated abelian groups, algebra profiles, and
//! spectral data carrying per-component `K_0` classes and per-hole `K_1`
//! index labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{complement_components, connected_components, Complement, Component, GridSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KError {
    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(KGroup, KGroup),
    #[error("element has {got} coordinates, group {group} needs {want}")]
    Arity { group: KGroup, got: usize, want: usize },
    #[error("torsion order {0} must be at least 2")]
    BadTorsion(u64),
    #[error("unknown component id {0}")]
    UnknownComponent(usize),
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
}

/// `Z^r ⊕ Z_{d_1} ⊕ ... ⊕ Z_{d_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KGroup {
    pub free_rank: usize,
    #[serde(default)]
    pub torsion_orders: Vec<u64>,
}

impl KGroup {
    pub fn new(free_rank: usize, torsion_orders: Vec<u64>) -> Result<Self, KError> {
        if let Some(&d) = torsion_orders.iter().find(|&&d| d < 2) {
            return Err(KError::BadTorsion(d));
        }
        Ok(KGroup { free_rank, torsion_orders })
    }

    pub fn trivial() -> Self {
        KGroup { free_rank: 0, torsion_orders: Vec::new() }
    }

    pub fn integers() -> Self {
        KGroup { free_rank: 1, torsion_orders: Vec::new() }
    }

    pub fn cyclic(order: u64) -> Result<Self, KError> {
        Self::new(0, vec![order])
    }

    pub fn rank(&self) -> usize {
        self.free_rank + self.torsion_orders.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    pub fn zero(&self) -> KElement {
        KElement { group: self.clone(), coords: vec![0; self.rank()] }
    }

    /// Element from raw coordinates; torsion coordinates are reduced.
    pub fn element(&self, coords: &[i64]) -> Result<KElement, KError> {
        if coords.len() != self.rank() {
            return Err(KError::Arity { group: self.clone(), got: coords.len(), want: self.rank() });
        }
        let mut el = KElement { group: self.clone(), coords: coords.to_vec() };
        el.reduce();
        Ok(el)
    }
}

impl fmt::Display for KGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion_orders.iter().map(|d| format!("Z_{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KElement {
    group: KGroup,
    coords: Vec<i64>,
}

impl KElement {
    pub fn group(&self) -> &KGroup {
        &self.group
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn reduce(&mut self) {
        let r = self.group.free_rank;
        for (c, &d) in self.coords[r..].iter_mut().zip(&self.group.torsion_orders) {
            *c = c.rem_euclid(d as i64);
        }
    }

    pub fn add(&self, other: &KElement) -> Result<KElement, KError> {
        self.check_group(other)?;
        let mut el = KElement {
            group: self.group.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        };
        el.reduce();
        Ok(el)
    }

    pub fn neg(&self) -> KElement {
        let mut el = KElement { group: self.group.clone(), coords: self.coords.iter().map(|c| -c).collect() };
        el.reduce();
        el
    }

    pub fn sub(&self, other: &KElement) -> Result<KElement, KError> {
        self.add(&other.neg())
    }

    /// Equality after reduction; errors when groups differ.
    pub fn k_eq(&self, other: &KElement) -> Result<bool, KError> {
        self.check_group(other)?;
        Ok(self.coords == other.coords)
    }

    fn check_group(&self, other: &KElement) -> Result<(), KError> {
        if self.group != other.group {
            return Err(KError::GroupMismatch(self.group.clone(), other.group.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            f.write_str("0")
        } else if self.coords.len() == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            let inner: Vec<String> = self.coords.iter().map(i64::to_string).collect();
            write!(f, "({})", inner.join(", "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ProfileFlags {
    pub purely_infinite_simple: bool,
    pub all_nonzero_projections_equivalent: bool,
    #[serde(rename = "weak_FN")]
    pub weak_fn: bool,
}

/// K-theoretic data of the ambient algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraProfile {
    pub name: String,
    pub k0: KGroup,
    pub unit_class: KElement,
    pub k1: KGroup,
    pub flags: ProfileFlags,
}

impl AlgebraProfile {
    pub fn new(name: impl Into<String>, k0: KGroup, unit_class: &[i64], k1: KGroup, flags: ProfileFlags) -> Result<Self, KError> {
        let unit_class = k0.element(unit_class)?;
        Ok(AlgebraProfile { name: name.into(), k0, unit_class, k1, flags })
    }

    /// Cuntz algebra `O_2`: both K-groups vanish.
    pub fn cuntz_o2() -> Self {
        AlgebraProfile {
            name: "O2".into(),
            k0: KGroup::trivial(),
            unit_class: KGroup::trivial().zero(),
            k1: KGroup::trivial(),
            flags: ProfileFlags { purely_infinite_simple: true, all_nonzero_projections_equivalent: true, weak_fn: true },
        }
    }

    /// Cuntz algebra `O_n`, `n >= 3`: `K_0 = Z_{n-1}` with the unit at 1, `K_1 = 0`.
    pub fn cuntz(n: u64) -> Result<Self, KError> {
        if n == 2 {
            return Ok(Self::cuntz_o2());
        }
        if n < 2 {
            return Err(KError::UnknownProfile(format!("O{n}")));
        }
        let k0 = KGroup::cyclic(n - 1)?;
        Ok(AlgebraProfile {
            name: format!("O{n}"),
            unit_class: k0.element(&[1])?,
            k0,
            k1: KGroup::trivial(),
            flags: ProfileFlags { purely_infinite_simple: true, ..Default::default() },
        })
    }

    /// Calkin algebra: `K_0 = 0`, `K_1 = Z` (Fredholm index).
    pub fn calkin() -> Self {
        AlgebraProfile {
            name: "Calkin".into(),
            k0: KGroup::trivial(),
            unit_class: KGroup::trivial().zero(),
            k1: KGroup::integers(),
            flags: ProfileFlags { purely_infinite_simple: true, ..Default::default() },
        }
    }

    /// Type III factor with separable predual.
    pub fn type_iii() -> Self {
        AlgebraProfile {
            name: "TypeIII".into(),
            k0: KGroup::trivial(),
            unit_class: KGroup::trivial().zero(),
            k1: KGroup::trivial(),
            flags: ProfileFlags { purely_infinite_simple: false, all_nonzero_projections_equivalent: true, weak_fn: true },
        }
    }

    /// Built-in profile by name: `O2`, `O<n>`, `Calkin`, `TypeIII`.
    pub fn builtin(name: &str) -> Result<Self, KError> {
        match name {
            "Calkin" | "calkin" => Ok(Self::calkin()),
            "TypeIII" | "typeIII" | "type_iii" => Ok(Self::type_iii()),
            _ => {
                let n = name
                    .strip_prefix('O')
                    .and_then(|rest| rest.parse::<u64>().ok())
                    .ok_or_else(|| KError::UnknownProfile(name.to_string()))?;
                Self::cuntz(n)
            }
        }
    }
}

/// A structured invariant violation found by [`SpectralDatum::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: &'static str,
    pub id: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Default complement frame margin in units of the resolution.
pub const FRAME_MARGIN_CELLS: f64 = 2.0;

/// A spectrum with its index function (one `K_1` label per bounded hole) and
/// one `K_0` class per spectrum component.
///
/// Components and holes are derived from the spectrum, so labels are keyed by
/// the deterministic ids of [`connected_components`] and
/// [`complement_components`]. Missing labels read as zero.
#[derive(Debug, Clone)]
pub struct SpectralDatum {
    spectrum: GridSet,
    profile: AlgebraProfile,
    component_k0: BTreeMap<usize, KElement>,
    hole_k1: BTreeMap<usize, KElement>,
    components: Vec<Component>,
    complement: Complement,
}

impl SpectralDatum {
    pub fn new(
        spectrum: GridSet,
        profile: AlgebraProfile,
        component_k0: BTreeMap<usize, KElement>,
        hole_k1: BTreeMap<usize, KElement>,
    ) -> Self {
        let components = connected_components(&spectrum);
        let complement = complement_components(&spectrum, FRAME_MARGIN_CELLS * spectrum.resolution());
        SpectralDatum { spectrum, profile, component_k0, hole_k1, components, complement }
    }

    /// Datum with trivial index function and the whole unit class on the
    /// first component.
    pub fn with_unit_on_first(spectrum: GridSet, profile: AlgebraProfile) -> Self {
        let mut k0 = BTreeMap::new();
        k0.insert(0, profile.unit_class.clone());
        Self::new(spectrum, profile, k0, BTreeMap::new())
    }

    pub fn spectrum(&self) -> &GridSet {
        &self.spectrum
    }

    pub fn profile(&self) -> &AlgebraProfile {
        &self.profile
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn complement(&self) -> &Complement {
        &self.complement
    }

    pub fn resolution(&self) -> f64 {
        self.spectrum.resolution()
    }

    pub fn component_labels(&self) -> &BTreeMap<usize, KElement> {
        &self.component_k0
    }

    pub fn hole_labels(&self) -> &BTreeMap<usize, KElement> {
        &self.hole_k1
    }

    /// `K_0` class of a component; zero when unlabeled.
    pub fn component_class(&self, id: usize) -> KElement {
        self.component_k0.get(&id).cloned().unwrap_or_else(|| self.profile.k0.zero())
    }

    /// Index label of a bounded hole; zero when unlabeled.
    pub fn hole_class(&self, id: usize) -> KElement {
        self.hole_k1.get(&id).cloned().unwrap_or_else(|| self.profile.k1.zero())
    }

    /// Index label `[λ - N]_1` of a complement region.
    pub fn region_class(&self, region: crate::geometry::ComplementRegion) -> KElement {
        match region {
            crate::geometry::ComplementRegion::Hole(h) => self.hole_class(h),
            crate::geometry::ComplementRegion::Unbounded => self.profile.k1.zero(),
        }
    }

    /// Whether every hole label vanishes.
    pub fn index_trivial(&self) -> bool {
        self.complement.holes().iter().all(|h| self.hole_class(h.id).is_zero())
    }

    /// `[f(N)]_0` for the indicator `f` of the selected components.
    pub fn clopen_class(&self, component_ids: &BTreeSet<usize>) -> Result<KElement, KError> {
        let mut acc = self.profile.k0.zero();
        for &id in component_ids {
            if id >= self.components.len() {
                return Err(KError::UnknownComponent(id));
            }
            acc = acc.add(&self.component_class(id))?;
        }
        Ok(acc)
    }

    /// Every violated invariant; empty iff the datum is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n_comp = self.components.len();
        let n_holes = self.complement.holes().len();
        for (&id, el) in &self.component_k0 {
            if id >= n_comp {
                out.push(Violation {
                    invariant: "component-id",
                    id: Some(id),
                    message: format!("component label {id} refers to no component"),
                });
            } else if el.group() != &self.profile.k0 {
                out.push(Violation {
                    invariant: "component-group",
                    id: Some(id),
                    message: format!("component {id} label lives in {}, profile K0 is {}", el.group(), self.profile.k0),
                });
            }
        }
        for (&id, el) in &self.hole_k1 {
            if id >= n_holes {
                out.push(Violation {
                    invariant: "hole-id",
                    id: Some(id),
                    message: format!("hole label {id} refers to no bounded hole"),
                });
            } else if self.profile.k1.is_trivial() && !el.is_zero() {
                out.push(Violation { invariant: "trivial-k1", id: Some(id), message: "hole label must be 0".into() });
            } else if el.group() != &self.profile.k1 {
                out.push(Violation {
                    invariant: "hole-group",
                    id: Some(id),
                    message: format!("hole {id} label lives in {}, profile K1 is {}", el.group(), self.profile.k1),
                });
            }
        }
        if self.profile.unit_class.group() != &self.profile.k0 {
            out.push(Violation {
                invariant: "unit-group",
                id: None,
                message: format!("unit class does not live in K0 = {}", self.profile.k0),
            });
            return out;
        }
        let mut sum = self.profile.k0.zero();
        for id in 0..n_comp {
            let el = self.component_class(id);
            if el.group() == &self.profile.k0 {
                sum = sum.add(&el).expect("same group");
            }
        }
        if sum != self.profile.unit_class {
            out.push(Violation {
                invariant: "unit-sum",
                id: None,
                message: format!(
                    "component labels sum to {sum}, expected the unit class {}",
                    self.profile.unit_class
                ),
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridBox, IsolatedPoint};
    use num_complex::Complex64;

    #[test]
    fn k_add_examples() {
        let z2 = KGroup::cyclic(2).unwrap();
        let one = z2.element(&[1]).unwrap();
        assert!(one.add(&one).unwrap().is_zero());

        let z = KGroup::integers();
        assert_eq!(z.element(&[2]).unwrap().add(&z.element(&[3]).unwrap()).unwrap().coords(), &[5]);

        let g = KGroup::new(1, vec![3]).unwrap();
        let s = g.element(&[1, 2]).unwrap().add(&g.element(&[0, 2]).unwrap()).unwrap();
        assert_eq!(s.coords(), &[1, 1]);
    }

    #[test]
    fn group_mismatch_is_an_error() {
        let a = KGroup::integers().element(&[1]).unwrap();
        let b = KGroup::cyclic(2).unwrap().element(&[1]).unwrap();
        assert!(matches!(a.add(&b), Err(KError::GroupMismatch(..))));
        assert!(a.k_eq(&b).is_err());
        assert!(matches!(KGroup::cyclic(1), Err(KError::BadTorsion(1))));
        assert!(KGroup::integers().element(&[1, 2]).is_err());
    }

    #[test]
    fn negation_and_reduction() {
        let g = KGroup::new(1, vec![5]).unwrap();
        let x = g.element(&[-3, 7]).unwrap();
        assert_eq!(x.coords(), &[-3, 2]);
        assert!(x.add(&x.neg()).unwrap().is_zero());
    }

    #[test]
    fn builtin_profiles() {
        assert_eq!(AlgebraProfile::builtin("O3").unwrap().k0, KGroup::cyclic(2).unwrap());
        assert!(AlgebraProfile::builtin("O2").unwrap().k0.is_trivial());
        assert_eq!(AlgebraProfile::builtin("Calkin").unwrap().k1, KGroup::integers());
        assert!(AlgebraProfile::builtin("TypeIII").unwrap().flags.all_nonzero_projections_equivalent);
        assert!(AlgebraProfile::builtin("O1").is_err());
        assert!(AlgebraProfile::builtin("B(H)").is_err());
    }

    fn two_points() -> GridSet {
        GridSet::from_points(
            1.0,
            [IsolatedPoint::new(Complex64::new(0.0, 0.0)), IsolatedPoint::new(Complex64::new(1.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn clopen_class_examples() {
        let o3 = AlgebraProfile::cuntz(3).unwrap();
        let one = o3.k0.element(&[1]).unwrap();
        let labels = BTreeMap::from([(0, one.clone()), (1, one.clone())]);
        // Labels 1 + 1 = 0 do not sum to the unit: fine for clopen_class, flagged by validate.
        let d = SpectralDatum::new(two_points(), o3.clone(), labels, BTreeMap::new());
        assert!(d.clopen_class(&BTreeSet::from([0, 1])).unwrap().is_zero());
        assert!(d.clopen_class(&BTreeSet::new()).unwrap().is_zero());
        assert!(matches!(d.clopen_class(&BTreeSet::from([7])), Err(KError::UnknownComponent(7))));
        assert_eq!(d.validate().len(), 1);

        let ok = SpectralDatum::new(two_points(), o3.clone(), BTreeMap::from([(1, one.clone())]), BTreeMap::new());
        assert_eq!(ok.clopen_class(&BTreeSet::from([0, 1])).unwrap(), o3.unit_class);
    }

    fn ring() -> GridSet {
        let cells = (0..3).flat_map(|n| (0..3).map(move |m| GridBox::new(n, m))).filter(|b| *b != GridBox::new(1, 1));
        GridSet::from_boxes(1.0, cells).unwrap()
    }

    #[test]
    fn validate_examples() {
        let o2 = SpectralDatum::with_unit_on_first(two_points(), AlgebraProfile::cuntz_o2());
        assert!(o2.validate().is_empty());

        let calkin = AlgebraProfile::calkin();
        let d = SpectralDatum::new(
            ring(),
            calkin.clone(),
            BTreeMap::new(),
            BTreeMap::from([(0, calkin.k1.element(&[1]).unwrap())]),
        );
        assert!(d.validate().is_empty());
        assert!(!d.index_trivial());

        let z_label = KGroup::cyclic(4).unwrap().element(&[3]).unwrap();
        let wrong = SpectralDatum::new(ring(), calkin.clone(), BTreeMap::new(), BTreeMap::from([(0, z_label)]));
        let v = wrong.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "hole-group");
    }

    #[test]
    fn trivial_k1_rejects_nonzero_hole_label() {
        let label = KGroup::integers().element(&[2]).unwrap();
        let d = SpectralDatum::new(ring(), AlgebraProfile::cuntz_o2(), BTreeMap::new(), BTreeMap::from([(0, label)]));
        let v = d.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "hole label must be 0");
        assert_eq!(v[0].id, Some(0));
    }

    #[test]
    fn validate_is_idempotent_and_names_ids() {
        let o3 = AlgebraProfile::cuntz(3).unwrap();
        let d = SpectralDatum::new(two_points(), o3.clone(), BTreeMap::from([(5, o3.unit_class.clone())]), BTreeMap::new());
        let v1 = d.validate();
        assert_eq!(v1, d.validate());
        assert!(v1.iter().any(|v| v.id == Some(5)));
        assert!(v1.iter().any(|v| v.invariant == "unit-sum"));
    }
}
