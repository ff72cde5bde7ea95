//! Seeded generators for random grid sets and labeled spectral data.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::Rng;
use spectral_orbits::geometry::{GridBox, GridSet, IsolatedPoint};
use spectral_orbits::kdata::{AlgebraProfile, KElement, KGroup, SpectralDatum};
use spectral_orbits::sandbox::DenseMatrix;

pub const RESOLUTIONS: [f64; 3] = [1.0, 0.5, 0.25];

pub fn profiles() -> Vec<AlgebraProfile> {
    vec![
        AlgebraProfile::cuntz_o2(),
        AlgebraProfile::cuntz(3).unwrap(),
        AlgebraProfile::cuntz(5).unwrap(),
        AlgebraProfile::calkin(),
        AlgebraProfile::type_iii(),
    ]
}

/// 8-connected region of at most `max_boxes` boxes grown from `origin`.
pub fn region<R: Rng>(rng: &mut R, origin: GridBox, max_boxes: usize) -> BTreeSet<GridBox> {
    let target = rng.gen_range(1..=max_boxes.max(1));
    let mut order = vec![origin];
    let mut set: BTreeSet<GridBox> = order.iter().copied().collect();
    let mut tries = 0;
    while set.len() < target && tries < 20 * target {
        tries += 1;
        let from = order[rng.gen_range(0..order.len())];
        let dir = rng.gen_range(0..8);
        let to = from.neighbors8().nth(dir).unwrap();
        if set.insert(to) {
            order.push(to);
        }
    }
    set
}

/// Rectangular annulus one box thick, enclosing at least one cell.
pub fn ring<R: Rng>(rng: &mut R, origin: GridBox) -> BTreeSet<GridBox> {
    let w = rng.gen_range(3..=6);
    let h = rng.gen_range(3..=6);
    let mut set = BTreeSet::new();
    for i in 0..w {
        for j in 0..h {
            if i == 0 || j == 0 || i == w - 1 || j == h - 1 {
                set.insert(GridBox::new(origin.n + i, origin.m + j));
            }
        }
    }
    set
}

/// Union of one to three regions or rings, plus up to two isolated points.
pub fn gridset<R: Rng>(rng: &mut R, eps: f64, max_boxes: usize) -> GridSet {
    let pieces = rng.gen_range(1..=3);
    let budget = (max_boxes / pieces).max(1);
    let mut boxes = BTreeSet::new();
    for _ in 0..pieces {
        let origin = GridBox::new(rng.gen_range(-8..=8), rng.gen_range(-8..=8));
        let piece = if budget >= 20 && rng.gen_bool(0.3) { ring(rng, origin) } else { region(rng, origin, budget) };
        boxes.extend(piece);
    }
    let mut points = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let cell = GridBox::new(rng.gen_range(-12..=12), rng.gen_range(-12..=12));
        if !boxes.contains(&cell) {
            let z = cell.center(eps);
            if points.iter().all(|p: &IsolatedPoint| p.value != z) {
                points.push(if rng.gen_bool(0.5) { IsolatedPoint::cluster(z) } else { IsolatedPoint::new(z) });
            }
        }
    }
    GridSet::new(eps, boxes, points).unwrap()
}

/// Single 8-connected region, no isolated points.
pub fn connected_gridset<R: Rng>(rng: &mut R, eps: f64, max_boxes: usize) -> GridSet {
    let origin = GridBox::new(rng.gen_range(-4..=4), rng.gen_range(-4..=4));
    GridSet::from_boxes(eps, region(rng, origin, max_boxes)).unwrap()
}

pub fn random_element<R: Rng>(rng: &mut R, g: &KGroup) -> KElement {
    let coords: Vec<i64> = (0..g.rank()).map(|_| rng.gen_range(-2..=2)).collect();
    g.element(&coords).unwrap()
}

/// Valid datum on `g`: random component classes summing to the unit class,
/// random hole labels.
pub fn labeled<R: Rng>(rng: &mut R, g: GridSet, profile: &AlgebraProfile) -> SpectralDatum {
    let bare = SpectralDatum::new(g.clone(), profile.clone(), BTreeMap::new(), BTreeMap::new());
    let n_comp = bare.components().len();
    let n_holes = bare.complement().holes().len();
    let mut k0 = BTreeMap::new();
    let mut sum = profile.k0.zero();
    for id in 1..n_comp {
        let el = random_element(rng, &profile.k0);
        sum = sum.add(&el).unwrap();
        k0.insert(id, el);
    }
    k0.insert(0, profile.unit_class.sub(&sum).unwrap());
    let mut k1 = BTreeMap::new();
    for id in 0..n_holes {
        let el = random_element(rng, &profile.k1);
        if !el.is_zero() {
            k1.insert(id, el);
        }
    }
    SpectralDatum::new(g, profile.clone(), k0, k1)
}

pub fn random_datum<R: Rng>(rng: &mut R, profile: &AlgebraProfile, eps: f64, max_boxes: usize) -> SpectralDatum {
    let g = gridset(rng, eps, max_boxes);
    labeled(rng, g, profile)
}

/// Trivial index function and the whole unit class on the first component.
pub fn trivially_labeled(g: GridSet, profile: &AlgebraProfile) -> SpectralDatum {
    SpectralDatum::with_unit_on_first(g, profile.clone())
}

#[derive(Debug, Clone, Copy)]
pub enum PairMode {
    Independent,
    Copy,
    Relabel,
    Superset,
}

/// Pair of valid data on a shared profile and resolution. The modes bias
/// towards related pairs so that positive verdicts occur.
pub fn pair<R: Rng>(rng: &mut R, profile: &AlgebraProfile, eps: f64, max_boxes: usize) -> (SpectralDatum, SpectralDatum) {
    let mode = match rng.gen_range(0..4) {
        0 => PairMode::Independent,
        1 => PairMode::Copy,
        2 => PairMode::Relabel,
        _ => PairMode::Superset,
    };
    let g1 = gridset(rng, eps, max_boxes);
    let d1 = labeled(rng, g1.clone(), profile);
    let d2 = match mode {
        PairMode::Independent => random_datum(rng, profile, eps, max_boxes),
        PairMode::Copy => SpectralDatum::new(
            g1,
            profile.clone(),
            d1.component_labels().clone(),
            d1.hole_labels().clone(),
        ),
        PairMode::Relabel => {
            if rng.gen_bool(0.5) {
                trivially_labeled(g1, profile)
            } else {
                labeled(rng, g1, profile)
            }
        }
        PairMode::Superset => {
            let mut boxes = g1.boxes().clone();
            let anchor = boxes.iter().next().copied().unwrap_or(GridBox::new(0, 0));
            boxes.extend(region(rng, anchor, max_boxes / 3 + 1));
            let points: Vec<IsolatedPoint> =
                g1.points().iter().copied().filter(|p| !boxes.contains(&GridBox::containing(p.value, eps))).collect();
            let g2 = GridSet::new(eps, boxes, points).unwrap();
            labeled(rng, g2, profile)
        }
    };
    if rng.gen_bool(0.5) {
        (d1, d2)
    } else {
        (d2, d1)
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian_like<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| gaussian_like(rng))
}

/// Haar-like unitary from the polar factor of a random matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    loop {
        if let Ok(u) = random_matrix(rng, n).polar_unitary(1e-6) {
            return u;
        }
    }
}

/// Unitary within roughly `delta` of the identity.
pub fn near_identity_unitary<R: Rng>(rng: &mut R, n: usize, delta: f64) -> DenseMatrix {
    let g = random_matrix(rng, n);
    let g = g.scale(c(delta / g.norm().max(1e-12), 0.0));
    (&DenseMatrix::identity(n) + &g).polar_unitary(1e-12).unwrap()
}

/// Orthogonal projection of rank `k` onto a random subspace.
pub fn random_projection<R: Rng>(rng: &mut R, n: usize, k: usize) -> DenseMatrix {
    let u = random_unitary(rng, n);
    let d = DenseMatrix::diagonal(&(0..n).map(|i| c(if i < k { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>());
    &(&u * &d) * &u.adjoint()
}

/// `(P, Q, V)` with `Q = RPR*` for a unitary `R` near the identity and an
/// invertible `V` near `R`, so `‖Q − VPV⁻¹‖` is small.
pub fn conjugator_case<R: Rng>(rng: &mut R, n: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let k = rng.gen_range(0..=n);
    let p = random_projection(rng, n, k);
    let delta = rng.gen_range(0.0..0.3);
    let r = near_identity_unitary(rng, n, delta);
    let q = &(&r * &p) * &r.adjoint();
    let g = random_matrix(rng, n);
    let g = g.scale(c(rng.gen_range(0.0..0.05) / g.norm().max(1e-12), 0.0));
    let v = &r * &(&DenseMatrix::identity(n) + &g);
    (p, q, v)
}

/// Distinct block scalars with pairwise gaps at least `gap`, block sizes in
/// `1..=max_block`, and a strictly block upper part with entries of modulus
/// at most one.
pub fn triangular_case<R: Rng>(
    rng: &mut R,
    max_blocks: usize,
    max_block: usize,
    gap: f64,
) -> (Vec<(Complex64, usize)>, DenseMatrix) {
    let blocks = rng.gen_range(1..=max_blocks);
    let mut diagonal: Vec<(Complex64, usize)> = Vec::new();
    while diagonal.len() < blocks {
        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if diagonal.iter().all(|(w, _)| (z - w).norm() >= gap) {
            diagonal.push((z, rng.gen_range(1..=max_block)));
        }
    }
    let mut block_of = Vec::new();
    for (b, &(_, k)) in diagonal.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, k));
    }
    let n = block_of.len();
    let upper = DenseMatrix::from_fn(n, n, |i, j| {
        if block_of[i] < block_of[j] {
            let z = gaussian_like(rng);
            z / z.norm().max(1.0)
        } else {
            c(0.0, 0.0)
        }
    });
    (diagonal, upper)
}
