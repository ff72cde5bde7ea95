mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_orbits::decisions::{decide_aue, decide_nilpotent_limit, decide_similarity, nil, sim, Status};
use spectral_orbits::distances::{distance_bounds, projection_gap_lower_bound, rho, GapBound};
use spectral_orbits::geometry::{
    complement_components, connected_components, hausdorff_distance, rasterize, ComplementRegion, GridBox,
};
use spectral_orbits::kdata::{AlgebraProfile, KGroup, SpectralDatum};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn metric_tol(scale: f64) -> f64 {
    1e-12 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let eps = RESOLUTIONS[r.gen_range(0..3)];
        let x = gridset(&mut r, eps, 30);
        let y = gridset(&mut r, eps, 30);
        let z = gridset(&mut r, eps, 30);
        let (xy, yx, yz, xz) =
            (hausdorff_distance(&x, &y), hausdorff_distance(&y, &x), hausdorff_distance(&y, &z), hausdorff_distance(&x, &z));
        prop_assert_eq!(xy, yx);
        prop_assert_eq!(hausdorff_distance(&x, &x), 0.0);
        prop_assert_eq!(xy == 0.0, x.same_set(&y));
        prop_assert!(xz <= xy + yz + 3.0 * metric_tol(30.0));
    }

    #[test]
    fn components_partition_the_spectrum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gridset(&mut r, 0.5, 40);
        let comps = connected_components(&g);
        prop_assert_eq!(&comps, &connected_components(&g));
        let mut seen = BTreeSet::new();
        let mut points = 0;
        for (i, c) in comps.iter().enumerate() {
            prop_assert_eq!(c.id, i);
            for b in c.boxes() {
                prop_assert!(seen.insert(*b), "box in two components");
            }
            points += usize::from(c.point().is_some());
        }
        prop_assert_eq!(&seen, g.boxes());
        prop_assert_eq!(points, g.points().len());
        // distinct region components never touch
        for (i, a) in comps.iter().enumerate() {
            for b in &comps[i + 1..] {
                prop_assert!(!a.boxes().iter().any(|p| b.boxes().iter().any(|q| p.touches(q))));
            }
        }
    }

    #[test]
    fn frame_boundary_is_unbounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gridset(&mut r, 1.0, 40);
        let cc = complement_components(&g, 2.0);
        let (n0, n1, m0, m1) = cc.frame();
        for n in n0..=n1 {
            for m in [m0, m1] {
                prop_assert_eq!(cc.region_of_cell(GridBox::new(n, m)), Some(ComplementRegion::Unbounded));
            }
        }
        for m in m0..=m1 {
            for n in [n0, n1] {
                prop_assert_eq!(cc.region_of_cell(GridBox::new(n, m)), Some(ComplementRegion::Unbounded));
            }
        }
        for h in cc.holes() {
            for cell in &h.cells {
                prop_assert_eq!(cc.region_of_cell(*cell), Some(ComplementRegion::Hole(h.id)));
            }
        }
    }

    #[test]
    fn rasterize_moves_points_at_most_half_diagonal(
        pts in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..30),
        k in 0usize..3,
    ) {
        let eps = RESOLUTIONS[k];
        let zs: Vec<_> = pts.iter().map(|&(a, b)| c(a, b)).collect();
        let g = rasterize(&zs, eps).unwrap();
        for z in &zs {
            prop_assert!(g.contains(*z));
            let centre = GridBox::containing(*z, eps).center(eps);
            prop_assert!((centre - z).norm() <= eps * std::f64::consts::SQRT_2 / 2.0 + 1e-12);
        }
    }

    #[test]
    fn k_group_laws(
        free in 0usize..3,
        torsion in prop::collection::vec(2u64..7, 0..3),
        a in prop::collection::vec(-9i64..9, 6),
        b in prop::collection::vec(-9i64..9, 6),
        e in prop::collection::vec(-9i64..9, 6),
    ) {
        let g = KGroup::new(free, torsion).unwrap();
        let r = g.rank();
        let (x, y, z) = (g.element(&a[..r]).unwrap(), g.element(&b[..r]).unwrap(), g.element(&e[..r]).unwrap());
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert_eq!(x.add(&g.zero()).unwrap(), x.clone());
        prop_assert!(x.add(&x.neg()).unwrap().is_zero());
        prop_assert!(x.sub(&y).unwrap().add(&y).unwrap().k_eq(&x).unwrap());
    }

    #[test]
    fn clopen_classes_are_additive(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let p = &profiles()[k];
        let d = random_datum(&mut r, p, 1.0, 30);
        let ids: Vec<usize> = (0..d.components().len()).collect();
        let (a, b): (BTreeSet<usize>, BTreeSet<usize>) = ids.iter().partition(|_| r.gen_bool(0.5));
        let all: BTreeSet<usize> = ids.iter().copied().collect();
        let sum = d.clopen_class(&a).unwrap().add(&d.clopen_class(&b).unwrap()).unwrap();
        prop_assert_eq!(&d.clopen_class(&all).unwrap(), &sum);
        prop_assert_eq!(sum, p.unit_class.clone());
    }

    #[test]
    fn validation_is_idempotent(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let d = random_datum(&mut r, &profiles()[k], 0.5, 30);
        prop_assert!(d.validate().is_empty());
        let broken = SpectralDatum::new(
            d.spectrum().clone(),
            d.profile().clone(),
            [(d.components().len() + 3, d.profile().k0.zero())].into_iter().collect(),
            d.hole_labels().clone(),
        );
        prop_assert_eq!(broken.validate(), broken.validate());
        prop_assert!(!broken.validate().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn aue_is_reflexive_and_symmetric(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let (d1, d2) = pair(&mut r, &profiles()[k], 0.5, 30);
        prop_assert!(decide_aue(&d1, &d1).unwrap().answer());
        prop_assert_eq!(decide_aue(&d1, &d2).unwrap().answer(), decide_aue(&d2, &d1).unwrap().answer());
    }

    #[test]
    fn similarity_is_reflexive(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let d = random_datum(&mut r, &profiles()[k], 0.5, 30);
        prop_assert!(decide_similarity(&d, &d).unwrap().answer());
    }

    #[test]
    fn similarity_and_aue_are_consistent(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let (d1, d2) = pair(&mut r, &profiles()[k], 0.5, 30);
        let aue = decide_aue(&d1, &d2).unwrap().answer();
        let forward = decide_similarity(&d1, &d2).unwrap().answer();
        let backward = decide_similarity(&d2, &d1).unwrap().answer();
        prop_assert_eq!(aue, forward && backward);
    }

    #[test]
    fn calkin_never_compares_projection_classes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d1, d2) = pair(&mut r, &AlgebraProfile::calkin(), 0.5, 30);
        let v = decide_similarity(&d1, &d2).unwrap();
        prop_assert_eq!(v.status_of(sim::PROJECTIONS), Some(Status::Skipped));
    }

    #[test]
    fn nilpotent_limit_matches_its_conditions(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let d = random_datum(&mut r, &profiles()[k], 1.0, 30);
        let v = decide_nilpotent_limit(&d).unwrap();
        let expected = d.spectrum().contains(c(0.0, 0.0)) && d.components().len() == 1 && d.index_trivial();
        prop_assert_eq!(v.answer(), expected);
        prop_assert_eq!(v.status_of(nil::CONNECTED) == Some(Status::Pass), d.components().len() == 1);
    }

    #[test]
    fn rho_dominates_hausdorff_and_is_symmetric(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let (d1, d2) = pair(&mut r, &profiles()[k], 0.5, 30);
        let a = rho(&d1, &d2).unwrap();
        let b = rho(&d2, &d1).unwrap();
        prop_assert!(a.value >= a.hausdorff);
        prop_assert_eq!(a.hausdorff, hausdorff_distance(d1.spectrum(), d2.spectrum()));
        prop_assert!((a.value - b.value).abs() <= 1e-12 * (1.0 + a.value));
        prop_assert_eq!(rho(&d1, &d1).unwrap().value, 0.0);
    }

    #[test]
    fn distance_bounds_are_ordered(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let (d1, d2) = pair(&mut r, &profiles()[k], 0.5, 30);
        let rep = distance_bounds(&d1, &d2).unwrap();
        prop_assert_eq!(rep.lower, rep.rho.value);
        if let Some(u) = rep.upper {
            prop_assert!(rep.lower <= u + rep.discretization_slack + 1e-12);
        }
        // every applicable gap bound is a lower bound, so it sits below any upper bound
        let union = d1.spectrum().union(d2.spectrum()).unwrap();
        for id in 0..connected_components(&union).len() {
            let region: BTreeSet<usize> = [id].into_iter().collect();
            if let Ok(GapBound::Applicable(cb)) = projection_gap_lower_bound(&d1, &d2, &region, d1.resolution(), None) {
                prop_assert!(cb.bound > 0.0);
                if let Some(u) = rep.upper {
                    prop_assert!(cb.bound <= u + rep.discretization_slack + 1e-12);
                }
            }
        }
    }
}
