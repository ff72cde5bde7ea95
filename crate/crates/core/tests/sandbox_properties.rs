mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_orbits::sandbox::{projection_conjugator, triangular_similarity};

use common::*;

fn sorted(mut v: Vec<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugator_preserves_rank(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = r.gen_range(1..=8);
        let (p, q, v) = conjugator_case(&mut r, n);
        let out = projection_conjugator(&p, &q, &v).unwrap();
        prop_assert!(out.gap < 0.5);
        prop_assert!(out.w.is_unitary(1e-10));
        prop_assert!(out.err < 1e-8, "err {}", out.err);
        prop_assert_eq!(p.rank(1e-6), q.rank(1e-6));
    }

    #[test]
    fn triangular_similarity_keeps_the_spectrum(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (diagonal, upper) = triangular_case(&mut r, 4, 3, 0.3);
        let s = triangular_similarity(&diagonal, &upper).unwrap();
        prop_assert!(s.err < 1e-8);
        let conj = &(&s.t * &s.a) * &s.t_inv;
        let before = sorted(s.a.eigenvalues().unwrap());
        let after = sorted(conj.eigenvalues().unwrap());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).norm() < 1e-6);
        }
        prop_assert!((&(&s.t * &s.t_inv) - &spectral_orbits::sandbox::DenseMatrix::identity(s.t.rows())).norm() < 1e-8);
    }
}
