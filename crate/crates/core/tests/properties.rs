use lflx::coarse::{self, Mollifier};
use lflx::experiment::snapshot::SnapshotFile;
use lflx::grid::Grid;
use lflx::synthetic::{self, SyntheticSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtering_never_increases_energy(seed in 0u64..1000, ell in 0.05f64..2.0) {
        let g = Grid::new(2, 16).unwrap();
        let u = synthetic::random_vector_field(&g, seed);
        let ub = coarse::filter(&u, ell, &Mollifier::bump()).unwrap();
        prop_assert!(ub.energy() <= u.energy() * (1.0 + 1e-12));
    }

    #[test]
    fn leray_projection_is_a_contraction(seed in 0u64..1000) {
        let g = Grid::new(3, 8).unwrap();
        let u = synthetic::random_vector_field(&g, seed);
        let p = u.leray_project().unwrap();
        prop_assert!(p.energy() <= u.energy() * (1.0 + 1e-12));
        prop_assert!(p.max_divergence_mode().unwrap() < 1e-12);
    }

    #[test]
    fn generated_fields_are_real(seed in 0u64..1000, sigma in 0.05f64..1.0) {
        let g = Grid::new(2, 16).unwrap();
        let u = synthetic::generate(&g, &SyntheticSpec::random_besov(sigma, seed)).unwrap();
        prop_assert!(u.hermitian_defect() < 1e-14);
    }

    #[test]
    fn snapshot_bytes_round_trip(seed in 0u64..1000, nu in 1e-6f64..1.0, t in 0.0f64..10.0) {
        let g = Grid::new(2, 8).unwrap();
        let file = SnapshotFile {
            nu,
            t,
            velocity: synthetic::random_vector_field(&g, seed).to_real(),
            pressure: None,
        };
        let back = SnapshotFile::from_bytes(&file.to_bytes()).unwrap();
        prop_assert_eq!(back.nu, nu);
        prop_assert_eq!(back.t, t);
        prop_assert_eq!(back.velocity.values(), file.velocity.values());
    }
}
