#[path = "common/oracles.rs"]
mod oracles;
#[path = "common/suite.rs"]
mod suite;

use proptest::prelude::*;
use traitlens_core::psychstats::{cronbach_alpha, icc_consistency, weighted_kappa, WeightScheme};
use traitlens_core::scoring::MatrixOrientation;

#[test]
fn small_inputs_match_references() {
    let r = suite::run(11, 300);
    assert!(r.max_stat_error < 1e-9, "{r:?}");
    assert!(r.max_varimax_error < 1e-4, "{r:?}");
}

#[test]
fn kappa_reference_cases() {
    // Perfect agreement, and a hand-computed 2x2 pattern inside the 5x5 table.
    let x = [1, 2, 3, 4, 5];
    assert!((weighted_kappa(&x, &x, WeightScheme::Quadratic).unwrap().kappa - 1.0).abs() < 1e-12);
    let k = weighted_kappa(&[1, 1, 5, 5], &[1, 5, 1, 5], WeightScheme::Quadratic).unwrap().kappa;
    assert!(k.abs() < 1e-12, "independent margins give zero, got {k}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_is_symmetric_and_bounded(pairs in proptest::collection::vec((1u8..=5, 1u8..=5), 4..40)) {
        let (x, y): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (weighted_kappa(&x, &y, WeightScheme::Quadratic), weighted_kappa(&y, &x, WeightScheme::Quadratic)) {
            prop_assert!((a.kappa - b.kappa).abs() < 1e-12);
            prop_assert!(a.kappa <= 1.0 + 1e-12 && a.kappa >= -1.0 - 1e-12);
            prop_assert!((a.kappa - oracles::weighted_kappa(&x, &y, true)).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_ignores_item_shifts(seed in 0u64..1000, shift in -3.0f64..3.0) {
        let mut rng = fastrand::Rng::with_seed(seed);
        let rows = oracles::random_rows(&mut rng, 6, 4);
        let shifted: oracles::Rows = rows.iter().map(|r| r.iter().enumerate().map(|(j, v)| v + shift * j as f64).collect()).collect();
        let a = cronbach_alpha(&suite::to_matrix(&rows, MatrixOrientation::RespondentsByItems)).unwrap().alpha;
        let b = cronbach_alpha(&suite::to_matrix(&shifted, MatrixOrientation::RespondentsByItems)).unwrap().alpha;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn icc_ignores_rater_offsets(seed in 0u64..1000, offset in -2.0f64..2.0) {
        let mut rng = fastrand::Rng::with_seed(seed);
        let rows = oracles::random_rows(&mut rng, 5, 3);
        let moved: oracles::Rows = rows.iter().map(|r| vec![r[0], r[1] + offset, r[2]]).collect();
        let a = icc_consistency(&suite::to_matrix(&rows, MatrixOrientation::ItemsByRaters)).unwrap();
        let b = icc_consistency(&suite::to_matrix(&moved, MatrixOrientation::ItemsByRaters)).unwrap();
        prop_assert!((a.icc_single - b.icc_single).abs() < 1e-9);
    }
}
