//! Library statistics against the reference implementations on random small inputs.

#![allow(dead_code)]

use nalgebra::DMatrix;
use traitlens_core::psychstats::{
    cosine_similarity, cronbach_alpha, icc_consistency, pearson_corr_matrix, symmetric_eigen, varimax_with,
    weighted_kappa, VarimaxOptions, WeightScheme,
};
use traitlens_core::scoring::{MatrixOrientation, ScoreMatrix};

use super::oracles::{self, Rows};

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub cases: usize,
    /// Largest deviation over kappa, alpha, ICC, Pearson, cosine and eigenvalues.
    pub max_stat_error: f64,
    pub max_varimax_error: f64,
}

pub fn to_matrix(rows: &Rows, orientation: MatrixOrientation) -> ScoreMatrix {
    let (n, p) = (rows.len(), rows[0].len());
    ScoreMatrix::new(
        (0..n).map(|i| format!("r{i}")).collect(),
        (0..p).map(|j| format!("c{j}")).collect(),
        DMatrix::from_fn(n, p, |i, j| rows[i][j]),
        orientation,
    )
    .unwrap()
}

fn to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn run(seed: u64, rounds: usize) -> SuiteReport {
    let mut rng = fastrand::Rng::with_seed(seed);
    let mut report = SuiteReport::default();
    let note = |err: f64, report: &mut SuiteReport| {
        report.cases += 1;
        report.max_stat_error = report.max_stat_error.max(err);
    };
    for _ in 0..rounds {
        let n = rng.usize(3..=5);
        let p = rng.usize(2..=5);
        let rows = oracles::random_rows(&mut rng, n, p);
        let m = to_matrix(&rows, MatrixOrientation::RespondentsByItems);

        let r = pearson_corr_matrix(&m).unwrap();
        let want = oracles::correlation_matrix(&rows);
        let err = (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| (r[(i, j)] - want[i][j]).abs()).fold(0.0, f64::max);
        note(err, &mut report);

        note((cronbach_alpha(&m).unwrap().alpha - oracles::cronbach_alpha(&rows)).abs(), &mut report);

        let icc = icc_consistency(&to_matrix(&rows, MatrixOrientation::ItemsByRaters)).unwrap();
        let (single, average) = oracles::icc_consistency(&rows);
        note((icc.icc_single - single).abs().max((icc.icc_average - average).abs()), &mut report);

        let eig = symmetric_eigen(&r).unwrap();
        let want = oracles::jacobi_eigenvalues(&to_rows(&r));
        let err = eig.values.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        note(err, &mut report);

        let u: Vec<f64> = (0..p).map(|_| rng.f64() * 2.0 - 1.0).collect();
        let v: Vec<f64> = (0..p).map(|_| rng.f64() * 2.0 - 1.0).collect();
        note((cosine_similarity(&u, &v).unwrap() - oracles::cosine(&u, &v)).abs(), &mut report);

        let pairs = rng.usize(5..=25);
        let x = oracles::random_likert(&mut rng, pairs);
        let y = oracles::random_likert(&mut rng, pairs);
        for (scheme, quadratic) in [(WeightScheme::Quadratic, true), (WeightScheme::Linear, false)] {
            let want = oracles::weighted_kappa(&x, &y, quadratic);
            match weighted_kappa(&x, &y, scheme) {
                Ok(k) => note((k.kappa - want).abs(), &mut report),
                Err(_) => assert!(!want.is_finite(), "library rejected a defined kappa"),
            }
        }

        let items = rng.usize(3..=6);
        let loadings: Rows = (0..items).map(|_| vec![rng.f64() * 1.6 - 0.8, rng.f64() * 1.6 - 0.8]).collect();
        for normalize in [false, true] {
            let got = varimax_with(
                &DMatrix::from_fn(items, 2, |i, j| loadings[i][j]),
                VarimaxOptions {
                    normalize,
                    tolerance: 1e-14,
                    max_sweeps: 1000,
                },
            );
            let err = oracles::loading_distance(&to_rows(&got.loadings), &oracles::varimax_grid(&loadings, normalize));
            report.cases += 1;
            report.max_varimax_error = report.max_varimax_error.max(err);
        }
    }
    report
}
