use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::factor::fix_column_signs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarimaxOptions {
    /// Kaiser row normalization before rotating.
    pub normalize: bool,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        VarimaxOptions {
            normalize: true,
            tolerance: 1e-6,
            max_sweeps: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarimaxResult {
    #[serde(with = "crate::matrix_serde::rows")]
    pub loadings: DMatrix<f64>,
    /// Orthogonal k x k matrix with `loadings = input * rotation`.
    #[serde(with = "crate::matrix_serde::rows")]
    pub rotation: DMatrix<f64>,
    /// Criterion of the working (normalized) matrix after each sweep, starting with the input.
    pub criterion_history: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// False when there were fewer than two columns and the input came back unchanged.
    pub rotated: bool,
}

/// Sum over columns of the variance of squared loadings.
pub fn varimax_criterion(loadings: &DMatrix<f64>) -> f64 {
    let p = loadings.nrows() as f64;
    loadings
        .column_iter()
        .map(|col| {
            let s2: f64 = col.iter().map(|v| v * v).sum();
            let s4: f64 = col.iter().map(|v| v.powi(4)).sum();
            s4 / p - (s2 / p).powi(2)
        })
        .sum()
}

pub fn varimax(loadings: &DMatrix<f64>) -> VarimaxResult {
    varimax_with(loadings, VarimaxOptions::default())
}

pub fn varimax_with(loadings: &DMatrix<f64>, opts: VarimaxOptions) -> VarimaxResult {
    let (p, k) = loadings.shape();
    if k < 2 || p == 0 {
        return VarimaxResult {
            loadings: loadings.clone(),
            rotation: DMatrix::identity(k, k),
            criterion_history: vec![varimax_criterion(loadings)],
            sweeps: 0,
            converged: true,
            rotated: false,
        };
    }
    let mut x = loadings.clone();
    if opts.normalize {
        for mut row in x.row_iter_mut() {
            let h = row.norm();
            if h > 0.0 {
                row /= h;
            }
        }
    }
    let mut rotation = DMatrix::<f64>::identity(k, k);
    let mut history = vec![varimax_criterion(&x)];
    let mut converged = false;
    let mut sweeps = 0;
    let pf = p as f64;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for a in 0..k {
            for b in (a + 1)..k {
                let (mut sa, mut sb, mut sc, mut sd) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..p {
                    let (xa, xb) = (x[(i, a)], x[(i, b)]);
                    let u = xa * xa - xb * xb;
                    let v = 2.0 * xa * xb;
                    sa += u;
                    sb += v;
                    sc += u * u - v * v;
                    sd += 2.0 * u * v;
                }
                let num = sd - 2.0 * sa * sb / pf;
                let den = sc - (sa * sa - sb * sb) / pf;
                let phi = num.atan2(den) / 4.0;
                if phi.abs() < 1e-15 {
                    continue;
                }
                let (s, c) = phi.sin_cos();
                for m in [&mut x, &mut rotation] {
                    for i in 0..m.nrows() {
                        let (ma, mb) = (m[(i, a)], m[(i, b)]);
                        m[(i, a)] = c * ma + s * mb;
                        m[(i, b)] = -s * ma + c * mb;
                    }
                }
            }
        }
        let value = varimax_criterion(&x);
        let gain = value - history.last().copied().unwrap_or(f64::NEG_INFINITY);
        history.push(value);
        if gain < opts.tolerance {
            converged = true;
            break;
        }
    }

    // Order columns by explained variance, then apply the sign convention.
    let mut out = loadings * &rotation;
    let ss: Vec<f64> = out.column_iter().map(|c| c.norm_squared()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| ss[j].total_cmp(&ss[i]));
    rotation = DMatrix::from_fn(k, k, |r, c| rotation[(r, order[c])]);
    out = DMatrix::from_fn(p, k, |r, c| out[(r, order[c])]);
    let flipped = fix_column_signs(&mut out);
    for (j, flip) in flipped.into_iter().enumerate() {
        if flip {
            rotation.column_mut(j).neg_mut();
        }
    }
    VarimaxResult {
        loadings: out,
        rotation,
        criterion_history: history,
        sweeps,
        converged,
        rotated: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Uniform};

    fn normalized(l: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = l.clone();
        for mut row in x.row_iter_mut() {
            let h = row.norm();
            if h > 0.0 {
                row /= h;
            }
        }
        x
    }

    /// Best criterion over planar rotations on a 0.001 rad grid covering a quarter turn.
    fn grid_best(l: &DMatrix<f64>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let steps = (std::f64::consts::FRAC_PI_2 / 0.001).ceil() as usize;
        for s in 0..=steps {
            let t = s as f64 * 0.001;
            let r = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
            best = best.max(varimax_criterion(&(l * r)));
        }
        best
    }

    fn random_loadings(p: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Uniform::new(-0.9, 0.9).unwrap();
        DMatrix::from_fn(p, k, |_, _| u.sample(&mut rng))
    }

    #[test]
    fn two_factor_grid_oracle() {
        for seed in 0..20 {
            let l = random_loadings(6, 2, seed);
            let raw = varimax_with(&l, VarimaxOptions { normalize: false, ..Default::default() });
            assert!(varimax_criterion(&raw.loadings) >= grid_best(&l) - 1e-4, "seed {seed}");
            let kaiser = varimax(&l);
            assert!(varimax_criterion(&normalized(&kaiser.loadings)) >= grid_best(&normalized(&l)) - 1e-4);
        }
    }

    #[test]
    fn simple_structure_is_a_fixed_point() {
        let l = DMatrix::from_row_slice(4, 2, &[0.8, 0.0, 0.7, 0.0, 0.0, 0.6, 0.0, 0.5]);
        let r = varimax(&l);
        assert!((r.loadings.clone() - &l).abs().max() < 1e-9);
        let swapped = DMatrix::from_row_slice(4, 2, &[0.0, 0.8, 0.0, 0.7, -0.6, 0.0, -0.5, 0.0]);
        assert!((varimax(&swapped).loadings - &l).abs().max() < 1e-9);
    }

    #[test]
    fn single_factor_is_returned_unchanged() {
        let l = DMatrix::from_column_slice(3, 1, &[0.5, -0.2, 0.9]);
        let r = varimax(&l);
        assert!(!r.rotated);
        assert_eq!(r.loadings, l);
    }

    #[test]
    fn criterion_never_decreases() {
        let l = random_loadings(20, 4, 7);
        let r = varimax(&l);
        assert!(r.converged);
        assert!(r.criterion_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let ss: Vec<f64> = r.loadings.column_iter().map(|c| c.norm_squared()).collect();
        assert!(ss.windows(2).all(|w| w[0] >= w[1]));
    }

    proptest! {
        #[test]
        fn communalities_preserved(seed in 0u64..500, k in 2usize..5) {
            let l = random_loadings(12, k, seed);
            let r = varimax(&l);
            for i in 0..12 {
                let before = l.row(i).norm_squared();
                let after = r.loadings.row(i).norm_squared();
                prop_assert!((before - after).abs() < 1e-9);
            }
            let gram = r.rotation.transpose() * &r.rotation;
            prop_assert!((gram - DMatrix::identity(k, k)).abs().max() < 1e-12);
            prop_assert!((&l * &r.rotation - &r.loadings).abs().max() < 1e-12);
        }
    }
}
