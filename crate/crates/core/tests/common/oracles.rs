//! Textbook reference implementations on plain row vectors, written without
//! reference to the library code they check.

#![allow(dead_code)]

pub type Rows = Vec<Vec<f64>>;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn column(rows: &Rows, j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    dot / (nx * ny)
}

/// Weighted kappa from the observed and chance-expected 5x5 tables.
pub fn weighted_kappa(x: &[u8], y: &[u8], quadratic: bool) -> f64 {
    let n = x.len() as f64;
    let mut observed = [[0.0f64; 5]; 5];
    for (&a, &b) in x.iter().zip(y) {
        observed[usize::from(a) - 1][usize::from(b) - 1] += 1.0 / n;
    }
    let rows: Vec<f64> = (0..5).map(|i| observed[i].iter().sum()).collect();
    let cols: Vec<f64> = (0..5).map(|j| (0..5).map(|i| observed[i][j]).sum()).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..5 {
        for j in 0..5 {
            let d = (i as f64 - j as f64).abs();
            let w = if quadratic { d * d } else { d };
            num += w * observed[i][j];
            den += w * rows[i] * cols[j];
        }
    }
    1.0 - num / den
}

/// Alpha = k/(k-1) * (1 - sum of item variances / variance of totals); rows are respondents.
pub fn cronbach_alpha(rows: &Rows) -> f64 {
    let k = rows[0].len() as f64;
    let item_vars: f64 = (0..rows[0].len()).map(|j| var(&column(rows, j))).sum();
    let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    k / (k - 1.0) * (1.0 - item_vars / var(&totals))
}

/// Two-way consistency ICC via total, row and column sums of squares (the
/// residual is what is left over). Rows are subjects, columns raters.
pub fn icc_consistency(rows: &Rows) -> (f64, f64) {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let all: Vec<f64> = rows.iter().flatten().copied().collect();
    let g = mean(&all);
    let sst: f64 = all.iter().map(|x| (x - g).powi(2)).sum();
    let ssr: f64 = rows.iter().map(|r| k * (mean(r) - g).powi(2)).sum();
    let ssc: f64 = (0..rows[0].len()).map(|j| n * (mean(&column(rows, j)) - g).powi(2)).sum();
    let msr = ssr / (n - 1.0);
    let mse = (sst - ssr - ssc) / ((n - 1.0) * (k - 1.0));
    ((msr - mse) / (msr + (k - 1.0) * mse), (msr - mse) / msr)
}

pub fn correlation_matrix(rows: &Rows) -> Rows {
    let p = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| column(rows, j)).collect();
    (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { pearson(&cols[i], &cols[j]) }).collect()).collect()
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
pub fn jacobi_eigenvalues(a: &Rows) -> Vec<f64> {
    let n = a.len();
    let mut a = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
pub fn varimax_criterion(l: &Rows) -> f64 {
    let p = l.len() as f64;
    (0..l[0].len())
        .map(|j| {
            let sq: Vec<f64> = l.iter().map(|r| r[j] * r[j]).collect();
            sq.iter().map(|s| s * s).sum::<f64>() / p - (sq.iter().sum::<f64>() / p).powi(2)
        })
        .sum()
}

fn rotate2(l: &Rows, angle: f64) -> Rows {
    let (c, s) = (angle.cos(), angle.sin());
    l.iter().map(|r| vec![c * r[0] + s * r[1], -s * r[0] + c * r[1]]).collect()
}

/// Two-factor varimax by exhaustive search over the rotation angle: a grid over
/// a quarter turn (the criterion's period) followed by golden-section refinement.
pub fn varimax_grid(l: &Rows, kaiser_normalize: bool) -> Rows {
    let h: Vec<f64> = l.iter().map(|r| (r[0] * r[0] + r[1] * r[1]).sqrt()).collect();
    let work: Rows = if kaiser_normalize {
        l.iter().zip(&h).map(|(r, h)| r.iter().map(|v| v / h).collect()).collect()
    } else {
        l.clone()
    };
    let f = |a: f64| varimax_criterion(&rotate2(&work, a));
    let steps = 2_000;
    let quarter = std::f64::consts::FRAC_PI_2;
    let best = (0..steps)
        .map(|i| quarter * i as f64 / steps as f64)
        .max_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
        .unwrap();
    let width = quarter / steps as f64;
    let (mut lo, mut hi) = (best - width, best + width);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let rotated = rotate2(&work, (lo + hi) / 2.0);
    if kaiser_normalize {
        rotated.iter().zip(&h).map(|(r, h)| r.iter().map(|v| v * h).collect()).collect()
    } else {
        rotated
    }
}

/// Largest elementwise difference after matching columns up to order and sign.
pub fn loading_distance(a: &Rows, b: &Rows) -> f64 {
    let k = a[0].len();
    let col = |m: &Rows, j: usize| column(m, j);
    let mut best = f64::INFINITY;
    let perms: Vec<Vec<usize>> = if k == 2 { vec![vec![0, 1], vec![1, 0]] } else { vec![(0..k).collect()] };
    for perm in perms {
        let worst = (0..k)
            .map(|j| {
                let x = col(a, j);
                let y = col(b, perm[j]);
                let same = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                let flipped = x.iter().zip(&y).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max);
                same.min(flipped)
            })
            .fold(0.0, f64::max);
        best = best.min(worst);
    }
    best
}

pub fn random_rows(rng: &mut fastrand::Rng, n: usize, p: usize) -> Rows {
    (0..n).map(|_| (0..p).map(|_| rng.f64() * 4.0 + 1.0).collect()).collect()
}

pub fn random_likert(rng: &mut fastrand::Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.u8(1..=5)).collect()
}
