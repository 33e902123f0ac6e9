//! Shared oracles and statistical test machinery for the integration
//! suites. Everything here is independent of the library's sampling paths:
//! the PG oracle evaluates the series representation directly, and the KS
//! tests use the asymptotic Kolmogorov distribution.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Moments of PG(b, z) from the sum-of-gammas series representation,
/// truncated at `terms` with the analytic tail added to the mean.
///
/// The series is `(1 / 2 pi^2) sum_k g_k / d_k` with `g_k ~ Gamma(b, 1)`
/// and `d_k = (k - 1/2)^2 + z^2 / (4 pi^2)`; cumulants of the sum follow
/// from the gamma cumulants `(b, b, 2b, 6b)` scaled by `d_k^{-r}`.
pub struct PgOracle {
    pub mean: f64,
    pub var: f64,
    /// Fourth central moment; used for the standard error of a sample
    /// variance.
    pub mu4: f64,
}

pub fn pg_series_oracle(b: f64, z: f64, terms: usize) -> PgOracle {
    let s = 1.0 / (2.0 * PI * PI);
    let c2 = z * z / (4.0 * PI * PI);
    let mut sum2 = 0.0;
    let mut sum4 = 0.0;
    for k in 1..=terms {
        let kf = k as f64 - 0.5;
        let d = kf * kf + c2;
        sum2 += 1.0 / (d * d);
        sum4 += 1.0 / (d * d * d * d);
    }
    // Closed form of the full coefficient sum gives the dropped-tail mean.
    let total1 = if z.abs() < 1e-8 {
        PI * PI * (0.5 - z * z / 24.0)
    } else {
        PI * PI * (0.5 * z.abs()).tanh() / z.abs()
    };
    let mean = s * b * total1;
    let var = s * s * b * sum2;
    let kappa4 = s.powi(4) * 6.0 * b * sum4;
    let mu4 = kappa4 + 3.0 * var * var;
    PgOracle { mean, var, mu4 }
}

/// Asymptotic Kolmogorov survival function `Q(lambda)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test; returns (D, p-value).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x1 = a[i];
        let x2 = b[j];
        if x1 <= x2 {
            i += 1;
        }
        if x2 <= x1 {
            j += 1;
        }
        let f1 = i as f64 / n1 as f64;
        let f2 = j as f64 / n2 as f64;
        d = d.max((f1 - f2).abs());
    }
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, kolmogorov_q(lambda))
}

/// One-sample KS test of `data` against the CDF `f`; returns (D, p-value).
pub fn ks_one_sample(data: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x: Vec<f64> = data.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let cdf = f(xi);
        let above = (i as f64 + 1.0) / n - cdf;
        let below = cdf - i as f64 / n;
        d = d.max(above.max(below));
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    (d, kolmogorov_q(lambda))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Simulate an AR(1) series `x_t = coef x_{t-1} + e_t` with unit-variance
/// innovations from a simple SplitMix-driven normal source (independent of
/// the crate's RNG plumbing).
pub fn simulate_ar1(coef: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    let mut next_u64 = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut next_unif = move || (next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut gauss = move || {
        let u1: f64 = next_unif().max(1e-16);
        let u2: f64 = next_unif();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let mut out = Vec::with_capacity(n);
    let mut x = gauss() / (1.0 - coef * coef).sqrt();
    for _ in 0..n {
        x = coef * x + gauss();
        out.push(x);
    }
    out
}

/// Penalized least-squares objective on the standardized scale:
/// `(1/2n) ||yc - Xs b||^2 + lambda ||b||_1`.
pub fn lasso_objective(
    xs: &nalgebra::DMatrix<f64>,
    yc: &nalgebra::DVector<f64>,
    beta: &[f64],
    lambda: f64,
) -> f64 {
    let n = xs.nrows() as f64;
    let b = nalgebra::DVector::from_column_slice(beta);
    let r = yc - xs * b;
    r.norm_squared() / (2.0 * n) + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
}

/// Brute-force minimizer of the p = 2 lasso objective by iterated grid
/// refinement; returns the best objective value found.
pub fn lasso_bruteforce_p2(
    xs: &nalgebra::DMatrix<f64>,
    yc: &nalgebra::DVector<f64>,
    lambda: f64,
) -> f64 {
    let mut center = [0.0, 0.0];
    let mut half_width = 4.0;
    let mut best = f64::INFINITY;
    for _round in 0..12 {
        let grid = 41;
        let mut best_point = center;
        for i in 0..grid {
            for j in 0..grid {
                let b0 = center[0] - half_width + 2.0 * half_width * i as f64 / (grid - 1) as f64;
                let b1 = center[1] - half_width + 2.0 * half_width * j as f64 / (grid - 1) as f64;
                let obj = lasso_objective(xs, yc, &[b0, b1], lambda);
                if obj < best {
                    best = obj;
                    best_point = [b0, b1];
                }
            }
        }
        center = best_point;
        half_width *= 0.12;
    }
    best
}

/// Column standardization matching the lasso's internal convention
/// (population variance, centered response).
pub fn standardize_like_lasso(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DVector<f64>,
) -> (nalgebra::DMatrix<f64>, nalgebra::DVector<f64>, Vec<f64>, f64) {
    let n = x.nrows();
    let nf = n as f64;
    let mut xs = x.clone();
    let mut sds = vec![0.0; x.ncols()];
    for j in 0..x.ncols() {
        let mean = x.column(j).sum() / nf;
        let var = x.column(j).iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        sds[j] = sd;
        for i in 0..n {
            xs[(i, j)] = (x[(i, j)] - mean) / sd;
        }
    }
    let ym = y.sum() / nf;
    let yc = y.map(|v| v - ym);
    (xs, yc, sds, ym)
}
