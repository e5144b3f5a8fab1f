//! Summary statistics, percentile bootstrap and normality tests.

use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Result, SkError};
use crate::rng::{stream, StreamRole};

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Standard deviation of the limiting Kolmogorov distribution of `√m·D`.
pub const KOLMOGOROV_SD: f64 = 0.260_332_9;

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Arithmetic mean; exact for constant input.
pub fn mean(x: &[f64]) -> f64 {
    if !x.is_empty() && is_constant(x) {
        return x[0];
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (two-pass); exactly zero for constant input.
pub fn sample_variance(x: &[f64]) -> f64 {
    if !x.is_empty() && is_constant(x) {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let len = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / len, m3 / len, m4 / len)
}

pub fn skewness(x: &[f64]) -> f64 {
    let (m2, m3, _) = central_moments(x);
    m3 / m2.powf(1.5)
}

pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let (m2, _, m4) = central_moments(x);
    m4 / (m2 * m2) - 3.0
}

/// Point estimate with bootstrap standard error and a 95% percentile interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub estimate: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Summary {
    pub fn exact(v: f64) -> Self {
        Self {
            estimate: v,
            se: 0.0,
            lo: v,
            hi: v,
        }
    }

    /// `estimate ± k·se`
    pub fn sigma_interval(&self, k: f64) -> (f64, f64) {
        (self.estimate - k * self.se, self.estimate + k * self.se)
    }

    pub fn within_sigma(&self, value: f64, k: f64) -> bool {
        let (lo, hi) = self.sigma_interval(k);
        lo <= value && value <= hi
    }

    /// Whether the `k`-sigma intervals of two summaries intersect.
    pub fn overlaps(&self, other: &Summary, k: f64) -> bool {
        let (a0, a1) = self.sigma_interval(k);
        let (b0, b1) = other.sigma_interval(k);
        a0 <= b1 && b0 <= a1
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Percentile bootstrap of `stat` with resampling driven by `seed`.
pub fn bootstrap(data: &[f64], resamples: usize, seed: u64, stat: impl Fn(&[f64]) -> f64) -> Result<Summary> {
    if data.len() < 2 {
        return Err(SkError::TooFewSamples {
            got: data.len(),
            need: 2,
        });
    }
    if resamples < 2 {
        return Err(SkError::InvalidParam(format!(
            "need at least 2 bootstrap resamples, got {resamples}"
        )));
    }
    let estimate = stat(data);
    let mut rng = stream(seed, 0, StreamRole::Bootstrap, data.len() as u64);
    let mut buf = vec![0.0; data.len()];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = data[rng.random_range(0..data.len())];
            }
            stat(&buf)
        })
        .collect();
    let se = sample_variance(&stats).sqrt();
    stats.sort_by(f64::total_cmp);
    Ok(Summary {
        estimate,
        se,
        lo: percentile(&stats, 0.025),
        hi: percentile(&stats, 0.975),
    })
}

pub fn mean_ci(samples: &[f64], resamples: usize, seed: u64) -> Result<Summary> {
    bootstrap(samples, resamples, seed, mean)
}

/// Unbiased variance with a percentile bootstrap interval.
pub fn variance_ci(samples: &[f64], resamples: usize, seed: u64) -> Result<Summary> {
    bootstrap(samples, resamples, seed, sample_variance)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Sup-distance between the empirical CDF of `sorted` and `Φ`.
pub fn ks_statistic(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let s: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value of a one-sample KS distance `d` from `m` points.
pub fn ks_pvalue(d: f64, m: usize) -> f64 {
    kolmogorov_sf((m as f64).sqrt() * d)
}

/// Anderson–Darling `A²` of `sorted` against the standard normal.
pub fn anderson_darling(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    let mf = m as f64;
    let s: f64 = (0..m)
        .map(|i| {
            let w = (2 * i + 1) as f64;
            w * (normal_cdf(sorted[i]).ln() + normal_sf(sorted[m - 1 - i]).ln())
        })
        .sum();
    -mf - s / mf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub ks: f64,
    pub ad: f64,
    pub skew: f64,
    pub ex_kurt: f64,
    pub ks_pvalue: f64,
}

/// Normality statistics of the sample standardized by its own mean and
/// standard deviation.
pub fn normality_report(samples: &[f64]) -> Result<NormalityReport> {
    if samples.len() < 100 {
        return Err(SkError::TooFewSamples {
            got: samples.len(),
            need: 100,
        });
    }
    let m = mean(samples);
    let sd = sample_variance(samples).sqrt();
    if sd.is_nan() || sd <= 0.0 || sd <= 1e-14 * m.abs() {
        return Err(SkError::Degenerate("zero-variance sample"));
    }
    let mut z: Vec<f64> = samples.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let ks = ks_statistic(&z);
    Ok(NormalityReport {
        ks,
        ad: anderson_darling(&z),
        skew: skewness(&z),
        ex_kurt: excess_kurtosis(&z),
        ks_pvalue: ks_pvalue(ks, z.len()),
    })
}

/// KS distance and p-value of values taken as already standardized.
pub fn ks_standard_normal(values: &[f64]) -> (f64, f64) {
    let mut z = values.to_vec();
    z.sort_by(f64::total_cmp);
    let d = ks_statistic(&z);
    (d, ks_pvalue(d, z.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, Exp, StandardNormal};

    fn normals(seed: u64, m: usize) -> Vec<f64> {
        let mut rng = stream(seed, 0, StreamRole::Synthetic, 0);
        (0..m).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn variance_basics() {
        let c = variance_ci(&[3.0; 10], 100, 1).unwrap();
        assert_eq!((c.estimate, c.lo, c.hi), (0.0, 0.0, 0.0));
        assert_eq!(variance_ci(&[0.0, 2.0], 100, 1).unwrap().estimate, 2.0);
        assert!(matches!(
            variance_ci(&[1.0], 100, 1),
            Err(SkError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let x = normals(4, 300);
        assert_eq!(mean_ci(&x, 200, 9).unwrap(), mean_ci(&x, 200, 9).unwrap());
        assert_ne!(mean_ci(&x, 200, 9).unwrap(), mean_ci(&x, 200, 10).unwrap());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid near the switch point
        let l = 1.18;
        let pi2 = std::f64::consts::PI.powi(2);
        let a: f64 = 1.0
            - (2.0 * std::f64::consts::PI).sqrt() / l
                * (1..=20)
                    .map(|k| (-((2 * k - 1) as f64).powi(2) * pi2 / (8.0 * l * l)).exp())
                    .sum::<f64>();
        let b: f64 = 2.0
            * (1..=100)
                .map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * l * l).exp())
                .sum::<f64>();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_abs_diff_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_sf(1.6276), 0.01, epsilon = 1e-4);
    }

    #[test]
    fn moments_of_symmetric_sample() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        assert_eq!(skewness(&x), 0.0);
        assert_abs_diff_eq!(excess_kurtosis(&x), 1.7 - 3.0, epsilon = 1e-14);
    }

    #[test]
    fn normality_rejects_degenerate() {
        assert_eq!(
            normality_report(&[1.5; 200]).unwrap_err(),
            SkError::Degenerate("zero-variance sample")
        );
        assert!(matches!(
            normality_report(&[1.0; 50]),
            Err(SkError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn exponential_input_is_rejected() {
        let mut rng = stream(77, 0, StreamRole::Synthetic, 0);
        let e = Exp::new(1.0).unwrap();
        let x: Vec<f64> = (0..5000).map(|_| e.sample(&mut rng)).collect();
        let r = normality_report(&x).unwrap();
        assert!(r.ks_pvalue < 1e-6, "p = {}", r.ks_pvalue);
        assert!(r.skew > 1.5);
    }

    #[test]
    fn normal_input_meta_trials() {
        let passes = (0..100)
            .filter(|&k| normality_report(&normals(1000 + k, 5000)).unwrap().ks_pvalue > 0.01)
            .count();
        assert!(passes >= 95, "{passes} of 100");
    }

    #[test]
    fn variance_ci_coverage_meta_trials() {
        let covered = (0..100)
            .filter(|&k| {
                let c = variance_ci(&normals(5000 + k, 10_000), DEFAULT_RESAMPLES, k).unwrap();
                c.lo <= 1.0 && 1.0 <= c.hi
            })
            .count();
        assert!(covered >= 95, "{covered} of 100");
    }

    #[test]
    fn ad_known_value() {
        // A² of the exact normal quantiles is small
        let m = 1000;
        let q: Vec<f64> = (0..m)
            .map(|i| {
                statrs::function::erf::erf_inv(2.0 * ((i as f64 + 0.5) / m as f64) - 1.0) * std::f64::consts::SQRT_2
            })
            .collect();
        assert!(anderson_darling(&q) < 0.01);
        assert!(ks_statistic(&q) <= 0.5 / m as f64 + 1e-9);
    }
}
