use serde::Serialize;

/// Window factor of the self-consistent truncation `W ≥ c·τ(W)`.
const WINDOW_C: f64 = 6.0;

/// Integrated autocorrelation time `τ = ½ + Σ_{t=1}^{W} ρ(t)`, with the
/// window chosen by the self-consistent rule. Independent samples give
/// `τ = ½`; constant series give `½`.
pub fn integrated_autocorr_time(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 0.5;
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0 = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 4 {
        let ct = d[..n - t].iter().zip(&d[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += ct / c0;
        if t as f64 >= WINDOW_C * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub mean: f64,
    /// `sd·√(2τ/n)`
    pub se: f64,
    pub tau: f64,
}

pub fn series_estimate(x: &[f64]) -> SeriesEstimate {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let tau = integrated_autocorr_time(x);
    SeriesEstimate {
        mean,
        se: (var * 2.0 * tau / n).sqrt(),
        tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamRole};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn white_noise_has_half() {
        let mut rng = stream(1, 0, StreamRole::Synthetic, 0);
        let x: Vec<f64> = (0..50_000).map(|_| rng.sample(StandardNormal)).collect();
        assert_abs_diff_eq!(integrated_autocorr_time(&x), 0.5, epsilon = 0.05);
    }

    #[test]
    fn ar1_matches_closed_form() {
        // AR(1) with coefficient a: τ = ½(1 + a)/(1 − a)
        let a: f64 = 0.8;
        let mut rng = stream(2, 0, StreamRole::Synthetic, 0);
        let mut v = 0.0;
        let x: Vec<f64> = (0..200_000)
            .map(|_| {
                v = a * v + rng.sample::<f64, _>(StandardNormal);
                v
            })
            .collect();
        let expect = 0.5 * (1.0 + a) / (1.0 - a);
        assert_abs_diff_eq!(integrated_autocorr_time(&x), expect, epsilon = 0.1 * expect);
    }

    #[test]
    fn constant_series() {
        assert_eq!(integrated_autocorr_time(&[2.0; 100]), 0.5);
        let e = series_estimate(&[2.0; 100]);
        assert_eq!((e.mean, e.se), (2.0, 0.0));
    }
}
