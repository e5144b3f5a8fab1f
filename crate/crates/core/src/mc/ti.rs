use serde::{Deserialize, Serialize};

use crate::error::{Result, SkError};
use crate::model::DisorderSample;

use super::autocorr::{series_estimate, SeriesEstimate};
use super::pt::{parallel_tempering, PtConfig};

/// Gauss–Legendre nodes (ascending) and weights on `[−1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_k(x) and P_k'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if k == 0 {
                1.0
            } else if k == 1 {
                x
            } else {
                p1
            };
            let pm = if k == 1 { 1.0 } else { p0 };
            dp = k as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiConfig {
    pub grid_size: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub sweeps_per_swap: usize,
}

impl Default for TiConfig {
    fn default() -> Self {
        Self {
            grid_size: 8,
            sweeps: 20_000,
            burn_in: 1_000,
            sweeps_per_swap: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiResult {
    pub f_hat: f64,
    pub std_err: f64,
    /// inverse temperatures of the quadrature, also the tempering ladder
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `⟨H₁⟩` at each node
    pub h1: Vec<SeriesEstimate>,
    pub burn_in: usize,
    pub tau_hot: f64,
    pub swap_rates: Vec<f64>,
}

impl TiResult {
    /// `N ln 2 + ∫₀^{β_k} ⟨H₁⟩` at each node by the trapezoid rule through
    /// the node values, starting from `⟨H₁⟩₀ = 0`.
    pub fn profile(&self, n: usize) -> Vec<f64> {
        let mut acc = n as f64 * std::f64::consts::LN_2;
        let (mut b0, mut h0) = (0.0, 0.0);
        self.nodes
            .iter()
            .zip(&self.h1)
            .map(|(&b, e)| {
                acc += 0.5 * (b - b0) * (h0 + e.mean);
                b0 = b;
                h0 = e.mean;
                acc
            })
            .collect()
    }
}

/// `F̂(β) = N ln 2 + ∫₀^β ⟨H_{N,1}⟩_{β'} dβ'` by Gauss–Legendre quadrature,
/// with the node averages from one parallel-tempering run over the nodes.
pub fn thermo_integration_f(sample: &DisorderSample, beta: f64, cfg: &TiConfig, seed: u64) -> Result<TiResult> {
    let base = sample.n as f64 * std::f64::consts::LN_2;
    if !(beta.is_finite() && (0.0..=2.0).contains(&beta)) {
        return Err(SkError::BetaOutOfRange(beta));
    }
    if cfg.grid_size == 0 {
        return Err(SkError::InvalidParam("grid_size must be positive".into()));
    }
    if beta == 0.0 {
        return Ok(TiResult {
            f_hat: base,
            std_err: 0.0,
            nodes: vec![],
            weights: vec![],
            h1: vec![],
            burn_in: 0,
            tau_hot: 0.0,
            swap_rates: vec![],
        });
    }
    let (x, w) = gauss_legendre(cfg.grid_size);
    let nodes: Vec<f64> = x.iter().map(|x| 0.5 * beta * (x + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|w| 0.5 * beta * w).collect();
    let run = parallel_tempering(
        sample,
        &PtConfig {
            beta_ladder: nodes.clone(),
            sweeps_per_swap: cfg.sweeps_per_swap,
            total_sweeps: cfg.sweeps,
            burn_in: cfg.burn_in,
        },
        seed,
    )?;
    let h1: Vec<SeriesEstimate> = (0..nodes.len()).map(|k| run.h1_estimate(k)).collect();
    let f_hat = base + weights.iter().zip(&h1).map(|(w, e)| w * e.mean).sum::<f64>();
    // PT couples the rungs, so the error comes from the weighted sum series
    let combined: Vec<SeriesEstimate> = (0..2)
        .map(|set| {
            let len = run.rungs[0].h1[set].len();
            let series: Vec<f64> = (0..len)
                .map(|i| weights.iter().zip(&run.rungs).map(|(w, r)| w * r.h1[set][i]).sum())
                .collect();
            series_estimate(&series)
        })
        .collect();
    let std_err = 0.5 * (combined[0].se.powi(2) + combined[1].se.powi(2)).sqrt();
    Ok(TiResult {
        f_hat,
        std_err,
        nodes,
        weights,
        h1,
        burn_in: run.burn_in,
        tau_hot: run.tau_hot,
        swap_rates: run.swap_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::log_partition;
    use crate::model::sample_disorder;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_rules_are_exact_for_polynomials() {
        for k in 1..=12 {
            let (x, w) = gauss_legendre(k);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..2 * k {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert_abs_diff_eq!(q, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn zero_beta_is_exact() {
        let s = sample_disorder(12, 0, 0, false).unwrap();
        let r = thermo_integration_f(&s, 0.0, &TiConfig::default(), 1).unwrap();
        assert_eq!(r.f_hat, 12.0 * std::f64::consts::LN_2);
        assert_eq!(r.std_err, 0.0);
    }

    #[test]
    fn matches_exact_free_energy() {
        let s = sample_disorder(12, 4, 0, false).unwrap();
        let r = thermo_integration_f(&s, 0.5, &TiConfig::default(), 2).unwrap();
        let exact = log_partition(&s, 0.5).unwrap();
        assert!(
            (r.f_hat - exact).abs() <= 3.0 * r.std_err,
            "{} vs {exact} ± {}",
            r.f_hat,
            r.std_err
        );
        let prof = r.profile(12);
        assert!(prof.windows(2).all(|p| p[1] >= p[0] - 3.0 * r.std_err));
    }
}
