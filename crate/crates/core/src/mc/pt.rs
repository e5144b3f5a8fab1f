use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkError};
use crate::model::DisorderSample;
use crate::rng::{stream, StreamRole};

use super::autocorr::{integrated_autocorr_time, series_estimate, SeriesEstimate};
use super::chain::{heat_bath_sweep, ChainState, Couplings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtConfig {
    pub beta_ladder: Vec<f64>,
    pub sweeps_per_swap: usize,
    pub total_sweeps: usize,
    /// minimum number of discarded sweeps; raised to `100·τ_int` of the
    /// hottest rung when that is larger
    pub burn_in: usize,
}

impl PtConfig {
    pub fn validate(&self) -> Result<()> {
        let l = &self.beta_ladder;
        if l.is_empty() {
            return Err(SkError::InvalidParam("empty temperature ladder".into()));
        }
        if l.iter().any(|b| !(*b > 0.0 && *b <= 2.0)) {
            return Err(SkError::InvalidParam("ladder temperatures must lie in (0, 2]".into()));
        }
        if l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SkError::InvalidParam("ladder must be strictly increasing".into()));
        }
        if self.sweeps_per_swap == 0 {
            return Err(SkError::InvalidParam("sweeps_per_swap must be positive".into()));
        }
        if self.burn_in >= self.total_sweeps {
            return Err(SkError::InvalidParam(format!(
                "burn_in {} must be below total_sweeps {}",
                self.burn_in, self.total_sweeps
            )));
        }
        Ok(())
    }
}

/// `rungs` inverse temperatures from `beta_min` to `beta_max`, geometric in
/// `1 − β²` when `beta_max < 1` and linear in `β` otherwise.
pub fn geometric_ladder(beta_min: f64, beta_max: f64, rungs: usize) -> Result<Vec<f64>> {
    if !(beta_min > 0.0 && beta_min < beta_max) {
        return Err(SkError::InvalidParam(format!(
            "bad ladder range [{beta_min}, {beta_max}]"
        )));
    }
    if rungs < 2 {
        return Err(SkError::InvalidParam("ladder needs at least 2 rungs".into()));
    }
    let steps = (rungs - 1) as f64;
    if beta_max < 1.0 {
        let (a, b) = ((1.0 - beta_min * beta_min).ln(), (1.0 - beta_max * beta_max).ln());
        Ok((0..rungs)
            .map(|k| {
                let x = (a + (b - a) * k as f64 / steps).exp();
                (1.0 - x).sqrt()
            })
            .collect())
    } else {
        Ok((0..rungs)
            .map(|k| beta_min + (beta_max - beta_min) * k as f64 / steps)
            .collect())
    }
}

/// `min(1, exp((β_i − β_j)(H₁(σ_j) − H₁(σ_i))))`
pub fn swap_acceptance(beta_i: f64, beta_j: f64, h_i: f64, h_j: f64) -> f64 {
    ((beta_i - beta_j) * (h_j - h_i)).exp().min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RungSeries {
    pub beta: f64,
    /// `H_{N,1}` after each measured sweep, one series per replica set
    pub h1: [Vec<f64>; 2],
    /// overlap between the two replica sets at this rung
    pub overlap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtRun {
    pub rungs: Vec<RungSeries>,
    /// acceptance rate of each neighbor pair `(k, k+1)`
    pub swap_rates: Vec<f64>,
    pub burn_in: usize,
    /// `τ_int` of `H₁` at the hottest rung
    pub tau_hot: f64,
}

impl PtRun {
    /// `⟨H₁⟩` at a rung from both replica sets.
    pub fn h1_estimate(&self, rung: usize) -> SeriesEstimate {
        let [a, b] = &self.rungs[rung].h1;
        let (ea, eb) = (series_estimate(a), series_estimate(b));
        SeriesEstimate {
            mean: 0.5 * (ea.mean + eb.mean),
            se: 0.5 * (ea.se * ea.se + eb.se * eb.se).sqrt(),
            tau: ea.tau.max(eb.tau),
        }
    }

    /// `⟨R²⟩` at a rung.
    pub fn overlap_sq_estimate(&self, rung: usize) -> SeriesEstimate {
        let sq: Vec<f64> = self.rungs[rung].overlap.iter().map(|r| r * r).collect();
        series_estimate(&sq)
    }
}

/// Two independent replica sets, one heat-bath chain per rung each, with
/// neighbor swaps every `sweeps_per_swap` sweeps.
pub fn parallel_tempering(sample: &DisorderSample, cfg: &PtConfig, seed: u64) -> Result<PtRun> {
    cfg.validate()?;
    let couplings = Couplings::from_sample(sample);
    let n = sample.n as u64;
    let rungs = cfg.beta_ladder.len();
    let mut sets: Vec<Vec<ChainState>> = (0..2)
        .map(|set| {
            (0..rungs)
                .map(|k| ChainState::random(&couplings, stream(seed, (set * rungs + k) as u64, StreamRole::Chain, n)))
                .collect()
        })
        .collect();
    let mut swap_rngs: Vec<_> = (0..2).map(|set| stream(seed, set, StreamRole::Swap, n)).collect();
    let mut attempts = 0usize;
    let mut accepted = vec![0usize; rungs.saturating_sub(1)];
    let mut series: Vec<RungSeries> = cfg
        .beta_ladder
        .iter()
        .map(|&beta| RungSeries {
            beta,
            h1: [
                Vec::with_capacity(cfg.total_sweeps),
                Vec::with_capacity(cfg.total_sweeps),
            ],
            overlap: Vec::with_capacity(cfg.total_sweeps),
        })
        .collect();

    for sweep in 0..cfg.total_sweeps {
        for chains in sets.iter_mut() {
            for (chain, &beta) in chains.iter_mut().zip(&cfg.beta_ladder) {
                heat_bath_sweep(chain, &couplings, beta);
            }
        }
        if (sweep + 1) % cfg.sweeps_per_swap == 0 {
            attempts += 1;
            for (chains, rng) in sets.iter_mut().zip(swap_rngs.iter_mut()) {
                for k in 0..rungs.saturating_sub(1) {
                    let (lo, hi) = chains.split_at_mut(k + 1);
                    let (a, b) = (&mut lo[k], &mut hi[0]);
                    let p = swap_acceptance(cfg.beta_ladder[k], cfg.beta_ladder[k + 1], a.energy_h1(), b.energy_h1());
                    let u: f64 = rng.random();
                    if u < p {
                        a.swap_configuration(b);
                        accepted[k] += 1;
                    }
                }
            }
        }
        for (k, s) in series.iter_mut().enumerate() {
            s.h1[0].push(sets[0][k].energy_h1());
            s.h1[1].push(sets[1][k].energy_h1());
            s.overlap.push(sets[0][k].overlap(&sets[1][k]));
        }
    }

    let hot = &series[0].h1[0];
    let tau_hot = integrated_autocorr_time(&hot[hot.len() / 2..]);
    let burn_in = cfg
        .burn_in
        .max((100.0 * tau_hot).ceil() as usize)
        .min(cfg.total_sweeps / 2);
    for s in series.iter_mut() {
        s.h1[0].drain(..burn_in);
        s.h1[1].drain(..burn_in);
        s.overlap.drain(..burn_in);
    }
    let swap_rates = accepted
        .iter()
        .map(|&a| {
            if attempts == 0 {
                0.0
            } else {
                a as f64 / (2 * attempts) as f64
            }
        })
        .collect();
    Ok(PtRun {
        rungs: series,
        swap_rates,
        burn_in,
        tau_hot,
    })
}
