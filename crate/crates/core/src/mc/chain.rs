use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{DisorderSample, SpinConfig};

/// Dense `g_ij/√N` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub n: usize,
    pub j: Vec<f64>,
}

impl Couplings {
    pub fn from_sample(sample: &DisorderSample) -> Self {
        Self {
            n: sample.n,
            j: sample.coupling_matrix(1.0 / (sample.n as f64).sqrt()),
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.j[i * self.n..(i + 1) * self.n]
    }

    /// `H_{N,1}(σ)` and the local fields `h_i = Σ_j J_ij σ_j`, from scratch.
    pub fn evaluate(&self, spins: &[f64]) -> (f64, Vec<f64>) {
        let fields: Vec<f64> = (0..self.n)
            .map(|i| self.row(i).iter().zip(spins).map(|(a, b)| a * b).sum())
            .collect();
        let energy = 0.5 * spins.iter().zip(&fields).map(|(s, h)| s * h).sum::<f64>();
        (energy, fields)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    HeatBath,
    Metropolis,
}

/// Probability that one update of site `i` leaves it flipped, given its
/// current `spin` and local field (without `β`).
///
/// Heat bath resamples from the conditional law, `P(+1) = 1/(1 + e^{−2βh})`;
/// Metropolis accepts the flip with `min(1, e^{−2βσh})`.
pub fn site_flip_probability(dynamics: Dynamics, beta: f64, field: f64, spin: f64) -> f64 {
    match dynamics {
        Dynamics::HeatBath => 1.0 / (1.0 + (2.0 * beta * spin * field).exp()),
        Dynamics::Metropolis => (-2.0 * beta * spin * field).exp().min(1.0),
    }
}

/// One Markov chain with cached local fields and energy.
#[derive(Debug, Clone)]
pub struct ChainState {
    spins: Vec<f64>,
    fields: Vec<f64>,
    energy_h1: f64,
    rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(couplings: &Couplings, config: &SpinConfig, rng: ChaCha8Rng) -> Self {
        assert_eq!(config.n(), couplings.n);
        let spins = config.spins();
        let (energy_h1, fields) = couplings.evaluate(&spins);
        Self {
            spins,
            fields,
            energy_h1,
            rng,
        }
    }

    /// Uniformly random start drawn from `rng`.
    pub fn random(couplings: &Couplings, mut rng: ChaCha8Rng) -> Self {
        let spins: Vec<f64> = (0..couplings.n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let config = SpinConfig::from_spins(&spins);
        Self::new(couplings, &config, rng)
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig::from_spins(&self.spins)
    }

    pub fn spins(&self) -> &[f64] {
        &self.spins
    }

    pub fn local_fields(&self) -> &[f64] {
        &self.fields
    }

    /// Cached `H_{N,1}` of the current configuration.
    pub fn energy_h1(&self) -> f64 {
        self.energy_h1
    }

    pub fn overlap(&self, other: &ChainState) -> f64 {
        self.spins.iter().zip(&other.spins).map(|(a, b)| a * b).sum::<f64>() / self.spins.len() as f64
    }

    /// Largest deviation of the cached energy and fields from a recomputation.
    pub fn bookkeeping_error(&self, couplings: &Couplings) -> f64 {
        let (e, f) = couplings.evaluate(&self.spins);
        f.iter()
            .zip(&self.fields)
            .fold((e - self.energy_h1).abs(), |m, (a, b)| m.max((a - b).abs()))
    }

    /// Exchange configurations (not random streams) with another chain.
    pub(crate) fn swap_configuration(&mut self, other: &mut ChainState) {
        std::mem::swap(&mut self.spins, &mut other.spins);
        std::mem::swap(&mut self.fields, &mut other.fields);
        std::mem::swap(&mut self.energy_h1, &mut other.energy_h1);
    }

    fn flip(&mut self, couplings: &Couplings, i: usize) {
        let old = self.spins[i];
        self.energy_h1 -= 2.0 * old * self.fields[i];
        self.spins[i] = -old;
        let delta = -2.0 * old;
        for (f, &jk) in self.fields.iter_mut().zip(couplings.row(i)) {
            *f += delta * jk;
        }
    }

    /// One sequential pass over all sites.
    pub fn sweep(&mut self, couplings: &Couplings, beta: f64, dynamics: Dynamics) {
        for i in 0..self.spins.len() {
            let p = site_flip_probability(dynamics, beta, self.fields[i], self.spins[i]);
            let u: f64 = self.rng.random();
            if u < p {
                self.flip(couplings, i);
            }
        }
    }
}

pub fn heat_bath_sweep(state: &mut ChainState, couplings: &Couplings, beta: f64) {
    state.sweep(couplings, beta, Dynamics::HeatBath);
}

pub fn metropolis_sweep(state: &mut ChainState, couplings: &Couplings, beta: f64) {
    state.sweep(couplings, beta, Dynamics::Metropolis);
}
