//! Disorder, spin configurations, the Hamiltonian and inverse-temperature
//! schedules.
//!
//! Spin convention: bit `i` of a configuration mask is 0 for `σ_i = +1` and 1
//! for `σ_i = -1`, so the all-plus state is the zero mask. The "last spin" of
//! the cavity construction is the highest bit, index `n - 1`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkError};
use crate::rng::{stream, StreamRole};

/// Number of unordered pairs `i < j` among `n` spins.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in the row-major upper triangle.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// One realization of the Gaussian couplings, with optional independent
/// copies used by the interpolation (`aux_a` plays `g'`, `aux_b` plays `g''`).
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    pub n: usize,
    pub couplings: Vec<f64>,
    pub aux_a: Option<Vec<f64>>,
    pub aux_b: Option<Vec<f64>>,
    pub seed: u64,
    pub stream_index: u64,
}

fn normals(n: usize, seed: u64, stream_index: u64, role: StreamRole) -> Vec<f64> {
    let mut rng = stream(seed, stream_index, role, n as u64);
    (0..pair_count(n)).map(|_| rng.sample(StandardNormal)).collect()
}

impl DisorderSample {
    /// Draw i.i.d. standard normal couplings from the stream keyed by
    /// `(seed, stream_index)`; auxiliary arrays come from disjoint role streams.
    pub fn sample(n: usize, seed: u64, stream_index: u64, with_aux: bool) -> Result<Self> {
        if n == 0 {
            return Err(SkError::SizeTooSmall { n, min: 1 });
        }
        let couplings = normals(n, seed, stream_index, StreamRole::Couplings);
        let (aux_a, aux_b) = if with_aux {
            (
                Some(normals(n, seed, stream_index, StreamRole::AuxA)),
                Some(normals(n, seed, stream_index, StreamRole::AuxB)),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            n,
            couplings,
            aux_a,
            aux_b,
            seed,
            stream_index,
        })
    }

    /// Build a sample from explicit couplings (upper triangle, row-major).
    pub fn from_couplings(n: usize, couplings: Vec<f64>, aux: Option<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if n == 0 {
            return Err(SkError::SizeTooSmall { n, min: 1 });
        }
        let want = pair_count(n);
        if couplings.len() != want {
            return Err(SkError::SizeMismatch {
                left: couplings.len(),
                right: want,
            });
        }
        let (aux_a, aux_b) = match aux {
            Some((a, b)) => {
                for len in [a.len(), b.len()] {
                    if len != want {
                        return Err(SkError::SizeMismatch { left: len, right: want });
                    }
                }
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        Ok(Self {
            n,
            couplings,
            aux_a,
            aux_b,
            seed: 0,
            stream_index: 0,
        })
    }

    pub fn has_aux(&self) -> bool {
        self.aux_a.is_some() && self.aux_b.is_some()
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings[pair_index(self.n, a, b)]
    }

    /// Dense symmetric `n × n` matrix with entries `scale * g_ij` and a zero
    /// diagonal.
    pub fn coupling_matrix(&self, scale: f64) -> Vec<f64> {
        dense_from_upper(self.n, |p| scale * self.couplings[p])
    }

    /// `H_{N,β}(σ) = (β/√N) Σ_{i<j} g_ij σ_i σ_j`, summed directly.
    pub fn energy(&self, beta: f64, config: &SpinConfig) -> f64 {
        debug_assert_eq!(config.n(), self.n);
        let spins = config.spins();
        let mut acc = 0.0;
        let mut p = 0;
        for i in 0..self.n {
            let rest = &spins[i + 1..];
            let row: f64 = self.couplings[p..p + rest.len()]
                .iter()
                .zip(rest)
                .map(|(g, s)| g * s)
                .sum();
            p += rest.len();
            acc += spins[i] * row;
        }
        beta * acc / (self.n as f64).sqrt()
    }
}

/// Fill a dense symmetric matrix from a function of the upper-triangle index.
pub(crate) fn dense_from_upper(n: usize, mut value: impl FnMut(usize) -> f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let mut p = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = value(p);
            m[i * n + j] = v;
            m[j * n + i] = v;
            p += 1;
        }
    }
    m
}

pub fn sample_disorder(n: usize, seed: u64, stream_index: u64, with_aux: bool) -> Result<DisorderSample> {
    DisorderSample::sample(n, seed, stream_index, with_aux)
}

pub fn energy(sample: &DisorderSample, beta: f64, config: &SpinConfig) -> f64 {
    sample.energy(beta, config)
}

/// An `n`-spin configuration stored as a bit mask (bit set ⇒ spin −1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n: usize,
    words: Vec<u64>,
}

impl SpinConfig {
    pub fn all_plus(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64).max(1)],
        }
    }

    /// Configuration whose low `n` bits are `index`. Higher bits must be zero.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        if n < 64 && index >> n != 0 {
            return Err(SkError::InvalidParam(format!(
                "index {index:#x} has bits above position {}",
                n.saturating_sub(1)
            )));
        }
        let mut c = Self::all_plus(n);
        c.words[0] = index;
        Ok(c)
    }

    pub fn from_spins(spins: &[f64]) -> Self {
        let mut c = Self::all_plus(spins.len());
        for (i, &s) in spins.iter().enumerate() {
            if s < 0.0 {
                c.words[i / 64] |= 1 << (i % 64);
            }
        }
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Low 64 bits of the mask.
    pub fn index(&self) -> u64 {
        self.words[0]
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        if self.bit(i) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn spins(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.spin(i)).collect()
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    /// Global spin flip `σ ↦ −σ`.
    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        for (w, word) in c.words.iter_mut().enumerate() {
            let live = (self.n - 64 * w).min(64);
            let mask = if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
            *word ^= mask;
        }
        c
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `R(σ, τ) = (n − 2·popcount(σ ⊕ τ)) / n`.
    pub fn overlap(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        (self.n as f64 - 2.0 * self.hamming(other) as f64) / self.n as f64
    }
}

/// `ν(β) = −½ ln(1 − β²) − β²/2`, the limiting variance of the free energy.
pub fn nu(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(SkError::BetaOutOfRange(beta));
    }
    let b2 = beta * beta;
    Ok(-0.5 * (-b2).ln_1p() - 0.5 * b2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Fixed {
        beta: f64,
    },
    /// `β_N = sqrt(1 − c·N^{-1/3})`
    BetaSqWindow {
        c: f64,
    },
    /// `β_N = 1 − c·N^{-1/3}`
    BetaWindow {
        c: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledBeta {
    pub beta: f64,
    /// `c_N = N^{1/3}(1 − β_N²)`
    pub c_n: f64,
}

impl BetaSchedule {
    pub fn is_window(&self) -> bool {
        !matches!(self, BetaSchedule::Fixed { .. })
    }

    pub fn beta_for(&self, n: usize) -> Result<ScheduledBeta> {
        if n == 0 {
            return Err(SkError::SizeTooSmall { n, min: 1 });
        }
        let cbrt_n = (n as f64).cbrt();
        let window_ratio = |c: f64| -> Result<f64> {
            if !(c.is_finite() && c > 0.0) {
                return Err(SkError::InvalidParam(format!(
                    "window constant must be positive, got {c}"
                )));
            }
            let ratio = c / cbrt_n;
            if ratio >= 1.0 {
                return Err(SkError::Inadmissible { n, ratio });
            }
            Ok(ratio)
        };
        match *self {
            BetaSchedule::Fixed { beta } => {
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(SkError::BetaOutOfRange(beta));
                }
                Ok(ScheduledBeta {
                    beta,
                    c_n: cbrt_n * (1.0 - beta * beta),
                })
            }
            // c_N equals c by construction here.
            BetaSchedule::BetaSqWindow { c } => {
                let ratio = window_ratio(c)?;
                Ok(ScheduledBeta {
                    beta: (1.0 - ratio).sqrt(),
                    c_n: c,
                })
            }
            BetaSchedule::BetaWindow { c } => {
                let beta = 1.0 - window_ratio(c)?;
                Ok(ScheduledBeta {
                    beta,
                    c_n: cbrt_n * (1.0 - beta * beta),
                })
            }
        }
    }
}

pub fn beta_for(schedule: &BetaSchedule, n: usize) -> Result<ScheduledBeta> {
    schedule.beta_for(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Series oracle: −½ln(1−x) − x/2 = Σ_{k≥2} x^k / (2k).
    fn nu_series(beta: f64) -> f64 {
        let x = beta * beta;
        let mut term = x;
        let mut acc = 0.0;
        for k in 2..4000 {
            term *= x;
            acc += term / (2.0 * k as f64);
        }
        acc
    }

    #[test]
    fn pair_counts() {
        assert!(sample_disorder(1, 3, 0, false).unwrap().couplings.is_empty());
        assert_eq!(sample_disorder(3, 3, 0, false).unwrap().couplings.len(), 3);
        for n in 1..=24 {
            assert_eq!(sample_disorder(n, 9, 1, true).unwrap().couplings.len(), n * (n - 1) / 2);
        }
        assert!(matches!(
            sample_disorder(0, 1, 0, false),
            Err(SkError::SizeTooSmall { .. })
        ));
    }

    #[test]
    fn disorder_is_reproducible() {
        let a = sample_disorder(12, 42, 7, true).unwrap();
        let b = sample_disorder(12, 42, 7, true).unwrap();
        assert_eq!(a, b);
        let c = sample_disorder(12, 42, 8, true).unwrap();
        assert_ne!(a.couplings, c.couplings);
        assert_ne!(a.couplings, *a.aux_a.as_ref().unwrap());
        assert_ne!(a.aux_a, a.aux_b);
    }

    #[test]
    fn pair_index_is_row_major() {
        let n = 5;
        let mut p = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(n, i, j), p);
                p += 1;
            }
        }
    }

    #[test]
    fn two_spin_energy() {
        let s = DisorderSample::from_couplings(2, vec![1.0], None).unwrap();
        let plus = SpinConfig::all_plus(2);
        assert_abs_diff_eq!(s.energy(1.0, &plus), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(s.energy(0.0, &SpinConfig::from_index(2, 1).unwrap()), 0.0);
    }

    #[test]
    fn energy_flip_symmetry_and_bilinearity() {
        let s = sample_disorder(14, 1, 2, false).unwrap();
        let mut rng = crate::rng::stream(0, 0, StreamRole::Synthetic, 0);
        for _ in 0..100 {
            let c = SpinConfig::from_index(14, rand::Rng::random_range(&mut rng, 0..1u64 << 14)).unwrap();
            assert_eq!(s.energy(0.8, &c), s.energy(0.8, &c.complement()));
            let e1 = s.energy(1.0, &c);
            assert_abs_diff_eq!(s.energy(0.37, &c), 0.37 * e1, epsilon = 1e-14 * e1.abs().max(1.0));
        }
    }

    #[test]
    fn spin_config_rejects_high_bits() {
        assert!(SpinConfig::from_index(3, 0b1000).is_err());
        let c = SpinConfig::from_index(3, 0b101).unwrap();
        assert_eq!(c.spins(), vec![-1.0, 1.0, -1.0]);
        assert_eq!(c.complement().index(), 0b010);
        assert_eq!(SpinConfig::from_spins(&c.spins()), c);
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(nu(0.5).unwrap(), nu_series(0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(nu(0.8).unwrap(), nu_series(0.8), epsilon = 1e-14);
        assert_abs_diff_eq!(nu(0.5).unwrap(), 0.018_841_036_2, epsilon = 1e-10);
        assert_abs_diff_eq!(nu(0.8).unwrap(), 0.190_825_623_7, epsilon = 1e-10);
        assert!(nu(1.0).is_err());
        assert!(nu(-0.1).is_err());
    }

    #[test]
    fn schedule_examples() {
        let b = BetaSchedule::BetaSqWindow { c: 1.0 }.beta_for(1000).unwrap();
        assert_abs_diff_eq!(b.beta, 0.9f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b.c_n, 1.0);
        let b = BetaSchedule::BetaWindow { c: 1.0 }.beta_for(1000).unwrap();
        assert_abs_diff_eq!(b.beta, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(b.c_n, 1.9, epsilon = 1e-12);
        let b = BetaSchedule::Fixed { beta: 0.5 }.beta_for(77).unwrap();
        assert_eq!(b.beta, 0.5);
        assert!(matches!(
            BetaSchedule::BetaSqWindow { c: 100.0 }.beta_for(8),
            Err(SkError::Inadmissible { .. })
        ));
        // c·N^{-1/3} = 1 exactly is on the boundary and therefore rejected.
        assert!(BetaSchedule::BetaSqWindow { c: 2.0 }.beta_for(8).is_err());
    }

    proptest! {
        #[test]
        fn window_schedule_consistent(n in 2usize..100_000, c in 0.01f64..5.0) {
            let s = BetaSchedule::BetaSqWindow { c };
            if let Ok(b) = s.beta_for(n) {
                prop_assert!(b.beta > 0.0 && b.beta < 1.0);
                let c_n = (n as f64).cbrt() * (1.0 - b.beta * b.beta);
                prop_assert!((c_n - c).abs() <= 1e-12);
            }
        }

        #[test]
        fn overlap_in_range(n in 1usize..60, a in any::<u64>(), b in any::<u64>()) {
            let m = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let x = SpinConfig::from_index(n, a & m).unwrap();
            let y = SpinConfig::from_index(n, b & m).unwrap();
            let r = x.overlap(&y);
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert_eq!(x.overlap(&x), 1.0);
            prop_assert_eq!(x.overlap(&x.complement()), -1.0);
        }
    }
}
