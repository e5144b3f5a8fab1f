use serde::{Deserialize, Serialize};

use crate::error::{Result, SkError};
use crate::model::{dense_from_upper, DisorderSample};

use super::{check_cap, Kahan};

/// Exact Gibbs measure over all `2^n` configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsTable {
    pub n: usize,
    pub beta: f64,
    /// `F = ln Z`
    pub log_z: f64,
    pub probs: Vec<f64>,
}

impl GibbsTable {
    /// Marginal probability that spin `i` is `+1`.
    pub fn prob_plus(&self, i: usize) -> f64 {
        let mut acc = Kahan::default();
        for (x, &p) in self.probs.iter().enumerate() {
            if (x >> i) & 1 == 0 {
                acc.add(p);
            }
        }
        acc.sum()
    }
}

/// Interpolation time `t` and cavity coupling `s`, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledParams {
    pub t: f64,
    pub s: f64,
}

impl CoupledParams {
    pub fn new(t: f64, s: f64) -> Result<Self> {
        for (name, v) in [("t", t), ("s", s)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SkError::InvalidParam(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self { t, s })
    }
}

/// Visit `(x, H(x))` for every configuration with the top spin at `+1`, in
/// Gray-code order, where `H(x) = Σ_{i<j} J_ij σ_i σ_j` for a dense symmetric
/// `J` with zero diagonal. The other half follows from `H(x) = H(!x)`.
///
/// One flip per step; local fields are updated in `O(n)`.
pub(crate) fn for_each_half_energy(n: usize, j: &[f64], mut visit: impl FnMut(usize, f64)) {
    debug_assert_eq!(j.len(), n * n);
    let mut spins = vec![1.0f64; n];
    let mut fields: Vec<f64> = (0..n).map(|i| j[i * n..(i + 1) * n].iter().sum()).collect();
    let mut energy = 0.0;
    for i in 0..n {
        for k in (i + 1)..n {
            energy += j[i * n + k];
        }
    }
    visit(0, energy);
    let half = 1usize << (n - 1);
    let mut gray = 0usize;
    for step in 1..half {
        let b = step.trailing_zeros() as usize;
        let old = spins[b];
        energy -= 2.0 * old * fields[b];
        spins[b] = -old;
        let delta = -2.0 * old;
        let row = &j[b * n..(b + 1) * n];
        for (f, &jb) in fields.iter_mut().zip(row) {
            *f += delta * jb;
        }
        gray ^= 1 << b;
        visit(gray, energy);
    }
}

/// Table from a dense interaction matrix that already includes `β`.
pub(crate) fn table_from_interactions(n: usize, beta: f64, j: &[f64]) -> GibbsTable {
    let size = 1usize << n;
    let mask = size - 1;
    let mut weights = vec![0.0; size];
    let mut max = f64::NEG_INFINITY;
    for_each_half_energy(n, j, |x, e| {
        weights[x] = e;
        weights[x ^ mask] = e;
        if e > max {
            max = e;
        }
    });
    let mut z = Kahan::default();
    for w in weights.iter_mut() {
        *w = (*w - max).exp();
        z.add(*w);
    }
    let z = z.sum();
    let inv = 1.0 / z;
    for w in weights.iter_mut() {
        *w *= inv;
    }
    GibbsTable {
        n,
        beta,
        log_z: max + z.ln(),
        probs: weights,
    }
}

/// Exact Gibbs table of `H_{N,β}` for one disorder sample.
pub fn gibbs_table(sample: &DisorderSample, beta: f64) -> Result<GibbsTable> {
    check_cap(sample.n)?;
    let j = sample.coupling_matrix(beta / (sample.n as f64).sqrt());
    Ok(table_from_interactions(sample.n, beta, &j))
}

/// `ln Z` by a single streaming log-sum-exp pass; no table is stored.
pub fn log_partition(sample: &DisorderSample, beta: f64) -> Result<f64> {
    check_cap(sample.n)?;
    let j = sample.coupling_matrix(beta / (sample.n as f64).sqrt());
    let mut max = f64::NEG_INFINITY;
    let mut acc = Kahan::default();
    for_each_half_energy(sample.n, &j, |_, e| {
        if e > max {
            acc.scale((max - e).exp());
            acc.add(1.0);
            max = e;
        } else {
            acc.add((e - max).exp());
        }
    });
    Ok(max + acc.sum().ln() + std::f64::consts::LN_2)
}

/// Interaction matrix of `H^1_{N,t,s}` (with `aux = g'`) or `H^2_{N,t,s}`
/// (with `aux = g''`): pairs inside the first `N − 1` spins use
/// `√t·g + √(1−t)·aux`, pairs touching the last spin are further scaled by `√s`.
fn coupled_interactions(sample: &DisorderSample, aux: &[f64], beta: f64, params: CoupledParams) -> Vec<f64> {
    let n = sample.n;
    let scale = beta / (n as f64).sqrt();
    let (st, su) = (params.t.sqrt(), (1.0 - params.t).sqrt());
    let ss = params.s.sqrt();
    let mut j = dense_from_upper(n, |p| scale * (st * sample.couplings[p] + su * aux[p]));
    let last = n - 1;
    for i in 0..last {
        j[i * n + last] *= ss;
        j[last * n + i] *= ss;
    }
    j
}

/// The pair of Gibbs tables `(⟨·⟩ of H^1_{N,t,s}, ⟨·⟩ of H^2_{N,t,s})`.
///
/// The two tables share `g` and use the independent auxiliary disorders for
/// everything else; at `t = 1, s = 1` both equal [`gibbs_table`].
pub fn coupled_tables(sample: &DisorderSample, beta: f64, params: CoupledParams) -> Result<(GibbsTable, GibbsTable)> {
    if sample.n < 2 {
        return Err(SkError::SizeTooSmall { n: sample.n, min: 2 });
    }
    check_cap(sample.n)?;
    let (Some(aux_a), Some(aux_b)) = (&sample.aux_a, &sample.aux_b) else {
        return Err(SkError::MissingAux);
    };
    let ja = coupled_interactions(sample, aux_a, beta, params);
    let jb = coupled_interactions(sample, aux_b, beta, params);
    Ok((
        table_from_interactions(sample.n, beta, &ja),
        table_from_interactions(sample.n, beta, &jb),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_disorder, SpinConfig};
    use approx::assert_abs_diff_eq;

    fn naive_table(sample: &DisorderSample, beta: f64) -> (f64, Vec<f64>) {
        let n = sample.n;
        let energies: Vec<f64> = (0..1u64 << n)
            .map(|x| sample.energy(beta, &SpinConfig::from_index(n, x).unwrap()))
            .collect();
        let z: f64 = energies.iter().map(|e| e.exp()).sum();
        (z.ln(), energies.iter().map(|e| e.exp() / z).collect())
    }

    #[test]
    fn zero_beta_is_uniform() {
        let s = sample_disorder(7, 3, 0, false).unwrap();
        let t = gibbs_table(&s, 0.0).unwrap();
        assert_abs_diff_eq!(t.log_z, 7.0 * std::f64::consts::LN_2, epsilon = 1e-12);
        for p in &t.probs {
            assert_abs_diff_eq!(*p, 1.0 / 128.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_spins_by_hand() {
        let s = DisorderSample::from_couplings(2, vec![1.0], None).unwrap();
        let t = gibbs_table(&s, 1.0).unwrap();
        let expect = (4.0 * (std::f64::consts::FRAC_1_SQRT_2).cosh()).ln();
        assert_abs_diff_eq!(t.log_z, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(log_partition(&s, 1.0).unwrap(), expect, epsilon = 1e-14);
    }

    #[test]
    fn gray_code_matches_direct_enumeration() {
        for (n, beta) in [(1, 0.3), (3, 1.1), (10, 0.9), (10, 2.0)] {
            let s = sample_disorder(n, 11, n as u64, false).unwrap();
            let t = gibbs_table(&s, beta).unwrap();
            let (log_z, probs) = naive_table(&s, beta);
            assert_abs_diff_eq!(t.log_z, log_z, epsilon = 1e-10);
            for (a, b) in t.probs.iter().zip(&probs) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(log_partition(&s, beta).unwrap(), t.log_z, epsilon = 1e-12);
        }
    }

    #[test]
    fn table_invariants() {
        for seed in 0..5 {
            let n = 12;
            let s = sample_disorder(n, seed, 0, false).unwrap();
            let t = gibbs_table(&s, 1.3).unwrap();
            let total: f64 = t.probs.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            assert!(t.probs.iter().all(|&p| p >= 0.0));
            assert!(t.log_z >= n as f64 * std::f64::consts::LN_2);
            let mask = (1 << n) - 1;
            for x in 0..1 << n {
                assert_eq!(t.probs[x], t.probs[x ^ mask]);
            }
        }
    }

    #[test]
    fn capacity_error() {
        let s = sample_disorder(25, 0, 0, false).unwrap();
        assert_eq!(gibbs_table(&s, 0.5).unwrap_err(), SkError::Capacity { n: 25, cap: 24 });
    }

    #[test]
    fn coupled_limits() {
        let s = sample_disorder(8, 5, 1, true).unwrap();
        let plain = gibbs_table(&s, 0.8).unwrap();
        let (a, b) = coupled_tables(&s, 0.8, CoupledParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(a, plain);
        assert_eq!(b, plain);

        // t = 0: table A only sees g', table B only sees g''.
        let (a, b) = coupled_tables(&s, 0.8, CoupledParams::new(0.0, 1.0).unwrap()).unwrap();
        let only_a = DisorderSample::from_couplings(8, s.aux_a.clone().unwrap(), None).unwrap();
        let only_b = DisorderSample::from_couplings(8, s.aux_b.clone().unwrap(), None).unwrap();
        assert_abs_diff_eq!(a.log_z, gibbs_table(&only_a, 0.8).unwrap().log_z, epsilon = 1e-12);
        assert_abs_diff_eq!(b.log_z, gibbs_table(&only_b, 0.8).unwrap().log_z, epsilon = 1e-12);

        // s = 0: the last spin is free and uniform.
        for t in [0.0, 0.4, 1.0] {
            let (a, b) = coupled_tables(&s, 1.2, CoupledParams::new(t, 0.0).unwrap()).unwrap();
            for tab in [&a, &b] {
                assert_abs_diff_eq!(tab.prob_plus(7), 0.5, epsilon = 1e-12);
                let top = 1 << 7;
                for x in 0..top {
                    assert_abs_diff_eq!(tab.probs[x], tab.probs[x | top], epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn coupled_requires_aux() {
        let s = sample_disorder(4, 0, 0, false).unwrap();
        assert_eq!(
            coupled_tables(&s, 0.5, CoupledParams::new(0.5, 0.5).unwrap()).unwrap_err(),
            SkError::MissingAux
        );
        assert!(CoupledParams::new(1.5, 0.0).is_err());
    }
}
