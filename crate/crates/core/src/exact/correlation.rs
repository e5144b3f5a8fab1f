use super::{GibbsTable, Kahan, Spectrum};

/// Two-point correlations `C_ij = ⟨σ_i σ_j⟩`, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl CorrelationMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Read the pair coefficients off a Walsh spectrum.
    pub fn from_spectrum(spec: &Spectrum) -> Self {
        let n = spec.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let c = spec.pair(i, j);
                entries[i * n + j] = c;
                entries[j * n + i] = c;
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }
}

/// Direct compensated accumulation `Σ_σ p(σ) σ_i σ_j` over the state space.
pub fn correlation_matrix(table: &GibbsTable) -> CorrelationMatrix {
    let n = table.n;
    let mut acc = vec![Kahan::default(); n * n];
    let mut spins = vec![0.0f64; n];
    for (x, &p) in table.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if (x >> i) & 1 == 0 { 1.0 } else { -1.0 };
        }
        for i in 0..n {
            let pi = p * spins[i];
            for j in (i + 1)..n {
                acc[i * n + j].add(pi * spins[j]);
            }
        }
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let c = acc[i * n + j].sum();
            entries[i * n + j] = c;
            entries[j * n + i] = c;
        }
    }
    CorrelationMatrix { n, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::gibbs_table;
    use crate::model::{sample_disorder, DisorderSample};
    use approx::assert_abs_diff_eq;

    #[test]
    fn free_spins_give_identity() {
        let s = sample_disorder(6, 1, 0, false).unwrap();
        let c = correlation_matrix(&gibbs_table(&s, 0.0).unwrap());
        for (a, b) in c.entries.iter().zip(&CorrelationMatrix::identity(6).entries) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_spins_tanh() {
        for (g, beta) in [(1.0, 1.0), (-0.4, 2.3), (2.0, 0.5)] {
            let s = DisorderSample::from_couplings(2, vec![g], None).unwrap();
            let c = correlation_matrix(&gibbs_table(&s, beta).unwrap());
            let expect = (beta * g / 2f64.sqrt()).tanh();
            assert_abs_diff_eq!(c.get(0, 1), expect, epsilon = 1e-14);
            assert_abs_diff_eq!(c.get(1, 0), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn psd_symmetric_unit_diagonal() {
        for seed in 0..10 {
            let s = sample_disorder(9, seed, 2, false).unwrap();
            let t = gibbs_table(&s, 0.5 + 0.2 * seed as f64).unwrap();
            let c = correlation_matrix(&t);
            let spectral = CorrelationMatrix::from_spectrum(&Spectrum::of(&t));
            for i in 0..9 {
                assert_eq!(c.get(i, i), 1.0);
                for j in 0..9 {
                    assert_eq!(c.get(i, j), c.get(j, i));
                    assert!(c.get(i, j).abs() <= 1.0 + 1e-15);
                    assert_abs_diff_eq!(c.get(i, j), spectral.get(i, j), epsilon = 1e-12);
                }
            }
            let m = nalgebra::DMatrix::from_row_slice(9, 9, &c.entries);
            let min = m.symmetric_eigenvalues().min();
            assert!(min >= -1e-9, "min eigenvalue {min}");
        }
    }
}
