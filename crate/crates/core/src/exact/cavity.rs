use crate::error::{Result, SkError};

use super::CorrelationMatrix;

/// Per-sample Gibbs averages used by the cavity expansion. `A` is the σ
/// replica measure, `B` the τ replica measure; the cavity spin is index
/// `n − 1` and `R⁻` keeps the `1/N` normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityContractions {
    /// `⟨R⁻(σ,τ)²⟩`
    pub r2_minus: f64,
    /// `⟨σ_N τ_N R⁻(σ,τ)⟩`
    pub f1: f64,
    /// `⟨R⁻(σ¹,τ¹) R⁻(σ²,τ¹) R⁻(σ¹,σ²)⟩`
    pub triple: f64,
    /// `⟨R(σ,τ)²⟩`
    pub r2_full: f64,
}

pub fn cavity_contractions(ca: &CorrelationMatrix, cb: &CorrelationMatrix) -> Result<CavityContractions> {
    if ca.n != cb.n {
        return Err(SkError::SizeMismatch {
            left: ca.n,
            right: cb.n,
        });
    }
    let n = ca.n;
    if n < 2 {
        return Err(SkError::SizeTooSmall { n, min: 2 });
    }
    let nf = n as f64;
    let last = n - 1;
    let mut inner = 0.0;
    for i in 0..last {
        for j in 0..last {
            inner += ca.get(i, j) * cb.get(i, j);
        }
    }
    let mut row = 0.0;
    for i in 0..last {
        row += ca.get(last, i) * cb.get(last, i);
    }
    // Σ_{i,j,k<N} CA_ik CA_jk CB_ij = Σ_k v_kᵀ CB v_k with v_k = CA[·,k]
    let mut triple = 0.0;
    let mut cbv = vec![0.0; last];
    for k in 0..last {
        for (i, out) in cbv.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..last {
                s += cb.get(i, j) * ca.get(j, k);
            }
            *out = s;
        }
        for (i, v) in cbv.iter().enumerate() {
            triple += ca.get(i, k) * v;
        }
    }
    Ok(CavityContractions {
        r2_minus: inner / (nf * nf),
        f1: row / nf,
        triple: triple / (nf * nf * nf),
        r2_full: (inner + 2.0 * row + 1.0) / (nf * nf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{correlation_matrix, coupled_tables, overlap_law, CoupledParams};
    use crate::model::sample_disorder;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_matrices() {
        let id = CorrelationMatrix::identity(7);
        let c = cavity_contractions(&id, &id).unwrap();
        assert_abs_diff_eq!(c.triple, 6.0 / 343.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c.r2_full, 1.0 / 7.0, epsilon = 1e-16);
        assert_eq!(c.f1, 0.0);
    }

    #[test]
    fn full_overlap_matches_overlap_law_and_decomposition() {
        let mut rng = crate::rng::stream(9, 0, crate::rng::StreamRole::Synthetic, 0);
        use rand::Rng;
        for k in 0..40 {
            let n = 3 + k % 6;
            let s = sample_disorder(n, 100 + k as u64, 0, true).unwrap();
            let beta = rng.random_range(0.0..1.5);
            let p = CoupledParams::new(rng.random(), rng.random()).unwrap();
            let (a, b) = coupled_tables(&s, beta, p).unwrap();
            let (ca, cb) = (correlation_matrix(&a), correlation_matrix(&b));
            let c = cavity_contractions(&ca, &cb).unwrap();
            let nf = n as f64;
            // the decomposition R = R⁻ + σ_N τ_N / N, evaluated independently
            let direct: f64 = ca.entries.iter().zip(&cb.entries).map(|(x, y)| x * y).sum::<f64>() / (nf * nf);
            assert_abs_diff_eq!(c.r2_full, direct, epsilon = 1e-12);
            assert_abs_diff_eq!(
                c.r2_full,
                c.r2_minus + 2.0 * c.f1 / nf + 1.0 / (nf * nf),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(c.r2_full, overlap_law(&a, &b).unwrap().moment(2), epsilon = 1e-10);
            assert!(c.triple >= 0.0);
        }
    }

    #[test]
    fn mismatch() {
        let a = CorrelationMatrix::identity(3);
        let b = CorrelationMatrix::identity(4);
        assert!(matches!(cavity_contractions(&a, &b), Err(SkError::SizeMismatch { .. })));
    }
}
