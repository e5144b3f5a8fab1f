use crate::error::{Result, SkError};

use super::wht::wht_in_place;
use super::GibbsTable;

/// Walsh coefficients of a probability vector: `coeffs[S] = ⟨Π_{i∈S} σ_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub coeffs: Vec<f64>,
    /// The source measure was exactly invariant under the global flip, so all
    /// odd-order coefficients are zero.
    pub flip_symmetric: bool,
}

fn is_flip_symmetric(probs: &[f64]) -> bool {
    let mask = probs.len() - 1;
    probs[..probs.len() / 2]
        .iter()
        .enumerate()
        .all(|(x, &p)| p == probs[x ^ mask])
}

impl Spectrum {
    pub fn of(table: &GibbsTable) -> Self {
        Self::from_probs(table.n, &table.probs)
    }

    pub fn from_probs(n: usize, probs: &[f64]) -> Self {
        let size = 1usize << n;
        debug_assert_eq!(probs.len(), size);
        if n >= 1 && is_flip_symmetric(probs) {
            // Only the top-bit-clear half is needed: for even |S| the
            // coefficient is twice the half-cube transform, for odd |S| zero.
            let half = size / 2;
            let mut low = probs[..half].to_vec();
            wht_in_place(&mut low).expect("power of two");
            let coeffs = (0..size)
                .map(|s: usize| {
                    if s.count_ones().is_multiple_of(2) {
                        2.0 * low[s & (half - 1)]
                    } else {
                        0.0
                    }
                })
                .collect();
            Self {
                n,
                coeffs,
                flip_symmetric: true,
            }
        } else {
            let mut coeffs = probs.to_vec();
            wht_in_place(&mut coeffs).expect("power of two");
            Self {
                n,
                coeffs,
                flip_symmetric: false,
            }
        }
    }

    #[inline]
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    /// `⟨σ_i σ_j⟩` for `i ≠ j`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(1 << i) | (1 << j)]
    }
}

/// Law of the number of disagreeing coordinates between two independent
/// replicas; `q[w]` belongs to the overlap value `(n − 2w)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapLaw {
    pub n: usize,
    pub q: Vec<f64>,
}

impl OverlapLaw {
    pub fn overlap_value(&self, w: usize) -> f64 {
        (self.n as f64 - 2.0 * w as f64) / self.n as f64
    }

    /// `⟨R^k⟩ = Σ_w q[w]·r(w)^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.q
            .iter()
            .enumerate()
            .map(|(w, &p)| p * self.overlap_value(w).powi(k as i32))
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }

    /// XOR-convolution of the two measures, grouped by Hamming weight.
    pub fn from_spectra(a: &Spectrum, b: &Spectrum) -> Result<Self> {
        if a.n != b.n {
            return Err(SkError::SizeMismatch { left: a.n, right: b.n });
        }
        let n = a.n;
        let size = 1usize << n;
        let mut q = vec![0.0; n + 1];
        if a.flip_symmetric && b.flip_symmetric {
            let half = size / 2;
            let top = half;
            // Each low mask appears once with the parity-fixing top bit.
            let mut prod: Vec<f64> = (0..half)
                .map(|s: usize| {
                    let full = if s.count_ones().is_multiple_of(2) { s } else { s | top };
                    a.coeffs[full] * b.coeffs[full]
                })
                .collect();
            wht_in_place(&mut prod)?;
            let norm = 1.0 / size as f64;
            for (x, &v) in prod.iter().enumerate() {
                let w = x.count_ones() as usize;
                let p = v * norm;
                q[w] += p;
                q[n - w] += p;
            }
        } else {
            let mut prod: Vec<f64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).collect();
            wht_in_place(&mut prod)?;
            let norm = 1.0 / size as f64;
            for (x, &v) in prod.iter().enumerate() {
                q[x.count_ones() as usize] += v * norm;
            }
        }
        for p in q.iter_mut() {
            // rounding can leave values a few ulps below zero
            *p = p.max(0.0);
        }
        Ok(Self { n, q })
    }
}

/// Exact law of `popcount(σ ⊕ τ)` for `σ ~ pa`, `τ ~ pb` independent.
pub fn overlap_law(pa: &GibbsTable, pb: &GibbsTable) -> Result<OverlapLaw> {
    if pa.n != pb.n {
        return Err(SkError::SizeMismatch {
            left: pa.n,
            right: pb.n,
        });
    }
    OverlapLaw::from_spectra(&Spectrum::of(pa), &Spectrum::of(pb))
}

pub fn overlap_moment(law: &OverlapLaw, k: u32) -> f64 {
    law.moment(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{correlation_matrix, coupled_tables, gibbs_table, CoupledParams};
    use crate::model::sample_disorder;
    use approx::assert_abs_diff_eq;

    fn table(n: usize, probs: Vec<f64>) -> GibbsTable {
        GibbsTable {
            n,
            beta: 0.0,
            log_z: 0.0,
            probs,
        }
    }

    fn brute(pa: &GibbsTable, pb: &GibbsTable) -> Vec<f64> {
        let mut q = vec![0.0; pa.n + 1];
        for (x, &p) in pa.probs.iter().enumerate() {
            for (y, &r) in pb.probs.iter().enumerate() {
                q[(x ^ y).count_ones() as usize] += p * r;
            }
        }
        q
    }

    #[test]
    fn uniform_single_spin() {
        let u = table(1, vec![0.5, 0.5]);
        assert_eq!(overlap_law(&u, &u).unwrap().q, vec![0.5, 0.5]);
    }

    #[test]
    fn point_masses() {
        let mut probs = vec![0.0; 32];
        probs[13] = 1.0;
        let d = table(5, probs);
        let law = overlap_law(&d, &d).unwrap();
        assert_eq!(law.q, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(law.moment(3), 1.0);
    }

    #[test]
    fn matches_pair_enumeration() {
        for n in [2, 5, 8] {
            let s = sample_disorder(n, 17, 3, true).unwrap();
            let a = gibbs_table(&s, 0.7).unwrap();
            let (ca, cb) = coupled_tables(&s, 0.7, CoupledParams::new(0.4, 0.6).unwrap()).unwrap();
            for (x, y) in [(&a, &a), (&ca, &cb)] {
                let law = overlap_law(x, y).unwrap();
                for (p, r) in law.q.iter().zip(brute(x, y)) {
                    assert_abs_diff_eq!(*p, r, epsilon = 1e-12);
                }
                assert_abs_diff_eq!(law.total(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn moments() {
        let s = sample_disorder(10, 4, 4, false).unwrap();
        let free = gibbs_table(&s, 0.0).unwrap();
        let law = overlap_law(&free, &free).unwrap();
        assert_eq!(law.moment(0), law.total());
        assert_abs_diff_eq!(law.moment(0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(law.moment(2), 0.1, epsilon = 1e-14);

        let t = gibbs_table(&s, 1.1).unwrap();
        let law = overlap_law(&t, &t).unwrap();
        let c = correlation_matrix(&t);
        let via_matrix: f64 = c.entries.iter().map(|x| x * x).sum::<f64>() / 100.0;
        assert_abs_diff_eq!(law.moment(2), via_matrix, epsilon = 1e-10);
        // symmetric measures give a symmetric law
        for w in 0..=10 {
            assert_abs_diff_eq!(law.q[w], law.q[10 - w], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(law.moment(1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_spectrum_matches_full_transform() {
        let s = sample_disorder(7, 8, 0, false).unwrap();
        let t = gibbs_table(&s, 0.9).unwrap();
        let fast = Spectrum::of(&t);
        assert!(fast.flip_symmetric);
        let mut full = t.probs.clone();
        wht_in_place(&mut full).unwrap();
        for (a, b) in fast.coeffs.iter().zip(&full) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn size_mismatch() {
        let a = table(1, vec![0.5, 0.5]);
        let b = table(2, vec![0.25; 4]);
        assert_eq!(
            overlap_law(&a, &b).unwrap_err(),
            SkError::SizeMismatch { left: 1, right: 2 }
        );
    }
}
