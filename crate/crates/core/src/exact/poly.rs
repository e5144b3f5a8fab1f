//! Multi-replica spin polynomials and their exact Gibbs averages.
//!
//! A monomial assigns a spin subset (bit mask) to every replica. Since
//! replicas are independent given the disorder and `σ_i² = 1`, the Gibbs
//! average of a monomial is the product of the per-replica Walsh coefficients
//! of the subsets. This turns any polynomial in overlaps into an exact
//! contraction over spectra without enumerating replica tuples.

use std::collections::BTreeMap;

use super::Spectrum;

/// Which measure a replica is drawn from: `A` for σ-type, `B` for τ-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaPoly {
    replicas: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl ReplicaPoly {
    pub fn zero(replicas: usize) -> Self {
        Self {
            replicas,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(replicas: usize, c: f64) -> Self {
        let mut p = Self::zero(replicas);
        if c != 0.0 {
            p.terms.insert(vec![0; replicas], c);
        }
        p
    }

    /// The single spin `σ^r_i`.
    pub fn spin(replicas: usize, r: usize, i: usize) -> Self {
        let mut key = vec![0; replicas];
        key[r] = 1 << i;
        let mut p = Self::zero(replicas);
        p.terms.insert(key, 1.0);
        p
    }

    /// `(1/n) Σ_{i < upto} σ^a_i σ^b_i`; `upto = n` gives `R`, `upto = n − 1`
    /// gives `R⁻`.
    pub fn overlap(replicas: usize, a: usize, b: usize, n: usize, upto: usize) -> Self {
        let mut p = Self::zero(replicas);
        let w = 1.0 / n as f64;
        for i in 0..upto {
            let mut key = vec![0u32; replicas];
            key[a] ^= 1 << i;
            key[b] ^= 1 << i;
            *p.terms.entry(key).or_insert(0.0) += w;
        }
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.replicas, other.replicas);
        let mut out = Self::zero(self.replicas);
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x ^ y).collect();
                *out.terms.entry(key).or_insert(0.0) += ca * cb;
            }
        }
        out.prune();
        out
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        assert_eq!(self.replicas, other.replicas);
        for (k, &c) in &other.terms {
            *self.terms.entry(k.clone()).or_insert(0.0) += scale * c;
        }
        self.prune();
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    /// Drop monomials with an odd subset on some replica; their average
    /// vanishes under flip-symmetric measures.
    pub fn even_part(&self) -> Self {
        let mut out = self.clone();
        out.terms.retain(|k, _| k.iter().all(|m| m.count_ones() % 2 == 0));
        out
    }

    /// Exact average with replica `r` drawn from `sides[r]`.
    pub fn evaluate(&self, sides: &[Side], a: &Spectrum, b: &Spectrum) -> f64 {
        assert_eq!(sides.len(), self.replicas);
        let mut acc = 0.0;
        for (key, &c) in &self.terms {
            let mut v = c;
            for (m, side) in key.iter().zip(sides) {
                if *m != 0 {
                    let spec = match side {
                        Side::A => a,
                        Side::B => b,
                    };
                    v *= spec.coeff(*m as usize);
                    if v == 0.0 {
                        break;
                    }
                }
            }
            acc += v;
        }
        acc
    }
}

impl std::ops::Add for &ReplicaPoly {
    type Output = ReplicaPoly;
    fn add(self, rhs: &ReplicaPoly) -> ReplicaPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

/// Replica layout for `pairs` copies of `ρ = (σ, τ)`: σ^l is replica `2l`
/// (side A), τ^l is replica `2l + 1` (side B).
#[derive(Debug, Clone, Copy)]
pub struct PairLayout {
    pub pairs: usize,
    pub n: usize,
}

impl PairLayout {
    pub fn replicas(&self) -> usize {
        2 * self.pairs
    }

    pub fn sigma(&self, l: usize) -> usize {
        2 * l
    }

    pub fn tau(&self, l: usize) -> usize {
        2 * l + 1
    }

    pub fn sides(&self) -> Vec<Side> {
        (0..self.replicas())
            .map(|r| if r % 2 == 0 { Side::A } else { Side::B })
            .collect()
    }

    pub fn overlap(&self, a: usize, b: usize) -> ReplicaPoly {
        ReplicaPoly::overlap(self.replicas(), a, b, self.n, self.n)
    }

    pub fn overlap_minus(&self, a: usize, b: usize) -> ReplicaPoly {
        ReplicaPoly::overlap(self.replicas(), a, b, self.n, self.n - 1)
    }

    pub fn last_spin(&self, r: usize) -> ReplicaPoly {
        ReplicaPoly::spin(self.replicas(), r, self.n - 1)
    }

    /// Covariance kernel of the cavity field between pairs `l` and `m`:
    /// `½β²(σ^l_N σ^m_N R⁻(σ^l,σ^m) + τ^l_N τ^m_N R⁻(τ^l,τ^m))
    ///  + ½β²t(σ^l_N τ^m_N R⁻(σ^l,τ^m) + τ^l_N σ^m_N R⁻(τ^l,σ^m))`.
    pub fn cavity_kernel(&self, l: usize, m: usize, beta: f64, t: f64) -> ReplicaPoly {
        let b2 = 0.5 * beta * beta;
        let term = |x: usize, y: usize| self.last_spin(x).mul(&self.last_spin(y)).mul(&self.overlap_minus(x, y));
        let mut u = ReplicaPoly::zero(self.replicas());
        u.add_scaled(&term(self.sigma(l), self.sigma(m)), b2);
        u.add_scaled(&term(self.tau(l), self.tau(m)), b2);
        u.add_scaled(&term(self.sigma(l), self.tau(m)), b2 * t);
        u.add_scaled(&term(self.tau(l), self.sigma(m)), b2 * t);
        u
    }

    /// Right-hand side of the Gaussian integration-by-parts formula for
    /// `∂_s E⟨f⟩_{t,s}`, where `f` depends on the first `k` pairs and the
    /// layout provides at least `k + 2` pairs:
    /// `Σ_{l,l'≤k} U(l,l')f − 2k Σ_{l≤k} U(l,k+1)f − k U(k+1,k+1)f
    ///  + k(k+1) U(k+1,k+2)f`.
    pub fn ibp_derivative(&self, f: &ReplicaPoly, k: usize, beta: f64, t: f64) -> ReplicaPoly {
        assert!(self.pairs >= k + 2);
        let kf = k as f64;
        let mut kernel = ReplicaPoly::zero(self.replicas());
        for l in 0..k {
            for m in 0..k {
                kernel.add_scaled(&self.cavity_kernel(l, m, beta, t), 1.0);
            }
            kernel.add_scaled(&self.cavity_kernel(l, k, beta, t), -2.0 * kf);
        }
        kernel.add_scaled(&self.cavity_kernel(k, k, beta, t), -kf);
        kernel.add_scaled(&self.cavity_kernel(k, k + 1, beta, t), kf * (kf + 1.0));
        kernel.mul(f)
    }
}
