//! Interpolation functionals and the identity checks built on them.
//!
//! Every routine draws `samples` disorder realizations keyed by
//! `(seed, n, index)`, evaluates exact Gibbs averages per realization and
//! reduces in index order, so results do not depend on the thread count.

mod cavity;
mod ibp;
pub mod quadrature;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SkError};
use crate::exact::{check_cap, coupled_tables, CoupledParams, Spectrum};
use crate::model::{nu, BetaSchedule, DisorderSample};
use crate::rng::derive_seed;
use crate::stats::{mean_ci, variance_ci, Summary, DEFAULT_RESAMPLES};

pub use cavity::{taylor_terms, ExactChecks, TaylorBreakdown, DEFAULT_FD_STEP};
pub use ibp::{gibp_derivative_check, IbpCheck, IbpObservable, Stencil};
pub use quadrature::{QuadNode, QuadratureGrid};

pub const DEFAULT_T_NODES: usize = 16;

/// `ξ(x) = ½β²(x² − 1/n)`
pub fn xi(x: f64, beta: f64, n: usize) -> f64 {
    0.5 * beta * beta * (x * x - 1.0 / n as f64)
}

/// Size, temperature and sampling budget shared by the disorder-averaged checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Setup {
    pub n: usize,
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
    pub resamples: usize,
}

// labels separating bootstrap seeds of different statistics
const BOOT: u64 = 0xb007;

impl Setup {
    pub fn new(n: usize, beta: f64, samples: usize, seed: u64) -> Self {
        Self {
            n,
            beta,
            samples,
            seed,
            resamples: DEFAULT_RESAMPLES,
        }
    }

    pub fn with_resamples(mut self, resamples: usize) -> Self {
        self.resamples = resamples;
        self
    }

    fn validate(&self, min_samples: usize) -> Result<()> {
        if self.n < 2 {
            return Err(SkError::SizeTooSmall { n: self.n, min: 2 });
        }
        check_cap(self.n)?;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(SkError::BetaOutOfRange(self.beta));
        }
        if self.samples < min_samples {
            return Err(SkError::TooFewSamples {
                got: self.samples,
                need: min_samples,
            });
        }
        Ok(())
    }

    /// The `index`-th disorder realization, with auxiliary arrays.
    pub fn disorder(&self, index: usize) -> Result<DisorderSample> {
        DisorderSample::sample(self.n, derive_seed(self.seed, &[self.n as u64]), index as u64, true)
    }

    fn per_disorder<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&DisorderSample) -> Result<T> + Sync,
    {
        (0..self.samples)
            .into_par_iter()
            .map(|d| f(&self.disorder(d)?))
            .collect()
    }

    fn boot_seed(&self, tag: u64) -> u64 {
        derive_seed(self.seed, &[self.n as u64, BOOT, tag])
    }

    fn mean(&self, values: &[f64], tag: u64) -> Result<Summary> {
        mean_ci(values, self.resamples, self.boot_seed(tag))
    }
}

fn spectra(sample: &DisorderSample, beta: f64, t: f64, s: f64) -> Result<(Spectrum, Spectrum)> {
    let (a, b) = coupled_tables(sample, beta, CoupledParams::new(t, s)?)?;
    Ok((Spectrum::of(&a), Spectrum::of(&b)))
}

/// `N⟨R(σ,τ)²⟩ = (N + 2Σ_{i<j} ⟨σ_iσ_j⟩_A⟨σ_iσ_j⟩_B)/N`, exactly `1` when
/// all pair correlations vanish.
fn n_r2(a: &Spectrum, b: &Spectrum) -> f64 {
    let n = a.n;
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += a.pair(i, j) * b.pair(i, j);
        }
    }
    (n as f64 + 2.0 * acc) / n as f64
}

/// Per-disorder `N⟨R²⟩_t` along `ts` at `s = 1`.
fn n_r2_profile(sample: &DisorderSample, beta: f64, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let (a, b) = spectra(sample, beta, t, 1.0)?;
            Ok(n_r2(&a, &b))
        })
        .collect()
}

fn check_t(beta: f64, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(SkError::InvalidParam(format!("t = {t} outside [0, 1]")));
    }
    if beta * beta * t >= 1.0 {
        return Err(SkError::InvalidParam(format!(
            "1 − β²t must be positive (β = {beta}, t = {t})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRepresentation {
    /// sample variance of `F_N`
    pub lhs: Summary,
    /// `N∫₀¹ E⟨ξ(R)⟩_t dt`
    pub rhs: Summary,
    pub grid: QuadratureGrid,
    /// disorder mean of `N⟨R²⟩_t` at each node
    pub node_means: Vec<f64>,
    /// the two `3·se` intervals overlap
    pub consistent: bool,
}

/// Compare `Var F_N` with its interpolation representation on common disorder.
pub fn variance_representation(setup: &Setup, t_nodes: usize) -> Result<VarianceRepresentation> {
    setup.validate(100)?;
    let grid = QuadratureGrid::transformed(setup.beta, t_nodes)?;
    let ts: Vec<f64> = grid.ts().collect();
    let b2 = setup.beta * setup.beta;
    let rows = setup.per_disorder(|s| {
        let f = crate::exact::log_partition(s, setup.beta)?;
        let prof = n_r2_profile(s, setup.beta, &ts)?;
        // N⟨ξ(R)⟩ = ½β²(N⟨R²⟩ − 1)
        let integrand: Vec<f64> = prof.iter().map(|v| 0.5 * b2 * (v - 1.0)).collect();
        Ok((f, grid.integrate(&integrand), prof))
    })?;
    let fs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let node_means = (0..ts.len())
        .map(|k| rows.iter().map(|r| r.2[k]).sum::<f64>() / rows.len() as f64)
        .collect();
    let lhs = variance_ci(&fs, setup.resamples, setup.boot_seed(1))?;
    let rhs = setup.mean(&rhs, 2)?;
    Ok(VarianceRepresentation {
        consistent: lhs.overlaps(&rhs, 3.0),
        lhs,
        rhs,
        grid,
        node_means,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop1Residual {
    pub t: f64,
    pub target: f64,
    /// `N·E⟨R²⟩_t − 1/(1−β²t)`
    pub mean_residual: Summary,
    /// `E|N⟨R²⟩_t − 1/(1−β²t)|²`
    pub abs2_residual: Summary,
    /// largest per-sample `|residual|`
    pub max_abs: f64,
}

fn residuals(setup: &Setup, t: f64) -> Result<(f64, Vec<f64>)> {
    check_t(setup.beta, t)?;
    let target = 1.0 / (1.0 - setup.beta * setup.beta * t);
    let values = setup.per_disorder(|s| {
        let (a, b) = spectra(s, setup.beta, t, 1.0)?;
        Ok(n_r2(&a, &b) - target)
    })?;
    Ok((target, values))
}

pub fn prop1_residual(setup: &Setup, t: f64) -> Result<Prop1Residual> {
    setup.validate(2)?;
    let (target, res) = residuals(setup, t)?;
    let sq: Vec<f64> = res.iter().map(|r| r * r).collect();
    Ok(Prop1Residual {
        t,
        target,
        mean_residual: setup.mean(&res, 3)?,
        abs2_residual: setup.mean(&sq, 4)?,
        max_abs: res.iter().fold(0.0, |m, r| m.max(r.abs())),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinBound {
    /// `(β²/ν)∫₀¹ E|N⟨R²⟩_t − 1/(1−β²t)| dt`
    pub estimate: Summary,
    pub grid: QuadratureGrid,
    /// disorder mean of `|N⟨R²⟩_t − 1/(1−β²t)|` at each node
    pub node_means: Vec<f64>,
}

pub fn stein_bound(setup: &Setup, t_nodes: usize) -> Result<SteinBound> {
    setup.validate(2)?;
    let grid = QuadratureGrid::transformed(setup.beta, t_nodes)?;
    let ts: Vec<f64> = grid.ts().collect();
    if setup.beta == 0.0 {
        return Ok(SteinBound {
            estimate: Summary::exact(0.0),
            node_means: vec![0.0; ts.len()],
            grid,
        });
    }
    let b2 = setup.beta * setup.beta;
    let scale = b2 / nu(setup.beta)?;
    let rows = setup.per_disorder(|s| {
        let prof = n_r2_profile(s, setup.beta, &ts)?;
        Ok(prof
            .iter()
            .zip(&ts)
            .map(|(v, t)| (v - 1.0 / (1.0 - b2 * t)).abs())
            .collect::<Vec<f64>>())
    })?;
    let per: Vec<f64> = rows.iter().map(|r| scale * grid.integrate(r)).collect();
    let node_means = (0..ts.len())
        .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64)
        .collect();
    Ok(SteinBound {
        estimate: setup.mean(&per, 5)?,
        grid,
        node_means,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentProfile {
    pub ts: Vec<f64>,
    pub ks: Vec<u32>,
    /// `moments[i][j] = E⟨R^{2k_i}⟩_{t_j}`
    pub moments: Vec<Vec<Summary>>,
    /// `increments[i][j] = E⟨R^{2k_i}⟩_{t_{j+1}} − E⟨R^{2k_i}⟩_{t_j}` on common disorder
    pub increments: Vec<Vec<Summary>>,
    /// no increment is negative beyond `3·se`
    pub nondecreasing: bool,
}

/// `t ↦ E⟨R^{2k}⟩_t` on the grid `ts` for each `k`.
pub fn moment_profile(setup: &Setup, ts: &[f64], ks: &[u32]) -> Result<MomentProfile> {
    setup.validate(2)?;
    for &t in ts {
        check_t(0.0, t)?;
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SkError::InvalidParam("t grid must be strictly increasing".into()));
    }
    let rows = setup.per_disorder(|s| {
        ts.iter()
            .map(|&t| {
                let (a, b) = spectra(s, setup.beta, t, 1.0)?;
                let law = crate::exact::OverlapLaw::from_spectra(&a, &b)?;
                Ok(ks.iter().map(|&k| law.moment(2 * k)).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut moments = Vec::new();
    let mut increments = Vec::new();
    let mut nondecreasing = true;
    for (i, &k) in ks.iter().enumerate() {
        let mut row = Vec::new();
        let mut inc = Vec::new();
        for j in 0..ts.len() {
            let v: Vec<f64> = rows.iter().map(|r| r[j][i]).collect();
            row.push(setup.mean(&v, 100 + 10 * k as u64 + j as u64)?);
            if j + 1 < ts.len() {
                let d: Vec<f64> = rows.iter().map(|r| r[j + 1][i] - r[j][i]).collect();
                let s = setup.mean(&d, 1000 + 10 * k as u64 + j as u64)?;
                nondecreasing &= s.estimate + 3.0 * s.se >= 0.0;
                inc.push(s);
            }
        }
        moments.push(row);
        increments.push(inc);
    }
    Ok(MomentProfile {
        ts: ts.to_vec(),
        ks: ks.to_vec(),
        moments,
        increments,
        nondecreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropScanRow {
    pub n: usize,
    pub beta: f64,
    pub c_n: f64,
    pub residual: Prop1Residual,
    /// `N^{−1/2}(1−β²)^{−1}(1−β²t)^{−3/2}`
    pub shape: f64,
    /// `|mean residual| / shape`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropScan {
    pub t: f64,
    pub rows: Vec<PropScanRow>,
    /// largest ratio over the two smallest sizes
    pub l_fit: f64,
    /// sizes where `|mean| − 3·se` exceeds `l_fit·shape`
    pub violations: Vec<usize>,
}

impl PropScan {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn prop_shape(n: usize, beta: f64, t: f64) -> f64 {
    let b2 = beta * beta;
    1.0 / ((n as f64).sqrt() * (1.0 - b2) * (1.0 - b2 * t).powf(1.5))
}

/// Residual scan over sizes; the shape constant is fitted on the two
/// smallest sizes and checked on the rest.
pub fn prop_scan(
    n_list: &[usize],
    schedule: &BetaSchedule,
    t: f64,
    samples: usize,
    seed: u64,
    resamples: usize,
) -> Result<PropScan> {
    if n_list.is_empty() {
        return Err(SkError::InvalidParam("empty size list".into()));
    }
    let mut sizes = n_list.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows = Vec::new();
    for &n in &sizes {
        let sb = schedule.beta_for(n)?;
        if sb.beta >= 1.0 {
            return Err(SkError::BetaOutOfRange(sb.beta));
        }
        let setup = Setup::new(n, sb.beta, samples, seed).with_resamples(resamples);
        let residual = prop1_residual(&setup, t)?;
        let shape = prop_shape(n, sb.beta, t);
        rows.push(PropScanRow {
            n,
            beta: sb.beta,
            c_n: sb.c_n,
            residual,
            shape,
            ratio: residual.mean_residual.estimate.abs() / shape,
        });
    }
    let l_fit = rows.iter().take(2).fold(0.0f64, |m, r| m.max(r.ratio));
    let violations = rows
        .iter()
        .skip(2)
        .filter(|r| {
            let s = r.residual.mean_residual;
            s.estimate.abs() - 3.0 * s.se > l_fit * r.shape
        })
        .map(|r| r.n)
        .collect();
    Ok(PropScan {
        t,
        rows,
        l_fit,
        violations,
    })
}

#[cfg(test)]
mod tests;
