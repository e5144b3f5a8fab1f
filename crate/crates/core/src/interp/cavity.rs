use serde::Serialize;

use crate::error::{Result, SkError};
use crate::exact::poly::{ReplicaPoly, Side};
use crate::exact::{
    cavity_contractions, correlation_matrix, coupled_tables, gibbs_table, overlap_law, CorrelationMatrix,
    CoupledParams, Spectrum,
};
use crate::model::DisorderSample;
use crate::stats::Summary;

use super::{check_t, Setup};

pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Worst-case values of the per-sample identities over all disorders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactChecks {
    /// `max |⟨f₁⟩_{t,0}|`
    pub f1_at_zero: f64,
    /// `max |⟨R²⟩ − ⟨R⁻²⟩ − (2/N)⟨f₁⟩ − 1/N²|` at `s ∈ {0, 1}`, with `⟨R²⟩`
    /// taken from the overlap law
    pub algebra: f64,
    /// `min` of the triple-overlap term at `s ∈ {0, 1}`
    pub triple_min: f64,
    /// `max |⟨R²⟩ − 1/N − mean_c ⟨σ_cτ_c R^{(−c)}⟩|` at `s = 1`
    pub symmetrized_identity: f64,
    /// `max |mean_c ⟨R^{(−c)}²⟩ − 1/N² − ((N−2)/N)⟨R²⟩|` at `s = 1`
    pub symmetrized_r_plus: f64,
    /// `min (1/N²)Σ_ij (⟨σ₁σ₂⟩⟨σ_iσ_j⟩)²` at `t = 1`
    pub clt2_min: f64,
    /// `max |matrix route − replica-polynomial route|` for the quantity above
    pub clt2_routes: f64,
}

impl ExactChecks {
    fn identity() -> Self {
        Self {
            f1_at_zero: 0.0,
            algebra: 0.0,
            triple_min: f64::INFINITY,
            symmetrized_identity: 0.0,
            symmetrized_r_plus: 0.0,
            clt2_min: f64::INFINITY,
            clt2_routes: 0.0,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            f1_at_zero: self.f1_at_zero.max(o.f1_at_zero),
            algebra: self.algebra.max(o.algebra),
            triple_min: self.triple_min.min(o.triple_min),
            symmetrized_identity: self.symmetrized_identity.max(o.symmetrized_identity),
            symmetrized_r_plus: self.symmetrized_r_plus.max(o.symmetrized_r_plus),
            clt2_min: self.clt2_min.min(o.clt2_min),
            clt2_routes: self.clt2_routes.max(o.clt2_routes),
        }
    }

    /// All equalities within `tol`, all nonnegativity checks above `−tol`.
    pub fn pass(&self, tol: f64) -> bool {
        self.f1_at_zero <= tol
            && self.algebra <= tol
            && self.triple_min >= -tol
            && self.symmetrized_identity <= tol
            && self.symmetrized_r_plus <= tol
            && self.clt2_min >= -tol
            && self.clt2_routes <= tol
    }
}

/// Cavity expansion of `E⟨f₁⟩_{t,1}` around `s = 0`, with
/// `f₁ = σ_Nτ_N R⁻(σ,τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorBreakdown {
    pub n: usize,
    pub beta: f64,
    pub t: f64,
    pub h: f64,
    /// `E⟨f₁⟩_{t,1}`
    pub value_s1: Summary,
    /// `E⟨f₁⟩_{t,0}`
    pub term_0: Summary,
    /// `β²t·E⟨R⁻²⟩_{t,0}`
    pub term_1: Summary,
    /// `−2β⁴t·E⟨R⁻(σ¹,τ¹)R⁻(σ²,τ¹)R⁻(σ¹,σ²)⟩_{t,0}`
    pub term_2: Summary,
    pub remainder: Summary,
    /// one-sided second-order difference of `E⟨f₁⟩_{t,s}` at `s = 0`
    pub fd_slope: Summary,
    /// `fd_slope − term_1`
    pub first_order_gap: Summary,
    /// `E⟨R²⟩_{t,1} − 1/N − E⟨f₁⟩_{t,1}`
    pub identity_gap: Summary,
    /// `E⟨R⁻²⟩_{t,1} − 1/N² − ((N−2)/N)E⟨R²⟩_{t,1}`
    pub r_plus_gap: Summary,
    pub exact: ExactChecks,
    /// `N = 2`: `R⁻` has a single coordinate and the triple term is rank one
    pub degenerate: bool,
}

struct Row {
    value_s1: f64,
    term_0: f64,
    term_1: f64,
    term_2: f64,
    fd: f64,
    identity_gap: f64,
    r_plus_gap: f64,
    exact: ExactChecks,
}

fn matrices(sample: &DisorderSample, beta: f64, t: f64, s: f64) -> Result<(CorrelationMatrix, CorrelationMatrix, f64)> {
    let (a, b) = coupled_tables(sample, beta, CoupledParams::new(t, s)?)?;
    let r2 = overlap_law(&a, &b)?.moment(2);
    Ok((correlation_matrix(&a), correlation_matrix(&b), r2))
}

/// `⟨σ₁σ₂ τ₁τ₂ R(σ',τ')²⟩` with all four replicas from the same measure.
fn clt2_poly(n: usize) -> ReplicaPoly {
    let r = ReplicaPoly::overlap(4, 2, 3, n, n);
    let mut p = ReplicaPoly::constant(4, 1.0);
    for rep in [0, 1] {
        p = p.mul(&ReplicaPoly::spin(4, rep, 0)).mul(&ReplicaPoly::spin(4, rep, 1));
    }
    p.mul(&r).mul(&r)
}

fn symmetrized(ca: &CorrelationMatrix, cb: &CorrelationMatrix, r2: f64) -> (f64, f64) {
    let n = ca.n;
    let nf = n as f64;
    let prod = |i: usize, j: usize| ca.get(i, j) * cb.get(i, j);
    let total: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| prod(i, j))
        .sum();
    let mut f1_mean = 0.0;
    let mut r2_minus_mean = 0.0;
    for c in 0..n {
        let row: f64 = (0..n).filter(|&i| i != c).map(|i| prod(c, i)).sum();
        f1_mean += row / nf;
        r2_minus_mean += (total - 2.0 * row - 1.0) / (nf * nf);
    }
    f1_mean /= nf;
    r2_minus_mean /= nf;
    (
        (r2 - 1.0 / nf - f1_mean).abs(),
        (r2_minus_mean - 1.0 / (nf * nf) - (nf - 2.0) / nf * r2).abs(),
    )
}

fn row(sample: &DisorderSample, beta: f64, t: f64, h: f64, clt2: &ReplicaPoly) -> Result<Row> {
    let n = sample.n;
    let nf = n as f64;
    let (ca1, cb1, r2_1) = matrices(sample, beta, t, 1.0)?;
    let (ca0, cb0, r2_0) = matrices(sample, beta, t, 0.0)?;
    let c1 = cavity_contractions(&ca1, &cb1)?;
    let c0 = cavity_contractions(&ca0, &cb0)?;
    let f1_at = |s: f64| -> Result<f64> {
        let (a, b, _) = matrices(sample, beta, t, s)?;
        Ok(cavity_contractions(&a, &b)?.f1)
    };
    let fd = (4.0 * (f1_at(h)? - c0.f1) - (f1_at(2.0 * h)? - c0.f1)) / (2.0 * h);

    let (sym_id, sym_rp) = symmetrized(&ca1, &cb1, r2_1);
    let plain = gibbs_table(sample, beta)?;
    let c = correlation_matrix(&plain);
    let c01 = c.get(0, 1);
    let clt2_matrix = c.entries.iter().map(|x| (c01 * x).powi(2)).sum::<f64>() / (nf * nf);
    let spec = Spectrum::of(&plain);
    let clt2_value = clt2.evaluate(&[Side::A; 4], &spec, &spec);

    let b2 = beta * beta;
    let term_1 = b2 * t * c0.r2_minus;
    let term_2 = -2.0 * b2 * b2 * t * c0.triple;
    Ok(Row {
        value_s1: c1.f1,
        term_0: c0.f1,
        term_1,
        term_2,
        fd,
        identity_gap: r2_1 - 1.0 / nf - c1.f1,
        r_plus_gap: c1.r2_minus - 1.0 / (nf * nf) - (nf - 2.0) / nf * r2_1,
        exact: ExactChecks {
            f1_at_zero: c0.f1.abs(),
            algebra: (r2_1 - c1.r2_full).abs().max((r2_0 - c0.r2_full).abs()),
            triple_min: c1.triple.min(c0.triple),
            symmetrized_identity: sym_id,
            symmetrized_r_plus: sym_rp,
            clt2_min: clt2_matrix,
            clt2_routes: (clt2_matrix - clt2_value).abs(),
        },
    })
}

/// Terms of the cavity expansion at interpolation time `t`, finite-difference
/// step `h` for the first-order check.
pub fn taylor_terms(setup: &Setup, t: f64, h: f64) -> Result<TaylorBreakdown> {
    setup.validate(2)?;
    check_t(0.0, t)?;
    if !(h > 0.0 && h <= 0.1) {
        return Err(SkError::InvalidParam(format!(
            "finite-difference step {h} outside (0, 0.1]"
        )));
    }
    let clt2 = clt2_poly(setup.n);
    let rows = setup.per_disorder(|s| row(s, setup.beta, t, h, &clt2))?;
    let col = |f: fn(&Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let exact = rows.iter().fold(ExactChecks::identity(), |acc, r| acc.merge(r.exact));
    Ok(TaylorBreakdown {
        n: setup.n,
        beta: setup.beta,
        t,
        h,
        value_s1: setup.mean(&col(|r| r.value_s1), 20)?,
        term_0: setup.mean(&col(|r| r.term_0), 21)?,
        term_1: setup.mean(&col(|r| r.term_1), 22)?,
        term_2: setup.mean(&col(|r| r.term_2), 23)?,
        remainder: setup.mean(&col(|r| r.value_s1 - r.term_0 - r.term_1 - r.term_2), 24)?,
        fd_slope: setup.mean(&col(|r| r.fd), 25)?,
        first_order_gap: setup.mean(&col(|r| r.fd - r.term_1), 26)?,
        identity_gap: setup.mean(&col(|r| r.identity_gap), 27)?,
        r_plus_gap: setup.mean(&col(|r| r.r_plus_gap), 28)?,
        exact,
        degenerate: setup.n == 2,
    })
}
