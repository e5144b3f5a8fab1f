//! Disorder ensembles: free-energy samples, fluctuation statistics and
//! window scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SkError};
use crate::exact::{check_cap, gibbs_table, log_partition, overlap_law};
use crate::mc::{thermo_integration_f, TiConfig};
use crate::model::{nu, BetaSchedule, DisorderSample, ScheduledBeta};
use crate::rng::derive_seed;
use crate::stats::{
    ks_standard_normal, mean, mean_ci, normality_report, variance_ci, NormalityReport, Summary, DEFAULT_RESAMPLES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_list: Vec<usize>,
    pub schedule: BetaSchedule,
    pub m: usize,
    pub engine: Engine,
    pub t_nodes: usize,
    pub master_seed: u64,
    pub bootstrap_resamples: usize,
    /// also compute `E⟨(N(1−β²)R²)^k⟩` for `k = 1, 2, 3` (exact engine)
    pub overlap_moments: bool,
    pub mc: TiConfig,
}

impl EnsembleConfig {
    pub fn new(n_list: Vec<usize>, schedule: BetaSchedule, m: usize, master_seed: u64) -> Self {
        Self {
            n_list,
            schedule,
            m,
            engine: Engine::Exact,
            t_nodes: crate::interp::DEFAULT_T_NODES,
            master_seed,
            bootstrap_resamples: DEFAULT_RESAMPLES,
            overlap_moments: false,
            mc: TiConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(SkError::InvalidParam("empty size list".into()));
        }
        for &n in &self.n_list {
            if n == 0 {
                return Err(SkError::SizeTooSmall { n, min: 1 });
            }
            if self.engine == Engine::Exact {
                check_cap(n)?;
            }
        }
        if self.m < 100 {
            return Err(SkError::TooFewSamples { got: self.m, need: 100 });
        }
        if self.bootstrap_resamples < 2 {
            return Err(SkError::InvalidParam("need at least 2 bootstrap resamples".into()));
        }
        Ok(())
    }

    fn disorder(&self, n: usize, index: usize) -> Result<DisorderSample> {
        DisorderSample::sample(n, derive_seed(self.master_seed, &[n as u64]), index as u64, false)
    }

    fn seed(&self, n: usize, tag: u64) -> u64 {
        derive_seed(self.master_seed, &[n as u64, 0xe5, tag])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n: usize,
    pub beta: f64,
    pub c_n: f64,
    pub engine: Engine,
    /// `F_N` per disorder, in stream order
    pub f_values: Vec<f64>,
    pub mean_f: f64,
    pub variance: Summary,
    /// `ν(β_N)`, absent for `β ≥ 1`
    pub nu: Option<f64>,
    /// `(F − mean)/√ν`, empty when `ν` is absent or zero
    pub w: Vec<f64>,
    /// statistics of the sample-standardized `F`; absent for constant samples
    pub normality: Option<NormalityReport>,
    /// KS distance and p-value of `w` against the standard normal
    pub ks_w: Option<(f64, f64)>,
    /// `E⟨(N(1−β²)R²)^k⟩` for `k = 1, 2, 3`
    pub overlap_moments: Option<[Summary; 3]>,
    /// mean Monte Carlo standard error of `F` (MC engine)
    pub mc_std_err: Option<f64>,
}

impl EnsembleResult {
    pub fn ratio(&self) -> Option<Summary> {
        let nu = self.nu.filter(|v| *v > 0.0)?;
        let v = self.variance;
        Some(Summary {
            estimate: v.estimate / nu,
            se: v.se / nu,
            lo: v.lo / nu,
            hi: v.hi / nu,
        })
    }
}

struct Draw {
    f: f64,
    moments: Option<[f64; 3]>,
    mc_se: Option<f64>,
}

fn draw(cfg: &EnsembleConfig, n: usize, beta: f64, index: usize) -> Result<Draw> {
    let sample = cfg.disorder(n, index)?;
    match cfg.engine {
        Engine::Exact if cfg.overlap_moments => {
            let table = gibbs_table(&sample, beta)?;
            let law = overlap_law(&table, &table)?;
            let scale = n as f64 * (1.0 - beta * beta);
            let mut moments = [0.0; 3];
            for (k, m) in moments.iter_mut().enumerate() {
                let k = k as u32 + 1;
                *m = scale.powi(k as i32) * law.moment(2 * k);
            }
            Ok(Draw {
                f: table.log_z,
                moments: Some(moments),
                mc_se: None,
            })
        }
        Engine::Exact => Ok(Draw {
            f: log_partition(&sample, beta)?,
            moments: None,
            mc_se: None,
        }),
        Engine::Mc => {
            let seed = derive_seed(cfg.master_seed, &[n as u64, index as u64, 0x3c]);
            let r = thermo_integration_f(&sample, beta, &cfg.mc, seed)?;
            Ok(Draw {
                f: r.f_hat,
                moments: None,
                mc_se: Some(r.std_err),
            })
        }
    }
}

fn run_size(cfg: &EnsembleConfig, n: usize, sb: ScheduledBeta) -> Result<EnsembleResult> {
    let beta = sb.beta;
    let draws: Vec<Draw> = (0..cfg.m)
        .into_par_iter()
        .map(|d| draw(cfg, n, beta, d))
        .collect::<Result<_>>()?;
    let f_values: Vec<f64> = draws.iter().map(|d| d.f).collect();
    let mean_f = mean(&f_values);
    let variance = variance_ci(&f_values, cfg.bootstrap_resamples, cfg.seed(n, 1))?;
    let nu = nu(beta).ok();
    let w: Vec<f64> = match nu {
        Some(v) if v > 0.0 => f_values.iter().map(|f| (f - mean_f) / v.sqrt()).collect(),
        _ => Vec::new(),
    };
    let normality = match normality_report(&f_values) {
        Ok(r) => Some(r),
        Err(SkError::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let ks_w = (!w.is_empty()).then(|| ks_standard_normal(&w));
    let overlap_moments = if draws.iter().all(|d| d.moments.is_some()) {
        let mut out = [Summary::exact(0.0); 3];
        for (k, o) in out.iter_mut().enumerate() {
            let col: Vec<f64> = draws.iter().map(|d| d.moments.unwrap()[k]).collect();
            *o = mean_ci(&col, cfg.bootstrap_resamples, cfg.seed(n, 10 + k as u64))?;
        }
        Some(out)
    } else {
        None
    };
    let mc_std_err =
        (cfg.engine == Engine::Mc).then(|| mean(&draws.iter().map(|d| d.mc_se.unwrap()).collect::<Vec<_>>()));
    Ok(EnsembleResult {
        n,
        beta,
        c_n: sb.c_n,
        engine: cfg.engine,
        f_values,
        mean_f,
        variance,
        nu,
        w,
        normality,
        ks_w,
        overlap_moments,
        mc_std_err,
    })
}

/// One result per size in `cfg.n_list`, in the listed order.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<Vec<EnsembleResult>> {
    cfg.validate()?;
    cfg.n_list
        .iter()
        .map(|&n| run_size(cfg, n, cfg.schedule.beta_for(n)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRow {
    pub n: usize,
    /// `c·N^{−1/3} < 1`; inadmissible rows carry no statistics
    pub admissible: bool,
    pub result: Option<EnsembleResult>,
    /// `−½ln(c_N·N^{−1/3}) − β_N²/2`
    pub nu_closed: Option<f64>,
}

impl WindowRow {
    /// `|ν(β_N) − closed form|`
    pub fn nu_check(&self) -> Option<f64> {
        let r = self.result.as_ref()?;
        Some((r.nu? - self.nu_closed?).abs())
    }
}

/// Ensemble statistics along a window schedule; sizes where the schedule
/// is inadmissible are reported as such, and it is an error when none is
/// admissible.
pub fn window_scan(cfg: &EnsembleConfig) -> Result<Vec<WindowRow>> {
    if !cfg.schedule.is_window() {
        return Err(SkError::InvalidParam("window scan needs a window schedule".into()));
    }
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut first_err = None;
    for &n in &cfg.n_list {
        match cfg.schedule.beta_for(n) {
            Ok(sb) => {
                let r = run_size(cfg, n, sb)?;
                let x = sb.c_n / (n as f64).cbrt();
                rows.push(WindowRow {
                    n,
                    admissible: true,
                    nu_closed: Some(-0.5 * x.ln() - 0.5 * sb.beta * sb.beta),
                    result: Some(r),
                });
            }
            Err(e @ SkError::Inadmissible { .. }) => {
                first_err.get_or_insert(e);
                rows.push(WindowRow {
                    n,
                    admissible: false,
                    result: None,
                    nu_closed: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if rows.iter().all(|r| !r.admissible) {
        return Err(first_err.expect("at least one size"));
    }
    Ok(rows)
}

/// Successive values `v_k ± se_k` never increase by more than three
/// combined standard errors.
pub fn nonincreasing_within(values: &[(f64, f64)]) -> bool {
    values
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + 3.0 * (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt())
}

/// Every step increases by more than three combined standard errors.
pub fn monotone_blowup(values: &[(f64, f64)]) -> bool {
    values.len() >= 2
        && values
            .windows(2)
            .all(|w| w[1].0 - w[0].0 > 3.0 * (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt())
}

/// Trend summary of a window scan over its admissible sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowTrends {
    /// `(N, |Var/ν − 1|, se)` per admissible size
    pub ratio_gaps: Vec<(usize, f64, f64)>,
    pub ratio_gap_nonwidening: bool,
    pub abs_gap_nonwidening: bool,
    /// `Some(true)` when `E⟨(N(1−β²)R²)^k⟩` blows up monotonically
    pub moment_blowup: [Option<bool>; 3],
}

impl WindowTrends {
    pub fn ok(&self) -> bool {
        !self.ratio_gaps.is_empty() && self.ratio_gap_nonwidening && self.moment_blowup.iter().all(|b| *b != Some(true))
    }
}

pub fn window_trends(rows: &[WindowRow]) -> WindowTrends {
    let mut ratio_gaps = Vec::new();
    let mut abs_gaps = Vec::new();
    let mut moments: [Vec<(f64, f64)>; 3] = Default::default();
    for r in rows.iter().filter_map(|r| r.result.as_ref()) {
        if let (Some(nu), Some(ratio)) = (r.nu, r.ratio()) {
            ratio_gaps.push((r.n, (ratio.estimate - 1.0).abs(), ratio.se));
            abs_gaps.push(((r.variance.estimate - nu).abs(), r.variance.se));
        }
        if let Some(m) = r.overlap_moments {
            for (k, s) in m.iter().enumerate() {
                moments[k].push((s.estimate, s.se));
            }
        }
    }
    let rel: Vec<(f64, f64)> = ratio_gaps.iter().map(|&(_, g, se)| (g, se)).collect();
    WindowTrends {
        ratio_gap_nonwidening: nonincreasing_within(&rel),
        abs_gap_nonwidening: nonincreasing_within(&abs_gaps),
        moment_blowup: std::array::from_fn(|k| (!moments[k].is_empty()).then(|| monotone_blowup(&moments[k]))),
        ratio_gaps,
    }
}
