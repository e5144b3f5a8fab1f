use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{run_ensemble, window_scan, window_trends, Engine, EnsembleConfig};
use crate::error::{Result, SkError};
use crate::exact::{log_partition, EXACT_CAP};
use crate::interp::{
    gibp_derivative_check, moment_profile, prop_scan, stein_bound, taylor_terms, variance_representation,
    IbpObservable, Setup,
};
use crate::mc::{thermo_integration_f, TiConfig};
use crate::model::{BetaSchedule, DisorderSample};
use crate::rng::derive_seed;
use crate::stats::{Summary, KOLMOGOROV_SD};

use super::csv::{Cell, CsvTable};
use super::{
    Cli, CltArgs, Command, EngineArg, IdentitiesArgs, McFArgs, Outcome, PropScanArgs, VarRepArgs, WindowKind,
    WindowScanArgs,
};

/// Tolerance of the per-sample identities.
const EXACT_TOL: f64 = 1e-10;

pub(super) fn dispatch(cli: &Cli) -> Result<Outcome> {
    let t = cli.threads;
    match &cli.command {
        Command::VarRep(a) => var_rep(a, config_json(a, t)),
        Command::WindowScan(a) => window(a, config_json(a, t)),
        Command::Identities(a) => identities(a, config_json(a, t)),
        Command::Clt(a) => clt(a, config_json(a, t)),
        Command::McF(a) => mc_f(a, config_json(a, t)),
        Command::PropScan(a) => prop(a, config_json(a, t)),
    }
}

/// Resolved arguments for the manifest.
fn config_json<T: Serialize>(args: &T, threads: Option<usize>) -> serde_json::Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    v["threads"] = serde_json::json!(threads);
    v
}

fn summary_cells(s: &Summary) -> Vec<Cell> {
    vec![s.estimate.into(), s.se.into(), s.lo.into(), s.hi.into()]
}

fn var_rep(a: &VarRepArgs, config: serde_json::Value) -> Result<Outcome> {
    let setup = Setup::new(a.n, a.beta, a.m, a.seed).with_resamples(a.resamples);
    let r = variance_representation(&setup, a.t_nodes)?;
    let mut t = CsvTable::new(
        "skfluct.var_rep.v1",
        &["side", "t", "weight", "estimate", "se", "ci_lo", "ci_hi"],
    );
    t.note("lhs: sample variance of F; rhs: N * integral of E<xi(R)>_t over t; node: E[N<R^2>_t]");
    for (side, s) in [("lhs", &r.lhs), ("rhs", &r.rhs)] {
        let mut row = vec![side.into(), Cell::Empty, Cell::Empty];
        row.extend(summary_cells(s));
        t.push(row);
    }
    for (node, m) in r.grid.nodes.iter().zip(&r.node_means) {
        t.push(vec![
            "node".into(),
            node.t.into(),
            node.weight.into(),
            (*m).into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    let mut report = vec![format!(
        "var-rep: lhs = {} ± {}, rhs = {} ± {}",
        r.lhs.estimate, r.lhs.se, r.rhs.estimate, r.rhs.se
    )];
    if !r.consistent {
        report.push("FAIL: the 3-sigma intervals of lhs and rhs do not overlap".into());
    }
    Ok(Outcome {
        table: t,
        passed: r.consistent,
        seed: a.seed,
        config,
        report,
    })
}

fn window(a: &WindowScanArgs, config: serde_json::Value) -> Result<Outcome> {
    let schedule = match a.kind {
        WindowKind::BetaSq => BetaSchedule::BetaSqWindow { c: a.c },
        WindowKind::Beta => BetaSchedule::BetaWindow { c: a.c },
    };
    let mut cfg = EnsembleConfig::new(a.n_list.clone(), schedule, a.m, a.seed);
    cfg.bootstrap_resamples = a.resamples;
    cfg.engine = match a.engine {
        EngineArg::Exact => Engine::Exact,
        EngineArg::Mc => Engine::Mc,
    };
    cfg.overlap_moments = a.moments && cfg.engine == Engine::Exact;
    cfg.mc = TiConfig {
        grid_size: a.grid_size,
        sweeps: a.sweeps,
        ..TiConfig::default()
    };
    let rows = window_scan(&cfg)?;
    let mut t = CsvTable::new(
        "skfluct.window_scan.v1",
        &[
            "n",
            "admissible",
            "beta",
            "c_n",
            "var",
            "var_se",
            "var_lo",
            "var_hi",
            "nu",
            "nu_closed",
            "ratio",
            "ratio_lo",
            "ratio_hi",
            "ks",
            "ad",
            "rk1",
            "rk1_se",
            "rk2",
            "rk2_se",
            "rk3",
            "rk3_se",
        ],
    );
    t.note("rk<k>: E<(N(1-beta^2)R^2)^k>; ks and ad compare the sample-standardized F with N(0,1)");
    let mut report = Vec::new();
    for row in &rows {
        let Some(r) = &row.result else {
            report.push(format!("window-scan: N = {} inadmissible for c = {}", row.n, a.c));
            let mut cells = vec![row.n.into(), false.into()];
            cells.resize(t.columns.len(), Cell::Empty);
            t.push(cells);
            continue;
        };
        let ratio = r.ratio();
        let mut cells = vec![
            r.n.into(),
            true.into(),
            r.beta.into(),
            r.c_n.into(),
            r.variance.estimate.into(),
            r.variance.se.into(),
            r.variance.lo.into(),
            r.variance.hi.into(),
            r.nu.into(),
            row.nu_closed.into(),
            ratio.map(|s| s.estimate).into(),
            ratio.map(|s| s.lo).into(),
            ratio.map(|s| s.hi).into(),
            r.normality.map(|s| s.ks).into(),
            r.normality.map(|s| s.ad).into(),
        ];
        for k in 0..3 {
            let m = r.overlap_moments.map(|m| m[k]);
            cells.push(m.map(|s| s.estimate).into());
            cells.push(m.map(|s| s.se).into());
        }
        t.push(cells);
    }
    let trends = window_trends(&rows);
    report.push(format!(
        "window-scan: |Var/nu - 1| non-widening across admissible sizes: {}",
        trends.ratio_gap_nonwidening
    ));
    report.push(format!(
        "window-scan: |Var - nu| non-widening across admissible sizes: {}",
        trends.abs_gap_nonwidening
    ));
    for (k, b) in trends.moment_blowup.iter().enumerate() {
        if let Some(b) = b {
            report.push(format!("window-scan: k = {} moment blow-up: {b}", k + 1));
        }
    }
    Ok(Outcome {
        table: t,
        passed: true,
        seed: a.seed,
        config,
        report,
    })
}

struct Checks {
    table: CsvTable,
    failures: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            table: CsvTable::new(
                "skfluct.identities.v1",
                &["check", "kind", "estimate", "se", "ci_lo", "ci_hi", "tolerance", "pass"],
            ),
            failures: Vec::new(),
        }
    }

    fn exact(&mut self, name: &str, value: f64, pass: bool) {
        if !pass {
            self.failures.push(format!("FAIL: {name} = {value}"));
        }
        self.table.push(vec![
            name.into(),
            "exact".into(),
            value.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            EXACT_TOL.into(),
            pass.into(),
        ]);
    }

    fn row(&mut self, name: &str, kind: &str, s: &Summary, pass: Option<bool>) {
        if pass == Some(false) {
            self.failures
                .push(format!("FAIL: {name} = {} ± {} (3-sigma excludes 0)", s.estimate, s.se));
        }
        let mut cells = vec![name.into(), kind.into()];
        cells.extend(summary_cells(s));
        cells.push(if pass.is_some() { Cell::Num(3.0) } else { Cell::Empty });
        cells.push(pass.into());
        self.table.push(cells);
    }

    fn gap(&mut self, name: &str, s: &Summary) {
        self.row(name, "statistical", s, Some(s.within_sigma(0.0, 3.0)));
    }
}

fn identities(a: &IdentitiesArgs, config: serde_json::Value) -> Result<Outcome> {
    let setup = Setup::new(a.n, a.beta, a.m, a.seed).with_resamples(a.resamples);
    let mut report = Vec::new();
    if a.n == 2 {
        report.push("warning: n = 2 leaves one inner spin; cavity terms are degenerate (rank one)".to_string());
    }
    let tb = taylor_terms(&setup, a.t, a.h)?;
    let mut c = Checks::new();
    c.table
        .note("exact rows give the worst case over disorders; tolerance is absolute");
    c.table
        .note("statistical rows pass when estimate +- tolerance*se contains 0");
    let e = tb.exact;
    c.exact("f1_at_s0", e.f1_at_zero, e.f1_at_zero <= EXACT_TOL);
    c.exact("r_rminus_algebra", e.algebra, e.algebra <= EXACT_TOL);
    c.exact("triple_min", e.triple_min, e.triple_min >= -EXACT_TOL);
    c.exact(
        "symmetrized_identity",
        e.symmetrized_identity,
        e.symmetrized_identity <= EXACT_TOL,
    );
    c.exact(
        "symmetrized_r_plus",
        e.symmetrized_r_plus,
        e.symmetrized_r_plus <= EXACT_TOL,
    );
    c.exact("clt2_min", e.clt2_min, e.clt2_min >= -EXACT_TOL);
    c.exact("clt2_routes", e.clt2_routes, e.clt2_routes <= EXACT_TOL);
    for (name, s) in [
        ("value_s1", &tb.value_s1),
        ("term_0", &tb.term_0),
        ("term_1", &tb.term_1),
        ("term_2", &tb.term_2),
        ("remainder", &tb.remainder),
        ("fd_slope", &tb.fd_slope),
    ] {
        c.row(name, "info", s, None);
    }
    c.gap("first_order_gap", &tb.first_order_gap);
    c.gap("identity_gap", &tb.identity_gap);
    c.gap("r_plus_gap", &tb.r_plus_gap);
    for obs in IbpObservable::ALL {
        for s0 in [0.0, 0.5] {
            let r = gibp_derivative_check(&setup, obs, a.t, s0, a.h)?;
            c.gap(&format!("ibp_gap:{}:s0={s0}", obs.name()), &r.gap);
        }
    }
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    let prof = moment_profile(&setup, &ts, &[1, 2])?;
    for (i, k) in prof.ks.iter().enumerate() {
        for (j, inc) in prof.increments[i].iter().enumerate() {
            let name = format!("monotone:k={k}:t={}->{}", ts[j], ts[j + 1]);
            c.row(&name, "statistical", inc, Some(inc.estimate + 3.0 * inc.se >= 0.0));
        }
    }
    let passed = c.failures.is_empty();
    report.extend(c.failures);
    Ok(Outcome {
        table: c.table,
        passed,
        seed: a.seed,
        config,
        report,
    })
}

fn clt(a: &CltArgs, config: serde_json::Value) -> Result<Outcome> {
    let mut cfg = EnsembleConfig::new(vec![a.n], BetaSchedule::Fixed { beta: a.beta }, a.m, a.seed);
    cfg.bootstrap_resamples = a.resamples;
    let r = run_ensemble(&cfg)?.remove(0);
    let normality = r
        .normality
        .ok_or(SkError::Degenerate("free energy sample has zero variance"))?;
    let (ks_w, ks_w_p) = r.ks_w.ok_or(SkError::BetaOutOfRange(a.beta))?;
    let stein = stein_bound(
        &Setup::new(a.n, a.beta, a.stein_m, a.seed).with_resamples(a.resamples),
        a.t_nodes,
    )?;
    let ks_err = KOLMOGOROV_SD / (a.m as f64).sqrt();
    let within = ks_w <= stein.estimate.estimate + 3.0 * ks_err;
    let passed = normality.ks_pvalue > 0.01 && within;
    let mut t = CsvTable::new(
        "skfluct.clt.v1",
        &[
            "n",
            "beta",
            "m",
            "nu",
            "var",
            "var_lo",
            "var_hi",
            "ks",
            "ks_pvalue",
            "ad",
            "skew",
            "ex_kurt",
            "ks_w",
            "ks_w_pvalue",
            "stein_bound",
            "stein_se",
            "ks_sampling_error",
            "pass",
        ],
    );
    t.note(
        "total variation is not estimable from samples; the Kolmogorov-Smirnov distance (a lower bound) is reported",
    );
    t.note("ks: sample-standardized F; ks_w: W = (F - mean)/sqrt(nu)");
    t.push(vec![
        a.n.into(),
        a.beta.into(),
        a.m.into(),
        r.nu.into(),
        r.variance.estimate.into(),
        r.variance.lo.into(),
        r.variance.hi.into(),
        normality.ks.into(),
        normality.ks_pvalue.into(),
        normality.ad.into(),
        normality.skew.into(),
        normality.ex_kurt.into(),
        ks_w.into(),
        ks_w_p.into(),
        stein.estimate.estimate.into(),
        stein.estimate.se.into(),
        ks_err.into(),
        passed.into(),
    ]);
    let mut report = vec![format!(
        "clt: KS p-value {}, KS(W) {} vs bound {} + 3*{}",
        normality.ks_pvalue, ks_w, stein.estimate.estimate, ks_err
    )];
    if !passed {
        report.push("FAIL: normality or Stein-bound check".into());
    }
    Ok(Outcome {
        table: t,
        passed,
        seed: a.seed,
        config,
        report,
    })
}

fn mc_f(a: &McFArgs, config: serde_json::Value) -> Result<Outcome> {
    if a.disorders == 0 {
        return Err(SkError::InvalidParam("--disorders must be positive".into()));
    }
    let ti = TiConfig {
        grid_size: a.grid_size,
        sweeps: a.sweeps,
        burn_in: a.burn_in,
        sweeps_per_swap: 1,
    };
    let with_exact = a.n <= EXACT_CAP;
    let rows = (0..a.disorders)
        .into_par_iter()
        .map(|d| {
            let sample = DisorderSample::sample(a.n, derive_seed(a.seed, &[a.n as u64]), d as u64, false)?;
            let r = thermo_integration_f(&sample, a.beta, &ti, derive_seed(a.seed, &[a.n as u64, d as u64, 0x3c]))?;
            let exact = if with_exact {
                Some(log_partition(&sample, a.beta)?)
            } else {
                None
            };
            Ok((r, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(
        "skfluct.mc_f.v1",
        &[
            "disorder", "n", "beta", "f_hat", "std_err", "f_exact", "z", "tau_hot", "burn_in", "pass",
        ],
    );
    let mut report = Vec::new();
    let mut passed = true;
    for (d, (r, exact)) in rows.iter().enumerate() {
        // rounding slack for runs with zero statistical error
        let ok = exact.map(|f| (r.f_hat - f).abs() <= 3.0 * r.std_err + 1e-9);
        let z = exact.map(|f| {
            if r.std_err > 0.0 {
                (r.f_hat - f) / r.std_err
            } else {
                0.0
            }
        });
        if ok == Some(false) {
            passed = false;
            report.push(format!(
                "FAIL: disorder {d}: |F_hat - F| > 3 std_err (z = {})",
                z.unwrap()
            ));
        }
        t.push(vec![
            d.into(),
            a.n.into(),
            a.beta.into(),
            r.f_hat.into(),
            r.std_err.into(),
            (*exact).into(),
            z.into(),
            r.tau_hot.into(),
            r.burn_in.into(),
            ok.into(),
        ]);
    }
    Ok(Outcome {
        table: t,
        passed,
        seed: a.seed,
        config,
        report,
    })
}

fn prop(a: &PropScanArgs, config: serde_json::Value) -> Result<Outcome> {
    let schedule = match (a.c, a.kind) {
        (None, _) => BetaSchedule::Fixed { beta: a.beta },
        (Some(c), WindowKind::BetaSq) => BetaSchedule::BetaSqWindow { c },
        (Some(c), WindowKind::Beta) => BetaSchedule::BetaWindow { c },
    };
    let mut t = CsvTable::new(
        "skfluct.prop_scan.v1",
        &[
            "t",
            "n",
            "beta",
            "c_n",
            "residual",
            "se",
            "ci_lo",
            "ci_hi",
            "abs2",
            "abs2_se",
            "shape",
            "ratio",
            "l_fit",
            "violation",
        ],
    );
    t.note("residual: N E<R^2>_t - 1/(1 - beta^2 t); shape: N^(-1/2) (1-beta^2)^(-1) (1-beta^2 t)^(-3/2)");
    t.note("l_fit is the largest |residual|/shape over the two smallest sizes");
    let mut report = Vec::new();
    let mut passed = true;
    for &tt in &a.t {
        let scan = prop_scan(&a.n_list, &schedule, tt, a.m, a.seed, a.resamples)?;
        for r in &scan.rows {
            let violation = scan.violations.contains(&r.n);
            let s = r.residual.mean_residual;
            t.push(vec![
                tt.into(),
                r.n.into(),
                r.beta.into(),
                r.c_n.into(),
                s.estimate.into(),
                s.se.into(),
                s.lo.into(),
                s.hi.into(),
                r.residual.abs2_residual.estimate.into(),
                r.residual.abs2_residual.se.into(),
                r.shape.into(),
                r.ratio.into(),
                scan.l_fit.into(),
                violation.into(),
            ]);
        }
        if !scan.ok() {
            passed = false;
            report.push(format!(
                "FAIL: t = {tt}: residual exceeds the fitted shape at N = {:?}",
                scan.violations
            ));
        }
    }
    Ok(Outcome {
        table: t,
        passed,
        seed: a.seed,
        config,
        report,
    })
}
