use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, SkError};
use crate::exact::poly::{PairLayout, ReplicaPoly};
use crate::stats::Summary;

use super::{check_t, spectra, Setup};

/// Test functions for the integration-by-parts check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IbpObservable {
    /// `σ_Nτ_N R⁻(σ,τ)`
    F1,
    /// `R⁻(σ,τ)²`
    RMinusSq,
    /// `σ¹_Nτ¹_N R⁻(σ¹,τ¹)·R(σ²,τ²)²`
    F2Factor,
}

impl IbpObservable {
    pub const ALL: [IbpObservable; 3] = [Self::F1, Self::RMinusSq, Self::F2Factor];

    pub fn name(&self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::RMinusSq => "r-minus-sq",
            Self::F2Factor => "f2-factor",
        }
    }

    /// Number of `(σ, τ)` pairs the function depends on.
    pub fn pairs(&self) -> usize {
        match self {
            Self::F2Factor => 2,
            _ => 1,
        }
    }

    pub fn poly(&self, layout: &PairLayout) -> ReplicaPoly {
        let (s0, t0) = (layout.sigma(0), layout.tau(0));
        let f1 = || {
            layout
                .last_spin(s0)
                .mul(&layout.last_spin(t0))
                .mul(&layout.overlap_minus(s0, t0))
        };
        match self {
            Self::F1 => f1(),
            Self::RMinusSq => {
                let r = layout.overlap_minus(s0, t0);
                r.mul(&r)
            }
            Self::F2Factor => {
                let r = layout.overlap(layout.sigma(1), layout.tau(1));
                f1().mul(&r).mul(&r)
            }
        }
    }
}

impl FromStr for IbpObservable {
    type Err = SkError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| SkError::InvalidParam(format!("unknown test function `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Central,
    /// `(−3f(s) + 4f(s+h) − f(s+2h))/2h`
    Forward,
    /// `(3f(s) − 4f(s−h) + f(s−2h))/2h`
    Backward,
}

impl Stencil {
    fn choose(s0: f64, h: f64) -> Result<Self> {
        if s0 - h >= 0.0 && s0 + h <= 1.0 {
            Ok(Self::Central)
        } else if s0 + 2.0 * h <= 1.0 {
            Ok(Self::Forward)
        } else if s0 - 2.0 * h >= 0.0 {
            Ok(Self::Backward)
        } else {
            Err(SkError::InvalidParam(format!(
                "no stencil of step {h} fits around s = {s0}"
            )))
        }
    }

    /// Points and weights of the difference quotient written against the
    /// value at `s0`, so a flat profile gives exactly zero.
    fn points(&self, s0: f64, h: f64) -> (f64, Vec<(f64, f64)>) {
        let w = 1.0 / (2.0 * h);
        let pts = match self {
            Self::Central => vec![(s0 + h, 1.0), (s0 - h, -1.0)],
            Self::Forward => vec![(s0 + h, 4.0), (s0 + 2.0 * h, -1.0)],
            Self::Backward => vec![(s0 - h, -4.0), (s0 - 2.0 * h, 1.0)],
        };
        (w, pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpCheck {
    pub observable: IbpObservable,
    pub t: f64,
    pub s0: f64,
    pub h: f64,
    pub stencil: Stencil,
    /// finite difference of `E⟨f⟩_{t,s}` at `s0`
    pub fd: Summary,
    /// integration-by-parts right-hand side at `(t, s0)`
    pub formula: Summary,
    /// `fd − formula` on common disorder
    pub gap: Summary,
}

/// Compare `∂_s E⟨f⟩_{t,s}` at `s0` by finite differences against the
/// covariance-weighted Gibbs averages of the integration-by-parts formula.
///
/// The stencil is central when `s0 ± h` fits in `[0, 1]` and one-sided of
/// second order at the ends.
pub fn gibp_derivative_check(setup: &Setup, observable: IbpObservable, t: f64, s0: f64, h: f64) -> Result<IbpCheck> {
    setup.validate(2)?;
    check_t(0.0, t)?;
    if !(0.0..=1.0).contains(&s0) {
        return Err(SkError::InvalidParam(format!("s0 = {s0} outside [0, 1]")));
    }
    if !(h > 0.0 && h <= 0.1) {
        return Err(SkError::InvalidParam(format!(
            "finite-difference step {h} outside (0, 0.1]"
        )));
    }
    let stencil = Stencil::choose(s0, h)?;
    let k = observable.pairs();
    let layout = PairLayout {
        pairs: k + 2,
        n: setup.n,
    };
    let sides = layout.sides();
    let f = observable.poly(&layout);
    let deriv = layout.ibp_derivative(&f, k, setup.beta, t);
    let (w, points) = stencil.points(s0, h);
    let rows = setup.per_disorder(|s| {
        let (a, b) = spectra(s, setup.beta, t, s0)?;
        let formula = deriv.evaluate(&sides, &a, &b);
        let base = f.evaluate(&sides, &a, &b);
        let mut acc = 0.0;
        for &(sp, c) in &points {
            let (a, b) = spectra(s, setup.beta, t, sp)?;
            acc += c * (f.evaluate(&sides, &a, &b) - base);
        }
        Ok((w * acc, formula))
    })?;
    let fd: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let formula: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let gap: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let tag = 40 + 3 * observable as u64;
    Ok(IbpCheck {
        observable,
        t,
        s0,
        h,
        stencil,
        fd: setup.mean(&fd, tag)?,
        formula: setup.mean(&formula, tag + 1)?,
        gap: setup.mean(&gap, tag + 2)?,
    })
}
