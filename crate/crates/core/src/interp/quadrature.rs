use serde::Serialize;

use crate::error::{Result, SkError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadNode {
    /// transformed coordinate `u = −ln(1 − β²t)`
    pub u: f64,
    pub t: f64,
    /// weight for integrating a function of `t` over `[0, 1]`
    pub weight: f64,
}

/// Trapezoid rule on a uniform grid in `u = −ln(1 − β²t)`.
///
/// Integrands of the form `g(t) ≈ 1/(1 − β²t)` become bounded in `u` because
/// `dt = e^{−u}/β² du`. For `β = 0` the map degenerates and a plain uniform
/// trapezoid in `t` is used instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub beta: f64,
    pub nodes: Vec<QuadNode>,
}

impl QuadratureGrid {
    pub fn transformed(beta: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(SkError::InvalidParam(format!(
                "quadrature needs at least 2 nodes, got {count}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(SkError::BetaOutOfRange(beta));
        }
        let b2 = beta * beta;
        let steps = (count - 1) as f64;
        let trap = |k: usize| if k == 0 || k == count - 1 { 0.5 } else { 1.0 };
        let nodes = if b2 == 0.0 {
            (0..count)
                .map(|k| QuadNode {
                    u: 0.0,
                    t: k as f64 / steps,
                    weight: trap(k) / steps,
                })
                .collect()
        } else {
            let u_max = -(-b2).ln_1p();
            let h = u_max / steps;
            (0..count)
                .map(|k| {
                    let u = k as f64 * h;
                    // t = (1 − e^{−u})/β², written to stay exact at the ends
                    let t = if k == count - 1 { 1.0 } else { -(-u).exp_m1() / b2 };
                    QuadNode {
                        u,
                        t,
                        weight: trap(k) * h * (-u).exp() / b2,
                    }
                })
                .collect()
        };
        Ok(Self { beta, nodes })
    }

    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.t)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.nodes.iter().zip(values).map(|(n, v)| n.weight * v).sum()
    }
}
