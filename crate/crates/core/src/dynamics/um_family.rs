//! Closed-form incomplete solutions `u_m(t) = g_m(t) xi_hat + h_m(t) y`
//! accumulating at an idempotent `theta = xi_hat + y` of the spacelike
//! Killing family with `d > 0` and `d2 = 0`.
//!
//! On the plane spanned by `xi_hat` and `y` the Euler equation reduces to
//! `g' = h^2`, `h' = g h`. With `a_m = 1/sqrt(m)` and
//! `b_m = (1 - a_m)/(1 + a_m)`:
//!
//! `g_m(t) = a_m (1 + b_m e^{2 a_m t}) / (1 - b_m e^{2 a_m t})`,
//! `h_m(t) = h_m(0) exp(int_0^t g_m)`,
//!
//! and `h_m(0) = sqrt(1 - 1/(delta m))`, where `delta` depends on how the
//! centralizer coefficient `d1` enters the normalization. The candidate
//! conventions are enumerated in [`HFactorConvention`] and checked against
//! the Euler equation by [`scan_um_conventions`].

use super::euler_field;
use crate::error::{Error, Result};
use crate::killing::NormalForm;
use crate::lie::AlgebraVec;
use crate::metric::MetricOp;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HFactorConvention {
    /// `delta = d1`.
    Literal,
    /// `delta = |d1|`.
    Absolute,
    /// `delta = -d1`.
    Negated,
    /// `delta = 1`: `d1` normalized to unit magnitude with its sign absorbed
    /// into the orientation of `xi`.
    UnitNormalized,
}

impl HFactorConvention {
    pub const ALL: [HFactorConvention; 4] = [
        HFactorConvention::Literal,
        HFactorConvention::Absolute,
        HFactorConvention::Negated,
        HFactorConvention::UnitNormalized,
    ];

    pub fn delta(self, d1: f64) -> f64 {
        match self {
            HFactorConvention::Literal => d1,
            HFactorConvention::Absolute => d1.abs(),
            HFactorConvention::Negated => -d1,
            HFactorConvention::UnitNormalized => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UmSolution {
    pub m: u32,
    pub a_m: f64,
    pub b_m: f64,
    pub h0: f64,
    pub convention: HFactorConvention,
    pub xi_hat: Vec<f64>,
    pub y: Vec<f64>,
    /// Finite-time pole `ln(1/b_m) / (2 a_m)`; `None` for `m = 1`.
    pub pole: Option<f64>,
}

impl UmSolution {
    /// `(g, h, g', h')` at time `t`.
    fn profile(&self, t: f64) -> Result<(f64, f64, f64, f64)> {
        if let Some(pole) = self.pole {
            if t >= pole {
                return Err(Error::DomainExceeded { t, pole });
            }
        }
        let (a, b) = (self.a_m, self.b_m);
        let w = b * (2.0 * a * t).exp();
        let g = a * (1.0 + w) / (1.0 - w);
        let h = self.h0 * (a * t).exp() * (1.0 - b) / (1.0 - w);
        let dg = 4.0 * a * a * w / ((1.0 - w) * (1.0 - w));
        Ok((g, h, dg, g * h))
    }

    fn combine(&self, p: f64, q: f64) -> AlgebraVec {
        AlgebraVec::from_iterator(
            self.xi_hat.len(),
            self.xi_hat.iter().zip(&self.y).map(|(x, y)| p * x + q * y),
        )
    }

    pub fn eval(&self, t: f64) -> Result<AlgebraVec> {
        let (g, h, _, _) = self.profile(t)?;
        Ok(self.combine(g, h))
    }

    pub fn derivative(&self, t: f64) -> Result<AlgebraVec> {
        let (_, _, dg, dh) = self.profile(t)?;
        Ok(self.combine(dg, dh))
    }

    /// `|u' - F(u)| / max(1, |F(u)|)` at time `t`.
    pub fn ode_residual(&self, metric: &MetricOp, t: f64) -> Result<f64> {
        let u = self.eval(t)?;
        let f = euler_field(metric, &u);
        Ok((self.derivative(t)? - &f).norm() / f.norm().max(1.0))
    }

    /// Largest residual over `samples` evenly spaced times in
    /// `[0, fraction * pole]` (or `[0, 1]` when there is no pole).
    pub fn max_residual(&self, metric: &MetricOp, fraction: f64, samples: usize) -> Result<f64> {
        let end = self.pole.map_or(1.0, |p| fraction * p);
        let mut worst = 0.0_f64;
        for i in 0..=samples {
            let t = end * i as f64 / samples as f64;
            worst = worst.max(self.ode_residual(metric, t)?);
        }
        Ok(worst)
    }

    pub fn initial_distance(&self, theta: &AlgebraVec) -> f64 {
        (self.combine(self.a_m * (1.0 + self.b_m) / (1.0 - self.b_m), self.h0) - theta).norm()
    }
}

/// Builds `u_m` around the idempotent `theta`, split as `theta = xi_hat + y`
/// with `xi_hat` its component along the normal-form `xi` direction.
pub fn construct_um_solution(
    metric: &MetricOp,
    nf: &NormalForm,
    m: u32,
    theta: &AlgebraVec,
    convention: HFactorConvention,
) -> Result<UmSolution> {
    metric.alg().check_dim(theta)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if nf.d <= 0.0 {
        return Err(Error::InvalidArgument(format!("u_m family needs d > 0, got {}", nf.d)));
    }
    let resid = (euler_field(metric, theta) - theta).norm();
    if resid > 1e-9 {
        return Err(Error::InvalidArgument(format!("theta is not idempotent (residual {resid:e})")));
    }
    let factor = 1.0 - 1.0 / (convention.delta(nf.d1) * m as f64);
    if !factor.is_finite() || factor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "h_m(0)^2 = {factor} is negative under the {convention:?} convention"
        )));
    }
    let coords = nf.frame_coordinates(theta)?;
    let xi = nf.frame.column(0).into_owned();
    let xi_hat = &xi * coords[0];
    let y = theta - &xi_hat;
    let a_m = (1.0 / m as f64).sqrt();
    let b_m = (1.0 - a_m) / (1.0 + a_m);
    let pole = (b_m > 0.0).then(|| (1.0 / b_m).ln() / (2.0 * a_m));
    Ok(UmSolution {
        m,
        a_m,
        b_m,
        h0: factor.sqrt(),
        convention,
        xi_hat: xi_hat.iter().copied().collect(),
        y: y.iter().copied().collect(),
        pole,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionAttempt {
    pub convention: HFactorConvention,
    /// Largest ODE residual over the tested `m`; `None` if `h_m(0)` was undefined.
    pub max_residual: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UmScan {
    pub accepted: Option<HFactorConvention>,
    pub attempts: Vec<ConventionAttempt>,
}

/// Tries every convention on `ms` and accepts the first whose residual stays
/// below `tol` on 80% of the maximal domain for all `m`.
pub fn scan_um_conventions(metric: &MetricOp, nf: &NormalForm, theta: &AlgebraVec, ms: &[u32], tol: f64) -> UmScan {
    let mut attempts = Vec::new();
    let mut accepted = None;
    for conv in HFactorConvention::ALL {
        let mut worst: Option<f64> = Some(0.0);
        for &m in ms {
            let res = construct_um_solution(metric, nf, m, theta, conv).and_then(|s| s.max_residual(metric, 0.8, 400));
            worst = match (worst, res) {
                (Some(w), Ok(r)) => Some(w.max(r)),
                _ => None,
            };
        }
        let passed = worst.is_some_and(|w| w < tol);
        if passed && accepted.is_none() {
            accepted = Some(conv);
        }
        attempts.push(ConventionAttempt {
            convention: conv,
            max_residual: worst,
            passed,
        });
    }
    UmScan { accepted, attempts }
}
