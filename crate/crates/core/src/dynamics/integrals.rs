//! First integrals of the Euler field and their drift along trajectories.
//!
//! Drift of an integral `I` of homogeneous degree `k` at a sample `u` is
//! `|I(u) - I(u0)| / (N_I * max(|u0|, |u|)^k)`, where `N_I` is the norm of the
//! form defining `I`. Normalizing by the form rather than by `|I(u0)|` keeps
//! the measure meaningful on null and nilpotent orbits where `I(u0) = 0`.

use super::integrate::Trajectory;
use crate::lie::{AlgebraKind, AlgebraVec};
use crate::linalg;
use crate::metric::MetricOp;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct FirstIntegralSet {
    pub gstar: f64,
    pub tr_ad2: f64,
    pub tr_ad3: f64,
    /// `Re tr_C(u^2)`, sl2c only.
    pub trc_re: Option<f64>,
    /// `Im tr_C(u^2)`, sl2c only.
    pub trc_im: Option<f64>,
    /// `K(u, z)` for each supplied Killing generator `z`.
    pub killing: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FirstIntegralDrift {
    pub gstar: f64,
    pub tr_ad2: f64,
    pub tr_ad3: f64,
    pub trc_re: Option<f64>,
    pub trc_im: Option<f64>,
    /// Largest drift over the supplied Killing generators.
    pub killing: Option<f64>,
}

impl FirstIntegralDrift {
    pub fn max(&self) -> f64 {
        [
            Some(self.gstar),
            Some(self.tr_ad2),
            Some(self.tr_ad3),
            self.trc_re,
            self.trc_im,
            self.killing,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }

    fn merge(&mut self, other: &FirstIntegralDrift) {
        fn mx(a: Option<f64>, b: Option<f64>) -> Option<f64> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        self.gstar = self.gstar.max(other.gstar);
        self.tr_ad2 = self.tr_ad2.max(other.tr_ad2);
        self.tr_ad3 = self.tr_ad3.max(other.tr_ad3);
        self.trc_re = mx(self.trc_re, other.trc_re);
        self.trc_im = mx(self.trc_im, other.trc_im);
        self.killing = mx(self.killing, other.killing);
    }
}

pub fn first_integrals(m: &MetricOp, u: &AlgebraVec, killing: &[AlgebraVec]) -> FirstIntegralSet {
    let alg = m.alg();
    let ad = alg.ad_matrix(u);
    let ad2 = &ad * &ad;
    let (trc_re, trc_im) = if alg.kind() == AlgebraKind::Sl2c {
        let t = alg.square_trace(u);
        (Some(t.re), Some(t.im))
    } else {
        (None, None)
    };
    FirstIntegralSet {
        gstar: m.g_star(u, u),
        tr_ad2: ad2.trace(),
        tr_ad3: (&ad2 * &ad).trace(),
        trc_re,
        trc_im,
        killing: killing.iter().map(|z| alg.killing_form(u, z)).collect(),
    }
}

struct Scales {
    gstar: f64,
    trc_re: f64,
    trc_im: f64,
    killing: Vec<f64>,
}

impl Scales {
    fn new(m: &MetricOp, killing: &[AlgebraVec]) -> Self {
        let (re, im) = m.alg().trace_grams();
        Scales {
            gstar: linalg::spectral_norm(m.gram_gstar()),
            trc_re: linalg::spectral_norm(re),
            trc_im: linalg::spectral_norm(im),
            killing: killing.iter().map(|z| (m.gram_k() * z).norm()).collect(),
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn drift_between(
    m: &MetricOp,
    scales: &Scales,
    i0: &FirstIntegralSet,
    u0: &AlgebraVec,
    u: &AlgebraVec,
    killing: &[AlgebraVec],
) -> FirstIntegralDrift {
    let i1 = first_integrals(m, u, killing);
    let r = u0.norm().max(u.norm());
    let ad_scale = m.alg().ad_matrix(u0).norm().max(m.alg().ad_matrix(u).norm());
    let opt = |a: Option<f64>, b: Option<f64>, s: f64| match (a, b) {
        (Some(a), Some(b)) => Some(ratio((a - b).abs(), s * r * r)),
        _ => None,
    };
    let killing_drift = if killing.is_empty() {
        None
    } else {
        Some(
            (0..killing.len())
                .map(|j| ratio((i1.killing[j] - i0.killing[j]).abs(), scales.killing[j] * r))
                .fold(0.0, f64::max),
        )
    };
    FirstIntegralDrift {
        gstar: ratio((i1.gstar - i0.gstar).abs(), scales.gstar * r * r),
        tr_ad2: ratio((i1.tr_ad2 - i0.tr_ad2).abs(), ad_scale.powi(2)),
        tr_ad3: ratio((i1.tr_ad3 - i0.tr_ad3).abs(), ad_scale.powi(3)),
        trc_re: opt(i1.trc_re, i0.trc_re, scales.trc_re),
        trc_im: opt(i1.trc_im, i0.trc_im, scales.trc_im),
        killing: killing_drift,
    }
}

/// Drift of every integral at a single sample `u` relative to `u0`.
pub fn sample_drift(m: &MetricOp, u0: &AlgebraVec, u: &AlgebraVec, killing: &[AlgebraVec]) -> FirstIntegralDrift {
    let scales = Scales::new(m, killing);
    let i0 = first_integrals(m, u0, killing);
    drift_between(m, &scales, &i0, u0, u, killing)
}

/// Initial values of the first integrals and their maximal drift over all samples.
pub fn first_integral_drift(
    m: &MetricOp,
    traj: &Trajectory,
    killing: &[AlgebraVec],
) -> (FirstIntegralSet, FirstIntegralDrift) {
    let scales = Scales::new(m, killing);
    let u0 = traj.initial_state();
    let i0 = first_integrals(m, u0, killing);
    let mut drift = FirstIntegralDrift {
        killing: if killing.is_empty() { None } else { Some(0.0) },
        ..drift_between(m, &scales, &i0, u0, u0, &[])
    };
    for u in &traj.states[1..] {
        drift.merge(&drift_between(m, &scales, &i0, u0, u, killing));
    }
    (i0, drift)
}
