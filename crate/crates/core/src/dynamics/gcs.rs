//! Detection of generalized conical spirals: integral curves with
//! `u(s) = r u(0)` for some `s > 0`, `r > 0`.

use super::integrate::Trajectory;
use crate::error::{Error, Result};
use crate::lie::AlgebraVec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GcsOptions {
    /// Largest angle (radians) between `u(s)` and `u(0)` counted as collinear.
    pub angle_tol: f64,
    /// Smallest admissible `s` as a fraction of the trajectory duration.
    pub min_arc_separation: f64,
}

impl Default for GcsOptions {
    fn default() -> Self {
        GcsOptions {
            angle_tol: 1e-8,
            min_arc_separation: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcsWitness {
    pub s: f64,
    pub r: f64,
    /// Angle between `u(s)` and `u(0)` at the refined `s`.
    pub collinearity_residual: f64,
    /// `s r / (r - 1)`; `None` when the curve closes up (`r = 1`).
    pub predicted_blowup: Option<f64>,
    pub periodic: bool,
}

/// Blow-up time of a GCS with `u(s) = r u(0)`: `s r / (r - 1)`. Infinite for
/// `r = 1`; for `r < 1` the value is negative and bounds the solution in the
/// backward direction.
pub fn gcs_blowup_time(s: f64, r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidArgument(format!("GCS ratio must be positive, got {r}")));
    }
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidArgument(format!("GCS return time must be positive, got {s}")));
    }
    if r == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s * r / (r - 1.0))
}

fn angle(u: &AlgebraVec, dir0: &AlgebraVec) -> f64 {
    let n = u.norm();
    if n == 0.0 {
        return std::f64::consts::PI;
    }
    let chord = (u / n - dir0).norm();
    2.0 * (0.5 * chord).min(1.0).asin()
}

const PERIODIC_TOL: f64 = 1e-6;

/// Scans the samples after `min_arc_separation * t_end` for returns of the
/// direction of `u(t)` to that of `u(0)`. Local minima of the angle are refined
/// by golden-section search on the dense output; the earliest return below
/// `angle_tol` is reported.
pub fn detect_gcs(traj: &Trajectory, opts: &GcsOptions) -> Option<GcsWitness> {
    if traj.len() < 2 {
        return None;
    }
    let u0 = traj.initial_state();
    let n0 = u0.norm();
    if n0 == 0.0 {
        return None;
    }
    let dir0 = u0 / n0;
    let t_min = opts.min_arc_separation * traj.t_end();
    let angles: Vec<f64> = traj.states.iter().map(|u| angle(u, &dir0)).collect();
    let last = traj.len() - 1;

    for k in 1..=last {
        let tk = traj.times[k];
        if tk < t_min {
            continue;
        }
        let candidate = if angles[k] < opts.angle_tol {
            Some((tk, angles[k]))
        } else if k < last && angles[k] <= angles[k - 1] && angles[k] <= angles[k + 1] {
            let lo = traj.times[k - 1].max(t_min);
            let hi = traj.times[k + 1];
            Some(golden_min(|t| angle(&traj.state_at(t).expect("inside domain"), &dir0), lo, hi))
        } else {
            None
        };
        if let Some((s, residual)) = candidate {
            if residual < opts.angle_tol && s >= t_min && s > 0.0 {
                let us = traj.state_at(s).expect("inside domain");
                let r = us.norm() / n0;
                let periodic = (r - 1.0).abs() < PERIODIC_TOL;
                let predicted_blowup = if periodic { None } else { gcs_blowup_time(s, r).ok() };
                return Some(GcsWitness {
                    s,
                    r,
                    collinearity_residual: residual,
                    predicted_blowup,
                    periodic,
                });
            }
        }
    }
    None
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
