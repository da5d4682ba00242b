//! Group-level geodesics from Euler trajectories.
//!
//! The Euler variable `u` is `A` applied to the left-trivialized velocity, so
//! the geodesic solves `gamma' = gamma * v(t)` with `v = A^{-1} u`. The
//! matrix ODE is advanced with the fourth-order Magnus integrator, whose
//! steps are exponentials of traceless matrices and keep `det gamma = 1`.

use super::integrate::Trajectory;
use crate::error::{Error, Result};
use crate::lie::{exp_traceless, AlgebraVec, GroupElement};
use crate::metric::MetricOp;

const SUBSTEPS: usize = 4;

fn velocity_matrix(m: &MetricOp, traj: &Trajectory, t: f64) -> nalgebra::Matrix2<num_complex::Complex64> {
    let u = traj.state_at(t).expect("time inside trajectory domain");
    m.alg().realize(&(m.ainv() * u))
}

fn magnus_step(m: &MetricOp, traj: &Trajectory, gamma: &GroupElement, t: f64, h: f64) -> GroupElement {
    let r3 = 3f64.sqrt();
    let a1 = velocity_matrix(m, traj, t + (0.5 - r3 / 6.0) * h);
    let a2 = velocity_matrix(m, traj, t + (0.5 + r3 / 6.0) * h);
    let comm = a1 * a2 - a2 * a1;
    let omega = (a1 + a2) * num_complex::Complex64::new(0.5 * h, 0.0)
        + comm * num_complex::Complex64::new(r3 / 12.0 * h * h, 0.0);
    GroupElement::new_unchecked(gamma.matrix() * exp_traceless(&omega))
}

/// Advances `gamma` from `t0` to `t1` along the geodesic of `traj`
/// (either direction, both times inside the trajectory domain).
pub fn propagate_group(
    m: &MetricOp,
    traj: &Trajectory,
    gamma: &GroupElement,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<GroupElement> {
    let end = traj.t_end();
    if !(0.0..=end).contains(&t0) || !(0.0..=end).contains(&t1) {
        return Err(Error::InvalidArgument(format!(
            "times {t0}, {t1} outside trajectory domain [0, {end}]"
        )));
    }
    let n = substeps.max(1);
    let h = (t1 - t0) / n as f64;
    let mut g = gamma.clone();
    for i in 0..n {
        g = magnus_step(m, traj, &g, t0 + i as f64 * h, h);
    }
    Ok(g)
}

/// Geodesic through `gamma0` sampled on the trajectory time grid.
pub fn reconstruct_geodesic(m: &MetricOp, traj: &Trajectory, gamma0: &GroupElement) -> Result<Vec<GroupElement>> {
    if traj.states.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("trajectory is not finite".into()));
    }
    let mut out = Vec::with_capacity(traj.len());
    out.push(gamma0.clone());
    for w in traj.times.windows(2) {
        let last = out.last().expect("non-empty");
        let next = propagate_group(m, traj, last, w[0], w[1], SUBSTEPS)?;
        out.push(next);
    }
    Ok(out)
}

/// Largest deviation of `g(z, A^{-1} u(t)) = K(z, u(t))` from its initial
/// value, normalized by `|K z| max(|u0|, |u(t)|)`.
pub fn verify_killing_conservation(m: &MetricOp, traj: &Trajectory, z: &AlgebraVec) -> f64 {
    let scale = (m.gram_k() * z).norm();
    if scale == 0.0 {
        return 0.0;
    }
    let u0 = traj.initial_state();
    let pairing = |u: &AlgebraVec| m.g(z, &(m.ainv() * u));
    let p0 = pairing(u0);
    traj.states
        .iter()
        .map(|u| (pairing(u) - p0).abs() / (scale * u0.norm().max(u.norm())))
        .fold(0.0, f64::max)
}
