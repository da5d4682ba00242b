//! Dormand-Prince 5(4) integration of the Euler field with dense output and
//! escape (finite-time blow-up) detection.

use super::euler_field;
use super::integrals::{first_integral_drift, FirstIntegralDrift};
use crate::error::{Error, Result};
use crate::lie::AlgebraVec;
use crate::metric::MetricOp;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub escape_radius: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            escape_radius: 1e8,
            min_step: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    CompletedHorizon,
    Escaped,
    StepUnderflow,
    StepLimit,
}

/// Dense-output coefficients of one accepted step.
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    r: [AlgebraVec; 5],
}

impl Segment {
    fn eval(&self, theta: f64) -> AlgebraVec {
        let s = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.r;
        r1 + (r2 + (r3 + (r4 + r5 * s) * theta) * s) * theta
    }
}

/// An integral curve `u(t)` of the Euler field on `[0, t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AlgebraVec>,
    pub status: TrajectoryStatus,
    /// Time at which `|u|` crossed the escape radius.
    pub escape_time: Option<f64>,
    /// Blow-up time extrapolated from the escape point assuming `|u| ~ c/(T - t)`.
    pub escape_time_estimate: Option<f64>,
    pub drift: FirstIntegralDrift,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn initial_state(&self) -> &AlgebraVec {
        &self.states[0]
    }

    pub fn final_state(&self) -> &AlgebraVec {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn sup_norm(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |a, s| a.max(s.norm()))
    }

    /// Dense-output evaluation, `None` outside `[0, t_end]`.
    pub fn state_at(&self, t: f64) -> Option<AlgebraVec> {
        let t_end = self.t_end();
        if !(0.0..=t_end).contains(&t) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.states[0].clone());
        }
        let idx = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return Some(self.states[i].clone()),
            Err(i) => i.saturating_sub(1).min(self.segments.len() - 1),
        };
        let seg = &self.segments[idx];
        Some(seg.eval((t - seg.t0) / seg.h))
    }
}

// Dormand-Prince 5(4) tableau. The field is autonomous, so the nodes are
// not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `u' = F(u)` from `u0` on `[0, horizon]`.
///
/// Integration stops early when `|u|` exceeds `opts.escape_radius` (the
/// crossing is located by bisection on the dense output of the last step),
/// when the step size drops below `opts.min_step`, or after `opts.max_steps`.
pub fn integrate(m: &MetricOp, u0: &AlgebraVec, horizon: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    m.alg().check_dim(u0)?;
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    let f = |y: &AlgebraVec| euler_field(m, y);
    let mut times = vec![0.0];
    let mut states = vec![u0.clone()];
    let mut segments = Vec::new();
    let mut status = TrajectoryStatus::CompletedHorizon;
    let mut escape_time = None;
    let mut escape_time_estimate = None;

    let mut t = 0.0;
    let mut y = u0.clone();
    let mut k1 = f(&y);
    let fnorm = k1.norm();
    let mut h = if fnorm == 0.0 {
        horizon
    } else {
        (0.01 * y.norm().max(opts.abs_tol) / fnorm).clamp(opts.min_step, horizon)
    };
    let mut steps = 0usize;

    while t < horizon {
        if steps >= opts.max_steps {
            status = TrajectoryStatus::StepLimit;
            break;
        }
        steps += 1;
        let last = t + h >= horizon;
        if last {
            h = horizon - t;
        }
        let k2 = f(&(&y + &k1 * (h * A21)));
        let k3 = f(&(&y + (&k1 * A31 + &k2 * A32) * h));
        let k4 = f(&(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h));
        let k5 = f(&(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h));
        let k6 = f(&(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h));
        let y_new = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = f(&y_new);
        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let n = y.len() as f64;
        let err = (err_vec
            .iter()
            .zip(y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| {
                let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt();

        if !err.is_finite() || err > 1.0 {
            let factor = if err.is_finite() { (0.9 * err.powf(-0.25)).max(0.2) } else { 0.2 };
            h *= factor;
            if h < opts.min_step {
                status = TrajectoryStatus::StepUnderflow;
                break;
            }
            continue;
        }

        let ydiff = &y_new - &y;
        let bspl = &k1 * h - &ydiff;
        let seg = Segment {
            t0: t,
            h,
            r: [
                y.clone(),
                ydiff.clone(),
                bspl.clone(),
                &ydiff - &k7 * h - &bspl,
                (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h,
            ],
        };
        let t_new = if last { horizon } else { t + h };

        if y_new.norm() > opts.escape_radius {
            let radius = opts.escape_radius;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if seg.eval(mid).norm() >= radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut ue = seg.eval(hi);
            let mut te = t + hi * h;
            if te <= t || ue.norm() < radius {
                ue = y_new.clone();
                te = t_new;
            }
            let fe = f(&ue);
            let rate = ue.dot(&fe);
            escape_time = Some(te);
            escape_time_estimate = Some(if rate > 0.0 { te + ue.norm_squared() / rate } else { te });
            times.push(te);
            states.push(ue);
            segments.push(seg);
            status = TrajectoryStatus::Escaped;
            break;
        }

        times.push(t_new);
        states.push(y_new.clone());
        segments.push(seg);
        t = t_new;
        y = y_new;
        k1 = k7;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < opts.min_step && t < horizon {
            status = TrajectoryStatus::StepUnderflow;
            break;
        }
    }

    let mut traj = Trajectory {
        times,
        states,
        status,
        escape_time,
        escape_time_estimate,
        drift: FirstIntegralDrift::default(),
        segments,
    };
    traj.drift = first_integral_drift(m, &traj, &[]).1;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_initial_state_is_constant() {
        let m = presets::paper_example();
        let traj = integrate(&m, &m.alg().zero(), 10.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::CompletedHorizon);
        assert!(traj.states.iter().all(|s| s.amax() == 0.0));
        assert_eq!(traj.t_end(), 10.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = presets::paper_example();
        let opts = IntegrateOptions::default();
        assert!(integrate(&m, &m.alg().zero(), 0.0, &opts).is_err());
        assert!(integrate(&m, &AlgebraVec::zeros(3), 1.0, &opts).is_err());
    }

    #[test]
    fn times_increase_and_dense_output_interpolates() {
        let m = presets::paper_example();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u0 = m.alg().random_element(&mut rng, 1.0);
        let traj = integrate(&m, &u0, 5.0, &IntegrateOptions::default()).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((traj.state_at(*t).unwrap() - s).amax() < 1e-14);
        }
        // Dense output against a restarted integration.
        let tm = 0.5 * (traj.times[10] + traj.times[11]);
        let restarted = integrate(&m, &u0, tm, &IntegrateOptions::default()).unwrap();
        assert!((traj.state_at(tm).unwrap() - restarted.final_state()).amax() < 1e-8);
        assert!(traj.state_at(6.0).is_none());
    }

    #[test]
    fn quadratic_scaling_of_the_flow() {
        let m = presets::paper_example();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = m.alg().random_element(&mut rng, 1.0);
        let lam = 2.5;
        let base = integrate(&m, &x, 4.0 * lam, &IntegrateOptions::default()).unwrap();
        let scaled = integrate(&m, &(&x * lam), 4.0, &IntegrateOptions::default()).unwrap();
        for k in (0..scaled.len()).step_by(7) {
            let t = scaled.times[k];
            let expected = base.state_at(lam * t).unwrap() * lam;
            let rel = (&scaled.states[k] - &expected).norm() / expected.norm();
            assert!(rel < 1e-6, "t = {t}: {rel}");
        }
    }

    #[test]
    fn blow_up_of_scalar_riccati_direction() {
        // Along an idempotent x the solution is x / (1 - t).
        let p = presets::SPACELIKE_D_POSITIVE;
        let m = p.metric().unwrap();
        let x = crate::dynamics::find_idempotents(&m, 16, 1)[0].clone();
        let traj = integrate(&m, &x, 3.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Escaped);
        assert!(traj.final_state().norm() >= 1e8);
        assert!((traj.escape_time_estimate.unwrap() - 1.0).abs() < 1e-6);
    }
}
