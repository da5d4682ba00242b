//! Search for idempotents `F(x) = x`.

use super::{euler_field, euler_jacobian};
use crate::cones;
use crate::lie::AlgebraVec;
use crate::linalg;
use crate::metric::MetricOp;
use crate::rng;
use rayon::prelude::*;

const MAX_ITER: usize = 50;
const RESIDUAL_TOL: f64 = 1e-11;
const DEDUP_RADIUS: f64 = 1e-6;

/// Damped Newton iteration on `G(x) = F(x) - x` with minimum-norm steps (the
/// roots come in circles, so `dG` is rank deficient along them) and a
/// backtracking line search on `|G|^2`. Returns the root if the residual
/// drops below 1e-11 away from the trivial root 0.
pub fn refine_idempotent(m: &MetricOp, x0: &AlgebraVec) -> Option<AlgebraVec> {
    let n = m.dim();
    let resid = |x: &AlgebraVec| euler_field(m, x) - x;
    let mut x = x0.clone();
    let mut g = resid(&x);
    let mut gn = g.norm();
    for _ in 0..MAX_ITER {
        if gn < RESIDUAL_TOL {
            break;
        }
        let jac = euler_jacobian(m, &x) - nalgebra::DMatrix::identity(n, n);
        let dx = linalg::lstsq(&jac, &(-&g), 1e-12);
        let mut alpha = 1.0;
        loop {
            let trial = &x + &dx * alpha;
            let tg = resid(&trial);
            let tn = tg.norm();
            if tn * tn <= (1.0 - 1e-4 * alpha) * gn * gn || alpha < 1e-4 {
                x = trial;
                g = tg;
                gn = tn;
                break;
            }
            alpha *= 0.5;
        }
        if !gn.is_finite() || x.norm() > 1e6 {
            return None;
        }
    }
    (gn < RESIDUAL_TOL && x.norm() > 1e-8).then_some(x)
}

/// Scale `p` by the least-squares factor making `F(lambda p)` closest to `lambda p`.
fn scaled_seed(m: &MetricOp, p: &AlgebraVec) -> Option<AlgebraVec> {
    let fp = euler_field(m, p);
    let nf = fp.norm_squared();
    if nf < 1e-20 {
        return None;
    }
    let lambda = fp.dot(p) / nf;
    (lambda.abs() > 1e-8).then(|| p * lambda)
}

/// Newton search from `n_seeds` deterministic seeds. Even seeds start on the
/// unit slice of the cone intersection (idempotents are null and nilpotent),
/// odd seeds are random directions. Roots are deduplicated at radius 1e-6
/// in seed order.
pub fn find_idempotents(m: &MetricOp, n_seeds: usize, seed: u64) -> Vec<AlgebraVec> {
    let roots: Vec<Option<AlgebraVec>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let dir = linalg::unit(&m.alg().random_element(&mut rng, 1.0));
            let start = if i % 2 == 0 {
                cones::project_to_intersection(m, &dir, &[]).unwrap_or(dir)
            } else {
                dir
            };
            let x0 = scaled_seed(m, &start)?;
            refine_idempotent(m, &x0)
        })
        .collect();
    let mut out: Vec<AlgebraVec> = Vec::new();
    for x in roots.into_iter().flatten() {
        if out.iter().all(|y| (y - &x).norm() > DEDUP_RADIUS) {
            out.push(x);
        }
    }
    out
}
