//! Named metrics shipped with the library.
//!
//! The sl2c Killing family is parametrized by `(d1, d2, d3, a, b)`: with
//! `xi = diag(1,-1)`, `A^{-1} xi = d1 xi - d2 i xi`, `A^{-1} (i xi) = d2 xi + d3 i xi`,
//! and `A^{-1}` acts as `a` on span{e2, ie3} and as `b` on span{e3, ie2}.
//! Then `i xi` generates a Killing field and `d = (d1 - a)(d1 - b)`.

use crate::error::{Error, Result};
use crate::lie::{AlgebraKind, AlgebraSpec};
use crate::metric::{build_metric, MetricOp};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub a: f64,
    pub b: f64,
}

impl FamilyParams {
    pub const fn new(d1: f64, d2: f64, d3: f64, a: f64, b: f64) -> Self {
        FamilyParams { d1, d2, d3, a, b }
    }

    pub fn d(&self) -> f64 {
        (self.d1 - self.a) * (self.d1 - self.b)
    }

    /// `A^{-1}` in the sl2c basis {e1, e2, e3, ie1, ie2, ie3}.
    pub fn ainv(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(6, 6);
        m[(0, 0)] = self.d1;
        m[(3, 0)] = -self.d2;
        m[(0, 3)] = self.d2;
        m[(3, 3)] = self.d3;
        m[(1, 1)] = self.a;
        m[(5, 5)] = self.a;
        m[(2, 2)] = self.b;
        m[(4, 4)] = self.b;
        m
    }

    pub fn metric(&self) -> Result<MetricOp> {
        build_metric(AlgebraSpec::sl2c(), self.ainv())
    }
}

/// Spacelike Killing generator with `d = 8 > 0`; incomplete.
pub const SPACELIKE_D_POSITIVE: FamilyParams = FamilyParams::new(-3.0, 0.0, -1.0, 1.0, -1.0);
/// Same as [`SPACELIKE_D_POSITIVE`] with `d2 = 2`: no idempotent, spiral GCS instead.
pub const SPACELIKE_D_POSITIVE_SPIRAL: FamilyParams = FamilyParams::new(-3.0, 2.0, -1.0, 1.0, -1.0);
/// Spacelike Killing generator with `d = -4 < 0`; complete.
pub const SPACELIKE_D_NEGATIVE: FamilyParams = FamilyParams::new(-1.0, 0.0, -1.0, 1.0, -3.0);
/// Spacelike Killing generator with `d = 0`; complete.
pub const SPACELIKE_D_ZERO: FamilyParams = FamilyParams::new(-1.0, 0.0, -1.0, 1.0, -1.0);
/// `d1 > 0, d3 > 0`: `i xi` is timelike.
pub const TIMELIKE_KILLING: FamilyParams = FamilyParams::new(1.0, 0.0, 1.0, 1.0, -1.0);
/// `d1 = d3 = 0, d2 != 0`: `i xi` is lightlike.
pub const LIGHTLIKE_KILLING: FamilyParams = FamilyParams::new(0.0, 1.0, 0.0, 1.0, -1.0);

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: AlgebraKind,
    build: fn() -> DMatrix<f64>,
}

impl Preset {
    pub fn ainv(&self) -> DMatrix<f64> {
        (self.build)()
    }

    pub fn metric(&self) -> Result<MetricOp> {
        build_metric(self.kind.spec(), self.ainv())
    }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "paper-example-sl2c",
        description: "sl2c, A^-1 = diag(1,1,2,-3,-3,1): transversal cones, no idempotent, complete",
        kind: AlgebraKind::Sl2c,
        build: || diag(&[1.0, 1.0, 2.0, -3.0, -3.0, 1.0]),
    },
    Preset {
        name: "spacelike-d-positive",
        description: "sl2c Killing family (d1,d2,d3,a,b) = (-3,0,-1,1,-1), d = 8: incomplete",
        kind: AlgebraKind::Sl2c,
        build: || SPACELIKE_D_POSITIVE.ainv(),
    },
    Preset {
        name: "spacelike-d-positive-spiral",
        description: "sl2c Killing family (-3,2,-1,1,-1), d = 8: incomplete through a spiral",
        kind: AlgebraKind::Sl2c,
        build: || SPACELIKE_D_POSITIVE_SPIRAL.ainv(),
    },
    Preset {
        name: "spacelike-d-negative",
        description: "sl2c Killing family (-1,0,-1,1,-3), d = -4: complete",
        kind: AlgebraKind::Sl2c,
        build: || SPACELIKE_D_NEGATIVE.ainv(),
    },
    Preset {
        name: "spacelike-d-zero",
        description: "sl2c Killing family (-1,0,-1,1,-1), d = 0: complete",
        kind: AlgebraKind::Sl2c,
        build: || SPACELIKE_D_ZERO.ainv(),
    },
    Preset {
        name: "timelike-killing-sl2c",
        description: "sl2c Killing family (1,0,1,1,-1): timelike Killing field, complete",
        kind: AlgebraKind::Sl2c,
        build: || TIMELIKE_KILLING.ainv(),
    },
    Preset {
        name: "lightlike-killing-sl2c",
        description: "sl2c Killing family (0,1,0,1,-1): lightlike Killing field, complete",
        kind: AlgebraKind::Sl2c,
        build: || LIGHTLIKE_KILLING.ainv(),
    },
    Preset {
        name: "sl2r-nilpotent-killing",
        description: "sl2r, A^-1 = [[1,1,0],[0,1,0],[0,0,1]] in {x,y,xi}: x is Killing",
        kind: AlgebraKind::Sl2r,
        build: || DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
    },
    Preset {
        name: "sl2r-semisimple-killing",
        description: "sl2r, A^-1 = diag(1,1,2) in {x,y,xi}: xi is Killing",
        kind: AlgebraKind::Sl2r,
        build: || diag(&[1.0, 1.0, 2.0]),
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn metric(name: &str) -> Result<MetricOp> {
    find(name)?.metric()
}

pub fn paper_example() -> MetricOp {
    metric("paper-example-sl2c").expect("built-in preset is valid")
}
