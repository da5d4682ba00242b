//! Serializers rendering nalgebra values as plain JSON arrays.

use crate::lie::GroupElement;
use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeSeq, Serializer};

pub fn vector<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

pub fn vectors<S: Serializer>(vs: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(v.as_slice())?;
    }
    seq.end()
}

/// Row-major nested arrays.
pub fn matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    s.collect_seq(rows)
}

/// `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
pub fn group<S: Serializer>(g: &GroupElement, s: S) -> Result<S::Ok, S::Error> {
    let m = g.matrix();
    let rows: Vec<[[f64; 2]; 2]> = (0..2)
        .map(|i| [[m[(i, 0)].re, m[(i, 0)].im], [m[(i, 1)].re, m[(i, 1)].im]])
        .collect();
    s.collect_seq(rows)
}
