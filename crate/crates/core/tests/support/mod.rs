//! Shared helpers for integration tests: random instance generators, a naive
//! recomputation of the metric formulas, and a scripted HTTP transport.
#![allow(dead_code)]

pub mod gen;
pub mod mock;
pub mod naive;

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
