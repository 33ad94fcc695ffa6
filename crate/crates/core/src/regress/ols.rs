//! Least squares by Householder QR, dropping numerically dependent columns in
//! the order they are listed.

use serde::{Deserialize, Serialize};

use super::DesignMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct OlsModel<T> {
    pub intercept: T,
    /// One coefficient per design column; dropped columns carry zero.
    pub coefficients: Vec<T>,
    /// Columns that survived the rank check.
    pub kept: Vec<bool>,
}

impl<T: Scalar> OlsModel<T> {
    pub fn predict(&self, row: &[T]) -> T {
        debug_assert_eq!(row.len(), self.coefficients.len());
        row.iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (&x, &b)| acc + x * b)
    }
}

struct Reflector<T> {
    /// First row the reflector acts on.
    start: usize,
    v: Vec<T>,
    beta: T,
}

impl<T: Scalar> Reflector<T> {
    fn apply(&self, col: &mut [T]) {
        let tail = &mut col[self.start..];
        let dot = self.v.iter().zip(tail.iter()).fold(T::zero(), |a, (&v, &c)| a + v * c);
        let s = self.beta * dot;
        for (c, &v) in tail.iter_mut().zip(&self.v) {
            *c = *c - s * v;
        }
    }
}

fn norm<T: Scalar>(xs: &[T]) -> T {
    let scale = xs.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let ss = xs.iter().fold(T::zero(), |a, &x| {
        let y = x / scale;
        a + y * y
    });
    scale * ss.sqrt()
}

pub(crate) fn fit_ols<T: Scalar>(x: &DesignMatrix<T>) -> Result<OlsModel<T>> {
    let n = x.n_rows();
    let p = x.n_cols();
    if n < 2 {
        return Err(Error::Insufficient(format!("least squares needs at least 2 rows, got {n}")));
    }
    if n < p + 1 {
        return Err(Error::Insufficient(format!("least squares with {p} columns needs at least {} rows, got {n}", p + 1)));
    }
    let y = x.response();
    if y.iter().all(|&v| v == y[0]) {
        return Ok(OlsModel { intercept: y[0], coefficients: vec![T::zero(); p], kept: vec![false; p] });
    }

    let tol = T::epsilon() * T::from_count(n.max(10)) * T::lit(100.0);
    let mut reflectors: Vec<Reflector<T>> = Vec::new();
    // Upper-triangular factor, stored by kept column.
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut kept_cols: Vec<usize> = Vec::new();
    let mut col = vec![T::zero(); n];
    for j in 0..=p {
        for (i, c) in col.iter_mut().enumerate() {
            *c = if j == 0 { T::one() } else { x.get(i, j - 1) };
        }
        let original = norm(&col);
        for h in &reflectors {
            h.apply(&mut col);
        }
        let r = reflectors.len();
        let resid = norm(&col[r..]);
        if original == T::zero() || r == n || resid <= tol * original {
            continue;
        }
        let alpha = if col[r] > T::zero() { -resid } else { resid };
        let mut v = col[r..].to_vec();
        v[0] = v[0] - alpha;
        let vv = v.iter().fold(T::zero(), |a, &t| a + t * t);
        let mut rc = col[..r].to_vec();
        rc.push(alpha);
        r_cols.push(rc);
        kept_cols.push(j);
        reflectors.push(Reflector { start: r, v, beta: T::lit(2.0) / vv });
    }

    let mut qty = y.to_vec();
    for h in &reflectors {
        h.apply(&mut qty);
    }
    let rank = reflectors.len();
    let mut coef = vec![T::zero(); rank];
    for c in (0..rank).rev() {
        let mut s = qty[c];
        for (c2, rc) in r_cols.iter().enumerate().skip(c + 1) {
            s = s - rc[c] * coef[c2];
        }
        coef[c] = s / r_cols[c][c];
    }

    let mut intercept = T::zero();
    let mut coefficients = vec![T::zero(); p];
    let mut kept = vec![false; p];
    for (&j, &b) in kept_cols.iter().zip(&coef) {
        if j == 0 {
            intercept = b;
        } else {
            coefficients[j - 1] = b;
            kept[j - 1] = true;
        }
    }
    Ok(OlsModel { intercept, coefficients, kept })
}
