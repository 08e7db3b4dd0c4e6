/*
Copyright 2026 The sea-admm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Dense complex Hermitian helpers shared by the solver, the elimination loop
//! and the oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn hermitian_eigen(m: &CMat) -> Result<SortedEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("eigendecomposition of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numeric("non-finite entry in Hermitian matrix".into()));
    }
    let n = m.nrows();
    let h = faer::Mat::<C64>::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let raw = eig.S().column_vector();
    let basis = eig.U();
    // faer returns ascending eigenvalues; reverse into descending order
    let values = (0..n).rev().map(|i| raw[i].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| basis[(r, n - 1 - c)]);
    Ok(SortedEigen { values, vectors })
}

/// `(M + M^H) / 2`
pub fn hermitize(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Real part of `<A, B> = tr(A^H B)`; exact for Hermitian arguments.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// `Re(g^H M g)`
pub fn quad_form(g: &CVec, m: &CMat) -> f64 {
    let n = g.len();
    let gs = g.as_slice();
    m.as_slice()
        .chunks_exact(n)
        .zip(gs)
        .map(|(col, gj)| {
            let s: C64 = col.iter().zip(gs).map(|(mij, gi)| gi.conj() * mij).sum();
            (s * gj).re
        })
        .sum()
}

/// Adds `scale * g g^H` to `m` in place.
pub fn add_outer(m: &mut CMat, g: &CVec, scale: f64) {
    let n = g.len();
    let gs = g.as_slice();
    for (col, gj) in m.as_mut_slice().chunks_exact_mut(n).zip(gs) {
        let gj = gj.conj() * scale;
        for (mij, gi) in col.iter_mut().zip(gs) {
            *mij += gi * gj;
        }
    }
}

pub fn outer(g: &CVec) -> CMat {
    let mut m = CMat::zeros(g.len(), g.len());
    add_outer(&mut m, g, 1.0);
    m
}

/// Euclidean projection onto the positive semidefinite cone: keeps the
/// eigenpairs with nonnegative eigenvalues.
pub fn psd_projection(x: &CMat) -> Result<CMat> {
    let eig = hermitian_eigen(x)?;
    let n = x.nrows();
    let positive = eig.values.iter().take_while(|&&v| v > 0.0).count();
    // rebuild from the smaller spectral part: S = X - (negative part)
    let (mut s, range, sign) =
        if 2 * positive <= n { (CMat::zeros(n, n), 0..positive, 1.0) } else { (hermitize(x), positive..n, -1.0) };
    for i in range {
        let q = eig.vectors.column(i).into_owned();
        add_outer(&mut s, &q, sign * eig.values[i]);
    }
    Ok(s)
}

/// Hermitian square root of a PSD matrix. Eigenvalues below
/// `-1e-10 * trace` are reported as a numeric error; smaller negative
/// round-off is clipped to zero.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    let eig = hermitian_eigen(m)?;
    let tr: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda < -1e-10 * tr.max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!("matrix is not positive semidefinite (eigenvalue {lambda:e})")));
        }
        if lambda > 0.0 {
            let q = eig.vectors.column(i).into_owned();
            add_outer(&mut out, &q, lambda.sqrt());
        }
    }
    Ok(out)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_vec(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_is_sorted_descending() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(2.0, 0.0)]));
        let eig = hermitian_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quad_form_matches_dense_product() {
        let g = CVec::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)]);
        let m = CMat::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.5, -1.0), C64::new(0.5, 1.0), C64::new(3.0, 0.0)],
        );
        let dense = (g.adjoint() * &m * &g)[(0, 0)].re;
        assert!((quad_form(&g, &m) - dense).abs() < 1e-12);
    }

    #[test]
    fn non_psd_sqrt_is_rejected() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!(matches!(psd_sqrt(&m), Err(Error::Numeric(_))));
    }
}
