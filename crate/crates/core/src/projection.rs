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

//! Euclidean projections used by the inner and outer ADMM loops.

use crate::error::{Error, Result};
use crate::linalg::{psd_projection, CMat};

/// Projection of `v` onto `{q : sum(q) = tau, q >= 0}`.
///
/// Sort descending, take cumulative sums `c_j`, let `eta` be the largest
/// index with `u_j - (c_j - tau)/j > 0`, then clip `v - (c_eta - tau)/eta`
/// at zero. A stable sort is used; ties give the same threshold in any order.
pub fn project_simplex(v: &[f64], tau: f64) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Domain("simplex projection of an empty vector".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("simplex radius must be positive, got {tau}")));
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - tau) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(v.iter().map(|&vi| (vi - theta).max(0.0)).collect())
}

/// Projection onto `{q : sum_i w_i q_i = tau, q >= 0}` in the metric
/// `sum_i mu_i (q_i - a_i)^2`.
///
/// The solution is `q_i = max(a_i - theta w_i / mu_i, 0)`; `theta` is found
/// exactly by scanning the breakpoints `a_i mu_i / w_i` in descending order.
/// Reduces to [`project_simplex`] when `w` and `mu` are constant.
pub fn project_weighted_simplex(a: &[f64], weights: &[f64], metric: &[f64], tau: f64) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::Domain("simplex projection of an empty vector".into()));
    }
    if weights.len() != a.len() || metric.len() != a.len() {
        return Err(Error::Dimension("weighted simplex: length mismatch".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("simplex radius must be positive, got {tau}")));
    }
    if weights.iter().chain(metric).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("simplex weights and metric must be positive".into()));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    let breakpoint = |i: usize| a[i] * metric[i] / weights[i];
    order.sort_by(|&i, &j| breakpoint(j).total_cmp(&breakpoint(i)));
    let mut num = 0.0;
    let mut den = 0.0;
    let mut theta = f64::NEG_INFINITY;
    for &i in &order {
        num += weights[i] * a[i];
        den += weights[i] * weights[i] / metric[i];
        let candidate = (num - tau) / den;
        if breakpoint(i) > candidate {
            theta = candidate;
        }
    }
    if !theta.is_finite() {
        return Err(Error::Numeric("weighted simplex threshold not found".into()));
    }
    Ok((0..a.len()).map(|i| (a[i] - theta * weights[i] / metric[i]).max(0.0)).collect())
}

pub fn project_nonneg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Projection onto the PSD cone: keep the nonnegative eigenpairs.
pub fn project_psd(x: &CMat) -> Result<CMat> {
    psd_projection(x)
}
