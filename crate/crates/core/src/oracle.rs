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

//! Verification tools independent of the solver internals: duality-gap
//! certificates, closed-form single-UE optima, brute-force rank-1 search on
//! tiny problems, and the MMF/QoS scaling consistency check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen, inner, vec_norm, CMat, CVec, C64};
use crate::netsim::ChannelSet;
use crate::problem::{SdpProblem, Variant};
use crate::solver::{solve_dual, SolverConfig};

/// Thresholds shared by every certificate.
pub const GAP_TOL: f64 = 1e-3;
pub const RESIDUAL_TOL: f64 = 1e-3;
/// Allowed relative power overshoot for MMF solutions.
pub const MMF_POWER_SLACK: f64 = 1e-4;
/// Allowed relative SNR shortfall for QoS solutions.
pub const QOS_SNR_SLACK: f64 = 1e-3;
/// Residuals within this multiple of the thresholds give a marginal verdict.
const MARGINAL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Marginal,
    Failed,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Marginal => "marginal",
            Verdict::Failed => "failed",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// MMF: `min_k tr(H_k W)`; power minimization: `max_l tr(D_l W) / P_l`.
    pub primal_obj: f64,
    /// MMF: `z^T p`; power minimization: `y^T gamma`.
    pub dual_obj: f64,
    pub gap_rel: f64,
    /// `||H^H(y) + S - D^H(z)||_F / ||D^H(z)||_F`
    pub stationarity_residual: f64,
    /// Largest normalized `|multiplier * slack|`, including `<S, W>`.
    pub complementarity: f64,
    /// Largest relative constraint violation of `W` before slack.
    pub feasibility_residual: f64,
    /// Violation of the dual sign and normalization constraints.
    pub dual_feasibility_residual: f64,
    /// A bound on the relaxed optimum that holds regardless of
    /// stationarity (upper bound for MMF, lower bound otherwise).
    pub dual_bound: f64,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b.abs() > 0.0 {
        (a - b).abs() / b.abs()
    } else if a == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Certifies a primal/dual pair `(W, y, z, S)` for the given relaxation.
pub fn certify(prob: &SdpProblem, w: &CMat, y: &[f64], z: &[f64], s: &CMat) -> Result<Certificate> {
    let n = prob.dim();
    if w.nrows() != n || s.nrows() != n || y.len() != prob.num_ues() || z.len() != prob.num_power() {
        return Err(Error::Dimension("certificate inputs do not match the problem".into()));
    }
    let snr = prob.snr_values(w);
    let power = prob.power_values(w);
    let budgets = prob.budgets();
    let hy = prob.adjoint_h(y);
    let dz = prob.adjoint_d(z);
    let dz_norm = frobenius(&dz);
    let stationarity_residual = if dz_norm > 0.0 { frobenius(&(&hy + s - &dz)) / dz_norm } else { f64::INFINITY };
    let ws = frobenius(w) * frobenius(s);
    let mut complementarity = if ws > 0.0 { inner(s, w).abs() / ws } else { 0.0 };
    let neg = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(-x));
    let slack_eig = hermitian_eigen(s)?.values.last().copied().unwrap_or(0.0);
    let s_neg = if frobenius(s) > 0.0 { (-slack_eig).max(0.0) / frobenius(s) } else { 0.0 };

    let (primal_obj, dual_obj, feasibility_residual, normalization) = match prob.variant {
        Variant::Mmf => {
            let t = snr.iter().copied().fold(f64::INFINITY, f64::min);
            let dual: f64 = z.iter().zip(budgets).map(|(a, b)| a * b).sum();
            let over = power.iter().zip(budgets).fold(0.0f64, |m, (pw, b)| m.max(pw / b - 1.0));
            if t > 0.0 {
                for (yk, sk) in y.iter().zip(&snr) {
                    complementarity = complementarity.max((yk * (sk - t)).abs() / t);
                }
            }
            if dual > 0.0 {
                for ((zl, pw), b) in z.iter().zip(&power).zip(budgets) {
                    complementarity = complementarity.max((zl * (b - pw)).abs() / dual);
                }
            }
            (t, dual, over, (y.iter().sum::<f64>() - 1.0).abs())
        }
        Variant::Qos | Variant::SumPower => {
            let gamma = prob.targets().expect("power minimization carries targets");
            let x = power.iter().zip(budgets).fold(0.0f64, |m, (pw, b)| m.max(pw / b));
            let dual: f64 = y.iter().zip(gamma).map(|(a, b)| a * b).sum();
            let short = snr.iter().zip(gamma).fold(0.0f64, |m, (s, g)| m.max(1.0 - s / g));
            if dual > 0.0 {
                for ((yk, sk), g) in y.iter().zip(&snr).zip(gamma) {
                    complementarity = complementarity.max((yk * (sk - g)).abs() / dual);
                }
            }
            if x > 0.0 {
                for ((zl, pw), b) in z.iter().zip(&power).zip(budgets) {
                    complementarity = complementarity.max((zl * (b * x - pw)).abs() / x);
                }
            }
            let pz: f64 = z.iter().zip(budgets).map(|(a, b)| a * b).sum();
            (x, dual, short, (pz - 1.0).abs())
        }
    };
    let dual_feasibility_residual = neg(y).max(neg(z)).max(normalization).max(s_neg);
    let gap_rel = rel(primal_obj, dual_obj);
    let dual_bound = dual_bound(prob, y, z)?;

    let feasibility_slack = match prob.variant {
        Variant::Mmf => MMF_POWER_SLACK,
        _ => QOS_SNR_SLACK,
    };
    let finite = [primal_obj, dual_obj, gap_rel, stationarity_residual, complementarity, feasibility_residual]
        .iter()
        .all(|v| v.is_finite());
    let within = |scale: f64| {
        gap_rel <= GAP_TOL * scale
            && stationarity_residual <= RESIDUAL_TOL * scale
            && complementarity <= RESIDUAL_TOL * scale
            && dual_feasibility_residual <= RESIDUAL_TOL * scale
            && feasibility_residual <= feasibility_slack * scale
    };
    let verdict = if !finite || primal_obj <= 0.0 {
        Verdict::Failed
    } else if within(1.0) {
        Verdict::Certified
    } else if within(MARGINAL_FACTOR) {
        Verdict::Marginal
    } else {
        Verdict::Failed
    };
    Ok(Certificate {
        primal_obj,
        dual_obj,
        gap_rel,
        stationarity_residual,
        complementarity,
        feasibility_residual,
        dual_feasibility_residual,
        dual_bound,
        verdict,
    })
}

/// Weak-duality bound obtained by repairing `(y, z)` into an exactly
/// feasible dual point.
///
/// MMF: with `y` normalized onto the simplex and `delta = max(0,
/// -lambda_min(D^H(z) - H^H(y)))`, the point `z + delta 1` is feasible
/// because `D^H(1) >= I`; the bound is `z^T p + delta sum(p)`.
/// Power minimization: `z` is normalized to `p^T z = 1` and `y` is shrunk by
/// the largest `s in [0, 1]` keeping `D^H(z) - s H^H(y)` PSD; the bound is
/// `s y^T gamma`.
pub fn dual_bound(prob: &SdpProblem, y: &[f64], z: &[f64]) -> Result<f64> {
    let budgets = prob.budgets();
    let y: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    let z: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
    match prob.variant {
        Variant::Mmf => {
            let total: f64 = y.iter().sum();
            if total <= 0.0 {
                return Ok(f64::INFINITY);
            }
            let y: Vec<f64> = y.iter().map(|v| v / total).collect();
            let gap = prob.adjoint_d(&z) - prob.adjoint_h(&y);
            let lam_min = *hermitian_eigen(&gap)?.values.last().unwrap();
            let delta = (-lam_min).max(0.0);
            Ok(z.iter().zip(budgets).map(|(a, b)| a * b).sum::<f64>() + delta * budgets.iter().sum::<f64>())
        }
        _ => {
            let gamma = prob.targets().expect("power minimization carries targets");
            let pz: f64 = z.iter().zip(budgets).map(|(a, b)| a * b).sum();
            if pz <= 0.0 {
                return Ok(0.0);
            }
            let z: Vec<f64> = z.iter().map(|v| v / pz).collect();
            let dz = prob.adjoint_d(&z);
            let hy = prob.adjoint_h(&y);
            let feasible = |s: f64| -> Result<bool> {
                let m = &dz - &hy * C64::new(s, 0.0);
                Ok(*hermitian_eigen(&m)?.values.last().unwrap() >= 0.0)
            };
            let scale = if feasible(1.0)? {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if feasible(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            Ok(scale * y.iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>())
        }
    }
}

/// Analytic optimum for a single UE.
///
/// MMF with one antenna per AP: co-phased full power, `SNR* = (sum_l
/// sqrt(P_l) |h_l|)^2 / sigma^2`. Power minimization with one AP: matched
/// filter, `x* = gamma sigma^2 / (P ||h||^2)`; with one antenna per AP,
/// `x* = gamma sigma^2 / (sum_l sqrt(P_l) |h_l|)^2`. Returns the variant's
/// objective (SNR for MMF, largest normalized per-AP power otherwise).
pub fn closed_form_single_ue(
    h: &CVec,
    noise_variance: f64,
    budgets: &[f64],
    antennas_per_ap: usize,
    variant: Variant,
    gamma: Option<f64>,
) -> Result<f64> {
    let num_aps = budgets.len();
    if antennas_per_ap == 0 || h.len() != num_aps * antennas_per_ap {
        return Err(Error::Dimension(format!("channel of length {} for {num_aps} APs", h.len())));
    }
    let coherent =
        |h: &CVec| -> f64 { budgets.iter().enumerate().map(|(l, p)| p.sqrt() * h[l].norm()).sum::<f64>().powi(2) };
    match variant {
        Variant::Mmf if antennas_per_ap == 1 => Ok(coherent(h) / noise_variance),
        Variant::Mmf => Err(Error::Unsupported("MMF closed form needs one antenna per AP".into())),
        Variant::Qos | Variant::SumPower => {
            let gamma = gamma.ok_or_else(|| Error::Config("power minimization needs a target".into()))?;
            if num_aps == 1 || variant == Variant::SumPower {
                let total: f64 = budgets.iter().sum();
                Ok(gamma * noise_variance / (total * vec_norm(h).powi(2)))
            } else if antennas_per_ap == 1 {
                Ok(gamma * noise_variance / coherent(h))
            } else {
                Err(Error::Unsupported("QoS closed form needs one AP or one antenna per AP".into()))
            }
        }
    }
}

/// Best max-min SNR of `w` after scaling it onto the tightest per-AP budget
/// (original selectors).
pub fn rank_one_mmf_value(prob: &SdpProblem, w: &CVec) -> f64 {
    let ww = crate::linalg::outer(w);
    let load = prob.base_power_values(&ww).iter().zip(prob.budgets()).fold(0.0f64, |m, (pw, b)| m.max(pw / b));
    if load <= 0.0 {
        return 0.0;
    }
    let snr_min = prob.snr_values(&ww).into_iter().fold(f64::INFINITY, f64::min);
    snr_min / load
}

/// Unit vector from hyperspherical magnitude angles and relative phases;
/// the first coordinate is real and nonnegative.
fn direction(angles: &[f64], phases: &[f64]) -> CVec {
    let n = angles.len() + 1;
    let mut mags = vec![0.0; n];
    let mut rem = 1.0;
    for i in 0..n - 1 {
        mags[i] = rem * angles[i].cos();
        rem *= angles[i].sin();
    }
    mags[n - 1] = rem;
    CVec::from_fn(n, |i, _| if i == 0 { C64::new(mags[0], 0.0) } else { C64::from_polar(mags[i], phases[i - 1]) })
}

/// Global rank-1 MMF search for `n <= 3`.
///
/// Exhausts a grid over complex unit directions (`grid_density` points per
/// magnitude angle on `[0, pi/2]`, twice that per phase on `[0, 2 pi)`),
/// scales each to its tightest per-AP budget, then polishes the best few
/// grid points with a shrinking pattern search.
pub fn brute_force_rank1(prob: &SdpProblem, grid_density: usize) -> Result<f64> {
    let n = prob.dim();
    if n > 3 {
        return Err(Error::Unsupported(format!("brute force needs n <= 3, got {n}")));
    }
    if prob.variant != Variant::Mmf {
        return Err(Error::Unsupported("brute force covers the MMF problem".into()));
    }
    if grid_density < 2 {
        return Err(Error::Config("grid density must be at least 2".into()));
    }
    if n == 1 {
        return Ok(rank_one_mmf_value(prob, &CVec::from_element(1, C64::new(1.0, 0.0))));
    }
    let dims = 2 * (n - 1);
    let steps: Vec<f64> = (0..dims)
        .map(|d| {
            if d < n - 1 {
                std::f64::consts::FRAC_PI_2 / (grid_density - 1) as f64
            } else {
                std::f64::consts::PI / grid_density as f64
            }
        })
        .collect();
    let counts: Vec<usize> = (0..dims).map(|d| if d < n - 1 { grid_density } else { 2 * grid_density }).collect();
    let eval = |p: &[f64]| rank_one_mmf_value(prob, &direction(&p[..n - 1], &p[n - 1..]));

    const KEEP: usize = 8;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
    let total: usize = counts.iter().product();
    let mut point = vec![0.0; dims];
    for idx in 0..total {
        let mut rem = idx;
        for d in 0..dims {
            point[d] = (rem % counts[d]) as f64 * steps[d];
            rem /= counts[d];
        }
        let v = eval(&point);
        if best.len() < KEEP || v > best.last().unwrap().0 {
            best.push((v, point.clone()));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(KEEP);
        }
    }

    let mut overall = best[0].0;
    for (mut value, mut p) in best {
        let mut step: Vec<f64> = steps.clone();
        while step.iter().any(|&s| s > 1e-10) {
            let mut improved = false;
            for d in 0..dims {
                for sign in [1.0, -1.0] {
                    let mut q = p.clone();
                    q[d] += sign * step[d];
                    let v = eval(&q);
                    if v > value {
                        value = v;
                        p = q;
                        improved = true;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s *= 0.5);
            }
        }
        overall = overall.max(value);
    }
    Ok(overall)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consistency {
    /// Certified MMF relaxation value.
    pub t_star: f64,
    /// Certified QoS relaxation value with targets `target_scale * t_star`.
    pub x_star: f64,
    pub mmf_certificate: Certificate,
    pub qos_certificate: Certificate,
}

/// Solves the MMF relaxation, then the QoS relaxation with every target set
/// to `target_scale * t*`. By linearity in `W` the QoS optimum is
/// `target_scale`. Returns `Unsupported` when either solve does not certify.
pub fn mmf_qos_consistency(
    net: &ChannelSet,
    p_max: &[f64],
    mmf_cfg: &SolverConfig,
    qos_cfg: &SolverConfig,
    target_scale: f64,
) -> Result<Consistency> {
    let mmf = SdpProblem::build_mmf(net, p_max)?;
    let (state, _) = solve_dual(&mmf, mmf_cfg)?;
    let mmf_cert = certify(&mmf, &state.primal(mmf_cfg.rho), &state.y, &state.z, &state.s)?;
    if !mmf_cert.is_certified() {
        return Err(Error::Unsupported(format!("MMF solve not certified (gap {:.2e})", mmf_cert.gap_rel)));
    }
    let t_star = mmf_cert.primal_obj;
    let gamma = vec![target_scale * t_star; net.num_ues()];
    let qos = SdpProblem::build_qos(net, p_max, &gamma)?;
    let (state, _) = solve_dual(&qos, qos_cfg)?;
    let qos_cert = certify(&qos, &state.primal(qos_cfg.rho), &state.y, &state.z, &state.s)?;
    if !qos_cert.is_certified() {
        return Err(Error::Unsupported(format!("QoS solve not certified (gap {:.2e})", qos_cert.gap_rel)));
    }
    Ok(Consistency { t_star, x_star: qos_cert.primal_obj, mmf_certificate: mmf_cert, qos_certificate: qos_cert })
}
