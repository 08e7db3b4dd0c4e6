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

//! Two-level ADMM on the dual SDP.
//!
//! The outer loop updates `{y, z}` (through an inner ADMM on a small QP),
//! the PSD slack `S`, and the scaled primal `W_bar = W / rho`. The inner loop
//! runs a fixed number of iterations with a cached factorization of `Q + R`.

use std::collections::VecDeque;

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, is_finite, trace_re, CMat};
use crate::problem::{QpData, SdpProblem, Variant};
use crate::projection::{project_nonneg, project_psd, project_simplex, project_weighted_simplex};

/// Number of residual entries kept in [`ConvergenceReport::residual_history`].
pub const HISTORY_CAPACITY: usize = 2000;

/// Diagonal of the inner penalty matrix `R = diag(mu_s, mu_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InnerPenalty {
    /// One value for every SNR dual and one for every power dual.
    Uniform {
        mu_snr: f64,
        mu_power: f64,
    },
    PerConstraint {
        mu_snr: Vec<f64>,
        mu_power: Vec<f64>,
    },
    /// `mu_i = factor * Q_ii`, recomputed whenever `Q` changes.
    QpDiagonal {
        factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub inner_penalty: InnerPenalty,
    pub eps_dual: f64,
    pub eps_prim: f64,
    pub inner_iters: usize,
    pub max_outer: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::published(Variant::Mmf)
    }
}

impl SolverConfig {
    /// Published parameters for each variant.
    pub fn published(variant: Variant) -> Self {
        let (rho, mu_snr) = match variant {
            Variant::Mmf => (0.2, 5e6),
            Variant::Qos => (0.2, 3e6),
            Variant::SumPower => (1.0, 2e6),
        };
        Self {
            rho,
            inner_penalty: InnerPenalty::Uniform { mu_snr, mu_power: 5.0 },
            eps_dual: 2e-5,
            eps_prim: 7e-5,
            inner_iters: 50,
            max_outer: 1000,
        }
    }

    /// Parameters matched to the scale of the simulated problems.
    ///
    /// `rho` tracks the ratio between primal and dual magnitudes: for MMF the
    /// dual carries the SNR scale (hundreds), for the power-minimization
    /// variants it is normalized to one. Inner penalties follow the diagonal of
    /// `Q`, and the tolerances are tight enough for the certificate slacks.
    pub fn tuned(variant: Variant) -> Self {
        let rho = match variant {
            Variant::Mmf => 0.03,
            Variant::Qos | Variant::SumPower => 5.0,
        };
        Self {
            rho,
            inner_penalty: InnerPenalty::QpDiagonal { factor: 1.0 },
            eps_dual: 1e-6,
            eps_prim: 1e-6,
            inner_iters: 50,
            max_outer: 3000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rho", self.rho)?;
        positive("eps_dual", self.eps_dual)?;
        positive("eps_prim", self.eps_prim)?;
        match &self.inner_penalty {
            InnerPenalty::Uniform { mu_snr, mu_power } => {
                positive("mu_snr", *mu_snr)?;
                positive("mu_power", *mu_power)?;
            }
            InnerPenalty::PerConstraint { mu_snr, mu_power } => {
                for &m in mu_snr.iter().chain(mu_power) {
                    positive("inner penalty", m)?;
                }
            }
            InnerPenalty::QpDiagonal { factor } => positive("penalty factor", *factor)?,
        }
        if self.inner_iters == 0 {
            return Err(Error::Config("inner_iters must be at least 1".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolves the inner penalty diagonal for a QP with `num_snr` SNR duals.
    pub fn penalty_diagonal(&self, q: &QpData, num_snr: usize) -> Result<DVector<f64>> {
        let size = q.c.len();
        match &self.inner_penalty {
            InnerPenalty::Uniform { mu_snr, mu_power } => {
                Ok(DVector::from_fn(size, |i, _| if i < num_snr { *mu_snr } else { *mu_power }))
            }
            InnerPenalty::PerConstraint { mu_snr, mu_power } => {
                if mu_snr.len() + mu_power.len() != size || mu_snr.len() != num_snr {
                    return Err(Error::Dimension(format!(
                        "{} + {} inner penalties for {num_snr} + {} constraints",
                        mu_snr.len(),
                        mu_power.len(),
                        size - num_snr
                    )));
                }
                Ok(DVector::from_iterator(size, mu_snr.iter().chain(mu_power).copied()))
            }
            InnerPenalty::QpDiagonal { factor } => {
                let diag = q.q.diagonal();
                let floor = diag.max() * 1e-12;
                let floor = if floor > 0.0 { floor } else { 1.0 };
                Ok(diag.map(|d| factor * d.max(floor)))
            }
        }
    }
}

/// Cached factorization of `Q + R` for the inner x-update.
pub struct InnerSolver {
    factor: Cholesky<f64, Dyn>,
    penalty: DVector<f64>,
}

impl InnerSolver {
    pub fn new(qp: &QpData, penalty: DVector<f64>) -> Result<Self> {
        let mut m = qp.q.clone();
        for i in 0..penalty.len() {
            m[(i, i)] += penalty[i];
        }
        let factor = Cholesky::new(m).ok_or_else(|| Error::Numeric("Q + R is not positive definite".into()))?;
        Ok(Self { factor, penalty })
    }

    pub fn penalty(&self) -> &DVector<f64> {
        &self.penalty
    }

    /// `x = (Q + R)^{-1} (-c + R (v - t_bar))`
    pub fn x_update(&self, c: &DVector<f64>, v: &DVector<f64>, t_bar: &DVector<f64>) -> DVector<f64> {
        let rhs = -c + self.penalty.component_mul(&(v - t_bar));
        self.factor.solve(&rhs)
    }
}

/// One-shot x-update that factorizes `Q + R` on the spot.
pub fn x_update(qp: &QpData, penalty: &[f64], v: &DVector<f64>, t_bar: &DVector<f64>) -> Result<DVector<f64>> {
    let solver = InnerSolver::new(qp, DVector::from_column_slice(penalty))?;
    Ok(solver.x_update(&qp.c, v, t_bar))
}

/// Feasible set of the `{y, z}` QP.
#[derive(Debug, Clone)]
pub enum InnerConstraint {
    /// `sum(y) = 1, y >= 0, z >= 0`
    Mmf,
    /// `y >= 0, p^T z = 1, z >= 0`
    PowerMin { budgets: Vec<f64> },
}

impl InnerConstraint {
    pub fn for_problem(prob: &SdpProblem) -> Self {
        match prob.variant {
            Variant::Mmf => InnerConstraint::Mmf,
            _ => InnerConstraint::PowerMin { budgets: prob.budgets().to_vec() },
        }
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// R-weighted projection of `a` onto `{q : w^T q = tau, q >= 0}`; uses the
/// sorting projection directly when both weights and metric are constant.
fn project_block(a: &[f64], weights: &[f64], metric: &[f64], tau: f64) -> Result<Vec<f64>> {
    if is_constant(weights) && is_constant(metric) {
        project_simplex(a, tau / weights[0])
    } else {
        project_weighted_simplex(a, weights, metric, tau)
    }
}

/// Runs exactly `iters` inner iterations from the warm start `(v, t_bar)`,
/// updating both in place. Returns `(y, z)`, the projected block of `v`.
pub fn inner_admm(
    solver: &InnerSolver,
    c: &DVector<f64>,
    constraint: &InnerConstraint,
    num_snr: usize,
    v: &mut DVector<f64>,
    t_bar: &mut DVector<f64>,
    iters: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let size = c.len();
    let mu = solver.penalty().as_slice();
    let (mu_y, mu_z) = mu.split_at(num_snr);
    let ones_y = vec![1.0; num_snr];
    for _ in 0..iters {
        let x = solver.x_update(c, v, t_bar);
        let shifted = &x + &*t_bar;
        let (y_raw, z_raw) = shifted.as_slice().split_at(num_snr);
        let (y, z) = match constraint {
            InnerConstraint::Mmf => (project_block(y_raw, &ones_y, mu_y, 1.0)?, project_nonneg(z_raw)),
            InnerConstraint::PowerMin { budgets } => (project_nonneg(y_raw), project_block(z_raw, budgets, mu_z, 1.0)?),
        };
        *v = DVector::from_iterator(size, y.into_iter().chain(z));
        *t_bar += &x - &*v;
    }
    let (y, z) = v.as_slice().split_at(num_snr);
    Ok((y.to_vec(), z.to_vec()))
}

/// `S = Pi_psd(D^H(z) - H^H(y) - W_bar)`
pub fn s_update(prob: &SdpProblem, y: &[f64], z: &[f64], w_bar: &CMat) -> Result<CMat> {
    let x = prob.adjoint_d(z) - prob.adjoint_h(y) - w_bar;
    project_psd(&x)
}

/// `W_bar + H^H(y) + S - D^H(z)`
pub fn w_bar_update(prob: &SdpProblem, y: &[f64], z: &[f64], s: &CMat, w_bar: &CMat) -> CMat {
    w_bar + prob.adjoint_h(y) + s - prob.adjoint_d(z)
}

#[derive(Debug, Clone)]
pub struct AdmmState {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: CMat,
    pub w_bar: CMat,
    pub v: DVector<f64>,
    pub t_bar: DVector<f64>,
    pub prev_s: Option<CMat>,
    pub prev_w_bar: Option<CMat>,
    pub outer_iters: usize,
}

impl AdmmState {
    /// `y = z = t_bar = 0`, `S = 0`, `W_bar = P_T / (rho n) I`.
    pub fn initial(prob: &SdpProblem, rho: f64) -> Self {
        let n = prob.dim();
        let k = prob.num_ues();
        let m = prob.num_power();
        let scale = prob.total_budget() / (rho * n as f64);
        Self {
            y: vec![0.0; k],
            z: vec![0.0; m],
            s: CMat::zeros(n, n),
            w_bar: CMat::identity(n, n) * crate::linalg::C64::new(scale, 0.0),
            v: DVector::zeros(k + m),
            t_bar: DVector::zeros(k + m),
            prev_s: None,
            prev_w_bar: None,
            outer_iters: 0,
        }
    }

    /// Keeps `(y, z, S, W_bar)` but clears the inner warm start and counters.
    pub fn restart(&self) -> Self {
        let size = self.v.len();
        Self {
            v: DVector::zeros(size),
            t_bar: DVector::zeros(size),
            prev_s: None,
            prev_w_bar: None,
            outer_iters: 0,
            ..self.clone()
        }
    }

    /// Primal iterate `W = rho W_bar`.
    pub fn primal(&self, rho: f64) -> CMat {
        &self.w_bar * crate::linalg::C64::new(rho, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `rho tr(W_bar)`
    pub transmit_power: f64,
    pub dual_residual: f64,
    pub prim_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub outer_iters: usize,
    pub dual_residual: f64,
    pub prim_residual: f64,
    pub converged: bool,
    /// `tr(W_bar) <= 0` at the last check.
    pub degenerate: bool,
    pub residual_history: VecDeque<IterationRecord>,
}

/// Stopping test on the last two outer iterates. Residuals are `+inf` before
/// the second outer iteration and whenever their denominator vanishes.
pub fn check_convergence(state: &AdmmState, eps_dual: f64, eps_prim: f64) -> ConvergenceReport {
    let tr = trace_re(&state.w_bar);
    let degenerate = !(tr > 0.0);
    let (dual_residual, prim_residual) = match (&state.prev_w_bar, &state.prev_s) {
        (Some(pw), Some(ps)) if state.outer_iters >= 2 => {
            let dual = if degenerate { f64::INFINITY } else { trace_re(&(&state.w_bar - pw)).abs() / tr };
            let s_norm = frobenius(&state.s);
            let prim = if s_norm > 0.0 { frobenius(&(&state.s - ps)) / s_norm } else { f64::INFINITY };
            (dual, prim)
        }
        _ => (f64::INFINITY, f64::INFINITY),
    };
    ConvergenceReport {
        outer_iters: state.outer_iters,
        dual_residual,
        prim_residual,
        converged: dual_residual < eps_dual && prim_residual < eps_prim,
        degenerate,
        residual_history: VecDeque::new(),
    }
}

/// Cold-start solve.
pub fn solve_dual(prob: &SdpProblem, cfg: &SolverConfig) -> Result<(AdmmState, ConvergenceReport)> {
    solve_dual_from(prob, cfg, AdmmState::initial(prob, cfg.rho), None)
}

/// Runs outer iterations from `state` until both stopping criteria hold or
/// `max_outer` is reached. `sink` receives every outer iteration.
pub fn solve_dual_from(
    prob: &SdpProblem,
    cfg: &SolverConfig,
    mut state: AdmmState,
    mut sink: Option<&mut dyn FnMut(&IterationRecord)>,
) -> Result<(AdmmState, ConvergenceReport)> {
    cfg.validate()?;
    let num_snr = prob.num_ues();
    let size = num_snr + prob.num_power();
    if state.y.len() != num_snr || state.v.len() != size || state.w_bar.nrows() != prob.dim() {
        return Err(Error::Dimension("solver state does not match the problem".into()));
    }
    let rho = cfg.rho;
    let mut qp = prob.build_qp(rho, &state.s, &state.w_bar)?;
    let penalty = cfg.penalty_diagonal(&qp, num_snr)?;
    let inner = InnerSolver::new(&qp, penalty)?;
    let constraint = InnerConstraint::for_problem(prob);
    let mut history = VecDeque::with_capacity(HISTORY_CAPACITY.min(cfg.max_outer));
    let mut report = check_convergence(&state, cfg.eps_dual, cfg.eps_prim);

    for _ in 0..cfg.max_outer {
        qp.c = prob.qp_linear(rho, &(&state.s + &state.w_bar));
        let (y, z) = inner_admm(&inner, &qp.c, &constraint, num_snr, &mut state.v, &mut state.t_bar, cfg.inner_iters)?;
        // D^H(z) - H^H(y) is shared by the S and W_bar updates
        let slack_target = prob.adjoint_d(&z) - prob.adjoint_h(&y);
        let s = project_psd(&(&slack_target - &state.w_bar))?;
        let w_bar = &state.w_bar + &s - &slack_target;
        if !is_finite(&w_bar) || !is_finite(&s) {
            return Err(Error::Numeric(format!("non-finite iterate at outer iteration {}", state.outer_iters + 1)));
        }
        state.prev_s = Some(std::mem::replace(&mut state.s, s));
        state.prev_w_bar = Some(std::mem::replace(&mut state.w_bar, w_bar));
        state.y = y;
        state.z = z;
        state.outer_iters += 1;

        report = check_convergence(&state, cfg.eps_dual, cfg.eps_prim);
        let record = IterationRecord {
            iteration: state.outer_iters,
            transmit_power: rho * trace_re(&state.w_bar),
            dual_residual: report.dual_residual,
            prim_residual: report.prim_residual,
        };
        if history.len() == HISTORY_CAPACITY {
            history.pop_front();
        }
        history.push_back(record);
        if let Some(f) = sink.as_mut() {
            f(&record);
        }
        if report.converged {
            break;
        }
    }
    report.residual_history = history;
    Ok((state, report))
}
