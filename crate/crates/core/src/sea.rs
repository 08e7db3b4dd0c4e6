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

//! Successive elimination of secondary eigendirections.
//!
//! After each relaxed solve the numerical rank of `W` is measured; while it
//! exceeds one, the second eigenvector `u` is folded into every power
//! constraint as `zeta u u^H` and the problem is solved again.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, CVec, SortedEigen, C64};
use crate::oracle::{certify, Certificate};
use crate::problem::{SdpProblem, Variant};
use crate::solver::{solve_dual_from, AdmmState, ConvergenceReport, IterationRecord, SolverConfig};

/// Default penalty factor, relative to the unit eigenvalues of the AP selectors.
///
/// Larger values slow the outer loop: the dual step along each penalized
/// power map shrinks roughly with `1 / zeta^2`.
pub const DEFAULT_ZETA: f64 = 0.5;

/// Penalty factor for the eliminated directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZetaRepr", into = "ZetaRepr")]
pub enum Zeta {
    /// `10 P_T / (tr(W_bar) / n)` measured after the first round.
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ZetaRepr {
    Value(f64),
    Name(String),
}

impl TryFrom<ZetaRepr> for Zeta {
    type Error = String;
    fn try_from(r: ZetaRepr) -> std::result::Result<Self, String> {
        match r {
            ZetaRepr::Value(v) => Ok(Zeta::Fixed(v)),
            ZetaRepr::Name(s) if s == "auto" => Ok(Zeta::Auto),
            ZetaRepr::Name(s) => Err(format!("zeta must be a number or \"auto\", got {s:?}")),
        }
    }
}

impl From<Zeta> for ZetaRepr {
    fn from(z: Zeta) -> Self {
        match z {
            Zeta::Auto => ZetaRepr::Name("auto".into()),
            Zeta::Fixed(v) => ZetaRepr::Value(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeaConfig {
    pub zeta: Zeta,
    /// Eigenvalues above `rank_tol * lambda_1` count toward the rank.
    pub rank_tol: f64,
    pub max_rounds: usize,
    /// Start each round from the previous round's `(y, z, S, W_bar)` instead
    /// of the initial point.
    pub warm_start: bool,
}

impl Default for SeaConfig {
    fn default() -> Self {
        Self { zeta: Zeta::Fixed(DEFAULT_ZETA), rank_tol: 1e-2, max_rounds: 20, warm_start: false }
    }
}

impl SeaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Zeta::Fixed(z) = self.zeta {
            if !(z >= 0.0) || !z.is_finite() {
                return Err(Error::Config(format!("zeta must be nonnegative, got {z}")));
            }
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::Config(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

fn rank_of(values: &[f64], rank_tol: f64) -> usize {
    match values.first() {
        Some(&top) if top > 0.0 => values.iter().filter(|&&v| v > rank_tol * top).count(),
        _ => 0,
    }
}

/// Number of eigenvalues above `rank_tol * lambda_1`; zero for `W = 0`.
pub fn numerical_rank(w: &CMat, rank_tol: f64) -> Result<usize> {
    Ok(rank_of(&hermitian_eigen(w)?.values, rank_tol))
}

/// Unit eigenvector of the second largest eigenvalue.
pub fn second_eigvec(w: &CMat, rank_tol: f64) -> Result<CVec> {
    let eig = hermitian_eigen(w)?;
    let rank = rank_of(&eig.values, rank_tol);
    if rank < 2 {
        return Err(Error::Contract(format!("second eigenvector requested for numerical rank {rank}")));
    }
    Ok(unit_column(&eig, 1))
}

fn unit_column(eig: &SortedEigen, i: usize) -> CVec {
    let u = eig.vectors.column(i).into_owned();
    let norm = crate::linalg::vec_norm(&u);
    u / C64::new(norm, 0.0)
}

/// `sqrt(lambda_1) q_1` with the largest-magnitude entry made real positive.
fn principal_beamformer(eig: &SortedEigen) -> CVec {
    let q = eig.vectors.column(0).into_owned();
    let lam = eig.values[0].max(0.0);
    let pivot = q.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    q * (phase * lam.sqrt())
}

/// Rank-1 factor of `W`; fails unless the numerical rank is exactly one.
pub fn extract_beamformer(w: &CMat, rank_tol: f64) -> Result<CVec> {
    let eig = hermitian_eigen(w)?;
    let rank = rank_of(&eig.values, rank_tol);
    if rank != 1 {
        return Err(Error::Contract(format!("beamformer extraction needs rank 1, got {rank}")));
    }
    Ok(principal_beamformer(&eig))
}

#[derive(Debug, Clone)]
pub struct RoundSummary {
    pub outer_iters: usize,
    pub converged: bool,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rank: usize,
    /// Relaxation objective of this round's (penalized) problem.
    pub objective: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub variant: Variant,
    /// Final `rho W_bar`.
    pub w: CMat,
    /// Beamformer scaled onto the feasible boundary (original selectors).
    pub beamformer: CVec,
    /// MMF: min SNR; QoS: largest normalized per-AP power; sum power: watts.
    pub objective: f64,
    pub min_snr: f64,
    pub min_se: f64,
    pub snr: Vec<f64>,
    pub per_ap_power: Vec<f64>,
    pub total_power: f64,
    pub sea_rounds: usize,
    pub outer_iters_per_round: Vec<usize>,
    pub rounds: Vec<RoundSummary>,
    pub rank_history: Vec<(f64, f64)>,
    /// Bound from the first (unpenalized) round: an upper bound on the MMF
    /// relaxation, a lower bound on the power-minimization relaxation.
    pub sdr_bound: f64,
    pub rank_one: bool,
    /// Certificate of the last round's solve.
    pub certificate: Certificate,
    pub zeta: f64,
    pub penalty_dirs: Vec<CVec>,
    pub degenerate_ues: Vec<usize>,
    pub final_problem: SdpProblem,
    pub final_state: AdmmState,
}

impl SolveReport {
    pub fn outer_iters_total(&self) -> usize {
        self.outer_iters_per_round.iter().sum()
    }

    pub fn max_per_ap_power(&self) -> f64 {
        self.per_ap_power.iter().copied().fold(0.0, f64::max)
    }

    /// Relative distance between the rank-1 objective and the relaxation
    /// bound, oriented so that it is nonnegative for a valid bound.
    pub fn gap_to_bound(&self) -> f64 {
        match self.variant {
            Variant::Mmf => (self.sdr_bound - self.objective) / self.sdr_bound,
            _ => (self.objective - self.sdr_bound) / self.objective,
        }
    }
}

/// Scales `w` onto the feasible boundary: MMF to the tightest per-AP budget,
/// power minimization to meet the tightest SNR target exactly.
fn scale_to_boundary(prob: &SdpProblem, w: &CVec) -> CVec {
    let ww = crate::linalg::outer(w);
    let factor = match prob.variant {
        Variant::Mmf => {
            let load = prob.base_power_values(&ww).iter().zip(prob.budgets()).fold(0.0f64, |m, (p, b)| m.max(p / b));
            if load > 0.0 {
                1.0 / load
            } else {
                0.0
            }
        }
        _ => {
            let gamma = prob.targets().expect("power minimization carries targets");
            let worst = prob.snr_values(&ww).iter().zip(gamma).fold(f64::INFINITY, |m, (s, g)| m.min(s / g));
            if worst > 0.0 && worst.is_finite() {
                1.0 / worst
            } else {
                0.0
            }
        }
    };
    w * C64::new(factor.sqrt(), 0.0)
}

fn relaxed_objective(prob: &SdpProblem, w: &CMat) -> f64 {
    match prob.variant {
        Variant::Mmf => prob.snr_values(w).into_iter().fold(f64::INFINITY, f64::min),
        _ => prob.power_values(w).iter().zip(prob.budgets()).fold(0.0f64, |m, (p, b)| m.max(p / b)),
    }
}

/// Full solve: relaxation, elimination rounds, beamformer extraction.
pub fn run_sea(prob: &SdpProblem, solver_cfg: &SolverConfig, sea_cfg: &SeaConfig) -> Result<SolveReport> {
    run_sea_traced(prob, solver_cfg, sea_cfg, None)
}

/// As [`run_sea`]; `sink` receives `(round, record)` for every outer iteration.
pub fn run_sea_traced(
    prob: &SdpProblem,
    solver_cfg: &SolverConfig,
    sea_cfg: &SeaConfig,
    mut sink: Option<&mut dyn FnMut(usize, &IterationRecord)>,
) -> Result<SolveReport> {
    solver_cfg.validate()?;
    sea_cfg.validate()?;
    let rho = solver_cfg.rho;
    let mut current = match sea_cfg.zeta {
        Zeta::Fixed(z) => prob.clone().with_penalty_factor(z)?,
        Zeta::Auto => prob.clone(),
    };
    let mut start = AdmmState::initial(&current, rho);
    let mut rounds: Vec<RoundSummary> = Vec::new();
    let mut sdr_bound = f64::NAN;
    let mut final_state = None;
    let mut final_eig = None;

    for round in 1..=sea_cfg.max_rounds {
        let mut forward = |rec: &IterationRecord| {
            if let Some(f) = sink.as_mut() {
                f(round, rec);
            }
        };
        let (state, conv): (AdmmState, ConvergenceReport) =
            solve_dual_from(&current, solver_cfg, start, Some(&mut forward))?;
        let w = state.primal(rho);
        let eig = hermitian_eigen(&w)?;
        let rank = rank_of(&eig.values, sea_cfg.rank_tol);
        let cert = certify(&current, &w, &state.y, &state.z, &state.s)?;
        if round == 1 {
            sdr_bound = cert.dual_bound;
            if sea_cfg.zeta == Zeta::Auto {
                let tr_mean = crate::linalg::trace_re(&state.w_bar) / current.dim() as f64;
                let zeta = if tr_mean > 0.0 { 10.0 * current.total_budget() / tr_mean } else { 0.0 };
                current = current.with_penalty_factor(zeta)?;
            }
        }
        rounds.push(RoundSummary {
            outer_iters: conv.outer_iters,
            converged: conv.converged,
            lambda1: eig.values[0],
            lambda2: eig.values.get(1).copied().unwrap_or(0.0),
            rank,
            objective: relaxed_objective(&current, &w),
            certificate: cert,
        });
        if rank <= 1 || round == sea_cfg.max_rounds {
            final_state = Some(state);
            final_eig = Some(eig);
            break;
        }
        let u = unit_column(&eig, 1);
        current = current.apply_sea_penalty(&u)?;
        start = if sea_cfg.warm_start { state.restart() } else { AdmmState::initial(&current, rho) };
    }

    let state = final_state.expect("at least one round runs");
    let eig = final_eig.expect("at least one round runs");
    let last = rounds.last().expect("at least one round runs");
    let rank_one = last.rank == 1;
    let beamformer = scale_to_boundary(&current, &principal_beamformer(&eig));
    let ww = crate::linalg::outer(&beamformer);
    let snr = current.snr_values(&ww);
    let per_ap_power: Vec<f64> = (0..current.num_aps())
        .map(|l| {
            let n_ant = current.antennas_per_ap();
            (l * n_ant..(l + 1) * n_ant).map(|i| beamformer[i].norm_sqr()).sum()
        })
        .collect();
    let total_power: f64 = per_ap_power.iter().sum();
    let min_snr = snr.iter().copied().fold(f64::INFINITY, f64::min);
    let objective = match current.variant {
        Variant::Mmf => min_snr,
        Variant::Qos => per_ap_power.iter().zip(prob.budgets()).fold(0.0f64, |m, (p, b)| m.max(p / b)),
        Variant::SumPower => total_power,
    };
    let sdr_bound = match current.variant {
        Variant::SumPower => sdr_bound * current.total_budget(),
        _ => sdr_bound,
    };
    Ok(SolveReport {
        variant: current.variant,
        w: state.primal(rho),
        beamformer,
        objective,
        min_snr,
        min_se: (1.0 + min_snr.max(0.0)).log2(),
        snr,
        per_ap_power,
        total_power,
        sea_rounds: rounds.len(),
        outer_iters_per_round: rounds.iter().map(|r| r.outer_iters).collect(),
        rank_history: rounds.iter().map(|r| (r.lambda1, r.lambda2)).collect(),
        sdr_bound,
        rank_one,
        certificate: last.certificate.clone(),
        zeta: current.zeta(),
        penalty_dirs: current.penalty_dirs().to_vec(),
        degenerate_ues: current.degenerate_ues().to_vec(),
        rounds,
        final_problem: current,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, outer, vec_norm};
    use crate::netsim::ChannelSet;
    use crate::solver::InnerPenalty;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))))
    }

    fn unit_config() -> SolverConfig {
        let mut cfg = SolverConfig::published(Variant::Mmf);
        cfg.rho = 1.0;
        cfg.inner_penalty = InnerPenalty::QpDiagonal { factor: 1.0 };
        cfg.eps_dual = 1e-7;
        cfg.eps_prim = 1e-7;
        cfg.max_outer = 5000;
        cfg
    }

    fn random_net(rng: &mut ChaCha8Rng, l: usize, n_ant: usize, k: usize) -> ChannelSet {
        let n = l * n_ant;
        let channels = (0..k)
            .map(|_| CVec::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            .collect();
        ChannelSet::new(l, n_ant, channels, vec![0.1; k]).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&diag(&[1.0, 1e-9]), 1e-2).unwrap(), 1);
        assert_eq!(numerical_rank(&CMat::identity(3, 3), 1e-2).unwrap(), 3);
        assert_eq!(numerical_rank(&diag(&[1.0, 0.011, 0.009]), 1e-2).unwrap(), 2);
        assert_eq!(numerical_rank(&CMat::zeros(2, 2), 1e-2).unwrap(), 0);
    }

    #[test]
    fn second_eigvec_examples() {
        let u = second_eigvec(&diag(&[2.0, 1.0]), 1e-2).unwrap();
        assert!((u[1].norm() - 1.0).abs() < 1e-12 && u[0].norm() < 1e-12);

        // rotate diag(2, 1) by a unitary built from angle phi
        let phi: f64 = 0.7;
        let rot = CMat::from_row_slice(
            2,
            2,
            &[C64::new(phi.cos(), 0.0), C64::new(-phi.sin(), 0.0), C64::new(phi.sin(), 0.0), C64::new(phi.cos(), 0.0)],
        );
        let w = &rot * diag(&[2.0, 1.0]) * rot.adjoint();
        let u = second_eigvec(&w, 1e-2).unwrap();
        let expected = rot.column(1).into_owned();
        assert!((expected.dotc(&u).norm() - 1.0).abs() < 1e-12);
        let top = hermitian_eigen(&w).unwrap().vectors.column(0).into_owned();
        assert!(top.dotc(&u).norm() < 1e-8);
        assert!(matches!(second_eigvec(&diag(&[1.0, 0.0]), 1e-2), Err(Error::Contract(_))));
    }

    #[test]
    fn beamformer_extraction() {
        let w0 = CVec::from_vec(vec![C64::new(0.3, -0.4), C64::new(-1.0, 0.2), C64::new(0.1, 0.1), C64::new(0.0, 0.5)]);
        let w = extract_beamformer(&outer(&w0), 1e-2).unwrap();
        let phase = w0.dotc(&w) / C64::new(vec_norm(&w0).powi(2), 0.0);
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(frobenius(&(outer(&w) - outer(&w0))) < 1e-10);
        let pivot = w.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
        assert!(extract_beamformer(&CMat::identity(2, 2), 1e-2).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = random_net(&mut rng, 2, 2, 2);
        let prob = SdpProblem::build_mmf(&net, &[1.0, 1.0]).unwrap();
        let ww = outer(&w);
        for l in 0..2 {
            let block: f64 = (2 * l..2 * l + 2).map(|i| w[i].norm_sqr()).sum();
            assert!((block - prob.base_power_values(&ww)[l]).abs() < 1e-8);
        }
        for k in 0..2 {
            let direct = net.channels[k].dotc(&w).norm_sqr() / net.noise_variances[k];
            assert!((direct - prob.snr_values(&ww)[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn config_validation_and_zeta_serde() {
        assert!(SeaConfig::default().validate().is_ok());
        let bad = SeaConfig { rank_tol: 1.0, ..SeaConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SeaConfig { zeta: Zeta::Fixed(-1.0), ..SeaConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let cfg: SeaConfig = serde_json::from_str(r#"{"zeta": "auto"}"#).unwrap();
        assert_eq!(cfg.zeta, Zeta::Auto);
        let cfg: SeaConfig = serde_json::from_str(r#"{"zeta": 3.5, "max_rounds": 4}"#).unwrap();
        assert_eq!(cfg.zeta, Zeta::Fixed(3.5));
        assert_eq!(cfg.max_rounds, 4);
        assert!(serde_json::from_str::<SeaConfig>(r#"{"zeta": "big"}"#).is_err());
    }

    #[test]
    fn single_ue_is_rank_one_in_one_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let net = random_net(&mut rng, 2, 2, 1);
        let prob = SdpProblem::build_mmf(&net, &[1.0, 1.0]).unwrap();
        let rep = run_sea(&prob, &unit_config(), &SeaConfig::default()).unwrap();
        assert_eq!(rep.sea_rounds, 1);
        assert!(rep.rank_one);
        assert!(rep.penalty_dirs.is_empty());
        assert!(rep.objective <= rep.sdr_bound * (1.0 + 1e-9));
    }

    #[test]
    fn rounds_penalize_and_report_true_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = random_net(&mut rng, 2, 2, 6);
        let prob = SdpProblem::build_mmf(&net, &[1.0, 1.0]).unwrap();
        let rep = run_sea(&prob, &unit_config(), &SeaConfig::default()).unwrap();
        assert!(rep.sea_rounds <= 20);
        assert_eq!(rep.penalty_dirs.len(), rep.sea_rounds - 1);
        assert!(rep.objective <= rep.sdr_bound * (1.0 + 1e-9));
        assert!(rep.max_per_ap_power() <= 1.0 + 1e-9);
        // penalized power exceeds true power by zeta sum |u^H w|^2
        let ww = outer(&rep.beamformer);
        let pen = rep.final_problem.power_values(&ww);
        let base = rep.final_problem.base_power_values(&ww);
        let extra: f64 = rep.penalty_dirs.iter().map(|u| u.dotc(&rep.beamformer).norm_sqr()).sum::<f64>() * rep.zeta;
        for l in 0..2 {
            assert!((pen[l] - base[l] - extra).abs() <= 1e-9 * pen[l].max(1.0));
            assert!((base[l] - rep.per_ap_power[l]).abs() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_reports() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = random_net(&mut rng, 3, 1, 4);
        let prob = SdpProblem::build_qos(&net, &[1.0; 3], &[2.0; 4]).unwrap();
        let mut cfg = unit_config();
        cfg.inner_penalty = InnerPenalty::QpDiagonal { factor: 1.0 };
        let a = run_sea(&prob, &cfg, &SeaConfig::default()).unwrap();
        let b = run_sea(&prob, &cfg, &SeaConfig::default()).unwrap();
        assert_eq!(a.beamformer, b.beamformer);
        assert_eq!(a.outer_iters_per_round, b.outer_iters_per_round);
        assert!(a.objective >= a.sdr_bound * (1.0 - 1e-9));
        let worst = a.snr.iter().zip([2.0; 4]).fold(f64::INFINITY, |m, (s, g)| m.min(s / g));
        assert!((worst - 1.0).abs() < 1e-9);
    }
}
