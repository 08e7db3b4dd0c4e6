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

//! Monte Carlo batches: drop, build, solve, certify, measure.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::Result;
use rayon::prelude::*;
use sea_admm::netsim::{generate, NetworkRealization};
use sea_admm::oracle::Verdict;
use sea_admm::problem::{SdpProblem, Variant};
use sea_admm::sea::{run_sea_traced, SolveReport};
use sea_admm::solver::IterationRecord;
use serde::{Deserialize, Serialize};

use crate::config::BenchConfig;
use crate::metrics::{compute_se, mean, quantiles, Quantiles};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "SEA_BENCH_WORKERS";

/// Largest tolerated fraction of samples without a certified verdict.
pub const CERTIFICATION_BUDGET: f64 = 0.01;

/// One CSV row. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: u64,
    pub seed: u64,
    pub variant: Variant,
    #[serde(rename = "K")]
    pub num_ues: usize,
    #[serde(rename = "L")]
    pub num_aps: usize,
    #[serde(rename = "N")]
    pub antennas_per_ap: usize,
    /// MMF: min SNR (linear); QoS: largest normalized per-AP power;
    /// sum-power: total watts.
    pub objective: f64,
    pub sdr_bound: f64,
    /// Relative duality gap of the final relaxation solve.
    pub gap_rel: f64,
    pub sea_rounds: usize,
    pub outer_iters_total: usize,
    pub min_se: f64,
    pub total_power_w: f64,
    pub max_per_ap_power_w: f64,
    pub certificate: Verdict,
    pub wall_time_s: f64,
}

impl SampleRecord {
    /// Relative distance between the rank-1 objective and the relaxation
    /// bound, nonnegative when the bound holds.
    pub fn bound_gap(&self) -> f64 {
        match self.variant {
            Variant::Mmf => (self.sdr_bound - self.objective) / self.sdr_bound,
            _ => (self.objective - self.sdr_bound) / self.objective,
        }
    }
}

/// A record plus the per-sample details that do not fit the CSV.
#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub record: SampleRecord,
    pub per_ap_power: Vec<f64>,
    pub outer_iters_per_round: Vec<usize>,
    pub rounds_converged: Vec<bool>,
    pub rank_one: bool,
    pub error: Option<String>,
}

pub fn build_problem(cfg: &BenchConfig, net: &NetworkRealization) -> Result<SdpProblem> {
    let channels = net.channel_set();
    let prob = match cfg.variant {
        Variant::Mmf => SdpProblem::build_mmf(&channels, &cfg.budgets())?,
        Variant::Qos => SdpProblem::build_qos(&channels, &cfg.budgets(), &cfg.targets())?,
        Variant::SumPower => SdpProblem::build_qos(&channels, &cfg.budgets(), &cfg.targets())?.sum_power_variant()?,
    };
    Ok(prob)
}

pub fn sample_seed(cfg: &BenchConfig, sample_id: u64) -> u64 {
    cfg.base_seed.wrapping_add(sample_id)
}

fn solve_sample(
    cfg: &BenchConfig,
    sample_id: u64,
    sink: Option<&mut dyn FnMut(usize, &IterationRecord)>,
) -> Result<(NetworkRealization, SolveReport)> {
    let net = generate(&cfg.geometry, &cfg.large_scale, sample_seed(cfg, sample_id))?;
    let prob = build_problem(cfg, &net)?;
    let report = run_sea_traced(&prob, &cfg.solver_config(), &cfg.sea, sink)?;
    Ok((net, report))
}

fn outcome_from(
    cfg: &BenchConfig,
    sample_id: u64,
    solved: Result<(NetworkRealization, SolveReport)>,
    wall: f64,
) -> SampleOutcome {
    let g = &cfg.geometry;
    let mut record = SampleRecord {
        sample_id,
        seed: sample_seed(cfg, sample_id),
        variant: cfg.variant,
        num_ues: g.num_ues,
        num_aps: g.num_aps,
        antennas_per_ap: g.antennas_per_ap,
        objective: f64::NAN,
        sdr_bound: f64::NAN,
        gap_rel: f64::NAN,
        sea_rounds: 0,
        outer_iters_total: 0,
        min_se: f64::NAN,
        total_power_w: f64::NAN,
        max_per_ap_power_w: f64::NAN,
        certificate: Verdict::Failed,
        wall_time_s: wall,
    };
    match solved {
        Ok((net, report)) => {
            record.objective = report.objective;
            record.sdr_bound = report.sdr_bound;
            record.gap_rel = report.certificate.gap_rel;
            record.sea_rounds = report.sea_rounds;
            record.outer_iters_total = report.outer_iters_total();
            record.min_se = compute_se(&report.beamformer, &net).min;
            record.total_power_w = report.total_power;
            record.max_per_ap_power_w = report.max_per_ap_power();
            record.certificate = report.certificate.verdict;
            SampleOutcome {
                record,
                per_ap_power: report.per_ap_power.clone(),
                outer_iters_per_round: report.outer_iters_per_round.clone(),
                rounds_converged: report.rounds.iter().map(|r| r.converged).collect(),
                rank_one: report.rank_one,
                error: None,
            }
        }
        Err(e) => SampleOutcome {
            record,
            per_ap_power: Vec::new(),
            outer_iters_per_round: Vec::new(),
            rounds_converged: Vec::new(),
            rank_one: false,
            error: Some(format!("{e:#}")),
        },
    }
}

/// Runs one sample end to end. Solver errors are recorded, not propagated.
pub fn run_sample(cfg: &BenchConfig, sample_id: u64) -> SampleOutcome {
    let start = Instant::now();
    let solved = solve_sample(cfg, sample_id, None);
    outcome_from(cfg, sample_id, solved, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub iteration: usize,
    pub transmit_power_w: f64,
    pub dual_residual: f64,
    pub prim_residual: f64,
}

/// Runs one sample and records every outer iteration of every round.
pub fn run_trace(cfg: &BenchConfig, sample_id: u64) -> (SampleOutcome, Vec<TraceRow>) {
    let mut rows = Vec::new();
    let start = Instant::now();
    let solved = {
        let mut sink = |round: usize, rec: &IterationRecord| {
            rows.push(TraceRow {
                round,
                iteration: rec.iteration,
                transmit_power_w: rec.transmit_power,
                dual_residual: rec.dual_residual,
                prim_residual: rec.prim_residual,
            })
        };
        solve_sample(cfg, sample_id, Some(&mut sink))
    };
    (outcome_from(cfg, sample_id, solved, start.elapsed().as_secs_f64()), rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub config_digest: String,
    pub n_samples: usize,
    pub certified_rate: f64,
    pub quantiles: BTreeMap<String, Quantiles>,
    #[serde(skip)]
    pub means: BTreeMap<String, f64>,
}

impl BatchSummary {
    pub fn from_records(config_digest: String, records: &[SampleRecord]) -> Self {
        let n = records.len();
        let certified = records.iter().filter(|r| r.certificate == Verdict::Certified).count();
        let metrics: [(&str, fn(&SampleRecord) -> f64); 10] = [
            ("objective", |r| r.objective),
            ("sdr_bound", |r| r.sdr_bound),
            ("gap_rel", |r| r.gap_rel),
            ("bound_gap", |r| r.bound_gap()),
            ("sea_rounds", |r| r.sea_rounds as f64),
            ("outer_iters_total", |r| r.outer_iters_total as f64),
            ("min_se", |r| r.min_se),
            ("total_power_w", |r| r.total_power_w),
            ("max_per_ap_power_w", |r| r.max_per_ap_power_w),
            ("wall_time_s", |r| r.wall_time_s),
        ];
        let mut qs = BTreeMap::new();
        let mut means = BTreeMap::new();
        for (name, get) in metrics {
            let values: Vec<f64> = records.iter().map(get).collect();
            qs.insert(name.to_string(), quantiles(&values));
            means.insert(name.to_string(), mean(&values));
        }
        Self {
            config_digest,
            n_samples: n,
            certified_rate: if n == 0 { 0.0 } else { certified as f64 / n as f64 },
            quantiles: qs,
            means,
        }
    }

    /// True when more than [`CERTIFICATION_BUDGET`] of the samples are not certified.
    pub fn exceeds_failure_budget(&self) -> bool {
        1.0 - self.certified_rate > CERTIFICATION_BUDGET + 1e-12
    }

    pub fn median(&self, metric: &str) -> f64 {
        self.quantiles.get(metric).map_or(f64::NAN, |q| q.p50)
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub outcomes: Vec<SampleOutcome>,
    pub summary: BatchSummary,
}

impl BatchResult {
    pub fn records(&self) -> Vec<SampleRecord> {
        self.outcomes.iter().map(|o| o.record.clone()).collect()
    }
}

/// Worker count: `SEA_BENCH_WORKERS` if set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `cfg.samples` independent samples on a bounded worker pool. Records
/// come back sorted by sample id.
pub fn run_batch(cfg: &BenchConfig) -> Result<BatchResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build()?;
    let mut outcomes: Vec<SampleOutcome> =
        pool.install(|| (0..cfg.samples as u64).into_par_iter().map(|id| run_sample(cfg, id)).collect());
    outcomes.sort_by_key(|o| o.record.sample_id);
    let records: Vec<SampleRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let summary = BatchSummary::from_records(cfg.digest(), &records);
    Ok(BatchResult { outcomes, summary })
}
