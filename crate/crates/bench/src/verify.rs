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

//! Oracle suite: closed-form single-UE instances, brute-force rank-1 search
//! on tiny problems, and the MMF/QoS scaling cross-check.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sea_admm::linalg::{CVec, C64};
use sea_admm::netsim::{generate, standard_complex_gaussian, ChannelSet, GeometryConfig, LargeScaleParams};
use sea_admm::oracle::{brute_force_rank1, closed_form_single_ue, mmf_qos_consistency};
use sea_admm::problem::{SdpProblem, Variant};
use sea_admm::sea::{run_sea, SeaConfig};
use sea_admm::solver::{InnerPenalty, SolverConfig};

/// Relative tolerance for closed-form agreement.
pub const CLOSED_FORM_TOL: f64 = 1e-3;
/// Allowed deviation of the QoS optimum from the target scale.
pub const CONSISTENCY_TOL: f64 = 5e-3;
/// Slack on the relaxation bound in the brute-force sandwich.
pub const BOUND_SLACK: f64 = 1e-6;
/// Largest relative shortfall of the elimination result against brute force.
pub const SANDWICH_TOL: f64 = 1e-2;
/// Relative floor on the brute-force grid error: the pattern search polishes
/// to machine-level angles, so the remaining difference is solver accuracy.
pub const GRID_RESOLUTION: f64 = 1e-6;

/// Solver settings for unit-scale toy instances (SNRs of order one).
pub fn unit_scale_config(variant: Variant) -> SolverConfig {
    SolverConfig {
        rho: 1.0,
        inner_penalty: InnerPenalty::QpDiagonal { factor: 1.0 },
        eps_dual: 1e-8,
        eps_prim: 1e-8,
        max_outer: 3000,
        ..SolverConfig::published(variant)
    }
}

#[derive(Debug, Clone)]
pub struct ClosedFormCase {
    pub variant: Variant,
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub expected: f64,
    pub solved: f64,
    pub rel_err: f64,
}

fn random_single_ue(rng: &mut ChaCha8Rng, num_aps: usize, antennas: usize) -> (ChannelSet, Vec<f64>) {
    let gain = rng.random_range(0.5..2.0);
    let h: CVec = standard_complex_gaussian(rng, num_aps * antennas) * C64::new(gain, 0.0);
    let noise = rng.random_range(0.5..2.0);
    let budgets = (0..num_aps).map(|_| rng.random_range(0.5..2.0)).collect();
    (ChannelSet::new(num_aps, antennas, vec![h], vec![noise]).expect("valid shape"), budgets)
}

/// Single-UE MMF instances with one antenna per AP (`L` alternating 1, 2)
/// and single-AP QoS instances, each compared with its closed form.
pub fn closed_form_suite(count: usize, seed: u64) -> Result<Vec<ClosedFormCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sea = SeaConfig::default();
    let mut cases = Vec::with_capacity(2 * count);
    for i in 0..count {
        let num_aps = 1 + i % 2;
        let (net, budgets) = random_single_ue(&mut rng, num_aps, 1);
        let prob = SdpProblem::build_mmf(&net, &budgets)?;
        let report = run_sea(&prob, &unit_scale_config(Variant::Mmf), &sea)?;
        let expected =
            closed_form_single_ue(&net.channels[0], net.noise_variances[0], &budgets, 1, Variant::Mmf, None)?;
        cases.push(ClosedFormCase {
            variant: Variant::Mmf,
            num_aps,
            antennas_per_ap: 1,
            expected,
            solved: report.objective,
            rel_err: (report.objective - expected).abs() / expected,
        });
    }
    for i in 0..count {
        let antennas = 1 + i % 2;
        let (net, budgets) = random_single_ue(&mut rng, 1, antennas);
        let gamma = rng.random_range(1.0..10.0);
        let prob = SdpProblem::build_qos(&net, &budgets, &[gamma])?;
        let report = run_sea(&prob, &unit_scale_config(Variant::Qos), &sea)?;
        let expected = closed_form_single_ue(
            &net.channels[0],
            net.noise_variances[0],
            &budgets,
            antennas,
            Variant::Qos,
            Some(gamma),
        )?;
        cases.push(ClosedFormCase {
            variant: Variant::Qos,
            num_aps: 1,
            antennas_per_ap: antennas,
            expected,
            solved: report.objective,
            rel_err: (report.objective - expected).abs() / expected,
        });
    }
    Ok(cases)
}

#[derive(Debug, Clone)]
pub struct SandwichCase {
    pub dim: usize,
    pub num_ues: usize,
    /// Brute-force rank-1 optimum at the finer grid.
    pub brute_force: f64,
    /// Change between the coarse and fine grid, floored at
    /// [`GRID_RESOLUTION`] relative.
    pub grid_error: f64,
    pub sea_objective: f64,
    pub sdr_bound: f64,
}

impl SandwichCase {
    /// `brute <= sea + grid error`
    pub fn lower_holds(&self) -> bool {
        self.brute_force <= self.sea_objective + self.grid_error
    }

    /// `sea <= bound + slack`
    pub fn upper_holds(&self) -> bool {
        self.sea_objective <= self.sdr_bound + BOUND_SLACK * self.sdr_bound.abs().max(1.0)
    }

    /// Relative shortfall of the elimination result against brute force.
    pub fn shortfall(&self) -> f64 {
        (self.brute_force - self.sea_objective) / self.brute_force
    }

    pub fn passes(&self) -> bool {
        self.lower_holds() && self.upper_holds() && self.shortfall() <= SANDWICH_TOL
    }
}

/// Tiny MMF instances with `n <= 3` solved by elimination and by brute force.
pub fn sandwich_suite(count: usize, seed: u64, grid_density: usize) -> Result<Vec<SandwichCase>> {
    const SHAPES: [(usize, usize); 4] = [(1, 2), (2, 1), (3, 1), (1, 3)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sea = SeaConfig::default();
    let cfg = unit_scale_config(Variant::Mmf);
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let (num_aps, antennas) = SHAPES[i % SHAPES.len()];
        let n = num_aps * antennas;
        let num_ues = 2 + i % 2;
        let channels = (0..num_ues).map(|_| standard_complex_gaussian(&mut rng, n)).collect();
        let noise = (0..num_ues).map(|_| rng.random_range(0.5..2.0)).collect();
        let net = ChannelSet::new(num_aps, antennas, channels, noise)?;
        let prob = SdpProblem::build_mmf(&net, &vec![1.0; num_aps])?;
        let report = run_sea(&prob, &cfg, &sea)?;
        let coarse = brute_force_rank1(&prob, grid_density)?;
        let fine = brute_force_rank1(&prob, 2 * grid_density)?;
        cases.push(SandwichCase {
            dim: n,
            num_ues,
            brute_force: fine.max(coarse),
            grid_error: (fine - coarse).abs().max(GRID_RESOLUTION * fine.abs()),
            sea_objective: report.objective,
            sdr_bound: report.sdr_bound,
        });
    }
    Ok(cases)
}

#[derive(Debug, Clone)]
pub struct ConsistencyCase {
    pub seed: u64,
    pub target_scale: f64,
    pub t_star: f64,
    pub x_star: f64,
}

impl ConsistencyCase {
    pub fn deviation(&self) -> f64 {
        (self.x_star - self.target_scale).abs() / self.target_scale
    }
}

/// Outcome of the MMF/QoS cross-check over consecutive drops.
#[derive(Debug, Clone, Default)]
pub struct ConsistencyRun {
    pub cases: Vec<ConsistencyCase>,
    /// Drops skipped because a relaxation did not certify.
    pub skipped: usize,
}

/// Solves MMF then QoS with targets `target_scale * t*` on consecutive
/// drops until `count` certified pairs are collected (or `4 * count` drops
/// have been tried).
pub fn consistency_suite(
    count: usize,
    first_seed: u64,
    geometry: &GeometryConfig,
    target_scale: f64,
) -> Result<ConsistencyRun> {
    let params = LargeScaleParams::default();
    let mmf_cfg = SolverConfig::tuned(Variant::Mmf);
    let qos_cfg = SolverConfig::tuned(Variant::Qos);
    let budgets = vec![1.0; geometry.num_aps];
    let mut run = ConsistencyRun::default();
    let mut seed = first_seed;
    while run.cases.len() < count && seed < first_seed + 4 * count as u64 {
        let net = generate(geometry, &params, seed)?;
        match mmf_qos_consistency(&net.channel_set(), &budgets, &mmf_cfg, &qos_cfg, target_scale) {
            Ok(c) => run.cases.push(ConsistencyCase { seed, target_scale, t_star: c.t_star, x_star: c.x_star }),
            Err(sea_admm::Error::Unsupported(_)) => run.skipped += 1,
            Err(e) => return Err(e.into()),
        }
        seed += 1;
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Instance counts for [`run_verify`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyScale {
    pub closed_form: usize,
    pub sandwich: usize,
    pub grid_density: usize,
    pub consistency: usize,
    pub seed: u64,
}

impl Default for VerifyScale {
    fn default() -> Self {
        Self { closed_form: 20, sandwich: 8, grid_density: 12, consistency: 3, seed: 0 }
    }
}

pub fn run_verify(scale: &VerifyScale) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let cases = closed_form_suite(scale.closed_form, scale.seed)?;
    for variant in [Variant::Mmf, Variant::Qos] {
        let errs: Vec<f64> = cases.iter().filter(|c| c.variant == variant).map(|c| c.rel_err).collect();
        let worst = errs.iter().copied().fold(0.0, f64::max);
        out.push(CheckOutcome {
            name: format!("closed form {} single UE", variant.name()),
            passed: errs.iter().all(|e| *e <= CLOSED_FORM_TOL),
            detail: format!("{} instances, worst relative error {worst:.2e}", errs.len()),
        });
    }

    let cases = sandwich_suite(scale.sandwich, scale.seed, scale.grid_density)?;
    let failing = cases.iter().filter(|c| !c.passes()).count();
    let worst = cases.iter().map(|c| c.shortfall()).fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckOutcome {
        name: "brute-force rank-1 sandwich".into(),
        passed: failing == 0,
        detail: format!("{} instances, {failing} failing, worst shortfall {worst:.2e}", cases.len()),
    });

    let geometry = GeometryConfig::default();
    for target_scale in [1.0, 0.5] {
        let run = consistency_suite(scale.consistency, scale.seed, &geometry, target_scale)?;
        let worst = run.cases.iter().map(|c| c.deviation()).fold(0.0, f64::max);
        out.push(CheckOutcome {
            name: format!("MMF/QoS consistency at target scale {target_scale}"),
            passed: run.cases.len() == scale.consistency && worst <= CONSISTENCY_TOL,
            detail: format!("{} pairs, {} skipped, worst deviation {worst:.2e}", run.cases.len(), run.skipped),
        });
    }
    Ok(out)
}
