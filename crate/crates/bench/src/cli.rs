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

//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sea_admm::problem::Variant;

use crate::batch::{run_batch, run_trace, BatchSummary};
use crate::config::BenchConfig;
use crate::output::emit_results;
use crate::verify::{run_verify, VerifyScale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sea-bench", version, about = "Monte Carlo benchmarks for SEA-ADMM multicast beamforming")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Mmf,
    Qos,
    Sumpower,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mmf => Variant::Mmf,
            VariantArg::Qos => Variant::Qos,
            VariantArg::Sumpower => Variant::SumPower,
        }
    }
}

/// Overrides shared by the batch and trace commands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment description; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; sample i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of UEs.
    #[arg(short = 'K', long = "num-ues")]
    pub num_ues: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of Monte Carlo samples.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Max-min fair batch.
    Mmf(BatchArgs),
    /// Per-AP power minimization batch.
    Qos(BatchArgs),
    /// Sum-power minimization batch.
    Sumpower(BatchArgs),
    /// Single sample with a per-iteration transmit power dump.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Sample index relative to the base seed.
        #[arg(long, default_value_t = 0)]
        sample: u64,
    },
    /// Oracle suite: closed forms, brute force, MMF/QoS consistency.
    Verify {
        /// Closed-form instances per variant.
        #[arg(long, default_value_t = VerifyScale::default().closed_form)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Context marker for errors caused by arguments or configuration.
#[derive(Debug, Clone, Copy)]
pub struct InvalidConfig;

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("invalid configuration")
    }
}

fn load_config(common: &CommonArgs, variant: Option<Variant>, samples: Option<usize>) -> Result<BenchConfig> {
    resolve_config(common, variant, samples).map_err(|e| e.context(InvalidConfig))
}

fn resolve_config(common: &CommonArgs, variant: Option<Variant>, samples: Option<usize>) -> Result<BenchConfig> {
    let mut cfg = match &common.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if let Some(v) = variant {
        cfg.variant = v;
    }
    if let Some(s) = samples {
        cfg.samples = s;
    }
    if let Some(s) = common.seed {
        cfg.base_seed = s;
    }
    if let Some(dir) = &common.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(k) = common.num_ues {
        cfg.geometry.num_ues = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(cfg: &BenchConfig, summary: &BatchSummary) {
    println!(
        "{} K={} L={} N={}: {} samples, certified {:.1}%",
        cfg.variant.name(),
        cfg.geometry.num_ues,
        cfg.geometry.num_aps,
        cfg.geometry.antennas_per_ap,
        summary.n_samples,
        100.0 * summary.certified_rate
    );
    for metric in ["objective", "min_se", "total_power_w", "sea_rounds", "outer_iters_total", "wall_time_s"] {
        if let Some(q) = summary.quantiles.get(metric) {
            println!("  {metric:<18} p5 {:>11.4} p50 {:>11.4} p95 {:>11.4}", q.p5, q.p50, q.p95);
        }
    }
}

fn run_batch_command(cfg: BenchConfig) -> Result<i32> {
    let result = run_batch(&cfg)?;
    for o in result.outcomes.iter().filter(|o| o.error.is_some()) {
        eprintln!("sample {}: {}", o.record.sample_id, o.error.as_deref().unwrap_or_default());
    }
    let files = emit_results(&cfg.output, &result.records(), &result.summary, None)?;
    print_summary(&cfg, &result.summary);
    println!("wrote {} and {}", files.records.display(), files.summary.display());
    if result.summary.exceeds_failure_budget() {
        eprintln!(
            "certification failed on {:.1}% of samples (budget {:.0}%)",
            100.0 * (1.0 - result.summary.certified_rate),
            100.0 * crate::batch::CERTIFICATION_BUDGET
        );
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mmf(a) => run_batch_command(load_config(&a.common, Some(Variant::Mmf), a.samples)?),
        Command::Qos(a) => run_batch_command(load_config(&a.common, Some(Variant::Qos), a.samples)?),
        Command::Sumpower(a) => run_batch_command(load_config(&a.common, Some(Variant::SumPower), a.samples)?),
        Command::Trace { common, variant, sample } => {
            let cfg = load_config(&common, variant.map(Into::into), Some(1))?;
            let (outcome, rows) = run_trace(&cfg, sample);
            if let Some(e) = &outcome.error {
                eprintln!("sample {sample}: {e}");
                return Ok(EXIT_FAILURE);
            }
            let summary = BatchSummary::from_records(cfg.digest(), std::slice::from_ref(&outcome.record));
            let files = emit_results(&cfg.output, std::slice::from_ref(&outcome.record), &summary, Some(&rows))?;
            println!(
                "{} rounds, {} outer iterations, objective {:.4}, certificate {}",
                outcome.record.sea_rounds,
                outcome.record.outer_iters_total,
                outcome.record.objective,
                outcome.record.certificate
            );
            println!("wrote {}", files.trace.expect("trace requested").display());
            Ok(EXIT_OK)
        }
        Command::Verify { samples, seed } => {
            let scale = VerifyScale { closed_form: samples, seed, ..VerifyScale::default() };
            let checks = run_verify(&scale)?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on a failed run or exceeded
/// certification budget, 2 on bad arguments or configuration.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<InvalidConfig>().is_some() => {
            let cause = e.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>().join(": ");
            if cause.starts_with("invalid configuration") {
                eprintln!("error: {cause}");
            } else {
                eprintln!("error: invalid configuration: {cause}");
            }
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_batch_overrides() {
        let cli = Cli::try_parse_from(["sea-bench", "qos", "--samples", "5", "-K", "30", "--seed", "9"]).unwrap();
        match cli.command {
            Command::Qos(a) => {
                assert_eq!(a.samples, Some(5));
                assert_eq!(a.common.num_ues, Some(30));
                assert_eq!(a.common.seed, Some(9));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_trace_variant() {
        let cli = Cli::try_parse_from(["sea-bench", "trace", "--variant", "qos", "-K", "30"]).unwrap();
        assert!(matches!(cli.command, Command::Trace { variant: Some(VariantArg::Qos), .. }));
    }

    #[test]
    fn bad_arguments_exit_two() {
        assert_eq!(cli_main(["sea-bench", "mmf", "--bogus"]), EXIT_USAGE);
        assert_eq!(cli_main(["sea-bench", "launch"]), EXIT_USAGE);
        assert_eq!(cli_main(["sea-bench", "mmf", "--samples", "many"]), EXIT_USAGE);
        assert_eq!(cli_main(["sea-bench", "mmf", "--samples", "0"]), EXIT_USAGE);
        assert_eq!(cli_main(["sea-bench", "mmf", "-K", "0"]), EXIT_USAGE);
    }

    #[test]
    fn invalid_config_file_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        std::fs::write(&p, r#"{"samples": "lots"}"#).unwrap();
        let code = cli_main(["sea-bench".into(), "mmf".into(), "--config".into(), p.into_os_string()]);
        assert_eq!(code, EXIT_USAGE);
    }
}
