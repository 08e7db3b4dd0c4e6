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

//! Monte Carlo harness and CLI for the sea-admm solver: experiment
//! configuration, batched solves over random network drops, spectral
//! efficiency and power statistics, CSV/JSON emission and an oracle suite.

pub mod batch;
pub mod cli;
pub mod config;
pub mod metrics;
pub mod output;
pub mod verify;

pub use batch::{run_batch, run_sample, run_trace, BatchResult, BatchSummary, SampleOutcome, SampleRecord, TraceRow};
pub use cli::cli_main;
pub use config::{BenchConfig, SolverPreset, SolverSpec};
pub use metrics::{compute_se, quantiles, Quantiles};
pub use output::emit_results;
