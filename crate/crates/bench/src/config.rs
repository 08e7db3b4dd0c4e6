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

//! Experiment description loaded from JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sea_admm::netsim::{GeometryConfig, LargeScaleParams};
use sea_admm::problem::Variant;
use sea_admm::sea::SeaConfig;
use sea_admm::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Named solver parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverPreset {
    /// Scale-matched parameters (see [`SolverConfig::tuned`]).
    Tuned,
    /// Published parameters (see [`SolverConfig::published`]).
    Published,
}

/// Either a preset resolved per variant, or explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolverSpec {
    Preset(SolverPreset),
    Explicit(SolverConfig),
}

impl SolverSpec {
    pub fn resolve(&self, variant: Variant) -> SolverConfig {
        match self {
            SolverSpec::Preset(SolverPreset::Tuned) => SolverConfig::tuned(variant),
            SolverSpec::Preset(SolverPreset::Published) => SolverConfig::published(variant),
            SolverSpec::Explicit(cfg) => cfg.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub records: String,
    pub summary: String,
    pub trace: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            records: "records.csv".into(),
            summary: "summary.json".into(),
            trace: "trace.csv".into(),
        }
    }
}

impl OutputConfig {
    pub fn records_path(&self) -> PathBuf {
        self.dir.join(&self.records)
    }
    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(&self.summary)
    }
    pub fn trace_path(&self) -> PathBuf {
        self.dir.join(&self.trace)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub geometry: GeometryConfig,
    pub large_scale: LargeScaleParams,
    pub variant: Variant,
    /// Per-AP power budget in watts.
    pub p_max: f64,
    /// Common linear SNR target for the power-minimization variants.
    pub gamma_c: f64,
    pub solver: SolverSpec,
    pub sea: SeaConfig,
    pub samples: usize,
    pub base_seed: u64,
    pub output: OutputConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            large_scale: LargeScaleParams::default(),
            variant: Variant::Mmf,
            p_max: 1.0,
            gamma_c: 255.0,
            solver: SolverSpec::Preset(SolverPreset::Tuned),
            sea: SeaConfig::default(),
            samples: 200,
            base_seed: 0,
            output: OutputConfig::default(),
        }
    }
}

/// The fields that determine results; hashed into the summary digest.
#[derive(Serialize)]
struct DigestView<'a> {
    geometry: &'a GeometryConfig,
    large_scale: &'a LargeScaleParams,
    variant: Variant,
    p_max: f64,
    gamma_c: f64,
    solver: SolverConfig,
    sea: &'a SeaConfig,
    samples: usize,
    base_seed: u64,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: BenchConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.resolve(self.variant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            bail!("samples must be at least 1");
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            bail!("p_max must be positive, got {}", self.p_max);
        }
        if !(self.gamma_c > 0.0 && self.gamma_c.is_finite()) {
            bail!("gamma_c must be positive, got {}", self.gamma_c);
        }
        self.geometry.validate()?;
        self.large_scale.validate()?;
        self.solver_config().validate()?;
        self.sea.validate()?;
        Ok(())
    }

    /// Hex SHA-256 of the result-determining fields.
    pub fn digest(&self) -> String {
        let view = DigestView {
            geometry: &self.geometry,
            large_scale: &self.large_scale,
            variant: self.variant,
            p_max: self.p_max,
            gamma_c: self.gamma_c,
            solver: self.solver_config(),
            sea: &self.sea,
            samples: self.samples,
            base_seed: self.base_seed,
        };
        let json = serde_json::to_vec(&view).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn budgets(&self) -> Vec<f64> {
        vec![self.p_max; self.geometry.num_aps]
    }

    pub fn targets(&self) -> Vec<f64> {
        vec![self.gamma_c; self.geometry.num_ues]
    }
}
