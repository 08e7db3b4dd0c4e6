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

//! Spectral efficiency and summary statistics.

use sea_admm::linalg::CVec;
use sea_admm::netsim::NetworkRealization;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEfficiency {
    /// `log2(1 + |h_k^H w|^2 / sigma_k^2)` per UE, bits/s/Hz.
    pub per_ue: Vec<f64>,
    pub min: f64,
}

/// Per-UE spectral efficiency of the multicast beamformer `w`.
pub fn compute_se(w: &CVec, net: &NetworkRealization) -> SpectralEfficiency {
    let per_ue: Vec<f64> = (0..net.num_ues())
        .map(|k| se_from_snr(net.concatenated_channel(k).dotc(w).norm_sqr() / net.noise_variances[k]))
        .collect();
    let min = per_ue.iter().copied().fold(f64::INFINITY, f64::min);
    SpectralEfficiency { per_ue, min }
}

pub fn se_from_snr(snr: f64) -> f64 {
    (1.0 + snr).log2()
}

/// JSON writes NaN as `null`; read it back as NaN.
fn nan_or_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    #[serde(deserialize_with = "nan_or_f64")]
    pub p5: f64,
    #[serde(deserialize_with = "nan_or_f64")]
    pub p25: f64,
    #[serde(deserialize_with = "nan_or_f64")]
    pub p50: f64,
    #[serde(deserialize_with = "nan_or_f64")]
    pub p75: f64,
    #[serde(deserialize_with = "nan_or_f64")]
    pub p95: f64,
}

/// Linear-interpolation quantile of `q` in `[0, 1]` over the finite values.
/// Returns NaN when no finite value is present.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn quantiles(values: &[f64]) -> Quantiles {
    Quantiles {
        p5: quantile(values, 0.05),
        p25: quantile(values, 0.25),
        p50: quantile(values, 0.5),
        p75: quantile(values, 0.75),
        p95: quantile(values, 0.95),
    }
}

/// Mean of the finite values; NaN when there are none.
pub fn mean(values: &[f64]) -> f64 {
    let finite: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}
