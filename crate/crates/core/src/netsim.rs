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

//! Cell-free network drops: AP grid, uniformly dropped UEs on a wrap-around
//! square, 3GPP urban-microcell pathloss with UE-correlated shadowing, and
//! spatially correlated Rayleigh channels from a Gaussian local scattering
//! model on a uniform linear array.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, CMat, CVec, C64};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Edge of the square service area in meters.
    pub side_length: f64,
    /// Number of APs; must be a perfect square.
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_ues: usize,
    /// Antenna spacing in wavelengths.
    pub antenna_spacing: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { side_length: 750.0, num_aps: 9, antennas_per_ap: 4, num_ues: 10, antenna_spacing: 0.5 }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.side_length > 0.0) || !self.side_length.is_finite() {
            return Err(Error::Config(format!("side length must be positive, got {}", self.side_length)));
        }
        if self.num_aps == 0 || self.antennas_per_ap == 0 || self.num_ues == 0 {
            return Err(Error::Config("AP, antenna and UE counts must be at least 1".into()));
        }
        self.grid_side()?;
        if !(self.antenna_spacing > 0.0) {
            return Err(Error::Config("antenna spacing must be positive".into()));
        }
        Ok(())
    }

    /// Number of APs along one edge of the grid.
    pub fn grid_side(&self) -> Result<usize> {
        let g = (self.num_aps as f64).sqrt().round() as usize;
        if g * g != self.num_aps {
            return Err(Error::Config(format!(
                "number of APs must be a perfect square for grid placement, got {}",
                self.num_aps
            )));
        }
        Ok(g)
    }

    pub fn dimension(&self) -> usize {
        self.num_aps * self.antennas_per_ap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LargeScaleParams {
    pub pathloss_intercept_db: f64,
    /// dB per decade of distance; the pathloss exponent is this over ten.
    pub pathloss_slope_db: f64,
    pub shadow_std_db: f64,
    pub shadow_decorrelation_m: f64,
    pub noise_power_dbm: f64,
    /// Angular standard deviation of the local scattering cluster.
    pub angular_std_deg: f64,
    /// Height difference between AP arrays and UEs, added to the horizontal
    /// wrap-around distance.
    pub vertical_offset_m: f64,
}

impl Default for LargeScaleParams {
    fn default() -> Self {
        Self {
            pathloss_intercept_db: -30.5,
            pathloss_slope_db: 36.7,
            shadow_std_db: 4.0,
            shadow_decorrelation_m: 9.0,
            noise_power_dbm: -94.0,
            angular_std_deg: 15.0,
            vertical_offset_m: 10.0,
        }
    }
}

impl LargeScaleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shadow_std_db >= 0.0) {
            return Err(Error::Config("shadowing standard deviation must be nonnegative".into()));
        }
        if !(self.shadow_decorrelation_m > 0.0) {
            return Err(Error::Config("shadowing decorrelation distance must be positive".into()));
        }
        if !(self.angular_std_deg >= 0.0) || !(self.vertical_offset_m >= 0.0) {
            return Err(Error::Config("angular spread and vertical offset must be nonnegative".into()));
        }
        Ok(())
    }

    /// Noise power in watts.
    pub fn noise_variance(&self) -> f64 {
        10f64.powf((self.noise_power_dbm - 30.0) / 10.0)
    }
}

/// Random sub-stream purposes. Each (seed, purpose, index) triple owns an
/// independent ChaCha stream, so changing K leaves the AP-indexed draws and
/// the draws of existing UEs untouched.
#[derive(Debug, Clone, Copy)]
enum Purpose {
    UePosition = 1,
    Shadowing = 2,
    Channel = 3,
}

fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | index);
    rng
}

/// APs on a centered uniform grid, UEs i.i.d. uniform over the square.
pub fn place_network(cfg: &GeometryConfig, seed: u64) -> Result<(Vec<Point>, Vec<Point>)> {
    cfg.validate()?;
    let g = cfg.grid_side()?;
    let spacing = cfg.side_length / g as f64;
    let mut aps = Vec::with_capacity(cfg.num_aps);
    for iy in 0..g {
        for ix in 0..g {
            aps.push([(ix as f64 + 0.5) * spacing, (iy as f64 + 0.5) * spacing]);
        }
    }
    let ues = (0..cfg.num_ues)
        .map(|k| {
            let mut rng = stream(seed, Purpose::UePosition, k as u64);
            [rng.random::<f64>() * cfg.side_length, rng.random::<f64>() * cfg.side_length]
        })
        .collect();
    Ok((aps, ues))
}

/// Displacement from `a` to the closest of the nine torus copies of `b`.
pub fn wrap_offset(a: Point, b: Point, side: f64) -> Point {
    let mut best = [b[0] - a[0], b[1] - a[1]];
    let mut best_d = f64::INFINITY;
    for sx in [-side, 0.0, side] {
        for sy in [-side, 0.0, side] {
            let d = [b[0] + sx - a[0], b[1] + sy - a[1]];
            let len = d[0].hypot(d[1]);
            if len < best_d {
                best_d = len;
                best = d;
            }
        }
    }
    best
}

pub fn wrap_distance(a: Point, b: Point, side: f64) -> f64 {
    let d = wrap_offset(a, b, side);
    d[0].hypot(d[1])
}

/// Pathloss in dB before shadowing.
pub fn pathloss_db(d: f64, params: &LargeScaleParams) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    Ok(params.pathloss_intercept_db - params.pathloss_slope_db * d.log10())
}

/// Shadowing covariance between UEs for one AP (identical for every AP;
/// draws for different APs are independent).
pub fn shadow_covariance(ue_positions: &[Point], params: &LargeScaleParams, side: f64) -> DMatrix<f64> {
    let k = ue_positions.len();
    let var = params.shadow_std_db * params.shadow_std_db;
    DMatrix::from_fn(k, k, |i, j| {
        let delta = wrap_distance(ue_positions[i], ue_positions[j], side);
        var * 2f64.powf(-delta / params.shadow_decorrelation_m)
    })
}

fn symmetric_sqrt(c: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = c.clone().symmetric_eigen();
    let mut out = DMatrix::zeros(c.nrows(), c.ncols());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 0.0 {
            let q = eig.eigenvectors.column(i);
            out += lambda.sqrt() * q * q.transpose();
        }
    }
    out
}

/// Gaussian local scattering correlation for a ULA, normalized so that
/// `tr(R) = N * beta`.
pub fn local_scattering_correlation(n: usize, beta: f64, azimuth: f64, angular_std: f64, spacing: f64) -> CMat {
    CMat::from_fn(n, n, |r, c| {
        let dist = r as f64 - c as f64;
        let phase = 2.0 * PI * spacing * dist * azimuth.sin();
        let spread = angular_std * 2.0 * PI * spacing * dist * azimuth.cos();
        C64::from_polar(beta * (-spread * spread / 2.0).exp(), phase)
    })
}

/// Large-scale state of a drop, before small-scale fading is sampled.
#[derive(Debug, Clone)]
pub struct LargeScaleFading {
    pub geometry: GeometryConfig,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// K x L distances in meters.
    pub distances: DMatrix<f64>,
    /// K x L shadowing realizations in dB.
    pub shadow_db: DMatrix<f64>,
    /// K x L linear average channel gains.
    pub gains: DMatrix<f64>,
    /// Correlation matrices, index `k * L + l`.
    pub correlations: Vec<CMat>,
    pub noise_variances: Vec<f64>,
}

pub fn large_scale_fading(geometry: &GeometryConfig, params: &LargeScaleParams, seed: u64) -> Result<LargeScaleFading> {
    geometry.validate()?;
    params.validate()?;
    let (aps, ues) = place_network(geometry, seed)?;
    let k_count = ues.len();
    let l_count = aps.len();
    let side = geometry.side_length;

    let cov = shadow_covariance(&ues, params, side);
    let cov_sqrt = symmetric_sqrt(&cov);
    let mut shadow_db = DMatrix::zeros(k_count, l_count);
    for l in 0..l_count {
        let mut rng = stream(seed, Purpose::Shadowing, l as u64);
        let white: Vec<f64> = (0..k_count).map(|_| rng.sample(StandardNormal)).collect();
        let white = nalgebra::DVector::from_vec(white);
        let col = &cov_sqrt * white;
        shadow_db.set_column(l, &col);
    }

    let mut distances = DMatrix::zeros(k_count, l_count);
    let mut gains = DMatrix::zeros(k_count, l_count);
    let mut correlations = Vec::with_capacity(k_count * l_count);
    let sigma_phi = params.angular_std_deg.to_radians();
    for k in 0..k_count {
        for l in 0..l_count {
            let off = wrap_offset(aps[l], ues[k], side);
            let horizontal = off[0].hypot(off[1]);
            let d = horizontal.hypot(params.vertical_offset_m);
            let beta_db = pathloss_db(d, params)? + shadow_db[(k, l)];
            let beta = 10f64.powf(beta_db / 10.0);
            distances[(k, l)] = d;
            gains[(k, l)] = beta;
            let azimuth = off[1].atan2(off[0]);
            correlations.push(local_scattering_correlation(
                geometry.antennas_per_ap,
                beta,
                azimuth,
                sigma_phi,
                geometry.antenna_spacing,
            ));
        }
    }

    Ok(LargeScaleFading {
        geometry: geometry.clone(),
        ap_positions: aps,
        ue_positions: ues,
        distances,
        shadow_db,
        gains,
        correlations,
        noise_variances: vec![params.noise_variance(); k_count],
    })
}

/// One standard circularly-symmetric complex Gaussian sample per entry.
pub fn standard_complex_gaussian<R: Rng>(rng: &mut R, n: usize) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Draws `h = R^{1/2} g` with `g ~ CN(0, I)`.
pub fn sample_correlated<R: Rng>(correlation: &CMat, rng: &mut R) -> Result<CVec> {
    let root = psd_sqrt(correlation)?;
    let g = standard_complex_gaussian(rng, correlation.nrows());
    Ok(root * g)
}

#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub geometry: GeometryConfig,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub distances: DMatrix<f64>,
    pub shadow_db: DMatrix<f64>,
    pub gains: DMatrix<f64>,
    pub correlations: Vec<CMat>,
    /// Per-AP channel vectors, index `k * L + l`.
    pub channels: Vec<CVec>,
    pub noise_variances: Vec<f64>,
}

pub fn sample_channels(large: LargeScaleFading, seed: u64) -> Result<NetworkRealization> {
    let l_count = large.ap_positions.len();
    let channels = large
        .correlations
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            let mut rng = stream(seed, Purpose::Channel, idx as u64);
            sample_correlated(r, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(channels.len(), large.ue_positions.len() * l_count);
    Ok(NetworkRealization {
        geometry: large.geometry,
        ap_positions: large.ap_positions,
        ue_positions: large.ue_positions,
        distances: large.distances,
        shadow_db: large.shadow_db,
        gains: large.gains,
        correlations: large.correlations,
        channels,
        noise_variances: large.noise_variances,
    })
}

/// Full drop: geometry, large-scale fading and channel realizations.
pub fn generate(geometry: &GeometryConfig, params: &LargeScaleParams, seed: u64) -> Result<NetworkRealization> {
    sample_channels(large_scale_fading(geometry, params, seed)?, seed)
}

/// Concatenated channels and noise levels, the only part of a drop the
/// optimization problems need.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    /// `h_k = [h_k1; ...; h_kL]`, length `L * N`.
    pub channels: Vec<CVec>,
    pub noise_variances: Vec<f64>,
}

impl ChannelSet {
    pub fn new(num_aps: usize, antennas_per_ap: usize, channels: Vec<CVec>, noise_variances: Vec<f64>) -> Result<Self> {
        let n = num_aps * antennas_per_ap;
        if n == 0 || channels.is_empty() {
            return Err(Error::Config("channel set needs at least one AP antenna and one UE".into()));
        }
        if channels.len() != noise_variances.len() || channels.iter().any(|h| h.len() != n) {
            return Err(Error::Dimension(format!(
                "expected {} noise levels and channels of length {n}",
                channels.len()
            )));
        }
        if noise_variances.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Config("noise variances must be positive".into()));
        }
        Ok(Self { num_aps, antennas_per_ap, channels, noise_variances })
    }

    pub fn num_ues(&self) -> usize {
        self.channels.len()
    }

    pub fn dimension(&self) -> usize {
        self.num_aps * self.antennas_per_ap
    }
}

impl NetworkRealization {
    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn channel(&self, k: usize, l: usize) -> &CVec {
        &self.channels[k * self.num_aps() + l]
    }

    pub fn concatenated_channel(&self, k: usize) -> CVec {
        let n_ant = self.geometry.antennas_per_ap;
        let l_count = self.num_aps();
        CVec::from_fn(l_count * n_ant, |i, _| self.channel(k, i / n_ant)[i % n_ant])
    }

    pub fn channel_set(&self) -> ChannelSet {
        ChannelSet {
            num_aps: self.num_aps(),
            antennas_per_ap: self.geometry.antennas_per_ap,
            channels: (0..self.num_ues()).map(|k| self.concatenated_channel(k)).collect(),
            noise_variances: self.noise_variances.clone(),
        }
    }

    pub fn summary(&self) -> RealizationSummary {
        let to_rows = |m: &DMatrix<f64>, f: &dyn Fn(f64) -> f64| {
            (0..m.nrows()).map(|k| (0..m.ncols()).map(|l| f(m[(k, l)])).collect()).collect()
        };
        RealizationSummary {
            num_aps: self.num_aps(),
            antennas_per_ap: self.geometry.antennas_per_ap,
            num_ues: self.num_ues(),
            side_length: self.geometry.side_length,
            ap_positions: self.ap_positions.clone(),
            ue_positions: self.ue_positions.clone(),
            distances_m: to_rows(&self.distances, &|v| v),
            shadow_db: to_rows(&self.shadow_db, &|v| v),
            gains_db: to_rows(&self.gains, &|v| 10.0 * v.log10()),
            noise_dbm: self.noise_variances.iter().map(|s| 10.0 * s.log10() + 30.0).collect(),
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(file, &self.summary())?;
        Ok(())
    }

    /// Channel sidecar: little-endian `f64` pairs (re, im), row-major over
    /// `[k][l][n]`, no header.
    pub fn write_channels(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for h in &self.channels {
            for v in h.iter() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a channel sidecar written by [`NetworkRealization::write_channels`].
pub fn read_channels(path: &Path, num_ues: usize, num_aps: usize, antennas: usize) -> Result<Vec<CVec>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let expected = num_ues * num_aps * antennas * 16;
    if bytes.len() != expected {
        return Err(Error::Dimension(format!("channel file has {} bytes, expected {expected}", bytes.len())));
    }
    let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok((0..num_ues * num_aps)
        .map(|_| {
            CVec::from_fn(antennas, |_, _| {
                let re = values.next().unwrap();
                let im = values.next().unwrap();
                C64::new(re, im)
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_ues: usize,
    pub side_length: f64,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub distances_m: Vec<Vec<f64>>,
    pub shadow_db: Vec<Vec<f64>>,
    pub gains_db: Vec<Vec<f64>>,
    pub noise_dbm: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, trace_re};

    fn geometry(l: usize, k: usize) -> GeometryConfig {
        GeometryConfig { num_aps: l, num_ues: k, ..Default::default() }
    }

    #[test]
    fn grid_of_nine_aps() {
        let (aps, _) = place_network(&geometry(9, 3), 1).unwrap();
        assert_eq!(aps.len(), 9);
        assert_eq!(aps[0], [125.0, 125.0]);
        assert_eq!(aps[1], [375.0, 125.0]);
        assert_eq!(aps[8], [625.0, 625.0]);
    }

    #[test]
    fn single_ap_is_centered() {
        let (aps, _) = place_network(&geometry(1, 1), 1).unwrap();
        assert_eq!(aps, vec![[375.0, 375.0]]);
    }

    #[test]
    fn non_square_ap_count_is_rejected() {
        assert!(matches!(place_network(&geometry(8, 1), 0), Err(Error::Config(_))));
    }

    #[test]
    fn placement_is_deterministic_and_stable_in_k() {
        let (_, a) = place_network(&geometry(9, 5), 42).unwrap();
        let (_, b) = place_network(&geometry(9, 5), 42).unwrap();
        assert_eq!(a, b);
        let (_, c) = place_network(&geometry(9, 8), 42).unwrap();
        assert_eq!(&c[..5], &a[..]);
        for p in &a {
            assert!(p[0] >= 0.0 && p[0] < 750.0 && p[1] >= 0.0 && p[1] < 750.0);
        }
    }

    #[test]
    fn wrap_distance_examples() {
        assert!((wrap_distance([0.0, 0.0], [740.0, 0.0], 750.0) - 10.0).abs() < 1e-12);
        assert_eq!(wrap_distance([3.0, 4.0], [3.0, 4.0], 750.0), 0.0);
        let d = wrap_distance([0.0, 0.0], [375.0, 375.0], 750.0);
        assert!((d - 375.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn pathloss_values() {
        let p = LargeScaleParams::default();
        assert!((pathloss_db(1.0, &p).unwrap() + 30.5).abs() < 1e-12);
        assert!((pathloss_db(10.0, &p).unwrap() + 67.2).abs() < 1e-12);
        assert!((pathloss_db(100.0, &p).unwrap() + 103.9).abs() < 1e-12);
        assert!(matches!(pathloss_db(0.0, &p), Err(Error::Domain(_))));
        assert!(matches!(pathloss_db(-3.0, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn shadow_covariance_values() {
        let p = LargeScaleParams::default();
        let c = shadow_covariance(&[[0.0, 0.0], [9.0, 0.0], [0.0, 0.0]], &p, 750.0);
        assert!((c[(0, 0)] - 16.0).abs() < 1e-12);
        assert!((c[(0, 1)] - 8.0).abs() < 1e-12);
        assert!((c[(0, 2)] - 16.0).abs() < 1e-12);
        assert_eq!(c, c.transpose());
    }

    #[test]
    fn shadowing_is_independent_across_aps() {
        // one UE, many drops: sample correlation between two APs must vanish
        let g = GeometryConfig { num_aps: 4, num_ues: 1, antennas_per_ap: 1, ..Default::default() };
        let p = LargeScaleParams::default();
        let drops = 4000;
        let (mut s01, mut s00, mut s11) = (0.0, 0.0, 0.0);
        for seed in 0..drops {
            let f = large_scale_fading(&g, &p, seed).unwrap().shadow_db;
            s01 += f[(0, 0)] * f[(0, 1)];
            s00 += f[(0, 0)] * f[(0, 0)];
            s11 += f[(0, 1)] * f[(0, 1)];
        }
        let corr = s01 / (s00 * s11).sqrt();
        assert!(corr.abs() < 0.06, "cross-AP correlation {corr}");
        assert!((s00 / drops as f64 - 16.0).abs() < 1.5);
    }

    #[test]
    fn correlation_matrices_are_normalized_psd() {
        let g = geometry(9, 6);
        let large = large_scale_fading(&g, &LargeScaleParams::default(), 3).unwrap();
        for (idx, r) in large.correlations.iter().enumerate() {
            let beta = large.gains[(idx / 9, idx % 9)];
            let tr = trace_re(r);
            assert!(((tr / 4.0) - beta).abs() <= 1e-9 * beta);
            let eig = hermitian_eigen(r).unwrap();
            assert!(*eig.values.last().unwrap() >= -1e-10 * tr);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((r[(i, j)] - r[(j, i)].conj()).norm() <= 1e-15 * tr);
                }
            }
        }
    }

    #[test]
    fn zero_correlation_gives_zero_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = sample_correlated(&CMat::zeros(3, 3), &mut rng).unwrap();
        assert!(h.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn identity_correlation_empirical_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4;
        let draws = 10_000;
        let mut acc = CMat::zeros(n, n);
        for _ in 0..draws {
            let h = sample_correlated(&CMat::identity(n, n), &mut rng).unwrap();
            acc += &h * h.adjoint();
        }
        acc /= C64::new(draws as f64, 0.0);
        let err = crate::linalg::frobenius(&(acc - CMat::identity(n, n))) / (n as f64).sqrt();
        assert!(err < 0.05, "relative Frobenius error {err}");
    }

    #[test]
    fn scalar_channel_power_is_exponential() {
        // Kolmogorov-Smirnov against Exp(mean beta); 1% critical value ~1.63/sqrt(n)
        let beta = 2.5e-9;
        let r = CMat::from_element(1, 1, C64::new(beta, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut samples: Vec<f64> =
            (0..10_000).map(|_| sample_correlated(&r, &mut rng).unwrap()[0].norm_sqr()).collect();
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let ks = samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (-x / beta).exp();
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn realization_is_bit_identical_per_seed() {
        let g = geometry(4, 3);
        let p = LargeScaleParams::default();
        let a = generate(&g, &p, 99).unwrap();
        let b = generate(&g, &p, 99).unwrap();
        assert_eq!(a.channels, b.channels);
        assert_eq!(a.gains, b.gains);
        let c = generate(&g, &p, 100).unwrap();
        assert_ne!(a.channels, c.channels);
    }

    #[test]
    fn channel_sidecar_round_trip() {
        let g = geometry(4, 2);
        let net = generate(&g, &LargeScaleParams::default(), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        net.write_channels(&path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 2 * 4 * 4 * 16);
        let back = read_channels(&path, 2, 4, 4).unwrap();
        assert_eq!(back, net.channels);
        let json = dir.path().join("net.json");
        net.write_json(&json).unwrap();
        let parsed: RealizationSummary = serde_json::from_reader(File::open(&json).unwrap()).unwrap();
        assert_eq!(parsed.gains_db.len(), 2);
        assert!((parsed.noise_dbm[0] + 94.0).abs() < 1e-9);
    }

    #[test]
    fn concatenation_order_is_ap_major() {
        let net = generate(&geometry(4, 2), &LargeScaleParams::default(), 1).unwrap();
        let h = net.concatenated_channel(1);
        assert_eq!(h.len(), 16);
        assert_eq!(h[4 * 2 + 3], net.channel(1, 2)[3]);
    }
}
