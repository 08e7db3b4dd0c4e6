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

//! Relaxed MMF / QoS / sum-power problem data.
//!
//! The SNR matrices are stored through the noise-scaled channels
//! `g_k = h_k / sigma_k` (so `H_k = g_k g_k^H`), and the power matrices are
//! stored implicitly as a block selector plus one penalty matrix shared by
//! every AP, `D_l = E_l + zeta * sum_r u_r u_r^H`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_outer, inner, quad_form, trace_re, vec_norm, CMat, CVec, C64};
use crate::netsim::ChannelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mmf,
    Qos,
    SumPower,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Mmf => "mmf",
            Variant::Qos => "qos",
            Variant::SumPower => "sumpower",
        }
    }

    /// QoS and sum-power share the dual structure `z^T p = 1, y >= 0`.
    pub fn is_power_minimization(self) -> bool {
        !matches!(self, Variant::Mmf)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of the unpenalized power selectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMap {
    /// `E_l` selects the `N x N` diagonal block of AP `l`.
    PerAp { num_aps: usize, antennas: usize },
    /// A single `E = I_n` measuring total power.
    Total { dim: usize },
}

impl PowerMap {
    pub fn count(self) -> usize {
        match self {
            PowerMap::PerAp { num_aps, .. } => num_aps,
            PowerMap::Total { .. } => 1,
        }
    }

    fn range(self, l: usize) -> std::ops::Range<usize> {
        match self {
            PowerMap::PerAp { antennas, .. } => l * antennas..(l + 1) * antennas,
            PowerMap::Total { dim } => 0..dim,
        }
    }

    fn selector_size(self) -> usize {
        match self {
            PowerMap::PerAp { antennas, .. } => antennas,
            PowerMap::Total { dim } => dim,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub variant: Variant,
    num_aps: usize,
    antennas_per_ap: usize,
    power_map: PowerMap,
    channels: Vec<CVec>,
    noise_variances: Vec<f64>,
    scaled: Vec<CVec>,
    budgets: Vec<f64>,
    targets: Option<Vec<f64>>,
    zeta: f64,
    penalty_dirs: Vec<CVec>,
    penalty: CMat,
    degenerate_ues: Vec<usize>,
}

fn check_budgets(p: &[f64], expected: usize) -> Result<()> {
    if p.len() != expected {
        return Err(Error::Dimension(format!("{} power budgets for {expected} constraints", p.len())));
    }
    if p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Config("power budgets must be positive".into()));
    }
    Ok(())
}

impl SdpProblem {
    fn base(variant: Variant, net: &ChannelSet, budgets: Vec<f64>, targets: Option<Vec<f64>>) -> Result<Self> {
        let n = net.dimension();
        let scaled: Vec<CVec> =
            net.channels.iter().zip(&net.noise_variances).map(|(h, s2)| h / C64::new(s2.sqrt(), 0.0)).collect();
        let degenerate_ues = scaled.iter().enumerate().filter(|(_, g)| vec_norm(g) == 0.0).map(|(k, _)| k).collect();
        Ok(Self {
            variant,
            num_aps: net.num_aps,
            antennas_per_ap: net.antennas_per_ap,
            power_map: PowerMap::PerAp { num_aps: net.num_aps, antennas: net.antennas_per_ap },
            channels: net.channels.clone(),
            noise_variances: net.noise_variances.clone(),
            scaled,
            budgets,
            targets,
            zeta: 0.0,
            penalty_dirs: Vec::new(),
            penalty: CMat::zeros(n, n),
            degenerate_ues,
        })
    }

    /// Relaxed max-min-fair problem with per-AP budgets `p_max`.
    pub fn build_mmf(net: &ChannelSet, p_max: &[f64]) -> Result<Self> {
        check_budgets(p_max, net.num_aps)?;
        Self::base(Variant::Mmf, net, p_max.to_vec(), None)
    }

    /// Relaxed QoS problem: per-UE SNR targets `gamma`, objective is the
    /// largest normalized per-AP power.
    pub fn build_qos(net: &ChannelSet, p_max: &[f64], gamma: &[f64]) -> Result<Self> {
        check_budgets(p_max, net.num_aps)?;
        if gamma.len() != net.num_ues() {
            return Err(Error::Dimension(format!("{} targets for {} UEs", gamma.len(), net.num_ues())));
        }
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::Config("SNR targets must be positive".into()));
        }
        Self::base(Variant::Qos, net, p_max.to_vec(), Some(gamma.to_vec()))
    }

    /// Replaces the per-AP maps of a QoS problem by a single total-power map
    /// `D = I_n` with budget `P_T`.
    pub fn sum_power_variant(&self) -> Result<Self> {
        if self.variant != Variant::Qos {
            return Err(Error::Config("sum-power variant is derived from a QoS problem".into()));
        }
        let mut out = self.clone();
        out.variant = Variant::SumPower;
        out.power_map = PowerMap::Total { dim: self.dim() };
        out.budgets = vec![self.total_budget()];
        Ok(out)
    }

    /// Sets the factor used by subsequent [`apply_sea_penalty`] calls.
    ///
    /// [`apply_sea_penalty`]: SdpProblem::apply_sea_penalty
    pub fn with_penalty_factor(mut self, zeta: f64) -> Result<Self> {
        if !(zeta >= 0.0) || !zeta.is_finite() {
            return Err(Error::Config(format!("penalty factor must be nonnegative, got {zeta}")));
        }
        self.zeta = zeta;
        Ok(self)
    }

    /// Returns a copy with every `D_l` incremented by `zeta * u u^H`.
    pub fn apply_sea_penalty(&self, u: &CVec) -> Result<Self> {
        if !(self.zeta >= 0.0) {
            return Err(Error::Config(format!("penalty factor must be nonnegative, got {}", self.zeta)));
        }
        if u.len() != self.dim() {
            return Err(Error::Dimension(format!("penalty direction of length {} for n = {}", u.len(), self.dim())));
        }
        let norm = vec_norm(u);
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Contract(format!("penalty direction must have unit norm, got {norm}")));
        }
        let mut out = self.clone();
        add_outer(&mut out.penalty, u, self.zeta);
        out.penalty_dirs.push(u.clone());
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.num_aps * self.antennas_per_ap
    }

    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn antennas_per_ap(&self) -> usize {
        self.antennas_per_ap
    }

    pub fn num_ues(&self) -> usize {
        self.scaled.len()
    }

    /// Number of power constraints (`L`, or 1 for sum power).
    pub fn num_power(&self) -> usize {
        self.power_map.count()
    }

    pub fn power_map(&self) -> PowerMap {
        self.power_map
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn total_budget(&self) -> f64 {
        self.budgets.iter().sum()
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn penalty_dirs(&self) -> &[CVec] {
        &self.penalty_dirs
    }

    /// `zeta * sum_r u_r u_r^H`
    pub fn penalty_matrix(&self) -> &CMat {
        &self.penalty
    }

    pub fn channels(&self) -> &[CVec] {
        &self.channels
    }

    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }

    /// `h_k / sigma_k`
    pub fn scaled_channel(&self, k: usize) -> &CVec {
        &self.scaled[k]
    }

    /// UEs whose channel is identically zero.
    pub fn degenerate_ues(&self) -> &[usize] {
        &self.degenerate_ues
    }

    pub fn h_matrix(&self, k: usize) -> CMat {
        crate::linalg::outer(&self.scaled[k])
    }

    /// Unpenalized selector `E_l`.
    pub fn selector_matrix(&self, l: usize) -> CMat {
        let n = self.dim();
        let range = self.power_map.range(l);
        CMat::from_fn(n, n, |i, j| if i == j && range.contains(&i) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn d_matrix(&self, l: usize) -> CMat {
        self.selector_matrix(l) + &self.penalty
    }

    fn selector_trace(&self, l: usize, x: &CMat) -> f64 {
        self.power_map.range(l).map(|i| x[(i, i)].re).sum()
    }

    /// `H(W)`: per-UE SNR values `tr(H_k W)`.
    pub fn snr_values(&self, w: &CMat) -> Vec<f64> {
        self.scaled.iter().map(|g| quad_form(g, w)).collect()
    }

    /// `D(W)` including penalties.
    pub fn power_values(&self, w: &CMat) -> Vec<f64> {
        let pen = if self.penalty_dirs.is_empty() { 0.0 } else { inner(&self.penalty, w) };
        (0..self.num_power()).map(|l| self.selector_trace(l, w) + pen).collect()
    }

    /// Powers measured with the original selectors.
    pub fn base_power_values(&self, w: &CMat) -> Vec<f64> {
        (0..self.num_power()).map(|l| self.selector_trace(l, w)).collect()
    }

    /// `H^H(y) = sum_k y_k H_k`
    pub fn adjoint_h(&self, y: &[f64]) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (g, &yk) in self.scaled.iter().zip(y) {
            if yk != 0.0 {
                add_outer(&mut m, g, yk);
            }
        }
        m
    }

    /// `D^H(z) = sum_l z_l D_l`
    pub fn adjoint_d(&self, z: &[f64]) -> CMat {
        let n = self.dim();
        let total: f64 = z.iter().sum();
        let mut m = if self.penalty_dirs.is_empty() { CMat::zeros(n, n) } else { &self.penalty * C64::new(total, 0.0) };
        for (l, &zl) in z.iter().enumerate() {
            for i in self.power_map.range(l) {
                m[(i, i)] += zl;
            }
        }
        m
    }

    /// `rho * [HH^H, -HD^H; -DH^H, DD^H]`, evaluated through Frobenius inner
    /// products (all real for Hermitian data) and symmetrized.
    pub fn qp_matrix(&self, rho: f64) -> DMatrix<f64> {
        let k_count = self.num_ues();
        let m_count = self.num_power();
        let size = k_count + m_count;
        let mut q = DMatrix::zeros(size, size);
        let has_pen = !self.penalty_dirs.is_empty();

        for i in 0..k_count {
            for j in i..k_count {
                let v = self.scaled[i].dotc(&self.scaled[j]).norm_sqr();
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        let pen_h: Vec<f64> = if has_pen {
            self.scaled.iter().map(|g| quad_form(g, &self.penalty)).collect()
        } else {
            vec![0.0; k_count]
        };
        for k in 0..k_count {
            for l in 0..m_count {
                let sel: f64 = self.power_map.range(l).map(|i| self.scaled[k][i].norm_sqr()).sum();
                let v = -(sel + pen_h[k]);
                q[(k, k_count + l)] = v;
                q[(k_count + l, k)] = v;
            }
        }
        let pen_norm2 = if has_pen { inner(&self.penalty, &self.penalty) } else { 0.0 };
        let pen_sel: Vec<f64> = (0..m_count).map(|l| self.selector_trace(l, &self.penalty)).collect();
        let sel_size = self.power_map.selector_size() as f64;
        for l in 0..m_count {
            for m in l..m_count {
                let overlap = if l == m { sel_size } else { 0.0 };
                let v = overlap + pen_sel[l] + pen_sel[m] + pen_norm2;
                q[(k_count + l, k_count + m)] = v;
                q[(k_count + m, k_count + l)] = v;
            }
        }
        q *= rho;
        (&q + q.transpose()) * 0.5
    }

    /// Linear term of the `{y, z}` QP with `r = vec(S + W_bar)`:
    /// MMF `[rho Re(Hr); p - rho Re(Dr)]`, power minimization
    /// `[rho Re(Hr) - gamma; -rho Re(Dr)]`.
    pub fn qp_linear(&self, rho: f64, r: &CMat) -> DVector<f64> {
        let k_count = self.num_ues();
        let m_count = self.num_power();
        let mut c = DVector::zeros(k_count + m_count);
        let hr = self.snr_values(r);
        let dr = self.power_values(r);
        for k in 0..k_count {
            c[k] = rho * hr[k];
        }
        for l in 0..m_count {
            c[k_count + l] = -rho * dr[l];
        }
        match (self.variant, &self.targets) {
            (Variant::Mmf, _) => {
                for l in 0..m_count {
                    c[k_count + l] += self.budgets[l];
                }
            }
            (_, Some(gamma)) => {
                for k in 0..k_count {
                    c[k] -= gamma[k];
                }
            }
            (_, None) => unreachable!("power-minimization problems always carry targets"),
        }
        c
    }

    pub fn build_qp(&self, rho: f64, s: &CMat, w_bar: &CMat) -> Result<QpData> {
        let n = self.dim();
        for (name, m) in [("S", s), ("W_bar", w_bar)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
            }
        }
        if !(rho > 0.0) {
            return Err(Error::Config("rho must be positive".into()));
        }
        Ok(QpData { q: self.qp_matrix(rho), c: self.qp_linear(rho, &(s + w_bar)), rho })
    }

    /// Explicit mapping matrices with rows `vec(H_k)^H` and `vec(D_l)^H`
    /// (column-major vectorization). Dense `n^2` columns; meant for checks.
    pub fn vectorized_maps(&self) -> (CMat, CMat) {
        let n = self.dim();
        let vec_row = |m: &CMat| -> Vec<C64> { m.iter().map(|v| v.conj()).collect() };
        let mut hmap = CMat::zeros(self.num_ues(), n * n);
        for k in 0..self.num_ues() {
            for (j, v) in vec_row(&self.h_matrix(k)).into_iter().enumerate() {
                hmap[(k, j)] = v;
            }
        }
        let mut dmap = CMat::zeros(self.num_power(), n * n);
        for l in 0..self.num_power() {
            for (j, v) in vec_row(&self.d_matrix(l)).into_iter().enumerate() {
                dmap[(l, j)] = v;
            }
        }
        (hmap, dmap)
    }

    /// Binary sidecar used for cross-implementation checks. Little-endian:
    /// magic `SDPP`, u32 version, u8 variant, u32 K, L, N, u8 total-power
    /// flag, f64 zeta, u32 penalty count, u8 has-targets flag, then channels
    /// `[k][n]` as (re, im) f64 pairs, K noise variances, budgets, targets,
    /// and penalty directions `[r][n]`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"SDPP")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&[match self.variant {
            Variant::Mmf => 0u8,
            Variant::Qos => 1,
            Variant::SumPower => 2,
        }])?;
        for v in [self.num_ues(), self.num_aps, self.antennas_per_ap] {
            w.write_all(&(v as u32).to_le_bytes())?;
        }
        w.write_all(&[matches!(self.power_map, PowerMap::Total { .. }) as u8])?;
        w.write_all(&self.zeta.to_le_bytes())?;
        w.write_all(&(self.penalty_dirs.len() as u32).to_le_bytes())?;
        w.write_all(&[self.targets.is_some() as u8])?;
        let write_c = |w: &mut W, v: &CVec| -> std::io::Result<()> {
            for x in v.iter() {
                w.write_all(&x.re.to_le_bytes())?;
                w.write_all(&x.im.to_le_bytes())?;
            }
            Ok(())
        };
        for h in &self.channels {
            write_c(&mut w, h)?;
        }
        for v in self.noise_variances.iter().chain(&self.budgets).chain(self.targets.iter().flatten()) {
            w.write_all(&v.to_le_bytes())?;
        }
        for u in &self.penalty_dirs {
            write_c(&mut w, u)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"SDPP" {
            return Err(Error::Config("not a problem sidecar".into()));
        }
        let version = read_u32(&mut r)?;
        if version != 1 {
            return Err(Error::Config(format!("unsupported sidecar version {version}")));
        }
        let variant = match read_u8(&mut r)? {
            0 => Variant::Mmf,
            1 => Variant::Qos,
            2 => Variant::SumPower,
            v => return Err(Error::Config(format!("unknown variant tag {v}"))),
        };
        let k_count = read_u32(&mut r)?;
        let l_count = read_u32(&mut r)?;
        let n_ant = read_u32(&mut r)?;
        let total = read_u8(&mut r)? == 1;
        let zeta = read_f64(&mut r)?;
        let r_count = read_u32(&mut r)?;
        let has_targets = read_u8(&mut r)? == 1;
        let n = l_count * n_ant;
        let channels = (0..k_count).map(|_| read_cvec(&mut r, n)).collect::<Result<Vec<_>>>()?;
        let noise = (0..k_count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let m_count = if total { 1 } else { l_count };
        let budgets = (0..m_count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let targets =
            if has_targets { Some((0..k_count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?) } else { None };
        let dirs = (0..r_count).map(|_| read_cvec(&mut r, n)).collect::<Result<Vec<_>>>()?;

        let net = ChannelSet::new(l_count, n_ant, channels, noise)?;
        let mut prob = Self::base(variant, &net, budgets, targets)?;
        if total {
            prob.power_map = PowerMap::Total { dim: n };
        }
        prob = prob.with_penalty_factor(zeta)?;
        for u in &dirs {
            prob = prob.apply_sea_penalty(u)?;
        }
        Ok(prob)
    }
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_cvec<R: Read>(r: &mut R, n: usize) -> Result<CVec> {
    let mut v = CVec::zeros(n);
    for i in 0..n {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        v[i] = C64::new(re, im);
    }
    Ok(v)
}

/// Data of the `{y, z}` block QP `min 1/2 x^T Q x + c^T x` over the
/// variant's constraint set.
#[derive(Debug, Clone)]
pub struct QpData {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub rho: f64,
}

impl QpData {
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }
}

/// `<D_l, W>` computed from the dense matrix; used by tests and oracles that
/// must not rely on the implicit representation.
pub fn dense_power(prob: &SdpProblem, l: usize, w: &CMat) -> f64 {
    trace_re(&(prob.d_matrix(l) * w))
}
