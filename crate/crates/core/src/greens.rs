//! Green's functions of `H0 + k² + V` for spherically symmetric tails `V ≥ 0`.
//!
//! Each partial wave is handled through the logarithmic derivatives
//! `z = r u'/u` of the regular and decaying radial solutions, integrated in
//! `t = ln r` where the Riccati equation
//! `dz/dt = z - z² + r²(V + k²) + ℓ(ℓ+1)` is stable in the direction of
//! integration for both branches. The radial Green's function then reads
//! `g_ℓ(r, r') = r_< exp(∫_{t_<}^{t_>} z_dec dt) / (z_reg - z_dec)(t_<)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::f_eval;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RadialGrid};
use crate::ode::dopri5;
use crate::potential::{left_of, TailSpec, ZeroEnergyExterior};
use crate::quadrature::{integrate_pieces, legendre_all};

pub const DEFAULT_L_MAX: usize = 48;

const T_STEP: f64 = 0.01;
const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-13;

pub type Point = [f64; 3];

fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn distance(x: &Point, y: &Point) -> f64 {
    norm(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]])
}

/// `e^{-k|x-y|} / (4π|x-y|)`.
pub fn free_kernel(k: f64, x: &Point, y: &Point) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k must be finite and non-negative, got {k}")));
    }
    let d = distance(x, y);
    if d == 0.0 {
        return Err(Error::Domain("free kernel is singular at x = y".into()));
    }
    Ok((-k * d).exp() / (4.0 * PI * d))
}

/// Samples of one Riccati branch on the `t` nodes.
#[derive(Debug, Clone)]
struct Track {
    z: Vec<f64>,
    /// `dz/dt` with the tail's right limit at each node.
    dz_right: Vec<f64>,
    /// `dz/dt` with the tail's left limit at each node.
    dz_left: Vec<f64>,
    /// `∫_{t_0}^{t_i} z dt`.
    cum: Vec<f64>,
}

impl Track {
    fn new(t: &[f64], z: Vec<f64>, rhs: impl Fn(f64, f64, bool) -> f64) -> Self {
        let n = z.len();
        let dz_right: Vec<f64> = (0..n).map(|i| rhs(t[i], z[i], false)).collect();
        let dz_left: Vec<f64> = (0..n).map(|i| rhs(t[i], z[i], true)).collect();
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            let h = t[i + 1] - t[i];
            cum[i + 1] = cum[i] + 0.5 * h * (z[i] + z[i + 1]) + h * h * (dz_right[i] - dz_left[i + 1]) / 12.0;
        }
        Track { z, dz_right, dz_left, cum }
    }

    /// Hermite value of `z` and `∫_{t_0}^{t} z` inside interval `i`.
    fn eval(&self, t_nodes: &[f64], i: usize, t: f64) -> (f64, f64) {
        let (a, b) = (t_nodes[i], t_nodes[i + 1]);
        let h = b - a;
        let s = ((t - a) / h).clamp(0.0, 1.0);
        let (z0, z1) = (self.z[i], self.z[i + 1]);
        let (m0, m1) = (self.dz_right[i], self.dz_left[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * z0
            + (s3 - 2.0 * s2 + s) * h * m0
            + (-2.0 * s3 + 3.0 * s2) * z1
            + (s3 - s2) * h * m1;
        let int = h
            * ((0.5 * s4 - s3 + s) * z0
                + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * h * m0
                + (-0.5 * s4 + s3) * z1
                + (0.25 * s4 - s3 / 3.0) * h * m1);
        (v, self.cum[i] + int)
    }
}

/// Regular and decaying branches of one partial wave.
#[derive(Debug, Clone)]
struct Channel {
    reg: Track,
    dec: Track,
}

/// Node layout shared by all partial waves of a kernel.
#[derive(Debug, Clone)]
struct Mesh {
    t: Vec<f64>,
    r: Vec<f64>,
}

impl Mesh {
    fn new(r_min: f64, r_max: f64, breaks: &[f64]) -> Self {
        let (t0, t1) = (r_min.ln(), r_max.ln());
        let n = ((t1 - t0) / T_STEP).ceil().max(1.0) as usize;
        let mut pts: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                (t, t.exp())
            })
            .collect();
        pts[0] = (t0, r_min);
        pts[n] = (t1, r_max);
        for &b in breaks {
            if !(b > r_min && b < r_max) {
                continue;
            }
            let tb = b.ln();
            let i = pts.partition_point(|p| p.0 < tb);
            let gap = |j: usize| (pts[j].0 - tb).abs();
            if i < pts.len() && gap(i) < 0.3 * T_STEP && i != 0 && i != n {
                pts[i] = (tb, b);
            } else if i > 0 && gap(i - 1) < 0.3 * T_STEP && i - 1 != 0 {
                pts[i - 1] = (tb, b);
            } else {
                pts.insert(i, (tb, b));
            }
        }
        Mesh { t: pts.iter().map(|p| p.0).collect(), r: pts.iter().map(|p| p.1).collect() }
    }

    fn locate(&self, t: f64) -> usize {
        let i = self.t.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.t.len() - 2)
    }
}

fn riccati_rhs<'a>(tail: &'a TailSpec, k: f64, l: u32, mesh: &'a Mesh) -> impl Fn(usize, f64, f64) -> f64 + 'a {
    let c = (l * (l + 1)) as f64;
    let k2 = k * k;
    move |i: usize, t: f64, z: f64| {
        let (r0, r1) = (mesh.r[i], mesh.r[i + 1]);
        let r = t.exp();
        let v = if r >= r1 {
            tail.value(left_of(r1))
        } else if r <= r0 {
            tail.value(r0)
        } else {
            tail.value(r)
        };
        let r = r.clamp(r0, r1);
        z - z * z + r * r * (v + k2) + c
    }
}

fn node_rhs<'a>(tail: &'a TailSpec, k: f64, l: u32, mesh: &'a Mesh) -> impl Fn(f64, f64, bool) -> f64 + 'a {
    let c = (l * (l + 1)) as f64;
    let k2 = k * k;
    move |t: f64, z: f64, left: bool| {
        let i = mesh.t.partition_point(|&x| x < t).min(mesh.r.len() - 1);
        let r = mesh.r[i];
        let v = if left { tail.value(left_of(r)) } else { tail.value(r) };
        z - z * z + r * r * (v + k2) + c
    }
}

/// `r u'/u` of the decaying solution at the outer end.
fn outer_z(tail: &TailSpec, k: f64, l: u32, r: f64) -> f64 {
    if k > 0.0 {
        let lang = (l * (l + 1)) as f64 + 0.25;
        let big_q = |x: f64| tail.value(x) + lang / (x * x) + k * k;
        let q = big_q(r);
        let h = 1e-4 * r;
        let dq = (big_q(r + h) - big_q(r - h)) / (2.0 * h);
        r * (-q.sqrt() - dq / (4.0 * q))
    } else {
        r * ZeroEnergyExterior::from_asymptotics(tail.asymptotics(1.0), l).log_derivative(r)
    }
}

fn build_channel(tail: &TailSpec, k: f64, l: u32, mesh: &Mesh) -> Result<Channel> {
    let n = mesh.t.len();
    let rhs = riccati_rhs(tail, k, l, mesh);
    let lf = l as f64;

    let r0 = mesh.r[0];
    let q0 = tail.value(r0) + k * k;
    let c = q0 / (2.0 * (2.0 * lf + 3.0));
    let mut z_reg = vec![0.0; n];
    z_reg[0] = lf + 1.0 + 2.0 * c * r0 * r0 / (1.0 + c * r0 * r0);
    let mut h = T_STEP;
    for i in 0..n - 1 {
        let (z, hn) = dopri5(|t, z| rhs(i, t, z), mesh.t[i], z_reg[i], mesh.t[i + 1], h, RTOL, ATOL)?;
        z_reg[i + 1] = z;
        h = hn.abs();
    }

    let mut z_dec = vec![0.0; n];
    z_dec[n - 1] = outer_z(tail, k, l, mesh.r[n - 1]);
    let mut h = T_STEP;
    for i in (0..n - 1).rev() {
        let (z, hn) = dopri5(|t, z| rhs(i, t, z), mesh.t[i + 1], z_dec[i + 1], mesh.t[i], h, RTOL, ATOL)?;
        z_dec[i] = z;
        h = hn.abs();
    }

    let nr = node_rhs(tail, k, l, mesh);
    Ok(Channel { reg: Track::new(&mesh.t, z_reg, &nr), dec: Track::new(&mesh.t, z_dec, &nr) })
}

/// A kernel value with the estimated size of the omitted partial waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub truncation: f64,
}

/// Partial-wave representation of `(H0 + k² + V)^{-1}`.
#[derive(Debug, Clone)]
pub struct PartialWaveKernel {
    k: f64,
    tail: TailSpec,
    mesh: Arc<Mesh>,
    channels: Vec<Channel>,
}

impl PartialWaveKernel {
    /// Channels `0..=l_max`, valid for radii up to `reach`.
    pub fn new(tail: &TailSpec, k: f64, l_max: usize, reach: f64) -> Result<Self> {
        tail.validate()?;
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("k must be finite and non-negative, got {k}")));
        }
        let scale = tail.length_scale().unwrap_or(1.0);
        let breaks = tail.breakpoints();
        let last = breaks.iter().copied().fold(scale, f64::max);
        let mut r_max = (100.0 * last).max(2.0 * reach);
        if k > 0.0 {
            r_max = r_max.max(60.0 / k);
        }
        let mesh = Arc::new(Mesh::new(1e-6 * scale, r_max, &breaks));
        let channels = (0..=l_max as u32)
            .into_par_iter()
            .map(|l| build_channel(tail, k, l, &mesh))
            .collect::<Result<Vec<_>>>()?;
        Ok(PartialWaveKernel { k, tail: tail.clone(), mesh, channels })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn tail(&self) -> &TailSpec {
        &self.tail
    }

    pub fn l_max(&self) -> usize {
        self.channels.len() - 1
    }

    pub fn reach(&self) -> f64 {
        *self.mesh.r.last().unwrap()
    }

    fn check(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || r > self.reach() {
            return Err(Error::Domain(format!("radius {r} outside kernel range (0, {}]", self.reach())));
        }
        Ok(())
    }

    fn branches(&self, ch: &Channel, r: f64) -> (f64, f64, f64, f64) {
        let t = r.ln();
        if t <= self.mesh.t[0] {
            // below the first node the branches are frozen at their start values
            let dt = t - self.mesh.t[0];
            return (ch.reg.z[0], ch.reg.z[0] * dt, ch.dec.z[0], ch.dec.z[0] * dt);
        }
        let i = self.mesh.locate(t);
        let (zr, ir) = ch.reg.eval(&self.mesh.t, i, t);
        let (zd, id) = ch.dec.eval(&self.mesh.t, i, t);
        (zr, ir, zd, id)
    }

    /// Radial Green's function `g_ℓ(r, r')` of `-u'' + (V + ℓ(ℓ+1)/r² + k²) u = δ`.
    pub fn g_l(&self, l: usize, r: f64, rp: f64) -> Result<f64> {
        self.check(r)?;
        self.check(rp)?;
        let ch = self.channel(l)?;
        let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
        let (zr, _, zd, id_lo) = self.branches(ch, lo);
        let (_, _, _, id_hi) = self.branches(ch, hi);
        Ok(lo * (id_hi - id_lo).exp() / (zr - zd))
    }

    /// The same quantity from the regular branch, normalizing the Wronskian at `r_>`.
    pub fn g_l_alt(&self, l: usize, r: f64, rp: f64) -> Result<f64> {
        self.check(r)?;
        self.check(rp)?;
        let ch = self.channel(l)?;
        let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
        let (_, ir_lo, _, _) = self.branches(ch, lo);
        let (zr, ir_hi, zd, _) = self.branches(ch, hi);
        Ok(hi * (ir_lo - ir_hi).exp() / (zr - zd))
    }

    /// Largest relative deviation of the Wronskian from its value at `r = 1`
    /// (in units of the tail's length scale) over the mesh.
    pub fn wronskian_drift(&self, l: usize) -> Result<f64> {
        let ch = self.channel(l)?;
        let log_w = |i: usize| ch.reg.cum[i] + ch.dec.cum[i] + (ch.reg.z[i] - ch.dec.z[i]).ln() - self.mesh.t[i];
        let mid = self.mesh.t.len() / 2;
        let w0 = log_w(mid);
        Ok((0..self.mesh.t.len()).map(|i| (log_w(i) - w0).exp_m1().abs()).fold(0.0, f64::max))
    }

    fn channel(&self, l: usize) -> Result<&Channel> {
        self.channels
            .get(l)
            .ok_or_else(|| Error::Domain(format!("partial wave {l} exceeds l_max = {}", self.l_max())))
    }

    /// `ĝ(r) = 4πr·G(x, 0)`, the decaying s-wave solution normalized to 1 at the origin.
    pub fn profile_value(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(1.0);
        }
        self.check(r)?;
        let ch = &self.channels[0];
        let (_, _, _, id) = self.branches(ch, r);
        // u_dec(r_0)/u_dec(0) ≈ exp(z_dec(r_0)) for the s-wave
        Ok((id + ch.dec.z[0]).exp())
    }

    /// `ĝ'(r)/ĝ(r)`.
    pub fn profile_log_derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        let (_, _, zd, _) = self.branches(&self.channels[0], r);
        Ok(zd / r)
    }

    /// `G(x, y)` summed over `ℓ ≤ l_max`.
    pub fn value(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        let (r, rp) = (norm(x), norm(y));
        if r == 0.0 && rp == 0.0 || distance(x, y) == 0.0 {
            return Err(Error::Domain("kernel is singular at x = y".into()));
        }
        if r == 0.0 || rp == 0.0 {
            let s = r.max(rp);
            return Ok(KernelValue { value: self.profile_value(s)? / (4.0 * PI * s), truncation: 0.0 });
        }
        let cos = ((x[0] * y[0] + x[1] * y[1] + x[2] * y[2]) / (r * rp)).clamp(-1.0, 1.0);
        self.radial_value(r, rp, cos)
    }

    /// `G` for radii `r, r'` and angle cosine `cos`.
    pub fn radial_value(&self, r: f64, rp: f64, cos: f64) -> Result<KernelValue> {
        let p = legendre_all(self.l_max(), cos);
        let mut sum = 0.0;
        for (l, pl) in p.iter().enumerate() {
            sum += (2 * l + 1) as f64 * pl * self.g_l(l, r, rp)?;
        }
        let value = sum / (4.0 * PI * r * rp);
        Ok(KernelValue { value, truncation: truncation_estimate(r, rp, self.l_max()) })
    }
}

/// Size of the free `k = 0` partial waves beyond `l_max`, which bound those of any
/// `k ≥ 0` and non-negative tail.
pub fn truncation_estimate(r: f64, rp: f64, l_max: usize) -> f64 {
    let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
    let rho = lo / hi;
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    rho.powi(l_max as i32 + 1) / ((1.0 - rho) * 4.0 * PI * hi)
}

/// `G_k(x, y)` for a tail with `k > 0`.
pub fn offcenter_kernel(tail: &TailSpec, k: f64, x: &Point, y: &Point, l_max: usize) -> Result<KernelValue> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("off-center kernels need k > 0, got {k}")));
    }
    let reach = norm(x).max(norm(y));
    PartialWaveKernel::new(tail, k, l_max, reach)?.value(x, y)
}

/// `ĝ_k(r)` on a grid, with `G_k(x, 0) = ĝ_k(r)/(4πr)`.
#[derive(Debug, Clone)]
pub struct KernelProfile {
    pub k: f64,
    pub tail: TailSpec,
    pub grid: RadialGrid,
    pub ghat: Vec<f64>,
    /// Set when `k = 0` and the tail has no decaying zero-energy branch, so
    /// the profile tends to a positive constant.
    pub constant_branch: bool,
    kernel: Arc<PartialWaveKernel>,
}

impl KernelProfile {
    pub fn value_at(&self, r: f64) -> Result<f64> {
        self.kernel.profile_value(r)
    }

    pub fn kernel(&self) -> &PartialWaveKernel {
        &self.kernel
    }
}

/// Default profile grid: the usual radial layout out to `reach`.
pub fn profile_grid(tail: &TailSpec, reach: f64) -> Result<RadialGrid> {
    let scale = tail.length_scale().unwrap_or(1.0);
    RadialGrid::new(&GridSpec::new(scale, reach).with_breakpoints(tail.breakpoints()))
}

pub fn gk_profile(tail: &TailSpec, k: f64, grid: Option<&RadialGrid>) -> Result<KernelProfile> {
    let reach = grid.map(|g| g.r_max()).unwrap_or(0.0);
    let kernel = PartialWaveKernel::new(tail, k, 0, reach)?;
    let grid = match grid {
        Some(g) => g.clone(),
        None => profile_grid(tail, kernel.reach())?,
    };
    let ghat = grid.nodes().iter().map(|&r| kernel.profile_value(r)).collect::<Result<Vec<_>>>()?;
    let constant_branch = k == 0.0
        && matches!(ZeroEnergyExterior::from_asymptotics(tail.asymptotics(1.0), 0), ZeroEnergyExterior::Constant);
    Ok(KernelProfile { k, tail: tail.clone(), grid, ghat, constant_branch, kernel: Arc::new(kernel) })
}

/// One kernel evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub x: Point,
    pub y: Point,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub holds: bool,
    pub samples: usize,
    pub violations: usize,
    /// Largest `G_2/G_1` over the samples.
    pub worst_ratio: f64,
    pub worst_sample: Option<KernelSample>,
    pub max_truncation: f64,
}

/// Radii at which two tails are compared pointwise.
fn comparison_radii(tails: &[&TailSpec]) -> Vec<f64> {
    let mut rs = crate::quadrature::log_space(1e-4, 1e5, 4000);
    for t in tails {
        for b in t.breakpoints() {
            rs.push(b);
            rs.push(left_of(b));
        }
    }
    rs
}

/// Whether `v1 ≤ v2` pointwise (checked on a dense radial sample).
pub fn tails_ordered(v1: &TailSpec, v2: &TailSpec) -> bool {
    comparison_radii(&[v1, v2]).iter().all(|&r| v1.value(r) <= v2.value(r))
}

/// Checks `G[V2] ≤ G[V1]·(1 + 10⁻⁶)` at every sample, for `V1 ≤ V2`.
pub fn domination_check(v1: &TailSpec, v2: &TailSpec, samples: &[KernelSample], l_max: usize) -> Result<DominationReport> {
    if !tails_ordered(v1, v2) {
        return Err(Error::Precondition("domination needs V1 ≤ V2 pointwise".into()));
    }
    let mut ks: Vec<f64> = samples.iter().map(|s| s.k).collect();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ks.dedup();
    let reach = samples.iter().map(|s| norm(&s.x).max(norm(&s.y))).fold(0.0, f64::max);
    let kernels = ks
        .par_iter()
        .map(|&k| Ok((k, PartialWaveKernel::new(v1, k, l_max, reach)?, PartialWaveKernel::new(v2, k, l_max, reach)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = DominationReport {
        holds: true,
        samples: samples.len(),
        violations: 0,
        worst_ratio: 0.0,
        worst_sample: None,
        max_truncation: 0.0,
    };
    for s in samples {
        let (_, k1, k2) = kernels.iter().find(|(k, _, _)| *k == s.k).unwrap();
        let g1 = k1.value(&s.x, &s.y)?;
        let g2 = k2.value(&s.x, &s.y)?;
        let ratio = g2.value / g1.value;
        if ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_sample = Some(*s);
        }
        report.max_truncation = report.max_truncation.max(g1.truncation).max(g2.truncation);
        if g2.value > g1.value * (1.0 + 1e-6) {
            report.violations += 1;
        }
    }
    report.holds = report.violations == 0;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    pub violations: usize,
    /// Most negative `ĝ_{k_{i+1}} - ĝ_{k_i}` seen (0 when monotone).
    pub worst_decrease: f64,
    /// For `1/r²` tails: largest relative gap between the smallest-k profile
    /// and the zero-energy closed form, over grid radii up to 10 R0.
    pub limit_deviation: Option<f64>,
    #[serde(skip)]
    pub profiles: Vec<KernelProfile>,
}

/// Profiles must not decrease as `k` decreases; differences below `10⁻¹²`
/// are treated as round-off.
pub fn monotonicity_in_k_check(tail: &TailSpec, k_list: &[f64], grid: Option<&RadialGrid>) -> Result<MonotonicityReport> {
    if k_list.is_empty() || k_list.windows(2).any(|w| !(w[1] < w[0])) || k_list.iter().any(|k| !(*k >= 0.0)) {
        return Err(Error::Precondition("k list must be non-negative and strictly decreasing".into()));
    }
    let grid = match grid {
        Some(g) => g.clone(),
        None => profile_grid(tail, 100.0 * tail.length_scale().unwrap_or(1.0))?,
    };
    let profiles = k_list.par_iter().map(|&k| gk_profile(tail, k, Some(&grid))).collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for w in profiles.windows(2) {
        for (a, b) in w[0].ghat.iter().zip(&w[1].ghat) {
            let d = b - a;
            if d < -1e-12 {
                violations += 1;
            }
            worst = worst.min(d);
        }
    }
    let limit_deviation = match tail {
        TailSpec::InverseSquare { strength, radius } if *strength > 0.0 => {
            let last = profiles.last().unwrap();
            let mut dev: f64 = 0.0;
            for (&r, &g) in grid.nodes().iter().zip(&last.ghat) {
                if r <= 10.0 * radius {
                    let exact = 4.0 * PI * r * f_eval(*strength, *radius, r)?;
                    dev = dev.max((g / exact - 1.0).abs());
                }
            }
            Some(dev)
        }
        _ => None,
    };
    Ok(MonotonicityReport { holds: violations == 0, violations, worst_decrease: worst, limit_deviation, profiles })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Quadrature error estimates, one per radius.
    pub quadrature_error: Vec<f64>,
    pub converged: bool,
}

/// `F(r) + A ∫_{R0}^∞ F(r')/max(r, r') dr' - 1/(4πr)`: the zero-energy resolvent
/// equation for the `A/r²` tail after the angular integral.
pub fn integral_equation_residual_of(f: impl Fn(f64) -> f64, strength: f64, radius: f64, radii: &[f64]) -> Result<ResidualReport> {
    if !(strength >= 0.0 && radius > 0.0) {
        return Err(Error::Domain("need A ≥ 0 and R0 > 0".into()));
    }
    let mut residuals = Vec::new();
    let mut errors = Vec::new();
    let mut converged = true;
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        let mut integral = 0.0;
        let mut err = 0.0;
        let split = r.max(radius);
        if r > radius {
            let q = integrate_pieces(|s| f(s) / r, &[radius, r], 1e-15, 1e-13);
            integral += q.value;
            err += q.error;
            converged &= q.converged;
        }
        let q = crate::quadrature::integrate_to_infinity(|s| f(s) / s, split, 1e-15, 1e-13);
        integral += q.value;
        err += q.error;
        converged &= q.converged;
        residuals.push(f(r) + strength * integral - 1.0 / (4.0 * PI * r));
        errors.push(strength * err);
    }
    let max_abs = residuals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ResidualReport { radii: radii.to_vec(), residuals, max_abs, quadrature_error: errors, converged })
}

/// Residual of the closed-form `F` for `InverseSquare(A, R0)`.
pub fn integral_equation_residual(tail: &TailSpec, radii: &[f64]) -> Result<ResidualReport> {
    match *tail {
        TailSpec::InverseSquare { strength, radius } => {
            integral_equation_residual_of(|r| f_eval(strength, radius, r).unwrap_or(f64::NAN), strength, radius, radii)
        }
        _ => Err(Error::Precondition("closed form known only for the inverse-square tail".into())),
    }
}

/// `ĝ(r) + (1/2k) ∫ (e^{-k|r-r'|} - e^{-k(r+r')}) V(r') ĝ(r') dr' - e^{-kr}`
/// at each radius: the resolvent equation for the profile at `k > 0`.
pub fn resolvent_residual(profile: &KernelProfile, radii: &[f64]) -> Result<ResidualReport> {
    let k = profile.k;
    if !(k > 0.0) {
        return Err(Error::Domain("resolvent residual needs k > 0".into()));
    }
    let kernel = profile.kernel();
    let tail = &profile.tail;
    let top = kernel.reach();
    let mut residuals = Vec::new();
    let mut errors = Vec::new();
    let mut converged = true;
    for &r in radii {
        let mut pts = vec![1e-12, r, top];
        pts.extend(tail.breakpoints().into_iter().filter(|b| *b < top));
        // resolve the decay scale of the integrand
        let mut s = 1.0 / k;
        while s < top {
            pts.push(s);
            s *= 4.0;
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let q = integrate_pieces(
            |rp| {
                let g = kernel.profile_value(rp).unwrap_or(0.0);
                let w = (-k * (r - rp).abs()).exp() - (-k * (r + rp)).exp();
                w * tail.value(rp) * g
            },
            &pts,
            1e-14,
            1e-11,
        );
        converged &= q.converged;
        errors.push(q.error / (2.0 * k));
        residuals.push(kernel.profile_value(r)? + q.value / (2.0 * k) - (-k * r).exp());
    }
    let max_abs = residuals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ResidualReport { radii: radii.to_vec(), residuals, max_abs, quadrature_error: errors, converged })
}

/// `∫ dΩ_y / |x - y|` over the sphere `|y| = r'`.
pub fn angular_coulomb(r: f64, rp: f64) -> f64 {
    4.0 * PI / r.max(rp)
}

/// `∫ dΩ_y e^{-k|x-y|} / |x - y|` over the sphere `|y| = r'`.
pub fn angular_yukawa(k: f64, r: f64, rp: f64) -> f64 {
    if k == 0.0 {
        return angular_coulomb(r, rp);
    }
    2.0 * PI * ((-k * (r - rp).abs()).exp() - (-k * (r + rp)).exp()) / (k * r * rp)
}

/// `∫ dΩ_y / |x - y|²` over the sphere `|y| = r'`.
pub fn angular_inverse_square(r: f64, rp: f64) -> f64 {
    2.0 * PI / (r * rp) * ((r + rp) / (r - rp).abs()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact `ĝ_k` for `A = 2, R0 = 1`: `cosh(kr) - c sinh(kr)` inside and
    /// `B e^{-kr}(1 + 1/(kr))` outside, matched in value and slope at 1.
    fn exact_a2(k: f64, r: f64) -> f64 {
        let out = |x: f64| (-k * x).exp() * (1.0 + 1.0 / (k * x));
        let dout = |x: f64| -k * out(x) - (-k * x).exp() / (k * x * x);
        let beta = dout(1.0) / out(1.0);
        // (k sinh k - c k cosh k) = β (cosh k - c sinh k)
        let c = (k * k.sinh() - beta * k.cosh()) / (k * k.cosh() - beta * k.sinh());
        let inside = |x: f64| (k * x).cosh() - c * (k * x).sinh();
        if r < 1.0 {
            inside(r)
        } else {
            inside(1.0) * out(r) / out(1.0)
        }
    }

    #[test]
    fn free_kernel_values() {
        let o = [0.0; 3];
        assert_relative_eq!(free_kernel(0.0, &[1.0, 0.0, 0.0], &o).unwrap(), 1.0 / (4.0 * PI));
        assert_relative_eq!(free_kernel(1.0, &[0.0, 1.0, 0.0], &o).unwrap(), (-1.0f64).exp() / (4.0 * PI));
        assert!(free_kernel(1.0, &o, &o).is_err());
        let mut prev = f64::INFINITY;
        for d in [1.0, 2.0, 5.0, 50.0] {
            let v = free_kernel(0.3, &[d, 0.0, 0.0], &o).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn free_profile_is_exponential() {
        let p = gk_profile(&TailSpec::None, 1.0, None).unwrap();
        for (&r, &g) in p.grid.nodes().iter().zip(&p.ghat).step_by(97) {
            if r < 40.0 {
                assert_relative_eq!(g, (-r).exp(), max_relative = 1e-8);
            }
        }
        let flat = gk_profile(&TailSpec::None, 0.0, None).unwrap();
        assert!(flat.constant_branch);
        assert!(flat.ghat.iter().all(|g| (g - 1.0).abs() < 1e-10));
    }

    #[test]
    fn inverse_square_profiles_match_closed_forms() {
        let tail = TailSpec::inverse_square(2.0, 1.0);
        let p0 = gk_profile(&tail, 0.0, None).unwrap();
        for r in [0.1, 0.5, 1.0, 2.0, 10.0, 50.0] {
            let exact = if r <= 1.0 { 1.0 - 0.5 * r } else { 0.5 / r };
            assert_relative_eq!(p0.value_at(r).unwrap(), exact, max_relative = 1e-8);
        }
        for k in [1.0, 0.1] {
            let p = gk_profile(&tail, k, None).unwrap();
            for r in [0.05, 0.5, 1.0, 3.0, 20.0] {
                assert_relative_eq!(p.value_at(r).unwrap(), exact_a2(k, r), max_relative = 1e-7);
                assert!(p.value_at(r).unwrap() <= p0.value_at(r).unwrap());
            }
            assert!(*p.ghat.last().unwrap() < 1e-20);
        }
    }

    #[test]
    fn coulomb_zero_energy_profile() {
        // F^c exterior e^{-a√r} is exact for the ζ tail
        let tail = TailSpec::coulomb_dominant(2.0, 1.0);
        let p = gk_profile(&tail, 0.0, None).unwrap();
        for r in [0.3, 1.0, 4.0, 25.0] {
            let exact = 4.0 * PI * r * crate::envelope::fc_eval(2.0, 1.0, r).unwrap();
            assert_relative_eq!(p.value_at(r).unwrap(), exact, max_relative = 1e-7);
        }
    }

    #[test]
    fn free_partial_wave_sum() {
        let k = 0.7;
        let pw = PartialWaveKernel::new(&TailSpec::None, k, 40, 5.0).unwrap();
        let x = [3.0, 0.0, 0.0];
        let c: f64 = 0.3;
        let y = [0.5 * c, 0.5 * (1.0 - c * c).sqrt(), 0.0];
        let v = pw.value(&x, &y).unwrap();
        assert_relative_eq!(v.value, free_kernel(k, &x, &y).unwrap(), max_relative = 1e-6);
        assert!(v.truncation < 1e-20);
        // free s-wave: sinh(k r<) e^{-k r>} / k
        assert_relative_eq!(pw.g_l(0, 0.5, 3.0).unwrap(), (0.35f64).sinh() * (-2.1f64).exp() / k, max_relative = 1e-8);
        let y0 = [0.0; 3];
        assert_relative_eq!(pw.value(&x, &y0).unwrap().value, free_kernel(k, &x, &y0).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn wronskian_and_symmetry() {
        let pw = PartialWaveKernel::new(&TailSpec::inverse_square(2.0, 1.0), 0.1, 12, 20.0).unwrap();
        for l in [0, 1, 5, 12] {
            assert!(pw.wronskian_drift(l).unwrap() < 1e-6, "ℓ = {l}");
            for (r, rp) in [(0.3, 0.9), (0.5, 4.0), (2.0, 17.0)] {
                let a = pw.g_l(l, r, rp).unwrap();
                assert_relative_eq!(a, pw.g_l(l, rp, r).unwrap(), max_relative = 1e-12);
                assert_relative_eq!(a, pw.g_l_alt(l, r, rp).unwrap(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn tail_kernel_below_free_kernel() {
        let pw = PartialWaveKernel::new(&TailSpec::inverse_square(2.0, 1.0), 0.5, DEFAULT_L_MAX, 10.0).unwrap();
        for (x, y) in [([4.0, 0.0, 0.0], [0.0, 0.8, 0.0]), ([0.0, 0.0, 9.0], [0.3, 0.2, -0.5])] {
            let g = pw.value(&x, &y).unwrap().value;
            assert!(g > 0.0 && g <= free_kernel(0.5, &x, &y).unwrap());
            assert_relative_eq!(g, pw.value(&y, &x).unwrap().value, max_relative = 1e-10);
        }
    }

    #[test]
    fn domination_requires_ordering() {
        let s = [KernelSample { x: [3.0, 0.0, 0.0], y: [0.0, 0.5, 0.0], k: 0.3 }];
        let a = TailSpec::inverse_square(1.0, 1.0);
        let b = TailSpec::inverse_square(2.0, 1.0);
        assert!(domination_check(&a, &b, &s, 8).unwrap().holds);
        assert!(matches!(domination_check(&b, &a, &s, 8), Err(Error::Precondition(_))));
        let same = domination_check(&b, &b, &s, 8).unwrap();
        assert_relative_eq!(same.worst_ratio, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn k_monotonicity() {
        let tail = TailSpec::inverse_square(2.0, 1.0);
        let rep = monotonicity_in_k_check(&tail, &[1.0, 0.3, 0.1, 0.03], None).unwrap();
        assert!(rep.holds, "{}", rep.worst_decrease);
        let free = monotonicity_in_k_check(&TailSpec::None, &[1.0, 0.5, 0.1], None).unwrap();
        assert!(free.holds);
        let small = monotonicity_in_k_check(&tail, &[0.01], None).unwrap();
        assert!(small.limit_deviation.unwrap() < 0.01);
        assert!(monotonicity_in_k_check(&tail, &[0.1, 0.3], None).is_err());
    }

    #[test]
    fn integral_equation() {
        let rep = integral_equation_residual(&TailSpec::inverse_square(2.0, 1.0), &[0.5, 1.0, 2.0, 10.0]).unwrap();
        assert!(rep.max_abs < 1e-10, "{:?}", rep.residuals);
        let a = 1.0;
        let bad = |r: f64| {
            if r <= 1.0 {
                (1.0 - 0.5 * r) / (4.0 * PI * r)
            } else {
                0.5 * r.powf(-a - 0.1) / (4.0 * PI * r)
            }
        };
        assert!(integral_equation_residual_of(bad, 2.0, 1.0, &[0.5, 1.0, 2.0, 10.0]).unwrap().max_abs > 1e-3);
        let weak = integral_equation_residual(&TailSpec::inverse_square(1e-9, 1.0), &[0.5, 2.0]).unwrap();
        assert!(weak.max_abs < 1e-9);
    }

    #[test]
    fn resolvent_equation() {
        for tail in [TailSpec::inverse_square(2.0, 1.0), TailSpec::coulomb_dominant(2.0, 1.0)] {
            let p = gk_profile(&tail, 0.3, None).unwrap();
            let rep = resolvent_residual(&p, &[0.5, 1.0, 2.0, 7.0]).unwrap();
            assert!(rep.max_abs < 1e-6, "{tail:?}: {:?}", rep.residuals);
        }
    }

    #[test]
    fn angular_integrals() {
        use crate::quadrature::integrate;
        let (r, rp) = (1.3, 0.7);
        let dist = |c: f64| (r * r + rp * rp - 2.0 * r * rp * c).sqrt();
        let coul = integrate(|c| 2.0 * PI / dist(c), -1.0, 1.0, 1e-14, 1e-12).value;
        assert_relative_eq!(coul, angular_coulomb(r, rp), max_relative = 1e-10);
        let yuk = integrate(|c| 2.0 * PI * (-0.4 * dist(c)).exp() / dist(c), -1.0, 1.0, 1e-14, 1e-12).value;
        assert_relative_eq!(yuk, angular_yukawa(0.4, r, rp), max_relative = 1e-10);
        let inv = integrate(|c| 2.0 * PI / dist(c).powi(2), -1.0, 1.0, 1e-14, 1e-12).value;
        assert_relative_eq!(inv, angular_inverse_square(r, rp), max_relative = 1e-9);
    }
}
