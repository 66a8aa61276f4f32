//! Shooting solver for `-u'' + [ℓ(ℓ+1)/r² + λW(r)] u = E u`.
//!
//! Outward and inward RK4 solutions are matched at the outermost classical
//! turning point. Eigenvalues are located through the total Prüfer phase
//! `Δ(E)`, which increases with `E` and equals `nπ` at the state with `n`
//! nodes; the zero-energy value of `Δ` decides existence for critical
//! couplings.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ExteriorTail, GridSpec, RadialFunction, RadialGrid};
use crate::ode::{shoot, Coefficient, Direction, LinearShot};
use crate::potential::{RadialPotential, ZeroEnergyExterior};
use crate::quadrature::brent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Hard cap on the outer radius.
    pub r_max_cap: f64,
    /// Outer radius in units of the decay length `1/κ`.
    pub decay_lengths: f64,
    /// Minimum outer radius in units of the potential's length scale.
    pub min_extent: f64,
    pub inner_step: f64,
    pub log_step: f64,
    /// Bound on `h·√|q|` for each RK4 substep.
    pub phase_step: f64,
    /// Relative log-derivative mismatch accepted at an eigenvalue.
    pub tol_match: f64,
    pub tol_lambda: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_max_cap: 1.0e6,
            decay_lengths: 50.0,
            min_extent: 100.0,
            inner_step: 0.005,
            log_step: 0.005,
            phase_step: 0.1,
            tol_match: 1.0e-9,
            tol_lambda: 1.0e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r_max_cap", self.r_max_cap),
            ("decay_lengths", self.decay_lengths),
            ("min_extent", self.min_extent),
            ("inner_step", self.inner_step),
            ("log_step", self.log_step),
            ("phase_step", self.phase_step),
            ("tol_match", self.tol_match),
            ("tol_lambda", self.tol_lambda),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("solver setting {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Observables attached to a converged state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub h0: f64,
    /// `⟨W⟩` without the coupling.
    pub w: f64,
    pub abs_w: f64,
    /// `(R, P_R)` pairs.
    pub p_within: Vec<(f64, f64)>,
    pub mismatch: f64,
    pub matching_radius: f64,
    pub outer_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateResult {
    pub lambda: f64,
    pub l: u32,
    pub n_nodes: usize,
    pub energy: f64,
    pub kappa: f64,
    pub u: RadialFunction,
    pub diagnostics: StateDiagnostics,
}

/// Outward and inward solutions at one energy, before eigenvalue matching.
#[derive(Debug, Clone)]
pub struct RadialShot {
    pub outward: RadialFunction,
    pub inward: RadialFunction,
    /// `u'/u` outward minus inward at the matching radius.
    pub mismatch: f64,
    /// Total Prüfer phase; `nπ` at an eigenvalue with `n` nodes.
    pub phase: f64,
    pub matching_radius: f64,
    pub zeros: usize,
}

pub(crate) struct Effective<'a> {
    pub p: &'a RadialPotential,
    pub centrifugal: f64,
    pub energy: f64,
}

impl Coefficient for Effective<'_> {
    #[inline]
    fn q(&self, r: f64) -> f64 {
        self.p.value(r) + self.centrifugal / (r * r) - self.energy
    }
    #[inline]
    fn q_left(&self, r: f64) -> f64 {
        self.p.value_left(r) + self.centrifugal / (r * r) - self.energy
    }
}

struct Matched {
    out: LinearShot,
    inw: LinearShot,
    i_m: usize,
    n_end: usize,
    phase: f64,
    beta: f64,
}

/// Shooting machinery bound to one potential and angular momentum.
pub(crate) struct Shooter<'a> {
    pub p: &'a RadialPotential,
    pub l: u32,
    pub cfg: &'a SolverConfig,
    pub grid: RadialGrid,
    pub scale: f64,
    last_break: f64,
}

impl<'a> Shooter<'a> {
    pub fn new(p: &'a RadialPotential, l: u32, cfg: &'a SolverConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        let scale = p.support_radius();
        let breaks = p.breakpoints();
        let last_break = breaks.iter().copied().fold(0.0, f64::max);
        let r_max = cfg.r_max_cap.max(2.0 * last_break).max(cfg.min_extent * scale);
        let spec = GridSpec::new(scale, r_max)
            .with_steps(cfg.inner_step, cfg.log_step)
            .with_breakpoints(breaks);
        let grid = RadialGrid::new(&spec)?;
        Ok(Shooter { p, l, cfg, grid, scale, last_break })
    }

    pub fn with_grid(p: &'a RadialPotential, l: u32, cfg: &'a SolverConfig, grid: RadialGrid) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        let scale = p.support_radius();
        let last_break = p.breakpoints().iter().copied().fold(0.0, f64::max);
        Ok(Shooter { p, l, cfg, grid, scale, last_break })
    }

    fn centrifugal(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }

    fn coefficient(&self, energy: f64) -> Effective<'a> {
        Effective { p: self.p, centrifugal: self.centrifugal(), energy }
    }

    /// Index of the outermost node used at this energy.
    fn end_index(&self, energy: f64) -> usize {
        let last = self.grid.len() - 1;
        if energy >= 0.0 {
            return last;
        }
        let kappa = (-energy).sqrt();
        let r = (self.cfg.decay_lengths / kappa)
            .min(self.cfg.r_max_cap)
            .max(self.cfg.min_extent * self.scale)
            .max(2.0 * self.last_break);
        self.grid.index_at_or_above(r)
    }

    /// Log-derivative imposed at the outer end.
    fn outer_log_derivative(&self, r: f64, energy: f64) -> f64 {
        if energy == 0.0 {
            return self.p.zero_energy_exterior(self.l).log_derivative(r);
        }
        // Langer-modified WKB: exact for pure r⁻² tails at zero energy, e^{-κr} far out
        let lang = self.centrifugal() + 0.25;
        let big_q = |x: f64| self.p.value(x) + lang / (x * x) - energy;
        let q = big_q(r);
        if !(q > 0.0) {
            return -(-energy).sqrt();
        }
        let h = 1e-4 * r;
        let dq = (big_q(r + h) - big_q(r - h)) / (2.0 * h);
        -q.sqrt() - dq / (4.0 * q)
    }

    fn matching_index(&self, energy: f64, n_end: usize) -> usize {
        let c = self.coefficient(energy);
        let nodes = self.grid.nodes();
        let found = (1..n_end).rev().find(|&i| c.q_left(nodes[i]) < 0.0);
        let i = found.unwrap_or_else(|| self.grid.index_at_or_above(2.0 * self.scale));
        i.clamp(1, n_end.saturating_sub(1).max(1))
    }

    fn origin_start(&self, energy: f64) -> (f64, f64) {
        let r1 = self.grid.nodes()[0];
        let lf = self.l as f64;
        let q0 = self.p.value(r1) - energy;
        let c = q0 / (2.0 * (2.0 * lf + 3.0));
        let base = r1.powi(self.l as i32 + 1);
        let u = base * (1.0 + c * r1 * r1);
        let v = base / r1 * ((lf + 1.0) + (lf + 3.0) * c * r1 * r1);
        (u, v)
    }

    fn run(&self, energy: f64, n_end: Option<usize>) -> Matched {
        let n_end = n_end.unwrap_or_else(|| self.end_index(energy));
        let i_m = self.matching_index(energy, n_end);
        let nodes = self.grid.nodes();
        let c = self.coefficient(energy);
        let (u0, v0) = self.origin_start(energy);
        let out = shoot(&c, &nodes[..=i_m], u0, v0, Direction::Outward, self.cfg.phase_step);
        let beta = self.outer_log_derivative(nodes[n_end], energy);
        let inw = shoot(&c, &nodes[i_m..=n_end], 1.0, beta, Direction::Inward, self.cfg.phase_step);
        let (ul, vl) = (out.u[i_m], out.v[i_m]);
        let (ur, vr) = (inw.u[0], inw.v[0]);
        let phi_l = if ul == 0.0 { PI } else { ul.atan2(vl).rem_euclid(PI) };
        let phi_r = if ur == 0.0 { PI } else { ur.atan2(-vr).rem_euclid(PI) };
        let phase = (out.zeros + inw.zeros) as f64 * PI + phi_l + phi_r - PI;
        Matched { out, inw, i_m, n_end, phase, beta }
    }

    pub fn phase(&self, energy: f64) -> f64 {
        self.run(energy, None).phase
    }

    /// Lowest energy worth searching: the minimum of `λW` on the grid.
    fn energy_floor(&self) -> f64 {
        let nodes = self.grid.nodes();
        let upto = self.grid.index_at_or_above(self.cfg.min_extent * self.scale);
        nodes[..=upto]
            .iter()
            .map(|&r| self.p.value(r).min(self.p.value_left(r)))
            .fold(f64::INFINITY, f64::min)
    }

    fn energy_ceiling(&self) -> f64 {
        -(self.cfg.decay_lengths / self.cfg.r_max_cap).powi(2)
    }

    fn assemble(&self, m: &Matched, energy: f64, tail: ExteriorTail) -> RadialFunction {
        let nodes = self.grid.nodes();
        let (ul, vl) = (m.out.u[m.i_m], m.out.v[m.i_m]);
        let (ur, vr) = (m.inw.u[0], m.inw.v[0]);
        let scale = (ul * ur + vl * vr) / (ur * ur + vr * vr);
        let mut values = Vec::with_capacity(m.n_end + 1);
        let mut slopes = Vec::with_capacity(m.n_end + 1);
        values.extend_from_slice(&m.out.u[..=m.i_m]);
        slopes.extend_from_slice(&m.out.v[..=m.i_m]);
        values.extend(m.inw.u[1..].iter().map(|x| x * scale));
        slopes.extend(m.inw.v[1..].iter().map(|x| x * scale));
        let c = self.coefficient(energy);
        let curvature = nodes[..=m.n_end]
            .iter()
            .zip(&values)
            .map(|(&r, &u)| [c.q_left(r) * u, c.q(r) * u])
            .collect();
        let grid = self.grid.truncated(m.n_end);
        RadialFunction::from_parts(grid, values, slopes, Some(curvature), self.l as f64 + 1.0, tail)
    }

    fn relative_mismatch(m: &Matched, r_m: f64) -> f64 {
        let (ul, vl) = (m.out.u[m.i_m], m.out.v[m.i_m]);
        let (ur, vr) = (m.inw.u[0], m.inw.v[0]);
        let yl = vl / ul;
        let yr = vr / ur;
        (yl - yr) / yl.abs().max(yr.abs()).max(1.0 / r_m)
    }

    pub fn has_state_at_threshold(&self, n_nodes: usize) -> bool {
        self.run(0.0, None).phase > n_nodes as f64 * PI
    }
}

fn target_phase(n: usize) -> f64 {
    n as f64 * PI
}

/// Outward and inward solutions at energy `E < 0` (or the threshold `E = 0`).
pub fn integrate_radial(
    p: &RadialPotential,
    l: u32,
    energy: f64,
    grid: Option<&RadialGrid>,
    cfg: &SolverConfig,
) -> Result<RadialShot> {
    if !energy.is_finite() {
        return Err(Error::Domain(format!("energy must be finite, got {energy}")));
    }
    if energy > 0.0 {
        return Err(Error::Domain("scattering energies E > 0 are not supported".into()));
    }
    let shooter = match grid {
        Some(g) => Shooter::with_grid(p, l, cfg, g.clone())?,
        None => Shooter::new(p, l, cfg)?,
    };
    let n_end = grid.map(|g| g.len() - 1);
    let m = shooter.run(energy, n_end);
    let nodes = shooter.grid.nodes();
    let r_m = nodes[m.i_m];
    let out_grid = RadialGrid::from_nodes(nodes[..=m.i_m].to_vec())?;
    let in_grid = RadialGrid::from_nodes(nodes[m.i_m..=m.n_end].to_vec())?;
    let lp = l as f64 + 1.0;
    let outward = RadialFunction::new(out_grid, m.out.u.clone(), Some(m.out.v.clone()), lp)?;
    let tail = if energy < 0.0 { ExteriorTail::Exponential { kappa: (-energy).sqrt() } } else { ExteriorTail::None };
    let inward = RadialFunction::new(in_grid, m.inw.u.clone(), Some(m.inw.v.clone()), lp)?.with_tail(tail);
    let _ = m.beta;
    Ok(RadialShot {
        mismatch: m.out.v[m.i_m] / m.out.u[m.i_m] - m.inw.v[0] / m.inw.u[0],
        phase: m.phase,
        matching_radius: r_m,
        zeros: m.out.zeros + m.inw.zeros,
        outward,
        inward,
    })
}

/// Bound state with `n_nodes` nodes inside `bracket` (default: from the
/// potential minimum up to the energy resolvable at the radius cap).
pub fn find_bound_state(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    bracket: Option<(f64, f64)>,
    cfg: &SolverConfig,
) -> Result<BoundStateResult> {
    let shooter = Shooter::new(p, l, cfg)?;
    let full = (shooter.energy_floor(), shooter.energy_ceiling());
    let target = target_phase(n_nodes);
    let f = |e: f64| shooter.phase(e) - target;

    if !(full.0 < full.1) {
        return Err(Error::NoBoundState { nodes: n_nodes, lo: full.0, hi: full.1 });
    }
    let (lo, hi) = match bracket {
        Some((a, b)) => {
            if !(a < b && b < 0.0 && a.is_finite()) {
                return Err(Error::Domain(format!("energy bracket [{a}, {b}] must satisfy a < b < 0")));
            }
            (a, b)
        }
        None => full,
    };
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        if bracket.is_some() && f(full.0) < 0.0 && f(full.1) > 0.0 {
            let advice = if f_lo >= 0.0 {
                format!("the state lies below {lo:e}; lower the bracket's lower end")
            } else {
                format!("the state lies above {hi:e}; raise the bracket's upper end toward 0")
            };
            return Err(Error::BracketTooNarrow { lo, hi, advice });
        }
        return Err(Error::NoBoundState { nodes: n_nodes, lo, hi });
    }
    let energy = brent(&f, lo, hi, 1e-300, 300)?;
    finish_state(&shooter, n_nodes, energy)
}

fn finish_state(shooter: &Shooter<'_>, n_nodes: usize, energy: f64) -> Result<BoundStateResult> {
    let m = shooter.run(energy, None);
    let nodes = shooter.grid.nodes();
    let r_m = nodes[m.i_m];
    let mismatch = Shooter::relative_mismatch(&m, r_m);
    let phase_err = (m.phase - target_phase(n_nodes)).abs();
    if !(mismatch.abs() < shooter.cfg.tol_match || phase_err < 1e-12) {
        return Err(Error::Numerical(format!(
            "eigenvalue {energy:e} did not converge: log-derivative mismatch {mismatch:e}"
        )));
    }
    let kappa = (-energy).sqrt();
    let u = shooter.assemble(&m, energy, ExteriorTail::Exponential { kappa });
    let u = orient(u.normalize()?);
    if u.node_count() != n_nodes {
        return Err(Error::Numerical(format!(
            "state at E = {energy:e} has {} nodes, expected {n_nodes}",
            u.node_count()
        )));
    }
    let p = shooter.p;
    let l = shooter.l;
    let scale = shooter.scale;
    let diagnostics = StateDiagnostics {
        h0: expectation_h0(&u, l)?,
        w: expectation_w(&u, p)?,
        abs_w: expectation_abs_w(&u, p)?,
        p_within: [scale, 10.0 * scale]
            .iter()
            .map(|&r| Ok((r, probability_within(&u, r)?)))
            .collect::<Result<_>>()?,
        mismatch,
        matching_radius: r_m,
        outer_radius: nodes[m.n_end],
    };
    Ok(BoundStateResult { lambda: p.coupling, l, n_nodes, energy, kappa, u, diagnostics })
}

/// Flip the sign so the function starts positive.
fn orient(u: RadialFunction) -> RadialFunction {
    let first = u.values().iter().copied().find(|v| *v != 0.0).unwrap_or(1.0);
    if first < 0.0 {
        let normalized = u.is_normalized();
        u.scaled(-1.0, normalized)
    } else {
        u
    }
}

/// Whether a state with `n_nodes` nodes exists below threshold at coupling `lambda`.
pub fn has_bound_state(p: &RadialPotential, l: u32, n_nodes: usize, lambda: f64, cfg: &SolverConfig) -> Result<bool> {
    let q = p.with_coupling(lambda);
    Ok(Shooter::new(&q, l, cfg)?.has_state_at_threshold(n_nodes))
}

/// Coupling at which the `n_nodes` state reaches zero energy, by bisection on
/// the existence test. Without a bracket one is searched for by doubling.
pub fn critical_coupling(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    bracket: Option<(f64, f64)>,
    cfg: &SolverConfig,
) -> Result<f64> {
    let exists = |lambda: f64| has_bound_state(p, l, n_nodes, lambda, cfg);
    let (mut lo, mut hi) = match bracket {
        Some((a, b)) => {
            if !(a > 0.0 && b > a) {
                return Err(Error::Domain(format!("coupling bracket [{a}, {b}] must satisfy 0 < a < b")));
            }
            let (ea, eb) = (exists(a)?, exists(b)?);
            if ea || !eb {
                return Err(Error::InvalidCouplingBracket {
                    lower: a,
                    upper: b,
                    lower_has_state: ea,
                    upper_has_state: eb,
                });
            }
            (a, b)
        }
        None => search_bracket(&exists, p.coupling)?,
    };
    while hi - lo > cfg.tol_lambda * hi.clamp(1e-300, 1.0).max(cfg.tol_lambda) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exists(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn search_bracket(mut exists: impl FnMut(f64) -> Result<bool>, start: f64) -> Result<(f64, f64)> {
    let mut x = if start.is_finite() && start > 0.0 { start } else { 1.0 };
    if exists(x)? {
        for _ in 0..80 {
            let y = 0.5 * x;
            if !exists(y)? {
                return Ok((y, x));
            }
            x = y;
        }
        Err(Error::Numerical("bound state persists at vanishing coupling".into()))
    } else {
        for _ in 0..60 {
            let y = 2.0 * x;
            if exists(y)? {
                return Ok((x, y));
            }
            x = y;
        }
        Err(Error::NoBoundState { nodes: 0, lo: 0.0, hi: 0.0 })
    }
}

/// Zero-energy solution at `lambda_cr`, matched to the decaying exterior branch.
pub fn threshold_solution(p: &RadialPotential, lambda_cr: f64, l: u32, cfg: &SolverConfig) -> Result<RadialFunction> {
    let q = p.with_coupling(lambda_cr);
    let ext = q.zero_energy_exterior(l);
    if !ext.is_square_integrable() {
        return Err(Error::ExteriorNotDecaying { effective_strength: ext.effective_strength() });
    }
    let shooter = Shooter::new(&q, l, cfg)?;
    let m = shooter.run(0.0, None);
    let tail = match ext {
        ZeroEnergyExterior::PowerLaw { exponent, .. } => ExteriorTail::PowerLaw { exponent },
        ZeroEnergyExterior::StretchedExp { rate, power } => ExteriorTail::StretchedExp { rate, power },
        ZeroEnergyExterior::Constant => ExteriorTail::Constant,
    };
    let u = shooter.assemble(&m, 0.0, tail);
    Ok(orient(u.normalize()?))
}

pub fn probability_within(u: &RadialFunction, radius: f64) -> Result<f64> {
    if !u.is_normalized() {
        return Err(Error::Unnormalized);
    }
    if !(radius >= 0.0) {
        return Err(Error::Domain(format!("probe radius must be non-negative, got {radius}")));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    Ok((u.norm_squared_upto(radius) / u.norm_squared()).clamp(0.0, 1.0))
}

/// `⟨H0⟩ = ∫ u'² dr + ℓ(ℓ+1) ∫ u²/r² dr`.
pub fn expectation_h0(u: &RadialFunction, l: u32) -> Result<f64> {
    if !u.is_normalized() {
        return Err(Error::Unnormalized);
    }
    let c = (l * (l + 1)) as f64;
    Ok(u.integrate(|r, v, d| d * d + if c > 0.0 { c * v * v / (r * r) } else { 0.0 }))
}

/// `⟨W⟩` without the coupling factor.
pub fn expectation_w(u: &RadialFunction, p: &RadialPotential) -> Result<f64> {
    if !u.is_normalized() {
        return Err(Error::Unnormalized);
    }
    Ok(u.integrate(|r, v, _| p.raw(r) * v * v))
}

pub fn expectation_abs_w(u: &RadialFunction, p: &RadialPotential) -> Result<f64> {
    if !u.is_normalized() {
        return Err(Error::Unnormalized);
    }
    Ok(u.integrate(|r, v, _| p.raw(r).abs() * v * v))
}

/// One row of an energy curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub lambda: f64,
    pub energy: Option<f64>,
    pub kappa: Option<f64>,
    pub p_within_r: Option<f64>,
    pub nodes: usize,
    pub h0: Option<f64>,
    pub de_dlambda: Option<f64>,
    pub hf_residual: Option<f64>,
    pub error: Option<String>,
}

/// `dE/dλ` by central differences with step `1e-3·(λ - λ_cr)`.
pub fn energy_slope(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    lambda: f64,
    lambda_cr: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let d = 1e-3 * (lambda - lambda_cr).abs().max(1e-9 * lambda);
    let up = find_bound_state(&p.with_coupling(lambda + d), l, n_nodes, None, cfg)?.energy;
    let dn = find_bound_state(&p.with_coupling(lambda - d), l, n_nodes, None, cfg)?.energy;
    Ok((up - dn) / (2.0 * d))
}

/// One curve row plus the state behind it, when one was found.
pub(crate) fn curve_point(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    lambda: f64,
    lambda_cr: f64,
    probe_radius: f64,
    cfg: &SolverConfig,
) -> (CurveRow, Option<BoundStateResult>) {
    let q = p.with_coupling(lambda);
    let solved = find_bound_state(&q, l, n_nodes, None, cfg).and_then(|s| {
        let slope = energy_slope(p, l, n_nodes, lambda, lambda_cr, cfg)?;
        Ok((s, slope))
    });
    match solved {
        Ok((s, slope)) => {
            let h0 = s.diagnostics.h0;
            let resid = (h0 - s.energy + lambda * slope).abs() / s.energy.abs();
            let row = CurveRow {
                lambda,
                energy: Some(s.energy),
                kappa: Some(s.kappa),
                p_within_r: probability_within(&s.u, probe_radius).ok(),
                nodes: s.u.node_count(),
                h0: Some(h0),
                de_dlambda: Some(slope),
                hf_residual: Some(resid),
                error: None,
            };
            (row, Some(s))
        }
        Err(e) => {
            let row = CurveRow {
                lambda,
                energy: None,
                kappa: None,
                p_within_r: None,
                nodes: n_nodes,
                h0: None,
                de_dlambda: None,
                hf_residual: None,
                error: Some(e.to_string()),
            };
            (row, None)
        }
    }
}

/// Bound states along a strictly decreasing coupling schedule, in parallel.
/// Rows without a state carry the error text instead of aborting the sweep.
pub fn energy_curve(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    schedule: &[f64],
    probe_radius: f64,
    lambda_cr: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Vec<CurveRow>> {
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("coupling schedule must be strictly decreasing".into()));
    }
    if schedule.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Domain("couplings must be positive".into()));
    }
    let lambda_cr = match lambda_cr {
        Some(x) => x,
        None => critical_coupling(p, l, n_nodes, None, cfg)?,
    };
    let rows = schedule
        .par_iter()
        .map(|&lambda| curve_point(p, l, n_nodes, lambda, lambda_cr, probe_radius, cfg).0)
        .collect();
    Ok(rows)
}

/// Coupling above `lambda_cr` at which the `n_nodes` state has energy `target`.
pub fn lambda_for_energy(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    target: f64,
    lambda_cr: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if !(target < 0.0) {
        return Err(Error::Domain(format!("target energy must be negative, got {target}")));
    }
    let goal = target_phase(n_nodes);
    let f = |lambda: f64| -> Result<f64> {
        let q = p.with_coupling(lambda);
        let s = Shooter::new(&q, l, cfg)?;
        Ok(s.phase(target) - goal)
    };
    let lo = lambda_cr;
    let mut hi = lambda_cr * 1.25;
    let mut found = false;
    for _ in 0..60 {
        if f(hi)? > 0.0 {
            found = true;
            break;
        }
        hi = lambda_cr + 2.0 * (hi - lambda_cr);
    }
    if !found {
        return Err(Error::Numerical(format!("no coupling reaches E = {target:e}")));
    }
    let mut err = None;
    let root = brent(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        lo,
        hi,
        1e-15 * hi,
        300,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(root)
}

/// Multiply the core depth so the `n_nodes` state sits at threshold exactly
/// at coupling `target_lambda`.
pub fn calibrate_core_depth(
    p: &RadialPotential,
    l: u32,
    n_nodes: usize,
    target_lambda: f64,
    cfg: &SolverConfig,
) -> Result<RadialPotential> {
    if p.core.depth() <= 0.0 {
        return Err(Error::Degenerate("core has no depth to calibrate".into()));
    }
    let with_factor = |s: f64| RadialPotential {
        core: p.core.scaled(s),
        tail: p.tail.clone(),
        coupling: target_lambda,
    };
    let exists = |s: f64| -> Result<bool> { Ok(Shooter::new(&with_factor(s), l, cfg)?.has_state_at_threshold(n_nodes)) };
    let (mut lo, mut hi) = search_bracket(exists, 1.0)?;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exists(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(with_factor(0.5 * (lo + hi)))
}
