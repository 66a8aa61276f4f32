//! Closed-form bounds on Green's functions of repulsive tails and the
//! square-integrable envelope that dominates near-threshold states.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{angular_inverse_square, gk_profile, profile_grid, KernelProfile};
use crate::grid::{RadialFunction, RadialGrid};
use crate::potential::{check_radius, check_theorem3_hypothesis, RadialPotential, TailSpec};
use crate::quadrature::{integrate, integrate_pieces};

/// Positive root of `a(a + 1) = A`, in the cancellation-free form `2A / (1 + √(1 + 4A))`.
pub fn positive_root_a(strength: f64) -> Result<f64> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::Domain(format!("strength must be positive, got {strength}")));
    }
    Ok(root(strength))
}

fn root(strength: f64) -> f64 {
    2.0 * strength / (1.0 + (1.0 + 4.0 * strength).sqrt())
}

fn check_params(strength: f64, radius: f64, r: f64) -> Result<()> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::Domain(format!("strength must be positive, got {strength}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    check_radius(r)
}

/// Zero-energy Green's function `F(x) = lim_{k→0} G_k(x, 0)` of the `A/r²` tail.
pub fn f_eval(strength: f64, radius: f64, r: f64) -> Result<f64> {
    check_params(strength, radius, r)?;
    let a = root(strength);
    let shape = if r <= radius {
        1.0 - a / ((a + 1.0) * radius) * r
    } else {
        (radius / r).powf(a) / (1.0 + a)
    };
    Ok(shape / (4.0 * PI * r))
}

/// `dF/dr`, one-sided from the branch that contains `r` (the inner one at `R0`).
pub fn f_derivative(strength: f64, radius: f64, r: f64) -> Result<f64> {
    check_params(strength, radius, r)?;
    let a = root(strength);
    Ok(if r <= radius {
        -1.0 / (4.0 * PI * r * r)
    } else {
        -(radius / r).powf(a) / (4.0 * PI * r * r)
    })
}

/// `F` with `r` taken on the outer branch even at `r ≤ R0`, for matching checks.
pub fn f_outer_branch(strength: f64, radius: f64, r: f64) -> (f64, f64) {
    let a = root(strength);
    let v = (radius / r).powf(a) / ((1.0 + a) * 4.0 * PI * r);
    (v, -(1.0 + a) * v / r)
}

/// Zero-energy Green's function of the Coulomb-dominant tail with decay `a`.
pub fn fc_eval(decay: f64, radius: f64, r: f64) -> Result<f64> {
    check_params(decay, radius, r)?;
    let sr = radius.sqrt();
    let shape = if r <= radius {
        1.0 - r / (radius + 2.0 * sr / decay)
    } else {
        (decay * (sr - r.sqrt())).exp() / (1.0 + 0.5 * decay * sr)
    };
    Ok(shape / (4.0 * PI * r))
}

/// Inner and outer branches of `F^c` with their derivatives, evaluated at `r`.
pub fn fc_branches(decay: f64, radius: f64, r: f64) -> [(f64, f64); 2] {
    let sr = radius.sqrt();
    let c = 1.0 / (radius + 2.0 * sr / decay);
    let inner = ((1.0 - c * r) / (4.0 * PI * r), -1.0 / (4.0 * PI * r * r));
    let shape = (decay * (sr - r.sqrt())).exp() / (1.0 + 0.5 * decay * sr);
    let v = shape / (4.0 * PI * r);
    let outer = (v, -v / r - v * 0.5 * decay / r.sqrt());
    [inner, outer]
}

/// Parameters of a tail re-centred at a point `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    /// `Ã`, or `ã` for the Coulomb-dominant tail.
    pub strength: f64,
    pub radius: f64,
    pub shift: f64,
}

fn translated_radius(radius: f64, shift: f64, beta: f64) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!("radius multiplier must be at least 1, got {beta}")));
    }
    if !(radius > 0.0 && shift >= 0.0 && shift.is_finite()) {
        return Err(Error::Domain("need R0 > 0 and a finite shift ≥ 0".into()));
    }
    Ok((beta * radius).max(radius + shift))
}

/// Largest `Ã` with a radius `R̃0 = max(βR0, R0 + |s|)` such that the
/// re-centred tail stays below the original one.
pub fn translated_params(strength: f64, radius: f64, shift: f64, beta: f64) -> Result<EnvelopeParams> {
    let rt = translated_radius(radius, shift, beta)?;
    Ok(EnvelopeParams { strength: strength * (rt / (rt + shift)).powi(2), radius: rt, shift })
}

pub fn coulomb_translated_params(decay: f64, radius: f64, shift: f64, beta: f64) -> Result<EnvelopeParams> {
    let rt = translated_radius(radius, shift, beta)?;
    Ok(EnvelopeParams { strength: decay * (rt / (rt + shift)).powf(1.5), radius: rt, shift })
}

fn shift_of(y: &[f64; 3], radius: f64) -> Result<f64> {
    let s = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    if s > radius {
        return Err(Error::Precondition(format!("|y| = {s} exceeds R0 = {radius}")));
    }
    Ok(s)
}

fn separation(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

/// Upper bound `F(Ã(|y|), R̃0(|y|); |x - y|)` on `G_k(A, R0; x, y)` for `|y| ≤ R0`.
/// At `y = 0` no translation is needed and the untranslated `F` is used.
pub fn envelope_upper(strength: f64, radius: f64, y: &[f64; 3], x: &[f64; 3], beta: f64) -> Result<f64> {
    let s = shift_of(y, radius)?;
    let d = separation(x, y);
    if s == 0.0 {
        return f_eval(strength, radius, d);
    }
    let p = translated_params(strength, radius, s, beta)?;
    f_eval(p.strength, p.radius, d)
}

/// Coulomb-dominant analogue of [`envelope_upper`].
pub fn envelope_upper_coulomb(decay: f64, radius: f64, y: &[f64; 3], x: &[f64; 3], beta: f64) -> Result<f64> {
    let s = shift_of(y, radius)?;
    let d = separation(x, y);
    if s == 0.0 {
        return fc_eval(decay, radius, d);
    }
    let p = coulomb_translated_params(decay, radius, s, beta)?;
    fc_eval(p.strength, p.radius, d)
}

/// Power-law bound `G_k(A, R0; x, y) ≤ C' |x|^{-3/2-δ}` for `|y| ≤ R0`, `|x| ≥ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryBound {
    pub strength_tilde: f64,
    pub radius_tilde: f64,
    pub a_tilde: f64,
    pub delta: f64,
    pub validity_radius: f64,
    /// `R̃0^ã / (4π(1 + ã))`, the coefficient of `|x - y|^{-1-ã}`.
    pub prefactor: f64,
    /// `prefactor · (R/R̃0)^{1+ã}`, which bounds the kernel in terms of `|x|`
    /// since `|x - y| ≥ |x| R̃0/R` on the validity region.
    pub dominating_prefactor: f64,
}

impl CorollaryBound {
    pub fn bound(&self, x_norm: f64) -> f64 {
        self.dominating_prefactor * x_norm.powf(-1.5 - self.delta)
    }

    /// `prefactor · |x|^{-3/2-δ}`.
    pub fn literal_bound(&self, x_norm: f64) -> f64 {
        self.prefactor * x_norm.powf(-1.5 - self.delta)
    }
}

/// Corollary constants for a given translated radius `R̃0 ≥ 2R0`.
pub fn corollary_bound_with(strength: f64, radius: f64, radius_tilde: f64) -> Result<CorollaryBound> {
    if !(strength > 0.75) {
        return Err(Error::Domain(format!("the power-law bound needs A > 3/4, got {strength}")));
    }
    if !(radius > 0.0 && radius_tilde >= 2.0 * radius) {
        return Err(Error::Domain(format!("translated radius {radius_tilde} must be at least 2 R0 = {}", 2.0 * radius)));
    }
    let at = strength * (radius_tilde / (radius_tilde + radius)).powi(2);
    if !(at > 0.75) {
        return Err(Error::Domain(format!("translated strength {at} does not exceed 3/4; enlarge R̃0")));
    }
    let a = root(at);
    let big_r = radius_tilde + radius;
    let prefactor = radius_tilde.powf(a) / (4.0 * PI * (1.0 + a));
    Ok(CorollaryBound {
        strength_tilde: at,
        radius_tilde,
        a_tilde: a,
        delta: a - 0.5,
        validity_radius: big_r,
        prefactor,
        dominating_prefactor: prefactor * (big_r / radius_tilde).powf(1.0 + a),
    })
}

/// Corollary constants with `R̃0` the smallest power-of-two multiple of `R0`
/// (at least `2R0`) that keeps `Ã > 3/4`.
pub fn corollary_bound(strength: f64, radius: f64) -> Result<CorollaryBound> {
    if !(strength > 0.75) {
        return Err(Error::Domain(format!("the power-law bound needs A > 3/4, got {strength}")));
    }
    let mut m: f64 = 2.0;
    for _ in 0..200 {
        if strength * (m / (m + 1.0)).powi(2) > 0.75 {
            return corollary_bound_with(strength, radius, m * radius);
        }
        m *= 2.0;
    }
    Err(Error::Domain(format!("no admissible translated radius for A = {strength}")))
}

/// A larger tail `ξ(Ã, V0'; R̃0)` centred at `s` that dominates `ξ(A, V0; R0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerTranslation {
    pub strength: f64,
    pub inner: f64,
    pub radius: f64,
    pub shift: f64,
}

impl LowerTranslation {
    pub fn tail(&self) -> TailSpec {
        TailSpec::InverseSquareWithCore { inner: self.inner, strength: self.strength, radius: self.radius }
    }
}

/// `R̃0 ≥ R0 + |s|`, `Ã = A R̃0²/(R̃0 - |s|)²`, `V0' = max(V0, A/R0²)`.
pub fn lower_translated_params(strength: f64, inner: f64, radius: f64, shift: f64, radius_tilde: f64) -> Result<LowerTranslation> {
    if !(radius > 0.0 && shift >= 0.0 && radius_tilde >= radius + shift) {
        return Err(Error::Domain(format!("need R̃0 ≥ R0 + |s|, got R̃0 = {radius_tilde}")));
    }
    Ok(LowerTranslation {
        strength: strength * (radius_tilde / (radius_tilde - shift)).powi(2),
        inner: inner.max(strength / (radius * radius)),
        radius: radius_tilde,
        shift,
    })
}

/// Translation with `|s| = R0` and `R̃0` the smallest power-of-two multiple of
/// `R0` (at least `2R0`) giving `Ã < 3/4`.
pub fn spreading_translation(strength: f64, inner: f64, radius: f64) -> Result<LowerTranslation> {
    if !(0.0..0.75).contains(&strength) {
        return Err(Error::Domain(format!("needs 0 ≤ A < 3/4, got {strength}")));
    }
    let mut m: f64 = 2.0;
    for _ in 0..200 {
        let t = lower_translated_params(strength, inner, radius, radius, m * radius)?;
        if t.strength < 0.75 {
            return Ok(t);
        }
        m *= 2.0;
    }
    Err(Error::Domain(format!("no admissible translated radius for A = {strength}")))
}

/// `ĝ_k` for `ξ(A, V0; R0)` with `g_k = ĝ_k e^{kr} r^a` on `r ≥ R0`.
#[derive(Debug, Clone)]
pub struct LowerBoundProfile {
    pub k: f64,
    pub a: f64,
    pub radius: f64,
    pub profile: KernelProfile,
    /// `(r, g_k(r), g_k'(r))` at grid radii `≥ R0`.
    pub g: Vec<(f64, f64, f64)>,
    pub c0: f64,
    pub min_slope: f64,
    pub monotone: bool,
}

impl LowerBoundProfile {
    /// `c0 · e^{-kr} r^{-a}` for `r ≥ R0`.
    pub fn lower(&self, c0: f64, r: f64) -> f64 {
        c0 * (-self.k * r).exp() * r.powf(-self.a)
    }
}

/// Profile of the `ξ` tail and the factor `g_k = ĝ_k e^{kr} r^a`; `g_k` must be
/// non-decreasing beyond `R0` (slopes above `-10⁻⁸`).
pub fn lower_bound_profile(strength: f64, inner: f64, radius: f64, k: f64, grid: Option<&RadialGrid>) -> Result<LowerBoundProfile> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("lower bound profile needs k > 0, got {k}")));
    }
    if !(strength >= 0.0 && inner >= 0.0 && radius > 0.0) {
        return Err(Error::Domain("need A ≥ 0, V0 ≥ 0, R0 > 0".into()));
    }
    let tail = TailSpec::InverseSquareWithCore { inner, strength, radius };
    let default_grid;
    let grid = match grid {
        Some(g) => g,
        None => {
            default_grid = profile_grid(&tail, (60.0 / k).max(100.0 * radius))?;
            &default_grid
        }
    };
    let profile = gk_profile(&tail, k, Some(grid))?;
    let a = root(strength);
    let kernel = profile.kernel();
    let mut g = Vec::new();
    for (&r, &gh) in grid.nodes().iter().zip(&profile.ghat) {
        if r < radius || r > kernel.reach() {
            continue;
        }
        let gk = gh * (k * r).exp() * r.powf(a);
        let slope = gk * (kernel.profile_log_derivative(r)? + k + a / r);
        g.push((r, gk, slope));
    }
    if g.is_empty() {
        return Err(Error::Domain("grid has no radii beyond R0".into()));
    }
    let c0 = g[0].1;
    let min_slope = g.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let monotone = min_slope >= -1e-8;
    Ok(LowerBoundProfile { k, a, radius, profile, g, c0, min_slope, monotone })
}

/// `C0 = g_k(R0)` at the smallest `k`, and the minimum over all `k`.
pub fn lower_bound_constant(strength: f64, inner: f64, radius: f64, ks: &[f64]) -> Result<(f64, f64, Vec<LowerBoundProfile>)> {
    if ks.is_empty() {
        return Err(Error::Domain("need at least one k".into()));
    }
    let profiles = ks
        .par_iter()
        .map(|&k| lower_bound_profile(strength, inner, radius, k, None))
        .collect::<Result<Vec<_>>>()?;
    let smallest = profiles.iter().min_by(|a, b| a.k.partial_cmp(&b.k).unwrap()).unwrap().c0;
    let min = profiles.iter().map(|p| p.c0).fold(f64::INFINITY, f64::min);
    Ok((smallest, min, profiles))
}

/// How the state enters the envelope constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnvelopeMode {
    /// Constants from the given state.
    State,
    /// Constants valid for every normalized state (Schwarz with `‖φ‖ ≤ 1`).
    Universal,
}

/// `g = g_<` on `|x| ≤ R` and `g_> = C1 |x|^{-3/2-δ}` beyond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatingEnvelope {
    pub mode: EnvelopeMode,
    pub lambda_cr: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub validity_radius: f64,
    pub corollary: CorollaryBound,
    /// `∫_{|y|≤R0} |x - y|^{-2} W_-(y)² dy` tabulated on `(r, value)`.
    inner_table: Vec<(f64, f64)>,
    pub outer_norm_squared: f64,
    pub inner_norm_squared: f64,
}

impl DominatingEnvelope {
    pub fn g_inner(&self, r: f64) -> f64 {
        let t = &self.inner_table;
        let i = t.partition_point(|p| p.0 < r).clamp(1, t.len() - 1);
        let (r0, v0) = t[i - 1];
        let (r1, v1) = t[i];
        let w = ((r - r0) / (r1 - r0)).clamp(0.0, 1.0);
        self.c2 * (v0 + w * (v1 - v0)).max(0.0).sqrt()
    }

    pub fn g_outer(&self, r: f64) -> f64 {
        self.c1 * r.powf(-1.5 - self.delta)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.validity_radius {
            self.g_inner(r)
        } else {
            self.g_outer(r)
        }
    }

    /// `∫_{|x|≥R} g_>² dx = 4π C1² R^{-2δ} / (2δ)`.
    pub fn outer_integral(&self) -> f64 {
        4.0 * PI * self.c1 * self.c1 * self.validity_radius.powf(-2.0 * self.delta) / (2.0 * self.delta)
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner_norm_squared + self.outer_norm_squared
    }

    /// Compares `|φ(x)| = |u(r)|/(√(4π) r)` with `g` at every grid node of `u`.
    pub fn dominance(&self, u: &RadialFunction) -> DominanceReport {
        let mut worst = 0.0f64;
        let mut worst_r = 0.0;
        let mut violations = 0;
        for (&r, &v) in u.grid().nodes().iter().zip(u.values()) {
            let phi = v.abs() / ((4.0 * PI).sqrt() * r);
            let ratio = phi / self.value(r);
            if ratio > worst {
                worst = ratio;
                worst_r = r;
            }
            if ratio > 1.0 {
                violations += 1;
            }
        }
        DominanceReport { holds: violations == 0, violations, worst_ratio: worst, worst_r }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub holds: bool,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_r: f64,
}

/// `∫_0^{R0} W_-(r')² r'² · ∫dΩ |x-y|^{-2} dr'` at `|x| = r`.
fn inverse_square_weight(p: &RadialPotential, radius: f64, r: f64) -> f64 {
    let wm = |s: f64| (-p.raw(s)).max(0.0);
    let mut pts: Vec<f64> = vec![0.0, radius];
    pts.extend(p.breakpoints().into_iter().filter(|b| *b < radius));
    if r == 0.0 {
        return integrate_pieces(|s| 4.0 * PI * wm(s).powi(2), &sorted(pts), 1e-14, 1e-10).value;
    }
    if r < radius {
        pts.push(r);
    }
    integrate_pieces(|s| if s == 0.0 { 0.0 } else { wm(s).powi(2) * s * s * angular_inverse_square(r, s) }, &sorted(pts), 1e-14, 1e-10)
        .value
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Envelope for the `A/r²`-dominated family at `λ_cr`, with an optional
/// translated radius (default: the smallest admissible power of two).
pub fn assemble_envelope(
    p: &RadialPotential,
    lambda_cr: f64,
    strength: f64,
    radius: f64,
    state: &RadialFunction,
    mode: EnvelopeMode,
    radius_tilde: Option<f64>,
) -> Result<DominatingEnvelope> {
    let at_cr = p.with_coupling(lambda_cr);
    let hyp = check_theorem3_hypothesis(&at_cr, strength, radius, None);
    if !hyp.holds {
        return Err(Error::Precondition(format!(
            "λW₊ ≥ η(A, R0) fails (worst margin {:e} at r = {})",
            hyp.worst_margin, hyp.worst_r
        )));
    }
    if !state.is_normalized() {
        return Err(Error::Unnormalized);
    }
    let corollary = match radius_tilde {
        Some(rt) => corollary_bound_with(strength, radius, rt),
        None => corollary_bound(strength, radius),
    }
    .map_err(|e| Error::Domain(format!("envelope is not square integrable: {e}")))?;
    if !(corollary.delta > 0.0) {
        return Err(Error::Domain("envelope is not square integrable (δ ≤ 0)".into()));
    }
    let wm = |s: f64| (-p.raw(s)).max(0.0);
    let mut pts = vec![0.0, radius];
    pts.extend(p.breakpoints().into_iter().filter(|b| *b < radius));
    let pts = sorted(pts);
    let (mass, inner_u2) = match mode {
        EnvelopeMode::State => {
            let m = (4.0 * PI).sqrt() * state.integrate_upto(radius, |r, u, _| wm(r) * u.abs() * r);
            (m, state.norm_squared_upto(radius).min(1.0))
        }
        EnvelopeMode::Universal => {
            let w2 = integrate_pieces(|s| 4.0 * PI * s * s * wm(s).powi(2), &pts, 1e-14, 1e-12).value;
            (w2.sqrt(), 1.0)
        }
    };
    if !(mass > 0.0) {
        return Err(Error::Degenerate("potential has no attractive part inside R0".into()));
    }
    let c1 = 2.0 * lambda_cr * corollary.dominating_prefactor * mass;
    let c2 = 2.0 * lambda_cr / (4.0 * PI) * inner_u2.sqrt();
    let big_r = corollary.validity_radius;

    // tabulate the inner weight densely inside R0 and more coarsely out to R
    let mut rs: Vec<f64> = (0..=400).map(|i| radius * i as f64 / 400.0).collect();
    rs.extend((1..=200).map(|i| radius + (big_r - radius) * i as f64 / 200.0));
    let rs = sorted(rs);
    let inner_table: Vec<(f64, f64)> = rs.par_iter().map(|&r| (r, inverse_square_weight(p, radius, r))).collect();

    let mut env = DominatingEnvelope {
        mode,
        lambda_cr,
        c1,
        c2,
        delta: corollary.delta,
        validity_radius: big_r,
        corollary,
        inner_table,
        outer_norm_squared: 0.0,
        inner_norm_squared: 0.0,
    };
    env.outer_norm_squared = env.outer_integral();
    let inner = integrate(|r| 4.0 * PI * r * r * env.g_inner(r).powi(2), 0.0, big_r, 1e-14, 1e-8);
    env.inner_norm_squared = inner.value;
    Ok(env)
}
