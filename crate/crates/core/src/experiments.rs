//! Experiments near the threshold: coupling sweeps toward `λ_cr`, the
//! absorbed/spreading classifier, falloff fits, the Theorem-1 ratio table,
//! the Theorem-4 norm growth and a Birman–Schwinger pointwise check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{
    assemble_envelope, lower_bound_constant, positive_root_a, spreading_translation, EnvelopeMode, LowerTranslation,
};
use crate::error::{Error, Result};
use crate::greens::PartialWaveKernel;
use crate::grid::RadialFunction;
use crate::potential::{
    check_theorem3_hypothesis, check_theorem4_hypothesis, Core, RadialPotential, TailAsymptotics, TailSpec,
    ZeroEnergyExterior,
};
use crate::quadrature::{exp1, integrate_pieces, linear_fit, log_space};
use crate::radial::{
    calibrate_core_depth, critical_coupling, curve_point, expectation_abs_w, expectation_h0, find_bound_state,
    lambda_for_energy, threshold_solution, BoundStateResult, SolverConfig,
};

/// Log-log slope of `P_R` against `|E|` below which the probe keeps its weight.
pub const ABSORBED_SLOPE: f64 = 0.05;
/// Slope at or above which `P_R` is taken to vanish at threshold.
pub const SPREADING_SLOPE: f64 = 0.2;

/// Shape of an exterior falloff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FalloffModel {
    /// `u ∝ r^{-p}`
    Power,
    /// `u ∝ exp(-b √r)`
    StretchedExp,
    /// `u ∝ exp(-κ r)`
    Exp,
}

impl FalloffModel {
    fn regressor(self, r: f64) -> f64 {
        match self {
            FalloffModel::Power => r.ln(),
            FalloffModel::StretchedExp => r.sqrt(),
            FalloffModel::Exp => r,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FalloffModel::Power => "power",
            FalloffModel::StretchedExp => "stretched_exp",
            FalloffModel::Exp => "exp",
        }
    }

    /// The model matching the zero-energy exterior of `p` in channel `l`.
    pub fn natural(p: &RadialPotential, l: u32) -> Self {
        match p.zero_energy_exterior(l) {
            ZeroEnergyExterior::StretchedExp { .. } => FalloffModel::StretchedExp,
            ZeroEnergyExterior::PowerLaw { .. } => FalloffModel::Power,
            ZeroEnergyExterior::Constant => FalloffModel::Exp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalloffFit {
    pub model: FalloffModel,
    /// Exponent `p`, rate `b` or rate `κ`, depending on the model.
    pub parameter: f64,
    pub log_prefactor: f64,
    /// RMS residual of `ln|u|`.
    pub rms_residual: f64,
    pub window: (f64, f64),
}

const FIT_SAMPLES: usize = 200;

/// Least squares of `ln|u|` against `ln r`, `√r` or `r` on `window`. The
/// window should sit in the exterior (`r_lo ≥ 2R0`).
pub fn falloff_fit(u: &RadialFunction, window: (f64, f64), model: FalloffModel) -> Result<FalloffFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("fit window [{lo}, {hi}] must satisfy 0 < lo < hi")));
    }
    let xs: Vec<f64> = log_space(lo, hi, FIT_SAMPLES);
    let mut values: Vec<f64> = xs.iter().map(|&r| u.value_at(r)).collect();
    // grid nodes inside the window catch sign changes between samples
    values.extend(u.grid().nodes().iter().zip(u.values()).filter(|(r, _)| **r >= lo && **r <= hi).map(|(_, v)| *v));
    let positive = values.iter().all(|v| *v > 0.0);
    let negative = values.iter().all(|v| *v < 0.0);
    if !(positive || negative) {
        return Err(Error::Domain(format!("function changes sign or vanishes in [{lo}, {hi}]")));
    }
    let x: Vec<f64> = xs.iter().map(|&r| model.regressor(r)).collect();
    let y: Vec<f64> = values[..FIT_SAMPLES].iter().map(|v| v.abs().ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(FalloffFit { model, parameter: -fit.slope, log_prefactor: fit.intercept, rms_residual: fit.rms_residual, window })
}

/// `[2 R_s, 10 R_s]` with `R_s` the radius where the potential settles into its tail.
pub fn exterior_window(p: &RadialPotential) -> (f64, f64) {
    let s = p.support_radius();
    (2.0 * s, 10.0 * s)
}

/// One coupling of an absorption sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub energy: Option<f64>,
    pub kappa: Option<f64>,
    pub p_within_r: Option<f64>,
    pub nodes: usize,
    pub hf_residual: Option<f64>,
    pub falloff: Option<FalloffFit>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.error.is_none() && self.energy.is_some() && self.p_within_r.is_some()
    }
}

/// Ground-state rows along `schedule ⊂ (λ_cr, 2λ_cr]`, sorted by decreasing
/// coupling. Solver failures are recorded on their row.
pub fn absorption_sweep(
    p: &RadialPotential,
    l: u32,
    schedule: &[f64],
    probe_radius: f64,
    lambda_cr: f64,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    if !(lambda_cr > 0.0 && lambda_cr.is_finite()) {
        return Err(Error::Domain(format!("critical coupling must be positive, got {lambda_cr}")));
    }
    if !(probe_radius > 0.0) {
        return Err(Error::Domain(format!("probe radius must be positive, got {probe_radius}")));
    }
    if schedule.is_empty() {
        return Err(Error::InsufficientData("empty coupling schedule".into()));
    }
    if let Some(bad) = schedule.iter().find(|&&x| !(x > lambda_cr && x <= 2.0 * lambda_cr)) {
        return Err(Error::Precondition(format!(
            "coupling {bad} outside (λ_cr, 2λ_cr] = ({lambda_cr}, {}]",
            2.0 * lambda_cr
        )));
    }
    let mut sorted = schedule.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("coupling schedule has repeated entries".into()));
    }
    let model = FalloffModel::natural(&p.with_coupling(lambda_cr), l);
    let window = exterior_window(p);
    let rows = sorted
        .par_iter()
        .map(|&lambda| {
            let (row, state) = curve_point(p, l, 0, lambda, lambda_cr, probe_radius, cfg);
            let falloff = state.as_ref().and_then(|s| falloff_fit(&s.u, window, model).ok());
            SweepRow {
                lambda,
                energy: row.energy,
                kappa: row.kappa,
                p_within_r: row.p_within_r,
                nodes: row.nodes,
                hf_residual: row.hf_residual,
                falloff,
                error: row.error,
            }
        })
        .collect();
    Ok(rows)
}

/// Couplings putting the ground state at `count` energies log-spaced from
/// `-e_far` to `-e_near`, returned in decreasing order.
pub fn energy_schedule(
    p: &RadialPotential,
    l: u32,
    lambda_cr: f64,
    e_far: f64,
    e_near: f64,
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    if !(e_far > e_near && e_near > 0.0) || count < 2 {
        return Err(Error::Domain(format!("need e_far > e_near > 0 and at least two points, got {e_far}, {e_near}, {count}")));
    }
    let energies = log_space(e_far, e_near, count);
    energies.par_iter().map(|&e| lambda_for_energy(p, l, 0, -e, lambda_cr, cfg)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Absorbed,
    Spreading,
    /// Effective strength exactly 3/4, where neither criterion applies.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// `|slope| < 0.05`
    Bounded,
    /// `slope ≥ 0.2`
    Vanishing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// `d ln P_R / d ln|E|` from the converged rows.
    pub slope: f64,
    pub correlation: f64,
    pub rows_used: usize,
    pub decades: f64,
    pub trend: Trend,
    pub absorbed_slope: f64,
    pub spreading_slope: f64,
    pub lambda_cr: f64,
    /// `A_eff = λ_cr A + ℓ(ℓ+1)` of the exterior; infinite for Coulomb-dominant tails.
    pub effective_strength: f64,
    pub normalizable: bool,
    /// Whether `λ_cr W₊ ≥ η(A, R0)` with `A > 3/4`, which yields a
    /// square-integrable dominating envelope. Absent for tails not of that form.
    pub envelope_dominance: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub warnings: Vec<String>,
}

/// Combines the trend of `P_R` toward threshold with normalizability of the
/// zero-energy solution. Conflicts resolve to the normalizability verdict.
pub fn classify_threshold_behavior(
    rows: &[SweepRow],
    p: &RadialPotential,
    l: u32,
    lambda_cr: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Classification> {
    let used: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged())
        .filter_map(|r| match (r.energy, r.p_within_r) {
            (Some(e), Some(pr)) if e < 0.0 && pr > 0.0 => Some((e.abs(), pr)),
            _ => None,
        })
        .collect();
    if used.len() < 5 {
        return Err(Error::InsufficientData(format!("{} converged rows, need at least 5", used.len())));
    }
    let (e_min, e_max) = used.iter().fold((f64::INFINITY, 0.0f64), |(a, b), (e, _)| (a.min(*e), b.max(*e)));
    let decades = (e_max / e_min).log10();
    if decades < 2.0 {
        return Err(Error::InsufficientData(format!("rows span {decades:.2} decades of |E|, need at least 2")));
    }
    let x: Vec<f64> = used.iter().map(|(e, _)| e.ln()).collect();
    let y: Vec<f64> = used.iter().map(|(_, pr)| pr.ln()).collect();
    let fit = linear_fit(&x, &y)?;
    let trend = if fit.slope.abs() < ABSORBED_SLOPE {
        Trend::Bounded
    } else if fit.slope >= SPREADING_SLOPE {
        Trend::Vanishing
    } else {
        Trend::Inconclusive
    };

    let lambda_cr = match lambda_cr {
        Some(x) => x,
        None => critical_coupling(p, l, 0, None, cfg)?,
    };
    let at_cr = p.with_coupling(lambda_cr);
    let exterior = at_cr.zero_energy_exterior(l);
    let normalizable = match threshold_solution(p, lambda_cr, l, cfg) {
        Ok(_) => true,
        Err(Error::ExteriorNotDecaying { .. }) => false,
        Err(e) => return Err(e),
    };
    let envelope_dominance = match &p.tail {
        TailSpec::InverseSquare { strength, radius } | TailSpec::InverseSquareWithCore { strength, radius, .. } => {
            let a = lambda_cr * strength;
            Some(a > 0.75 && check_theorem3_hypothesis(&at_cr, a, *radius, None).holds)
        }
        _ => None,
    };
    let effective_strength = exterior.effective_strength();

    let mut warnings = vec![format!(
        "trend thresholds |slope| < {ABSORBED_SLOPE} (bounded) and slope ≥ {SPREADING_SLOPE} (vanishing) are heuristic"
    )];
    let skipped = rows.len() - used.len();
    if skipped > 0 {
        warnings.push(format!("{skipped} rows without a converged state were skipped"));
    }
    let verdict = if (effective_strength - 0.75).abs() <= 1e-9 {
        warnings.push("effective strength is 3/4: outside the scope of both theorems".into());
        Verdict::Boundary
    } else {
        let by_norm = if normalizable { Verdict::Absorbed } else { Verdict::Spreading };
        let by_trend = match trend {
            Trend::Bounded => Some(Verdict::Absorbed),
            Trend::Vanishing => Some(Verdict::Spreading),
            Trend::Inconclusive => None,
        };
        match by_trend {
            Some(v) if v == by_norm => {}
            Some(v) => warnings.push(format!(
                "P_R trend (slope {:.4}) suggests {v:?} but the threshold solution is {}; using the latter",
                fit.slope,
                if normalizable { "normalizable" } else { "not normalizable" }
            )),
            None => warnings.push(format!(
                "P_R trend (slope {:.4}) is inconclusive; verdict from normalizability alone",
                fit.slope
            )),
        }
        by_norm
    };
    Ok(Classification {
        verdict,
        evidence: Evidence {
            slope: fit.slope,
            correlation: fit.correlation,
            rows_used: used.len(),
            decades,
            trend,
            absorbed_slope: ABSORBED_SLOPE,
            spreading_slope: SPREADING_SLOPE,
            lambda_cr,
            effective_strength,
            normalizable,
            envelope_dominance,
        },
        warnings,
    })
}

/// Scale the core so the ground state of channel `l` reaches threshold at `λ = 1`.
pub fn calibrated_family(core: Core, tail: TailSpec, l: u32, cfg: &SolverConfig) -> Result<RadialPotential> {
    let p = RadialPotential::new(core, tail, 1.0)?;
    calibrate_core_depth(&p, l, 0, 1.0, cfg)
}

/// Sweep and classification of one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRun {
    pub potential: RadialPotential,
    pub l: u32,
    pub lambda_cr: f64,
    pub rows: Vec<SweepRow>,
    pub classification: Classification,
}

/// Sweep over `count` energies from `-e_far` to `-e_near` and classify.
#[allow(clippy::too_many_arguments)]
pub fn run_family(
    p: &RadialPotential,
    l: u32,
    lambda_cr: Option<f64>,
    probe_radius: f64,
    e_far: f64,
    e_near: f64,
    count: usize,
    cfg: &SolverConfig,
) -> Result<FamilyRun> {
    let lambda_cr = match lambda_cr {
        Some(x) => x,
        None => critical_coupling(p, l, 0, None, cfg)?,
    };
    let schedule = energy_schedule(p, l, lambda_cr, e_far, e_near, count, cfg)?;
    let rows = absorption_sweep(p, l, &schedule, probe_radius, lambda_cr, cfg)?;
    let classification = classify_threshold_behavior(&rows, p, l, Some(lambda_cr), cfg)?;
    Ok(FamilyRun { potential: p.clone(), l, lambda_cr, rows, classification })
}

/// The same family with and without a hard cutoff of its tail at `cutoff`,
/// each calibrated to `λ_cr = 1`.
#[allow(clippy::too_many_arguments)]
pub fn cutoff_contrast(
    core: Core,
    tail: TailSpec,
    cutoff: f64,
    l: u32,
    probe_radius: f64,
    e_far: f64,
    e_near: f64,
    count: usize,
    cfg: &SolverConfig,
) -> Result<(FamilyRun, FamilyRun)> {
    let full = calibrated_family(core.clone(), tail.clone(), l, cfg)?;
    let cut = calibrated_family(core, tail.with_cutoff(cutoff), l, cfg)?;
    let a = run_family(&full, l, Some(1.0), probe_radius, e_far, e_near, count, cfg)?;
    let b = run_family(&cut, l, Some(1.0), probe_radius, e_far, e_near, count, cfg)?;
    Ok((a, b))
}

/// `|W(r)| ≤ A_e e^{-a_e r}`, when the potential has such a bound.
pub fn exponential_envelope(p: &RadialPotential) -> Option<(f64, f64)> {
    let core = match p.core {
        Core::None => (0.0, f64::INFINITY),
        // -depth on r < R is below depth·e·e^{-r/R}
        Core::SquareWell { depth, radius } => (depth * std::f64::consts::E, 1.0 / radius),
        Core::Exponential { depth, rate } => (depth, rate),
    };
    let tail = match p.tail {
        TailSpec::None => (0.0, f64::INFINITY),
        TailSpec::ExponentialEnvelope { amplitude, rate } => (amplitude.abs(), rate),
        _ => return None,
    };
    let rate = core.1.min(tail.1);
    if !rate.is_finite() {
        return Some((0.0, 1.0));
    }
    Some((core.0 + tail.0, rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Row {
    pub energy: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `sup_r |u| e^{κr} / |E|^{1/4}`
    pub ratio: f64,
    /// `⟨|W|⟩ / |E|^{1/2}`
    pub abs_w_ratio: f64,
    /// `⟨H0⟩ / |E|^{1/2}`
    pub h0_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Table {
    pub envelope: (f64, f64),
    pub lambda_cr: f64,
    pub rows: Vec<Theorem1Row>,
    /// max/min of each column across the sweep.
    pub ratio_spread: f64,
    pub abs_w_spread: f64,
    pub h0_spread: f64,
}

impl Theorem1Table {
    pub fn bounded(&self, factor: f64) -> bool {
        self.ratio_spread < factor && self.abs_w_spread < factor && self.h0_spread < factor
    }
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(x), b.max(x)));
    hi / lo
}

/// S-wave states at the given negative energies of a well with an exponential
/// envelope, and the three ratios that stay bounded toward threshold.
pub fn theorem1_ratio(
    p: &RadialPotential,
    energies: &[f64],
    lambda_cr: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Theorem1Table> {
    let envelope = exponential_envelope(p)
        .ok_or_else(|| Error::Precondition("potential has no exponential envelope |W| ≤ A e^{-ar}".into()))?;
    if energies.is_empty() {
        return Err(Error::InsufficientData("no energies given".into()));
    }
    if let Some(e) = energies.iter().find(|e| !(**e < 0.0)) {
        return Err(Error::Domain(format!("energies must be negative, got {e}")));
    }
    let lambda_cr = match lambda_cr {
        Some(x) => x,
        None => critical_coupling(p, 0, 0, None, cfg)?,
    };
    let rows = energies
        .par_iter()
        .map(|&e| -> Result<Theorem1Row> {
            let lambda = lambda_for_energy(p, 0, 0, e, lambda_cr, cfg)?;
            let s = find_bound_state(&p.with_coupling(lambda), 0, 0, None, cfg)?;
            let k = s.kappa;
            let sup = s
                .u
                .grid()
                .nodes()
                .iter()
                .zip(s.u.values())
                .map(|(r, v)| v.abs() * (k * r).exp())
                .fold(0.0, f64::max);
            let root = s.energy.abs().sqrt();
            Ok(Theorem1Row {
                energy: s.energy,
                lambda,
                kappa: k,
                ratio: sup / root.sqrt(),
                abs_w_ratio: expectation_abs_w(&s.u, p)? / root,
                h0_ratio: expectation_h0(&s.u, 0)? / root,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Theorem1Table {
        envelope,
        lambda_cr,
        ratio_spread: spread(rows.iter().map(|r| r.ratio)),
        abs_w_spread: spread(rows.iter().map(|r| r.abs_w_ratio)),
        h0_spread: spread(rows.iter().map(|r| r.h0_ratio)),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Row {
    pub k: f64,
    pub norm_squared: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem4Table {
    pub translation: LowerTranslation,
    pub a_tilde: f64,
    /// `g_k(R̃0)` at the smallest `k`.
    pub c0_smallest_k: f64,
    /// `g_k(R̃0)` minimised over the schedule; used in `constant`.
    pub c0: f64,
    /// `C` in `G_k(x, y) ≥ C |x|^{-3/2} e^{-k|x|}` for `|y| ≤ R0`, `|x| ≥ 2R̃0`.
    pub constant: f64,
    /// `M = ∫_{|y|≤R0} λ_cr W₋ ψ0 dy`.
    pub mass: f64,
    pub rows: Vec<Theorem4Row>,
    /// Fit of `norm²` against `ln(1/k)`.
    pub slope: f64,
    pub correlation: f64,
    pub increasing: bool,
}

/// Lower bound `‖Ξ_k W₋ ψ0‖² ≥ M² C² ∫_{|x|≥2R̃0} |x|^{-3} e^{-2k|x|} dx`
/// `= 4π M² C² E1(4kR̃0)` along a schedule of `k`.
pub fn theorem4_norm_growth(
    p: &RadialPotential,
    lambda_cr: f64,
    strength: f64,
    radius: f64,
    trial: &RadialFunction,
    ks: &[f64],
) -> Result<Theorem4Table> {
    if ks.len() < 2 || ks.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::Domain("need at least two positive k values".into()));
    }
    let at_cr = p.with_coupling(lambda_cr);
    let hyp = check_theorem4_hypothesis(&at_cr, radius, None);
    if !hyp.holds {
        return Err(Error::Precondition(format!(
            "λW ≤ (3/4) r⁻² fails beyond R0 (worst margin {:e} at r = {})",
            hyp.worst_margin, hyp.worst_r
        )));
    }
    // positive part inside R0, sampled with every breakpoint's left limit
    let mut probes: Vec<f64> = (1..=2000).map(|i| radius * i as f64 / 2000.0).collect();
    probes.extend(at_cr.breakpoints().into_iter().filter(|b| *b <= radius).map(|b| b * (1.0 - 1e-12)));
    let inner = probes.iter().map(|&r| at_cr.value(r).max(0.0)).fold(0.0, f64::max);
    let beyond = (0..2000)
        .map(|i| radius * (1.0 + 1e3 * i as f64 / 2000.0))
        .all(|r| at_cr.value(r) <= strength / (r * r) * (1.0 + 1e-12));
    if !beyond {
        return Err(Error::Precondition(format!("λW exceeds {strength}/r² beyond R0 = {radius}")));
    }
    let translation = spreading_translation(strength, inner, radius)?;
    let a_tilde = positive_root_a(translation.strength).unwrap_or(0.0);

    let mut sorted = ks.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k_max = sorted[0];
    let (c0_smallest_k, c0, _) = lower_bound_constant(translation.strength, translation.inner, translation.radius, &sorted)?;
    let rt = translation.radius;
    let constant = c0 * (-k_max * radius).exp() * (1.0 + radius / (2.0 * rt)).powf(-1.0 - a_tilde)
        * (2.0 * rt).powf(0.5 - a_tilde)
        / (4.0 * PI);

    let wm = |r: f64| (-at_cr.value(r)).max(0.0);
    let mut pts = vec![0.0, radius];
    pts.extend(at_cr.breakpoints().into_iter().filter(|b| *b < radius));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mass = (4.0 * PI).sqrt()
        * integrate_pieces(|r| if r == 0.0 { 0.0 } else { wm(r) * trial.value_at(r) * r }, &pts, 1e-15, 1e-12).value;
    let scale = (4.0 * PI).sqrt() * integrate_pieces(|r| wm(r) * trial.value_at(r).abs() * r, &pts, 1e-15, 1e-12).value;
    if !(mass.abs() > 1e-8 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate("trial function is orthogonal to W₋ (M = 0)".into()));
    }

    let rows: Vec<Theorem4Row> = sorted
        .iter()
        .map(|&k| {
            let n2 = mass * mass * constant * constant * 4.0 * PI * exp1(4.0 * k * rt);
            Theorem4Row { k, norm_squared: n2, norm: n2.sqrt() }
        })
        .collect();
    let increasing = rows.windows(2).all(|w| w[1].norm_squared > w[0].norm_squared);
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.k).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.norm_squared).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(Theorem4Table {
        translation,
        a_tilde,
        c0_smallest_k,
        c0,
        constant,
        mass,
        rows,
        slope: fit.slope,
        correlation: fit.correlation,
        increasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirmanSample {
    pub r: f64,
    /// `|u(r)|`
    pub lhs: f64,
    /// `2λ_cr ∫ g_0(r, r') W₋(r') |u(r')| dr'`
    pub rhs: f64,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirmanSchwingerReport {
    pub holds: bool,
    pub samples: Vec<BirmanSample>,
    pub violations: usize,
    pub inconclusive: usize,
    /// Largest `lhs / rhs`.
    pub worst_ratio: f64,
    /// `(r, rhs as a bound on |ψ|, C1 r^{-3/2-δ})` at the first sample beyond `R`.
    pub far_field: Option<(f64, f64, f64)>,
}

/// Pointwise check of `|ψ(x)| ≤ 2λ_cr ∫ G_k(x, y) W₋(y) |ψ(y)| dy` with `G_k`
/// the kernel of the reference tail `η(A, R0)` at `k = κ`. For an s-wave
/// state the angular integral leaves the `ℓ = 0` radial Green's function.
pub fn birman_schwinger_check(
    state: &BoundStateResult,
    p: &RadialPotential,
    lambda_cr: f64,
    strength: f64,
    radius: f64,
    samples: usize,
) -> Result<BirmanSchwingerReport> {
    if state.l != 0 {
        return Err(Error::Precondition("the pointwise check is implemented for s-wave states".into()));
    }
    if !(state.lambda <= 2.0 * lambda_cr) {
        return Err(Error::Precondition(format!(
            "coupling {} exceeds 2λ_cr = {}",
            state.lambda,
            2.0 * lambda_cr
        )));
    }
    let q = p.with_coupling(state.lambda);
    let hyp = check_theorem3_hypothesis(&q, strength, radius, None);
    if !hyp.holds {
        return Err(Error::Precondition(format!(
            "λW₊ ≥ η(A, R0) fails (worst margin {:e} at r = {})",
            hyp.worst_margin, hyp.worst_r
        )));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least two sample radii".into()));
    }
    let k = state.kappa;
    let u = &state.u;
    let r_far = (10.0 / k).min(u.grid().r_max()).max(2.0 * radius);
    let radii = log_space(0.05 * radius, r_far, samples);
    let tail = TailSpec::inverse_square(strength, radius);
    let kernel = PartialWaveKernel::new(&tail, k, 0, r_far)?;
    let wm = |r: f64| (-p.raw(r)).max(0.0);
    let mut base = vec![0.0, radius];
    base.extend(p.breakpoints().into_iter().filter(|b| *b < radius));

    let results = radii
        .par_iter()
        .map(|&r| -> Result<BirmanSample> {
            let mut pts = base.clone();
            if r < radius {
                pts.push(r);
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let integrand = |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let w = wm(s);
                if w == 0.0 {
                    return 0.0;
                }
                kernel.g_l(0, r, s).unwrap_or(f64::NAN) * w * u.value_at(s).abs()
            };
            let integral = integrate_pieces(integrand, &pts, 1e-300, 1e-10);
            if !integral.value.is_finite() {
                return Err(Error::Numerical(format!("Birman–Schwinger integral failed at r = {r}")));
            }
            let rhs = 2.0 * lambda_cr * integral.value;
            let lhs = u.value_at(r).abs();
            let inconclusive = (rhs - lhs).abs() <= 1e-6 * rhs.max(lhs) + integral.error.abs() * 2.0 * lambda_cr;
            Ok(BirmanSample { r, lhs, rhs, inconclusive })
        })
        .collect::<Result<Vec<_>>>()?;

    let violations = results.iter().filter(|s| !s.inconclusive && s.lhs > s.rhs).count();
    let inconclusive = results.iter().filter(|s| s.inconclusive).count();
    let worst_ratio = results.iter().map(|s| s.lhs / s.rhs).fold(0.0, f64::max);

    let far_field = if strength > 0.75 && u.is_normalized() {
        assemble_envelope(&q, lambda_cr, strength, radius, u, EnvelopeMode::State, None).ok().and_then(|env| {
            results.iter().find(|s| s.r > env.validity_radius).map(|s| {
                let bound = s.rhs / ((4.0 * PI).sqrt() * s.r);
                (s.r, bound, env.g_outer(s.r))
            })
        })
    } else {
        None
    };
    Ok(BirmanSchwingerReport { holds: violations == 0, samples: results, violations, inconclusive, worst_ratio, far_field })
}

/// Whether the ground state at `λ_cr` is normalizable, and the fitted falloff
/// of its zero-energy solution over `window`.
pub fn threshold_falloff(
    p: &RadialPotential,
    lambda_cr: f64,
    l: u32,
    window: (f64, f64),
    model: FalloffModel,
    cfg: &SolverConfig,
) -> Result<FalloffFit> {
    let u = threshold_solution(p, lambda_cr, l, cfg)?;
    falloff_fit(&u, window, model)
}

/// Asymptotic falloff exponent of `ψ = u/r` predicted for the inverse-square class.
pub fn predicted_psi_exponent(p: &RadialPotential, l: u32) -> Option<f64> {
    match p.asymptotics() {
        TailAsymptotics::Coulomb { .. } => None,
        _ => match p.zero_energy_exterior(l) {
            ZeroEnergyExterior::PowerLaw { exponent, .. } => Some(1.0 + exponent),
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, RadialGrid};
    use approx::assert_relative_eq;

    fn grid(r_max: f64) -> RadialGrid {
        RadialGrid::new(&GridSpec::new(1.0, r_max)).unwrap()
    }

    #[test]
    fn fits_recover_synthetic_exponents() {
        let g = grid(200.0);
        let power = RadialFunction::from_fn(g.clone(), |r| 3.0 * r.powf(-1.3), |r| -3.9 * r.powf(-2.3), 1.0).unwrap();
        let f = falloff_fit(&power, (2.0, 50.0), FalloffModel::Power).unwrap();
        assert_relative_eq!(f.parameter, 1.3, epsilon = 1e-6);
        assert_relative_eq!(f.log_prefactor, 3f64.ln(), epsilon = 1e-6);
        assert!(f.rms_residual < 1e-6);

        let st = RadialFunction::from_fn(g.clone(), |r| (-2.0 * r.sqrt()).exp(), |r| -(-2.0 * r.sqrt()).exp() / r.sqrt(), 1.0)
            .unwrap();
        assert_relative_eq!(falloff_fit(&st, (2.0, 50.0), FalloffModel::StretchedExp).unwrap().parameter, 2.0, epsilon = 1e-6);

        let ex = RadialFunction::from_fn(g, |r| -(-0.7 * r).exp(), |r| 0.7 * (-0.7 * r).exp(), 1.0).unwrap();
        assert_relative_eq!(falloff_fit(&ex, (2.0, 50.0), FalloffModel::Exp).unwrap().parameter, 0.7, epsilon = 1e-6);
    }

    #[test]
    fn fit_rejects_sign_change_and_bad_window() {
        let u = RadialFunction::from_fn(grid(50.0), |r| (r - 5.0) * (-r).exp(), |r| (6.0 - r) * (-r).exp(), 1.0).unwrap();
        assert!(matches!(falloff_fit(&u, (2.0, 10.0), FalloffModel::Exp), Err(Error::Domain(_))));
        assert!(falloff_fit(&u, (6.0, 20.0), FalloffModel::Exp).is_ok());
        assert!(falloff_fit(&u, (6.0, 6.0), FalloffModel::Exp).is_err());
    }

    #[test]
    fn natural_models() {
        let well = Core::square_well(3.0, 1.0);
        let p = RadialPotential::new(well.clone(), TailSpec::None, 1.0).unwrap();
        assert_eq!(FalloffModel::natural(&p, 0), FalloffModel::Exp);
        assert_eq!(FalloffModel::natural(&p, 1), FalloffModel::Power);
        let p = RadialPotential::new(well.clone(), TailSpec::coulomb_dominant(2.0, 1.0), 1.0).unwrap();
        assert_eq!(FalloffModel::natural(&p, 0), FalloffModel::StretchedExp);
        let p = RadialPotential::new(well, TailSpec::inverse_square(2.0, 1.0), 1.0).unwrap();
        assert_eq!(FalloffModel::natural(&p, 0), FalloffModel::Power);
        assert_eq!(predicted_psi_exponent(&p, 0), Some(2.0));
    }

    #[test]
    fn exponential_envelopes() {
        let p = RadialPotential::new(Core::Exponential { depth: 3.0, rate: 0.5 }, TailSpec::None, 1.0).unwrap();
        assert_eq!(exponential_envelope(&p), Some((3.0, 0.5)));
        let p = RadialPotential::new(Core::square_well(2.0, 4.0), TailSpec::None, 1.0).unwrap();
        let (a, rate) = exponential_envelope(&p).unwrap();
        for r in [0.1, 1.0, 3.99, 4.0, 9.0] {
            assert!(p.raw(r).abs() <= a * (-rate * r).exp());
        }
        let p = RadialPotential::new(Core::square_well(2.0, 1.0), TailSpec::inverse_square(2.0, 1.0), 1.0).unwrap();
        assert!(exponential_envelope(&p).is_none());
        let err = theorem1_ratio(&p, &[-0.1], Some(1.0), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    fn row(e: f64, pr: f64) -> SweepRow {
        SweepRow {
            lambda: 1.0 + e,
            energy: Some(-e),
            kappa: Some(e.sqrt()),
            p_within_r: Some(pr),
            nodes: 0,
            hf_residual: Some(0.0),
            falloff: None,
            error: None,
        }
    }

    #[test]
    fn classifier_needs_enough_data() {
        let cfg = SolverConfig::default();
        let p = RadialPotential::new(Core::square_well(2.4674011002723395, 1.0), TailSpec::None, 1.0).unwrap();
        let four: Vec<SweepRow> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| row(e, 0.5)).collect();
        assert!(matches!(classify_threshold_behavior(&four, &p, 0, Some(1.0), &cfg), Err(Error::InsufficientData(_))));
        let narrow: Vec<SweepRow> = log_space(1e-2, 5e-2, 6).iter().map(|&e| row(e, 0.5)).collect();
        assert!(matches!(classify_threshold_behavior(&narrow, &p, 0, Some(1.0), &cfg), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn classifier_combines_trend_and_normalizability() {
        let cfg = SolverConfig::default();
        let energies = log_space(1e-1, 1e-5, 6);
        let spreading_rows: Vec<SweepRow> = energies.iter().map(|&e| row(e, e.sqrt())).collect();
        let flat_rows: Vec<SweepRow> = energies.iter().map(|&e| row(e, 0.8)).collect();

        // bare s-wave well: not normalizable at threshold
        let s_wave = RadialPotential::new(Core::square_well(std::f64::consts::PI.powi(2) / 4.0, 1.0), TailSpec::None, 1.0).unwrap();
        let c = classify_threshold_behavior(&spreading_rows, &s_wave, 0, Some(1.0), &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Spreading);
        assert_eq!(c.evidence.trend, Trend::Vanishing);
        assert_relative_eq!(c.evidence.slope, 0.5, epsilon = 1e-12);
        assert_eq!(c.warnings.len(), 1);

        // conflicting evidence follows normalizability and warns
        let c = classify_threshold_behavior(&flat_rows, &s_wave, 0, Some(1.0), &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Spreading);
        assert_eq!(c.warnings.len(), 2);

        // failed rows are skipped
        let mut rows = flat_rows.clone();
        rows.push(SweepRow { error: Some("x".into()), energy: None, p_within_r: None, ..row(1e-3, 0.1) });
        let p_wave = RadialPotential::new(Core::square_well(std::f64::consts::PI.powi(2), 1.0), TailSpec::None, 1.0).unwrap();
        let c = classify_threshold_behavior(&rows, &p_wave, 1, Some(1.0), &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Absorbed);
        assert_eq!(c.evidence.rows_used, 6);
        assert!(c.evidence.normalizable);
        assert_relative_eq!(c.evidence.effective_strength, 2.0);
    }

    #[test]
    fn boundary_strength_is_its_own_verdict() {
        let cfg = SolverConfig::default();
        let p = RadialPotential::new(Core::square_well(3.0, 1.0), TailSpec::inverse_square(0.75, 1.0), 1.0).unwrap();
        let rows: Vec<SweepRow> = log_space(1e-1, 1e-5, 6).iter().map(|&e| row(e, 0.5)).collect();
        let c = classify_threshold_behavior(&rows, &p, 0, Some(1.0), &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Boundary);
        assert_eq!(c.evidence.envelope_dominance, Some(false));
    }

    #[test]
    fn sweep_precondition() {
        let cfg = SolverConfig::default();
        let p = RadialPotential::new(Core::square_well(1.0, 1.0), TailSpec::None, 1.0).unwrap();
        let lcr = std::f64::consts::PI.powi(2) / 4.0;
        let e = absorption_sweep(&p, 0, &[1.5 * lcr, 2.5 * lcr], 5.0, lcr, &cfg).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        let e = absorption_sweep(&p, 0, &[0.9 * lcr], 5.0, lcr, &cfg).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn sweep_rows_are_sorted_and_valid() {
        let cfg = SolverConfig::default();
        let p = RadialPotential::new(Core::square_well(1.0, 1.0), TailSpec::None, 1.0).unwrap();
        let lcr = std::f64::consts::PI.powi(2) / 4.0;
        let rows = absorption_sweep(&p, 0, &[1.1 * lcr, 1.5 * lcr, 1.3 * lcr], 3.0, lcr, &cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.lambda).collect::<Vec<_>>(), vec![1.5 * lcr, 1.3 * lcr, 1.1 * lcr]);
        for r in &rows {
            assert!(r.converged());
            assert!(r.energy.unwrap() < 0.0);
            let pr = r.p_within_r.unwrap();
            assert!(pr > 0.0 && pr <= 1.0);
            assert_eq!(r.falloff.unwrap().model, FalloffModel::Exp);
        }
        // deeper binding keeps more weight inside the probe
        assert!(rows[0].p_within_r > rows[2].p_within_r);
    }

    #[test]
    fn calibration_puts_threshold_at_unit_coupling() {
        let cfg = SolverConfig::default();
        let p = calibrated_family(Core::square_well(1.0, 1.0), TailSpec::None, 0, &cfg).unwrap();
        assert_relative_eq!(p.core.depth(), std::f64::consts::PI.powi(2) / 4.0, max_relative = 1e-8);
        assert!(!has_state(&p, 0.999));
        assert!(has_state(&p, 1.001));
    }

    fn has_state(p: &RadialPotential, lambda: f64) -> bool {
        crate::radial::has_bound_state(p, 0, 0, lambda, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn theorem4_rejects_orthogonal_trial() {
        let p = RadialPotential::new(Core::square_well(3.0, 1.0), TailSpec::inverse_square(0.5, 1.0), 1.0).unwrap();
        // ∫_0^1 (r² - 3r/4) r dr = 0
        let zero = RadialFunction::from_fn(grid(20.0), |r| r * r - 0.75 * r, |r| 2.0 * r - 0.75, 1.0).unwrap();
        let e = theorem4_norm_growth(&p, 1.0, 0.5, 1.0, &zero, &[0.1, 0.01]).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
    }

    #[test]
    fn theorem4_rejects_strong_tail() {
        let p = RadialPotential::new(Core::square_well(3.0, 1.0), TailSpec::inverse_square(2.0, 1.0), 1.0).unwrap();
        let u = RadialFunction::from_fn(grid(20.0), |r| r * (-r).exp(), |r| (1.0 - r) * (-r).exp(), 1.0).unwrap();
        let e = theorem4_norm_growth(&p, 1.0, 2.0, 1.0, &u, &[0.1, 0.01]).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn theorem4_table_grows_as_k_decreases() {
        let p = RadialPotential::new(Core::square_well(3.0, 1.0), TailSpec::inverse_square(0.5, 1.0), 1.0).unwrap();
        let u = RadialFunction::from_fn(grid(20.0), |r| r * (-r).exp(), |r| (1.0 - r) * (-r).exp(), 1.0).unwrap();
        let t = theorem4_norm_growth(&p, 1.0, 0.5, 1.0, &u, &[0.1, 0.03, 0.01]).unwrap();
        assert_eq!(t.translation.radius, 8.0);
        assert!(t.increasing);
        assert!(t.slope > 0.0);
        assert!(t.c0 > 0.0 && t.c0 <= t.c0_smallest_k);
        // norm² / E1(4kR̃0) is the same at every k
        let q: Vec<f64> = t.rows.iter().map(|r| r.norm_squared / exp1(4.0 * r.k * 8.0)).collect();
        assert_relative_eq!(q[0], q[2], max_relative = 1e-12);
    }
}
