//! Potentials of the form `λ·(core + tail)` with a bounded attractive core and
//! a repulsive long-range tail, in units where ħ = 1 and m = 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Long-range part of the interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    None,
    /// `0` for `r < radius`, `strength / r²` beyond.
    InverseSquare { strength: f64, radius: f64 },
    /// `inner` for `r < radius`, `strength / r²` beyond.
    InverseSquareWithCore { inner: f64, strength: f64, radius: f64 },
    /// `0` for `r < radius`, `(a²/4)/r + (a/4)/r^{3/2}` beyond, with `a = decay`.
    CoulombDominant { decay: f64, radius: f64 },
    /// `amplitude · exp(-rate · r)` everywhere.
    ExponentialEnvelope { amplitude: f64, rate: f64 },
    /// The inner tail for `r < cutoff`, zero beyond.
    HardCutoff { inner: Box<TailSpec>, cutoff: f64 },
}

/// Behaviour of a tail at large radius, once the coupling is folded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailAsymptotics {
    /// Decays faster than any power; includes tails cut off at finite radius.
    ShortRange,
    /// `strength / r²` with the coupling already applied.
    InverseSquare(f64),
    /// Zero-energy decay `r^power · exp(-rate √r)`, with `rate = a √λ`.
    Coulomb { rate: f64, power: f64 },
}

/// Decaying zero-energy solution outside every breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroEnergyExterior {
    /// `u = const` (s-wave, short range). Never decays.
    Constant,
    /// `u ∝ r^{-exponent}` with `exponent (exponent + 1) = A_eff`.
    PowerLaw { exponent: f64, effective_strength: f64 },
    /// `u ∝ r^power · exp(-rate · √r)`.
    StretchedExp { rate: f64, power: f64 },
}

impl ZeroEnergyExterior {
    pub fn from_asymptotics(asym: TailAsymptotics, l: u32) -> Self {
        let centrifugal = (l * (l + 1)) as f64;
        match asym {
            TailAsymptotics::Coulomb { rate, power } => ZeroEnergyExterior::StretchedExp { rate, power },
            TailAsymptotics::ShortRange | TailAsymptotics::InverseSquare(_) => {
                let strength = match asym {
                    TailAsymptotics::InverseSquare(a) => a,
                    _ => 0.0,
                };
                let effective = strength + centrifugal;
                if effective <= 0.0 {
                    ZeroEnergyExterior::Constant
                } else {
                    ZeroEnergyExterior::PowerLaw {
                        exponent: 0.5 * (-1.0 + (1.0 + 4.0 * effective).sqrt()),
                        effective_strength: effective,
                    }
                }
            }
        }
    }

    /// `u'/u` of the exterior branch at radius `r`.
    pub fn log_derivative(&self, r: f64) -> f64 {
        match *self {
            ZeroEnergyExterior::Constant => 0.0,
            ZeroEnergyExterior::PowerLaw { exponent, .. } => -exponent / r,
            ZeroEnergyExterior::StretchedExp { rate, power } => power / r - 0.5 * rate / r.sqrt(),
        }
    }

    /// A_eff > 3/4 for power laws; stretched exponentials always qualify.
    pub fn is_square_integrable(&self) -> bool {
        match *self {
            ZeroEnergyExterior::Constant => false,
            ZeroEnergyExterior::PowerLaw { exponent, .. } => exponent > 0.5,
            ZeroEnergyExterior::StretchedExp { .. } => true,
        }
    }

    pub fn effective_strength(&self) -> f64 {
        match *self {
            ZeroEnergyExterior::Constant => 0.0,
            ZeroEnergyExterior::PowerLaw { effective_strength, .. } => effective_strength,
            ZeroEnergyExterior::StretchedExp { .. } => f64::INFINITY,
        }
    }
}

impl TailSpec {
    pub fn inverse_square(strength: f64, radius: f64) -> Self {
        TailSpec::InverseSquare { strength, radius }
    }

    pub fn coulomb_dominant(decay: f64, radius: f64) -> Self {
        TailSpec::CoulombDominant { decay, radius }
    }

    pub fn with_cutoff(self, cutoff: f64) -> Self {
        TailSpec::HardCutoff { inner: Box::new(self), cutoff }
    }

    pub fn validate(&self) -> Result<()> {
        fn radius_ok(name: &str, r: f64) -> Result<()> {
            if r.is_finite() && r > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive and finite, got {r}")))
            }
        }
        fn strength_ok(name: &str, s: f64) -> Result<()> {
            if s.is_finite() && s >= 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be non-negative and finite, got {s}")))
            }
        }
        match self {
            TailSpec::None => Ok(()),
            TailSpec::InverseSquare { strength, radius } => {
                strength_ok("tail strength", *strength)?;
                radius_ok("tail radius", *radius)
            }
            TailSpec::InverseSquareWithCore { inner, strength, radius } => {
                strength_ok("inner height", *inner)?;
                strength_ok("tail strength", *strength)?;
                radius_ok("tail radius", *radius)
            }
            TailSpec::CoulombDominant { decay, radius } => {
                strength_ok("decay parameter", *decay)?;
                radius_ok("tail radius", *radius)
            }
            TailSpec::ExponentialEnvelope { amplitude, rate } => {
                strength_ok("amplitude", *amplitude)?;
                radius_ok("rate", *rate)
            }
            TailSpec::HardCutoff { inner, cutoff } => {
                radius_ok("cutoff", *cutoff)?;
                inner.validate()
            }
        }
    }

    /// Right-continuous evaluation; `r` is assumed positive.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            TailSpec::None => 0.0,
            TailSpec::InverseSquare { strength, radius } => {
                if r < *radius {
                    0.0
                } else {
                    strength / (r * r)
                }
            }
            TailSpec::InverseSquareWithCore { inner, strength, radius } => {
                if r < *radius {
                    *inner
                } else {
                    strength / (r * r)
                }
            }
            TailSpec::CoulombDominant { decay, radius } => {
                if r < *radius {
                    0.0
                } else {
                    0.25 * decay * decay / r + 0.25 * decay / (r * r.sqrt())
                }
            }
            TailSpec::ExponentialEnvelope { amplitude, rate } => amplitude * (-rate * r).exp(),
            TailSpec::HardCutoff { inner, cutoff } => {
                if r < *cutoff {
                    inner.value(r)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.value(r))
    }

    /// The tail's onset radius R0, when it has one.
    pub fn radius(&self) -> Option<f64> {
        match self {
            TailSpec::None | TailSpec::ExponentialEnvelope { .. } => None,
            TailSpec::InverseSquare { radius, .. }
            | TailSpec::InverseSquareWithCore { radius, .. }
            | TailSpec::CoulombDominant { radius, .. } => Some(*radius),
            TailSpec::HardCutoff { inner, .. } => inner.radius(),
        }
    }

    /// Radii where the tail may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            TailSpec::HardCutoff { inner, cutoff } => {
                let mut b = inner.breakpoints();
                b.push(*cutoff);
                b
            }
            other => other.radius().into_iter().collect(),
        }
    }

    /// A characteristic length: the onset radius, else the decay length.
    pub fn length_scale(&self) -> Option<f64> {
        match self {
            TailSpec::ExponentialEnvelope { rate, .. } => Some(1.0 / rate),
            TailSpec::HardCutoff { inner, cutoff } => inner.length_scale().or(Some(*cutoff)),
            other => other.radius(),
        }
    }

    pub fn asymptotics(&self, coupling: f64) -> TailAsymptotics {
        match self {
            TailSpec::None | TailSpec::ExponentialEnvelope { .. } | TailSpec::HardCutoff { .. } => {
                TailAsymptotics::ShortRange
            }
            TailSpec::InverseSquare { strength, .. }
            | TailSpec::InverseSquareWithCore { strength, .. } => {
                if *strength == 0.0 {
                    TailAsymptotics::ShortRange
                } else {
                    TailAsymptotics::InverseSquare(coupling * strength)
                }
            }
            TailSpec::CoulombDominant { decay, .. } => {
                if *decay == 0.0 {
                    TailAsymptotics::ShortRange
                } else {
                    // r^c e^{-b√r} with b = a√λ solves the equation up to O(r^-2) when c = (1 - √λ)/4
                    TailAsymptotics::Coulomb { rate: decay * coupling.sqrt(), power: 0.25 * (1.0 - coupling.sqrt()) }
                }
            }
        }
    }

    /// Supremum of the tail, when finite.
    pub fn upper_bound(&self) -> f64 {
        match self {
            TailSpec::None => 0.0,
            TailSpec::InverseSquare { strength, radius } => strength / (radius * radius),
            TailSpec::InverseSquareWithCore { inner, strength, radius } => {
                inner.max(strength / (radius * radius))
            }
            TailSpec::CoulombDominant { decay, radius } => {
                0.25 * decay * decay / radius + 0.25 * decay / (radius * radius.sqrt())
            }
            TailSpec::ExponentialEnvelope { amplitude, .. } => *amplitude,
            TailSpec::HardCutoff { inner, .. } => inner.upper_bound(),
        }
    }
}

/// Bounded attractive part. Evaluates to a non-positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Core {
    None,
    /// `-depth` for `r < radius`.
    SquareWell { depth: f64, radius: f64 },
    /// `-depth · exp(-rate · r)`.
    Exponential { depth: f64, rate: f64 },
}

impl Core {
    pub fn square_well(depth: f64, radius: f64) -> Self {
        Core::SquareWell { depth, radius }
    }

    pub fn validate(&self) -> Result<()> {
        let (depth, len) = match self {
            Core::None => return Ok(()),
            Core::SquareWell { depth, radius } => (*depth, *radius),
            Core::Exponential { depth, rate } => (*depth, *rate),
        };
        if !(depth.is_finite() && depth >= 0.0) {
            return Err(Error::Domain(format!("core depth must be non-negative, got {depth}")));
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::Domain(format!("core length parameter must be positive, got {len}")));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Core::None => 0.0,
            Core::SquareWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            Core::Exponential { depth, rate } => -depth * (-rate * r).exp(),
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self {
            Core::SquareWell { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    pub fn length_scale(&self) -> Option<f64> {
        match self {
            Core::None => None,
            Core::SquareWell { radius, .. } => Some(*radius),
            Core::Exponential { rate, .. } => Some(1.0 / rate),
        }
    }

    pub fn depth(&self) -> f64 {
        match self {
            Core::None => 0.0,
            Core::SquareWell { depth, .. } | Core::Exponential { depth, .. } => *depth,
        }
    }

    /// Same shape with the depth multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Core::None => Core::None,
            Core::SquareWell { depth, radius } => Core::SquareWell { depth: depth * factor, radius: *radius },
            Core::Exponential { depth, rate } => Core::Exponential { depth: depth * factor, rate: *rate },
        }
    }
}

/// `λ · (core(r) + tail(r))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialPotential {
    pub core: Core,
    pub tail: TailSpec,
    pub coupling: f64,
}

impl RadialPotential {
    pub fn new(core: Core, tail: TailSpec, coupling: f64) -> Result<Self> {
        let p = RadialPotential { core, tail, coupling };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        self.tail.validate()?;
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::Domain(format!("coupling must be positive, got {}", self.coupling)));
        }
        Ok(())
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        RadialPotential { coupling, ..self.clone() }
    }

    /// `W(r) = core(r) + tail(r)`, without the coupling.
    pub fn raw(&self, r: f64) -> f64 {
        self.core.value(r) + self.tail.value(r)
    }

    /// `λ W(r)` as the right-hand limit; no argument checks.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.coupling * self.raw(r)
    }

    /// `λ W` approached from below `r`.
    #[inline]
    pub fn value_left(&self, r: f64) -> f64 {
        self.value(left_of(r))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let v = self.value(r);
        if !v.is_finite() {
            return Err(Error::Domain(format!("potential is not finite at r = {r}")));
        }
        Ok(v)
    }

    /// Radius beyond which the core vanishes and the tail has switched on.
    pub fn support_radius(&self) -> f64 {
        match (self.core.radius(), self.tail.radius()) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => self
                .core
                .length_scale()
                .into_iter()
                .chain(self.tail.length_scale())
                .fold(1.0_f64, |acc, x| if acc == 1.0 { x } else { acc.max(x) }),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.core.radius().into_iter().collect();
        b.extend(self.tail.breakpoints());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    pub fn asymptotics(&self) -> TailAsymptotics {
        self.tail.asymptotics(self.coupling)
    }

    pub fn zero_energy_exterior(&self, l: u32) -> ZeroEnergyExterior {
        ZeroEnergyExterior::from_asymptotics(self.asymptotics(), l)
    }
}

/// Positive and negative parts of `λ W(r)`.
pub fn split_parts(p: &RadialPotential, r: f64) -> Result<(f64, f64)> {
    let w = p.eval(r)?;
    Ok((w.max(0.0), (-w).max(0.0)))
}

pub fn eval_potential(p: &RadialPotential, r: f64) -> Result<f64> {
    p.eval(r)
}

/// The reference tail `η(A, R0; r)`.
pub fn eta(strength: f64, radius: f64, r: f64) -> f64 {
    TailSpec::InverseSquare { strength, radius }.value(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub holds: bool,
    /// Smallest margin found on the grid; negative when violated.
    pub worst_margin: f64,
    pub worst_r: f64,
    /// Outcome of the closed-form comparison beyond the grid.
    pub beyond_grid_holds: bool,
    pub warning: Option<String>,
}

/// Default check grid over `[radius, 10³·radius]`.
pub fn hypothesis_grid(p: &RadialPotential, radius: f64) -> RadialGrid {
    let r_max = 1.0e3 * radius;
    let n = 4000;
    let ratio = (r_max / radius).ln() / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| radius * (ratio * i as f64).exp()).collect();
    for b in p.breakpoints() {
        if b > radius && b < r_max {
            nodes.push(b);
            nodes.push(left_of(b));
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    RadialGrid::from_nodes(nodes).expect("check grid is increasing and positive")
}

/// Grid test of `λ W_+(r) ≥ η(A, R0; r)` for `r ≥ R0`, plus a closed-form
/// comparison of the asymptotic tails beyond the grid.
pub fn check_theorem3_hypothesis(
    p: &RadialPotential,
    strength: f64,
    radius: f64,
    grid: Option<&RadialGrid>,
) -> HypothesisReport {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = hypothesis_grid(p, radius);
            &owned
        }
    };
    let mut worst = f64::INFINITY;
    let mut worst_r = radius;
    for &r in grid.nodes().iter().filter(|&&r| r >= radius) {
        let plus = p.value(r).max(0.0);
        let margin = plus - eta(strength, radius, r);
        if margin < worst {
            worst = margin;
            worst_r = r;
        }
    }
    let r_last = grid.r_max();
    let beyond = match p.asymptotics() {
        TailAsymptotics::InverseSquare(a) => a >= strength,
        TailAsymptotics::Coulomb { .. } => true,
        TailAsymptotics::ShortRange => strength <= 0.0,
    } && p.breakpoints().iter().all(|&b| b <= r_last || strength <= 0.0);
    let warning = (strength <= 0.75)
        .then(|| format!("reference strength {strength} ≤ 3/4: the absorption criterion makes no claim"));
    HypothesisReport {
        holds: worst >= 0.0 && beyond,
        worst_margin: worst,
        worst_r,
        beyond_grid_holds: beyond,
        warning,
    }
}

/// Grid test of `λ W(r) ≤ (3/4) r⁻²` for `r ≥ R0`, plus the asymptotic comparison.
pub fn check_theorem4_hypothesis(p: &RadialPotential, radius: f64, grid: Option<&RadialGrid>) -> HypothesisReport {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = hypothesis_grid(p, radius);
            &owned
        }
    };
    let mut worst = f64::INFINITY;
    let mut worst_r = radius;
    for &r in grid.nodes().iter().filter(|&&r| r >= radius) {
        let margin = 0.75 / (r * r) - p.value(r);
        if margin < worst {
            worst = margin;
            worst_r = r;
        }
    }
    let beyond = match p.asymptotics() {
        TailAsymptotics::InverseSquare(a) => a <= 0.75,
        TailAsymptotics::Coulomb { .. } => false,
        TailAsymptotics::ShortRange => true,
    };
    HypothesisReport {
        holds: worst >= 0.0 && beyond,
        worst_margin: worst,
        worst_r,
        beyond_grid_holds: beyond,
        warning: None,
    }
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive and finite, got {r}")))
    }
}

/// A point just below `r`, far enough to land on the left branch of a jump at `r`.
#[inline]
pub(crate) fn left_of(r: f64) -> f64 {
    r - r * 1.0e-14
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn well_with(tail: TailSpec, coupling: f64) -> RadialPotential {
        RadialPotential::new(Core::square_well(4.0, 1.0), tail, coupling).unwrap()
    }

    #[test]
    fn tail_examples() {
        let eta = TailSpec::inverse_square(2.0, 1.0);
        assert_eq!(eta.eval(0.5).unwrap(), 0.0);
        assert_eq!(eta.eval(2.0).unwrap(), 0.5);
        let zeta = TailSpec::coulomb_dominant(2.0, 1.0);
        assert_relative_eq!(zeta.eval(4.0).unwrap(), 0.3125, max_relative = 1e-15);
        let xi = TailSpec::InverseSquareWithCore { inner: 3.0, strength: 2.0, radius: 1.0 };
        assert_eq!(xi.value(0.3), 3.0);
        assert_eq!(xi.value(2.0), 0.5);
    }

    #[test]
    fn cutoff_tail_vanishes_beyond_cutoff() {
        let cut = TailSpec::coulomb_dominant(2.0, 1.0).with_cutoff(50.0);
        assert!(cut.value(49.9) > 0.0);
        assert_eq!(cut.value(50.0), 0.0);
        assert_eq!(cut.breakpoints(), vec![1.0, 50.0]);
        assert_eq!(cut.asymptotics(1.0), TailAsymptotics::ShortRange);
    }

    #[test]
    fn eval_rejects_non_positive_radius() {
        let p = well_with(TailSpec::None, 1.0);
        assert!(matches!(p.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(p.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn validation_rejects_negative_radius() {
        assert!(RadialPotential::new(Core::square_well(1.0, -1.0), TailSpec::None, 1.0).is_err());
        assert!(TailSpec::inverse_square(2.0, -1.0).validate().is_err());
        assert!(RadialPotential::new(Core::None, TailSpec::None, 0.0).is_err());
    }

    #[test]
    fn split_examples() {
        let p = RadialPotential::new(Core::square_well(3.0, 1.0), TailSpec::inverse_square(2.0, 1.0), 1.0).unwrap();
        assert_eq!(split_parts(&p, 0.5).unwrap(), (0.0, 3.0));
        let q = RadialPotential::new(Core::None, TailSpec::InverseSquareWithCore { inner: 2.0, strength: 0.0, radius: 1.0 }, 1.0).unwrap();
        assert_eq!(split_parts(&q, 0.5).unwrap(), (2.0, 0.0));
        let z = RadialPotential::new(Core::None, TailSpec::None, 1.0).unwrap();
        assert_eq!(split_parts(&z, 3.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn theorem3_examples() {
        let p = well_with(TailSpec::inverse_square(2.0, 1.0), 1.0);
        assert!(check_theorem3_hypothesis(&p, 2.0, 1.0, None).holds);

        let bare = well_with(TailSpec::None, 1.0);
        let rep = check_theorem3_hypothesis(&bare, 2.0, 1.0, None);
        assert!(!rep.holds);
        assert_eq!(rep.worst_r, 1.0);

        // margin = (0.5 - 2)/r², minimized on the grid at r = R0
        let weak = well_with(TailSpec::inverse_square(0.5, 1.0), 1.0);
        let rep = check_theorem3_hypothesis(&weak, 2.0, 1.0, None);
        let grid = hypothesis_grid(&weak, 1.0);
        let oracle = grid
            .nodes()
            .iter()
            .map(|&r| (0.5 - 2.0) / (r * r))
            .fold(f64::INFINITY, f64::min);
        assert!(!rep.holds);
        assert_relative_eq!(rep.worst_margin, oracle, max_relative = 1e-14);
        assert_relative_eq!(rep.worst_margin, -1.5, max_relative = 1e-14);
        assert_eq!(rep.worst_r, 1.0);
    }

    #[test]
    fn theorem4_examples() {
        assert!(check_theorem4_hypothesis(&well_with(TailSpec::None, 1.0), 1.0, None).holds);
        assert!(check_theorem4_hypothesis(&well_with(TailSpec::inverse_square(0.5, 1.0), 1.0), 1.0, None).holds);
        assert!(!check_theorem4_hypothesis(&well_with(TailSpec::inverse_square(2.0, 1.0), 1.0), 1.0, None).holds);
        assert!(!check_theorem4_hypothesis(&well_with(TailSpec::coulomb_dominant(2.0, 1.0), 1.0), 1.0, None).holds);
    }

    #[test]
    fn zero_energy_exterior_classes() {
        let p = well_with(TailSpec::inverse_square(2.0, 1.0), 1.0);
        match p.zero_energy_exterior(0) {
            ZeroEnergyExterior::PowerLaw { exponent, .. } => assert_relative_eq!(exponent, 1.0),
            other => panic!("{other:?}"),
        }
        let bare = well_with(TailSpec::None, 1.0);
        assert_eq!(bare.zero_energy_exterior(0), ZeroEnergyExterior::Constant);
        assert!(bare.zero_energy_exterior(1).is_square_integrable());
        // centrifugal term folds into the strength before the root is taken
        match p.zero_energy_exterior(1) {
            ZeroEnergyExterior::PowerLaw { effective_strength, exponent } => {
                assert_relative_eq!(effective_strength, 4.0);
                assert_relative_eq!(exponent * (exponent + 1.0), 4.0, max_relative = 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }

    fn tail_strategy() -> impl Strategy<Value = TailSpec> {
        let leaf = prop_oneof![
            Just(TailSpec::None),
            (0.0..5.0, 0.1..3.0).prop_map(|(s, r)| TailSpec::inverse_square(s, r)),
            (0.0..5.0, 0.0..5.0, 0.1..3.0)
                .prop_map(|(v, s, r)| TailSpec::InverseSquareWithCore { inner: v, strength: s, radius: r }),
            (0.0..4.0, 0.1..3.0).prop_map(|(a, r)| TailSpec::coulomb_dominant(a, r)),
            (0.0..4.0, 0.1..3.0).prop_map(|(a, k)| TailSpec::ExponentialEnvelope { amplitude: a, rate: k }),
        ];
        (leaf, proptest::option::of(1.0..80.0))
            .prop_map(|(t, cut)| match cut {
                Some(c) => t.with_cutoff(c),
                None => t,
            })
    }

    proptest! {
        #[test]
        fn split_reconstructs(tail in tail_strategy(), depth in 0.0..10.0f64, lambda in 0.05..5.0f64, r in 1e-3..200.0f64) {
            let p = RadialPotential::new(Core::square_well(depth, 1.0), tail, lambda).unwrap();
            let (plus, minus) = split_parts(&p, r).unwrap();
            prop_assert_eq!(plus - minus, p.eval(r).unwrap());
            prop_assert_eq!(plus * minus, 0.0);
            prop_assert!(plus >= 0.0 && minus >= 0.0);
        }

        #[test]
        fn continuous_away_from_breakpoints(tail in tail_strategy(), r in 1e-2..100.0f64) {
            let near = tail.breakpoints().iter().any(|b| (r - b).abs() < 1e-3 * b.max(1.0));
            prop_assume!(!near);
            let h = 1e-9 * r;
            let jump = (tail.value(r + h) - tail.value(r - h)).abs();
            prop_assert!(jump <= 1e-6 * tail.value(r).abs().max(1e-12));
        }

        #[test]
        fn hypotheses_never_both_hold(strength in 0.76..4.0f64, tail_strength in 0.0..4.0f64, lambda in 0.2..3.0f64) {
            let p = RadialPotential::new(Core::square_well(4.0, 1.0), TailSpec::inverse_square(tail_strength, 1.0), lambda).unwrap();
            let t3 = check_theorem3_hypothesis(&p, strength, 1.0, None);
            let t4 = check_theorem4_hypothesis(&p, 1.0, None);
            prop_assert!(!(t3.holds && t4.holds));
        }
    }
}
