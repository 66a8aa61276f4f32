//! Experiment configuration: a TOML document validated before any numerics.
//! Every optional field has a default, and the resolved document (defaults
//! filled in) is what goes into the bundle manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use threshold_core::{Core, RadialPotential, SolverConfig, TailSpec};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Sweep,
    Greens,
    Envelope,
    Classify,
    VerifyBounds,
    Theorem1,
    Theorem4,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Solve,
        ExperimentKind::Sweep,
        ExperimentKind::Greens,
        ExperimentKind::Envelope,
        ExperimentKind::Classify,
        ExperimentKind::VerifyBounds,
        ExperimentKind::Theorem1,
        ExperimentKind::Theorem4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Greens => "greens",
            ExperimentKind::Envelope => "envelope",
            ExperimentKind::Classify => "classify",
            ExperimentKind::VerifyBounds => "verify-bounds",
            ExperimentKind::Theorem1 => "theorem1",
            ExperimentKind::Theorem4 => "theorem4",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "core_none")]
    pub core: Core,
    #[serde(default = "tail_none")]
    pub tail: TailSpec,
    /// Coupling used by `solve`; ignored elsewhere.
    #[serde(default = "one")]
    pub coupling: f64,
    /// Rescale the core so the ground state of channel `l` reaches threshold at `λ = 1`.
    #[serde(default)]
    pub calibrate: bool,
}

/// Couplings for sweeps: explicit, or chosen to hit `count` energies
/// log-spaced from `-e_far` to `-e_near`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lambdas: Option<Vec<f64>>,
    pub e_far: f64,
    pub e_near: f64,
    pub count: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { lambdas: None, e_far: 1e-1, e_near: 1e-5, count: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreensConfig {
    /// Strictly decreasing.
    pub ks: Vec<f64>,
    /// Profile grid extent in units of the tail's length scale.
    pub reach: f64,
    pub l_max: usize,
    /// Radii for the residual checks, in units of the tail's length scale.
    pub residual_radii: Vec<f64>,
}

impl Default for GreensConfig {
    fn default() -> Self {
        GreensConfig {
            ks: vec![1.0, 0.3, 0.1, 0.03, 0.01],
            reach: 100.0,
            l_max: 48,
            residual_radii: vec![0.5, 1.0, 2.0, 10.0],
        }
    }
}

/// Reference tail `η(A, R0)` and the knobs of the bound checks. Missing
/// `strength`/`radius` are taken from an inverse-square tail at `λ_cr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub strength: Option<f64>,
    pub radius: Option<f64>,
    /// Translated radius as a multiple of `R0`.
    pub beta: f64,
    /// Inner value `V0` of the `ξ` tail in the sandwich check.
    pub inner: f64,
    /// Translated radius for the envelope; the smallest admissible power of two when absent.
    pub radius_tilde: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    /// The near-threshold state used by the envelope and Birman–Schwinger checks sits at `-state_energy`.
    pub state_energy: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { strength: None, radius: None, radius_tilde: None, beta: 10.0, inner: 1.0, samples: 200, seed: 1, state_energy: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem4Config {
    pub k_max: f64,
    pub k_min: f64,
    pub count: usize,
    /// The trial function is the ground state at `-trial_energy`.
    pub trial_energy: f64,
}

impl Default for Theorem4Config {
    fn default() -> Self {
        Theorem4Config { k_max: 1e-1, k_min: 1e-4, count: 13, trial_energy: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub l: u32,
    /// Node count of the state followed by `solve`.
    #[serde(default)]
    pub nodes: usize,
    #[serde(default = "ten")]
    pub probe_radius: f64,
    #[serde(default = "yes")]
    pub plots: bool,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub greens: GreensConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub theorem4: Theorem4Config,
}

fn core_none() -> Core {
    Core::None
}
fn tail_none() -> TailSpec {
    TailSpec::None
}
fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn yes() -> bool {
    true
}

fn positive(name: &str, v: f64) -> Result<(), LabError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LabError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fix the kind (a subcommand must agree with the file) and check every
    /// field that can be checked without running the numerics.
    pub fn resolve(mut self, requested: Option<ExperimentKind>) -> Result<Self, LabError> {
        self.kind = match (self.kind, requested) {
            (Some(a), Some(b)) if a != b => {
                return Err(LabError::Config(format!("config is for `{a}` but `{b}` was requested")));
            }
            (Some(a), _) | (None, Some(a)) => Some(a),
            (None, None) => return Err(LabError::Config("config has no `kind` and none was requested".into())),
        };
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind.expect("resolved config has a kind")
    }

    fn validate(&self) -> Result<(), LabError> {
        let p = &self.potential;
        RadialPotential::new(p.core.clone(), p.tail.clone(), p.coupling).map_err(|e| LabError::Config(e.to_string()))?;
        self.solver.validate().map_err(|e| LabError::Config(e.to_string()))?;
        positive("probe_radius", self.probe_radius)?;

        let s = &self.schedule;
        match &s.lambdas {
            Some(l) if l.is_empty() => return Err(LabError::Config("schedule.lambdas is empty".into())),
            Some(l) => {
                for &x in l {
                    positive("schedule.lambdas entry", x)?;
                }
            }
            None => {
                positive("schedule.e_far", s.e_far)?;
                positive("schedule.e_near", s.e_near)?;
                if !(s.e_far > s.e_near) {
                    return Err(LabError::Config("schedule.e_far must exceed schedule.e_near".into()));
                }
                if s.count < 2 {
                    return Err(LabError::Config("schedule.count must be at least 2".into()));
                }
            }
        }

        let g = &self.greens;
        if g.ks.is_empty() || g.ks.windows(2).any(|w| !(w[1] < w[0])) || g.ks.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            return Err(LabError::Config("greens.ks must be non-negative and strictly decreasing".into()));
        }
        positive("greens.reach", g.reach)?;
        for &r in &g.residual_radii {
            positive("greens.residual_radii entry", r)?;
        }

        let b = &self.bounds;
        if let Some(a) = b.strength {
            if !(a.is_finite() && a >= 0.0) {
                return Err(LabError::Config(format!("bounds.strength must be non-negative, got {a}")));
            }
        }
        if let Some(r) = b.radius {
            positive("bounds.radius", r)?;
        }
        if let Some(r) = b.radius_tilde {
            positive("bounds.radius_tilde", r)?;
        }
        if !(b.beta >= 1.0 && b.beta.is_finite()) {
            return Err(LabError::Config(format!("bounds.beta must be at least 1, got {}", b.beta)));
        }
        if !(b.inner >= 0.0 && b.inner.is_finite()) {
            return Err(LabError::Config(format!("bounds.inner must be non-negative, got {}", b.inner)));
        }
        positive("bounds.state_energy", b.state_energy)?;
        if b.samples == 0 {
            return Err(LabError::Config("bounds.samples must be positive".into()));
        }

        let t = &self.theorem4;
        positive("theorem4.k_max", t.k_max)?;
        positive("theorem4.k_min", t.k_min)?;
        positive("theorem4.trial_energy", t.trial_energy)?;
        if !(t.k_max > t.k_min) || t.count < 2 {
            return Err(LabError::Config("theorem4 needs k_max > k_min and count ≥ 2".into()));
        }
        Ok(())
    }

    /// The potential as configured, before any calibration.
    pub fn raw_potential(&self) -> RadialPotential {
        let p = &self.potential;
        RadialPotential { core: p.core.clone(), tail: p.tail.clone(), coupling: p.coupling }
    }

    /// Canonical JSON of the resolved config; the basis of the config hash.
    pub fn canonical_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "solve"
[potential]
core = { kind = "square_well", depth = 4.0, radius = 1.0 }
"#;

    #[test]
    fn defaults_are_materialized() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap().resolve(None).unwrap();
        assert_eq!(c.kind(), ExperimentKind::Solve);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.potential.tail, TailSpec::None);
        let json = c.canonical_json();
        assert_eq!(json["probe_radius"], 10.0);
        assert_eq!(json["greens"]["l_max"], 48);
        assert_eq!(json["solver"]["tol_match"], 1e-9);
        assert_eq!(json["theorem4"]["count"], 13);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(LabError::Config(_))));
        let text = MINIMAL.replace("radius = 1.0 }", "radius = 1.0, colour = 2 }");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}\n[solver]\nstep = 0.1\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let bad_tail = format!("{MINIMAL}tail = {{ kind = \"inverse_square\", strength = 2.0, radius = -1.0 }}\n");
        let c = ExperimentConfig::from_toml(&bad_tail).unwrap();
        assert!(matches!(c.resolve(None), Err(LabError::Config(_))));
        let text = format!("{MINIMAL}\n[greens]\nks = [0.1, 1.0]\n");
        assert!(ExperimentConfig::from_toml(&text).unwrap().resolve(None).is_err());
        let text = format!("{MINIMAL}\n[schedule]\ne_far = 1e-5\ne_near = 1e-1\n");
        assert!(ExperimentConfig::from_toml(&text).unwrap().resolve(None).is_err());
    }

    #[test]
    fn kind_must_agree_with_request() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert!(c.clone().resolve(Some(ExperimentKind::Sweep)).is_err());
        assert!(c.clone().resolve(Some(ExperimentKind::Solve)).is_ok());
        let no_kind = MINIMAL.replace("kind = \"solve\"\n", "");
        let c = ExperimentConfig::from_toml(&no_kind).unwrap();
        assert!(c.clone().resolve(None).is_err());
        assert_eq!(c.resolve(Some(ExperimentKind::Greens)).unwrap().kind(), ExperimentKind::Greens);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap().resolve(None).unwrap();
        let text = toml::to_string(&c).unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap().resolve(None).unwrap();
        assert_eq!(c, back);
    }
}
