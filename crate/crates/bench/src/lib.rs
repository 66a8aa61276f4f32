//! Fixtures shared by the benchmarks.

use threshold_core::experiments::calibrated_family;
use threshold_core::{Core, RadialPotential, SolverConfig, TailSpec};

pub fn square_well() -> RadialPotential {
    RadialPotential::new(Core::square_well(4.0, 1.0), TailSpec::None, 1.0).expect("valid potential")
}

/// Unit well plus `A/r²` beyond `r = 1`, calibrated so threshold sits at `λ = 1`.
pub fn tail_family(strength: f64) -> RadialPotential {
    calibrated_family(Core::square_well(1.0, 1.0), TailSpec::inverse_square(strength, 1.0), 0, &SolverConfig::default())
        .expect("calibration")
}
