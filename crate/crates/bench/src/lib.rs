//! Fixtures shared by the benchmarks.

use relaxwave_core::flux::{Euler, FluxModel};
use relaxwave_core::initial::{prepare, Direction, PerturbationSpec, Setup, Shape};
use relaxwave_core::{build_fan, Ansatz, CurveMode, FanDesign, SolverConfig};

pub const GAMMA: f64 = 1.4;

pub fn euler() -> FluxModel {
    FluxModel::euler(GAMMA).expect("valid gamma")
}

/// Shock-contact-shock design around the low-pressure resting state.
pub fn design(strength: f64) -> FanDesign {
    FanDesign {
        anchor: Euler { gamma: GAMMA }.conserved(1.0, 0.0, 0.01),
        anchor_index: 1,
        strengths: vec![strength; 3],
        contact: Some(1),
    }
}

pub fn ansatz(strength: f64) -> Ansatz {
    let m = euler();
    let fan = build_fan(&m, &design(strength)).expect("fan");
    Ansatz::new(&m, 0.18, fan, CurveMode::Auto).expect("ansatz")
}

/// Perturbed stability run on `cells` cells, ready to step.
pub fn setup(cells: usize) -> Setup {
    let cfg = SolverConfig {
        cells,
        ..SolverConfig::default()
    };
    let spec = PerturbationSpec {
        shape: Shape::Gaussian,
        amplitude: 0.01,
        width: 1.0,
        mass_free: true,
        direction: Direction::Eigen,
        ..PerturbationSpec::default()
    };
    prepare(&cfg, &ansatz(0.05), &spec).expect("setup")
}
