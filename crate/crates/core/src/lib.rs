//! Relaxation shock and contact waves for the Jin-Xin system
//! `u_t + v_x = 0`, `v_t + a^2 u_x = (f(u) - v) / eps`: wave fans, traveling
//! profiles, the diffusive contact wave, a finite-volume solver and
//! stability diagnostics.

pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod flux;
pub mod initial;
pub mod interp;
pub mod ode;
pub mod solver;
pub mod special;
pub mod waves;

pub use error::{Error, Result};
pub use flux::{FluxModel, State};
pub use solver::{GridState, Scheme, Solver, SolverConfig, SourceMode, Trajectory};
pub use waves::ansatz::Ansatz;
pub use waves::contact::{ContactWave, CurveMode};
pub use waves::fan::{build_fan, solve_riemann_fan, FanDesign, WaveFan};
pub use waves::profile::ShockProfile;
