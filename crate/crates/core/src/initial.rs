//! Perturbed initial data and the shift-corrected setup of a run.

use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};
use crate::solver::{self, FarField, GridState, Solver, SolverConfig};
use crate::waves::ansatz::{compute_shifts, Ansatz, BoundaryClearance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Gaussian,
    CompactBump,
    #[default]
    None,
}

/// How the `v` component of the initial data is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VPerturbation {
    /// `v0 = v_bar + f(u0) - f(u_bar)`.
    #[default]
    Equilibrium,
    /// `v0 = v_bar`.
    Zero,
}

/// Direction of `du` in state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `(1, ..., 1) / sqrt(n)`.
    #[default]
    Uniform,
    /// Normalized sum of the unit right eigenvectors at `u^a(center, 0)`,
    /// so that every family receives a share of the perturbation.
    Eigen,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub shape: Shape,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Use the zero-mass variant of the shape.
    pub mass_free: bool,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub v_mode: VPerturbation,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            shape: Shape::None,
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
            mass_free: false,
            direction: Direction::Uniform,
            v_mode: VPerturbation::Equilibrium,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.shape != Shape::None && !(self.width > 0.0) {
            return Err(Error::Usage(format!("perturbation width must be positive, got {}", self.width)));
        }
        if !self.amplitude.is_finite() || !self.center.is_finite() {
            return Err(Error::Usage("perturbation amplitude and center must be finite".into()));
        }
        if let Direction::Custom(d) = &self.direction {
            if d.len() != n {
                return Err(Error::Usage(format!("perturbation direction needs {n} components")));
            }
            if d.iter().map(|v| v * v).sum::<f64>() == 0.0 {
                return Err(Error::Usage("perturbation direction is zero".into()));
            }
        }
        Ok(())
    }

    /// Scalar profile `g(x)`, so that `du = g(x) * direction`.
    pub fn profile(&self, x: f64) -> f64 {
        let (a, c, w) = (self.amplitude, self.center, self.width);
        let y = (x - c) / w;
        match (self.shape, self.mass_free) {
            (Shape::None, _) => 0.0,
            (Shape::Gaussian, false) => a * (-0.5 * y * y).exp(),
            // Peak value `a` at `y = 1`.
            (Shape::Gaussian, true) => a * y * (0.5 - 0.5 * y * y).exp(),
            (Shape::CompactBump, false) if y.abs() < 1.0 => a * (0.5 * std::f64::consts::PI * y).cos().powi(2),
            (Shape::CompactBump, true) if y.abs() < 1.0 => a * (std::f64::consts::PI * y).sin(),
            (Shape::CompactBump, _) => 0.0,
        }
    }

    /// Unit direction of `du`; `Eigen` uses the eigenvectors at `u_center`.
    pub fn unit_direction(&self, model: &FluxModel, u_center: &[f64]) -> Result<Vec<f64>> {
        let n = u_center.len();
        let d = match &self.direction {
            Direction::Uniform => vec![1.0; n],
            Direction::Custom(d) => d.clone(),
            Direction::Eigen => {
                let e = eigen::eigensystem(model, u_center)?;
                (0..n).map(|c| (0..n).map(|i| e.right[(c, i)]).sum()).collect()
            }
        };
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Usage("perturbation direction is zero".into()));
        }
        Ok(d.into_iter().map(|v| v / norm).collect())
    }
}

/// Everything needed to integrate one perturbed run.
#[derive(Debug, Clone)]
pub struct Setup {
    /// Ansatz with the shifts absorbing the perturbation mass.
    pub ansatz: Ansatz,
    pub state: GridState,
    pub solver: Solver,
    pub clearance: BoundaryClearance,
}

/// Samples `u0 = u_bar + du`, solves for the shifts, and returns the
/// shifted ansatz with the initial grid state.
pub fn prepare(config: &SolverConfig, base: &Ansatz, spec: &PerturbationSpec) -> Result<Setup> {
    config.validate()?;
    let n = base.dim();
    spec.validate(n)?;
    let model = base.model().clone();
    let dir = spec.unit_direction(&model, base.u(spec.center, 0.0).as_slice())?;
    let xs = config.centers();
    let mut u0 = Vec::with_capacity(xs.len() * n);
    let mut v0 = Vec::with_capacity(xs.len() * n);
    for &x in &xs {
        let (ub, vb) = base.uv(x, 0.0);
        let g = spec.profile(x);
        let u: Vec<f64> = (0..n).map(|c| ub[c] + g * dir[c]).collect();
        model.admissible(&u)?;
        let dv = match spec.v_mode {
            VPerturbation::Equilibrium if g != 0.0 => model.flux(&u) - model.flux(ub.as_slice()),
            _ => nalgebra::DVector::zeros(n),
        };
        u0.extend_from_slice(&u);
        v0.extend((0..n).map(|c| vb[c] + dv[c]));
    }
    let mut samples: Vec<State> = base.fan.states.clone();
    samples.extend(u0.chunks(n).map(State::from_column_slice));
    let gate = eigen::check_subcharacteristic(&model, &samples, base.a)?;
    if !gate.pass {
        return Err(Error::Setup(format!(
            "sub-characteristic condition fails: a - |lambda_{}| = {:.3e} (a = {})",
            gate.worst_field, gate.margin, base.a
        )));
    }
    let shifts = compute_shifts(base, &xs, config.dx(), &u0)?;
    let ansatz = base.clone().with_shifts(shifts)?;
    let clearance = solver::check_domain(config, &ansatz)?;
    let state = GridState {
        x0: config.x0(),
        dx: config.dx(),
        n,
        u: u0,
        v: v0,
        t: 0.0,
        a: ansatz.a,
        eps: config.eps,
    };
    solver::check_far_field(&state, &ansatz)?;
    let far = FarField::equilibrium(&model, ansatz.u_minus().as_slice(), ansatz.u_plus().as_slice());
    let solver = Solver::new(&model, config.clone(), far)?;
    Ok(Setup {
        ansatz,
        state,
        solver,
        clearance,
    })
}
