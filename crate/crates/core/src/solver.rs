//! Finite-volume integration of the relaxation system
//!
//! ```text
//! u_t + v_x = 0,    v_t + a^2 u_x = (f(u) - v) / eps
//! ```
//!
//! on `[-X, X]`. Transport is upwinded on the Riemann invariants
//! `w± = v ± a u` (speeds `±a`), optionally with MUSCL–Hancock minmod
//! reconstruction; the source is split off and applied exactly.

use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::waves::ansatz::{Ansatz, BoundaryClearance};

/// Relaxation-width clearance required at setup.
pub const SETUP_EFOLDS: f64 = 10.0;
/// Clearance below which a run is flagged for boundary contamination.
pub const WARN_EFOLDS: f64 = 5.0;
/// Far-field mismatch tolerated in the initial state.
pub const FAR_FIELD_TOL: f64 = 1e-8;

const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    #[serde(rename = "order-1")]
    Order1,
    #[default]
    #[serde(rename = "order-2")]
    Order2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMode {
    Explicit,
    #[default]
    ImplicitExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub source: SourceMode,
    /// Domain half-width `X`.
    pub half_width: f64,
    pub cells: usize,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Order2,
            cfl: 0.9,
            source: SourceMode::ImplicitExact,
            half_width: 100.0,
            cells: 8000,
            t_end: 200.0,
            snapshot_times: vec![0.0, 12.5, 25.0, 50.0, 100.0, 150.0, 200.0],
            eps: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Usage(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Usage(format!("half_width must be positive, got {}", self.half_width)));
        }
        if self.cells < 4 {
            return Err(Error::Usage(format!("need at least 4 cells, got {}", self.cells)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Usage(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Usage(format!("eps must be positive, got {}", self.eps)));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return Err(Error::Usage("snapshot times must lie in [0, t_end]".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("snapshot times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn x0(&self) -> f64 {
        -self.half_width
    }

    /// Cell centers `x0 + (j + 1/2) dx`.
    pub fn centers(&self) -> Vec<f64> {
        let (x0, dx) = (self.x0(), self.dx());
        (0..self.cells).map(|j| x0 + (j as f64 + 0.5) * dx).collect()
    }
}

/// Cell averages of `(u, v)`; component `c` of cell `j` is at `j * n + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub a: f64,
    pub eps: f64,
}

impl GridState {
    pub fn cells(&self) -> usize {
        self.u.len() / self.n
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }

    pub fn u_at(&self, j: usize) -> &[f64] {
        &self.u[j * self.n..(j + 1) * self.n]
    }

    pub fn v_at(&self, j: usize) -> &[f64] {
        &self.v[j * self.n..(j + 1) * self.n]
    }

    /// `sum_j u_j dx` per component.
    pub fn mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (k, val) in self.u.iter().enumerate() {
            m[k % self.n] += val * self.dx;
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|v| v.is_finite())
    }
}

/// `dt = cfl dx / a`.
pub fn cfl_dt(state: &GridState, cfl: f64) -> f64 {
    cfl * state.dx / state.a
}

/// Far-field constants used in the ghost cells.
#[derive(Debug, Clone)]
pub struct FarField {
    pub u_left: Vec<f64>,
    pub v_left: Vec<f64>,
    pub u_right: Vec<f64>,
    pub v_right: Vec<f64>,
}

impl FarField {
    /// Equilibrium far field `(u_±, f(u_±))`.
    pub fn equilibrium(model: &FluxModel, u_left: &[f64], u_right: &[f64]) -> Self {
        Self {
            u_left: u_left.to_vec(),
            v_left: model.flux(u_left).as_slice().to_vec(),
            u_right: u_right.to_vec(),
            v_right: model.flux(u_right).as_slice().to_vec(),
        }
    }
}

/// Stepper holding the model, configuration and scratch buffers.
#[derive(Debug, Clone)]
pub struct Solver {
    model: FluxModel,
    pub config: SolverConfig,
    pub far: FarField,
    wp: Vec<f64>,
    wm: Vec<f64>,
    sp: Vec<f64>,
    sm: Vec<f64>,
    fu: Vec<f64>,
    fv: Vec<f64>,
    fbuf: Vec<f64>,
}

/// Boundary transport of one step: `dt (F_u(left) - F_u(right))`.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub dt: f64,
    pub boundary_inflow: Vec<f64>,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Solver {
    pub fn new(model: &FluxModel, config: SolverConfig, far: FarField) -> Result<Self> {
        config.validate()?;
        let n = model.dim();
        if far.u_left.len() != n || far.u_right.len() != n {
            return Err(Error::Usage("far-field states have the wrong length".into()));
        }
        let ext = (config.cells + 2 * GHOSTS) * n;
        let faces = (config.cells + 1) * n;
        Ok(Self {
            model: model.clone(),
            config,
            far,
            wp: vec![0.0; ext],
            wm: vec![0.0; ext],
            sp: vec![0.0; ext],
            sm: vec![0.0; ext],
            fu: vec![0.0; faces],
            fv: vec![0.0; faces],
            fbuf: vec![0.0; n],
        })
    }

    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    /// Relaxes `v` towards `f(u)` over `dt`.
    fn source(&mut self, state: &mut GridState, dt: f64) {
        let n = state.n;
        let decay = (-dt / state.eps).exp();
        let explicit = self.config.source == SourceMode::Explicit;
        for j in 0..state.cells() {
            let range = j * n..(j + 1) * n;
            self.model.flux_into(&state.u[range.clone()], &mut self.fbuf);
            for (c, k) in range.enumerate() {
                let f = self.fbuf[c];
                state.v[k] = if explicit {
                    state.v[k] + dt / state.eps * (f - state.v[k])
                } else {
                    f + (state.v[k] - f) * decay
                };
            }
        }
    }

    /// Conservative upwind transport of `w±` over `dt`; returns the
    /// `u`-inflow through the two boundaries.
    fn transport(&mut self, state: &mut GridState, dt: f64) -> Vec<f64> {
        let n = state.n;
        let cells = state.cells();
        let a = state.a;
        let nu = a * dt / state.dx;
        // Extended invariants with ghost cells.
        for e in 0..cells + 2 * GHOSTS {
            for c in 0..n {
                let (u, v) = if e < GHOSTS {
                    (self.far.u_left[c], self.far.v_left[c])
                } else if e >= cells + GHOSTS {
                    (self.far.u_right[c], self.far.v_right[c])
                } else {
                    let k = (e - GHOSTS) * n + c;
                    (state.u[k], state.v[k])
                };
                self.wp[e * n + c] = v + a * u;
                self.wm[e * n + c] = v - a * u;
            }
        }
        let half = 0.5 * (1.0 - nu);
        if self.config.scheme == Scheme::Order2 {
            for e in 1..cells + 2 * GHOSTS - 1 {
                for c in 0..n {
                    let k = e * n + c;
                    self.sp[k] = minmod(self.wp[k] - self.wp[k - n], self.wp[k + n] - self.wp[k]);
                    self.sm[k] = minmod(self.wm[k] - self.wm[k - n], self.wm[k + n] - self.wm[k]);
                }
            }
        } else {
            self.sp.iter_mut().for_each(|s| *s = 0.0);
            self.sm.iter_mut().for_each(|s| *s = 0.0);
        }
        // Face f sits between extended cells GHOSTS - 1 + f and GHOSTS + f.
        for f in 0..=cells {
            let l = (GHOSTS - 1 + f) * n;
            let r = (GHOSTS + f) * n;
            for c in 0..n {
                let wp = self.wp[l + c] + half * self.sp[l + c];
                let wm = self.wm[r + c] - half * self.sm[r + c];
                self.fu[f * n + c] = 0.5 * (wp + wm);
                self.fv[f * n + c] = 0.5 * a * (wp - wm);
            }
        }
        let lambda = dt / state.dx;
        for j in 0..cells {
            for c in 0..n {
                let k = j * n + c;
                state.u[k] -= lambda * (self.fu[(j + 1) * n + c] - self.fu[j * n + c]);
                state.v[k] -= lambda * (self.fv[(j + 1) * n + c] - self.fv[j * n + c]);
            }
        }
        (0..n).map(|c| dt * (self.fu[c] - self.fu[cells * n + c])).collect()
    }

    /// Advances `state` by `dt` (Strang splitting for order 2, Lie for order 1).
    pub fn step(&mut self, state: &mut GridState, dt: f64) -> Result<StepInfo> {
        let limit = cfl_dt(state, 1.0) * (1.0 + 1e-12);
        if !(dt > 0.0 && dt <= limit) {
            return Err(Error::Usage(format!("time step {dt} outside (0, {limit}]")));
        }
        let inflow = match self.config.scheme {
            Scheme::Order2 => {
                self.source(state, 0.5 * dt);
                let inflow = self.transport(state, dt);
                self.source(state, 0.5 * dt);
                inflow
            }
            Scheme::Order1 => {
                let inflow = self.transport(state, dt);
                self.source(state, dt);
                inflow
            }
        };
        state.t += dt;
        if !state.is_finite() {
            return Err(Error::BlowUp { time: state.t });
        }
        Ok(StepInfo {
            dt,
            boundary_inflow: inflow,
        })
    }
}

/// Grid samples of one time instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `min (a - |lambda_i(u_j)|)` over cells and fields.
    pub subcharacteristic_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassRecord {
    pub t: f64,
    pub mass: Vec<f64>,
    /// Accumulated boundary inflow since `t = 0`.
    pub inflow: Vec<f64>,
    /// `mass - mass(0) - inflow`.
    pub defect: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunFlags {
    pub boundary_contamination: bool,
    pub min_boundary_efolds: f64,
    pub subcharacteristic_ok: bool,
    pub min_subcharacteristic_margin: f64,
    /// Largest single-step `|mass change - boundary inflow|` relative to
    /// `1 + |mass|`.
    pub max_step_mass_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub a: f64,
    pub eps: f64,
    pub snapshots: Vec<Snapshot>,
    pub mass_ledger: Vec<MassRecord>,
    pub flags: RunFlags,
    pub steps: usize,
}

impl Trajectory {
    pub fn cells(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.u.len() / self.n)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }

    pub fn state(&self, k: usize) -> GridState {
        let s = &self.snapshots[k];
        GridState {
            x0: self.x0,
            dx: self.dx,
            n: self.n,
            u: s.u.clone(),
            v: s.v.clone(),
            t: s.t,
            a: self.a,
            eps: self.eps,
        }
    }
}

/// `min (a - |lambda_i(u_j)|)` over all cells.
pub fn subcharacteristic_margin(model: &FluxModel, state: &GridState) -> f64 {
    let mut margin = f64::INFINITY;
    for j in 0..state.cells() {
        match eigen::eigenvalues(model, state.u_at(j)) {
            Ok(l) => margin = margin.min(state.a - l.amax()),
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    margin
}

/// Integrates to `config.t_end`, recording snapshots at the configured times.
///
/// `clearance` is the wave-to-boundary distance in decay lengths, when
/// known, and only feeds the contamination flag.
pub fn run(solver: &mut Solver, state0: GridState, clearance: Option<f64>) -> Result<Trajectory> {
    let mut state = state0;
    let cfg = solver.config.clone();
    let m0 = state.mass();
    let mut inflow = vec![0.0; state.n];
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    let mut ledger = Vec::new();
    let mut max_defect = 0.0f64;
    let mut steps = 0usize;
    let base_dt = cfl_dt(&state, cfg.cfl);
    let mut targets = cfg.snapshot_times.iter().copied().peekable();
    let model = solver.model().clone();
    let record = |state: &GridState, inflow: &[f64], snaps: &mut Vec<Snapshot>, ledger: &mut Vec<MassRecord>| {
        let mass = state.mass();
        let defect = (0..state.n).map(|c| mass[c] - m0[c] - inflow[c]).collect();
        ledger.push(MassRecord {
            t: state.t,
            mass,
            inflow: inflow.to_vec(),
            defect,
        });
        snaps.push(Snapshot {
            t: state.t,
            u: state.u.clone(),
            v: state.v.clone(),
            subcharacteristic_margin: subcharacteristic_margin(&model, state),
        });
    };
    while let Some(&target) = targets.peek() {
        if target <= state.t + 1e-12 * (1.0 + target) {
            state.t = state.t.max(target);
            record(&state, &inflow, &mut snapshots, &mut ledger);
            targets.next();
            continue;
        }
        let remaining = target - state.t;
        let dt = if remaining <= base_dt * (1.0 + 1e-9) { remaining } else { base_dt };
        let before = state.mass();
        let info = solver.step(&mut state, dt)?;
        if dt == remaining {
            state.t = target;
        }
        steps += 1;
        let after = state.mass();
        for c in 0..state.n {
            inflow[c] += info.boundary_inflow[c];
            let d = (after[c] - before[c] - info.boundary_inflow[c]).abs() / (1.0 + after[c].abs());
            max_defect = max_defect.max(d);
        }
    }
    // Advance past the last snapshot to t_end if needed.
    while state.t < cfg.t_end - 1e-12 * (1.0 + cfg.t_end) {
        let dt = base_dt.min(cfg.t_end - state.t);
        solver.step(&mut state, dt)?;
        steps += 1;
    }
    let min_margin = snapshots
        .iter()
        .map(|s| s.subcharacteristic_margin)
        .fold(f64::INFINITY, f64::min);
    let efolds = clearance.unwrap_or(f64::INFINITY);
    Ok(Trajectory {
        x0: state.x0,
        dx: state.dx,
        n: state.n,
        a: state.a,
        eps: state.eps,
        snapshots,
        mass_ledger: ledger,
        flags: RunFlags {
            boundary_contamination: efolds < WARN_EFOLDS,
            min_boundary_efolds: efolds,
            subcharacteristic_ok: min_margin > 0.0,
            min_subcharacteristic_margin: min_margin,
            max_step_mass_defect: max_defect,
        },
        steps,
    })
}

/// Checks that every wave stays at least [`SETUP_EFOLDS`] decay lengths
/// from the boundaries over `[0, t_end]`.
pub fn check_domain(config: &SolverConfig, ansatz: &Ansatz) -> Result<BoundaryClearance> {
    let c = ansatz.boundary_clearance(config.half_width, config.t_end);
    if c.min_efolds < SETUP_EFOLDS {
        return Err(Error::Setup(format!(
            "wave {} is only {:.2} decay lengths from the boundary at t = {:.3}; enlarge the domain",
            c.worst_wave, c.min_efolds, c.worst_time
        )));
    }
    Ok(c)
}

/// `(u, v)` from cell-center samples of `u^a + du` and `v^a + dv`, with the
/// far-field values checked against `(u_±, f(u_±))`.
pub fn init_state<P>(config: &SolverConfig, ansatz: &Ansatz, perturbation: P) -> Result<GridState>
where
    P: Fn(f64, &[f64], &[f64]) -> (Vec<f64>, Vec<f64>),
{
    config.validate()?;
    let n = ansatz.dim();
    let xs = config.centers();
    let mut u = Vec::with_capacity(xs.len() * n);
    let mut v = Vec::with_capacity(xs.len() * n);
    for &x in &xs {
        let (ua, va) = ansatz.uv(x, 0.0);
        let (du, dv) = perturbation(x, ua.as_slice(), va.as_slice());
        for c in 0..n {
            u.push(ua[c] + du[c]);
            v.push(va[c] + dv[c]);
        }
    }
    let state = GridState {
        x0: config.x0(),
        dx: config.dx(),
        n,
        u,
        v,
        t: 0.0,
        a: ansatz.a,
        eps: config.eps,
    };
    check_far_field(&state, ansatz)?;
    Ok(state)
}

/// Rejects states whose end cells differ from the far-field equilibria.
pub fn check_far_field(state: &GridState, ansatz: &Ansatz) -> Result<()> {
    let model = ansatz.model();
    let last = state.cells() - 1;
    for (j, target) in [(0, ansatz.u_minus()), (last, ansatz.u_plus())] {
        let f = model.flux(target.as_slice());
        let du = state.u_at(j).iter().zip(target.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dv = state.v_at(j).iter().zip(f.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if du.max(dv) > FAR_FIELD_TOL {
            return Err(Error::Setup(format!(
                "initial state differs from the far field by {:e} at x = {}",
                du.max(dv),
                state.x(j)
            )));
        }
    }
    Ok(())
}
