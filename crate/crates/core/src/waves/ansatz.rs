//! Superposition of relaxation waves with mass-determined shifts.
//!
//! `u^a(x, t) = sum_i u^i(x - x_i, t) - (u_2 + ... + u_n)` where `u^i` is a
//! shock profile `phi^i(x - x_i - s_i t)` or the contact wave.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};
use crate::waves::contact::{ContactWave, CurveMode};
use crate::waves::fan::{WaveFan, WaveKind};
use crate::waves::profile::ShockProfile;

#[derive(Debug, Clone)]
pub enum Wave {
    Shock(ShockProfile),
    Contact(ContactWave),
}

/// `u^a` and its derivatives at one point.
#[derive(Debug, Clone)]
pub struct AnsatzPoint {
    pub u: State,
    pub u_x: State,
    pub u_t: State,
    pub u_xx: State,
    pub u_tt: State,
}

/// Values of one wave `u^i(x - x_i, t)`.
#[derive(Debug, Clone)]
pub struct WavePoint {
    pub u: State,
    pub u_x: State,
    pub u_t: State,
    pub u_xx: State,
    pub u_tt: State,
}

#[derive(Debug, Clone)]
pub struct Ansatz {
    model: FluxModel,
    pub a: f64,
    pub fan: WaveFan,
    pub waves: Vec<Wave>,
    pub shifts: Vec<f64>,
    /// `u_2 + ... + u_n`.
    interior_sum: State,
    /// `f(u_2) + ... + f(u_n)`.
    interior_flux_sum: State,
}

/// Distance of the wave pattern from the domain boundary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryClearance {
    /// Smallest number of decay lengths between a wave and a boundary.
    pub min_efolds: f64,
    pub worst_wave: usize,
    pub worst_time: f64,
}

impl Ansatz {
    /// Builds profiles and the contact wave for every wave of `fan`; all
    /// shifts start at zero.
    pub fn new(model: &FluxModel, a: f64, fan: WaveFan, mode: CurveMode) -> Result<Self> {
        let n = fan.n();
        let mut waves = Vec::with_capacity(n);
        for i in 0..n {
            waves.push(match fan.kinds[i] {
                WaveKind::Shock => Wave::Shock(ShockProfile::from_fan(model, a, &fan, i)?),
                WaveKind::Contact => Wave::Contact(ContactWave::between(
                    model,
                    a,
                    &fan.states[i],
                    &fan.states[i + 1],
                    fan.speeds[i],
                    i,
                    mode,
                )?),
            });
        }
        let dim = model.dim();
        let mut interior_sum = DVector::zeros(dim);
        let mut interior_flux_sum = DVector::zeros(dim);
        for u in &fan.states[1..n] {
            interior_sum += u;
            interior_flux_sum += model.flux(u.as_slice());
        }
        Ok(Self {
            model: model.clone(),
            a,
            shifts: vec![0.0; n],
            fan,
            waves,
            interior_sum,
            interior_flux_sum,
        })
    }

    pub fn with_shifts(mut self, shifts: Vec<f64>) -> Result<Self> {
        if shifts.len() != self.fan.n() {
            return Err(Error::Usage(format!(
                "expected {} shifts, got {}",
                self.fan.n(),
                shifts.len()
            )));
        }
        self.shifts = shifts;
        Ok(self)
    }

    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.fan.n()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn u_minus(&self) -> &State {
        self.fan.u_minus()
    }

    pub fn u_plus(&self) -> &State {
        self.fan.u_plus()
    }

    /// The contact wave of field `p` (the requested contact field, or the
    /// first contact of the fan).
    pub fn contact(&self) -> Option<&ContactWave> {
        match self.waves.get(self.contact_field()?) {
            Some(Wave::Contact(c)) => Some(c),
            _ => None,
        }
    }

    pub fn contact_field(&self) -> Option<usize> {
        self.fan
            .contact
            .or_else(|| self.waves.iter().position(|w| matches!(w, Wave::Contact(_))))
    }

    pub fn profile(&self, i: usize) -> Option<&ShockProfile> {
        match self.waves.get(i) {
            Some(Wave::Shock(p)) => Some(p),
            _ => None,
        }
    }

    /// `u^i(x - x_i, t)` with derivatives.
    pub fn wave_point(&self, i: usize, x: f64, t: f64) -> WavePoint {
        let y = x - self.shifts[i];
        match &self.waves[i] {
            Wave::Shock(p) => {
                let s = p.speed;
                let (phi, d1, d2) = p.derivatives(y - s * t);
                WavePoint {
                    u_t: &d1 * (-s),
                    u_tt: &d2 * (s * s),
                    u_x: d1,
                    u_xx: d2,
                    u: phi,
                }
            }
            Wave::Contact(c) => {
                let q = c.point(y, t);
                WavePoint {
                    u: q.u,
                    u_x: q.u_x,
                    u_t: q.u_t,
                    u_xx: q.u_xx,
                    u_tt: q.u_tt,
                }
            }
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> AnsatzPoint {
        self.eval_parts(x, t).0
    }

    /// The point together with `sum f(u^i)` and `sum_shocks s_i^2 phi_i'`.
    fn eval_parts(&self, x: f64, t: f64) -> (AnsatzPoint, State, State) {
        let d = self.dim();
        let mut out = AnsatzPoint {
            u: -&self.interior_sum,
            u_x: DVector::zeros(d),
            u_t: DVector::zeros(d),
            u_xx: DVector::zeros(d),
            u_tt: DVector::zeros(d),
        };
        let mut flux_sum = DVector::zeros(d);
        let mut s2_phi = DVector::zeros(d);
        for i in 0..self.n() {
            let w = self.wave_point(i, x, t);
            flux_sum += self.model.flux(w.u.as_slice());
            if let Wave::Shock(p) = &self.waves[i] {
                s2_phi += &w.u_x * (p.speed * p.speed);
            }
            out.u += w.u;
            out.u_x += w.u_x;
            out.u_t += w.u_t;
            out.u_xx += w.u_xx;
            out.u_tt += w.u_tt;
        }
        (out, flux_sum, s2_phi)
    }

    pub fn u(&self, x: f64, t: f64) -> State {
        let mut u = -&self.interior_sum;
        for i in 0..self.n() {
            let y = x - self.shifts[i];
            u += match &self.waves[i] {
                Wave::Shock(p) => p.phi(y - p.speed * t),
                Wave::Contact(c) => c.u(y, t),
            };
        }
        u
    }

    /// `E1 = f(u^a) - [sum f(u^i) - sum_{i>=2} f(u_i)]`.
    pub fn e1(&self, x: f64, t: f64) -> State {
        let (p, flux_sum, _) = self.eval_parts(x, t);
        self.model.flux(p.u.as_slice()) - flux_sum + &self.interior_flux_sum
    }

    /// `E2 = int_{-inf}^x u^p_tt`, summed over contact waves.
    pub fn e2(&self, x: f64, t: f64) -> State {
        let mut e2 = DVector::zeros(self.dim());
        for (i, w) in self.waves.iter().enumerate() {
            if let Wave::Contact(c) = w {
                e2 += c.e2(x - self.shifts[i], t);
            }
        }
        e2
    }

    pub fn error_terms(&self, x: f64, t: f64) -> (State, State) {
        (self.e1(x, t), self.e2(x, t))
    }

    /// `v^a = f(u^a) - a^2 u^a_x + int_{-inf}^x u^a_tt - E1 - E2`.
    ///
    /// The integral of `u^a_tt` is `sum_shocks s_i^2 phi_i' + E2`, so `E2`
    /// cancels and `v^a` needs no quadrature.
    pub fn v(&self, x: f64, t: f64) -> State {
        let (p, flux_sum, s2_phi) = self.eval_parts(x, t);
        let f = self.model.flux(p.u.as_slice());
        let e1 = &f - flux_sum + &self.interior_flux_sum;
        f - &p.u_x * (self.a * self.a) + s2_phi - e1
    }

    /// `(u^a, v^a)` at one point.
    pub fn uv(&self, x: f64, t: f64) -> (State, State) {
        let (p, flux_sum, s2_phi) = self.eval_parts(x, t);
        let f = self.model.flux(p.u.as_slice());
        let e1 = &f - flux_sum + &self.interior_flux_sum;
        let v = f - &p.u_x * (self.a * self.a) + s2_phi - e1;
        (p.u, v)
    }

    /// Minimum over waves and `t in [0, t_end]` of the decay lengths between
    /// each wave and the nearer boundary of `[-half_width, half_width]`.
    ///
    /// A shock decays like `exp(-mu |xi|)` with its tail rates; the contact
    /// tail is Gaussian, `exp(-d^2 / (2 sigma^2))`.
    pub fn boundary_clearance(&self, half_width: f64, t_end: f64) -> BoundaryClearance {
        let mut out = BoundaryClearance {
            min_efolds: f64::INFINITY,
            worst_wave: 0,
            worst_time: 0.0,
        };
        for k in 0..=64 {
            let t = t_end * k as f64 / 64.0;
            for (i, w) in self.waves.iter().enumerate() {
                let (center, efolds) = match w {
                    Wave::Shock(p) => {
                        let c = self.shifts[i] + p.speed * t;
                        let left = (c + half_width) * p.rate_left;
                        let right = (half_width - c) * p.rate_right;
                        (c, left.min(right))
                    }
                    Wave::Contact(c) => {
                        let center = self.shifts[i] + c.speed * t;
                        let d = half_width - center.abs();
                        let sigma = c.sigma(t);
                        (center, if d > 0.0 { d * d / (2.0 * sigma * sigma) } else { 0.0 })
                    }
                };
                let efolds = if center.abs() >= half_width { 0.0 } else { efolds };
                if efolds < out.min_efolds {
                    out = BoundaryClearance {
                        min_efolds: efolds,
                        worst_wave: i,
                        worst_time: t,
                    };
                }
            }
        }
        out
    }
}

/// Jump matrix with columns `u_{i+1} - u_i`.
pub fn jump_matrix(fan: &WaveFan) -> DMatrix<f64> {
    let n = fan.n();
    let d = fan.states[0].len();
    let mut j = DMatrix::zeros(d, n);
    for i in 0..n {
        j.set_column(i, &fan.jump(i));
    }
    j
}

/// Shifts `x_i` making the perturbation `u0 - u^a(., 0)` mass free on the
/// grid `xs` with spacing `dx`; `u0` is stored cell-major (`u0[j * n + c]`).
///
/// The linear solve `sum_i x_i (u_{i+1} - u_i) = -int (u0 - u_bar)` is
/// refined by Newton steps on the discrete mass residual.
pub fn compute_shifts(ansatz: &Ansatz, xs: &[f64], dx: f64, u0: &[f64]) -> Result<Vec<f64>> {
    let d = ansatz.dim();
    let n = ansatz.n();
    if u0.len() != xs.len() * d {
        return Err(Error::Usage("sampled u0 does not match the grid".into()));
    }
    if n != d {
        return Err(Error::Usage("shift solve needs as many waves as components".into()));
    }
    let jump = jump_matrix(&ansatz.fan);
    let sv = jump.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Degeneracy {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let lu = jump.clone().lu();
    let mass_residual = |a: &Ansatz| -> State {
        let mut m = DVector::zeros(d);
        for (j, &x) in xs.iter().enumerate() {
            let ua = a.u(x, 0.0);
            for c in 0..d {
                m[c] += (u0[j * d + c] - ua[c]) * dx;
            }
        }
        m
    };
    let mut work = ansatz.clone().with_shifts(vec![0.0; n])?;
    let scale = 1.0 + u0.iter().map(|v| v.abs()).sum::<f64>() * dx;
    let mut history = Vec::new();
    for _ in 0..8 {
        let r = mass_residual(&work);
        history.push(r.amax());
        if r.amax() < 1e-13 * scale {
            break;
        }
        // r(x) = mass + J x, so the Newton step is -J^{-1} r.
        let step = lu
            .solve(&(-&r))
            .ok_or(Error::Degeneracy { condition: f64::INFINITY })?;
        let shifts: Vec<f64> = work.shifts.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        work.shifts = shifts;
    }
    let final_res = mass_residual(&work).amax();
    if final_res > 1e-10 * scale {
        history.push(final_res);
        return Err(Error::Convergence {
            stage: "shift computation".into(),
            history,
        });
    }
    Ok(work.shifts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::fan::{build_fan, solve_riemann_fan, FanDesign};

    fn v(x: &[f64]) -> State {
        DVector::from_column_slice(x)
    }

    fn euler_ansatz() -> Ansatz {
        let m = FluxModel::euler(1.4).unwrap();
        let fan = build_fan(
            &m,
            &FanDesign {
                anchor: v(&[1.0, 0.0, 2.5]),
                anchor_index: 1,
                strengths: vec![0.05; 3],
                contact: Some(1),
            },
        )
        .unwrap();
        Ansatz::new(&m, 2.0, fan, CurveMode::Auto)
            .unwrap()
            .with_shifts(vec![0.3, -0.2, 0.1])
            .unwrap()
    }

    #[test]
    fn far_fields_and_single_wave() {
        let m = FluxModel::burgers();
        let fan = solve_riemann_fan(&m, &v(&[1.0]), &v(&[0.0]), None).unwrap();
        let ans = Ansatz::new(&m, 1.0, fan, CurveMode::Auto).unwrap();
        assert!((ans.u(-200.0, 3.0)[0] - 1.0).abs() < 1e-14);
        assert!(ans.u(200.0, 3.0)[0].abs() < 1e-14);
        assert!(ans.e1(0.3, 2.0).amax() < 1e-15);
        // v^a = f(phi) - (a^2 - s^2) phi'
        let (x, t) = (0.4, 1.0);
        let p = ans.profile(0).unwrap();
        let (phi, d1, _) = p.derivatives(x - 0.5 * t);
        let closed = 0.5 * phi[0] * phi[0] - 0.75 * d1[0];
        assert!((ans.v(x, t)[0] - closed).abs() < 1e-14);
    }

    #[test]
    fn conservation_identity_holds() {
        let ans = euler_ansatz();
        let h = 1e-4;
        for (x, t) in [(-3.0, 0.5), (0.0, 2.0), (1.7, 5.0), (10.0, 1.0)] {
            let ut = (ans.u(x, t + h) - ans.u(x, t - h)) / (2.0 * h);
            let vx = (ans.v(x + h, t) - ans.v(x - h, t)) / (2.0 * h);
            assert!((&ut + vx).amax() < 1e-8, "at ({x}, {t})");
            assert!((ut - ans.eval(x, t).u_t).amax() < 1e-8);
        }
    }

    #[test]
    fn ansatz_equation_holds() {
        let ans = euler_ansatz();
        let m = ans.model().clone();
        let a2 = ans.a * ans.a;
        let h = 1e-4;
        for (x, t) in [(-2.0, 0.5), (0.4, 2.0), (3.0, 4.0)] {
            let p = ans.eval(x, t);
            let fx = (m.flux(ans.u(x + h, t).as_slice()) - m.flux(ans.u(x - h, t).as_slice())) / (2.0 * h);
            let e = |y: f64| {
                let (e1, e2) = ans.error_terms(y, t);
                e1 + e2
            };
            let ex = (e(x + h) - e(x - h)) / (2.0 * h);
            let res = &p.u_t + fx - &p.u_xx * a2 + &p.u_tt - ex;
            assert!(res.amax() < 1e-6, "residual {} at ({x}, {t})", res.amax());
        }
    }

    #[test]
    fn burgers_shift_absorbs_mass() {
        let m = FluxModel::burgers();
        let fan = solve_riemann_fan(&m, &v(&[1.0]), &v(&[0.0]), None).unwrap();
        let ans = Ansatz::new(&m, 1.0, fan, CurveMode::Auto).unwrap();
        let (nx, half) = (4000, 40.0);
        let dx = 2.0 * half / nx as f64;
        let xs: Vec<f64> = (0..nx).map(|j| -half + (j as f64 + 0.5) * dx).collect();
        let bump = |x: f64| 0.2 / (2.0 * std::f64::consts::PI).sqrt() * (-(x - 1.0) * (x - 1.0) / 2.0).exp();
        let u0: Vec<f64> = xs.iter().map(|&x| ans.u(x, 0.0)[0] + bump(x)).collect();
        let shifts = compute_shifts(&ans, &xs, dx, &u0).unwrap();
        assert!((shifts[0] - 0.2).abs() < 1e-9, "{}", shifts[0]);
    }

    #[test]
    fn linear_orthogonal_jumps() {
        let m = FluxModel::linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let fan = solve_riemann_fan(&m, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), Some(0)).unwrap();
        let ans = Ansatz::new(&m, 2.0, fan, CurveMode::Auto).unwrap();
        let (nx, half) = (4000, 60.0);
        let dx = 2.0 * half / nx as f64;
        let xs: Vec<f64> = (0..nx).map(|j| -half + (j as f64 + 0.5) * dx).collect();
        let mass = [0.3, -0.1];
        let mut u0 = Vec::new();
        for &x in &xs {
            let g = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let ua = ans.u(x, 0.0);
            u0.push(ua[0] + mass[0] * g);
            u0.push(ua[1] + mass[1] * g);
        }
        let shifts = compute_shifts(&ans, &xs, dx, &u0).unwrap();
        let jump = jump_matrix(&ans.fan);
        for i in 0..2 {
            let col = jump.column(i);
            let expect = -(col[0] * mass[0] + col[1] * mass[1]) / col.norm_squared();
            assert!((shifts[i] - expect).abs() < 1e-8, "{i}: {} vs {expect}", shifts[i]);
        }
    }
}
