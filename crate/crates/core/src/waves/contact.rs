//! Relaxation contact waves `u^p(x, t) = u(rho(x, t))`.
//!
//! `rho` solves `rho_t + s_p rho_x = a^2 rho_xx` with step data at
//! `t = -1`, so `rho = rho_- + (rho_+ - rho_-) N((x - s_p t) / (a sqrt(2(1+t))))`.
//! The curve `rho -> u(rho)` is the integral curve `du/drho = r_p(u)`
//! through the left contact state, with `rho_- = 1`.

use nalgebra::DVector;
use serde::Serialize;

use crate::eigen;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};
use crate::interp::HermiteTable;
use crate::ode::{self, Control, OdeOptions, OdeOutcome};
use crate::special::{heat_kernel_derivatives, normal_cdf};
use crate::waves::fan::{WaveFan, WaveKind};

/// Left curve parameter.
pub const RHO_MINUS: f64 = 1.0;

/// Maximum mismatch between the curve end and the right contact state.
pub const CURVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// Affine if `r_p` is constant along the chord, numeric otherwise.
    #[default]
    Auto,
    Affine,
    Numeric,
}

/// Parametrization `rho -> u(rho)` of the contact curve.
#[derive(Debug, Clone)]
pub enum ContactCurve {
    /// `u(rho) = base + (rho - rho_-) dir` with constant unit `dir = r_p`.
    Affine { base: State, dir: State },
    /// Hermite tables of `u` (slopes `r_p`) and of `r_p` (slopes `grad r_p . r_p`).
    Numeric { u: HermiteTable, r: HermiteTable },
}

/// `u` and its first three `rho`-derivatives.
#[derive(Debug, Clone)]
pub struct CurveJet {
    pub u: State,
    pub d1: State,
    pub d2: State,
    pub d3: State,
}

impl ContactCurve {
    pub fn is_affine(&self) -> bool {
        matches!(self, ContactCurve::Affine { .. })
    }

    pub fn eval(&self, rho: f64) -> State {
        match self {
            ContactCurve::Affine { base, dir } => base + dir * (rho - RHO_MINUS),
            ContactCurve::Numeric { u, .. } => DVector::from_vec(u.eval(rho)),
        }
    }

    pub fn jet(&self, rho: f64) -> CurveJet {
        match self {
            ContactCurve::Affine { base, dir } => {
                let n = base.len();
                CurveJet {
                    u: base + dir * (rho - RHO_MINUS),
                    d1: dir.clone(),
                    d2: DVector::zeros(n),
                    d3: DVector::zeros(n),
                }
            }
            ContactCurve::Numeric { u, r } => {
                let n = u.dim();
                let mut d2 = DVector::zeros(n);
                r.eval_derivative_into(rho, d2.as_mut_slice());
                let h = 1e-4 * (r.x_max() - r.x_min());
                let mut dp = DVector::zeros(n);
                let mut dm = DVector::zeros(n);
                r.eval_derivative_into(rho + h, dp.as_mut_slice());
                r.eval_derivative_into(rho - h, dm.as_mut_slice());
                CurveJet {
                    u: DVector::from_vec(u.eval(rho)),
                    d1: DVector::from_vec(r.eval(rho)),
                    d2,
                    d3: (dp - dm) / (2.0 * h),
                }
            }
        }
    }
}

/// Space-time derivatives of `u^p` at one point.
#[derive(Debug, Clone)]
pub struct ContactPoint {
    pub rho: f64,
    pub u: State,
    pub u_x: State,
    pub u_t: State,
    pub u_xx: State,
    pub u_xt: State,
    pub u_tt: State,
    pub u_xxt: State,
}

#[derive(Debug, Clone)]
pub struct ContactWave {
    model: FluxModel,
    pub field: usize,
    pub speed: f64,
    pub a: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub u_left: State,
    pub u_right: State,
    pub curve: ContactCurve,
    /// `max |grad r_p . r_p|` sampled along the curve.
    pub structural_deviation: f64,
}

impl ContactWave {
    pub fn from_fan(model: &FluxModel, a: f64, fan: &WaveFan, mode: CurveMode) -> Result<Self> {
        let p = fan
            .contact
            .or_else(|| fan.kinds.iter().position(|k| *k == WaveKind::Contact))
            .ok_or_else(|| Error::Usage("fan has no contact wave".into()))?;
        if fan.kinds[p] != WaveKind::Contact {
            return Err(Error::Usage(format!("wave {p} is not a contact")));
        }
        Self::between(model, a, &fan.states[p], &fan.states[p + 1], fan.speeds[p], p, mode)
    }

    pub fn between(
        model: &FluxModel,
        a: f64,
        u_l: &State,
        u_r: &State,
        speed: f64,
        field: usize,
        mode: CurveMode,
    ) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Usage(format!("relaxation speed must be positive, got {a}")));
        }
        let chord = u_r - u_l;
        let len = chord.norm();
        if !(len > 0.0) {
            return Err(Error::Curve("zero-strength contact".into()));
        }
        let oriented = |u: &State| -> Result<State> {
            let r = eigen::eigensystem(model, u.as_slice())?.right_vector(field);
            Ok(if r.dot(&chord) < 0.0 { -r } else { r })
        };
        let affine_ok = {
            let dir = &chord / len;
            let mut dev = 0.0f64;
            for k in 0..=8 {
                let u = u_l + &chord * (k as f64 / 8.0);
                dev = dev.max((oriented(&u)? - &dir).norm());
            }
            dev < 1e-10
        };
        let curve = match (mode, affine_ok) {
            (CurveMode::Affine, false) => {
                return Err(Error::Curve(format!(
                    "r_{field} is not constant along the chord; the affine curve does not apply"
                )))
            }
            (CurveMode::Affine, true) | (CurveMode::Auto, true) => ContactCurve::Affine {
                base: u_l.clone(),
                dir: &chord / len,
            },
            (CurveMode::Numeric, _) | (CurveMode::Auto, false) => numeric_curve(model, u_l, u_r, field)?,
        };
        let rho_plus = match &curve {
            ContactCurve::Affine { .. } => RHO_MINUS + len,
            ContactCurve::Numeric { u, .. } => u.x_max(),
        };
        let mismatch = (curve.eval(rho_plus) - u_r).norm();
        if mismatch > CURVE_TOL {
            return Err(Error::Curve(format!(
                "integral curve misses the right contact state by {mismatch:e}"
            )));
        }
        let samples: Vec<State> = (0..=8)
            .map(|k| curve.eval(RHO_MINUS + (rho_plus - RHO_MINUS) * k as f64 / 8.0))
            .collect();
        let structural_deviation = if curve.is_affine() {
            0.0
        } else {
            eigen::check_structural_condition(model, field, &samples).unwrap_or(f64::INFINITY)
        };
        Ok(Self {
            model: model.clone(),
            field,
            speed,
            a,
            rho_minus: RHO_MINUS,
            rho_plus,
            u_left: u_l.clone(),
            u_right: u_r.clone(),
            curve,
            structural_deviation,
        })
    }

    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    pub fn delta_rho(&self) -> f64 {
        self.rho_plus - self.rho_minus
    }

    /// Standard deviation of the diffusion kernel at time `t`.
    pub fn sigma(&self, t: f64) -> f64 {
        self.a * (2.0 * (1.0 + t)).sqrt()
    }

    pub fn rho(&self, x: f64, t: f64) -> f64 {
        self.rho_minus + self.delta_rho() * normal_cdf((x - self.speed * t) / self.sigma(t))
    }

    /// `eta = rho / rho_+`.
    pub fn eta(&self, x: f64, t: f64) -> f64 {
        self.rho(x, t) / self.rho_plus
    }

    pub fn u(&self, x: f64, t: f64) -> State {
        self.curve.eval(self.rho(x, t))
    }

    pub fn point(&self, x: f64, t: f64) -> ContactPoint {
        let (a, s, dr) = (self.a, self.speed, self.delta_rho());
        let z = x - s * t;
        let [k0, k1, k2, k3] = heat_kernel_derivatives(z, 1.0 + t, a);
        let a2 = a * a;
        let rho = self.rho(x, t);
        let r_x = dr * k0;
        let r_xx = dr * k1;
        let r_t = dr * (a2 * k1 - s * k0);
        let r_xt = dr * (a2 * k2 - s * k1);
        let r_tt = dr * (a2 * a2 * k3 - 2.0 * s * a2 * k2 + s * s * k1);
        let r_xxt = dr * (a2 * k3 - s * k2);
        let j = self.curve.jet(rho);
        ContactPoint {
            rho,
            u_x: &j.d1 * r_x,
            u_t: &j.d1 * r_t,
            u_xx: &j.d1 * r_xx + &j.d2 * (r_x * r_x),
            u_xt: &j.d1 * r_xt + &j.d2 * (r_x * r_t),
            u_tt: &j.d1 * r_tt + &j.d2 * (r_t * r_t),
            u_xxt: &j.d1 * r_xxt + &j.d2 * (2.0 * r_x * r_xt + r_xx * r_t) + &j.d3 * (r_x * r_x * r_t),
            u: j.u,
        }
    }

    /// `u^p_t + f(u^p)_x - a^2 u^p_xx` at `(x, t)`.
    pub fn pde_residual(&self, x: f64, t: f64) -> State {
        let p = self.point(x, t);
        let jac = self.model.jacobian(p.u.as_slice());
        &p.u_t + jac * &p.u_x - &p.u_xx * (self.a * self.a)
    }

    /// `E2 = int_{-inf}^x u^p_tt dy`; closed form on the affine curve.
    pub fn e2(&self, x: f64, t: f64) -> State {
        if self.curve.is_affine() {
            let p = self.point(x, t);
            return &p.u_xt * (self.a * self.a) - &p.u_t * self.speed;
        }
        let sigma = self.sigma(t);
        let lo = self.speed * t - 12.0 * sigma;
        let n = self.u_left.len();
        let mut acc = DVector::zeros(n);
        if x <= lo {
            return acc;
        }
        for c in 0..n {
            acc[c] = crate::special::gauss_legendre(|y| self.point(y, t).u_tt[c], lo, x, 64);
        }
        acc
    }

    /// Rows `x, t, rho, u_1..u_n` on a space grid for each requested time.
    pub fn samples(&self, x_half_width: f64, count: usize, times: &[f64]) -> Vec<Vec<f64>> {
        let count = count.max(2);
        let mut rows = Vec::with_capacity(count * times.len());
        for &t in times {
            for k in 0..count {
                let x = -x_half_width + 2.0 * x_half_width * k as f64 / (count - 1) as f64;
                let rho = self.rho(x, t);
                let u = self.curve.eval(rho);
                rows.push([x, t, rho].into_iter().chain(u.iter().copied()).collect());
            }
        }
        rows
    }
}

/// Integral curve `du/drho = r_p(u)` from `u_l`, stopped where the
/// projection onto the chord reaches `u_r`.
fn numeric_curve(model: &FluxModel, u_l: &State, u_r: &State, field: usize) -> Result<ContactCurve> {
    let n = model.dim();
    let chord = u_r - u_l;
    let len = chord.norm();
    let dir0 = &chord / len;
    let r_at = |u: &[f64]| -> Option<State> {
        let r = eigen::eigensystem(model, u).ok()?.right_vector(field);
        Some(if r.dot(&dir0) < 0.0 { -r } else { r })
    };
    let mut failed = false;
    let rhs = |y: &[f64], dy: &mut [f64]| match r_at(y) {
        Some(r) => dy.copy_from_slice(r.as_slice()),
        None => {
            failed = true;
            dy.iter_mut().for_each(|d| *d = f64::NAN);
        }
    };
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-15,
        h_init: 1e-3 * len,
        h_max: 0.02 * len,
        t_max: 4.0 * len,
        max_steps: 200_000,
    };
    let (path, outcome) = ode::integrate(rhs, u_l.as_slice(), &opts, |_, y| {
        let proj = (DVector::from_column_slice(y) - u_l).dot(&dir0);
        if proj >= len {
            Control::Stop
        } else if y.iter().any(|v| !v.is_finite()) {
            Control::Abort
        } else {
            Control::Continue
        }
    });
    if failed || outcome != OdeOutcome::Stopped {
        return Err(Error::Curve(format!("integral curve of r_{field} failed ({outcome:?})")));
    }
    let xs: Vec<f64> = path.ts.iter().map(|t| RHO_MINUS + t).collect();
    let rs: Vec<Vec<f64>> = path
        .ys
        .iter()
        .map(|y| r_at(y).map(|r| r.as_slice().to_vec()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Curve("eigensystem failed on the integral curve".into()))?;
    let table_u = HermiteTable::new(xs.clone(), path.ys.clone(), rs.clone(), false);
    // Locate rho_+ on the last interval by bisection on the chord projection.
    let proj = |rho: f64| (DVector::from_vec(table_u.eval(rho)) - u_l).dot(&dir0) - len;
    let m = xs.len();
    let (mut lo, mut hi) = (xs[m.saturating_sub(2)], xs[m - 1]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if proj(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho_plus = 0.5 * (lo + hi);
    let mut xs_cut: Vec<f64> = xs.into_iter().filter(|x| *x < rho_plus - 1e-12).collect();
    let mut ys: Vec<Vec<f64>> = path.ys[..xs_cut.len()].to_vec();
    let mut rs_cut: Vec<Vec<f64>> = rs[..xs_cut.len()].to_vec();
    let u_end = table_u.eval(rho_plus);
    let r_end = r_at(&u_end).ok_or_else(|| Error::Curve("eigensystem failed at the curve end".into()))?;
    xs_cut.push(rho_plus);
    ys.push(u_end);
    rs_cut.push(r_end.as_slice().to_vec());
    // grad r_p . r_p at the nodes by central differences along r_p
    let qs: Vec<Vec<f64>> = ys
        .iter()
        .zip(&rs_cut)
        .map(|(y, r)| {
            let yv = DVector::from_column_slice(y);
            let rv = DVector::from_column_slice(r);
            let h = 1e-5 * (1.0 + yv.norm());
            match (r_at((&yv + &rv * h).as_slice()), r_at((&yv - &rv * h).as_slice())) {
                (Some(p), Some(q)) => ((p - q) / (2.0 * h)).as_slice().to_vec(),
                _ => vec![0.0; n],
            }
        })
        .collect();
    Ok(ContactCurve::Numeric {
        u: HermiteTable::new(xs_cut.clone(), ys, rs_cut.clone(), false),
        r: HermiteTable::new(xs_cut, rs_cut, qs, false),
    })
}

/// Contact wave of `fan`.
pub fn contact_wave(model: &FluxModel, a: f64, fan: &WaveFan) -> Result<ContactWave> {
    ContactWave::from_fan(model, a, fan, CurveMode::Auto)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn v(x: &[f64]) -> State {
        DVector::from_column_slice(x)
    }

    #[test]
    fn symmetric_midpoint_for_standing_contact() {
        let m = FluxModel::euler(1.4).unwrap();
        let c = ContactWave::between(&m, 2.0, &v(&[1.0, 0.0, 2.5]), &v(&[1.05, 0.0, 2.5]), 0.0, 1, CurveMode::Auto)
            .unwrap();
        assert!(c.curve.is_affine());
        for t in [0.0, 1.0, 10.0] {
            assert!((c.rho(0.0, t) - 0.5 * (c.rho_minus + c.rho_plus)).abs() < 1e-15);
        }
        assert!((c.rho_plus - 1.05).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_differences() {
        let m = FluxModel::euler(1.4).unwrap();
        let e = crate::flux::Euler { gamma: 1.4 };
        let (ul, ur) = (e.conserved(1.0, 0.3, 1.0), e.conserved(1.1, 0.3, 1.0));
        let c = ContactWave::between(&m, 2.0, &ul, &ur, 0.3, 1, CurveMode::Auto).unwrap();
        let (x, t, h) = (0.7, 2.0, 1e-4);
        let p = c.point(x, t);
        let fx = (c.u(x + h, t) - c.u(x - h, t)) / (2.0 * h);
        let ft = (c.u(x, t + h) - c.u(x, t - h)) / (2.0 * h);
        assert!((fx - &p.u_x).amax() < 1e-9);
        assert!((ft - &p.u_t).amax() < 1e-9);
        let ftt = (c.point(x, t + h).u_t - c.point(x, t - h).u_t) / (2.0 * h);
        assert!((ftt - &p.u_tt).amax() < 1e-9);
        assert!(c.pde_residual(x, t).amax() < 1e-12);
    }

    #[test]
    fn numeric_curve_on_linear_system_matches_affine() {
        let m = FluxModel::linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let (ul, ur) = (v(&[0.5, 0.5]), v(&[0.0, 0.0]));
        let a = ContactWave::between(&m, 2.0, &ul, &ur, 1.0, 1, CurveMode::Affine).unwrap();
        let n = ContactWave::between(&m, 2.0, &ul, &ur, 1.0, 1, CurveMode::Numeric).unwrap();
        assert!((a.rho_plus - n.rho_plus).abs() < 1e-10);
        for x in [-3.0, 0.0, 1.0, 4.0] {
            assert!((a.u(x, 1.0) - n.u(x, 1.0)).amax() < 1e-10);
            assert!((a.e2(x, 1.0) - n.e2(x, 1.0)).amax() < 1e-8);
        }
    }
}
