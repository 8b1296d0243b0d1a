//! Relaxation shock profiles.
//!
//! A traveling wave `phi(x - s t)` of the relaxation system satisfies, after
//! one integration from the left end state,
//!
//! ```text
//! (a^2 - s^2) phi' = f(phi) - f(u_l) - s (phi - u_l).
//! ```
//!
//! The heteroclinic orbit is found by shooting along the one-dimensional
//! unstable manifold of `u_l`, or along the one-dimensional stable manifold
//! of `u_r` in backward time when that is the unique direction.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};
use crate::interp::HermiteTable;
use crate::ode::{self, Control, OdeOptions, OdeOutcome};
use crate::waves::fan::{WaveFan, WaveKind};

/// Initial offset from the end state, relative to the shock strength.
pub const SHOOTING_OFFSET: f64 = 1e-7;

/// Distance to the far end state (relative to strength) ending the shot.
const ARRIVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shooting {
    /// From `u_l` along its unstable direction.
    Forward,
    /// From `u_r` in backward time along its stable direction.
    Backward,
}

#[derive(Debug, Clone)]
pub struct ShockProfile {
    model: FluxModel,
    pub field: usize,
    pub speed: f64,
    pub a: f64,
    pub u_left: State,
    pub u_right: State,
    pub strength: f64,
    pub shooting: Shooting,
    /// `min (a - |lambda_k|)` over both end states.
    pub subcharacteristic_margin: f64,
    /// `phi - u_l ~ exp(rate_left xi)` as `xi -> -inf` (linearization).
    pub rate_left: f64,
    /// `phi - u_r ~ exp(-rate_right xi)` as `xi -> +inf` (linearization).
    pub rate_right: f64,
    /// Least-squares tail rates measured on the computed orbit.
    pub fitted_rate_left: f64,
    pub fitted_rate_right: f64,
    table: HermiteTable,
}

/// Checks of the qualitative profile properties on the table nodes.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileChecks {
    pub field: usize,
    pub strength: f64,
    /// `max_xi d/dxi lambda_i(phi)`; negative means strictly decreasing.
    pub max_lambda_slope: f64,
    pub lambda_monotone: bool,
    /// `max |d lambda_i / dxi| / |phi'|`.
    pub lambda_slope_ratio: f64,
    /// `int |d lambda_i / dxi| dxi / delta_i`.
    pub lambda_variation_ratio: f64,
    /// `max |phi''| / (delta_i |phi'|)`.
    pub curvature_ratio: f64,
    pub fitted_rate_left: f64,
    pub fitted_rate_right: f64,
    pub endpoint_error: f64,
    pub max_ode_residual: f64,
    pub nodes: usize,
}

impl ShockProfile {
    /// Profile of the `i`-th wave of `fan`, which must be a shock.
    pub fn from_fan(model: &FluxModel, a: f64, fan: &WaveFan, i: usize) -> Result<Self> {
        if i >= fan.n() {
            return Err(Error::Usage(format!("field index {i} out of range for n = {}", fan.n())));
        }
        if fan.kinds[i] != WaveKind::Shock {
            return Err(Error::Usage(format!("wave {i} is a contact, not a shock")));
        }
        Self::between(model, a, &fan.states[i], &fan.states[i + 1], fan.speeds[i], i)
    }

    /// Profile connecting `u_l` to `u_r` with speed `s` in field `field`.
    pub fn between(model: &FluxModel, a: f64, u_l: &State, u_r: &State, s: f64, field: usize) -> Result<Self> {
        let n = model.dim();
        let strength = (u_r - u_l).norm();
        if !(strength > 0.0) {
            return Err(Error::ProfileExistence {
                field,
                reason: "zero-strength shock".into(),
            });
        }
        let eig_l = eigen::eigensystem(model, u_l.as_slice())?;
        let eig_r = eigen::eigensystem(model, u_r.as_slice())?;
        if !(a > s.abs()) {
            return Err(Error::Setup(format!(
                "relaxation speed a = {a} must exceed the shock speed |s| = {}",
                s.abs()
            )));
        }
        let subcharacteristic_margin = eig_l
            .lambdas
            .iter()
            .chain(eig_r.lambdas.iter())
            .fold(f64::INFINITY, |m, l| m.min(a - l.abs()));
        let c = a * a - s * s;
        let unstable_left = eig_l.lambdas.iter().filter(|l| **l > s).count();
        let stable_right = eig_r.lambdas.iter().filter(|l| **l < s).count();
        let rate_left = (eig_l.lambdas[field] - s) / c;
        let rate_right = (s - eig_r.lambdas[field]) / c;
        if !(rate_left > 0.0 && rate_right > 0.0) {
            return Err(Error::ProfileExistence {
                field,
                reason: "Lax inequalities fail at the end states".into(),
            });
        }
        let (shooting, start, end, w, sign) = if unstable_left == 1 {
            let mut w = eig_l.right_vector(field);
            if w.dot(&(u_r - u_l)) < 0.0 {
                w.neg_mut();
            }
            (Shooting::Forward, u_l, u_r, w, 1.0)
        } else if stable_right == 1 {
            let mut w = eig_r.right_vector(field);
            if w.dot(&(u_l - u_r)) < 0.0 {
                w.neg_mut();
            }
            (Shooting::Backward, u_r, u_l, w, -1.0)
        } else {
            return Err(Error::ProfileExistence {
                field,
                reason: format!(
                    "unstable manifold of u_l has dimension {unstable_left} and stable manifold of u_r \
                     dimension {stable_right}; shooting needs one of them to be one-dimensional"
                ),
            });
        };

        let f_l = model.flux(u_l.as_slice());
        let mut fbuf = vec![0.0; n];
        let mut rhs = |y: &[f64], dy: &mut [f64]| {
            model.flux_into(y, &mut fbuf);
            for k in 0..n {
                dy[k] = sign * (fbuf[k] - f_l[k] - s * (y[k] - u_l[k])) / c;
            }
        };
        let y0: Vec<f64> = (start + &w * (SHOOTING_OFFSET * strength)).iter().copied().collect();
        let mu_slow = rate_left.min(rate_right);
        let escape = strength.max(1e-3 * (1.0 + u_l.amax()));
        let mut escaped_at = None;
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-16 * strength,
            h_init: 1e-3 / mu_slow.max(1e-12),
            h_max: 0.05 / mu_slow,
            t_max: 1e4 / mu_slow,
            max_steps: 2_000_000,
        };
        let (path, outcome) = ode::integrate(&mut rhs, &y0, &opts, |t, y| {
            let yv = DVector::from_column_slice(y);
            if segment_distance(&yv, u_l, u_r) > escape || y.iter().any(|v| !v.is_finite()) {
                escaped_at = Some(sign * t);
                return Control::Abort;
            }
            if (&yv - end).norm() < ARRIVAL_TOL * strength {
                Control::Stop
            } else {
                Control::Continue
            }
        });
        // Near the end state the right-hand side is flux roundoff divided by
        // the slow rate; a shot stalled inside that band has arrived.
        let noise = f64::EPSILON * (1.0 + f_l.amax() + s.abs() * u_l.amax().max(u_r.amax())) / (c * mu_slow);
        let stalled = matches!(outcome, OdeOutcome::StepLimit)
            && (DVector::from_column_slice(path.ys.last().unwrap()) - end).norm() < noise;
        match outcome {
            OdeOutcome::Stopped => {}
            _ if stalled => {}
            OdeOutcome::Aborted(_) => {
                return Err(Error::Divergence {
                    field,
                    xi: escaped_at.unwrap_or(f64::NAN),
                })
            }
            other => {
                return Err(Error::Convergence {
                    stage: format!("profile integration for field {field} ({other:?})"),
                    history: vec![(DVector::from_column_slice(path.ys.last().unwrap()) - end).norm()],
                })
            }
        }

        let mut xs: Vec<f64> = path.ts.iter().map(|t| sign * t).collect();
        let mut ys = path.ys;
        if shooting == Shooting::Backward {
            xs.reverse();
            ys.reverse();
        }
        // Drop nodes closer than roundoff allows.
        let mut keep_x = Vec::with_capacity(xs.len());
        let mut keep_y = Vec::with_capacity(xs.len());
        for (x, y) in xs.into_iter().zip(ys) {
            if keep_x.last().is_none_or(|&p: &f64| x - p > 1e-12 * (1.0 + x.abs())) {
                keep_x.push(x);
                keep_y.push(y);
            }
        }
        let slopes: Vec<Vec<f64>> = keep_y
            .iter()
            .map(|y| {
                let mut d = vec![0.0; n];
                model.flux_into(y, &mut d);
                (0..n).map(|k| (d[k] - f_l[k] - s * (y[k] - u_l[k])) / c).collect()
            })
            .collect();
        let table = HermiteTable::new(keep_x, keep_y, slopes, true);
        let mut profile = Self {
            model: model.clone(),
            field,
            speed: s,
            a,
            u_left: u_l.clone(),
            u_right: u_r.clone(),
            strength,
            shooting,
            subcharacteristic_margin,
            rate_left,
            rate_right,
            fitted_rate_left: f64::NAN,
            fitted_rate_right: f64::NAN,
            table,
        };
        let center = profile.find_center()?;
        profile.table.recenter(center);
        profile.fitted_rate_left = profile.fit_tail_rate(true);
        profile.fitted_rate_right = profile.fit_tail_rate(false);
        Ok(profile)
    }

    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    pub fn table(&self) -> &HermiteTable {
        &self.table
    }

    pub fn xi_min(&self) -> f64 {
        self.table.x_min()
    }

    pub fn xi_max(&self) -> f64 {
        self.table.x_max()
    }

    /// `xi` with `lambda_i(phi(xi)) = s`, located by bisection.
    fn find_center(&self) -> Result<f64> {
        let g = |xi: f64| -> Result<f64> {
            let phi = self.table.eval(xi);
            Ok(eigen::eigenvalues(&self.model, &phi)?[self.field] - self.speed)
        };
        let (mut lo, mut hi) = (self.xi_min(), self.xi_max());
        let (glo, ghi) = (g(lo)?, g(hi)?);
        if !(glo > 0.0 && ghi < 0.0) {
            return Err(Error::ProfileExistence {
                field: self.field,
                reason: "lambda_i - s does not change sign along the orbit".into(),
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Slope of `ln |phi - u_end|` over the tail nodes between `1e-9` and
    /// `1e-4` relative distance.
    fn fit_tail_rate(&self, left: bool) -> f64 {
        let end = if left { &self.u_left } else { &self.u_right };
        let mut pts = Vec::new();
        for k in 0..self.table.len() {
            let x = self.table.nodes()[k];
            if (left && x > 0.0) || (!left && x < 0.0) {
                continue;
            }
            let d = (DVector::from_column_slice(self.table.node_value(k)) - end).norm() / self.strength;
            if (1e-9..1e-4).contains(&d) {
                pts.push((x, d.ln()));
            }
        }
        let slope = crate::fit::linear_fit(&pts).map_or(f64::NAN, |f| f.slope);
        if left {
            slope
        } else {
            -slope
        }
    }

    /// `phi(xi)` written into `out`, with exponential tails beyond the table.
    pub fn phi_into(&self, xi: f64, out: &mut [f64]) {
        let (lo, hi) = (self.xi_min(), self.xi_max());
        if xi < lo {
            let k = (self.rate_left * (xi - lo)).exp();
            let y0 = self.table.node_value(0);
            for c in 0..out.len() {
                out[c] = self.u_left[c] + (y0[c] - self.u_left[c]) * k;
            }
        } else if xi > hi {
            let k = (-self.rate_right * (xi - hi)).exp();
            let y0 = self.table.node_value(self.table.len() - 1);
            for c in 0..out.len() {
                out[c] = self.u_right[c] + (y0[c] - self.u_right[c]) * k;
            }
        } else {
            self.table.eval_into(xi, out);
        }
    }

    pub fn phi(&self, xi: f64) -> State {
        let mut out = DVector::zeros(self.u_left.len());
        self.phi_into(xi, out.as_mut_slice());
        out
    }

    /// `(phi, phi', phi'')` with both derivatives taken from the ODE at the
    /// interpolated `phi`.
    pub fn derivatives(&self, xi: f64) -> (State, State, State) {
        let phi = self.phi(xi);
        let c = self.a * self.a - self.speed * self.speed;
        let g = self.model.flux(phi.as_slice())
            - self.model.flux(self.u_left.as_slice())
            - (&phi - &self.u_left) * self.speed;
        let d1 = g / c;
        let jac = self.model.jacobian(phi.as_slice()) - DMatrix::identity(phi.len(), phi.len()) * self.speed;
        let d2 = jac * &d1 / c;
        (phi, d1, d2)
    }

    /// `max_k |(a^2 - s^2) phi'_k - g(phi_k)|` using the interpolant's own
    /// derivative at the midpoints between nodes.
    pub fn max_ode_residual(&self) -> f64 {
        let c = self.a * self.a - self.speed * self.speed;
        let f_l = self.model.flux(self.u_left.as_slice());
        let nodes = self.table.nodes();
        let mut worst = 0.0f64;
        for k in 0..nodes.len() {
            let y = DVector::from_column_slice(self.table.node_value(k));
            let d = DVector::from_column_slice(self.table.node_slope(k));
            let g = self.model.flux(y.as_slice()) - &f_l - (&y - &self.u_left) * self.speed;
            worst = worst.max((d * c - g).amax());
        }
        worst
    }

    pub fn endpoint_error(&self) -> f64 {
        let first = DVector::from_column_slice(self.table.node_value(0));
        let last = DVector::from_column_slice(self.table.node_value(self.table.len() - 1));
        (first - &self.u_left).norm().max((last - &self.u_right).norm())
    }

    /// `d/dxi lambda_i(phi(xi))` by a central difference along `phi'`.
    pub fn lambda_slope(&self, xi: f64) -> Result<f64> {
        let (phi, d1, _) = self.derivatives(xi);
        let speed = d1.norm();
        if speed == 0.0 {
            return Ok(0.0);
        }
        let dir = &d1 / speed;
        let h = 1e-6 * (1.0 + phi.norm());
        let lp = eigen::eigenvalues(&self.model, (&phi + &dir * h).as_slice())?[self.field];
        let lm = eigen::eigenvalues(&self.model, (&phi - &dir * h).as_slice())?[self.field];
        Ok((lp - lm) / (2.0 * h) * speed)
    }

    pub fn checks(&self) -> Result<ProfileChecks> {
        let nodes = self.table.nodes().to_vec();
        let mut max_slope = f64::NEG_INFINITY;
        let mut ratio = 0.0f64;
        let mut curvature = 0.0f64;
        let mut slopes = Vec::with_capacity(nodes.len());
        for &xi in &nodes {
            let ls = self.lambda_slope(xi)?;
            let (_, d1, d2) = self.derivatives(xi);
            let n1 = d1.norm();
            max_slope = max_slope.max(ls);
            if n1 > 1e-14 * self.strength {
                ratio = ratio.max(ls.abs() / n1);
                curvature = curvature.max(d2.norm() / (self.strength * n1));
            }
            slopes.push(ls.abs());
        }
        let variation: f64 = nodes
            .windows(2)
            .zip(slopes.windows(2))
            .map(|(x, s)| 0.5 * (x[1] - x[0]) * (s[0] + s[1]))
            .sum();
        Ok(ProfileChecks {
            field: self.field,
            strength: self.strength,
            max_lambda_slope: max_slope,
            lambda_monotone: max_slope < 0.0,
            lambda_slope_ratio: ratio,
            lambda_variation_ratio: variation / self.strength,
            curvature_ratio: curvature,
            fitted_rate_left: self.fitted_rate_left,
            fitted_rate_right: self.fitted_rate_right,
            endpoint_error: self.endpoint_error(),
            max_ode_residual: self.max_ode_residual(),
            nodes: nodes.len(),
        })
    }

    /// Uniform samples `xi, phi_1..phi_n, dphi_1..dphi_n` on
    /// `[-half_width, half_width]`; `xi = 0` is a sample when `count` is odd.
    pub fn samples(&self, half_width: f64, count: usize) -> Vec<Vec<f64>> {
        let count = count.max(3) | 1;
        (0..count)
            .map(|k| {
                let xi = if k == count / 2 {
                    0.0
                } else {
                    -half_width + 2.0 * half_width * k as f64 / (count - 1) as f64
                };
                let (phi, d1, _) = self.derivatives(xi);
                std::iter::once(xi).chain(phi.iter().copied()).chain(d1.iter().copied()).collect()
            })
            .collect()
    }
}

/// Euclidean distance from `y` to the segment `[p, q]`.
fn segment_distance(y: &State, p: &State, q: &State) -> f64 {
    let d = q - p;
    let t = ((y - p).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (y - p - d * t).norm()
}

/// Profile of wave `i` of `fan`.
pub fn shock_profile(model: &FluxModel, a: f64, fan: &WaveFan, i: usize) -> Result<ShockProfile> {
    ShockProfile::from_fan(model, a, fan, i)
}
