//! Fitted envelope `e(x, t)` bounding the interaction term `E1`.
//!
//! ```text
//! e = K_late delta^2 exp(-c0 (t + |x|))                                   t > t0
//! e = K_early delta^2 [exp(-(x - x_p)^2 / (8 (1 + t)))
//!                      + sum_{i != p} exp(-C |x - s_i t - x_i|)]           t <= t0
//! ```
//!
//! The constants `K` are fitted on a calibration grid and checked on a
//! disjoint grid offset by half a step in `x` and `t`.

use serde::Serialize;

use crate::waves::ansatz::{Ansatz, Wave};

use super::zones::ZonePartition;

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeGrid {
    pub x_half_width: f64,
    pub x_points: usize,
    pub t_max: f64,
    /// Calibration times per regime (`t <= t0` and `t > t0`).
    pub t_points: usize,
}

impl Default for EnvelopeGrid {
    fn default() -> Self {
        Self {
            x_half_width: 100.0,
            x_points: 801,
            t_max: 200.0,
            t_points: 24,
        }
    }
}

impl EnvelopeGrid {
    fn xs(&self, offset: bool) -> Vec<f64> {
        let h = 2.0 * self.x_half_width / (self.x_points - 1) as f64;
        let (start, count) = if offset {
            (-self.x_half_width + 0.5 * h, self.x_points - 1)
        } else {
            (-self.x_half_width, self.x_points)
        };
        (0..count).map(|k| start + k as f64 * h).collect()
    }

    /// Calibration times: both ends of each regime included. Validation
    /// times: midpoints of consecutive calibration times.
    fn ts(&self, t0: f64, offset: bool) -> Vec<f64> {
        let m = self.t_points.max(2);
        let mut cal = Vec::new();
        if t0 > 0.0 {
            cal.extend((0..m).map(|k| t0 * k as f64 / (m - 1) as f64));
        }
        if self.t_max > t0 {
            // Geometric in 1 + t - t0 so early times after t0 are dense.
            let span = (1.0 + self.t_max - t0).ln();
            let first = t0 * (1.0 + 1e-12) + 1e-12;
            cal.push(first);
            cal.extend((1..m).map(|k| t0 + (span * k as f64 / (m - 1) as f64).exp() - 1.0));
        }
        if !offset {
            return cal;
        }
        cal.windows(2)
            .filter(|w| !(w[0] <= t0 && w[1] > t0))
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorEnvelope {
    pub delta: f64,
    pub t0: f64,
    /// Exponent `c0 delta` of the late regime.
    pub c0_delta: f64,
    /// Exponent `C delta` of the early shock terms.
    pub c_delta: f64,
    pub k_late: f64,
    pub k_early: f64,
    /// Roundoff level of `E1`.
    pub floor: f64,
    pub contact_shift: Option<f64>,
    shocks: Vec<(f64, f64)>,
}

impl ErrorEnvelope {
    fn shape(&self, x: f64, t: f64) -> f64 {
        let d2 = self.delta * self.delta;
        if t > self.t0 {
            return d2 * (-self.c0_delta * (t + x.abs())).exp();
        }
        let mut s = match self.contact_shift {
            Some(xp) => (-(x - xp).powi(2) / (8.0 * (1.0 + t))).exp(),
            None => 0.0,
        };
        for &(speed, shift) in &self.shocks {
            s += (-self.c_delta * (x - speed * t - shift).abs()).exp();
        }
        d2 * s
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let k = if t > self.t0 { self.k_late } else { self.k_early };
        k * self.shape(x, t)
    }
}

fn e1_norm(ansatz: &Ansatz, x: f64, t: f64) -> f64 {
    ansatz.e1(x, t).amax()
}

/// Decay exponents of the envelope and an unfitted envelope (`K = 0`).
pub fn envelope_form(ansatz: &Ansatz, zones: &ZonePartition) -> ErrorEnvelope {
    let a2 = ansatz.a * ansatz.a;
    let mut late = f64::INFINITY;
    let mut early = f64::INFINITY;
    let mut shocks = Vec::new();
    let mut contact_shift = None;
    for (i, w) in ansatz.waves.iter().enumerate() {
        match w {
            Wave::Shock(p) => {
                let mu = p.rate_left.min(p.rate_right);
                late = late.min(mu * zones.kappa(i));
                early = early.min(mu);
                shocks.push((p.speed, ansatz.shifts[i]));
            }
            Wave::Contact(_) => {
                late = late.min(zones.half_gap(i) * zones.kappa(i) / (8.0 * a2));
                contact_shift = Some(ansatz.shifts[i]);
            }
        }
    }
    let fmax = ansatz
        .fan
        .states
        .iter()
        .map(|u| ansatz.model().flux(u.as_slice()).amax())
        .fold(0.0f64, f64::max);
    ErrorEnvelope {
        delta: ansatz.fan.delta,
        t0: zones.t0,
        c0_delta: 0.5 * late,
        c_delta: 0.5 * early,
        k_late: 0.0,
        k_early: 0.0,
        floor: 1e-13 * (1.0 + fmax),
        contact_shift,
        shocks,
    }
}

/// Fits `K_early` and `K_late` as the largest ratio `|E1| / shape` on the
/// calibration grid.
pub fn fit_envelope(ansatz: &Ansatz, zones: &ZonePartition, grid: &EnvelopeGrid) -> ErrorEnvelope {
    let mut env = envelope_form(ansatz, zones);
    let xs = grid.xs(false);
    for t in grid.ts(env.t0, false) {
        for &x in &xs {
            let e1 = e1_norm(ansatz, x, t);
            if e1 <= env.floor {
                continue;
            }
            let shape = env.shape(x, t);
            let ratio = if shape > 0.0 { e1 / shape } else { f64::INFINITY };
            if t > env.t0 {
                env.k_late = env.k_late.max(ratio);
            } else {
                env.k_early = env.k_early.max(ratio);
            }
        }
    }
    env
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeValidation {
    pub points: usize,
    pub slack: f64,
    /// `max |E1| / (e + floor)` on the validation grid.
    pub max_ratio: f64,
    pub worst_x: f64,
    pub worst_t: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `|E1| <= (1 + slack) e + floor` on the offset grid.
pub fn validate_envelope(ansatz: &Ansatz, env: &ErrorEnvelope, grid: &EnvelopeGrid, slack: f64) -> EnvelopeValidation {
    let xs = grid.xs(true);
    let mut out = EnvelopeValidation {
        points: 0,
        slack,
        max_ratio: 0.0,
        worst_x: 0.0,
        worst_t: 0.0,
        violations: 0,
        pass: true,
    };
    for t in grid.ts(env.t0, true) {
        for &x in &xs {
            let e1 = e1_norm(ansatz, x, t);
            let bound = env.eval(x, t);
            out.points += 1;
            let ratio = e1 / (bound + env.floor);
            if ratio > out.max_ratio {
                out.max_ratio = ratio;
                out.worst_x = x;
                out.worst_t = t;
            }
            if e1 > (1.0 + slack) * bound + env.floor {
                out.violations += 1;
            }
        }
    }
    out.pass = out.violations == 0 && out.points > 0;
    out
}
