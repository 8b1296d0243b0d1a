//! Wedges `Omega_i` of the half-plane dominated by the `i`-th wave.

use serde::Serialize;

use crate::waves::ansatz::{Ansatz, Wave};
use crate::waves::fan::WaveFan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Minus,
    Plus,
}

/// Zone of a point: wave index and side of its center line `x = s_i t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Zone {
    pub wave: usize,
    pub side: Side,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZonePartition {
    pub speeds: Vec<f64>,
    pub shifts: Vec<f64>,
    pub t0: f64,
    /// `min_i (s_{i+1} - s_i)`.
    pub min_gap: f64,
    /// Smallest positive speed, if any.
    pub min_positive_speed: Option<f64>,
}

impl ZonePartition {
    pub fn new(fan: &WaveFan, shifts: &[f64]) -> Self {
        let speeds = fan.speeds.clone();
        let min_gap = speeds.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let min_positive_speed = speeds.iter().copied().filter(|s| *s > 0.0).reduce(f64::min);
        let denom = min_gap.min(min_positive_speed.unwrap_or(f64::INFINITY));
        let max_shift = shifts.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let t0 = if max_shift == 0.0 { 0.0 } else { 4.0 * max_shift / denom };
        Self {
            speeds,
            shifts: shifts.to_vec(),
            t0,
            min_gap,
            min_positive_speed,
        }
    }

    pub fn n(&self) -> usize {
        self.speeds.len()
    }

    /// Boundary between `Omega_i` and `Omega_{i+1}` at time `t`.
    pub fn boundary(&self, i: usize, t: f64) -> f64 {
        0.5 * (self.speeds[i] + self.speeds[i + 1]) * t
    }

    /// `Omega_i` contains `x` when `b_{i-1} < x <= b_i`.
    pub fn zone(&self, x: f64, t: f64) -> Zone {
        let n = self.n();
        let wave = (0..n - 1).find(|&i| x <= self.boundary(i, t)).unwrap_or(n - 1);
        let side = if x < self.speeds[wave] * t { Side::Minus } else { Side::Plus };
        Zone { wave, side }
    }

    /// Half of the gap from `s_i` to its nearest neighboring speed.
    pub fn half_gap(&self, i: usize) -> f64 {
        let left = if i > 0 { self.speeds[i] - self.speeds[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < self.n() { self.speeds[i + 1] - self.speeds[i] } else { f64::INFINITY };
        0.5 * left.min(right)
    }

    /// `kappa_i` with `|x - s_i t| >= kappa_i (t + |x|)` on `Omega_i^c`.
    pub fn kappa(&self, i: usize) -> f64 {
        let g = self.half_gap(i);
        if g.is_infinite() {
            return 1.0;
        }
        g / (1.0 + g + self.speeds[i].abs())
    }
}

pub fn zone_partition(fan: &WaveFan, shifts: &[f64]) -> ZonePartition {
    ZonePartition::new(fan, shifts)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneDecay {
    pub wave: usize,
    pub c0_delta: f64,
    /// `max ln|u^i_x| + c0 delta_i (t + |x|)` over samples outside
    /// `Omega_i` in the earlier half of the sample times after `t0`.
    pub early_max: f64,
    /// The same over the later half.
    pub late_max: f64,
    /// `exp(max) / delta_i^2`.
    pub constant: f64,
    pub samples: usize,
    pub bounded: bool,
}

/// Lemma-type decay check of shock derivatives away from their zone.
///
/// Samples `x` uniformly on `[-x_max, x_max]` at the times `ts` after
/// `t0`, and reports the log-excess over the predicted decay.
pub fn zone_decay(ansatz: &Ansatz, zones: &ZonePartition, x_max: f64, ts: &[f64]) -> Vec<ZoneDecay> {
    let ts: Vec<f64> = ts.iter().copied().filter(|t| *t > zones.t0).collect();
    let split = ts.len() / 2;
    let mut out = Vec::new();
    for (i, w) in ansatz.waves.iter().enumerate() {
        let Wave::Shock(p) = w else { continue };
        let mu = p.rate_left.min(p.rate_right);
        // Shifts eat up to half of the gap once t > t0.
        let c0 = 0.5 * mu * zones.kappa(i);
        let delta = p.strength;
        let mut early = f64::NEG_INFINITY;
        let mut late = f64::NEG_INFINITY;
        let mut count = 0;
        for (k, &t) in ts.iter().enumerate() {
            for m in 0..=400 {
                let x = -x_max + 2.0 * x_max * m as f64 / 400.0;
                if zones.zone(x, t).wave == i {
                    continue;
                }
                let ux = ansatz.wave_point(i, x, t).u_x.norm();
                if ux <= 0.0 {
                    continue;
                }
                let q = ux.ln() + c0 * (t + x.abs());
                count += 1;
                if k < split.max(1) {
                    early = early.max(q);
                } else {
                    late = late.max(q);
                }
            }
        }
        let max = early.max(late);
        out.push(ZoneDecay {
            wave: i,
            c0_delta: c0,
            early_max: early,
            late_max: late,
            constant: max.exp() / (delta * delta),
            samples: count,
            bounded: count > 0 && max.is_finite() && late <= early + 1.0,
        });
    }
    out
}
