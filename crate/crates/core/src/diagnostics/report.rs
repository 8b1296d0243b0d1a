//! Time series of perturbation norms and the stability verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::power_law_fit;
use crate::solver::{RunFlags, Trajectory};
use crate::waves::ansatz::Ansatz;

use super::decay::{contact_decay, dyadic_times, ContactDecay};
use super::perturbation::{perturbation, PerturbationState};
use super::weights::Weights;
use super::zones::{zone_partition, ZonePartition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictOptions {
    /// Required ratio `final / initial` of `||(phi, psi)||_inf`.
    pub decay_factor: f64,
    /// Absolute level below which norms count as discretization noise.
    pub floor: f64,
    /// Allowed relative growth between consecutive snapshots after `t0`.
    pub monotone_slack: f64,
    /// Bound on `|H| / ||u0||_L1`.
    pub mass_tolerance: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            decay_factor: 0.2,
            floor: 1e-6,
            monotone_slack: 0.01,
            mass_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub phi_inf: f64,
    pub psi_inf: f64,
    pub combined_inf: f64,
    pub big_phi_l2: f64,
    pub big_phi_h1: f64,
    pub w_l2: f64,
    /// `sum_i int alpha_bar_i w_i^2 dx`.
    pub weighted_energy: f64,
    /// `weighted_energy / ||W||^2`.
    pub energy_ratio: f64,
    pub mass: Vec<f64>,
    /// `max_c |H_c| / ||u0||_L1`.
    pub mass_relative: f64,
}

impl SeriesRow {
    pub const HEADER: [&'static str; 10] = [
        "t",
        "phi_inf",
        "psi_inf",
        "combined_inf",
        "big_phi_l2",
        "big_phi_h1",
        "w_l2",
        "weighted_energy",
        "energy_ratio",
        "mass_relative",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.phi_inf,
            self.psi_inf,
            self.combined_inf,
            self.big_phi_l2,
            self.big_phi_h1,
            self.w_l2,
            self.weighted_energy,
            self.energy_ratio,
            self.mass_relative,
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub initial: f64,
    pub final_value: f64,
    /// `final / initial`.
    pub ratio: f64,
    pub threshold: f64,
    pub decayed: bool,
    pub monotone_after_t0: bool,
    /// Exponent of a power-law fit of the norm over `t >= t0`, `t > 0`.
    pub trend_exponent: Option<f64>,
    pub mass_ok: bool,
    pub max_mass_relative: f64,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyBound {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max |ratio - 1| / delta^(1/2)` over snapshots with `||W|| > 0`.
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub series: Vec<SeriesRow>,
    pub zones: ZonePartition,
    pub energy_bound: EnergyBound,
    pub contact_decay: Option<ContactDecay>,
    pub flags: RunFlags,
    pub u0_l1: f64,
    pub options: VerdictOptions,
    pub verdict: Verdict,
}

fn weighted_energy(p: &PerturbationState, ansatz: &Ansatz, weights: &Weights) -> f64 {
    let n = p.n;
    let mut e = 0.0;
    for j in 0..p.cells() {
        let w = weights.at(ansatz, p.x(j), p.t);
        for i in 0..n {
            e += w.alpha_bar[i] * p.w[j * n + i].powi(2);
        }
    }
    e * p.dx
}

/// Evaluates every snapshot of `trajectory` against `ansatz`.
pub fn energy_report(trajectory: &Trajectory, ansatz: &Ansatz, options: &VerdictOptions) -> Result<DiagnosticsReport> {
    if trajectory.snapshots.len() < 4 {
        return Err(Error::Usage(format!(
            "energy report needs at least 4 snapshots, got {}",
            trajectory.snapshots.len()
        )));
    }
    let weights = Weights::new(ansatz)?;
    let zones = zone_partition(&ansatz.fan, &ansatz.shifts);
    let u0_l1 = trajectory.snapshots[0].u.iter().map(|v| v.abs()).sum::<f64>() * trajectory.dx;
    let mut series = Vec::with_capacity(trajectory.snapshots.len());
    for k in 0..trajectory.snapshots.len() {
        let p = perturbation(&trajectory.state(k), ansatz)?;
        let weighted = weighted_energy(&p, ansatz, &weights);
        let w2 = p.norms.w_l2 * p.norms.w_l2;
        series.push(SeriesRow {
            t: p.t,
            phi_inf: p.norms.phi_inf,
            psi_inf: p.norms.psi_inf,
            combined_inf: p.norms.combined_inf,
            big_phi_l2: p.norms.big_phi_l2,
            big_phi_h1: p.norms.big_phi_h1,
            w_l2: p.norms.w_l2,
            weighted_energy: weighted,
            energy_ratio: if w2 > 0.0 { weighted / w2 } else { 1.0 },
            mass_relative: p.mass.iter().fold(0.0f64, |m, h| m.max(h.abs())) / u0_l1,
            mass: p.mass,
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in series.iter().filter(|r| r.w_l2 > 0.0) {
        lo = lo.min(r.energy_ratio);
        hi = hi.max(r.energy_ratio);
    }
    let energy_bound = EnergyBound {
        min_ratio: lo,
        max_ratio: hi,
        c: (1.0 - lo).abs().max((hi - 1.0).abs()) / ansatz.fan.delta.sqrt(),
    };
    let contact_decay = ansatz.contact().map(|c| contact_decay(c, &dyadic_times(10.0, 1000.0), 0.1));
    let verdict = verdict(&series, zones.t0, options);
    Ok(DiagnosticsReport {
        series,
        zones,
        energy_bound,
        contact_decay,
        flags: trajectory.flags.clone(),
        u0_l1,
        options: options.clone(),
        verdict,
    })
}

pub fn verdict(series: &[SeriesRow], t0: f64, options: &VerdictOptions) -> Verdict {
    let initial = series.first().map_or(0.0, |r| r.combined_inf);
    let final_value = series.last().map_or(0.0, |r| r.combined_inf);
    let threshold = options.decay_factor * initial + options.floor;
    let decayed = final_value <= threshold;
    let after: Vec<f64> = series.iter().filter(|r| r.t >= t0).map(|r| r.combined_inf).collect();
    let monotone = after
        .windows(2)
        .all(|w| w[1] <= (1.0 + options.monotone_slack) * w[0] + options.floor);
    let late: Vec<&SeriesRow> = series.iter().filter(|r| r.t >= t0 && r.t > 0.0).collect();
    let trend_exponent = power_law_fit(
        &late.iter().map(|r| r.t).collect::<Vec<_>>(),
        &late.iter().map(|r| r.combined_inf).collect::<Vec<_>>(),
    )
    .map(|f| f.slope);
    let max_mass = series.iter().fold(0.0f64, |m, r| m.max(r.mass_relative));
    let mass_ok = max_mass < options.mass_tolerance;
    let mut reasons = Vec::new();
    if !decayed {
        reasons.push(format!(
            "final norm {final_value:.3e} exceeds {:.3} x initial {initial:.3e}",
            options.decay_factor
        ));
    }
    if !monotone {
        reasons.push(format!("norm grows between snapshots after t0 = {t0:.3}"));
    }
    if !mass_ok {
        reasons.push(format!("relative perturbation mass {max_mass:.3e} above tolerance"));
    }
    Verdict {
        pass: reasons.is_empty(),
        initial,
        final_value,
        ratio: if initial > 0.0 { final_value / initial } else { 0.0 },
        threshold,
        decayed,
        monotone_after_t0: monotone,
        trend_exponent,
        mass_ok,
        max_mass_relative: max_mass,
        reasons,
    }
}
