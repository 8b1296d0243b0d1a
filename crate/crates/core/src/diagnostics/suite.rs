//! Property suite over a constructed fan, without time integration.

use serde::Serialize;

use crate::error::Result;
use crate::flux::FluxModel;
use crate::waves::ansatz::Ansatz;
use crate::waves::contact::CurveMode;
use crate::waves::fan::{build_fan, FanDesign, FanSummary, RH_TOL};
use crate::waves::profile::ProfileChecks;

use super::decay::{contact_decay, dyadic_times, ContactDecay};
use super::envelope::{fit_envelope, validate_envelope, EnvelopeGrid, EnvelopeValidation, ErrorEnvelope};
use super::heat::{heat_report, HeatReport};
use super::weights::{weight_bounds, WeightBounds, Weights};
use super::zones::{zone_decay, zone_partition, ZoneDecay, ZonePartition};

pub const HEAT_NORM_TOL: f64 = 1e-8;
pub const HEAT_PDE_TOL: f64 = 1e-6;
pub const WEIGHT_IDENTITY_TOL: f64 = 1e-6;
pub const CONTACT_PDE_TOL: f64 = 1e-6;
pub const EXPONENT_TOL: f64 = 0.1;
/// Allowed spread `max C / min C - 1` of the weight constant.
pub const WEIGHT_C_SPREAD: f64 = 0.3;
pub const ENVELOPE_SLACK: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct CheckInputs {
    pub model: FluxModel,
    pub a: f64,
    pub design: FanDesign,
    pub mode: CurveMode,
    /// Common wave strength of each fan in the weight and profile sweep.
    pub sweep_strengths: Vec<f64>,
    pub shifts: Vec<f64>,
    pub gammas: Vec<f64>,
    pub heat_times: Vec<f64>,
    pub envelope: EnvelopeGrid,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContactCheck {
    pub affine: bool,
    pub structural_deviation: f64,
    /// `max |u_t + f(u)_x - a^2 u_xx|` on `x in [-50, 50]`, `t in {0, 1, 10, 100}`.
    pub pde_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub strength: f64,
    pub fan: FanSummary,
    pub profiles: Vec<ProfileChecks>,
    pub weights: WeightBounds,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub fan: FanSummary,
    pub profiles: Vec<ProfileChecks>,
    pub contact: Option<ContactCheck>,
    pub contact_decay: Option<ContactDecay>,
    pub heat: Vec<HeatReport>,
    pub sweep: Vec<SweepEntry>,
    /// `max C / min C - 1` across the sweep.
    pub weight_c_spread: f64,
    pub zones: ZonePartition,
    pub zone_decay: Vec<ZoneDecay>,
    pub envelope: ErrorEnvelope,
    pub envelope_validation: EnvelopeValidation,
    pub failures: Vec<String>,
    pub pass: bool,
}

fn profile_checks(ansatz: &Ansatz) -> Result<Vec<ProfileChecks>> {
    (0..ansatz.n())
        .filter_map(|i| ansatz.profile(i))
        .map(|p| p.checks())
        .collect()
}

pub fn contact_check(ansatz: &Ansatz) -> Option<ContactCheck> {
    let c = ansatz.contact()?;
    let mut res = 0.0f64;
    for t in [0.0, 1.0, 10.0, 100.0] {
        for k in 0..=2000 {
            let x = -50.0 + 0.05 * k as f64;
            res = res.max(c.pde_residual(x, t).amax());
        }
    }
    Some(ContactCheck {
        affine: c.curve.is_affine(),
        structural_deviation: c.structural_deviation,
        pde_residual: res,
    })
}

fn sample_grid(half_width: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (count - 1) as f64)
        .collect()
}

pub fn run_checks(inputs: &CheckInputs) -> Result<CheckReport> {
    let model = &inputs.model;
    let mut failures = Vec::new();

    let fan = build_fan(model, &inputs.design)?;
    let ansatz = Ansatz::new(model, inputs.a, fan, inputs.mode)?.with_shifts(inputs.shifts.clone())?;
    let summary = ansatz.fan.summary(model);
    for (i, r) in summary.rankine_hugoniot_residuals.iter().enumerate() {
        if *r >= RH_TOL {
            failures.push(format!("wave {i}: Rankine-Hugoniot residual {r:.3e}"));
        }
    }
    let profiles = profile_checks(&ansatz)?;
    for p in &profiles {
        if !p.lambda_monotone {
            failures.push(format!("wave {}: lambda not decreasing along the profile", p.field));
        }
    }

    let contact = contact_check(&ansatz);
    if let Some(c) = &contact {
        if c.pde_residual >= CONTACT_PDE_TOL {
            failures.push(format!("contact PDE residual {:.3e}", c.pde_residual));
        }
    }
    let decay = ansatz
        .contact()
        .map(|c| contact_decay(c, &dyadic_times(10.0, 1000.0), EXPONENT_TOL));
    if let Some(d) = &decay {
        for f in d.fits.iter().filter(|f| !f.pass) {
            failures.push(format!("{} decays like t^{:.3}, expected {}", f.quantity, f.fitted, f.expected));
        }
    }

    let mut heat = Vec::new();
    for &gamma in &inputs.gammas {
        for &t in &inputs.heat_times {
            let r = heat_report(gamma, t)?;
            if r.norm_error >= HEAT_NORM_TOL || r.pde_residual >= HEAT_PDE_TOL {
                failures.push(format!(
                    "heat identities at gamma = {gamma}, t = {t}: norm error {:.3e}, pde residual {:.3e}",
                    r.norm_error, r.pde_residual
                ));
            }
            heat.push(r);
        }
    }

    let mut sweep = Vec::new();
    let xs = sample_grid(60.0, 1201);
    let ts = [0.0, 1.0, 10.0, 100.0];
    for &delta in &inputs.sweep_strengths {
        let design = FanDesign {
            strengths: vec![delta; model.dim()],
            ..inputs.design.clone()
        };
        let fan = build_fan(model, &design)?;
        let a = Ansatz::new(model, inputs.a, fan, inputs.mode)?;
        let profiles = profile_checks(&a)?;
        for p in &profiles {
            if !p.lambda_monotone {
                failures.push(format!("strength {delta}, wave {}: lambda not decreasing", p.field));
            }
        }
        let weights = Weights::new(&a)?;
        let bounds = weight_bounds(&a, &weights, &xs, &ts);
        if !bounds.contact_weight_is_one || !bounds.self_beta_is_one {
            failures.push(format!("strength {delta}: unit weights violated"));
        }
        if bounds.identity_residual >= WEIGHT_IDENTITY_TOL {
            failures.push(format!(
                "strength {delta}: weight identity residual {:.3e}",
                bounds.identity_residual
            ));
        }
        sweep.push(SweepEntry {
            strength: delta,
            fan: a.fan.summary(model),
            profiles,
            weights: bounds,
        });
    }
    let cs: Vec<f64> = sweep.iter().map(|e| e.weights.c).collect();
    let c_max = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_min = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let weight_c_spread = if cs.is_empty() { 0.0 } else { c_max / c_min - 1.0 };
    if weight_c_spread > WEIGHT_C_SPREAD {
        failures.push(format!("weight constant C varies by {:.1}% across strengths", 100.0 * weight_c_spread));
    }

    let zones = zone_partition(&ansatz.fan, &ansatz.shifts);
    let zone_ts: Vec<f64> = (1..=16).map(|k| zones.t0 + 12.5 * k as f64).collect();
    let decays = zone_decay(&ansatz, &zones, inputs.envelope.x_half_width, &zone_ts);
    for d in decays.iter().filter(|d| !d.bounded) {
        failures.push(format!("wave {}: derivative not bounded by the zone decay", d.wave));
    }

    let envelope = fit_envelope(&ansatz, &zones, &inputs.envelope);
    let validation = validate_envelope(&ansatz, &envelope, &inputs.envelope, ENVELOPE_SLACK);
    if !validation.pass {
        failures.push(format!(
            "E1 exceeds its envelope at {} points (worst ratio {:.3})",
            validation.violations, validation.max_ratio
        ));
    }

    Ok(CheckReport {
        fan: summary,
        profiles,
        contact,
        contact_decay: decay,
        heat,
        sweep,
        weight_c_spread,
        zones,
        zone_decay: decays,
        envelope,
        envelope_validation: validation,
        pass: failures.is_empty(),
        failures,
    })
}
