//! The five subcommands. Each writes into its run directory and returns the
//! exit code together with a one-line summary.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use relaxwave_core::diagnostics::report::SeriesRow;
use relaxwave_core::diagnostics::suite::{
    CONTACT_PDE_TOL, ENVELOPE_SLACK, EXPONENT_TOL, HEAT_NORM_TOL, HEAT_PDE_TOL, WEIGHT_C_SPREAD, WEIGHT_IDENTITY_TOL,
};
use relaxwave_core::diagnostics::{
    contact_decay, dyadic_times, energy_report, run_checks, CheckInputs, ContactDecay,
};
use relaxwave_core::eigen::{check_subcharacteristic, SubcharacteristicReport};
use relaxwave_core::initial::prepare;
use relaxwave_core::solver;
use relaxwave_core::waves::fan::{FanSummary, WaveKind, RH_TOL};
use relaxwave_core::waves::profile::ProfileChecks;
use relaxwave_core::{
    build_fan, solve_riemann_fan, Ansatz, ContactWave, FanDesign, FluxModel, ShockProfile, WaveFan,
};

use crate::config::{ExperimentConfig, FanConfig};
use crate::error::{CliError, EXIT_ASSERTION, EXIT_OK};
use crate::output::{columns, header, RunDir};

pub struct Outcome {
    pub exit_code: u8,
    pub summary: String,
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome {
        exit_code: if pass { EXIT_OK } else { EXIT_ASSERTION },
        summary,
    }
}

fn state(v: &[f64], n: usize, what: &str) -> Result<DVector<f64>, CliError> {
    if v.len() != n {
        return Err(CliError::usage(format!("{what} has {} components, the model has {n}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

fn fan_design(config: &ExperimentConfig, model: &FluxModel) -> Result<FanDesign, CliError> {
    let n = model.dim();
    match &config.fan {
        FanConfig::Design {
            anchor,
            anchor_index,
            strengths,
        } => Ok(FanDesign {
            anchor: state(anchor, n, "fan.anchor")?,
            anchor_index: *anchor_index,
            strengths: strengths.clone(),
            contact: config.contact_field,
        }),
        FanConfig::Riemann { .. } => {
            let fan = wave_fan(config, model)?;
            Ok(FanDesign {
                anchor: fan.u_minus().clone(),
                anchor_index: 0,
                strengths: fan.strengths.clone(),
                contact: config.contact_field,
            })
        }
    }
}

pub fn wave_fan(config: &ExperimentConfig, model: &FluxModel) -> Result<WaveFan, CliError> {
    let n = model.dim();
    let fan = match &config.fan {
        FanConfig::Riemann { u_minus, u_plus } => solve_riemann_fan(
            model,
            &state(u_minus, n, "fan.u_minus")?,
            &state(u_plus, n, "fan.u_plus")?,
            config.contact_field,
        ),
        FanConfig::Design { .. } => build_fan(model, &fan_design(config, model)?),
    };
    fan.map_err(|e| CliError::core("fan", e))
}

// ---------------------------------------------------------------- riemann

#[derive(Serialize)]
struct RiemannReport {
    fan: FanSummary,
    subcharacteristic: SubcharacteristicReport,
    pass: bool,
}

pub fn riemann(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let model = config.model()?;
    let fan = wave_fan(config, &model)?;
    let summary = fan.summary(&model);
    let sub = check_subcharacteristic(&model, &fan.states, config.a).map_err(|e| CliError::core("fan", e))?;
    let n = fan.n();
    let states: Vec<Vec<f64>> = fan
        .states
        .iter()
        .enumerate()
        .map(|(k, u)| std::iter::once(k as f64).chain(u.iter().copied()).collect())
        .collect();
    dir.write_csv("states.csv", &header(&["k"], columns("u", model.dim())), &states)?;
    let waves: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            vec![
                i as f64,
                if fan.kinds[i] == WaveKind::Contact { 1.0 } else { 0.0 },
                fan.speeds[i],
                fan.strengths[i],
                summary.rankine_hugoniot_residuals[i],
            ]
        })
        .collect();
    let wave_header = ["field", "is_contact", "speed", "strength", "rh_residual"].map(String::from);
    dir.write_csv("waves.csv", &wave_header, &waves)?;
    let worst = summary.rankine_hugoniot_residuals.iter().copied().fold(0.0, f64::max);
    let pass = worst < RH_TOL;
    dir.tolerance("rankine_hugoniot", RH_TOL);
    dir.write_json("fan.json", &summary)?;
    let line = format!(
        "riemann: {} {n} waves, delta = {:.4e}, speeds {:?}, max RH residual {worst:.3e}",
        verdict_word(pass),
        summary.delta,
        summary.speeds.iter().map(|s| format!("{s:.6}")).collect::<Vec<_>>()
    );
    dir.write_json(
        "report.json",
        &RiemannReport {
            fan: summary,
            subcharacteristic: sub,
            pass,
        },
    )?;
    Ok(outcome(pass, line))
}

// ---------------------------------------------------------------- profile

#[derive(Serialize)]
struct ProfileEntry {
    field: usize,
    speed: f64,
    strength: f64,
    rate_left: f64,
    rate_right: f64,
    subcharacteristic_margin: f64,
    checks: ProfileChecks,
    pass: bool,
}

#[derive(Serialize)]
struct ProfileReport {
    fan: FanSummary,
    profiles: Vec<ProfileEntry>,
    pass: bool,
}

pub fn profile(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let model = config.model()?;
    let fan = wave_fan(config, &model)?;
    let fields: Vec<usize> = match config.profile.field {
        Some(i) if i >= fan.n() => {
            return Err(CliError::usage(format!("profile.field {i} out of range for n = {}", fan.n())))
        }
        Some(i) if fan.kinds[i] != WaveKind::Shock => {
            return Err(CliError::usage(format!("field {i} carries a contact wave, not a shock")))
        }
        Some(i) => vec![i],
        None => fan.shock_fields().collect(),
    };
    let p = &config.profile;
    dir.tolerance("ode_residual", p.residual_tolerance);
    dir.tolerance("endpoint_error", p.endpoint_tolerance);
    let n = model.dim();
    let mut entries = Vec::new();
    for i in fields {
        let prof = ShockProfile::from_fan(&model, config.a, &fan, i).map_err(|e| CliError::core("profile", e))?;
        let checks = prof.checks().map_err(|e| CliError::core("profile", e))?;
        let rows = prof.samples(p.half_width, p.samples);
        let cols = header(&["xi"], columns("phi", n).chain(columns("dphi", n)));
        dir.write_csv(&format!("profile_{i}.csv"), &cols, &rows)?;
        let pass = checks.max_ode_residual < p.residual_tolerance
            && checks.endpoint_error < p.endpoint_tolerance
            && checks.lambda_monotone;
        entries.push(ProfileEntry {
            field: i,
            speed: prof.speed,
            strength: prof.strength,
            rate_left: prof.rate_left,
            rate_right: prof.rate_right,
            subcharacteristic_margin: prof.subcharacteristic_margin,
            checks,
            pass,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    let line = format!(
        "profile: {} fields {:?}, max ODE residual {:.3e}, max endpoint error {:.3e}",
        verdict_word(pass),
        entries.iter().map(|e| e.field).collect::<Vec<_>>(),
        entries.iter().map(|e| e.checks.max_ode_residual).fold(0.0, f64::max),
        entries.iter().map(|e| e.checks.endpoint_error).fold(0.0, f64::max),
    );
    dir.write_json(
        "report.json",
        &ProfileReport {
            fan: fan.summary(&model),
            profiles: entries,
            pass,
        },
    )?;
    Ok(outcome(pass, line))
}

// ---------------------------------------------------------------- contact

#[derive(Serialize)]
struct ContactReport {
    field: usize,
    speed: f64,
    rho_minus: f64,
    rho_plus: f64,
    affine: bool,
    structural_deviation: f64,
    pde_residual: f64,
    decay: ContactDecay,
    pass: bool,
}

fn decay_rows(d: &ContactDecay) -> Vec<Vec<f64>> {
    d.times
        .iter()
        .enumerate()
        .map(|(k, t)| std::iter::once(*t).chain(d.sups.iter().map(|s| s[k])).collect())
        .collect()
}

pub fn contact(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let model = config.model()?;
    if config.contact_field.is_none() {
        return Err(CliError::usage("contact needs contact_field".into()));
    }
    let fan = wave_fan(config, &model)?;
    let c = ContactWave::from_fan(&model, config.a, &fan, config.curve_mode)
        .map_err(|e| CliError::core("contact", e))?;
    let n = model.dim();
    let cc = &config.contact;
    let mut rows = Vec::new();
    let mut residual = 0.0f64;
    for &t in &cc.times {
        let sigma = c.sigma(t);
        for k in 0..cc.samples {
            let y = -cc.sigmas * sigma + 2.0 * cc.sigmas * sigma * k as f64 / (cc.samples - 1) as f64;
            let x = y + c.speed * t;
            let p = c.point(x, t);
            residual = residual.max(c.pde_residual(x, t).amax());
            rows.push(
                [t, x, p.rho]
                    .into_iter()
                    .chain(p.u.iter().copied())
                    .chain(p.u_x.iter().copied())
                    .chain(p.u_t.iter().copied())
                    .collect(),
            );
        }
    }
    let cols = header(&["t", "x", "rho"], columns("u", n).chain(columns("u_x", n)).chain(columns("u_t", n)));
    dir.write_csv("contact.csv", &cols, &rows)?;
    let decay = contact_decay(&c, &dyadic_times(cc.decay_t_min, cc.decay_t_max), cc.exponent_tolerance);
    let decay_cols = ["t", "sup_u_x", "sup_u_t", "sup_u_xt", "sup_u_tt"].map(String::from);
    dir.write_csv("contact_decay.csv", &decay_cols, &decay_rows(&decay))?;
    dir.tolerance("pde_residual", CONTACT_PDE_TOL);
    dir.tolerance("exponent", cc.exponent_tolerance);
    let pass = residual < CONTACT_PDE_TOL && decay.pass;
    let line = format!(
        "contact: {} PDE residual {residual:.3e}, exponents [{}]",
        verdict_word(pass),
        decay
            .fits
            .iter()
            .map(|f| format!("{}:{:.3}", f.quantity, f.fitted))
            .collect::<Vec<_>>()
            .join(", ")
    );
    dir.write_json(
        "report.json",
        &ContactReport {
            field: c.field,
            speed: c.speed,
            rho_minus: c.rho_minus,
            rho_plus: c.rho_plus,
            affine: c.curve.is_affine(),
            structural_deviation: c.structural_deviation,
            pde_residual: residual,
            decay,
            pass,
        },
    )?;
    Ok(outcome(pass, line))
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    times: Vec<f64>,
    steps: usize,
    dx: f64,
    shifts: &'a [f64],
    mass_ledger: &'a [solver::MassRecord],
    flags: &'a solver::RunFlags,
    boundary_clearance: &'a relaxwave_core::waves::ansatz::BoundaryClearance,
}

pub fn simulate(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let model = config.model()?;
    let fan = wave_fan(config, &model)?;
    let base = Ansatz::new(&model, config.a, fan, config.curve_mode).map_err(|e| CliError::core("ansatz", e))?;
    let solver_config = config.solver_config();
    let mut setup = prepare(&solver_config, &base, &config.perturbation).map_err(|e| CliError::core("setup", e))?;
    let clearance = setup.clearance.clone();
    let traj = solver::run(&mut setup.solver, setup.state, Some(clearance.min_efolds))
        .map_err(|e| CliError::core("solver", e))?;
    let report =
        energy_report(&traj, &setup.ansatz, &config.verdict).map_err(|e| CliError::core("diagnostics", e))?;

    let n = traj.n;
    let cols = header(&["x"], columns("u", n).chain(columns("v", n)));
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..traj.cells())
            .map(|j| {
                std::iter::once(traj.x(j))
                    .chain(snap.u[j * n..(j + 1) * n].iter().copied())
                    .chain(snap.v[j * n..(j + 1) * n].iter().copied())
                    .collect()
            })
            .collect();
        dir.write_csv(&format!("snapshot_{k:03}.csv"), &cols, &rows)?;
    }
    let series: Vec<Vec<f64>> = report.series.iter().map(|r| r.values().to_vec()).collect();
    let series_cols: Vec<String> = SeriesRow::HEADER.iter().map(|s| s.to_string()).collect();
    dir.write_csv("series.csv", &series_cols, &series)?;
    dir.write_json(
        "trajectory.json",
        &TrajectoryMeta {
            times: traj.snapshots.iter().map(|s| s.t).collect(),
            steps: traj.steps,
            dx: traj.dx,
            shifts: &setup.ansatz.shifts,
            mass_ledger: &traj.mass_ledger,
            flags: &traj.flags,
            boundary_clearance: &clearance,
        },
    )?;
    dir.write_json("report.json", &report)?;
    dir.tolerance("decay_factor", config.verdict.decay_factor);
    dir.tolerance("floor", config.verdict.floor);
    dir.tolerance("monotone_slack", config.verdict.monotone_slack);
    dir.tolerance("mass_tolerance", config.verdict.mass_tolerance);
    let v = &report.verdict;
    let mut line = format!(
        "simulate: {} ||(phi,psi)||_inf {:.4e} -> {:.4e} (ratio {:.4}), max |H|/||u0|| {:.3e}, {} steps",
        verdict_word(v.pass),
        v.initial,
        v.final_value,
        v.ratio,
        v.max_mass_relative,
        traj.steps
    );
    if traj.flags.boundary_contamination {
        line.push_str(", warning: boundary contamination");
    }
    if !v.reasons.is_empty() {
        line.push_str(&format!("; {}", v.reasons.join("; ")));
    }
    Ok(outcome(v.pass, line))
}

// ---------------------------------------------------------------- check

#[derive(Serialize)]
struct CheckOutput<'a> {
    gammas: &'a [f64],
    report: &'a relaxwave_core::diagnostics::CheckReport,
}

/// Heat-kernel parameters drawn uniformly from `gamma_range`.
pub fn sample_gammas(config: &ExperimentConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let [lo, hi] = config.check.gamma_range;
    (0..config.check.gamma_count).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn check(config: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let model = config.model()?;
    let design = fan_design(config, &model)?;
    let n = model.dim();
    let shifts = match &config.check.shifts {
        Some(s) if s.len() != n => {
            return Err(CliError::usage(format!("check.shifts needs {n} entries, got {}", s.len())))
        }
        Some(s) => s.clone(),
        None => vec![0.0; n],
    };
    let gammas = sample_gammas(config);
    let inputs = CheckInputs {
        model,
        a: config.a,
        design,
        mode: config.curve_mode,
        sweep_strengths: config.check.sweep_strengths.clone(),
        shifts,
        gammas: gammas.clone(),
        heat_times: config.check.heat_times.clone(),
        envelope: config.envelope_grid(),
    };
    let r = run_checks(&inputs).map_err(|e| CliError::core("check", e))?;
    for (name, tol) in [
        ("rankine_hugoniot", RH_TOL),
        ("contact_pde_residual", CONTACT_PDE_TOL),
        ("exponent", EXPONENT_TOL),
        ("heat_norm", HEAT_NORM_TOL),
        ("heat_pde_residual", HEAT_PDE_TOL),
        ("weight_identity", WEIGHT_IDENTITY_TOL),
        ("weight_c_spread", WEIGHT_C_SPREAD),
        ("envelope_slack", ENVELOPE_SLACK),
    ] {
        dir.tolerance(name, tol);
    }
    if let Some(d) = &r.contact_decay {
        let decay_cols = ["t", "sup_u_x", "sup_u_t", "sup_u_xt", "sup_u_tt"].map(String::from);
        dir.write_csv("contact_decay.csv", &decay_cols, &decay_rows(d))?;
    }
    let heat: Vec<Vec<f64>> = r
        .heat
        .iter()
        .map(|h| vec![h.gamma, h.t, h.norm_error, h.pde_residual])
        .collect();
    dir.write_csv("heat.csv", &["gamma", "t", "norm_error", "pde_residual"].map(String::from), &heat)?;
    let sweep: Vec<Vec<f64>> = r
        .sweep
        .iter()
        .map(|e| {
            vec![
                e.strength,
                e.fan.delta,
                e.weights.c,
                e.weights.min_alpha_bar,
                e.weights.max_alpha_bar,
                e.weights.identity_residual,
            ]
        })
        .collect();
    let sweep_cols = ["strength", "delta", "c", "min_alpha_bar", "max_alpha_bar", "identity_residual"].map(String::from);
    dir.write_csv("weights.csv", &sweep_cols, &sweep)?;
    dir.write_json(
        "report.json",
        &CheckOutput {
            gammas: &gammas,
            report: &r,
        },
    )?;
    let exponents = r
        .contact_decay
        .as_ref()
        .map(|d| d.fits.iter().map(|f| format!("{:.3}", f.fitted)).collect::<Vec<_>>().join(", "))
        .unwrap_or_else(|| "no contact".into());
    let mut line = format!(
        "check: {} exponents [{exponents}], C spread {:.1}%, envelope worst ratio {:.3}",
        verdict_word(r.pass),
        100.0 * r.weight_c_spread,
        r.envelope_validation.max_ratio
    );
    if !r.failures.is_empty() {
        line.push_str(&format!("; {}", r.failures.join("; ")));
    }
    Ok(outcome(r.pass, line))
}
