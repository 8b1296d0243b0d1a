use nalgebra::DVector;
use relaxwave_core::error::Error;
use relaxwave_core::flux::FluxModel;
use relaxwave_core::waves::ansatz::compute_shifts;
use relaxwave_core::waves::fan::{WaveKind, CONTACT_SPEED_TOL, RH_TOL};
use relaxwave_core::waves::profile::shock_profile;
use relaxwave_core::{build_fan, solve_riemann_fan, Ansatz, CurveMode, FanDesign, State};

fn v(xs: &[f64]) -> State {
    DVector::from_column_slice(xs)
}

fn euler_design(delta: f64) -> FanDesign {
    FanDesign {
        anchor: DVector::from_vec(vec![1.0, 0.0, 2.5]),
        anchor_index: 1,
        strengths: vec![delta; 3],
        contact: Some(1),
    }
}

#[test]
fn burgers_profile_matches_logistic() {
    let m = FluxModel::burgers();
    let fan = solve_riemann_fan(&m, &v(&[1.0]), &v(&[0.0]), None).unwrap();
    assert!((fan.speeds[0] - 0.5).abs() < 1e-14);
    let p = shock_profile(&m, 1.0, &fan, 0).unwrap();
    // (a^2 - s^2) phi' = phi (phi - 1) / 2 with phi(0) = 1/2
    for k in -40..=40 {
        let xi = 0.5 * k as f64;
        let exact = 1.0 / (1.0 + (xi / 1.5).exp());
        assert!((p.phi(xi)[0] - exact).abs() < 1e-8, "xi = {xi}");
    }
}

#[test]
fn rarefaction_data_is_a_pattern_error() {
    let m = FluxModel::burgers();
    let err = solve_riemann_fan(&m, &v(&[0.0]), &v(&[1.0]), None).unwrap_err();
    assert!(matches!(err, Error::Pattern { field: 0, .. }), "{err}");
}

#[test]
fn euler_fan_has_requested_strengths_and_resting_contact() {
    let m = FluxModel::euler(1.4).unwrap();
    let fan = build_fan(&m, &euler_design(0.05)).unwrap();
    assert_eq!(fan.kinds, vec![WaveKind::Shock, WaveKind::Contact, WaveKind::Shock]);
    for i in 0..3 {
        assert!((fan.strengths[i] - 0.05).abs() < 1e-10);
        assert!(fan.rh_residual(&m, i) < RH_TOL);
    }
    assert!(fan.speeds[1].abs() < CONTACT_SPEED_TOL);
    assert!(fan.speeds[0] < 0.0 && fan.speeds[2] > 0.0);
    // Lax: lambda_i(u_l) > s_i > lambda_i(u_r) for the shocks
    for i in [0, 2] {
        let ll = relaxwave_core::eigen::eigenvalues(&m, fan.states[i].as_slice()).unwrap()[i];
        let lr = relaxwave_core::eigen::eigenvalues(&m, fan.states[i + 1].as_slice()).unwrap()[i];
        assert!(ll > fan.speeds[i] && fan.speeds[i] > lr);
    }
}

#[test]
fn riemann_solve_recovers_designed_fan() {
    let m = FluxModel::euler(1.4).unwrap();
    let designed = build_fan(&m, &euler_design(0.05)).unwrap();
    let solved = solve_riemann_fan(&m, designed.u_minus(), designed.u_plus(), Some(1)).unwrap();
    for (a, b) in designed.states.iter().zip(&solved.states) {
        assert!((a - b).amax() < 1e-9);
    }
}

#[test]
fn ansatz_tends_to_far_field_states() {
    let m = FluxModel::euler(1.4).unwrap();
    let fan = build_fan(&m, &euler_design(0.05)).unwrap();
    let an = Ansatz::new(&m, 2.0, fan, CurveMode::Auto).unwrap();
    // weak shocks have tails of length 1 / rate, several hundred here
    let far = 40.0 / (0..3).filter_map(|i| an.profile(i)).map(|p| p.rate_left.min(p.rate_right)).fold(f64::INFINITY, f64::min);
    for t in [0.0, 10.0] {
        assert!((an.u(-far, t) - an.u_minus()).amax() < 1e-10);
        assert!((an.u(far, t) - an.u_plus()).amax() < 1e-10);
    }
    let (_, va) = an.uv(-far, 0.0);
    assert!((va - m.flux(an.u_minus().as_slice())).amax() < 1e-10);
}

#[test]
fn shifts_absorb_perturbation_mass() {
    let m = FluxModel::burgers();
    let fan = solve_riemann_fan(&m, &v(&[0.5]), &v(&[-0.5]), None).unwrap();
    let an = Ansatz::new(&m, 1.0, fan, CurveMode::Auto).unwrap();
    let (half, cells) = (40.0, 1600);
    let dx = 2.0 * half / cells as f64;
    let xs: Vec<f64> = (0..cells).map(|j| -half + (j as f64 + 0.5) * dx).collect();
    let bump = |x: f64| 0.05 * (-(x - 3.0) * (x - 3.0)).exp();
    let u0: Vec<f64> = xs.iter().map(|&x| an.u(x, 0.0)[0] + bump(x)).collect();
    let shifts = compute_shifts(&an, &xs, dx, &u0).unwrap();
    // a shock of jump -1 moves by the added mass
    let added = 0.05 * std::f64::consts::PI.sqrt();
    assert!((shifts[0] - added).abs() < 1e-6, "shift {}", shifts[0]);
    let shifted = an.with_shifts(shifts).unwrap();
    let residual: f64 = xs.iter().zip(&u0).map(|(&x, u)| u - shifted.u(x, 0.0)[0]).sum::<f64>() * dx;
    assert!(residual.abs() < 1e-8, "residual mass {residual:e}");
}
