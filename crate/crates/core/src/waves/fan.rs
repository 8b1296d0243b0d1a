//! Riemann wave fans made of Lax shocks and (at most a few) contacts.
//!
//! Every wave curve is followed on its Hugoniot locus: for a linearly
//! degenerate field the locus coincides with the integral curve of `r_p`,
//! so one Newton solver serves both wave types.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen::{self, CLASSIFICATION_TOL};
use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};

/// Absolute Rankine–Hugoniot residual accepted for a fan wave.
pub const RH_TOL: f64 = 1e-10;

/// Tolerance on `|lambda_p - s_p|` at the contact end states.
pub const CONTACT_SPEED_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveKind {
    Shock,
    Contact,
}

/// Constant states `u_1 = u_-, ..., u_{n+1} = u_+` separated by `n` waves.
#[derive(Debug, Clone)]
pub struct WaveFan {
    pub states: Vec<State>,
    pub speeds: Vec<f64>,
    /// `|u_{i+1} - u_i|`.
    pub strengths: Vec<f64>,
    /// `min_i strengths[i]`.
    pub delta: f64,
    pub kinds: Vec<WaveKind>,
    /// The requested contact field, if any.
    pub contact: Option<usize>,
    /// Residual of the composed wave-curve solve (zero for constructed fans).
    pub newton_residual: f64,
}

/// JSON view of a fan.
#[derive(Debug, Clone, Serialize)]
pub struct FanSummary {
    pub n: usize,
    pub states: Vec<Vec<f64>>,
    pub speeds: Vec<f64>,
    pub strengths: Vec<f64>,
    pub delta: f64,
    pub same_order_constant: f64,
    pub kinds: Vec<WaveKind>,
    pub contact_field: Option<usize>,
    pub rankine_hugoniot_residuals: Vec<f64>,
    pub newton_residual: f64,
}

impl WaveFan {
    pub fn n(&self) -> usize {
        self.speeds.len()
    }

    pub fn u_minus(&self) -> &State {
        &self.states[0]
    }

    pub fn u_plus(&self) -> &State {
        self.states.last().unwrap()
    }

    /// `C_2 = (delta_1 + ... + delta_n) / delta`.
    pub fn same_order_constant(&self) -> f64 {
        self.strengths.iter().sum::<f64>() / self.delta
    }

    pub fn jump(&self, i: usize) -> State {
        &self.states[i + 1] - &self.states[i]
    }

    /// `|f(u_i) - f(u_{i+1}) - s_i (u_i - u_{i+1})|_inf`.
    pub fn rh_residual(&self, model: &FluxModel, i: usize) -> f64 {
        let (l, r) = (&self.states[i], &self.states[i + 1]);
        let res = model.flux(l.as_slice()) - model.flux(r.as_slice()) - (l - r) * self.speeds[i];
        res.amax()
    }

    pub fn shock_fields(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == WaveKind::Shock)
            .map(|(i, _)| i)
    }

    pub fn summary(&self, model: &FluxModel) -> FanSummary {
        FanSummary {
            n: self.n(),
            states: self.states.iter().map(|s| s.as_slice().to_vec()).collect(),
            speeds: self.speeds.clone(),
            strengths: self.strengths.clone(),
            delta: self.delta,
            same_order_constant: self.same_order_constant(),
            kinds: self.kinds.clone(),
            contact_field: self.contact,
            rankine_hugoniot_residuals: (0..self.n()).map(|i| self.rh_residual(model, i)).collect(),
            newton_residual: self.newton_residual,
        }
    }
}

/// A point `(u, s)` on the `field`-th Hugoniot locus through `u0`,
/// parametrized by `l_field(u0) . (u - u0) = tau`.
pub fn hugoniot_point(model: &FluxModel, u0: &State, field: usize, tau: f64) -> Result<(State, f64)> {
    let n = model.dim();
    if field >= n {
        return Err(Error::Usage(format!("field index {field} out of range for n = {n}")));
    }
    let eig = eigen::eigensystem(model, u0.as_slice())?;
    if tau == 0.0 {
        return Ok((u0.clone(), eig.lambdas[field]));
    }
    let l = eig.left_vector(field);
    let f0 = model.flux(u0.as_slice());
    let mut history = Vec::new();
    for substeps in [1usize, 2, 4, 8, 16, 32] {
        let mut u = u0.clone();
        let mut ok = true;
        for k in 1..=substeps {
            let target = tau * k as f64 / substeps as f64;
            let step = tau / substeps as f64;
            let r = eigen::eigensystem(model, u.as_slice())
                .map(|e| e.right_vector(field))
                .unwrap_or_else(|_| eig.right_vector(field));
            let guess = &u + r * step;
            let s_guess = eigen::eigenvalues(model, (0.5 * (&guess + u0)).as_slice())
                .map(|lam| lam[field])
                .unwrap_or(eig.lambdas[field]);
            match newton_rh(model, u0, &f0, &l, target, guess, s_guess) {
                Ok((un, sn)) => {
                    u = un;
                    if k == substeps {
                        return Ok((u, sn));
                    }
                }
                Err(res) => {
                    history.push(res);
                    ok = false;
                    break;
                }
            }
        }
        debug_assert!(!ok);
    }
    Err(Error::Convergence {
        stage: format!("Hugoniot locus of field {field} at tau = {tau}"),
        history,
    })
}

fn newton_rh(
    model: &FluxModel,
    u0: &State,
    f0: &State,
    l: &State,
    tau: f64,
    mut u: State,
    mut s: f64,
) -> std::result::Result<(State, f64), f64> {
    let n = model.dim();
    let scale = 1.0 + f0.amax() + u0.amax();
    let mut best = f64::INFINITY;
    let mut converged_once = false;
    for _ in 0..60 {
        if model.admissible(u.as_slice()).is_err() || !s.is_finite() {
            return Err(best);
        }
        let du = &u - u0;
        let rh = model.flux(u.as_slice()) - f0 - &du * s;
        let constraint = l.dot(&du) - tau;
        let res = rh.amax().max(constraint.abs());
        best = best.min(res);
        if res < 1e-15 * scale {
            return Ok((u, s));
        }
        if res < 1e-13 * scale {
            // one polishing step, then accept
            if converged_once {
                return Ok((u, s));
            }
            converged_once = true;
        }
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let fj = model.jacobian(u.as_slice());
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = fj[(i, j)] - if i == j { s } else { 0.0 };
            }
            jac[(i, n)] = -du[i];
            jac[(n, i)] = l[i];
        }
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = -rh[i];
        }
        rhs[n] = -constraint;
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(best);
        };
        for i in 0..n {
            u[i] += step[i];
        }
        s += step[n];
    }
    if best < 1e-12 * scale {
        Ok((u, s))
    } else {
        Err(best)
    }
}

/// Composes the wave curves from `u_minus` with parameters `taus`.
fn compose(model: &FluxModel, u_minus: &State, taus: &[f64]) -> Result<(Vec<State>, Vec<f64>)> {
    let mut states = vec![u_minus.clone()];
    let mut speeds = Vec::with_capacity(taus.len());
    for (i, &tau) in taus.iter().enumerate() {
        let (u, s) = hugoniot_point(model, states.last().unwrap(), i, tau)?;
        states.push(u);
        speeds.push(s);
    }
    Ok((states, speeds))
}

/// Solves the Riemann problem `(u_minus, u_plus)` for the pattern made of
/// Lax shocks and contacts, the latter including field `contact` if given.
pub fn solve_riemann_fan(
    model: &FluxModel,
    u_minus: &State,
    u_plus: &State,
    contact: Option<usize>,
) -> Result<WaveFan> {
    let n = model.dim();
    model.admissible(u_minus.as_slice())?;
    model.admissible(u_plus.as_slice())?;
    if let Some(p) = contact {
        if p >= n {
            return Err(Error::Usage(format!("contact field {p} out of range for n = {n}")));
        }
    }
    let mid = 0.5 * (u_minus + u_plus);
    let eig = eigen::eigensystem(model, mid.as_slice())?;
    let mut taus = eig.left * (u_plus - u_minus);
    let scale = 1.0 + u_plus.amax();
    let residual = |taus: &DVector<f64>| -> Result<DVector<f64>> {
        let (states, _) = compose(model, u_minus, taus.as_slice())?;
        Ok(states.last().unwrap() - u_plus)
    };
    let mut res = residual(&taus)?;
    let mut history = vec![res.amax()];
    for _ in 0..60 {
        if res.amax() < 1e-14 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-6 * taus[k].abs().max(1e-3);
            let mut tp = taus.clone();
            let mut tm = taus.clone();
            tp[k] += h;
            tm[k] -= h;
            let col = (residual(&tp)? - residual(&tm)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let Some(step) = jac.lu().solve(&(-&res)) else {
            return Err(Error::Convergence {
                stage: "Riemann fan (singular wave-curve Jacobian)".into(),
                history,
            });
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = &taus + &step * lambda;
            if let Ok(r) = residual(&trial) {
                if r.amax() < res.amax() || r.amax() < 1e-14 * scale {
                    taus = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        history.push(res.amax());
        if !accepted {
            break;
        }
    }
    let final_res = res.amax();
    if !(final_res < 1e-10) {
        return Err(Error::Convergence {
            stage: "Riemann fan".into(),
            history,
        });
    }
    let (mut states, speeds) = compose(model, u_minus, taus.as_slice())?;
    // Pin the far state to the data; the mismatch is below the solve tolerance.
    *states.last_mut().unwrap() = u_plus.clone();
    finish_fan(model, states, speeds, contact, final_res)
}

/// Target of [`build_fan`]: a known state `anchor = u_{anchor_index}` and
/// the strength of every wave.
#[derive(Debug, Clone)]
pub struct FanDesign {
    pub anchor: State,
    pub anchor_index: usize,
    pub strengths: Vec<f64>,
    pub contact: Option<usize>,
}

/// Builds a fan outward from a known intermediate state so that each wave
/// has exactly the requested Euclidean strength.
///
/// Anchoring at the left state of the contact yields a contact at rest
/// whenever `lambda_p(anchor) = 0`.
pub fn build_fan(model: &FluxModel, design: &FanDesign) -> Result<WaveFan> {
    let n = model.dim();
    if design.strengths.len() != n {
        return Err(Error::Usage(format!(
            "need {n} strengths, got {}",
            design.strengths.len()
        )));
    }
    if design.anchor_index > n {
        return Err(Error::Usage(format!("anchor index {} exceeds n = {n}", design.anchor_index)));
    }
    if design.strengths.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Usage("wave strengths must be positive".into()));
    }
    model.admissible(design.anchor.as_slice())?;
    let mut states: Vec<Option<State>> = vec![None; n + 1];
    let mut speeds = vec![0.0; n];
    states[design.anchor_index] = Some(design.anchor.clone());
    // waves to the right of the anchor: known left state
    for i in design.anchor_index..n {
        let left = states[i].clone().unwrap();
        let (right, s) = wave_of_strength(model, &left, i, design.strengths[i], true, design.contact)?;
        states[i + 1] = Some(right);
        speeds[i] = s;
    }
    // waves to the left: known right state
    for i in (0..design.anchor_index).rev() {
        let right = states[i + 1].clone().unwrap();
        let (left, s) = wave_of_strength(model, &right, i, design.strengths[i], false, design.contact)?;
        states[i] = Some(left);
        speeds[i] = s;
    }
    let states = states.into_iter().map(|s| s.unwrap()).collect();
    finish_fan(model, states, speeds, design.contact, 0.0)
}

/// The far end of an admissible `field`-wave of strength `delta` attached
/// to `known`, which is the left state if `known_is_left`.
fn wave_of_strength(
    model: &FluxModel,
    known: &State,
    field: usize,
    delta: f64,
    known_is_left: bool,
    contact: Option<usize>,
) -> Result<(State, f64)> {
    let is_contact = contact == Some(field)
        || eigen::nonlinearity_coefficient(model, known.as_slice(), field)?.abs() < CLASSIFICATION_TOL;
    let mut last_err = None;
    for sign in [1.0, -1.0] {
        let (state, s) = match strength_on_locus(model, known, field, sign * delta, delta) {
            Ok(v) => v,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if is_contact {
            return Ok((state, s));
        }
        let (l, r) = if known_is_left { (known, &state) } else { (&state, known) };
        let lam_l = eigen::eigenvalues(model, l.as_slice())?[field];
        let lam_r = eigen::eigenvalues(model, r.as_slice())?[field];
        if lam_r < s && s < lam_l {
            return Ok((state, s));
        }
    }
    Err(last_err.unwrap_or(Error::Pattern {
        field,
        reason: format!("no admissible shock of strength {delta} found on either branch"),
    }))
}

/// Secant solve for `tau` with `|u(tau) - u0| = delta`, starting at `tau0`.
fn strength_on_locus(
    model: &FluxModel,
    u0: &State,
    field: usize,
    tau0: f64,
    delta: f64,
) -> Result<(State, f64)> {
    let gap = |tau: f64| -> Result<(f64, State, f64)> {
        let (u, s) = hugoniot_point(model, u0, field, tau)?;
        Ok(((&u - u0).norm() - delta, u, s))
    };
    let mut t0 = tau0;
    let (mut g0, mut u, mut s) = gap(t0)?;
    let mut t1 = t0 * delta / (g0 + delta);
    let mut history = vec![g0.abs()];
    for _ in 0..40 {
        let (g1, u1, s1) = gap(t1)?;
        history.push(g1.abs());
        u = u1;
        s = s1;
        if g1.abs() < 1e-15 * (1.0 + delta) {
            return Ok((u, s));
        }
        if g1 == g0 {
            break;
        }
        let t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
        t0 = t1;
        g0 = g1;
        t1 = t2;
    }
    if history.last().copied().unwrap_or(f64::INFINITY) < 1e-12 * (1.0 + delta) {
        return Ok((u, s));
    }
    Err(Error::Convergence {
        stage: format!("strength {delta} on Hugoniot locus of field {field}"),
        history,
    })
}

/// Classifies waves and checks Rankine–Hugoniot, Lax and contact speeds.
fn finish_fan(
    model: &FluxModel,
    states: Vec<State>,
    speeds: Vec<f64>,
    contact: Option<usize>,
    newton_residual: f64,
) -> Result<WaveFan> {
    let n = speeds.len();
    let strengths: Vec<f64> = (0..n).map(|i| (&states[i + 1] - &states[i]).norm()).collect();
    let delta = strengths.iter().copied().fold(f64::INFINITY, f64::min);
    let mut kinds = Vec::with_capacity(n);
    for i in 0..n {
        let mid = 0.5 * (&states[i] + &states[i + 1]);
        let coeff = eigen::nonlinearity_coefficient(model, mid.as_slice(), i)?;
        kinds.push(if coeff.abs() < CLASSIFICATION_TOL {
            WaveKind::Contact
        } else {
            WaveKind::Shock
        });
    }
    if let Some(p) = contact {
        if kinds[p] != WaveKind::Contact {
            return Err(Error::Pattern {
                field: p,
                reason: "requested contact field is not linearly degenerate".into(),
            });
        }
    }
    let fan = WaveFan {
        states,
        speeds,
        strengths,
        delta,
        kinds,
        contact,
        newton_residual,
    };
    for i in 0..n {
        let rh = fan.rh_residual(model, i);
        if rh > RH_TOL {
            return Err(Error::Convergence {
                stage: format!("Rankine-Hugoniot condition of wave {i}"),
                history: vec![rh],
            });
        }
        if fan.strengths[i] <= 1e-12 {
            continue;
        }
        let lam_l = eigen::eigenvalues(model, fan.states[i].as_slice())?[i];
        let lam_r = eigen::eigenvalues(model, fan.states[i + 1].as_slice())?[i];
        let s = fan.speeds[i];
        match fan.kinds[i] {
            WaveKind::Shock => {
                if !(lam_r < s && s < lam_l) {
                    return Err(Error::Pattern {
                        field: i,
                        reason: format!(
                            "Lax inequalities fail (lambda_l = {lam_l}, s = {s}, lambda_r = {lam_r}); \
                             the data require a rarefaction"
                        ),
                    });
                }
            }
            WaveKind::Contact => {
                if (lam_l - s).abs() > CONTACT_SPEED_TOL || (lam_r - s).abs() > CONTACT_SPEED_TOL {
                    return Err(Error::Pattern {
                        field: i,
                        reason: format!("contact speed {s} differs from lambda ({lam_l}, {lam_r})"),
                    });
                }
            }
        }
    }
    Ok(fan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> State {
        DVector::from_column_slice(x)
    }

    #[test]
    fn burgers_single_shock() {
        let m = FluxModel::burgers();
        let fan = solve_riemann_fan(&m, &v(&[1.0]), &v(&[0.0]), None).unwrap();
        assert_eq!(fan.kinds, vec![WaveKind::Shock]);
        assert!((fan.speeds[0] - 0.5).abs() < 1e-12);
        assert!((fan.strengths[0] - 1.0).abs() < 1e-12);
        assert!(fan.rh_residual(&m, 0) < 1e-12);
    }

    #[test]
    fn burgers_rarefaction_is_pattern_error() {
        let m = FluxModel::burgers();
        let err = solve_riemann_fan(&m, &v(&[0.0]), &v(&[1.0]), None).unwrap_err();
        assert!(matches!(err, Error::Pattern { field: 0, .. }), "{err:?}");
    }

    #[test]
    fn linear_two_contacts() {
        let m = FluxModel::linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let fan = solve_riemann_fan(&m, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), Some(0)).unwrap();
        assert_eq!(fan.kinds, vec![WaveKind::Contact, WaveKind::Contact]);
        assert!((fan.speeds[0] + 1.0).abs() < 1e-12 && (fan.speeds[1] - 1.0).abs() < 1e-12);
        assert!((&fan.states[1] - v(&[0.5, 0.5])).amax() < 1e-12);
    }

    #[test]
    fn contact_request_on_shock_field_fails() {
        let m = FluxModel::burgers();
        let err = solve_riemann_fan(&m, &v(&[1.0]), &v(&[0.0]), Some(0)).unwrap_err();
        assert!(matches!(err, Error::Pattern { field: 0, .. }));
    }

    #[test]
    fn hugoniot_points_satisfy_rankine_hugoniot() {
        let m = FluxModel::euler(1.4).unwrap();
        let u0 = v(&[1.0, 0.0, 2.5]);
        for field in 0..3 {
            for tau in [-0.1, -0.02, 0.03, 0.1] {
                let (u, s) = hugoniot_point(&m, &u0, field, tau).unwrap();
                let res = m.flux(u.as_slice()) - m.flux(u0.as_slice()) - (&u - &u0) * s;
                assert!(res.amax() < 1e-13, "field {field} tau {tau}: {}", res.amax());
            }
        }
    }

    #[test]
    fn build_fan_hits_strengths() {
        let m = FluxModel::euler(1.4).unwrap();
        let design = FanDesign {
            anchor: v(&[1.0, 0.0, 2.5]),
            anchor_index: 1,
            strengths: vec![0.05, 0.05, 0.05],
            contact: Some(1),
        };
        let fan = build_fan(&m, &design).unwrap();
        for d in &fan.strengths {
            assert!((d - 0.05).abs() < 1e-12);
        }
        assert!(fan.speeds[1].abs() < 1e-12);
        assert_eq!(fan.kinds, vec![WaveKind::Shock, WaveKind::Contact, WaveKind::Shock]);
        assert!((fan.same_order_constant() - 3.0).abs() < 1e-9);
    }
}
