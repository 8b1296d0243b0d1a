//! Adaptive Dormand–Prince 5(4) integration of autonomous systems.

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub t_max: f64,
    pub max_steps: usize,
}

/// Accepted nodes of an integration; `ys[k]` belongs to `ts[k]`.
#[derive(Debug, Clone, Default)]
pub struct OdePath {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeOutcome {
    /// The observer requested a stop.
    Stopped,
    /// `t_max` reached.
    Horizon,
    /// The observer aborted at the given time.
    Aborted(f64),
    StepLimit,
    StepUnderflow(f64),
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = rhs(y)` from `y0` at `t = 0`.
///
/// `observe` sees every accepted node (including the initial one) and may
/// stop or abort the integration.
pub fn integrate<R, O>(mut rhs: R, y0: &[f64], opts: &OdeOptions, mut observe: O) -> (OdePath, OdeOutcome)
where
    R: FnMut(&[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> Control,
{
    let n = y0.len();
    let mut path = OdePath::default();
    let mut t = 0.0;
    let mut y = y0.to_vec();
    path.ts.push(t);
    path.ys.push(y.clone());
    match observe(t, &y) {
        Control::Continue => {}
        Control::Stop => return (path, OdeOutcome::Stopped),
        Control::Abort => return (path, OdeOutcome::Aborted(t)),
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    rhs(&y, &mut k1);

    let mut h = opts.h_init.min(opts.h_max);
    let mut steps = 0;
    while t < opts.t_max {
        if steps >= opts.max_steps {
            return (path, OdeOutcome::StepLimit);
        }
        h = h.min(opts.t_max - t).min(opts.h_max);
        if h < 1e-14 * (1.0 + t.abs()) {
            return (path, OdeOutcome::StepUnderflow(t));
        }
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(&tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(&tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(&y_new, &mut k7);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        steps += 1;
        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            path.ts.push(t);
            path.ys.push(y.clone());
            match observe(t, &y) {
                Control::Continue => {}
                Control::Stop => return (path, OdeOutcome::Stopped),
                Control::Abort => return (path, OdeOutcome::Aborted(t)),
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
        }
    }
    (path, OdeOutcome::Horizon)
}
