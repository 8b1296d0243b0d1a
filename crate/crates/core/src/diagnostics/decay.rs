//! Power-law decay of the contact-wave derivatives.

use serde::Serialize;

use crate::fit::{power_law_fit, LinearFit};
use crate::waves::contact::ContactWave;

/// Expected exponents of `sup|u_x|, sup|u_t|, sup|u_xt|, sup|u_tt|`.
pub const CONTACT_EXPONENTS: [f64; 4] = [-0.5, -1.0, -1.5, -2.0];
pub const CONTACT_QUANTITIES: [&str; 4] = ["u_x", "u_t", "u_xt", "u_tt"];

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub quantity: &'static str,
    pub expected: f64,
    pub fitted: f64,
    pub r2: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContactDecay {
    pub times: Vec<f64>,
    /// `sups[q][k]` is quantity `q` at `times[k]`.
    pub sups: Vec<Vec<f64>>,
    pub fits: Vec<ExponentFit>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Times `t_lo * 2^k` up to `t_hi`, with `t_hi` appended.
pub fn dyadic_times(t_lo: f64, t_hi: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    let mut t = t_lo;
    while t < t_hi * (1.0 - 1e-12) {
        ts.push(t);
        t *= 2.0;
    }
    ts.push(t_hi);
    ts
}

/// Fits the decay exponents of the contact derivatives in the frame moving
/// with the contact, where `u_t` measures diffusion rather than transport.
pub fn contact_decay(contact: &ContactWave, times: &[f64], tolerance: f64) -> ContactDecay {
    let mut frame = contact.clone();
    frame.speed = 0.0;
    let mut sups: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(times.len())).collect();
    for &t in times {
        let sigma = frame.sigma(t);
        let mut m = [0.0f64; 4];
        for k in 0..=4000 {
            let x = -10.0 * sigma + 20.0 * sigma * k as f64 / 4000.0;
            let p = frame.point(x, t);
            for (slot, v) in m.iter_mut().zip([&p.u_x, &p.u_t, &p.u_xt, &p.u_tt]) {
                *slot = slot.max(v.amax());
            }
        }
        for (q, v) in m.iter().enumerate() {
            sups[q].push(*v);
        }
    }
    let fits: Vec<ExponentFit> = (0..4)
        .map(|q| {
            let f = power_law_fit(times, &sups[q]).unwrap_or(LinearFit {
                slope: f64::NAN,
                intercept: f64::NAN,
                r2: 0.0,
                points: 0,
            });
            ExponentFit {
                quantity: CONTACT_QUANTITIES[q],
                expected: CONTACT_EXPONENTS[q],
                fitted: f.slope,
                r2: f.r2,
                pass: (f.slope - CONTACT_EXPONENTS[q]).abs() <= tolerance,
            }
        })
        .collect();
    ContactDecay {
        times: times.to_vec(),
        pass: fits.iter().all(|f| f.pass),
        sups,
        fits,
        tolerance,
    }
}
