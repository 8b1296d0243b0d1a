//! The error-function primitive `g(x, t) = (1+t)^(-1/2) int_{-inf}^x exp(-gamma y^2 / (1+t)) dy`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelG {
    pub gamma: f64,
}

impl HeatKernelG {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Usage(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        heat_g(self.gamma, x, t)
    }

    /// `sup_x g(x, t) = lim_{x -> inf} g = sqrt(pi / gamma)`.
    pub fn norm(&self) -> f64 {
        (std::f64::consts::PI / self.gamma).sqrt()
    }

    /// `g_x = (1+t)^(-1/2) exp(-gamma x^2 / (1+t))`.
    pub fn g_x(&self, x: f64, t: f64) -> f64 {
        (-self.gamma * x * x / (1.0 + t)).exp() / (1.0 + t).sqrt()
    }
}

pub fn heat_g(gamma: f64, x: f64, t: f64) -> f64 {
    let s = (gamma / (1.0 + t)).sqrt();
    (std::f64::consts::PI / gamma).sqrt() * 0.5 * libm::erfc(-x * s)
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatReport {
    pub gamma: f64,
    pub t: f64,
    pub norm_expected: f64,
    /// Defining integral over `(-inf, x_max]` by quadrature.
    pub norm_quadrature: f64,
    pub norm_closed_form: f64,
    pub norm_error: f64,
    /// `max |g_t - g_xx / (4 gamma)|` over the sample grid.
    pub pde_residual: f64,
    /// The same relative to `max |g_t|`.
    pub pde_residual_relative: f64,
    pub monotone: bool,
    pub left_limit: f64,
}

/// Checks the norm and the diffusion identity of `g` at time `t`.
///
/// Derivatives are central differences with step `h`, both in `x` and `t`.
pub fn heat_report(gamma: f64, t: f64) -> Result<HeatReport> {
    let g = HeatKernelG::new(gamma)?;
    let width = ((1.0 + t) / gamma).sqrt();
    let x_max = 40.0 * width;
    // g(x_max) is the integral of g_x over (-inf, x_max]; beyond 40 widths
    // the integrand is below exp(-1600).
    let norm_quadrature = gauss_legendre(|y| g.g_x(y, t), -x_max, x_max, 400);
    let norm_closed_form = g.eval(x_max, t);
    let norm_expected = g.norm();
    let norm_error = (norm_quadrature - norm_expected)
        .abs()
        .max((norm_closed_form - norm_expected).abs());

    let h = 1e-3 * width.min(1.0 + t);
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=200 {
        let x = -5.0 * width + k as f64 * 0.05 * width;
        let gx = g.eval(x, t);
        monotone &= gx >= prev;
        prev = gx;
        let g_t = if t >= h {
            (g.eval(x, t + h) - g.eval(x, t - h)) / (2.0 * h)
        } else {
            (-3.0 * gx + 4.0 * g.eval(x, t + h) - g.eval(x, t + 2.0 * h)) / (2.0 * h)
        };
        let g_xx = (g.eval(x + h, t) - 2.0 * gx + g.eval(x - h, t)) / (h * h);
        residual = residual.max((g_t - g_xx / (4.0 * gamma)).abs());
        scale = scale.max(g_t.abs());
    }
    Ok(HeatReport {
        gamma,
        t,
        norm_expected,
        norm_quadrature,
        norm_closed_form,
        norm_error,
        pde_residual: residual,
        pde_residual_relative: if scale > 0.0 { residual / scale } else { residual },
        monotone,
        left_limit: g.eval(-1e6 * width, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        for gamma in [0.25, 1.0 / 16.0, 3.0] {
            for t in [0.0, 1.0, 10.0] {
                let r = heat_report(gamma, t).unwrap();
                assert!(r.norm_error < 1e-8, "{r:?}");
                assert!(r.pde_residual < 1e-6, "{r:?}");
                assert!(r.monotone && r.left_limit == 0.0);
            }
        }
    }

    #[test]
    fn derivative_matches_closed_form() {
        let g = HeatKernelG::new(0.7).unwrap();
        let (x, t, h) = (0.4, 2.0, 1e-5);
        let fd = (g.eval(x + h, t) - g.eval(x - h, t)) / (2.0 * h);
        assert!((fd - g.g_x(x, t)).abs() < 1e-9);
    }
}
