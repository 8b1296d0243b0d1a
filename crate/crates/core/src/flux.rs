//! Hyperbolic flux models `u_t + f(u)_x = 0`.
//!
//! A [`FluxModel`] is a cheaply clonable handle to a [`FluxFunction`]. The
//! catalog provides scalar Burgers, constant-coefficient linear systems and
//! the gamma-law Euler equations in conserved variables. User models may
//! supply only the flux; their Jacobian is then taken by central differences.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A state or flux vector of length `n`.
pub type State = DVector<f64>;

pub trait FluxFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn label(&self) -> &str;

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    /// Rejects states outside the physical region (e.g. negative density).
    fn admissible(&self, _u: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Writes `f(u)` into `out` without admissibility checks.
    fn flux_into(&self, u: &[f64], out: &mut [f64]);

    /// Analytic Jacobian, if the model has one.
    fn jacobian(&self, _u: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// Shared handle to a flux function.
#[derive(Clone)]
pub struct FluxModel {
    inner: Arc<dyn FluxFunction>,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxModel")
            .field("label", &self.label())
            .field("n", &self.dim())
            .field("parameters", &self.parameters())
            .finish()
    }
}

impl FluxModel {
    pub fn new<F: FluxFunction + 'static>(flux: F) -> Self {
        Self {
            inner: Arc::new(flux),
        }
    }

    pub fn burgers() -> Self {
        Self::new(Burgers)
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Usage(format!(
                "linear flux needs a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self::new(Linear { matrix }))
    }

    pub fn euler(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Usage(format!("adiabatic exponent must exceed 1, got {gamma}")));
        }
        Ok(Self::new(Euler { gamma }))
    }

    /// A user model given by its flux only.
    pub fn custom<F>(label: impl Into<String>, n: usize, flux: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(Custom {
            label: label.into(),
            n,
            flux: Box::new(flux),
        })
    }

    /// Builds a catalog model from its label.
    ///
    /// Recognised labels: `burgers`, `linear` (needs `matrix`), `euler`
    /// (optional parameter `gamma`, default 1.4).
    pub fn from_label(
        label: &str,
        parameters: &BTreeMap<String, f64>,
        matrix: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        let reject_extra = |allowed: &[&str]| -> Result<()> {
            for key in parameters.keys() {
                if !allowed.contains(&key.as_str()) {
                    return Err(Error::Usage(format!(
                        "model '{label}' has no parameter '{key}'"
                    )));
                }
            }
            Ok(())
        };
        match label {
            "burgers" => {
                reject_extra(&[])?;
                Ok(Self::burgers())
            }
            "euler" => {
                reject_extra(&["gamma"])?;
                Self::euler(parameters.get("gamma").copied().unwrap_or(1.4))
            }
            "linear" => {
                reject_extra(&[])?;
                let rows = matrix
                    .ok_or_else(|| Error::Usage("model 'linear' requires a matrix".into()))?;
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Usage("linear model matrix must be square".into()));
                }
                Self::linear(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
            other => Err(Error::Usage(format!("unknown model label '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn label(&self) -> &str {
        self.inner.label()
    }

    pub fn parameters(&self) -> BTreeMap<String, f64> {
        self.inner.parameters()
    }

    pub fn admissible(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Usage(format!(
                "state has length {}, model '{}' has n = {}",
                u.len(),
                self.label(),
                self.dim()
            )));
        }
        if let Some((component, &value)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain {
                component,
                value,
                reason: "not finite",
            });
        }
        self.inner.admissible(u)
    }

    /// `f(u)` after validating `u`.
    pub fn evaluate_flux(&self, u: &[f64]) -> Result<State> {
        self.admissible(u)?;
        Ok(self.flux(u))
    }

    /// `f(u)` without validation.
    pub fn flux(&self, u: &[f64]) -> State {
        let mut out = DVector::zeros(self.dim());
        self.inner.flux_into(u, out.as_mut_slice());
        out
    }

    #[inline]
    pub fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        self.inner.flux_into(u, out);
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        let probe = vec![1.0; self.dim()];
        self.inner.jacobian(&probe).is_some()
    }

    /// `f'(u)`; analytic for catalog models, central differences otherwise.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        self.inner
            .jacobian(u)
            .unwrap_or_else(|| self.fd_jacobian(u))
    }

    /// Central-difference Jacobian with step `sqrt(eps) * (1 + |u|)`.
    pub fn fd_jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = f64::EPSILON.sqrt() * (1.0 + norm);
        let mut jac = DMatrix::zeros(n, n);
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for j in 0..n {
            up[j] = u[j] + h;
            um[j] = u[j] - h;
            self.inner.flux_into(&up, &mut fp);
            self.inner.flux_into(&um, &mut fm);
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
            up[j] = u[j];
            um[j] = u[j];
        }
        jac
    }
}

/// Scalar Burgers, `f(u) = u^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct Burgers;

impl FluxFunction for Burgers {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "burgers"
    }

    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        out[0] = 0.5 * u[0] * u[0];
    }

    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, u[0]))
    }
}

/// `f(u) = M u` with a constant matrix.
#[derive(Debug, Clone)]
pub struct Linear {
    pub matrix: DMatrix<f64>,
}

impl FluxFunction for Linear {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn label(&self) -> &str {
        "linear"
    }

    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.matrix[(i, j)] * u[j]).sum();
        }
    }

    fn jacobian(&self, _u: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.matrix.clone())
    }
}

/// Gamma-law gas dynamics in conserved variables `(rho, rho*w, E)`.
#[derive(Debug, Clone, Copy)]
pub struct Euler {
    pub gamma: f64,
}

impl Euler {
    #[inline]
    pub fn pressure(&self, u: &[f64]) -> f64 {
        (self.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
    }

    /// Conserved state from density, velocity and pressure.
    pub fn conserved(&self, rho: f64, w: f64, p: f64) -> State {
        DVector::from_vec(vec![rho, rho * w, 0.5 * rho * w * w + p / (self.gamma - 1.0)])
    }

    pub fn sound_speed(&self, u: &[f64]) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).sqrt()
    }
}

impl FluxFunction for Euler {
    fn dim(&self) -> usize {
        3
    }

    fn label(&self) -> &str {
        "euler"
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("gamma".to_string(), self.gamma)])
    }

    fn admissible(&self, u: &[f64]) -> Result<()> {
        if !(u[0] > 0.0) {
            return Err(Error::Domain {
                component: 0,
                value: u[0],
                reason: "density must be positive",
            });
        }
        let p = self.pressure(u);
        if !(p > 0.0) {
            return Err(Error::Domain {
                component: 2,
                value: u[2],
                reason: "energy gives nonpositive pressure",
            });
        }
        Ok(())
    }

    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        let w = u[1] / u[0];
        let p = self.pressure(u);
        out[0] = u[1];
        out[1] = u[1] * w + p;
        out[2] = (u[2] + p) * w;
    }

    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let g = self.gamma;
        let w = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        Some(DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                0.5 * (g - 3.0) * w * w,
                (3.0 - g) * w,
                g - 1.0,
                w * (0.5 * (g - 1.0) * w * w - h),
                h - (g - 1.0) * w * w,
                g * w,
            ],
        ))
    }
}

type FluxClosure = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

struct Custom {
    label: String,
    n: usize,
    flux: FluxClosure,
}

impl fmt::Debug for Custom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({}, n={})", self.label, self.n)
    }
}

impl FluxFunction for Custom {
    fn dim(&self) -> usize {
        self.n
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn flux_into(&self, u: &[f64], out: &mut [f64]) {
        (self.flux)(u, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_flux_values() {
        let b = FluxModel::burgers();
        assert_eq!(b.evaluate_flux(&[2.0]).unwrap()[0], 2.0);

        let e = FluxModel::euler(1.4).unwrap();
        let f = e.evaluate_flux(&[1.0, 0.0, 2.5]).unwrap();
        assert!((f[0]).abs() < 1e-15);
        assert!((f[1] - 1.0).abs() < 1e-14);
        assert!((f[2]).abs() < 1e-15);

        let m = FluxModel::linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let f = m.evaluate_flux(&[3.0, 4.0]).unwrap();
        assert_eq!(f.as_slice(), &[4.0, 3.0]);
    }

    #[test]
    fn euler_rejects_vacuum_and_negative_pressure() {
        let e = FluxModel::euler(1.4).unwrap();
        match e.evaluate_flux(&[-1.0, 0.0, 1.0]) {
            Err(Error::Domain { component: 0, .. }) => {}
            other => panic!("expected density error, got {other:?}"),
        }
        match e.evaluate_flux(&[1.0, 3.0, 1.0]) {
            Err(Error::Domain { component: 2, .. }) => {}
            other => panic!("expected pressure error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_length_is_usage_error() {
        let e = FluxModel::euler(1.4).unwrap();
        assert!(matches!(e.evaluate_flux(&[1.0, 0.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn from_label_checks_parameters() {
        let params = BTreeMap::from([("gamma".to_string(), 1.67)]);
        let e = FluxModel::from_label("euler", &params, None).unwrap();
        assert_eq!(e.parameters()["gamma"], 1.67);
        assert!(FluxModel::from_label("burgers", &params, None).is_err());
        assert!(FluxModel::from_label("linear", &BTreeMap::new(), None).is_err());
        assert!(FluxModel::from_label("mhd", &BTreeMap::new(), None).is_err());
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        let e = FluxModel::euler(1.4).unwrap();
        for u in [[1.0, 0.0, 2.5], [0.7, 0.3, 1.9], [1.3, -0.4, 3.1]] {
            let a = e.jacobian(&u);
            let d = e.fd_jacobian(&u);
            let scale = 1.0 + a.amax();
            assert!((a - d).amax() < 1e-6 * scale);
        }
    }

    #[test]
    fn custom_model_uses_difference_jacobian() {
        let m = FluxModel::custom("cubic", 1, |u, out| out[0] = u[0].powi(3));
        assert!(!m.has_analytic_jacobian());
        let j = m.jacobian(&[2.0]);
        assert!((j[(0, 0)] - 12.0).abs() < 1e-6);
    }
}
