//! Perturbation fields `phi = u - u^a`, `psi = v - v^a`, the primitive
//! `Phi` and its diagonalization `W = L(u^a) Phi`.

use nalgebra::DVector;
use serde::Serialize;

use crate::eigen;
use crate::error::Result;
use crate::solver::GridState;
use crate::waves::ansatz::Ansatz;

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationNorms {
    pub phi_inf: f64,
    pub psi_inf: f64,
    /// `max(phi_inf, psi_inf)`.
    pub combined_inf: f64,
    pub big_phi_l2: f64,
    /// `(||Phi||^2 + ||phi||^2)^(1/2)`.
    pub big_phi_h1: f64,
    pub w_l2: f64,
}

/// Cell-major fields on the grid of the state (`field[j * n + c]`).
#[derive(Debug, Clone)]
pub struct PerturbationState {
    pub t: f64,
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub big_phi: Vec<f64>,
    pub w: Vec<f64>,
    /// `sum_j phi_j dx`.
    pub mass: Vec<f64>,
    pub norms: PerturbationNorms,
    /// `u^a` at the cell centers, reused for the weights.
    pub ua: Vec<f64>,
}

impl PerturbationState {
    pub fn cells(&self) -> usize {
        self.phi.len() / self.n
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }
}

fn l2(field: &[f64], dx: f64) -> f64 {
    (field.iter().map(|v| v * v).sum::<f64>() * dx).sqrt()
}

fn sup(field: &[f64]) -> f64 {
    field.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `Phi` by cumulative trapezoid from the left edge of the domain, where
/// the perturbation vanishes; `Phi` at the right edge equals the mass.
pub fn primitive(phi: &[f64], n: usize, dx: f64) -> Vec<f64> {
    let cells = phi.len() / n;
    let mut out = vec![0.0; phi.len()];
    for c in 0..n {
        let mut acc = 0.5 * dx * phi[c];
        out[c] = acc;
        for j in 1..cells {
            acc += 0.5 * dx * (phi[(j - 1) * n + c] + phi[j * n + c]);
            out[j * n + c] = acc;
        }
    }
    out
}

pub fn perturbation(state: &GridState, ansatz: &Ansatz) -> Result<PerturbationState> {
    let n = state.n;
    let cells = state.cells();
    let mut phi = vec![0.0; n * cells];
    let mut psi = vec![0.0; n * cells];
    let mut ua_all = vec![0.0; n * cells];
    for j in 0..cells {
        let (ua, va) = ansatz.uv(state.x(j), state.t);
        for c in 0..n {
            let k = j * n + c;
            phi[k] = state.u[k] - ua[c];
            psi[k] = state.v[k] - va[c];
            ua_all[k] = ua[c];
        }
    }
    let big_phi = primitive(&phi, n, state.dx);
    let mut w = vec![0.0; n * cells];
    for j in 0..cells {
        let range = j * n..(j + 1) * n;
        let left = eigen::eigensystem(ansatz.model(), &ua_all[range.clone()])?.left;
        let wj = left * DVector::from_column_slice(&big_phi[range.clone()]);
        w[range].copy_from_slice(wj.as_slice());
    }
    let mut mass = vec![0.0; n];
    for (k, v) in phi.iter().enumerate() {
        mass[k % n] += v * state.dx;
    }
    let (phi_inf, psi_inf) = (sup(&phi), sup(&psi));
    let big_phi_l2 = l2(&big_phi, state.dx);
    let phi_l2 = l2(&phi, state.dx);
    let norms = PerturbationNorms {
        phi_inf,
        psi_inf,
        combined_inf: phi_inf.max(psi_inf),
        big_phi_l2,
        big_phi_h1: (big_phi_l2 * big_phi_l2 + phi_l2 * phi_l2).sqrt(),
        w_l2: l2(&w, state.dx),
    };
    Ok(PerturbationState {
        t: state.t,
        n,
        dx: state.dx,
        x0: state.x0,
        phi,
        psi,
        big_phi,
        w,
        mass,
        norms,
        ua: ua_all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_is_second_order_and_ends_at_mass() {
        let f = |x: f64| (-x * x).exp() * x.cos();
        let exact = |x: f64| {
            // int_{-inf}^x of f by fine quadrature
            crate::special::gauss_legendre(f, -12.0, x, 200)
        };
        let mut errs = Vec::new();
        for cells in [200, 400, 800] {
            let dx = 20.0 / cells as f64;
            let xs: Vec<f64> = (0..cells).map(|j| -10.0 + (j as f64 + 0.5) * dx).collect();
            let phi: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let big = primitive(&phi, 1, dx);
            let mass: f64 = phi.iter().sum::<f64>() * dx;
            assert!((big[cells - 1] + 0.5 * dx * phi[cells - 1] - mass).abs() < 1e-14);
            let err = xs.iter().zip(&big).map(|(&x, b)| (b - exact(x)).abs()).fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.9, "{errs:?}");
        }
    }
}
