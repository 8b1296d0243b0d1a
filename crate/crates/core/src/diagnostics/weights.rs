//! Weight functions localizing the energy to each characteristic family.
//!
//! `alpha_i = alpha_i^c + sum_{j != p} beta_i^j` with
//! `alpha_i^c = eta^m (i < p), 1 (i = p), eta^-m (i > p)`, `m = delta^(-1/2)`
//! and, for `j != p, i`,
//!
//! ```text
//! beta_i^j(xi) = (lambda_i(phi^j(0)) - s_j) / (lambda_i(phi^j(xi)) - s_j)
//!                * exp(-m int_0^xi |d lambda_j(phi^j)| / (lambda_i(phi^j) - s_j))
//! ```
//!
//! Every term is close to one, so `alpha_i` is close to the number of
//! terms; [`WeightSet::alpha_bar`] divides by it.

use serde::Serialize;

use crate::eigen;
use crate::error::{Error, Result};
use crate::waves::ansatz::{Ansatz, Wave};
use crate::waves::profile::ShockProfile;

/// `beta_i^j` tabulated on the nodes of profile `j` (with `xi = 0` added).
#[derive(Debug, Clone)]
pub struct BetaTable {
    pub i: usize,
    pub j: usize,
    pub m: f64,
    pub xi: Vec<f64>,
    pub beta: Vec<f64>,
    /// `lambda_i(phi^j) - s_j` at the nodes.
    pub gap: Vec<f64>,
    /// `|d/dxi lambda_j(phi^j)|` at the nodes.
    pub lambda_slope: Vec<f64>,
    /// Value of `beta` beyond the table ends.
    beta_left: f64,
    beta_right: f64,
    rate_left: f64,
    rate_right: f64,
}

impl BetaTable {
    pub fn build(profile: &ShockProfile, i: usize, m: f64) -> Result<Self> {
        let j = profile.field;
        let model = profile.model();
        let s = profile.speed;
        let mut xi: Vec<f64> = profile.table().nodes().to_vec();
        if let Err(pos) = xi.binary_search_by(|v| v.total_cmp(&0.0)) {
            xi.insert(pos, 0.0);
        }
        let mut gap = Vec::with_capacity(xi.len());
        let mut lambda_slope = Vec::with_capacity(xi.len());
        for &x in &xi {
            let lam = eigen::eigenvalues(model, profile.phi(x).as_slice())?;
            gap.push(lam[i] - s);
            lambda_slope.push(profile.lambda_slope(x)?.abs());
        }
        let sign = gap[0].signum();
        if gap.iter().any(|g| g.signum() != sign || *g == 0.0) {
            return Err(Error::Weight {
                i,
                j,
                reason: "lambda_i - s_j changes sign along the profile".into(),
            });
        }
        let k0 = xi.iter().position(|v| *v == 0.0).unwrap();
        let integrand: Vec<f64> = lambda_slope.iter().zip(&gap).map(|(l, g)| l / g).collect();
        let mut integral = vec![0.0; xi.len()];
        for k in k0 + 1..xi.len() {
            integral[k] = integral[k - 1] + 0.5 * (xi[k] - xi[k - 1]) * (integrand[k] + integrand[k - 1]);
        }
        for k in (0..k0).rev() {
            integral[k] = integral[k + 1] - 0.5 * (xi[k + 1] - xi[k]) * (integrand[k] + integrand[k + 1]);
        }
        let g0 = gap[k0];
        let beta: Vec<f64> = gap
            .iter()
            .zip(&integral)
            .map(|(g, int)| g0 / g * (-m * int).exp())
            .collect();
        // Tails: the integrand decays like exp(-rate |xi|) and the gap tends
        // to its end-state value.
        let last = xi.len() - 1;
        let lam_inf = |u: &nalgebra::DVector<f64>| -> Result<f64> {
            Ok(eigen::eigenvalues(model, u.as_slice())?[i] - s)
        };
        let (rl, rr) = (profile.rate_left, profile.rate_right);
        let int_left = integral[0] - integrand[0] / rl;
        let int_right = integral[last] + integrand[last] / rr;
        let beta_left = g0 / lam_inf(&profile.u_left)? * (-m * int_left).exp();
        let beta_right = g0 / lam_inf(&profile.u_right)? * (-m * int_right).exp();
        Ok(Self {
            i,
            j,
            m,
            xi,
            beta,
            gap,
            lambda_slope,
            beta_left,
            beta_right,
            rate_left: rl,
            rate_right: rr,
        })
    }

    /// `beta_i^j` at `xi`: linear between nodes, exponential relaxation to
    /// the limit values outside.
    pub fn eval(&self, xi: f64) -> f64 {
        let last = self.xi.len() - 1;
        if xi <= self.xi[0] {
            let w = (self.rate_left * (xi - self.xi[0])).exp();
            return self.beta_left + (self.beta[0] - self.beta_left) * w;
        }
        if xi >= self.xi[last] {
            let w = (-self.rate_right * (xi - self.xi[last])).exp();
            return self.beta_right + (self.beta[last] - self.beta_right) * w;
        }
        let k = match self.xi.binary_search_by(|v| v.total_cmp(&xi)) {
            Ok(k) => return self.beta[k],
            Err(k) => k - 1,
        };
        let s = (xi - self.xi[k]) / (self.xi[k + 1] - self.xi[k]);
        self.beta[k] * (1.0 - s) + self.beta[k + 1] * s
    }

    /// Residuals of `d/dxi [(lambda_i - s_j) beta] + m beta |d lambda_j|`
    /// at interior nodes (nonuniform central differences): absolute max
    /// and max relative to `m beta |d lambda_j|`.
    pub fn identity_residual(&self) -> (f64, f64) {
        let y: Vec<f64> = self.gap.iter().zip(&self.beta).map(|(g, b)| g * b).collect();
        let mut abs_max = 0.0f64;
        let mut scale = 0.0f64;
        for k in 1..self.xi.len() - 1 {
            let h1 = self.xi[k] - self.xi[k - 1];
            let h2 = self.xi[k + 1] - self.xi[k];
            let dy = -h2 / (h1 * (h1 + h2)) * y[k - 1] + (h2 - h1) / (h1 * h2) * y[k] + h1 / (h2 * (h1 + h2)) * y[k + 1];
            let term = self.m * self.beta[k] * self.lambda_slope[k];
            abs_max = abs_max.max((dy + term).abs());
            scale = scale.max(term.abs());
        }
        (abs_max, if scale > 0.0 { abs_max / scale } else { 0.0 })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightSet {
    pub m: f64,
    pub eta: f64,
    pub alpha_c: Vec<f64>,
    pub alpha_s: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `alpha_i` divided by the number of terms in its sum.
    pub alpha_bar: Vec<f64>,
}

/// Precomputed `beta_i^j` tables for an ansatz.
#[derive(Debug, Clone)]
pub struct Weights {
    pub m: f64,
    pub delta: f64,
    pub contact: Option<usize>,
    pub n: usize,
    /// `tables[i][j]`, present for shocks `j != i`.
    pub tables: Vec<Vec<Option<BetaTable>>>,
    terms: f64,
}

impl Weights {
    pub fn new(ansatz: &Ansatz) -> Result<Self> {
        let n = ansatz.n();
        let delta = ansatz.fan.delta;
        let m = delta.powf(-0.5);
        let contact = ansatz.contact_field();
        let mut tables = vec![vec![None; n]; n];
        let mut shocks = 0;
        for (j, w) in ansatz.waves.iter().enumerate() {
            if Some(j) == contact {
                continue;
            }
            if let Wave::Shock(p) = w {
                shocks += 1;
                for (i, row) in tables.iter_mut().enumerate() {
                    if i != j {
                        row[j] = Some(BetaTable::build(p, i, m)?);
                    }
                }
            }
        }
        Ok(Self {
            m,
            delta,
            contact,
            n,
            tables,
            terms: 1.0 + shocks as f64,
        })
    }

    pub fn at(&self, ansatz: &Ansatz, x: f64, t: f64) -> WeightSet {
        let n = self.n;
        let eta = match (self.contact, ansatz.contact()) {
            (Some(p), Some(c)) => c.eta(x - ansatz.shifts[p], t),
            _ => 1.0,
        };
        let alpha_c: Vec<f64> = (0..n)
            .map(|i| match self.contact {
                Some(p) if i < p => eta.powf(self.m),
                Some(p) if i > p => eta.powf(-self.m),
                _ => 1.0,
            })
            .collect();
        let mut alpha_s = vec![0.0; n];
        for (j, w) in ansatz.waves.iter().enumerate() {
            if Some(j) == self.contact {
                continue;
            }
            if let Wave::Shock(p) = w {
                let xi = x - ansatz.shifts[j] - p.speed * t;
                for (i, a) in alpha_s.iter_mut().enumerate() {
                    *a += match &self.tables[i][j] {
                        Some(tab) => tab.eval(xi),
                        None => 1.0,
                    };
                }
            }
        }
        let alpha: Vec<f64> = alpha_c.iter().zip(&alpha_s).map(|(c, s)| c + s).collect();
        let alpha_bar = alpha.iter().map(|a| a / self.terms).collect();
        WeightSet {
            m: self.m,
            eta,
            alpha_c,
            alpha_s,
            alpha,
            alpha_bar,
        }
    }

    /// Largest identity residual over all tables: `(absolute, relative)`.
    pub fn identity_residual(&self) -> (f64, f64) {
        self.tables
            .iter()
            .flatten()
            .flatten()
            .map(BetaTable::identity_residual)
            .fold((0.0f64, 0.0f64), |(a, r), (x, y)| (a.max(x), r.max(y)))
    }
}

/// Summary of the weight bounds on a sample set.
#[derive(Debug, Clone, Serialize)]
pub struct WeightBounds {
    pub delta: f64,
    pub m: f64,
    pub min_alpha_bar: f64,
    pub max_alpha_bar: f64,
    /// `max |alpha_bar_i - 1| / delta^(1/2)`.
    pub c: f64,
    pub contact_weight_is_one: bool,
    pub self_beta_is_one: bool,
    pub identity_residual: f64,
    pub identity_residual_relative: f64,
}

/// Samples the weights on `xs x ts` and reports the bound constant.
pub fn weight_bounds(ansatz: &Ansatz, weights: &Weights, xs: &[f64], ts: &[f64]) -> WeightBounds {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut contact_one = true;
    for &t in ts {
        for &x in xs {
            let w = weights.at(ansatz, x, t);
            if let Some(p) = weights.contact {
                contact_one &= w.alpha_c[p] == 1.0;
            }
            for a in &w.alpha_bar {
                lo = lo.min(*a);
                hi = hi.max(*a);
            }
        }
    }
    // beta_i^i is defined as the constant 1 and never tabulated.
    let self_one = (0..weights.n).all(|i| weights.tables[i][i].is_none());
    let (res, rel) = weights.identity_residual();
    WeightBounds {
        delta: weights.delta,
        m: weights.m,
        min_alpha_bar: lo,
        max_alpha_bar: hi,
        c: (1.0 - lo).abs().max((hi - 1.0).abs()) / weights.delta.sqrt(),
        contact_weight_is_one: contact_one,
        self_beta_is_one: self_one,
        identity_residual: res,
        identity_residual_relative: rel,
    }
}
