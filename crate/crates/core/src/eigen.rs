//! Eigensystems of flux Jacobians and the standing structural checks:
//! strict hyperbolicity, field classification, the sub-characteristic
//! condition and the contact structural condition.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{FluxModel, State};

/// Relative eigenvalue separation below which hyperbolicity is rejected.
pub const HYPERBOLICITY_TOL: f64 = 1e-10;

/// Threshold on `|grad lambda_i . r_i|` separating the field classes.
pub const CLASSIFICATION_TOL: f64 = 1e-6;

/// Eigenvalues sorted ascending with `L f'(u) R = diag(lambda)`, `L R = I`.
///
/// Columns of `right` have unit Euclidean norm and their largest-magnitude
/// component positive; `left = right^{-1}`.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub lambdas: DVector<f64>,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

impl EigenData {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn right_vector(&self, i: usize) -> State {
        self.right.column(i).into_owned()
    }

    pub fn left_vector(&self, i: usize) -> State {
        self.left.row(i).transpose()
    }
}

/// Sorted real eigenvalues of an arbitrary square matrix with the
/// separation check applied.
pub fn sorted_eigenvalues(jac: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = jac.nrows();
    let mut lambdas: Vec<f64> = if n == 1 {
        vec![jac[(0, 0)]]
    } else {
        let complex = jac.complex_eigenvalues();
        let scale = 1.0 + jac.amax();
        let mut out = Vec::with_capacity(n);
        for z in complex.iter() {
            if z.im.abs() > 1e-9 * scale {
                return Err(Error::ComplexEigenvalues);
            }
            out.push(z.re);
        }
        out
    };
    lambdas.sort_by(|a, b| a.total_cmp(b));
    let max_abs = lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = HYPERBOLICITY_TOL * (1.0 + max_abs);
    for k in 1..n {
        if lambdas[k] - lambdas[k - 1] <= tol {
            return Err(Error::Hyperbolicity {
                first: k - 1,
                second: k,
                tolerance: tol,
            });
        }
    }
    Ok(DVector::from_vec(lambdas))
}

/// Eigenvalues of `f'(u)` sorted ascending.
pub fn eigenvalues(model: &FluxModel, u: &[f64]) -> Result<DVector<f64>> {
    model.admissible(u)?;
    sorted_eigenvalues(&model.jacobian(u))
}

/// Full eigensystem of `f'(u)` with the deterministic normalization.
pub fn eigensystem(model: &FluxModel, u: &[f64]) -> Result<EigenData> {
    model.admissible(u)?;
    eigensystem_of(&model.jacobian(u))
}

pub fn eigensystem_of(jac: &DMatrix<f64>) -> Result<EigenData> {
    let n = jac.nrows();
    let lambdas = sorted_eigenvalues(jac)?;
    let mut right = DMatrix::zeros(n, n);
    for (k, &lam) in lambdas.iter().enumerate() {
        let r = null_vector(jac, lam);
        right.set_column(k, &normalize_direction(r));
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or(Error::Hyperbolicity {
            first: 0,
            second: n.saturating_sub(1),
            tolerance: HYPERBOLICITY_TOL,
        })?;
    Ok(EigenData {
        lambdas,
        left,
        right,
    })
}

/// Right singular vector of `A - lambda I` with the smallest singular value.
fn null_vector(jac: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = jac.nrows();
    if n == 1 {
        return DVector::from_element(1, 1.0);
    }
    let shifted = jac - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
    v_t.row(k).transpose()
}

/// Unit norm; the first of the largest-magnitude components made positive.
pub fn normalize_direction(mut r: DVector<f64>) -> DVector<f64> {
    let norm = r.norm();
    if norm > 0.0 {
        r /= norm;
    }
    let max_abs = r.amax();
    if let Some(idx) = r.iter().position(|c| c.abs() >= max_abs * (1.0 - 1e-9)) {
        if r[idx] < 0.0 {
            r.neg_mut();
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldTag {
    GenuinelyNonlinear,
    LinearlyDegenerate,
    Indeterminate,
}

/// Per-field tags together with the observed range of `grad lambda_i . r_i`.
#[derive(Debug, Clone, Serialize)]
pub struct FieldClassification {
    pub tags: Vec<FieldTag>,
    pub min_derivative: Vec<f64>,
    pub max_derivative: Vec<f64>,
    pub samples: usize,
}

impl FieldClassification {
    pub fn linearly_degenerate_fields(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == FieldTag::LinearlyDegenerate)
            .map(|(i, _)| i)
            .collect()
    }
}

/// `grad lambda_i(u) . r_i(u)` by central differences along `r_i`.
pub fn nonlinearity_coefficient(model: &FluxModel, u: &[f64], i: usize) -> Result<f64> {
    let eig = eigensystem(model, u)?;
    let r = eig.right_vector(i);
    let uv = DVector::from_column_slice(u);
    let h = 1e-5 * (1.0 + uv.norm());
    let up = &uv + &r * h;
    let um = &uv - &r * h;
    let lp = eigenvalues(model, up.as_slice())?[i];
    let lm = eigenvalues(model, um.as_slice())?[i];
    Ok((lp - lm) / (2.0 * h))
}

pub fn classify_fields(model: &FluxModel, samples: &[State]) -> Result<FieldClassification> {
    if samples.is_empty() {
        return Err(Error::Usage("classify_fields needs at least one sample".into()));
    }
    let n = model.dim();
    let mut min_d = vec![f64::INFINITY; n];
    let mut max_d = vec![f64::NEG_INFINITY; n];
    for u in samples {
        for i in 0..n {
            let d = nonlinearity_coefficient(model, u.as_slice(), i)?;
            min_d[i] = min_d[i].min(d);
            max_d[i] = max_d[i].max(d);
        }
    }
    let tags = (0..n)
        .map(|i| {
            if min_d[i] > CLASSIFICATION_TOL || max_d[i] < -CLASSIFICATION_TOL {
                FieldTag::GenuinelyNonlinear
            } else if min_d[i].abs() < CLASSIFICATION_TOL && max_d[i].abs() < CLASSIFICATION_TOL {
                FieldTag::LinearlyDegenerate
            } else {
                FieldTag::Indeterminate
            }
        })
        .collect();
    Ok(FieldClassification {
        tags,
        min_derivative: min_d,
        max_derivative: max_d,
        samples: samples.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SubcharacteristicReport {
    /// `min (a - |lambda_i(u)|)` over samples and fields.
    pub margin: f64,
    pub pass: bool,
    pub worst_sample: usize,
    pub worst_field: usize,
}

pub fn check_subcharacteristic(
    model: &FluxModel,
    samples: &[State],
    a: f64,
) -> Result<SubcharacteristicReport> {
    if !(a > 0.0) {
        return Err(Error::Usage(format!("relaxation speed must be positive, got {a}")));
    }
    let mut report = SubcharacteristicReport {
        margin: f64::INFINITY,
        pass: true,
        worst_sample: 0,
        worst_field: 0,
    };
    for (k, u) in samples.iter().enumerate() {
        let lambdas = eigenvalues(model, u.as_slice())?;
        for (i, l) in lambdas.iter().enumerate() {
            let m = a - l.abs();
            if m < report.margin {
                report.margin = m;
                report.worst_sample = k;
                report.worst_field = i;
            }
        }
    }
    report.pass = report.margin > 0.0;
    Ok(report)
}

/// Max of `|grad r_p . r_p|` over the supplied curve points.
pub fn check_structural_condition(model: &FluxModel, p: usize, curve: &[State]) -> Result<f64> {
    let n = model.dim();
    if p >= n {
        return Err(Error::Usage(format!("field index {p} out of range for n = {n}")));
    }
    if curve.is_empty() {
        return Err(Error::Usage("structural check needs curve points".into()));
    }
    let class = classify_fields(model, curve)?;
    if class.tags[p] != FieldTag::LinearlyDegenerate {
        return Err(Error::Usage(format!(
            "field {p} of '{}' is not linearly degenerate ({:?})",
            model.label(),
            class.tags[p]
        )));
    }
    let mut worst = 0.0f64;
    for u in curve {
        let r = eigensystem(model, u.as_slice())?.right_vector(p);
        let h = 1e-5 * (1.0 + u.norm());
        let rp = eigensystem(model, (u + &r * h).as_slice())?.right_vector(p);
        let rm = eigensystem(model, (u - &r * h).as_slice())?.right_vector(p);
        worst = worst.max(((rp - rm) / (2.0 * h)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(m: &[f64], n: usize) -> FluxModel {
        FluxModel::linear(DMatrix::from_row_slice(n, n, m)).unwrap()
    }

    #[test]
    fn scalar_eigensystem() {
        let e = eigensystem(&FluxModel::burgers(), &[3.0]).unwrap();
        assert_eq!(e.lambdas[0], 3.0);
        assert_eq!(e.left[(0, 0)], 1.0);
        assert_eq!(e.right[(0, 0)], 1.0);
    }

    #[test]
    fn linear_swap_matrix_vectors() {
        let e = eigensystem(&lin(&[0.0, 1.0, 1.0, 0.0], 2), &[0.0, 0.0]).unwrap();
        let s = 0.5f64.sqrt();
        assert!((e.lambdas[0] + 1.0).abs() < 1e-14);
        assert!((e.lambdas[1] - 1.0).abs() < 1e-14);
        assert!((e.right[(0, 0)] - s).abs() < 1e-12 && (e.right[(1, 0)] + s).abs() < 1e-12);
        assert!((e.right[(0, 1)] - s).abs() < 1e-12 && (e.right[(1, 1)] - s).abs() < 1e-12);
        let id = &e.left * &e.right;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn repeated_eigenvalue_is_rejected() {
        let m = lin(&[1.0, 0.0, 0.0, 1.0], 2);
        assert!(matches!(eigensystem(&m, &[0.0, 0.0]), Err(Error::Hyperbolicity { .. })));
    }

    #[test]
    fn rotation_has_complex_spectrum() {
        let m = lin(&[0.0, -1.0, 1.0, 0.0], 2);
        assert!(matches!(eigenvalues(&m, &[0.0, 0.0]), Err(Error::ComplexEigenvalues)));
    }

    #[test]
    fn normalization_sign_and_ties() {
        let r = normalize_direction(DVector::from_vec(vec![-3.0, 4.0]));
        assert!((r[1] - 0.8).abs() < 1e-15 && (r[0] + 0.6).abs() < 1e-15);
        let r = normalize_direction(DVector::from_vec(vec![-1.0, 1.0]));
        assert!(r[0] > 0.0);
    }

    #[test]
    fn subcharacteristic_margins() {
        let b = FluxModel::burgers();
        let samples: Vec<State> = (0..=20)
            .map(|k| DVector::from_element(1, -1.0 + 0.1 * k as f64))
            .collect();
        let r = check_subcharacteristic(&b, &samples, 2.0).unwrap();
        assert!((r.margin - 1.0).abs() < 1e-14 && r.pass);
        let r = check_subcharacteristic(&b, &samples, 0.5).unwrap();
        assert!((r.margin + 0.5).abs() < 1e-14 && !r.pass);
    }

    #[test]
    fn burgers_is_genuinely_nonlinear_and_has_no_contact() {
        let b = FluxModel::burgers();
        let samples: Vec<State> = (0..=10)
            .map(|k| DVector::from_element(1, -1.0 + 0.2 * k as f64))
            .collect();
        let c = classify_fields(&b, &samples).unwrap();
        assert_eq!(c.tags, vec![FieldTag::GenuinelyNonlinear]);
        assert!((c.min_derivative[0] - 1.0).abs() < 1e-8);
        assert!(matches!(
            check_structural_condition(&b, 0, &samples),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            check_structural_condition(&b, 1, &samples),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn linear_fields_are_degenerate_and_structural() {
        let m = lin(&[0.0, 1.0, 1.0, 0.0], 2);
        let curve: Vec<State> = (0..5)
            .map(|k| DVector::from_vec(vec![k as f64 * 0.1, -(k as f64) * 0.1]))
            .collect();
        let c = classify_fields(&m, &curve).unwrap();
        assert_eq!(c.tags, vec![FieldTag::LinearlyDegenerate; 2]);
        assert!(check_structural_condition(&m, 0, &curve).unwrap() < 1e-12);
    }

    #[test]
    fn mixed_sign_is_indeterminate() {
        // lambda = u^2 / 2 changes monotonicity at u = 0.
        let m = FluxModel::custom("cubic", 1, |u, out| out[0] = u[0].powi(3) / 6.0);
        let samples: Vec<State> = [-1.0, 1.0].iter().map(|&v| DVector::from_element(1, v)).collect();
        let c = classify_fields(&m, &samples).unwrap();
        assert_eq!(c.tags, vec![FieldTag::Indeterminate]);
    }
}
