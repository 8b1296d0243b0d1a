//! Piecewise cubic Hermite tables for vector-valued curves.

/// Cubic Hermite interpolant through `(x_k, y_k)` with slopes `d_k`.
///
/// Values are stored node-major: component `c` of node `k` lives at
/// `k * dim + c`.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
    dim: usize,
}

impl HermiteTable {
    /// Builds the table; with `monotone` the slopes are limited per
    /// component (Fritsch–Carlson) so monotone data stays monotone.
    pub fn new(xs: Vec<f64>, ys: Vec<Vec<f64>>, ds: Vec<Vec<f64>>, monotone: bool) -> Self {
        assert!(xs.len() >= 2, "Hermite table needs two nodes");
        assert_eq!(xs.len(), ys.len());
        assert_eq!(xs.len(), ds.len());
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "nodes must increase");
        let dim = ys[0].len();
        let mut table = Self {
            xs,
            ys: ys.into_iter().flatten().collect(),
            ds: ds.into_iter().flatten().collect(),
            dim,
        };
        if monotone {
            table.limit_slopes();
        }
        table
    }

    fn limit_slopes(&mut self) {
        let m = self.xs.len();
        let d = self.dim;
        for c in 0..d {
            for k in 0..m - 1 {
                let h = self.xs[k + 1] - self.xs[k];
                let secant = (self.ys[(k + 1) * d + c] - self.ys[k * d + c]) / h;
                let (i0, i1) = (k * d + c, (k + 1) * d + c);
                if secant == 0.0 {
                    self.ds[i0] = 0.0;
                    self.ds[i1] = 0.0;
                    continue;
                }
                if self.ds[i0] * secant < 0.0 {
                    self.ds[i0] = 0.0;
                }
                if self.ds[i1] * secant < 0.0 {
                    self.ds[i1] = 0.0;
                }
                let alpha = self.ds[i0] / secant;
                let beta = self.ds[i1] / secant;
                let r2 = alpha * alpha + beta * beta;
                if r2 > 9.0 {
                    let tau = 3.0 / r2.sqrt();
                    self.ds[i0] = tau * alpha * secant;
                    self.ds[i1] = tau * beta * secant;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn node_value(&self, k: usize) -> &[f64] {
        &self.ys[k * self.dim..(k + 1) * self.dim]
    }

    pub fn node_slope(&self, k: usize) -> &[f64] {
        &self.ds[k * self.dim..(k + 1) * self.dim]
    }

    /// Index `k` with `x_k <= x < x_{k+1}`, clamped to the table.
    fn interval(&self, x: f64) -> usize {
        let m = self.xs.len();
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(k) => k.min(m - 2),
            Err(0) => 0,
            Err(k) => (k - 1).min(m - 2),
        }
    }

    /// Interpolated value at `x` written into `out`; `x` is clamped.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let x = x.clamp(self.x_min(), self.x_max());
        let k = self.interval(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d = self.dim;
        for c in 0..d {
            out[c] = h00 * self.ys[k * d + c]
                + h10 * h * self.ds[k * d + c]
                + h01 * self.ys[(k + 1) * d + c]
                + h11 * h * self.ds[(k + 1) * d + c];
        }
    }

    /// Derivative of the interpolant at `x` written into `out`; `x` is clamped.
    pub fn eval_derivative_into(&self, x: f64, out: &mut [f64]) {
        let x = x.clamp(self.x_min(), self.x_max());
        let k = self.interval(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        let g00 = (6.0 * s2 - 6.0 * s) / h;
        let g10 = 3.0 * s2 - 4.0 * s + 1.0;
        let g01 = (-6.0 * s2 + 6.0 * s) / h;
        let g11 = 3.0 * s2 - 2.0 * s;
        let d = self.dim;
        for c in 0..d {
            out[c] = g00 * self.ys[k * d + c]
                + g10 * self.ds[k * d + c]
                + g01 * self.ys[(k + 1) * d + c]
                + g11 * self.ds[(k + 1) * d + c];
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Shifts the abscissae by `-offset`.
    pub fn recenter(&mut self, offset: f64) {
        for x in &mut self.xs {
            *x -= offset;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let xs: Vec<f64> = (0..7).map(|k| k as f64 * 0.5 - 1.0).collect();
        let f = |x: f64| x * x * x - 2.0 * x + 0.5;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let table = HermiteTable::new(
            xs.clone(),
            xs.iter().map(|&x| vec![f(x)]).collect(),
            xs.iter().map(|&x| vec![df(x)]).collect(),
            false,
        );
        for k in 0..=100 {
            let x = -1.0 + 3.0 * k as f64 / 100.0;
            assert!((table.eval(x)[0] - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_limiter_prevents_overshoot() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
        // Deliberately wild slopes.
        let ds = vec![vec![0.0], vec![5.0], vec![5.0], vec![0.0]];
        let table = HermiteTable::new(xs, ys, ds, true);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=300 {
            let v = table.eval(k as f64 / 100.0)[0];
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }
}
