//! Error-function based primitives and small quadrature helpers.

use std::f64::consts::PI;

/// Standard normal distribution function.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Derivatives of the diffusion kernel
/// `K(z, tau) = exp(-z^2 / (4 a^2 tau)) / sqrt(4 pi a^2 tau)` in `z`,
/// returned as `[K, K_z, K_zz, K_zzz]`.
#[inline]
pub fn heat_kernel_derivatives(z: f64, tau: f64, a: f64) -> [f64; 4] {
    let b = 1.0 / (2.0 * a * a * tau);
    let k = (-0.5 * b * z * z).exp() * (b / (2.0 * PI)).sqrt();
    [
        k,
        -b * z * k,
        (b * b * z * z - b) * k,
        (-b * b * b * z * z * z + 3.0 * b * b * z) * k,
    ]
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss–Legendre rule on `[lo, hi]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            acc += w * (f(mid + half * x) + f(mid - half * x));
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!(normal_cdf(-40.0) >= 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_gaussian() {
        let v = gauss_legendre(|x| (-x * x).exp(), -10.0, 10.0, 40);
        assert!((v - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kernel_derivatives_match_differences() {
        let (a, tau) = (1.3, 2.5);
        let h = 1e-4;
        for z in [-2.0, -0.3, 0.0, 0.7, 3.1] {
            let d = heat_kernel_derivatives(z, tau, a);
            let p = heat_kernel_derivatives(z + h, tau, a);
            let m = heat_kernel_derivatives(z - h, tau, a);
            for k in 0..3 {
                let fd = (p[k] - m[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-7, "order {k} at z = {z}");
            }
            // K_tau = a^2 K_zz
            let dt = 1e-5;
            let kp = heat_kernel_derivatives(z, tau + dt, a)[0];
            let km = heat_kernel_derivatives(z, tau - dt, a)[0];
            assert!(((kp - km) / (2.0 * dt) - a * a * d[2]).abs() < 1e-8);
        }
    }
}
