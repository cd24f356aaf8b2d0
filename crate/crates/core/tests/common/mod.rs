//! Reference implementations used as independent oracles.

#![allow(dead_code)]

use num_complex::Complex64;

/// Branch `k` of the Lambert W function by Halley iteration.
pub fn lambert_w(k: i64, z: Complex64) -> Complex64 {
    let two_pi_k = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
    let mut w = if k == 0 {
        Complex64::new(0.5, 0.0)
    } else {
        let l1 = z.ln() + two_pi_k;
        l1 - l1.ln()
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.norm() <= 1e-16 * w.norm().max(1.0) {
            break;
        }
    }
    w
}

/// Root of `-i z + e^{-i z}` on branch `k`: `-i W_k(1)`.
pub fn model_root(k: i64) -> Complex64 {
    -Complex64::i() * lambert_w(k, Complex64::new(1.0, 0.0))
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_42,
    0.478_628_670_499_366_2,
    128.0 / 225.0,
    0.478_628_670_499_366_2,
    0.236_926_885_056_189_42,
];

/// Composite 5-point Gauss-Legendre on `[a, b]`.
pub fn gauss<F: Fn(f64) -> Complex64>(a: f64, b: f64, panels: usize, f: F) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5_X.iter().zip(GL5_W) {
            acc += f(mid + 0.5 * h * x) * w;
        }
    }
    acc * (0.5 * h)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
