//! Quadrature rules and grid helpers shared by the numerical modules.

use num_complex::Complex64;

/// Composite Simpson weights (without the step factor) for `panels` intervals.
///
/// `panels` must be even and positive.
pub fn simpson_weights(panels: usize) -> Vec<f64> {
    debug_assert!(panels >= 2 && panels.is_multiple_of(2));
    let mut w = vec![0.0; panels + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        *wj = if j == 0 || j == panels {
            1.0 / 3.0
        } else if j % 2 == 1 {
            4.0 / 3.0
        } else {
            2.0 / 3.0
        };
    }
    w
}

/// Composite trapezoid weights (without the step factor).
pub fn trapezoid_weights(panels: usize) -> Vec<f64> {
    let mut w = vec![1.0; panels + 1];
    w[0] = 0.5;
    w[panels] = 0.5;
    w
}

pub fn simpson(samples: &[Complex64], step: f64) -> Complex64 {
    let panels = samples.len() - 1;
    let w = simpson_weights(panels);
    samples
        .iter()
        .zip(&w)
        .map(|(s, wj)| s * *wj)
        .sum::<Complex64>()
        * step
}

pub fn simpson_real(samples: &[f64], step: f64) -> f64 {
    let panels = samples.len() - 1;
    let w = simpson_weights(panels);
    samples.iter().zip(&w).map(|(s, wj)| s * wj).sum::<f64>() * step
}

/// Cumulative integral of uniformly sampled data, fourth order at every node.
///
/// Even nodes accumulate by Simpson pairs; odd nodes add a single-panel
/// three-point rule on top of the preceding even node.
pub fn cumulative_simpson(samples: &[Complex64], step: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = (samples[0] + samples[1]) * (0.5 * step);
        return out;
    }
    let mut j = 0;
    while j + 2 < n {
        let (f0, f1, f2) = (samples[j], samples[j + 1], samples[j + 2]);
        out[j + 1] = out[j] + (f0 * 5.0 + f1 * 8.0 - f2) * (step / 12.0);
        out[j + 2] = out[j] + (f0 + f1 * 4.0 + f2) * (step / 3.0);
        j += 2;
    }
    if j + 1 < n {
        // odd panel count: close the last panel backwards
        let (f0, f1, f2) = (samples[j - 1], samples[j], samples[j + 1]);
        out[j + 1] = out[j] + (-f0 + f1 * 8.0 + f2 * 5.0) * (step / 12.0);
    }
    out
}

/// Linear interpolation of uniform samples on `[a, b]` onto `new_panels` intervals of the same span.
pub fn resample_linear(samples: &[Complex64], new_panels: usize) -> Vec<Complex64> {
    let old_panels = samples.len() - 1;
    if old_panels == new_panels {
        return samples.to_vec();
    }
    (0..=new_panels)
        .map(|j| {
            let x = j as f64 * old_panels as f64 / new_panels as f64;
            let k = (x.floor() as usize).min(old_panels - 1);
            let frac = x - k as f64;
            samples[k] * (1.0 - frac) + samples[k + 1] * frac
        })
        .collect()
}

/// `(e^w - 1) / w`, accurate near `w = 0`.
pub fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        // Horner form of 1 + w/2 + w^2/6 + w^3/24 + w^4/120 + w^5/720
        let mut acc = Complex64::new(1.0 / 720.0, 0.0);
        for c in [1.0 / 120.0, 1.0 / 24.0, 1.0 / 6.0, 0.5, 1.0] {
            acc = acc * w + c;
        }
        acc
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if order == 1 { x } else { p1 };
                let pm1 = if order == 1 { 1.0 } else { p0 };
                dp = n * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Composite rule over `[a, b]` split into `panels` equal pieces.
    pub fn integrate<F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + 0.5 * h * x) * *w;
            }
            total += acc * (0.5 * h);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        let n = 8;
        let h = 1.0 / n as f64;
        let s: Vec<Complex64> = (0..=n)
            .map(|j| {
                let x = j as f64 * h;
                Complex64::new(x * x * x, 1.0)
            })
            .collect();
        let v = simpson(&s, h);
        assert!((v.re - 0.25).abs() < 1e-15);
        assert!((v.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let n = 64;
        let h = 2.0 / n as f64;
        let s: Vec<Complex64> = (0..=n)
            .map(|j| Complex64::new(0.0, j as f64 * h).exp())
            .collect();
        let c = cumulative_simpson(&s, h);
        for (j, cj) in c.iter().enumerate() {
            let x = j as f64 * h;
            let exact = (Complex64::new(0.0, x).exp() - 1.0) / Complex64::new(0.0, 1.0);
            assert!((cj - exact).norm() < 1e-7, "node {j}");
        }
    }

    #[test]
    fn exprel_continuous_across_switch() {
        let w = Complex64::new(0.0, 1e-3);
        let a = exprel(w * (1.0 - 1e-9));
        let b = exprel(w * (1.0 + 1e-9));
        assert!((a - b).norm() < 1e-12);
        assert!((exprel(Complex64::new(0.0, 0.0)) - 1.0).norm() == 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(-1.0, 2.0, 3, |x| Complex64::new(x.powi(19), 0.0));
        let exact = (2f64.powi(20) - 1.0) / 20.0;
        assert!((v.re - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn resample_identity_and_linear() {
        let s: Vec<Complex64> = (0..=4).map(|j| Complex64::new(j as f64, 0.0)).collect();
        assert_eq!(resample_linear(&s, 4), s);
        let r = resample_linear(&s, 8);
        assert!((r[3].re - 1.5).abs() < 1e-15);
    }
}
