//! Zero counting by the argument principle on axis-aligned rectangles.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Splits across the longer side, off-center so that symmetric zeros
    /// (e.g. on the imaginary axis) do not land on the cut.
    pub fn split(&self) -> (Rect, Rect) {
        const RATIO: f64 = 0.4637;
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let cut = self.re_min + RATIO * (self.re_max - self.re_min);
            (
                Rect::new(self.re_min, cut, self.im_min, self.im_max),
                Rect::new(cut, self.re_max, self.im_min, self.im_max),
            )
        } else {
            let cut = self.im_min + RATIO * (self.im_max - self.im_min);
            (
                Rect::new(self.re_min, self.re_max, self.im_min, cut),
                Rect::new(self.re_min, self.re_max, cut, self.im_max),
            )
        }
    }

    fn describe(&self) -> String {
        format!(
            "[{:.4}, {:.4}] x [{:.4}, {:.4}]",
            self.re_min, self.re_max, self.im_min, self.im_max
        )
    }
}

const MAX_DEPTH: u32 = 48;

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
///
/// The change of argument is accumulated along the boundary with adaptive
/// bisection; consecutive samples may differ by at most a quarter turn and
/// by at most half of the smaller modulus.
pub fn count_zeros<F>(f: &F, rect: &Rect, base_step: f64) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let corners = [
        Complex64::new(rect.re_min, rect.im_min),
        Complex64::new(rect.re_max, rect.im_min),
        Complex64::new(rect.re_max, rect.im_max),
        Complex64::new(rect.re_min, rect.im_max),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        total += edge_arg_change(f, a, b, base_step, rect)?;
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 {
        return Err(Error::Domain(format!(
            "winding number {turns:.4} over {} is not an integer",
            rect.describe()
        )));
    }
    Ok(rounded as i64)
}

fn edge_arg_change<F>(f: &F, a: Complex64, b: Complex64, base_step: f64, rect: &Rect) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let len = (b - a).norm();
    let pieces = ((len / base_step).ceil() as usize).max(4);
    let mut total = 0.0;
    let mut z0 = a;
    let mut f0 = f(a)?;
    for k in 1..=pieces {
        let z1 = a + (b - a) * (k as f64 / pieces as f64);
        let f1 = f(z1)?;
        total += refine(f, z0, f0, z1, f1, 0, rect)?;
        z0 = z1;
        f0 = f1;
    }
    Ok(total)
}

fn refine<F>(
    f: &F,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: u32,
    rect: &Rect,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let darg = (f1 / f0).arg();
    let smooth = darg.abs() <= std::f64::consts::FRAC_PI_4
        && (f1 - f0).norm() <= 0.5 * f0.norm().min(f1.norm());
    if smooth {
        return Ok(darg);
    }
    if depth >= MAX_DEPTH || f0.norm() == 0.0 || f1.norm() == 0.0 {
        return Err(Error::Domain(format!(
            "function vanishes on or too near the contour {} near {z0}",
            rect.describe()
        )));
    }
    let zm = 0.5 * (z0 + z1);
    let fm = f(zm)?;
    Ok(refine(f, z0, f0, zm, fm, depth + 1, rect)? + refine(f, zm, fm, z1, f1, depth + 1, rect)?)
}
