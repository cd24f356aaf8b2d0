//! Elements of `M = C x L2(-1, 0)`: a head value `x(0)` and a sampled history tail.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::quad::simpson;
use crate::spectral::{biorth_tail_samples, EigenRecord};

/// Default number of tail panels over `[-1, 0]`.
pub const DEFAULT_TAIL_PANELS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct MState {
    pub head: Complex64,
    tail: Vec<Complex64>,
}

impl MState {
    pub fn new(head: Complex64, tail: Vec<Complex64>) -> Result<Self> {
        let panels = tail.len().saturating_sub(1);
        if panels < 2 || !panels.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "tail needs an even number of panels over [-1, 0], got {panels}"
            )));
        }
        if !head.re.is_finite()
            || !head.im.is_finite()
            || tail.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Grid("state samples must be finite".into()));
        }
        Ok(MState { head, tail })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(
        head: Complex64,
        panels: usize,
        tail: F,
    ) -> Result<Self> {
        let h = 1.0 / panels as f64;
        Self::new(
            head,
            (0..=panels).map(|j| tail(-1.0 + j as f64 * h)).collect(),
        )
    }

    pub fn zero(panels: usize) -> Result<Self> {
        Self::new(
            Complex64::new(0.0, 0.0),
            vec![Complex64::new(0.0, 0.0); panels + 1],
        )
    }

    /// The eigenvector `(1, e^{i lambda tau})`.
    pub fn eigenvector(lambda: Complex64, panels: usize) -> Result<Self> {
        let i = Complex64::new(0.0, 1.0);
        Self::from_fn(Complex64::new(1.0, 0.0), panels, |tau| {
            (i * lambda * tau).exp()
        })
    }

    pub fn tail(&self) -> &[Complex64] {
        &self.tail
    }

    pub fn panels(&self) -> usize {
        self.tail.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.panels() as f64
    }

    pub fn is_real(&self) -> bool {
        self.head.im == 0.0 && self.tail.iter().all(|v| v.im == 0.0)
    }

    fn check_grid(&self, other: &MState) -> Result<()> {
        if self.panels() != other.panels() {
            return Err(Error::Grid(format!(
                "grid mismatch: {} vs {} panels",
                self.panels(),
                other.panels()
            )));
        }
        Ok(())
    }

    /// `a + scale * b`
    pub fn axpy(&self, scale: Complex64, other: &MState) -> Result<MState> {
        self.check_grid(other)?;
        Ok(MState {
            head: self.head + scale * other.head,
            tail: self
                .tail
                .iter()
                .zip(&other.tail)
                .map(|(a, b)| a + scale * b)
                .collect(),
        })
    }

    pub fn scaled(&self, scale: Complex64) -> MState {
        MState {
            head: self.head * scale,
            tail: self.tail.iter().map(|v| v * scale).collect(),
        }
    }

    /// Writes `head_re,head_im` and its value, then the tail as `t,re_x,im_x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "head_re,head_im")?;
        writeln!(w, "{},{}", num(self.head.re), num(self.head.im))?;
        writeln!(w, "t,re_x,im_x")?;
        let h = self.step();
        for (j, v) in self.tail.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                num(-1.0 + j as f64 * h),
                num(v.re),
                num(v.im)
            )?;
        }
        Ok(())
    }
}

/// `<a, b> = a.head conj(b.head) + int a.tail conj(b.tail)`, linear in the first slot.
pub fn m_inner(a: &MState, b: &MState) -> Result<Complex64> {
    a.check_grid(b)?;
    let prod: Vec<Complex64> = a
        .tail
        .iter()
        .zip(&b.tail)
        .map(|(x, y)| x * y.conj())
        .collect();
    Ok(a.head * b.head.conj() + simpson(&prod, a.step()))
}

pub fn m_norm(a: &MState) -> f64 {
    let sq: Vec<f64> = a.tail.iter().map(|v| v.norm_sqr()).collect();
    (a.head.norm_sqr() + crate::quad::simpson_real(&sq, a.step()))
        .max(0.0)
        .sqrt()
}

/// Coefficient of `e_lambda` in the formal eigen-expansion of `x`: `<x, x_lambda>`.
pub fn expansion_coefficient(
    x: &MState,
    record: &EigenRecord,
    kernel: &DelayKernel,
) -> Result<Complex64> {
    let tail = biorth_tail_samples(record, kernel, x.panels())?;
    let prod: Vec<Complex64> = x.tail.iter().zip(&tail).map(|(a, b)| a * b).collect();
    Ok(x.head * record.xi_bar + simpson(&prod, x.step()))
}
