use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{resample_linear, simpson_weights};

/// The distributed-delay weight `phi` on `[-1, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayKernel {
    /// `phi = 0`: the pure discrete-delay equation `x'(t) = x(t-1) + u(t)`.
    Zero,
    /// Uniform samples of `phi` at `tau_j = -1 + j/panels`, `j = 0..=panels`.
    Sampled { samples: Vec<Complex64> },
}

impl DelayKernel {
    pub fn sampled(samples: Vec<Complex64>) -> Result<Self> {
        let panels = samples.len().saturating_sub(1);
        if panels < 2 || !panels.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "kernel needs an even number of panels over [-1, 0], got {panels}"
            )));
        }
        if samples
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(Error::Grid("kernel samples must be finite".into()));
        }
        Ok(DelayKernel::Sampled { samples })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(panels: usize, phi: F) -> Result<Self> {
        let h = 1.0 / panels as f64;
        Self::sampled((0..=panels).map(|j| phi(-1.0 + j as f64 * h)).collect())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DelayKernel::Zero)
    }

    pub fn panels(&self) -> Option<usize> {
        match self {
            DelayKernel::Zero => None,
            DelayKernel::Sampled { samples } => Some(samples.len() - 1),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            DelayKernel::Zero => true,
            DelayKernel::Sampled { samples } => samples.iter().all(|s| s.im == 0.0),
        }
    }

    /// Simpson approximation of `int |phi|`.
    pub fn l1_norm(&self) -> f64 {
        match self {
            DelayKernel::Zero => 0.0,
            DelayKernel::Sampled { samples } => {
                let panels = samples.len() - 1;
                let w = simpson_weights(panels);
                samples
                    .iter()
                    .zip(&w)
                    .map(|(s, w)| s.norm() * w)
                    .sum::<f64>()
                    / panels as f64
            }
        }
    }

    /// `int_{-1}^0 e^{i tau z} phi(tau) dtau` by Simpson on the kernel grid.
    pub fn transform(&self, z: Complex64) -> Complex64 {
        self.weighted_transform(z, |_| Complex64::new(1.0, 0.0))
    }

    /// Derivative in `z` of [`transform`](Self::transform): `int i tau e^{i tau z} phi(tau) dtau`.
    pub fn transform_derivative(&self, z: Complex64) -> Complex64 {
        self.weighted_transform(z, |tau| Complex64::new(0.0, tau))
    }

    fn weighted_transform<G: Fn(f64) -> Complex64>(&self, z: Complex64, g: G) -> Complex64 {
        match self {
            DelayKernel::Zero => Complex64::new(0.0, 0.0),
            DelayKernel::Sampled { samples } => {
                let panels = samples.len() - 1;
                let h = 1.0 / panels as f64;
                let w = simpson_weights(panels);
                let iz = Complex64::new(0.0, 1.0) * z;
                samples
                    .iter()
                    .zip(&w)
                    .enumerate()
                    .map(|(j, (phi, wj))| {
                        let tau = -1.0 + j as f64 * h;
                        (iz * tau).exp() * g(tau) * phi * *wj
                    })
                    .sum::<Complex64>()
                    * h
            }
        }
    }

    /// Kernel values on a grid of `panels` intervals over `[-1, 0]` (linear interpolation).
    pub fn samples_on(&self, panels: usize) -> Vec<Complex64> {
        match self {
            DelayKernel::Zero => vec![Complex64::new(0.0, 0.0); panels + 1],
            DelayKernel::Sampled { samples } => resample_linear(samples, panels),
        }
    }

    /// Reads `tau,phi` or `tau,re_phi,im_phi` rows; a non-numeric first line is a header.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut taus = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            let nums = match parsed {
                Ok(v) => v,
                Err(_) if taus.is_empty() && idx == 0 => continue,
                Err(_) => {
                    return Err(Error::config(
                        idx + 1,
                        path.display().to_string(),
                        format!("unparsable kernel row `{line}`"),
                    ))
                }
            };
            let value = match nums.as_slice() {
                [tau, re] => (*tau, Complex64::new(*re, 0.0)),
                [tau, re, im] => (*tau, Complex64::new(*re, *im)),
                _ => {
                    return Err(Error::config(
                        idx + 1,
                        path.display().to_string(),
                        "kernel rows need 2 or 3 columns",
                    ))
                }
            };
            taus.push(value.0);
            values.push(value.1);
        }
        let panels = values.len().saturating_sub(1);
        if panels == 0 {
            return Err(Error::config(
                0,
                path.display().to_string(),
                "kernel file has no samples",
            ));
        }
        let h = 1.0 / panels as f64;
        for (j, tau) in taus.iter().enumerate() {
            if (tau - (-1.0 + j as f64 * h)).abs() > 1e-9 {
                return Err(Error::config(
                    j + 1,
                    path.display().to_string(),
                    format!("kernel grid must be uniform on [-1, 0]; node {j} is at {tau}"),
                ));
            }
        }
        Self::sampled(values)
    }
}
