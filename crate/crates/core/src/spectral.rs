//! Characteristic function `D(z) = -iz + e^{-iz} + int_{-1}^0 e^{i tau z} phi(tau) dtau`,
//! its zeros, and the data of the biorthogonal system.
//!
//! Zeros are labelled by a signed branch index. Branch `n >= 1` lives in the
//! vertical strip `2 pi n - 3 pi / 2 <= Re z < 2 pi n + pi / 2`, negative
//! branches in the mirrored strips and branch 0 in `|Re z| <= pi / 2`. For
//! `phi = 0` this labelling agrees with `lambda_k = -i W_k(1)`.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::{count_zeros, Rect};
use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::quad::{cumulative_simpson, exprel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest `|Im z|` for which `e^{-iz}` is evaluated.
pub const MAX_IMAG: f64 = 700.0;

pub fn eval_charfn(z: Complex64, kernel: &DelayKernel) -> Result<Complex64> {
    check_range(z)?;
    Ok(-I * z + (-I * z).exp() + kernel.transform(z))
}

pub fn eval_charfn_derivative(z: Complex64, kernel: &DelayKernel) -> Result<Complex64> {
    check_range(z)?;
    Ok(-I - I * (-I * z).exp() + kernel.transform_derivative(z))
}

fn check_range(z: Complex64) -> Result<()> {
    if !(z.im.abs() < MAX_IMAG) || !z.re.is_finite() {
        return Err(Error::Range { z });
    }
    Ok(())
}

/// A simple zero `lambda` of `D` with cached `D'(lambda)` and the head of the
/// conjugated biorthogonal vector, `conj(xi_lambda) = -i / D'(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRecord {
    pub lambda: Complex64,
    pub d_prime: Complex64,
    pub xi_bar: Complex64,
    pub branch: i64,
}

impl EigenRecord {
    pub fn new(lambda: Complex64, kernel: &DelayKernel, branch: i64) -> Result<Self> {
        let d_prime = eval_charfn_derivative(lambda, kernel)?;
        Self::from_parts(lambda, d_prime, branch)
    }

    fn from_parts(lambda: Complex64, d_prime: Complex64, branch: i64) -> Result<Self> {
        if d_prime.norm() < 1e-12 {
            return Err(Error::MultipleZero {
                near: lambda,
                tol: 1e-12,
            });
        }
        Ok(EigenRecord {
            lambda,
            d_prime,
            xi_bar: -I / d_prime,
            branch,
        })
    }

    /// Zeros outside the open upper half-plane get special weighting in summation.
    pub fn is_exceptional(&self) -> bool {
        self.lambda.im <= 0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RootFinderConfig {
    pub root_tol: f64,
    pub dedup_tol: f64,
    pub max_iter: usize,
}

impl Default for RootFinderConfig {
    fn default() -> Self {
        RootFinderConfig {
            root_tol: 1e-11,
            dedup_tol: 1e-6,
            max_iter: 60,
        }
    }
}

impl RootFinderConfig {
    /// Residual bound at `z`. The terms of `D` have size `~|z|`, so the
    /// bound grows with `|z|` beyond the unit disc.
    pub fn residual_tol(&self, z: Complex64) -> f64 {
        self.root_tol * z.norm().max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumSet {
    records: Vec<EigenRecord>,
    kernel: DelayKernel,
    dedup_tol: f64,
}

impl SpectrumSet {
    pub fn records(&self) -> &[EigenRecord] {
        &self.records
    }

    pub fn kernel(&self) -> &DelayKernel {
        &self.kernel
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn branch(&self, n: i64) -> Option<&EigenRecord> {
        self.records.iter().find(|r| r.branch == n)
    }

    /// Records with `|lambda| < radius`, in ascending `|lambda|` (ties by branch).
    pub fn within_radius(&self, radius: f64) -> Vec<EigenRecord> {
        let mut out: Vec<EigenRecord> = self
            .records
            .iter()
            .filter(|r| r.lambda.norm() < radius)
            .copied()
            .collect();
        out.sort_by(|a, b| {
            a.lambda
                .norm()
                .total_cmp(&b.lambda.norm())
                .then(a.branch.cmp(&b.branch))
        });
        out
    }

    /// The first `count` records by ascending modulus.
    pub fn smallest(&self, count: usize) -> Vec<EigenRecord> {
        let mut all = self.within_radius(f64::INFINITY);
        all.truncate(count);
        all
    }

    /// True when every zero with `|lambda| < radius` is guaranteed present: the
    /// set holds a contiguous run of branches whose outermost members on both
    /// sides already lie beyond the radius.
    pub fn covers_radius(&self, radius: f64) -> bool {
        let (Some(lo), Some(hi)) = (
            self.records.iter().map(|r| r.branch).min(),
            self.records.iter().map(|r| r.branch).max(),
        ) else {
            return false;
        };
        let edge = |n: i64| {
            self.records
                .iter()
                .filter(|r| r.branch == n)
                .map(|r| r.lambda.re.abs())
                .fold(f64::INFINITY, f64::min)
        };
        lo <= 0 && hi >= 0 && edge(lo) >= radius && edge(hi) >= radius
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "branch,re_lambda,im_lambda,re_dprime,im_dprime,re_xibar,im_xibar"
        )?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.branch,
                num(r.lambda.re),
                num(r.lambda.im),
                num(r.d_prime.re),
                num(r.d_prime.im),
                num(r.xi_bar.re),
                num(r.xi_bar.im)
            )?;
        }
        Ok(())
    }
}

/// Branch half-width needed so that all zeros of modulus below `radius` are included.
///
/// Zeros are asymptotically `2 pi` apart; the estimate keeps a wide margin.
pub fn branches_for_radius(radius: f64) -> i64 {
    (radius / PI).ceil() as i64 + 8
}

/// Real-part interval of the strip assigned to `branch`.
pub fn branch_strip(branch: i64) -> (f64, f64) {
    let n = branch as f64;
    match branch {
        0 => (-PI / 2.0, PI / 2.0),
        b if b > 0 => (2.0 * PI * n - 1.5 * PI, 2.0 * PI * n + 0.5 * PI),
        _ => (2.0 * PI * n - 0.5 * PI, 2.0 * PI * n + 1.5 * PI),
    }
}

pub fn strip_of(re: f64) -> i64 {
    if re.abs() <= PI / 2.0 {
        0
    } else if re > 0.0 {
        ((re + 1.5 * PI) / (2.0 * PI)).floor() as i64
    } else {
        -strip_of(-re)
    }
}

/// Asymptotic location of the branch-`n` zero, `n >= 1`, used as a Newton seed.
pub fn asymptotic_seed(n: i64) -> Complex64 {
    let x = 2.0 * PI * n.unsigned_abs() as f64 - PI / 2.0;
    let z = Complex64::new(x, x.ln());
    if n < 0 {
        -z.conj()
    } else {
        z
    }
}

fn im_floor(kernel: &DelayKernel) -> f64 {
    // Below the real axis |D(z)| >= |z| - 1 - ||phi||_1.
    -(1.5 + kernel.l1_norm()).max(2.0)
}

fn im_ceiling(max_branch: u64, kernel: &DelayKernel) -> f64 {
    (2.0 * PI * (max_branch as f64 + 1.0)).ln() + 3.0 + (1.0 + kernel.l1_norm()).ln()
}

pub fn find_roots(kernel: &DelayKernel, branches: RangeInclusive<i64>) -> Result<SpectrumSet> {
    find_roots_with(kernel, branches, &RootFinderConfig::default())
}

pub fn find_roots_with(
    kernel: &DelayKernel,
    branches: RangeInclusive<i64>,
    cfg: &RootFinderConfig,
) -> Result<SpectrumSet> {
    let (lo, hi) = (*branches.start(), *branches.end());
    if lo > hi {
        return Ok(SpectrumSet {
            records: Vec::new(),
            kernel: kernel.clone(),
            dedup_tol: cfg.dedup_tol,
        });
    }
    let mut records = Vec::new();

    if lo <= 1 && hi >= -1 {
        let scan = Rect::new(
            branch_strip(-1).0,
            branch_strip(1).1,
            im_floor(kernel),
            im_ceiling(1, kernel),
        );
        for z in scan_rect(kernel, &scan, cfg)? {
            let b = strip_of(z.re);
            if b >= lo && b <= hi {
                records.push(EigenRecord::new(z, kernel, b)?);
            }
        }
    }

    let outer: Vec<i64> = branches.clone().filter(|n| n.abs() >= 2).collect();
    if kernel.is_real() {
        // D(-conj z) = conj D(z): negative branches are reflections of positive ones.
        let mut positive: Vec<i64> = outer.iter().map(|n| n.abs()).collect();
        positive.sort_unstable();
        positive.dedup();
        let roots: Vec<(i64, Complex64, Complex64)> = positive
            .par_iter()
            .map(|&n| {
                let z = newton_branch(kernel, n, cfg)?;
                Ok((n, z, eval_charfn_derivative(z, kernel)?))
            })
            .collect::<Result<_>>()?;
        for (n, z, dp) in roots {
            if n >= lo && n <= hi {
                records.push(EigenRecord::from_parts(z, dp, n)?);
            }
            if -n >= lo && -n <= hi {
                records.push(EigenRecord::from_parts(-z.conj(), -dp.conj(), -n)?);
            }
        }
    } else {
        let found: Vec<EigenRecord> = outer
            .par_iter()
            .map(|&n| EigenRecord::new(newton_branch(kernel, n, cfg)?, kernel, n))
            .collect::<Result<_>>()?;
        records.extend(found);
    }

    records.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.branch.cmp(&b.branch))
    });
    for pair in records.windows(2) {
        if (pair[0].lambda - pair[1].lambda).norm() <= cfg.dedup_tol {
            return Err(Error::MultipleZero {
                near: pair[0].lambda,
                tol: cfg.dedup_tol,
            });
        }
    }
    for r in &records {
        let res = eval_charfn(r.lambda, kernel)?.norm();
        if res >= cfg.residual_tol(r.lambda) {
            return Err(Error::NonConvergence {
                seed: r.lambda,
                iterations: cfg.max_iter,
                residual: res,
            });
        }
    }

    let max_branch = lo.unsigned_abs().max(hi.unsigned_abs());
    let contour = Rect::new(
        branch_strip(lo).0,
        branch_strip(hi).1,
        im_floor(kernel),
        im_ceiling(max_branch, kernel),
    );
    let d = |z: Complex64| eval_charfn(z, kernel);
    let expected = count_zeros(&d, &contour, 0.25)?;
    if expected != records.len() as i64 {
        return Err(Error::CountMismatch {
            contour: format!(
                "branches {lo}..={hi}, Re in [{:.3}, {:.3}], Im in [{:.3}, {:.3}]",
                contour.re_min, contour.re_max, contour.im_min, contour.im_max
            ),
            expected,
            found: records.len(),
        });
    }

    Ok(SpectrumSet {
        records,
        kernel: kernel.clone(),
        dedup_tol: cfg.dedup_tol,
    })
}

fn newton_branch(kernel: &DelayKernel, n: i64, cfg: &RootFinderConfig) -> Result<Complex64> {
    let seed = asymptotic_seed(n);
    let z = newton(kernel, seed, cfg)?;
    let got = strip_of(z.re);
    if got != n {
        return Err(Error::Domain(format!(
            "Newton from the branch {n} seed {seed} converged to {z} in strip {got}"
        )));
    }
    Ok(z)
}

/// Damped Newton iteration on `D`.
pub fn newton(kernel: &DelayKernel, seed: Complex64, cfg: &RootFinderConfig) -> Result<Complex64> {
    let mut z = seed;
    let mut d = eval_charfn(z, kernel)?;
    for _ in 0..cfg.max_iter {
        let dp = eval_charfn_derivative(z, kernel)?;
        if dp.norm() == 0.0 {
            break;
        }
        let step = d / dp;
        let mut t = 1.0;
        let (mut z_new, mut d_new);
        loop {
            z_new = z - step * t;
            d_new = eval_charfn(z_new, kernel)?;
            if d_new.norm() < d.norm() || t < 1e-3 || d.norm() < cfg.residual_tol(z) {
                break;
            }
            t *= 0.5;
        }
        z = z_new;
        d = d_new;
        if (step * t).norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    if d.norm() < cfg.residual_tol(z) {
        return Ok(z);
    }
    Err(Error::NonConvergence {
        seed,
        iterations: cfg.max_iter,
        residual: d.norm(),
    })
}

/// All zeros inside `rect`, located by recursive argument-principle bisection
/// followed by Newton polishing.
fn scan_rect(kernel: &DelayKernel, rect: &Rect, cfg: &RootFinderConfig) -> Result<Vec<Complex64>> {
    let d = |z: Complex64| eval_charfn(z, kernel);
    let total = count_zeros(&d, rect, 0.05)?;
    let mut found = Vec::new();
    scan_inner(kernel, rect, total, cfg, &mut found)?;
    if found.len() as i64 != total {
        return Err(Error::CountMismatch {
            contour: format!(
                "scan Re in [{:.3}, {:.3}], Im in [{:.3}, {:.3}]",
                rect.re_min, rect.re_max, rect.im_min, rect.im_max
            ),
            expected: total,
            found: found.len(),
        });
    }
    Ok(found)
}

fn scan_inner(
    kernel: &DelayKernel,
    rect: &Rect,
    count: i64,
    cfg: &RootFinderConfig,
    found: &mut Vec<Complex64>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let diam = rect.diameter();
    if count == 1 && diam < 1.0 {
        if let Ok(z) = newton(kernel, rect.center(), cfg) {
            if rect.contains(z) {
                if found.iter().any(|w| (w - z).norm() <= cfg.dedup_tol) {
                    return Err(Error::MultipleZero {
                        near: z,
                        tol: cfg.dedup_tol,
                    });
                }
                found.push(z);
                return Ok(());
            }
        }
    }
    if diam < cfg.dedup_tol {
        return Err(Error::MultipleZero {
            near: rect.center(),
            tol: cfg.dedup_tol,
        });
    }
    let d = |z: Complex64| eval_charfn(z, kernel);
    let (a, b) = rect.split();
    let step = (diam / 40.0).min(0.05);
    let ca = count_zeros(&d, &a, step)?;
    let cb = count - ca;
    scan_inner(kernel, &a, ca, cfg, found)?;
    scan_inner(kernel, &b, cb, cfg, found)
}

/// Fourier transform of the conjugated biorthogonal tail,
/// `int_{-1}^0 e^{izt} conj(x_lambda(t)) dt = (e^{-iz} + Phi(z) - i lambda) / (D'(lambda) (z - lambda))`.
///
/// Near `z = lambda` the removable singularity is evaluated through divided
/// differences of the exponentials.
pub fn biorth_tail_transform(
    record: &EigenRecord,
    z: Complex64,
    kernel: &DelayKernel,
) -> Result<Complex64> {
    check_range(z)?;
    let lambda = record.lambda;
    let dz = z - lambda;
    if dz.norm() >= 1e-6 {
        let num = (-I * z).exp() + kernel.transform(z) - I * lambda;
        return Ok(num / (record.d_prime * dz));
    }
    let mut acc = -I * (-I * lambda).exp() * exprel(-I * dz);
    if let DelayKernel::Sampled { samples } = kernel {
        let panels = samples.len() - 1;
        let h = 1.0 / panels as f64;
        let w = crate::quad::simpson_weights(panels);
        for (j, (phi, wj)) in samples.iter().zip(&w).enumerate() {
            let tau = -1.0 + j as f64 * h;
            acc += phi * (I * tau) * (I * lambda * tau).exp() * exprel(I * tau * dz) * (wj * h);
        }
    }
    Ok(acc / record.d_prime)
}

/// Closed-form conjugated tail for `phi = 0`: `conj(x_lambda(t)) = lambda e^{-i lambda t} / (lambda - i)`.
pub fn biorth_tail_model(record: &EigenRecord, kernel: &DelayKernel, t: f64) -> Result<Complex64> {
    if !kernel.is_zero() {
        return Err(Error::Unsupported(
            "closed-form biorthogonal tail exists only for the zero kernel".into(),
        ));
    }
    if !(-1.0..=0.0).contains(&t) {
        return Err(Error::Domain(format!("tail argument {t} outside [-1, 0]")));
    }
    let lambda = record.lambda;
    Ok(lambda * (-I * lambda * t).exp() / (lambda - I))
}

/// Conjugated biorthogonal tail sampled on `panels` intervals over `[-1, 0]`:
/// `conj(x_lambda(s)) = -i/D'(lambda) e^{-i lambda s} [e^{-i lambda} + int_{-1}^s phi(tau) e^{i lambda tau} dtau]`.
pub fn biorth_tail_samples(
    record: &EigenRecord,
    kernel: &DelayKernel,
    panels: usize,
) -> Result<Vec<Complex64>> {
    let lambda = record.lambda;
    check_range(lambda)?;
    let h = 1.0 / panels as f64;
    let scale = -I / record.d_prime;
    let base = (-I * lambda).exp();
    let cumulative = match kernel {
        DelayKernel::Zero => None,
        DelayKernel::Sampled { .. } => {
            let phi = kernel.samples_on(panels);
            let integrand: Vec<Complex64> = phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * (I * lambda * (-1.0 + j as f64 * h)).exp())
                .collect();
            Some(cumulative_simpson(&integrand, h))
        }
    };
    Ok((0..=panels)
        .map(|j| {
            let s = -1.0 + j as f64 * h;
            let inner = base
                + cumulative
                    .as_ref()
                    .map_or(Complex64::new(0.0, 0.0), |c| c[j]);
            scale * (-I * lambda * s).exp() * inner
        })
        .collect())
}
