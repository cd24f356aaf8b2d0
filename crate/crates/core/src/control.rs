//! Explicit controls for the pure discrete-delay equation (`phi = 0`) on a
//! horizon `T in (1, 2)`.
//!
//! For each root `lambda` a function `p(t) = B cosh t + A sinh t` on `(0, delta)`
//! (`delta = T - 1`, zero outside) generates
//!
//! ```text
//! q(t) = -i a_lambda [ p(t - 1) + int_{t-1}^t e^{-i lambda (t - s)} p(s) ds ],   a_lambda = 1/(e^{i lambda} D'(lambda))
//! ```
//!
//! with `int_0^T e^{i mu t} q(t) dt = delta_{lambda mu}`. The biorthogonal
//! function is `v_lambda = conj(q)` and the control nulling `e_lambda` is
//! `u_lambda(t) = kappa q(T - t)`, `kappa = -e^{i lambda T} / xi_bar`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::quad::exprel;
use crate::sim::{simulate, terminal_segment_norm};
use crate::spectral::{EigenRecord, SpectrumSet};
use crate::state::MState;
use crate::summation::{weighted_terms, SummationSchedule};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A control horizon `T` with `1 < T < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    t: f64,
}

impl Horizon {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 1.0 && t < 2.0) {
            return Err(Error::Unsupported(format!(
                "explicit controls need a horizon 1 < T < 2, got T = {t}"
            )));
        }
        Ok(Horizon { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.t - 1.0
    }
}

/// One-sided limit selector at jump points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthControl {
    pub lambda: Complex64,
    /// `A`, the `sinh` coefficient.
    pub sinh_coef: Complex64,
    /// `B = p(0)`, the `cosh` coefficient.
    pub cosh_coef: Complex64,
    pub a_lambda: Complex64,
    pub horizon: Horizon,
}

impl BiorthControl {
    // p = P+ e^t + P- e^{-t}
    fn exp_coefs(&self) -> (Complex64, Complex64) {
        let (a, b) = (self.sinh_coef, self.cosh_coef);
        ((b + a) / 2.0, (b - a) / 2.0)
    }

    /// `p(t)` on `[0, delta]`, zero elsewhere.
    pub fn p_bar(&self, t: f64) -> Complex64 {
        if t < 0.0 || t > self.horizon.delta() {
            return Complex64::new(0.0, 0.0);
        }
        self.cosh_coef * t.cosh() + self.sinh_coef * t.sinh()
    }

    /// `p'(t)` on `[0, delta]`, zero elsewhere.
    pub fn p_bar_derivative(&self, t: f64) -> Complex64 {
        if t < 0.0 || t > self.horizon.delta() {
            return Complex64::new(0.0, 0.0);
        }
        self.cosh_coef * t.sinh() + self.sinh_coef * t.cosh()
    }

    /// `c(t) = int_{max(t-1,0)}^{min(t,delta)} e^{-i lambda (t - s)} p(s) ds`, closed form.
    pub fn convolution(&self, t: f64) -> Complex64 {
        let lo = (t - 1.0).max(0.0);
        let hi = t.min(self.horizon.delta());
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let (pp, pm) = self.exp_coefs();
        let il = I * self.lambda;
        let part = |coef: Complex64, sign: f64| {
            let s = il + sign;
            // e^{-i lambda t} (e^{s hi} - e^{s lo}) / s, kept bounded by factoring e^{s lo}
            let w = s * (hi - lo);
            coef * (-il * (t - lo) + sign * lo).exp() * (hi - lo) * exprel(w)
        };
        part(pp, 1.0) + part(pm, -1.0)
    }

    /// `int_0^delta e^{i lambda t} p(t) dt - 1`, closed form.
    pub fn normalization_residual(&self) -> Complex64 {
        let d = self.horizon.delta();
        let (pp, pm) = self.exp_coefs();
        let il = I * self.lambda;
        pp * d * exprel((il + 1.0) * d) + pm * d * exprel((il - 1.0) * d) - 1.0
    }

    /// `q(t)` with the requested one-sided limit at the jumps `t = 1` and `t = T`.
    pub fn q(&self, t: f64, side: Side) -> Complex64 {
        let s = t - 1.0;
        let d = self.horizon.delta();
        let inside = match side {
            Side::Right => (0.0..d).contains(&s),
            Side::Left => s > 0.0 && s <= d,
        };
        let direct = if inside {
            self.cosh_coef * s.cosh() + self.sinh_coef * s.sinh()
        } else {
            Complex64::new(0.0, 0.0)
        };
        -I * self.a_lambda * (direct + self.convolution(t))
    }
}

/// Solves for `p` from the single normalization `int_0^delta e^{i lambda t} p = 1`.
///
/// The orthogonality conditions force `p'' = p` with `A = i lambda B - lambda^2`.
pub fn solve_p_lambda(
    record: &EigenRecord,
    kernel: &DelayKernel,
    horizon: Horizon,
) -> Result<BiorthControl> {
    if !kernel.is_zero() {
        return Err(Error::Unsupported(
            "explicit biorthogonal controls exist only for the zero kernel".into(),
        ));
    }
    let lambda = record.lambda;
    let d = horizon.delta();
    let il = I * lambda;
    let e_plus = d * exprel((il + 1.0) * d);
    let e_minus = d * exprel((il - 1.0) * d);
    let denom = (1.0 + il) * e_plus + (1.0 - il) * e_minus;
    let scale = (1.0 + il).norm() * e_plus.norm() + (1.0 - il).norm() * e_minus.norm();
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::DegenerateNormalization { lambda });
    }
    let b = (2.0 - lambda * lambda * (e_minus - e_plus)) / denom;
    let a = il * b - lambda * lambda;
    let a_lambda = 1.0 / ((il).exp() * record.d_prime);
    let bc = BiorthControl {
        lambda,
        sinh_coef: a,
        cosh_coef: b,
        a_lambda,
        horizon,
    };
    let res = bc.normalization_residual().norm();
    if !(res < 1e-9) {
        return Err(Error::DegenerateNormalization { lambda });
    }
    Ok(bc)
}

/// `v_lambda(t) = conj(q(t))`. At the jumps `t = 1` and `t = T` the value is the
/// mean of the one-sided limits, except at the endpoint `T` (left limit).
pub fn eval_v_lambda(bc: &BiorthControl, t: f64) -> Result<Complex64> {
    let big_t = bc.horizon.t();
    if !(0.0..=big_t).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {big_t}]")));
    }
    let q = if t == big_t {
        bc.q(t, Side::Left)
    } else {
        0.5 * (bc.q(t, Side::Left) + bc.q(t, Side::Right))
    };
    Ok(q.conj())
}

/// A control on `[0, T]` sampled at `t_k = k / steps_per_unit`, keeping both
/// one-sided limits so that jumps at grid nodes are integrated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    t_end: f64,
    steps_per_unit: usize,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

/// Number of steps of size `1/steps_per_unit` covering `[0, t]`, if aligned.
pub fn aligned_steps(t: f64, steps_per_unit: usize) -> Result<usize> {
    let x = t * steps_per_unit as f64;
    let k = x.round();
    if steps_per_unit == 0 || (x - k).abs() > 1e-9 * x.max(1.0) || k < 0.0 {
        return Err(Error::Grid(format!(
            "t = {t} is not a multiple of the step 1/{steps_per_unit}"
        )));
    }
    Ok(k as usize)
}

impl ControlSignal {
    pub fn zero(t_end: f64, steps_per_unit: usize) -> Result<Self> {
        let k = aligned_steps(t_end, steps_per_unit)?;
        let z = vec![Complex64::new(0.0, 0.0); k + 1];
        Ok(ControlSignal {
            t_end,
            steps_per_unit,
            left: z.clone(),
            right: z,
        })
    }

    /// A control that is continuous at every node.
    pub fn from_samples(
        t_end: f64,
        steps_per_unit: usize,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        Self::from_limits(t_end, steps_per_unit, samples.clone(), samples)
    }

    pub fn from_limits(
        t_end: f64,
        steps_per_unit: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
    ) -> Result<Self> {
        let k = aligned_steps(t_end, steps_per_unit)?;
        if left.len() != k + 1 || right.len() != k + 1 {
            return Err(Error::Grid(format!(
                "control needs {} samples on [0, {t_end}], got {} / {}",
                k + 1,
                left.len(),
                right.len()
            )));
        }
        if left
            .iter()
            .chain(&right)
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Grid("control samples must be finite".into()));
        }
        Ok(ControlSignal {
            t_end,
            steps_per_unit,
            left,
            right,
        })
    }

    /// Samples `f(t, side)` on the grid; the left limit at 0 and the right limit at `T` are unused.
    pub fn from_fn<F>(t_end: f64, steps_per_unit: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, Side) -> Complex64,
    {
        let k = aligned_steps(t_end, steps_per_unit)?;
        let h = 1.0 / steps_per_unit as f64;
        let mut left = Vec::with_capacity(k + 1);
        let mut right = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let t = if j == k { t_end } else { j as f64 * h };
            left.push(if j == 0 {
                f(t, Side::Right)
            } else {
                f(t, Side::Left)
            });
            right.push(if j == k {
                f(t, Side::Left)
            } else {
                f(t, Side::Right)
            });
        }
        Self::from_limits(t_end, steps_per_unit, left, right)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn steps(&self) -> usize {
        self.left.len() - 1
    }

    pub fn left(&self) -> &[Complex64] {
        &self.left
    }

    pub fn right(&self) -> &[Complex64] {
        &self.right
    }

    /// Node values; the mean of the one-sided limits at jumps.
    pub fn samples(&self) -> Vec<Complex64> {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| 0.5 * (l + r))
            .collect()
    }

    /// `a + scale * b`
    pub fn axpy(&self, scale: Complex64, other: &ControlSignal) -> Result<ControlSignal> {
        if self.steps_per_unit != other.steps_per_unit || self.left.len() != other.left.len() {
            return Err(Error::Grid("control grids differ".into()));
        }
        let comb = |a: &[Complex64], b: &[Complex64]| {
            a.iter().zip(b).map(|(x, y)| x + scale * y).collect()
        };
        Ok(ControlSignal {
            t_end: self.t_end,
            steps_per_unit: self.steps_per_unit,
            left: comb(&self.left, &other.left),
            right: comb(&self.right, &other.right),
        })
    }

    /// Value at an arbitrary `t` by linear interpolation of the one-sided limits.
    pub fn eval(&self, t: f64) -> Complex64 {
        let k = self.steps();
        if !(0.0..=self.t_end).contains(&t) {
            return Complex64::new(0.0, 0.0);
        }
        let x = t * self.steps_per_unit as f64;
        let j = (x.floor() as usize).min(k.saturating_sub(1));
        let frac = x - j as f64;
        if frac.abs() < 1e-12 {
            return 0.5 * (self.left[j] + self.right[j]);
        }
        if (1.0 - frac).abs() < 1e-12 {
            return 0.5 * (self.left[j + 1] + self.right[j + 1]);
        }
        self.right[j] * (1.0 - frac) + self.left[j + 1] * frac
    }

    /// Linear resampling onto another grid (jumps are smeared over one step).
    pub fn resample(&self, steps_per_unit: usize) -> Result<ControlSignal> {
        let h = 1.0 / steps_per_unit as f64;
        let k = aligned_steps(self.t_end, steps_per_unit)?;
        let s: Vec<Complex64> = (0..=k)
            .map(|j| self.eval(if j == k { self.t_end } else { j as f64 * h }))
            .collect();
        ControlSignal::from_samples(self.t_end, steps_per_unit, s)
    }

    fn trapezoid_sq<G: Fn(Complex64) -> f64>(&self, g: G) -> f64 {
        let h = 1.0 / self.steps_per_unit as f64;
        (0..self.steps())
            .map(|j| 0.5 * h * (g(self.right[j]) + g(self.left[j + 1])))
            .sum()
    }

    /// `L2(0, T)` norm (trapezoid on one-sided limits).
    pub fn l2_norm(&self) -> f64 {
        self.trapezoid_sq(|v| v.norm_sqr()).sqrt()
    }

    pub fn l2_distance(&self, other: &ControlSignal) -> Result<f64> {
        Ok(self.axpy(Complex64::new(-1.0, 0.0), other)?.l2_norm())
    }

    /// `(||Re u||, ||Im u||)`
    pub fn real_imag_norms(&self) -> (f64, f64) {
        (
            self.trapezoid_sq(|v| v.re * v.re).sqrt(),
            self.trapezoid_sq(|v| v.im * v.im).sqrt(),
        )
    }

    /// Rows `t,re_u,im_u` at the grid nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re_u,im_u")?;
        let h = 1.0 / self.steps_per_unit as f64;
        let k = self.steps();
        for (j, v) in self.samples().iter().enumerate() {
            let t = if j == k { self.t_end } else { j as f64 * h };
            writeln!(w, "{},{},{}", num(t), num(v.re), num(v.im))?;
        }
        Ok(())
    }
}

/// Which function of `v_lambda` is time-reversed into the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlConvention {
    /// `u_lambda(t) = kappa conj(v_lambda(T - t))`
    Conjugate,
    /// `u_lambda(t) = kappa v_lambda(T - t)`
    Plain,
}

impl ControlConvention {
    pub fn name(&self) -> &'static str {
        match self {
            ControlConvention::Conjugate => "conjugate",
            ControlConvention::Plain => "plain",
        }
    }
}

/// `kappa = -e^{i lambda T} / xi_bar`, which gives the moment
/// `int_0^T u_lambda(t) e^{-i lambda t} dt = -1/xi_bar` under the conjugate convention.
pub fn kappa(record: &EigenRecord, horizon: Horizon) -> Complex64 {
    -(I * record.lambda * horizon.t()).exp() / record.xi_bar
}

pub fn u_for_eigenvector_with(
    record: &EigenRecord,
    kernel: &DelayKernel,
    horizon: Horizon,
    grid: usize,
    convention: ControlConvention,
) -> Result<ControlSignal> {
    let bc = solve_p_lambda(record, kernel, horizon)?;
    let k = kappa(record, horizon);
    let big_t = horizon.t();
    // the left limit of u at t is the right limit of q at T - t
    let flip = |side: Side| match side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    ControlSignal::from_fn(big_t, grid, |t, side| {
        let q = bc.q(big_t - t, flip(side));
        match convention {
            ControlConvention::Conjugate => k * q,
            ControlConvention::Plain => k * q.conj(),
        }
    })
}

/// The control `u_lambda` that steers `e_lambda` to zero at time `T`.
pub fn u_for_eigenvector(
    record: &EigenRecord,
    kernel: &DelayKernel,
    horizon: Horizon,
    grid: usize,
) -> Result<ControlSignal> {
    u_for_eigenvector_with(record, kernel, horizon, grid, ControlConvention::Conjugate)
}

/// Largest accepted terminal ratio when validating a convention.
pub const CONVENTION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionReport {
    pub chosen: ControlConvention,
    pub validated_on: Complex64,
    pub residual_conjugate: f64,
    pub residual_plain: f64,
}

/// Controlled-to-free terminal norm ratio starting from `e_lambda`.
pub fn null_ratio(
    record: &EigenRecord,
    control: &ControlSignal,
    kernel: &DelayKernel,
    horizon: Horizon,
    grid: usize,
) -> Result<f64> {
    let x0 = MState::eigenvector(record.lambda, grid)?;
    let big_t = horizon.t();
    let free = simulate(&x0, None, kernel, big_t, grid)?;
    let ctl = simulate(&x0, Some(control), kernel, big_t, grid)?;
    Ok(terminal_segment_norm(&ctl, big_t)? / terminal_segment_norm(&free, big_t)?)
}

/// Runs both conventions for `record` through the simulator and keeps the one that nulls `e_lambda`.
pub fn validate_convention(
    record: &EigenRecord,
    kernel: &DelayKernel,
    horizon: Horizon,
    grid: usize,
) -> Result<ConventionReport> {
    let run = |c| -> Result<f64> {
        let u = u_for_eigenvector_with(record, kernel, horizon, grid, c)?;
        null_ratio(record, &u, kernel, horizon, grid)
    };
    let rc = run(ControlConvention::Conjugate)?;
    let rp = run(ControlConvention::Plain)?;
    let best = if rc <= rp {
        (ControlConvention::Conjugate, rc)
    } else {
        (ControlConvention::Plain, rp)
    };
    if !(best.1 < CONVENTION_TOL) {
        return Err(Error::ConventionValidation {
            residual_conjugate: rc,
            residual_plain: rp,
        });
    }
    Ok(ConventionReport {
        chosen: best.0,
        validated_on: record.lambda,
        residual_conjugate: rc,
        residual_plain: rp,
    })
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub control: ControlSignal,
    pub convention: ConventionReport,
    /// `(branch, kappa_lambda)` for every term used, ascending `|lambda|`.
    pub kappas: Vec<(i64, Complex64)>,
}

/// `u = sum_lambda w_n(lambda) <x0, x_lambda> u_lambda`, summed in ascending `|lambda|`.
pub fn synthesize_control(
    x0: &MState,
    n: u32,
    spectrum: &SpectrumSet,
    schedule: &SummationSchedule,
    horizon: Horizon,
    grid: usize,
) -> Result<Synthesis> {
    let kernel = spectrum.kernel();
    let probe = spectrum
        .records()
        .iter()
        .filter(|r| !r.is_exceptional())
        .min_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()))
        .ok_or_else(|| {
            Error::Domain("spectrum has no eigenvalue in the upper half-plane".into())
        })?;
    let convention = validate_convention(probe, kernel, horizon, grid)?;
    let terms = weighted_terms(x0, n, spectrum, schedule)?;
    let parts: Vec<(Complex64, ControlSignal)> = terms
        .par_iter()
        .map(|t| {
            let u = u_for_eigenvector_with(&t.record, kernel, horizon, grid, convention.chosen)?;
            Ok((t.weight * t.coefficient, u))
        })
        .collect::<Result<_>>()?;
    let mut control = ControlSignal::zero(horizon.t(), grid)?;
    for (c, u) in &parts {
        control = control.axpy(*c, u)?;
    }
    let kappas = terms
        .iter()
        .map(|t| (t.record.branch, kappa(&t.record, horizon)))
        .collect();
    Ok(Synthesis {
        control,
        convention,
        kappas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::find_roots;

    fn lambda1() -> EigenRecord {
        *find_roots(&DelayKernel::Zero, 1..=1)
            .unwrap()
            .branch(1)
            .unwrap()
    }

    #[test]
    fn horizon_window() {
        assert!(Horizon::new(1.0).is_err());
        assert!(Horizon::new(2.0).is_err());
        let h = Horizon::new(1.5).unwrap();
        assert_eq!(h.delta(), 0.5);
    }

    #[test]
    fn coefficients_for_first_root() {
        let bc =
            solve_p_lambda(&lambda1(), &DelayKernel::Zero, Horizon::new(1.5).unwrap()).unwrap();
        assert!((bc.cosh_coef - Complex64::new(3.50694, -4.17466)).norm() < 1e-4);
        assert!((bc.sinh_coef - Complex64::new(-3.90378, 8.32477)).norm() < 1e-4);
        assert!(bc.normalization_residual().norm() < 1e-12);
        let k = kappa(&lambda1(), Horizon::new(1.5).unwrap());
        assert!((k - Complex64::new(0.172353, -0.406491)).norm() < 1e-5);
    }

    #[test]
    fn convolution_matches_quadrature() {
        let bc =
            solve_p_lambda(&lambda1(), &DelayKernel::Zero, Horizon::new(1.5).unwrap()).unwrap();
        let gl = crate::quad::GaussLegendre::new(20);
        for &t in &[0.2, 0.5, 0.8, 1.2, 1.45] {
            let lo = (t - 1.0f64).max(0.0);
            let hi = t.min(0.5);
            let want = gl.integrate(lo, hi, 4, |s| {
                (-I * bc.lambda * (t - s)).exp() * bc.p_bar(s)
            });
            assert!((bc.convolution(t) - want).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn v_lambda_domain() {
        let bc =
            solve_p_lambda(&lambda1(), &DelayKernel::Zero, Horizon::new(1.5).unwrap()).unwrap();
        assert!(eval_v_lambda(&bc, -0.1).is_err());
        assert!(eval_v_lambda(&bc, 1.6).is_err());
        assert!(eval_v_lambda(&bc, 1.5).is_ok());
    }

    #[test]
    fn sampled_kernel_is_unsupported() {
        let k = DelayKernel::from_fn(8, |_| Complex64::new(0.1, 0.0)).unwrap();
        let r = lambda1();
        assert!(matches!(
            solve_p_lambda(&r, &k, Horizon::new(1.5).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn signal_norms_and_alignment() {
        assert!(ControlSignal::zero(1.5, 3).is_err());
        let one = ControlSignal::from_samples(1.5, 4, vec![Complex64::new(1.0, 0.0); 7]).unwrap();
        assert!((one.l2_norm() - 1.5f64.sqrt()).abs() < 1e-14);
        let (re, im) = one.real_imag_norms();
        assert!(im == 0.0 && (re - one.l2_norm()).abs() < 1e-15);
    }
}
