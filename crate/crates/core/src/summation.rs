//! Regularized summation of the eigen-expansion.
//!
//! The weights are `W_n(z) = exp(-l_n pi - i l_n Log((z - n)/(z + n)))` on the
//! closed upper half-plane, cut off to zero for `|lambda| >= R_n`. For fixed
//! `z` they tend to 1 as `n` grows, while `|W_n| <= 1` holds uniformly.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num;
use crate::spectral::{EigenRecord, SpectrumSet};
use crate::state::{expansion_coefficient, MState};

/// `coef * n^exponent`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn at(&self, n: u32) -> f64 {
        self.coef * (n as f64).powf(self.exponent)
    }
}

/// `n -> (l_n, R_n)` for `1 <= n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummationSchedule {
    pub l: PowerLaw,
    pub r: PowerLaw,
    pub n_max: u32,
}

impl SummationSchedule {
    /// `l_n = n^{1/4}`, `R_n = n^4`.
    pub fn default_rule(n_max: u32) -> Self {
        SummationSchedule {
            l: PowerLaw {
                coef: 1.0,
                exponent: 0.25,
            },
            r: PowerLaw {
                coef: 1.0,
                exponent: 4.0,
            },
            n_max,
        }
    }

    pub fn new(l: PowerLaw, r: PowerLaw, n_max: u32) -> Result<Self> {
        let s = SummationSchedule { l, r, n_max };
        s.validate()?;
        Ok(s)
    }

    pub fn l_n(&self, n: u32) -> f64 {
        self.l.at(n)
    }

    pub fn r_n(&self, n: u32) -> f64 {
        self.r.at(n)
    }

    /// Checks the growth conditions: `l_n, R_n -> oo`, `l_n^2/n -> 0`,
    /// `n/R_n -> 0` and `e^{-pi l_n/2} R_n -> 0`.
    ///
    /// The limits are decided from the power-law exponents; monotonicity of
    /// `l_n`, `R_n`, `l_n^2/n` and `n/R_n` is also checked on `1..=n_max`.
    /// `e^{-pi l_n/2} R_n` is not monotone at small `n` for the default rule
    /// (it peaks near `n = 10^4`), so only its limit is required.
    pub fn validate(&self) -> Result<()> {
        let (l, r) = (self.l, self.r);
        if self.n_max == 0 {
            return Err(Error::Schedule("n_max must be at least 1".into()));
        }
        if !(l.coef > 0.0 && r.coef > 0.0) {
            return Err(Error::Schedule(
                "schedule coefficients must be positive".into(),
            ));
        }
        if !(l.exponent > 0.0 && r.exponent > 0.0) {
            return Err(Error::Schedule(
                "l_n and R_n must grow without bound".into(),
            ));
        }
        if 2.0 * l.exponent >= 1.0 {
            return Err(Error::Schedule(format!(
                "l_n^2 / n must vanish: l exponent {} must be below 1/2",
                l.exponent
            )));
        }
        if r.exponent <= 1.0 {
            return Err(Error::Schedule(format!(
                "n / R_n must vanish: R exponent {} must exceed 1",
                r.exponent
            )));
        }
        for n in 1..self.n_max {
            let (a, b) = (n, n + 1);
            let ok = self.l_n(b) > self.l_n(a)
                && self.r_n(b) > self.r_n(a)
                && self.l_n(b).powi(2) / (b as f64) < self.l_n(a).powi(2) / (a as f64)
                && (b as f64) / self.r_n(b) < (a as f64) / self.r_n(a);
            if !ok {
                return Err(Error::Schedule(format!(
                    "growth conditions fail between n = {a} and {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn check_order(&self, n: u32) -> Result<()> {
        if n == 0 || n > self.n_max {
            return Err(Error::Schedule(format!(
                "summation order {n} outside 1..={}",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// `W_n(z)` on the closed upper half-plane, principal logarithm.
pub fn weight_fn(n: u32, z: Complex64, schedule: &SummationSchedule) -> Result<Complex64> {
    let nf = n as f64;
    if z.im < 0.0 {
        return Err(Error::Domain(format!(
            "W_n is defined on the upper half-plane, got {z}"
        )));
    }
    if (z - nf).norm() == 0.0 || (z + nf).norm() == 0.0 {
        return Err(Error::Domain(format!("W_{n} is singular at z = {z}")));
    }
    let l = schedule.l_n(n);
    let q = (z - nf) / (z + nf);
    Ok((-Complex64::new(0.0, l) * q.ln() - l * PI).exp())
}

/// `w_n(lambda)`: zero beyond `R_n`, one for exceptional zeros (`Im lambda <= 0`), `W_n(lambda)` otherwise.
pub fn weight_for_eigenvalue(
    n: u32,
    record: &EigenRecord,
    schedule: &SummationSchedule,
) -> Complex64 {
    if record.lambda.norm() >= schedule.r_n(n) {
        return Complex64::new(0.0, 0.0);
    }
    if record.is_exceptional() {
        return Complex64::new(1.0, 0.0);
    }
    // Im lambda > 0 and lambda != +-n here, so the weight is defined.
    weight_fn(n, record.lambda, schedule).unwrap_or(Complex64::new(0.0, 0.0))
}

#[derive(Debug, Clone)]
pub struct WeightTable {
    pub n: u32,
    pub entries: Vec<(EigenRecord, Complex64)>,
}

impl WeightTable {
    pub fn build(n: u32, spectrum: &SpectrumSet, schedule: &SummationSchedule) -> Self {
        WeightTable {
            n,
            entries: spectrum
                .records()
                .iter()
                .map(|r| (*r, weight_for_eigenvalue(n, r, schedule)))
                .collect(),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|(_, w)| w.norm() != 0.0).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "n,branch,re_lambda,im_lambda,re_w,im_w")?;
        }
        for (r, wt) in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.n,
                r.branch,
                num(r.lambda.re),
                num(r.lambda.im),
                num(wt.re),
                num(wt.im)
            )?;
        }
        Ok(())
    }
}

/// One summand `w_n(lambda) <x, x_lambda> e_lambda` of the regularized sum.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionTerm {
    pub record: EigenRecord,
    pub weight: Complex64,
    pub coefficient: Complex64,
}

/// Nonzero terms of `S_n x`, in ascending `|lambda|`.
pub fn weighted_terms(
    x: &MState,
    n: u32,
    spectrum: &SpectrumSet,
    schedule: &SummationSchedule,
) -> Result<Vec<ExpansionTerm>> {
    schedule.check_order(n)?;
    let radius = schedule.r_n(n);
    if !spectrum.covers_radius(radius) {
        return Err(Error::SpectrumTooShort { n, radius });
    }
    spectrum
        .within_radius(radius)
        .par_iter()
        .map(|r| {
            Ok(ExpansionTerm {
                record: *r,
                weight: weight_for_eigenvalue(n, r, schedule),
                coefficient: expansion_coefficient(x, r, spectrum.kernel())?,
            })
        })
        .collect()
}

/// `S_n x = sum_lambda w_n(lambda) <x, x_lambda> e_lambda` on the grid of `x`.
pub fn partial_sum(
    x: &MState,
    n: u32,
    spectrum: &SpectrumSet,
    schedule: &SummationSchedule,
) -> Result<MState> {
    let terms = weighted_terms(x, n, spectrum, schedule)?;
    let mut out = MState::zero(x.panels())?;
    for t in &terms {
        let e = MState::eigenvector(t.record.lambda, x.panels())?;
        out = out.axpy(t.weight * t.coefficient, &e)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DelayKernel;
    use crate::spectral::find_roots;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weight_on_imaginary_axis() {
        let s = SummationSchedule::default_rule(10);
        for n in 1..=10u32 {
            let w = weight_fn(n, c(0.0, n as f64), &s).unwrap();
            let want = (-PI * s.l_n(n) / 2.0).exp();
            assert!((w - want).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn singular_points_are_domain_errors() {
        let s = SummationSchedule::default_rule(4);
        assert!(matches!(
            weight_fn(3, c(3.0, 0.0), &s),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            weight_fn(3, c(-3.0, 0.0), &s),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            weight_fn(3, c(1.0, -1.0), &s),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn weight_tends_to_one_on_fixed_point() {
        let s = SummationSchedule::default_rule(10_000);
        let z = c(4.375, 1.534);
        let d: Vec<f64> = [100u32, 1000, 10_000]
            .iter()
            .map(|&n| (weight_fn(n, z, &s).unwrap() - 1.0).norm())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn eigenvalue_weights() {
        let s = SummationSchedule::default_rule(10);
        let spec = find_roots(&DelayKernel::Zero, -1..=1).unwrap();
        let l0 = spec.branch(0).unwrap();
        assert_eq!(weight_for_eigenvalue(2, l0, &s), c(1.0, 0.0));
        let l1 = spec.branch(1).unwrap();
        // |lambda_1| ~ 4.64 >= R_1 = 1
        assert_eq!(weight_for_eigenvalue(1, l1, &s), c(0.0, 0.0));
        let w = weight_for_eigenvalue(10, l1, &s);
        assert_eq!(w, weight_fn(10, l1.lambda, &s).unwrap());
        assert!(w.norm() <= 1.0);
    }

    #[test]
    fn default_schedule_is_valid_and_bad_ones_are_not() {
        SummationSchedule::default_rule(50).validate().unwrap();
        let bad_l = PowerLaw {
            coef: 1.0,
            exponent: 0.6,
        };
        let r = PowerLaw {
            coef: 1.0,
            exponent: 4.0,
        };
        assert!(SummationSchedule::new(bad_l, r, 10).is_err());
        let l = PowerLaw {
            coef: 1.0,
            exponent: 0.25,
        };
        let bad_r = PowerLaw {
            coef: 5.0,
            exponent: 1.0,
        };
        assert!(SummationSchedule::new(l, bad_r, 10).is_err());
    }

    #[test]
    fn product_condition_vanishes_eventually() {
        // e^{-pi l_n / 2} R_n -> 0: decreasing once n is large
        let s = SummationSchedule::default_rule(u32::MAX);
        let f = |n: u32| (-PI * s.l_n(n) / 2.0).exp() * s.r_n(n);
        let samples: Vec<f64> = [100_000u32, 1_000_000, 10_000_000, 100_000_000]
            .iter()
            .map(|&n| f(n))
            .collect();
        assert!(samples.windows(2).all(|w| w[1] < w[0]), "{samples:?}");
    }

    #[test]
    fn short_spectrum_is_rejected() {
        let s = SummationSchedule::default_rule(10);
        let spec = find_roots(&DelayKernel::Zero, -2..=2).unwrap();
        let x = MState::eigenvector(spec.branch(0).unwrap().lambda, 64).unwrap();
        let err = partial_sum(&x, 4, &spec, &s).unwrap_err();
        assert!(matches!(err, Error::SpectrumTooShort { n: 4, .. }));
    }

    proptest! {
        #[test]
        fn weights_bounded_and_conjugate_symmetric(
            re in -40.0f64..40.0,
            im in 1e-3f64..40.0,
            n in 1u32..8,
        ) {
            let s = SummationSchedule::default_rule(8);
            let z = c(re, im);
            let w = weight_fn(n, z, &s).unwrap();
            prop_assert!(w.norm() <= 1.0);
            let wr = weight_fn(n, -z.conj(), &s).unwrap();
            prop_assert!((wr - w.conj()).norm() <= 1e-14 * w.norm().max(1e-300) + 1e-300);
        }
    }
}
