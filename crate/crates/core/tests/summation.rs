mod common;

use std::f64::consts::PI;

use common::c;
use delay_nullctl::spectral::branches_for_radius;
use delay_nullctl::state::expansion_coefficient;
use delay_nullctl::summation::{partial_sum, weight_fn, weight_for_eigenvalue, WeightTable};
use delay_nullctl::{find_roots, m_norm, DelayKernel, MState, SummationSchedule};
use num_complex::Complex64;

#[test]
fn weights_bounded_on_upper_grid() {
    let s = SummationSchedule::default_rule(6);
    for n in 1..=6u32 {
        for i in 0..40 {
            for j in 0..40 {
                let z = c(
                    -60.0 + 120.0 * (i as f64 + 0.5) / 40.0,
                    60.0 * (j as f64 + 0.5) / 40.0,
                );
                assert!(weight_fn(n, z, &s).unwrap().norm() <= 1.0);
            }
        }
    }
}

#[test]
fn circle_bound() {
    let s = SummationSchedule::default_rule(4);
    for n in 2..=4u32 {
        let r = s.r_n(n);
        let bound = (-PI * s.l_n(n) / 2.0).exp();
        for k in 0..64 {
            let theta = PI * (k as f64 + 0.5) / 64.0;
            let z = Complex64::from_polar(r, theta);
            assert!(
                weight_fn(n, z, &s).unwrap().norm() < bound,
                "n {n} theta {theta}"
            );
        }
    }
}

#[test]
fn pointwise_convergence_to_one() {
    let big = SummationSchedule::default_rule(100_000);
    let spec = find_roots(&DelayKernel::Zero, -3..=3).unwrap();
    for r in spec.records().iter().filter(|r| !r.is_exceptional()) {
        let d: Vec<f64> = [1_000u32, 10_000, 100_000]
            .iter()
            .map(|&n| (weight_for_eigenvalue(n, r, &big) - 1.0).norm())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "branch {}: {d:?}", r.branch);
    }
}

#[test]
fn truncation_counts_match_radius() {
    let s = SummationSchedule::default_rule(5);
    let b = branches_for_radius(s.r_n(5));
    let spec = find_roots(&DelayKernel::Zero, -b..=b).unwrap();
    for n in 1..=5 {
        let t = WeightTable::build(n, &spec, &s);
        let inside = spec
            .records()
            .iter()
            .filter(|r| r.lambda.norm() < s.r_n(n))
            .count();
        assert_eq!(t.nonzero_count(), inside);
        assert!(t.entries.iter().all(|(_, w)| w.norm() <= 1.0));
    }
}

#[test]
fn eigen_collapse_and_zero() {
    let s = SummationSchedule::default_rule(4);
    let b = branches_for_radius(s.r_n(4));
    let spec = find_roots(&DelayKernel::Zero, -b..=b).unwrap();
    let panels = 4096;
    for n in [2u32, 4] {
        for mb in [0i64, 1, -2] {
            let mu = spec.branch(mb).unwrap();
            let e = MState::eigenvector(mu.lambda, panels).unwrap();
            let w = weight_for_eigenvalue(n, mu, &s);
            let sx = partial_sum(&e, n, &spec, &s).unwrap();
            assert!(m_norm(&sx.axpy(-w, &e).unwrap()) < 1e-8, "n {n} mu {mb}");
            // coefficients of S_n e_mu are w_n(mu) delta
            for lam in spec.smallest(7) {
                let coef = expansion_coefficient(&sx, &lam, &DelayKernel::Zero).unwrap();
                let want = if lam.branch == mb {
                    w
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((coef - want).norm() < 1e-8);
            }
        }
        let z = MState::zero(panels).unwrap();
        assert_eq!(m_norm(&partial_sum(&z, n, &spec, &s).unwrap()), 0.0);
    }
}

#[test]
fn real_data_gives_real_partial_sums() {
    let s = SummationSchedule::default_rule(3);
    let b = branches_for_radius(s.r_n(3));
    let spec = find_roots(&DelayKernel::Zero, -b..=b).unwrap();
    let x = MState::from_fn(c(0.7, 0.0), 512, |t| c((2.0 * t).cos(), 0.0)).unwrap();
    let sx = partial_sum(&x, 3, &spec, &s).unwrap();
    let im = sx.head.im.abs() + sx.tail().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(im < 1e-12, "{im}");
}

#[test]
fn schedule_growth_conditions() {
    let s = SummationSchedule::default_rule(40);
    s.validate().unwrap();
    for n in 1..40u32 {
        let m = n + 1;
        assert!(s.l_n(m) > s.l_n(n) && s.r_n(m) > s.r_n(n));
        assert!(s.l_n(m).powi(2) / m as f64 <= s.l_n(n).powi(2) / n as f64);
        assert!(m as f64 / s.r_n(m) < n as f64 / s.r_n(n));
    }
    // e^{-pi l_n / 2} R_n rises until n ~ 1.07e4 under the default rule and only then decays
    let p = |n: f64| (-PI * n.powf(0.25) / 2.0).exp() * n.powi(4);
    assert!(p(5.0) > p(4.0));
    assert!(p(20_000.0) < p(11_000.0) && p(40_000.0) < p(20_000.0));
}
