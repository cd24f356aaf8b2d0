//! Method-of-steps simulator for
//! `x'(t) = x(t - 1) + int_{-1}^0 phi(tau) x(t + tau) dtau + u(t)`.
//!
//! The trapezoid rule steps on a grid that divides the unit delay, so the
//! delayed term is always an exact history lookup. The kernel integral uses
//! trapezoid weights on the same grid; its `phi(0) x(t)` node makes each step a
//! scalar linear solve.

use std::io::Write;

use log::warn;
use num_complex::Complex64;

use crate::control::{aligned_steps, ControlSignal};
use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::quad::resample_linear;
use crate::state::{m_norm, MState};

/// Default steps per unit time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 2048;

/// Samples of `x` on `[-1, t_end]` at spacing `1/steps_per_unit`.
///
/// `x` may jump at `t = 0` (the head need not match the history); the history
/// side of the jump is kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps_per_unit: usize,
    t_end: f64,
    // node t = (i - m) h for i = 0..=m+N; values[m] is the head
    values: Vec<Complex64>,
    history_end: Complex64,
}

impl Trajectory {
    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn step(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    /// `(t, x(t))` for every node in `[-1, t_end]`; at `t = 0` the head value.
    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        let m = self.steps_per_unit as isize;
        let h = self.step();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i as isize - m) as f64 * h, *v))
    }

    fn index_of(&self, t: f64) -> Result<isize> {
        let m = self.steps_per_unit as isize;
        let x = t * self.steps_per_unit as f64;
        let k = x.round();
        if (x - k).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(Error::Grid(format!("t = {t} is not a grid node")));
        }
        let i = k as isize + m;
        if i < 0 || i as usize >= self.values.len() {
            return Err(Error::Domain(format!(
                "t = {t} outside the simulated range [-1, {}]",
                self.t_end
            )));
        }
        Ok(i)
    }

    /// `x(t)` at a grid node (the head value at `t = 0`).
    pub fn value(&self, t: f64) -> Result<Complex64> {
        Ok(self.values[self.index_of(t)? as usize])
    }

    /// The state `(x(t), x(t + tau))` at a grid time `t >= 0`.
    ///
    /// If the history jump at `0` falls strictly inside the segment, its node
    /// stores the mean of the two sides.
    pub fn segment(&self, t: f64) -> Result<MState> {
        if t < 0.0 {
            return Err(Error::Domain(format!("segment time {t} is negative")));
        }
        let end = self.index_of(t)? as usize;
        let m = self.steps_per_unit;
        let start = end - m;
        let head = self.values[end];
        let tail = (start..=end)
            .map(|i| {
                if i != m {
                    self.values[i]
                } else if i == end {
                    self.history_end
                } else if i == start {
                    self.values[m]
                } else {
                    0.5 * (self.values[m] + self.history_end)
                }
            })
            .collect();
        MState::new(head, tail)
    }

    /// Rows `t,re_x,im_x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re_x,im_x")?;
        for (t, v) in self.samples() {
            writeln!(w, "{},{},{}", num(t), num(v.re), num(v.im))?;
        }
        Ok(())
    }
}

/// Integrates from `x0` over `[0, t_end]` with optional control `u` (zero beyond its horizon).
pub fn simulate(
    x0: &MState,
    u: Option<&ControlSignal>,
    kernel: &DelayKernel,
    t_end: f64,
    steps_per_unit: usize,
) -> Result<Trajectory> {
    if t_end < 0.0 {
        return Err(Error::Domain(format!(
            "negative simulation horizon {t_end}"
        )));
    }
    let m = steps_per_unit;
    let n = aligned_steps(t_end, m)?;
    let h = 1.0 / m as f64;

    let tail = if x0.panels() == m {
        x0.tail().to_vec()
    } else {
        warn!(
            "resampling initial history from {} to {m} panels",
            x0.panels()
        );
        resample_linear(x0.tail(), m)
    };
    let resampled;
    let u = match u {
        Some(c) if c.steps_per_unit() != m => {
            warn!(
                "resampling control from step 1/{} to 1/{m}",
                c.steps_per_unit()
            );
            resampled = c.resample(m)?;
            Some(&resampled)
        }
        other => other,
    };
    let zero = Complex64::new(0.0, 0.0);
    let u_right = |k: usize| u.and_then(|c| c.right().get(k).copied()).unwrap_or(zero);
    let u_left = |k: usize| u.and_then(|c| c.left().get(k).copied()).unwrap_or(zero);

    let mut values = Vec::with_capacity(m + n + 1);
    values.extend_from_slice(&tail[..m]);
    values.push(x0.head);
    let history_end = tail[m];
    let head = x0.head;

    // phi at tau_j = -1 + j h, premultiplied by trapezoid weights and h
    let phi: Option<Vec<Complex64>> = if kernel.is_zero() {
        None
    } else {
        let s = kernel.samples_on(m);
        Some(
            s.iter()
                .enumerate()
                .map(|(j, p)| p * h * if j == 0 || j == m { 0.5 } else { 1.0 })
                .collect(),
        )
    };

    // x at grid index i (time (i - m) h); `right` picks the side of the jump at 0
    let hist = |values: &[Complex64], i: usize, right: bool| -> Complex64 {
        if i == m {
            if right {
                head
            } else {
                history_end
            }
        } else {
            values[i]
        }
    };
    // kernel integral at step k excluding the phi(0) x(t_k) node
    let distributed = |values: &[Complex64], k: usize, wphi: &[Complex64]| -> Complex64 {
        let mut acc = zero;
        for (j, w) in wphi.iter().enumerate().take(m) {
            let i = k + j;
            let x = if i == m {
                if j == 0 {
                    head
                } else {
                    0.5 * (head + history_end)
                }
            } else {
                values[i]
            };
            acc += w * x;
        }
        acc
    };

    for k in 0..n {
        let xk = values[m + k];
        let mut f_k = hist(&values, k, true) + u_right(k);
        let mut rhs_next = hist(&values, k + 1, false) + u_left(k + 1);
        let mut denom = Complex64::new(1.0, 0.0);
        if let Some(w) = &phi {
            f_k += distributed(&values, k, w) + w[m] * xk;
            rhs_next += distributed(&values, k + 1, w);
            denom -= 0.5 * h * w[m];
        }
        let x_next = (xk + 0.5 * h * (f_k + rhs_next)) / denom;
        values.push(x_next);
    }

    Ok(Trajectory {
        steps_per_unit: m,
        t_end,
        values,
        history_end,
    })
}

/// `S_t x0`: the state of the free motion at time `t`.
pub fn semigroup_apply(
    x0: &MState,
    t: f64,
    kernel: &DelayKernel,
    steps_per_unit: usize,
) -> Result<MState> {
    simulate(x0, None, kernel, t, steps_per_unit)?.segment(t)
}

/// M-norm of the terminal state `(x(T), x on (T - 1, T))`.
pub fn terminal_segment_norm(traj: &Trajectory, t: f64) -> Result<f64> {
    if t > traj.t_end + 1e-12 {
        return Err(Error::Domain(format!(
            "trajectory ends at {} before T = {t}",
            traj.t_end
        )));
    }
    Ok(m_norm(&traj.segment(t)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hand_solved_free_response() {
        let x0 = MState::from_fn(c(1.0), 64, |_| c(1.0)).unwrap();
        let tr = simulate(&x0, None, &DelayKernel::Zero, 2.0, 64).unwrap();
        assert!((tr.value(1.0).unwrap() - 2.0).norm() < 1e-13);
        assert!((tr.value(1.5).unwrap() - 2.625).norm() < 1e-13);
        assert!((tr.value(2.0).unwrap() - 3.5).norm() < 1e-13);
    }

    #[test]
    fn head_jump_uses_history_side_at_one() {
        // xi = 1, history 0: x = 1 on [0, 1], then x' = 1 on (1, 2)
        let x0 = MState::from_fn(c(1.0), 16, |_| c(0.0)).unwrap();
        let tr = simulate(&x0, None, &DelayKernel::Zero, 1.5, 16).unwrap();
        assert!((tr.value(1.0).unwrap() - 1.0).norm() < 1e-14);
        assert!((tr.value(1.5).unwrap() - 1.5).norm() < 1e-14);
    }

    #[test]
    fn segment_at_zero_is_initial_state() {
        let x0 = MState::from_fn(c(2.0), 32, |t| c(t * t)).unwrap();
        let s = semigroup_apply(&x0, 0.0, &DelayKernel::Zero, 32).unwrap();
        assert_eq!(s, x0);
    }

    #[test]
    fn misaligned_horizon_is_rejected() {
        let x0 = MState::zero(8).unwrap();
        assert!(matches!(
            simulate(&x0, None, &DelayKernel::Zero, 0.3, 8),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn constant_kernel_matches_exponential_on_first_step() {
        // phi = 1, history 0, head 1: on [0, 1], x' = int_0^t x, x(0) = 1, x'(0) = 0 => cosh t
        let k = DelayKernel::from_fn(256, |_| c(1.0)).unwrap();
        let x0 = MState::from_fn(c(1.0), 256, |_| c(0.0)).unwrap();
        let tr = simulate(&x0, None, &k, 1.0, 256).unwrap();
        let err = (tr.value(1.0).unwrap() - 1f64.cosh()).norm();
        assert!(err < 1e-5, "{err}");
    }
}
