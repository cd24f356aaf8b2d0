//! Discretized least-norm null control, used as an independent optimality check.
//!
//! The terminal map `L` sends control node values to the terminal state (`x`
//! at every simulation node in `[T - 1, T]`). Because the scheme is
//! time-invariant with zero history, the response to an impulse at node `j >= 1`
//! is a shift of the response at node 1, so two simulations build all columns.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::control::{aligned_steps, ControlSignal};
use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::quad::trapezoid_weights;
use crate::sim::simulate;
use crate::state::MState;

/// Relative pivot size below which a column of the terminal map counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Largest even `m` with `m T` an integer and `m T + 1 <= n_points`.
pub fn aligned_steps_per_unit(t: f64, n_points: usize) -> Result<usize> {
    let mut m = ((n_points.saturating_sub(1)) as f64 / t).floor() as usize;
    while m >= 2 {
        if m.is_multiple_of(2) && aligned_steps(t, m).is_ok() {
            return Ok(m);
        }
        m -= 1;
    }
    Err(Error::Grid(format!(
        "no delay-aligned grid with at most {n_points} points on [0, {t}]"
    )))
}

/// The discretized terminal problem on a fixed grid.
///
/// Unknowns are the control values at the nodes `0 .. T`, plus a separate right
/// limit at the node `T - 1`: solutions of the adjoint problem jump there, and a
/// continuous representation would smear the jump over one step.
#[derive(Debug, Clone)]
pub struct TerminalProblem {
    pub steps_per_unit: usize,
    pub t: f64,
    /// Node carrying two one-sided unknowns; its right limit is the last column.
    pub split: usize,
    /// Rows: terminal nodes `T - 1 .. T`; columns: control unknowns.
    pub map: DMatrix<f64>,
    /// Quadrature weights of the unknowns.
    pub weights: Vec<f64>,
}

impl TerminalProblem {
    /// Builds `L` for a real kernel.
    pub fn new(kernel: &DelayKernel, t: f64, steps_per_unit: usize) -> Result<Self> {
        if !kernel.is_real() {
            return Err(Error::Unsupported("the oracle needs a real kernel".into()));
        }
        if t <= 1.0 {
            return Err(Error::Domain(format!("the oracle needs T > 1, got {t}")));
        }
        let m = steps_per_unit;
        let k = aligned_steps(t, m)?;
        let zero = MState::zero(m)?;
        let impulse = |j: usize, left: bool, right: bool| -> Result<Vec<f64>> {
            let z = Complex64::new(0.0, 0.0);
            let mut l = vec![z; k + 1];
            let mut r = vec![z; k + 1];
            if left {
                l[j] = Complex64::new(1.0, 0.0);
            }
            if right {
                r[j] = Complex64::new(1.0, 0.0);
            }
            let u = ControlSignal::from_limits(t, m, l, r)?;
            let tr = simulate(&zero, Some(&u), kernel, t, m)?;
            Ok(tr
                .samples()
                .filter(|(ti, _)| *ti >= 0.0)
                .map(|(_, v)| v.re)
                .collect())
        };
        let first = impulse(0, true, true)?;
        let from_left = impulse(1, true, false)?;
        let from_right = impulse(1, false, true)?;
        let split = k - m;
        let rows = m + 1;
        // response at time node `node` to a one-sided impulse at node `j >= 1`
        let shifted = |resp: &[f64], node: usize, j: usize| {
            if node + 1 >= j {
                resp[node + 1 - j]
            } else {
                0.0
            }
        };
        let map = DMatrix::from_fn(rows, k + 2, |r, j| {
            let node = split + r;
            if j == 0 {
                first[node]
            } else if j == k + 1 {
                shifted(&from_right, node, split)
            } else if j == split {
                shifted(&from_left, node, j)
            } else {
                shifted(&from_left, node, j) + shifted(&from_right, node, j)
            }
        });
        let h = 1.0 / m as f64;
        let mut weights: Vec<f64> = trapezoid_weights(k).into_iter().map(|w| w * h).collect();
        weights[split] = 0.5 * h;
        weights.push(0.5 * h);
        Ok(TerminalProblem {
            steps_per_unit: m,
            t,
            split,
            map,
            weights,
        })
    }

    /// Terminal vector of the free motion from `x0`.
    pub fn free_response(&self, x0: &MState, kernel: &DelayKernel) -> Result<DVector<Complex64>> {
        let m = self.steps_per_unit;
        let tr = simulate(x0, None, kernel, self.t, m)?;
        let k = aligned_steps(self.t, m)?;
        let tail: Vec<Complex64> = tr.samples().skip(k).map(|(_, v)| v).collect();
        Ok(DVector::from_vec(tail))
    }

    /// The minimum weighted-norm unknowns with `L u = rhs` (real and imaginary parts solved separately).
    pub fn min_norm(&self, rhs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let sq: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut scaled = self.map.clone();
        for (j, s) in sq.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / s);
        }
        let re = DVector::from_iterator(rhs.len(), rhs.iter().map(|v| v.re));
        let im = DVector::from_iterator(rhs.len(), rhs.iter().map(|v| v.im));
        let (vr, vi) = min_norm_pair(scaled.transpose(), &re, &im)?;
        Ok(DVector::from_fn(sq.len(), |j, _| {
            Complex64::new(vr[j], vi[j]) / sq[j]
        }))
    }

    /// The control described by a vector of unknowns.
    pub fn control(&self, u: &DVector<Complex64>) -> Result<ControlSignal> {
        let n = u.len() - 1;
        let left: Vec<Complex64> = u.iter().take(n).copied().collect();
        let mut right = left.clone();
        right[self.split] = u[n];
        ControlSignal::from_limits(self.t, self.steps_per_unit, left, right)
    }
}

fn min_norm_pair(
    at: DMatrix<f64>,
    re: &DVector<f64>,
    im: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    // A^T P = Q R  =>  P^T A = R^T Q^T, and the least-norm solution of A v = b
    // is v = Q y with R^T y = P^T b.
    let rows = at.ncols();
    let qr = at.col_piv_qr();
    let r = qr.r();
    let pivot = r[(0, 0)].abs();
    let rank = (0..rows)
        .filter(|&i| r[(i, i)].abs() > RANK_TOL * pivot)
        .count();
    if rank < rows {
        return Err(Error::RankDeficient {
            rank,
            expected: rows,
        });
    }
    let q = qr.q();
    let p = qr.p();
    let rt = r.transpose();
    let solve = |b: &DVector<f64>| -> Result<DVector<f64>> {
        let mut pb = b.clone();
        p.permute_rows(&mut pb);
        let y = rt.solve_lower_triangular(&pb).ok_or(Error::RankDeficient {
            rank,
            expected: rows,
        })?;
        Ok(&q * y)
    };
    Ok((solve(re)?, solve(im)?))
}

/// Least-norm null control from `x0` on about `n_points` nodes over `[0, T]`.
pub fn least_norm_control(
    x0: &MState,
    kernel: &DelayKernel,
    t: f64,
    n_points: usize,
) -> Result<ControlSignal> {
    let m = aligned_steps_per_unit(t, n_points)?;
    let problem = TerminalProblem::new(kernel, t, m)?;
    least_norm_control_on(&problem, x0, kernel)
}

/// As [`least_norm_control`] on a prebuilt terminal problem.
pub fn least_norm_control_on(
    problem: &TerminalProblem,
    x0: &MState,
    kernel: &DelayKernel,
) -> Result<ControlSignal> {
    let b = problem.free_response(x0, kernel)?;
    let u = problem.min_norm(&(-b))?;
    problem.control(&u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub n: u32,
    pub norm_spectral: f64,
    pub norm_oracle: f64,
    pub gap_l2: f64,
}

/// Compares spectral controls (one per summation order) against the oracle on the same grid.
pub fn norm_gap_report(
    oracle: &ControlSignal,
    spectral: &[(u32, ControlSignal)],
) -> Result<Vec<GapRow>> {
    let norm_oracle = oracle.l2_norm();
    spectral
        .iter()
        .map(|(n, u)| {
            let u = if u.steps_per_unit() == oracle.steps_per_unit() {
                u.clone()
            } else {
                u.resample(oracle.steps_per_unit())?
            };
            Ok(GapRow {
                n: *n,
                norm_spectral: u.l2_norm(),
                norm_oracle,
                gap_l2: u.l2_distance(oracle)?,
            })
        })
        .collect()
}

pub fn write_gap_csv<W: Write>(rows: &[GapRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,norm_spectral,norm_oracle,gap_l2")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.n,
            num(r.norm_spectral),
            num(r.norm_oracle),
            num(r.gap_l2)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_grid_for_default_oracle() {
        assert_eq!(aligned_steps_per_unit(1.5, 2000).unwrap(), 1332);
        assert_eq!(aligned_steps_per_unit(1.5, 4000).unwrap(), 2666);
    }

    #[test]
    fn columns_match_direct_impulse_runs() {
        let p = TerminalProblem::new(&DelayKernel::Zero, 1.5, 16).unwrap();
        let k = 24;
        let zero = MState::zero(16).unwrap();
        let z = Complex64::new(0.0, 0.0);
        // (column, node, left, right)
        let cases = [
            (0usize, 0usize, true, true),
            (1, 1, true, true),
            (7, 7, true, true),
            (8, 8, true, false),
            (25, 8, false, true),
            (23, 23, true, true),
            (24, 24, true, true),
        ];
        for (j, node, l, r) in cases {
            let mut a = vec![z; k + 1];
            let mut b = vec![z; k + 1];
            if l {
                a[node] = Complex64::new(1.0, 0.0);
            }
            if r {
                b[node] = Complex64::new(1.0, 0.0);
            }
            let u = ControlSignal::from_limits(1.5, 16, a, b).unwrap();
            let tr = simulate(&zero, Some(&u), &DelayKernel::Zero, 1.5, 16).unwrap();
            let col: Vec<f64> = tr.samples().skip(16 + 8).map(|(_, v)| v.re).collect();
            for (r, v) in col.iter().enumerate() {
                assert!((p.map[(r, j)] - v).abs() < 1e-15, "column {j} row {r}");
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_control() {
        let u =
            least_norm_control(&MState::zero(96).unwrap(), &DelayKernel::Zero, 1.5, 145).unwrap();
        assert_eq!(u.l2_norm(), 0.0);
    }
}
