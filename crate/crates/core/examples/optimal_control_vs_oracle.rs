//! Spectral controls against the discretized least-norm control.
//!
//! Builds a dense 1333 x 1999 terminal map; takes a few seconds in release mode.

use delay_nullctl::control::{synthesize_control, u_for_eigenvector, Horizon};
use delay_nullctl::oracle::{
    aligned_steps_per_unit, least_norm_control_on, norm_gap_report, TerminalProblem,
};
use delay_nullctl::spectral::branches_for_radius;
use delay_nullctl::{find_roots, DelayKernel, MState, SummationSchedule};
use num_complex::Complex64;

fn main() -> delay_nullctl::Result<()> {
    let kernel = DelayKernel::Zero;
    let horizon = Horizon::new(1.5)?;
    let m = aligned_steps_per_unit(1.5, 2000)?;
    let problem = TerminalProblem::new(&kernel, 1.5, m)?;

    let spec = find_roots(&kernel, -1..=1)?;
    let l1 = spec.branch(1).unwrap();
    let u1 = u_for_eigenvector(l1, &kernel, horizon, m)?;
    let o1 = least_norm_control_on(&problem, &MState::eigenvector(l1.lambda, m)?, &kernel)?;
    println!(
        "e_lambda1: |u| = {:.5}, oracle {:.5}",
        u1.l2_norm(),
        o1.l2_norm()
    );

    let schedule = SummationSchedule::default_rule(6);
    let b = branches_for_radius(schedule.r_n(6));
    let spec = find_roots(&kernel, -b..=b)?;
    let one = Complex64::new(1.0, 0.0);
    let oracle = least_norm_control_on(&problem, &MState::from_fn(one, m, |_| one)?, &kernel)?;
    let x = MState::from_fn(one, 512, |_| one)?;
    let mut spectral = Vec::new();
    for n in [2u32, 4, 6] {
        spectral.push((
            n,
            synthesize_control(&x, n, &spec, &schedule, horizon, m)?.control,
        ));
    }
    for row in norm_gap_report(&oracle, &spectral)? {
        println!(
            "n = {}: |u_n| = {:.5}, |u_oracle| = {:.5}, gap {:.5} ({:.2}%)",
            row.n,
            row.norm_spectral,
            row.norm_oracle,
            row.gap_l2,
            100.0 * row.gap_l2 / row.norm_oracle
        );
    }
    Ok(())
}
