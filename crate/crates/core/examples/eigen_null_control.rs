//! The control that steers the eigenvector `e_lambda` to rest at `T = 1.5`,
//! checked by direct simulation.

use delay_nullctl::control::{solve_p_lambda, u_for_eigenvector, validate_convention, Horizon};
use delay_nullctl::sim::{simulate, terminal_segment_norm};
use delay_nullctl::{find_roots, DelayKernel, MState};

fn main() -> delay_nullctl::Result<()> {
    let kernel = DelayKernel::Zero;
    let horizon = Horizon::new(1.5)?;
    let grid = 2048;
    let spec = find_roots(&kernel, -3..=3)?;

    for r in spec.records() {
        let bc = solve_p_lambda(r, &kernel, horizon)?;
        let u = u_for_eigenvector(r, &kernel, horizon, grid)?;
        let x0 = MState::eigenvector(r.lambda, grid)?;
        let free = terminal_segment_norm(&simulate(&x0, None, &kernel, 1.5, grid)?, 1.5)?;
        let ctl = terminal_segment_norm(&simulate(&x0, Some(&u), &kernel, 1.5, grid)?, 1.5)?;
        println!(
            "branch {:>2}: B = {:.5}, |u| = {:.5}, terminal ratio {:.2e}",
            r.branch,
            bc.cosh_coef,
            u.l2_norm(),
            ctl / free
        );
    }

    let report = validate_convention(spec.branch(1).unwrap(), &kernel, horizon, grid)?;
    println!(
        "convention {}: conjugate {:.2e}, plain {:.2e}",
        report.chosen.name(),
        report.residual_conjugate,
        report.residual_plain
    );
    Ok(())
}
