//! A distributed delay `phi(tau) = 0.5 cos(pi tau)`: spectrum, biorthogonality
//! and the free response from the simulator.

use delay_nullctl::sim::simulate;
use delay_nullctl::state::expansion_coefficient;
use delay_nullctl::{find_roots, DelayKernel, MState};
use num_complex::Complex64;

fn main() -> delay_nullctl::Result<()> {
    let kernel = DelayKernel::from_fn(512, |t| {
        Complex64::new(0.5 * (std::f64::consts::PI * t).cos(), 0.0)
    })?;
    let spec = find_roots(&kernel, -4..=4)?;
    for r in spec.records() {
        let e = MState::eigenvector(r.lambda, 512)?;
        let c = expansion_coefficient(&e, r, &kernel)?;
        println!(
            "branch {:>2}: lambda = {:.10}  <e, x_lambda> = {:.8}",
            r.branch, r.lambda, c
        );
    }

    // the eigenvector evolves as e^{i lambda t}
    let r = spec.branch(1).unwrap();
    let tr = simulate(
        &MState::eigenvector(r.lambda, 512)?,
        None,
        &kernel,
        1.0,
        512,
    )?;
    let dev = (tr.value(1.0)? - (Complex64::i() * r.lambda).exp()).norm();
    println!("|x(1) - e^(i lambda)| = {dev:.2e}");
    Ok(())
}
