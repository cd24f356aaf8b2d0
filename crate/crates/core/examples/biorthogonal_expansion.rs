//! Expansion coefficients against the biorthogonal system, and the Gram check
//! `<e_mu, x_lambda> = delta`.

use delay_nullctl::state::expansion_coefficient;
use delay_nullctl::{find_roots, DelayKernel, MState};
use num_complex::Complex64;

fn main() -> delay_nullctl::Result<()> {
    let kernel = DelayKernel::Zero;
    let spec = find_roots(&kernel, -4..=4)?;
    let panels = 2048;

    let mut worst: f64 = 0.0;
    for mu in spec.records() {
        let e = MState::eigenvector(mu.lambda, panels)?;
        for lam in spec.records() {
            let want = if mu.branch == lam.branch { 1.0 } else { 0.0 };
            let got = expansion_coefficient(&e, lam, &kernel)?;
            worst = worst.max((got - want).norm());
        }
    }
    println!(
        "Gram matrix {0}x{0}: max deviation from identity {worst:.2e}",
        spec.len()
    );

    // x = (1, 1): the coefficients decay like 1/|lambda|^2
    let x = MState::from_fn(Complex64::new(1.0, 0.0), panels, |_| {
        Complex64::new(1.0, 0.0)
    })?;
    for r in spec.records() {
        let c = expansion_coefficient(&x, r, &kernel)?;
        let closed = -1.0 / (r.lambda * (r.lambda - Complex64::i()));
        println!(
            "branch {:>3}: {:.10} (closed form {:.10})",
            r.branch, c, closed
        );
    }
    Ok(())
}
