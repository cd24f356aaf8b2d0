//! Roots of the characteristic function for the pure discrete delay.
//!
//! Run with `cargo run --example spectrum`.

use delay_nullctl::spectral::{eval_charfn, find_roots};
use delay_nullctl::DelayKernel;

fn main() -> delay_nullctl::Result<()> {
    let spec = find_roots(&DelayKernel::Zero, -6..=6)?;
    println!("{:>6} {:>22} {:>22} {:>10}", "branch", "re", "im", "|D|");
    for r in spec.records() {
        let d = eval_charfn(r.lambda, &DelayKernel::Zero)?;
        println!(
            "{:>6} {:>22.15} {:>22.15} {:>10.2e}",
            r.branch,
            r.lambda.re,
            r.lambda.im,
            d.norm()
        );
    }
    // Im lambda grows like log(2 pi n - pi/2); the one root below the axis is exceptional
    let exc: Vec<_> = spec
        .records()
        .iter()
        .filter(|r| r.is_exceptional())
        .collect();
    println!("exceptional roots: {}", exc.len());
    Ok(())
}
