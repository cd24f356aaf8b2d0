//! Regularizing weights and partial sums `S_n x` under the default schedule
//! `l_n = n^{1/4}`, `R_n = n^4`.

use delay_nullctl::spectral::branches_for_radius;
use delay_nullctl::summation::{partial_sum, weight_fn, WeightTable};
use delay_nullctl::{find_roots, m_norm, DelayKernel, MState, SummationSchedule};
use num_complex::Complex64;

fn main() -> delay_nullctl::Result<()> {
    let schedule = SummationSchedule::default_rule(8);
    let z = Complex64::new(4.375, 1.534);
    for n in [1u32, 10, 100, 1000] {
        let s = SummationSchedule::default_rule(n);
        println!("W_{n}({z}) = {:.6}", weight_fn(n, z, &s)?);
    }

    let b = branches_for_radius(schedule.r_n(6));
    let spec = find_roots(&DelayKernel::Zero, -b..=b)?;
    let x = MState::from_fn(Complex64::new(1.0, 0.0), 512, |_| Complex64::new(1.0, 0.0))?;
    for n in 1..=6 {
        let table = WeightTable::build(n, &spec, &schedule);
        let err =
            m_norm(&partial_sum(&x, n, &spec, &schedule)?.axpy(-Complex64::new(1.0, 0.0), &x)?);
        println!(
            "n = {n}: {:>4} terms, |S_n x - x| = {err:.4}",
            table.nonzero_count()
        );
    }
    Ok(())
}
