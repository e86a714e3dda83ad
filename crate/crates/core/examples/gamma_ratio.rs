//! Γ(s)/Γ(rs) along vertical lines, and the incomplete gamma function.

use fracheat::specfun::{decay_profile, gamma_ratio, upper_incomplete_gamma};
use fracheat::RationalPower;
use num_complex::Complex64;

fn main() -> fracheat::Result<()> {
    let r = RationalPower::rational(1, 3)?;
    for im in [0.0, 5.0, 20.0] {
        let s = Complex64::new(0.75, im);
        println!("Γ(s)/Γ(s/3) at {s}: {}", gamma_ratio(s, &r)?);
    }
    let grid: Vec<f64> = (1..=8).map(|k| 25.0 * k as f64).collect();
    let profile = decay_profile(&RationalPower::irrational(0.7)?, 0.5, 12, &grid)?;
    for (b, v) in grid.iter().zip(&profile) {
        println!("|s|^12 |Γ(s)/Γ(0.7 s)| at Im s = {b:>5}: {v:.3e}");
    }
    for z in [-2.5, 0.0, 1.5] {
        println!("Γ({z}, 2) = {:.15}", upper_incomplete_gamma(z, 2.0)?);
    }
    Ok(())
}
