//! The r = 1/2 kernel on the circle four ways, next to coth(t/2)/(2π).

use std::f64::consts::PI;

use fracheat::halfpower::subordinated_kernel;
use fracheat::heat::{heat_kernel_direct, heat_kernel_inverse_mellin, heat_kernel_poisson, ContourParams};
use fracheat::{RationalPower, SpectralModel};

fn main() -> fracheat::Result<()> {
    let model = SpectralModel::unit(1, 0.0)?;
    let r = RationalPower::half();
    let contour = ContourParams::for_model(&model, &r);
    println!("{:>6} {:>20} {:>20} {:>20} {:>20}", "t", "eigensum", "inverse mellin", "subordination", "closed form");
    for t in [0.1, 0.5, 2.0, 8.0] {
        let a = heat_kernel_direct(&model, 0.5, t, &[0.0], &[0.0], 1e-13)?;
        let b = heat_kernel_inverse_mellin(&model, &r, t, &[0.0], &contour)?;
        let c = subordinated_kernel(&model, t, &[0.0], &[0.0], 1e-12)?;
        let exact = 1.0 / (2.0 * PI * (t / 2.0).tanh());
        println!("{t:>6} {:>20.15} {:>20.15} {:>20.15} {exact:>20.15}", a.value, b.value, c.value);
    }

    // r = 1 has a theta-function form
    let p = heat_kernel_poisson(&model, 0.3, &[1.0], &[0.0])?;
    let q = heat_kernel_direct(&model, 1.0, 0.3, &[1.0], &[0.0], 1e-13)?;
    println!("e^(-0.3Δ)(1, 0): poisson {:.15}, eigensum {:.15}", p.value, q.value);
    Ok(())
}
