//! Spectral zeta of flat tori: poles, trivial zeros, the functional equation.

use fracheat::zeta::{epstein_zeta, functional_equation_residual, q_kernel_offdiag, spectral_zeta};
use fracheat::SpectralModel;
use num_complex::Complex64;

fn main() -> fracheat::Result<()> {
    let square = SpectralModel::unit(2, 0.0)?;
    println!("ζ(2) on the square torus: {}", spectral_zeta(&square, Complex64::new(2.0, 0.0))?.re);
    let pole = epstein_zeta(&square, Complex64::new(1.0, 0.0))?;
    println!("at s = 1: residue {}, finite part {}", pole.residue.re, pole.value.re);
    for k in 1..=3 {
        println!("ζ(-{k}) = {:.3e}", spectral_zeta(&square, Complex64::new(-(k as f64), 0.0))?.norm());
    }
    let s = Complex64::new(0.3, 4.0);
    println!("functional equation residual at {s}: {:.2e}", functional_equation_residual(&square, s)?);

    let skew = SpectralModel::new(vec![1.0, 1.7], 0.3)?;
    let q = q_kernel_offdiag(&skew, Complex64::new(-0.5, 0.0), &[1.0, 0.5], &[0.0, 0.0])?;
    println!("q_(-1/2)(x, y) on a shifted rectangular torus: {}", q.value.re);
    Ok(())
}
