//! Eigenvalues of a rectangular torus and the tail bound of the heat trace.

use fracheat::models::enumerate_eigenvalues;
use fracheat::SpectralModel;

fn main() -> fracheat::Result<()> {
    let model = SpectralModel::new(vec![1.0, 1.5], 0.25)?;
    let list = enumerate_eigenvalues(&model, 6.0)?.with_tail(&model, 0.5, 0.5);
    for (lambda, mult) in &list.entries {
        println!("{lambda:>10.6} x{mult}");
    }
    println!("{} eigenvalues, tail of Σ e^(-t λ^r) at t=0.5, r=1/2 ≤ {:.3e}", list.total_count(), list.tail_bound);
    Ok(())
}
