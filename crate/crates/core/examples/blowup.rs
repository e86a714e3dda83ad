//! The r = 1/2 kernel near the front face of the blown-up heat space.

use fracheat::halfpower::{blowup_pullback, front_face_profile, lateral_ratios, BlowupPoint};
use fracheat::SpectralModel;

fn main() -> fracheat::Result<()> {
    let torus = SpectralModel::unit(2, 0.0)?;
    let grid: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();
    let profile = front_face_profile(&torus, &[0.8, 0.6, 0.0], &grid)?;
    println!("ρ²h/ω₀: {:?}", profile.scaled);
    println!("limit {:.10} (expected {:.10}) {:?}", profile.limit, profile.predicted_limit, profile.verdict);

    let circle = SpectralModel::unit(1, 1.0)?;
    let grid: Vec<f64> = (0..40).map(|k| 0.3 * 0.85f64.powi(k)).collect();
    let odd = front_face_profile(&circle, &[1.0, 0.0], &grid)?;
    println!("circle, ξ=1: ρ² log ρ coefficient {:?} (expected {:?})", odd.log_coefficient, odd.predicted_log);

    let pt = BlowupPoint::from_direction(0.05, 0.3, &[1.0, 1.0], vec![0.0, 0.0])?;
    println!("pullback at ρ=0.05, ω₀=0.3: {:.6e}", blowup_pullback(&torus, &pt)?);

    let ratios = lateral_ratios(&SpectralModel::unit(1, 0.0)?, &[1.5], &[0.0], &[1e-1, 1e-2, 1e-3])?;
    println!("h_t/t away from the diagonal: {ratios:?}");
    Ok(())
}
