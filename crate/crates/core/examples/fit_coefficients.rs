//! Fit the expansion template to eigensum samples and compare with the prediction.
//! Terms past t³ are fitted but not compared; they soak up truncation bias.

use fracheat::asym::{predict_coefficients, predict_exponents};
use fracheat::fit::{compare, fit_expansion, SampleGrid};
use fracheat::heat::{geometric_grid, heat_kernel_direct};
use fracheat::{RationalPower, SpectralModel};

fn main() -> fracheat::Result<()> {
    let model = SpectralModel::unit(1, 1.0)?;
    let r = RationalPower::half();
    let template = predict_exponents(1, &r, 3.0)?;
    let wide = predict_exponents(1, &r, 5.0)?;
    let samples = geometric_grid(0.01, 0.3, 1.1)
        .into_iter()
        .map(|t| heat_kernel_direct(&model, 0.5, t, &[0.0], &[0.0], 1e-14))
        .collect::<fracheat::Result<Vec<_>>>()?;
    let fit = fit_expansion(&SampleGrid::from_samples(&samples)?, &wide)?.restricted_to(&template);
    let predicted = predict_coefficients(&model, &r, &template, &[0.0])?;
    let report = compare(&predicted, &fit, 1e-3, 1e-6)?;
    println!("condition number {:.2e}, reduced χ² {:.2e}", fit.condition_number, fit.reduced_chi2);
    for row in &report.rows {
        println!(
            "t^{:<4} log^{} predicted {:+.10} fitted {:+.10} ± {:.1e} {:?}",
            row.exponent.to_string(),
            row.log_power,
            row.predicted,
            row.fitted.unwrap_or(f64::NAN),
            row.uncertainty.unwrap_or(f64::NAN),
            row.verdict.unwrap()
        );
    }
    Ok(())
}
