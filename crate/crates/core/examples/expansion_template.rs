//! Small-t exponents and predicted coefficients for a few powers r.

use fracheat::asym::{predict_coefficients, predict_exponents};
use fracheat::{RationalPower, SpectralModel};

fn main() -> fracheat::Result<()> {
    for (n, r, shift) in [(1, "1/2", 1.0), (1, "1/3", 0.0), (2, "1/2", 0.0), (3, "2/3", 0.5)] {
        let r: RationalPower = r.parse()?;
        let model = SpectralModel::unit(n, shift)?;
        let template = predict_exponents(n, &r, 3.0)?;
        let report = predict_coefficients(&model, &r, &template, &vec![0.0; n])?;
        println!("n={n} r={r} ξ={shift} ({:?})", template.case);
        for row in &report.rows {
            let log = if row.log_power == 1 { " log t" } else { "" };
            println!("  t^{}{log}: {:+.12}", row.exponent, row.predicted);
        }
    }
    Ok(())
}
