//! q_{rj}(x,x) scales like p^(2s-n) under radius scaling, with ζ(-rj) ≠ 0.

use fracheat::cli::cmd_nonlocality;
use fracheat::RationalPower;

fn main() -> fracheat::Result<()> {
    for (n, r, j, p) in [(1, "1/2", 1, 2.0), (1, "1/3", 1, 3.0), (2, "1/3", 2, 1.5)] {
        let power: RationalPower = r.parse()?;
        let rep = cmd_nonlocality(n, &power, r, j, p)?;
        println!(
            "n={n} r={r} j={j} p={p}: ratio {:.15} predicted {:.15} ζ(-rj) = {:.6}",
            rep.ratio, rep.predicted_ratio, rep.zeta_value
        );
    }
    Ok(())
}
