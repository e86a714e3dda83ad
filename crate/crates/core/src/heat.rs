//! Ground-truth heat kernels: eigensums, Poisson summation and inverse Mellin.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    collect_lattice, enumerate_eigenvalues_with_budget, spectral_tail_bound, wrap_angle,
    SpectralModel, DEFAULT_LATTICE_BUDGET,
};
use crate::power::RationalPower;
use crate::quad::{composite_gl, Neumaier};
use crate::specfun::gamma;
use crate::zeta::spectral_zeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eigensum,
    Poisson,
    InverseMellin,
    Subordination,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Eigensum => "eigensum",
            Method::Poisson => "poisson",
            Method::InverseMellin => "inverse_mellin",
            Method::Subordination => "subordination",
        }
    }
}

/// One kernel evaluation with its error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Trapezoid,
    Gauss,
}

/// Vertical-line quadrature settings for the inverse Mellin integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourParams {
    pub tau: f64,
    /// Starting half-length; doubled until the endpoint integrand is small.
    pub half_length: f64,
    pub spacing: f64,
    pub rule: Rule,
    pub tol: f64,
    pub max_half_length: f64,
}

impl ContourParams {
    pub fn for_model(model: &SpectralModel, r: &RationalPower) -> Self {
        Self {
            tau: model.n as f64 / (2.0 * r.value) + 1.0,
            half_length: 16.0,
            spacing: 0.25,
            rule: Rule::Trapezoid,
            tol: 1e-10,
            max_half_length: 4096.0,
        }
    }

    pub fn node_count(&self) -> usize {
        (2.0 * self.half_length / self.spacing).round() as usize + 1
    }
}

/// Direct eigensum (1/vol) Σ e^{−tλ^r} e^{ik·(x−y)} with a rigorous tail bound.
///
/// `r` may be any exponent in (0, 1]; r = 1 gives the heat kernel of Δ itself.
pub fn heat_kernel_direct(
    model: &SpectralModel,
    r: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<KernelSample> {
    heat_kernel_direct_with_budget(model, r, t, x, y, tol, DEFAULT_LATTICE_BUDGET)
}

pub fn heat_kernel_direct_with_budget(
    model: &SpectralModel,
    r: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    tol: f64,
    budget: u64,
) -> Result<KernelSample> {
    model.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidPower(format!("{r}")));
    }
    let vol = model.volume();
    let xi = model.shift;
    let tail = |cutoff: f64| spectral_tail_bound(model, cutoff, t, r) / vol;
    let mut cutoff = xi + 4.0 * model.first_nonzero_form().max(1.0);
    while tail(cutoff) > tol / 2.0 {
        cutoff *= 1.5;
        let estimate = model.count_bound(cutoff - xi);
        if estimate > budget as f64 {
            return Err(Error::BudgetExceeded { estimated: estimate, budget });
        }
    }
    let on_diagonal = x.iter().zip(y).all(|(a, b)| wrap_angle(a - b) == 0.0);
    let mut acc = Neumaier::new();
    let mut count = 0u64;
    if on_diagonal {
        let list = enumerate_eigenvalues_with_budget(model, cutoff, budget).map_err(budget_error)?;
        for (lambda, m) in &list.entries {
            acc.add(*m as f64 * (-t * lambda.powf(r)).exp());
            count += m;
        }
    } else {
        let phi: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut terms = collect_lattice(model, cutoff - xi, budget, |k, form| {
            let phase: f64 = k.iter().zip(&phi).map(|(&k, p)| k as f64 * p).sum();
            Some((form + xi, phase.cos()))
        })
        .map_err(budget_error)?;
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (lambda, cosine) in &terms {
            acc.add(cosine * (-t * lambda.powf(r)).exp());
        }
        count = terms.len() as u64;
    }
    let value = acc.value() / vol;
    let rounding = 4.0 * f64::EPSILON * (count as f64).sqrt() * value.abs().max(1.0 / vol);
    Ok(KernelSample {
        t,
        x: x.to_vec(),
        y: y.to_vec(),
        value,
        error_bound: tail(cutoff) + rounding,
        method: Method::Eigensum,
    })
}

fn budget_error(e: Error) -> Error {
    match e {
        Error::CutoffTooLarge { estimated, budget } => Error::BudgetExceeded { estimated, budget },
        other => other,
    }
}

/// Per-factor image sum (4πt)^{−1/2} Σ_m e^{−p²(φ+2πm)²/(4t)} and the first
/// omitted term.
fn image_factor(p: f64, phi: f64, t: f64) -> (f64, f64) {
    let phi = wrap_angle(phi);
    let norm = (4.0 * PI * t).sqrt();
    let term = |m: f64| (-(p * (phi + 2.0 * PI * m)).powi(2) / (4.0 * t)).exp();
    let mut sum = term(0.0);
    let mut m = 1.0;
    loop {
        let add = term(m) + term(-m);
        sum += add;
        if add <= 1e-18 * sum {
            let next = term(m + 1.0) + term(-m - 1.0);
            return (sum / norm, next / norm);
        }
        m += 1.0;
    }
}

/// p_t(x,y) of Δ+ξ by Poisson summation over lattice images (r = 1 only).
pub fn heat_kernel_poisson(model: &SpectralModel, t: f64, x: &[f64], y: &[f64]) -> Result<KernelSample> {
    model.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let mut value = (-t * model.shift).exp();
    let mut rel_err = 0.0;
    for ((p, a), b) in model.radii.iter().zip(x).zip(y) {
        let (f, omitted) = image_factor(*p, a - b, t);
        value *= f;
        rel_err += omitted / f;
    }
    let error_bound = value * (1.1 * rel_err + 8.0 * f64::EPSILON * model.n as f64);
    Ok(KernelSample { t, x: x.to_vec(), y: y.to_vec(), value, error_bound, method: Method::Poisson })
}

/// h_t(x,x) = P_ker + (1/2πi)∫_{Re s=τ} t^{−s} Γ(s) q_{−rs}(x,x) ds.
pub fn heat_kernel_inverse_mellin(
    model: &SpectralModel,
    r: &RationalPower,
    t: f64,
    x: &[f64],
    contour: &ContourParams,
) -> Result<KernelSample> {
    model.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let min = model.n as f64 / (2.0 * r.value);
    if contour.tau <= min {
        return Err(Error::AbscissaTooSmall { tau: contour.tau, min });
    }
    let vol = model.volume();
    let ln_t = t.ln();
    let integrand = |y: f64| -> Result<Complex64> {
        let s = Complex64::new(contour.tau, y);
        let z = spectral_zeta(model, s * r.value)?;
        Ok((-s * ln_t).exp() * gamma(s)? * z / vol)
    };
    let h = contour.spacing;
    // conjugate symmetry: integrate y ≥ 0 and take twice the real part
    let mut nodes: Vec<f64> = vec![integrand(0.0)?.re];
    let mut half_length = contour.half_length;
    let mut endpoint;
    loop {
        let have = nodes.len() - 1;
        let want = (half_length / h).round() as usize;
        for k in (have + 1)..=want {
            nodes.push(integrand(k as f64 * h)?.re);
        }
        endpoint = nodes[want].abs();
        // average of the last few nodes guards against hitting a zero of the oscillation
        let tail_mag = nodes[want.saturating_sub(4)..=want].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tail_mag < 1e-3 * contour.tol {
            break;
        }
        if half_length >= contour.max_half_length {
            return Err(Error::ContourTooShort { endpoint: tail_mag, half_length });
        }
        half_length *= 2.0;
    }
    let trapezoid = |stride: usize| -> f64 {
        let mut acc = Neumaier::new();
        acc.add(0.5 * nodes[0]);
        for v in nodes.iter().skip(stride).step_by(stride) {
            acc.add(*v);
        }
        acc.value() * h * stride as f64 / PI
    };
    let (fine, coarse) = match contour.rule {
        Rule::Trapezoid => (trapezoid(1), trapezoid(2)),
        Rule::Gauss => {
            // same truncation, composite Gauss–Legendre at two panel widths
            let gauss = |width: f64| -> Result<f64> {
                let panels = (half_length / width).ceil() as usize;
                let err = std::cell::Cell::new(None);
                let v = composite_gl(
                    |y| match integrand(y) {
                        Ok(v) => Complex64::new(v.re, 0.0),
                        Err(e) => {
                            err.set(Some(e));
                            Complex64::new(0.0, 0.0)
                        }
                    },
                    0.0,
                    half_length,
                    panels,
                );
                match err.take() {
                    Some(e) => Err(e),
                    None => Ok(v.re / PI),
                }
            };
            (gauss(4.0)?, gauss(8.0)?)
        }
    };
    let value = model.kernel_projection_density() + fine;
    let error_bound = (fine - coarse).abs() + endpoint * h / PI + 16.0 * f64::EPSILON * value.abs();
    Ok(KernelSample {
        t,
        x: x.to_vec(),
        y: x.to_vec(),
        value,
        error_bound,
        method: Method::InverseMellin,
    })
}

/// Geometric grid from `t_min` to `t_max` (inclusive where it lands) with the given ratio.
pub fn geometric_grid(t_min: f64, t_max: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t_min;
    while t <= t_max * (1.0 + 1e-12) {
        out.push(t);
        t *= ratio;
    }
    out
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes samples as CSV rows `t,value,error_bound,method` with a header.
pub fn write_samples_csv<W: Write>(out: W, samples: &[KernelSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "error_bound", "method"])?;
    for s in samples {
        w.write_record([fmt17(s.t), fmt17(s.value), fmt17(s.error_bound), s.method.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coth_oracle(t: f64) -> f64 {
        1.0 / (2.0 * PI * (t / 2.0).tanh())
    }

    fn poisson_kernel_oracle(t: f64, phi: f64) -> f64 {
        let q = (-t).exp();
        (1.0 - q * q) / (2.0 * PI * (1.0 - 2.0 * q * phi.cos() + q * q))
    }

    fn unit(n: usize) -> SpectralModel {
        SpectralModel::unit(n, 0.0).unwrap()
    }

    #[test]
    fn direct_matches_geometric_series() {
        for t in geometric_grid(0.1, 10.0, 1.6) {
            let s = heat_kernel_direct(&unit(1), 0.5, t, &[0.0], &[0.0], 1e-13).unwrap();
            let want = coth_oracle(t);
            assert!(((s.value - want) / want).abs() < 1e-10, "t = {t}");
            assert!(s.error_bound <= 1e-12);
            assert!((s.value - want).abs() <= s.error_bound + 1e-15);
        }
    }

    #[test]
    fn direct_off_diagonal_matches_poisson_kernel() {
        for (t, phi) in [(0.1, 0.3), (1.0, PI / 2.0), (3.0, PI)] {
            let s = heat_kernel_direct(&unit(1), 0.5, t, &[phi], &[0.0], 1e-13).unwrap();
            assert!((s.value - poisson_kernel_oracle(t, phi)).abs() < 1e-11);
        }
    }

    #[test]
    fn direct_tends_to_projection() {
        let m = SpectralModel::new(vec![1.0, 0.5], 0.0).unwrap();
        let s = heat_kernel_direct(&m, 0.3, 200.0, &[0.0, 0.0], &[1.0, 2.0], 1e-12).unwrap();
        assert!((s.value - m.kernel_projection_density()).abs() < 1e-12);
        let shifted = m.with_shift(0.5);
        let s = heat_kernel_direct(&shifted, 0.3, 200.0, &[0.0, 0.0], &[0.0, 0.0], 1e-12).unwrap();
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn budget_exceeded_at_tiny_time() {
        let e = heat_kernel_direct_with_budget(&unit(3), 0.3, 1e-3, &[0.0; 3], &[0.0; 3], 1e-10, 100_000);
        assert!(matches!(e, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn poisson_values() {
        let s = heat_kernel_poisson(&unit(1), 0.01, &[0.0], &[0.0]).unwrap();
        assert!((s.value - (4.0 * PI * 0.01f64).powf(-0.5)).abs() < 1e-12);
        assert!((s.value - 2.820_947_917_738_781).abs() < 1e-12);
        let s = heat_kernel_poisson(&unit(2), 0.01, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((s.value * 4.0 * PI * 0.01 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn poisson_agrees_with_direct_at_r_one() {
        let models = [
            SpectralModel::unit(1, 0.0).unwrap(),
            SpectralModel::new(vec![1.0, 1.7], 0.3).unwrap(),
            SpectralModel::new(vec![0.8, 1.0, 1.2], 0.0).unwrap(),
        ];
        for m in &models {
            for t in [0.05, 0.3, 1.0, 5.0] {
                let x: Vec<f64> = (0..m.n).map(|j| 0.4 * j as f64 + 0.1).collect();
                let y = vec![0.0; m.n];
                let a = heat_kernel_poisson(m, t, &x, &y).unwrap();
                let b = heat_kernel_direct(m, 1.0, t, &x, &y, 1e-14).unwrap();
                assert!((a.value - b.value).abs() < 1e-12, "{m:?} t={t}: {} vs {}", a.value, b.value);
                assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound + 1e-15);
            }
        }
    }

    #[test]
    fn inverse_mellin_matches_oracles() {
        let half = RationalPower::half();
        let m = unit(1);
        let c = ContourParams::for_model(&m, &half);
        let s = heat_kernel_inverse_mellin(&m, &half, 1.0, &[0.0], &c).unwrap();
        assert!((s.value - coth_oracle(1.0)).abs() < 1e-6 * coth_oracle(1.0));

        let m2 = unit(2);
        let c2 = ContourParams::for_model(&m2, &half);
        let a = heat_kernel_inverse_mellin(&m2, &half, 1.0, &[0.0, 0.0], &c2).unwrap();
        let b = heat_kernel_direct(&m2, 0.5, 1.0, &[0.0, 0.0], &[0.0, 0.0], 1e-12).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * b.value);

        let third = RationalPower::rational(1, 3).unwrap();
        let c3 = ContourParams::for_model(&m, &third);
        let a = heat_kernel_inverse_mellin(&m, &third, 1.0, &[0.0], &c3).unwrap();
        let b = heat_kernel_direct(&m, 1.0 / 3.0, 1.0, &[0.0], &[0.0], 1e-12).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * b.value);
    }

    #[test]
    fn inverse_mellin_gauss_rule_agrees() {
        let half = RationalPower::half();
        let m = unit(1);
        let mut c = ContourParams::for_model(&m, &half);
        c.rule = Rule::Gauss;
        let s = heat_kernel_inverse_mellin(&m, &half, 0.5, &[0.0], &c).unwrap();
        assert!((s.value - coth_oracle(0.5)).abs() < 1e-8 * coth_oracle(0.5));
    }

    #[test]
    fn inverse_mellin_rejects_low_abscissa() {
        let half = RationalPower::half();
        let mut c = ContourParams::for_model(&unit(1), &half);
        c.tau = 1.0;
        let e = heat_kernel_inverse_mellin(&unit(1), &half, 1.0, &[0.0], &c);
        assert!(matches!(e, Err(Error::AbscissaTooSmall { .. })));
    }

    #[test]
    fn semigroup_by_fourier_quadrature() {
        // ∫ p_t(x,z) p_s(z,y) dz on n = 1; the trapezoid rule is exact for the
        // band-limited truncations, so it reproduces p_{t+s}.
        let m = unit(1);
        let (t, s, x, y) = (0.3, 0.45, 0.7, 2.1);
        let nodes = 256;
        let mut acc = 0.0;
        for i in 0..nodes {
            let z = 2.0 * PI * i as f64 / nodes as f64;
            let a = heat_kernel_poisson(&m, t, &[x], &[z]).unwrap().value;
            let b = heat_kernel_poisson(&m, s, &[z], &[y]).unwrap().value;
            acc += a * b;
        }
        let integral = acc * 2.0 * PI / nodes as f64;
        let want = heat_kernel_poisson(&m, t + s, &[x], &[y]).unwrap().value;
        assert!((integral - want).abs() < 1e-10);
    }

    #[test]
    fn csv_has_header_and_17_digits() {
        let s = heat_kernel_poisson(&unit(1), 0.5, &[0.0], &[0.0]).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, std::slice::from_ref(&s)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,value,error_bound,method"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), s.value);
        assert_eq!(row[3], "poisson");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn kernel_is_symmetric(a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU, t in 0.3f64..2.0, r in 0.4f64..1.0) {
            let m = SpectralModel::new(vec![1.0, 1.3], 0.2).unwrap();
            let xy = heat_kernel_direct(&m, r, t, &[a, b], &[b, a], 1e-11).unwrap().value;
            let yx = heat_kernel_direct(&m, r, t, &[b, a], &[a, b], 1e-11).unwrap().value;
            prop_assert!((xy - yx).abs() <= 1e-14 * xy.abs().max(1.0));
        }

        #[test]
        fn diagonal_decay_is_monotone(t in 0.3f64..5.0, r in 0.4f64..0.9) {
            let m = unit(2);
            let p = m.kernel_projection_density();
            let a = heat_kernel_direct(&m, r, t, &[0.0; 2], &[0.0; 2], 1e-12).unwrap().value - p;
            let b = heat_kernel_direct(&m, r, t * 1.05, &[0.0; 2], &[0.0; 2], 1e-12).unwrap().value - p;
            prop_assert!(b < a);
        }
    }
}
