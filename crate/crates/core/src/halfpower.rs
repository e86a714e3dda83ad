//! The square root r = 1/2: subordination, the incomplete-Gamma expansion and
//! the linear blow-up of {t = 0, x = y}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asym::Verdict;
use crate::error::{Error, Result};
use crate::fit::{fit_basis, BasisTerm, SamplePoint};
use crate::heat::{KernelSample, Method};
use crate::models::SpectralModel;
use crate::quad::adaptive_gk;
use crate::specfun::{gamma_real, upper_incomplete_gamma};
use crate::zeta::{phased_theta_minus_one, product_minus_one};

/// Upper limit of the Gaussian variable u; e^{−u²} is below 1e−43 beyond it.
const GAUSS_SPAN: f64 = 10.0;
/// e^{−LARGE_T_DECAY} bounds the discarded large-T tail relative to p_T − P.
const LARGE_T_DECAY: f64 = 45.0;

pub const FRONT_FACE_LIMIT_TOL: f64 = 1e-3;
pub const FRONT_FACE_LOG_TOL: f64 = 0.02;
pub const FRONT_FACE_LOG_FLOOR: f64 = 1e-6;

/// p_T(x,y) − P_ker, formed per factor so neither small nor large T cancels.
fn heat_minus_projection(model: &SpectralModel, big_t: f64, phases: &[f64]) -> f64 {
    let eps = model
        .radii
        .iter()
        .zip(phases)
        .map(|(p, phi)| phased_theta_minus_one(big_t / (p * p), *phi));
    if model.shift == 0.0 {
        product_minus_one(eps) / model.volume()
    } else {
        let log_prod: f64 = eps.map(f64::ln_1p).sum();
        (log_prod - model.shift * big_t).exp() / model.volume()
    }
}

fn check_point(model: &SpectralModel, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != model.n || y.len() != model.n {
        return Err(Error::Domain(format!("points must have {} coordinates", model.n)));
    }
    Ok(())
}

/// h_t(x,y) for r = 1/2 from
/// (t/2√π) ∫₀^∞ T^{−3/2} e^{−t²/4T} (p_T(x,y) − P_ker) dT + P_ker.
///
/// Below T* = max(t², d²) the variable u = t/(2√T) turns the weight into
/// (2/√π)e^{−u²}; above it the integral runs in ln T.
pub fn subordinated_kernel(model: &SpectralModel, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<KernelSample> {
    model.validate()?;
    check_point(model, x, y)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let phases: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let d = model.torus_distance(x, y);
    let split = (t * t).max(d * d);
    let u_split = t / (2.0 * split.sqrt());
    let small_t = |u: f64| {
        let big_t = t * t / (4.0 * u * u);
        2.0 / PI.sqrt() * (-u * u).exp() * heat_minus_projection(model, big_t, &phases)
    };
    let rate = if model.shift > 0.0 { model.shift } else { model.first_nonzero_form() };
    let v_lo = split.ln();
    let v_hi = (split + LARGE_T_DECAY / rate).ln();
    let large_t = |v: f64| {
        let big_t = v.exp();
        t / (2.0 * PI.sqrt()) * (-0.5 * v - t * t / (4.0 * big_t)).exp() * heat_minus_projection(model, big_t, &phases)
    };
    let u_hi = u_split + GAUSS_SPAN;
    // geometric panels resolve the e^{−d²/4T} switch-on near u ~ t/d
    let mut u_edges = vec![u_split];
    while u_edges[u_edges.len() - 1] < 1.0 {
        let next = 2.0 * u_edges[u_edges.len() - 1];
        u_edges.push(next.min(1.0));
    }
    if u_edges[u_edges.len() - 1] < u_hi {
        u_edges.push(u_hi);
    }
    let v_edges = [v_lo, v_hi];
    let panels = |f: &dyn Fn(f64) -> f64, edges: &[f64], tol: f64| -> Result<(f64, f64)> {
        let share = tol / (edges.len() - 1) as f64;
        let mut total = (0.0, 0.0);
        for w in edges.windows(2) {
            let (v, e) = adaptive_gk(f, w[0], w[1], share)?;
            total = (total.0 + v, total.1 + e);
        }
        Ok(total)
    };
    // coarse pass fixes the absolute scale for the tolerance
    let (coarse_a, _) = panels(&small_t, &u_edges, f64::INFINITY)?;
    let (coarse_b, _) = panels(&large_t, &v_edges, f64::INFINITY)?;
    let projection = model.kernel_projection_density();
    let scale = (coarse_a.abs() + coarse_b.abs() + projection).max(f64::MIN_POSITIVE);
    let (part_a, err_a) = panels(&small_t, &u_edges, 0.5 * tol * scale)?;
    let (part_b, err_b) = panels(&large_t, &v_edges, 0.5 * tol * scale)?;
    let value = projection + part_a + part_b;
    let error_bound = err_a + err_b + 8.0 * f64::EPSILON * scale;
    Ok(KernelSample { t, x: x.to_vec(), y: y.to_vec(), value, error_bound, method: Method::Subordination })
}

/// Value of the truncated incomplete-Gamma expansion and its distance to the
/// subordinated kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaExpansion {
    pub value: f64,
    pub remainder: f64,
}

/// (t/2√π) Σ_{j≤N} a_j Γ((n+1)/2 − j, A) A^{−(n+1)/2+j} with A = (t² + d²)/4.
pub fn incomplete_gamma_series(model: &SpectralModel, order: usize, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    model.validate()?;
    check_point(model, x, y)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let d = model.torus_distance(x, y);
    let big_a = (t * t + d * d) / 4.0;
    let a = model.heat_coefficients(order);
    let half = (model.n as f64 + 1.0) / 2.0;
    let mut sum = 0.0;
    for j in 0..=order {
        let aj = a.get(j);
        if aj == 0.0 {
            continue;
        }
        let z = half - j as f64;
        sum += aj * upper_incomplete_gamma(z, big_a)? * big_a.powf(-z);
    }
    Ok(t / (2.0 * PI.sqrt()) * sum)
}

pub fn incomplete_gamma_expansion(model: &SpectralModel, order: usize, t: f64, x: &[f64], y: &[f64]) -> Result<GammaExpansion> {
    let value = incomplete_gamma_series(model, order, t, x, y)?;
    let exact = subordinated_kernel(model, t, x, y, 1e-12)?;
    Ok(GammaExpansion { value, remainder: (exact.value - value).abs() + exact.error_bound })
}

/// A point of the blown-up heat space: polar coordinates (ρ, ω₀, ω′) about
/// the diagonal point `base`, with ω′ in arc-length units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub rho: f64,
    pub omega0: f64,
    pub omega_prime: Vec<f64>,
    pub base: Vec<f64>,
}

impl BlowupPoint {
    pub fn new(rho: f64, omega0: f64, omega_prime: Vec<f64>, base: Vec<f64>) -> Result<Self> {
        if !(rho >= 0.0) || !(0.0..=1.0).contains(&omega0) {
            return Err(Error::Domain("need ρ ≥ 0 and ω₀ ∈ [0, 1]".into()));
        }
        if omega_prime.len() != base.len() {
            return Err(Error::Domain("ω′ and base point differ in dimension".into()));
        }
        let norm2 = omega0 * omega0 + omega_prime.iter().map(|w| w * w).sum::<f64>();
        if (norm2 - 1.0).abs() > 1e-14 {
            return Err(Error::Domain(format!("ω is off the unit sphere by {:e}", norm2 - 1.0)));
        }
        Ok(Self { rho, omega0, omega_prime, base })
    }

    /// Scales `direction` so that (ω₀, ω′) is a unit vector.
    pub fn from_direction(rho: f64, omega0: f64, direction: &[f64], base: Vec<f64>) -> Result<Self> {
        let len = direction.iter().map(|w| w * w).sum::<f64>().sqrt();
        let target = (1.0 - omega0 * omega0).max(0.0).sqrt();
        let omega_prime = if target == 0.0 {
            vec![0.0; direction.len()]
        } else if len == 0.0 {
            return Err(Error::Domain("zero direction with ω₀ < 1".into()));
        } else {
            direction.iter().map(|w| w * target / len).collect()
        };
        let mut pt = Self { rho, omega0, omega_prime, base };
        // absorb rounding so the sphere check sees an exact unit vector
        let norm2 = omega0 * omega0 + pt.omega_prime.iter().map(|w| w * w).sum::<f64>();
        if norm2 > 0.0 && target > 0.0 {
            let fix = ((1.0 - omega0 * omega0) / (norm2 - omega0 * omega0)).sqrt();
            pt.omega_prime.iter_mut().for_each(|w| *w *= fix);
        }
        Self::new(pt.rho, pt.omega0, pt.omega_prime, pt.base)
    }

    /// (t, x, y) = (ρω₀, x′ + ρω′, x′) in angle coordinates.
    pub fn blow_down(&self, model: &SpectralModel) -> (f64, Vec<f64>, Vec<f64>) {
        let x = self
            .base
            .iter()
            .zip(&self.omega_prime)
            .zip(&model.radii)
            .map(|((b, w), p)| b + self.rho * w / p)
            .collect();
        (self.rho * self.omega0, x, self.base.clone())
    }
}

/// h at the blow-down of `pt`; zero on the lateral boundary ω₀ = 0.
pub fn blowup_pullback(model: &SpectralModel, pt: &BlowupPoint) -> Result<f64> {
    if pt.base.len() != model.n {
        return Err(Error::Domain(format!("base point must have {} coordinates", model.n)));
    }
    if !(pt.rho > 0.0) {
        return Err(Error::Domain("blow-up evaluation needs ρ > 0".into()));
    }
    if pt.omega0 == 0.0 {
        return Ok(0.0);
    }
    let (t, x, y) = pt.blow_down(model);
    Ok(subordinated_kernel(model, t, &x, &y, 1e-12)?.value)
}

/// 2/√π·2^{n−2j}(−1)^{j−(n+1)/2+1}/(j−(n+1)/2)!·a_j, the ρ^{2j} log ρ
/// coefficient of ρⁿh/ω₀ for n odd and j ≥ (n+1)/2.
pub fn front_face_log_prediction(model: &SpectralModel, j: usize) -> Result<f64> {
    let n = model.n;
    if n.is_multiple_of(2) || 2 * j < n + 1 {
        return Err(Error::Domain("log terms need n odd and j ≥ (n+1)/2".into()));
    }
    let k = j - n.div_ceil(2);
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let a = model.heat_coefficients(j).get(j);
    Ok(2.0 / PI.sqrt() * 2f64.powi(n as i32 - 2 * j as i32) * sign / fact * a)
}

/// Γ((n+1)/2)/π^{(n+1)/2}, the front-face value of ρⁿh/ω₀.
pub fn front_face_limit_prediction(n: usize) -> f64 {
    let half = (n as f64 + 1.0) / 2.0;
    gamma_real(half).expect("positive argument") / PI.powf(half)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontFaceProfile {
    pub n: usize,
    pub omega: Vec<f64>,
    pub rho: Vec<f64>,
    /// ρⁿ·h/ω₀ along the grid.
    pub scaled: Vec<f64>,
    pub limit: f64,
    pub limit_error: f64,
    pub predicted_limit: f64,
    pub log_coefficient: Option<f64>,
    pub log_uncertainty: Option<f64>,
    pub predicted_log: Option<f64>,
    pub verdict: Verdict,
}

/// Exponents of ρ in ρⁿh/ω₀ for n even: 2, 4, …, n, then n+1, n+2, …
fn even_exponents(n: usize, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=n / 2).map(|k| 2.0 * k as f64).collect();
    let mut e = n + 1;
    while out.len() < count {
        out.push(e as f64);
        e += 1;
    }
    out.truncate(count);
    out
}

/// Repeated Richardson elimination of the given powers of ρ.
fn richardson(rho: &[f64], values: &[f64], exponents: &[f64]) -> (f64, f64) {
    let mut level = values.to_vec();
    let mut previous = level[level.len() - 1];
    for (stage, &e) in exponents.iter().enumerate() {
        if level.len() < 2 {
            break;
        }
        previous = level[level.len() - 1];
        level = (0..level.len() - 1)
            .map(|i| {
                let (a, b) = (rho[i].powf(e), rho[i + 1 + stage].powf(e));
                (level[i + 1] * a - level[i] * b) / (a - b)
            })
            .collect();
    }
    let best = level[level.len() - 1];
    (best, (best - previous).abs())
}

/// Samples ρⁿh/ω₀ along the ray `omega` = (ω₀, ω′) and checks the front-face
/// structure: its limit for n even, its leading log coefficient for n odd.
pub fn front_face_profile(model: &SpectralModel, omega: &[f64], rho_grid: &[f64]) -> Result<FrontFaceProfile> {
    let n = model.n;
    if omega.len() != n + 1 {
        return Err(Error::Domain(format!("direction must have {} components", n + 1)));
    }
    if rho_grid.len() < 3 || rho_grid.windows(2).any(|w| !(w[1] < w[0])) || rho_grid[rho_grid.len() - 1] <= 0.0 {
        return Err(Error::Domain("ρ grid must decrease toward 0 with at least 3 points".into()));
    }
    let omega0 = omega[0];
    if !(omega0 > 0.0) {
        return Err(Error::Domain("front-face profile needs ω₀ > 0".into()));
    }
    let base = vec![0.0; n];
    let mut scaled = Vec::with_capacity(rho_grid.len());
    let mut errors = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let pt = BlowupPoint::from_direction(rho, omega0, &omega[1..], base.clone())?;
        let (t, x, y) = pt.blow_down(model);
        let s = subordinated_kernel(model, t, &x, &y, 1e-13)?;
        let factor = rho.powi(n as i32) / omega0;
        scaled.push(s.value * factor);
        errors.push(s.error_bound * factor);
    }
    let predicted_limit = front_face_limit_prediction(n);
    let (limit, limit_error, log_coefficient, log_uncertainty, predicted_log) = if n.is_multiple_of(2) {
        let exps = even_exponents(n, rho_grid.len() - 1);
        let (limit, err) = richardson(rho_grid, &scaled, &exps);
        (limit, err, None, None, None)
    } else {
        let mut basis: Vec<BasisTerm> = (0..=(n - 1) / 2).map(|j| BasisTerm::power(2.0 * j as f64, 0)).collect();
        for e in [n + 1, n + 3] {
            basis.push(BasisTerm::power(e as f64, 0));
            basis.push(BasisTerm::power(e as f64, 1));
        }
        let points: Vec<SamplePoint> = rho_grid
            .iter()
            .zip(&scaled)
            .zip(&errors)
            .map(|((&t, &value), &error_bound)| SamplePoint { t, value, error_bound })
            .collect();
        let fit = fit_basis(&points, &basis)?;
        let lead = fit.term(0.0, 0).expect("constant term");
        let log = fit.term((n + 1) as f64, 1).expect("log term");
        let predicted = front_face_log_prediction(model, n.div_ceil(2))?;
        (lead.coefficient, lead.uncertainty, Some(log.coefficient), Some(log.uncertainty), Some(predicted))
    };
    let limit_ok = (limit - predicted_limit).abs() <= FRONT_FACE_LIMIT_TOL * predicted_limit.abs();
    let log_ok = match (log_coefficient, predicted_log) {
        (Some(c), Some(p)) => (c - p).abs() <= (FRONT_FACE_LOG_TOL * p.abs()).max(FRONT_FACE_LOG_FLOOR),
        _ => true,
    };
    Ok(FrontFaceProfile {
        n,
        omega: omega.to_vec(),
        rho: rho_grid.to_vec(),
        scaled,
        limit,
        limit_error,
        predicted_limit,
        log_coefficient,
        log_uncertainty,
        predicted_log,
        verdict: if limit_ok && log_ok { Verdict::Pass } else { Verdict::Fail },
    })
}

/// h_t(x,y)/t along `ts` for fixed x ≠ y.
pub fn lateral_ratios(model: &SpectralModel, x: &[f64], y: &[f64], ts: &[f64]) -> Result<Vec<f64>> {
    if model.torus_distance(x, y) == 0.0 {
        return Err(Error::OnDiagonal);
    }
    ts.iter()
        .map(|&t| Ok(subordinated_kernel(model, t, x, y, 1e-12)?.value / t))
        .collect()
}

/// Central second difference of the blow-up pullback in ω₀ at fixed ρ,
/// moving along the great circle through (1, 0) and (0, direction).
pub fn omega0_second_difference(model: &SpectralModel, rho: f64, angle: f64, direction: &[f64], h: f64) -> Result<f64> {
    let eval = |a: f64| -> Result<f64> {
        let pt = BlowupPoint::from_direction(rho, a.cos(), direction, vec![0.0; model.n])?;
        Ok(blowup_pullback(model, &pt)? * rho.powi(model.n as i32))
    };
    Ok((eval(angle + h)? - 2.0 * eval(angle)? + eval(angle - h)?) / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::heat_kernel_direct;
    use proptest::prelude::*;

    fn coth_oracle(t: f64) -> f64 {
        1.0 / (2.0 * PI * (t / 2.0).tanh())
    }

    fn poisson_oracle(t: f64, phi: f64) -> f64 {
        t.sinh() / (2.0 * PI * (t.cosh() - phi.cos()))
    }

    #[test]
    fn circle_diagonal_matches_coth() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        for t in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let s = subordinated_kernel(&m, t, &[0.0], &[0.0], 1e-12).unwrap();
            let want = coth_oracle(t);
            assert!((s.value - want).abs() < 1e-8 * want, "t={t}: {} vs {want}", s.value);
            assert!(s.error_bound < 1e-8 * want);
            assert_eq!(s.method, Method::Subordination);
        }
    }

    #[test]
    fn circle_offdiagonal_matches_poisson_kernel() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        for phi in [0.3, PI / 2.0, 2.5, PI] {
            for t in [0.01, 0.2, 1.0, 5.0] {
                let s = subordinated_kernel(&m, t, &[phi], &[0.0], 1e-12).unwrap();
                let want = poisson_oracle(t, phi);
                assert!((s.value - want).abs() < 1e-8, "phi={phi} t={t}: {} vs {want}", s.value);
            }
        }
    }

    #[test]
    fn square_torus_agrees_with_eigensum() {
        let m = SpectralModel::unit(2, 0.0).unwrap();
        let a = subordinated_kernel(&m, 1.0, &[0.0, 0.0], &[0.0, 0.0], 1e-12).unwrap();
        let b = heat_kernel_direct(&m, 0.5, 1.0, &[0.0, 0.0], &[0.0, 0.0], 1e-13).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn shifted_line_kernel_near_front_face() {
        // full-line e^{−t√(Δ+ξ)} kernel: (t/π)√ξ K₁(√ξ ρ)/ρ, K₁(z) ≈ 1/z + (z/2)ln(z/2) + …
        let m = SpectralModel::unit(1, 1.0).unwrap();
        let t = 1e-3;
        let s = subordinated_kernel(&m, t, &[0.0], &[0.0], 1e-13).unwrap();
        let line = t / PI * (1.0 / (t * t) + 0.5 * (t / 2.0).ln() + 0.25 * (2.0 * crate::specfun::EULER_GAMMA - 1.0));
        // torus images add an O(t) smooth term; compare the singular part only
        assert!((s.value - line).abs() < 1e-3, "{} vs {line}", s.value);
    }

    #[test]
    fn incomplete_gamma_leading_term() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        for t in [0.01, 0.1, 0.5] {
            let v = incomplete_gamma_series(&m, 0, t, &[0.0], &[0.0]).unwrap();
            let want = (-t * t / 4.0).exp() / (PI * t);
            assert!((v - want).abs() < 1e-14 * want);
        }
        let near = incomplete_gamma_series(&m, 0, 1e-4, &[0.0], &[0.0]).unwrap();
        assert!((near * 1e-4 * PI - 1.0).abs() < 1e-8);
    }

    #[test]
    fn incomplete_gamma_vanishes_linearly_off_diagonal() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let a = incomplete_gamma_series(&m, 0, 1e-3, &[1.0], &[0.0]).unwrap();
        let b = incomplete_gamma_series(&m, 0, 1e-4, &[1.0], &[0.0]).unwrap();
        assert!(a > 0.0 && (a / b - 10.0).abs() < 1e-4);
    }

    #[test]
    fn incomplete_gamma_remainder_is_small_at_small_t() {
        let m = SpectralModel::unit(2, 0.0).unwrap();
        let e = incomplete_gamma_expansion(&m, 0, 0.1, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let scale = 1.0 / (2.0 * PI * 0.01);
        assert!(e.remainder < 0.1 * scale * 0.1, "{e:?}");
        let e2 = incomplete_gamma_expansion(&m, 0, 0.05, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(e2.remainder < e.remainder);
        // with ξ > 0 the j = 1 term improves the match
        let s = SpectralModel::unit(3, 0.7).unwrap();
        let z = [0.0; 3];
        let e0 = incomplete_gamma_expansion(&s, 0, 0.05, &z, &z).unwrap();
        let e1 = incomplete_gamma_expansion(&s, 1, 0.05, &z, &z).unwrap();
        assert!(e1.remainder < e0.remainder);
    }

    #[test]
    fn blowup_reductions() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let top = BlowupPoint::new(0.4, 1.0, vec![0.0], vec![0.3]).unwrap();
        let want = subordinated_kernel(&m, 0.4, &[0.3], &[0.3], 1e-12).unwrap().value;
        assert!((blowup_pullback(&m, &top).unwrap() - want).abs() < 1e-13);
        let side = BlowupPoint::new(0.4, 0.0, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(blowup_pullback(&m, &side).unwrap(), 0.0);
        assert!(BlowupPoint::new(0.4, 0.6, vec![0.7], vec![0.0]).is_err());
        assert!(blowup_pullback(&m, &BlowupPoint::new(0.0, 1.0, vec![0.0], vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn front_face_order_on_the_circle() {
        // ρ·h → (1/π)·ω₀/(ω₀² + ω₁²) · 1/ω₀ = 1/π
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let a = (0.6f64).acos();
        for rho in [1e-2, 1e-3] {
            let pt = BlowupPoint::from_direction(rho, a.cos(), &[1.0], vec![0.0]).unwrap();
            let v = blowup_pullback(&m, &pt).unwrap() * rho / pt.omega0;
            assert!((v * PI - 1.0).abs() < 10.0 * rho, "{v}");
        }
    }

    #[test]
    fn front_face_profile_square_torus() {
        let m = SpectralModel::unit(2, 0.0).unwrap();
        let grid: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();
        let p = front_face_profile(&m, &[1.0, 0.0, 0.0], &grid).unwrap();
        assert!((p.limit * 2.0 * PI - 1.0).abs() < 1e-6, "{p:?}");
        assert_eq!(p.verdict, Verdict::Pass);
        let tilted = front_face_profile(&m, &[0.8, 0.6, 0.0], &grid).unwrap();
        assert!((tilted.limit * 2.0 * PI - 1.0).abs() < 1e-5, "{tilted:?}");
    }

    #[test]
    fn front_face_log_coefficients_on_the_circle() {
        let grid: Vec<f64> = (0..40).map(|k| 0.3 * 0.85f64.powi(k)).collect();
        let flat = front_face_profile(&SpectralModel::unit(1, 0.0).unwrap(), &[1.0, 0.0], &grid).unwrap();
        assert!(flat.log_coefficient.unwrap().abs() < 1e-6, "{flat:?}");
        assert_eq!(flat.predicted_log, Some(0.0));
        let shifted = SpectralModel::unit(1, 1.0).unwrap();
        assert!((front_face_log_prediction(&shifted, 1).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let p = front_face_profile(&shifted, &[1.0, 0.0], &grid).unwrap();
        let (c, want) = (p.log_coefficient.unwrap(), p.predicted_log.unwrap());
        assert!((c - want).abs() < 1e-3 * want, "{c} vs {want}");
        assert_eq!(p.verdict, Verdict::Pass);
    }

    #[test]
    fn lateral_boundary_vanishes_to_first_order() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let ts = [1e-2, 1e-3, 1e-4, 1e-5];
        let r = lateral_ratios(&m, &[PI / 2.0], &[0.0], &ts).unwrap();
        for v in &r {
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-3, "{r:?}");
        }
        assert!(lateral_ratios(&m, &[0.0], &[0.0], &ts).is_err());
    }

    #[test]
    fn omega0_smoothness_spot_check() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let a = omega0_second_difference(&m, 0.05, 0.7, &[1.0], 1e-2).unwrap();
        let b = omega0_second_difference(&m, 0.01, 0.7, &[1.0], 1e-2).unwrap();
        assert!(a.is_finite() && b.is_finite());
        assert!(b.abs() <= 2.0 * a.abs() + 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn subordination_matches_eigensum(t in 0.05f64..5.0, phi in -3.0f64..3.0, two in proptest::bool::ANY) {
            let n = if two { 2 } else { 1 };
            let m = SpectralModel::unit(n, 0.0).unwrap();
            let x: Vec<f64> = (0..n).map(|i| phi / (i + 1) as f64).collect();
            let y = vec![0.0; n];
            let a = subordinated_kernel(&m, t, &x, &y, 1e-11).unwrap();
            let b = heat_kernel_direct(&m, 0.5, t, &x, &y, 1e-11).unwrap();
            prop_assert!((a.value - b.value).abs() <= 10.0 * (a.error_bound + b.error_bound) + 1e-12,
                "{} vs {} (bounds {} {})", a.value, b.value, a.error_bound, b.error_bound);
        }
    }
}
