//! Spectral zeta functions of flat tori and Schwartz kernels of Δ^{−s}.
//!
//! Everything goes through the split Mellin representation
//! Γ(s)ζ(s) = ∫₀^∞ t^{s−1}(Θ(t)e^{−ξt} − [ξ=0]) dt, cut at t = c. The piece
//! above c is entire; below c the theta function is Poisson-transformed,
//! which produces explicit polar terms plus a second rapidly convergent
//! integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{collect_lattice, wrap_angle, SpectralModel, DEFAULT_LATTICE_BUDGET};
use crate::power::RationalPower;
use crate::quad::{composite_gl, Neumaier};
use crate::specfun::{digamma, recip_gamma, upper_incomplete_gamma};

/// Magnitude drop (natural log) at which tail integrals are cut.
const TAIL_DROP: f64 = 44.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub s: Complex64,
    /// ζ(s) off poles; the finite part (constant Laurent coefficient) at a pole.
    pub value: Complex64,
    pub is_pole: bool,
    pub residue: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QKernelValue {
    pub s: Complex64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: Complex64,
}

/// θ(x) − 1 with θ(x) = Σ_m e^{−x m²}.
fn theta_minus_one(x: f64) -> f64 {
    if x >= 1.0 {
        let mut sum = 0.0;
        let mut m = 1.0f64;
        loop {
            let term = (-x * m * m).exp();
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            m += 1.0;
        }
        2.0 * sum
    } else {
        let y = PI * PI / x;
        (PI / x).sqrt() * (1.0 + theta_minus_one(y)) - 1.0
    }
}

/// θ_φ(x) − 1 with θ_φ(x) = Σ_m e^{−x m²} cos(mφ).
pub(crate) fn phased_theta_minus_one(x: f64, phi: f64) -> f64 {
    if x >= 1.0 {
        let mut sum = 0.0;
        let mut m = 1.0f64;
        loop {
            let e = (-x * m * m).exp();
            sum += e * (m * phi).cos();
            if e < 1e-18 {
                break;
            }
            m += 1.0;
        }
        2.0 * sum
    } else {
        let phi = wrap_angle(phi);
        let mut sum = 0.0;
        let mut l = 0i64;
        loop {
            let mut add = (-(phi + 2.0 * PI * l as f64).powi(2) / (4.0 * x)).exp();
            if l > 0 {
                add += (-(phi - 2.0 * PI * l as f64).powi(2) / (4.0 * x)).exp();
            }
            sum += add;
            if l > 0 && add < 1e-18 {
                break;
            }
            l += 1;
        }
        (PI / x).sqrt() * sum - 1.0
    }
}

/// ∏(1 + εⱼ) − 1 without cancellation when every εⱼ is small.
pub(crate) fn product_minus_one(eps: impl Iterator<Item = f64>) -> f64 {
    eps.map(f64::ln_1p).sum::<f64>().exp_m1()
}

/// ∫_lower^∞ t^{w−1} g(t) dt where |g(t)| ≲ e^{−rate·t}, via t = lower·e^v
/// and composite Gauss–Legendre panels sized to the oscillation of t^{i Im w}.
fn tail_integral(w: Complex64, lower: f64, rate: f64, g: impl Fn(f64) -> f64) -> Complex64 {
    let power = w.re;
    let log_mag = |t: f64| power * t.ln() - rate * t;
    let peak_t = (power / rate).max(lower);
    let peak = log_mag(peak_t);
    let mut t_end = peak_t.max(lower * 1.01);
    while log_mag(t_end) > peak - TAIL_DROP || t_end <= peak_t {
        t_end *= 1.1;
    }
    let v_end = (t_end / lower).ln();
    let h = (0.25f64).min(2.0 / (1.0 + w.im.abs()));
    let panels = ((v_end / h).ceil() as usize).max(1);
    composite_gl(
        |v| {
            let t = lower * v.exp();
            (w * t.ln()).exp() * g(t)
        },
        0.0,
        v_end,
        panels,
    )
}

/// ∫₀^upper t^{w−1} g(t) dt where g vanishes like e^{−d/t} at 0, via t = upper·e^{−v}.
fn head_integral(w: Complex64, upper: f64, d: f64, g: impl Fn(f64) -> f64) -> Complex64 {
    let power = w.re;
    // log magnitude in v: −power·v − d e^{v}/upper
    let log_mag = |v: f64| -power * v - d * v.exp() / upper;
    let peak_v = if power < 0.0 { ((-power) * upper / d).ln().max(0.0) } else { 0.0 };
    let peak = log_mag(peak_v);
    let mut v_end = peak_v + 0.5;
    while log_mag(v_end) > peak - TAIL_DROP {
        v_end += 0.5;
    }
    let h = (0.25f64).min(2.0 / (1.0 + w.im.abs()));
    let panels = ((v_end / h).ceil() as usize).max(1);
    composite_gl(
        |v| {
            let t = upper * (-v).exp();
            (w * t.ln()).exp() * g(t)
        },
        0.0,
        v_end,
        panels,
    )
}

/// Default split point of the Mellin integral.
pub fn default_split(model: &SpectralModel) -> f64 {
    let pmax = model.radii.iter().cloned().fold(f64::MIN, f64::max);
    let pmin = model.radii.iter().cloned().fold(f64::MAX, f64::min);
    let c = PI * pmax * pmin;
    if model.shift > 0.0 {
        c.min(8.0 / model.shift)
    } else {
        c
    }
}

/// A simple-pole contribution `coef / (s − pole)` of Γ(s)ζ(s).
#[derive(Debug, Clone, Copy)]
struct Polar {
    coef: Complex64,
    pole: f64,
}

/// Γ(s)ζ(s) split into an entire part and explicit polar terms.
struct Completed {
    regular: Complex64,
    polar: Vec<Polar>,
}

fn completed(model: &SpectralModel, s: Complex64, c: f64) -> Completed {
    let n = model.n as f64;
    let xi = model.shift;
    let kernel = xi == 0.0;
    let prefactor = model.radius_product() * PI.powf(n / 2.0);
    let pmax = model.radii.iter().cloned().fold(f64::MIN, f64::max);
    let pmin = model.radii.iter().cloned().fold(f64::MAX, f64::min);

    let large_rate = if kernel { pmax.powi(-2) } else { xi };
    let large = tail_integral(s, c, large_rate, |t| {
        if kernel {
            product_minus_one(model.radii.iter().map(|p| theta_minus_one(t / (p * p))))
        } else {
            let log_theta: f64 =
                model.radii.iter().map(|p| theta_minus_one(t / (p * p)).ln_1p()).sum();
            (log_theta - xi * t).exp()
        }
    });

    let a = s - n / 2.0;
    let dual_lower = PI * PI / c;
    let dual = tail_integral(-a, dual_lower, pmin * pmin, |u| {
        let f = product_minus_one(model.radii.iter().map(|p| theta_minus_one(u * p * p)));
        f * (-xi * PI * PI / u).exp()
    }) * (a * (2.0 * PI.ln())).exp()
        * prefactor;

    let mut polar = Vec::new();
    if kernel {
        polar.push(Polar { coef: -(s * c.ln()).exp(), pole: 0.0 });
        polar.push(Polar { coef: prefactor * (a * c.ln()).exp(), pole: n / 2.0 });
    } else {
        let mut weight = 1.0;
        for m in 0..200 {
            if m > 0 {
                weight *= -xi * c / m as f64;
            }
            let coef = prefactor * weight * (a * c.ln()).exp();
            polar.push(Polar { coef, pole: n / 2.0 - m as f64 });
            if m > 2 && weight.abs() < 1e-18 {
                break;
            }
        }
    }
    Completed { regular: large + dual, polar }
}

/// 1/(Γ(s)(s − p)), finite where p is a non-positive integer.
fn recip_gamma_over(s: Complex64, p: f64) -> Result<Complex64> {
    if p <= 0.0 && p == p.round() {
        let k = (-p) as usize;
        let mut poly = Complex64::new(1.0, 0.0);
        for i in 0..k {
            poly *= s + i as f64;
        }
        return Ok(poly * recip_gamma(s + (k + 1) as f64));
    }
    let d = s - p;
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleEncountered { at: s });
    }
    Ok(recip_gamma(s) / d)
}

/// Whether ζ of this model has a pole at `s`.
pub fn is_zeta_pole(model: &SpectralModel, s: Complex64) -> bool {
    if s.im != 0.0 {
        return false;
    }
    let k = model.n as f64 / 2.0 - s.re;
    if k < 0.0 || k != k.round() {
        return false;
    }
    if model.shift == 0.0 {
        return k == 0.0;
    }
    // poles of Γ(s) cancel against the Γ prefactor
    !(s.re <= 0.0 && s.re == s.re.round())
}

/// ζ(s) = Σ_{λ≠0} λ^{−s}, meromorphically continued.
pub fn spectral_zeta(model: &SpectralModel, s: Complex64) -> Result<Complex64> {
    spectral_zeta_split(model, s, default_split(model))
}

/// As [`spectral_zeta`] with an explicit Mellin split point.
pub fn spectral_zeta_split(model: &SpectralModel, s: Complex64, c: f64) -> Result<Complex64> {
    model.validate()?;
    if is_zeta_pole(model, s) {
        return Err(Error::PoleEncountered { at: s });
    }
    let parts = completed(model, s, c);
    let mut value = recip_gamma(s) * parts.regular;
    for p in &parts.polar {
        value += p.coef * recip_gamma_over(s, p.pole)?;
    }
    Ok(value)
}

/// Γ(s)ζ(s) with an explicit split point.
pub fn completed_zeta(model: &SpectralModel, s: Complex64, c: f64) -> Result<Complex64> {
    let parts = completed(model, s, c);
    let mut value = parts.regular;
    for p in &parts.polar {
        let d = s - p.pole;
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::PoleEncountered { at: s });
        }
        value += p.coef / d;
    }
    Ok(value)
}

/// Epstein-type zeta value. At a pole, `value` holds the finite part and
/// `residue` the residue.
pub fn epstein_zeta(model: &SpectralModel, s: Complex64) -> Result<ZetaValue> {
    if !is_zeta_pole(model, s) {
        let value = spectral_zeta(model, s)?;
        return Ok(ZetaValue { s, value, is_pole: false, residue: Complex64::new(0.0, 0.0) });
    }
    let c = default_split(model);
    let s0 = s.re;
    let parts = completed(model, s, c);
    let mut g0 = parts.regular;
    let mut g_res = Complex64::new(0.0, 0.0);
    for p in &parts.polar {
        if p.pole == s0 {
            // coef(s) = R·c^{s−s0}: its derivative feeds the finite part
            g_res = p.coef;
            g0 += p.coef * c.ln();
        } else {
            g0 += p.coef / (s - p.pole);
        }
    }
    let rg0 = recip_gamma(s);
    let residue = rg0 * g_res;
    let value = rg0 * (g0 - g_res * digamma(s0)?);
    Ok(ZetaValue { s, value, is_pole: true, residue })
}

/// |π^{−s}Γ(s)ζₙ(s) − π^{s−n/2}Γ(n/2−s)ζₙ(n/2−s)| for the unit torus, the two
/// sides evaluated with different Mellin splits.
pub fn functional_equation_residual(model: &SpectralModel, s: Complex64) -> Result<f64> {
    if model.shift != 0.0 || model.radii.iter().any(|p| *p != 1.0) {
        return Err(Error::Unsupported(
            "functional equation is checked on the unshifted unit torus".into(),
        ));
    }
    let n = model.n as f64;
    let dual = Complex64::new(n / 2.0, 0.0) - s;
    let lhs = (-s * PI.ln()).exp() * completed_zeta(model, s, PI)?;
    let rhs = ((s - n / 2.0) * PI.ln()).exp() * completed_zeta(model, dual, 2.0)?;
    Ok((lhs - rhs).norm())
}

/// q_{−s}(x,x): the diagonal of the kernel of Δ^{−s}.
pub fn q_kernel_diag(model: &SpectralModel, s: Complex64) -> Result<QKernelValue> {
    let z = spectral_zeta(model, s)?;
    let x = vec![0.0; model.n];
    Ok(QKernelValue { s, y: x.clone(), x, value: z / model.volume() })
}

/// q_{−s}(x,y) for x ≠ y, entire in s.
pub fn q_kernel_offdiag(model: &SpectralModel, s: Complex64, x: &[f64], y: &[f64]) -> Result<QKernelValue> {
    model.validate()?;
    let phi: Vec<f64> = x.iter().zip(y).map(|(a, b)| wrap_angle(a - b)).collect();
    if model.torus_distance(x, y) == 0.0 {
        return Err(Error::OnDiagonal);
    }
    let value = if s.im == 0.0 {
        offdiag_real(model, s.re, &phi)?
    } else {
        offdiag_quadrature(model, s, &phi)?
    };
    Ok(QKernelValue { s, x: x.to_vec(), y: y.to_vec(), value })
}

/// Squared image distances Σ p_j²(φ_j + 2π l_j)² up to `limit`, ascending.
fn image_distances(model: &SpectralModel, phi: &[f64], limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut l = vec![0i64; model.n];
    fn rec(m: &SpectralModel, phi: &[f64], l: &mut Vec<i64>, d: usize, acc: f64, limit: f64, out: &mut Vec<f64>) {
        if d == l.len() {
            out.push(acc);
            return;
        }
        let p = m.radii[d];
        let span = (limit.sqrt() / (2.0 * PI * p)).ceil() as i64 + 1;
        for v in -span..=span {
            let term = (p * (phi[d] + 2.0 * PI * v as f64)).powi(2);
            if acc + term <= limit {
                l[d] = v;
                rec(m, phi, l, d + 1, acc + term, limit, out);
            }
        }
    }
    rec(model, phi, &mut l, 0, 0.0, limit, &mut out);
    out.sort_by(f64::total_cmp);
    out
}

/// Real s: termwise incomplete-Gamma sums on both sides of the split.
fn offdiag_real(model: &SpectralModel, s: f64, phi: &[f64]) -> Result<Complex64> {
    let n = model.n as f64;
    let xi = model.shift;
    let c = default_split(model);
    let vol = model.volume();

    // large piece: Σ_{λ≠0} cos(k·φ) λ^{−s} Γ(s, λc)
    let mut lam_max = 50.0 / c;
    for _ in 0..6 {
        lam_max = (TAIL_DROP + (s - 1.0).max(0.0) * (lam_max * c).ln().max(0.0) + 2.0 * n) / c;
    }
    let mu_max = (lam_max - xi).max(model.first_nonzero_form());
    let mut terms = collect_lattice(model, mu_max, DEFAULT_LATTICE_BUDGET, |k, form| {
        let lambda = form + xi;
        if lambda == 0.0 {
            return None;
        }
        let phase: f64 = k.iter().zip(phi).map(|(&k, p)| k as f64 * p).sum();
        Some((lambda, phase.cos()))
    })?;
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut large = Neumaier::new();
    for (lambda, cosine) in terms {
        let g = upper_incomplete_gamma(s, lambda * c)?;
        large.add(cosine * g * lambda.powf(-s));
    }

    // small piece: Σ_l Σ_m (−ξ)^m/m! (D²/4)^{s−n/2+m} Γ(n/2−s−m, D²/(4c)), times ∏p π^{n/2}
    let nearest = phi.iter().zip(&model.radii).map(|(f, p)| (p * f).powi(2)).sum::<f64>();
    let images = image_distances(model, phi, nearest + 4.0 * c * (TAIL_DROP + 2.0 * n + s.abs()));
    let prefactor = model.radius_product() * PI.powf(n / 2.0);
    let mut small = Neumaier::new();
    for d2 in images {
        let q = d2 / 4.0;
        let mut weight = 1.0;
        for m in 0..200 {
            if m > 0 {
                weight *= -xi / m as f64;
            }
            let e = s - n / 2.0 + m as f64;
            let term = weight * q.powf(e) * upper_incomplete_gamma(-e, q / c)?;
            small.add(prefactor * term);
            if xi == 0.0 || (m > 2 && term.abs() < 1e-18 * small.value().abs()) {
                break;
            }
        }
    }

    let sc = Complex64::new(s, 0.0);
    let mut total = recip_gamma(sc) * (large.value() + small.value());
    if xi == 0.0 {
        total -= c.powf(s) * recip_gamma(sc + 1.0);
    }
    Ok(total / vol)
}

/// Complex s: quadrature of the phased heat trace on both sides of the split.
fn offdiag_quadrature(model: &SpectralModel, s: Complex64, phi: &[f64]) -> Result<Complex64> {
    let n = model.n as f64;
    let xi = model.shift;
    let kernel = xi == 0.0;
    let c = default_split(model);
    let pmax = model.radii.iter().cloned().fold(f64::MIN, f64::max);

    let large_rate = if kernel { pmax.powi(-2) } else { xi };
    let large = tail_integral(s, c, large_rate, |t| {
        let eps = model
            .radii
            .iter()
            .zip(phi)
            .map(|(p, f)| phased_theta_minus_one(t / (p * p), *f));
        if kernel {
            product_minus_one(eps)
        } else {
            (eps.map(|e| e.ln_1p()).sum::<f64>() - xi * t).exp()
        }
    });

    let nearest = phi.iter().zip(&model.radii).map(|(f, p)| (p * f).powi(2)).sum::<f64>();
    let images = image_distances(model, phi, nearest + 4.0 * c * (TAIL_DROP + 2.0 * n));
    let prefactor = model.radius_product() * PI.powf(n / 2.0);
    let small = head_integral(s, c, nearest / 4.0, |t| {
        let sum: f64 = images.iter().map(|d2| (-d2 / (4.0 * t)).exp()).sum();
        prefactor * t.powf(-n / 2.0) * (-xi * t).exp() * sum
    });

    let mut total = recip_gamma(s) * (large + small);
    if kernel {
        total -= (s * c.ln()).exp() * recip_gamma(s + 1.0);
    }
    Ok(total / model.volume())
}

/// |(ζ_{ξ+h}(s) − ζ_{ξ−h}(s))/(2h) + s ζ_ξ(s+1)|.
pub fn zeta_shift_derivative_check(model: &SpectralModel, s: Complex64, xi: f64, h: f64) -> Result<f64> {
    if !(xi > 0.0 && h > 0.0 && h < xi) {
        return Err(Error::Domain("need 0 < h < xi".into()));
    }
    let up = spectral_zeta(&model.with_shift(xi + h), s)?;
    let down = spectral_zeta(&model.with_shift(xi - h), s)?;
    let rhs = s * spectral_zeta(&model.with_shift(xi), s + 1.0)?;
    Ok(((up - down) / (2.0 * h) + rhs).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NontrivialityReport {
    pub n: usize,
    pub r: String,
    pub j: u32,
    /// ζ_{Δ+ξ}(−rj) along the ξ grid.
    pub samples: Vec<(f64, f64)>,
    pub min_abs: f64,
    pub max_abs: f64,
    pub nonvanishing: bool,
}

/// Evaluates ζ_{Δ+ξ}(−rj) (its finite part where −rj is a pole) on a ξ grid; the coefficient is non-trivial when
/// some sample is non-zero.
pub fn nontriviality_scan(
    model: &SpectralModel,
    xis: &[f64],
    r: &RationalPower,
    j: u32,
) -> Result<NontrivialityReport> {
    if r.times_is_integer(j as i64) {
        return Err(Error::Domain(format!("r·j = {r}·{j} is an integer")));
    }
    let s = Complex64::new(-r.value * j as f64, 0.0);
    let mut samples = Vec::with_capacity(xis.len());
    for &xi in xis {
        if !(xi > 0.0) {
            return Err(Error::Domain("shift grid must be positive".into()));
        }
        // at a pole of the shifted zeta the finite part is the relevant coefficient
        samples.push((xi, epstein_zeta(&model.with_shift(xi), s)?.value.re));
    }
    let min_abs = samples.iter().map(|v| v.1.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = samples.iter().map(|v| v.1.abs()).fold(0.0, f64::max);
    Ok(NontrivialityReport {
        n: model.n,
        r: r.to_string(),
        j,
        samples,
        min_abs,
        max_abs,
        nonvanishing: max_abs > 0.0,
    })
}
