//! Property suites run by the `verify` subcommand.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::asym::{finite_part, predict_coefficients, predict_exponents, TermLabel};
use crate::error::Result;
use crate::fit::{fit_basis, BasisTerm, SamplePoint};
use crate::halfpower::{front_face_profile, lateral_ratios, omega0_second_difference, subordinated_kernel};
use crate::heat::{
    geometric_grid, heat_kernel_direct, heat_kernel_inverse_mellin, heat_kernel_poisson, write_samples_csv,
    ContourParams, KernelSample,
};
use crate::models::{collect_lattice, enumerate_eigenvalues, spectral_tail_bound, SpectralModel};
use crate::power::RationalPower;
use crate::specfun::{
    decay_profile, gamma, gamma_ratio, gamma_real, recip_gamma, upper_incomplete_gamma,
};
use crate::zeta::{functional_equation_residual, q_kernel_offdiag, spectral_zeta};

/// Discrepancy of one property against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub discrepancy: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Outcome {
    fn new(discrepancy: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { discrepancy, tolerance, detail: detail.into() }
    }

    fn flag(ok: bool, detail: impl Into<String>) -> Self {
        Self::new(if ok { 0.0 } else { 1.0 }, 0.5, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
    pub injected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Runs the cheap subset only.
    pub quick: bool,
    /// Pushes every fifth check (offset by the seed) past its tolerance.
    pub fault_seed: Option<u64>,
}

struct Check {
    module: &'static str,
    name: &'static str,
    in_quick: bool,
    run: fn(bool, &mut StdRng) -> Result<Outcome>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit(n: usize, shift: f64) -> SpectralModel {
    SpectralModel::unit(n, shift).expect("valid unit torus")
}

// specfun

fn gamma_duplication(quick: bool, rng: &mut StdRng) -> Result<Outcome> {
    let half = RationalPower::half();
    let count = if quick { 50 } else { 200 };
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let re = rng.random_range(-10.0..10.0);
        let im = rng.random_range(0.1..100.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let s = c(re, im);
        let got = gamma_ratio(s, &half)?;
        let want = (s - 0.5).exp2() * gamma((s + 1.0) / 2.0)? / (2.0 * PI).sqrt();
        worst = worst.max((got - want).norm() / want.norm());
    }
    Ok(Outcome::new(worst, 1e-10, format!("{count} random points")))
}

fn recip_gamma_inverse(_: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let z = c(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
        worst = worst.max((recip_gamma(z) * gamma(z)? - 1.0).norm());
    }
    Ok(Outcome::new(worst, 1e-12, "200 random points in |Re|,|Im| < 30"))
}

fn incomplete_gamma_recurrence(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for z in [-4.5, -3.0, -2.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.25, 5.0] {
        for xi in [0.05, 0.3, 1.0, 2.5, 7.0, 20.0, 45.0] {
            let lhs = upper_incomplete_gamma(z + 1.0, xi)?;
            let rhs = z * upper_incomplete_gamma(z, xi)? + xi.powf(z) * (-xi).exp();
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    Ok(Outcome::new(worst, 1e-12, "z ∈ [−4.5, 5], ξ ∈ [0.05, 45]"))
}

/// Largest |Im s| on the grid and whether the profile is eventually
/// decreasing and below 1e−6 before 10³.
pub fn decay_profile_ok(r: f64, a: f64) -> Result<(bool, f64)> {
    let power = RationalPower::irrational(r)?;
    let grid: Vec<f64> = (1..=4000).map(|i| i as f64 * 0.25).collect();
    let prof = decay_profile(&power, a, 12, &grid)?;
    let peak = prof.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map_or(0, |p| p.0);
    let decreasing = prof[peak..].windows(2).all(|w| w[1] < w[0] || w[0] < 1e-100);
    let below = grid.iter().zip(&prof).find(|(_, v)| **v < 1e-6).map(|(b, _)| *b);
    Ok((decreasing && below.is_some_and(|b| b < 1e3), below.unwrap_or(f64::INFINITY)))
}

fn decay_profiles(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [0.3, 0.5, 0.7] {
        for a in [-3.0, 0.5, 5.0] {
            let (good, below) = decay_profile_ok(r, a)?;
            ok &= good;
            detail.push(format!("r={r},a={a}:{below}"));
        }
    }
    Ok(Outcome::flag(ok, format!("|Im s| where profile < 1e−6: {}", detail.join(" "))))
}

// models

fn eigenvalue_counts(quick: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut mismatches = 0;
    let cases = if quick { 4 } else { 12 };
    for _ in 0..cases {
        let n = rng.random_range(1..=3usize);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.8)).collect();
        let shift = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..2.0) };
        let model = SpectralModel::new(radii.clone(), shift)?;
        let cutoff = rng.random_range(shift + 1.0..100.0);
        let listed = enumerate_eigenvalues(&model, cutoff)?.total_count();
        let bound: Vec<i64> = radii.iter().map(|p| (p * cutoff.sqrt()).ceil() as i64 + 1).collect();
        let mut brute = 0u64;
        let mut k = bound.iter().map(|b| -b).collect::<Vec<_>>();
        'scan: loop {
            if model.eigenvalue(&k) <= cutoff {
                brute += 1;
            }
            for i in 0..n {
                if k[i] < bound[i] {
                    k[i] += 1;
                    continue 'scan;
                }
                k[i] = -bound[i];
            }
            break;
        }
        if brute != listed {
            mismatches += 1;
        }
    }
    Ok(Outcome::new(mismatches as f64, 0.0, format!("{cases} random tori, n ≤ 3, Λ ≤ 100")))
}

fn rescaling_covariance(_: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let n = rng.random_range(1..=3usize);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.6)).collect();
        let scale = rng.random_range(0.5..2.0);
        let base = SpectralModel::new(radii.clone(), 0.0)?;
        let scaled = base.with_radii(radii.iter().map(|p| p * scale).collect());
        let a = enumerate_eigenvalues(&base, 30.0)?;
        let b = enumerate_eigenvalues(&scaled, 30.0 / (scale * scale))?;
        if a.entries.len() != b.entries.len() {
            worst = f64::INFINITY;
            continue;
        }
        for ((la, ma), (lb, mb)) in a.entries.iter().zip(&b.entries) {
            if ma != mb {
                worst = f64::INFINITY;
            }
            worst = worst.max((lb * scale * scale - la).abs() / la.max(1.0));
        }
    }
    Ok(Outcome::new(worst, 1e-12, "spectra of radii p and c·p agree after λ ↦ c²λ"))
}

fn tail_bounds_hold(_: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut violations = 0;
    for _ in 0..8 {
        let n = rng.random_range(1..=3usize);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.5)).collect();
        let model = SpectralModel::new(radii, rng.random_range(0.0..1.0))?;
        let r = rng.random_range(0.3..1.0);
        let t = rng.random_range(0.3..2.0);
        let cutoff = rng.random_range(5.0..20.0);
        let bound = spectral_tail_bound(&model, cutoff, t, r);
        let wide = enumerate_eigenvalues(&model, 4.0 * cutoff)?;
        let omitted: f64 = wide
            .entries
            .iter()
            .filter(|(l, _)| *l > cutoff)
            .map(|(l, m)| *m as f64 * (-t * l.powf(r)).exp())
            .sum();
        if omitted > bound {
            violations += 1;
        }
    }
    Ok(Outcome::new(violations as f64, 0.0, "8 random instances, cutoff enlarged 4×"))
}

// heat

fn kernel_symmetry(_: bool, rng: &mut StdRng) -> Result<Outcome> {
    let model = SpectralModel::new(vec![1.0, 1.3], 0.2)?;
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let y = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let t = rng.random_range(0.3..2.0);
        let a = heat_kernel_direct(&model, 0.6, t, &x, &y, 1e-12)?.value;
        let b = heat_kernel_direct(&model, 0.6, t, &y, &x, 1e-12)?.value;
        worst = worst.max((a - b).abs() / a.abs().max(1e-300));
    }
    Ok(Outcome::new(worst, 1e-14, "eigensum kernel at random pairs"))
}

fn semigroup(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let model = unit(1, 0.0);
    let (t, s, x, y) = (0.4, 0.7, 0.9, -1.3);
    let nodes = 64;
    let mut sum = 0.0;
    for k in 0..nodes {
        let z = 2.0 * PI * k as f64 / nodes as f64;
        sum += heat_kernel_poisson(&model, t, &[x], &[z])?.value * heat_kernel_poisson(&model, s, &[z], &[y])?.value;
    }
    let composed = sum * 2.0 * PI / nodes as f64;
    let direct = heat_kernel_poisson(&model, t + s, &[x], &[y])?.value;
    Ok(Outcome::new((composed - direct).abs(), 1e-10, "∫p_t p_s = p_{t+s} on the circle, 64 nodes"))
}

fn monotone_diagonal(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let model = SpectralModel::new(vec![1.0, 0.8], 0.0)?;
    let p = model.kernel_projection_density();
    let ts = geometric_grid(0.2, 5.0, 1.2);
    let values = ts
        .iter()
        .map(|&t| Ok(heat_kernel_direct(&model, 0.5, t, &[0.0, 0.0], &[0.0, 0.0], 1e-12)?.value - p))
        .collect::<Result<Vec<_>>>()?;
    let ok = values.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome::flag(ok, format!("{} times in [0.2, 5]", ts.len())))
}

fn agree(a: &KernelSample, b: &KernelSample) -> f64 {
    (a.value - b.value).abs() / (a.error_bound + b.error_bound + 1e-15 * a.value.abs())
}

fn method_agreement(quick: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let ts: &[f64] = if quick { &[0.5] } else { &[0.2, 0.5, 1.5] };
    for n in [1usize, 2] {
        let model = SpectralModel::new(vec![1.0, 1.2][..n].to_vec(), 0.0)?;
        let z = vec![0.0; n];
        let off = vec![0.7; n];
        for &t in ts {
            let d1 = heat_kernel_direct(&model, 1.0, t, &z, &off, 1e-12)?;
            let p1 = heat_kernel_poisson(&model, t, &z, &off)?;
            worst = worst.max(agree(&d1, &p1));
            let dh = heat_kernel_direct(&model, 0.5, t, &z, &off, 1e-12)?;
            let sh = subordinated_kernel(&model, t, &z, &off, 1e-12)?;
            worst = worst.max(agree(&dh, &sh));
            let r = RationalPower::half();
            let dd = heat_kernel_direct(&model, 0.5, t, &z, &z, 1e-12)?;
            let im = heat_kernel_inverse_mellin(&model, &r, t, &z, &ContourParams::for_model(&model, &r))?;
            worst = worst.max(agree(&dd, &im));
        }
    }
    Ok(Outcome::new(worst, 1.0, "|difference| / (sum of error bounds), worst pair"))
}

// zeta

fn zeta_residues(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 1..=3usize {
        let model = unit(n, 0.0);
        let s0 = n as f64 / 2.0;
        let want = PI.powf(s0) / gamma_real(s0)?;
        // (s − s₀)ζ(s) is analytic at s₀; its circle mean is the residue
        let nodes = 16;
        let mut mean = Complex64::new(0.0, 0.0);
        for k in 0..nodes {
            let w = Complex64::from_polar(0.1, 2.0 * PI * (k as f64 + 0.5) / nodes as f64);
            mean += w * spectral_zeta(&model, w + s0)?;
        }
        mean /= nodes as f64;
        worst = worst.max((mean.re - want).abs() + mean.im.abs());
    }
    Ok(Outcome::new(worst, 1e-8, "residue at n/2 vs π^{n/2}/Γ(n/2), n = 1..3"))
}

fn trivial_zeros(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for k in 1..=4 {
            worst = worst.max(spectral_zeta(&unit(n, 0.0), c(-(k as f64), 0.0))?.norm());
        }
    }
    Ok(Outcome::new(worst, 1e-8, "|ζₙ(−k)|, n = 1..3, k = 1..4"))
}

/// Worst functional-equation residual over a 20-point grid in the critical strip.
pub fn functional_equation_worst(n: usize) -> Result<f64> {
    let model = unit(n, 0.0);
    let half = n as f64 / 2.0;
    let mut worst: f64 = 0.0;
    for frac in [0.15, 0.35, 0.6, 0.85] {
        for im in [0.0, 0.7, 2.5, 6.0, 13.0] {
            let s = c(frac * half, im);
            if s == c(half / 2.0, 0.0) {
                continue;
            }
            worst = worst.max(functional_equation_residual(&model, s)?);
        }
    }
    Ok(worst)
}

fn functional_equation(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let worst = (1..=3).map(functional_equation_worst).collect::<Result<Vec<_>>>()?;
    let w = worst.iter().cloned().fold(0.0, f64::max);
    let list: Vec<String> = worst.iter().map(|v| format!("{v:.2e}")).collect();
    Ok(Outcome::new(w, 1e-9, format!("20-point strip grid, n = 1..3: {}", list.join(" "))))
}

fn offdiag_entire(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for model in [unit(1, 0.0), unit(2, 0.0), SpectralModel::new(vec![1.0, 1.4], 0.0)?] {
        let n = model.n;
        let x = vec![0.9; n];
        let y = vec![0.0; n];
        for k in 1..=3 {
            worst = worst.max(q_kernel_offdiag(&model, c(-(k as f64), 0.0), &x, &y)?.value.norm());
        }
    }
    Ok(Outcome::new(worst, 1e-8, "|q_{k}(x,y)|, k = 1..3, x ≠ y"))
}

fn brute_zeta(model: &SpectralModel, s: f64, cutoff: f64) -> Result<f64> {
    let mut terms = collect_lattice(model, cutoff - model.shift, u64::MAX, |_, f| {
        let l = f + model.shift;
        (l > 0.0).then(|| l.powf(-s))
    })?;
    terms.sort_by(|a, b| a.total_cmp(b));
    let n = model.n as f64;
    // ∫_Λ^∞ λ^{−s} dN with N(λ) ≈ ω_n ∏p (λ − ξ)^{n/2}; leading order is enough here
    let tail = crate::models::unit_ball_volume(model.n) * model.radius_product() * n / 2.0 * cutoff.powf(n / 2.0 - s)
        / (s - n / 2.0);
    Ok(terms.iter().sum::<f64>() + tail)
}

fn zeta_matches_eigensums(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let cutoff = 1e4;
    for (model, s) in [
        (unit(1, 0.0), 3.0),
        (unit(2, 0.0), 4.0),
        (SpectralModel::new(vec![1.0, 1.3], 0.5)?, 4.5),
        (SpectralModel::new(vec![0.8, 1.0, 1.1], 0.0)?, 5.0),
    ] {
        let continued = spectral_zeta(&model, c(s, 0.0))?.re;
        let direct = brute_zeta(&model, s, cutoff)?;
        worst = worst.max(rel(direct, continued));
    }
    Ok(Outcome::new(worst, 1e-10, format!("Re s > n/2, eigensum cutoff {cutoff}")))
}

// asym

fn template_disjointness(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut bad = 0;
    for n in 1..=5 {
        for b in 2..=8u32 {
            for a in 1..b {
                let Ok(r) = RationalPower::rational(a, b) else { continue };
                if r.alpha != a {
                    continue;
                }
                let t = predict_exponents(n, &r, 10.0)?;
                for (i, x) in t.terms.iter().enumerate() {
                    for y in &t.terms[i + 1..] {
                        if (x.exponent.value() - y.exponent.value()).abs() < 1e-12 && x.log_power == y.log_power {
                            bad += 1;
                        }
                    }
                }
                let logs = t.terms.iter().any(|t| t.log_power == 1);
                if logs != (n % 2 == 1 && b % 2 == 0) {
                    bad += 1;
                }
            }
        }
    }
    Ok(Outcome::new(bad as f64, 0.0, "n ≤ 5, r = a/b with b ≤ 8"))
}

fn template_degeneration(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut bad = 0;
    for n in [1usize, 3, 5] {
        for b in [3u32, 5, 7, 9] {
            for a in 1..b {
                let Ok(r) = RationalPower::rational(a, b) else { continue };
                if r.beta != b {
                    continue;
                }
                let t = predict_exponents(n, &r, 20.0)?;
                bad += t
                    .terms
                    .iter()
                    .filter(|t| {
                        let v = t.exponent.value();
                        t.label == TermLabel::Integer && v > 0.0 && (v as u32).is_multiple_of(b)
                    })
                    .count();
            }
        }
    }
    Ok(Outcome::new(bad as f64, 0.0, "β odd: no lβ exponents"))
}

fn finite_part_residues(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut fact = 1.0;
    for k in 0..=5 {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let l = finite_part(gamma, c(-(k as f64), 0.0), 0.25)?;
        worst = worst.max((l.residue - sign / fact).norm());
    }
    Ok(Outcome::new(worst, 1e-10, "Res Γ at −k, k = 0..5"))
}

fn coth_series(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let model = unit(1, 0.0);
    let r = RationalPower::half();
    let template = predict_exponents(1, &r, 5.0)?;
    let report = predict_coefficients(&model, &r, &template, &[0.0])?;
    let want = [
        (-1.0, 0, 1.0 / PI),
        (1.0, 0, 1.0 / (12.0 * PI)),
        (1.0, 1, 0.0),
        (3.0, 0, -1.0 / (720.0 * PI)),
        (3.0, 1, 0.0),
        (5.0, 0, 1.0 / (30240.0 * PI)),
        (5.0, 1, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (e, lp, v) in want {
        let got = report.row(e, lp).map_or(f64::INFINITY, |r| r.predicted);
        worst = worst.max((got - v).abs());
    }
    Ok(Outcome::new(worst, 1e-10, "predicted series vs coth(t/2)/(2π) through t⁵"))
}

// fit

fn fit_exact_recovery(quick: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for _ in 0..(if quick { 8 } else { 40 }) {
        let n = rng.random_range(1..=3usize);
        let r = [RationalPower::half(), RationalPower::rational(1, 3)?, RationalPower::rational(3, 4)?]
            [rng.random_range(0..3usize)];
        let template = predict_exponents(n, &r, 8.0)?;
        let k = rng.random_range(1..=8usize).min(template.terms.len());
        let basis: Vec<BasisTerm> = template.terms[..k]
            .iter()
            .map(|t| BasisTerm { exponent: t.exponent, log_power: t.log_power })
            .collect();
        let coefs: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ts = geometric_grid(0.05, 1.0, (20.0f64).powf(1.0 / (10 * k - 1) as f64));
        let points: Vec<SamplePoint> = ts
            .iter()
            .map(|&t| {
                let terms: Vec<f64> = basis.iter().zip(&coefs).map(|(b, c)| c * b.eval(t)).collect();
                let size: f64 = terms.iter().map(|v| v.abs()).sum();
                SamplePoint { t, value: terms.iter().sum(), error_bound: 2.0 * f64::EPSILON * size }
            })
            .collect();
        let fit = fit_basis(&points, &basis)?;
        let scale = coefs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (term, c) in fit.terms.iter().zip(&coefs) {
            worst = worst.max((term.coefficient - c).abs() / scale);
        }
    }
    Ok(Outcome::new(worst, 1e-9, "random templates with ≤ 8 terms, 10× oversampled"))
}

fn coth_points(t_min: f64, t_max: f64) -> Vec<SamplePoint> {
    geometric_grid(t_min, t_max, 1.05)
        .into_iter()
        .map(|t| SamplePoint { t, value: 1.0 / (2.0 * PI * (t / 2.0).tanh()), error_bound: 1e-15 })
        .collect()
}

fn fit_bias_control(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let r = RationalPower::half();
    let template = predict_exponents(1, &r, 3.0)?;
    let basis: Vec<BasisTerm> =
        template.terms.iter().map(|t| BasisTerm { exponent: t.exponent, log_power: t.log_power }).collect();
    let full = fit_basis(&coth_points(0.01, 0.4), &basis)?;
    let half = fit_basis(&coth_points(0.01, 0.2), &basis)?;
    let mut worst: f64 = 0.0;
    for (a, b) in full.terms.iter().zip(&half.terms) {
        worst = worst.max((a.coefficient - b.coefficient).abs() / a.uncertainty.max(b.uncertainty));
    }
    Ok(Outcome::new(worst, 1.0, "coefficient shift / reported uncertainty"))
}

fn fit_permutation(_: bool, rng: &mut StdRng) -> Result<Outcome> {
    let mut points = coth_points(0.02, 0.5);
    let basis = [BasisTerm::power(-1.0, 0), BasisTerm::power(1.0, 0), BasisTerm::power(1.0, 1), BasisTerm::power(3.0, 0)];
    let a = fit_basis(&points, &basis)?;
    for i in (1..points.len()).rev() {
        points.swap(i, rng.random_range(0..=i));
    }
    let b = fit_basis(&points, &basis)?;
    Ok(Outcome::flag(a == b, "shuffled samples give identical results"))
}

// halfpower

fn subordination_equivalence(quick: bool, _: &mut StdRng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let ts: &[f64] = if quick { &[0.05, 1.0] } else { &[0.05, 0.2, 0.7, 2.0, 5.0] };
    for n in [1usize, 2] {
        let model = unit(n, 0.0);
        let z = vec![0.0; n];
        for y in [vec![0.0; n], vec![1.1; n]] {
            for &t in ts {
                let a = subordinated_kernel(&model, t, &z, &y, 1e-11)?;
                let b = heat_kernel_direct(&model, 0.5, t, &z, &y, 1e-11)?;
                worst = worst.max(agree(&a, &b));
            }
        }
    }
    Ok(Outcome::new(worst, 1.0, "|difference| / (sum of error bounds)"))
}

fn lateral_vanishing(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let model = unit(1, 0.0);
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let r = lateral_ratios(&model, &[PI / 2.0], &[0.0], &ts)?;
    let steps: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let converging = steps.windows(2).all(|w| w[1] < w[0]);
    let bounded = r.iter().all(|v| v.is_finite() && v.abs() < 1.0);
    Ok(Outcome::flag(converging && bounded, format!("h/t at φ = π/2: {r:.6?}")))
}

fn front_face_order(quick: bool, _: &mut StdRng) -> Result<Outcome> {
    let grid: Vec<f64> = (0..5).map(|k| 0.2 / 2f64.powi(k)).collect();
    let mut spread: f64 = 0.0;
    let omegas: &[[f64; 3]] = if quick { &[[1.0, 0.0, 0.0]] } else { &[[1.0, 0.0, 0.0], [0.8, 0.6, 0.0], [0.6, 0.48, 0.64]] };
    for om in omegas {
        let p = front_face_profile(&unit(2, 0.0), om, &grid)?;
        let max = p.scaled.iter().cloned().fold(0.0, f64::max);
        spread = spread.max(max / p.predicted_limit);
    }
    let odd_grid: Vec<f64> = (0..30).map(|k| 0.3 * 0.85f64.powi(k)).collect();
    let odd = front_face_profile(&unit(1, 1.0), &[0.8, 0.6], &odd_grid)?;
    let ok = spread < 2.0 && odd.log_coefficient.is_some_and(f64::is_finite);
    Ok(Outcome::flag(ok, format!("n=2 max ρ²h/ω₀ over limit {spread:.4}; n=1 fitted log {:?}", odd.log_coefficient)))
}

fn omega0_smoothness(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let model = unit(2, 0.0);
    let seconds = [0.08, 0.04, 0.02, 0.01]
        .iter()
        .map(|&rho| omega0_second_difference(&model, rho, 0.6, &[1.0, 0.0], 1e-2))
        .collect::<Result<Vec<_>>>()?;
    let max = seconds.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let ok = seconds.iter().all(|v| v.is_finite()) && max <= 2.0 * seconds[0].abs() + 1.0;
    Ok(Outcome::flag(ok, format!("∂²/∂ω₀² of ρ²h at ρ = 0.08..0.01: {seconds:.4?}")))
}

// cli

fn csv_bytes(threads: usize) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::Unsupported(e.to_string()))?;
    pool.install(|| {
        let model = SpectralModel::new(vec![1.0, 1.2, 0.9], 0.0)?;
        let z = [0.0; 3];
        let samples = geometric_grid(0.5, 2.0, 1.25)
            .into_iter()
            .map(|t| heat_kernel_direct(&model, 0.5, t, &z, &z, 1e-12))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        write_samples_csv(&mut out, &samples)?;
        Ok(out)
    })
}

fn json_bytes(threads: usize) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::Unsupported(e.to_string()))?;
    pool.install(|| {
        let model = SpectralModel::new(vec![1.0, 1.3], 0.4)?;
        let r = RationalPower::rational(1, 3)?;
        let template = predict_exponents(2, &r, 3.0)?;
        let report = predict_coefficients(&model, &r, &template, &[0.0, 0.0])?;
        Ok(serde_json::to_vec_pretty(&report)?)
    })
}

fn deterministic_output(_: bool, _: &mut StdRng) -> Result<Outcome> {
    let csv_same = csv_bytes(1)? == csv_bytes(4)? && csv_bytes(4)? == csv_bytes(4)?;
    let json_same = json_bytes(1)? == json_bytes(4)? && json_bytes(4)? == json_bytes(4)?;
    Ok(Outcome::flag(
        csv_same && json_same,
        format!("1 vs 4 threads and repeated runs: heat CSV identical {csv_same}, prediction JSON identical {json_same}"),
    ))
}

fn exit_codes(_: bool, _: &mut StdRng) -> Result<Outcome> {
    use crate::cli::{run, EXIT_OK, EXIT_USAGE, EXIT_VERDICT};
    let dir = std::env::temp_dir().join(format!("fracheat-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let out = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let cases: [(Vec<String>, i32); 4] = [
        (["nonlocality", "--r", "1/2", "--p", "2", "--out"].iter().map(|s| s.to_string()).chain([out("a.json")]).collect(), EXIT_OK),
        (
            ["fit", "--r", "1/3", "--t-geom", "0.05:0.3:1.2", "--max-exponent", "1", "--rel-tol", "0", "--abs-floor", "0", "--out"]
                .iter()
                .map(|s| s.to_string())
                .chain([out("b.json")])
                .collect(),
            EXIT_VERDICT,
        ),
        (["heat", "--r", "3/2"].iter().map(|s| s.to_string()).collect(), EXIT_USAGE),
        (["nonlocality", "--r", "1/2", "--j", "2"].iter().map(|s| s.to_string()).collect(), EXIT_USAGE),
    ];
    let mut wrong = Vec::new();
    for (args, want) in &cases {
        let got = run(std::iter::once("fracheat".to_string()).chain(args.iter().cloned()));
        if got != *want {
            wrong.push(format!("{} → {got} (want {want})", args[0]));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(Outcome::new(wrong.len() as f64, 0.0, if wrong.is_empty() { "0 ok, 1 verdict, 2 usage".to_string() } else { wrong.join("; ") }))
}

const CHECKS: &[Check] = &[
    Check { module: "specfun", name: "duplication formula", in_quick: true, run: gamma_duplication },
    Check { module: "specfun", name: "reciprocal gamma", in_quick: true, run: recip_gamma_inverse },
    Check { module: "specfun", name: "incomplete gamma recurrence", in_quick: true, run: incomplete_gamma_recurrence },
    Check { module: "specfun", name: "gamma-ratio decay", in_quick: true, run: decay_profiles },
    Check { module: "models", name: "eigenvalue counts", in_quick: true, run: eigenvalue_counts },
    Check { module: "models", name: "rescaling covariance", in_quick: true, run: rescaling_covariance },
    Check { module: "models", name: "tail bound", in_quick: true, run: tail_bounds_hold },
    Check { module: "heat", name: "symmetry", in_quick: true, run: kernel_symmetry },
    Check { module: "heat", name: "semigroup", in_quick: true, run: semigroup },
    Check { module: "heat", name: "monotone diagonal", in_quick: true, run: monotone_diagonal },
    Check { module: "heat", name: "method agreement", in_quick: true, run: method_agreement },
    Check { module: "zeta", name: "residue at n/2", in_quick: true, run: zeta_residues },
    Check { module: "zeta", name: "trivial zeros", in_quick: true, run: trivial_zeros },
    Check { module: "zeta", name: "functional equation", in_quick: true, run: functional_equation },
    Check { module: "zeta", name: "off-diagonal entirety", in_quick: true, run: offdiag_entire },
    Check { module: "zeta", name: "continuation vs eigensum", in_quick: true, run: zeta_matches_eigensums },
    Check { module: "asym", name: "template disjointness", in_quick: true, run: template_disjointness },
    Check { module: "asym", name: "exponent degeneration", in_quick: true, run: template_degeneration },
    Check { module: "asym", name: "finite-part residues", in_quick: true, run: finite_part_residues },
    Check { module: "asym", name: "coth series", in_quick: true, run: coth_series },
    Check { module: "fit", name: "exact recovery", in_quick: true, run: fit_exact_recovery },
    Check { module: "fit", name: "bias control", in_quick: true, run: fit_bias_control },
    Check { module: "fit", name: "permutation invariance", in_quick: true, run: fit_permutation },
    Check { module: "halfpower", name: "subordination equivalence", in_quick: true, run: subordination_equivalence },
    Check { module: "halfpower", name: "lateral vanishing", in_quick: true, run: lateral_vanishing },
    Check { module: "halfpower", name: "front-face order", in_quick: false, run: front_face_order },
    Check { module: "halfpower", name: "omega0 smoothness", in_quick: false, run: omega0_smoothness },
    Check { module: "cli", name: "deterministic output", in_quick: true, run: deterministic_output },
    Check { module: "cli", name: "exit codes", in_quick: true, run: exit_codes },
];

/// Runs the property suites; a check that errors counts as a failure.
pub fn run_suite(options: VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (i, check) in CHECKS.iter().enumerate() {
        if options.quick && !check.in_quick {
            continue;
        }
        let injected = options.fault_seed.is_some_and(|s| (i as u64 + s).is_multiple_of(5));
        let mut rng = StdRng::seed_from_u64(0x5eed ^ i as u64);
        let t0 = Instant::now();
        let outcome = (check.run)(options.quick, &mut rng);
        let seconds = t0.elapsed().as_secs_f64();
        let (mut discrepancy, tolerance, detail) = match outcome {
            Ok(o) => (o.discrepancy, o.tolerance, o.detail),
            Err(e) => (f64::INFINITY, 0.0, format!("error: {e}")),
        };
        if injected {
            discrepancy += 2.0 * tolerance + 1.0;
        }
        checks.push(CheckResult {
            module: check.module.to_string(),
            name: check.name.to_string(),
            passed: discrepancy <= tolerance,
            discrepancy,
            tolerance,
            detail,
            seconds,
            injected,
        });
    }
    let all_pass = checks.iter().all(|c| c.passed);
    VerifyReport { quick: options.quick, checks, all_pass, seconds: start.elapsed().as_secs_f64() }
}

impl VerifyReport {
    /// One `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}::{} discrepancy={:.3e} tol={:.1e} ({:.2}s){} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.module,
                    c.name,
                    c.discrepancy,
                    c.tolerance,
                    c.seconds,
                    if c.injected { " [injected]" } else { "" },
                    c.detail
                )
            })
            .collect()
    }
}
