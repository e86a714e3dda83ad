//! Flat tori (S¹)ⁿ with per-factor radii and a scalar spectral shift.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma_real, upper_incomplete_gamma};

/// Default cap on the number of lattice points a single enumeration may visit.
pub const DEFAULT_LATTICE_BUDGET: u64 = 100_000_000;

/// Δ + ξ on the torus ∏ ℝ/(2π p_j ℤ), written in angle coordinates θ ∈ [0, 2π)ⁿ.
///
/// Eigenfunctions are e^{ik·θ}/√vol with eigenvalues Σ (k_j/p_j)² + ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub n: usize,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub shift: f64,
}

impl SpectralModel {
    pub fn new(radii: Vec<f64>, shift: f64) -> Result<Self> {
        let m = Self { n: radii.len(), radii, shift };
        m.validate()?;
        Ok(m)
    }

    /// Unit-radius torus of dimension `n`.
    pub fn unit(n: usize, shift: f64) -> Result<Self> {
        Self::new(vec![1.0; n], shift)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if self.radii.len() != self.n {
            return Err(Error::InvalidModel(format!(
                "{} radii given for n = {}",
                self.radii.len(),
                self.n
            )));
        }
        if self.radii.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidModel("radii must be positive".into()));
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::InvalidModel("shift must be non-negative".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        Self { shift, ..self.clone() }
    }

    pub fn with_radii(&self, radii: Vec<f64>) -> Self {
        Self { n: radii.len(), radii, ..self.clone() }
    }

    /// ∏ p_j.
    pub fn radius_product(&self) -> f64 {
        self.radii.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.radii.iter().map(|p| 2.0 * PI * p).product()
    }

    /// Σ (k_j/p_j)², the shift not included.
    pub fn quadratic_form(&self, k: &[i64]) -> f64 {
        k.iter().zip(&self.radii).map(|(&k, p)| (k as f64 / p).powi(2)).sum()
    }

    pub fn eigenvalue(&self, k: &[i64]) -> f64 {
        self.quadratic_form(k) + self.shift
    }

    /// Smallest non-zero value of the quadratic form.
    pub fn first_nonzero_form(&self) -> f64 {
        self.radii.iter().map(|p| p.powi(-2)).fold(f64::INFINITY, f64::min)
    }

    /// Half-diagonal of a unit lattice cell in the scaled metric.
    pub fn cell_half_diagonal(&self) -> f64 {
        0.5 * self.radii.iter().map(|p| p.powi(-2)).sum::<f64>().sqrt()
    }

    /// Upper bound on #{k : Σ (k_j/p_j)² ≤ μ}.
    pub fn count_bound(&self, mu: f64) -> f64 {
        let c = self.cell_half_diagonal();
        unit_ball_volume(self.n) * self.radius_product() * (mu.max(0.0).sqrt() + c).powi(self.n as i32)
    }

    pub fn kernel_projection_density(&self) -> f64 {
        if self.shift == 0.0 {
            1.0 / self.volume()
        } else {
            0.0
        }
    }

    pub fn heat_coefficients(&self, j_max: usize) -> HeatCoefficients {
        let a0 = (4.0 * PI).powf(-(self.n as f64) / 2.0);
        let mut values = Vec::with_capacity(j_max + 1);
        let mut term = a0;
        for j in 0..=j_max {
            if j > 0 {
                term *= -self.shift / j as f64;
            }
            values.push(term);
        }
        HeatCoefficients { values }
    }

    /// Geodesic distance between two angle-coordinate points.
    pub fn torus_distance(&self, theta: &[f64], theta_prime: &[f64]) -> f64 {
        theta
            .iter()
            .zip(theta_prime)
            .zip(&self.radii)
            .map(|((a, b), p)| (p * wrap_angle(a - b)).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Representative of `x` modulo 2π in [−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let y = x - two_pi * (x / two_pi).round();
    y.clamp(-PI, PI)
}

pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_real(n as f64 / 2.0 + 1.0).expect("positive argument")
}

/// a_j in the normalization p_t(x,x) ~ t^{−n/2} Σ a_j t^j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCoefficients {
    pub values: Vec<f64>,
}

impl HeatCoefficients {
    /// a_j, zero beyond the stored depth is not assumed: callers size the table.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }
}

/// Visits every k ∈ ℤⁿ with Σ (k_j/p_j)² ≤ `mu_max`, slab by slab in k₀,
/// collecting `f(k, form)` outputs in a deterministic order.
pub fn collect_lattice<T, F>(model: &SpectralModel, mu_max: f64, budget: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[i64], f64) -> Option<T> + Sync,
{
    let estimate = model.count_bound(mu_max);
    if estimate > budget as f64 {
        return Err(Error::CutoffTooLarge { estimated: estimate, budget });
    }
    let p0 = model.radii[0];
    let k0_max = (p0 * mu_max.max(0.0).sqrt()).floor() as i64;
    let slabs: Vec<Vec<T>> = (-k0_max..=k0_max)
        .into_par_iter()
        .map(|k0| {
            let mut out = Vec::new();
            let mut k = vec![0i64; model.n];
            k[0] = k0;
            let used = (k0 as f64 / p0).powi(2);
            if used <= mu_max {
                visit(model, 1, &mut k, used, mu_max, &f, &mut out);
            }
            out
        })
        .collect();
    Ok(slabs.into_iter().flatten().collect())
}

fn visit<T, F>(
    model: &SpectralModel,
    dim: usize,
    k: &mut Vec<i64>,
    used: f64,
    mu_max: f64,
    f: &F,
    out: &mut Vec<T>,
) where
    F: Fn(&[i64], f64) -> Option<T>,
{
    if dim == model.n {
        if let Some(v) = f(k, used) {
            out.push(v);
        }
        return;
    }
    let p = model.radii[dim];
    let kmax = (p * (mu_max - used).max(0.0).sqrt()).floor() as i64;
    for kj in -kmax..=kmax {
        let next = used + (kj as f64 / p).powi(2);
        if next <= mu_max {
            k[dim] = kj;
            visit(model, dim + 1, k, next, mu_max, f, out);
        }
    }
    k[dim] = 0;
}

/// Exact grouping keys for rational radii: Σ k_j² w_j with integer weights w_j
/// proportional to 1/p_j².
fn exact_weights(model: &SpectralModel) -> Option<(Vec<i128>, f64)> {
    let inv: Vec<f64> = model.radii.iter().map(|p| p.powi(-2)).collect();
    let mut fracs = Vec::new();
    for &x in &inv {
        fracs.push(small_fraction(x)?);
    }
    let lcm = fracs.iter().fold(1i128, |acc, &(_, d)| num_integer::lcm(acc, d));
    let weights: Vec<i128> = fracs.iter().map(|&(n, d)| n * (lcm / d)).collect();
    if weights.iter().any(|w| *w > 1 << 40) {
        return None;
    }
    Some((weights, 1.0 / lcm as f64))
}

/// Continued-fraction recovery of x = n/d with d ≤ 10⁶, if exact to 1e−15.
fn small_fraction(x: f64) -> Option<(i128, i128)> {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > 1_000_000 {
            return None;
        }
        if ((h2 as f64 / k2 as f64) - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac == 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

/// Eigenvalues with multiplicities up to a cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueList {
    pub entries: Vec<(f64, u64)>,
    pub cutoff: f64,
    /// Time and power at which `tail_bound` was evaluated.
    pub tail_t: f64,
    pub tail_r: f64,
    /// Bound on Σ_{λ > cutoff} e^{−t λ^r}.
    pub tail_bound: f64,
}

impl EigenvalueList {
    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn multiplicity(&self, lambda: f64) -> u64 {
        self.entries
            .iter()
            .find(|(l, _)| (l - lambda).abs() <= 1e-12 * lambda.abs().max(1.0))
            .map_or(0, |e| e.1)
    }

    /// Re-evaluates the tail bound at another (t, r).
    pub fn with_tail(mut self, model: &SpectralModel, t: f64, r: f64) -> Self {
        self.tail_t = t;
        self.tail_r = r;
        self.tail_bound = spectral_tail_bound(model, self.cutoff, t, r);
        self
    }
}

/// Rigorous bound on Σ_{λ_k > cutoff} e^{−t λ_k^r}, from
/// N(λ) ≤ ω_n ∏p_j (√λ + c)ⁿ and integration by parts.
pub fn spectral_tail_bound(model: &SpectralModel, cutoff: f64, t: f64, r: f64) -> f64 {
    let n = model.n;
    let c = model.cell_half_diagonal();
    let x = t * cutoff.powf(r);
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..=n {
        if i > 0 {
            binom *= (n - i + 1) as f64 / i as f64;
        }
        let z = 1.0 + i as f64 / (2.0 * r);
        let g = upper_incomplete_gamma(z, x).unwrap_or(f64::INFINITY);
        total += binom * c.powi((n - i) as i32) * t.powf(-(i as f64) / (2.0 * r)) * g;
    }
    unit_ball_volume(n) * model.radius_product() * total
}

pub fn enumerate_eigenvalues(model: &SpectralModel, cutoff: f64) -> Result<EigenvalueList> {
    enumerate_eigenvalues_with_budget(model, cutoff, DEFAULT_LATTICE_BUDGET)
}

pub fn enumerate_eigenvalues_with_budget(
    model: &SpectralModel,
    cutoff: f64,
    budget: u64,
) -> Result<EigenvalueList> {
    model.validate()?;
    if !(cutoff > model.shift) {
        return Err(Error::Domain(format!("cutoff {cutoff} must exceed the shift {}", model.shift)));
    }
    let mu_max = cutoff - model.shift;
    let entries = match exact_weights(model) {
        Some((w, unit)) => {
            let mut keys = collect_lattice(model, mu_max * (1.0 + 1e-14), budget, |k, _| {
                Some(k.iter().zip(&w).map(|(&k, w)| (k as i128) * (k as i128) * w).sum::<i128>())
            })?;
            keys.par_sort_unstable();
            let limit = mu_max / unit;
            group(keys.into_iter().filter(|&k| (k as f64) <= limit * (1.0 + 1e-14)), |a, b| a == b)
                .into_iter()
                .map(|(key, m)| (key as f64 * unit + model.shift, m))
                .collect()
        }
        None => {
            let mut vals = collect_lattice(model, mu_max, budget, |_, mu| Some(mu))?;
            vals.par_sort_unstable_by(f64::total_cmp);
            group(vals.into_iter(), |a: &f64, b: &f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
                .into_iter()
                .map(|(mu, m)| (mu + model.shift, m))
                .collect()
        }
    };
    let list = EigenvalueList { entries, cutoff, tail_t: 1.0, tail_r: 1.0, tail_bound: 0.0 };
    Ok(list.with_tail(model, 1.0, 1.0))
}

fn group<T: Copy, I: Iterator<Item = T>>(it: I, same: impl Fn(&T, &T) -> bool) -> Vec<(T, u64)> {
    let mut out: Vec<(T, u64)> = Vec::new();
    for v in it {
        match out.last_mut() {
            Some((head, m)) if same(head, &v) => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_spectrum() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let l = enumerate_eigenvalues(&m, 4.5).unwrap();
        assert_eq!(l.entries, vec![(0.0, 1), (1.0, 2), (4.0, 2)]);
    }

    #[test]
    fn two_dimensional_spectrum() {
        let m = SpectralModel::unit(2, 0.0).unwrap();
        let l = enumerate_eigenvalues(&m, 2.5).unwrap();
        assert_eq!(l.entries, vec![(0.0, 1), (1.0, 4), (2.0, 4)]);
        let l = enumerate_eigenvalues(&m, 26.0).unwrap();
        let brute = (-5i64..=5)
            .flat_map(|a| (-5i64..=5).map(move |b| a * a + b * b))
            .filter(|&s| s == 25)
            .count() as u64;
        assert_eq!(brute, 12);
        assert_eq!(l.multiplicity(25.0), brute);
    }

    #[test]
    fn projection_density_and_volume() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        assert!((m.kernel_projection_density() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let m = SpectralModel::new(vec![1.0, 2.0], 0.0).unwrap();
        assert!((m.kernel_projection_density() - 1.0 / (8.0 * PI * PI)).abs() < 1e-17);
        assert_eq!(m.with_shift(0.5).kernel_projection_density(), 0.0);
    }

    #[test]
    fn heat_coefficient_values() {
        let a = SpectralModel::unit(1, 0.0).unwrap().heat_coefficients(2);
        assert!((a.get(0) - 0.5 / PI.sqrt()).abs() < 1e-16);
        assert_eq!((a.get(1), a.get(2)), (0.0, 0.0));
        let a = SpectralModel::unit(2, 0.0).unwrap().heat_coefficients(0);
        assert!((a.get(0) - 0.25 / PI).abs() < 1e-16);
        let a = SpectralModel::unit(1, 1.0).unwrap().heat_coefficients(1);
        assert!((a.get(1) + 0.5 / PI.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn distances() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        assert!((m.torus_distance(&[0.0], &[PI]) - PI).abs() < 1e-15);
        assert!((m.torus_distance(&[0.0], &[1.5 * PI]) - PI / 2.0).abs() < 1e-15);
        let m = SpectralModel::new(vec![1.0, 2.0], 0.0).unwrap();
        let brute = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| (a, b)))
            .map(|(a, b)| {
                let d0 = PI + 2.0 * PI * a as f64;
                let d1 = 2.0 * (PI + 2.0 * PI * b as f64);
                (d0 * d0 + d1 * d1).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((m.torus_distance(&[0.0, 0.0], &[PI, PI]) - brute).abs() < 1e-14);
        assert!((brute - (5.0 * PI * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn irrational_radii_group_by_tolerance() {
        let m = SpectralModel::new(vec![1.0, 2f64.sqrt()], 0.3).unwrap();
        let l = enumerate_eigenvalues(&m, 10.0).unwrap();
        assert_eq!(l.multiplicity(0.3), 1);
        assert_eq!(l.multiplicity(0.3 + 0.5), 2);
        assert_eq!(l.multiplicity(1.3 + 0.5), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let m = SpectralModel::unit(3, 0.0).unwrap();
        let e = enumerate_eigenvalues_with_budget(&m, 1e4, 1000).unwrap_err();
        assert!(matches!(e, Error::CutoffTooLarge { .. }));
    }

    #[test]
    fn tail_bound_dominates_omitted_mass() {
        for (radii, shift, r, t) in [
            (vec![1.0], 0.0, 0.5, 0.3),
            (vec![1.0, 1.5], 0.2, 0.5, 0.5),
            (vec![0.7, 1.0, 1.3], 0.0, 0.7, 0.4),
            (vec![1.0, 1.0], 1.0, 1.0, 0.1),
        ] {
            let m = SpectralModel::new(radii, shift).unwrap();
            let cutoff = 20.0 + shift;
            let big = enumerate_eigenvalues(&m, 4.0 * cutoff).unwrap();
            let omitted: f64 = big
                .entries
                .iter()
                .filter(|(l, _)| *l > cutoff)
                .map(|(l, k)| *k as f64 * (-t * l.powf(r)).exp())
                .sum();
            let bound = spectral_tail_bound(&m, cutoff, t, r);
            assert!(bound >= omitted, "bound {bound} < omitted {omitted}");
            assert!(bound < 50.0 * omitted.max(1e-300) + 1e-12);
        }
    }

    #[test]
    fn model_json_round_trip() {
        let m = SpectralModel::from_json(r#"{"n":2,"radii":[1.0,2.5],"shift":0.5}"#).unwrap();
        assert_eq!(m.radii, vec![1.0, 2.5]);
        assert!(SpectralModel::from_json(r#"{"n":2,"radii":[1.0],"shift":0.0}"#).is_err());
        let back = SpectralModel::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn counts_match_brute_force(n in 1usize..=3, cutoff in 1.0f64..100.0, p in 0.5f64..1.5) {
            let radii: Vec<f64> = (0..n).map(|j| p + 0.25 * j as f64).collect();
            let m = SpectralModel::new(radii.clone(), 0.0).unwrap();
            let l = enumerate_eigenvalues(&m, cutoff).unwrap();
            let b: Vec<i64> = radii.iter().map(|p| (p * cutoff.sqrt()).ceil() as i64 + 1).collect();
            let mut count = 0u64;
            let mut k = vec![0i64; n];
            fn rec(m: &SpectralModel, b: &[i64], k: &mut Vec<i64>, d: usize, cutoff: f64, count: &mut u64) {
                if d == k.len() {
                    if m.eigenvalue(k) <= cutoff { *count += 1; }
                    return;
                }
                for v in -b[d]..=b[d] { k[d] = v; rec(m, b, k, d + 1, cutoff, count); }
            }
            rec(&m, &b, &mut k, 0, cutoff, &mut count);
            prop_assert_eq!(l.total_count(), count);
        }

        #[test]
        fn rescaling_covariance(scale in 0.5f64..3.0, cutoff in 5.0f64..40.0) {
            let base = SpectralModel::new(vec![1.0, 1.5], 0.0).unwrap();
            let scaled = base.with_radii(vec![scale, 1.5 * scale]);
            let a = enumerate_eigenvalues(&base, cutoff).unwrap();
            let b = enumerate_eigenvalues(&scaled, cutoff / (scale * scale)).unwrap();
            prop_assert_eq!(a.entries.len(), b.entries.len());
            for ((la, ma), (lb, mb)) in a.entries.iter().zip(&b.entries) {
                prop_assert_eq!(ma, mb);
                prop_assert!((la / (scale * scale) - lb).abs() <= 1e-10 * la.max(1.0));
            }
        }
    }
}
