//! Small-time expansion templates of h_t and the predicted coefficients.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::SpectralModel;
use crate::power::RationalPower;
use crate::specfun::{gamma_ratio, gamma_real, recip_gamma};
use crate::zeta::{q_kernel_offdiag, spectral_zeta};

/// An exponent of t: exact for rational r, floating for irrational r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Exact(Ratio<i64>),
    Real(f64),
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Exponent::Real(x) => *x,
        }
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Exact(a), Exponent::Exact(b)) => a.cmp(b),
            _ => self.value().total_cmp(&other.value()),
        }
    }

    /// Equal as exact fractions, or within 1e−12 relative when either is real.
    pub fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (Exponent::Exact(a), Exponent::Exact(b)) => a == b,
            _ => (self.value() - other.value()).abs() <= 1e-12 * self.value().abs().max(1.0),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Exact(q) => write!(f, "{q}"),
            Exponent::Real(x) => write!(f, "{x:.16e}"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Exact(q) => s.serialize_str(&q.to_string()),
            Exponent::Real(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Exponent::Real(x)),
            Raw::Text(s) => {
                let q = match s.split_once('/') {
                    Some((a, b)) => {
                        let a: i64 = a.trim().parse().map_err(serde::de::Error::custom)?;
                        let b: i64 = b.trim().parse().map_err(serde::de::Error::custom)?;
                        Ratio::new(a, b)
                    }
                    None => Ratio::from_integer(s.trim().parse().map_err(serde::de::Error::custom)?),
                };
                Ok(Exponent::Exact(q))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermLabel {
    NegLadder,
    Integer,
    Fractional,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionCase {
    Even,
    OddPlain,
    OddLog,
}

/// One basis function t^exponent · log^log_power t.
///
/// `index` is j for the ladders and l for the lβ/2 terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: Exponent,
    pub log_power: u8,
    pub label: TermLabel,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTemplate {
    pub n: usize,
    pub r: RationalPower,
    pub case: ExpansionCase,
    pub max_exponent: f64,
    pub terms: Vec<Term>,
}

impl ExpansionTemplate {
    pub fn exponents(&self) -> Vec<(f64, u8)> {
        self.terms.iter().map(|t| (t.exponent.value(), t.log_power)).collect()
    }

    /// Keeps only terms with exponent ≤ `max`.
    pub fn truncated(&self, max: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| t.exponent.value() <= max + 1e-12);
        out.max_exponent = max;
        out
    }
}

fn frac_or_real(r: &RationalPower, num: i64, den_mul_alpha: bool) -> Exponent {
    // num/(2r) when den_mul_alpha, else num as an integer
    if !den_mul_alpha {
        return Exponent::Exact(Ratio::from_integer(num));
    }
    match r.as_ratio() {
        Some(q) => Exponent::Exact(Ratio::from_integer(num) / (q * 2)),
        None => Exponent::Real(num as f64 / (2.0 * r.value)),
    }
}

pub fn expansion_case(n: usize, r: &RationalPower) -> ExpansionCase {
    if n.is_multiple_of(2) {
        ExpansionCase::Even
    } else if r.is_rational() && r.beta.is_multiple_of(2) {
        ExpansionCase::OddLog
    } else {
        ExpansionCase::OddPlain
    }
}

/// Exponent/log template of the diagonal expansion of h_t up to `max_exponent`.
pub fn predict_exponents(n: usize, r: &RationalPower, max_exponent: f64) -> Result<ExpansionTemplate> {
    if n == 0 {
        return Err(Error::InvalidModel("dimension must be positive".into()));
    }
    let case = expansion_case(n, r);
    let ni = n as i64;
    let mut terms = Vec::new();
    let push = |terms: &mut Vec<Term>, exponent: Exponent, log_power, label, index| {
        if exponent.value() <= max_exponent + 1e-12 {
            terms.push(Term { exponent, log_power, label, index });
        }
    };
    for j in 0..=((ni - 1) / 2) {
        if 2 * j < ni {
            push(&mut terms, frac_or_real(r, -(ni - 2 * j), true), 0, TermLabel::NegLadder, j);
        }
    }
    let kmax = max_exponent.floor().max(0.0) as i64;
    match case {
        ExpansionCase::Even => {
            for j in 0..=kmax {
                push(&mut terms, frac_or_real(r, j, false), 0, TermLabel::Integer, j);
            }
        }
        ExpansionCase::OddPlain => {
            for j in 1..=kmax {
                if !(r.is_rational() && j % r.beta as i64 == 0) {
                    push(&mut terms, frac_or_real(r, j, false), 0, TermLabel::Integer, j);
                }
            }
            let mut j = 0;
            while (2 * j + 1) as f64 / (2.0 * r.value) <= max_exponent + 1e-12 {
                push(&mut terms, frac_or_real(r, 2 * j + 1, true), 0, TermLabel::Fractional, j);
                j += 1;
            }
        }
        ExpansionCase::OddLog => {
            let (alpha, half_beta) = (r.alpha as i64, r.beta as i64 / 2);
            for j in 1..=kmax {
                if j % half_beta != 0 {
                    push(&mut terms, frac_or_real(r, j, false), 0, TermLabel::Integer, j);
                }
            }
            let mut j = 0;
            while (2 * j + 1) as f64 / (2.0 * r.value) <= max_exponent + 1e-12 {
                if (2 * j + 1) % alpha != 0 {
                    push(&mut terms, frac_or_real(r, 2 * j + 1, true), 0, TermLabel::Fractional, j);
                }
                j += 1;
            }
            let mut l = 1;
            while (l * half_beta) as f64 <= max_exponent + 1e-12 {
                let e = Exponent::Exact(Ratio::from_integer(l * half_beta));
                push(&mut terms, e, 0, TermLabel::Log, l);
                push(&mut terms, e, 1, TermLabel::Log, l);
                l += 2;
            }
        }
    }
    terms.sort_by(|a, b| a.exponent.cmp_value(&b.exponent).then(a.log_power.cmp(&b.log_power)));
    Ok(ExpansionTemplate { n, r: *r, case, max_exponent, terms })
}

/// Laurent data of f at s₀: coefficients of (s−s₀)^{−2}, (s−s₀)^{−1} and (s−s₀)⁰.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laurent {
    pub second: Complex64,
    pub residue: Complex64,
    pub finite_part: Complex64,
}

const CIRCLE_NODES: usize = 64;

fn circle_moments<F>(f: &F, s0: Complex64, radius: f64) -> Result<Laurent>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut c0 = Complex64::zero();
    let mut c1 = Complex64::zero();
    let mut c2 = Complex64::zero();
    for k in 0..CIRCLE_NODES {
        let theta = 2.0 * PI * (k as f64 + 0.5) / CIRCLE_NODES as f64;
        let w = Complex64::from_polar(radius, theta);
        let v = f(s0 + w)?;
        c0 += v;
        c1 += v * w;
        c2 += v * w * w;
    }
    let m = CIRCLE_NODES as f64;
    Ok(Laurent { second: c2 / m, residue: c1 / m, finite_part: c0 / m })
}

/// Constant Laurent coefficient and residue of `f` at `s0` by trapezoid
/// quadrature on a circle, checked against a circle of half the radius.
pub fn finite_part<F>(f: F, s0: Complex64, radius: f64) -> Result<Laurent>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let outer = circle_moments(&f, s0, radius)?;
    let inner = circle_moments(&f, s0, radius / 2.0)?;
    let scale = outer.finite_part.norm().max(outer.residue.norm()).max(1.0);
    let difference = (outer.finite_part - inner.finite_part)
        .norm()
        .max((outer.residue - inner.residue).norm());
    if difference > 1e-8 * scale {
        return Err(Error::InconsistentLaurent { difference });
    }
    Ok(outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub exponent: Exponent,
    pub log_power: u8,
    pub label: TermLabel,
    pub index: i64,
    pub predicted: f64,
    /// Set when the prediction went through a numerical finite part.
    pub needs_finite_part: bool,
    pub fitted: Option<f64>,
    pub uncertainty: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub model: SpectralModel,
    pub r: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub case: Option<ExpansionCase>,
    pub rows: Vec<CoefficientRow>,
    /// Free-form provenance, e.g. the fit range and term count.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CoefficientReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Some(Verdict::Fail))
    }

    pub fn row(&self, exponent: f64, log_power: u8) -> Option<&CoefficientRow> {
        self.rows
            .iter()
            .find(|r| r.log_power == log_power && (r.exponent.value() - exponent).abs() < 1e-12)
    }
}

fn row(term: &Term, predicted: f64, needs_finite_part: bool) -> CoefficientRow {
    CoefficientRow {
        exponent: term.exponent,
        log_power: term.log_power,
        label: term.label,
        index: term.index,
        predicted,
        needs_finite_part,
        fitted: None,
        uncertainty: None,
        abs_err: None,
        rel_err: None,
        verdict: None,
    }
}

fn factorial(k: i64) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// q_{rj}(x,x) = ζ(−rj)/vol.
fn q_positive_power(model: &SpectralModel, r: &RationalPower, j: i64) -> Result<f64> {
    let s = if r.is_rational() {
        -(j as f64) * r.alpha as f64 / r.beta as f64
    } else {
        -(j as f64) * r.value
    };
    Ok(spectral_zeta(model, Complex64::new(s, 0.0))?.re / model.volume())
}

/// t^{lβ/2} log t coefficient.
pub fn log_coefficient(model: &SpectralModel, r: &RationalPower, l: i64) -> Result<f64> {
    let k = l * r.beta as i64 / 2;
    let m = ((model.n as i64 + l * r.alpha as i64) / 2) as usize;
    let a = model.heat_coefficients(m).get(m);
    let w0 = -(k as f64) * r.value;
    Ok(-sign(k) / (r.value * factorial(k) * gamma_real(w0)?) * a)
}

/// t^{lβ/2} coefficient via FP(Γ(s)/Γ(rs)) and FP(Γ(rs) q_{−rs}) at s = −lβ/2.
pub fn log_partner_coefficient(model: &SpectralModel, r: &RationalPower, l: i64) -> Result<f64> {
    let k = l * r.beta as i64 / 2;
    let m = ((model.n as i64 + l * r.alpha as i64) / 2) as usize;
    let a = model.heat_coefficients(m).get(m);
    let s0 = Complex64::new(-(k as f64), 0.0);
    let vol = model.volume();
    let ratio = finite_part(|s| gamma_ratio(s, r), s0, 0.25)?;
    let kernel = finite_part(
        |s| {
            let w = s * r.value;
            Ok(spectral_zeta(model, w)? / (vol * recip_gamma(w)))
        },
        s0,
        0.25,
    )?;
    let rho = sign(k) / (factorial(k) * gamma_real(-(k as f64) * r.value)?);
    Ok(rho * kernel.finite_part.re + ratio.finite_part.re * a / r.value)
}

/// Fills predicted coefficients for every term of the diagonal template.
pub fn predict_coefficients(
    model: &SpectralModel,
    r: &RationalPower,
    template: &ExpansionTemplate,
    point: &[f64],
) -> Result<CoefficientReport> {
    model.validate()?;
    if template.n != model.n || template.r != *r {
        return Err(Error::TemplateMismatch("template built for a different n or r".into()));
    }
    let n = model.n as i64;
    let depth = (template.max_exponent.max(0.0) as usize + model.n + 2) * 2;
    let a = model.heat_coefficients(depth);
    let mut rows = Vec::with_capacity(template.terms.len());
    for term in &template.terms {
        let j = term.index;
        let (value, fp) = match term.label {
            TermLabel::NegLadder => {
                let e = (n - 2 * j) as f64;
                let v = gamma_real(e / (2.0 * r.value))? / gamma_real(e / 2.0)? * a.get(j as usize) / r.value;
                (v, false)
            }
            TermLabel::Integer if j == 0 => {
                let z0 = spectral_zeta(model, Complex64::new(0.0, 0.0))?.re;
                (z0 / model.volume() + model.kernel_projection_density(), false)
            }
            TermLabel::Integer => (sign(j) / factorial(j) * q_positive_power(model, r, j)?, false),
            TermLabel::Fractional => {
                let e = (2 * j + 1) as f64;
                let m = ((n + 2 * j + 1) / 2) as usize;
                let v = gamma_real(-e / (2.0 * r.value))? / gamma_real(-e / 2.0)? * a.get(m) / r.value;
                (v, false)
            }
            TermLabel::Log if term.log_power == 1 => (log_coefficient(model, r, j)?, false),
            TermLabel::Log => (log_partner_coefficient(model, r, j)?, true),
        };
        rows.push(row(term, value, fp));
    }
    Ok(CoefficientReport {
        model: model.clone(),
        r: r.to_string(),
        x: point.to_vec(),
        y: point.to_vec(),
        case: Some(template.case),
        rows,
        notes: Vec::new(),
    })
}

/// Off-diagonal Taylor coefficients (−1)^j/j!·q_{rj}(x,y), j = 1..J.
pub fn offdiag_taylor_prediction(
    model: &SpectralModel,
    r: &RationalPower,
    x: &[f64],
    y: &[f64],
    j_max: usize,
) -> Result<CoefficientReport> {
    if model.torus_distance(x, y) == 0.0 {
        return Err(Error::OnDiagonal);
    }
    let mut rows = Vec::with_capacity(j_max);
    for j in 1..=j_max as i64 {
        let term = Term {
            exponent: Exponent::Exact(Ratio::from_integer(j)),
            log_power: 0,
            label: TermLabel::Integer,
            index: j,
        };
        let value = if r.times_is_integer(j) {
            0.0
        } else {
            let s = Complex64::new(-(j as f64) * r.value, 0.0);
            sign(j) / factorial(j) * q_kernel_offdiag(model, s, x, y)?.value.re
        };
        rows.push(row(&term, value, false));
    }
    Ok(CoefficientReport {
        model: model.clone(),
        r: r.to_string(),
        x: x.to_vec(),
        y: y.to_vec(),
        case: None,
        rows,
        notes: Vec::new(),
    })
}

fn even_case_inputs(model: &SpectralModel, r: &RationalPower, l: u32) -> Result<(f64, i64, i64, f64)> {
    if !model.n.is_multiple_of(2) {
        return Err(Error::Domain("even-case identity needs n even".into()));
    }
    if !r.is_rational() || l == 0 {
        return Err(Error::Domain("even-case identity needs rational r and l ≥ 1".into()));
    }
    let (lb, la) = (l as i64 * r.beta as i64, l as i64 * r.alpha as i64);
    let q = spectral_zeta(model, Complex64::new(-(la as f64), 0.0))?.re / model.volume();
    let idx = model.n / 2 + la as usize;
    let a = model.heat_coefficients(idx).get(idx);
    Ok((q, lb, la, a))
}

/// |q_{rlβ}(x,x) − (−1)^{lβ}(lβ)!·a_{n/2+lα}| exactly as the identity is printed.
pub fn even_case_identity_check(model: &SpectralModel, r: &RationalPower, l: u32) -> Result<f64> {
    let (q, lb, _, a) = even_case_inputs(model, r, l)?;
    Ok((q - sign(lb) * factorial(lb) * a).abs())
}

/// |q_{rlβ}(x,x) − (−1)^{lα}(lα)!·a_{n/2+lα}|, the form that holds on flat tori.
pub fn even_case_identity_corrected(model: &SpectralModel, r: &RationalPower, l: u32) -> Result<f64> {
    let (q, _, la, a) = even_case_inputs(model, r, l)?;
    Ok((q - sign(la) * factorial(la) * a).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{digamma, gamma, EULER_GAMMA};
    use crate::zeta::epstein_zeta;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exps(t: &ExpansionTemplate) -> Vec<(String, u8)> {
        t.terms.iter().map(|t| (t.exponent.to_string(), t.log_power)).collect()
    }

    fn pairs(v: &[(&str, u8)]) -> Vec<(String, u8)> {
        v.iter().map(|(a, b)| (a.to_string(), *b)).collect()
    }

    #[test]
    fn template_case_three() {
        let t = predict_exponents(1, &RationalPower::half(), 4.0).unwrap();
        assert_eq!(t.case, ExpansionCase::OddLog);
        assert_eq!(exps(&t), pairs(&[("-1", 0), ("1", 0), ("1", 1), ("3", 0), ("3", 1)]));
    }

    #[test]
    fn template_case_one() {
        let t = predict_exponents(2, &RationalPower::half(), 3.0).unwrap();
        assert_eq!(t.case, ExpansionCase::Even);
        assert_eq!(exps(&t), pairs(&[("-2", 0), ("0", 0), ("1", 0), ("2", 0), ("3", 0)]));
    }

    #[test]
    fn template_case_two() {
        let t = predict_exponents(1, &RationalPower::rational(1, 3).unwrap(), 5.0).unwrap();
        assert_eq!(t.case, ExpansionCase::OddPlain);
        assert_eq!(
            exps(&t),
            pairs(&[("-3/2", 0), ("1", 0), ("3/2", 0), ("2", 0), ("4", 0), ("9/2", 0), ("5", 0)])
        );
        assert!(t.terms.iter().all(|t| t.log_power == 0));
    }

    #[test]
    fn template_irrational_power_keeps_float_exponents() {
        let r = RationalPower::irrational(0.7).unwrap();
        let t = predict_exponents(3, &r, 3.0).unwrap();
        assert_eq!(t.case, ExpansionCase::OddPlain);
        let neg: Vec<f64> = t.terms.iter().filter(|t| t.label == TermLabel::NegLadder).map(|t| t.exponent.value()).collect();
        assert_eq!(neg.len(), 2);
        assert!((neg[0] + 3.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn templates_are_disjoint_and_logs_only_in_case_three() {
        for n in 1..=4 {
            for (a, b) in [(1, 2), (1, 3), (2, 3), (3, 4), (1, 4), (2, 5), (5, 6)] {
                let r = RationalPower::rational(a, b).unwrap();
                let t = predict_exponents(n, &r, 8.0).unwrap();
                for (i, x) in t.terms.iter().enumerate() {
                    for y in &t.terms[i + 1..] {
                        assert!(!(x.exponent.same(&y.exponent) && x.log_power == y.log_power));
                    }
                }
                let logs = t.terms.iter().any(|t| t.log_power == 1);
                assert_eq!(logs, n % 2 == 1 && b % 2 == 0);
                let negs = t.terms.iter().filter(|t| t.exponent.value() < 0.0).count();
                assert_eq!(negs, n.div_ceil(2));
                if n % 2 == 1 && b % 2 == 1 {
                    assert!(t.terms.iter().all(|t| {
                        let v = t.exponent.value();
                        !(v > 0.0 && v == v.round() && (v as u32).is_multiple_of(b))
                    }));
                }
            }
        }
    }

    #[test]
    fn finite_part_examples() {
        let l = finite_part(gamma, c(0.0, 0.0), 0.25).unwrap();
        assert!((l.finite_part.re + EULER_GAMMA).abs() < 1e-12);
        let l = finite_part(|s| Ok(1.0 / (s - 2.0) + 5.0), c(2.0, 0.0), 0.25).unwrap();
        assert!((l.finite_part.re - 5.0).abs() < 1e-13);
        assert!((l.residue.re - 1.0).abs() < 1e-13);
        let half = RationalPower::half();
        let l = finite_part(|s| gamma_ratio(s, &half), c(-2.0, 0.0), 0.25).unwrap();
        assert!((l.finite_part.re + 0.25).abs() < 1e-12);
        assert!(l.residue.norm() < 1e-12);
    }

    #[test]
    fn finite_part_residues_of_gamma() {
        for k in 0..=5 {
            let l = finite_part(gamma, c(-(k as f64), 0.0), 0.25).unwrap();
            assert!((l.residue.re - sign(k) / factorial(k)).abs() < 1e-10);
        }
    }

    #[test]
    fn finite_part_detects_inconsistency() {
        // a pole of order 64 aliases differently on the two circles
        let e = finite_part(|s| Ok(s.powi(-64) * 1e-40), c(0.0, 0.0), 0.25);
        assert!(matches!(e, Err(Error::InconsistentLaurent { .. })));
    }

    #[test]
    fn flat_circle_matches_coth_series() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let r = RationalPower::half();
        let t = predict_exponents(1, &r, 5.0).unwrap();
        let rep = predict_coefficients(&m, &r, &t, &[0.0]).unwrap();
        // coth(t/2)/(2π) = 1/(πt) + t/(12π) − t³/(720π) + t⁵/(30240π) + …
        let want = [(-1.0, 1.0 / PI), (1.0, 1.0 / (12.0 * PI)), (3.0, -1.0 / (720.0 * PI)), (5.0, 1.0 / (30240.0 * PI))];
        for (e, v) in want {
            let row = rep.row(e, 0).unwrap();
            assert!((row.predicted - v).abs() < 1e-10, "t^{e}: {} vs {v}", row.predicted);
            assert_eq!(rep.row(e, 1).map_or(0.0, |r| r.predicted), 0.0);
        }
    }

    #[test]
    fn log_coefficient_for_shifted_circle() {
        let m = SpectralModel::unit(1, 1.0).unwrap();
        let b = log_coefficient(&m, &RationalPower::half(), 1).unwrap();
        assert!((b - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn log_partner_matches_closed_form() {
        // (−1)^k/k!·[FP ζ(w₀)/vol + ψ(k+1)·a_m/(r Γ(w₀))]
        for (radii, shift, r, l) in [
            (vec![1.0], 1.0, RationalPower::half(), 1),
            (vec![1.0], 0.7, RationalPower::rational(3, 4).unwrap(), 1),
            (vec![1.0, 1.5, 0.5], 0.4, RationalPower::half(), 1),
            (vec![1.2], 2.0, RationalPower::half(), 3),
        ] {
            let m = SpectralModel::new(radii, shift).unwrap();
            let k = l * r.beta as i64 / 2;
            let idx = ((m.n as i64 + l * r.alpha as i64) / 2) as usize;
            let a = m.heat_coefficients(idx).get(idx);
            let w0 = -(k as f64) * r.value;
            let fp = epstein_zeta(&m, c(w0, 0.0)).unwrap().value.re / m.volume();
            let closed = sign(k) / factorial(k)
                * (fp + digamma(k as f64 + 1.0).unwrap() * a / (r.value * gamma_real(w0).unwrap()));
            let got = log_partner_coefficient(&m, &r, l).unwrap();
            assert!((got - closed).abs() < 1e-9 * closed.abs().max(1e-3), "{got} vs {closed}");
        }
    }

    #[test]
    fn offdiag_predictions() {
        let m = SpectralModel::unit(1, 0.0).unwrap();
        let r = RationalPower::half();
        let rep = offdiag_taylor_prediction(&m, &r, &[PI / 2.0], &[0.0], 3).unwrap();
        assert!((rep.rows[0].predicted - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert_eq!(rep.rows[1].predicted, 0.0);
        let rep = offdiag_taylor_prediction(&m, &r, &[PI], &[0.0], 1).unwrap();
        assert!((rep.rows[0].predicted - 1.0 / (4.0 * PI)).abs() < 1e-12);
        assert!(offdiag_taylor_prediction(&m, &r, &[1.0], &[1.0], 1).is_err());
    }

    #[test]
    fn even_identity_forms() {
        let m = SpectralModel::unit(2, 1.0).unwrap();
        for r in [RationalPower::half(), RationalPower::rational(1, 3).unwrap()] {
            assert!(even_case_identity_corrected(&m, &r, 1).unwrap() < 1e-12);
            assert!(even_case_identity_check(&m, &r, 1).unwrap() > 1e-2);
        }
        let flat = SpectralModel::unit(2, 0.0).unwrap();
        assert_eq!(even_case_identity_check(&flat, &RationalPower::half(), 1).unwrap(), 0.0);
        assert!(even_case_identity_check(&SpectralModel::unit(1, 1.0).unwrap(), &RationalPower::half(), 1).is_err());
    }

    #[test]
    fn even_case_coefficients_follow_identity() {
        let m = SpectralModel::unit(2, 1.0).unwrap();
        let r = RationalPower::half();
        let t = predict_exponents(2, &r, 4.0).unwrap();
        let rep = predict_coefficients(&m, &r, &t, &[0.0, 0.0]).unwrap();
        let a = m.heat_coefficients(4);
        // A₀ = a₁ and A_{lβ} = (−1)^{lβ+lα}(lα)!/(lβ)!·a_{1+lα}
        assert!((rep.row(0.0, 0).unwrap().predicted - a.get(1)).abs() < 1e-13);
        assert!((rep.row(2.0, 0).unwrap().predicted + a.get(2) / 2.0).abs() < 1e-13);
        assert!((rep.row(4.0, 0).unwrap().predicted - 2.0 / 24.0 * a.get(3)).abs() < 1e-13);
    }

    #[test]
    fn report_serializes_exact_exponents() {
        let r = RationalPower::rational(1, 3).unwrap();
        let t = predict_exponents(1, &r, 2.0).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"-3/2\""));
        let back: ExpansionTemplate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
