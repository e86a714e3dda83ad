//! Weighted least-squares recovery of expansion coefficients from samples.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::asym::{CoefficientReport, ExpansionTemplate, Exponent, Verdict};
use crate::error::{Error, Result};
use crate::heat::{fmt17, KernelSample};

pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub t: f64,
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub points: Vec<SamplePoint>,
    pub spacing: Spacing,
    pub t_min: f64,
    pub t_max: f64,
}

impl SampleGrid {
    pub fn new(points: Vec<SamplePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        for p in &points {
            if !(p.t > 0.0) || !p.value.is_finite() || !p.error_bound.is_finite() || p.error_bound < 0.0 {
                return Err(Error::Domain(format!("bad sample at t = {}", p.t)));
            }
        }
        let increasing = points.windows(2).all(|w| w[1].t > w[0].t);
        let decreasing = points.windows(2).all(|w| w[1].t < w[0].t);
        if !(increasing || decreasing) {
            return Err(Error::Domain("sample times must be strictly monotone".into()));
        }
        let t_min = points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
        let t_max = points.iter().map(|p| p.t).fold(0.0, f64::max);
        Ok(Self { points, spacing: Spacing::Geometric, t_min, t_max })
    }

    pub fn from_samples(samples: &[KernelSample]) -> Result<Self> {
        Self::new(samples.iter().map(|s| SamplePoint { t: s.t, value: s.value, error_bound: s.error_bound }).collect())
    }

    /// Samples `f(t) -> (value, error_bound)` on the given times.
    pub fn from_fn<F>(ts: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<(f64, f64)>,
    {
        let points = ts
            .iter()
            .map(|&t| f(t).map(|(value, error_bound)| SamplePoint { t, value, error_bound }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps points with t in [t_min, t_max].
    pub fn restrict(&self, t_min: f64, t_max: f64) -> Result<Self> {
        Self::new(self.points.iter().copied().filter(|p| p.t >= t_min && p.t <= t_max).collect())
    }

    /// Reads CSV with header `t,value,error_bound` (extra columns ignored).
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Parse(format!("missing CSV column {name}")))
        };
        let (ct, cv, ce) = (col("t")?, col("value")?, col("error_bound")?);
        let mut points = Vec::new();
        for record in reader.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("").trim();
                raw.parse().map_err(|_| Error::Parse(format!("bad number {raw:?}")))
            };
            points.push(SamplePoint { t: field(ct)?, value: field(cv)?, error_bound: field(ce)? });
        }
        Self::new(points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value", "error_bound"])?;
        for p in &self.points {
            w.write_record([fmt17(p.t), fmt17(p.value), fmt17(p.error_bound)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Basis function t^exponent · log^log_power t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTerm {
    pub exponent: Exponent,
    pub log_power: u8,
}

impl BasisTerm {
    pub fn power(exponent: f64, log_power: u8) -> Self {
        Self { exponent: Exponent::Real(exponent), log_power }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let e = self.exponent.value();
        let base = if e == 0.0 { 1.0 } else { t.powf(e) };
        base * t.ln().powi(self.log_power as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedTerm {
    pub exponent: Exponent,
    pub log_power: u8,
    pub coefficient: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub terms: Vec<FittedTerm>,
    /// Weighted residual 2-norm.
    pub residual_norm: f64,
    pub reduced_chi2: f64,
    /// Condition number of the column-scaled weighted design matrix.
    pub condition_number: f64,
    pub samples: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl FitResult {
    pub fn coefficient(&self, exponent: f64, log_power: u8) -> Option<f64> {
        self.term(exponent, log_power).map(|t| t.coefficient)
    }

    pub fn term(&self, exponent: f64, log_power: u8) -> Option<&FittedTerm> {
        self.terms
            .iter()
            .find(|t| t.log_power == log_power && (t.exponent.value() - exponent).abs() < 1e-12)
    }

    /// Drops fitted terms absent from `template`, e.g. guard terms fitted
    /// only to absorb truncation bias.
    pub fn restricted_to(&self, template: &ExpansionTemplate) -> FitResult {
        let mut out = self.clone();
        out.terms
            .retain(|f| template.terms.iter().any(|t| t.exponent.same(&f.exponent) && t.log_power == f.log_power));
        out
    }
}

fn weight_floor(value: f64) -> f64 {
    (4.0 * f64::EPSILON * value.abs()).max(f64::MIN_POSITIVE)
}

struct Solve {
    coefficients: Vec<f64>,
    statistical: Vec<f64>,
    residual_norm: f64,
    reduced_chi2: f64,
    condition: f64,
}

fn solve_weighted(sorted: &[SamplePoint], basis: &[BasisTerm]) -> Result<Solve> {
    let (rows, m) = (sorted.len(), basis.len());
    let mut a = DMatrix::<f64>::zeros(rows, m);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, p) in sorted.iter().enumerate() {
        let w = 1.0 / p.error_bound.max(weight_floor(p.value));
        for (k, term) in basis.iter().enumerate() {
            a[(i, k)] = term.eval(p.t) * w;
        }
        b[i] = p.value * w;
    }
    let scale: Vec<f64> = (0..m).map(|k| a.column(k).norm()).collect();
    if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::IllConditioned { condition: f64::INFINITY });
    }
    for (k, s) in scale.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let x = svd.solve(&b, 0.0).map_err(|_| Error::IllConditioned { condition })?;
    let residual_norm = (&b - &a * &x).norm();
    let dof = (rows - m).max(1) as f64;
    let reduced_chi2 = residual_norm * residual_norm / dof;
    let inflate = reduced_chi2.max(1.0).sqrt();
    let v_t = svd.v_t.as_ref().expect("requested V");
    let statistical = (0..m)
        .map(|k| {
            let var: f64 = (0..m).map(|i| (v_t[(i, k)] / sv[i]).powi(2)).sum();
            var.sqrt() / scale[k] * inflate
        })
        .collect();
    let coefficients = (0..m).map(|k| x[k] / scale[k]).collect();
    Ok(Solve { coefficients, statistical, residual_norm, reduced_chi2, condition })
}

/// Weighted least squares of `points` against `basis` by SVD of the
/// column-scaled design matrix.
///
/// Each uncertainty combines the χ²-inflated standard error with the shift
/// seen when the fit is repeated on the lower half of the t-range.
pub fn fit_basis(points: &[SamplePoint], basis: &[BasisTerm]) -> Result<FitResult> {
    let m = basis.len();
    if m == 0 {
        return Err(Error::TemplateMismatch("empty basis".into()));
    }
    if points.len() < 2 * m {
        return Err(Error::InsufficientSamples { needed: 2 * m, got: points.len() });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
    let rows = sorted.len();
    let (t_min, t_max) = (sorted[0].t, sorted[rows - 1].t);
    let full = solve_weighted(&sorted, basis)?;
    let lower: Vec<SamplePoint> = sorted.iter().copied().filter(|p| p.t <= t_max / 2.0).collect();
    let shift = match (lower.len() >= 2 * m).then(|| solve_weighted(&lower, basis)) {
        Some(Ok(half)) => full.coefficients.iter().zip(&half.coefficients).map(|(a, b)| (a - b).abs()).collect(),
        _ => vec![0.0; m],
    };
    let terms = basis
        .iter()
        .enumerate()
        .map(|(k, term)| FittedTerm {
            exponent: term.exponent,
            log_power: term.log_power,
            coefficient: full.coefficients[k],
            uncertainty: full.statistical[k].hypot(shift[k]),
        })
        .collect();
    Ok(FitResult {
        terms,
        residual_norm: full.residual_norm,
        reduced_chi2: full.reduced_chi2,
        condition_number: full.condition,
        samples: rows,
        t_min,
        t_max,
    })
}

/// Fits the grid in the template's basis.
pub fn fit_expansion(grid: &SampleGrid, template: &ExpansionTemplate) -> Result<FitResult> {
    let basis: Vec<BasisTerm> = template
        .terms
        .iter()
        .map(|t| BasisTerm { exponent: t.exponent, log_power: t.log_power })
        .collect();
    fit_basis(&grid.points, &basis)
}

/// Merges fitted coefficients into the predicted report and sets verdicts:
/// a term passes when |fit − pred| ≤ max(rel_tol·|pred|, abs_floor).
pub fn compare(predicted: &CoefficientReport, fitted: &FitResult, rel_tol: f64, abs_floor: f64) -> Result<CoefficientReport> {
    if predicted.rows.len() != fitted.terms.len() {
        return Err(Error::TemplateMismatch(format!(
            "{} predicted terms vs {} fitted",
            predicted.rows.len(),
            fitted.terms.len()
        )));
    }
    let mut out = predicted.clone();
    for row in &mut out.rows {
        let term = fitted
            .term(row.exponent.value(), row.log_power)
            .ok_or_else(|| Error::TemplateMismatch(format!("no fitted term for t^{} log^{}", row.exponent, row.log_power)))?;
        let abs_err = (term.coefficient - row.predicted).abs();
        row.fitted = Some(term.coefficient);
        row.uncertainty = Some(term.uncertainty);
        row.abs_err = Some(abs_err);
        row.rel_err = (row.predicted != 0.0).then(|| abs_err / row.predicted.abs());
        let pass = abs_err <= (rel_tol * row.predicted.abs()).max(abs_floor);
        row.verdict = Some(if pass { Verdict::Pass } else { Verdict::Fail });
    }
    out.notes.push(format!(
        "fit on t in [{}, {}] with {} samples, {} terms, condition {:.3e}, reduced chi2 {:.3e}",
        fmt17(fitted.t_min),
        fmt17(fitted.t_max),
        fitted.samples,
        fitted.terms.len(),
        fitted.condition_number,
        fitted.reduced_chi2
    ));
    Ok(out)
}
