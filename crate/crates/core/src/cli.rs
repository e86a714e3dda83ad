//! Command-line front end. `main.rs` only forwards to [`run`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::asym::{offdiag_taylor_prediction, predict_coefficients, predict_exponents, CoefficientReport};
use crate::error::{Error, Result};
use crate::fit::{compare, fit_expansion, SampleGrid};
use crate::halfpower::{blowup_pullback, subordinated_kernel, BlowupPoint};
use crate::heat::{
    fmt17, geometric_grid, heat_kernel_direct_with_budget, heat_kernel_inverse_mellin, heat_kernel_poisson,
    write_samples_csv, ContourParams, KernelSample, Rule,
};
use crate::models::{enumerate_eigenvalues_with_budget, SpectralModel, DEFAULT_LATTICE_BUDGET};
use crate::power::RationalPower;
use crate::verify::{run_suite, VerifyOptions};
use crate::zeta::{epstein_zeta, q_kernel_diag, q_kernel_offdiag, spectral_zeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracheat", version, about = "Heat kernels of fractional Laplacians on flat tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List eigenvalues with multiplicities up to a cutoff (CSV).
    Eigensum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        cutoff: f64,
        /// Report the tail bound of Σ e^{−tλ^r} at this t.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        r: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample the kernel of e^{−tΔ^r} on a t grid (CSV).
    Heat {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Omit for r = 1.
        #[arg(long)]
        r: Option<String>,
        #[arg(long, value_enum, default_value = "eigensum")]
        method: MethodArg,
        /// Second method; adds its value and a relative agreement column.
        #[arg(long, value_enum)]
        compare_with: Option<MethodArg>,
        /// Geometric t grid `t_min:t_max:ratio`.
        #[arg(long, default_value = "1e-2:1:1.25")]
        t_geom: GeomGrid,
        #[command(flatten)]
        contour: ContourArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Spectral zeta value, or the off-diagonal kernel q_s(x, y) when --x/--y are given (JSON).
    Zeta {
        #[command(flatten)]
        model: ModelArgs,
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        s: ComplexArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Predicted small-t exponents and coefficients (JSON).
    Predict {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 3.0)]
        max_exponent: f64,
        /// Off-diagonal Taylor coefficients at (x, y) instead of the diagonal expansion.
        #[arg(long)]
        offdiag: bool,
        #[arg(long, default_value_t = 4)]
        terms: usize,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Predict, sample, fit and compare; exits 1 when a coefficient fails (JSON).
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 3.0)]
        max_exponent: f64,
        /// Extra fitted terms beyond max_exponent that absorb truncation bias; not reported.
        #[arg(long, default_value_t = 2.0)]
        guard: f64,
        #[arg(long, default_value = "0.01:0.3:1.1")]
        t_geom: GeomGrid,
        /// Fit these samples (t,value,error_bound) instead of computing them.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "eigensum")]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        abs_floor: f64,
        #[command(flatten)]
        contour: ContourArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the property suites; exits 1 when any check fails.
    Verify {
        #[arg(long)]
        quick: bool,
        /// Push every fifth check past its tolerance, offset by the seed.
        #[arg(long)]
        fault_seed: Option<u64>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare q_{rj}(x,x) on radii 1 and p against the scaling p^{2s−n} (JSON).
    Nonlocality {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 1)]
        j: u32,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pull the r = 1/2 kernel back to the blown-up space (CSV).
    Blowup {
        #[command(flatten)]
        model: ModelArgs,
        /// Direction of ω′ (n components); scaled onto the sphere.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        omega0: Vec<f64>,
        #[arg(long, default_value = "0.0125:0.2:2")]
        rho_geom: GeomGrid,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        base: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Comma-separated; defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub shift: f64,
    /// JSON model {n, radii, shift}; overrides the flags above.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Angle coordinates in [0, 2π), comma-separated; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Defaults to x.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    /// Evaluate at y = x.
    #[arg(long)]
    pub diag: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    /// Abscissa of the inverse Mellin line; must exceed n/(2r).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Starting half-length of the truncated line.
    #[arg(long)]
    pub half_length: Option<f64>,
    /// Node spacing along the line.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Gauss–Legendre panels instead of the trapezoid rule.
    #[arg(long)]
    pub gauss: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Absolute accuracy requested from sums and quadratures.
    #[arg(long, default_value = "1e-12")]
    pub tol: f64,
    /// Largest number of lattice points a sum may visit.
    #[arg(long, default_value_t = DEFAULT_LATTICE_BUDGET)]
    pub budget: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Eigensum,
    Poisson,
    InverseMellin,
    Subordination,
}

/// `t_min:t_max:ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub ratio: f64,
}

impl FromStr for GeomGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [t_min, t_max, ratio] if t_min > 0.0 && t_max >= t_min && ratio > 1.0 => Ok(Self { t_min, t_max, ratio }),
            _ => Err(format!("expected t_min:t_max:ratio with 0 < t_min ≤ t_max and ratio > 1, got {s}")),
        }
    }
}

impl GeomGrid {
    pub fn points(&self) -> Vec<f64> {
        geometric_grid(self.t_min, self.t_max, self.ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p}: {e}"));
        match s.split_once(',') {
            Some((re, im)) => Ok(Self(Complex64::new(parse(re)?, parse(im)?))),
            None => Ok(Self(Complex64::new(parse(s)?, 0.0))),
        }
    }
}

/// Everything a computation needs after argument parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: SpectralModel,
    pub r: Option<RationalPower>,
    /// `r` exactly as typed.
    pub r_text: Option<String>,
    pub ts: Vec<f64>,
    pub tol: f64,
    pub budget: u64,
    pub contour: Option<ContourParams>,
    pub out: Option<PathBuf>,
}

/// Problems with the arguments themselves; these exit with code 2.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModel(m) => Failure::Usage(format!("invalid model: {m}")),
            Error::InvalidPower(m) => Failure::Usage(format!("invalid power r: {m}")),
            other => Failure::Compute(other),
        }
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

impl ModelArgs {
    fn build(&self) -> CliResult<SpectralModel> {
        if let Some(path) = &self.model {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            return Ok(SpectralModel::from_json(&text)?);
        }
        let radii = self.radii.clone().unwrap_or_else(|| vec![1.0; self.n]);
        if radii.len() != self.n {
            return usage(format!("--radii has {} entries but --n is {}", radii.len(), self.n));
        }
        Ok(SpectralModel::new(radii, self.shift)?)
    }
}

impl PointArgs {
    fn resolve(&self, n: usize) -> CliResult<(Vec<f64>, Vec<f64>)> {
        let x = self.x.clone().unwrap_or_else(|| vec![0.0; n]);
        let y = if self.diag { x.clone() } else { self.y.clone().unwrap_or_else(|| x.clone()) };
        if x.len() != n || y.len() != n {
            return usage(format!("points need {n} coordinates"));
        }
        Ok((x, y))
    }
}

impl ContourArgs {
    fn params(&self, model: &SpectralModel, r: &RationalPower, tol: f64) -> ContourParams {
        let mut c = ContourParams::for_model(model, r);
        c.tau = self.tau.unwrap_or(c.tau);
        c.half_length = self.half_length.unwrap_or(c.half_length);
        c.spacing = self.spacing.unwrap_or(c.spacing);
        if self.gauss {
            c.rule = Rule::Gauss;
        }
        c.tol = c.tol.max(tol);
        c
    }
}

fn parse_r(text: Option<&str>) -> CliResult<Option<RationalPower>> {
    text.map(|t| t.parse::<RationalPower>().map_err(Failure::from)).transpose()
}

fn writer(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).map_err(Error::from)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> CliResult<()> {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    writeln!(w).map_err(Error::from)?;
    Ok(())
}

/// One kernel sample by the chosen method.
pub fn sample_kernel(cfg: &RunConfig, method: MethodArg, t: f64, x: &[f64], y: &[f64]) -> Result<KernelSample> {
    let model = &cfg.model;
    match method {
        MethodArg::Eigensum => {
            let r = cfg.r.map_or(1.0, |r| r.value);
            heat_kernel_direct_with_budget(model, r, t, x, y, cfg.tol, cfg.budget)
        }
        MethodArg::Poisson => {
            if cfg.r.is_some() {
                return Err(Error::Unsupported("the Poisson method computes r = 1 only; omit --r".into()));
            }
            heat_kernel_poisson(model, t, x, y)
        }
        MethodArg::Subordination => {
            if cfg.r.is_some_and(|r| r != RationalPower::half()) {
                return Err(Error::Unsupported("subordination needs r = 1/2".into()));
            }
            subordinated_kernel(model, t, x, y, cfg.tol)
        }
        MethodArg::InverseMellin => {
            let r = cfg.r.ok_or_else(|| Error::Unsupported("inverse-mellin needs --r".into()))?;
            if model.torus_distance(x, y) != 0.0 {
                return Err(Error::Unsupported("inverse-mellin evaluates the diagonal only".into()));
            }
            let contour = cfg.contour.unwrap_or_else(|| ContourParams::for_model(model, &r));
            heat_kernel_inverse_mellin(model, &r, t, x, &contour)
        }
    }
}

fn method_checks(cfg: &RunConfig, method: MethodArg, x: &[f64], y: &[f64]) -> CliResult<()> {
    match method {
        MethodArg::Poisson if cfg.r.is_some() => usage("--method poisson computes r = 1; omit --r"),
        MethodArg::Subordination if cfg.r.is_some_and(|r| r != RationalPower::half()) => {
            usage("--method subordination needs --r 1/2")
        }
        MethodArg::InverseMellin if cfg.r.is_none() => usage("--method inverse-mellin needs --r"),
        MethodArg::InverseMellin if cfg.model.torus_distance(x, y) != 0.0 => {
            usage("--method inverse-mellin evaluates the diagonal only; use --diag")
        }
        _ => Ok(()),
    }
}

/// Samples on the config's t grid, written as CSV; with a second method the
/// rows gain `compare_value,compare_error_bound,agreement` (relative difference).
pub fn cmd_heat(cfg: &RunConfig, method: MethodArg, compare_with: Option<MethodArg>, x: &[f64], y: &[f64]) -> Result<()> {
    let samples = cfg.ts.iter().map(|&t| sample_kernel(cfg, method, t, x, y)).collect::<Result<Vec<_>>>()?;
    let out: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let Some(other) = compare_with else {
        return write_samples_csv(out, &samples);
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "error_bound", "method", "compare_value", "compare_error_bound", "agreement"])?;
    for s in &samples {
        let c = sample_kernel(cfg, other, s.t, x, y)?;
        let agreement = (s.value - c.value).abs() / c.value.abs();
        w.write_record([
            fmt17(s.t),
            fmt17(s.value),
            fmt17(s.error_bound),
            s.method.as_str().to_string(),
            fmt17(c.value),
            fmt17(c.error_bound),
            fmt17(agreement),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs predict → sample → fit → compare on the diagonal at x = 0. The fit
/// carries terms up to `max_exponent + guard`; only those up to `max_exponent` are compared.
pub fn cmd_predict_fit(
    cfg: &RunConfig,
    max_exponent: f64,
    guard: f64,
    samples: Option<SampleGrid>,
    method: MethodArg,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<CoefficientReport> {
    let r = cfg.r.ok_or_else(|| Error::Unsupported("fit needs r".into()))?;
    let model = &cfg.model;
    let x = vec![0.0; model.n];
    let template = predict_exponents(model.n, &r, max_exponent)?;
    let mut predicted = predict_coefficients(model, &r, &template, &x)?;
    if let Some(text) = &cfg.r_text {
        predicted.r = text.clone();
    }
    let grid = match samples {
        Some(g) => g,
        None => SampleGrid::from_samples(
            &cfg.ts.iter().map(|&t| sample_kernel(cfg, method, t, &x, &x)).collect::<Result<Vec<_>>>()?,
        )?,
    };
    let wide = predict_exponents(model.n, &r, max_exponent + guard.max(0.0))?;
    let fitted = fit_expansion(&grid, &wide)?.restricted_to(&template);
    let extra = wide.terms.len() - template.terms.len();
    let mut report = compare(&predicted, &fitted, rel_tol, abs_floor)?;
    report.notes.push(format!(
        "{} terms compared up to exponent {}, {} guard terms fitted",
        template.terms.len(),
        max_exponent,
        extra
    ));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlocalityReport {
    pub n: usize,
    pub r: String,
    pub j: u32,
    pub p: f64,
    pub s: f64,
    pub q_unit: f64,
    pub q_scaled: f64,
    pub ratio: f64,
    pub predicted_ratio: f64,
    pub rel_err: f64,
    pub zeta_value: f64,
    pub zeta_nonzero: bool,
    pub pass: bool,
}

/// q_{rj}(x,x) on the unit torus and on radii p, against p^{2s−n} at s = −rj.
pub fn cmd_nonlocality(n: usize, r: &RationalPower, r_text: &str, j: u32, p: f64) -> Result<NonlocalityReport> {
    if r.times_is_integer(j as i64) {
        return Err(Error::Domain(format!("r·j = {r}·{j} is an integer; the scaling comparison does not apply")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidModel(format!("radius scale must be positive, got {p}")));
    }
    let s = -r.value * j as f64;
    let unit = SpectralModel::unit(n, 0.0)?;
    let scaled = SpectralModel::new(vec![p; n], 0.0)?;
    let sc = Complex64::new(s, 0.0);
    let q_unit = q_kernel_diag(&unit, sc)?.value.re;
    let q_scaled = q_kernel_diag(&scaled, sc)?.value.re;
    let ratio = q_scaled / q_unit;
    let predicted_ratio = p.powf(2.0 * s - n as f64);
    let rel_err = (ratio - predicted_ratio).abs() / predicted_ratio;
    let zeta_value = spectral_zeta(&unit, sc)?.re;
    let zeta_nonzero = zeta_value.abs() > 1e-12;
    Ok(NonlocalityReport {
        n,
        r: r_text.to_string(),
        j,
        p,
        s,
        q_unit,
        q_scaled,
        ratio,
        predicted_ratio,
        rel_err,
        zeta_value,
        zeta_nonzero,
        pass: zeta_nonzero && rel_err < 1e-10,
    })
}

/// CSV rows `rho,omega0,value,scaled` with scaled = ρⁿ·value/ω₀.
pub fn cmd_blowup<W: Write>(
    out: W,
    model: &SpectralModel,
    direction: &[f64],
    omega0: &[f64],
    rhos: &[f64],
    base: &[f64],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "omega0", "value", "scaled"])?;
    for &rho in rhos {
        for &o in omega0 {
            let pt = BlowupPoint::from_direction(rho, o, direction, base.to_vec())?;
            let value = blowup_pullback(model, &pt)?;
            let scaled = if o == 0.0 { f64::NAN } else { rho.powi(model.n as i32) * value / o };
            w.write_record([fmt17(rho), fmt17(o), fmt17(value), fmt17(scaled)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sets the global rayon pool from FRACHEAT_THREADS, if present.
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("FRACHEAT_THREADS") else { return Ok(()) };
    let threads: usize = v.trim().parse().map_err(|_| format!("FRACHEAT_THREADS must be a positive integer, got {v}"))?;
    if threads == 0 {
        return Err("FRACHEAT_THREADS must be positive".into());
    }
    // a pool built earlier in the process (tests) is fine to keep
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn config(model: &ModelArgs, r: Option<&str>, ts: Vec<f64>, run: &RunArgs) -> CliResult<RunConfig> {
    Ok(RunConfig {
        model: model.build()?,
        r: parse_r(r)?,
        r_text: r.map(str::to_string),
        ts,
        tol: run.tol,
        budget: run.budget,
        contour: None,
        out: run.out.clone(),
    })
}

fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Eigensum { model, cutoff, t, r, run } => {
            let cfg = config(&model, r.as_deref(), vec![], &run)?;
            let mut list = enumerate_eigenvalues_with_budget(&cfg.model, cutoff, cfg.budget)?;
            if let Some(t) = t {
                list = list.with_tail(&cfg.model, t, cfg.r.map_or(1.0, |r| r.value));
            }
            let mut w = csv::Writer::from_writer(writer(&cfg.out)?);
            w.write_record(["lambda", "multiplicity"]).map_err(Error::from)?;
            for (l, m) in &list.entries {
                w.write_record([fmt17(*l), m.to_string()]).map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            eprintln!(
                "{} eigenvalues ≤ {} ({} distinct); tail bound {:e} at t = {}, r = {}",
                list.total_count(),
                cutoff,
                list.entries.len(),
                list.tail_bound,
                list.tail_t,
                list.tail_r
            );
            Ok(EXIT_OK)
        }
        Command::Heat { model, point, r, method, compare_with, t_geom, contour, run } => {
            let mut cfg = config(&model, r.as_deref(), t_geom.points(), &run)?;
            let (x, y) = point.resolve(cfg.model.n)?;
            for m in std::iter::once(method).chain(compare_with) {
                method_checks(&cfg, m, &x, &y)?;
            }
            if let Some(r) = cfg.r {
                cfg.contour = Some(contour.params(&cfg.model, &r, cfg.tol));
            }
            cmd_heat(&cfg, method, compare_with, &x, &y)?;
            Ok(EXIT_OK)
        }
        Command::Zeta { model, s, x, y, run } => {
            let model = model.build()?;
            match (x, y) {
                (None, None) => write_json(&run.out, &epstein_zeta(&model, s.0)?)?,
                (x, y) => {
                    let x = x.unwrap_or_else(|| vec![0.0; model.n]);
                    let y = y.unwrap_or_else(|| vec![0.0; model.n]);
                    if x.len() != model.n || y.len() != model.n {
                        return usage(format!("points need {} coordinates", model.n));
                    }
                    write_json(&run.out, &q_kernel_offdiag(&model, s.0, &x, &y)?)?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Predict { model, r, max_exponent, offdiag, terms, point, run } => {
            let cfg = config(&model, Some(&r), vec![], &run)?;
            let r = cfg.r.expect("parsed above");
            let (x, y) = point.resolve(cfg.model.n)?;
            let mut report = if offdiag {
                offdiag_taylor_prediction(&cfg.model, &r, &x, &y, terms)?
            } else {
                let template = predict_exponents(cfg.model.n, &r, max_exponent)?;
                predict_coefficients(&cfg.model, &r, &template, &x)?
            };
            report.r = cfg.r_text.clone().unwrap_or(report.r);
            write_json(&cfg.out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Fit { model, r, max_exponent, guard, t_geom, samples, method, rel_tol, abs_floor, contour, run } => {
            let mut cfg = config(&model, Some(&r), t_geom.points(), &run)?;
            let zero = vec![0.0; cfg.model.n];
            method_checks(&cfg, method, &zero, &zero)?;
            let r = cfg.r.expect("parsed above");
            cfg.contour = Some(contour.params(&cfg.model, &r, cfg.tol));
            let grid = match samples {
                Some(p) => Some(SampleGrid::read_csv(BufReader::new(File::open(p).map_err(Error::from)?))?),
                None => None,
            };
            let report = cmd_predict_fit(&cfg, max_exponent, guard, grid, method, rel_tol, abs_floor)?;
            write_json(&cfg.out, &report)?;
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Verify { quick, fault_seed, json, out } => {
            let report = run_suite(VerifyOptions { quick, fault_seed });
            if json {
                write_json(&out, &report)?;
            } else {
                let mut w = writer(&out)?;
                for line in report.lines() {
                    writeln!(w, "{line}").map_err(Error::from)?;
                }
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                writeln!(w, "{} checks, {} failed, {:.1}s", report.checks.len(), failed, report.seconds)
                    .map_err(Error::from)?;
            }
            Ok(if report.all_pass { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Nonlocality { n, r, j, p, out } => {
            let power = parse_r(Some(&r))?.expect("given");
            if power.times_is_integer(j as i64) {
                return usage(format!("r·j = {r}·{j} is an integer; the scaling comparison does not apply"));
            }
            let report = cmd_nonlocality(n, &power, &r, j, p)?;
            write_json(&out, &report)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Blowup { model, direction, omega0, rho_geom, base, out } => {
            let model = model.build()?;
            let n = model.n;
            let direction = direction.unwrap_or_else(|| {
                let mut d = vec![0.0; n];
                d[0] = 1.0;
                d
            });
            let base = base.unwrap_or_else(|| vec![0.0; n]);
            if direction.len() != n || base.len() != n {
                return usage(format!("--direction and --base need {n} components"));
            }
            if omega0.iter().any(|o| !(0.0..=1.0).contains(o)) {
                return usage("--omega0 values must lie in [0, 1]");
            }
            cmd_blowup(writer(&out)?, &model, &direction, &omega0, &rho_geom.points(), &base)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success, 1 a verdict failed, 2 bad usage, 3 computation error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
