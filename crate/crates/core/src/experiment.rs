//! JSON-described experiments and the files they produce.
//!
//! A spec names a terminal function, the uncertainty set, solver settings and
//! the artifacts wanted. [`run`] writes into an output directory:
//!
//! | output           | file                         |
//! |------------------|------------------------------|
//! | `value`          | `value.json`, `timing.json`  |
//! | `surface`        | `surface.csv` (`t,x,u` or `t,x1,x2,u`) |
//! | `convergence`    | `convergence.csv` (`n,value,abs_error`) |
//! | `oracle-compare` | `compare.csv`, `compare.json` |
//!
//! Everything except `timing.json` is a pure function of the spec.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusFunction};
use crate::error::{Error, Result};
use crate::expectation::Backend;
use crate::oracle::{fd_solve, FdConfig};
use crate::solver1d::{self, convergence_study, SolverConfig1D};
use crate::solver2d::{self, ScatterGrid2D, SolverConfig2D};
use crate::surface::SolutionSurface;
use crate::types::{CovariancePoint, CovarianceSet2D, TerminalFunction, TerminalFunction2D, VarianceInterval};

/// Terminal function: a corpus name or polynomial coefficients `c_0, c_1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Corpus(String),
    Polynomial { polynomial: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub sigma1: IntervalSpec,
    pub sigma2: IntervalSpec,
    pub rho_lo: f64,
    pub rho_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Quad,
    Mc,
    McCv,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" => Ok(BackendKind::Quad),
            "mc" => Ok(BackendKind::Mc),
            "mc-cv" => Ok(BackendKind::McCv),
            other => Err(Error::spec(
                "solver.backend",
                format!("expected quad, mc or mc-cv, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub n: usize,
    /// Grid half width `K` (1D).
    pub half_width: f64,
    /// Number of grid intervals `L` (1D).
    pub intervals: usize,
    pub backend: BackendKind,
    pub order: usize,
    /// Monte Carlo sample size `M`.
    pub samples: usize,
    /// Seeds Monte Carlo draws (1D) or the scatter grid (2D).
    pub seed: u64,
    pub scatter_points: usize,
    pub knots: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            n: 50,
            half_width: solver1d::DEFAULT_HALF_WIDTH,
            intervals: solver1d::DEFAULT_INTERVALS,
            backend: BackendKind::Quad,
            order: 64,
            samples: 10_000,
            seed: 0,
            scatter_points: solver2d::DEFAULT_SCATTER_POINTS,
            knots: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Value,
    Surface,
    Convergence,
    OracleCompare,
}

fn default_dimension() -> usize {
    1
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Value]
}

fn default_convergence_n() -> Vec<usize> {
    vec![5, 10, 20, 40, 80]
}

fn default_window() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub phi: PhiSpec,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<IntervalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<BoxSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default = "default_convergence_n")]
    pub convergence_n: Vec<usize>,
    /// Oracle comparison covers `|x| <= compare_window`.
    #[serde(default = "default_window")]
    pub compare_window: f64,
}

/// Command-line overrides of scalar spec fields.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub half_width: Option<f64>,
    pub backend: Option<BackendKind>,
}

/// A checked spec, ready to run.
#[derive(Debug, Clone)]
pub enum Plan {
    OneD {
        phi: TerminalFunction,
        cfg: SolverConfig1D,
    },
    TwoD {
        phi: TerminalFunction2D,
        cfg: SolverConfig2D,
    },
}

fn at(field: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::spec(field, e.to_string())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.n {
            self.solver.n = n;
        }
        if let Some(seed) = o.seed {
            self.solver.seed = seed;
        }
        if let Some(k) = o.half_width {
            self.solver.half_width = k;
        }
        if let Some(b) = o.backend {
            self.solver.backend = b;
        }
    }

    fn backend(&self) -> Backend {
        let s = &self.solver;
        match s.backend {
            BackendKind::Quad => Backend::Quadrature { order: s.order },
            BackendKind::Mc => Backend::MonteCarlo { samples: s.samples, seed: s.seed },
            BackendKind::McCv => Backend::MonteCarloCv { samples: s.samples, seed: s.seed },
        }
    }

    /// Checks every field and builds the solver configuration.
    pub fn plan(&self) -> Result<Plan> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::spec("name", "must be non-empty and contain no path separators"));
        }
        if self.solver.n == 0 {
            return Err(Error::spec("solver.n", "must be >= 1"));
        }
        let phi = match &self.phi {
            PhiSpec::Corpus(name) => corpus::lookup(name).ok_or_else(|| {
                Error::spec(
                    "phi",
                    format!("unknown corpus function `{name}` (known: {})", corpus::list_corpus().join(", ")),
                )
            })?,
            PhiSpec::Polynomial { polynomial } => {
                if polynomial.is_empty() || polynomial.iter().any(|c| !c.is_finite()) {
                    return Err(Error::spec("phi.polynomial", "needs at least one finite coefficient"));
                }
                CorpusFunction::OneD(TerminalFunction::polynomial(polynomial.clone()))
            }
        };
        if phi.dimension() != self.dimension {
            return Err(Error::spec(
                "dimension",
                format!("is {} but phi is {}-dimensional", self.dimension, phi.dimension()),
            ));
        }
        match phi {
            CorpusFunction::OneD(phi) => {
                let v = self
                    .variance
                    .ok_or_else(|| Error::spec("variance", "required for dimension 1"))?;
                let variance = VarianceInterval::new(v.sigma_lo, v.sigma_hi).map_err(at("variance"))?;
                let backend = self.backend();
                backend.validate().map_err(at("solver"))?;
                let cfg = SolverConfig1D::new(variance, self.solver.n)
                    .and_then(|c| c.with_grid(self.solver.half_width, self.solver.intervals))
                    .and_then(|c| c.with_backend(backend))
                    .map_err(at("solver"))?;
                if self.outputs.contains(&Output::Convergence) && self.convergence_n.contains(&0) {
                    return Err(Error::spec("convergence_n", "entries must be >= 1"));
                }
                if !(self.compare_window > 0.0 && self.compare_window < self.solver.half_width) {
                    return Err(Error::spec("compare_window", "must lie in (0, K)"));
                }
                Ok(Plan::OneD { phi, cfg })
            }
            CorpusFunction::TwoD(phi) => {
                let b = self
                    .covariance
                    .ok_or_else(|| Error::spec("covariance", "required for dimension 2"))?;
                let s1 = VarianceInterval::new(b.sigma1.sigma_lo, b.sigma1.sigma_hi)
                    .map_err(at("covariance.sigma1"))?;
                let s2 = VarianceInterval::new(b.sigma2.sigma_lo, b.sigma2.sigma_hi)
                    .map_err(at("covariance.sigma2"))?;
                let cov = CovarianceSet2D::new(s1, s2, b.rho_lo, b.rho_hi).map_err(at("covariance"))?;
                if self.solver.backend != BackendKind::Quad {
                    return Err(Error::Unsupported(
                        "Monte Carlo backends are not implemented in two dimensions; use `quad`".into(),
                    ));
                }
                if let Some(o) = self
                    .outputs
                    .iter()
                    .find(|o| matches!(o, Output::Convergence | Output::OracleCompare))
                {
                    return Err(Error::spec(
                        "outputs",
                        format!("{o:?} is only available in one dimension"),
                    ));
                }
                let grid = ScatterGrid2D::sample(self.solver.scatter_points, cov.sigma_max(), self.solver.seed)
                    .map_err(at("solver.scatter_points"))?;
                let mut cfg = SolverConfig2D::new(cov, self.solver.n)
                    .and_then(|c| c.with_grid(grid))
                    .map_err(at("solver"))?;
                cfg.order = self.solver.order;
                cfg.fit.knots = self.solver.knots;
                cfg.validate().map_err(at("solver"))?;
                Ok(Plan::TwoD { phi, cfg })
            }
        }
    }
}

/// Maximizing volatility (1D) or covariance point (2D) at the origin.
/// Serialized as `argmax_sigma` or `argmax` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Argmax {
    #[serde(rename = "argmax_sigma")]
    Sigma(f64),
    #[serde(rename = "argmax")]
    Box(CovariancePoint),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueReport {
    pub name: String,
    pub value: f64,
    #[serde(flatten)]
    pub argmax: Argmax,
    pub config: ExperimentSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub max_abs_error: f64,
    pub window: f64,
    /// `x` where the largest error occurs.
    pub at: f64,
    pub oracle_dx: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub value: ValueReport,
    pub compare: Option<CompareSummary>,
    pub files: Vec<PathBuf>,
    pub wall_time_ms: u128,
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// FD reference lattice spacing.
pub const ORACLE_DX: f64 = 0.01;

/// FD lattice for comparisons: `dx = 0.01`, half width `max(10, 2 window)`.
fn oracle_config(v: VarianceInterval, window: f64) -> Result<FdConfig> {
    FdConfig::with_cfl_fraction(v, ORACLE_DX, (2.0 * window).max(10.0), 0.9, 1)
}

/// `u(0, 0)` from the FD reference.
pub fn fd_reference_value(phi: &TerminalFunction, v: VarianceInterval) -> Result<f64> {
    Ok(fd_solve(phi, &oracle_config(v, 1.0)?)?.value_at_zero_time(0.0))
}

/// Runs `spec` and writes the requested artifacts into `out`.
pub fn run(spec: &ExperimentSpec, out: &Path) -> Result<RunReport> {
    let plan = spec.plan()?;
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let wants = |o: Output| spec.outputs.contains(&o);
    let mut compare = None;

    let value = match plan {
        Plan::OneD { phi, cfg } => {
            let (value, argmax) = if wants(Output::Surface) || wants(Output::OracleCompare) {
                let (surface, m) = solver1d::solve_with_value(&phi, &cfg)?;
                if wants(Output::Surface) {
                    files.push(write(out, "surface.csv", &surface_csv_1d(&surface))?);
                }
                if wants(Output::OracleCompare) {
                    let (csv, summary) = compare_1d(&phi, &surface, spec.compare_window)?;
                    files.push(write(out, "compare.csv", &csv)?);
                    files.push(write(out, "compare.json", &to_json(&summary)?)?);
                    compare = Some(summary);
                }
                (m.value, m.argmax)
            } else {
                let m = solver1d::expectation(&phi, &cfg)?;
                (m.value, m.argmax)
            };
            if wants(Output::Convergence) {
                let reference = fd_reference_value(&phi, cfg.variance)?;
                let rows = convergence_study(&phi, &cfg, &spec.convergence_n, reference)?;
                let mut csv = String::from("n,value,abs_error\n");
                for r in rows {
                    let _ = writeln!(csv, "{},{},{}", r.n, fmt_float(r.value), fmt_float(r.abs_error));
                }
                files.push(write(out, "convergence.csv", &csv)?);
            }
            ValueReport {
                name: spec.name.clone(),
                value,
                argmax: Argmax::Sigma(argmax),
                config: spec.clone(),
            }
        }
        Plan::TwoD { phi, cfg } => {
            let m = if wants(Output::Surface) {
                let (surface, m) = solver2d::solve_2d_with_value(&phi, &cfg)?;
                files.push(write(out, "surface.csv", &surface_csv_2d(&surface))?);
                m
            } else {
                solver2d::expectation_2d(&phi, &cfg)?
            };
            ValueReport {
                name: spec.name.clone(),
                value: m.value,
                argmax: Argmax::Box(m.argmax),
                config: spec.clone(),
            }
        }
    };
    let wall_time_ms = start.elapsed().as_millis();
    if wants(Output::Value) {
        files.push(write(out, "value.json", &to_json(&value)?)?);
        files.push(write(
            out,
            "timing.json",
            &to_json(&serde_json::json!({ "wall_time_ms": wall_time_ms as u64 }))?,
        )?);
    }
    Ok(RunReport {
        value,
        compare,
        files,
        wall_time_ms,
    })
}

/// [`run`] with the oracle comparison forced on (1D only).
pub fn compare(spec: &ExperimentSpec, out: &Path) -> Result<RunReport> {
    let mut spec = spec.clone();
    if spec.dimension != 1 {
        return Err(Error::spec("dimension", "oracle comparison is only available in one dimension"));
    }
    if !spec.outputs.contains(&Output::OracleCompare) {
        spec.outputs.push(Output::OracleCompare);
    }
    run(&spec, out)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Per-node errors of the final iterate against FD `u(0, ·)` on `|x| <= window`.
pub fn compare_1d(
    phi: &TerminalFunction,
    surface: &SolutionSurface,
    window: f64,
) -> Result<(String, CompareSummary)> {
    let fd = fd_solve(phi, &oracle_config(*surface.variance(), window)?)?;
    let last = surface.last();
    let mut csv = String::from("x,solver,oracle,error\n");
    let mut summary = CompareSummary {
        max_abs_error: 0.0,
        window,
        at: 0.0,
        oracle_dx: ORACLE_DX,
    };
    for (x, u) in last.grid().points().iter().zip(last.values()) {
        if x.abs() > window {
            continue;
        }
        let reference = fd.value_at_zero_time(*x);
        let err = u - reference;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_float(*x),
            fmt_float(*u),
            fmt_float(reference),
            fmt_float(err)
        );
        if err.abs() > summary.max_abs_error {
            summary.max_abs_error = err.abs();
            summary.at = *x;
        }
    }
    Ok((csv, summary))
}

/// `t,x,u` rows, `t` descending then `x` ascending.
pub fn surface_csv_1d(surface: &SolutionSurface) -> String {
    let mut csv = String::from("t,x,u\n");
    for (i, it) in surface.iterations().iter().enumerate() {
        let t = fmt_float(surface.time_of(i));
        for (x, u) in it.grid().points().iter().zip(it.values()) {
            let _ = writeln!(csv, "{t},{},{}", fmt_float(*x), fmt_float(*u));
        }
    }
    csv
}

/// `t,x1,x2,u` rows, `t` descending then `(x1, x2)` ascending.
pub fn surface_csv_2d(surface: &solver2d::SolutionSurface2D) -> String {
    let mut order: Vec<usize> = (0..surface.grid().len()).collect();
    let pts = surface.grid().points();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    let mut csv = String::from("t,x1,x2,u\n");
    for (i, it) in surface.iterations().iter().enumerate() {
        let t = fmt_float(surface.time_of(i));
        for &j in &order {
            let _ = writeln!(
                csv,
                "{t},{},{},{}",
                fmt_float(pts[j][0]),
                fmt_float(pts[j][1]),
                fmt_float(it.values()[j])
            );
        }
    }
    csv
}

/// One parsed row of a 1D surface CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

pub fn parse_surface_csv_1d(text: &str) -> Result<Vec<SurfaceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("t,x,u") {
        return Err(Error::InvalidConfig("surface CSV must start with `t,x,u`".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let parts: Vec<&str> = line.split(',').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("surface CSV line {}: {e}", i + 2)))
            };
            if parts.len() != 3 {
                return Err(Error::InvalidConfig(format!("surface CSV line {}: expected 3 fields", i + 2)));
            }
            Ok(SurfaceRow {
                t: num(parts[0])?,
                x: num(parts[1])?,
                u: num(parts[2])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::from_json(text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let s = spec(r#"{"name": "sq", "phi": "square", "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0}}"#);
        assert_eq!(s.dimension, 1);
        assert_eq!(s.solver, SolverSpec::default());
        assert_eq!(s.outputs, vec![Output::Value]);
        assert!(matches!(s.plan().unwrap(), Plan::OneD { .. }));
    }

    #[test]
    fn polynomial_phi() {
        let s = spec(r#"{"name": "p", "phi": {"polynomial": [1.0, 0.0, 2.0]},
                         "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0}}"#);
        match s.plan().unwrap() {
            Plan::OneD { phi, .. } => assert_eq!(phi.eval(2.0), 9.0),
            _ => panic!(),
        }
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Spec { field, .. } => field,
            other => panic!("not a spec error: {other}"),
        }
    }

    #[test]
    fn field_level_errors() {
        let bad = spec(r#"{"name": "x", "phi": "square", "variance": {"sigma_lo": 1.0, "sigma_hi": 0.5}}"#);
        let err = bad.plan().unwrap_err();
        assert!(err.to_string().contains("sigma_lo <= sigma_hi"), "{err}");
        assert_eq!(field_of(err), "variance");

        let bad = spec(r#"{"name": "x", "phi": "nope", "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0}}"#);
        assert_eq!(field_of(bad.plan().unwrap_err()), "phi");

        let bad = spec(r#"{"name": "x", "phi": "cube", "dimension": 2,
                           "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0}}"#);
        assert_eq!(field_of(bad.plan().unwrap_err()), "dimension");

        let bad = spec(r#"{"name": "x", "phi": "cube", "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0},
                           "solver": {"half_width": 2.0}}"#);
        assert_eq!(field_of(bad.plan().unwrap_err()), "solver");

        assert!(ExperimentSpec::from_json(r#"{"name": "x", "phi": "cube", "bogus": 1}"#).is_err());
    }

    #[test]
    fn two_dimensional_monte_carlo_is_rejected() {
        let s = spec(r#"{"name": "c2", "phi": "additive-cube-2d", "dimension": 2,
            "covariance": {"sigma1": {"sigma_lo": 0.5, "sigma_hi": 1.0},
                           "sigma2": {"sigma_lo": 0.5, "sigma_hi": 1.0}, "rho_lo": -0.5, "rho_hi": 0.5},
            "solver": {"backend": "mc-cv"}}"#);
        assert!(matches!(s.plan(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn overrides_apply() {
        let mut s = spec(r#"{"name": "sq", "phi": "square", "variance": {"sigma_lo": 0.5, "sigma_hi": 1.0}}"#);
        s.apply(&Overrides {
            n: Some(7),
            seed: Some(3),
            half_width: Some(6.0),
            backend: Some("mc".parse().unwrap()),
        });
        assert_eq!((s.solver.n, s.solver.seed, s.solver.half_width), (7, 3, 6.0));
        assert_eq!(s.solver.backend, BackendKind::Mc);
        assert!("bogus".parse::<BackendKind>().is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678901234567] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
