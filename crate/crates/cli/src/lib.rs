//! Command-line front end for `cqexp-core`.
//!
//! Exit codes: `0` success, `1` an inequality suite found a violation, `2`
//! invalid input or usage.

pub mod files;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use cqexp_core::channel::{
    e0_derivatives, e0_derivatives_forward, e0_quantum, ExponentSolver, OptimizerConfig,
    ProbabilityDistribution, DEFAULT_DERIVATIVE_STEP, DEFAULT_S_MAX,
};
use cqexp_core::geomean::{weighted_geomean, weighted_geomean_limit, GeomeanConfig};
use cqexp_core::verifier::{parse_selector, run_suites, InequalityReport, SuiteConfig};
use cqexp_core::Tolerances;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use files::{parse_channel, parse_matrix, write_matrix, ChannelSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cqexp_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cqexp",
    version,
    about = "Error exponents of classical-quantum channels"
)]
pub struct Cli {
    /// Base seed for every randomized computation.
    #[arg(long, global = true, env = "CQEXP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Output does not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Relative slack for inequality checks.
    #[arg(long, global = true)]
    pub tol_slack: Option<f64>,
    /// PSD tolerance for inputs.
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    /// Hermiticity tolerance for inputs.
    #[arg(long, global = true)]
    pub tol_herm: Option<f64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate E₀(s, P) and its first two s-derivatives.
    E0 {
        channel: PathBuf,
        /// Input distribution as comma-separated weights; defaults to the
        /// file's `dist`, then to uniform.
        #[arg(long, value_delimiter = ',')]
        dist: Option<Vec<f64>>,
        #[arg(long, default_value = "0:8:0.5")]
        s_grid: Grid,
    },
    /// Tabulate the random-coding and sphere-packing exponents.
    Exponents {
        channel: PathBuf,
        #[arg(long, default_value = "0:1:0.1")]
        r_grid: Grid,
        #[arg(long, default_value_t = DEFAULT_S_MAX)]
        s_max: f64,
    },
    /// Weighted geometric mean of two PSD matrices.
    Geomean {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Run inequality suites and emit their reports.
    Verify {
        /// all, logmajor, norm-power, vector-power, trace-convex, holder,
        /// core-lemma, geomean-props, proof-chain, concavity
        selector: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 6)]
        d_max: usize,
    },
}

/// Inclusive grid `min:max:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts.as_slice() else {
            return Err(format!("expected min:max:step, got {s:?}"));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("not a finite number: {x:?}"))
        };
        let grid = Grid {
            min: num(min)?,
            max: num(max)?,
            step: num(step)?,
        };
        if !(grid.step > 0.0) {
            return Err(format!("step must be positive, got {}", grid.step));
        }
        if grid.max < grid.min {
            return Err(format!("empty grid: max {} < min {}", grid.max, grid.min));
        }
        Ok(grid)
    }
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Output of a command and the exit code it maps to.
#[derive(Debug, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            exit_code: 0,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_channel(path: &Path) -> Result<ChannelSpec, CliError> {
    parse_channel(&path.display().to_string(), &read(path)?)
}

impl Cli {
    fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        for (value, slot, name) in [
            (self.tol_slack, &mut tol.slack, "--tol-slack"),
            (self.tol_psd, &mut tol.psd_tol, "--tol-psd"),
            (self.tol_herm, &mut tol.herm_tol, "--tol-herm"),
        ] {
            if let Some(v) = value {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(CliError::Input(format!(
                        "{name} must be a non-negative number"
                    )));
                }
                *slot = v;
            }
        }
        Ok(tol)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        if self.workers == 0 {
            return Err(CliError::Input("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Input(format!("cannot start workers: {e}")))
    }
}

/// Runs the parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tolerances = cli.tolerances()?;
    let pool = cli.pool()?;
    let format = cli.format.unwrap_or(match cli.command {
        Command::Verify { .. } | Command::Geomean { .. } => Format::Json,
        _ => Format::Csv,
    });
    pool.install(|| match &cli.command {
        Command::E0 {
            channel,
            dist,
            s_grid,
        } => cmd_e0(channel, dist.as_deref(), s_grid, format),
        Command::Exponents {
            channel,
            r_grid,
            s_max,
        } => cmd_exponents(channel, r_grid, *s_max, cli.seed, format),
        Command::Geomean { a, b, s } => cmd_geomean(a, b, *s, format),
        Command::Verify {
            selector,
            trials,
            d_min,
            d_max,
        } => {
            let cfg = SuiteConfig {
                trials: *trials,
                d_min: *d_min,
                d_max: *d_max,
                seed: cli.seed,
                workers: cli.workers,
                tolerances,
                geomean: GeomeanConfig::default(),
            };
            cmd_verify(selector, &cfg, format)
        }
    })
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

#[derive(Serialize)]
struct E0Row {
    s: f64,
    e0_bits: f64,
    de0_ds: f64,
    d2e0_ds2: f64,
}

pub fn cmd_e0(
    channel: &Path,
    dist: Option<&[f64]>,
    grid: &Grid,
    format: Format,
) -> Result<Outcome, CliError> {
    let spec = load_channel(channel)?;
    let w = &spec.channel;
    let p = match (dist, spec.dist) {
        (Some(v), _) => ProbabilityDistribution::new(v.to_vec())?,
        (None, Some(p)) => p,
        (None, None) => ProbabilityDistribution::uniform(w.alphabet_size())?,
    };
    let points = grid.points();
    if points[0] < 0.0 {
        return Err(CliError::Input(format!(
            "s grid starts below zero at {}",
            points[0]
        )));
    }
    let h = DEFAULT_DERIVATIVE_STEP;
    let rows = points
        .par_iter()
        .map(|&s| {
            let (d1, d2) = if s >= h {
                e0_derivatives(w, &p, s, h)?
            } else {
                e0_derivatives_forward(w, &p, s, h)?
            };
            Ok(E0Row {
                s,
                e0_bits: e0_quantum(w, &p, s)?,
                de0_ds: d1,
                d2e0_ds2: d2,
            })
        })
        .collect::<Result<Vec<_>, cqexp_core::Error>>()?;
    Ok(Outcome::ok(match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("s,E0_bits,dE0_ds,d2E0_ds2\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(r.s),
                    fmt_f64(r.e0_bits),
                    fmt_f64(r.de0_ds),
                    fmt_f64(r.d2e0_ds2)
                )
                .unwrap();
            }
            out
        }
    }))
}

#[derive(Serialize)]
struct ExponentRow {
    rate: f64,
    er_bits: f64,
    er_arg_s: f64,
    /// `null` when divergent.
    esp_bits: Option<f64>,
    esp_divergent: bool,
    esp_arg_s: f64,
    s_cap_hit: bool,
    converged: bool,
}

pub fn cmd_exponents(
    channel: &Path,
    r_grid: &Grid,
    s_max: f64,
    seed: u64,
    format: Format,
) -> Result<Outcome, CliError> {
    let spec = load_channel(channel)?;
    if !(s_max >= 1.0) || !s_max.is_finite() {
        return Err(CliError::Input(format!(
            "--s-max must be a finite number ≥ 1, got {s_max}"
        )));
    }
    let rates = r_grid.points();
    if rates[0] < 0.0 {
        return Err(CliError::Input(format!(
            "rate grid starts below zero at {}",
            rates[0]
        )));
    }
    let opt = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let solver = ExponentSolver::new(&spec.channel, opt, s_max)?;
    let rows = rates
        .par_iter()
        .map(|&r| {
            let er = solver.random_coding(r)?;
            let esp = solver.sphere_packing(r)?;
            Ok(ExponentRow {
                rate: r,
                er_bits: er.value,
                er_arg_s: er.arg_s,
                esp_bits: (!esp.divergent).then_some(esp.value),
                esp_divergent: esp.divergent,
                esp_arg_s: esp.arg_s,
                s_cap_hit: esp.s_cap_hit,
                converged: er.converged && esp.converged,
            })
        })
        .collect::<Result<Vec<_>, cqexp_core::Error>>()?;
    Ok(Outcome::ok(match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("R,Er_bits,Er_arg_s,Esp_bits_or_inf,Esp_arg_s,s_cap_hit\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(r.rate),
                    fmt_f64(r.er_bits),
                    fmt_f64(r.er_arg_s),
                    fmt_f64(r.esp_bits.unwrap_or(f64::INFINITY)),
                    fmt_f64(r.esp_arg_s),
                    r.s_cap_hit
                )
                .unwrap();
            }
            out
        }
    }))
}

pub fn cmd_geomean(a: &Path, b: &Path, s: f64, format: Format) -> Result<Outcome, CliError> {
    let ma = parse_matrix(&a.display().to_string(), &read(a)?)?;
    let mb = parse_matrix(&b.display().to_string(), &read(b)?)?;
    if !s.is_finite() {
        return Err(CliError::Input(format!("--s must be finite, got {s}")));
    }
    let mean = if (0.0..=1.0).contains(&s) {
        weighted_geomean_limit(&ma, &mb, s, &GeomeanConfig::default())?
    } else {
        weighted_geomean(&ma, &mb, s)?
    };
    let eigenvalues = &mean.eigen().eigenvalues;
    Ok(Outcome::ok(match format {
        Format::Json => write_matrix(mean.as_hermitian(), Some(eigenvalues)),
        Format::Csv => {
            let m = mean.as_matrix();
            let mut out = String::from("row,col,re,im\n");
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    writeln!(
                        out,
                        "{i},{j},{},{}",
                        fmt_f64(m[(i, j)].re),
                        fmt_f64(m[(i, j)].im)
                    )
                    .unwrap();
                }
            }
            out.push_str("\nindex,eigenvalue\n");
            for (k, v) in eigenvalues.iter().enumerate() {
                writeln!(out, "{k},{}", fmt_f64(*v)).unwrap();
            }
            out
        }
    }))
}

pub fn cmd_verify(selector: &str, cfg: &SuiteConfig, format: Format) -> Result<Outcome, CliError> {
    let suites = parse_selector(selector)?;
    cfg.validate()?;
    Ok(render_reports(&run_suites(&suites, cfg)?, format))
}

/// Formats suite reports; the exit code is `1` when any suite failed.
pub fn render_reports(reports: &[InequalityReport], format: Format) -> Outcome {
    let failed = reports.iter().any(|r| !r.passed());
    let output = match format {
        Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
        Format::Csv => {
            let mut out = String::from("suite,trials,violations,errors,worst_margin,worst_seed\n");
            for r in reports {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.suite_name,
                    r.trials,
                    r.violations,
                    r.errors,
                    fmt_f64(r.worst_margin),
                    r.worst_seed
                )
                .unwrap();
            }
            out
        }
    };
    Outcome {
        output,
        exit_code: u8::from(failed),
    }
}
