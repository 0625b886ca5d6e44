//! Command-line front end: `cap`, `field` and `hm`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bie::{SolveMode, SolverOptions};
use crate::condenser::{run, RunOutput};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::field::{grid, harmonic_measure_field, FieldGrid};
use crate::round_sig;

#[derive(Debug, Parser)]
#[command(
    name = "condcap",
    version,
    about = "Capacity and potential of generalized condensers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the capacity and the constants; prints a JSON document.
    Cap {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate the potential on the configured grid and write CSV.
    Field {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Harmonic measure of one plate at the configured points and grid.
    Hm {
        config: PathBuf,
        /// Plate index, starting at 1.
        #[arg(long)]
        component: usize,
        /// Grid CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Direct,
    Iterative,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Nodes per boundary component.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

impl Overrides {
    fn apply(&self, cfg: &ProblemConfig) -> (usize, SolverOptions) {
        let mut opts = cfg.solver_options();
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(maxit) = self.maxit {
            opts.maxit = maxit;
        }
        if let Some(mode) = self.mode {
            opts.mode = match mode {
                ModeArg::Direct => SolveMode::Direct,
                ModeArg::Iterative => SolveMode::Iterative,
            };
        }
        (self.n.unwrap_or(cfg.n), opts)
    }
}

fn num(v: f64) -> Value {
    json!(round_sig(v))
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// The capacity result document, timing excluded.
pub fn cap_document(out: &RunOutput, n: usize, cfg: &ProblemConfig) -> Value {
    let case = out.case();
    let bie: Vec<Value> = out
        .solutions()
        .iter()
        .map(|s| {
            json!({
                "iterations": s.iterations,
                "residual": num(s.residual),
                "h_deviation": num(s.h_deviation.iter().cloned().fold(0.0, f64::max)),
            })
        })
        .collect();
    let mut doc = json!({
        "capacity": num(out.capacity),
        "case": case.label(),
        "n": n,
        "m": case.m,
        "ell": case.ell,
        "m_prime": case.m_prime,
        "ell_prime": case.ell_prime,
        "a": nums(&out.constants.a),
        "c": num(out.constants.c),
        "nu": nums(&out.constants.nu),
        "sum_a": num(out.constants.sum_a()),
        "field_point": out.prepared.field_point().map(|z| nums(&[z.re, z.im])),
        "diagnostics": {"bie": bie},
    });
    if let Some(name) = &cfg.name {
        doc["name"] = json!(name);
    }
    if let Some(exp) = cfg.expected {
        let rel = ((out.capacity - exp.capacity) / exp.capacity).abs();
        doc["expected"] = json!({
            "capacity": exp.capacity,
            "rel_tol": exp.rel_tol,
            "rel_error": num(rel),
            "pass": rel <= exp.rel_tol,
        });
    }
    doc
}

fn cmd_cap(config: &Path, overrides: &Overrides, stdout: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let cfg = ProblemConfig::load(config)?;
    let (n, opts) = overrides.apply(&cfg);
    let problem = cfg.problem()?;
    let out = run(&problem, n, &opts)?;
    let mut doc = cap_document(&out, n, &cfg);
    doc["wall_time_s"] = num(start.elapsed().as_secs_f64());
    emit(stdout, &doc)
}

fn emit(stdout: &mut dyn Write, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("json serializes");
    writeln!(stdout, "{text}").map_err(|e| Error::Config(format!("cannot write output: {e}")))
}

fn grid_summary(g: &FieldGrid, path: &Path) -> Value {
    json!({
        "out": path.display().to_string(),
        "nx": g.nx,
        "ny": g.ny,
        "in_field": g.in_field().count(),
    })
}

fn cmd_field(
    config: &Path,
    out_path: &Path,
    overrides: &Overrides,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cfg = ProblemConfig::load(config)?;
    let layout = cfg
        .grid
        .ok_or_else(|| Error::Config("the field command needs a grid in the config".into()))?;
    let (n, opts) = overrides.apply(&cfg);
    let out = run(&cfg.problem()?, n, &opts)?;
    let g = grid(&out.field, layout.bounds, layout.nx, layout.ny)?;
    write_file(out_path, &g.to_csv())?;
    let mut doc = grid_summary(&g, out_path);
    doc["capacity"] = num(out.capacity);
    emit(stdout, &doc)
}

fn cmd_hm(
    config: &Path,
    component: usize,
    out_path: Option<&Path>,
    overrides: &Overrides,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cfg = ProblemConfig::load(config)?;
    let (n, opts) = overrides.apply(&cfg);
    let geometry = cfg.geometry()?;
    if out_path.is_some() && cfg.grid.is_none() {
        return Err(Error::Config("--out needs a grid in the config".into()));
    }
    let field = harmonic_measure_field(&geometry, component, n, &opts)?;
    let zs = cfg.points();
    let omega = field.potential_at(&zs)?;
    let points: Vec<Value> = zs
        .iter()
        .zip(&omega)
        .map(|(z, w)| json!({"x": num(z.re), "y": num(z.im), "omega": num(*w)}))
        .collect();
    let mut doc = json!({
        "component": component,
        "n": n,
        "points": points,
    });
    if let (Some(path), Some(layout)) = (out_path, cfg.grid) {
        let g = grid(&field, layout.bounds, layout.nx, layout.ny)?;
        write_file(path, &g.to_csv())?;
        doc["grid"] = grid_summary(&g, path);
    }
    emit(stdout, &doc)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Cap { config, overrides } => cmd_cap(config, overrides, stdout),
        Command::Field {
            config,
            out,
            overrides,
        } => cmd_field(config, out, overrides, stdout),
        Command::Hm {
            config,
            component,
            out,
            overrides,
        } => cmd_hm(config, *component, out.as_deref(), overrides, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
