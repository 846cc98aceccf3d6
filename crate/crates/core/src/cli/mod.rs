//! Command line front end: scene configs, sweeps, validation and matrix reports.

pub mod config;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::expansion::{asymptotic_inverse, assemble_interaction_matrix, solve_coefficients};

pub use config::{check_scene_at, parse_scene, parse_scene_str, Config, SweepPlan};
pub use sweep::{run_sweep, write_report, SweepReport, SweepRow};
pub use validate::{run_validate, ValidationReport};

/// Exit status for a failed validation run.
pub const EXIT_VALIDATION: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "perforated", version, about = "Asymptotic expansions for small inclusions in 2D Dirichlet problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the expansion at one eps and print a summary.
    Expand(SceneArgs),
    /// Run the eps sweep and write residuals.csv, slopes.csv and fields_<eps>.csv.
    Sweep(SceneArgs),
    /// Run the seeded invariant suite.
    Validate(ValidateArgs),
    /// Print the interaction matrix, coefficients and the asymptotic inverse.
    Matrix(SceneArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `out` in `[sweep]`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma separated orders.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Comma separated, strictly decreasing eps values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplies every tolerance; for negative-control runs.
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub corrupt_tolerance: f64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(args: &SceneArgs) -> Result<Config> {
    let mut cfg = parse_scene(&args.config)?;
    let mut changed = false;
    if let Some(eps) = &args.eps {
        cfg.plan.eps_values = eps.clone();
        changed = true;
    }
    if let Some(orders) = &args.orders {
        cfg.plan.orders = orders.clone();
    }
    if let Some(seed) = args.seed {
        cfg.plan.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.plan.outputs = out.clone();
    }
    if changed {
        cfg.plan.validate()?;
        for &eps in &cfg.plan.eps_values {
            check_scene_at(&cfg.scene, eps).map_err(|e| Error::Geometry(format!("at eps = {eps}: {e}")))?;
        }
        if let Some(&eps) = cfg.plan.eps_values.first() {
            cfg.scene = cfg.scene.at_eps(eps)?;
        }
    }
    Ok(cfg)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Validate(a) => {
            let report = run_validate(a.seed, a.corrupt_tolerance);
            writeln!(out, "{report}")?;
            Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
        }
        Command::Sweep(a) => {
            let cfg = load(&a)?;
            let report = run_sweep(&cfg.scene, &cfg.plan);
            let files = write_report(&report, cfg.scene.inclusions.len(), &cfg.plan.outputs)?;
            for f in &files {
                writeln!(out, "wrote {}", f.display())?;
            }
            for row in report.rows.iter().filter(|r| r.error.is_some()) {
                writeln!(out, "eps {} order {}: {}", row.eps, row.order, row.error.as_deref().unwrap_or(""))?;
            }
            Ok(0)
        }
        Command::Expand(a) => {
            let cfg = load(&a)?;
            expand_summary(&cfg, out)?;
            Ok(0)
        }
        Command::Matrix(a) => {
            let cfg = load(&a)?;
            let eps_values = if cfg.plan.eps_values.is_empty() { vec![cfg.scene.eps] } else { cfg.plan.eps_values.clone() };
            for eps in eps_values {
                matrix_summary(&cfg, eps, out)?;
            }
            Ok(0)
        }
    }
}

fn expand_summary(cfg: &Config, out: &mut dyn Write) -> Result<()> {
    let scene = &cfg.scene;
    let order = cfg.plan.orders.iter().copied().max().unwrap_or(0);
    let e = sweep::build_expansion(scene, order)?;
    writeln!(out, "eps            {:.6e}", scene.eps)?;
    writeln!(out, "regime         {:?}", scene.regime())?;
    writeln!(out, "iterations     {}", e.order())?;
    for (i, p) in e.profiles().iter().enumerate() {
        writeln!(
            out,
            "inclusion {i}    centre ({:.6}, {:.6})  beta {:.6e}  w(x_eps) {:.6e}  h_eps {:.6e}",
            p.center().re,
            p.center().im,
            p.beta(),
            p.w_center(),
            p.h_eps()
        )?;
    }
    writeln!(out, "coefficients   {}", list(&e.coefficients()))?;
    for (k, psi0) in e.psi0s().iter().enumerate() {
        writeln!(out, "psi0[{k}]        {}", list(psi0))?;
    }
    for k in 0..=e.order() {
        let r = e.boundary_residual(k)?;
        writeln!(out, "residual[{k}]    outer {:.6e}  inclusions {}", r.outer, list(&r.inclusions))?;
    }
    if scene.inclusions.len() == 1 {
        writeln!(out, "constant C     {:.6e}", e.residual_constant())?;
    }
    Ok(())
}

fn matrix_summary(cfg: &Config, eps: f64, out: &mut dyn Write) -> Result<()> {
    let scene = cfg.scene.at_eps(eps)?;
    let mut m = assemble_interaction_matrix(&scene)?;
    let a = solve_coefficients(&mut m)?;
    let asym = asymptotic_inverse(&m)?;
    writeln!(out, "eps = {eps:.6e}  regime {:?}  condition {:.6e}", asym.regime, m.condition())?;
    writeln!(out, "M_eps:")?;
    for row in m.entries().row_iter() {
        writeln!(out, "  {}", list(&row.iter().copied().collect::<Vec<_>>()))?;
    }
    writeln!(out, "psi0           {}", list(m.rhs().as_slice()))?;
    writeln!(out, "a              {}", list(a.as_slice()))?;
    writeln!(out, "a * ln(eps)    {}", list(&a.iter().map(|v| v * eps.ln()).collect::<Vec<_>>()))?;
    writeln!(out, "analytic inverse:")?;
    for row in asym.analytic.row_iter() {
        writeln!(out, "  {}", list(&row.iter().copied().collect::<Vec<_>>()))?;
    }
    writeln!(out, "deviation * ln^2(eps) {:.6e}", asym.deviation)?;
    Ok(())
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
}
