use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{expand_multi, expand_single, Expansion, Scene};
use crate::reference::{log_log_slope, remainder_norm_order, solve_reference, write_probe_csv, GridSpec, ReferenceSolution};

use super::config::SweepPlan;

const WORKER_STACK: usize = 64 << 20;

/// One `(eps, order)` line of `residuals.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub order: usize,
    /// `None` when every stage succeeded.
    pub error: Option<String>,
    pub residual_outer: f64,
    pub residual_inclusions: Vec<f64>,
    pub interior_sup: f64,
    pub interior_rms: f64,
    pub coefficients: Vec<f64>,
    pub psi0s: Vec<f64>,
    pub h_eps: Vec<f64>,
    pub condition: f64,
}

impl SweepRow {
    fn failed(eps: f64, order: usize, n: usize, err: &Error) -> Self {
        SweepRow {
            eps,
            order,
            error: Some(err.to_string()),
            residual_outer: f64::NAN,
            residual_inclusions: vec![f64::NAN; n],
            interior_sup: f64::NAN,
            interior_rms: f64::NAN,
            coefficients: vec![f64::NAN; n],
            psi0s: vec![f64::NAN; n],
            h_eps: vec![f64::NAN; n],
            condition: f64::NAN,
        }
    }
}

/// Fitted log-log slope of one quantity against `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slope {
    pub order: usize,
    pub quantity: &'static str,
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<Slope>,
    /// `(eps, csv text)` of the probe grids.
    pub fields: Vec<(f64, String)>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Expansion of the scene at its own `eps`: `max_order` iterations for one
/// inclusion, the first-order system otherwise.
pub fn build_expansion(scene: &Scene, max_order: usize) -> Result<Expansion> {
    if scene.inclusions.len() == 1 {
        expand_single(scene, max_order)
    } else {
        expand_multi(scene)
    }
}

/// Runs every `(eps, order)` of the plan. `eps` values are processed in
/// parallel; rows come back in plan order. Failures are recorded per row.
pub fn run_sweep(scene: &Scene, plan: &SweepPlan) -> SweepReport {
    let max_order = plan.orders.iter().copied().max().unwrap_or(0);
    let work = || -> Vec<(Vec<SweepRow>, Option<(f64, String)>)> {
        plan.eps_values
            .par_iter()
            .map(|&eps| sweep_one(scene, eps, &plan.orders, max_order))
            .collect()
    };
    // the dense reference solves need more than the default worker stack
    let per_eps = match rayon::ThreadPoolBuilder::new().stack_size(WORKER_STACK).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    for (r, f) in per_eps {
        rows.extend(r);
        fields.extend(f);
    }
    let slopes = fit_slopes(&rows, &plan.orders);
    SweepReport { rows, slopes, fields }
}

fn sweep_one(base: &Scene, eps: f64, orders: &[usize], max_order: usize) -> (Vec<SweepRow>, Option<(f64, String)>) {
    let n = base.inclusions.len();
    let fail_all = |err: &Error| orders.iter().map(|&k| SweepRow::failed(eps, k, n, err)).collect();
    let scene = match base.at_eps(eps) {
        Ok(s) => s,
        Err(e) => return (fail_all(&e), None),
    };
    let expansion = match build_expansion(&scene, max_order) {
        Ok(e) => e,
        Err(e) => return (fail_all(&e), None),
    };
    let reference = solve_reference(&scene);
    let grid = GridSpec::default();
    let rows = orders
        .iter()
        .map(|&k| match row(&expansion, reference.as_ref(), k, grid) {
            Ok(r) => r,
            Err(e) => {
                let mut r = SweepRow::failed(eps, k, n, &e);
                fill_expansion_columns(&mut r, &expansion);
                r
            }
        })
        .collect();
    let field = reference.ok().and_then(|sol| {
        let mut buf = Vec::new();
        write_probe_csv(&mut buf, &sol, &expansion, grid).ok()?;
        Some((eps, String::from_utf8(buf).ok()?))
    });
    (rows, field)
}

fn fill_expansion_columns(r: &mut SweepRow, e: &Expansion) {
    r.coefficients = e.coefficients();
    r.psi0s = e.psi0s().into_iter().next().unwrap_or_else(|| vec![f64::NAN; e.profiles().len()]);
    r.h_eps = e.h_eps();
    r.condition = e.matrix().map_or(1.0, |m| m.condition());
}

fn row(e: &Expansion, reference: std::result::Result<&ReferenceSolution, &Error>, order: usize, grid: GridSpec) -> Result<SweepRow> {
    if order > e.order() {
        return Err(Error::invalid(format!(
            "order {order} not available (expansion holds {} iterations)",
            e.order()
        )));
    }
    let residual = e.boundary_residual(order)?;
    let mut r = SweepRow {
        eps: e.eps(),
        order,
        error: None,
        residual_outer: residual.outer,
        residual_inclusions: residual.inclusions,
        interior_sup: f64::NAN,
        interior_rms: f64::NAN,
        coefficients: Vec::new(),
        psi0s: Vec::new(),
        h_eps: Vec::new(),
        condition: f64::NAN,
    };
    fill_expansion_columns(&mut r, e);
    match reference {
        Ok(sol) => {
            let norm = remainder_norm_order(sol, e, order, grid)?;
            r.interior_sup = norm.sup;
            r.interior_rms = norm.rms;
        }
        Err(err) => r.error = Some(err.to_string()),
    }
    Ok(r)
}

fn fit_slopes(rows: &[SweepRow], orders: &[usize]) -> Vec<Slope> {
    let mut out = Vec::new();
    for &k in orders {
        let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.order == k && r.error.is_none()).collect();
        if ok.is_empty() {
            continue;
        }
        let eps: Vec<f64> = ok.iter().map(|r| r.eps).collect();
        let quantities: [(&'static str, Vec<f64>); 3] = [
            ("interior_sup", ok.iter().map(|r| r.interior_sup).collect()),
            ("interior_rms", ok.iter().map(|r| r.interior_rms).collect()),
            (
                "boundary_residual",
                ok.iter()
                    .map(|r| r.residual_inclusions.iter().fold(r.residual_outer, |a, &b| a.max(b)))
                    .collect(),
            ),
        ];
        for (name, ys) in quantities {
            out.push(Slope {
                order: k,
                quantity: name,
                slope: log_log_slope(&eps, &ys),
                points: eps.len(),
            });
        }
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_nums(line: &mut String, xs: &[f64]) {
    for &x in xs {
        line.push(',');
        line.push_str(&num(x));
    }
}

/// Text of `residuals.csv` for `n` inclusions.
pub fn residuals_csv(rows: &[SweepRow], n: usize) -> String {
    let mut out = String::from("eps,order,status,residual_outer");
    let cols = |prefix: &str| (1..=n).map(|i| format!(",{prefix}_{i}")).collect::<String>();
    out.push_str(&cols("residual_inclusion"));
    out.push_str(",interior_sup,interior_rms");
    out.push_str(&cols("a"));
    out.push_str(&cols("psi0"));
    out.push_str(&cols("h_eps"));
    out.push_str(",condition,message\n");
    for r in rows {
        let mut line = format!("{},{},{}", num(r.eps), r.order, if r.error.is_some() { "error" } else { "ok" });
        push_nums(&mut line, &[r.residual_outer]);
        push_nums(&mut line, &r.residual_inclusions);
        push_nums(&mut line, &[r.interior_sup, r.interior_rms]);
        push_nums(&mut line, &r.coefficients);
        push_nums(&mut line, &r.psi0s);
        push_nums(&mut line, &r.h_eps);
        push_nums(&mut line, &[r.condition]);
        let msg = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
        let _ = writeln!(line, ",\"{msg}\"");
        out.push_str(&line);
    }
    out
}

pub fn slopes_csv(slopes: &[Slope]) -> String {
    let mut out = String::from("order,quantity,slope,points\n");
    for s in slopes {
        let _ = writeln!(out, "{},{},{},{}", s.order, s.quantity, num(s.slope.unwrap_or(f64::NAN)), s.points);
    }
    out
}

/// `fields_<eps>.csv` file name.
pub fn fields_name(eps: f64) -> String {
    format!("fields_{eps}.csv")
}

/// Writes `residuals.csv`, `slopes.csv` and one `fields_<eps>.csv` per `eps`
/// into `dir`, returning the paths written.
pub fn write_report(report: &SweepReport, n: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, text: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put("residuals.csv".into(), &residuals_csv(&report.rows, n))?;
    put("slopes.csv".into(), &slopes_csv(&report.slopes))?;
    for (eps, text) in &report.fields {
        put(fields_name(*eps), text)?;
    }
    Ok(written)
}
