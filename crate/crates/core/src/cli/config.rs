//! Line-oriented scene configuration.
//!
//! ```text
//! [domain]
//! map = disk                  # or inverse:[b0, b1, ...] (Taylor series of the inverse map)
//!
//! [forcing]
//! kind = point                # zero | constant | point
//! source = -0.5, 0, 1         # x, y, charge; repeatable
//!
//! [inclusion]                 # one block per inclusion
//! shape = ellipse:1,2,1.3333
//! base_center = 0.3, 0
//! offset = 0, 0
//! exponent = 0
//!
//! [sweep]
//! eps = 0.1, 0.05, 0.025
//! orders = 0, 1, 2
//! seed = 0
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::conformal::{InteriorMap, ShapeSpec, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::expansion::{Forcing, Inclusion, Scene};
use crate::profiles::build_profile_indexed;

/// Which `eps` values and orders to run, and where to write reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub eps_values: Vec<f64>,
    pub orders: Vec<usize>,
    pub outputs: PathBuf,
    pub seed: u64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            eps_values: Vec::new(),
            orders: vec![0, 1],
            outputs: PathBuf::from("reports"),
            seed: 0,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps_values.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::invalid(format!("eps values must lie in (0, 1), got {e}")));
        }
        if self.eps_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eps values must be strictly decreasing"));
        }
        Ok(())
    }
}

/// Parsed configuration: a scene built at the largest requested `eps` and the plan.
#[derive(Debug, Clone)]
pub struct Config {
    pub scene: Scene,
    pub plan: SweepPlan,
}

/// Parse a config file. Relative sample paths resolve against its directory.
pub fn parse_scene(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    parse_scene_str(&text, path.parent())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Domain,
    Forcing,
    Inclusion(usize),
    Sweep,
}

#[derive(Default)]
struct RawInclusion {
    header: usize,
    shape: Option<(usize, String)>,
    base_center: Option<(usize, Complex64)>,
    offset: Option<(usize, Complex64)>,
    exponent: Option<(usize, f64)>,
    order: Option<(usize, usize)>,
}

pub fn parse_scene_str(text: &str, base_dir: Option<&Path>) -> Result<Config> {
    let mut section: Option<Section> = None;
    let mut seen: HashSet<(Section, String)> = HashSet::new();
    let mut domain: Option<(usize, String)> = None;
    let mut domain_order = DEFAULT_ORDER;
    let mut kind: Option<(usize, String)> = None;
    let mut value: Option<(usize, f64)> = None;
    let mut sources: Vec<(usize, Complex64, f64)> = Vec::new();
    let mut raw: Vec<RawInclusion> = Vec::new();
    let mut plan = SweepPlan::default();
    let mut eps_line = 0;
    let mut sections_seen: HashSet<Section> = HashSet::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, format!("malformed section header `{content}`")))?
                .trim();
            let s = match name {
                "domain" => Section::Domain,
                "forcing" => Section::Forcing,
                "sweep" => Section::Sweep,
                "inclusion" => {
                    raw.push(RawInclusion {
                        header: line,
                        ..Default::default()
                    });
                    Section::Inclusion(raw.len() - 1)
                }
                other => return Err(Error::config(line, format!("unknown section `[{other}]`"))),
            };
            if !matches!(s, Section::Inclusion(_)) && !sections_seen.insert(s) {
                return Err(Error::config(line, format!("section `[{name}]` appears twice")));
            }
            section = Some(s);
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::config(line, format!("expected `key = value`, got `{content}`")))?;
        let sec = section.ok_or_else(|| Error::config(line, "key outside of any section"))?;
        if key != "source" && !seen.insert((sec, key.to_string())) {
            return Err(Error::config(line, format!("duplicate key `{key}`")));
        }
        match (sec, key) {
            (Section::Domain, "map") => domain = Some((line, val.to_string())),
            (Section::Domain, "order") => domain_order = parse_num(line, val)?,
            (Section::Forcing, "kind") => kind = Some((line, val.to_string())),
            (Section::Forcing, "value") => value = Some((line, parse_num(line, val)?)),
            (Section::Forcing, "source") => {
                let v = parse_list::<f64>(line, val)?;
                if v.len() != 3 {
                    return Err(Error::config(line, format!("source needs `x, y, charge`, got `{val}`")));
                }
                sources.push((line, Complex64::new(v[0], v[1]), v[2]));
            }
            (Section::Inclusion(i), "shape") => raw[i].shape = Some((line, val.to_string())),
            (Section::Inclusion(i), "base_center") => raw[i].base_center = Some((line, parse_point(line, val)?)),
            (Section::Inclusion(i), "offset") => raw[i].offset = Some((line, parse_point(line, val)?)),
            (Section::Inclusion(i), "exponent") => raw[i].exponent = Some((line, parse_num(line, val)?)),
            (Section::Inclusion(i), "order") => raw[i].order = Some((line, parse_num(line, val)?)),
            (Section::Sweep, "eps") => {
                eps_line = line;
                plan.eps_values = parse_list(line, val)?;
            }
            (Section::Sweep, "orders") => plan.orders = parse_list(line, val)?,
            (Section::Sweep, "seed") => plan.seed = parse_num(line, val)?,
            (Section::Sweep, "out") => plan.outputs = PathBuf::from(val.trim_matches('"')),
            _ => return Err(Error::config(line, format!("unknown key `{key}`"))),
        }
    }

    let domain = match domain {
        None => Arc::new(InteriorMap::unit_disk()),
        Some((_, s)) if s.trim_matches('"') == "disk" => Arc::new(InteriorMap::unit_disk()),
        Some((line, s)) => {
            let body = s
                .trim_matches('"')
                .strip_prefix("inverse:")
                .ok_or_else(|| Error::config(line, format!("unknown domain map `{s}`")))?;
            let coeffs = parse_complex_list(line, body)?;
            Arc::new(InteriorMap::from_inverse_series(coeffs, domain_order).map_err(|e| Error::config(line, e.to_string()))?)
        }
    };

    let forcing = build_forcing(kind, value, sources)?;
    if raw.is_empty() {
        return Err(Error::config(text.lines().count().max(1), "at least one `[inclusion]` block is required"));
    }
    let inclusions = raw
        .into_iter()
        .map(|r| build_inclusion(r, base_dir))
        .collect::<Result<Vec<_>>>()?;

    plan.validate().map_err(|e| Error::config(eps_line, e.to_string()))?;
    let eps0 = plan.eps_values.first().copied().unwrap_or(0.1);
    let scene = Scene {
        domain,
        inclusions,
        forcing,
        eps: eps0,
    };
    let check_eps: Vec<f64> = if plan.eps_values.is_empty() { vec![eps0] } else { plan.eps_values.clone() };
    for &eps in &check_eps {
        check_scene_at(&scene, eps).map_err(|e| Error::config(eps_line, format!("at eps = {eps}: {e}")))?;
    }
    Ok(Config {
        scene: scene.at_eps(eps0).map_err(|e| Error::config(eps_line, e.to_string()))?,
        plan,
    })
}

/// Geometry and scale checks of `scene` at `eps`: containment, disjointness
/// and `w(x_eps) - ln eps > 0` for every inclusion.
pub fn check_scene_at(scene: &Scene, eps: f64) -> Result<()> {
    let s = scene.at_eps(eps)?;
    for (i, inc) in s.inclusions.iter().enumerate() {
        let p = build_profile_indexed(s.domain.clone(), inc.map.clone(), inc.center(eps), eps, i)?;
        let gap = p.w_center() - eps.ln();
        if !(gap > 0.0) {
            return Err(Error::ScaleDegeneracy(gap));
        }
    }
    Ok(())
}

fn build_forcing(
    kind: Option<(usize, String)>,
    value: Option<(usize, f64)>,
    sources: Vec<(usize, Complex64, f64)>,
) -> Result<Forcing> {
    let (line, kind) = match kind {
        Some((l, k)) => (l, k),
        None if !sources.is_empty() => (sources[0].0, "point".to_string()),
        None if value.is_some() => (value.unwrap().0, "constant".to_string()),
        None => return Ok(Forcing::Zero),
    };
    match kind.as_str() {
        "zero" => Ok(Forcing::Zero),
        "constant" => {
            let (_, v) = value.ok_or_else(|| Error::config(line, "constant forcing needs `value`"))?;
            Ok(Forcing::Constant(v))
        }
        "point" => {
            if sources.is_empty() {
                return Err(Error::config(line, "point forcing needs at least one `source`"));
            }
            Ok(Forcing::PointSources(sources.into_iter().map(|(_, s, q)| (s, q)).collect()))
        }
        other => Err(Error::config(line, format!("unknown forcing kind `{other}`"))),
    }
}

fn build_inclusion(r: RawInclusion, base_dir: Option<&Path>) -> Result<Inclusion> {
    let (shape_line, shape) = r
        .shape
        .ok_or_else(|| Error::config(r.header, "inclusion needs `shape`"))?;
    let (_, base) = r
        .base_center
        .ok_or_else(|| Error::config(r.header, "inclusion needs `base_center`"))?;
    let offset = r.offset.map_or(Complex64::new(0.0, 0.0), |(_, o)| o);
    let (exp_line, exponent) = r.exponent.unwrap_or((r.header, 0.0));
    if !(0.0..1.0).contains(&exponent) {
        return Err(Error::config(exp_line, format!("exponent must lie in [0, 1), got {exponent}")));
    }
    let order = r.order.map_or(DEFAULT_ORDER, |(_, o)| o);
    let spec = ShapeSpec::parse(&shape, base_dir).map_err(|e| Error::config(shape_line, e.to_string()))?;
    Inclusion::new(spec, order, base, offset, exponent).map_err(|e| Error::config(shape_line, e.to_string()))
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(line, format!("cannot parse `{}` as a number", s.trim())))
}

fn parse_list<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    let s = s.trim().trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_num(line, p)).collect()
}

fn parse_point(line: usize, s: &str) -> Result<Complex64> {
    let v = parse_list::<f64>(line, s)?;
    match v.as_slice() {
        [x, y] => Ok(Complex64::new(*x, *y)),
        _ => Err(Error::config(line, format!("expected a point `x, y`, got `{s}`"))),
    }
}

/// `[a, b:c, ...]` with `re:im` complex entries.
fn parse_complex_list(line: usize, s: &str) -> Result<Vec<Complex64>> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    s.split(',')
        .map(|p| match p.split_once(':') {
            Some((re, im)) => Ok(Complex64::new(parse_num(line, re)?, parse_num(line, im)?)),
            None => Ok(Complex64::new(parse_num(line, p)?, 0.0)),
        })
        .collect()
}
