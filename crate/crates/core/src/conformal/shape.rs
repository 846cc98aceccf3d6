use std::fmt;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Geometry of a reference inclusion `omega` (before scaling by `eps`).
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// `{ a^2 x^2 + b^2 y^2 < c^2 }`.
    Ellipse { a: f64, b: f64, c: f64 },
    /// Inverse-map coefficients `[c_{-1}, c_0, c_1, ...]` of
    /// `w -> c_{-1} w + c_0 + sum_k c_k w^{-k}`.
    Laurent(Vec<Complex64>),
    /// Boundary points of a smooth closed curve, counter-clockwise.
    Samples(Vec<Complex64>),
}

impl ShapeSpec {
    pub fn unit_disk() -> Self {
        ShapeSpec::Disk { radius: 1.0 }
    }

    /// Parse `disk`, `disk:r`, `ellipse:a,b,c`, `laurent:[c-1, c0, ...]` or
    /// `samples:path.csv`. Relative sample paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let text = text.trim().trim_matches('"');
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (text, None),
        };
        match (kind, rest) {
            ("disk", None) => Ok(ShapeSpec::unit_disk()),
            ("disk", Some(r)) => Ok(ShapeSpec::Disk {
                radius: parse_f64(r)?,
            }),
            ("ellipse", Some(r)) => {
                let v: Vec<f64> = r.split(',').map(parse_f64).collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(Error::Shape(format!("ellipse needs a,b,c; got `{r}`")));
                }
                Ok(ShapeSpec::Ellipse { a: v[0], b: v[1], c: v[2] })
            }
            ("laurent", Some(r)) => {
                let inner = r.trim().trim_start_matches('[').trim_end_matches(']');
                let coeffs = inner
                    .split(',')
                    .map(|s| parse_complex(s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ShapeSpec::Laurent(coeffs))
            }
            ("samples", Some(p)) => {
                let path = match base_dir {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => Path::new(p).to_path_buf(),
                };
                let text = std::fs::read_to_string(&path)?;
                Ok(ShapeSpec::Samples(parse_points_csv(&text)?))
            }
            _ => Err(Error::Shape(format!("unrecognised shape `{text}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ShapeSpec::Disk { radius } if !(*radius > 0.0) => {
                Err(Error::Shape(format!("disk radius must be positive, got {radius}")))
            }
            ShapeSpec::Ellipse { a, b, c } if !(*a > 0.0 && *b > 0.0 && *c > 0.0) => Err(Error::Shape(
                format!("ellipse parameters must be positive, got a={a}, b={b}, c={c}"),
            )),
            ShapeSpec::Laurent(coeffs) if coeffs.is_empty() => Err(Error::Shape("empty Laurent list".into())),
            ShapeSpec::Samples(points) => {
                if points.len() < 16 {
                    return Err(Error::Shape(format!("need at least 16 boundary samples, got {}", points.len())));
                }
                check_simple_curve(points)?;
                let centroid = points.iter().sum::<Complex64>() / points.len() as f64;
                if winding_number(points, centroid) != 1 {
                    return Err(Error::Shape("samples must be positively oriented about their centroid".into()));
                }
                if winding_number(points, Complex64::new(0.0, 0.0)) != 1 {
                    return Err(Error::Shape("the origin must lie inside the sampled shape".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Disk { radius } if *radius == 1.0 => write!(f, "disk"),
            ShapeSpec::Disk { radius } => write!(f, "disk:{radius}"),
            ShapeSpec::Ellipse { a, b, c } => write!(f, "ellipse:{a},{b},{c}"),
            ShapeSpec::Laurent(coeffs) => {
                let parts: Vec<String> = coeffs.iter().map(|z| format!("{}:{}", z.re, z.im)).collect();
                write!(f, "laurent:[{}]", parts.join(","))
            }
            ShapeSpec::Samples(points) => write!(f, "samples({} points)", points.len()),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Shape(format!("not a number: `{s}`")))
}

/// `re` or `re:im`.
fn parse_complex(s: &str) -> Result<Complex64> {
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Ok(Complex64::new(parse_f64(s)?, 0.0)),
    }
}

/// Two columns `x,y`, one point per row, no header.
pub(crate) fn parse_points_csv(text: &str) -> Result<Vec<Complex64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut cols = line.split(',');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(x), Some(y), None) => Ok(Complex64::new(parse_f64(x)?, parse_f64(y)?)),
                _ => Err(Error::Shape(format!("expected `x,y`, got `{line}`"))),
            }
        })
        .collect()
}

/// Winding number of the closed polygon `points` about `p`.
pub fn winding_number(points: &[Complex64], p: Complex64) -> i32 {
    let n = points.len();
    let total: f64 = (0..n)
        .map(|i| ((points[(i + 1) % n] - p) / (points[i] - p)).arg())
        .sum();
    (total / std::f64::consts::TAU).round() as i32
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Rejects closed polygons with self-intersections or repeated points.
pub(crate) fn check_simple_curve(points: &[Complex64]) -> Result<()> {
    let n = points.len();
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        if (b - a).norm() == 0.0 {
            return Err(Error::Shape(format!("repeated boundary point at index {i}")));
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(a, b, points[j], points[(j + 1) % n]) {
                return Err(Error::Shape(format!("boundary curve self-intersects (segments {i} and {j})")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(ShapeSpec::parse("disk", None).unwrap(), ShapeSpec::unit_disk());
        assert_eq!(
            ShapeSpec::parse("ellipse:1,2,2", None).unwrap(),
            ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 2.0 }
        );
        let l = ShapeSpec::parse("laurent:[1.5, 0, 0.5:0.1]", None).unwrap();
        assert_eq!(
            l,
            ShapeSpec::Laurent(vec![
                Complex64::new(1.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.1)
            ])
        );
        assert!(ShapeSpec::parse("triangle", None).is_err());
        assert!(ShapeSpec::parse("ellipse:1,2", None).is_err());
    }

    #[test]
    fn sample_orientation_and_simplicity() {
        let ccw: Vec<Complex64> = (0..32)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 32.0))
            .collect();
        assert!(ShapeSpec::Samples(ccw.clone()).validate().is_ok());
        let cw: Vec<Complex64> = ccw.iter().rev().cloned().collect();
        assert!(ShapeSpec::Samples(cw).validate().is_err());
        let mut bowtie = ccw.clone();
        bowtie.swap(3, 20);
        assert!(ShapeSpec::Samples(bowtie).validate().is_err());
        let shifted: Vec<Complex64> = ccw.iter().map(|z| z + 3.0).collect();
        assert!(ShapeSpec::Samples(shifted).validate().is_err());
    }

    #[test]
    fn invalid_ellipse_rejected() {
        assert!(ShapeSpec::Ellipse { a: 0.0, b: 1.0, c: 1.0 }.validate().is_err());
    }
}
