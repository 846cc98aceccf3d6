//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use perforated::conformal::{ExteriorMap, InteriorMap, ShapeSpec, DEFAULT_ORDER};
use perforated::expansion::{
    asymptotic_inverse, assemble_interaction_matrix, det_alpha_beta, expand_multi, expand_single,
    expand_single_with_data, m0, m0_spectral_inverse, m_alpha_beta, three_scale_inverse, u0_of, Forcing, Inclusion,
    Regime, Scene,
};
use perforated::harmonic_ext::{psi0_of, sample_on_inclusion, solve_exterior, BoundaryFunction, BoundaryId};
use perforated::reference::{
    log_log_slope, remainder_norm_order, solve_reference, solve_reference_with_data, variation, GridSpec,
    ReferenceOptions,
};

type Outcome = Result<String, String>;

const SWEEP: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk_domain() -> Arc<InteriorMap> {
    Arc::new(InteriorMap::unit_disk())
}

/// Ellipse with semi-axes 1 and 1/2 scaled to unit capacity.
fn unit_ellipse() -> ShapeSpec {
    ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 4.0 / 3.0 }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn num<T>(r: perforated::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn criterion_1() -> Outcome {
    let inc = num(Inclusion::fixed(ShapeSpec::unit_disk(), DEFAULT_ORDER, c(0.0, 0.0)))?;
    let exact = |x: Complex64, eps: f64| x.norm().ln() / eps.ln();
    let radial = |eps: f64| -> Vec<Complex64> {
        (0..50)
            .flat_map(|k| {
                let r = eps * 1.0001 + (1.0 - eps * 1.0001) * k as f64 / 49.0;
                (0..8).map(move |t| Complex64::from_polar(r, TAU * t as f64 / 8.0 + 0.1))
            })
            .collect()
    };

    let eps = 0.05;
    let scene = num(Scene::new(disk_domain(), vec![inc.clone()], Forcing::Zero, eps))?;
    let sol = num(solve_reference_with_data(&scene, &|_| 0.0, &|_, _| 1.0, ReferenceOptions::default()))?;
    let ref_err = radial(eps).iter().map(|&x| (sol.evaluate(x) - exact(x, eps)).abs()).fold(0.0, f64::max);

    let mut ratios = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let scene = num(Scene::new(disk_domain(), vec![inc.clone()], Forcing::Zero, eps))?;
        let phi = num(BoundaryFunction::zeros(256, BoundaryId::Outer))?;
        let f = num(BoundaryFunction::from_fn(256, BoundaryId::Inclusion(0), |_| 1.0))?;
        // u_0 plus the k = 0 iteration, whose corrector carries the capacity
        let e = num(expand_single_with_data(&scene, phi, f, 1))?;
        let mut err = 0.0f64;
        for x in radial(eps) {
            err = err.max((num(e.evaluate(x))? - exact(x, eps)).abs());
        }
        ratios.push(err / eps);
    }
    check(
        ref_err <= 1e-8 && ratios.iter().all(|&r| r <= 0.5),
        format!("reference sup error {ref_err:.2e} (<= 1e-8); corrector error / eps {} (<= 0.5)", fmt(&ratios)),
    )
}

fn single_scene(shape: ShapeSpec, eps: f64) -> Result<Scene, String> {
    let inc = num(Inclusion::fixed(shape, DEFAULT_ORDER, c(0.3, 0.0)))?;
    num(Scene::new(disk_domain(), vec![inc], Forcing::PointSources(vec![(c(-0.5, 0.0), 1.0)]), eps))
}

fn interior_grid() -> GridSpec {
    GridSpec {
        points_per_axis: 41,
        collar: 2.0,
        exclusion_radius: 0.25,
        source_radius: 0.1,
    }
}

struct SingleSweep {
    errors: [Vec<f64>; 3],
    constants: Vec<f64>,
    first_constants: Vec<f64>,
}

fn single_sweep(shape: ShapeSpec) -> Result<SingleSweep, String> {
    let mut errors: [Vec<f64>; 3] = Default::default();
    let mut constants = Vec::new();
    let mut first_constants = Vec::new();
    for eps in SWEEP {
        let scene = single_scene(shape.clone(), eps)?;
        let e = num(expand_single(&scene, 2))?;
        let sol = num(solve_reference(&scene))?;
        for (order, slot) in errors.iter_mut().enumerate() {
            slot.push(num(remainder_norm_order(&sol, &e, order, interior_grid()))?.sup);
        }
        constants.push(e.residual_constant());
        first_constants.push(e.stats()[0].constant);
    }
    Ok(SingleSweep {
        errors,
        constants,
        first_constants,
    })
}

fn criterion_2_3() -> (Outcome, Outcome) {
    let shapes = [("disk", ShapeSpec::unit_disk()), ("ellipse", unit_ellipse())];
    let mut details2 = Vec::new();
    let mut ok2 = true;
    let mut all_constants = Vec::new();
    let mut details3 = Vec::new();
    let mut ok3 = true;
    for (name, shape) in shapes {
        let sweep = match single_sweep(shape) {
            Ok(s) => s,
            Err(e) => return (Err(format!("{name}: {e}")), Err(format!("{name}: {e}"))),
        };
        let scaled: Vec<f64> = sweep.errors[0].iter().zip(SWEEP).map(|(e, eps)| e * eps.ln().abs()).collect();
        let var0 = variation(&scaled);
        let slope1 = log_log_slope(&SWEEP, &sweep.errors[1]).unwrap_or(f64::NAN);
        let monotone = sweep.errors[2].iter().zip(&sweep.errors[1]).all(|(a, b)| a <= b);
        ok2 &= var0 <= 0.25 && slope1 >= 0.9 && monotone;
        details2.push(format!(
            "{name}: order-0 err*|ln eps| variation {var0:.3} (<= 0.25), order-1 slope {slope1:.3} (>= 0.9), order-2 {} <= order-1 {}",
            fmt(&sweep.errors[2]),
            fmt(&sweep.errors[1])
        ));
        let v = variation(&sweep.constants);
        ok3 &= v <= 1.0;
        details3.push(format!(
            "{name}: C {} (iteration 0 alone {})",
            fmt(&sweep.constants),
            fmt(&sweep.first_constants)
        ));
        all_constants.extend(sweep.constants);
    }
    let spread = variation(&all_constants) + 1.0;
    ok3 &= spread <= 2.0;
    details3.push(format!("max/min over sweep and shapes {spread:.3} (<= 2)"));
    (check(ok2, details2.join("; ")), check(ok3, details3.join("; ")))
}

fn random_data(rng: &mut ChaCha8Rng, map: &ExteriorMap, modes: usize) -> BoundaryFunction {
    let coeffs: Vec<(f64, f64)> = (0..=modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let shift = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    sample_on_inclusion(map, 256, BoundaryId::Inclusion(0), |y| {
        let t = (y - shift * 0.1).arg();
        coeffs.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin()).sum()
    })
    .unwrap()
}

/// `(1 / 2 pi) int F |T'| ds` along the standard ellipse parametrization,
/// with `|T'| ds = d arg T` computed by finite differences.
fn surface_integral(map: &ExteriorMap, a: f64, b: f64, cc: f64, f: &dyn Fn(Complex64) -> f64) -> f64 {
    let point = |t: f64| c(cc / a * t.cos(), cc / b * t.sin());
    let phase = |t: f64| map.forward(point(t)).unwrap().arg();
    let n = 4096;
    let h = 1e-3;
    let mut sum = 0.0;
    for j in 0..n {
        let t = TAU * j as f64 / n as f64;
        let d = |k: f64| (phase(t + k * h) - phase(t) + PI).rem_euclid(TAU) - PI;
        let dtheta = (-d(2.0) + 8.0 * d(1.0) - 8.0 * d(-1.0) + d(-2.0)) / (12.0 * h);
        sum += f(point(t)) * dtheta;
    }
    sum / n as f64
}

fn criterion_4() -> Outcome {
    let (a, b, cc) = (1.0, 2.0, 4.0 / 3.0);
    let map = Arc::new(ExteriorMap::ellipse(a, b, cc, DEFAULT_ORDER));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut contour = 0.0f64;
    for _ in 0..100 {
        let f = random_data(&mut rng, &map, 8);
        let field = solve_exterior(map.clone(), &f);
        if field.psi0().abs() > f.sup_norm() {
            violations += 1;
        }
        let mean = num(field.contour_mean_check())?;
        contour = contour.max((mean.re - psi0_of(&map, &f)).abs());
    }
    let mut surface = 0.0f64;
    for k in 0..5 {
        let g = move |y: Complex64| (y.re * (k as f64 + 1.0)).sin() + y.im * y.re;
        let f = sample_on_inclusion(&map, 256, BoundaryId::Inclusion(0), g).map_err(|e| e.to_string())?;
        surface = surface.max((psi0_of(&map, &f) - surface_integral(&map, a, b, cc, &g)).abs());
    }
    check(
        violations == 0 && surface <= 1e-8 && contour <= 1e-8,
        format!("|Psi0| > |F| in {violations}/100; surface-integral gap {surface:.2e}; contour gap {contour:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let map = Arc::new(ExteriorMap::ellipse(1.0, 2.0, 4.0 / 3.0, DEFAULT_ORDER));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut monotone_failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let f = random_data(&mut rng, &map, 8);
        let field = solve_exterior(map.clone(), &f);
        for i in 0..61 {
            for j in 0..61 {
                let x = c(-3.0 + 0.1 * i as f64, -3.0 + 0.1 * j as f64);
                if let Ok(v) = field.evaluate(x) {
                    worst = worst.max(v.abs() / f.sup_norm());
                    if v.abs() > 2.0 * f.sup_norm() {
                        violations += 1;
                    }
                }
            }
        }
        for n in 1..=4 {
            let radii = [1.01, 1.5, 2.5, 5.0, 10.0].map(|k| k * map.validity_radius());
            let sups = radii.iter().map(|&r| field.tail_sup(n, r)).collect::<perforated::Result<Vec<f64>>>();
            let sups = num(sups)?;
            if sups.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-15) {
                monotone_failures += 1;
            }
        }
    }
    check(
        violations == 0 && monotone_failures == 0,
        format!("|Psi| > 2|F| at {violations} grid points (max ratio {worst:.3}); tail_sup increases in {monotone_failures} cases"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // N = 2 explicit inverse from the profiles of a separated scene
    let scene = separated_scene(0.05)?;
    let m = num(assemble_interaction_matrix(&scene))?;
    let explicit = m.explicit_inverse_2x2().ok_or("no explicit inverse")?;
    let direct = num(m.inverse())?;
    let e2 = (explicit - &direct).amax();

    let mut e_spec = 0.0f64;
    for n in [2, 3, 5] {
        let (eps, eta) = (0.05, 0.3);
        let inv = m0(n, eps, eta).try_inverse().ok_or("singular M0")?;
        e_spec = e_spec.max((m0_spectral_inverse(n, eps, eta) - inv).amax());
    }
    let mut e_det = 0.0f64;
    let mut e_p = 0.0f64;
    for _ in 0..20 {
        let alpha: f64 = rng.gen_range(0.05..0.95);
        let beta: f64 = rng.gen_range(0.01..=alpha);
        let m = m_alpha_beta(alpha, beta);
        e_det = e_det.max((m.determinant() - det_alpha_beta(alpha, beta)).abs());
        e_det = e_det.max((det_alpha_beta(alpha, beta) - (alpha - 1.0) * (2.0 * beta * beta - alpha - 1.0)).abs());
        let inv = m.try_inverse().ok_or("singular M_ab")?;
        e_p = e_p.max((num(three_scale_inverse(alpha, beta))? - inv).amax());
    }
    check(
        e2 <= 1e-12 && e_spec <= 1e-10 && e_det <= 1e-12 && e_p <= 1e-10,
        format!("2x2 closed form {e2:.1e}; spectral M0 {e_spec:.1e}; det {e_det:.1e}; eigenbasis inverse {e_p:.1e}"),
    )
}

/// Disk of radius 1/2 (beta = 2) at `base + eps^exponent offset`.
fn disk_at(base: Complex64, offset: Complex64, exponent: f64) -> Result<Inclusion, String> {
    num(Inclusion::new(ShapeSpec::Disk { radius: 0.5 }, DEFAULT_ORDER, base, offset, exponent))
}

fn separated_scene(eps: f64) -> Result<Scene, String> {
    let incs = vec![
        disk_at(c(0.5, 0.0), c(0.0, 0.0), 0.0)?,
        disk_at(c(-0.5, 0.0), c(0.0, 0.0), 0.0)?,
    ];
    num(Scene::new(disk_domain(), incs, Forcing::PointSources(vec![(c(0.0, 0.5), 1.0)]), eps))
}

fn clustered_scene(eps: f64, n: usize) -> Result<Scene, String> {
    let incs = (0..n)
        .map(|k| disk_at(c(0.0, 0.0), Complex64::from_polar(0.5, TAU * k as f64 / n as f64 + PI / 2.0), 0.5))
        .collect::<Result<Vec<_>, _>>()?;
    num(Scene::new(disk_domain(), incs, Forcing::PointSources(vec![(c(-0.5, -0.6), 1.0)]), eps))
}

fn mixed_scene(eps: f64) -> Result<Scene, String> {
    let incs = vec![
        disk_at(c(0.0, 0.0), c(0.0, 0.5), 0.5)?,
        disk_at(c(0.0, 0.0), c(0.0, -0.5), 0.5)?,
        disk_at(c(-0.5, 0.0), c(0.0, 0.0), 0.0)?,
    ];
    num(Scene::new(disk_domain(), incs, Forcing::PointSources(vec![(c(-0.5, -0.6), 1.0)]), eps))
}

fn three_scale_scene(eps: f64) -> Result<Scene, String> {
    let incs = vec![
        disk_at(c(0.0, 0.0), c(0.0, 0.5), 0.6)?,
        disk_at(c(0.0, 0.0), c(0.0, -0.5), 0.6)?,
        disk_at(c(0.0, 0.0), c(0.5, 0.0), 0.3)?,
    ];
    num(Scene::new(disk_domain(), incs, Forcing::PointSources(vec![(c(-0.5, -0.6), 1.0)]), eps))
}

fn criterion_7() -> Outcome {
    type Builder = fn(f64) -> Result<Scene, String>;
    let cases: [(&str, Builder); 5] = [
        ("separated", separated_scene),
        ("clustered N=2", |e| clustered_scene(e, 2)),
        ("clustered N=3", |e| clustered_scene(e, 3)),
        ("mixed N=3", mixed_scene),
        ("three-scale", three_scale_scene),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, build) in cases {
        let mut devs = Vec::new();
        let mut regime = None;
        for eps in SWEEP {
            let scene = build(eps)?;
            let m = num(assemble_interaction_matrix(&scene))?;
            let a = num(asymptotic_inverse(&m))?;
            regime = Some(a.regime.clone());
            devs.push(a.deviation);
        }
        let v = variation(&devs);
        let general = matches!(regime, Some(Regime::General));
        ok &= v <= 0.5 && !general;
        details.push(format!("{name} ({:?}): variation {v:.3}", regime.unwrap()));
    }
    check(ok, details.join("; ") + " (<= 0.5)")
}

fn criterion_8() -> Outcome {
    let mut errors = Vec::new();
    for eps in SWEEP {
        let scene = separated_scene(eps)?;
        let e = num(expand_multi(&scene))?;
        let sol = num(solve_reference(&scene))?;
        errors.push(num(remainder_norm_order(&sol, &e, 1, interior_grid()))?.sup);
    }
    let slope_sep = log_log_slope(&SWEEP, &errors).unwrap_or(f64::NAN);
    let mut residuals = Vec::new();
    for eps in SWEEP {
        let scene = clustered_scene(eps, 2)?;
        let e = num(expand_multi(&scene))?;
        residuals.push(num(e.boundary_residual(1))?.inner_max());
    }
    let slope_cl = log_log_slope(&SWEEP, &residuals).unwrap_or(f64::NAN);
    check(
        slope_sep >= 0.9 && slope_cl >= 0.4,
        format!(
            "separated interior-error slope {slope_sep:.3} (>= 0.9) {}; clustered inner-residual slope {slope_cl:.3} (>= 0.4) {}",
            fmt(&errors),
            fmt(&residuals)
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut gaps = Vec::new();
    for eps in SWEEP {
        let scene = single_scene(unit_ellipse(), eps)?;
        let e = num(expand_single(&scene, 1))?;
        let u0 = num(u0_of(&scene))?;
        let x = scene.inclusions[0].center(eps);
        gaps.push((e.stats()[0].psi0 + num(u0.evaluate(x))?).abs() / eps);
    }
    let bound = gaps[0].max(1e-12) * 2.0;
    check(
        gaps.iter().all(|&g| g.is_finite() && g <= bound),
        format!("|Psi0 + u0(x_eps)| / eps {}", fmt(&gaps)),
    )
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_perforated");
    let mut failed = Vec::new();
    for seed in 0..10 {
        let status = Command::new(bin)
            .args(["validate", "--seed", &seed.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            failed.push(seed);
        }
    }
    let corrupted = Command::new(bin)
        .args(["validate", "--seed", "0", "--corrupt-tolerance", "1e-30"])
        .output()
        .map_err(|e| e.to_string())?;
    let code = corrupted.status.code();
    check(
        failed.is_empty() && code == Some(1),
        format!("seeds failing: {failed:?}; corrupted run exit code {code:?} (expected 1)"),
    )
}

fn main() -> ExitCode {
    let (c2, c3) = criterion_2_3();
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, c2),
        (3, c3),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
    ];
    let mut failures = 0;
    for (k, r) in &results {
        match r {
            Ok(d) => println!("criterion {k:>2}: PASS  {d}"),
            Err(d) => {
                failures += 1;
                println!("criterion {k:>2}: FAIL  {d}");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
