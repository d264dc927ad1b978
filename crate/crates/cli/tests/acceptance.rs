//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use nlbvp_cli::{execute, run, Command, Overrides, ProblemSpec};
use nlbvp_core::bounds;
use nlbvp_core::degree::{brouwer_degree, AffineField, Domain, Monomial, PolynomialField};
use nlbvp_core::ivp::{integrate, DirectionSource, SelectionStrategy, TimeGrid};
use nlbvp_core::multimap::{Family, Mode, MultiMap, PiecewiseConstant, Sign};
use nlbvp_core::nonlocal::{BoundaryFunctional, Side, Variant};
use nlbvp_core::potential::{GuidingGrid, Potential};
use nlbvp_core::solver::Method;
use nlbvp_core::{Matrix, Vector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    files
}

fn solve(name: &str, overrides: Overrides) -> (i32, Value, Option<String>) {
    let text = std::fs::read_to_string(scenarios_dir().join(format!("{name}.toml"))).unwrap();
    let out = execute(Command::Solve, &text, name, overrides);
    let doc = serde_json::from_str(out.document.as_deref().unwrap_or("null")).unwrap();
    let csv = out.files.iter().find(|(n, _)| n.ends_with(".csv")).map(|(_, c)| c.clone());
    (out.exit_code, doc, csv)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_formulas() -> Outcome {
    let tol = 1e-12;
    let ln2 = std::f64::consts::LN_2;
    let checks = [
        ("escape_lower(3, ln 2)", bounds::escape_lower(3.0, ln2), 1.0),
        ("gronwall_upper(3, ln 2)", bounds::gronwall_upper(3.0, ln2), 7.0),
        ("apriori_M(1, 0)", bounds::apriori_m(1.0, 0.0), 1.0),
        ("schauder linear_radius(1/2, 1, 0)", bounds::schauder_radius(0.5, 1.0, 0.0).unwrap().linear_radius, 2.0),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() <= tol, || format!("{name} = {got}, expected {want}"))?;
    }
    Ok("4 closed-form values within 1e-12".into())
}

/// Largest singular value by the eigenvalues of `AᵀA`.
fn spectral_norm(a: &Matrix) -> f64 {
    let ata = a.transpose() * a;
    ata.symmetric_eigenvalues().iter().fold(0.0f64, |m, &v| m.max(v)).sqrt()
}

fn c2_escape_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 10_000;
    let mut worst = f64::INFINITY;
    for case in 0..200 {
        let dim = rng.random_range(1..=3);
        let horizon = rng.random_range(0.2..2.0);
        let a = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.5..1.5));
        let b = Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let brk = rng.random_range(0.1..0.9) * horizon;
        let (rho0, rho1) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let map = MultiMap::new(
            dim,
            horizon,
            Family::LinearBall {
                a: a.clone(),
                b: PiecewiseConstant::constant(b.clone()),
                rho: PiecewiseConstant::new(vec![brk], vec![rho0, rho1]).unwrap(),
            },
        )
        .unwrap();
        // Growth |F(t,x)| ≤ μ(t)(1+|x|) with μ = max(‖A‖, |b| + ρ(t)).
        let s = spectral_norm(&a);
        let (mu0, mu1) = (s.max(b.norm() + rho0), s.max(b.norm() + rho1));
        let m = mu0 * brk + mu1 * (horizon - brk);
        let r = rng.random_range(0.0..3.0);
        let x0_norm = m.exp() * (r + 1.0) - 1.0 + rng.random_range(1e-3..2.0);
        let dir = Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0f64));
        let x0 = &dir * (x0_norm / dir.norm());
        let strategy = match case % 4 {
            0 => SelectionStrategy::Center,
            1 => SelectionStrategy::Random { seed: case },
            _ => SelectionStrategy::Extremal {
                direction: DirectionSource::Gradient(Potential::radial(dim, vec![0.0, 1.0]).unwrap()),
                mode: if case % 4 == 2 { Mode::Min } else { Mode::Max },
            },
        };
        let grid = TimeGrid::uniform(horizon, n).unwrap().refined_with(&[brk]).unwrap();
        let traj = integrate(&map, &x0, &grid, &strategy).map_err(|e| format!("case {case}: {e}"))?;
        let gronwall = (x0_norm + 1.0) * m.exp() - 1.0;
        let c = (1.0 + gronwall) * mu0.max(mu1);
        let bound = r - c * grid.max_step();
        let min = traj.states.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
        ensure(min > bound, || format!("case {case}: min |x_k| = {min} <= r - C dt = {bound}"))?;
        worst = worst.min(min - bound);
    }
    Ok(format!("200 scenarios at n = 1e4, zero violations (smallest margin {worst:.3e})"))
}

fn c3_apriori_bound() -> Outcome {
    let mut checked = Vec::new();
    for path in bundled() {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let (code, doc, csv) = solve(&name, Overrides::default());
        if code != 0 || doc["report"]["hypothesis_reports"]["guiding"]["classification"] != "strict_negative" {
            continue;
        }
        let radius = doc["report"]["hypothesis_reports"]["guiding"]["radius"].as_f64().unwrap();
        let spec = ProblemSpec::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let m = spec.build().unwrap().map.growth().mu_total;
        let e = m.exp();
        let bound = (m + (radius + 1.0) * e - 1.0) * e;
        let sup = csv
            .unwrap()
            .lines()
            .skip(1)
            .map(|line| {
                let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
                vals[1..=spec.dimension].iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max);
        ensure(sup <= bound + 1e-6, || format!("{name}: sup |x_k| = {sup} > M = {bound}"))?;
        checked.push(name);
    }
    ensure(checked.len() >= 3, || format!("only {} strictly negative scenarios solved", checked.len()))?;
    Ok(format!("{} solved strictly negative scenarios within M: {}", checked.len(), checked.join(", ")))
}

fn unit_ball(dim: usize) -> Domain {
    Domain::new_ball(Vector::zeros(dim), 1.0).unwrap()
}

fn c4_degree_axioms() -> Outcome {
    for n in 1..=3 {
        let id = brouwer_degree(&AffineField::identity(n), &unit_ball(n), 8).map_err(|e| e.to_string())?.value;
        let neg =
            brouwer_degree(&AffineField::identity(n).negated(), &unit_ball(n), 8).map_err(|e| e.to_string())?.value;
        let want = if n % 2 == 0 { 1 } else { -1 };
        ensure(id == 1 && neg == want, || format!("N = {n}: deg Id = {id}, deg -Id = {neg}"))?;
    }
    let text = std::fs::read_to_string(scenarios_dir().join("degree_neg_identity.toml")).unwrap();
    let out = execute(Command::Degree, &text, "d", Overrides::default());
    let doc: Value = serde_json::from_str(&out.document.unwrap()).unwrap();
    ensure(doc["result"]["value"] == -1, || format!("CLI degree of -Id in R^3: {}", doc["result"]))?;

    // 1-D: count sign changes of f on a fine grid, each weighted by the
    // direction of the crossing.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut polys = 0;
    while polys < 100 {
        let coeffs: Vec<f64> = (0..=4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (lo, hi) = (rng.random_range(-2.0..0.0), rng.random_range(0.0..2.0));
        let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        if f(lo).abs() < 1e-3 || f(hi).abs() < 1e-3 {
            continue;
        }
        let samples = 20_000;
        let mut crossings = 0i64;
        let mut prev = f(lo);
        for k in 1..=samples {
            let cur = f(lo + (hi - lo) * k as f64 / samples as f64);
            if prev < 0.0 && cur >= 0.0 {
                crossings += 1;
            } else if prev >= 0.0 && cur < 0.0 {
                crossings -= 1;
            }
            prev = cur;
        }
        let field = PolynomialField::new(vec![coeffs
            .iter()
            .enumerate()
            .map(|(p, &c)| Monomial { coeff: c, powers: vec![p as u32] })
            .collect()])
        .unwrap();
        let domain = Domain::new_box(Vector::from_element(1, lo), Vector::from_element(1, hi)).unwrap();
        let deg = brouwer_degree(&field, &domain, 4).map_err(|e| e.to_string())?.value;
        ensure(deg == crossings, || format!("polynomial {coeffs:?} on [{lo}, {hi}]: {deg} vs {crossings}"))?;
        polys += 1;
    }

    // Additivity: an affine field with one zero, box split along an axis.
    let mut splits = 0;
    while splits < 50 {
        let n = rng.random_range(1..=3);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let det = a.determinant();
        if det.abs() < 0.2 {
            continue;
        }
        let z = Vector::from_fn(n, |_, _| rng.random_range(-0.8..0.8));
        let field = AffineField { b: -(&a * &z), a };
        let axis = rng.random_range(0..n);
        let cut = rng.random_range(-0.9..0.9);
        if (cut - z[axis]).abs() < 0.1 {
            continue;
        }
        let lower = Vector::from_element(n, -1.0);
        let upper = Vector::from_element(n, 1.0);
        let (mut mid_hi, mut mid_lo) = (upper.clone(), lower.clone());
        mid_hi[axis] = cut;
        mid_lo[axis] = cut;
        let deg = |l: &Vector, u: &Vector| -> Result<i64, String> {
            Ok(brouwer_degree(&field, &Domain::new_box(l.clone(), u.clone()).unwrap(), 8)
                .map_err(|e| e.to_string())?
                .value)
        };
        let whole = deg(&lower, &upper)?;
        let left = deg(&lower, &mid_hi)?;
        let right = deg(&mid_lo, &upper)?;
        let expected = det.signum() as i64;
        ensure(whole == left + right && whole == expected, || {
            format!("split {splits}: whole {whole}, parts {left} + {right}, sign det {expected}")
        })?;
        splits += 1;
    }
    Ok("Id/-Id for N = 1..3, 100 polynomials, 50 affine splits: 100% agreement".into())
}

fn anti_periodic_x0() -> f64 {
    let e = (-1f64).exp();
    -0.5 * (1.0 - e) / (1.0 + e)
}

fn c5_anti_periodic() -> Outcome {
    let mut found = Vec::new();
    for method in [Method::FixedPoint, Method::Shooting, Method::Continuation] {
        let (code, doc, _) = solve("antiperiodic_linear", Overrides { method: Some(method), ..Overrides::default() });
        let report = &doc["report"];
        ensure(code == 0, || format!("{method:?}: exit {code}"))?;
        let x0 = report["solution"]["x0"][0].as_f64().unwrap();
        let cert = &report["certification"];
        ensure(report["solution"]["steps"] == 10_000, || format!("{method:?}: grid {}", report["solution"]["steps"]))?;
        ensure((x0 - anti_periodic_x0()).abs() < 1e-4, || format!("{method:?}: x0 = {x0}"))?;
        ensure(cert["pass"] == true && cert["tol_dyn"] == 1e-9, || format!("{method:?}: certification {cert}"))?;
        ensure(cert["residual_dyn"].as_f64().unwrap() <= 1e-9, || {
            format!("{method:?}: residual_dyn {}", cert["residual_dyn"])
        })?;
        found.push(format!("{x0:.6}"));
    }
    Ok(format!("x0 = {} (exact {:.6}), all certified", found.join(" / "), anti_periodic_x0()))
}

fn c6_zero_benchmarks() -> Outcome {
    let mut norms = Vec::new();
    for name in ["multipoint_decay", "mean_value_zero"] {
        let (code, doc, _) = solve(name, Overrides::default());
        ensure(code == 0, || format!("{name}: exit {code}"))?;
        let x0: Vec<f64> = serde_json::from_value(doc["report"]["solution"]["x0"].clone()).unwrap();
        let norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        ensure(norm < 1e-8, || format!("{name}: |x0| = {norm}"))?;
        norms.push(format!("{name} |x0| = {norm:e}"));
    }
    Ok(norms.join(", "))
}

fn c7_continuation() -> Outcome {
    let (code, doc, _) = solve("continuation_ball", Overrides::default());
    ensure(code == 0 && doc["abort"].is_null(), || format!("exit {code}, abort {}", doc["abort"]))?;
    let report = &doc["report"];
    let path = report["lambda_path"].as_array().unwrap();
    ensure(path.len() == 33, || format!("{} lambda entries", path.len()))?;
    ensure(path[0]["lambda"] == 1.0 && path[32]["lambda"] == 0.0, || "lambda does not run from 1 to 0".into())?;
    let res = report["residual_bc"].as_f64().unwrap();
    ensure(res < 1e-6, || format!("final residual_bc {res}"))?;
    let guiding = &report["hypothesis_reports"]["guiding"];
    let radius = guiding["radius"].as_f64().unwrap();
    ensure(guiding["classification"] == "strict_negative", || format!("classification {}", guiding["classification"]))?;
    // -|x|² + |x|/2 < 0 exactly for |x| > 1/2.
    ensure(radius > 0.5 && radius <= 1.0, || format!("R = {radius}"))?;
    let phi = |r: f64| -r * r + 0.5 * r;
    ensure((1..=100).all(|k| phi(radius + 0.03 * k as f64) < 0.0), || "analytic oracle disagrees".into())?;
    Ok(format!("32 steps, residual_bc = {res:e}, strict_negative with R = {radius}"))
}

fn c8_negative_tests() -> Outcome {
    let text = std::fs::read_to_string(scenarios_dir().join("two_eval_liminf.toml")).unwrap();
    let out = execute(Command::Verify, &text, "th6", Overrides::default());
    ensure(out.exit_code == 0, || format!("verify exit {}", out.exit_code))?;
    let doc: Value = serde_json::from_str(&out.document.unwrap()).unwrap();
    let liminf = &doc["th6"]["liminf"];
    ensure(liminf["pass"] == false && liminf["witness"]["kind"] == "bump", || format!("liminf {liminf}"))?;

    let rejected = BoundaryFunctional::new(
        1,
        1.0,
        Variant::MultiPoint { coeffs: vec![0.25, 0.75], times: vec![0.5, 1.0] },
        Side::Initial,
    );
    ensure(rejected.is_err(), || "MultiPoint with coefficients summing to 1 accepted".into())?;
    let (code, _, _) = solve("multipoint_resonant", Overrides::default());
    ensure(code == 2, || format!("resonant scenario exit {code}"))?;

    let map = MultiMap::new(
        1,
        1.0,
        Family::LinearBall {
            a: Matrix::identity(1, 1),
            b: PiecewiseConstant::constant(Vector::zeros(1)),
            rho: PiecewiseConstant::constant(0.0),
        },
    )
    .unwrap();
    let pot = Potential::radial(1, vec![0.0, 1.0]).unwrap();
    let cert = pot.classify_guiding(&map, &GuidingGrid::default()).map_err(|e| e.to_string())?;
    for r in [0.5, 1.0, 2.0, 3.5] {
        for s in [-1.0, 1.0] {
            let x = Vector::from_element(1, s * (cert.radius + r));
            let sel = map.select_filtered(&pot, 0.3, &x, Sign::Minus, cert.radius).map_err(|e| e.to_string())?;
            ensure(sel.is_none(), || format!("filter nonempty at x = {x}"))?;
        }
    }
    let (code, doc, _) = solve("guiding_violation", Overrides::default());
    ensure(code == 4 && doc["abort"]["kind"] == "guiding_violation", || format!("F = +x continuation exit {code}"))?;
    Ok("liminf condition fails with bump witness; sum = 1 rejected (exit 2); F = +x filter empty (exit 4)".into())
}

fn c9_determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        for path in bundled() {
            for command in [Command::Solve, Command::Verify, Command::Bounds, Command::Degree] {
                run(command, &path, Overrides::default(), Some(dir.path()));
            }
        }
    }
    let listing = |d: &Path| {
        let mut names: Vec<PathBuf> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        names
    };
    let (a, b) = (listing(dirs[0].path()), listing(dirs[1].path()));
    ensure(a.len() == b.len() && a.len() > 40, || format!("{} vs {} files", a.len(), b.len()))?;
    let mut csv = 0;
    for (pa, pb) in a.iter().zip(&b) {
        ensure(pa.file_name() == pb.file_name(), || format!("{pa:?} vs {pb:?}"))?;
        let (x, y) = (std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
        ensure(x == y, || format!("{:?} differs between runs", pa.file_name().unwrap()))?;
        csv += pa.extension().is_some_and(|e| e == "csv") as usize;
    }
    Ok(format!("{} files ({} CSV) bitwise identical across two runs", a.len(), csv))
}

fn c10_euler_order() -> Outcome {
    // x' = -x + 1/2 on [0, 1], x(0) = 1.
    let map = MultiMap::new(
        1,
        1.0,
        Family::LinearBall {
            a: Matrix::from_element(1, 1, -1.0),
            b: PiecewiseConstant::constant(Vector::from_element(1, 0.5)),
            rho: PiecewiseConstant::constant(0.0),
        },
    )
    .unwrap();
    let exact = 0.5 + 0.5 * (-1f64).exp();
    let err = |n: usize| -> Result<f64, String> {
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        let traj = integrate(&map, &Vector::from_element(1, 1.0), &grid, &SelectionStrategy::Center)
            .map_err(|e| e.to_string())?;
        Ok((traj.x_final()[0] - exact).abs())
    };
    let ns = [1000, 2000, 4000, 8000];
    let errors: Vec<f64> = ns.iter().map(|&n| err(n)).collect::<Result<_, _>>()?;
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|r| (1.8..=2.2).contains(r)), || format!("ratios {ratios:?}"))?;
    Ok(format!("ratios {}", ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 formula fidelity", c1_formulas),
        ("2 escape bound property suite", c2_escape_property),
        ("3 a-priori bound on solved strictly negative scenarios", c3_apriori_bound),
        ("4 degree axioms", c4_degree_axioms),
        ("5 anti-periodic linear benchmark", c5_anti_periodic),
        ("6 multi-point and mean-value zero benchmarks", c6_zero_benchmarks),
        ("7 continuation suite", c7_continuation),
        ("8 hypothesis-checker negative tests", c8_negative_tests),
        ("9 determinism", c9_determinism),
        ("10 Euler convergence", c10_euler_order),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {}/10 passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
