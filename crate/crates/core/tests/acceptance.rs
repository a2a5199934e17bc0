//! Acceptance criteria. Each test prints one PASS/FAIL line to stderr
//! (bypassing output capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use beltrami::chentype::{probe, random_samples, ProbeConfig, TypeProbeResult, Verdict};
use beltrami::geometry::{dot, frame, laplacian, Field, FormKind};
use beltrami::identities::{
    run_identities, Gate, GridSpec, IdentityConfig, IdentityReport, TestScalar, Verdict as Check,
    REGISTRY,
};
use beltrami::oracle::{cross_validate, FdConfig};
use beltrami::surfaces::{make_parallel, parse_selector, SurfaceSpec};

const EPS_TYPE: f64 = 1e-7;

fn report(n: u32, title: &str, pass: bool, detail: &str) {
    // an empty problem list is noise on a passing line
    let detail = detail.trim_end_matches(" []");
    let line = format!(
        "\n{} [{n:>2}] {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn sel(s: &str) -> SurfaceSpec {
    parse_selector(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn run_probe(s: &SurfaceSpec, form: FormKind, field: Field) -> TypeProbeResult {
    probe(
        s,
        form,
        field,
        &random_samples(s, 40, 2024),
        &ProbeConfig::default(),
    )
    .unwrap()
}

/// Every catalog surface and variant plus a few parallels.
fn admissible_zoo() -> Vec<&'static str> {
    vec![
        "sphere:r=0.5",
        "sphere:r=1",
        "sphere:r=2,cx=1,cy=-2,cz=0.5",
        "catenoid",
        "helicoid",
        "enneper",
        "torus",
        "torus:inner",
        "monge:paraboloid",
        "monge:saddle",
        "parallel:catenoid:rho=0.5",
        "parallel:helicoid:rho=0.2",
        "parallel:enneper:rho=0.5",
        "parallel:sphere:rho=0.25",
    ]
}

#[test]
fn criterion_01_identity_suite() {
    let surfaces = [
        "sphere:r=1",
        "sphere:r=2",
        "catenoid",
        "helicoid",
        "enneper",
        "torus",
        "parallel:catenoid:rho=0.5",
    ];
    let start = Instant::now();
    let reports: Vec<IdentityReport> = surfaces
        .iter()
        .map(|s| {
            let spec = sel(s);
            run_identities(
                &spec,
                &GridSpec::over(&spec, 20, 20),
                &IdentityConfig::default(),
            )
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    for r in &reports {
        let is_sphere = r.surface.starts_with("sphere");
        for c in &r.checks {
            let gate = REGISTRY.iter().find(|x| x.id == c.id).unwrap().gate;
            worst = worst.max(c.max_residual.unwrap_or(0.0));
            let ok = match c.verdict {
                Check::Pass => c.max_residual.unwrap() < 1e-8,
                // only the second-form operators may be gated, and only at K < 0
                Check::Skip => {
                    gate == Gate::Elliptic
                        && c.evaluated == 0
                        && c.reason
                            .as_deref()
                            .is_some_and(|m| m.starts_with("NonEllipticPoint"))
                }
                Check::NotApplicable => c.id == "ID25" && !is_sphere,
                Check::Fail => false,
            };
            if !ok {
                problems.push(format!("{} {} {:?}", r.surface, c.id, c.verdict));
            }
        }
        if is_sphere && r.summary.passed != 27 {
            problems.push(format!("{} passed {}/27", r.surface, r.summary.passed));
        }
    }

    // the gated checks are still identities wherever b is nondegenerate
    let mut relaxed = IdentityConfig::default();
    relaxed.geometry.indefinite_second_form = true;
    let mut relaxed_passed = 0;
    for s in &surfaces {
        let spec = sel(s);
        let r = run_identities(&spec, &GridSpec::over(&spec, 20, 20), &relaxed);
        let want = if s.starts_with("sphere") { 27 } else { 26 };
        if r.summary.passed != want {
            problems.push(format!(
                "{s} with indefinite II: {}/{want}",
                r.summary.passed
            ));
        }
        relaxed_passed += r.summary.passed;
        worst = worst.max(
            r.checks
                .iter()
                .filter_map(|c| c.max_residual)
                .fold(0.0, f64::max),
        );
    }

    let pass = problems.is_empty() && elapsed < 30.0;
    let detail = format!(
        "7 surfaces, 20x20, order 5: 0 FAIL, K<0 second-form checks SKIP by default and {relaxed_passed}/{} pass with indefinite II; worst residual {worst:.2e}; {elapsed:.1}s {:?}",
        2 * 27 + 5 * 26,
        problems
    );
    report(1, "identity suite", pass, &detail);
}

#[test]
fn criterion_02_gauss_map_eigenvalue_two() {
    let mut worst_res: f64 = 0.0;
    let mut worst_lambda: f64 = 0.0;
    let mut problems = Vec::new();
    for s in admissible_zoo() {
        let spec = sel(s);
        let cfg = IdentityConfig {
            checks: Some(vec!["ID24".into()]),
            ..IdentityConfig::default()
        };
        let r = run_identities(&spec, &GridSpec::over(&spec, 20, 20), &cfg);
        let row = r.row("ID24").unwrap();
        match row.max_residual {
            Some(m) if m < 1e-9 => worst_res = worst_res.max(m),
            other => problems.push(format!("{s}: residual {other:?}")),
        }
        let p = run_probe(&spec, FormKind::III, Field::Normal);
        let err = p
            .real_eigenvalues()
            .first()
            .map_or(f64::INFINITY, |l| (l - 2.0).abs());
        worst_lambda = worst_lambda.max(err);
        if p.verdict != Verdict::Typed(1) || err >= 1e-7 {
            problems.push(format!("{s}: probe {} |λ-2| = {err:.2e}", p.verdict));
        }
    }
    let detail = format!(
        "{} surfaces: max residual {worst_res:.2e} (< 1e-9), max |λ-2| {worst_lambda:.2e} (< 1e-7) {problems:?}",
        admissible_zoo().len()
    );
    report(2, "Δ^III n = 2n", problems.is_empty(), &detail);
}

#[test]
fn criterion_03_sphere_eigenvalues_and_center() {
    let mut problems = Vec::new();
    let mut worst_l: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    let cases = [
        ("sphere:r=0.5", 0.5, [0.0; 3]),
        ("sphere:r=1", 1.0, [0.0; 3]),
        ("sphere:r=2", 2.0, [0.0; 3]),
        (
            "translate:sphere:r=1:dx=3,dy=-1.5,dz=0.25",
            1.0,
            [3.0, -1.5, 0.25],
        ),
        ("sphere:r=2,cx=-1,cy=4,cz=2", 2.0, [-1.0, 4.0, 2.0]),
    ];
    for (s, r, center) in cases {
        let spec = sel(s);
        for (form, field, lambda, c) in [
            (FormKind::II, Field::Position, 2.0 / r, center),
            (FormKind::II, Field::Normal, 2.0 / r, [0.0; 3]),
            (FormKind::III, Field::Position, 2.0, center),
        ] {
            let p = run_probe(&spec, form, field);
            let dl = (p.real_eigenvalues()[0] - lambda).abs();
            let dc = p.center.map_or(f64::INFINITY, |got| {
                (0..3).map(|k| (got[k] - c[k]).abs()).fold(0.0, f64::max)
            });
            worst_l = worst_l.max(dl);
            worst_c = worst_c.max(dc);
            if p.verdict != Verdict::Typed(1) || dl >= 1e-7 || dc >= 1e-6 {
                problems.push(format!(
                    "{s} {form} {field:?}: {} |Δλ| {dl:.1e} |Δc| {dc:.1e}",
                    p.verdict
                ));
            }
        }
    }
    let detail = format!("r in {{0.5, 1, 2}} and 2 moved spheres: max |Δλ| {worst_l:.2e}, max |Δc| {worst_c:.2e} {problems:?}");
    report(
        3,
        "sphere eigenvalues 2/r and 2",
        problems.is_empty(),
        &detail,
    );
}

#[test]
fn criterion_04_minimal_null_type_one() {
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    for s in [
        "catenoid",
        "helicoid",
        "enneper",
        "catenoid:a=2",
        "helicoid:a=0.5",
    ] {
        let p = run_probe(&sel(s), FormKind::III, Field::Position);
        let l = p
            .real_eigenvalues()
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
            .abs();
        worst = worst.max(l);
        if p.verdict != Verdict::Typed(1) || l >= 1e-7 || !p.null_type {
            problems.push(format!(
                "{s}: {} |λ| {l:.1e} null {}",
                p.verdict, p.null_type
            ));
        }
    }
    report(
        4,
        "minimal => null III-type 1",
        problems.is_empty(),
        &format!("max |λ| {worst:.2e} {problems:?}"),
    );
}

#[test]
fn criterion_05_parallel_of_minimal_null_type_two() {
    let mut problems = Vec::new();
    let mut worst: f64 = 0.0;
    let mut min_deg1: f64 = f64::INFINITY;
    for base in ["catenoid", "helicoid", "enneper"] {
        for rho in [0.2, 0.5] {
            let s = format!("parallel:{base}:rho={rho}");
            let p = run_probe(&sel(&s), FormKind::III, Field::Position);
            let e = p.real_eigenvalues();
            let err = if e.len() == 2 {
                e[0].abs().max((e[1] - 2.0).abs())
            } else {
                f64::INFINITY
            };
            let r1 = p.residual_at(1).unwrap();
            worst = worst.max(err);
            min_deg1 = min_deg1.min(r1);
            if p.verdict != Verdict::Typed(2) || err >= 1e-6 || r1 < 1e3 * EPS_TYPE || !p.null_type
            {
                problems.push(format!("{s}: {} err {err:.1e} r1 {r1:.1e}", p.verdict));
            }
        }
    }
    let detail = format!("6 pairs: max eigenvalue error {worst:.2e} (< 1e-6), min degree-1 residual {min_deg1:.2e} (>= 1e-4) {problems:?}");
    report(
        5,
        "parallel of minimal => null III-type 2",
        problems.is_empty(),
        &detail,
    );
}

#[test]
fn criterion_06_parallel_relations() {
    let pairs = [
        ("catenoid", 0.2),
        ("catenoid", 0.5),
        ("helicoid", 0.2),
        ("helicoid", 0.5),
        ("enneper", 0.2),
        ("enneper", 0.5),
        ("sphere:r=1", 0.25),
        ("torus", 0.2),
    ];
    let mut worst_h: f64 = 0.0;
    let mut worst_e: f64 = 0.0;
    let mut worst_lap: f64 = 0.0;
    for (base, rho) in pairs {
        let b = sel(base);
        let p = make_parallel(&b, rho).unwrap();
        for pt in random_samples(&b, 100, 77) {
            let (fb, fp) = (frame(&b, pt, 2).unwrap(), frame(&p, pt, 2).unwrap());
            let want = fb.mean.value() / fb.gauss.value() - rho;
            let got = fp.mean.value() / fp.gauss.value();
            worst_h = worst_h.max((got - want).abs() / want.abs().max(1.0));
            for (x, y) in fp
                .third
                .values()
                .iter()
                .flatten()
                .zip(fb.third.values().iter().flatten())
            {
                worst_e = worst_e.max((x - y).abs());
            }
            for s in [TestScalar::U, TestScalar::V, TestScalar::ParamRadius] {
                let phi = s.jet(&fb);
                let d = laplacian(FormKind::III, &fp, &phi).unwrap().value()
                    - laplacian(FormKind::III, &fb, &phi).unwrap().value();
                worst_lap = worst_lap.max(d.abs());
            }
        }
    }
    let pass = worst_h < 1e-9 && worst_e < 1e-9 && worst_lap < 1e-9;
    let detail = format!(
        "8 pairs x 100 points: |H*/K* - (H/K - ρ)| {worst_h:.2e}, |e* - e| {worst_e:.2e}, |Δ^III* φ - Δ^III φ| {worst_lap:.2e}"
    );
    report(6, "parallel relations", pass, &detail);
}

#[test]
fn criterion_07_torus_negative_control() {
    let p = run_probe(&sel("torus:R=2,r=0.5"), FormKind::III, Field::Position);
    let r1 = p.residual_at(1).unwrap();
    let pass = p.verdict != Verdict::Typed(1) && r1 >= 1e3 * EPS_TYPE;
    let detail = format!(
        "k_max 3: verdict {}, residuals by degree {:?} (degree 1 must be >= 1e-4)",
        p.verdict,
        p.residuals_by_degree
            .iter()
            .map(|r| format!("{r:.3e}"))
            .collect::<Vec<_>>()
    );
    report(7, "torus is not of III-type 1", pass, &detail);
}

#[test]
fn criterion_08_oracle_equivalence() {
    let surfaces = [
        "sphere:r=0.5",
        "sphere:r=2,cx=1,cy=1,cz=1",
        "catenoid",
        "helicoid",
        "enneper",
        "torus",
        "torus:inner",
        "monge:zero",
        "monge:paraboloid",
        "monge:saddle",
        "parallel:catenoid:rho=0.5",
    ];
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for s in surfaces {
        let spec = sel(s);
        let pts = random_samples(&spec, 20, 8);
        let r = cross_validate(&spec, &pts, &FdConfig::for_surface(&spec, 1e-3), 1e-5).unwrap();
        worst = worst.max(r.max_rel_error);
        if !r.pass {
            problems.push(format!("{s}: {:.2e}", r.max_rel_error));
        }
    }
    let detail = format!("{} surfaces x 20 points, H K g b e n: max relative error {worst:.2e} (< 1e-5) {problems:?}", surfaces.len());
    report(
        8,
        "jets match finite differences",
        problems.is_empty(),
        &detail,
    );
}

#[test]
fn criterion_09_sphere_support_function() {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let spec = sel(&format!("sphere:r={r}"));
        let lambda = 2.0 / r;
        for pt in spec.grid(20, 20) {
            let f = frame(&spec, pt, 0).unwrap();
            let xn = dot(&f.x, &f.n).value();
            worst = worst.max((xn + 2.0 / lambda).abs());
        }
        let cfg = IdentityConfig {
            checks: Some(vec!["ID25".into()]),
            ..IdentityConfig::default()
        };
        let row = run_identities(&spec, &GridSpec::over(&spec, 20, 20), &cfg);
        worst = worst.max(row.row("ID25").unwrap().max_residual.unwrap());
    }
    report(
        9,
        "<x, n> = -2/λ on spheres",
        worst < 1e-9,
        &format!("r in {{0.5, 1, 2}}, 20x20: max residual {worst:.2e}"),
    );
}

#[test]
fn criterion_10_determinism() {
    let spec = sel("parallel:enneper:rho=0.2");
    let id = |_: ()| {
        serde_json::to_string(&run_identities(
            &spec,
            &GridSpec::over(&spec, 12, 12),
            &IdentityConfig::default(),
        ))
        .unwrap()
    };
    let pr = |_: ()| {
        let pts = random_samples(&spec, 40, 31337);
        serde_json::to_string(
            &probe(
                &spec,
                FormKind::III,
                Field::Position,
                &pts,
                &ProbeConfig::default(),
            )
            .unwrap(),
        )
        .unwrap()
    };
    let lib_same = id(()) == id(()) && pr(()) == pr(());

    let cli = |args: &[&str]| {
        std::process::Command::new(env!("CARGO_BIN_EXE_beltrami"))
            .args(args)
            .output()
            .unwrap()
            .stdout
    };
    let a1 = [
        "identities",
        "--surface",
        "torus",
        "--grid",
        "10x10",
        "--format",
        "json",
    ];
    let a2 = [
        "probe",
        "--surface",
        "parallel:catenoid:rho=0.5",
        "--seed",
        "5",
        "--format",
        "json",
    ];
    let (i1, i2) = (cli(&a1), cli(&a1));
    let (p1, p2) = (cli(&a2), cli(&a2));
    let cli_same = i1 == i2 && p1 == p2 && !i1.is_empty() && !p1.is_empty();
    report(
        10,
        "byte-identical JSON",
        lib_same && cli_same,
        &format!(
            "library runs identical: {lib_same}; CLI runs identical: {cli_same} ({} + {} bytes)",
            i1.len(),
            p1.len()
        ),
    );
}
