use beltrami::chentype::{probe, random_samples, ProbeConfig, TypeProbeResult, Verdict};
use beltrami::geometry::{Field, FormKind};
use beltrami::surfaces::{parse_selector, translated, SurfaceSpec};
use proptest::prelude::*;

fn run(s: &SurfaceSpec, form: FormKind, field: Field, seed: u64) -> TypeProbeResult {
    probe(
        s,
        form,
        field,
        &random_samples(s, 30, seed),
        &ProbeConfig::default(),
    )
    .unwrap()
}

fn assert_monotone(r: &TypeProbeResult, eps: f64) {
    if let Some(k) = r.degree {
        assert!(r.residual_at(k).unwrap() < eps);
        for j in 1..k {
            assert!(r.residual_at(j).unwrap() >= eps, "degree {j} already fits");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_eigenvalues_follow_radius(r in 0.3..3.0f64, seed in any::<u64>()) {
        let s = parse_selector(&format!("sphere:r={r}")).unwrap();
        for (form, want) in [(FormKind::II, 2.0 / r), (FormKind::III, 2.0)] {
            let res = run(&s, form, Field::Position, seed);
            prop_assert_eq!(&res.verdict, &Verdict::Typed(1));
            prop_assert!((res.real_eigenvalues()[0] - want).abs() < 1e-7);
            assert_monotone(&res, 1e-7);
        }
    }

    #[test]
    fn translation_moves_center_only(t in prop::array::uniform3(-5.0..5.0f64), seed in 0u64..1000) {
        let base = parse_selector("sphere:r=1.5").unwrap();
        let moved = translated(&base, t).unwrap();
        let a = run(&base, FormKind::II, Field::Position, seed);
        let b = run(&moved, FormKind::II, Field::Position, seed);
        prop_assert_eq!(&a.verdict, &b.verdict);
        prop_assert!((a.real_eigenvalues()[0] - b.real_eigenvalues()[0]).abs() < 1e-9);
        prop_assert!((a.residual.unwrap() - b.residual.unwrap()).abs() < 1e-9);
        let (ca, cb) = (a.center.unwrap(), b.center.unwrap());
        for k in 0..3 {
            prop_assert!((cb[k] - ca[k] - t[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn gauss_map_is_type_one_with_eigenvalue_two(idx in 0usize..6, seed in 0u64..1000) {
        let sel = ["sphere:r=0.7", "catenoid", "helicoid", "enneper", "torus", "parallel:helicoid:rho=0.3"][idx];
        let s = parse_selector(sel).unwrap();
        let r = run(&s, FormKind::III, Field::Normal, seed);
        prop_assert_eq!(&r.verdict, &Verdict::Typed(1));
        prop_assert!((r.real_eigenvalues()[0] - 2.0).abs() < 1e-7);
        // Δn = 2n exactly, so the fitted constant and the center vanish
        prop_assert!(r.center.unwrap().iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn result_does_not_depend_on_sample_set(seed_a in 0u64..500, seed_b in 500u64..1000) {
        let s = parse_selector("parallel:enneper:rho=0.2").unwrap();
        let a = run(&s, FormKind::III, Field::Position, seed_a);
        let b = run(&s, FormKind::III, Field::Position, seed_b);
        prop_assert_eq!(&a.verdict, &Verdict::Typed(2));
        prop_assert_eq!(&a.verdict, &b.verdict);
        for (x, y) in a.real_eigenvalues().iter().zip(b.real_eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-7);
        }
        assert_monotone(&a, 1e-7);
    }
}

#[test]
fn identical_seeds_give_identical_results() {
    let s = parse_selector("torus").unwrap();
    let a = serde_json::to_string(&run(&s, FormKind::III, Field::Position, 9)).unwrap();
    let b = serde_json::to_string(&run(&s, FormKind::III, Field::Position, 9)).unwrap();
    assert_eq!(a, b);
}
