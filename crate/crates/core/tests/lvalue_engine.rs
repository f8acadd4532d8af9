use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmtwist::curve_arithmetic::{
    builtin_curves, fundamental_discriminants, kronecker, DiscriminantFilter, EllipticCurveData, Parity, SignFilter,
};
use rmtwist::lvalue_engine::{
    calibrate_kappa, discretize, parse_coefficient_file, scan, tau, theta_coefficients_batch, twist_sign,
    CurveCalibration, Engine, LvalueError, ScanOptions, SeriesEngine, TernaryForm, ThetaWiring,
};

fn curve(label: &str) -> EllipticCurveData {
    builtin_curves().into_iter().find(|c| c.label == label).unwrap()
}

fn coprime(curve: &EllipticCurveData) -> DiscriminantFilter {
    DiscriminantFilter { coprime_to: curve.conductor, ..Default::default() }
}

fn even(curve: &EllipticCurveData, sign: SignFilter, parity: Parity) -> DiscriminantFilter {
    DiscriminantFilter {
        sign,
        parity,
        coprime_to: curve.conductor,
        even_sign_for: Some(curve.clone()),
        ..Default::default()
    }
}

#[test]
fn sign_of_negative_twists_of_e11() {
    let e = curve("E11");
    for d in fundamental_discriminants(1, 500, &coprime(&e)).into_iter().filter(|&d| d < 0) {
        let s = twist_sign(&e, d).unwrap();
        assert_eq!(s == 1, kronecker(d, 11) == -1, "d = {d}");
    }
    assert_eq!(twist_sign(&e, -7).unwrap(), -1);
    assert!(matches!(twist_sign(&e, -11), Err(LvalueError::NotCoprime { .. })));
}

#[test]
fn functional_equation_confirms_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for label in ["E11", "E19", "E32"] {
        let e = curve(label);
        let engine = SeriesEngine::new(&e, 2000, 1e-12).unwrap();
        let mut ds = fundamental_discriminants(1, 2000, &coprime(&e));
        ds.shuffle(&mut rng);
        for &d in ds.iter().take(34) {
            let expected = twist_sign(&e, d).unwrap();
            let (w, plus, minus) = engine.infer_sign(d).unwrap();
            assert_eq!(w, expected, "{label} d = {d}: residuals {plus:e} {minus:e}");
            let (right, wrong) = if w == 1 { (plus, minus) } else { (minus, plus) };
            assert!(right < 1e-9, "{label} d = {d}: residual {right:e}");
            if w == -1 {
                // an odd sign is seen against the size of the even-sign residual
                assert!(right < 1e-6 * wrong.max(1e-3), "{label} d = {d}");
            }
        }
    }
}

#[test]
fn untwisted_value_is_stable_under_cutoff_doubling() {
    let e = curve("E11");
    let engine = SeriesEngine::new(&e, 8, 1e-10).unwrap();
    let m = engine.truncation(1);
    let a = engine.central_value_with_terms(1, m).unwrap();
    let b = engine.central_value_with_terms(1, 2 * m).unwrap();
    assert!((a - b).abs() < 1e-8);
    assert!(a > 0.2);
    // L(E11, 1) = 0.2538418608559...
    assert!((engine.central_value(1).unwrap() - 0.2538418608559).abs() < 1e-9);
}

#[test]
fn tail_bound_survives_cutoff_doubling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for label in ["E11", "E19", "E32"] {
        let e = curve(label);
        let eps = 1e-8;
        let engine = SeriesEngine::new(&e, 5000, eps).unwrap();
        let mut ds = fundamental_discriminants(1, 2000, &even(&e, SignFilter::Both, Parity::All));
        ds.shuffle(&mut rng);
        for &d in ds.iter().take(500) {
            let m = engine.truncation(d);
            let a = engine.central_value_with_terms(d, m).unwrap();
            let b = engine.central_value_with_terms(d, 2 * m).unwrap();
            assert!((a - b).abs() < eps, "{label} d = {d}: {:e}", (a - b).abs());
        }
    }
}

#[test]
fn central_values_are_nonnegative() {
    for label in ["E11", "E19", "E32"] {
        let e = curve(label);
        let engine = SeriesEngine::new(&e, 1000, 1e-8).unwrap();
        for d in fundamental_discriminants(1, 1000, &even(&e, SignFilter::Both, Parity::All)) {
            assert!(engine.central_value(d).unwrap() >= -1e-8, "{label} d = {d}");
        }
    }
}

#[test]
fn odd_sign_and_invalid_inputs_are_rejected() {
    let e = curve("E11");
    let engine = SeriesEngine::new(&e, 100, 1e-8).unwrap();
    assert_eq!(engine.central_value(-7), Err(LvalueError::OddSign { d: -7 }));
    assert_eq!(engine.central_value(9), Err(LvalueError::NotFundamental { d: 9 }));
    assert!(matches!(engine.central_value(-1003), Err(LvalueError::OutOfRange { .. })));
}

#[test]
fn series_is_independent_of_worker_count() {
    let e = curve("E19");
    let options = ScanOptions { dmax: 800, ..Default::default() };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| scan(&e, &options).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.lvalue.to_bits(), y.lvalue.to_bits());
        assert_eq!((x.d, x.c, x.is_zero), (y.d, y.c, y.is_zero));
    }
}

fn brute_representations(form: &TernaryForm, n: u64) -> u32 {
    let bound = |k: u64| ((n / k) as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for x in -bound(form.a)..=bound(form.a) {
        for y in -bound(form.b)..=bound(form.b) {
            for z in -bound(form.c)..=bound(form.c) {
                if form.eval(x, y, z) == n {
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn theta_small_values() {
    let w = ThetaWiring::default();
    assert_eq!(brute_representations(&w.first, 1), 2);
    assert_eq!(brute_representations(&w.second, 1), 2);
    assert_eq!(brute_representations(&w.first, 5), 0);
    assert_eq!(brute_representations(&w.second, 5), 0);
    let table = theta_coefficients_batch(&w, 50, 1 << 20).unwrap();
    assert_ne!(table.get(1).unwrap(), 0);
    assert_eq!(table.get(5), Some(0));
    assert_eq!(table.get(4), None);
    assert_eq!(table.get(51), None);
}

#[test]
fn theta_counts_match_enumeration() {
    let w = ThetaWiring::default();
    let table = theta_coefficients_batch(&w, 400, 1 << 20).unwrap();
    for n in (1..=400u64).step_by(2) {
        let direct = i64::from(brute_representations(&w.first, n))
            - w.multiplier * i64::from(brute_representations(&w.second, n));
        assert_eq!(table.get(n), Some(direct), "n = {n}");
    }
}

#[test]
fn theta_prefix_consistency() {
    let w = ThetaWiring::default();
    let big = theta_coefficients_batch(&w, 20_001, 1 << 24).unwrap();
    let small = theta_coefficients_batch(&w, 7_777, 1 << 24).unwrap();
    for n in (1..=7_777).step_by(2) {
        assert_eq!(big.get(n), small.get(n));
    }
}

#[test]
fn theta_respects_memory_budget() {
    let err = theta_coefficients_batch(&ThetaWiring::default(), 1_000_000, 1 << 16).unwrap_err();
    assert!(matches!(err, LvalueError::MemoryBudget { t: 1_000_000, .. }));
}

#[test]
fn e32_engines_agree_on_vanishing() {
    let e = curve("E32");
    let base = ScanOptions {
        dmax: 2000,
        filter: DiscriminantFilter { parity: Parity::Odd, ..Default::default() },
        ..Default::default()
    };
    let series = scan(&e, &base).unwrap();
    let theta = scan(&e, &ScanOptions { engine: Engine::Theta, ..base.clone() }).unwrap();
    assert_eq!(series.records.len(), theta.records.len());
    assert!(series.records.len() > 300);
    let mut zeros = 0;
    for (s, t) in series.records.iter().zip(&theta.records) {
        assert_eq!(s.d, t.d);
        assert_eq!(s.is_zero, t.is_zero, "d = {}: L = {:e}", s.d, s.lvalue);
        if s.is_zero {
            zeros += 1;
            assert!(s.lvalue.abs() < 1e-8, "d = {}", s.d);
        } else {
            assert!((s.lvalue - t.lvalue).abs() < 1e-6 * s.lvalue.max(1.0), "d = {}", s.d);
        }
    }
    assert!(zeros > 10);
}

#[test]
fn smallest_e32_vanishing_twist() {
    let e = curve("E32");
    let engine = SeriesEngine::new(&e, 500, 1e-8).unwrap();
    let table = theta_coefficients_batch(&ThetaWiring::default(), 500, 1 << 20).unwrap();
    let first = fundamental_discriminants(1, 500, &even(&e, SignFilter::Both, Parity::Odd))
        .into_iter()
        .find(|&d| engine.central_value(d).unwrap() < 1e-4)
        .expect("a vanishing twist below 500");
    assert!(engine.central_value(first).unwrap().abs() < 1e-8);
    assert_eq!(table.get(first.unsigned_abs()), Some(0));
}

#[test]
fn single_reference_calibration() {
    let q = 0.7;
    let d = -23i64;
    let calib = calibrate_kappa(&[(d, q / 23f64.sqrt())]).unwrap();
    assert!(calib.is_single());
    assert!((calib.kappa_for(d).unwrap() - q).abs() < 1e-14);
}

#[test]
fn calibration_is_homogeneous() {
    let kappa = 0.3;
    let refs: Vec<(i64, f64)> = [(-3i64, 1u64), (-4, 2), (5, 3), (-7, 1), (8, 5), (-15, 2)]
        .iter()
        .map(|&(d, c)| (d, kappa * (c * c) as f64 / (d.unsigned_abs() as f64).sqrt()))
        .collect();
    let base = calibrate_kappa(&refs).unwrap();
    assert!((base.kappa_for(-3).unwrap() - kappa).abs() < 1e-12);
    let scaled: Vec<(i64, f64)> = refs.iter().map(|&(d, l)| (d, 10.0 * l)).collect();
    let scaled = calibrate_kappa(&scaled).unwrap();
    assert!((scaled.kappa_for(-3).unwrap() - 10.0 * kappa).abs() < 1e-11);
    for &(d, l) in &refs {
        let a = discretize(&base, d, l, false).unwrap();
        let b = discretize(&scaled, d, 10.0 * l, false).unwrap();
        assert_eq!(a.c, b.c);
    }
}

#[test]
fn calibration_splits_classes_when_needed() {
    // two classes whose κ ratio is irrational
    let r2 = 2f64.sqrt();
    let refs = vec![
        (-3i64, 1.0 / 3f64.sqrt()),
        (-7, 4.0 / 7f64.sqrt()),
        (5, r2 / 5f64.sqrt()),
        (13, 4.0 * r2 / 13f64.sqrt()),
        (21, 9.0 * r2 / 21f64.sqrt()),
    ];
    let calib = calibrate_kappa(&refs).unwrap();
    assert!(!calib.is_single());
    for &(d, l) in &refs {
        let r = discretize(&calib, d, l, false).unwrap();
        assert!(!r.is_zero);
        assert!((r.u.sqrt() - r.c as f64).abs() < 1e-9);
    }
    assert_eq!(discretize(&calib, -4, 1.0, false).unwrap_err(), LvalueError::Uncalibrated { d: -4 });
}

#[test]
fn e11_first_fifty_negative_twists_snap() {
    let e = curve("E11");
    let engine = SeriesEngine::new(&e, 2000, 1e-10).unwrap();
    let refs: Vec<(i64, f64)> = fundamental_discriminants(1, 2000, &even(&e, SignFilter::Negative, Parity::All))
        .into_iter()
        .take(50)
        .map(|d| (d, engine.central_value(d).unwrap()))
        .filter(|&(_, l)| l > 1e-6)
        .collect();
    assert!(refs.len() > 40);
    let calib = calibrate_kappa(&refs).unwrap();
    for &(d, l) in &refs {
        let u = l * (d.unsigned_abs() as f64).sqrt() / calib.kappa_for(d).unwrap();
        assert!((u.sqrt() - u.sqrt().round()).abs() <= 1e-3, "d = {d}");
    }
}

#[test]
fn discretize_examples() {
    let calib = CurveCalibration::single(0.25);
    let d = -31i64;
    let r = discretize(&calib, d, 0.0, false).unwrap();
    assert_eq!((r.c, r.is_zero), (0, true));
    let r = discretize(&calib, d, 0.25 / 31f64.sqrt(), false).unwrap();
    assert_eq!((r.c, r.is_zero), (1, false));
    let r = discretize(&calib, d, 0.25 * 0.2 / 31f64.sqrt(), false).unwrap();
    assert!(r.is_zero);
    let r = discretize(&calib, d, 0.25 * 9.0 / 31f64.sqrt(), false).unwrap();
    assert_eq!((r.c, r.is_zero), (3, false));
    let boundary = 0.25 * 6.25 / 31f64.sqrt();
    assert!(matches!(discretize(&calib, d, boundary, false), Err(LvalueError::Ambiguous { .. })));
    // τ(120) = 16: c = 7 counts as zero under the refined threshold
    let r = discretize(&calib, 120, 0.25 * 49.0 / 120f64.sqrt(), true).unwrap();
    assert_eq!(tau(120), 16);
    assert!(r.is_zero);
    let r = discretize(&calib, 120, 0.25 * 49.0 / 120f64.sqrt(), false).unwrap();
    assert_eq!(r.c, 7);
}

#[test]
fn e32_tau_refinement_only_adds_zeros() {
    let e = curve("E32");
    let base = ScanOptions {
        dmax: 20_000,
        filter: DiscriminantFilter { parity: Parity::Odd, ..Default::default() },
        engine: Engine::Theta,
        ..Default::default()
    };
    let plain = scan(&e, &base).unwrap();
    let refined = scan(&e, &ScanOptions { tau_refined: true, ..base }).unwrap();
    let count = |o: &rmtwist::lvalue_engine::ScanOutput| o.records.iter().filter(|r| r.is_zero).count();
    assert!(count(&refined) >= count(&plain));
    for (p, r) in plain.records.iter().zip(&refined.records) {
        assert!(!p.is_zero || r.is_zero);
        // τ(|d|) divides c(|d|) for these twists, so the refinement finds no new zeros
        assert_eq!(p.c % tau(p.d), 0, "d = {}", p.d);
    }
    assert_eq!(count(&refined), count(&plain));
}

#[test]
fn coefficient_file_round_trip() {
    let text = "# |d| c\n3 1\n\n7 -2  # trailing\n8 0\n";
    let file = parse_coefficient_file(text).unwrap();
    assert_eq!(file.get(7), Some(-2));
    assert_eq!(file.get(8), Some(0));
    assert_eq!(file.get(5), None);
    assert!(matches!(parse_coefficient_file("7 1\n3 1\n"), Err(LvalueError::Import { line: 2, .. })));
    assert!(matches!(parse_coefficient_file("7\n"), Err(LvalueError::Import { line: 1, .. })));
}

#[test]
fn import_engine_reproduces_theta_scan() {
    let e = curve("E32");
    let table = theta_coefficients_batch(&ThetaWiring::default(), 1500, 1 << 20).unwrap();
    let text: String = (1..=1500u64).step_by(2).map(|n| format!("{n} {}\n", table.get(n).unwrap())).collect();
    let base = ScanOptions {
        dmax: 1500,
        filter: DiscriminantFilter { parity: Parity::Odd, ..Default::default() },
        engine: Engine::Theta,
        ..Default::default()
    };
    let theta = scan(&e, &base).unwrap();
    let import =
        scan(&e, &ScanOptions { engine: Engine::Import, import: Some(parse_coefficient_file(&text).unwrap()), ..base })
            .unwrap();
    assert_eq!(theta.records, import.records);
}

#[test]
fn scan_lists_only_valid_discriminants() {
    let e = curve("E11");
    let out = scan(&e, &ScanOptions { dmax: 10, even_sign_only: false, ..Default::default() }).unwrap();
    let ds: Vec<i64> = out.records.iter().map(|r| r.d).collect();
    assert_eq!(ds, vec![-3, -4, 5, -7, -8, 8]);
    for r in &out.records {
        assert_eq!(i32::from(r.sign), twist_sign(&e, r.d).unwrap());
        if r.sign == -1 {
            assert_eq!((r.lvalue, r.is_zero), (0.0, true));
        }
    }
}
