use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rmtwist::curve_arithmetic::{
    arithmetic_factor_ak, CurveRegistry, DiscriminantFilter, EllipticCurveData, Parity, SignFilter,
};
use rmtwist::lvalue_engine::{
    parse_coefficient_file, series_table_length, Engine, ScanOptions, ScanOutput, ThetaWiring, TwistRecord,
};
use rmtwist::rmt_moments::{g_k_barnes, g_k_product, moment_so_even_real, DensityOptions, ValueDensity};
use rmtwist::rmt_sampler::{moment_of_values, sample_values, Histogram};
use rmtwist::statistics_reports::{
    conjecture1_ratio, doubling_grid, eq23_scaling, family_moment, linear_grid, qp_conjectured, qp_ratio,
    rp_conjectured, rp_ratio, value_histogram, ClassRatio, Eq23Constants, Flag, ReportRecord, ScanConfig,
};

use crate::args::{
    AfactorArgs, Command, Conj1Args, DensityArgs, DsignArg, EngineArg, Eq23Args, HistArgs, MomentArgs, MomentsArgs,
    ParityArg, QpArgs, ReportKind, RpArgs, SampleArgs, ScanArgs, ScanCmd, SignArg,
};
use crate::cache;
use crate::error::{CliError, Result};

/// Files produced by a command, with the manifest fields it knows.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub curve: Option<String>,
    pub engine: Option<String>,
    pub t: Option<u64>,
    pub seed: Option<u64>,
    pub notes: BTreeMap<String, String>,
    /// Set when the data is too thin for the observable; exit status 4.
    pub insufficient: Option<String>,
}

impl Outputs {
    fn single(name: &str, content: String) -> Self {
        Self { files: vec![(name.into(), content)], ..Default::default() }
    }
}

pub fn execute(command: &Command, curves: Option<&Path>) -> Result<Outputs> {
    let registry = || -> Result<CurveRegistry> {
        let mut registry = CurveRegistry::builtin();
        if let Some(path) = curves {
            registry.merge(CurveRegistry::from_toml_str(&fs::read_to_string(path)?)?);
        }
        Ok(registry)
    };
    match command {
        Command::Moments(a) => moments(a),
        Command::Density(a) => density(a),
        Command::Sample(a) => sample(a),
        Command::Afactor(a) => afactor(a, &registry()?),
        Command::Scan(a) => scan_cmd(a, &registry()?),
        Command::Report { kind } => {
            let registry = registry()?;
            match kind {
                ReportKind::Rp(a) => report_rp(a, &registry),
                ReportKind::Qp(a) => report_qp(a, &registry),
                ReportKind::Conj1(a) => report_conj1(a, &registry),
                ReportKind::Eq23(a) => report_eq23(a, &registry),
                ReportKind::Hist(a) => report_hist(a, &registry),
                ReportKind::Moment(a) => report_moment(a, &registry),
            }
        }
        Command::Replay(_) => Err(CliError::Usage("replay cannot be nested".into())),
    }
}

fn moments(a: &MomentsArgs) -> Result<Outputs> {
    let mut out = String::new();
    if a.check {
        out.push_str("k,g_k_product,g_k_barnes,rel_diff\n");
        let mut worst: f64 = 0.0;
        for k in 1..=8u32 {
            let (p, b) = (g_k_product(k)?, g_k_barnes(f64::from(k))?);
            let rel = (p - b).abs() / p;
            worst = worst.max(rel);
            writeln!(out, "{k},{p},{b},{rel:e}").unwrap();
        }
        if worst > 1e-10 {
            return Err(CliError::Numerical(format!("g_k formulas disagree by {worst:e}")));
        }
        return Ok(Outputs::single("gk_check.csv", out));
    }
    if let Some(k) = a.gk {
        out.push_str("k,g_k_product,g_k_barnes\n");
        writeln!(out, "{k},{},{}", g_k_product(k)?, g_k_barnes(f64::from(k))?).unwrap();
        return Ok(Outputs::single("gk.csv", out));
    }
    out.push_str("N,k,moment\n");
    for &n in &a.n.0 {
        for &k in &a.k.0 {
            writeln!(out, "{n},{k},{}", moment_so_even_real(n, k)?).unwrap();
        }
    }
    Ok(Outputs::single("moments.csv", out))
}

fn density(a: &DensityArgs) -> Result<Outputs> {
    let density = ValueDensity::new(a.n, DensityOptions::default())?;
    let top = density.ln_support().exp();
    let xmax = a.xmax.unwrap_or(top).min(top);
    if a.points == 0 || !(a.xmin >= 0.0) || !(xmax > a.xmin) {
        return Err(CliError::Usage("need points ≥ 1 and 0 ≤ xmin < xmax".into()));
    }
    let h = (xmax - a.xmin) / a.points as f64;
    let edges: Vec<f64> = (0..=a.points).map(|i| a.xmin + i as f64 * h).collect();
    let areas = density.bin_masses(&edges)?;
    let mut out = String::from("x,density,area\n");
    for (i, area) in areas.iter().enumerate() {
        let x = a.xmin + (i as f64 + 0.5) * h;
        writeln!(out, "{x},{},{area}", density.at(x)?).unwrap();
    }
    Ok(Outputs::single("density.csv", out))
}

fn sample(a: &SampleArgs) -> Result<Outputs> {
    let values = sample_values(a.n, a.count, a.seed)?;
    let mut outputs = if let Some(ks) = &a.k {
        let mut out = String::from("k,mean,standard_error,predicted\n");
        for &k in &ks.0 {
            let m = moment_of_values(&values, k);
            let predicted = if k > -0.5 { moment_so_even_real(a.n, k)?.to_string() } else { String::new() };
            writeln!(out, "{k},{},{},{predicted}", m.mean, m.standard_error).unwrap();
        }
        Outputs::single("sample_moments.csv", out)
    } else if let Some(bins) = a.bins {
        let density = ValueDensity::new(a.n, DensityOptions::default())?;
        let xmax = a.xmax.unwrap_or(density.ln_support().exp());
        if bins == 0 || !(xmax > 0.0) {
            return Err(CliError::Usage("need bins ≥ 1 and xmax > 0".into()));
        }
        let edges: Vec<f64> = (0..=bins).map(|i| xmax * i as f64 / bins as f64).collect();
        let hist = Histogram::new(&values, &edges)?;
        let probs = density.bin_masses(&edges)?;
        let mut out = String::from("x_lo,x_hi,count,empirical_density,model_density,expected\n");
        for (i, d) in hist.densities().iter().enumerate() {
            let width = edges[i + 1] - edges[i];
            writeln!(
                out,
                "{},{},{},{d},{},{}",
                edges[i],
                edges[i + 1],
                hist.counts[i],
                probs[i] / width,
                probs[i] * a.count as f64
            )
            .unwrap();
        }
        Outputs::single("sample_hist.csv", out)
    } else {
        let mut out = String::from("index,value\n");
        for (i, v) in values.iter().enumerate() {
            writeln!(out, "{i},{v}").unwrap();
        }
        Outputs::single("samples.csv", out)
    };
    outputs.seed = Some(a.seed);
    Ok(outputs)
}

fn lookup(registry: &CurveRegistry, label: &str, root_number: Option<i64>) -> Result<EllipticCurveData> {
    Ok(registry.find(label)?.to_curve(root_number)?)
}

fn afactor(a: &AfactorArgs, registry: &CurveRegistry) -> Result<Outputs> {
    let curve = lookup(registry, &a.curve, None)?;
    let mut out = String::from("k,a_k,tail_estimate\n");
    for &k in &a.k.0 {
        let f = arithmetic_factor_ak(&curve, k, a.cutoff)?;
        writeln!(out, "{k},{},{}", f.value, f.tail_estimate).unwrap();
    }
    let mut outputs = Outputs::single("afactor.csv", out);
    outputs.curve = Some(curve.label);
    Ok(outputs)
}

fn is_congruent_number_curve(curve: &EllipticCurveData) -> bool {
    curve.ainvs == [0, 0, 0, -1, 0] && curve.conductor == 32
}

/// Scan options for `|d| ≤ dmax`. Without `--dsign`, `dsign` picks the sign
/// of `d`; `None` means both signs for the theta engine and `d < 0` otherwise.
fn scan_config(a: &ScanArgs, registry: &CurveRegistry, dmax: u64, dsign: Option<DsignArg>) -> Result<ScanConfig> {
    let curve = lookup(registry, &a.curve, a.root_number)?;
    let engine = match a.engine {
        EngineArg::Series => Engine::Series,
        EngineArg::Theta => Engine::Theta,
        EngineArg::Import => Engine::Import,
        EngineArg::Auto if is_congruent_number_curve(&curve) => Engine::Theta,
        EngineArg::Auto => Engine::Series,
    };
    let parity = match a.parity {
        ParityArg::Odd => Parity::Odd,
        ParityArg::All => Parity::All,
        ParityArg::Auto if engine == Engine::Theta => Parity::Odd,
        ParityArg::Auto => Parity::All,
    };
    let fallback = if engine == Engine::Theta { DsignArg::Both } else { DsignArg::Negative };
    let sign = match a.dsign.or(dsign).unwrap_or(fallback) {
        DsignArg::Negative => SignFilter::Negative,
        DsignArg::Positive => SignFilter::Positive,
        DsignArg::Both => SignFilter::Both,
    };
    let character = match &a.chi {
        None => None,
        Some(spec) => {
            let parsed = spec.split_once(':').and_then(|(p, v)| Some((p.parse::<u64>().ok()?, v.parse::<i32>().ok()?)));
            match parsed {
                Some((p, v)) if v == 1 || v == -1 => Some((p, v)),
                _ => return Err(CliError::Usage(format!("--chi expects p:±1, got {spec}"))),
            }
        }
    };
    let import = match &a.import {
        Some(path) => Some(parse_coefficient_file(&fs::read_to_string(path)?)?),
        None => None,
    };
    let mut options = ScanOptions {
        dmin: a.dmin,
        dmax,
        filter: DiscriminantFilter { sign, parity, prime_only: a.prime_only, character, ..Default::default() },
        even_sign_only: a.sign == SignArg::Even,
        engine,
        epsilon: a.epsilon,
        tau_refined: a.tau_refined,
        calibration_dmax: a.calibration_dmax,
        kappa: a.kappa,
        theta_wiring: ThetaWiring::default(),
        memory_budget: a.memory_budget,
        import,
        coefficients: None,
    };
    options.coefficients = cache::coefficient_table(&curve, series_table_length(&curve, &options))?;
    let config = ScanConfig { curve, options };
    config.validate()?;
    Ok(config)
}

fn run_scan(config: &ScanConfig, outputs: &mut Outputs) -> Result<ScanOutput> {
    let scan = config.run()?;
    outputs.curve = Some(config.curve.label.clone());
    outputs.engine = Some(config.options.engine.name().into());
    outputs.t = Some(config.t());
    let classes: Vec<String> = scan.calibration.classes.iter().map(|(k, v)| format!("{k}: {v:e}")).collect();
    outputs.notes.insert("kappa".into(), classes.join("; "));
    outputs.notes.insert("records".into(), scan.records.len().to_string());
    Ok(scan)
}

fn records_csv(records: &[TwistRecord]) -> String {
    let mut out = String::from(TwistRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

fn scan_cmd(a: &ScanCmd, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.dmax, Some(DsignArg::Both))?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    outputs.files.push(("scan.csv".into(), records_csv(&scan.records)));
    Ok(outputs)
}

fn ratio_row(out: &mut String, p: u64, extra: &str, conjectured: Option<f64>, r: &ClassRatio) {
    let conj = conjectured.map(|c| c.to_string()).unwrap_or_default();
    let data = r.value.map(|v| v.to_string()).unwrap_or_default();
    let flags: Vec<&str> = r.flags.iter().map(Flag::name).collect();
    writeln!(out, "{p},{extra}{conj},{data},{},{},{}", r.numerator, r.denominator, flags.join(";")).unwrap();
}

fn report_rp(a: &RpArgs, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.t, None)?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let mut out = String::from("p,conjectured,data,numerator,denominator,flag\n");
    for &p in &a.p.0 {
        let conj = if config.curve.has_good_reduction(p) { Some(rp_conjectured(&config.curve, p)?) } else { None };
        ratio_row(&mut out, p, "", conj, &rp_ratio(&scan.records, p, a.t));
    }
    outputs.files.push(("rp.csv".into(), out));
    Ok(outputs)
}

fn report_qp(a: &QpArgs, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.t, None)?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let mut out = String::from("p,k,conjectured,data,numerator,denominator,flag\n");
    for &p in &a.p.0 {
        let conj = if config.curve.has_good_reduction(p) { Some(qp_conjectured(&config.curve, p, a.k)?) } else { None };
        ratio_row(&mut out, p, &format!("{},", a.k), conj, &qp_ratio(&scan.records, p, a.k, a.t));
    }
    outputs.files.push(("qp.csv".into(), out));
    Ok(outputs)
}

fn finish_report(mut outputs: Outputs, name: &str, report: ReportRecord) -> Outputs {
    if report.has_flag(Flag::InsufficientData) {
        outputs.insufficient = Some(format!("{}: fewer than 10 vanishing twists", report.observable));
    }
    for (k, v) in &report.fitted {
        outputs.notes.insert(k.clone(), v.to_string());
    }
    outputs.files.push((name.into(), report.to_csv()));
    outputs
}

fn report_conj1(a: &Conj1Args, registry: &CurveRegistry) -> Result<Outputs> {
    let mut scan_args = a.scan.clone();
    scan_args.prime_only = true;
    let config = scan_config(&scan_args, registry, a.t, Some(DsignArg::Negative))?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let grid = linear_grid(a.t, a.grid_points);
    let report = conjecture1_ratio(&scan.records, &grid, true)?;
    Ok(finish_report(outputs, "conj1.csv", report))
}

fn report_eq23(a: &Eq23Args, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.t, None)?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let constants = Eq23Constants {
        kappa: scan.calibration.classes[0].1,
        a_minus_half: arithmetic_factor_ak(&config.curve, -0.5, a.ak_cutoff)?.value,
    };
    let grid = doubling_grid(a.grid_min, a.t);
    let report = eq23_scaling(&scan.records, &grid, a.scan.tau_refined, constants)?;
    Ok(finish_report(outputs, "eq23.csv", report))
}

fn report_hist(a: &HistArgs, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.t, None)?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let hist = value_histogram(&scan.records, a.t, a.bins, a.xmax, a.n)?;
    outputs.notes.insert("N".into(), hist.n.to_string());
    outputs.notes.insert("max_bulk_sigma".into(), hist.max_bulk_sigma(100.0).to_string());
    outputs.files.push(("hist.csv".into(), hist.to_csv()));
    Ok(outputs)
}

fn report_moment(a: &MomentArgs, registry: &CurveRegistry) -> Result<Outputs> {
    let config = scan_config(&a.scan, registry, a.t, None)?;
    let mut outputs = Outputs::default();
    let scan = run_scan(&config, &mut outputs)?;
    let mut out = String::from("T,k,family_size,value,predicted,ratio,g_k,a_k\n");
    for &k in &a.k.0 {
        let m = family_moment(&config.curve, &scan.records, k, a.t, a.ak_cutoff)?;
        writeln!(out, "{},{k},{},{},{},{},{},{}", m.t, m.family_size, m.value, m.predicted, m.ratio(), m.g_k, m.a_k)
            .unwrap();
    }
    outputs.files.push(("moment.csv".into(), out));
    Ok(outputs)
}
