//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use ovlc::analytic::{
    e2e_cdf_reference, ergodic_capacity_quadrature, outage_probability, metric, Evaluator, RelayScenario, SnrMode,
};
use ovlc::channel::{AvgSnr, GammaGamma, LinkGeometry, Regime};
use ovlc::montecarlo::{ks_critical_1pct, ks_statistic, sample_fading, sample_relay, simulate, SimConfig};
use ovlc::noise::{link_budget, NoiseEnvironment};
use ovlc::specfun::{bessel_k, gamma_fn, integrate, QuadratureSpec};
use ovlc::sweep::{discrepancy_csv, emit_report, run_sweep, sweep_csv, Format, Scenario, CSV_HEADER, DISCREPANCY_HEADER};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("runtime {t:.1?} exceeds {limit:?}"))
}

fn c1_special_functions() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..2000 {
        let x = 0.5 + 19.5 * i as f64 / 1999.0;
        let r = rel(gamma_fn(x + 1.0).map_err(|e| e.to_string())?, x * gamma_fn(x).map_err(|e| e.to_string())?);
        worst = worst.max(r);
    }
    ensure(worst <= 1e-10, || format!("gamma recurrence rel dev {worst:e}"))?;

    // K_{1/2}(x) = √(π/2x) e^{-x}, K_{3/2} = K_{1/2}(1 + 1/x), K_{5/2} = K_{1/2}(1 + 3/x + 3/x²)
    let mut worst_k = 0.0f64;
    for i in 0..400 {
        let x = 1e-3 * 10f64.powf(4.5 * i as f64 / 399.0);
        let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
        for (nu, want) in [(0.5, k12), (1.5, k12 * (1.0 + 1.0 / x)), (2.5, k12 * (1.0 + 3.0 / x + 3.0 / (x * x)))] {
            if want > 1e-300 {
                let got = bessel_k(nu, x).map_err(|e| e.to_string())?;
                worst_k = worst_k.max(rel(got, want));
            }
        }
    }
    ensure(worst_k <= 1e-10, || format!("half-integer K rel dev {worst_k:e}"))?;

    let mut worst_sym = 0.0f64;
    for i in 0..500 {
        let nu = -40.0 + 80.0 * i as f64 / 499.0;
        for &x in &[1e-3, 0.5, 2.0, 17.0] {
            let a = bessel_k(nu, x).map_err(|e| e.to_string())?;
            let b = bessel_k(-nu, x).map_err(|e| e.to_string())?;
            worst_sym = worst_sym.max(rel(a, b));
        }
    }
    ensure(worst_sym <= 1e-10, || format!("K symmetry rel dev {worst_sym:e}"))?;
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "gamma recurrence {worst:.1e}, half-integer K {worst_k:.1e}, K symmetry {worst_sym:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn c2_distribution() -> Outcome {
    let start = Instant::now();
    let spec = QuadratureSpec::new(1e-300, 1e-13, 4000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut worst_ks = 0.0f64;
    for (i, regime) in Regime::ALL.into_iter().enumerate() {
        let p = regime.params();
        let gg = GammaGamma::new(&p).map_err(|e| e.to_string())?;
        for k in 0..2 {
            let m = integrate(|h| gg.pdf_h(h) * h.powi(k), 0.0, f64::INFINITY, &spec)
                .map_err(|e| e.to_string())?
                .value;
            worst = worst.max((m - 1.0).abs());
        }
        let mut h = sample_fading(&p, 100_000, 1000 + i as u64, 4).map_err(|e| e.to_string())?;
        h.sort_by(f64::total_cmp);
        let cdf = gg.cdf_h_sorted(&h).map_err(|e| e.to_string())?;
        let d = ks_statistic(&h, &cdf);
        let crit = ks_critical_1pct(h.len());
        worst_ks = worst_ks.max(d / crit);
        ensure(d < crit, || format!("{}: KS D = {d:.5} >= {crit:.5}", regime.name()))?;
    }
    ensure(worst < 1e-7, || format!("normalisation/mean deviation {worst:e}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "max |mass-1|,|mean-1| = {worst:.1e}, max KS D/crit = {worst_ks:.2}, {:.2?}",
        start.elapsed()
    ))
}

/// Min-mode outage from mpmath at 40 digits, (γ̄, γ_out) per regime.
const GOLDEN_OUTAGE: [[f64; 6]; 3] = [
    [
        0.080_704_558_801_717_549_966,
        0.296_264_603_394_827_685_45,
        0.002_473_289_221_065_895_959_3,
        0.014_492_305_429_261_495_459,
        3.951_725_675_832_737_515_7e-5,
        3.007_637_723_679_234_185_3e-4,
    ],
    [
        0.164_366_598_160_691_008_96,
        0.406_047_291_324_559_242_48,
        0.014_355_564_519_737_886_838,
        0.049_220_631_908_491_360_271,
        7.905_652_008_253_992_299e-4,
        0.003_303_126_259_668_347_973_1,
    ],
    [
        0.309_753_285_529_714_375_96,
        0.540_117_470_766_987_848_13,
        0.067_292_043_163_501_435_161,
        0.145_544_355_846_209_610_06,
        0.011_374_933_530_247_509_361,
        0.027_195_135_850_334_983_466,
    ],
];

fn c3_oracle_triangle() -> Outcome {
    let start = Instant::now();
    let n = 1_000_000u64;
    let mut worst_z = 0.0f64;
    let mut worst_golden = 0.0f64;
    let mut misses = Vec::new();
    for (ri, regime) in Regime::ALL.into_iter().enumerate() {
        for (gi, &gbar) in [10.0, 100.0, 1000.0].iter().enumerate() {
            let scen = RelayScenario::preset(regime, AvgSnr::new(gbar).map_err(|e| e.to_string())?, 1.0)
                .map_err(|e| e.to_string())?;
            let seed = 0x5eed_0000 + (ri * 3 + gi) as u64;
            let cfg = SimConfig::new(scen, n, seed);
            let mc = simulate(&cfg, &[1.0, 3.0], &[SnrMode::Min]).map_err(|e| e.to_string())?;
            for (ti, &gout) in [1.0, 3.0].iter().enumerate() {
                let reference = e2e_cdf_reference(gout, &scen, SnrMode::Min).map_err(|e| e.to_string())?;
                let golden = GOLDEN_OUTAGE[ri][gi * 2 + ti];
                worst_golden = worst_golden.max(rel(reference, golden));
                let est = mc[0].outage[ti];
                let se = est.std_error.max((reference * (1.0 - reference) / n as f64).sqrt());
                let z = (est.estimate - reference).abs() / se;
                worst_z = worst_z.max(z);
                if z > 3.0 {
                    misses.push(format!(
                        "{} gbar={gbar} gout={gout}: MC {} vs reference {reference} ({z:.2} SE)",
                        regime.name(),
                        est.estimate
                    ));
                }
            }
            let cap = ergodic_capacity_quadrature(&scen, SnrMode::Min).map_err(|e| e.to_string())?.value;
            let z = mc[0].capacity.z_score(cap, 0.0);
            worst_z = worst_z.max(z);
            if z > 3.0 {
                misses.push(format!(
                    "{} gbar={gbar}: MC capacity {} vs quadrature {cap} ({z:.2} SE)",
                    regime.name(),
                    mc[0].capacity.estimate
                ));
            }
        }
    }
    ensure(misses.is_empty(), || format!("{} of 27 beyond 3 SE: {}", misses.len(), misses.join("; ")))?;
    ensure(worst_golden < 1e-8, || format!("reference vs high-precision outage rel dev {worst_golden:e}"))?;
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "27 comparisons, max |MC-ref|/SE = {worst_z:.2}, reference vs high-precision {worst_golden:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn snr_grid() -> Vec<f64> {
    (0..=20).map(|i| 2.0 * i as f64).collect()
}

fn regime_curves<F: Fn(&RelayScenario) -> ovlc::Result<f64>>(f: F) -> Result<Vec<Vec<f64>>, String> {
    Regime::ALL
        .iter()
        .map(|&r| {
            snr_grid()
                .iter()
                .map(|&db| {
                    let s = RelayScenario::preset(r, AvgSnr::from_db(db)?, 1.0)?;
                    f(&s)
                })
                .collect::<ovlc::Result<Vec<f64>>>()
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn c4_outage_ordering() -> Outcome {
    let curves = regime_curves(|s| outage_probability(s, Evaluator::Reference(SnrMode::Min)))?;
    let grid = snr_grid();
    for (r, c) in Regime::ALL.iter().zip(&curves) {
        for (i, w) in c.windows(2).enumerate() {
            ensure(w[1] <= w[0], || format!("{} outage rises at {} dB", r.name(), grid[i + 1]))?;
        }
    }
    let broken: Vec<String> = (0..grid.len())
        .filter(|&i| !(curves[0][i] <= curves[1][i] && curves[1][i] <= curves[2][i]))
        .map(|i| format!("{} dB {:.4?}", grid[i], [curves[0][i], curves[1][i], curves[2][i]]))
        .collect();
    ensure(broken.is_empty(), || format!("weak <= moderate <= strong broken at {}", broken.join("; ")))?;
    Ok(format!(
        "{} points x 3 regimes; at 20 dB weak {:.3e} <= moderate {:.3e} <= strong {:.3e}",
        grid.len(),
        curves[0][10],
        curves[1][10],
        curves[2][10]
    ))
}

fn c5_capacity_ordering() -> Outcome {
    let curves = regime_curves(|s| ergodic_capacity_quadrature(s, SnrMode::Min).map(|c| c.value))?;
    let grid = snr_grid();
    for (r, c) in Regime::ALL.iter().zip(&curves) {
        for (i, w) in c.windows(2).enumerate() {
            ensure(w[1] >= w[0], || format!("{} capacity falls at {} dB", r.name(), grid[i + 1]))?;
        }
    }
    for i in 0..grid.len() {
        ensure(curves[0][i] >= curves[1][i] && curves[1][i] >= curves[2][i], || {
            format!("regime order broken at {} dB: {:?}", grid[i], [curves[0][i], curves[1][i], curves[2][i]])
        })?;
    }
    Ok(format!(
        "{} points x 3 regimes; at 0 dB weak {:.4} >= moderate {:.4} >= strong {:.4}",
        grid.len(),
        curves[0][0],
        curves[1][0],
        curves[2][0]
    ))
}

fn c6_distance_ordering() -> Outcome {
    let env = NoiseEnvironment::default();
    let sr_geom = LinkGeometry::default().with_distance(10.0);
    let distances = [5.0, 10.0, 20.0, 40.0];
    let powers: Vec<f64> = (0..=12).map(|i| 0.1 * 10f64.powf(i as f64 / 6.0)).collect();
    let mut rows = 0;
    for regime in Regime::ALL {
        for &p in &powers {
            let sr = link_budget(&sr_geom, &env, p).map_err(|e| e.to_string())?.avg_snr;
            let mut prev: Option<(f64, f64)> = None;
            for &d in &distances {
                let rd = link_budget(&LinkGeometry::default().with_distance(d), &env, p)
                    .map_err(|e| e.to_string())?
                    .avg_snr;
                let s = RelayScenario::shared(regime.params(), sr, rd, 1.0).map_err(|e| e.to_string())?;
                let out = outage_probability(&s, Evaluator::Reference(SnrMode::Min)).map_err(|e| e.to_string())?;
                let cap = ergodic_capacity_quadrature(&s, SnrMode::Min).map_err(|e| e.to_string())?.value;
                if let Some((po, pc)) = prev {
                    ensure(out > po && cap < pc, || {
                        format!("{} P={p:.3} W d={d}: outage {out} vs {po}, capacity {cap} vs {pc}", regime.name())
                    })?;
                }
                prev = Some((out, cap));
                rows += 1;
            }
        }
    }
    // the CLI path: distance sweep through a scenario file
    let scen = Scenario::parse(
        "[turbulence]\npreset = \"weak\"\n[relay]\nderive_from_physics = true\n\
         [sweep]\naxis = \"distance_m\"\npoints = [5.0, 10.0, 20.0, 40.0]\n\
         [sim]\nsample_count = 20000\n[report]\ndiscrepancy = false\n",
    )
    .map_err(|e| e.to_string())?;
    let report = run_sweep(&scen, 2).map_err(|e| e.to_string())?;
    let caps: Vec<f64> = report.tables[0].rows.iter().filter_map(|r| r.cap_quad.value()).collect();
    ensure(caps.len() == 4 && caps.windows(2).all(|w| w[1] < w[0]), || {
        format!("sweep capacity not decreasing in distance: {caps:?}")
    })?;
    Ok(format!(
        "{rows} (regime, power, distance) points strictly ordered; sweep capacity {:.3} > {:.3} > {:.3} > {:.3}",
        caps[0], caps[1], caps[2], caps[3]
    ))
}

fn c7_bound_dominance() -> Outcome {
    let thresholds: Vec<f64> = (0..=40).map(|i| 0.01 * 10f64.powf(i as f64 / 10.0)).collect();
    let mut worst_margin = f64::INFINITY;
    for regime in Regime::ALL {
        let scen = RelayScenario::preset(regime, AvgSnr::new(30.0).map_err(|e| e.to_string())?, 1.0)
            .map_err(|e| e.to_string())?;
        let draws = sample_relay(&SimConfig::new(scen, 1_000_000, 77)).map_err(|e| e.to_string())?;
        let mut exact: Vec<f64> = draws.iter().map(|d| d.destination(SnrMode::Exact)).collect();
        let mut min: Vec<f64> = draws.iter().map(|d| d.destination(SnrMode::Min)).collect();
        exact.sort_by(f64::total_cmp);
        min.sort_by(f64::total_cmp);
        for &t in &thresholds {
            let pe = exact.partition_point(|&g| g <= t);
            let pm = min.partition_point(|&g| g <= t);
            ensure(pe >= pm, || format!("{} threshold {t}: exact {pe} < min {pm}", regime.name()))?;
            worst_margin = worst_margin.min((pe - pm) as f64 / draws.len() as f64);
        }
    }
    Ok(format!(
        "3 regimes x 1e6 joint draws x {} thresholds, min outage gap {worst_margin:.2e}",
        thresholds.len()
    ))
}

const REPRO_SCENARIO: &str = "[turbulence]\npreset = \"weak\"\n\
[sweep]\naxis = \"snr_db\"\nstart = 0.0\nstop = 40.0\nstep = 4.0\n\
[sim]\nsample_count = 300000\nmaster_seed = 20240607\nmodes = [\"min\", \"exact\"]\n";

fn c8_reproducibility() -> Outcome {
    let scen = Scenario::parse(REPRO_SCENARIO).map_err(|e| e.to_string())?;
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut outputs = Vec::new();
    for (dir, workers) in dirs.iter().zip([1usize, 4, 4]) {
        let report = run_sweep(&scen, workers).map_err(|e| e.to_string())?;
        let files = emit_report(&report, dir.path(), Format::Csv).map_err(|e| e.to_string())?;
        let bytes: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap()))
            .collect();
        outputs.push(bytes);
    }
    ensure(outputs[0] == outputs[1], || "CSV differs between 1 and 4 workers".into())?;
    ensure(outputs[1] == outputs[2], || "CSV differs between repeated runs".into())?;
    let total: usize = outputs[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!(
        "{} files ({total} bytes) byte-identical across 1/4 workers and repeated runs",
        outputs[0].len()
    ))
}

fn c9_discrepancy_report() -> Outcome {
    let scen = Scenario::parse(
        "[turbulence]\npreset = \"weak\"\n[sweep]\naxis = \"snr_db\"\npoints = [10.0]\n[sim]\nsample_count = 1000\n",
    )
    .map_err(|e| e.to_string())?;
    let report = run_sweep(&scen, 2).map_err(|e| e.to_string())?;
    let text = discrepancy_csv(&report.discrepancy);
    let mut lines = text.lines();
    ensure(lines.next() == Some("# schema_version=1"), || "missing schema comment".into())?;
    ensure(lines.next() == Some(DISCREPANCY_HEADER.join(",").as_str()), || "bad header".into())?;
    let known = [
        metric::CDF_LINK,
        metric::CDF_E2E,
        metric::CDF_E2E_COMPOSED,
        metric::PDF_E2E,
        metric::PDF_E2E_VS_DERIVATIVE,
        metric::CAPACITY,
    ];
    let mut seen = std::collections::BTreeSet::new();
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        ensure(f.len() == 7, || format!("row has {} fields: {line}", f.len()))?;
        ensure(known.contains(&f[2]), || format!("unknown metric {}", f[2]))?;
        ensure(f[1].contains("|snr_db="), || format!("regime label {}", f[1]))?;
        ensure(f[2] == metric::CAPACITY || f[0].parse::<f64>().is_ok(), || format!("gamma {}", f[0]))?;
        ensure(f[4].parse::<f64>().is_ok(), || format!("reference value {}", f[4]))?;
        let paper_ok = f[3].parse::<f64>().is_ok();
        ensure(paper_ok || ["POLE", "OVERFLOW", "QUAD", "DOMAIN"].contains(&f[3]), || {
            format!("closed-form value {}", f[3])
        })?;
        ensure(!paper_ok || (f[5].parse::<f64>().is_ok() && f[6].parse::<f64>().is_ok()), || {
            format!("deviation cells {line}")
        })?;
        seen.insert(f[2].to_string());
        rows += 1;
    }
    ensure(seen.len() == known.len(), || format!("metrics present: {seen:?}"))?;
    // 3 regimes x 3 SNRs x (7 γ x 5 metrics + capacity)
    ensure(rows == 9 * 36, || format!("{rows} rows"))?;
    let sweep = sweep_csv(&report.tables[0]);
    ensure(sweep.lines().nth(1) == Some(CSV_HEADER.join(",").as_str()), || "sweep header".into())?;
    let json: serde_json::Value = serde_json::from_str(&ovlc::sweep::report_json(&report)).map_err(|e| e.to_string())?;
    ensure(json["schema_version"] == 1, || "json schema_version".into())?;
    let cap = report
        .discrepancy
        .iter()
        .find(|r| r.metric == metric::CAPACITY && r.regime == "weak|snr_db=20")
        .ok_or("no capacity row")?;
    Ok(format!(
        "{rows} rows, {} metrics; e.g. weak 20 dB capacity closed form {:?} vs quadrature {:?}",
        seen.len(),
        cap.paper_value,
        cap.reference_value
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("special functions", c1_special_functions),
        ("distribution correctness", c2_distribution),
        ("oracle triangle", c3_oracle_triangle),
        ("outage vs SNR and regime", c4_outage_ordering),
        ("capacity vs SNR and regime", c5_capacity_ordering),
        ("distance ordering", c6_distance_ordering),
        ("bound dominance", c7_bound_dominance),
        ("reproducibility", c8_reproducibility),
        ("discrepancy report", c9_discrepancy_report),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
