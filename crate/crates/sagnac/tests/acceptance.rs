//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion outside `KNOWN_UNATTAINABLE` fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagnac::commands::derived_seeds;
use sagnac::config::LoadedConfig;
use sagnac::report::{table_report, TableInput};
use sagnac_core::analysis::{
    calibrate_spin_echo_constant, reduce_pair, Estimate, ReductionOptions, ReportOptions,
};
use sagnac_core::instrument::*;
use sagnac_core::oam::*;
use sagnac_core::signal::*;

/// Criteria whose target cannot be met by an unbiased estimator; they are
/// run and reported but do not fail the suite.
const KNOWN_UNATTAINABLE: &[&str] = &["AC3"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_rel(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

/// `|value - printed| <= 1` in the last printed digit of `printed`.
fn printed_match(value: f64, printed: f64, decimals: i32) -> bool {
    (value - printed).abs() <= 10f64.powi(-decimals) * (1.0 + 1e-9)
}

// ---------------------------------------------------------------------------

const AC1_A2: f64 = -1.15e-3;
const AC1_C_OAM: f64 = -8.62e3;
const AC1_REL: f64 = 0.01;
const AC1_BUDGET: Duration = Duration::from_secs(1);

fn ac1() -> Outcome {
    let cfg = InstrumentConfig::nominal();
    let a2 = predict_a2(&cfg).unwrap();
    let c_oam = c_oam_from_a2(a2, &cfg).unwrap();
    let c_se = spin_echo_constant(&cfg).unwrap();
    outcome(
        within_rel(a2, AC1_A2, AC1_REL) && within_rel(c_oam, AC1_C_OAM, AC1_REL) && (c_se - 0.137).abs() < 1e-12,
        format!("c_SE = {c_se} um/A^2, a2 = {a2:.5e} A^-2, c_OAM = {c_oam:.2} A^-1"),
    )
}

// ---------------------------------------------------------------------------

const AC2_BUDGET: Duration = Duration::from_secs(1);

fn table_config() -> LoadedConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table_report.json");
    LoadedConfig::load(Some(&path)).unwrap()
}

fn table_chain() -> sagnac_core::analysis::AnalysisReport {
    let loaded = table_config();
    let text = std::fs::read(loaded.run.inputs.table.as_ref().unwrap()).unwrap();
    let table: TableInput = serde_json::from_slice(&text).unwrap();
    let options = ReportOptions {
        reference: loaded.run.analysis.sensitivity_reference.into(),
        series_a2: None,
    };
    table_report(&table, &loaded.instrument, &options).unwrap()
}

fn ac2() -> Outcome {
    let r = table_chain();
    let plus = r.plus.as_ref().unwrap().corrected;
    let minus = r.minus.as_ref().unwrap().corrected;
    let milli = |e: Estimate| (e.value * 1e3, e.error * 1e3);
    let (p, _) = milli(plus);
    let (m, _) = milli(minus);
    let (c, ce) = milli(r.combined_a2);
    let checks = [
        printed_match(p, -1.117, 3),
        printed_match(m, 1.049, 3),
        printed_match(c, -1.083, 3),
        printed_match(ce, 0.078, 3),
        printed_match(r.ell_slope.value.abs(), 4098.0, 0),
        printed_match(r.ell_slope.error, 295.0, 0),
        r.error_convention_caveat,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "a2+ = {p:.4}, a2- = {m:.4}, a2_S = {c:.4} +/- {ce:.4} (x1e-3 A^-2), slope = {:.1} +/- {:.1}, \
             c_OAM = {:.0} +/- {:.0}, caveat = {}",
            r.ell_slope.value, r.ell_slope.error, r.c_oam.value, r.c_oam.error, r.error_convention_caveat
        ),
    )
}

// ---------------------------------------------------------------------------

const AC3_RUNS: u64 = 100;
const AC3_REQUIRED: usize = 95;
const AC3_PULL: f64 = 1.5;
const AC3_INJECTED: f64 = -1.083e-3;
const AC3_PULSES: u64 = 500;
const AC3_BUDGET: Duration = Duration::from_secs(120);

fn ac3() -> Outcome {
    let cfg = InstrumentConfig::nominal();
    let options = SimulationOptions::default();
    let plus_params = PolarizationModelParams::for_polarity(
        Polarity::Positive,
        AC3_INJECTED,
        PolarizationModelParams::default_wobble(14.4e-5, 8.22e-5),
    );
    let minus_params = PolarizationModelParams::for_polarity(
        Polarity::Negative,
        AC3_INJECTED,
        PolarizationModelParams::default_wobble(8.88e-5, 6.23e-5),
    );
    let mut hits = 0;
    let mut pulls = Vec::new();
    let mut raw_sigma = 0.0;
    let mut sigma = 0.0;
    for run in 0..AC3_RUNS {
        let [s_plus, s_minus, _] = derived_seeds(run);
        let plus = simulate_dataset(&plus_params, &cfg, AC3_PULSES, s_plus, &options).unwrap();
        let minus = simulate_dataset(&minus_params, &cfg, AC3_PULSES, s_minus, &options).unwrap();
        let pair = reduce_pair(&plus, &minus, &ReductionOptions::default()).unwrap();
        let e = pair.corrected.estimate;
        let pull = (e.value - AC3_INJECTED) / e.error;
        if pull.abs() <= AC3_PULL {
            hits += 1;
        }
        pulls.push(pull);
        raw_sigma += 0.5 * (pair.plus.raw_fit.a2_error() + pair.minus.raw_fit.a2_error());
        sigma += e.error;
    }
    let n = AC3_RUNS as f64;
    let mean = pulls.iter().sum::<f64>() / n;
    let sd = (pulls.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    outcome(
        hits >= AC3_REQUIRED,
        format!(
            "{hits}/{AC3_RUNS} within {AC3_PULL} sigma (need {AC3_REQUIRED}); mean sigma(a2_S) = {:.4e}, \
             mean raw per-polarity sigma(a2) = {:.4e}; pulls mean {mean:.3}, sd {sd:.3}; \
             Gaussian coverage at 1.5 sigma is 86.6%",
            sigma / n,
            raw_sigma / n
        ),
    )
}

// ---------------------------------------------------------------------------

const AC4_REL: f64 = 0.01;
const AC4_BUDGET: Duration = Duration::from_secs(10);

fn ac4() -> Outcome {
    let cfg = InstrumentConfig::nominal();
    let grating = GratingSpec::default();
    let options = SimulationOptions::default();
    let series = simulate_grating(&grating, &cfg, 1000, 5, &options).unwrap();
    let cal = calibrate_spin_echo_constant(&series, &grating).unwrap();
    let c_se = cal.spin_echo_constant.value;
    let bin = (cfg.lambda_max_ang - cfg.lambda_min_ang) / options.bins as f64;
    let worst = cal
        .peaks
        .iter()
        .zip(&cal.orders)
        .map(|(p, &n)| (p.lambda_ang - (n as f64 * grating.period_um / 0.137).sqrt()).abs())
        .fold(0.0, f64::max);
    outcome(
        within_rel(c_se, 0.137, AC4_REL) && worst <= bin && cal.peaks.len() >= 3,
        format!(
            "c_SE = {c_se:.6} +/- {:.6}, {} peaks (orders {:?}), worst peak offset {worst:.4} A vs bin {bin:.4} A",
            cal.spin_echo_constant.error,
            cal.peaks.len(),
            cal.orders
        ),
    )
}

// ---------------------------------------------------------------------------

const AC5_ORACLE_TOL: f64 = 1e-6;
const AC5_LEAKAGE: f64 = 1e-12;
const AC5_FIRST_MOMENT_REL: f64 = 1e-3;
const AC5_PI_MASS: f64 = 0.99;
const AC5_BUDGET: Duration = Duration::from_secs(60);

fn oracle_deviation(wp: &WavePacket) -> f64 {
    let closed = oam_spectrum(wp, None).unwrap();
    let numeric = numeric_oam_spectrum(&PolarGridField::from_packet(wp).unwrap()).unwrap();
    let scale = closed.captured_mass();
    closed
        .iter()
        .map(|(ell, p)| (p * scale - numeric.probability(ell)).abs())
        .fold(0.0, f64::max)
}

fn ac5() -> Outcome {
    let mut oracle = 0.0f64;
    let mut cases = 0;
    for sigma in [2.0, 5.0, 15.0] {
        for delta in [0.0, 7.5, 30.0] {
            for k in [-2.0, 1.5] {
                oracle = oracle.max(oracle_deviation(&WavePacket::offset_planewave(1.0, delta, sigma, k).unwrap()));
                cases += 1;
            }
        }
    }
    for (sep, beta) in [(4.0, 0.0), (4.0, PI), (20.0, 0.8), (40.0, PI / 2.0)] {
        oracle = oracle.max(oracle_deviation(&WavePacket::split_pair(1.0, sep, 10.0, beta).unwrap()));
        cases += 1;
    }

    let mut leakage = 0.0f64;
    for sep in [0.5, 2.0, 10.0, 40.0] {
        for sigma in [2.0, 10.0, 30.0] {
            for (beta, odd) in [(0.0, false), (PI, true)] {
                let dist = oam_spectrum(&WavePacket::split_pair(1.0, sep, sigma, beta).unwrap(), None).unwrap();
                leakage = leakage.max(dist.parity_mass(!odd));
            }
        }
    }

    let mut first = 0.0f64;
    for sigma in [1.0, 5.0, 20.0, 50.0] {
        for delta in [1.0, 10.0, 50.0, 100.0] {
            for k in [-5.0, -0.5, 2.0] {
                let dist = oam_spectrum(&WavePacket::offset_planewave(1.0, delta, sigma, k).unwrap(), None).unwrap();
                let expected = k * delta;
                first = first.max((oam_moment(&dist, 1) - expected).abs() / expected.abs());
            }
        }
    }

    let pi_pair = oam_spectrum(&WavePacket::split_pair(1.0, 0.2, 10.0, PI).unwrap(), None).unwrap();
    let pi_mass = pi_pair.probability(1) + pi_pair.probability(-1);

    outcome(
        oracle <= AC5_ORACLE_TOL && leakage < AC5_LEAKAGE && first <= AC5_FIRST_MOMENT_REL && pi_mass >= AC5_PI_MASS,
        format!(
            "oracle max |dp| = {oracle:.2e} over {cases} packets, parity leakage = {leakage:.2e}, \
             first-moment rel err = {first:.2e}, mass on l=+/-1 at beta=pi = {pi_mass:.6}"
        ),
    )
}

// ---------------------------------------------------------------------------

const AC6_CONFIGS: usize = 10_000;
const AC6_TOL: f64 = 1e-12;

fn random_config(rng: &mut ChaCha8Rng) -> InstrumentConfig {
    let mut latitude: f64 = rng.random_range(-89.0..89.0);
    if latitude.abs() < 1.0 {
        latitude = 1.0f64.copysign(latitude);
    }
    InstrumentConfig {
        l1_m: rng.random_range(0.2..3.0),
        l2_m: rng.random_range(0.5..20.0),
        l3_m: rng.random_range(0.2..3.0),
        latitude_rad: latitude.to_radians(),
        theta_rad: rng.random_range(5.0f64..80.0).to_radians(),
        b0_tesla: None,
        rf_hz: Some(rng.random_range(0.5e6..5e6)),
        c_se_um_per_ang2: None,
        orientation: if rng.random::<bool>() {
            Orientation::Positive
        } else {
            Orientation::Negative
        },
        ..InstrumentConfig::nominal()
    }
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a6e_ac06);
    let mut routes = 0.0f64;
    let mut identity = 0.0f64;
    for _ in 0..AC6_CONFIGS {
        let cfg = random_config(&mut rng);
        let lambda = rng.random_range(0.1..100.0);
        let (oam, area) = sagnac_phase_routes(&cfg, lambda).unwrap();
        routes = routes.max((oam - area).abs() / oam.abs().max(area.abs()));
        let c_se_ang = spin_echo_constant(&cfg).unwrap() * 1e4;
        let c_oam = c_oam_from_a2(predict_a2(&cfg).unwrap(), &cfg).unwrap();
        identity = identity.max((c_oam.abs() / (2.0 * PI * c_se_ang) - 1.0).abs());
    }
    outcome(
        routes <= AC6_TOL && identity <= AC6_TOL,
        format!(
            "{AC6_CONFIGS} configurations: max route rel diff = {routes:.2e}, \
             max | |c_OAM|/(2 pi c_SE) - 1 | = {identity:.2e}"
        ),
    )
}

// ---------------------------------------------------------------------------

const AC7_TARGET_URAD: f64 = 5.1;
const AC7_REL: f64 = 0.15;

fn ac7() -> Outcome {
    let r = table_chain();
    let s = r.sensitivity;
    let value = s.value() * 1e6;
    outcome(
        within_rel(value, AC7_TARGET_URAD, AC7_REL),
        format!(
            "{value:.3} urad/s from sigma = {:.4e} on a2 = {:.4e} (measured denominator; theory denominator gives {:.3})",
            s.basis.error,
            s.basis.value,
            s.theory_rad_s * 1e6
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 7] = [
        ("AC1", ac1, Some(AC1_BUDGET)),
        ("AC2", ac2, Some(AC2_BUDGET)),
        ("AC3", ac3, Some(AC3_BUDGET)),
        ("AC4", ac4, Some(AC4_BUDGET)),
        ("AC5", ac5, Some(AC5_BUDGET)),
        ("AC6", ac6, None),
        ("AC7", ac7, None),
    ];
    let mut blocking = Vec::new();
    for (id, run, budget) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            if elapsed > b {
                o.pass = false;
                o.detail.push_str(&format!("; over the {:.0} s budget", b.as_secs_f64()));
            }
        }
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_UNATTAINABLE.contains(&id) { " (known unattainable)" } else { "" };
        println!("{id} {status}{note} [{:.3} s] {}", elapsed.as_secs_f64(), o.detail);
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            blocking.push(id);
        }
    }
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing criteria: {}", blocking.join(", "));
        ExitCode::FAILURE
    }
}
