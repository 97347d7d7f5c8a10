//! The six subcommands. Each returns the paths it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use sagnac_core::analysis::{
    aggregate_series, calibrate_spin_echo_constant, polarity_report, reduce_pair, reduce_polarity,
    subtract_oscillation, weighted_quadratic_fit, Estimate, PolarityReduction, ReportOptions,
};
use sagnac_core::instrument::{
    c_oam_from_a2, ell_slope_from_c_oam, oam_eigenvalue, predict_a2, sagnac_phase, spin_echo_constant,
    spin_echo_length,
};
use sagnac_core::linalg::{weighted_least_squares, Design};
use sagnac_core::oam::{
    extrinsic_oam, oam_moment, oam_spectrum, vortex_mode_amplitude, ModeWindow, WavePacket,
};
use sagnac_core::signal::{
    simulate_dataset, simulate_grating, wavelength_grid, Polarity, PolarizationModelParams, PolarizationSeries,
    WobbleTerm,
};

use crate::config::{InstrumentJson, LoadedConfig, PacketJson, PacketKindJson};
use crate::error::{Error, Result};
use crate::io::{out_path, read_series, window_series, write_csv, write_json, write_series, Provenance};
use crate::report::{table_report, AnalysisReportJson, QuadraticFitJson, TableInput, WobbleFitJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Predict,
    Decompose,
    Simulate,
    Calibrate,
    Fit,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: LoadedConfig,
    pub out_dir: PathBuf,
    /// `--seed` when given, otherwise the configured one.
    pub seed: Option<u64>,
    pub format: Format,
}

impl Context {
    pub fn new(config: LoadedConfig, out_dir: Option<PathBuf>, seed: Option<u64>, format: Format) -> Self {
        let out_dir = out_dir
            .or_else(|| config.run.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let seed = seed.or(config.run.simulation.seed);
        Self { config, out_dir, seed, format }
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(&self.config.sha256, self.seed)
    }

    fn path(&self, name: &str) -> PathBuf {
        out_path(&self.out_dir, name)
    }

    /// Summary document as `stem.json`, or flattened `key,value` rows in
    /// `stem.csv`.
    fn summary<T: Serialize>(&self, stem: &str, body: &T, written: &mut Vec<PathBuf>) -> Result<()> {
        let path = match self.format {
            Format::Json => {
                let p = self.path(&format!("{stem}.json"));
                write_json(&p, &self.provenance(), body)?;
                p
            }
            Format::Csv => {
                let value = serde_json::to_value(body).map_err(|e| Error::Config(e.to_string()))?;
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                let p = self.path(&format!("{stem}.csv"));
                write_csv(&p, &self.provenance(), &rows)?;
                p
            }
        };
        written.push(path);
        Ok(())
    }

    fn csv<R: Serialize>(&self, name: &str, rows: &[R], written: &mut Vec<PathBuf>) -> Result<()> {
        let p = self.path(name);
        write_csv(&p, &self.provenance(), rows)?;
        written.push(p);
        Ok(())
    }

    fn input(&self, configured: &Option<PathBuf>, fallback: &str) -> Result<PathBuf> {
        if let Some(p) = configured {
            return Ok(p.clone());
        }
        let p = self.path(fallback);
        if p.is_file() {
            Ok(p)
        } else {
            Err(Error::Config(format!(
                "no input dataset configured and {} does not exist",
                p.display()
            )))
        }
    }
}

#[derive(Serialize)]
struct KeyValue {
    key: String,
    value: String,
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<KeyValue>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push(KeyValue { key: prefix.into(), value: s.clone() }),
        Value::Null => out.push(KeyValue { key: prefix.into(), value: String::new() }),
        other => out.push(KeyValue { key: prefix.into(), value: other.to_string() }),
    }
}

pub fn run(command: Command, ctx: &Context) -> Result<Vec<PathBuf>> {
    match command {
        Command::Predict => predict(ctx),
        Command::Decompose => decompose(ctx),
        Command::Simulate => simulate(ctx),
        Command::Calibrate => calibrate(ctx),
        Command::Fit => fit(ctx),
        Command::Report => report(ctx),
    }
}

#[derive(Serialize)]
struct PredictPoint {
    lambda_ang: f64,
    spin_echo_length_um: f64,
    sagnac_phase_rad: f64,
    ell_plus: f64,
}

#[derive(Serialize)]
struct PredictSummary {
    instrument: InstrumentJson,
    spin_echo_constant_um_per_ang2: f64,
    a2_per_ang2: f64,
    c_oam_per_ang: f64,
    ell_slope_per_ang: f64,
    effective_length_m: f64,
    geometry_factor_m: f64,
}

fn predict(ctx: &Context) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config.instrument;
    let a2 = predict_a2(cfg)?;
    let c_oam = c_oam_from_a2(a2, cfg)?;
    let summary = PredictSummary {
        instrument: cfg.into(),
        spin_echo_constant_um_per_ang2: spin_echo_constant(cfg)?,
        a2_per_ang2: a2,
        c_oam_per_ang: c_oam,
        ell_slope_per_ang: ell_slope_from_c_oam(c_oam),
        effective_length_m: cfg.effective_length(),
        geometry_factor_m: cfg.geometry_factor(),
    };
    let mut curve = Vec::new();
    for l in wavelength_grid(cfg.lambda_min_ang, cfg.lambda_max_ang, 100) {
        let delta = spin_echo_length(cfg, l)?;
        curve.push(PredictPoint {
            lambda_ang: l,
            spin_echo_length_um: delta,
            sagnac_phase_rad: sagnac_phase(cfg, l)?,
            ell_plus: oam_eigenvalue(delta, l)?.0,
        });
    }
    let mut written = Vec::new();
    ctx.summary("predict", &summary, &mut written)?;
    ctx.csv("predict_curve.csv", &curve, &mut written)?;
    Ok(written)
}

fn build_packet(p: &PacketJson) -> Result<WavePacket> {
    Ok(match p.kind {
        PacketKindJson::Offset => {
            WavePacket::offset_planewave(p.amplitude, p.displacement, p.coherence_length, p.transverse_momentum)?
        }
        PacketKindJson::SplitPair => {
            WavePacket::split_pair(p.amplitude, p.displacement, p.coherence_length, p.relative_phase_rad)?
        }
    })
}

#[derive(Serialize)]
struct ModeRow {
    ell: i64,
    probability: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    ell: i64,
    re: f64,
    im: f64,
    magnitude: f64,
}

#[derive(Serialize)]
struct PacketSummary {
    name: String,
    window: [i64; 2],
    captured_mass: f64,
    peak_mode: i64,
    mean_ell: f64,
    second_moment: f64,
    odd_mass: f64,
    extrinsic_oam: f64,
    file: String,
}

fn decompose(ctx: &Context) -> Result<Vec<PathBuf>> {
    let setup = ctx.config.run.decompose.clone().unwrap_or_default();
    let mut written = Vec::new();
    let mut summaries = Vec::new();
    for p in &setup.packets {
        let wp = build_packet(p)?;
        let window = match p.window {
            Some([lo, hi]) => Some(ModeWindow::new(lo, hi)?),
            None => None,
        };
        let dist = oam_spectrum(&wp, window)?;
        let rows: Vec<ModeRow> = dist.iter().map(|(ell, probability)| ModeRow { ell, probability }).collect();
        let file = format!("decompose_{}.csv", p.name);
        ctx.csv(&file, &rows, &mut written)?;
        let w = dist.window();
        summaries.push(PacketSummary {
            name: p.name.clone(),
            window: [w.min, w.max],
            captured_mass: dist.captured_mass(),
            peak_mode: dist.peak_mode(),
            mean_ell: oam_moment(&dist, 1),
            second_moment: oam_moment(&dist, 2),
            odd_mass: dist.parity_mass(true),
            extrinsic_oam: extrinsic_oam(&wp),
            file,
        });
    }
    for profile in &setup.profiles {
        let p = setup
            .packets
            .iter()
            .find(|p| p.name == profile.packet)
            .ok_or_else(|| Error::Config(format!("profile refers to unknown packet {:?}", profile.packet)))?;
        let wp = build_packet(p)?;
        let mut rows = Vec::new();
        for &ell in &profile.modes {
            for i in 0..profile.points.max(2) {
                let r = profile.r_max * i as f64 / (profile.points.max(2) - 1) as f64;
                let a = vortex_mode_amplitude(&wp, ell, r)?;
                rows.push(ProfileRow { r, ell, re: a.re, im: a.im, magnitude: a.norm() });
            }
        }
        ctx.csv(&format!("profile_{}.csv", p.name), &rows, &mut written)?;
    }
    #[derive(Serialize)]
    struct Summary {
        packets: Vec<PacketSummary>,
    }
    ctx.summary("decompose", &Summary { packets: summaries }, &mut written)?;
    Ok(written)
}

/// Independent generator seeds for the three simulated datasets.
pub fn derived_seeds(seed: u64) -> [u64; 3] {
    // splitmix64 finaliser
    let mix = |mut z: u64| {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    [1u64, 2, 3].map(|tag| mix(seed.wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))))
}

#[derive(Serialize)]
struct SimulateSummary {
    seed: u64,
    seeds: [u64; 3],
    a2_sagnac_per_ang2: f64,
    n_pulses: u64,
    counts_per_pulse: f64,
    bins: usize,
    noiseless: bool,
    plus_wobble: Vec<[f64; 3]>,
    minus_wobble: Vec<[f64; 3]>,
    grating_period_um: f64,
    files: [String; 3],
}

fn simulate(ctx: &Context) -> Result<Vec<PathBuf>> {
    let seed = ctx
        .seed
        .ok_or_else(|| Error::Config("simulation needs a seed (simulation.seed or --seed)".into()))?;
    let sim = &ctx.config.run.simulation;
    let cfg = &ctx.config.instrument;
    let a2_s = match sim.a2_sagnac_per_ang2 {
        Some(v) => v,
        None => predict_a2(cfg)?,
    };
    let w = &sim.wobble;
    let k2 = w.k2_per_ang.unwrap_or(2.0 * w.k1_per_ang);
    let terms = |amps: [f64; 2]| {
        vec![
            WobbleTerm::new(amps[0], w.k1_per_ang, w.phases_rad[0]),
            WobbleTerm::new(amps[1], k2, w.phases_rad[1]),
        ]
    };
    let params = |polarity: Polarity, amps: [f64; 2]| PolarizationModelParams {
        p0: sim.p0,
        epsilon: sim.epsilon,
        a1: sim.a1_per_ang,
        ..PolarizationModelParams::for_polarity(polarity, a2_s, terms(amps))
    };
    let seeds = derived_seeds(seed);
    let opts = sim.options();
    let plus = simulate_dataset(&params(Polarity::Positive, w.plus_amplitudes_per_ang2), cfg, sim.n_pulses, seeds[0], &opts)?;
    let minus =
        simulate_dataset(&params(Polarity::Negative, w.minus_amplitudes_per_ang2), cfg, sim.n_pulses, seeds[1], &opts)?;
    let grating = simulate_grating(&sim.grating.spec(), cfg, sim.grating.n_pulses, seeds[2], &opts)?;

    let mut written = Vec::new();
    let prov = ctx.provenance();
    for (name, s) in [("plus.csv", &plus), ("minus.csv", &minus), ("grating.csv", &grating)] {
        let p = ctx.path(name);
        write_series(&p, &prov, s)?;
        written.push(p);
    }
    let as_rows = |t: Vec<WobbleTerm>| t.iter().map(|t| [t.amplitude, t.frequency, t.phase]).collect();
    let summary = SimulateSummary {
        seed,
        seeds,
        a2_sagnac_per_ang2: a2_s,
        n_pulses: sim.n_pulses,
        counts_per_pulse: sim.counts_per_pulse,
        bins: sim.bins,
        noiseless: sim.noiseless,
        plus_wobble: as_rows(terms(w.plus_amplitudes_per_ang2)),
        minus_wobble: as_rows(terms(w.minus_amplitudes_per_ang2)),
        grating_period_um: sim.grating.period_um,
        files: ["plus.csv".into(), "minus.csv".into(), "grating.csv".into()],
    };
    ctx.summary("simulate", &summary, &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct PeakRow {
    order: u32,
    lambda_ang: f64,
    expected_lambda_ang: f64,
    lambda_sq_ang2: f64,
    spin_echo_length_um: f64,
}

#[derive(Serialize)]
struct CurveRow {
    lambda_ang: f64,
    value: f64,
    variance: f64,
    model: f64,
}

#[derive(Serialize)]
struct CalibrationSummary {
    spin_echo_constant_um_per_ang2: Estimate2,
    configured_spin_echo_constant_um_per_ang2: f64,
    relative_deviation: f64,
    peaks: usize,
    first_order: u32,
    residual_sum_squares_um2: f64,
}

#[derive(Serialize)]
struct Estimate2 {
    value: f64,
    error: f64,
}

impl From<Estimate> for Estimate2 {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, error: e.error }
    }
}

fn calibrate(ctx: &Context) -> Result<Vec<PathBuf>> {
    let path = ctx.input(&ctx.config.run.inputs.grating, "grating.csv")?;
    let series = read_series(&path)?;
    let grating = ctx.config.run.simulation.grating.spec();
    let cal = calibrate_spin_echo_constant(&series, &grating)?;
    let c = cal.spin_echo_constant.value;
    let configured = spin_echo_constant(&ctx.config.instrument)?;
    let peaks: Vec<PeakRow> = cal
        .peaks
        .iter()
        .zip(&cal.orders)
        .map(|(p, &n)| PeakRow {
            order: n,
            lambda_ang: p.lambda_ang,
            expected_lambda_ang: (n as f64 * grating.period_um / c).sqrt(),
            lambda_sq_ang2: p.lambda_ang * p.lambda_ang,
            spin_echo_length_um: n as f64 * grating.period_um,
        })
        .collect();
    let curve: Vec<CurveRow> = series
        .rows()
        .iter()
        .map(|r| CurveRow {
            lambda_ang: r.lambda_ang,
            value: r.value,
            variance: r.variance,
            model: grating.autocorrelation(c * r.lambda_ang * r.lambda_ang),
        })
        .collect();
    let summary = CalibrationSummary {
        spin_echo_constant_um_per_ang2: cal.spin_echo_constant.into(),
        configured_spin_echo_constant_um_per_ang2: configured,
        relative_deviation: c / configured - 1.0,
        peaks: cal.peaks.len(),
        first_order: cal.orders[0],
        residual_sum_squares_um2: cal.residual_sum_squares,
    };
    let mut written = Vec::new();
    ctx.summary("calibration", &summary, &mut written)?;
    ctx.csv("calibration_peaks.csv", &peaks, &mut written)?;
    ctx.csv("calibration_curve.csv", &curve, &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct ReductionJson {
    polarity: &'static str,
    raw_fit: QuadraticFitJson,
    wobble: WobbleFitJson,
    dewiggled_fit: QuadraticFitJson,
    corrected_a2_per_ang2: Estimate2,
    iterations: usize,
}

#[derive(Serialize)]
struct FitCurveRow {
    lambda_ang: f64,
    value: f64,
    variance: f64,
    raw_fit: f64,
    dewiggled_value: f64,
    dewiggled_fit: f64,
}

#[derive(Serialize)]
struct ResidualRow {
    lambda_ang: f64,
    residual_per_ang2: f64,
    variance: f64,
    wobble_model_per_ang2: f64,
}

fn tag(p: Polarity) -> &'static str {
    match p {
        Polarity::Positive => "plus",
        Polarity::Negative => "minus",
        Polarity::Off => "off",
    }
}

fn emit_reduction(
    ctx: &Context,
    series: &PolarizationSeries,
    r: &PolarityReduction,
    polarity: Polarity,
    written: &mut Vec<PathBuf>,
) -> Result<ReductionJson> {
    let cleaned = subtract_oscillation(series, &r.wobble)?;
    let curve: Vec<FitCurveRow> = series
        .rows()
        .iter()
        .zip(cleaned.rows())
        .map(|(s, c)| FitCurveRow {
            lambda_ang: s.lambda_ang,
            value: s.value,
            variance: s.variance,
            raw_fit: r.raw_fit.evaluate(s.lambda_ang),
            dewiggled_value: c.value,
            dewiggled_fit: r.dewiggled_fit.evaluate(s.lambda_ang),
        })
        .collect();
    let residuals: Vec<ResidualRow> = r
        .residuals
        .rows()
        .iter()
        .map(|row| ResidualRow {
            lambda_ang: row.lambda_ang,
            residual_per_ang2: row.value,
            variance: row.variance,
            wobble_model_per_ang2: r.wobble.offset + r.wobble.oscillation(row.lambda_ang),
        })
        .collect();
    ctx.csv(&format!("fit_{}.csv", tag(polarity)), &curve, written)?;
    ctx.csv(&format!("residuals_{}.csv", tag(polarity)), &residuals, written)?;
    Ok(ReductionJson {
        polarity: match polarity {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Off => "off",
        },
        raw_fit: (&r.raw_fit).into(),
        wobble: (&r.wobble).into(),
        dewiggled_fit: (&r.dewiggled_fit).into(),
        corrected_a2_per_ang2: r.corrected.corrected.into(),
        iterations: r.iterations,
    })
}

fn load_polarity(ctx: &Context, configured: &Option<PathBuf>, fallback: &str, expected: Polarity) -> Result<PolarizationSeries> {
    let path = ctx.input(configured, fallback)?;
    let series = read_series(&path)?;
    let series = if series.polarity() == Polarity::Off { series.with_polarity(expected) } else { series };
    if series.polarity() != expected {
        return Err(Error::input(path, "series polarity does not match its role"));
    }
    window_series(&series, ctx.config.run.analysis.window_ang)
}

fn fit(ctx: &Context) -> Result<Vec<PathBuf>> {
    let inputs = &ctx.config.run.inputs;
    let options = ctx.config.run.analysis.reduction();
    let mut written = Vec::new();
    let mut reductions = Vec::new();
    for (configured, fallback, polarity) in [
        (&inputs.plus, "plus.csv", Polarity::Positive),
        (&inputs.minus, "minus.csv", Polarity::Negative),
    ] {
        if configured.is_none() && !ctx.path(fallback).is_file() {
            continue;
        }
        let series = load_polarity(ctx, configured, fallback, polarity)?;
        let r = reduce_polarity(&series, &options)?;
        reductions.push(emit_reduction(ctx, &series, &r, polarity, &mut written)?);
    }
    if reductions.is_empty() {
        return Err(Error::Config("fit needs at least one polarity dataset".into()));
    }
    #[derive(Serialize)]
    struct Summary {
        reductions: Vec<ReductionJson>,
    }
    ctx.summary("fit", &Summary { reductions }, &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct AggregateRow {
    lambda_ang: f64,
    value: f64,
    variance: f64,
    quadratic_fit: f64,
    theory_fit: f64,
}

fn report(ctx: &Context) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config.instrument;
    let analysis = &ctx.config.run.analysis;
    let options = ReportOptions {
        reference: analysis.sensitivity_reference.into(),
        series_a2: None,
    };
    let mut written = Vec::new();
    let report = if let Some(table_path) = &ctx.config.run.inputs.table {
        let text = std::fs::read(table_path).map_err(|e| Error::input(table_path, e))?;
        let table: TableInput = serde_json::from_slice(&text).map_err(|e| Error::input(table_path, e))?;
        table_report(&table, cfg, &options)?
    } else {
        let inputs = &ctx.config.run.inputs;
        let plus = load_polarity(ctx, &inputs.plus, "plus.csv", Polarity::Positive)?;
        let minus = load_polarity(ctx, &inputs.minus, "minus.csv", Polarity::Negative)?;
        let pair = reduce_pair(&plus, &minus, &analysis.reduction())?;
        emit_reduction(ctx, &plus, &pair.plus, Polarity::Positive, &mut written)?;
        emit_reduction(ctx, &minus, &pair.minus, Polarity::Negative, &mut written)?;

        let aggregate = aggregate_series(
            &subtract_oscillation(&plus, &pair.plus.wobble)?,
            &subtract_oscillation(&minus, &pair.minus.wobble)?,
        )?;
        let agg_fit = weighted_quadratic_fit(&aggregate)?;
        let theory = theory_curve(&aggregate, predict_a2(cfg)?)?;
        let rows: Vec<AggregateRow> = aggregate
            .rows()
            .iter()
            .map(|r| AggregateRow {
                lambda_ang: r.lambda_ang,
                value: r.value,
                variance: r.variance,
                quadratic_fit: agg_fit.evaluate(r.lambda_ang),
                theory_fit: theory(r.lambda_ang),
            })
            .collect();
        ctx.csv("aggregate.csv", &rows, &mut written)?;
        let options = ReportOptions {
            series_a2: Some(Estimate::new(agg_fit.a2(), agg_fit.a2_error())),
            ..options
        };
        polarity_report(pair.plus.corrected, pair.minus.corrected, cfg, &options)?
    };
    let json = AnalysisReportJson::new(&report, cfg)?;
    #[derive(Serialize)]
    struct Body {
        instrument: InstrumentJson,
        #[serde(flatten)]
        report: AnalysisReportJson,
    }
    ctx.summary("report", &Body { instrument: cfg.into(), report: json }, &mut written)?;
    Ok(written)
}

/// `ε + a1 λ + a2_th λ²` with `ε`, `a1` fitted and `a2` held at the prediction.
fn theory_curve(series: &PolarizationSeries, a2: f64) -> Result<impl Fn(f64) -> f64> {
    let rows = series.rows();
    let design = Design::from_fn(rows.len(), 2, |i, j| if j == 0 { 1.0 } else { rows[i].lambda_ang });
    let y: Vec<f64> = rows.iter().map(|r| r.value - a2 * r.lambda_ang * r.lambda_ang).collect();
    let w: Vec<f64> = rows.iter().map(|r| 1.0 / r.variance).collect();
    let ls = weighted_least_squares(&design, &y, &w).map_err(sagnac_core::analysis::AnalysisError::from)?;
    let (e, a1) = (ls.coefficients[0], ls.coefficients[1]);
    Ok(move |l: f64| e + a1 * l + a2 * l * l)
}

/// Convenience for callers that already hold a path.
pub fn load(config: Option<&Path>) -> Result<LoadedConfig> {
    LoadedConfig::load(config)
}
