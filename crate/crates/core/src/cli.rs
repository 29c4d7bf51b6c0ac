//! Command-line front end. Each subcommand buffers its report files in memory
//! and writes them only once everything succeeded, so a failed run leaves no
//! partial outputs behind.
//!
//! Seeds: every neural fit starts from `--seed`; monitor origins use
//! `seed + T` and wavelet components `seed + component_index`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adjust::{adjust_with_weights, weights_from_residuals, AdjustmentInput, WeightMode};
use crate::epi::{
    default_growth_window, fit_growth_rate, r0_from_growth, sir_fit, GenerationInterval,
    DEFAULT_GROWTH_DAYS,
};
use crate::error::{Error, Result};
use crate::evaluate::{monitor, shelf_life, DEFAULT_WINDOW};
use crate::forecasters::Forecaster;
use crate::models::{FittedModel, ModelSpec};
use crate::neural::TdnnConfig;
use crate::plot::line_chart;
use crate::series::{parse_panel_csv, parse_series_csv, UnivariateSeries};

#[derive(Debug, Parser)]
#[command(name = "epicast", version, about = "Hybrid Holt + wavelet neural forecasting for daily counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and forecast `--horizon` days ahead.
    Forecast(ForecastArgs),
    /// Forecast every column of a panel and make the states sum to the nation.
    Adjust(AdjustArgs),
    /// Rolling-origin comparison of several models.
    Monitor(MonitorArgs),
    /// How long a model trained once stays under an APE threshold.
    Shelflife(ShelfLifeArgs),
    /// Basic reproduction number from growth rate and SIR fit.
    R0(R0Args),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TdnnArgs {
    /// Autoregressive lags per network.
    #[arg(long, default_value_t = 4)]
    pub lags: usize,
    /// Hidden units; defaults to ceil((lags + 1) / 2).
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Random restarts averaged per network.
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
}

impl TdnnArgs {
    pub fn config(&self, seed: u64) -> Result<TdnnConfig> {
        let cfg = TdnnConfig {
            lags: self.lags,
            hidden: self.hidden.unwrap_or((self.lags + 1).div_ceil(2)),
            repeats: self.repeats,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One of holt, holt-wbann, arima, arima-wbf, arima(p,d,q).
    #[arg(long, default_value = "holt-wbann")]
    pub model: ModelSpec,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    #[command(flatten)]
    pub tdnn: TdnnArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AdjustArgs {
    /// Panel CSV: `date,<national>,<state>...`.
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "holt-wbann")]
    pub model: ModelSpec,
    /// last, window(k) or ewma(lambda).
    #[arg(long, default_value = "last")]
    pub weight_mode: WeightMode,
    #[command(flatten)]
    pub tdnn: TdnnArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MonitorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Repeat to compare several models; defaults to all registered models.
    #[arg(long = "model")]
    pub models: Vec<ModelSpec>,
    /// Moving-window width k.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Also write monitor.svg.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub tdnn: TdnnArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ShelfLifeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "holt-wbann")]
    pub model: ModelSpec,
    /// Training length m.
    #[arg(long, default_value_t = 122)]
    pub train_len: usize,
    /// Days scored after training.
    #[arg(long, default_value_t = 150)]
    pub test_len: usize,
    /// APE threshold in percent.
    #[arg(long, default_value_t = 5.0)]
    pub threshold: f64,
    #[command(flatten)]
    pub tdnn: TdnnArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum R0Method {
    Growth,
    Sir,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct R0Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = R0Method::Both)]
    pub method: R0Method,
    /// Generation interval mean.
    #[arg(long, default_value_t = 0.1)]
    pub gi_mean: f64,
    /// Generation interval shape.
    #[arg(long, default_value_t = 10.0)]
    pub gi_shape: f64,
    /// Days of the growth window, starting at the first positive count.
    #[arg(long, default_value_t = DEFAULT_GROWTH_DAYS)]
    pub growth_days: usize,
    /// SIR population; defaults to twice the cumulative count.
    #[arg(long)]
    pub population: Option<f64>,
}

/// Report files collected in memory, written together by [`Outputs::commit`].
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    /// Writes every file into `dir`; on failure removes the ones already written.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                return Err(e.into());
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs a parsed command and writes its reports; returns the written paths.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (outputs, out) = match &cli.command {
        Command::Forecast(a) => (cmd_forecast(a)?, &a.common.out),
        Command::Adjust(a) => (cmd_adjust(a)?, &a.common.out),
        Command::Monitor(a) => (cmd_monitor(a)?, &a.common.out),
        Command::Shelflife(a) => (cmd_shelflife(a)?, &a.common.out),
        Command::R0(a) => (cmd_r0(a)?, &a.common.out),
    };
    outputs.commit(out)
}

struct CsvBuf(csv::Writer<Vec<u8>>);

impl CsvBuf {
    fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Self(w))
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(fields)?;
        Ok(())
    }

    fn finish(self) -> Result<Vec<u8>> {
        self.0
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn cmd_forecast(args: &ForecastArgs) -> Result<Outputs> {
    if args.horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let series = parse_series_csv(&args.common.input)?;
    let cfg = args.tdnn.config(args.common.seed)?;
    log::info!("fitting {} on {} ({} points)", args.model, series.name(), series.len());
    let model = args.model.fit(series.values(), &cfg)?;
    forecast_outputs(&series, &model, args.horizon)
}

/// `forecast.csv` and `fitted.csv` for an already fitted model.
pub fn forecast_outputs(series: &UnivariateSeries, model: &FittedModel, h: usize) -> Result<Outputs> {
    let n = series.len();
    let mut fc = CsvBuf::new(&["date", "point_forecast", "clamped_forecast"])?;
    for (i, v) in model.forecast(h).into_iter().enumerate() {
        fc.row([series.date(n + i).to_string(), num(v), num(v.max(0.0))])?;
    }
    let mut fitted = CsvBuf::new(&["date", "observed", "fitted"])?;
    for (t, y) in series.values().iter().enumerate() {
        fitted.row([series.date(t).to_string(), num(*y), opt(model.fitted().get(t))])?;
    }
    let mut out = Outputs::default();
    out.add("forecast.csv", fc.finish()?);
    out.add("fitted.csv", fitted.finish()?);
    Ok(out)
}

struct SeriesFit {
    forecast: f64,
    last_observed: f64,
    last_fitted: f64,
    residuals: Vec<f64>,
}

/// Days from a state's first nonzero report needed before it joins the adjustment.
pub const MIN_REPORTED_DAYS: usize = crate::hybrid::MIN_LEN;

fn fit_for_adjust(series: &UnivariateSeries, spec: ModelSpec, cfg: &TdnnConfig) -> Result<SeriesFit> {
    let first = series.values().iter().position(|&v| v != 0.0).unwrap_or(series.len());
    let reported = series.len() - first;
    if reported < MIN_REPORTED_DAYS {
        return Err(Error::InsufficientData {
            needed: MIN_REPORTED_DAYS,
            got: reported,
        });
    }
    let model = spec.fit(series.values(), cfg)?;
    let last = series.len() - 1;
    let last_fitted = model.fitted().get(last).ok_or_else(|| {
        Error::Structure(format!("{} has no fitted value at the last date", series.name()))
    })?;
    Ok(SeriesFit {
        forecast: model.forecast(1)[0],
        last_observed: series.values()[last],
        last_fitted,
        residuals: model.residuals().values.clone(),
    })
}

pub fn cmd_adjust(args: &AdjustArgs) -> Result<Outputs> {
    let panel = parse_panel_csv(&args.common.input)?;
    let cfg = args.tdnn.config(args.common.seed)?;
    let national = panel.national();
    let nat = fit_for_adjust(national, args.model, &cfg).map_err(|e| e.in_phase("national fit"))?;

    let mut kept = Vec::new();
    let mut excluded = CsvBuf::new(&["state", "reason"])?;
    for state in panel.states() {
        match fit_for_adjust(state, args.model, &cfg) {
            Ok(fit) => kept.push((state.name(), fit)),
            Err(e) => {
                log::warn!("excluding {}: {e}", state.name());
                excluded.row([state.name().to_string(), e.to_string()])?;
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::Domain("every state failed to fit; nothing to adjust".into()));
    }

    let input = AdjustmentInput {
        state_forecasts: kept.iter().map(|(_, f)| f.forecast).collect(),
        national_forecast: nat.forecast,
        last_observed_states: kept.iter().map(|(_, f)| f.last_observed).collect(),
        last_fitted_states: kept.iter().map(|(_, f)| f.last_fitted).collect(),
        last_observed_national: nat.last_observed,
        last_fitted_national: nat.last_fitted,
    };
    let histories: Vec<Vec<f64>> = kept.iter().map(|(_, f)| f.residuals.clone()).collect();
    let weights = weights_from_residuals(&histories, args.weight_mode);
    let result = adjust_with_weights(&input, weights)?;

    let mut report = CsvBuf::new(&["state", "unadjusted", "weight", "correction", "adjusted"])?;
    report.row([
        national.name().to_string(),
        num(input.national_forecast),
        String::new(),
        num(result.corrected_national_forecast - input.national_forecast),
        num(result.corrected_national_forecast),
    ])?;
    for (i, (name, fit)) in kept.iter().enumerate() {
        let adjusted = result.corrected_state_forecasts[i];
        report.row([
            name.to_string(),
            num(fit.forecast),
            num(result.weights[i]),
            num(adjusted - fit.forecast),
            num(adjusted),
        ])?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "date: {}", national.date(national.len()));
    let _ = writeln!(summary, "model: {}", args.model);
    let _ = writeln!(summary, "weight_mode: {}", args.weight_mode);
    let _ = writeln!(summary, "branch: {}", result.branch);
    let _ = writeln!(summary, "discrepancy: {}", result.discrepancy);
    let _ = writeln!(summary, "national_error: {}", input.national_error());
    let _ = writeln!(summary, "states_error: {}", input.states_error());
    let _ = writeln!(summary, "states_used: {}", kept.len());
    let _ = writeln!(summary, "states_excluded: {}", panel.n() - kept.len());

    let mut out = Outputs::default();
    out.add("adjust.csv", report.finish()?);
    out.add("adjust.txt", summary);
    out.add("excluded.csv", excluded.finish()?);
    Ok(out)
}

pub fn cmd_monitor(args: &MonitorArgs) -> Result<Outputs> {
    let series = parse_series_csv(&args.common.input)?;
    let cfg = args.tdnn.config(args.common.seed)?;
    let models = if args.models.is_empty() {
        ModelSpec::REGISTERED.to_vec()
    } else {
        args.models.clone()
    };
    log::info!(
        "monitoring {} models over {} points, k={}",
        models.len(),
        series.len(),
        args.window
    );
    let report = monitor(&series, &models, args.window, &cfg)?;

    let mut records = CsvBuf::new(&["origin", "model", "rmse", "mae", "m"])?;
    for r in &report.records {
        records.row([r.origin.to_string(), r.model.to_string(), num(r.rmse), num(r.mae), num(r.m)])?;
    }
    let mut dominance = CsvBuf::new(&["model", "dominance_pct", "recency_weighted_pct"])?;
    for (i, m) in models.iter().enumerate() {
        dominance.row([m.to_string(), num(report.dominance[i]), num(report.recency_weighted[i])])?;
    }
    let mut header = vec!["date".to_string(), "origin".to_string()];
    header.extend(models.iter().map(|m| m.to_string()));
    header.push("winner".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut timeline = CsvBuf::new(&header)?;
    for (o, (&origin, date)) in report.origins.iter().zip(&report.origin_dates).enumerate() {
        let mut row = vec![date.to_string(), origin.to_string()];
        row.extend((0..models.len()).map(|j| num(report.record(o, j).m)));
        row.push(models[report.psi[o]].to_string());
        timeline.row(row)?;
    }

    let mut out = Outputs::default();
    out.add("monitor.csv", records.finish()?);
    out.add("dominance.csv", dominance.finish()?);
    out.add("timeline.csv", timeline.finish()?);
    if args.svg {
        let x: Vec<f64> = report.origins.iter().map(|&o| o as f64).collect();
        let names: Vec<String> = models.iter().map(|m| m.to_string()).collect();
        let ys: Vec<Vec<f64>> = (0..models.len())
            .map(|j| (0..report.origins.len()).map(|o| report.record(o, j).m).collect())
            .collect();
        let lines: Vec<(&str, &[f64])> = names
            .iter()
            .zip(&ys)
            .map(|(n, y)| (n.as_str(), y.as_slice()))
            .collect();
        out.add(
            "monitor.svg",
            line_chart(&format!("{}: moving-window metric m", series.name()), &x, &lines),
        );
    }
    Ok(out)
}

pub fn cmd_shelflife(args: &ShelfLifeArgs) -> Result<Outputs> {
    let series = parse_series_csv(&args.common.input)?;
    let cfg = args.tdnn.config(args.common.seed)?;
    let end = args.train_len + args.test_len;
    if args.train_len == 0 || args.test_len == 0 || end > series.len() {
        return Err(Error::SplitBounds {
            train: args.train_len,
            test: args.test_len,
            len: series.len(),
        });
    }
    let window = series.slice(0..end);
    let res = shelf_life(&window, args.train_len, args.model, args.threshold, &cfg)?;

    let mut ape = CsvBuf::new(&["t", "ape", "fitted_line"])?;
    for &(t, a) in &res.ape_series {
        ape.row([num(t), num(a), num(res.fitted_line(t))])?;
    }
    let mut txt = String::new();
    let _ = writeln!(txt, "model: {}", args.model);
    let _ = writeln!(txt, "train_len: {}", res.train_len);
    let _ = writeln!(txt, "test_len: {}", args.test_len);
    let _ = writeln!(txt, "threshold_pct: {}", res.threshold_pct);
    let _ = writeln!(txt, "slope: {}", res.slope);
    let _ = writeln!(txt, "intercept: {}", res.intercept);
    if res.unbounded {
        let _ = writeln!(txt, "crossing_t: unbounded");
        let _ = writeln!(txt, "shelf_days: unbounded");
    } else {
        let _ = writeln!(txt, "crossing_t: {:.3}", res.crossing_t);
        let _ = writeln!(txt, "shelf_days: {:.1}", res.shelf_days);
    }

    let mut out = Outputs::default();
    out.add("ape.csv", ape.finish()?);
    out.add("shelflife.txt", txt);
    Ok(out)
}

pub fn cmd_r0(args: &R0Args) -> Result<Outputs> {
    let series = parse_series_csv(&args.common.input)?;
    let mut rows = CsvBuf::new(&["location", "method", "r0", "ci_lower", "ci_upper", "mse"])?;
    if matches!(args.method, R0Method::Growth | R0Method::Both) {
        let gi = GenerationInterval::new(args.gi_mean, args.gi_shape)?;
        let start = default_growth_window(&series)?.start;
        let window = start..(start + args.growth_days).min(series.len());
        let est = r0_from_growth(&fit_growth_rate(&series, window)?, gi)?;
        rows.row([
            series.name().to_string(),
            "growth".into(),
            num(est.r0),
            num(est.ci_lower),
            num(est.ci_upper),
            num(est.fit_mse),
        ])?;
    }
    if matches!(args.method, R0Method::Sir | R0Method::Both) {
        let total: f64 = series.values().iter().sum();
        let population = args.population.unwrap_or(2.0 * total);
        match sir_fit(&series, population) {
            Ok(fit) => rows.row([
                series.name().to_string(),
                "sir".into(),
                num(fit.r0_sir),
                String::new(),
                String::new(),
                num(fit.trajectory_mse),
            ])?,
            Err(e) if args.method == R0Method::Both => log::warn!("SIR fit skipped: {e}"),
            Err(e) => return Err(e),
        }
    }
    let mut out = Outputs::default();
    out.add("r0.csv", rows.finish()?);
    Ok(out)
}
