//! The `pm25` command line: argument grammar, study drivers and output
//! writing.
//!
//! Exit codes: 0 success, 1 misuse or invalid input, 2 data insufficiency.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    self, cluster_study, corr_density_pm25, corr_pm25_deaths, death_rate_summary, density_matrix, forecast_study,
    pm_death_matrix, reference_comparison, regional_trends, CorrelationLevel, ForecastStudy, PmWindow, StudyReport,
    REFERENCE_METRICS,
};
use crate::arima::ArimaOrder;
use crate::chart::{render_chart, ChartKind, ChartSpec, Series};
use crate::cluster::DEFAULT_K_MAX;
use crate::data::{
    embedded_paper_dataset, load_dataset, write_dataset, Dataset, FillPolicy, RegionId, FIRST_YEAR, FORECAST_YEAR,
    LAST_DEATH_YEAR, LAST_OBSERVED_YEAR,
};
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "pm25", version, about = "PM2.5 air-quality analytics for Asian countries")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Country CSV to analyse.
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Use the built-in dataset of published values.
    #[arg(long, global = true)]
    embedded: bool,
    /// Output directory; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "pm25-out")]
    out: PathBuf,
    /// Missing-value policy: zero or exclude.
    #[arg(long, global = true, value_name = "POLICY", default_value = "exclude")]
    fill_policy: FillPolicy,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrStudy {
    Density,
    Deaths,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    k_max: usize,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    /// Last training year (training starts in 2018).
    #[arg(long)]
    train_end: Option<i32>,
    #[arg(long)]
    test_year: Option<i32>,
    /// Fixed order `p,d,q[,drift]` instead of AICc selection.
    #[arg(long, value_name = "P,D,Q[,drift]")]
    order: Option<ArimaOrder>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regional and per-country PM2.5 trends, 2018-2023.
    Trends,
    /// Regional and South Asian death rates, 2018-2021.
    Deaths,
    /// Pearson correlation studies.
    Correlate {
        #[arg(long, value_enum, default_value_t = CorrStudy::Density)]
        study: CorrStudy,
        /// Pairing unit for the death-rate study: country or region.
        #[arg(long, default_value = "country")]
        level: CorrelationLevel,
    },
    /// K-means clustering of 2023 PM2.5 with an elbow curve.
    Cluster(ClusterArgs),
    /// Per-country ARIMA forecasts (default: train to 2023, forecast 2024).
    Forecast(ForecastArgs),
    /// Held-out accuracy against published metrics (default: train to 2022, test 2023).
    Evaluate(ForecastArgs),
    /// Run every study into per-study subdirectories.
    Report {
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long, default_value = "country")]
        level: CorrelationLevel,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Trends => "trends",
            Command::Deaths => "deaths",
            Command::Correlate { .. } => "correlate",
            Command::Cluster(_) => "cluster",
            Command::Forecast(_) => "forecast",
            Command::Evaluate(_) => "evaluate",
            Command::Report { .. } => "report",
        }
    }
}

/// A finished study: its report, figures and one-line summary.
struct StudyOutput {
    report: StudyReport,
    charts: Vec<(String, ChartSpec)>,
    summary: String,
    /// Extra lines printed after the summary.
    details: Vec<String>,
}

/// Writes files under the output root and remembers their digests.
struct OutputDir {
    root: PathBuf,
    format: Format,
    files: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputDir {
    fn create(root: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            format,
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        log::debug!("wrote {}", path.display());
        self.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn write_study(&mut self, dir: &str, study: &StudyOutput) -> Result<()> {
        let rel = |name: &str| {
            if dir.is_empty() {
                name.to_string()
            } else {
                format!("{dir}/{name}")
            }
        };
        if self.format.json() {
            self.write(&rel("report.json"), study.report.to_json()?.as_bytes())?;
        }
        if self.format.csv() {
            for t in &study.report.tables {
                let mut buf = Vec::new();
                t.write_csv(&mut buf)?;
                self.write(&rel(&format!("{}.csv", t.name)), &buf)?;
            }
        }
        for (name, spec) in &study.charts {
            self.write(&rel(&format!("{name}.svg")), render_chart(spec)?.as_bytes())?;
        }
        Ok(())
    }
}

fn load(global: &GlobalArgs) -> Result<Dataset> {
    match (&global.input, global.embedded) {
        (Some(_), true) => Err(Error::Argument("--input and --embedded are mutually exclusive".into())),
        (None, false) => Err(Error::Argument("one of --input PATH or --embedded is required".into())),
        (None, true) => embedded_paper_dataset().with_fill_policy(global.fill_policy),
        (Some(path), false) => {
            let file = fs::File::open(path)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            load_dataset(file, global.fill_policy, &path.display().to_string())
        }
    }
}

fn dataset_digest(ds: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf)?;
    Ok(sha256_hex(&buf))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn slug(text: &str) -> String {
    text.to_ascii_lowercase().replace(' ', "_")
}

fn run_trends(ds: &Dataset) -> Result<StudyOutput> {
    let report = analysis::trends_report(ds)?;
    // Charts always plot observed values so a zero fill never shows up as data.
    let observed = analysis::RegionalTrendTable::build(ds, FIRST_YEAR, LAST_OBSERVED_YEAR, |r, y| r.observed_pm25(y));
    let mut regional = ChartSpec::new(ChartKind::Line, "Regional PM2.5 trends", "Year", "Mean PM2.5 (µg/m³)");
    for region in RegionId::ALL {
        if observed.cells.contains_key(&region) {
            let values: Vec<Option<f64>> = (FIRST_YEAR..=LAST_OBSERVED_YEAR)
                .map(|y| observed.mean(region, y))
                .collect();
            regional.series.push(Series::yearly(region.name(), FIRST_YEAR, &values));
        }
    }
    let mut charts = vec![("regional_trends".to_string(), regional)];
    for region in RegionId::ALL {
        let mut spec = ChartSpec::new(
            ChartKind::Line,
            format!("PM2.5 trends in {}", region.name()),
            "Year",
            "PM2.5 (µg/m³)",
        );
        for r in ds.in_region(region) {
            let values: Vec<Option<f64>> = (FIRST_YEAR..=LAST_OBSERVED_YEAR).map(|y| r.observed_pm25(y)).collect();
            if values.iter().any(Option::is_some) {
                spec.series
                    .push(Series::yearly(r.country.as_str(), FIRST_YEAR, &values));
            }
        }
        if !spec.series.is_empty() {
            charts.push((format!("trends_{}", slug(region.name())), spec));
        }
    }
    let table = regional_trends(ds)?;
    let top = RegionId::ALL
        .iter()
        .filter_map(|r| table.mean(*r, LAST_OBSERVED_YEAR).map(|m| (*r, m)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let summary = format!(
        "trends: {} countries included, {} excluded; highest {LAST_OBSERVED_YEAR} regional mean {}",
        report.included.len(),
        report.exclusions.len(),
        top.map_or_else(|| "n/a".into(), |(r, m)| format!("{} ({m:.4})", r.name()))
    );
    Ok(StudyOutput {
        report,
        charts,
        summary,
        details: Vec::new(),
    })
}

fn run_deaths(ds: &Dataset) -> Result<StudyOutput> {
    let report = analysis::deaths_report(ds)?;
    let summary_data = death_rate_summary(ds)?;
    let mut regional = ChartSpec::new(ChartKind::Line, "Regional death rates", "Year", "Mean death rate");
    for (region, row) in &summary_data.regional.cells {
        let values: Vec<Option<f64>> = (FIRST_YEAR..=LAST_DEATH_YEAR)
            .map(|y| row.get(&y).map(|c| c.mean))
            .collect();
        regional.series.push(Series::yearly(region.name(), FIRST_YEAR, &values));
    }
    let mut charts = vec![("regional_death_rates".to_string(), regional)];
    let mut south = ChartSpec::new(ChartKind::Line, "Death rates in South Asia", "Year", "Death rate");
    for (country, rates) in &summary_data.south_asia {
        south.series.push(Series::yearly(country.as_str(), FIRST_YEAR, rates));
    }
    if !south.series.is_empty() {
        charts.push(("south_asia_death_rates".to_string(), south));
    }
    let summary = format!(
        "deaths: {} countries with death rates, {} excluded",
        report.included.len(),
        report.exclusions.len()
    );
    Ok(StudyOutput {
        report,
        charts,
        summary,
        details: Vec::new(),
    })
}

fn run_density(ds: &Dataset) -> Result<StudyOutput> {
    let report = analysis::density_report(ds)?;
    let study = corr_density_pm25(ds)?;
    let mut scatter = ChartSpec::new(
        ChartKind::Scatter,
        "Population density vs PM2.5 (2023)",
        "Population density (per km²)",
        "PM2.5 (µg/m³)",
    );
    for region in RegionId::ALL {
        let points: Vec<(f64, Option<f64>)> = study
            .pairs
            .iter()
            .filter(|p| p.region == region)
            .map(|p| (p.density, Some(p.pm25)))
            .collect();
        if !points.is_empty() {
            scatter.series.push(Series::new(region.name(), points));
        }
    }
    let m = density_matrix(&study)?;
    let heat = ChartSpec::heatmap("Correlation of PM2.5 and population density", &m.labels, &m.values);
    let summary = format!(
        "correlate-density: r = {:.4} over {} countries",
        study.r,
        study.pairs.len()
    );
    Ok(StudyOutput {
        report,
        charts: vec![
            ("density_scatter".into(), scatter),
            ("density_correlation".into(), heat),
        ],
        summary,
        details: Vec::new(),
    })
}

fn run_death_correlation(ds: &Dataset, level: CorrelationLevel) -> Result<StudyOutput> {
    let report = analysis::deaths_correlation_report(ds, level)?;
    let full = corr_pm25_deaths(ds, PmWindow::Full, level)?;
    let early = corr_pm25_deaths(ds, PmWindow::DeathYears, level)?;
    let scatter = ChartSpec::new(
        ChartKind::Scatter,
        "Mean PM2.5 vs mean death rate",
        "Mean PM2.5 (µg/m³)",
        "Mean death rate 2018-2021",
    )
    .with_series(Series::new(
        format!("PM2.5 {}", PmWindow::Full),
        full.pairs.iter().map(|p| (p.pm25_mean, Some(p.death_mean))).collect(),
    ))
    .with_series(Series::new(
        format!("PM2.5 {}", PmWindow::DeathYears),
        early.pairs.iter().map(|p| (p.pm25_mean, Some(p.death_mean))).collect(),
    ));
    let mut charts = vec![("pm25_deaths_scatter".to_string(), scatter)];
    if let Ok(m) = pm_death_matrix(ds) {
        charts.push((
            "pm25_deaths_correlation".to_string(),
            ChartSpec::heatmap("Correlation of PM2.5 and death rates", &m.labels, &m.values),
        ));
    }
    let summary = format!(
        "correlate-deaths: r = {:.4} (PM2.5 {}), r = {:.4} (PM2.5 {}) over {} {}",
        full.r,
        PmWindow::Full,
        early.r,
        PmWindow::DeathYears,
        full.pairs.len(),
        match level {
            CorrelationLevel::Country => "countries",
            CorrelationLevel::Region => "regions",
        }
    );
    Ok(StudyOutput {
        report,
        charts,
        summary,
        details: Vec::new(),
    })
}

fn run_cluster(ds: &Dataset, args: &ClusterArgs, seed: u64) -> Result<StudyOutput> {
    let study = cluster_study(ds, args.k, args.k_max, seed)?;
    let report = study.report(ds);
    let elbow = ChartSpec::new(ChartKind::Elbow, "Elbow method", "Number of clusters k", "WCSS")
        .with_series(Series::new(
            "WCSS",
            study.elbow.points.iter().map(|(k, w)| (*k as f64, Some(*w))).collect(),
        ))
        .with_marker(study.elbow.knee as f64);

    let mut ranked: Vec<&(String, f64)> = study.points.iter().collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut clusters = ChartSpec::new(
        ChartKind::Scatter,
        format!("K-means clusters of {LAST_OBSERVED_YEAR} PM2.5 (k = {})", study.k),
        "Country rank by PM2.5",
        "PM2.5 (µg/m³)",
    );
    for c in study.cluster_order() {
        let label = match &study.model.labels {
            Some(l) => l[c].name().to_string(),
            None => format!("Cluster {c}"),
        };
        let points = ranked
            .iter()
            .enumerate()
            .filter(|(_, (id, _))| study.model.assignments[id] == c)
            .map(|(i, (_, v))| ((i + 1) as f64, Some(*v)))
            .collect();
        clusters.series.push(Series::new(label, points));
    }
    let centers: Vec<String> = study
        .cluster_order()
        .iter()
        .map(|&c| format!("{:.2}", study.model.raw_centers[c]))
        .collect();
    let summary = format!(
        "cluster: k = {} over {} countries, centers [{}], knee k = {}, wcss {:.4}",
        study.k,
        study.points.len(),
        centers.join(", "),
        study.elbow.knee,
        study.model.wcss
    );
    Ok(StudyOutput {
        report,
        charts: vec![("elbow".into(), elbow), ("clusters".into(), clusters)],
        summary,
        details: Vec::new(),
    })
}

fn forecast_chart(study: &ForecastStudy) -> ChartSpec {
    let title = format!(
        "ARIMA forecasts for {} (trained {}-{})",
        study.test_year, study.train_start, study.train_end
    );
    let mut spec = ChartSpec::new(ChartKind::Bar, title, "Country", "PM2.5 (µg/m³)")
        .with_categories(study.rows.iter().map(|r| r.country.clone()));
    let idx = |i: usize| i as f64;
    if study.metrics.is_some() {
        spec.series.push(Series::new(
            "Actual",
            study.rows.iter().enumerate().map(|(i, r)| (idx(i), r.actual)).collect(),
        ));
    } else {
        spec.series.push(Series::new(
            format!("Observed {}", study.train_end),
            study
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| (idx(i), r.train.last().copied()))
                .collect(),
        ));
    }
    spec.series.push(Series::new(
        "Forecast",
        study
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (idx(i), Some(r.prediction)))
            .collect(),
    ));
    spec
}

fn run_forecast(ds: &Dataset, args: &ForecastArgs, evaluate: bool) -> Result<StudyOutput> {
    let (train_end, test_year) = if evaluate {
        (
            args.train_end.unwrap_or(LAST_OBSERVED_YEAR - 1),
            args.test_year.unwrap_or(LAST_OBSERVED_YEAR),
        )
    } else {
        (
            args.train_end.unwrap_or(LAST_OBSERVED_YEAR),
            args.test_year.unwrap_or(FORECAST_YEAR),
        )
    };
    if evaluate && test_year > LAST_OBSERVED_YEAR {
        return Err(Error::Argument(format!(
            "evaluate needs an observed test year (at most {LAST_OBSERVED_YEAR}), got {test_year}"
        )));
    }
    let name = if evaluate { "evaluate" } else { "forecast" };
    let study = forecast_study(ds, train_end, test_year, args.order)?;
    let mut report = study.report(ds, name);
    let mut details = Vec::new();
    if evaluate {
        if let Some(m) = &study.metrics {
            let table = reference_comparison(m);
            for (name, reference) in REFERENCE_METRICS {
                let value = match name {
                    "mae" => Some(m.mae),
                    "mse" => Some(m.mse),
                    "rmse" => Some(m.rmse),
                    _ => m.r_squared,
                };
                let deviation = value.map(|v| (v - reference) / reference * 100.0);
                details.push(format!(
                    "  {name:<9} {:>10}  reference {reference:>6.2}  deviation {}",
                    fmt_opt(value),
                    deviation.map_or_else(|| "n/a".to_string(), |d| format!("{d:+.1}%"))
                ));
            }
            report.tables.push(table);
            report.notes.push(
                "Reference metrics come from a different country set and model order; the deviation is descriptive, not a pass/fail threshold."
                    .into(),
            );
        }
    }
    let metrics = match &study.metrics {
        Some(m) => format!(
            "MAE {:.4}, MSE {:.4}, RMSE {:.4}, R² {}",
            m.mae,
            m.mse,
            m.rmse,
            fmt_opt(m.r_squared)
        ),
        None => "no actuals to score".into(),
    };
    let summary = format!(
        "{name}: {} countries forecast for {test_year} from {}-{train_end}, {} excluded; {metrics}",
        study.rows.len(),
        study.train_start,
        study.exclusions.len()
    );
    Ok(StudyOutput {
        report,
        charts: vec![("forecast".into(), forecast_chart(&study))],
        summary,
        details,
    })
}

#[derive(Serialize)]
struct StudyStatus {
    study: &'static str,
    directory: &'static str,
    status: &'static str,
    summary: Option<String>,
    reason: Option<String>,
}

struct Context<'a> {
    global: &'a GlobalArgs,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

fn execute(cmd: &Command, ctx: &mut Context<'_>) -> Result<()> {
    let global = ctx.global;
    let ds = load(global)?;
    let mut out = OutputDir::create(&global.out, global.format)?;
    let mut params: BTreeMap<&str, Value> = BTreeMap::new();
    params.insert("fill_policy", json!(global.fill_policy.name()));
    params.insert("format", json!(global.format));
    params.insert("seed", json!(global.seed));
    params.insert(
        "input",
        match &global.input {
            Some(p) => json!(p.display().to_string()),
            None => json!("embedded"),
        },
    );

    let single = |out: &mut OutputDir, ctx: &mut Context<'_>, study: StudyOutput| -> Result<()> {
        out.write_study("", &study)?;
        writeln!(ctx.stdout, "{}", study.summary)?;
        for line in &study.details {
            writeln!(ctx.stdout, "{line}")?;
        }
        Ok(())
    };

    match cmd {
        Command::Trends => single(&mut out, ctx, run_trends(&ds)?)?,
        Command::Deaths => single(&mut out, ctx, run_deaths(&ds)?)?,
        Command::Correlate { study, level } => {
            params.insert("study", json!(format!("{study:?}").to_ascii_lowercase()));
            params.insert("level", json!(level));
            let s = match study {
                CorrStudy::Density => run_density(&ds)?,
                CorrStudy::Deaths => run_death_correlation(&ds, *level)?,
            };
            single(&mut out, ctx, s)?
        }
        Command::Cluster(args) => {
            params.insert("k", json!(args.k));
            params.insert("k_max", json!(args.k_max));
            single(&mut out, ctx, run_cluster(&ds, args, global.seed)?)?
        }
        Command::Forecast(args) | Command::Evaluate(args) => {
            let evaluate = matches!(cmd, Command::Evaluate(_));
            let s = run_forecast(&ds, args, evaluate)?;
            params.insert("train_end", s.report.parameters["train_end"].clone());
            params.insert("test_year", s.report.parameters["test_year"].clone());
            params.insert("order", s.report.parameters["order"].clone());
            single(&mut out, ctx, s)?
        }
        Command::Report { cluster, level } => {
            params.insert("k", json!(cluster.k));
            params.insert("k_max", json!(cluster.k_max));
            params.insert("level", json!(level));
            let no_args = ForecastArgs {
                train_end: None,
                test_year: None,
                order: None,
            };
            type Runner<'r> = Box<dyn Fn() -> Result<StudyOutput> + 'r>;
            let plan: Vec<(&'static str, &'static str, Runner<'_>)> = vec![
                ("trends", "trends", Box::new(|| run_trends(&ds))),
                ("deaths", "deaths", Box::new(|| run_deaths(&ds))),
                ("correlate-density", "correlate_density", Box::new(|| run_density(&ds))),
                (
                    "correlate-deaths",
                    "correlate_deaths",
                    Box::new(|| run_death_correlation(&ds, *level)),
                ),
                (
                    "cluster",
                    "cluster",
                    Box::new(|| run_cluster(&ds, cluster, global.seed)),
                ),
                ("evaluate", "evaluate", Box::new(|| run_forecast(&ds, &no_args, true))),
                ("forecast", "forecast", Box::new(|| run_forecast(&ds, &no_args, false))),
            ];
            let mut statuses = Vec::new();
            for (study, directory, run) in plan {
                match run() {
                    Ok(s) => {
                        out.write_study(directory, &s)?;
                        writeln!(ctx.stdout, "{}", s.summary)?;
                        for line in &s.details {
                            writeln!(ctx.stdout, "{line}")?;
                        }
                        statuses.push(StudyStatus {
                            study,
                            directory,
                            status: "ok",
                            summary: Some(s.summary),
                            reason: None,
                        });
                    }
                    Err(e) if e.is_data_insufficiency() => {
                        writeln!(ctx.stdout, "{study}: skipped ({e})")?;
                        statuses.push(StudyStatus {
                            study,
                            directory,
                            status: "skipped",
                            summary: None,
                            reason: Some(e.to_string()),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            let index = json!({
                "source": ds.source(),
                "fill_policy": ds.fill_policy().name(),
                "studies": statuses,
            });
            out.write("report.json", (serde_json::to_string_pretty(&index)? + "\n").as_bytes())?;
            write_manifest(&mut out, cmd, &params, &ds)?;
            if statuses.iter().all(|s| s.status != "ok") {
                return Err(Error::EmptyStudy("every study was skipped".into()));
            }
            return Ok(());
        }
    }
    write_manifest(&mut out, cmd, &params, &ds)
}

fn write_manifest(out: &mut OutputDir, cmd: &Command, params: &BTreeMap<&str, Value>, ds: &Dataset) -> Result<()> {
    let manifest = json!({
        "command": cmd.name(),
        "parameters": params,
        "dataset": {
            "source": ds.source(),
            "countries": ds.len(),
            "sha256": dataset_digest(ds)?,
        },
        "toolkit": { "name": "pm25", "version": VERSION },
        "files": out.files,
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    out.write("manifest.json", text.as_bytes())
}

/// Runs the CLI on `argv` (program name first), writing to the given
/// streams. Returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    let mut ctx = Context {
        global: &cli.global,
        stdout,
        stderr,
    };
    match execute(&cli.command, &mut ctx) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "pm25 {}: {e}", cli.command.name());
            if e.is_data_insufficiency() {
                2
            } else {
                1
            }
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run_with(argv, &mut stdout, &mut stderr)
}
