//! The `popsize` command line.
//!
//! Each subcommand computes a JSON-serialisable value first; tables and
//! CSV on stdout are formattings of that value. When `--output` is given,
//! files are written atomically together with a `manifest.json` that
//! `popsize replay` can re-run.

pub mod io;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{hex_digest, load_data, write_atomic, RunManifest};

use crate::classical::bootstrap::MIN_REPLICATES as MIN_BOOTSTRAP;
use crate::classical::{bootstrap_ci, EstimateResult, Method};
use crate::counts::{builtin_datasets, DatasetMeta, TrsCounts};
use crate::error::{Error, Result};
use crate::posterior::{histogram_svg, ir_rate, summarize_chain, ur_rate, ChainSummary, Histogram};
use crate::simulation::{run_replications, scenario_by_name, standard_scenarios, Estimator, Scenario};
use crate::thbm::{run_gibbs, GibbsConfig, InformativePrior, Prior};

#[derive(Parser, Debug)]
#[command(name = "popsize", version, about = "Population size estimation from three overlapping case lists")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in datasets.
    Datasets(DatasetsArgs),
    /// Fit the dependence-mixture model by Gibbs sampling.
    Fit(FitArgs),
    /// Run the classical estimators.
    Estimate(EstimateArgs),
    /// Run a simulation scenario.
    Simulate(SimulateArgs),
    /// Combine stratum fits into a surveillance report.
    Report(ReportArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PriorKind {
    Jeffreys,
    Informative,
}

#[derive(Args, Debug)]
pub struct DatasetsArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Sampler and prior flags shared by `fit` and `report`.
#[derive(Args, Debug, Clone, Default)]
pub struct GibbsArgs {
    #[arg(long, value_enum)]
    pub prior: Option<PriorKind>,
    /// Dirichlet weights beta1..beta5 (beta5 for the independent share).
    #[arg(long)]
    pub alpha_prior: Option<String>,
    /// Gamma shape,scale for the effect shapes: one pair or three pairs.
    #[arg(long)]
    pub delta_prior: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Defaults to 10% of the iterations.
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dependence weights to hold at zero, e.g. `3,4`.
    #[arg(long)]
    pub pin: Option<String>,
    /// JSON file with `gibbs` and `prior` objects; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Built-in dataset name or path to a counts file.
    #[arg(long)]
    pub data: String,
    #[command(flatten)]
    pub gibbs: GibbsArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Population at risk, for the incidence rate.
    #[arg(long)]
    pub inhabitants: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: String,
    #[arg(long, default_value = "sc,qsm,pqsm,llm,mtb,independent")]
    pub methods: String,
    /// Bootstrap replicates for intervals; 0 disables them.
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Named scenario such as `P3:delta5:N500` or `AR:uniform`.
    #[arg(long, conflicts_with = "scenario")]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Print the preset names and exit.
    #[arg(long)]
    pub list: bool,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated estimators, e.g. `thbm,sc,independent`.
    #[arg(long)]
    pub estimators: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// `summary.json` files written by `fit`, comma-separated.
    #[arg(long, conflicts_with = "data")]
    pub fits: Option<String>,
    /// Datasets to fit now, comma-separated.
    #[arg(long)]
    pub data: Option<String>,
    /// Pooled fit (`summary.json`) or dataset for the additivity check.
    #[arg(long)]
    pub pooled: Option<String>,
    /// Fail when a stratum has no inhabitant count.
    #[arg(long)]
    pub require_ir: bool,
    #[command(flatten)]
    pub gibbs: GibbsArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Config file accepted by `--config`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FitConfig {
    #[serde(default)]
    pub gibbs: Option<GibbsConfig>,
    #[serde(default)]
    pub prior: Option<Prior>,
}

pub const DEFAULT_ITERATIONS: usize = 200_000;
pub const DEFAULT_THIN: usize = 10;
pub const DEFAULT_SEED: u64 = 1;

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if t.eq_ignore_ascii_case("inf") {
                return Ok(f64::INFINITY);
            }
            t.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

impl GibbsArgs {
    pub fn resolve(&self) -> Result<(GibbsConfig, Prior)> {
        let file: FitConfig = match &self.config {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?,
            None => FitConfig::default(),
        };
        let mut cfg = file.gibbs.unwrap_or_else(|| {
            GibbsConfig::new(DEFAULT_ITERATIONS, DEFAULT_ITERATIONS / 10, DEFAULT_THIN, DEFAULT_SEED)
        });
        if let Some(it) = self.iters {
            cfg.iterations = it;
            cfg.burn_in = it / 10;
        }
        if let Some(b) = self.burnin {
            cfg.burn_in = b;
        }
        if let Some(t) = self.thin {
            cfg.thin = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(pin) = &self.pin {
            for t in pin.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                match t.parse::<usize>() {
                    Ok(i @ 1..=4) => cfg.pinned[i - 1] = true,
                    _ => return Err(Error::InvalidConfig(format!("--pin expects indices 1-4, got `{t}`"))),
                }
            }
        }
        cfg.validate()?;

        let prior = match self.prior {
            None => file.prior.unwrap_or(Prior::Jeffreys),
            Some(PriorKind::Jeffreys) => Prior::Jeffreys,
            Some(PriorKind::Informative) => {
                let beta = self
                    .alpha_prior
                    .as_deref()
                    .ok_or_else(|| Error::InvalidConfig("--prior informative needs --alpha-prior".into()))?;
                let beta = parse_floats(beta, "--alpha-prior")?;
                let beta: [f64; 5] = beta
                    .try_into()
                    .map_err(|_| Error::InvalidConfig("--alpha-prior needs five values".into()))?;
                let delta = self
                    .delta_prior
                    .as_deref()
                    .ok_or_else(|| Error::InvalidConfig("--prior informative needs --delta-prior".into()))?;
                let d = parse_floats(delta, "--delta-prior")?;
                let pairs: Vec<(f64, f64)> = match d.len() {
                    2 => vec![(d[0], d[1]); 3],
                    6 => d.chunks(2).map(|c| (c[0], c[1])).collect(),
                    _ => return Err(Error::InvalidConfig("--delta-prior needs one or three shape,scale pairs".into())),
                };
                Prior::Informative(InformativePrior {
                    beta,
                    delta_shape: [pairs[0].0, pairs[1].0, pairs[2].0],
                    delta_scale: [pairs[0].1, pairs[1].1, pairs[2].1],
                })
            }
        };
        prior.validate()?;
        Ok((cfg, prior))
    }
}

/// What `fit` writes to `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub dataset: DatasetMeta,
    pub counts: TrsCounts,
    pub x0: u64,
    pub prior: Prior,
    pub gibbs: GibbsConfig,
    pub summary: ChainSummary,
    /// Under-reporting percentage at the posterior median.
    pub under_reporting: f64,
    /// Cases per 100,000 inhabitants at the posterior median.
    pub incidence: Option<f64>,
}

pub fn fit_dataset(
    counts: &TrsCounts,
    dataset: DatasetMeta,
    prior: &Prior,
    cfg: &GibbsConfig,
    level: f64,
) -> Result<(FitReport, crate::thbm::Chain)> {
    let chain = run_gibbs(counts, prior, cfg)?;
    let summary = summarize_chain(&chain, level)?;
    let median = summary.population.median;
    let report = FitReport {
        x0: counts.x0(),
        counts: *counts,
        prior: prior.clone(),
        gibbs: cfg.clone(),
        under_reporting: ur_rate(median, counts.x0())?,
        incidence: dataset.inhabitants.map(|h| ir_rate(median, h)).transpose()?,
        dataset,
        summary,
    };
    Ok((report, chain))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

/// Output of one command before it hits the filesystem.
struct Outcome {
    stdout: String,
    files: Vec<(String, Vec<u8>)>,
    digest: String,
    seed: Option<u64>,
    config: serde_json::Value,
}

fn datasets_cmd(args: &DatasetsArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Entry {
        name: String,
        stratum: String,
        counts: TrsCounts,
        x0: u64,
        inhabitants: Option<u64>,
    }
    let entries: Vec<Entry> = builtin_datasets()
        .into_iter()
        .map(|(c, m)| Entry {
            name: m.name,
            stratum: m.stratum,
            counts: c,
            x0: c.x0(),
            inhabitants: m.inhabitants,
        })
        .collect();
    let json = to_json(&entries)?;
    let mut csv = String::from("name,stratum,x111,x110,x101,x011,x100,x010,x001,x0,inhabitants\n");
    for e in &entries {
        let mut f = vec![e.name.clone(), e.stratum.clone()];
        f.extend(e.counts.cells().iter().map(u64::to_string));
        f.push(e.x0.to_string());
        f.push(e.inhabitants.map(|h| h.to_string()).unwrap_or_default());
        csv.push_str(&csv_line(&f));
    }
    let stdout = if args.format == Format::Csv { csv.clone() } else { json.clone() };
    Ok(Outcome {
        stdout,
        files: vec![("datasets.json".into(), json.into_bytes()), ("datasets.csv".into(), csv.into_bytes())],
        digest: hex_digest(b"builtin"),
        seed: None,
        config: serde_json::Value::Null,
    })
}

fn fit_files(report: &FitReport, chain: &crate::thbm::Chain, svg: bool) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = vec![("summary.json".to_string(), to_json(report)?.into_bytes())];
    let mut buf = Vec::new();
    chain.write_csv(&mut buf)?;
    files.push(("chain.csv".into(), buf));
    for name in ["N", "P1", "P2", "P3", "alpha1", "alpha2", "alpha3", "alpha4"] {
        let h = Histogram::freedman_diaconis(&chain.series(name)?)?;
        files.push((format!("hist_{name}.csv"), h.to_csv().into_bytes()));
        if svg {
            let title = format!("{} posterior of {name}", report.dataset.name);
            files.push((format!("hist_{name}.svg"), histogram_svg(&h, &title).into_bytes()));
        }
    }
    Ok(files)
}

fn fit_row_header() -> String {
    "dataset,x0,median,mean,mae,hpd_low,hpd_high,under_reporting,incidence\n".into()
}

fn fit_row(r: &FitReport) -> String {
    let s = &r.summary.population;
    csv_line(&[
        r.dataset.name.clone(),
        r.x0.to_string(),
        format!("{}", s.median),
        format!("{:.2}", s.mean),
        format!("{:.2}", s.mae),
        format!("{}", s.hpd_low),
        format!("{}", s.hpd_high),
        format!("{:.2}", r.under_reporting),
        r.incidence.map(|v| format!("{v:.2}")).unwrap_or_default(),
    ])
}

fn fit_cmd(args: &FitArgs) -> Result<Outcome> {
    let (counts, mut meta) = load_data(&args.data)?;
    if let Some(h) = args.inhabitants {
        meta = DatasetMeta::new(meta.name, meta.stratum, Some(h))?;
    }
    let (cfg, prior) = args.gibbs.resolve()?;
    let (report, chain) = fit_dataset(&counts, meta, &prior, &cfg, args.level)?;
    let stdout = match args.format {
        Format::Csv => fit_row_header() + &fit_row(&report),
        _ => to_json(&report)?,
    };
    Ok(Outcome {
        stdout,
        files: fit_files(&report, &chain, args.format == Format::Svg)?,
        digest: hex_digest(serde_json::to_string(&counts)?.as_bytes()),
        seed: Some(cfg.seed),
        config: serde_json::json!({ "gibbs": cfg, "prior": prior, "level": args.level }),
    })
}

/// One method's row, or the reason it failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EstimateEntry {
    Ok(EstimateResult),
    Failed { method: Method, error: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub dataset: DatasetMeta,
    pub counts: TrsCounts,
    pub bootstrap: usize,
    pub level: f64,
    pub rows: Vec<EstimateEntry>,
}

pub fn estimate_table(counts: &TrsCounts, methods: &[Method], bootstrap: usize, level: f64, seed: u64) -> Vec<EstimateEntry> {
    methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let res = m.estimate(counts).and_then(|r| {
                if bootstrap == 0 {
                    return Ok(r);
                }
                let ci = bootstrap_ci(*m, counts, bootstrap, level, crate::rng::child_seed(seed, k as u64))?;
                Ok(r.with_bootstrap(&ci))
            });
            match res {
                Ok(r) => EstimateEntry::Ok(r),
                Err(e) => EstimateEntry::Failed { method: *m, error: e.to_string() },
            }
        })
        .collect()
}

fn estimate_cmd(args: &EstimateArgs) -> Result<Outcome> {
    let (counts, meta) = load_data(&args.data)?;
    let methods = Method::parse_list(&args.methods)?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    if args.bootstrap > 0 && args.bootstrap < MIN_BOOTSTRAP {
        return Err(Error::InvalidConfig(format!("--bootstrap must be 0 or at least {MIN_BOOTSTRAP}")));
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(Error::InvalidConfig("--level must lie in (0, 1)".into()));
    }
    let report = EstimateReport {
        rows: estimate_table(&counts, &methods, args.bootstrap, args.level, args.seed),
        dataset: meta,
        counts,
        bootstrap: args.bootstrap,
        level: args.level,
    };
    let json = to_json(&report)?;
    let mut csv = crate::classical::CSV_HEADER.join(",") + ",error\n";
    for row in &report.rows {
        match row {
            EstimateEntry::Ok(r) => csv.push_str(&csv_line(&[r.csv_row(), vec![String::new()]].concat())),
            EstimateEntry::Failed { method, error } => {
                csv.push_str(&format!("{method},,,,,false,\"{}\"\n", error.replace('"', "'")))
            }
        }
    }
    let stdout = if args.format == Format::Csv { csv.clone() } else { json.clone() };
    Ok(Outcome {
        stdout,
        files: vec![("estimates.json".into(), json.into_bytes()), ("estimates.csv".into(), csv.into_bytes())],
        digest: hex_digest(serde_json::to_string(&counts)?.as_bytes()),
        seed: Some(args.seed),
        config: serde_json::json!({ "methods": methods, "bootstrap": args.bootstrap, "level": args.level }),
    })
}

fn simulate_cmd(args: &SimulateArgs) -> Result<Outcome> {
    if args.list {
        let names: Vec<String> = standard_scenarios().into_iter().map(|s| s.name).collect();
        return Ok(Outcome {
            stdout: names.join("\n") + "\n",
            files: vec![],
            digest: hex_digest(b"presets"),
            seed: None,
            config: serde_json::Value::Null,
        });
    }
    let mut scenario: Scenario = match (&args.preset, &args.scenario) {
        (Some(p), None) => scenario_by_name(p)?,
        (None, Some(path)) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
        _ => return Err(Error::InvalidConfig("give exactly one of --preset or --scenario".into())),
    };
    if let Some(r) = args.reps {
        scenario.replications = r;
    }
    if let Some(e) = &args.estimators {
        scenario.estimators = Estimator::parse_list(e)?;
    }
    if let Some(it) = args.iters {
        scenario.gibbs.iterations = it;
        scenario.gibbs.burn_in = it / 2;
    }
    if let Some(b) = args.burnin {
        scenario.gibbs.burn_in = b;
    }
    if let Some(t) = args.thin {
        scenario.gibbs.thin = t;
    }
    if let Some(b) = args.bootstrap {
        scenario.bootstrap = b;
    }
    scenario.validate()?;
    let report = run_replications(&scenario, args.seed)?;
    let json = to_json(&report)?;
    let csv = report.to_csv();
    let stdout = if args.format == Format::Json { json.clone() } else { csv.clone() };
    Ok(Outcome {
        stdout,
        files: vec![
            ("scenario.json".into(), to_json(&scenario)?.into_bytes()),
            ("report.json".into(), json.into_bytes()),
            ("report.csv".into(), csv.into_bytes()),
        ],
        digest: hex_digest(serde_json::to_string(&scenario)?.as_bytes()),
        seed: Some(args.seed),
        config: serde_json::to_value(&scenario)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumRow {
    pub name: String,
    pub x0: u64,
    pub median: f64,
    pub mae: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub under_reporting: f64,
    pub incidence: Option<f64>,
}

impl From<&FitReport> for StratumRow {
    fn from(r: &FitReport) -> Self {
        let s = &r.summary.population;
        Self {
            name: r.dataset.name.clone(),
            x0: r.x0,
            median: s.median,
            mae: s.mae,
            hpd_low: s.hpd_low,
            hpd_high: s.hpd_high,
            under_reporting: r.under_reporting,
            incidence: r.incidence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveillanceReport {
    pub strata: Vec<StratumRow>,
    /// Sum of stratum medians; absent for a single stratum.
    pub strata_sum: Option<f64>,
    pub pooled: Option<StratumRow>,
}

pub fn surveillance_report(fits: &[FitReport], pooled: Option<&FitReport>, require_ir: bool) -> Result<SurveillanceReport> {
    if fits.is_empty() {
        return Err(Error::InvalidConfig("no strata given".into()));
    }
    if require_ir {
        if let Some(f) = fits.iter().find(|f| f.incidence.is_none()) {
            return Err(Error::InvalidConfig(format!("stratum `{}` has no inhabitant count", f.dataset.name)));
        }
    }
    let strata: Vec<StratumRow> = fits.iter().map(StratumRow::from).collect();
    Ok(SurveillanceReport {
        strata_sum: (strata.len() > 1).then(|| strata.iter().map(|s| s.median).sum()),
        strata,
        pooled: pooled.map(StratumRow::from),
    })
}

fn load_fit(path: &str) -> Result<FitReport> {
    serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::InvalidConfig(format!("{path}: {e}")))
}

fn report_cmd(args: &ReportArgs) -> Result<Outcome> {
    let (cfg, prior) = args.gibbs.resolve()?;
    let fit_now = |name: &str| -> Result<FitReport> {
        let (counts, meta) = load_data(name)?;
        Ok(fit_dataset(&counts, meta, &prior, &cfg, args.level)?.0)
    };
    let list = |s: &str| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect::<Vec<_>>();
    let fits: Vec<FitReport> = match (&args.fits, &args.data) {
        (Some(f), None) => list(f).iter().map(|p| load_fit(p)).collect::<Result<_>>()?,
        (None, Some(d)) => list(d).par_iter().map(|n| fit_now(n)).collect::<Result<_>>()?,
        _ => return Err(Error::InvalidConfig("give exactly one of --fits or --data".into())),
    };
    let pooled = match &args.pooled {
        None => None,
        Some(p) if p.ends_with(".json") => Some(load_fit(p)?),
        Some(p) => Some(fit_now(p)?),
    };
    let report = surveillance_report(&fits, pooled.as_ref(), args.require_ir)?;
    let json = to_json(&report)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
    let mut csv = String::from("stratum,x0,median,mae,hpd_low,hpd_high,under_reporting,incidence\n");
    let row = |s: &StratumRow| {
        csv_line(&[
            s.name.clone(),
            s.x0.to_string(),
            format!("{}", s.median),
            format!("{:.2}", s.mae),
            format!("{}", s.hpd_low),
            format!("{}", s.hpd_high),
            format!("{:.2}", s.under_reporting),
            opt(s.incidence),
        ])
    };
    for s in &report.strata {
        csv.push_str(&row(s));
    }
    if let Some(sum) = report.strata_sum {
        csv.push_str(&format!("sum_of_strata,,{sum},,,,,\n"));
    }
    if let Some(p) = &report.pooled {
        csv.push_str(&row(p));
    }
    let stdout = if args.format == Format::Csv { csv.clone() } else { json.clone() };
    let digest_src: Vec<&TrsCounts> = fits.iter().map(|f| &f.counts).collect();
    Ok(Outcome {
        stdout,
        files: vec![("report.json".into(), json.into_bytes()), ("report.csv".into(), csv.into_bytes())],
        digest: hex_digest(serde_json::to_string(&digest_src)?.as_bytes()),
        seed: Some(cfg.seed),
        config: serde_json::json!({ "gibbs": cfg, "prior": prior, "level": args.level }),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Datasets(_) => "datasets",
        Command::Fit(_) => "fit",
        Command::Estimate(_) => "estimate",
        Command::Simulate(_) => "simulate",
        Command::Report(_) => "report",
        Command::Replay(_) => "replay",
    }
}

fn output_dir(c: &Command) -> Option<&Path> {
    match c {
        Command::Datasets(a) => a.output.as_deref(),
        Command::Fit(a) => a.output.as_deref(),
        Command::Estimate(a) => a.output.as_deref(),
        Command::Simulate(a) => a.output.as_deref(),
        Command::Report(a) => a.output.as_deref(),
        Command::Replay(_) => None,
    }
}

/// Runs a parsed command. `args` are the raw arguments (without the
/// program name) recorded in the manifest. Returns what goes to stdout.
pub fn execute(cli: &Cli, args: &[String]) -> Result<String> {
    let started = Instant::now();
    let outcome = match &cli.command {
        Command::Datasets(a) => datasets_cmd(a)?,
        Command::Fit(a) => fit_cmd(a)?,
        Command::Estimate(a) => estimate_cmd(a)?,
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Report(a) => report_cmd(a)?,
        Command::Replay(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            return run_args(&manifest.args);
        }
    };
    if let Some(dir) = output_dir(&cli.command) {
        for (name, bytes) in &outcome.files {
            write_atomic(&dir.join(name), bytes)?;
        }
        let mut manifest = RunManifest::new(command_name(&cli.command), args, outcome.digest, outcome.seed, outcome.config);
        manifest.elapsed_ms = started.elapsed().as_millis();
        write_atomic(&dir.join("manifest.json"), to_json(&manifest)?.as_bytes())?;
    }
    Ok(outcome.stdout)
}

/// Parses and runs an argument list (without the program name).
pub fn run_args(args: &[String]) -> Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("popsize".to_string()).chain(args.iter().cloned()))
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    execute(&cli, args)
}

/// Process exit code for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Convenience for tests and examples: a summary keyed by stratum name.
pub fn medians(report: &SurveillanceReport) -> BTreeMap<String, f64> {
    report.strata.iter().map(|s| (s.name.clone(), s.median)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn gibbs_flag_resolution() {
        let g = GibbsArgs { iters: Some(5000), seed: Some(3), pin: Some("3,4".into()), ..Default::default() };
        let (cfg, prior) = g.resolve().unwrap();
        assert_eq!((cfg.iterations, cfg.burn_in, cfg.thin, cfg.seed), (5000, 500, 10, 3));
        assert_eq!(cfg.pinned, [false, false, true, true]);
        assert!(prior.is_jeffreys());
        let bad = GibbsArgs { prior: Some(PriorKind::Informative), ..Default::default() };
        assert!(bad.resolve().is_err());
        let ok = GibbsArgs {
            prior: Some(PriorKind::Informative),
            alpha_prior: Some("1,1,1,1,4".into()),
            delta_prior: Some("0.0256,62.5".into()),
            ..Default::default()
        };
        assert!(!ok.resolve().unwrap().1.is_jeffreys());
    }

    #[test]
    fn estimate_runs_inline_failures() {
        let out = run_args(&args("estimate --data ld_all --methods sc,llm,independent --format csv")).unwrap();
        assert!(out.contains("sc,992.22"));
        assert!(out.contains("llm,1253.08"));
        assert!(out.contains("independent,855.39"));
        assert!(matches!(run_args(&args("estimate --data ld_all --methods lasso")), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
    }

    #[test]
    fn single_stratum_has_no_sum() {
        let out = run_args(&args("report --data ld_north --iters 3000 --seed 2")).unwrap();
        let r: SurveillanceReport = serde_json::from_str(&out).unwrap();
        assert!(r.strata_sum.is_none());
        assert!(r.strata[0].incidence.is_some());
    }
}
