//! Command-line front end: scenario presets, flag and config-file parsing,
//! and the run/report driver behind the `halpha` binary.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use halpha::analysis::{analyze, write_csv_file, ExperimentResult};
use halpha::distributions::{AgingCurve, CitationModel, CountDistribution, CountKind};
use halpha::engine::{run_experiment, run_experiment_with_threads, BoostSchedule, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Random teams, no boost.
    Baseline,
    /// Baseline plus boost size .5.
    Boost,
    /// Baseline plus diligence correlation .8 and share .6.
    Diligence,
    /// Baseline plus strategic team formation.
    Strategic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistName {
    Poisson,
    Nbinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostScheduleName {
    Once,
    EveryPeriod,
}

impl From<BoostScheduleName> for BoostSchedule {
    fn from(name: BoostScheduleName) -> Self {
        match name {
            BoostScheduleName::Once => BoostSchedule::Once,
            BoostScheduleName::EveryPeriod => BoostSchedule::EveryPeriod,
        }
    }
}

/// Every simulation parameter, each optional so that presets, a config file,
/// and command-line flags can be layered. The same layout is used for the
/// JSON config file and the resolved-config echo.
#[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Scenario preset providing the defaults [default: baseline]
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    /// Number of repetitions (r)
    #[arg(long)]
    pub runs: Option<u32>,
    /// Number of agents (n)
    #[arg(long)]
    pub agents: Option<u32>,
    /// Number of collaboration periods (per)
    #[arg(long)]
    pub periods: Option<u32>,
    /// Team size (co)
    #[arg(long)]
    pub coauthors: Option<u32>,
    /// Distribution of pre-simulation paper counts (dp)
    #[arg(long, value_enum)]
    pub papers_dist: Option<DistName>,
    /// Mean number of pre-simulation papers
    #[arg(long)]
    pub papers_mean: Option<f64>,
    /// Negative binomial dispersion of paper counts
    #[arg(long)]
    pub papers_dispersion: Option<f64>,
    /// Distribution of per-period citations (dc)
    #[arg(long, value_enum)]
    pub citations_dist: Option<DistName>,
    /// Maximum expected citations per period
    #[arg(long)]
    pub citations_mean: Option<f64>,
    /// Paper age at which expected citations peak (p)
    #[arg(long)]
    pub citations_peak: Option<f64>,
    /// Steepness of the log-logistic aging curve, > 1
    #[arg(long)]
    pub citations_speed: Option<f64>,
    /// Negative binomial dispersion of citation counts
    #[arg(long)]
    pub citations_dispersion: Option<f64>,
    /// Share of pre-simulation papers with the agent as alpha author (sh)
    #[arg(long)]
    pub alpha_share: Option<f64>,
    /// Boost size; extra citations = round(max author h * size), 0 = off (boost)
    #[arg(long)]
    pub boost_size: Option<f64>,
    /// When boost citations are granted
    #[arg(long, value_enum)]
    pub boost_schedule: Option<BoostScheduleName>,
    /// Correlation between initial h and publishing propensity (dil correlation)
    #[arg(long)]
    pub diligence_corr: Option<f64>,
    /// Share of agents collaborating each period (dil share)
    #[arg(long)]
    pub diligence_share: Option<f64>,
    /// Seed every team with one of the highest-h collaborators (st)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strategic: Option<bool>,
    /// Self-cite papers whose citations trail an author's h by one or two
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub self_citations: Option<bool>,
    /// Reassign alpha authors after every period from current h values
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub update_alpha: Option<bool>,
    /// Master seed; drawn from system entropy and reported when omitted
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Settings {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            scenario: over.scenario.or(self.scenario),
            runs: over.runs.or(self.runs),
            agents: over.agents.or(self.agents),
            periods: over.periods.or(self.periods),
            coauthors: over.coauthors.or(self.coauthors),
            papers_dist: over.papers_dist.or(self.papers_dist),
            papers_mean: over.papers_mean.or(self.papers_mean),
            papers_dispersion: over.papers_dispersion.or(self.papers_dispersion),
            citations_dist: over.citations_dist.or(self.citations_dist),
            citations_mean: over.citations_mean.or(self.citations_mean),
            citations_peak: over.citations_peak.or(self.citations_peak),
            citations_speed: over.citations_speed.or(self.citations_speed),
            citations_dispersion: over.citations_dispersion.or(self.citations_dispersion),
            alpha_share: over.alpha_share.or(self.alpha_share),
            boost_size: over.boost_size.or(self.boost_size),
            boost_schedule: over.boost_schedule.or(self.boost_schedule),
            diligence_corr: over.diligence_corr.or(self.diligence_corr),
            diligence_share: over.diligence_share.or(self.diligence_share),
            strategic: over.strategic.or(self.strategic),
            self_citations: over.self_citations.or(self.self_citations),
            update_alpha: over.update_alpha.or(self.update_alpha),
            seed: over.seed.or(self.seed),
        }
    }

    /// Builds the engine configuration. Every field except `scenario` must
    /// be set.
    pub fn to_config(&self) -> Result<SimulationConfig, CliError> {
        fn need<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
            value.ok_or_else(|| CliError::Usage(format!("missing value for --{name}")))
        }
        let kind = |dist: DistName, dispersion: f64| match dist {
            DistName::Poisson => CountKind::Poisson,
            DistName::Nbinomial => CountKind::NegativeBinomial { dispersion },
        };
        let papers = CountDistribution::new(
            kind(need(self.papers_dist, "papers-dist")?, need(self.papers_dispersion, "papers-dispersion")?),
            need(self.papers_mean, "papers-mean")?,
        )?;
        let curve = AgingCurve::new(
            need(self.citations_peak, "citations-peak")?,
            need(self.citations_mean, "citations-mean")?,
            need(self.citations_speed, "citations-speed")?,
        )?;
        let citations = CitationModel::new(
            kind(
                need(self.citations_dist, "citations-dist")?,
                need(self.citations_dispersion, "citations-dispersion")?,
            ),
            curve,
        )?;
        let config = SimulationConfig {
            runs: need(self.runs, "runs")?,
            agents: need(self.agents, "agents")?,
            periods: need(self.periods, "periods")?,
            coauthors: need(self.coauthors, "coauthors")?,
            initial_papers: papers,
            citations,
            alpha_share: need(self.alpha_share, "alpha-share")?,
            collab_share: need(self.diligence_share, "diligence-share")?,
            diligence_correlation: need(self.diligence_corr, "diligence-corr")?,
            strategic: need(self.strategic, "strategic")?,
            self_citation: need(self.self_citations, "self-citations")?,
            boost_size: need(self.boost_size, "boost-size")?,
            boost_schedule: need(self.boost_schedule, "boost-schedule")?.into(),
            dynamic_alpha: need(self.update_alpha, "update-alpha")?,
            master_seed: need(self.seed, "seed")?,
        };
        config.validate()?;
        Ok(config)
    }
}

/// The fully specified parameter set of a scenario (seed left unset).
pub fn preset(scenario: Scenario) -> Settings {
    let baseline = Settings {
        scenario: Some(Scenario::Baseline),
        runs: Some(50),
        agents: Some(200),
        periods: Some(20),
        coauthors: Some(3),
        papers_dist: Some(DistName::Poisson),
        papers_mean: Some(10.0),
        papers_dispersion: Some(1.0),
        citations_dist: Some(DistName::Poisson),
        citations_mean: Some(5.0),
        citations_peak: Some(3.0),
        citations_speed: Some(2.0),
        citations_dispersion: Some(1.0),
        alpha_share: Some(0.33),
        boost_size: Some(0.0),
        boost_schedule: Some(BoostScheduleName::Once),
        diligence_corr: Some(0.0),
        diligence_share: Some(1.0),
        strategic: Some(false),
        self_citations: Some(false),
        update_alpha: Some(false),
        seed: None,
    };
    let scenario = Some(scenario);
    match scenario {
        Some(Scenario::Baseline) | None => baseline,
        Some(Scenario::Boost) => Settings {
            scenario,
            boost_size: Some(0.5),
            ..baseline
        },
        Some(Scenario::Diligence) => Settings {
            scenario,
            diligence_corr: Some(0.8),
            diligence_share: Some(0.6),
            ..baseline
        },
        Some(Scenario::Strategic) => Settings {
            scenario,
            strategic: Some(true),
            ..baseline
        },
    }
}

/// Builds a complete engine configuration for a preset and seed.
pub fn preset_config(scenario: Scenario, seed: u64) -> SimulationConfig {
    Settings {
        seed: Some(seed),
        ..preset(scenario)
    }
    .to_config()
    .expect("presets are valid")
}

#[derive(Debug, Parser)]
#[command(
    name = "halpha",
    allow_negative_numbers = true,
    version,
    about = "Simulate h and h-alpha index trajectories of collaborating scientists",
    after_help = "Outputs: OUT (aggregated CSV), OUT_STEM.runs.csv with --per-run, \
                  and OUT_STEM.config.json holding the resolved configuration."
)]
pub struct Args {
    #[command(flatten)]
    pub settings: Settings,

    /// JSON file with parameter values; overridden by flags
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Aggregated CSV output path
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// Also write per-run trajectories
    #[arg(long)]
    pub per_run: bool,

    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Sim(#[from] halpha::Error),
}

impl CliError {
    /// 2 for anything wrong with the invocation, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => 2,
            CliError::Sim(halpha::Error::Config(_)) => 2,
            CliError::Sim(_) => 1,
        }
    }
}

/// A parsed invocation, ready to run.
#[derive(Debug, Clone)]
pub struct RunPlan {
    /// Resolved parameters, every field set.
    pub settings: Settings,
    pub config: SimulationConfig,
    pub out: PathBuf,
    pub per_run: bool,
    pub threads: Option<usize>,
    /// The seed was not given and came from system entropy.
    pub seed_generated: bool,
}

impl RunPlan {
    pub fn per_run_path(&self) -> PathBuf {
        sibling(&self.out, "runs.csv")
    }

    pub fn config_path(&self) -> PathBuf {
        sibling(&self.out, "config.json")
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn read_settings_file(path: &Path) -> Result<Settings, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))
}

/// Resolves flags over config-file values over preset defaults.
pub fn parse_config<I, T>(argv: I) -> Result<RunPlan, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let file = match &args.config {
        Some(path) => read_settings_file(path)?,
        None => Settings::default(),
    };
    let scenario = args.settings.scenario.or(file.scenario).unwrap_or(Scenario::Baseline);
    let mut settings = preset(scenario).merge(file).merge(args.settings);
    settings.scenario = Some(scenario);
    let seed_generated = settings.seed.is_none();
    if seed_generated {
        settings.seed = Some(rand::random());
    }
    let config = settings.to_config().map_err(|e| match e {
        CliError::Sim(err) => CliError::Usage(err.to_string()),
        other => other,
    })?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    Ok(RunPlan {
        settings,
        config,
        out: args.out,
        per_run: args.per_run,
        threads: args.threads,
        seed_generated,
    })
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"))
}

/// Runs the experiment, writes the CSV outputs and the config echo, and
/// prints a per-period summary to `stdout`.
pub fn run_and_report<W: Write>(plan: &RunPlan, stdout: &mut W) -> Result<ExperimentResult, CliError> {
    for warning in plan.config.warnings() {
        log::warn!("{warning}");
    }
    let runs = match plan.threads {
        Some(threads) => run_experiment_with_threads(&plan.config, threads)?,
        None => run_experiment(&plan.config)?,
    };
    let result = analyze(&runs)?;

    write_csv_file(&plan.out, &result, false)?;
    if plan.per_run {
        write_csv_file(&plan.per_run_path(), &result, true)?;
    }
    let echo = serde_json::to_string_pretty(&plan.settings).expect("settings serialize") + "\n";
    let config_path = plan.config_path();
    fs::write(&config_path, echo).map_err(|source| halpha::Error::Io {
        path: config_path.clone(),
        source,
    })?;

    let io = |source| halpha::Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    let medians = result.median_initial_h();
    writeln!(
        stdout,
        "scenario {:?}, seed {}, {} runs; median initial h (lower median over runs) {}",
        plan.settings.scenario.unwrap_or(Scenario::Baseline),
        plan.config.master_seed,
        runs.len(),
        halpha::analysis::lower_median(&medians).unwrap_or(0),
    )
    .map_err(io)?;
    for p in &result.periods {
        writeln!(
            stdout,
            "period {:>3}  low {:>8}  high {:>8}  diff {:>8}",
            p.period,
            fmt_opt(p.low),
            fmt_opt(p.high),
            fmt_opt(p.difference)
        )
        .map_err(io)?;
    }
    Ok(result)
}
