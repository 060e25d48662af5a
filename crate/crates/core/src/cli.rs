//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Results go
//! to standard output, progress and file lists to standard error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analytic::{linspace, min_clearing_members, threshold_surface, AnalyticError};
use crate::dataio::{self, write_epsilon_csv, write_report, DataError, RunConfig, EPSILON_FILE};
use crate::market::{HomogeneousSpec, Marginal, MarketError};
use crate::montecarlo::{attach_analytic, simulate_detailed, SamplingModel, SimulationError};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ccp-netting", version, about = "Counterparty exposure under bilateral and central clearing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum number of clearing members for a CCP to lower expected exposure.
    Threshold(ThresholdArgs),
    /// Threshold over a grid of cleared-class riskiness and correlation.
    Surface(SurfaceArgs),
    /// Monte Carlo run of the clearing scenarios.
    Scenarios(ScenarioArgs),
    /// Re-render report files from a JSON dump.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct HomogeneousArgs {
    /// Credit exposures: `bis-2010h1`, `equal:K`, or a comma-separated list.
    #[arg(long, default_value = "bis-2010h1")]
    pub ce: String,
    /// Cleared class (name or 1-based index); defaults to `credit`, else the last class.
    #[arg(long)]
    pub cleared: Option<String>,
    /// Cleared fraction of the cleared class.
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub market: HomogeneousArgs,
    /// Riskiness multiplier, `<class>=<value>`; repeatable.
    #[arg(long, value_parser = parse_assignment::<f64>)]
    pub alpha: Vec<(String, f64)>,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub market: HomogeneousArgs,
    /// Multiplier grid on the cleared class, `start:end:count`.
    #[arg(long, default_value = "1:3:20", value_parser = parse_grid)]
    pub alpha_grid: Grid,
    /// Correlation grid, `start:end:count`.
    #[arg(long, default_value = "0:0.2:20", value_parser = parse_grid)]
    pub rho_grid: Grid,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// `key = value` run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in dataset (`occ-2009q1`, `occ-2010q4`) or CSV path.
    #[arg(long)]
    pub notionals: Option<String>,
    /// `<class>=<value>`; repeatable.
    #[arg(long, value_parser = parse_assignment::<f64>)]
    pub beta: Vec<(String, f64)>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Cleared fraction `<class>=<value>` in every scenario clearing the class.
    #[arg(long, value_parser = parse_assignment::<f64>)]
    pub w: Vec<(String, f64)>,
    /// `<class>=<gaussian|t3>`; repeatable.
    #[arg(long, value_parser = parse_assignment::<Marginal>)]
    pub marginal: Vec<(String, Marginal)>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a mirrored copy of every dealer.
    #[arg(long, overrides_with = "no_mirror")]
    pub mirror: bool,
    #[arg(long, overrides_with = "mirror")]
    pub no_mirror: bool,
    /// VaR / ES confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Draw `X_ji` independently of `X_ij` instead of `X_ji = -X_ij`.
    #[arg(long)]
    pub independent_pairs: bool,
    /// Paths kept for the exposure-reduction histograms.
    #[arg(long)]
    pub histogram_paths: Option<u64>,
    /// Also write every kept exposure reduction.
    #[arg(long)]
    pub dump_eps: bool,
    /// No progress output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON dump written by `scenarios`.
    #[arg(long)]
    pub dump: PathBuf,
    /// Directory for the re-rendered files; ratio tables go to standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.count)
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("expected start:end:count, got `{s}`");
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !(end >= start) {
        return Err(bad());
    }
    Ok(Grid { start, end, count })
}

fn parse_assignment<T: std::str::FromStr>(s: &str) -> Result<(String, T), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <class>=<value>, got `{s}`"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("bad value `{}` in `{s}`", value.trim()))?;
    Ok((key.trim().to_string(), value))
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    /// Standard output was closed by the reader.
    Closed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Closed => 0,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Closed => write!(f, "output closed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Csv(_) | DataError::Json(_) => CliError::Runtime(e.to_string()),
            DataError::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Market(_) | AnalyticError::InvalidGrid | AnalyticError::NonGaussian(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Market(_)
            | SimulationError::Correlation(_)
            | SimulationError::NotPositiveDefinite
            | SimulationError::ModelShape { .. }
            | SimulationError::TooFewPaths(_)
            | SimulationError::Level(_)
            | SimulationError::NoBaseScenario => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_error(e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        CliError::Closed
    } else {
        CliError::Runtime(e.to_string())
    }
}

/// Homogeneous market from `--ce`, `--cleared` and `--w`.
pub fn homogeneous_spec(args: &HomogeneousArgs, rho: f64) -> Result<HomogeneousSpec, CliError> {
    let (names, ce) = if let Some(builtin) = dataio::builtin_credit_exposures(&args.ce) {
        builtin
    } else if let Some(k) = args.ce.strip_prefix("equal:") {
        let k: usize = k
            .parse()
            .ok()
            .filter(|k| *k > 0)
            .ok_or_else(|| CliError::Config(format!("bad class count in `{}`", args.ce)))?;
        ((1..=k).map(|i| format!("class{i}")).collect(), vec![1.0; k])
    } else {
        let ce = args
            .ce
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| {
                CliError::Config(format!(
                    "--ce must be bis-2010h1, equal:K or a comma-separated list, got `{}`",
                    args.ce
                ))
            })?;
        ((1..=ce.len()).map(|i| format!("class{i}")).collect(), ce)
    };
    let cleared = match &args.cleared {
        Some(c) => class_position(&names, c)?,
        None => names.iter().position(|n| n == "credit").unwrap_or(names.len() - 1),
    };
    let mut spec = HomogeneousSpec::new(names, ce, rho, cleared);
    spec.cleared_fraction = args.w;
    spec.validate()?;
    Ok(spec)
}

fn class_position(names: &[String], key: &str) -> Result<usize, CliError> {
    if let Some(p) = names.iter().position(|n| n == key) {
        return Ok(p);
    }
    match key.parse::<usize>() {
        Ok(i) if (1..=names.len()).contains(&i) => Ok(i - 1),
        _ => Err(CliError::Config(format!(
            "unknown class `{key}` (known: {})",
            names.join(", ")
        ))),
    }
}

fn cmd_threshold(args: &ThresholdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut spec = homogeneous_spec(&args.market, args.rho)?;
    for (class, alpha) in &args.alpha {
        let k = class_position(&spec.class_names, class)?;
        spec = spec.with_alpha(k, *alpha);
    }
    spec.validate()?;
    let result = min_clearing_members(&spec)?;
    writeln!(out, "n_star,{}", result.n_star).map_err(io_error)?;
    writeln!(out, "crossing,{}", result.crossing).map_err(io_error)?;
    writeln!(out, "n,bilateral_ee,ccp_ee").map_err(io_error)?;
    for n in result.n_star.saturating_sub(1).max(2)..=result.n_star + 1 {
        writeln!(out, "{n},{},{}", result.bilateral_ee(n), result.ccp_ee(n)).map_err(io_error)?;
    }
    Ok(())
}

fn cmd_surface(args: &SurfaceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let template = homogeneous_spec(&args.market, 0.0)?;
    let surface = threshold_surface(&template, &args.alpha_grid.values(), &args.rho_grid.values())?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let mut file = std::io::BufWriter::new(file);
            surface.write_csv(&mut file).map_err(io_error)?;
            file.flush().map_err(io_error)?;
            eprintln!("wrote {}", path.display());
        }
        None => surface.write_csv(out).map_err(io_error)?,
    }
    Ok(())
}

/// Run configuration from `--config` plus flag overrides.
pub fn run_config(args: &ScenarioArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(n) = &args.notionals {
        cfg.notionals = n.clone();
    }
    for (class, beta) in &args.beta {
        cfg.betas.insert(class.clone(), *beta);
    }
    if let Some(rho) = args.rho {
        cfg.rho = rho;
    }
    for (class, w) in &args.w {
        cfg.set_fraction(class, *w)?;
    }
    for (class, m) in &args.marginal {
        cfg.marginals.insert(class.clone(), *m);
    }
    if let Some(p) = args.paths {
        cfg.paths = p;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    if args.mirror {
        cfg.mirror_dealers = true;
    }
    if args.no_mirror {
        cfg.mirror_dealers = false;
    }
    if let Some(l) = args.level {
        cfg.level = l;
    }
    if args.independent_pairs {
        cfg.antisymmetric = false;
    }
    if let Some(h) = args.histogram_paths {
        cfg.histogram_paths = h;
    }
    Ok(cfg)
}

fn cmd_scenarios(args: &ScenarioArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = run_config(args)?;
    let run = cfg.prepare().map_err(|e| match e {
        DataError::Io { .. } => CliError::Config(e.to_string()),
        other => CliError::from(other),
    })?;
    let mut options = run.options.clone();
    options.progress = !args.quiet;
    let model: SamplingModel = run.model.clone();
    let (mut report, eps) = simulate_detailed(&run.market, &model, &run.scenarios, &options)?;
    report.metadata.notes.extend(run.notes.iter().cloned());
    attach_analytic(&mut report, &run.market, &run.scenarios)?;

    let mut files = write_report(&report, &cfg.out_dir)?;
    if args.dump_eps {
        let path = cfg.out_dir.join(EPSILON_FILE);
        write_epsilon_csv(&eps, &path)?;
        files.push(path);
    }
    if !args.quiet {
        for f in &files {
            eprintln!("wrote {}", f.display());
        }
    }

    writeln!(out, "scenario,total_ee,total_ee_ratio,analytic_total_ee,mean_max,mean_max_ratio").map_err(io_error)?;
    for s in &report.scenarios {
        let opt = |x: Option<f64>| x.map(|v| dataio::format_sig(v, 6)).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.name,
            dataio::format_sig(s.total_ee, 6),
            opt(s.total_ee_ratio),
            opt(s.analytic_total_ee),
            dataio::format_sig(s.mean_max, 6),
            opt(s.mean_max_ratio)
        )
        .map_err(io_error)?;
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = dataio::read_dump(&args.dump).map_err(|e| CliError::Config(e.to_string()))?;
    match &args.out {
        Some(dir) => {
            for f in write_report(&report, dir)? {
                eprintln!("wrote {}", f.display());
            }
        }
        None => write!(out, "{}", dataio::render_ratio_tables(&report)).map_err(io_error)?,
    }
    Ok(())
}

pub fn run_with(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Threshold(a) => cmd_threshold(a, out),
        Command::Surface(a) => cmd_surface(a, out),
        Command::Scenarios(a) => cmd_scenarios(a, out),
        Command::Report(a) => cmd_report(a, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("ccp-netting").chain(args.iter().copied()))
            .map_err(|e| CliError::Config(e.to_string()))?;
        let mut buf = Vec::new();
        run_with(&cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn threshold_prints_n_star_and_curves() {
        let text = run(&["threshold", "--ce", "bis-2010h1", "--rho", "0"]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n_star,461");
        assert_eq!(lines[2], "n,bilateral_ee,ccp_ee");
        assert_eq!(lines.len(), 6);
        let row = |l: &str| -> Vec<f64> { l.split(',').map(|v| v.parse().unwrap()).collect() };
        let below = row(lines[3]);
        let at = row(lines[4]);
        assert_eq!(below[0], 460.0);
        assert!(below[2] >= below[1]);
        assert!(at[2] < at[1]);
    }

    #[test]
    fn parses_assignments_and_grids() {
        assert_eq!(parse_assignment::<f64>("credit=3").unwrap(), ("credit".to_string(), 3.0));
        assert!(parse_assignment::<f64>("credit").is_err());
        assert_eq!(
            parse_assignment::<Marginal>("credit=t3").unwrap().1,
            Marginal::StudentT3Unit
        );
        assert_eq!(
            parse_grid("1:3:20").unwrap(),
            Grid {
                start: 1.0,
                end: 3.0,
                count: 20
            }
        );
        assert!(parse_grid("1:3").is_err());
        assert!(parse_grid("3:1:5").is_err());
    }

    #[test]
    fn config_errors_map_to_exit_two() {
        let err = run(&["threshold", "--ce", "equal:0"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        let err = run(&["threshold", "--alpha", "bonds=2"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        let err = run(&["threshold", "--rho", "1.5"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        let err = run(&["scenarios", "--paths", "10", "--quiet"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        let err = run(&["scenarios", "--w", "options=0.5", "--quiet"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn mirror_flags_override_config() {
        let cli = Cli::try_parse_from(["x", "scenarios", "--no-mirror"]).unwrap();
        let Command::Scenarios(a) = &cli.command else { panic!() };
        assert!(!run_config(a).unwrap().mirror_dealers);
        let cli = Cli::try_parse_from(["x", "scenarios", "--no-mirror", "--mirror"]).unwrap();
        let Command::Scenarios(a) = &cli.command else { panic!() };
        assert!(run_config(a).unwrap().mirror_dealers);
    }
}
