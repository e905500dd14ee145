//! Command-line front end. Every subcommand writes one CSV table.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{discretize_after, sparse_audit, AuditDesign, Clamp, Covariate, EventRecord};
use crate::error::{Error, Result};
use crate::figures;
use crate::io::table::{self, num, ratio_row, Table, RATIO_COLUMNS};
use crate::io::{read_load_log, RunConfig};
use crate::planner::{max_safe_acute, PlanBound, PlanRequest};
use crate::ratio::{compute_series, convergence_analysis, weight_table, EwmaParams, MethodSpec};
use crate::series::{Coupling, WindowConfig, WorkloadSeries};
use crate::service;
use crate::study::{
    apply_mitigation, build_case_crossover, build_nested_case_control, raw_exposures, simulate_cohort_with, BiasReport,
    Execution, Hazard, Matcher, Mitigation, Stratum,
};

#[derive(Debug, Parser)]
#[command(name = "acwr", version, about = "Acute:chronic workload ratio toolkit")]
pub struct Cli {
    /// Random seed for simulations (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daily ratio series for every athlete in a load log.
    Compute(ComputeArgs),
    /// Expanded EWMA weights of the initial value and first load.
    Weights(WeightsArgs),
    /// Distance between EWMAs started from two initial values.
    Converge(ConvergeArgs),
    /// Largest next-week load under a ratio cap.
    Plan(PlanArgs),
    /// Synthetic cohort, early-injury bias and its mitigations.
    Simulate(SimulateArgs),
    /// Risk-zone labels and events-per-cell checks.
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Plot-ready data for the illustrative figures.
    Figures(FiguresArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rolling,
    RollingUncoupled,
    Ewma,
    EwmaUncoupled,
}

impl MethodArg {
    fn spec(self) -> MethodSpec {
        match self {
            MethodArg::Rolling => MethodSpec::rolling(WindowConfig::coupled(1, 4)),
            MethodArg::RollingUncoupled => MethodSpec::rolling(WindowConfig::uncoupled(1, 4)),
            MethodArg::Ewma => MethodSpec::ewma_coupled_default(),
            MethodArg::EwmaUncoupled => MethodSpec::ewma_uncoupled_default(),
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
pub struct ComputeArgs {
    /// Load log (athlete_id,date,load,planned).
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
    /// Built-in series instead of a file.
    #[arg(long, group = "source")]
    pub fixture: Option<String>,
    /// Ratio method; defaults to the config file's method.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Use planned rows instead of realized rows.
    #[arg(long)]
    pub planned: bool,
    /// Only this athlete.
    #[arg(long)]
    pub athlete: Option<String>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Decay constants; defaults to 0.500 down to 0.025 in steps of 0.025.
    #[arg(long = "lambda", value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    /// Days of activity.
    #[arg(long, default_value_t = 28)]
    pub t: usize,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Time constant N, giving λ = 2/(N+1).
    #[arg(long, default_value_t = 28, conflicts_with = "lambda")]
    pub n: u32,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Difference between the two initial values.
    #[arg(long, default_value_t = 55.0)]
    pub initial_difference: f64,
    /// Convergence threshold; defaults to the config file's value.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Length of the trace in days.
    #[arg(long, default_value_t = 84)]
    pub days: usize,
    /// One summary row instead of the daily trace.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Coupled,
    Uncoupled,
    Both,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Completed weekly totals, most recent last.
    #[arg(long, value_delimiter = ',', required = true)]
    pub prior: Vec<f64>,
    /// Ratio cap; defaults to the config file's value.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long, value_enum, default_value = "coupled")]
    pub coupling: CouplingArg,
    #[arg(long, default_value_t = 4)]
    pub chronic_weeks: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub athletes: Option<usize>,
    #[arg(long)]
    pub weeks: Option<usize>,
    /// Constant per-session injury probability.
    #[arg(long)]
    pub hazard: Option<f64>,
    /// Simulate athletes on the rayon thread pool.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Zone label for every ratio in a load log.
    Zones(ZonesArgs),
    /// Events per exposure × covariate cell.
    Sparse(SparseArgs),
}

#[derive(Debug, Args)]
pub struct ZonesArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Clamp ratios to [0.5, 2.0] before labelling.
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Args)]
pub struct SparseArgs {
    /// CSV with columns exposure,injured and any covariate columns.
    #[arg(long)]
    pub events: PathBuf,
    /// Exposure levels; defaults to the zone labels.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<String>,
    /// Required events per cell; defaults to the config file's value.
    #[arg(long)]
    pub required: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Same rolling ratio from three training patterns.
    Fig2,
    /// EWMA weight curves for N = 7 and N = 28.
    Fig3,
    /// Ratios started from two initial values.
    Fig4,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub figure: Figure,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = service::BIND_ENV, default_value = service::DEFAULT_BIND)]
    pub bind: String,
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    let table = match &cli.command {
        Command::Compute(a) => compute(a, &cfg)?,
        Command::Weights(a) => weights(a)?,
        Command::Converge(a) => converge(a, &cfg)?,
        Command::Plan(a) => plan(a, &cfg)?,
        Command::Simulate(a) => simulate(a, &cfg)?,
        Command::Audit(AuditCommand::Zones(a)) => zones(a, &cfg)?,
        Command::Audit(AuditCommand::Sparse(a)) => sparse(a, &cfg)?,
        Command::Figures(a) => figure(a.figure, &cfg)?,
        Command::Serve(a) => return serve(&a.bind),
    };
    match &cli.out {
        Some(path) => table.write_csv(std::fs::File::create(path)?),
        None => table.write_csv(stdout),
    }
}

fn series_for(input: &Option<PathBuf>, fixture: &Option<String>, planned: bool) -> Result<Vec<WorkloadSeries>> {
    if let Some(id) = fixture {
        let s = service::fixture(id).ok_or_else(|| {
            Error::param(
                "fixture",
                format!("unknown fixture `{id}`; known: {}", service::FIXTURE_IDS.join(", ")),
            )
        })?;
        return Ok(vec![s]);
    }
    let path = input.as_ref().expect("clap requires a source");
    let log = read_load_log(path)?;
    Ok(log
        .athletes
        .into_iter()
        .map(|a| if planned { a.planned } else { a.realized })
        .filter(|s| !s.is_empty())
        .collect())
}

fn compute(a: &ComputeArgs, cfg: &RunConfig) -> Result<Table> {
    let method = a.method.map_or_else(|| cfg.method.clone(), MethodArg::spec);
    let mut t = Table::new(&RATIO_COLUMNS);
    for s in series_for(&a.input, &a.fixture, a.planned)? {
        if a.athlete.as_deref().is_some_and(|id| id != s.athlete_id()) {
            continue;
        }
        for p in compute_series(&s, &method)? {
            t.push(ratio_row(s.athlete_id(), &p, crate::audit::classify(&p, &cfg.zones)));
        }
    }
    Ok(t)
}

pub fn default_lambda_grid() -> Vec<f64> {
    (1..=20).rev().map(|k| k as f64 * 0.025).collect()
}

fn weights(a: &WeightsArgs) -> Result<Table> {
    let lambdas = if a.lambdas.is_empty() {
        default_lambda_grid()
    } else {
        a.lambdas.clone()
    };
    let mut t = Table::new(&["lambda", "t", "w0", "w1", "difference", "initial_dominates"]);
    for l in lambdas {
        let w = weight_table(l, a.t)?;
        t.push(vec![
            format!("{l:.3}"),
            a.t.to_string(),
            num(w.w0),
            num(w.w1()),
            num(w.first_difference()),
            crate::ratio::initial_weight_dominates(l)?.to_string(),
        ]);
    }
    Ok(t)
}

fn converge(a: &ConvergeArgs, cfg: &RunConfig) -> Result<Table> {
    let params = match a.lambda {
        Some(l) => EwmaParams::with_lambda(l),
        None => EwmaParams::from_n(a.n),
    };
    let epsilon = a.epsilon.unwrap_or(cfg.convergence_epsilon);
    let base: Vec<f64> = figures::same_ratio_profiles().pop().expect("profile").loads().collect();
    let loads: Vec<f64> = base.iter().copied().cycle().take(a.days).collect();
    let profile = WorkloadSeries::from_daily("profile", figures::figure_start(), &loads)?;
    let report = convergence_analysis(&profile, &params, a.initial_difference, 0.0, epsilon)?;
    if a.summary {
        let mut t = Table::new(&[
            "lambda",
            "epsilon",
            "initial_difference",
            "convergence_day",
            "observed_day",
            "max_identity_error",
        ]);
        t.push(vec![
            num(report.lambda),
            num(report.epsilon),
            num(report.initial_difference),
            report.convergence_day.to_string(),
            report.observed_day.map_or_else(String::new, |d| d.to_string()),
            format!("{:e}", report.max_identity_error),
        ]);
        return Ok(t);
    }
    let mut t = Table::new(&["day", "from_a", "from_b", "difference", "closed_form", "converged"]);
    for s in &report.trace {
        t.push(vec![
            s.day.to_string(),
            num(s.from_a),
            num(s.from_b),
            num(s.difference),
            num(s.closed_form),
            (s.difference.abs() < epsilon).to_string(),
        ]);
    }
    Ok(t)
}

fn plan(a: &PlanArgs, cfg: &RunConfig) -> Result<Table> {
    let couplings: &[Coupling] = match a.coupling {
        CouplingArg::Coupled => &[Coupling::Coupled],
        CouplingArg::Uncoupled => &[Coupling::Uncoupled],
        CouplingArg::Both => &[Coupling::Coupled, Coupling::Uncoupled],
    };
    let mut t = Table::new(&["coupling", "max_acute_load", "achieved_ratio", "diagnostic"]);
    for &c in couplings {
        let mut req = PlanRequest::new(a.prior.clone(), a.ratio.unwrap_or(cfg.max_acceptable_ratio), c);
        req.chronic_weeks = a.chronic_weeks;
        let res = max_safe_acute(&req)?;
        let bound = match res.max_acute_load {
            PlanBound::Finite(v) => num(v),
            PlanBound::Unbounded => "unbounded".into(),
            PlanBound::Undefined => table::UNDEFINED.into(),
        };
        let name = match c {
            Coupling::Coupled => "coupled",
            Coupling::Uncoupled => "uncoupled",
        };
        t.push(vec![
            name.into(),
            bound,
            table::ratio(res.achieved_ratio_check),
            res.diagnostic.unwrap_or_default(),
        ]);
    }
    Ok(t)
}

const BIAS_COLUMNS: [&str; 9] = [
    "strategy",
    "n_injured",
    "n_uninjured",
    "mean_injured",
    "mean_uninjured",
    "difference",
    "se_difference",
    "z",
    "gap_reduction",
];

fn bias_row(name: &str, injured: Option<Stratum>, uninjured: Option<Stratum>, baseline: Option<f64>) -> Vec<String> {
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    let diff = injured.zip(uninjured).map(|(a, b)| a.mean - b.mean);
    let se = injured
        .zip(uninjured)
        .map(|(a, b)| (a.se.powi(2) + b.se.powi(2)).sqrt());
    let z = diff.zip(se).filter(|(_, s)| *s > 0.0).map(|(d, s)| d / s);
    let reduction = diff
        .zip(baseline)
        .filter(|(_, b)| *b != 0.0)
        .map(|(d, b)| 1.0 - d.abs() / b.abs());
    vec![
        name.into(),
        injured.map_or(0, |s| s.n).to_string(),
        uninjured.map_or(0, |s| s.n).to_string(),
        opt(injured.map(|s| s.mean)),
        opt(uninjured.map(|s| s.mean)),
        opt(diff),
        opt(se),
        opt(z),
        opt(reduction),
    ]
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig) -> Result<Table> {
    let mut spec = cfg.cohort_spec();
    if let Some(n) = a.athletes {
        spec.n_athletes = n;
    }
    if let Some(w) = a.weeks {
        spec.horizon_weeks = w;
    }
    if let Some(p) = a.hazard {
        spec.hazard = Hazard::Constant { p };
    }
    let exec = if a.parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let outcomes = simulate_cohort_with(&spec, exec)?;
    let analysis = cfg.analysis;

    let mut t = Table::new(&BIAS_COLUMNS);
    let raw: BiasReport = raw_exposures(&outcomes, &analysis).summary();
    let baseline = raw.difference;
    t.push(bias_row("raw", raw.injured, raw.uninjured, None));
    for m in [
        Mitigation::SubsequentWeek,
        Mitigation::TwoWeekAcute,
        Mitigation::daily_default(),
        Mitigation::ProportionalCensoring,
        Mitigation::PlannedProxy,
    ] {
        let r = apply_mitigation(&outcomes, m, &analysis)?.summary();
        t.push(bias_row(m.name(), r.injured, r.uninjured, baseline));
    }

    let ncc = build_nested_case_control(&outcomes, Matcher::SameSchedule, &analysis)?;
    let cases = Stratum::from_points(ncc.pairs.iter().map(|p| &p.case_ratio));
    let controls = Stratum::from_points(ncc.pairs.iter().map(|p| &p.control_ratio));
    t.push(bias_row("nested_case_control", cases, controls, baseline));

    let cx = build_case_crossover(&outcomes, &[-1, -2], &analysis)?;
    let cases = Stratum::from_points(
        cx.records
            .iter()
            .filter(|r| !r.controls.is_empty())
            .map(|r| &r.case_ratio),
    );
    let controls = Stratum::from_points(cx.records.iter().flat_map(|r| r.controls.iter().map(|c| &c.ratio)));
    t.push(bias_row("case_crossover", cases, controls, baseline));
    Ok(t)
}

fn zones(a: &ZonesArgs, cfg: &RunConfig) -> Result<Table> {
    let method = a.method.map_or_else(|| cfg.method.clone(), MethodArg::spec);
    let clamp = a.clamp.then(Clamp::default);
    let mut t = Table::new(&["athlete_id", "date", "ratio", "labeled_value", "clamped", "zone"]);
    for s in series_for(&Some(a.input.clone()), &None, false)? {
        let d = discretize_after(&compute_series(&s, &method)?, &cfg.zones, clamp);
        for p in d.points {
            t.push(vec![
                s.athlete_id().to_string(),
                p.at.to_string(),
                table::ratio(p.ratio),
                table::ratio(p.labeled_value),
                p.clamped.to_string(),
                p.label,
            ]);
        }
    }
    Ok(t)
}

/// Reads `exposure,injured[,covariate...]` rows. Covariate levels are the
/// distinct values seen in the file.
fn read_events(path: &Path) -> Result<(Vec<String>, Vec<EventRecord>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    if headers.get(0) != Some("exposure") || headers.get(1) != Some("injured") {
        return Err(Error::Parse {
            line: 1,
            reason: "header must start with `exposure,injured`".into(),
        });
    }
    let covariates: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut events = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let injured = match &rec[1] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    reason: format!("injured must be 0 or 1, got `{other}`"),
                })
            }
        };
        events.push(EventRecord {
            exposure: rec[0].to_string(),
            injured,
            covariates: rec.iter().skip(2).map(str::to_string).collect(),
        });
    }
    Ok((covariates, events))
}

fn sparse(a: &SparseArgs, cfg: &RunConfig) -> Result<Table> {
    let (names, events) = read_events(&a.events)?;
    let exposure_levels = if a.levels.is_empty() {
        cfg.zones.zones.iter().map(|z| z.label.clone()).collect()
    } else {
        a.levels.clone()
    };
    let mut seen: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for e in &events {
        for (i, v) in e.covariates.iter().enumerate() {
            seen.entry(i).or_default().insert(v.clone());
        }
    }
    let covariates = names
        .iter()
        .enumerate()
        .map(|(i, name)| Covariate {
            name: name.clone(),
            levels: seen.remove(&i).unwrap_or_default().into_iter().collect(),
        })
        .collect();
    let required = a.required.unwrap_or(cfg.events_per_cell);
    let audit = sparse_audit(
        &events,
        &AuditDesign {
            exposure_levels,
            covariates,
        },
        required,
    )?;

    let mut t = Table::new(&["covariates", "exposure", "events", "required", "pass"]);
    for c in &audit.cells {
        t.push(vec![
            c.covariates.join("|"),
            c.exposure.clone(),
            c.events.to_string(),
            required.to_string(),
            c.pass.to_string(),
        ]);
    }
    t.push(vec![
        "overall".into(),
        String::new(),
        audit.total_events.to_string(),
        required.to_string(),
        audit.pass.to_string(),
    ]);
    Ok(t)
}

fn figure(f: Figure, cfg: &RunConfig) -> Result<Table> {
    match f {
        Figure::Fig2 => {
            let mut t = Table::new(&["profile", "method", "acute", "chronic", "ratio"]);
            for r in figures::same_ratio_rows()? {
                for p in [r.rolling, r.ewma] {
                    t.push(vec![
                        r.profile.clone(),
                        p.method.as_str().into(),
                        num(p.acute),
                        num(p.chronic),
                        table::ratio(p.ratio),
                    ]);
                }
            }
            Ok(t)
        }
        Figure::Fig3 => {
            let mut t = Table::new(&["n", "lambda", "day", "weight"]);
            for p in figures::weight_curves(&[7, 28], 28)? {
                t.push(vec![p.n.to_string(), num(p.lambda), p.day.to_string(), num(p.weight)]);
            }
            Ok(t)
        }
        Figure::Fig4 => {
            let s = figures::initial_value_scenario(3, cfg.convergence_epsilon)?;
            let mut t = Table::new(&["date", "day", "load", "ratio_first_load", "ratio_zero", "difference"]);
            for (i, (a, b)) in s.from_first_load.iter().zip(&s.from_zero).enumerate() {
                let diff = a.ratio.value().zip(b.ratio.value()).map(|(x, y)| x - y);
                t.push(vec![
                    a.at.to_string(),
                    i.to_string(),
                    num(s.profile.days()[i].load),
                    table::ratio(a.ratio),
                    table::ratio(b.ratio),
                    diff.map_or_else(|| table::UNDEFINED.to_string(), num),
                ]);
            }
            Ok(t)
        }
    }
}

fn serve(bind: &str) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    eprintln!("listening on {bind}");
    rt.block_on(service::serve(bind))?;
    Ok(())
}
