//! Command-line front end: `broodsim <subcommand> [flags]`.
//!
//! Exit codes: 0 success, 1 usage, 2 domain or precondition failure, 3 I/O.

mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::abm::{AgentType, ModelState, PerType, PopulationCounts};
use crate::analysis::{
    abm_vector_field, analytic_field, convergence_study, ess_search, estimate_payoffs_mc, EssSearchConfig, FieldSample,
};
use crate::dynamics::FixedPointReport;
use crate::model::{expected_payoffs, nash_equilibrium, GameParams, SimplexPoint};
use crate::{Error, Params, Point};

pub use output::{fmt_sig, Cell, Table};
use output::{json_num, json_opt, json_text, printable_shares};

#[derive(Debug, Parser)]
#[command(name = "broodsim", version, about = "Brood-parasitism game: equilibria, replicator dynamics and agent-based simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interior Nash equilibrium and its common payoff.
    Ne(NeArgs),
    /// Closed-form expected payoffs at one population state.
    Payoffs(PayoffsArgs),
    /// Replicator and/or agent-based vector field on the simplex lattice.
    Field(FieldArgs),
    /// Generational agent-based run.
    Simulate(SimulateArgs),
    /// Monte Carlo payoff estimate against the closed form.
    Estimate(EstimateArgs),
    /// Monte Carlo error over an increasing replicate schedule.
    Converge(ConvergeArgs),
    /// Search for evolutionarily stable states by lattice refinement.
    Ess(EssArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Abm,
    Analytic,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Reward for a hatched egg.
    #[arg(long, allow_negative_numbers = true)]
    pub h: f64,
    /// Cost of sitting on a nest.
    #[arg(long, allow_negative_numbers = true)]
    pub e: f64,
    /// Cost of identifying one's own egg.
    #[arg(long, allow_negative_numbers = true)]
    pub i: f64,
}

impl GameArgs {
    fn params(&self) -> Result<Params, CliError> {
        Ok(GameParams::new(self.h, self.e, self.i)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Upper bound on worker threads; never changes the output.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct NeArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PayoffsArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Population state as `p_s,p_i,p_c`.
    #[arg(long, value_parser = parse_point)]
    pub point: [f64; 3],
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub source: SourceArg,
    /// Lattice order m: points (a/m, b/m, c/m).
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_GRID_ORDER)]
    pub spacing: usize,
    #[arg(long, default_value_t = 300)]
    pub n: u64,
    #[arg(long, default_value_t = crate::analysis::DEFAULT_FIELD_REPS)]
    pub reps: u64,
    #[arg(long, required_if_eq_any = [("source", "abm"), ("source", "both")])]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 300)]
    pub n: u64,
    #[arg(long)]
    pub gens: u64,
    /// Initial state as `p_s,p_i,p_c` [default: centroid].
    #[arg(long, value_parser = parse_point)]
    pub point: Option<[f64; 3]>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// State as `p_s,p_i,p_c` [default: interior equilibrium].
    #[arg(long, value_parser = parse_point)]
    pub point: Option<[f64; 3]>,
    #[arg(long, default_value_t = 300)]
    pub n: u64,
    #[arg(long, default_value_t = 150)]
    pub reps: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// State as `p_s,p_i,p_c` [default: interior equilibrium].
    #[arg(long, value_parser = parse_point)]
    pub point: Option<[f64; 3]>,
    #[arg(long, default_value_t = 400)]
    pub n: u64,
    /// Strictly increasing replicate counts.
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600,6400")]
    pub reps: Vec<u64>,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EssArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Initial lattice order.
    #[arg(long, default_value_t = 10)]
    pub spacing: usize,
    /// Final lattice order.
    #[arg(long, default_value_t = 80)]
    pub target: usize,
    /// Population per level; the last entry repeats.
    #[arg(long, value_delimiter = ',', default_value = "100,300,1000")]
    pub n: Vec<u64>,
    /// Replicates per lattice point per level; the last entry repeats.
    #[arg(long, value_delimiter = ',', default_value = "50,150,500")]
    pub reps: Vec<u64>,
    /// Generations per exploratory run.
    #[arg(long, default_value_t = 20)]
    pub gens: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated shares, got `{s}`"));
    }
    let mut p = [0.0; 3];
    for (slot, part) in p.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("`{part}` is not a number"))?;
    }
    Ok(p)
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("cannot write {target}: {source}")]
    Io {
        target: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) => 2,
            CliError::Io { .. } | CliError::Pool(_) => 3,
        }
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Runs one parsed invocation, writing to `--out` or standard output.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let output = cli.command.output();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(output.workers as usize)
        .build()?;
    let text = pool.install(|| render(&cli.command))?;
    emit(&text, output.out.as_ref())
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Ne(a) => &a.output,
            Command::Payoffs(a) => &a.output,
            Command::Field(a) => &a.output,
            Command::Simulate(a) => &a.output,
            Command::Estimate(a) => &a.output,
            Command::Converge(a) => &a.output,
            Command::Ess(a) => &a.output,
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            target: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    target: "standard output".to_string(),
                    source,
                })
        }
    }
}

/// Produces the full output text for a command.
pub fn render(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Ne(a) => ne(a),
        Command::Payoffs(a) => payoffs(a),
        Command::Field(a) => field(a),
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Converge(a) => converge(a),
        Command::Ess(a) => ess(a),
    }
}

fn tabular(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => json_text(&table.to_json_rows()),
    }
}

fn record(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => json_text(&table.to_json_record()),
    }
}

fn point_cells(p: &Point) -> Vec<Cell> {
    printable_shares(p.as_array()).iter().map(|&x| Cell::from(x)).collect()
}

fn per_type_cells(v: &PerType<Option<f64>>) -> Vec<Cell> {
    AgentType::ALL.iter().map(|&t| Cell::from(v[t])).collect()
}

fn point_or_equilibrium(point: Option<[f64; 3]>, params: &Params) -> Result<Point, CliError> {
    Ok(match point {
        Some(p) => SimplexPoint::from_array(p)?,
        None => nash_equilibrium(params)?,
    })
}

fn ne(a: &NeArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let ne = nash_equilibrium(&params)?;
    let mut table = Table::new(&["p_s", "p_i", "p_c", "payoff"]);
    let mut row = point_cells(&ne);
    row.push(params.identifier_payoff().into());
    table.push(row);
    Ok(record(&table, a.output.format.unwrap_or(Format::Json)))
}

fn payoffs(a: &PayoffsArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let point = SimplexPoint::from_array(a.point)?;
    let u = expected_payoffs(&point, &params);
    let mut table = Table::new(&["p_s", "p_i", "p_c", "u_s", "u_i", "u_c"]);
    let mut row = point_cells(&point);
    row.extend([u.sitter.to_f64().into(), u.identifier.into(), u.cheater.into()]);
    table.push(row);
    Ok(record(&table, a.output.format.unwrap_or(Format::Csv)))
}

const FIELD_COLUMNS: [&str; 8] = ["p_s", "p_i", "p_c", "v_s", "v_i", "v_c", "source", "reps"];

fn field_row(sample: &FieldSample<f64>) -> Vec<Cell> {
    let mut row = point_cells(&sample.point);
    row.extend(sample.displacement.as_array().iter().map(|&x| Cell::from(x)));
    row.push(sample.source.as_str().into());
    row.push(sample.reps.into());
    row
}

fn field(a: &FieldArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let analytic = match a.source {
        SourceArg::Analytic | SourceArg::Both => Some(analytic_field(&params, a.spacing)?),
        SourceArg::Abm => None,
    };
    let abm = match a.source {
        SourceArg::Abm | SourceArg::Both => {
            let seed = a.seed.ok_or_else(|| CliError::Usage("--seed is required for agent-based fields".into()))?;
            Some(abm_vector_field(&params, a.n, a.reps, a.spacing, a.mu, seed)?)
        }
        SourceArg::Analytic => None,
    };
    let points = analytic.as_ref().or(abm.as_ref()).map_or(0, Vec::len);
    let mut table = Table::new(&FIELD_COLUMNS);
    for j in 0..points {
        for samples in [&analytic, &abm].into_iter().flatten() {
            table.push(field_row(&samples[j]));
        }
    }
    Ok(tabular(&table, a.output.format.unwrap_or(Format::Csv)))
}

fn simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let start = match a.point {
        Some(p) => SimplexPoint::from_array(p)?,
        None => SimplexPoint::from_array([1.0 / 3.0; 3])?,
    };
    let counts = PopulationCounts::from_point(&start, a.n)?;
    let model = ModelState::new(counts, params, a.mu, a.seed)?;
    let (_, records) = model.run_parallel(a.gens, a.output.workers as usize);
    let mut table = Table::new(&["gen", "p_s", "p_i", "p_c", "mean_u_s", "mean_u_i", "mean_u_c"]);
    for rec in &records {
        let mut row = vec![Cell::from(rec.generation)];
        row.extend(point_cells(&rec.proportions));
        row.extend(per_type_cells(&rec.report.mean_utility));
        table.push(row);
    }
    Ok(tabular(&table, a.output.format.unwrap_or(Format::Csv)))
}

/// `(mean - reference) / stderr`; zero when the estimate is exact.
fn z_score(mean: f64, stderr: f64, reference: f64) -> Option<f64> {
    let gap = mean - reference;
    if stderr > 0.0 {
        Some(gap / stderr)
    } else if gap.abs() <= 1e-9 * reference.abs().max(1.0) {
        Some(0.0)
    } else {
        None
    }
}

fn estimate(a: &EstimateArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let point = point_or_equilibrium(a.point, &params)?;
    let est = estimate_payoffs_mc(&point, &params, a.n, a.reps, a.seed)?;
    let analytic = est.analytic(&params);
    let reference = PerType::new(analytic.sitter.to_f64(), analytic.identifier, analytic.cheater);
    let mut table = Table::new(&["type", "count", "reps", "mean", "stderr", "analytic", "z"]);
    for t in AgentType::ALL {
        let (Some(mean), Some(se)) = (est.mean[t], est.stderr[t]) else {
            continue;
        };
        table.push(vec![
            t.name().into(),
            est.counts.get(t).into(),
            est.reps.into(),
            mean.into(),
            se.into(),
            reference[t].into(),
            z_score(mean, se, reference[t]).into(),
        ]);
    }
    Ok(tabular(&table, a.output.format.unwrap_or(Format::Csv)))
}

fn converge(a: &ConvergeArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let point = point_or_equilibrium(a.point, &params)?;
    let study = convergence_study(&point, &params, a.n, &a.reps, a.seed)?;
    let mut table = Table::new(&[
        "reps", "mean_s", "mean_i", "mean_c", "abs_err_s", "abs_err_i", "abs_err_c", "stderr_s", "stderr_i", "stderr_c",
    ]);
    for row in &study.rows {
        let mut cells = vec![Cell::from(row.reps)];
        cells.extend(per_type_cells(&row.mean));
        cells.extend(per_type_cells(&row.abs_error));
        cells.extend(per_type_cells(&row.stderr));
        table.push(cells);
    }
    match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut slope = vec![Cell::from("slope")];
            slope.extend(std::iter::repeat_n(Cell::Missing, 6));
            slope.extend(per_type_cells(&study.stderr_slope));
            table.push(slope);
            Ok(table.to_csv())
        }
        Format::Json => {
            let analytic = study.analytic.finite()?;
            let value = json!({
                "point": point_json(&study.point),
                "n": a.n,
                "analytic": per_type_json(&PerType::new(Some(analytic[0]), Some(analytic[1]), Some(analytic[2]))),
                "rows": table.to_json_rows(),
                "stderr_slope": per_type_json(&study.stderr_slope),
            });
            Ok(json_text(&value))
        }
    }
}

fn point_json(p: &Point) -> Value {
    let [s, i, c] = printable_shares(p.as_array());
    json!({ "p_s": json_num(s), "p_i": json_num(i), "p_c": json_num(c) })
}

fn per_type_json(v: &PerType<Option<f64>>) -> Value {
    json!({ "s": json_opt(v.sitter), "i": json_opt(v.identifier), "c": json_opt(v.cheater) })
}

fn candidate_json(c: &FixedPointReport<f64>) -> Value {
    json!({
        "location": point_json(&c.location),
        "interior": c.location.is_interior(),
        "residual": json_opt(c.residual),
        "eigenvalues": c.eigenvalues.iter().map(|z| json!({ "re": json_num(z.re), "im": json_num(z.im) })).collect::<Vec<_>>(),
        "classification": c.classification.as_str(),
        "ess": c.ess_flag,
    })
}

fn ess(a: &EssArgs) -> Result<String, CliError> {
    let params = a.game.params()?;
    let config = EssSearchConfig {
        initial_order: a.spacing,
        populations: a.n.clone(),
        replicates: a.reps.clone(),
        target_order: a.target,
        trajectory_length: a.gens,
        ..EssSearchConfig::default()
    };
    let result = ess_search(&params, &config, a.seed)?;
    match a.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let trace: Vec<Value> = result
                .trace
                .iter()
                .map(|l| {
                    json!({
                        "level": l.level,
                        "order": l.order,
                        "cell_size": json_num(l.cell_size),
                        "n": l.population,
                        "reps": l.replicates,
                        "points_evaluated": l.points_evaluated,
                        "regions": l.regions.iter().map(point_json).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let value = json!({
                "params": { "h": json_num(a.game.h), "e": json_num(a.game.e), "i": json_num(a.game.i) },
                "seed": a.seed,
                "ess_found": result.ess_found,
                "candidates": result.candidates.iter().map(candidate_json).collect::<Vec<_>>(),
                "trace": trace,
            });
            Ok(json_text(&value))
        }
        Format::Csv => {
            let mut table = Table::new(&[
                "p_s", "p_i", "p_c", "residual", "re_1", "im_1", "re_2", "im_2", "classification", "ess",
            ]);
            for c in &result.candidates {
                let mut row = point_cells(&c.location);
                row.push(c.residual.into());
                for z in &c.eigenvalues {
                    row.extend([Cell::from(z.re), Cell::from(z.im)]);
                }
                row.push(c.classification.as_str().into());
                row.push(if c.ess_flag { "true" } else { "false" }.into());
                table.push(row);
            }
            Ok(table.to_csv())
        }
    }
}
