//! Scenario-file driven command-line frontend.
//!
//! Commands are plain functions returning a [`CommandOutput`] (exit code plus
//! captured stdout and stderr) so they can be tested without spawning a
//! process. Exit codes: 0 success, 1 parse error, 2 usage or validation
//! error, 3 self-test or consistency failure, 4 integration failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atom::{analytic_preparation_probability, analytic_retrodictive_state, demo_scenario};
use crate::dynamics::{
    evolve_pom_backward, evolve_predictive, evolve_retrodictive, DynamicsError, Trajectory,
};
use crate::inference::{
    bayes_from_predictive, collapse_time_sweep, normalize_to_retrodictive, predict_outcome_probs,
    retrodict_preparation_probs, InferenceError, ProbabilityTable,
};
use crate::model::{
    validate_scenario, DensityOperator, IntegratorConfig, ModelError, RawEnsembleEntry,
    RawPomElement, RawScenario, Scenario,
};
use crate::operator::{frobenius_distance, Operator, OperatorError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_INTEGRATION: i32 = 4;

/// Maximum disagreement tolerated between the retrodictive and Bayes routes.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Maximum collapse-time spread accepted by `sweep`.
pub const SWEEP_TOL: f64 = 1e-6;
/// Pass threshold for `demo-atom`.
pub const DEMO_TOL: f64 = 1e-6;

/// `[re, im]`
pub type ComplexPair = [f64; 2];
/// Rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<ComplexPair>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFileEntry {
    pub label: String,
    pub prior: f64,
    pub state: MatrixRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PomFileEntry {
    pub label: String,
    pub element: MatrixRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorFile {
    #[serde(default = "default_steps")]
    pub steps_per_unit_time: u32,
    #[serde(default = "default_record_every")]
    pub record_every: u32,
}

fn default_steps() -> u32 {
    IntegratorConfig::default().steps_per_unit_time
}

fn default_record_every() -> u32 {
    IntegratorConfig::default().record_every
}

impl Default for IntegratorFile {
    fn default() -> Self {
        Self {
            steps_per_unit_time: default_steps(),
            record_every: default_record_every(),
        }
    }
}

/// On-disk JSON scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub hamiltonian: MatrixRows,
    #[serde(default)]
    pub jump_ops: Vec<MatrixRows>,
    pub ensemble: Vec<EnsembleFileEntry>,
    pub pom: Vec<PomFileEntry>,
    pub t_p: f64,
    pub t_m: f64,
    #[serde(default)]
    pub integrator: IntegratorFile,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid scenario:\n{0}")]
    Validation(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("integration failure: {0}")]
    Integration(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Usage(_) | CliError::Validation(_) => EXIT_USAGE,
            CliError::Consistency(_) => EXIT_CONSISTENCY,
            CliError::Integration(_) => EXIT_INTEGRATION,
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Integration(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Dynamics(_)
            | InferenceError::Unnormalized(_)
            | InferenceError::NegativeProbability { .. } => CliError::Integration(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn matrix_to_operator(what: &str, rows: &MatrixRows) -> Result<Operator, CliError> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    Operator::from_rows(&rows).map_err(|e: OperatorError| CliError::Parse(format!("{what}: {e}")))
}

fn operator_to_matrix(op: &Operator) -> MatrixRows {
    op.rows()
        .into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

impl ScenarioFile {
    pub fn to_raw(&self) -> Result<RawScenario, CliError> {
        let jump_ops = self
            .jump_ops
            .iter()
            .enumerate()
            .map(|(q, m)| matrix_to_operator(&format!("jump_ops[{q}]"), m))
            .collect::<Result<Vec<_>, _>>()?;
        let ensemble = self
            .ensemble
            .iter()
            .enumerate()
            .map(|(k, e)| {
                Ok(RawEnsembleEntry {
                    label: e.label.clone(),
                    prior: e.prior,
                    state: matrix_to_operator(&format!("ensemble[{k}].state"), &e.state)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let pom = self
            .pom
            .iter()
            .enumerate()
            .map(|(k, p)| {
                Ok(RawPomElement {
                    label: p.label.clone(),
                    element: matrix_to_operator(&format!("pom[{k}].element"), &p.element)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(RawScenario {
            dim: self.dim,
            hamiltonian: matrix_to_operator("hamiltonian", &self.hamiltonian)?,
            jump_ops,
            ensemble,
            pom,
            t_p: self.t_p,
            t_m: self.t_m,
            integrator: IntegratorConfig {
                steps_per_unit_time: self.integrator.steps_per_unit_time,
                record_every: self.integrator.record_every,
            },
        })
    }

    pub fn from_raw(raw: &RawScenario) -> Self {
        Self {
            dim: raw.dim,
            hamiltonian: operator_to_matrix(&raw.hamiltonian),
            jump_ops: raw.jump_ops.iter().map(operator_to_matrix).collect(),
            ensemble: raw
                .ensemble
                .iter()
                .map(|e| EnsembleFileEntry {
                    label: e.label.clone(),
                    prior: e.prior,
                    state: operator_to_matrix(&e.state),
                })
                .collect(),
            pom: raw
                .pom
                .iter()
                .map(|p| PomFileEntry {
                    label: p.label.clone(),
                    element: operator_to_matrix(&p.element),
                })
                .collect(),
            t_p: raw.t_p,
            t_m: raw.t_m,
            integrator: IntegratorFile {
                steps_per_unit_time: raw.integrator.steps_per_unit_time,
                record_every: raw.integrator.record_every,
            },
        }
    }
}

/// Parses scenario JSON; errors carry line and column.
pub fn parse_scenario(text: &str) -> Result<RawScenario, CliError> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    file.to_raw()
}

/// Pretty JSON for a scenario. Floats are written in shortest round-trip
/// form, so re-parsing reproduces every entry exactly.
pub fn scenario_to_json(raw: &RawScenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_raw(raw)).expect("scenario serializes")
}

pub fn load_raw_scenario(path: &Path) -> Result<RawScenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let raw = load_raw_scenario(path)?;
    let report = validate_scenario(&raw);
    if !report.is_empty() {
        return Err(CliError::Validation(report.to_string()));
    }
    Ok(raw.into_scenario()?)
}

/// Decimal text with 16 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

fn entry_name(prefix: &str, dim: usize, r: usize, c: usize) -> String {
    if dim <= 10 {
        format!("{prefix}_{r}{c}")
    } else {
        format!("{prefix}_{r}_{c}")
    }
}

/// CSV with a `# ...` comment line, a header `time,re_00,im_00,...` and
/// one row per recorded state.
pub fn trajectory_to_csv(traj: &Trajectory, comment: &str) -> String {
    let dim = traj.states.first().map_or(0, Operator::dim);
    let mut out = String::new();
    writeln!(out, "# {comment}").unwrap();
    out.push_str("time");
    for r in 0..dim {
        for c in 0..dim {
            write!(
                out,
                ",{},{}",
                entry_name("re", dim, r, c),
                entry_name("im", dim, r, c)
            )
            .unwrap();
        }
    }
    out.push('\n');
    for (t, x) in traj.iter() {
        out.push_str(&fmt_num(t));
        for z in x.as_slice() {
            write!(out, ",{},{}", fmt_num(z.re), fmt_num(z.im)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &CliError) -> Self {
        Self {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

impl From<Result<CommandOutput, CliError>> for CommandOutput {
    fn from(r: Result<CommandOutput, CliError>) -> Self {
        r.unwrap_or_else(|e| CommandOutput::error(&e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvolveMode {
    Predictive,
    PomBackward,
    Retrodictive,
}

#[derive(Debug, Parser)]
#[command(
    name = "retrodict",
    version,
    about = "Retrodictive master-equation solver for open quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file against every invariant.
    Validate { scenario: PathBuf },
    /// Posterior probabilities of each preparation given one outcome.
    Retrodict {
        scenario: PathBuf,
        #[arg(long)]
        outcome: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Outcome probabilities for one preparation.
    Predict {
        scenario: PathBuf,
        #[arg(long)]
        preparation: String,
        /// Pairing time in [t_p, t_m]; defaults to t_m.
        #[arg(long)]
        collapse_time: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Write a recorded trajectory over [t_p, t_m] as CSV.
    Evolve {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: EvolveMode,
        /// Ensemble label (predictive), POM label (backward modes), or an
        /// inline JSON matrix of [re, im] pairs.
        #[arg(long)]
        initial: String,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the prediction at several collapse times between t_p and t_m.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        preparation: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
    },
    /// Compare the decaying-atom example against its closed form.
    DemoAtom {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
}

/// Parses arguments and runs the selected command.
pub fn run<I, T>(args: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Retrodict {
            scenario,
            outcome,
            format,
        } => cmd_retrodict(&scenario, &outcome, format).into(),
        Command::Predict {
            scenario,
            preparation,
            collapse_time,
            format,
        } => cmd_predict(&scenario, &preparation, collapse_time, format).into(),
        Command::Evolve {
            scenario,
            mode,
            initial,
            out,
        } => cmd_evolve(&scenario, mode, &initial, out.as_deref()).into(),
        Command::Sweep {
            scenario,
            preparation,
            outcome,
            points,
        } => cmd_sweep(&scenario, &preparation, &outcome, points as usize).into(),
        Command::DemoAtom { gamma, duration } => cmd_demo_atom(gamma, duration).into(),
    }
}

pub fn cmd_validate(path: &Path) -> CommandOutput {
    let raw = match load_raw_scenario(path) {
        Ok(raw) => raw,
        Err(e) => return CommandOutput::error(&e),
    };
    let report = validate_scenario(&raw);
    if report.is_empty() {
        return CommandOutput::ok("OK\n".into());
    }
    let mut stdout = String::new();
    for v in &report.violations {
        writeln!(stdout, "{v}").unwrap();
    }
    CommandOutput {
        code: EXIT_USAGE,
        stdout,
        stderr: String::new(),
    }
}

fn outcome_index(scenario: &Scenario, label: &str) -> Result<usize, CliError> {
    scenario.pom().index_of(label).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown outcome {label:?}; POM labels are {:?}",
            scenario.pom().labels()
        ))
    })
}

fn preparation_index(scenario: &Scenario, label: &str) -> Result<usize, CliError> {
    scenario.ensemble().index_of(label).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preparation {label:?}; ensemble labels are {:?}",
            scenario.ensemble().labels()
        ))
    })
}

#[derive(Serialize)]
struct RetrodictJson<'a> {
    outcome: &'a str,
    retrodictive: &'a ProbabilityTable,
    bayes: &'a ProbabilityTable,
    max_abs_difference: f64,
}

pub fn cmd_retrodict(
    path: &Path,
    outcome: &str,
    format: OutputFormat,
) -> Result<CommandOutput, CliError> {
    let scenario = load_scenario(path)?;
    let j = outcome_index(&scenario, outcome)?;
    let retro = retrodict_preparation_probs(&scenario, j)?;
    let bayes = bayes_from_predictive(&scenario, j)?;
    let diff = retro.max_abs_diff(&bayes);

    let stdout = match format {
        OutputFormat::Csv => {
            let mut s = String::from("preparation,retrodictive,bayes\n");
            for (k, label) in retro.labels.iter().enumerate() {
                writeln!(
                    s,
                    "{label},{},{}",
                    fmt_num(retro.probs[k]),
                    fmt_num(bayes.probs[k])
                )
                .unwrap();
            }
            writeln!(s, "max_abs_difference,{}", fmt_num(diff)).unwrap();
            s
        }
        OutputFormat::Json => {
            let body = RetrodictJson {
                outcome,
                retrodictive: &retro,
                bayes: &bayes,
                max_abs_difference: diff,
            };
            serde_json::to_string_pretty(&body).expect("serializable") + "\n"
        }
    };
    if diff > CROSS_CHECK_TOL {
        return Ok(CommandOutput {
            code: EXIT_CONSISTENCY,
            stdout,
            stderr: format!(
                "error: retrodictive and Bayes posteriors differ by {} (> {})\n",
                fmt_num(diff),
                fmt_num(CROSS_CHECK_TOL)
            ),
        });
    }
    Ok(CommandOutput::ok(stdout))
}

#[derive(Serialize)]
struct PredictJson<'a> {
    preparation: &'a str,
    collapse_time: f64,
    likelihoods: &'a ProbabilityTable,
}

pub fn cmd_predict(
    path: &Path,
    preparation: &str,
    collapse_time: Option<f64>,
    format: OutputFormat,
) -> Result<CommandOutput, CliError> {
    let scenario = load_scenario(path)?;
    let i = preparation_index(&scenario, preparation)?;
    let time = collapse_time.unwrap_or(scenario.t_m());
    let table = predict_outcome_probs(&scenario, i, time)?;
    let stdout = match format {
        OutputFormat::Csv => {
            let mut s = String::from("outcome,probability\n");
            for (label, p) in table.labels.iter().zip(&table.probs) {
                writeln!(s, "{label},{}", fmt_num(*p)).unwrap();
            }
            s
        }
        OutputFormat::Json => {
            let body = PredictJson {
                preparation,
                collapse_time: time,
                likelihoods: &table,
            };
            serde_json::to_string_pretty(&body).expect("serializable") + "\n"
        }
    };
    Ok(CommandOutput::ok(stdout))
}

fn resolve_initial(
    scenario: &Scenario,
    mode: EvolveMode,
    initial: &str,
) -> Result<Operator, CliError> {
    let trimmed = initial.trim_start();
    if trimmed.starts_with('[') {
        let rows: MatrixRows = serde_json::from_str(trimmed)
            .map_err(|e| CliError::Usage(format!("inline matrix: {e}")))?;
        return matrix_to_operator("inline matrix", &rows)
            .map_err(|e| CliError::Usage(e.to_string()));
    }
    match mode {
        EvolveMode::Predictive => {
            let i = preparation_index(scenario, initial)?;
            Ok(scenario.ensemble().entries()[i].state.as_operator().clone())
        }
        EvolveMode::PomBackward | EvolveMode::Retrodictive => {
            let j = outcome_index(scenario, initial)?;
            Ok(scenario.pom().elements()[j].clone())
        }
    }
}

pub fn cmd_evolve(
    path: &Path,
    mode: EvolveMode,
    initial: &str,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let scenario = load_scenario(path)?;
    let x0 = resolve_initial(&scenario, mode, initial)?;
    if x0.dim() != scenario.model().dim() {
        return Err(CliError::Usage(format!(
            "initial operator has dimension {}, scenario has {}",
            x0.dim(),
            scenario.model().dim()
        )));
    }
    let duration = scenario.duration();
    let config = scenario.integrator();
    let (traj, comment) = match mode {
        EvolveMode::Predictive => {
            let rho = DensityOperator::new(x0)
                .map_err(|e| CliError::Usage(format!("initial state: {e}")))?;
            (
                evolve_predictive(scenario.model(), &rho, duration, config)?,
                "mode=predictive; time column is t - t_p",
            )
        }
        EvolveMode::PomBackward => (
            evolve_pom_backward(scenario.model(), &x0, duration, config).map_err(|e| match e {
                DynamicsError::InvalidElement(_) => CliError::Usage(e.to_string()),
                other => other.into(),
            })?,
            "mode=pom-backward; time column is tau = t_m - t",
        ),
        EvolveMode::Retrodictive => {
            let rho = normalize_to_retrodictive(&x0)?;
            (
                evolve_retrodictive(scenario.model(), &rho, duration, config)?,
                "mode=retrodictive; time column is tau = t_m - t",
            )
        }
    };
    let csv = trajectory_to_csv(&traj, comment);
    match out {
        Some(p) => {
            fs::write(p, csv)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
            Ok(CommandOutput::ok(format!(
                "wrote {} rows to {}\n",
                traj.len(),
                p.display()
            )))
        }
        None => Ok(CommandOutput::ok(csv)),
    }
}

pub fn cmd_sweep(
    path: &Path,
    preparation: &str,
    outcome: &str,
    points: usize,
) -> Result<CommandOutput, CliError> {
    if points < 2 {
        return Err(CliError::Usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    let scenario = load_scenario(path)?;
    let i = preparation_index(&scenario, preparation)?;
    let j = outcome_index(&scenario, outcome)?;
    let sweep = collapse_time_sweep(&scenario, i, j, points)?;
    let mut stdout = String::from("collapse_time,probability\n");
    for (t, p) in &sweep.points {
        writeln!(stdout, "{},{}", fmt_num(*t), fmt_num(*p)).unwrap();
    }
    writeln!(stdout, "max_spread,{}", fmt_num(sweep.spread)).unwrap();
    if sweep.spread > SWEEP_TOL {
        return Ok(CommandOutput {
            code: EXIT_CONSISTENCY,
            stdout,
            stderr: format!(
                "error: collapse-time spread {} exceeds {}\n",
                fmt_num(sweep.spread),
                fmt_num(SWEEP_TOL)
            ),
        });
    }
    Ok(CommandOutput::ok(stdout))
}

pub fn cmd_demo_atom(gamma: f64, duration: f64) -> Result<CommandOutput, CliError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(CliError::Usage(format!(
            "--gamma must be positive, got {gamma}"
        )));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(CliError::Usage(format!(
            "--duration must be non-negative, got {duration}"
        )));
    }
    let scenario = demo_scenario(gamma, duration)?;
    let posterior = retrodict_preparation_probs(&scenario, 0)?;
    let expect_plus = analytic_preparation_probability(gamma, duration);
    let expect = [expect_plus, 1.0 - expect_plus];
    let posterior_error = posterior
        .probs
        .iter()
        .zip(&expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let retro0 = normalize_to_retrodictive(&scenario.pom().elements()[0])?;
    let traj = evolve_retrodictive(scenario.model(), &retro0, duration, scenario.integrator())?;
    let state_distance = frobenius_distance(
        traj.final_state(),
        analytic_retrodictive_state(gamma, duration).as_operator(),
    )
    .map_err(DynamicsError::from)?;

    let pass = posterior_error <= DEMO_TOL && state_distance <= DEMO_TOL;
    let mut s = String::new();
    writeln!(s, "gamma,{}", fmt_num(gamma)).unwrap();
    writeln!(s, "duration,{}", fmt_num(duration)).unwrap();
    for (k, label) in posterior.labels.iter().enumerate() {
        writeln!(
            s,
            "posterior_numerical,{label},{}",
            fmt_num(posterior.probs[k])
        )
        .unwrap();
        writeln!(s, "posterior_analytic,{label},{}", fmt_num(expect[k])).unwrap();
    }
    writeln!(s, "posterior_max_error,{}", fmt_num(posterior_error)).unwrap();
    writeln!(
        s,
        "retrodictive_state_frobenius_distance,{}",
        fmt_num(state_distance)
    )
    .unwrap();
    writeln!(s, "result,{}", if pass { "PASS" } else { "FAIL" }).unwrap();
    Ok(CommandOutput {
        code: if pass { EXIT_OK } else { EXIT_CONSISTENCY },
        stdout: s,
        stderr: String::new(),
    })
}
