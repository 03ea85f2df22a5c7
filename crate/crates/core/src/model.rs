//! Validated descriptions of the physical problem.
//!
//! Every type here is checked at construction: a [`LindbladModel`],
//! [`DensityOperator`], [`Pom`], [`PreparationEnsemble`] or [`Scenario`] that
//! exists satisfies its invariants. [`RawScenario`] is the unchecked form read
//! from files; [`validate_scenario`] reports every problem with it at once.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{hermitian_deviation, min_eigenvalue, trace, Operator, OperatorError};

/// Relative tolerance on `max|A − A†|` for Hamiltonians, states and POM elements.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as round-off.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Entrywise tolerance on `Σ_j Π_j = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Allowed deviation of the prior sum from one.
pub const PRIOR_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what} has non-finite entries")]
    NonFinite { what: String },
    #[error("{what} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { what: String, deviation: f64 },
    #[error("{what} has trace {trace}, expected 1")]
    Trace { what: String, trace: f64 },
    #[error("{what} is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { what: String, min_eigenvalue: f64 },
    #[error("decay rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("invalid scenario:\n{0}")]
    Invalid(ValidationReport),
    #[error("{0}")]
    Structure(String),
}

/// Hamiltonian plus jump operators of a Markovian master equation, `ħ = 1`.
///
/// Rates live inside the jump operators. With the factor 2 on the sandwich
/// term of the generator, a channel that decays at rate `γ` uses
/// `A = sqrt(γ/2)·L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: Operator,
    jump_ops: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, jump_ops: Vec<Operator>) -> Result<Self, ModelError> {
        let dim = hamiltonian.dim();
        check_finite("hamiltonian", &hamiltonian)?;
        let deviation = hermitian_deviation(&hamiltonian);
        if deviation > HERMITICITY_TOL * hamiltonian.scale() {
            return Err(ModelError::NotHermitian {
                what: "hamiltonian".into(),
                deviation,
            });
        }
        for (q, a) in jump_ops.iter().enumerate() {
            check_dim(&format!("jump operator {q}"), dim, a)?;
            check_finite(&format!("jump operator {q}"), a)?;
        }
        Ok(Self {
            dim,
            hamiltonian,
            jump_ops,
        })
    }

    /// No Hamiltonian, no dissipation.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: Operator::zeros(dim),
            jump_ops: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jump_ops(&self) -> &[Operator] {
        &self.jump_ops
    }
}

/// Unit-trace, positive, Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self, ModelError> {
        check_state("density operator", &op)?;
        Ok(Self(op))
    }

    /// The pure state `|ψ⟩⟨ψ|`; `ket` is normalized first.
    pub fn pure(ket: &[Complex64]) -> Result<Self, ModelError> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(ModelError::Structure(
                "pure state needs a non-zero finite ket".into(),
            ));
        }
        let ket: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Self::new(Operator::projector(&ket))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Operator::identity(dim).scaled_real(1.0 / dim as f64))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl AsRef<Operator> for DensityOperator {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

/// Measurement description: positive elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Pom {
    elements: Vec<Operator>,
    labels: Vec<String>,
}

impl Pom {
    pub fn new(labels: Vec<String>, elements: Vec<Operator>) -> Result<Self, ModelError> {
        let mut report = ValidationReport::default();
        let dim = elements.first().map_or(0, Operator::dim);
        check_pom(&mut report, dim, &labels, &elements);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        Ok(Self { elements, labels })
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEntry {
    pub label: String,
    pub prior: f64,
    pub state: DensityOperator,
}

/// Prior probabilities paired with the candidate prepared states.
///
/// Priors are stored exactly as given; a sum off by more than
/// [`PRIOR_SUM_TOL`] is rejected rather than renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationEnsemble {
    entries: Vec<EnsembleEntry>,
}

impl PreparationEnsemble {
    pub fn new(entries: Vec<EnsembleEntry>) -> Result<Self, ModelError> {
        let mut report = ValidationReport::default();
        let dim = entries.first().map_or(0, |e| e.state.dim());
        let raw: Vec<RawEnsembleEntry> = entries
            .iter()
            .map(|e| RawEnsembleEntry {
                label: e.label.clone(),
                prior: e.prior,
                state: e.state.as_operator().clone(),
            })
            .collect();
        check_ensemble(&mut report, dim, &raw);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.prior).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    pub fn dim(&self) -> usize {
        self.entries[0].state.dim()
    }
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    pub steps_per_unit_time: u32,
    /// Keep every n-th step in the recorded trajectory.
    pub record_every: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_unit_time: 1000,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEnsembleEntry {
    pub label: String,
    pub prior: f64,
    pub state: Operator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPomElement {
    pub label: String,
    pub element: Operator,
}

/// An unchecked scenario, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScenario {
    pub dim: usize,
    pub hamiltonian: Operator,
    pub jump_ops: Vec<Operator>,
    pub ensemble: Vec<RawEnsembleEntry>,
    pub pom: Vec<RawPomElement>,
    pub t_p: f64,
    pub t_m: f64,
    pub integrator: IntegratorConfig,
}

impl RawScenario {
    /// Validates and converts; the error carries the full report.
    pub fn into_scenario(self) -> Result<Scenario, ModelError> {
        let report = validate_scenario(&self);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        let model = LindbladModel::new(self.hamiltonian, self.jump_ops)?;
        let entries = self
            .ensemble
            .into_iter()
            .map(|e| {
                Ok(EnsembleEntry {
                    label: e.label,
                    prior: e.prior,
                    state: DensityOperator::new(e.state)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let ensemble = PreparationEnsemble::new(entries)?;
        let (labels, elements) = self.pom.into_iter().map(|p| (p.label, p.element)).unzip();
        let pom = Pom::new(labels, elements)?;
        Ok(Scenario {
            model,
            ensemble,
            pom,
            t_p: self.t_p,
            t_m: self.t_m,
            integrator: self.integrator,
        })
    }
}

/// Model, preparation ensemble, measurement, and the two times, validated together.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    model: LindbladModel,
    ensemble: PreparationEnsemble,
    pom: Pom,
    t_p: f64,
    t_m: f64,
    integrator: IntegratorConfig,
}

impl Scenario {
    pub fn new(
        model: LindbladModel,
        ensemble: PreparationEnsemble,
        pom: Pom,
        t_p: f64,
        t_m: f64,
        integrator: IntegratorConfig,
    ) -> Result<Self, ModelError> {
        let scenario = Self {
            model,
            ensemble,
            pom,
            t_p,
            t_m,
            integrator,
        };
        let report = validate_scenario(&scenario.to_raw());
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }
        Ok(scenario)
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn ensemble(&self) -> &PreparationEnsemble {
        &self.ensemble
    }

    pub fn pom(&self) -> &Pom {
        &self.pom
    }

    pub fn t_p(&self) -> f64 {
        self.t_p
    }

    pub fn t_m(&self) -> f64 {
        self.t_m
    }

    /// `t_m − t_p`.
    pub fn duration(&self) -> f64 {
        self.t_m - self.t_p
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        &self.integrator
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn to_raw(&self) -> RawScenario {
        RawScenario {
            dim: self.model.dim(),
            hamiltonian: self.model.hamiltonian().clone(),
            jump_ops: self.model.jump_ops().to_vec(),
            ensemble: self
                .ensemble
                .entries()
                .iter()
                .map(|e| RawEnsembleEntry {
                    label: e.label.clone(),
                    prior: e.prior,
                    state: e.state.as_operator().clone(),
                })
                .collect(),
            pom: self
                .pom
                .labels()
                .iter()
                .zip(self.pom.elements())
                .map(|(label, element)| RawPomElement {
                    label: label.clone(),
                    element: element.clone(),
                })
                .collect(),
            t_p: self.t_p,
            t_m: self.t_m,
            integrator: self.integrator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Dimension,
    NonFinite,
    NotHermitian,
    NotPositive,
    StateTrace,
    PomIncomplete,
    PriorNegative,
    PriorSum,
    Empty,
    Labels,
    TimeOrder,
    Integrator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
    /// Measured size of the violation (0 for structural problems).
    pub deviation: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (deviation {:.12e})", self.message, self.deviation)
    }
}

/// Every invariant violation found in a scenario; empty iff well-formed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, deviation: f64, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            message: message.into(),
            deviation,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every scenario invariant and reports all violations.
pub fn validate_scenario(s: &RawScenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let dim = s.dim;
    if dim == 0 {
        report.push(ViolationKind::Dimension, 0.0, "dim must be at least 1");
    }

    if check_operator_shape(&mut report, "hamiltonian", dim, &s.hamiltonian) {
        let deviation = hermitian_deviation(&s.hamiltonian);
        if deviation > HERMITICITY_TOL * s.hamiltonian.scale() {
            report.push(
                ViolationKind::NotHermitian,
                deviation,
                "hamiltonian is not Hermitian",
            );
        }
    }
    for (q, a) in s.jump_ops.iter().enumerate() {
        check_operator_shape(&mut report, &format!("jump operator {q}"), dim, a);
    }

    check_ensemble(&mut report, dim, &s.ensemble);
    let labels: Vec<String> = s.pom.iter().map(|p| p.label.clone()).collect();
    let elements: Vec<Operator> = s.pom.iter().map(|p| p.element.clone()).collect();
    check_pom(&mut report, dim, &labels, &elements);

    if !s.t_p.is_finite() || !s.t_m.is_finite() {
        report.push(ViolationKind::NonFinite, 0.0, "t_p and t_m must be finite");
    } else if s.t_m < s.t_p {
        report.push(
            ViolationKind::TimeOrder,
            s.t_p - s.t_m,
            "measurement time t_m precedes preparation time t_p",
        );
    }
    if s.integrator.steps_per_unit_time == 0 {
        report.push(
            ViolationKind::Integrator,
            0.0,
            "steps_per_unit_time must be at least 1",
        );
    }
    if s.integrator.record_every == 0 {
        report.push(
            ViolationKind::Integrator,
            0.0,
            "record_every must be at least 1",
        );
    }
    report
}

/// Returns whether the operator is usable for further numeric checks.
fn check_operator_shape(
    report: &mut ValidationReport,
    what: &str,
    dim: usize,
    op: &Operator,
) -> bool {
    if op.dim() != dim {
        report.push(
            ViolationKind::Dimension,
            0.0,
            format!("{what} has dimension {}, expected {dim}", op.dim()),
        );
        return false;
    }
    if !op.is_finite() {
        report.push(
            ViolationKind::NonFinite,
            0.0,
            format!("{what} has non-finite entries"),
        );
        return false;
    }
    true
}

fn check_positive(report: &mut ValidationReport, what: &str, op: &Operator) {
    let deviation = hermitian_deviation(op);
    if deviation > HERMITICITY_TOL * op.scale() {
        report.push(
            ViolationKind::NotHermitian,
            deviation,
            format!("{what} is not Hermitian"),
        );
        return;
    }
    match min_eigenvalue(op) {
        Ok(min) if min < -POSITIVITY_TOL => report.push(
            ViolationKind::NotPositive,
            -min,
            format!("{what} has negative eigenvalue {min:.12e}"),
        ),
        Ok(_) => {}
        Err(e) => report.push(ViolationKind::NotPositive, f64::NAN, format!("{what}: {e}")),
    }
}

fn check_labels(report: &mut ValidationReport, what: &str, labels: &[String]) {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            report.push(
                ViolationKind::Labels,
                0.0,
                format!("{what} label {label:?} is duplicated"),
            );
        }
    }
}

fn check_ensemble(report: &mut ValidationReport, dim: usize, entries: &[RawEnsembleEntry]) {
    if entries.is_empty() {
        report.push(ViolationKind::Empty, 0.0, "preparation ensemble is empty");
        return;
    }
    let labels: Vec<String> = entries.iter().map(|e| e.label.clone()).collect();
    check_labels(report, "ensemble", &labels);
    let mut sum = 0.0;
    for e in entries {
        let what = format!("ensemble state {:?}", e.label);
        if !e.prior.is_finite() {
            report.push(
                ViolationKind::NonFinite,
                0.0,
                format!("prior of {:?} is not finite", e.label),
            );
        } else if e.prior < 0.0 {
            report.push(
                ViolationKind::PriorNegative,
                -e.prior,
                format!("prior of {:?} is negative", e.label),
            );
        }
        sum += e.prior;
        if !check_operator_shape(report, &what, dim, &e.state) {
            continue;
        }
        let tr = trace(&e.state);
        let trace_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > STATE_TRACE_TOL {
            report.push(
                ViolationKind::StateTrace,
                trace_dev,
                format!("{what} has trace {:.12e}", tr.re),
            );
        }
        check_positive(report, &what, &e.state);
    }
    if sum.is_finite() && (sum - 1.0).abs() > PRIOR_SUM_TOL {
        report.push(
            ViolationKind::PriorSum,
            (sum - 1.0).abs(),
            format!("ensemble priors sum to {sum:.12e}, expected 1"),
        );
    }
}

fn check_pom(report: &mut ValidationReport, dim: usize, labels: &[String], elements: &[Operator]) {
    if elements.is_empty() {
        report.push(ViolationKind::Empty, 0.0, "POM has no elements");
        return;
    }
    if labels.len() != elements.len() {
        report.push(
            ViolationKind::Labels,
            0.0,
            format!(
                "POM has {} labels for {} elements",
                labels.len(),
                elements.len()
            ),
        );
    }
    check_labels(report, "POM", labels);
    let mut total = Operator::zeros(dim);
    let mut complete_check = true;
    for (j, el) in elements.iter().enumerate() {
        let what = match labels.get(j) {
            Some(l) => format!("POM element {l:?}"),
            None => format!("POM element {j}"),
        };
        if !check_operator_shape(report, &what, dim, el) {
            complete_check = false;
            continue;
        }
        check_positive(report, &what, el);
        total += el;
    }
    if complete_check {
        let deviation = (&total - &Operator::identity(dim)).scale();
        if deviation > COMPLETENESS_TOL {
            report.push(
                ViolationKind::PomIncomplete,
                deviation,
                "POM does not sum to identity",
            );
        }
    }
}

fn check_dim(what: &str, expected: usize, op: &Operator) -> Result<(), ModelError> {
    if op.dim() != expected {
        return Err(ModelError::Dimension {
            what: what.into(),
            expected,
            found: op.dim(),
        });
    }
    Ok(())
}

fn check_finite(what: &str, op: &Operator) -> Result<(), ModelError> {
    if !op.is_finite() {
        return Err(ModelError::NonFinite { what: what.into() });
    }
    Ok(())
}

fn check_state(what: &str, op: &Operator) -> Result<(), ModelError> {
    check_finite(what, op)?;
    let deviation = hermitian_deviation(op);
    if deviation > HERMITICITY_TOL * op.scale() {
        return Err(ModelError::NotHermitian {
            what: what.into(),
            deviation,
        });
    }
    let tr = trace(op);
    if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TRACE_TOL {
        return Err(ModelError::Trace {
            what: what.into(),
            trace: tr.re,
        });
    }
    let min = min_eigenvalue(op)?;
    if min < -POSITIVITY_TOL {
        return Err(ModelError::NotPositive {
            what: what.into(),
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Two-level basis kets and states, ordered (|e⟩, |g⟩).
pub mod qubit {
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    use crate::operator::Operator;

    pub const EXCITED: usize = 0;
    pub const GROUND: usize = 1;

    pub fn ket_plus() -> [Complex64; 2] {
        [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ]
    }

    pub fn ket_minus() -> [Complex64; 2] {
        [
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        ]
    }

    pub fn excited() -> Operator {
        Operator::ket_bra(2, EXCITED, EXCITED)
    }

    pub fn ground() -> Operator {
        Operator::ket_bra(2, GROUND, GROUND)
    }

    /// |+⟩⟨+|
    pub fn plus() -> Operator {
        Operator::projector(&ket_plus())
    }

    /// |−⟩⟨−|
    pub fn minus() -> Operator {
        Operator::projector(&ket_minus())
    }
}

/// Spontaneous emission |e⟩ → |g⟩ at rate `gamma`, with no Hamiltonian.
///
/// The single jump operator is `sqrt(gamma/2)·|g⟩⟨e|`, so the excited
/// population obeys `dρ_ee/dt = −γ ρ_ee`.
pub fn two_level_decay_model(gamma: f64) -> Result<LindbladModel, ModelError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ModelError::NonPositiveRate(gamma));
    }
    let jump =
        Operator::ket_bra(2, qubit::GROUND, qubit::EXCITED).scaled_real((gamma / 2.0).sqrt());
    LindbladModel::new(Operator::zeros(2), vec![jump])
}

/// |+⟩ and |−⟩ with equal priors, labelled "+" and "-".
pub fn plus_minus_ensemble() -> PreparationEnsemble {
    let entries = vec![
        EnsembleEntry {
            label: "+".into(),
            prior: 0.5,
            state: DensityOperator(qubit::plus()),
        },
        EnsembleEntry {
            label: "-".into(),
            prior: 0.5,
            state: DensityOperator(qubit::minus()),
        },
    ];
    PreparationEnsemble::new(entries).expect("built-in ensemble is valid")
}

/// Projective measurement {|+⟩⟨+|, |−⟩⟨−|} labelled "+" and "-".
pub fn plus_minus_pom() -> Pom {
    Pom::new(
        vec!["+".into(), "-".into()],
        vec![qubit::plus(), qubit::minus()],
    )
    .expect("built-in POM is valid")
}
