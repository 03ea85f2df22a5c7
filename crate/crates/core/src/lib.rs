//! Retrodictive master equations for open quantum systems.
//!
//! Given a single measurement outcome at time `t_m`, the measurement element
//! is evolved backward to the preparation time `t_p` under the adjoint of a
//! Lindblad generator, normalized into a retrodictive density operator, and
//! projected onto the preparation device operators `P(i)·ρ_i` to give the
//! posterior probability of each candidate prepared state. The same
//! posterior is also available through forward prediction plus Bayes'
//! theorem, and the two routes are checked against each other.
//!
//! Conventions: `ħ = 1`; qubit basis order is (|e⟩, |g⟩); backward
//! evolutions run forward in premeasurement time `τ = t_m − t`.

pub mod atom;
pub mod cli;
pub mod dynamics;
pub mod inference;
pub mod model;
pub mod operator;

pub use dynamics::{
    evolve_pom_backward, evolve_predictive, evolve_retrodictive, pom_premeasurement_rhs,
    predictive_rhs, retrodictive_rhs, rk4_integrate, DynamicsError, Trajectory,
};
pub use inference::{
    bayes_from_predictive, bayes_from_predictive_at, collapse_time_sweep,
    normalize_to_retrodictive, predict_outcome_probs, preparation_operators,
    retrodict_preparation_probs, InferenceError, ProbabilityTable,
};
pub use model::{
    validate_scenario, DensityOperator, IntegratorConfig, LindbladModel, ModelError, Pom,
    PreparationEnsemble, RawScenario, Scenario, ValidationReport,
};
pub use num_complex::Complex64;
pub use operator::{Operator, OperatorError};
