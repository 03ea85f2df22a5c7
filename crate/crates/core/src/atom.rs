//! Closed-form results for a decaying two-level atom sent from Alice to Bob.
//!
//! Alice prepares |+⟩ or |−⟩ with equal probability; the atom decays from
//! |e⟩ to |g⟩ at rate `γ`; Bob measures in the {|+⟩, |−⟩} basis. The formulas
//! below are written out directly, without going through the master-equation
//! solver, so the test suite can use them as ground truth.

use num_complex::Complex64;

use crate::model::{
    plus_minus_ensemble, plus_minus_pom, two_level_decay_model, DensityOperator, IntegratorConfig,
    ModelError, Scenario,
};
use crate::operator::Operator;

/// Retrodictive state for outcome |+⟩ at premeasurement time `tau`:
/// `½[I + (|e⟩⟨g| + |g⟩⟨e|)·e^{−γτ/2}]`.
pub fn analytic_retrodictive_state(gamma: f64, tau: f64) -> DensityOperator {
    let coherence = 0.5 * (-gamma * tau / 2.0).exp();
    let op = Operator::from_rows(&[
        vec![Complex64::new(0.5, 0.0), Complex64::new(coherence, 0.0)],
        vec![Complex64::new(coherence, 0.0), Complex64::new(0.5, 0.0)],
    ])
    .expect("2x2 rows");
    DensityOperator::new(op).expect("closed-form state is a valid density operator for γ, τ ≥ 0")
}

/// Probability that |+⟩ was prepared given outcome |+⟩ after `t = t_m − t_p`:
/// `(1 + e^{−γt/2}) / 2`.
pub fn analytic_preparation_probability(gamma: f64, t: f64) -> f64 {
    0.5 * (1.0 + (-gamma * t / 2.0).exp())
}

/// The atom example as a scenario with `t_p = 0` and `t_m = t`.
pub fn demo_scenario(gamma: f64, t: f64) -> Result<Scenario, ModelError> {
    Scenario::new(
        two_level_decay_model(gamma)?,
        plus_minus_ensemble(),
        plus_minus_pom(),
        0.0,
        t,
        IntegratorConfig::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{qubit, validate_scenario};
    use crate::operator::{eigenvalues_hermitian, frobenius_distance, trace};
    use proptest::prelude::*;

    #[test]
    fn state_limits() {
        let at_zero = analytic_retrodictive_state(1.0, 0.0);
        assert!(frobenius_distance(at_zero.as_operator(), &qubit::plus()).unwrap() < 1e-15);
        let late = analytic_retrodictive_state(1.0, f64::INFINITY);
        assert_eq!(late.as_operator(), &Operator::identity(2).scaled_real(0.5));
        let mid = analytic_retrodictive_state(2.0, std::f64::consts::LN_2);
        assert!((mid.as_operator()[(0, 1)].re - 0.25).abs() < 1e-15);
        assert!((mid.as_operator()[(1, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn probability_limits() {
        assert_eq!(analytic_preparation_probability(1.0, 0.0), 1.0);
        assert!((analytic_preparation_probability(1.0, 1e6) - 0.5).abs() < 1e-15);
        let ln2 = std::f64::consts::LN_2;
        assert!((analytic_preparation_probability(1.0, 2.0 * ln2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn demo_is_valid() {
        let s = demo_scenario(1.0, 1.0).unwrap();
        assert!(validate_scenario(&s.to_raw()).is_empty());
        assert_eq!(s.duration(), 1.0);
        assert!(demo_scenario(0.0, 1.0).is_err());
        assert!(demo_scenario(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn state_spectrum(gamma in 0.01f64..10.0, tau in 0.0f64..50.0) {
            let rho = analytic_retrodictive_state(gamma, tau);
            prop_assert!((trace(rho.as_operator()).re - 1.0).abs() < 1e-15);
            let ev = eigenvalues_hermitian(rho.as_operator()).unwrap();
            let k = (-gamma * tau / 2.0).exp();
            prop_assert!((ev[0] - (1.0 - k) / 2.0).abs() < 1e-14);
            prop_assert!((ev[1] - (1.0 + k) / 2.0).abs() < 1e-14);
            prop_assert!(ev[0] >= -1e-15 && ev[1] <= 1.0 + 1e-15);
        }

        #[test]
        fn probability_monotone(gamma in 0.01f64..10.0, t in 0.0f64..50.0, dt in 0.0f64..5.0) {
            let p = analytic_preparation_probability(gamma, t);
            prop_assert!((0.5..=1.0).contains(&p));
            prop_assert!(analytic_preparation_probability(gamma, t + dt) <= p);
        }
    }
}
