//! Bayesian retrodiction: which state was prepared, given one outcome.
//!
//! Two routes are provided and must agree. The retrodictive route evolves
//! the observed measurement element back to the preparation time, normalizes
//! it, and projects it onto each preparation device operator `P(i)·ρ_i`. The
//! predictive route computes likelihoods `P(j|i)` and applies Bayes' theorem.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{evolve_pom_backward, evolve_predictive, DynamicsError};
use crate::model::{
    DensityOperator, IntegratorConfig, LindbladModel, ModelError, PreparationEnsemble, Scenario,
};
use crate::operator::{trace, trace_product, Operator};

/// Probabilities this close below zero are treated as round-off and clamped.
pub const CLAMP_TOL: f64 = 1e-9;
/// Allowed deviation of the raw likelihood row sum from one.
pub const LIKELIHOOD_SUM_TOL: f64 = 1e-7;
/// Smallest trace a measurement element may have and still be normalized.
pub const MIN_ELEMENT_TRACE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("collapse time {time} lies outside [{t_p}, {t_m}]")]
    CollapseTime { time: f64, t_p: f64, t_m: f64 },
    #[error("measurement element has trace {0:e}; the outcome is impossible")]
    DegenerateElement(f64),
    #[error("probability {value:e} for {label:?} is negative beyond round-off")]
    NegativeProbability { label: String, value: f64 },
    #[error("outcome probabilities sum to {0}, integration failed")]
    Unnormalized(f64),
    #[error("outcome has zero probability under every preparation")]
    ImpossibleOutcome,
    #[error("a collapse-time sweep needs at least 2 points, got {0}")]
    TooFewPoints(usize),
}

/// Labelled probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityTable {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl ProbabilityTable {
    /// Clamps round-off negatives and normalizes `weights` to a table.
    fn from_weights(labels: Vec<String>, weights: Vec<f64>) -> Result<Self, InferenceError> {
        let weights = clamp(&labels, weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(InferenceError::ImpossibleOutcome);
        }
        Ok(Self {
            labels,
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| self.probs[k])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Largest entrywise difference; tables must share their labels.
    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> f64 {
        assert_eq!(self.labels, other.labels, "tables have different labels");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn clamp(labels: &[String], values: Vec<f64>) -> Result<Vec<f64>, InferenceError> {
    values
        .into_iter()
        .zip(labels)
        .map(|(v, label)| {
            if v < -CLAMP_TOL || !v.is_finite() {
                Err(InferenceError::NegativeProbability {
                    label: label.clone(),
                    value: v,
                })
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// `Π / Tr Π`, the retrodictive density operator of a measurement element.
pub fn normalize_to_retrodictive(pi: &Operator) -> Result<DensityOperator, InferenceError> {
    let tr = trace(pi);
    if !(tr.re > MIN_ELEMENT_TRACE) {
        return Err(InferenceError::DegenerateElement(tr.re));
    }
    let scaled = pi.scaled(Complex64::new(1.0 / tr.re, 0.0));
    Ok(DensityOperator::new(scaled.hermitian_part())?)
}

/// Preparation device operators `Λ_i = P(i)·ρ_i(t)`, each state evolved
/// forward for `elapsed = t − t_p`.
pub fn preparation_operators(
    ensemble: &PreparationEnsemble,
    model: &LindbladModel,
    elapsed: f64,
    config: &IntegratorConfig,
) -> Result<Vec<Operator>, InferenceError> {
    ensemble
        .entries()
        .iter()
        .map(|e| {
            let evolved = if elapsed == 0.0 {
                e.state.as_operator().clone()
            } else {
                evolve_predictive(model, &e.state, elapsed, config)?
                    .final_state()
                    .clone()
            };
            Ok(evolved.scaled_real(e.prior))
        })
        .collect()
}

fn check_index(what: &'static str, index: usize, len: usize) -> Result<(), InferenceError> {
    if index >= len {
        return Err(InferenceError::IndexOutOfRange { what, index, len });
    }
    Ok(())
}

/// Prepared state `i` evolved forward to `time`.
fn predictive_state_at(
    scenario: &Scenario,
    i: usize,
    time: f64,
) -> Result<Operator, InferenceError> {
    let state = &scenario.ensemble().entries()[i].state;
    let elapsed = time - scenario.t_p();
    if elapsed == 0.0 {
        return Ok(state.as_operator().clone());
    }
    let traj = evolve_predictive(scenario.model(), state, elapsed, scenario.integrator())?;
    Ok(traj.final_state().clone())
}

/// Measurement element `j` evolved backward from `t_m` to `time`.
fn pom_element_at(scenario: &Scenario, j: usize, time: f64) -> Result<Operator, InferenceError> {
    let element = &scenario.pom().elements()[j];
    let tau = scenario.t_m() - time;
    if tau == 0.0 {
        return Ok(element.clone());
    }
    let traj = evolve_pom_backward(scenario.model(), element, tau, scenario.integrator())?;
    Ok(traj.final_state().clone())
}

fn check_collapse_time(scenario: &Scenario, time: f64) -> Result<(), InferenceError> {
    if !(time >= scenario.t_p() && time <= scenario.t_m()) {
        return Err(InferenceError::CollapseTime {
            time,
            t_p: scenario.t_p(),
            t_m: scenario.t_m(),
        });
    }
    Ok(())
}

/// Likelihoods `P(j|i) = Tr[ρ_i(t) Π_j(t)]` for every outcome, paired at
/// the collapse time `t ∈ [t_p, t_m]`.
pub fn predict_outcome_probs(
    scenario: &Scenario,
    i: usize,
    collapse_time: f64,
) -> Result<ProbabilityTable, InferenceError> {
    check_index("ensemble", i, scenario.ensemble().len())?;
    check_collapse_time(scenario, collapse_time)?;
    let rho = predictive_state_at(scenario, i, collapse_time)?;
    let raw = (0..scenario.pom().len())
        .map(|j| {
            Ok(
                trace_product(&rho, &pom_element_at(scenario, j, collapse_time)?)
                    .map_err(DynamicsError::from)?
                    .re,
            )
        })
        .collect::<Result<Vec<f64>, InferenceError>>()?;
    let labels = scenario.pom().labels().to_vec();
    let raw = clamp(&labels, raw)?;
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > LIKELIHOOD_SUM_TOL {
        return Err(InferenceError::Unnormalized(sum));
    }
    Ok(ProbabilityTable {
        labels,
        probs: raw.iter().map(|p| p / sum).collect(),
    })
}

/// Posterior `P(i|j)` from the retrodictive state projected onto the
/// preparation device operators at `t_p`.
pub fn retrodict_preparation_probs(
    scenario: &Scenario,
    j: usize,
) -> Result<ProbabilityTable, InferenceError> {
    check_index("POM", j, scenario.pom().len())?;
    let pi = pom_element_at(scenario, j, scenario.t_p())?;
    let retro = normalize_to_retrodictive(&pi)?;
    let lambdas = preparation_operators(
        scenario.ensemble(),
        scenario.model(),
        0.0,
        scenario.integrator(),
    )?;
    let weights = lambdas
        .iter()
        .map(|lambda| {
            Ok(trace_product(retro.as_operator(), lambda)
                .map_err(DynamicsError::from)?
                .re)
        })
        .collect::<Result<Vec<f64>, InferenceError>>()?;
    ProbabilityTable::from_weights(scenario.ensemble().labels(), weights)
}

/// Posterior `P(i|j) ∝ P(j|i)·P(i)` with likelihoods paired at `t_m`.
pub fn bayes_from_predictive(
    scenario: &Scenario,
    j: usize,
) -> Result<ProbabilityTable, InferenceError> {
    bayes_from_predictive_at(scenario, j, scenario.t_m())
}

/// As [`bayes_from_predictive`], with likelihoods paired at `collapse_time`.
pub fn bayes_from_predictive_at(
    scenario: &Scenario,
    j: usize,
    collapse_time: f64,
) -> Result<ProbabilityTable, InferenceError> {
    check_index("POM", j, scenario.pom().len())?;
    let weights = scenario
        .ensemble()
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| Ok(predict_outcome_probs(scenario, i, collapse_time)?.probs[j] * e.prior))
        .collect::<Result<Vec<f64>, InferenceError>>()?;
    ProbabilityTable::from_weights(scenario.ensemble().labels(), weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSweep {
    /// `(collapse time, Tr[ρ_i(t) Π_j(t)])`
    pub points: Vec<(f64, f64)>,
    /// Max minus min of the probabilities.
    pub spread: f64,
}

/// Evaluates the pairing `Tr[ρ_i(t) Π_j(t)]` at `n_times` evenly spaced
/// collapse times spanning `[t_p, t_m]`.
pub fn collapse_time_sweep(
    scenario: &Scenario,
    i: usize,
    j: usize,
    n_times: usize,
) -> Result<CollapseSweep, InferenceError> {
    check_index("ensemble", i, scenario.ensemble().len())?;
    check_index("POM", j, scenario.pom().len())?;
    if n_times < 2 {
        return Err(InferenceError::TooFewPoints(n_times));
    }
    let (t_p, t_m) = (scenario.t_p(), scenario.t_m());
    let points = (0..n_times)
        .map(|k| {
            let t = if k == n_times - 1 {
                t_m
            } else {
                t_p + (t_m - t_p) * k as f64 / (n_times - 1) as f64
            };
            let rho = predictive_state_at(scenario, i, t)?;
            let pi = pom_element_at(scenario, j, t)?;
            let p = trace_product(&rho, &pi).map_err(DynamicsError::from)?.re;
            Ok((t, p))
        })
        .collect::<Result<Vec<_>, InferenceError>>()?;
    let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(CollapseSweep {
        points,
        spread: max - min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        plus_minus_ensemble, plus_minus_pom, qubit, two_level_decay_model, EnsembleEntry, Pom,
    };
    use crate::operator::frobenius_distance;

    fn atom(gamma: f64, t: f64) -> Scenario {
        Scenario::new(
            two_level_decay_model(gamma).unwrap(),
            plus_minus_ensemble(),
            plus_minus_pom(),
            0.0,
            t,
            IntegratorConfig::default(),
        )
        .unwrap()
    }

    fn static_qubit(priors: [f64; 2], t: f64) -> Scenario {
        let entries = vec![
            EnsembleEntry {
                label: "+".into(),
                prior: priors[0],
                state: DensityOperator::new(qubit::plus()).unwrap(),
            },
            EnsembleEntry {
                label: "-".into(),
                prior: priors[1],
                state: DensityOperator::new(qubit::minus()).unwrap(),
            },
        ];
        Scenario::new(
            LindbladModel::trivial(2),
            PreparationEnsemble::new(entries).unwrap(),
            plus_minus_pom(),
            0.0,
            t,
            IntegratorConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        let r = normalize_to_retrodictive(&qubit::plus()).unwrap();
        assert!(frobenius_distance(r.as_operator(), &qubit::plus()).unwrap() < 1e-15);
        let r = normalize_to_retrodictive(&Operator::identity(2).scaled_real(0.3)).unwrap();
        assert!(
            frobenius_distance(r.as_operator(), &Operator::identity(2).scaled_real(0.5)).unwrap()
                < 1e-15
        );
        assert!(matches!(
            normalize_to_retrodictive(&Operator::zeros(2)),
            Err(InferenceError::DegenerateElement(_))
        ));
        assert!(normalize_to_retrodictive(&Operator::identity(2).scaled_real(-1.0)).is_err());
    }

    #[test]
    fn preparation_operators_at_preparation_time() {
        let model = two_level_decay_model(1.0).unwrap();
        let cfg = IntegratorConfig::default();
        let ops = preparation_operators(&plus_minus_ensemble(), &model, 0.0, &cfg).unwrap();
        assert_eq!(ops[0], qubit::plus().scaled_real(0.5));
        assert_eq!(ops[1], qubit::minus().scaled_real(0.5));

        // uniform ensemble of orthogonal basis states in d = 3
        let entries = (0..3)
            .map(|k| EnsembleEntry {
                label: k.to_string(),
                prior: 1.0 / 3.0,
                state: DensityOperator::new(Operator::ket_bra(3, k, k)).unwrap(),
            })
            .collect();
        let ens = PreparationEnsemble::new(entries).unwrap();
        let ops = preparation_operators(&ens, &LindbladModel::trivial(3), 0.0, &cfg).unwrap();
        for (k, op) in ops.iter().enumerate() {
            assert!(
                frobenius_distance(op, &Operator::ket_bra(3, k, k).scaled_real(1.0 / 3.0)).unwrap()
                    < 1e-16
            );
        }

        for &t in &[0.5, 2.0, 7.0] {
            let ops = preparation_operators(&plus_minus_ensemble(), &model, t, &cfg).unwrap();
            let tr: f64 = ops.iter().map(|o| trace(o).re).sum();
            assert!((tr - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn predict_static_closed_system() {
        let s = static_qubit([0.5, 0.5], 3.0);
        let table = predict_outcome_probs(&s, 0, 1.5).unwrap();
        assert!((table.probs[0] - 1.0).abs() < 1e-12 && table.probs[1].abs() < 1e-12);
    }

    #[test]
    fn predict_atom_likelihood() {
        for &t in &[0.0, 0.4, 1.0, 3.0] {
            let s = atom(1.0, t);
            let table = predict_outcome_probs(&s, 0, t).unwrap();
            // ρ_+(T) has diagonal (e^{-T}/2, 1 − e^{-T}/2) and coherence e^{-T/2}/2;
            // Tr[ρ |+⟩⟨+|] = (ρ_ee + ρ_gg)/2 + Re ρ_eg
            let expect = 0.5 * (1.0 + (-t / 2.0f64).exp());
            assert!((table.get("+").unwrap() - expect).abs() < 1e-9, "T = {t}");
            assert!((table.probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn predict_rejects_bad_arguments() {
        let s = atom(1.0, 1.0);
        assert!(matches!(
            predict_outcome_probs(&s, 5, 0.5),
            Err(InferenceError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            predict_outcome_probs(&s, 0, 1.5),
            Err(InferenceError::CollapseTime { .. })
        ));
        assert!(matches!(
            retrodict_preparation_probs(&s, 2),
            Err(InferenceError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            collapse_time_sweep(&s, 0, 0, 1),
            Err(InferenceError::TooFewPoints(1))
        ));
    }

    #[test]
    fn retrodict_atom_closed_form() {
        let ln2 = std::f64::consts::LN_2;
        for &t in &[0.0, 0.5, 2.0 * ln2, 5.0] {
            let table = retrodict_preparation_probs(&atom(1.0, t), 0).unwrap();
            let expect = 0.5 * (1.0 + (-t / 2.0f64).exp());
            assert!((table.get("+").unwrap() - expect).abs() < 1e-7);
            assert!((table.get("-").unwrap() - (1.0 - expect)).abs() < 1e-7);
        }
        let table = retrodict_preparation_probs(&atom(1.0, 2.0 * ln2), 0).unwrap();
        assert!((table.probs[0] - 0.75).abs() < 1e-7);
    }

    #[test]
    fn bayes_matches_retrodiction_on_atom() {
        for &t in &[0.0, 0.7, 3.0] {
            let s = atom(1.0, t);
            for j in 0..2 {
                let a = retrodict_preparation_probs(&s, j).unwrap();
                let b = bayes_from_predictive(&s, j).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-7);
            }
        }
    }

    #[test]
    fn bayes_uniform_prior_symmetric_channel() {
        let s = atom(1.0, 1.0);
        let posterior = bayes_from_predictive(&s, 0).unwrap();
        let like_plus = predict_outcome_probs(&s, 0, 1.0).unwrap().probs[0];
        let like_minus = predict_outcome_probs(&s, 1, 1.0).unwrap().probs[0];
        // doubly-stochastic likelihoods: P(+|+) + P(+|−) = 1
        assert!((like_plus + like_minus - 1.0).abs() < 1e-12);
        assert!((posterior.probs[0] - like_plus).abs() < 1e-12);
        assert!((posterior.probs[1] - like_minus).abs() < 1e-12);
    }

    #[test]
    fn degenerate_prior_is_kept() {
        let s = static_qubit([1.0, 0.0], 0.0);
        let posterior = bayes_from_predictive(&s, 0).unwrap();
        assert_eq!(posterior.probs, vec![1.0, 0.0]);
        // outcome "-" is impossible when only |+⟩ is ever prepared
        assert!(matches!(
            bayes_from_predictive(&s, 1),
            Err(InferenceError::ImpossibleOutcome)
        ));
        assert!(matches!(
            retrodict_preparation_probs(&s, 1),
            Err(InferenceError::ImpossibleOutcome)
        ));

        let s = Scenario::new(
            two_level_decay_model(1.0).unwrap(),
            static_qubit([1.0, 0.0], 0.0).ensemble().clone(),
            plus_minus_pom(),
            0.0,
            2.0,
            IntegratorConfig::default(),
        )
        .unwrap();
        for j in 0..2 {
            assert_eq!(bayes_from_predictive(&s, j).unwrap().probs, vec![1.0, 0.0]);
            assert_eq!(
                retrodict_preparation_probs(&s, j).unwrap().probs,
                vec![1.0, 0.0]
            );
        }
    }

    #[test]
    fn point_mass_when_measured_immediately() {
        let s = static_qubit([0.5, 0.5], 0.0);
        let p = retrodict_preparation_probs(&s, 1).unwrap();
        assert_eq!(p.get("-"), Some(1.0));
        assert_eq!(p.get("+"), Some(0.0));
    }

    #[test]
    fn sweep_is_flat() {
        let s = static_qubit([0.5, 0.5], 2.0);
        let sweep = collapse_time_sweep(&s, 0, 0, 4).unwrap();
        assert!(sweep.spread <= 1e-9);

        let s = atom(1.0, 2.0);
        let sweep = collapse_time_sweep(&s, 0, 0, 5).unwrap();
        assert!(sweep.spread <= 1e-6);
        assert_eq!(sweep.points.first().unwrap().0, 0.0);
        assert_eq!(sweep.points.last().unwrap().0, 2.0);

        let sweep = collapse_time_sweep(&s, 0, 0, 2).unwrap();
        let p = predict_outcome_probs(&s, 0, 2.0).unwrap().probs[0];
        for (_, v) in sweep.points {
            assert!((v - p).abs() < 1e-6);
        }
    }

    #[test]
    fn three_outcome_pom_labels() {
        // trine-like POM on the static qubit: two halves of |+⟩⟨+| and |−⟩⟨−|
        let pom = Pom::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                qubit::plus().scaled_real(0.5),
                qubit::plus().scaled_real(0.5),
                qubit::minus(),
            ],
        )
        .unwrap();
        let s = Scenario::new(
            LindbladModel::trivial(2),
            plus_minus_ensemble(),
            pom,
            0.0,
            1.0,
            IntegratorConfig::default(),
        )
        .unwrap();
        let lik = predict_outcome_probs(&s, 0, 0.5).unwrap();
        assert_eq!(lik.labels, vec!["a", "b", "c"]);
        assert!((lik.probs[0] - 0.5).abs() < 1e-12);
        let post = retrodict_preparation_probs(&s, 1).unwrap();
        assert!((post.probs[0] - 1.0).abs() < 1e-12);
    }
}
