//! Master-equation right-hand sides and a fixed-step RK4 integrator.
//!
//! Backward evolutions (measurement elements and retrodictive states) are
//! written in the premeasurement time `τ = t_m − t`, so every integration
//! runs forward in its own variable starting from zero.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{
    DensityOperator, IntegratorConfig, LindbladModel, ModelError, HERMITICITY_TOL, POSITIVITY_TOL,
};
use crate::operator::{
    commutator, dagger, hermitian_deviation, min_eigenvalue, trace, trace_product, Operator,
    OperatorError,
};

/// Trace deviation beyond which the nonlinear retrodictive generator refuses
/// to run: its trace-correcting term assumes a normalized state.
pub const RETRODICTIVE_TRACE_TOL: f64 = 1e-8;

/// Largest Hermiticity drift accepted in a single step, relative to scale.
const STEP_DRIFT_TOL: f64 = 1e-10;

/// Trace tolerance applied when a recorded state is revalidated.
pub const RECORDED_TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state has trace {trace}, outside 1 ± {tolerance:e}")]
    TraceDeviation { trace: f64, tolerance: f64 },
    #[error("duration must be finite and non-negative, got {0}")]
    InvalidDuration(f64),
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("Hermiticity drift {drift:e} at step {step}")]
    HermiticityDrift { step: usize, drift: f64 },
    #[error("positivity lost at time {time}: min eigenvalue {min_eigenvalue:e}")]
    PositivityLoss { time: f64, min_eigenvalue: f64 },
    #[error("trace drifted to {trace} at time {time}")]
    TraceLoss { time: f64, trace: f64 },
    #[error("initial operator is not a valid POM element: {0}")]
    InvalidElement(String),
}

/// Recorded states of one evolution in its own time variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &Operator {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Operator)> {
        self.times.iter().copied().zip(&self.states)
    }
}

fn check_dim(model: &LindbladModel, x: &Operator) -> Result<(), DynamicsError> {
    if model.dim() != x.dim() {
        return Err(OperatorError::DimensionMismatch {
            left: model.dim(),
            right: x.dim(),
        }
        .into());
    }
    Ok(())
}

/// `dρ/dt = −i[H, ρ] + Σ_q (2 A ρ A† − A†A ρ − ρ A†A)`.
pub fn predictive_rhs(model: &LindbladModel, rho: &Operator) -> Result<Operator, DynamicsError> {
    check_dim(model, rho)?;
    let mut out = commutator(model.hamiltonian(), rho)?.scaled(Complex64::new(0.0, -1.0));
    for a in model.jump_ops() {
        let ad = dagger(a);
        let ada = &ad * a;
        out.add_scaled(2.0, &(&(a * rho) * &ad));
        out.add_scaled(-1.0, &(&ada * rho));
        out.add_scaled(-1.0, &(rho * &ada));
    }
    Ok(out)
}

/// `dΠ/dτ = +i[H, Π] + Σ_q (2 A†Π A − Π A†A − A†A Π)`, the adjoint generator.
pub fn pom_premeasurement_rhs(
    model: &LindbladModel,
    pi: &Operator,
) -> Result<Operator, DynamicsError> {
    check_dim(model, pi)?;
    adjoint_generator(model, pi)
}

fn adjoint_generator(model: &LindbladModel, x: &Operator) -> Result<Operator, DynamicsError> {
    let mut out = commutator(model.hamiltonian(), x)?.scaled(Complex64::new(0.0, 1.0));
    for a in model.jump_ops() {
        let ad = dagger(a);
        let ada = &ad * a;
        out.add_scaled(2.0, &(&(&ad * x) * a));
        out.add_scaled(-1.0, &(x * &ada));
        out.add_scaled(-1.0, &(&ada * x));
    }
    Ok(out)
}

/// `Σ_q [A†, A]`, the operator behind the nonlinear retrodictive term.
pub fn jump_commutator_sum(model: &LindbladModel) -> Operator {
    let mut out = Operator::zeros(model.dim());
    for a in model.jump_ops() {
        let ad = dagger(a);
        out += &(&(&ad * a) - &(a * &ad));
    }
    out
}

/// Retrodictive generator in τ:
/// `dρ/dτ = (adjoint generator)(ρ) + 2 ρ Tr{ρ Σ_q [A†, A]}`.
///
/// The last term cancels the trace the adjoint generator would otherwise
/// create, so a normalized state stays normalized.
pub fn retrodictive_rhs(model: &LindbladModel, rho: &Operator) -> Result<Operator, DynamicsError> {
    check_dim(model, rho)?;
    let tr = trace(rho);
    if (tr - Complex64::new(1.0, 0.0)).norm() > RETRODICTIVE_TRACE_TOL {
        return Err(DynamicsError::TraceDeviation {
            trace: tr.re,
            tolerance: RETRODICTIVE_TRACE_TOL,
        });
    }
    let correction = jump_commutator_sum(model);
    retrodictive_rhs_with(model, &correction, rho)
}

fn retrodictive_rhs_with(
    model: &LindbladModel,
    correction: &Operator,
    rho: &Operator,
) -> Result<Operator, DynamicsError> {
    let mut out = adjoint_generator(model, rho)?;
    let weight = trace_product(rho, correction)?.re;
    out.add_scaled(2.0 * weight, rho);
    Ok(out)
}

/// Number of equal steps covering `duration`.
///
/// `duration · steps_per_unit_time` is rounded up, except that products
/// within round-off of an integer are not bumped to the next one.
pub fn step_count(duration: f64, config: &IntegratorConfig) -> usize {
    let exact = duration * config.steps_per_unit_time as f64;
    let nearest = exact.round();
    if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        exact.ceil() as usize
    }
}

/// Classical fixed-step RK4 on operator-valued states.
pub fn rk4_integrate<F>(
    rhs: F,
    x0: &Operator,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(&Operator) -> Result<Operator, DynamicsError>,
{
    rk4_integrate_with(rhs, x0, duration, config, |_, _| Ok(()))
}

/// As [`rk4_integrate`], calling `after_step(step, &mut x)` once each step
/// has been taken and before the state is recorded.
pub fn rk4_integrate_with<F, G>(
    mut rhs: F,
    x0: &Operator,
    duration: f64,
    config: &IntegratorConfig,
    mut after_step: G,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(&Operator) -> Result<Operator, DynamicsError>,
    G: FnMut(usize, &mut Operator) -> Result<(), DynamicsError>,
{
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(DynamicsError::InvalidDuration(duration));
    }
    let steps = step_count(duration, config);
    let record_every = config.record_every.max(1) as usize;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
    };
    if steps == 0 {
        return Ok(traj);
    }
    let h = duration / steps as f64;
    let mut x = x0.clone();
    for step in 1..=steps {
        let k1 = rhs(&x)?;
        let mut stage = x.clone();
        stage.add_scaled(0.5 * h, &k1);
        let k2 = rhs(&stage)?;
        let mut stage = x.clone();
        stage.add_scaled(0.5 * h, &k2);
        let k3 = rhs(&stage)?;
        let mut stage = x.clone();
        stage.add_scaled(h, &k3);
        let k4 = rhs(&stage)?;

        x.add_scaled(h / 6.0, &k1);
        x.add_scaled(h / 3.0, &k2);
        x.add_scaled(h / 3.0, &k3);
        x.add_scaled(h / 6.0, &k4);
        if !x.is_finite() {
            return Err(DynamicsError::NonFinite { step });
        }
        after_step(step, &mut x)?;
        if step % record_every == 0 || step == steps {
            let t = if step == steps {
                duration
            } else {
                step as f64 * h
            };
            traj.times.push(t);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

/// Restores exact Hermiticity after a step, failing if the drift was larger
/// than round-off.
fn symmetrize(step: usize, x: &mut Operator) -> Result<(), DynamicsError> {
    let drift = hermitian_deviation(x);
    if drift > STEP_DRIFT_TOL * x.scale().max(f64::MIN_POSITIVE) {
        return Err(DynamicsError::HermiticityDrift { step, drift });
    }
    *x = x.hermitian_part();
    Ok(())
}

fn check_recorded_state(time: f64, x: &Operator) -> Result<(), DynamicsError> {
    let tr = trace(x);
    if (tr - Complex64::new(1.0, 0.0)).norm() > RECORDED_TRACE_TOL {
        return Err(DynamicsError::TraceLoss { time, trace: tr.re });
    }
    check_recorded_positive(time, x)
}

fn check_recorded_positive(time: f64, x: &Operator) -> Result<(), DynamicsError> {
    let min = min_eigenvalue(x)?;
    if min < -POSITIVITY_TOL {
        return Err(DynamicsError::PositivityLoss {
            time,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Forward evolution of a prepared state over `duration = t − t_p`.
pub fn evolve_predictive(
    model: &LindbladModel,
    rho_p: &DensityOperator,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    check_dim(model, rho_p.as_operator())?;
    let traj = rk4_integrate_with(
        |x| predictive_rhs(model, x),
        rho_p.as_operator(),
        duration,
        config,
        symmetrize,
    )?;
    for (t, x) in traj.iter() {
        check_recorded_state(t, x)?;
    }
    Ok(traj)
}

/// Backward evolution of a measurement element over premeasurement time
/// `τ ∈ [0, duration]`.
pub fn evolve_pom_backward(
    model: &LindbladModel,
    pi_m: &Operator,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    check_dim(model, pi_m)?;
    if !pi_m.is_finite() {
        return Err(DynamicsError::InvalidElement("non-finite entries".into()));
    }
    let deviation = hermitian_deviation(pi_m);
    if deviation > HERMITICITY_TOL * pi_m.scale() {
        return Err(DynamicsError::InvalidElement(format!(
            "not Hermitian (deviation {deviation:e})"
        )));
    }
    let min = min_eigenvalue(pi_m)?;
    if min < -POSITIVITY_TOL {
        return Err(DynamicsError::InvalidElement(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    let traj = rk4_integrate_with(
        |x| pom_premeasurement_rhs(model, x),
        pi_m,
        duration,
        config,
        symmetrize,
    )?;
    for (t, x) in traj.iter() {
        check_recorded_positive(t, x)?;
    }
    Ok(traj)
}

/// Nonlinear retrodictive evolution of a normalized state over premeasurement
/// time `τ ∈ [0, duration]`.
pub fn evolve_retrodictive(
    model: &LindbladModel,
    rho_m: &DensityOperator,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    check_dim(model, rho_m.as_operator())?;
    let correction = jump_commutator_sum(model);
    let rhs = |x: &Operator| {
        let tr = trace(x);
        if (tr - Complex64::new(1.0, 0.0)).norm() > RETRODICTIVE_TRACE_TOL {
            return Err(DynamicsError::TraceDeviation {
                trace: tr.re,
                tolerance: RETRODICTIVE_TRACE_TOL,
            });
        }
        retrodictive_rhs_with(model, &correction, x)
    };
    let traj = rk4_integrate_with(rhs, rho_m.as_operator(), duration, config, symmetrize)?;
    for (t, x) in traj.iter() {
        check_recorded_state(t, x)?;
    }
    Ok(traj)
}
