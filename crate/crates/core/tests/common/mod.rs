//! Random scenario generation shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrodiction::model::{EnsembleEntry, Pom};
use retrodiction::operator::{dagger, frobenius_norm, trace};
use retrodiction::{
    Complex64, DensityOperator, IntegratorConfig, LindbladModel, Operator, PreparationEnsemble,
    Scenario,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> Operator {
    Operator::from_fn(dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Hermitian with Frobenius norm, hence spectral radius, at most `radius`.
pub fn random_hamiltonian(rng: &mut impl Rng, dim: usize, radius: f64) -> Operator {
    let m = random_matrix(rng, dim).hermitian_part();
    let target = radius * rng.random_range(0.0..1.0);
    m.scaled_real(target / frobenius_norm(&m))
}

/// Frobenius norm in `[0.3, 1]`, so the operator norm is at most 1.
pub fn random_jump(rng: &mut impl Rng, dim: usize) -> Operator {
    let m = random_matrix(rng, dim);
    let target = rng.random_range(0.3..1.0);
    m.scaled_real(target / frobenius_norm(&m))
}

pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    if rng.random_bool(0.3) {
        let ket: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        return DensityOperator::pure(&ket).unwrap();
    }
    let m = random_matrix(rng, dim);
    let g = &m * &dagger(&m);
    let tr = trace(&g).re;
    DensityOperator::new(g.scaled_real(1.0 / tr).hermitian_part()).unwrap()
}

/// Columns of a Gram-Schmidt orthonormalized random matrix.
pub fn random_basis(rng: &mut impl Rng, dim: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for b in &basis {
            let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// Complete POM with `outcomes` elements. Half the time (when there are at
/// least as many basis vectors as outcomes) it is a rank-deficient projective
/// measurement; otherwise it mixes projectors from two random bases, so the
/// elements generally do not commute.
pub fn random_pom(rng: &mut impl Rng, dim: usize, outcomes: usize) -> Pom {
    let mut elements = vec![Operator::zeros(dim); outcomes];
    if outcomes <= dim && rng.random_bool(0.5) {
        for (k, ket) in random_basis(rng, dim).into_iter().enumerate() {
            let j = if k < outcomes {
                k
            } else {
                rng.random_range(0..outcomes)
            };
            elements[j] += &Operator::projector(&ket);
        }
    } else {
        for _ in 0..2 {
            for ket in random_basis(rng, dim) {
                let projector = Operator::projector(&ket);
                let weights: Vec<f64> =
                    (0..outcomes).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = weights.iter().sum();
                for (el, w) in elements.iter_mut().zip(&weights) {
                    el.add_scaled(0.5 * w / total, &projector);
                }
            }
        }
    }
    let elements: Vec<Operator> = elements.into_iter().map(|e| e.hermitian_part()).collect();
    let labels = (0..outcomes).map(|j| format!("o{j}")).collect();
    Pom::new(labels, elements).unwrap()
}

pub fn random_ensemble(rng: &mut impl Rng, dim: usize, entries: usize) -> PreparationEnsemble {
    let weights: Vec<f64> = (0..entries).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let entries = weights
        .iter()
        .enumerate()
        .map(|(k, w)| EnsembleEntry {
            label: format!("s{k}"),
            prior: w / total,
            state: random_density(rng, dim),
        })
        .collect();
    PreparationEnsemble::new(entries).unwrap()
}

/// Per-channel decay rate `2‖A‖²` of the strongest jump operator.
pub fn max_rate(model: &LindbladModel) -> f64 {
    model
        .jump_ops()
        .iter()
        .map(|a| 2.0 * frobenius_norm(a).powi(2))
        .fold(0.0, f64::max)
}

/// d ∈ {2,3,4}, Q ∈ {1,2,3}, spectral radius of H ≤ 2, jump norms ≤ 1,
/// up to 4 preparations and 3 outcomes, and γ·T ≤ 5 for the strongest
/// channel (T also capped at 5).
pub fn random_scenario(rng: &mut impl Rng) -> Scenario {
    let dim = rng.random_range(2..=4);
    let q = rng.random_range(1..=3);
    let h = random_hamiltonian(rng, dim, 2.0);
    let jumps = (0..q).map(|_| random_jump(rng, dim)).collect();
    let model = LindbladModel::new(h, jumps).unwrap();
    let (n_preparations, n_outcomes) = (rng.random_range(1..=4), rng.random_range(1..=3));
    let ensemble = random_ensemble(rng, dim, n_preparations);
    let pom = random_pom(rng, dim, n_outcomes);
    let t_max = 5.0 / max_rate(&model).max(1.0);
    let t_p = rng.random_range(0.0..2.0);
    let t_m = t_p + rng.random_range(0.0..t_max);
    Scenario::new(model, ensemble, pom, t_p, t_m, IntegratorConfig::default()).unwrap()
}

/// Same shape, but with no jump operators.
pub fn random_closed_scenario(rng: &mut impl Rng) -> Scenario {
    let dim = rng.random_range(2..=4);
    let model = LindbladModel::new(random_hamiltonian(rng, dim, 2.0), vec![]).unwrap();
    let (n_preparations, n_outcomes) = (rng.random_range(1..=4), rng.random_range(1..=3));
    let ensemble = random_ensemble(rng, dim, n_preparations);
    let pom = random_pom(rng, dim, n_outcomes);
    let t_m = rng.random_range(0.0..5.0);
    Scenario::new(model, ensemble, pom, 0.0, t_m, IntegratorConfig::default()).unwrap()
}
