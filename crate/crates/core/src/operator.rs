//! Dense complex operators on a finite-dimensional Hilbert space.
//!
//! [`Operator`] is the single carrier for Hamiltonians, jump operators,
//! density operators and measurement elements. Storage is row-major. The
//! arithmetic operator impls (`+`, `-`, `*`) panic on dimension mismatch;
//! the named functions ([`commutator`], [`frobenius_distance`], ...) return
//! [`OperatorError`] instead and are what validated code paths use.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Maximum number of cyclic Jacobi sweeps before giving up on convergence.
const MAX_JACOBI_SWEEPS: usize = 64;
/// Off-diagonal Frobenius mass, relative to the full norm, at which the
/// Jacobi iteration is considered converged.
const JACOBI_TOLERANCE: f64 = 1e-15;

/// Default relative Hermiticity tolerance for eigenvalue queries.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator dimension must be at least 1")]
    EmptyDimension,
    #[error("row {row} has {len} entries, expected {dim}")]
    RaggedRow { row: usize, len: usize, dim: usize },
    #[error("operator is not Hermitian: deviation {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for k in 0..dim {
            out[(k, k)] = Complex64::new(1.0, 0.0);
        }
        out
    }

    /// Builds an operator from `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds an operator from nested rows; every row must have as many
    /// entries as there are rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, OperatorError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(OperatorError::EmptyDimension);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (row, entries) in rows.iter().enumerate() {
            if entries.len() != dim {
                return Err(OperatorError::RaggedRow {
                    row,
                    len: entries.len(),
                    dim,
                });
            }
            data.extend_from_slice(entries);
        }
        Ok(Self { dim, data })
    }

    /// Real rows, convenient for tests and built-in models.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, OperatorError> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// The ket-bra `|row⟩⟨col|` in the computational basis.
    pub fn ket_bra(dim: usize, row: usize, col: usize) -> Self {
        let mut out = Self::zeros(dim);
        out[(row, col)] = Complex64::new(1.0, 0.0);
        out
    }

    /// The outer product `|ψ⟩⟨ψ|` of a (not necessarily normalized) vector.
    pub fn projector(ket: &[Complex64]) -> Self {
        Self::from_fn(ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus; the reference magnitude for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scaled_real(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &Operator) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    pub fn checked_mul(&self, other: &Operator) -> Result<Operator, OperatorError> {
        same_dim(self, other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Operator) -> Operator {
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            let dst = &mut out.data[r * n..(r + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(
            r < self.dim && c < self.dim,
            "index ({r}, {c}) out of bounds"
        );
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(
            r < self.dim && c < self.dim,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        Operator {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        Operator {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in mul");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        Operator {
            dim: self.dim,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add_assign");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

fn same_dim(a: &Operator, b: &Operator) -> Result<(), OperatorError> {
    if a.dim != b.dim {
        return Err(OperatorError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

/// Conjugate transpose.
pub fn dagger(a: &Operator) -> Operator {
    Operator::from_fn(a.dim, |r, c| a[(c, r)].conj())
}

/// `AB − BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator, OperatorError> {
    same_dim(a, b)?;
    Ok(&a.mul_unchecked(b) - &b.mul_unchecked(a))
}

pub fn trace(a: &Operator) -> Complex64 {
    (0..a.dim).map(|k| a[(k, k)]).sum()
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &Operator, b: &Operator) -> Result<Complex64, OperatorError> {
    same_dim(a, b)?;
    let n = a.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for k in 0..n {
            acc += a[(r, k)] * b[(k, r)];
        }
    }
    Ok(acc)
}

/// Max entrywise modulus of `A − A†`.
pub fn hermitian_deviation(a: &Operator) -> f64 {
    let n = a.dim;
    let mut dev: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            dev = dev.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    dev
}

pub fn frobenius_norm(a: &Operator) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &Operator, b: &Operator) -> Result<f64, OperatorError> {
    same_dim(a, b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
///
/// Fails if `a` deviates from Hermiticity by more than
/// [`HERMITIAN_TOLERANCE`] relative to its scale.
pub fn eigenvalues_hermitian(a: &Operator) -> Result<Vec<f64>, OperatorError> {
    let tolerance = HERMITIAN_TOLERANCE * a.scale();
    let deviation = hermitian_deviation(a);
    if deviation > tolerance {
        return Err(OperatorError::NotHermitian {
            deviation,
            tolerance,
        });
    }
    let mut values = jacobi_eigenvalues(a.hermitian_part())?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn min_eigenvalue(a: &Operator) -> Result<f64, OperatorError> {
    Ok(eigenvalues_hermitian(a)?[0])
}

/// Cyclic complex Jacobi sweeps on a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classical real rotation that annihilates it.
fn jacobi_eigenvalues(mut a: Operator) -> Result<Vec<f64>, OperatorError> {
    let n = a.dim;
    let total = frobenius_norm(&a);
    if n == 1 || total == 0.0 {
        return Ok((0..n).map(|k| a[(k, k)].re).collect());
    }
    let threshold = JACOBI_TOLERANCE * total;

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            return Ok((0..n).map(|k| a[(k, k)].re).collect());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    Err(OperatorError::NoConvergence {
        sweeps: MAX_JACOBI_SWEEPS,
    })
}

fn rotate(a: &mut Operator, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / g;

    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q).
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    let n = a.dim;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}
