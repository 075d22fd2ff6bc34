//! Dense complex linear algebra for small Hermitian operators.
//!
//! Matrix functions (square root, inverse square root, positivity tests) all
//! go through [`eig_hermitian`], a cyclic complex Jacobi solver.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Relative Hermiticity tolerance: entrywise asymmetry over max entry magnitude.
pub const HERM_TOL: f64 = 1e-12;
/// Absolute eigenvalue floor used for positivity and invertibility decisions.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|m_ij - conj(m_ji)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Hilbert-Schmidt inner product `tr(A† B)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
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

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
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

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

/// A Hermitian matrix. Construction symmetrizes small asymmetries and rejects
/// anything above [`HERM_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let asymmetry = matrix.max_asymmetry();
        let allowed = HERM_TOL * matrix.max_abs_entry();
        if asymmetry > allowed {
            return Err(Error::NonHermitianInput { asymmetry, allowed });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// `(M + M†)/2` with no tolerance check. Only for matrices that are
    /// Hermitian by construction (outer products, congruences).
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let n = matrix.dim();
        let sym = ComplexMatrix::from_fn(n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)].conj()));
        Self { matrix: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::from_diagonal(diag),
        }
    }

    /// `|v⟩⟨v|` (unnormalized).
    pub fn projector(v: &[Complex64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(v, v))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn sum<'a>(dim: usize, ops: impl IntoIterator<Item = &'a Self>) -> Self {
        ops.into_iter()
            .fold(Self::zeros(dim), |acc, op| acc.add(op))
    }

    /// `C · self · C` for Hermitian `C`; the result is Hermitian up to rounding.
    pub fn congruence(&self, c: &Self) -> Self {
        Self::symmetrized(&(&c.matrix * &self.matrix) * &c.matrix)
    }

    /// `tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> f64 {
        self.matrix.hs_inner(&other.matrix).re
    }

    pub fn eig(&self) -> EigenDecomposition {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `rel_tol` times the largest magnitude.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let eig = self.eig();
        let scale = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0;
        }
        eig.eigenvalues
            .iter()
            .filter(|&&l| l.abs() > rel_tol * scale)
            .count()
    }
}

/// Eigenvalues ascending; eigenvectors are the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        let n = self.eigenvectors.dim();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `V diag(f(λ)) V†`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let n = self.eigenvectors.dim();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let m = ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        });
        HermitianOperator::symmetrized(m)
    }

    pub fn recompose(&self) -> HermitianOperator {
        self.map(|l| l)
    }
}

/// Validates Hermiticity of a raw matrix, then decomposes it.
pub fn eig_matrix(matrix: &ComplexMatrix) -> Result<EigenDecomposition> {
    Ok(eig_hermitian(&HermitianOperator::new(matrix.clone())?))
}

/// Cyclic complex Jacobi eigendecomposition.
pub fn eig_hermitian(op: &HermitianOperator) -> EigenDecomposition {
    let n = op.dim();
    let mut a = op.matrix.clone();
    let mut v = ComplexMatrix::identity(n);
    let total = a.frobenius_norm();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // phase to make a_pq real, then a real Jacobi rotation
                let phase = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph = phase.conj();
                // J = [[c, s], [-s·ph, c·ph]] in the (p, q) block
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -ph * s;
                let jqq = ph * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// `op^{-1/2}`; fails with [`Error::SingularOperator`] when an eigenvalue is
/// not above `floor`.
pub fn inv_sqrt(op: &HermitianOperator, floor: f64) -> Result<HermitianOperator> {
    let eig = op.eig();
    if let Some(&min) = eig.eigenvalues.first() {
        if min <= floor {
            return Err(Error::SingularOperator {
                eigenvalue: min,
                floor,
            });
        }
    }
    Ok(eig.map(|l| 1.0 / l.sqrt()))
}

/// Principal square root of a positive semidefinite operator. Eigenvalues in
/// `[-1e-10, 0)` are clamped to zero.
pub fn sqrt_psd(op: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = op.eig();
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -POSITIVITY_FLOOR {
            return Err(Error::IndefiniteOperator { eigenvalue: min });
        }
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// `⟨ψ|E|ψ⟩` for an amplitude vector.
pub fn expectation(op: &HermitianOperator, amplitudes: &[Complex64]) -> Result<f64> {
    if op.dim() != amplitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: amplitudes.len(),
        });
    }
    let e_psi = op.matrix.mul_vec(amplitudes);
    let value: Complex64 = amplitudes
        .iter()
        .zip(&e_psi)
        .map(|(a, b)| a.conj() * b)
        .sum();
    debug_assert!({
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        value.im.abs() <= 1e-12 * norm2 * op.matrix.frobenius_norm().max(f64::MIN_POSITIVE) + 1e-300
    });
    Ok(value.re)
}

/// Singular values (descending) of a real `rows × cols` matrix given as rows,
/// by one-sided Jacobi.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = rows.len();
    let n = rows[0].len();
    // Work on the orientation with fewer columns; columns are stored contiguously.
    let mut cols: Vec<Vec<f64>> = if n <= m {
        (0..n)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect()
    } else {
        rows.to_vec()
    };
    let k = cols.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let alpha: f64 = cols[i].iter().map(|x| x * x).sum();
                let beta: f64 = cols[j].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let xi = *x;
                    let yj = *y;
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
