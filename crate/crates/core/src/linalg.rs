//! Dense complex linear algebra.
//!
//! Qubit ordering is little-endian throughout the crate: qubit 0 is the
//! least-significant bit of a computational-basis index. `kron(a, b)` places
//! `a` on the high qubits and `b` on the low ones.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity and trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;
/// Above this size the eigenvalue check in [`DensityMatrix::validate`] is skipped.
const PSD_CHECK_MAX_QUBITS: usize = 8;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: "positive dimensions".into(),
                found: format!("{rows}x{cols}"),
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data).expect("non-empty rows")
    }

    /// Builds a matrix from real-valued nested rows.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged rows");
                row.iter().map(|&x| C64::new(x, 0.0))
            })
            .collect();
        Self::from_vec(r, c, data).expect("non-empty rows")
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m.data[i * b.len() + j] = x * y.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance to `other` minimized over a global phase.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let b = other.data[idx];
        if b.norm() == 0.0 {
            return self.max_abs();
        }
        let a = self.data[idx];
        let phase = if a.norm() == 0.0 { ONE } else { (a / b) / (a / b).norm() };
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .dagger()
                .matmul(self)
                .map(|p| p.max_abs_diff(&Self::identity(self.rows)) <= tol)
                .unwrap_or(false)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.dagger()) <= tol
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.data[r * m.ncols() + c] = m[(r, c)];
            }
        }
        out
    }

    /// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let eig = self.to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.rows).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = Self::zeros(self.rows, self.rows);
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..self.rows {
                vecs.set(r, new_c, eig.eigenvectors[(r, old_c)]);
            }
        }
        Ok((values, vecs))
    }

    /// exp(-i·t·H) for Hermitian `H`, computed by eigendecomposition.
    pub fn exp_i_hermitian(&self, t: f64) -> Result<ComplexMatrix> {
        let (vals, vecs) = self.hermitian_eigen()?;
        let phases: Vec<C64> = vals.iter().map(|&v| C64::from_polar(1.0, -t * v)).collect();
        vecs.matmul(&Self::diagonal(&phases))?.matmul(&vecs.dagger())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

/// Kronecker product; `a` occupies the high-order index bits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    let oc = ac * bc;
    for i in 0..ar {
        for j in 0..ac {
            let x = a.data[i * ac + j];
            if x == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.data[(i * br + k) * oc + j * bc + l] = x * b.data[k * bc + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list, left to right.
pub fn kron_all<'a>(ms: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    ms.into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, m))
}

fn check_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows,
            cols: b.cols,
        });
    }
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", a.rows),
            found: format!("{0}x{0}", b.rows),
        });
    }
    Ok(())
}

/// AB − BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(&a.matmul(b)? - &b.matmul(a)?)
}

/// AB + BA.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(&a.matmul(b)? + &b.matmul(a)?)
}

pub(crate) fn check_qubits(qubits: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Validated density matrix on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and (up to 8 qubits) positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dm = Self::from_matrix_unchecked(matrix)?;
        dm.validate()?;
        Ok(dm)
    }

    /// Wraps a square 2^n matrix without the physical checks.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        let dim = matrix.rows;
        if !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.max_abs_diff(&self.matrix.dagger());
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if self.num_qubits <= PSD_CHECK_MAX_QUBITS {
            let min = self.min_eigenvalue();
            if min < PSD_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + &self.matrix.dagger()).scale(C64::new(0.5, 0.0));
        herm.to_nalgebra()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// |0…0⟩⟨0…0|.
    pub fn zero_state(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(0, 0, ONE);
        Self { num_qubits, matrix: m }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut m = ComplexMatrix::identity(dim);
        m = m.scale(C64::new(1.0 / dim as f64, 0.0));
        Self { num_qubits, matrix: m }
    }

    /// |ψ⟩⟨ψ| after normalizing ψ.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::from_matrix_unchecked(ComplexMatrix::outer(&v, &v))
    }

    /// Tensor product of single-qubit states; `states[q]` sits on qubit q.
    pub fn product(states: &[DensityMatrix]) -> Result<Self> {
        let mut m = ComplexMatrix::identity(1);
        for s in states.iter().rev() {
            if s.num_qubits != 1 {
                return Err(Error::InvalidState("product expects single-qubit factors".into()));
            }
            m = kron(&m, &s.matrix);
        }
        Self::from_matrix_unchecked(m)
    }

    /// `self` on the low qubits, `high` on the qubits above.
    pub fn tensor(&self, high: &DensityMatrix) -> Self {
        Self {
            num_qubits: self.num_qubits + high.num_qubits,
            matrix: kron(&high.matrix, &self.matrix),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalized ψ.
    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        let rho_psi = self.matrix.apply(psi);
        psi.iter()
            .zip(&rho_psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }
}

/// Reduced state on `keep`; result qubit i is `keep[i]`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits;
    check_qubits(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let spread = |idx: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(bit, &q)| ((idx >> bit) & 1) << q)
            .sum()
    };
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let keep_off: Vec<usize> = (0..dk).map(|i| spread(i, keep)).collect();
    let tr_off: Vec<usize> = (0..dt).map(|i| spread(i, &traced)).collect();
    let dim = rho.dim();
    let src = rho.matrix.data();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut acc = ZERO;
            for &t in &tr_off {
                acc += src[(keep_off[r] | t) * dim + (keep_off[c] | t)];
            }
            out.set(r, c, acc);
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// tr(ρ²), capped at 1.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = &rho.matrix;
    let d = m.rows;
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            acc += (m.get(r, c) * m.get(c, r)).re;
        }
    }
    acc.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    #[test]
    fn kron_of_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_matches_index_formula() {
        let (a, b) = (z(), x());
        let k = kron(&a, &b);
        for i in 0..4 {
            for j in 0..4 {
                let expect = a.get(i / 2, j / 2) * b.get(i % 2, j % 2);
                assert_eq!(k.get(i, j), expect);
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let c = commutator(&x(), &x()).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        let c = commutator(&x(), &z()).unwrap();
        let expect = ComplexMatrix::from_real(&[&[0.0, -2.0], &[2.0, 0.0]]);
        assert!(c.max_abs_diff(&expect) < 1e-15);
        assert_eq!(anticommutator(&x(), &z()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let err = commutator(&x(), &ComplexMatrix::identity(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let bell = DensityMatrix::from_pure(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)])
            .unwrap();
        for q in 0..2 {
            let r = partial_trace(&bell, &[q]).unwrap();
            assert!((purity(&r) - 0.5).abs() < 1e-12);
            assert!(r.matrix().max_abs_diff(DensityMatrix::maximally_mixed(1).matrix()) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityMatrix::zero_state(2);
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            partial_trace(&rho, &[1, 1]),
            Err(Error::DuplicateQubit(1))
        ));
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&DensityMatrix::zero_state(1)) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(1)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_rejects_invalid() {
        let bad = ComplexMatrix::from_real(&[&[0.5, 0.0], &[0.0, 0.6]]);
        assert!(DensityMatrix::new(bad).is_err());
        let neg = ComplexMatrix::from_real(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(DensityMatrix::new(neg).is_err());
        let nonherm = ComplexMatrix::from_real(&[&[0.5, 0.3], &[0.0, 0.5]]);
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn exp_of_pauli_x() {
        let u = x().exp_i_hermitian(std::f64::consts::FRAC_PI_2).unwrap();
        let expect = x().scale(-I);
        assert!(u.max_abs_diff(&expect) < 1e-12);
    }
}
