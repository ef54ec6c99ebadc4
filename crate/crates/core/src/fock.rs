//! Truncated Fock spaces for products of bosonic modes and the operators acting on them.
//!
//! Composite basis states are ordered lexicographically with mode 0 most
//! significant, i.e. the same order as `A_0 ⊗ A_1 ⊗ … ⊗ A_{k-1}`.

use std::ops::{Add, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Composite dimension at or below which operators use dense storage.
pub const DENSE_STORAGE_MAX_DIM: usize = 100;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Ordered list of bosonic modes, each truncated to its lowest `N_i` Fock states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
    dim: usize,
}

impl HilbertSpace {
    pub fn new(mode_dims: &[usize]) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if let Some(&bad) = mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!(
                "every mode needs at least 2 Fock levels, found {bad}"
            )));
        }
        let dim = mode_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("composite dimension overflows".into()))?;
        Ok(HilbertSpace {
            mode_dims: mode_dims.to_vec(),
            dim,
        })
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn num_modes(&self) -> usize {
        self.mode_dims.len()
    }

    /// Product of all mode truncations.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distance in the composite index between adjacent Fock levels of `mode`.
    fn stride(&self, mode: usize) -> usize {
        self.mode_dims[mode + 1..].iter().product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes() {
            return Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.num_modes(),
            });
        }
        Ok(())
    }

    /// Composite index of the product state `|n_0, n_1, …⟩`.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.num_modes(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (&n, &d) in occupations.iter().zip(&self.mode_dims) {
            if n >= d {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} outside truncation {d}"
                )));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Occupation of `mode` in composite basis state `index`.
    pub fn occupation_of(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.mode_dims[mode]
    }
}

/// How an [`OperatorMatrix`] stores its entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageKind {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Mat<Complex64>),
    Sparse(CsrMatrix),
}

/// Square complex matrix on a composite space.
///
/// Storage is picked from the dimension: dense up to
/// [`DENSE_STORAGE_MAX_DIM`], compressed sparse rows above.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    storage: Storage,
}

impl OperatorMatrix {
    pub fn from_triplets(dim: usize, entries: Vec<(usize, usize, Complex64)>) -> Self {
        let csr = CsrMatrix::from_triplets(dim, dim, entries);
        if dim <= DENSE_STORAGE_MAX_DIM {
            OperatorMatrix {
                dim,
                storage: Storage::Dense(csr.to_dense()),
            }
        } else {
            OperatorMatrix {
                dim,
                storage: Storage::Sparse(csr),
            }
        }
    }

    /// Wraps a dense matrix as-is, whatever its size.
    pub fn from_dense(m: Mat<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        OperatorMatrix {
            dim: m.nrows(),
            storage: Storage::Dense(m),
        }
    }

    pub(crate) fn from_csr(csr: CsrMatrix) -> Self {
        assert_eq!(csr.nrows(), csr.ncols(), "operator must be square");
        OperatorMatrix {
            dim: csr.nrows(),
            storage: Storage::Sparse(csr),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, ONE)).collect())
    }

    /// Diagonal operator.
    pub fn diagonal(values: &[Complex64]) -> Self {
        Self::from_triplets(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        )
    }

    /// `|ψ⟩⟨ψ|` for a state vector (not normalized here).
    pub fn projector(psi: &[Complex64]) -> Self {
        let n = psi.len();
        Self::from_dense(Mat::from_fn(n, n, |r, c| psi[r] * psi[c].conj()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn storage_kind(&self) -> StorageKind {
        match self.storage {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Sparse(_) => StorageKind::Sparse,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m[(row, col)],
            Storage::Sparse(s) => s.get(row, col),
        }
    }

    /// Nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Complex64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        let v = m[(r, c)];
                        if v != ZERO {
                            out.push((r, c, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse(s) => s.iter().collect(),
        }
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        match &self.storage {
            Storage::Dense(m) => Self::from_dense(m.adjoint().to_owned()),
            Storage::Sparse(s) => Self::from_csr(s.adjoint()),
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        match &self.storage {
            Storage::Dense(m) => Self::from_dense(Mat::from_fn(self.dim, self.dim, |r, c| k * m[(r, c)])),
            Storage::Sparse(s) => Self::from_csr(s.scale(k)),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let a = self.to_dense();
        let b = other.to_dense();
        let mut worst = 0.0f64;
        for c in 0..self.dim {
            for r in 0..self.dim {
                worst = worst.max((a[(r, c)] - b[(r, c)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.nonzeros().iter().map(|t| t.2.norm()).fold(0.0, f64::max)
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        &(self * other) - &(other * self)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let a = self.to_dense();
        let h = Mat::from_fn(self.dim, self.dim, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5);
        h.self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("hermitian eigensolver converges")
    }

    fn combine(&self, other: &OperatorMatrix, a: Complex64, b: Complex64) -> OperatorMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        match (&self.storage, &other.storage) {
            (Storage::Sparse(x), Storage::Sparse(y)) => Self::from_csr(x.linear_combination(a, y, b)),
            _ => {
                let x = self.to_dense();
                let y = other.to_dense();
                Self::from_dense(Mat::from_fn(self.dim, self.dim, |r, c| a * x[(r, c)] + b * y[(r, c)]))
            }
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.combine(rhs, ONE, ONE)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.combine(rhs, ONE, -ONE)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        match (&self.storage, &rhs.storage) {
            (Storage::Sparse(x), Storage::Sparse(y)) => OperatorMatrix::from_csr(x.matmul(y)),
            (Storage::Dense(x), Storage::Dense(y)) => OperatorMatrix::from_dense(x * y),
            _ => OperatorMatrix::from_dense(&self.to_dense() * &rhs.to_dense()),
        }
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let nb = b.dim();
    let bz = b.nonzeros();
    let mut t = Vec::with_capacity(a.nonzeros().len() * bz.len());
    for (ra, ca, va) in a.nonzeros() {
        for &(rb, cb, vb) in &bz {
            t.push((ra * nb + rb, ca * nb + cb, va * vb));
        }
    }
    OperatorMatrix::from_triplets(a.dim() * nb, t)
}

/// Single-mode truncated annihilation operator with `(n−1, n) = √n`.
pub fn single_mode_destroy(n: usize) -> OperatorMatrix {
    OperatorMatrix::from_triplets(
        n,
        (1..n).map(|k| (k - 1, k, Complex64::new((k as f64).sqrt(), 0.0))).collect(),
    )
}

/// Annihilation operator of `mode` embedded in the composite space.
pub fn destroy(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let stride = space.stride(mode);
    let mut t = Vec::with_capacity(space.dim());
    for idx in 0..space.dim() {
        let n = space.occupation_of(idx, mode);
        if n > 0 {
            t.push((idx - stride, idx, Complex64::new((n as f64).sqrt(), 0.0)));
        }
    }
    Ok(OperatorMatrix::from_triplets(space.dim(), t))
}

pub fn create(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(destroy(space, mode)?.adjoint())
}

/// `b†b` for `mode`.
pub fn number(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let diag: Vec<Complex64> = (0..space.dim())
        .map(|i| Complex64::new(space.occupation_of(i, mode) as f64, 0.0))
        .collect();
    Ok(OperatorMatrix::diagonal(&diag))
}

/// Conjugate transpose.
pub fn adjoint(a: &OperatorMatrix) -> OperatorMatrix {
    a.adjoint()
}

/// `Tr(A ρ)`.
pub fn expectation(rho: &OperatorMatrix, a: &OperatorMatrix) -> Result<Complex64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    // Tr(Aρ) = Σ_ij A_ij ρ_ji
    Ok(a.nonzeros().into_iter().map(|(i, j, v)| v * rho.get(j, i)).sum())
}

/// Product-state projector `|n_0 n_1 …⟩⟨n_0 n_1 …|`.
pub fn fock_projector(space: &HilbertSpace, occupations: &[usize]) -> Result<OperatorMatrix> {
    let idx = space.index_of(occupations)?;
    Ok(OperatorMatrix::from_triplets(space.dim(), vec![(idx, idx, ONE)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn space_validation() {
        assert!(HilbertSpace::new(&[]).is_err());
        assert!(HilbertSpace::new(&[3, 1]).is_err());
        let s = HilbertSpace::new(&[6, 6, 3]).unwrap();
        assert_eq!(s.dim(), 108);
        assert_eq!(s.num_modes(), 3);
    }

    #[test]
    fn single_mode_ladder_entries() {
        let s = HilbertSpace::new(&[3]).unwrap();
        let b = destroy(&s, 0).unwrap();
        assert_eq!(b.get(0, 1), c(1.0));
        assert_eq!(b.get(1, 2), c(2f64.sqrt()));
        assert_eq!(b.nonzeros().len(), 2);
    }

    #[test]
    fn destroy_out_of_range() {
        let s = HilbertSpace::new(&[3, 3]).unwrap();
        assert_eq!(
            destroy(&s, 2).unwrap_err(),
            Error::ModeOutOfRange { index: 2, modes: 2 }
        );
    }

    #[test]
    fn ladder_action_on_product_state() {
        let s = HilbertSpace::new(&[2, 2]).unwrap();
        let b0 = destroy(&s, 0).unwrap();
        let ket10 = s.index_of(&[1, 0]).unwrap();
        let ket00 = s.index_of(&[0, 0]).unwrap();
        // column |10⟩ of b0 has its only entry at row |00⟩
        for r in 0..s.dim() {
            let expected = if r == ket00 { 1.0 } else { 0.0 };
            assert_eq!(b0.get(r, ket10), c(expected));
        }
    }

    #[test]
    fn embedding_matches_kronecker_construction() {
        let s = HilbertSpace::new(&[3, 4, 2]).unwrap();
        let ids: Vec<_> = s.mode_dims().iter().map(|&d| OperatorMatrix::identity(d)).collect();
        for mode in 0..3 {
            let mut factors = ids.clone();
            factors[mode] = single_mode_destroy(s.mode_dims()[mode]);
            let reference = factors[1..].iter().fold(factors[0].clone(), |acc, f| kron(&acc, f));
            assert_eq!(destroy(&s, mode).unwrap().max_abs_diff(&reference), 0.0);
        }
    }

    #[test]
    fn number_operator_diagonal_by_multiplication() {
        let s = HilbertSpace::new(&[5]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let n = &b.adjoint() * &b;
        for k in 0..5 {
            assert!((n.get(k, k) - c(k as f64)).norm() < 1e-14);
        }
        assert!(n.max_abs_diff(&number(&s, 0).unwrap()) < 1e-14);
    }

    #[test]
    fn adjoint_examples() {
        let id = OperatorMatrix::identity(4);
        assert_eq!(adjoint(&id), id);
        let s = HilbertSpace::new(&[4]).unwrap();
        let bd = adjoint(&destroy(&s, 0).unwrap());
        for k in 1..4 {
            assert_eq!(bd.get(k, k - 1), c((k as f64).sqrt()));
        }
        let i_id = id.scale(Complex64::new(0.0, 1.0));
        assert_eq!(adjoint(&i_id), id.scale(Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let s = HilbertSpace::new(&[5, 3]).unwrap();
        for mode in 0..2 {
            let b = destroy(&s, mode).unwrap();
            let comm = b.commutator(&b.adjoint());
            let top = s.mode_dims()[mode] - 1;
            for r in 0..s.dim() {
                for col in 0..s.dim() {
                    let v = comm.get(r, col);
                    if r != col {
                        assert_eq!(v, c(0.0));
                    } else if s.occupation_of(r, mode) == top {
                        // truncation artifact: 1 − N
                        assert!((v - c(-(top as f64))).norm() < 1e-12);
                    } else {
                        assert!((v - c(1.0)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn disjoint_modes_commute() {
        let s = HilbertSpace::new(&[4, 3]).unwrap();
        let b0 = destroy(&s, 0).unwrap();
        let b1 = destroy(&s, 1).unwrap();
        assert_eq!((&b0 * &b1).max_abs_diff(&(&b1 * &b0)), 0.0);
    }

    #[test]
    fn expectation_examples() {
        let s = HilbertSpace::new(&[6]).unwrap();
        let n = number(&s, 0).unwrap();
        let vac = fock_projector(&s, &[0]).unwrap();
        let one = fock_projector(&s, &[1]).unwrap();
        assert_eq!(expectation(&vac, &n).unwrap(), c(0.0));
        assert_eq!(expectation(&one, &n).unwrap(), c(1.0));
        assert!(matches!(
            expectation(&vac, &OperatorMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn thermal_expectation_from_geometric_series() {
        // p_n = (1 − q) q^n with q = n_th/(1 + n_th), truncated far into the tail
        let nth: f64 = 0.5;
        let q = nth / (1.0 + nth);
        let dim = 60;
        let s = HilbertSpace::new(&[dim]).unwrap();
        let p: Vec<Complex64> = (0..dim).map(|k| c((1.0 - q) * q.powi(k as i32))).collect();
        let rho = OperatorMatrix::diagonal(&p);
        assert!((expectation(&rho, &number(&s, 0).unwrap()).unwrap().re - 0.5).abs() < 1e-12);
        let id = OperatorMatrix::identity(dim);
        assert!((expectation(&rho, &id).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn storage_follows_dimension() {
        let small = HilbertSpace::new(&[10, 10]).unwrap();
        let large = HilbertSpace::new(&[11, 10]).unwrap();
        assert_eq!(destroy(&small, 0).unwrap().storage_kind(), StorageKind::Dense);
        let b = destroy(&large, 1).unwrap();
        assert_eq!(b.storage_kind(), StorageKind::Sparse);
        // sparse algebra agrees with dense algebra
        let n_sparse = &b.adjoint() * &b;
        let n_dense = OperatorMatrix::from_dense(&b.adjoint().to_dense() * &b.to_dense());
        assert_eq!(n_sparse.storage_kind(), StorageKind::Sparse);
        assert!(n_sparse.max_abs_diff(&n_dense) < 1e-14);
        assert!(n_sparse.max_abs_diff(&number(&large, 1).unwrap()) < 1e-14);
    }
}
