//! Finite-dimensional quantum states and Hermitian operators.
//!
//! Composite systems use a-major ordering throughout the crate: for factor
//! dimensions `[d0, d1, ..., dk]`, the basis index is
//! `i0 * (d1 * ... * dk) + i1 * (d2 * ... * dk) + ... + ik`.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::linalg::{hermitian_eigenvalues, hermiticity_defect};
use crate::error::{Error, Result};
use crate::scalar::{c, Cplx, Real};

/// Hermiticity tolerance for matrices built by this crate.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as numerical drift.
pub const PSD_TOL: f64 = 1e-10;

/// Ket over a declared finite basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector<T: Real> {
    amplitudes: Array1<Cplx<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes as given (no normalization).
    pub fn new(amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state vector must have dimension >= 1".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes: Array1::from(amplitudes) })
    }

    /// Wraps and normalizes; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        let mut s = Self::new(amplitudes)?;
        s.normalize()?;
        Ok(s)
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|v| c(*v)).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Argument(format!("basis index {} out of range for dimension {}", index, dim)));
        }
        let mut a = vec![c(T::zero()); dim];
        a[index] = c(T::one());
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<Cplx<T>> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<Cplx<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if !(n > T::zero()) {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        self.amplitudes.mapv_inplace(|z| z / n);
        Ok(())
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        (self.norm_sqr() - T::one()).abs() <= tol
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Cplx<T>> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("inner product of dims {} and {}", self.dim(), other.dim())));
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Projector `|psi><psi| / <psi|psi>`.
    pub fn to_density(&self) -> DensityMatrix<T> {
        let n = self.norm_sqr();
        let a = &self.amplitudes;
        let m = Array2::from_shape_fn((self.dim(), self.dim()), |(i, j)| a[i] * a[j].conj() / n);
        DensityMatrix { entries: m }
    }

    /// Reduced density matrix on the subsystems listed in `keep` (ascending
    /// order in the output), computed directly from the ket.
    pub fn reduced_density(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix<T>> {
        let split = SubsystemSplit::new(dims, keep, self.dim())?;
        let dk = split.kept_dim;
        let n = self.norm_sqr();
        let mut out = Array2::from_elem((dk, dk), c(T::zero()));
        for group in &split.groups {
            for a in 0..dk {
                let pa = self.amplitudes[group[a]];
                if pa.norm_sqr() == T::zero() {
                    continue;
                }
                for b in 0..dk {
                    out[[a, b]] += pa * self.amplitudes[group[b]].conj();
                }
            }
        }
        out.mapv_inplace(|z| z / n);
        Ok(DensityMatrix { entries: out })
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
///
/// Construction checks Hermiticity and trace. Positivity needs an
/// eigendecomposition and is checked by [`DensityMatrix::validate`] or by
/// operations that compute the spectrum anyway.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix<T: Real> {
    entries: Array2<Cplx<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(entries: Array2<Cplx<T>>) -> Result<Self> {
        let (r, cc) = entries.dim();
        if r != cc || r == 0 {
            return Err(Error::Shape(format!("density matrix must be square and non-empty, got {}x{}", r, cc)));
        }
        let defect = hermiticity_defect(entries.view());
        if defect > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("matrix is not Hermitian (defect {:e})", defect)));
        }
        let tr = entries.diag().iter().map(|z| z.re).sum::<T>();
        if (tr - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {} differs from 1", tr)));
        }
        Ok(Self { entries })
    }

    /// Trusted constructor for matrices produced by trace-preserving maps
    /// inside the crate.
    pub(crate) fn from_entries_unchecked(entries: Array2<Cplx<T>>) -> Self {
        Self { entries }
    }

    pub fn from_pure(state: &StateVector<T>) -> Self {
        state.to_density()
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be >= 1".into()));
        }
        let p = T::one() / T::from_usize_lossy(dim);
        Ok(Self { entries: Array2::from_shape_fn((dim, dim), |(i, j)| if i == j { c(p) } else { c(T::zero()) }) })
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[T]) -> Result<Self> {
        let n = probabilities.len();
        if probabilities.iter().any(|p| *p < T::zero()) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        Self::new(Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(probabilities[i]) } else { c(T::zero()) }))
    }

    /// Convex combination `sum_k w_k rho_k`; weights must sum to one.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut acc = Array2::from_elem((dim, dim), c(T::zero()));
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::Shape("mixture components have different dimensions".into()));
            }
            if *w < T::zero() {
                return Err(Error::Argument("negative mixture weight".into()));
            }
            acc = acc + rho.entries.mapv(|z| z * *w);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Cplx<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<Cplx<T>> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.entries[[i, j]]
    }

    pub fn trace(&self) -> T {
        self.entries.diag().iter().map(|z| z.re).sum()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        hermitian_eigenvalues(self.entries.view())
    }

    /// Full invariant check, including positivity.
    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(self.entries.view());
        if defect > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("matrix is not Hermitian (defect {:e})", defect)));
        }
        if (self.trace() - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {} differs from 1", self.trace())));
        }
        let ev = self.eigenvalues()?;
        if let Some(min) = ev.first() {
            if *min < -T::tol(PSD_TOL) {
                return Err(Error::InvalidState(format!("negative eigenvalue {:e}", min)));
            }
        }
        Ok(())
    }

    /// `<i|rho|i>` for every basis state.
    pub fn populations(&self) -> Vec<T> {
        self.entries.diag().iter().map(|z| z.re).collect()
    }

    /// Largest off-diagonal magnitude.
    pub fn max_coherence(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.entries[[i, j]].norm());
                }
            }
        }
        worst
    }

    /// Largest entrywise distance to another state of the same dimension.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("dimension mismatch".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), |m, x| m.max(x)))
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &Array2<Cplx<T>>) -> Result<Self> {
        if u.dim() != (self.dim(), self.dim()) {
            return Err(Error::Shape("unitary does not match the state dimension".into()));
        }
        let out = u.dot(&self.entries).dot(&u.t().mapv(|z| z.conj()));
        Ok(Self { entries: out })
    }
}

/// Hermitian matrix: Hamiltonians, Pauli operators, projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    entries: Array2<Cplx<T>>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(entries: Array2<Cplx<T>>) -> Result<Self> {
        let (r, cc) = entries.dim();
        if r != cc {
            return Err(Error::Shape(format!("operator must be square, got {}x{}", r, cc)));
        }
        let defect = hermiticity_defect(entries.view());
        if defect > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("operator is not Hermitian (defect {:e})", defect)));
        }
        Ok(Self { entries })
    }

    pub fn from_real(dim: usize, values: &[T]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::Shape("value count does not match dimension".into()));
        }
        Self::new(Array2::from_shape_fn((dim, dim), |(i, j)| c(values[i * dim + j])))
    }

    pub fn pauli_x() -> Self {
        Self { entries: Array2::from_shape_fn((2, 2), |(i, j)| if i != j { c(T::one()) } else { c(T::zero()) }) }
    }

    pub fn pauli_z() -> Self {
        Self {
            entries: Array2::from_shape_fn((2, 2), |(i, j)| match (i, j) {
                (0, 0) => c(T::one()),
                (1, 1) => c(-T::one()),
                _ => c(T::zero()),
            }),
        }
    }

    /// Projector onto a (normalized) ket.
    pub fn projector(state: &StateVector<T>) -> Self {
        Self { entries: state.to_density().into_entries() }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { entries: self.entries.mapv(|z| z * s) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Cplx<T>> {
        &self.entries
    }

    /// Frobenius norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("dimension mismatch".into()));
        }
        let ab = self.entries.dot(&other.entries);
        let ba = other.entries.dot(&self.entries);
        Ok((&ab - &ba).iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, rho: &DensityMatrix<T>) -> Result<T> {
        if self.dim() != rho.dim() {
            return Err(Error::Shape("dimension mismatch".into()));
        }
        let n = self.dim();
        let mut acc = c(T::zero());
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[[i, j]] * rho.entries()[[j, i]];
            }
        }
        Ok(acc.re)
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        hermitian_eigenvalues(self.entries.view())
    }
}

/// Index bookkeeping for tracing out a subset of tensor factors.
pub(crate) struct SubsystemSplit {
    pub kept_dim: usize,
    /// For each traced-out index, the full indices of every kept index.
    pub groups: Vec<Vec<usize>>,
}

impl SubsystemSplit {
    pub fn new(dims: &[usize], keep: &[usize], total: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape("factor dimensions must be non-empty and positive".into()));
        }
        let prod: usize = dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d)).ok_or_else(|| Error::Size("dimension product overflows".into()))?;
        if prod != total {
            return Err(Error::Shape(format!("factor dimensions {:?} multiply to {} but the state has dimension {}", dims, prod, total)));
        }
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|k| *k >= dims.len()) {
            return Err(Error::Shape(format!("invalid subsystem selection {:?} for {} factors", keep, dims.len())));
        }
        let kept: Vec<usize> = keep_sorted.clone();
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
        let kept_dim: usize = kept.iter().map(|i| dims[*i]).product();
        let traced_dim: usize = traced.iter().map(|i| dims[*i]).product();

        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let offsets = |sel: &[usize], mut idx: usize| -> usize {
            let mut full = 0;
            for &f in sel.iter().rev() {
                full += (idx % dims[f]) * strides[f];
                idx /= dims[f];
            }
            full
        };
        let kept_offsets: Vec<usize> = (0..kept_dim).map(|a| offsets(&kept, a)).collect();
        let groups = (0..traced_dim)
            .map(|r| {
                let base = offsets(&traced, r);
                kept_offsets.iter().map(|k| base + k).collect()
            })
            .collect();
        Ok(Self { kept_dim, groups })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn normalize_gives_unit_norm() {
        let s = StateVector::<f64>::normalized(vec![Complex::new(3.0, 0.0), Complex::new(0.0, 4.0)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn zero_vector_cannot_be_normalized() {
        assert!(StateVector::<f64>::normalized(vec![c(0.0), c(0.0)]).is_err());
        assert!(StateVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn density_rejects_bad_trace_and_non_hermitian() {
        let m = Array2::from_shape_vec((2, 2), vec![c(0.5), c(0.1), c(0.2), c(0.5)]).unwrap();
        assert!(matches!(DensityMatrix::<f64>::new(m), Err(Error::InvalidState(_))));
        let m = Array2::from_shape_vec((2, 2), vec![c(0.6), c(0.0), c(0.0), c(0.6)]).unwrap();
        assert!(DensityMatrix::<f64>::new(m).is_err());
    }

    #[test]
    fn validate_catches_negative_eigenvalues() {
        let m = Array2::from_shape_vec((2, 2), vec![c(1.2), c(0.0), c(0.0), c(-0.2)]).unwrap();
        let rho = DensityMatrix::<f64>::new(m).unwrap();
        assert!(rho.validate().is_err());
        assert!(DensityMatrix::<f64>::maximally_mixed(3).unwrap().validate().is_ok());
    }

    #[test]
    fn pauli_z_and_x_do_not_commute() {
        let x = HermitianOperator::<f64>::pauli_x();
        let z = HermitianOperator::<f64>::pauli_z();
        assert!((x.commutator_norm(&z).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(z.commutator_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn split_bookkeeping_is_a_major() {
        let split = SubsystemSplit::new(&[2, 3], &[1], 6).unwrap();
        assert_eq!(split.kept_dim, 3);
        assert_eq!(split.groups, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let split = SubsystemSplit::new(&[2, 3], &[0], 6).unwrap();
        assert_eq!(split.groups, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
    }
}
