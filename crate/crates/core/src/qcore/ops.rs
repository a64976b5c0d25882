use ndarray::Array2;

use super::linalg::kron;
use super::state::{DensityMatrix, StateVector, SubsystemSplit, PSD_TOL};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Default cap on the dimension of any composite state.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Eigenvalues below this are treated as exact zeros in entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// States that can be combined with the tensor product.
pub trait TensorProduct: Sized {
    fn dim(&self) -> usize;
    #[doc(hidden)]
    fn kron_unchecked(&self, other: &Self) -> Self;
}

impl<T: Real> TensorProduct for StateVector<T> {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn kron_unchecked(&self, other: &Self) -> Self {
        let a = self.amplitudes();
        let b = other.amplitudes();
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in a.iter() {
            for y in b.iter() {
                out.push(*x * *y);
            }
        }
        StateVector::new(out).expect("product of finite amplitudes")
    }
}

impl<T: Real> TensorProduct for DensityMatrix<T> {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn kron_unchecked(&self, other: &Self) -> Self {
        DensityMatrix::from_entries_unchecked(kron(self.entries(), other.entries()))
    }
}

/// `a ⊗ b` with a-major ordering, capped at [`DEFAULT_MAX_DIM`].
pub fn tensor<S: TensorProduct>(a: &S, b: &S) -> Result<S> {
    tensor_with_limit(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_with_limit<S: TensorProduct>(a: &S, b: &S, max_dim: usize) -> Result<S> {
    match a.dim().checked_mul(b.dim()) {
        Some(d) if d <= max_dim => Ok(a.kron_unchecked(b)),
        _ => Err(Error::Size(format!(
            "tensor product of dimensions {} and {} exceeds the maximum {}",
            a.dim(),
            b.dim(),
            max_dim
        ))),
    }
}

/// Tensor product of a list of states, left to right.
pub fn tensor_all<S: TensorProduct + Clone>(parts: &[S]) -> Result<S> {
    let (first, rest) = parts.split_first().ok_or_else(|| Error::Argument("empty tensor product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, p| tensor(&acc, p))
}

/// Traces out every factor except `keep`.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, dims: &[usize], keep: usize) -> Result<DensityMatrix<T>> {
    partial_trace_subsystems(rho, dims, &[keep])
}

/// Traces out every factor not listed in `keep`. The kept factors appear in
/// ascending order in the result.
pub fn partial_trace_subsystems<T: Real>(rho: &DensityMatrix<T>, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix<T>> {
    let split = SubsystemSplit::new(dims, keep, rho.dim())?;
    let dk = split.kept_dim;
    let m = rho.entries();
    let mut out = Array2::from_elem((dk, dk), c(T::zero()));
    for group in &split.groups {
        for a in 0..dk {
            let ia = group[a];
            for b in 0..dk {
                out[[a, b]] += m[[ia, group[b]]];
            }
        }
    }
    Ok(DensityMatrix::from_entries_unchecked(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

/// `-Tr(rho log rho)`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>, base: LogBase) -> Result<T> {
    entropy_of_spectrum(&rho.eigenvalues()?, base)
}

/// Entropy of a probability spectrum, with the crate's clamping rules:
/// values in `[-PSD_TOL, 0)` count as zero, anything more negative is an
/// error, and values below [`ENTROPY_CUTOFF`] contribute nothing.
pub fn entropy_of_spectrum<T: Real>(eigenvalues: &[T], base: LogBase) -> Result<T> {
    let cutoff = T::lit(ENTROPY_CUTOFF);
    let mut h = T::zero();
    for &p in eigenvalues {
        if p < -T::tol(PSD_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e} in entropy", p)));
        }
        if p > cutoff {
            h -= p * p.ln();
        }
    }
    Ok(match base {
        LogBase::E => h,
        LogBase::Two => h / T::LN_2(),
    }
    .max(T::zero()))
}
