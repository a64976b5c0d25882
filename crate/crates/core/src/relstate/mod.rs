//! Relative-state toolkit: Schmidt form, envariance, fine-graining of
//! rational weights, mutual information and branching records.

mod branching;

pub use branching::{
    build_chain, build_chain_with_patterns, fragment_subsets, mutual_information, mutual_information_pure, neuron_dephase_estimate,
    object_coherence, redundancy_profile, BranchingState, ChainOverlaps, RedundancyProfile, EXHAUSTIVE_SUBSET_LIMIT,
    NEURON_TAU_SECONDS, SAMPLED_SUBSETS,
};

use ndarray::{s, Array2};
use num_rational::Ratio;
use num_traits::CheckedAdd;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::svd;
use crate::qcore::{DensityMatrix, StateVector};
use crate::scalar::{c, cis, Cplx, Real};

/// Tolerance for equal Schmidt coefficients.
pub const EQUAL_COEFF_TOL: f64 = 1e-10;
/// Largest common denominator accepted by [`fine_grain`].
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtForm<T: Real> {
    /// Descending, non-negative.
    pub coefficients: Vec<T>,
    /// Columns are `|alpha_k>` on side 1.
    pub basis1: Array2<Cplx<T>>,
    /// Columns are `|beta_k>` on side 2.
    pub basis2: Array2<Cplx<T>>,
    /// Two nonzero coefficients coincide, so the bases are not unique.
    pub ambiguous: bool,
}

/// Pure state of two parties; `amplitudes[[i, j]]` multiplies `|i>_1 |j>_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteState<T: Real> {
    amplitudes: Array2<Cplx<T>>,
    pub schmidt: Option<SchmidtForm<T>>,
}

impl<T: Real> BipartiteState<T> {
    pub fn new(amplitudes: Array2<Cplx<T>>) -> Result<Self> {
        let (d1, d2) = amplitudes.dim();
        if d1 == 0 || d2 == 0 {
            return Err(Error::Shape("empty bipartite state".into()));
        }
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm.is_finite() || (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidState(format!("bipartite state has squared norm {:e}", norm)));
        }
        Ok(Self { amplitudes, schmidt: None })
    }

    /// `sum_k c_k |k>|k>` on `n x n`.
    pub fn diagonal(coefficients: &[Cplx<T>]) -> Result<Self> {
        let n = coefficients.len();
        let mut a = Array2::from_elem((n, n), c(T::zero()));
        for (k, z) in coefficients.iter().enumerate() {
            a[[k, k]] = *z;
        }
        Self::new(a)
    }

    /// Equal magnitudes `1/sqrt(n)` with the given phases.
    pub fn equal_amplitude(phases: &[T]) -> Result<Self> {
        let r = T::one() / T::from_usize_lossy(phases.len()).sqrt();
        Self::diagonal(&phases.iter().map(|&p| cis(p) * r).collect::<Vec<_>>())
    }

    pub fn from_vector(state: &StateVector<T>, d1: usize, d2: usize) -> Result<Self> {
        if d1 * d2 != state.dim() {
            return Err(Error::Shape(format!("{}x{} does not match dimension {}", d1, d2, state.dim())));
        }
        Self::new(Array2::from_shape_vec((d1, d2), state.amplitudes().to_vec()).expect("shape checked"))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amplitudes.dim()
    }

    pub fn amplitudes(&self) -> &Array2<Cplx<T>> {
        &self.amplitudes
    }

    /// Flattened a-major state vector.
    pub fn to_vector(&self) -> StateVector<T> {
        StateVector::new(self.amplitudes.iter().copied().collect()).expect("finite amplitudes")
    }

    /// `A A^dagger` for side one, `A^T conj(A)` for side two.
    pub fn reduced(&self, side: Side) -> Result<DensityMatrix<T>> {
        let a = &self.amplitudes;
        let conj = a.mapv(|z| z.conj());
        let rho = match side {
            Side::One => a.dot(&conj.t()),
            Side::Two => a.t().dot(&conj),
        };
        DensityMatrix::new(rho)
    }

    pub fn fidelity(&self, other: &Self) -> Result<T> {
        if self.dims() != other.dims() {
            return Err(Error::Shape("bipartite dimension mismatch".into()));
        }
        let ov: Cplx<T> = self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * *b).sum();
        Ok(ov.norm_sqr())
    }

    /// `max |psi - sum_k s_k alpha_k beta_k|` for the stored Schmidt form.
    pub fn reconstruction_error(&self) -> Option<T> {
        let s = self.schmidt.as_ref()?;
        let (d1, d2) = self.dims();
        let mut worst = T::zero();
        for i in 0..d1 {
            for j in 0..d2 {
                let mut acc = c(T::zero());
                for (k, &sk) in s.coefficients.iter().enumerate() {
                    acc += s.basis1[[i, k]] * s.basis2[[j, k]] * sk;
                }
                worst = worst.max((acc - self.amplitudes[[i, j]]).norm());
            }
        }
        Some(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

fn coefficients_ambiguous<T: Real>(s: &[T]) -> bool {
    let tol = T::tol(EQUAL_COEFF_TOL);
    s.windows(2).any(|w| w[1] > tol && (w[0] - w[1]).abs() <= tol)
}

/// Fills in the Schmidt form from a singular-value decomposition.
pub fn schmidt_decompose<T: Real>(state: &BipartiteState<T>) -> Result<BipartiteState<T>> {
    let d = svd(state.amplitudes.view())?;
    // a = u s v^dagger, so the side-2 vectors are the conjugated columns of v.
    let basis2 = d.v.mapv(|z| z.conj());
    let ambiguous = coefficients_ambiguous(&d.s);
    let mut out = state.clone();
    out.schmidt = Some(SchmidtForm { coefficients: d.s, basis1: d.u, basis2, ambiguous });
    Ok(out)
}

fn require_diagonal<T: Real>(state: &BipartiteState<T>) -> Result<usize> {
    let (d1, d2) = state.dims();
    for i in 0..d1 {
        for j in 0..d2 {
            if i != j && state.amplitudes[[i, j]].norm() > T::tol(1e-12) {
                return Err(Error::Precondition("state is not in Schmidt form in the given bases".into()));
            }
        }
    }
    Ok(d1.min(d2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRemoval<T: Real> {
    pub state: BipartiteState<T>,
    /// Diagonal unitary applied to side 2.
    pub unitary: Array2<Cplx<T>>,
    /// Equal magnitudes make the Schmidt bases non-unique; the phases are
    /// removed relative to the bases as given.
    pub basis_ambiguous: bool,
}

/// Cancels the phases of a state already in Schmidt form with a diagonal
/// unitary on side 2.
pub fn apply_local_phase_removal<T: Real>(state: &BipartiteState<T>) -> Result<PhaseRemoval<T>> {
    let r = require_diagonal(state)?;
    let (_, d2) = state.dims();
    let mut u = Array2::from_elem((d2, d2), c(T::zero()));
    for j in 0..d2 {
        u[[j, j]] = c(T::one());
    }
    let mags: Vec<T> = (0..r).map(|k| state.amplitudes[[k, k]].norm()).collect();
    for k in 0..r {
        let z = state.amplitudes[[k, k]];
        if z.norm() > T::zero() {
            u[[k, k]] = (z / z.norm()).conj();
        }
    }
    let mut amps = state.amplitudes.clone();
    for k in 0..r {
        amps[[k, k]] = c(mags[k]);
    }
    let mut sorted = mags.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(PhaseRemoval { state: BipartiteState::new(amps)?, unitary: u, basis_ambiguous: coefficients_ambiguous(&sorted) })
}

/// Exchanges basis labels `a` and `b` on one side.
pub fn swap<T: Real>(state: &BipartiteState<T>, side: Side, a: usize, b: usize) -> Result<BipartiteState<T>> {
    swap_phased(state, side, a, b, T::zero())
}

/// `e^{i theta} |b><a| + e^{-i theta} |a><b|` on `side`, identity elsewhere.
pub fn swap_phased<T: Real>(state: &BipartiteState<T>, side: Side, a: usize, b: usize, theta: T) -> Result<BipartiteState<T>> {
    let (d1, d2) = state.dims();
    let d = if side == Side::One { d1 } else { d2 };
    if a >= d || b >= d || a == b {
        return Err(Error::Argument(format!("labels {} and {} must be distinct and below dimension {}", a, b, d)));
    }
    let (to_b, to_a) = (cis(theta), cis(-theta));
    let mut amps = state.amplitudes.clone();
    match side {
        Side::One => {
            for j in 0..d2 {
                amps[[b, j]] = state.amplitudes[[a, j]] * to_b;
                amps[[a, j]] = state.amplitudes[[b, j]] * to_a;
            }
        }
        Side::Two => {
            for i in 0..d1 {
                amps[[i, b]] = state.amplitudes[[i, a]] * to_b;
                amps[[i, a]] = state.amplitudes[[i, b]] * to_a;
            }
        }
    }
    Ok(BipartiteState { amplitudes: amps, schmidt: None })
}

/// Coefficients of `state` in its own Schmidt bases.
fn schmidt_coordinates<T: Real>(state: &BipartiteState<T>, form: &SchmidtForm<T>, rank: usize) -> Array2<Cplx<T>> {
    let u = form.basis1.slice(s![.., ..rank]).mapv(|z| z.conj());
    let v = form.basis2.slice(s![.., ..rank]).mapv(|z| z.conj());
    u.t().dot(&state.amplitudes).dot(&v)
}

/// Uniform probabilities for an equal-amplitude Schmidt state, certified by
/// swap/counterswap for every adjacent transposition of Schmidt labels,
/// which together generate all permutations.
pub fn envariant_probabilities<T: Real>(state: &BipartiteState<T>) -> Result<Vec<T>> {
    let decomposed = schmidt_decompose(state)?;
    let form = decomposed.schmidt.as_ref().expect("filled");
    let zero = T::tol(EQUAL_COEFF_TOL);
    let rank = form.coefficients.iter().filter(|&&s| s > zero).count();
    let s0 = form.coefficients[0];
    if form.coefficients[..rank].iter().any(|&s| (s - s0).abs() > T::tol(EQUAL_COEFF_TOL)) {
        return Err(Error::Precondition(format!(
            "Schmidt coefficients {:?} are not equal; use fine_grain for unequal weights",
            form.coefficients[..rank].iter().map(|s| s.to_f64_lossy()).collect::<Vec<_>>()
        )));
    }
    let coords = BipartiteState { amplitudes: schmidt_coordinates(state, form, rank), schmidt: None };
    let rho1 = coords.reduced(Side::One)?;
    let tol = T::tol(1e-12);
    for a in 1..rank {
        let swapped = swap(&coords, Side::One, a - 1, a)?;
        if swapped.reduced(Side::One)?.max_abs_diff(&rho1)? > tol {
            return Err(Error::Precondition(format!("side-1 state changed under swap of {} and {}", a - 1, a)));
        }
        let restored = swap(&swapped, Side::Two, a - 1, a)?;
        if (T::one() - restored.fidelity(&coords)?).abs() > tol {
            return Err(Error::Precondition(format!("counterswap of {} and {} did not restore the state", a - 1, a)));
        }
    }
    Ok(vec![T::one() / T::from_usize_lossy(rank); rank])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineGrained<T: Real> {
    /// Common denominator `M`.
    pub denominator: u64,
    /// Sub-branch counts `m_i`.
    pub counts: Vec<u64>,
    /// Original branch of each of the `M` sub-branches.
    pub branch_of: Vec<usize>,
    /// `m_i / M`, obtained by counting equiprobable sub-branches.
    pub probabilities: Vec<Ratio<u64>>,
    /// Expanded state `(S x C) : E`, present when small enough to store.
    pub expanded: Option<BipartiteState<T>>,
}

/// Largest `n M^2` for which the expanded state is built explicitly.
pub const EXPANDED_DENSE_LIMIT: u64 = 1 << 20;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits branch `i` into `m_i` equal-amplitude sub-branches, each entangled
/// with its own environment state, and reads off `m_i / M` by counting.
pub fn fine_grain<T: Real>(weights: &[Ratio<u64>]) -> Result<FineGrained<T>> {
    if weights.is_empty() {
        return Err(Error::Argument("no weights".into()));
    }
    let total = weights.iter().try_fold(Ratio::from_integer(0u64), |acc, w| acc.checked_add(w));
    if total != Some(Ratio::from_integer(1u64)) {
        return Err(Error::Argument("weights must sum to exactly 1".into()));
    }
    let mut den = 1u64;
    for w in weights {
        let d = *w.denom();
        den = (den / gcd(den, d)).checked_mul(d).filter(|v| *v <= MAX_DENOMINATOR).ok_or_else(|| {
            Error::Size(format!("common denominator exceeds {}", MAX_DENOMINATOR))
        })?;
    }
    let counts: Vec<u64> = weights.iter().map(|w| w.numer() * (den / w.denom())).collect();
    let branch_of: Vec<usize> = counts.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat_n(i, m as usize)).collect();
    let n = weights.len() as u64;
    let expanded = if n * den * den <= EXPANDED_DENSE_LIMIT {
        // Row index i * M + k labels |i>_S |k>_C; column k labels |k>_E.
        let m = den as usize;
        let amp = c(T::one() / T::from_usize_lossy(m).sqrt());
        let mut a = Array2::from_elem((weights.len() * m, m), c(T::zero()));
        for (k, &i) in branch_of.iter().enumerate() {
            a[[i * m + k, k]] = amp;
        }
        let state = BipartiteState::new(a)?;
        let uniform = envariant_probabilities(&state)?;
        if uniform.len() != m {
            return Err(Error::Numeric("expanded state has the wrong Schmidt rank".into()));
        }
        Some(state)
    } else {
        None
    };
    // Each sub-branch carries 1/M; aggregate per original branch.
    let probabilities = counts.iter().map(|&m| Ratio::new(m, den)).collect();
    Ok(FineGrained { denominator: den, counts, branch_of, probabilities, expanded })
}

/// Exact rationals for floating weights, or an error for weights that are
/// not ratios with denominator at most [`MAX_DENOMINATOR`].
pub fn rational_weights(weights: &[f64]) -> Result<Vec<Ratio<u64>>> {
    weights
        .iter()
        .map(|&w| {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Argument(format!("weight {w} outside [0, 1]")));
            }
            (1..=MAX_DENOMINATOR)
                .find_map(|d| {
                    let m = (w * d as f64).round();
                    ((m / d as f64 - w).abs() < 1e-15).then(|| Ratio::new(m as u64, d))
                })
                .ok_or_else(|| Error::Unsupported(format!("weight {w} is not a ratio with denominator <= {MAX_DENOMINATOR}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn schmidt_examples() {
        let prod = BipartiteState::<f64>::diagonal(&[c(1.0), c(0.0)]).unwrap();
        let s = schmidt_decompose(&prod).unwrap().schmidt.unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12 && s.coefficients[1].abs() < 1e-12);
        let bell = BipartiteState::<f64>::equal_amplitude(&[0.0, 0.0]).unwrap();
        let b = schmidt_decompose(&bell).unwrap();
        let s = b.schmidt.as_ref().unwrap();
        assert!(s.coefficients.iter().all(|x| (x - FRAC_1_SQRT_2).abs() < 1e-12));
        assert!(s.ambiguous);
        assert!(b.reconstruction_error().unwrap() < 1e-10);
    }

    #[test]
    fn phase_removal() {
        let st = BipartiteState::<f64>::equal_amplitude(&[0.0, PI]).unwrap();
        let out = apply_local_phase_removal(&st).unwrap();
        let plus = BipartiteState::equal_amplitude(&[0.0, 0.0]).unwrap();
        assert!((out.state.fidelity(&plus).unwrap() - 1.0).abs() < 1e-12);
        assert!(out.basis_ambiguous);
        let before = st.reduced(Side::One).unwrap();
        let after = out.state.reduced(Side::One).unwrap();
        assert!(before.max_abs_diff(&after).unwrap() < 1e-12);
        let idle = apply_local_phase_removal(&plus).unwrap();
        assert_eq!(idle.state, plus);
    }

    #[test]
    fn swaps() {
        let eq = BipartiteState::<f64>::equal_amplitude(&[0.3, 1.1]).unwrap();
        let s1 = swap(&eq, Side::One, 0, 1).unwrap();
        assert!(s1.reduced(Side::One).unwrap().max_abs_diff(&eq.reduced(Side::One).unwrap()).unwrap() < 1e-12);
        let phased = swap_phased(&eq, Side::One, 0, 1, 0.8).unwrap();
        let undone = swap(&phased, Side::Two, 0, 1).unwrap();
        assert!((undone.fidelity(&eq).unwrap() - 1.0).abs() < 1e-12);
        let back = swap(&s1, Side::Two, 0, 1).unwrap();
        for side in [Side::One, Side::Two] {
            assert!(back.reduced(side).unwrap().max_abs_diff(&eq.reduced(side).unwrap()).unwrap() < 1e-12);
        }
        let flat = BipartiteState::<f64>::equal_amplitude(&[0.4, 0.4]).unwrap();
        let restored = swap(&swap(&flat, Side::One, 0, 1).unwrap(), Side::Two, 0, 1).unwrap();
        assert!((restored.fidelity(&flat).unwrap() - 1.0).abs() < 1e-12);
        let uneq = BipartiteState::<f64>::diagonal(&[c(0.3f64.sqrt()), c(0.7f64.sqrt())]).unwrap();
        let u1 = swap(&uneq, Side::One, 0, 1).unwrap();
        let (r0, r1) = (uneq.reduced(Side::One).unwrap(), u1.reduced(Side::One).unwrap());
        assert!((r0.get(0, 0).re - 0.3).abs() < 1e-12 && (r1.get(0, 0).re - 0.7).abs() < 1e-12);
    }

    #[test]
    fn envariance() {
        assert_eq!(envariant_probabilities(&BipartiteState::<f64>::equal_amplitude(&[0.0, 2.0]).unwrap()).unwrap(), vec![0.5, 0.5]);
        assert_eq!(envariant_probabilities(&BipartiteState::<f64>::equal_amplitude(&[0.0, 1.0, 2.0, 3.0]).unwrap()).unwrap(), vec![0.25; 4]);
        let a = 0.5f64.sqrt();
        let bent = BipartiteState::<f64>::diagonal(&[c(a + 1e-3), c((1.0 - (a + 1e-3).powi(2)).sqrt())]).unwrap();
        let e = envariant_probabilities(&bent).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref m) if m.contains("fine_grain")));
    }

    #[test]
    fn fine_graining_counts() {
        let third = fine_grain::<f64>(&[Ratio::new(1, 3), Ratio::new(2, 3)]).unwrap();
        assert_eq!(third.probabilities, vec![Ratio::new(1, 3), Ratio::new(2, 3)]);
        assert_eq!(third.branch_of, vec![0, 1, 1]);
        assert!(third.expanded.is_some());
        let fifth = fine_grain::<f64>(&[Ratio::new(1, 5), Ratio::new(4, 5)]).unwrap();
        assert_eq!(fifth.probabilities.iter().sum::<Ratio<u64>>(), Ratio::from_integer(1));
        assert_eq!(fifth.probabilities, vec![Ratio::new(1, 5), Ratio::new(4, 5)]);
        let half = fine_grain::<f64>(&[Ratio::new(1, 2), Ratio::new(1, 2)]).unwrap();
        assert_eq!(half.counts, vec![1, 1]);
        assert!(fine_grain::<f64>(&[Ratio::new(1, 2), Ratio::new(1, 3)]).is_err());
        assert!(matches!(fine_grain::<f64>(&[Ratio::new(1, 1_000_003), Ratio::new(1_000_002, 1_000_003)]), Err(Error::Size(_))));
    }

    #[test]
    fn rational_conversion() {
        assert_eq!(rational_weights(&[0.2, 0.8]).unwrap(), vec![Ratio::new(1, 5), Ratio::new(4, 5)]);
        assert!(matches!(rational_weights(&[1.0 / PI]), Err(Error::Unsupported(_))));
    }
}
