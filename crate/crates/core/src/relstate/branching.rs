use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::qcore::ops::{entropy_of_spectrum, partial_trace_subsystems, tensor_all, LogBase};
use crate::qcore::{von_neumann_entropy, DensityMatrix, StateVector};
use crate::scalar::{c, Cplx, Real};

/// Subset counts up to this are enumerated exhaustively.
pub const EXHAUSTIVE_SUBSET_LIMIT: u128 = 10_000;
/// Subsets drawn per size beyond [`EXHAUSTIVE_SUBSET_LIMIT`].
pub const SAMPLED_SUBSETS: usize = 256;
/// Quoted decoherence time of a neuronal superposition, s.
pub const NEURON_TAU_SECONDS: f64 = 1e-20;

/// `H(S) + H(F) - H(SF)` in bits. `system` and `fragment` index factors of
/// `dims` and must be disjoint.
pub fn mutual_information<T: Real>(rho: &DensityMatrix<T>, dims: &[usize], system: &[usize], fragment: &[usize]) -> Result<T> {
    let joint = union(system, fragment)?;
    let h = |keep: &[usize]| -> Result<T> { von_neumann_entropy(&partial_trace_subsystems(rho, dims, keep)?, LogBase::Two) };
    Ok(h(system)? + h(fragment)? - h(&joint)?)
}

/// As [`mutual_information`] for a pure global state, without forming the
/// global density matrix.
pub fn mutual_information_pure<T: Real>(state: &StateVector<T>, dims: &[usize], system: &[usize], fragment: &[usize]) -> Result<T> {
    let joint = union(system, fragment)?;
    let h = |keep: &[usize]| pure_entropy(state, dims, keep);
    Ok(h(system)? + h(fragment)? - h(&joint)?)
}

/// Entropy of `keep` in bits, traced from whichever side of the cut is
/// smaller; both sides share a spectrum for a pure global state.
fn pure_entropy<T: Real>(state: &StateVector<T>, dims: &[usize], keep: &[usize]) -> Result<T> {
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Argument("subsystem index out of range".into()));
    }
    let inside: usize = keep.iter().map(|&k| dims[k]).product();
    let total: usize = dims.iter().product();
    let side: Vec<usize> = if inside * inside > total {
        (0..dims.len()).filter(|k| !keep.contains(k)).collect()
    } else {
        keep.to_vec()
    };
    if side.is_empty() {
        return Ok(T::zero());
    }
    entropy_of_spectrum(&state.reduced_density(dims, &side)?.eigenvalues()?, LogBase::Two)
}

fn union(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Argument("system and fragment overlap".into()));
    }
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    Ok(u)
}

/// System entangled with a list of record-carrying fragments:
/// `sum_i sqrt(w_i) |i>_S ⊗_f |r_{f,i}>`. Factor 0 is the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchingState<T: Real> {
    pub system_dim: usize,
    pub fragment_dims: Vec<usize>,
    pub state: StateVector<T>,
    /// `record_overlaps[f][[i, j]] = <r_{f,i}|r_{f,j}>`.
    pub record_overlaps: Vec<Array2<Cplx<T>>>,
}

impl<T: Real> BranchingState<T> {
    /// `records[f][i]` is the state of fragment `f` in branch `i`.
    pub fn from_records(weights: &[T], records: &[Vec<StateVector<T>>]) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Argument("no branches".into()));
        }
        let total: T = weights.iter().copied().sum();
        if weights.iter().any(|w| !(*w >= T::zero())) || (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Argument("branch weights must be non-negative and sum to 1".into()));
        }
        let mut fragment_dims = Vec::with_capacity(records.len());
        let mut record_overlaps = Vec::with_capacity(records.len());
        for (f, rec) in records.iter().enumerate() {
            if rec.len() != n {
                return Err(Error::Shape(format!("fragment {} has {} records for {} branches", f, rec.len(), n)));
            }
            let d = rec[0].dim();
            if rec.iter().any(|r| r.dim() != d || !r.is_normalized(T::tol(1e-12))) {
                return Err(Error::InvalidState(format!("fragment {} records must be normalized and equal-dimensional", f)));
            }
            fragment_dims.push(d);
            record_overlaps.push(Array2::from_shape_fn((n, n), |(i, j)| rec[i].inner(&rec[j]).expect("same dimension")));
        }
        let total_dim = fragment_dims.iter().try_fold(n, |acc, d| acc.checked_mul(*d)).filter(|d| *d <= crate::qcore::ops::DEFAULT_MAX_DIM);
        if total_dim.is_none() {
            return Err(Error::Size("branching state exceeds the dimension cap".into()));
        }
        let mut amps = vec![c(T::zero()); total_dim.expect("checked")];
        for (i, &w) in weights.iter().enumerate() {
            let mut parts = vec![StateVector::basis(n, i)?];
            parts.extend(records.iter().map(|r| r[i].clone()));
            let branch = tensor_all(&parts)?;
            let a = w.sqrt();
            for (acc, z) in amps.iter_mut().zip(branch.amplitudes().iter()) {
                *acc += *z * a;
            }
        }
        Ok(Self { system_dim: n, fragment_dims, state: StateVector::new(amps)?, record_overlaps })
    }

    /// Two equal-weight branches, each fragment a qubit holding `|0>` or
    /// `|1>`.
    pub fn perfect_records(n_fragments: usize) -> Result<Self> {
        Self::qubit_records(n_fragments, T::zero())
    }

    /// Two equal-weight branches with qubit records of real overlap `overlap`:
    /// `|0>` and `overlap |0> + sqrt(1 - overlap^2) |1>`.
    pub fn qubit_records(n_fragments: usize, overlap: T) -> Result<Self> {
        if !(overlap >= T::zero() && overlap <= T::one()) {
            return Err(Error::Argument("overlap must lie in [0, 1]".into()));
        }
        let r0 = StateVector::basis(2, 0)?;
        let r1 = StateVector::new(vec![c(overlap), c((T::one() - overlap * overlap).sqrt())])?;
        let half = T::lit(0.5);
        Self::from_records(&[half, half], &vec![vec![r0, r1]; n_fragments])
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.system_dim).chain(self.fragment_dims.iter().copied()).collect()
    }

    pub fn n_fragments(&self) -> usize {
        self.fragment_dims.len()
    }

    pub fn system_entropy(&self) -> Result<T> {
        pure_entropy(&self.state, &self.dims(), &[0])
    }

    /// `I(S : F)` for fragments numbered from 0.
    pub fn mutual_information(&self, fragments: &[usize]) -> Result<T> {
        let shifted: Vec<usize> = fragments.iter().map(|f| f + 1).collect();
        if fragments.iter().any(|f| *f >= self.n_fragments()) {
            return Err(Error::Argument("fragment index out of range".into()));
        }
        mutual_information_pure(&self.state, &self.dims(), &[0], &shifted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedundancyProfile<T: Real> {
    pub fragment_sizes: Vec<usize>,
    /// Mean `I(S:F)` over the evaluated subsets, bits.
    pub mutual_information: Vec<T>,
    pub system_entropy: T,
    /// `H(S) - I` per size.
    pub deficits: Vec<T>,
    pub subsets_evaluated: Vec<usize>,
    pub exhaustive: Vec<bool>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Fragment subsets of size `k` out of `n` used by [`redundancy_profile`]:
/// all of them when there are at most [`EXHAUSTIVE_SUBSET_LIMIT`], otherwise
/// [`SAMPLED_SUBSETS`] drawn with a generator seeded from `seed` and `k`.
/// The flag reports which.
pub fn fragment_subsets(n: usize, k: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    if binomial(n, k) <= EXHAUSTIVE_SUBSET_LIMIT {
        return (combinations(n, k), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let subsets = (0..SAMPLED_SUBSETS)
        .map(|_| {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    (subsets, false)
}

/// Mean mutual information between the system and fragments of each size
/// `1..=max_size`.
pub fn redundancy_profile<T: Real>(state: &BranchingState<T>, max_size: usize, seed: u64) -> Result<RedundancyProfile<T>> {
    let n = state.n_fragments();
    if max_size == 0 || max_size > n {
        return Err(Error::Argument(format!("fragment sizes 1..={} exceed the {} fragments", max_size, n)));
    }
    let hs = state.system_entropy()?;
    let mut profile = RedundancyProfile {
        fragment_sizes: (1..=max_size).collect(),
        mutual_information: Vec::with_capacity(max_size),
        system_entropy: hs,
        deficits: Vec::with_capacity(max_size),
        subsets_evaluated: Vec::with_capacity(max_size),
        exhaustive: Vec::with_capacity(max_size),
    };
    for k in 1..=max_size {
        let (subsets, exhaustive) = fragment_subsets(n, k, seed);
        let values = parallel::map_ordered(&subsets, |s| state.mutual_information(s));
        let mut sum = T::zero();
        for v in values {
            sum += v?;
        }
        let mean = sum / T::from_usize_lossy(subsets.len());
        profile.mutual_information.push(mean);
        profile.deficits.push(hs - mean);
        profile.subsets_evaluated.push(subsets.len());
        profile.exhaustive.push(exhaustive);
    }
    Ok(profile)
}

/// Overlaps between the two branches at each stage of the chain
/// object → photon → rhodopsin → neurons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOverlaps<T: Real> {
    pub photon: T,
    pub rhodopsin: T,
    pub neurons: T,
}

/// Chain with the canonical firing patterns `101` and `011`.
pub fn build_chain<T: Real>(overlaps: ChainOverlaps<T>) -> Result<BranchingState<T>> {
    build_chain_with_patterns(overlaps, &[1, 0, 1], &[0, 1, 1])
}

/// Two-branch chain over object ⊗ photon ⊗ rhodopsin ⊗ neuron register.
///
/// Branch 1 carries `|0>` for photon and rhodopsin and neuron pattern `a`;
/// branch 2 carries `eps |0> + sqrt(1 - eps^2) |1>` at each stage and
/// `eps_N |a> + sqrt(1 - eps_N^2) |b>` on the neurons.
pub fn build_chain_with_patterns<T: Real>(overlaps: ChainOverlaps<T>, pattern_a: &[u8], pattern_b: &[u8]) -> Result<BranchingState<T>> {
    let eps = [overlaps.photon, overlaps.rhodopsin, overlaps.neurons];
    if eps.iter().any(|e| !(*e >= T::zero() && *e <= T::one())) {
        return Err(Error::Argument("overlaps must lie in [0, 1]".into()));
    }
    if pattern_a.is_empty() || pattern_a.len() != pattern_b.len() || pattern_a == pattern_b || pattern_a.iter().chain(pattern_b).any(|b| *b > 1) {
        return Err(Error::Argument("firing patterns must be distinct bit strings of equal length".into()));
    }
    let index = |p: &[u8]| p.iter().fold(0usize, |acc, b| acc * 2 + *b as usize);
    let nd = 1usize << pattern_a.len();
    let stage = |e: T| -> Result<Vec<StateVector<T>>> {
        Ok(vec![StateVector::basis(2, 0)?, StateVector::new(vec![c(e), c((T::one() - e * e).sqrt())])?])
    };
    let mut nb = vec![c(T::zero()); nd];
    nb[index(pattern_a)] = c(overlaps.neurons);
    nb[index(pattern_b)] = c((T::one() - overlaps.neurons * overlaps.neurons).sqrt());
    let neurons = vec![StateVector::basis(nd, index(pattern_a))?, StateVector::new(nb)?];
    let half = T::lit(0.5);
    BranchingState::from_records(&[half, half], &[stage(overlaps.photon)?, stage(overlaps.rhodopsin)?, neurons])
}

/// `|rho_12|` of the object after tracing out everything else.
pub fn object_coherence<T: Real>(chain: &BranchingState<T>) -> Result<T> {
    Ok(chain.state.reduced_density(&chain.dims(), &[0])?.get(0, 1).norm())
}

/// `exp(-rate t)`.
pub fn neuron_dephase_estimate<T: Real>(rate: T, t: T) -> Result<T> {
    if !(rate > T::zero()) || !(t >= T::zero()) {
        return Err(Error::Argument("rate must be positive and t non-negative".into()));
    }
    Ok((-rate * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_records_plateau() {
        let st = BranchingState::<f64>::perfect_records(4).unwrap();
        assert!((st.system_entropy().unwrap() - 1.0).abs() < 1e-12);
        let p = redundancy_profile(&st, 4, 0).unwrap();
        for i in &p.mutual_information[..3] {
            assert!((i - 1.0).abs() < 1e-9);
        }
        assert!((p.mutual_information[3] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_coupling_is_silent() {
        let st = BranchingState::<f64>::qubit_records(3, 1.0).unwrap();
        let p = redundancy_profile(&st, 3, 0).unwrap();
        assert!(p.mutual_information.iter().all(|i| i.abs() < 1e-9));
    }

    #[test]
    fn chain_product_law() {
        let ch = build_chain(ChainOverlaps { photon: 0.5, rhodopsin: 0.2, neurons: 1.0 }).unwrap();
        assert!((object_coherence(&ch).unwrap() - 0.05f64).abs() < 1e-12);
        let zero = build_chain(ChainOverlaps { photon: 0.0f64, rhodopsin: 0.0, neurons: 0.0 }).unwrap();
        assert_eq!(object_coherence(&zero).unwrap(), 0.0);
        let one = build_chain(ChainOverlaps { photon: 1.0f64, rhodopsin: 1.0, neurons: 1.0 }).unwrap();
        assert!((object_coherence(&one).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn neuron_estimate() {
        assert_eq!(neuron_dephase_estimate(1.0 / NEURON_TAU_SECONDS, 0.0).unwrap(), 1.0);
        assert!((neuron_dephase_estimate(1.0 / NEURON_TAU_SECONDS, NEURON_TAU_SECONDS).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(neuron_dephase_estimate(1.0 / NEURON_TAU_SECONDS, 1e-18).unwrap() < 1e-40);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }
}
