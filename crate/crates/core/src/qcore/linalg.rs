//! Dense eigen- and singular-value kernels, generic over [`Real`].
//!
//! * Hermitian eigenvalues: complex Householder reduction to a real
//!   symmetric tridiagonal matrix, then implicit QL.
//! * Lowest eigenpairs of a real symmetric tridiagonal matrix: Sturm
//!   bisection followed by inverse iteration with reorthogonalization.
//! * Thin SVD of a complex matrix: one-sided (Hestenes) Jacobi.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::{c, Cplx, Real};

const QL_MAX_ITER: usize = 64;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Conjugate transpose.
pub fn dagger<T: Real>(a: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    a.t().mapv(|z| z.conj())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect<T: Real>(a: ArrayView2<Cplx<T>>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (a[[i, j]] - a[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part is used; the caller is responsible for checking
/// Hermiticity if it matters.
pub fn hermitian_eigenvalues<T: Real>(a: ArrayView2<Cplx<T>>) -> Result<Vec<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Shape(format!("expected a square matrix, got {}x{}", n, a.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = householder_tridiagonal(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

/// Reduces a Hermitian matrix to real symmetric tridiagonal form.
///
/// Returns the diagonal and the magnitudes of the off-diagonal (the phases
/// of the complex off-diagonal are removed by a diagonal unitary, which
/// leaves the spectrum unchanged). `e` has length `n` with `e[n-1] = 0`.
fn householder_tridiagonal<T: Real>(a: ArrayView2<Cplx<T>>) -> (Vec<T>, Vec<T>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut off = vec![T::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut x: Vec<Cplx<T>> = (0..len).map(|i| m[[k + 1 + i, k]]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            off[k] = T::zero();
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { c(T::one()) };
        let alpha = -phase * norm;
        x[0] -= alpha;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        off[k] = alpha.norm();
        if vnorm == T::zero() {
            continue;
        }
        for z in x.iter_mut() {
            *z /= vnorm;
        }
        // Trailing block B <- H B H with H = I - 2 v v^dagger.
        let mut w = vec![c(T::zero()); len];
        for i in 0..len {
            let mut acc = c(T::zero());
            for j in 0..len {
                acc += m[[k + 1 + i, k + 1 + j]] * x[j];
            }
            w[i] = acc;
        }
        let beta: T = x.iter().zip(&w).map(|(v, wi)| (v.conj() * wi).re).sum();
        for i in 0..len {
            for j in 0..len {
                let upd = (x[i] * w[j].conj() + w[i] * x[j].conj()) * two
                    - x[i] * x[j].conj() * (beta * four);
                m[[k + 1 + i, k + 1 + j]] -= upd;
            }
        }
        m[[k + 1, k]] = alpha;
        m[[k, k + 1]] = alpha.conj();
        for i in 1..len {
            m[[k + 1 + i, k]] = c(T::zero());
            m[[k, k + 1 + i]] = c(T::zero());
        }
    }
    if n >= 2 {
        off[n - 2] = m[[n - 1, n - 2]].norm();
    }
    let d = (0..n).map(|i| m[[i, i]].re).collect();
    (d, off)
}

/// Implicit QL on a symmetric tridiagonal matrix (eigenvalues only).
///
/// `d` is overwritten with the unsorted eigenvalues; `e[i]` couples `i`
/// and `i + 1`.
pub fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    if e.len() != n {
        return Err(Error::Shape(format!("off-diagonal length {} != {}", e.len(), n)));
    }
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::Numeric("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut cc, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = cc * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                cc = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * cc * b;
                p = s * r;
                d[i + 1] = g + p;
                g = cc * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..d.len() {
        if q == T::zero() {
            q = tiny;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenpairs of a real symmetric tridiagonal matrix.
///
/// `d` has length `n`, `e` has length `n - 1`. Eigenvectors are unit
/// Euclidean norm and mutually orthogonal.
pub fn tridiagonal_lowest<T: Real>(d: &[T], e: &[T], k: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = d.len();
    if n == 0 || e.len() + 1 != n {
        return Err(Error::Shape(format!("tridiagonal with diag {} and off-diag {}", n, e.len())));
    }
    if k > n {
        return Err(Error::Argument(format!("requested {} eigenpairs from a {}x{} matrix", k, n, n)));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { T::zero() } + if i + 1 < n { e[i].abs() } else { T::zero() };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(T::one());
    let eps = T::epsilon();
    let half = T::lit(0.5);

    let mut values = Vec::with_capacity(k);
    for idx in 0..k {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..400 {
            let mid = half * (a + b);
            if sturm_count(d, e, mid) > idx {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= eps * scale {
                break;
            }
        }
        values.push(half * (a + b));
    }

    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
    for (idx, &lambda) in values.iter().enumerate() {
        let lu = TridiagonalLu::factor(d, e, lambda, scale)?;
        // Deterministic, non-symmetric start vector.
        let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(((i * 7919 + idx * 104_729) % 1000) as f64 * 1e-3)).collect();
        normalize_real(&mut x)?;
        let mut converged = false;
        let mut prev_diff = T::infinity();
        for iter in 0..16 {
            let mut y = x.clone();
            lu.solve(&mut y);
            for prev in &vectors {
                let proj: T = prev.iter().zip(&y).map(|(p, v)| *p * *v).sum();
                for (v, p) in y.iter_mut().zip(prev) {
                    *v -= proj * *p;
                }
            }
            normalize_real(&mut y)?;
            let dot: T = y.iter().zip(&x).map(|(a, b)| *a * *b).sum();
            if dot < T::zero() {
                y.iter_mut().for_each(|v| *v = -*v);
            }
            let diff: T = y.iter().zip(&x).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
            x = y;
            // Near-degenerate pairs stall at a roundoff floor set by the gap.
            let stalled = iter >= 3 && diff < T::tol(1e-9) && diff > prev_diff * T::lit(0.5);
            if diff < T::tol(1e-13) || stalled {
                converged = true;
                break;
            }
            prev_diff = diff;
        }
        if !converged {
            return Err(Error::Numeric(format!("inverse iteration for eigenpair {} did not converge", idx)));
        }
        vectors.push(x);
    }
    Ok((values, vectors))
}

fn normalize_real<T: Real>(x: &mut [T]) -> Result<()> {
    let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::Numeric("degenerate vector during inverse iteration".into()));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

/// LU factorization of `T - lambda I` for a symmetric tridiagonal `T`, with
/// partial pivoting.
struct TridiagonalLu<T> {
    dl: Vec<T>,
    dd: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    fn factor(d: &[T], e: &[T], lambda: T, scale: T) -> Result<Self> {
        let n = d.len();
        let mut dl = e.to_vec();
        let mut du = e.to_vec();
        let mut dd: Vec<T> = d.iter().map(|v| *v - lambda).collect();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let floor = T::epsilon() * scale;
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] == T::zero() {
                    dd[i] = floor;
                }
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for v in dd.iter_mut() {
            if v.abs() < floor {
                *v = floor.copysign(*v);
            }
        }
        Ok(Self { dl, dd, du, du2, swapped })
    }

    fn solve(&self, b: &mut [T]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.dd[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
    }
}

/// Thin singular value decomposition `a = u * diag(s) * v^dagger`.
///
/// With `r = min(m, n)`, `u` is `m x r`, `v` is `n x r`, and `s` is sorted
/// in descending order. Columns belonging to zero singular values are
/// completed to an orthonormal set.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: Array2<Cplx<T>>,
    pub s: Vec<T>,
    pub v: Array2<Cplx<T>>,
}

pub fn svd<T: Real>(a: ArrayView2<Cplx<T>>) -> Result<Svd<T>> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Err(Error::Shape("SVD of an empty matrix".into()));
    }
    if m < n {
        let t = svd(a.t().mapv(|z| z.conj()).view())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    // m >= n: orthogonalize the n columns of `w` in place.
    let mut w = a.to_owned();
    let mut v: Array2<Cplx<T>> = Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(T::one()) } else { c(T::zero()) });
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = c(T::zero());
                for i in 0..m {
                    let ap = w[[i, p]];
                    let aq = w[[i, q]];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate column q by the phase of gamma so the coupling is real.
                let ph = gamma.conj() / g;
                let zeta = (beta - alpha) / (two * g);
                let t = T::one().copysign(zeta) / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let ap = w[[i, p]];
                    let aq = w[[i, q]] * ph;
                    w[[i, p]] = ap * cs - aq * sn;
                    w[[i, q]] = ap * sn + aq * cs;
                }
                for i in 0..n {
                    let vp = v[[i, p]];
                    let vq = v[[i, q]] * ph;
                    v[[i, p]] = vp * cs - vq * sn;
                    v[[i, q]] = vp * sn + vq * cs;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numeric("Jacobi SVD did not converge".into()));
    }

    let norms: Vec<T> = (0..n).map(|j| w.column(j).iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = norms[order[0]];
    let cutoff = smax * eps * T::from_usize_lossy(m.max(n));

    let mut u = Array2::from_elem((m, n), c(T::zero()));
    let mut vs = Array2::from_elem((n, n), c(T::zero()));
    let mut s = Vec::with_capacity(n);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        vs.column_mut(dst).assign(&v.column(src));
        if norms[src] > cutoff && norms[src] > T::zero() {
            let inv = T::one() / norms[src];
            for i in 0..m {
                u[[i, dst]] = w[[i, src]] * inv;
            }
            s.push(norms[src]);
            filled += 1;
        } else {
            s.push(T::zero());
        }
    }
    complete_orthonormal(&mut u, filled)?;
    Ok(Svd { u, s, v: vs })
}

/// Fills columns `filled..` of `u` with vectors orthonormal to the first
/// `filled` columns (modified Gram-Schmidt against the canonical basis).
fn complete_orthonormal<T: Real>(u: &mut Array2<Cplx<T>>, filled: usize) -> Result<()> {
    let (m, cols) = u.dim();
    let mut next = filled;
    let mut candidate = 0;
    while next < cols {
        if candidate >= m {
            return Err(Error::Numeric("could not complete an orthonormal basis".into()));
        }
        let mut x: Array1<Cplx<T>> = Array1::from_elem(m, c(T::zero()));
        x[candidate] = c(T::one());
        candidate += 1;
        for _ in 0..2 {
            for j in 0..next {
                let col = u.column(j);
                let proj: Cplx<T> = col.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
                for i in 0..m {
                    x[i] -= col[i] * proj;
                }
            }
        }
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-3) {
            u.column_mut(next).assign(&x.mapv(|z| z / norm));
            next += 1;
        }
    }
    Ok(())
}

/// `a * b` for complex matrices.
pub fn matmul<T: Real>(a: &Array2<Cplx<T>>, b: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    a.dot(b)
}

/// Kronecker product with a-major ordering.
pub fn kron<T: Real>(a: &Array2<Cplx<T>>, b: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

pub fn identity<T: Real>(n: usize) -> Array2<Cplx<T>> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(T::one()) } else { c(T::zero()) })
}

pub fn trace<T: Real>(a: &Array2<Cplx<T>>) -> Cplx<T> {
    a.diag().iter().fold(c(T::zero()), |acc, z| acc + z)
}
