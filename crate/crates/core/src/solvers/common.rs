//! Pieces shared by the iterative solvers.

use crate::error::{Result, RopError};
use crate::matrix_core::{svd, Cholesky, DenseMatrix};
use crate::measurement::rng::{normal_vec, substream};
use crate::measurement::LinearMap;
use crate::scalar::Scalar;

/// Outcome of a single (non-restarted) solver run.
#[derive(Clone, Debug)]
pub(crate) struct Run<T> {
    pub x: DenseMatrix<T>,
    pub objective: T,
    pub trace: Vec<T>,
    pub iterations: usize,
    pub rel_change: T,
    pub stopped: bool,
}

pub(crate) fn relative_change<T: Scalar>(new: &DenseMatrix<T>, old: &DenseMatrix<T>) -> T {
    let diff = (new - old).frobenius_norm();
    let base = old.frobenius_norm().max(new.frobenius_norm());
    if base == T::zero() {
        T::zero()
    } else {
        diff / base
    }
}

pub(crate) fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub(crate) fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Solves the symmetric positive semidefinite system `G x = rhs`, adding a
/// small diagonal jitter when needed and refining against the exact `G`.
pub(crate) fn psd_solve<T: Scalar>(g: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = g.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mean_diag = g.trace() / T::from_usize_lossy(n);
    if mean_diag <= T::zero() {
        return Err(RopError::Argument("gram matrix has zero trace".into()));
    }
    let mut jitter = mean_diag * T::lit(1e-14);
    let mut chol = None;
    for _ in 0..8 {
        match Cholesky::with_jitter(g, jitter) {
            Ok(c) => {
                chol = Some(c);
                break;
            }
            Err(_) => jitter = jitter * T::lit(100.0),
        }
    }
    let chol =
        chol.ok_or_else(|| RopError::Argument("gram matrix is not positive semidefinite".into()))?;
    let mut x = chol.solve(rhs);
    for _ in 0..3 {
        let gx = g.matvec(&x)?;
        let r = sub(rhs, &gx);
        let dx = chol.solve(&r);
        x.iter_mut().zip(dx).for_each(|(a, d)| *a = *a + d);
    }
    Ok(x)
}

/// Minimum-norm solution of `A(X) = b` (least-squares when inconsistent).
pub(crate) fn min_norm_solution<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    gram: &DenseMatrix<T>,
    b: &[T],
) -> Result<DenseMatrix<T>> {
    let lambda = psd_solve(gram, b)?;
    map.adjoint(&lambda)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub(crate) fn spectral_radius<T: Scalar>(k: &DenseMatrix<T>) -> T {
    let n = k.rows();
    if n == 0 {
        return T::zero();
    }
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.01) * T::from_usize_lossy(i % 7))
        .collect();
    let mut lambda = T::zero();
    for _ in 0..200 {
        let w = k.matvec(&v).expect("square");
        let nw = norm2(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let next = nw / norm2(&v);
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - lambda).abs() <= T::lit(1e-10) * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Power iteration approaches from below; pad slightly.
    lambda * T::lit(1.01)
}

/// `U f(sigma) V^T` and the new spectrum.
pub(crate) fn spectral_map<T: Scalar>(
    x: &DenseMatrix<T>,
    f: impl Fn(T) -> T,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let dec = svd(x)?;
    let values: Vec<T> = dec.sigma.iter().map(|&s| f(s)).collect();
    Ok((dec.recompose_with(&values), values))
}

/// Gaussian matrix with Frobenius norm `scale`.
pub(crate) fn gaussian_start<T: Scalar>(m: usize, n: usize, scale: T, seed: u64) -> DenseMatrix<T> {
    let data = normal_vec(&mut substream(seed, 0xA11CE), m * n);
    let g = DenseMatrix::from_vec(m, n, data).expect("finite normals");
    let nrm = g.frobenius_norm();
    g.scale(scale / nrm)
}

/// `A*(b)` rescaled by the least-squares factor `<A(A*b), b> / ||A(A*b)||^2`.
pub(crate) fn adjoint_start<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    b: &[T],
) -> Result<DenseMatrix<T>> {
    let x = map.adjoint(b)?;
    let ax = map.apply(&x)?;
    let den: T = ax.iter().map(|&v| v * v).sum();
    if den == T::zero() {
        return Ok(x);
    }
    let num: T = ax.iter().zip(b).map(|(&u, &v)| u * v).sum();
    Ok(x.scale(num / den))
}
