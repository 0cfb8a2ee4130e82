use crate::error::{dim_err, Result, RopError};
use crate::matrix_core::{dot, DenseMatrix};
use crate::scalar::Scalar;

/// Default cap on `m * n` for materializing a map as an `L × mn` matrix.
pub const DEFAULT_EXPLICIT_CAP: usize = 4096;

/// A linear map `R^{m×n} -> R^L`, `X ↦ (<A_j, X>)_j`.
pub trait LinearMap<T: Scalar>: Sync {
    /// `(m, n)` of the matrices the map acts on.
    fn input_shape(&self) -> (usize, usize);

    /// Number of measurements `L`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The j-th measurement matrix `A_j`.
    fn measurement_matrix(&self, j: usize) -> DenseMatrix<T>;

    fn apply(&self, x: &DenseMatrix<T>) -> Result<Vec<T>>;

    /// `A*(z) = sum_j z_j A_j`.
    fn adjoint(&self, z: &[T]) -> Result<DenseMatrix<T>>;

    /// `K_jk = <A_j, A_k>`.
    fn gram(&self) -> DenseMatrix<T> {
        self.left_weighted_gram(&DenseMatrix::identity(self.input_shape().0))
    }

    /// `G_jk = <A_j, P A_k>` for a symmetric `m × m` weight `P`.
    fn left_weighted_gram(&self, p: &DenseMatrix<T>) -> DenseMatrix<T> {
        let l = self.len();
        let mats: Vec<DenseMatrix<T>> = (0..l).map(|j| self.measurement_matrix(j)).collect();
        let weighted: Vec<DenseMatrix<T>> = mats.iter().map(|a| p * a).collect();
        let mut g = DenseMatrix::zeros(l, l);
        for j in 0..l {
            for k in j..l {
                let v = dot(mats[j].as_slice(), weighted[k].as_slice());
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    /// Row j is the row-major vectorization of `A_j`.
    fn explicit(&self, cap: usize) -> Result<DenseMatrix<T>> {
        let (m, n) = self.input_shape();
        if m * n > cap {
            return Err(RopError::Resource(format!(
                "explicit operator needs m*n = {} columns, cap is {cap}",
                m * n
            )));
        }
        let l = self.len();
        if l == 0 {
            return Err(RopError::Argument(
                "explicit operator of an empty map".into(),
            ));
        }
        let mut out = DenseMatrix::zeros(l, m * n);
        for j in 0..l {
            let a = self.measurement_matrix(j);
            out.as_mut_slice()[j * m * n..(j + 1) * m * n].copy_from_slice(a.as_slice());
        }
        Ok(out)
    }
}

pub(crate) fn check_input<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    x: &DenseMatrix<T>,
) -> Result<()> {
    let (m, n) = map.input_shape();
    if x.shape() != (m, n) {
        return Err(dim_err(
            format!("{m}x{n}"),
            format!("{}x{}", x.rows(), x.cols()),
        ));
    }
    Ok(())
}

pub(crate) fn check_measurements<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    z: &[T],
) -> Result<()> {
    if z.len() != map.len() {
        return Err(dim_err(
            format!("{} measurements", map.len()),
            format!("{}", z.len()),
        ));
    }
    Ok(())
}

/// A map given by an explicit stack of measurement matrices, e.g. the
/// debiased symmetric operator.
#[derive(Clone, Debug)]
pub struct ExplicitMap<T> {
    m: usize,
    n: usize,
    mats: Vec<DenseMatrix<T>>,
}

impl<T: Scalar> ExplicitMap<T> {
    pub fn new(m: usize, n: usize, mats: Vec<DenseMatrix<T>>) -> Result<Self> {
        if let Some(bad) = mats.iter().find(|a| a.shape() != (m, n)) {
            return Err(dim_err(
                format!("{m}x{n}"),
                format!("{}x{}", bad.rows(), bad.cols()),
            ));
        }
        Ok(Self { m, n, mats })
    }

    pub fn matrices(&self) -> &[DenseMatrix<T>] {
        &self.mats
    }
}

impl<T: Scalar> LinearMap<T> for ExplicitMap<T> {
    fn input_shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn len(&self) -> usize {
        self.mats.len()
    }

    fn measurement_matrix(&self, j: usize) -> DenseMatrix<T> {
        self.mats[j].clone()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> Result<Vec<T>> {
        check_input(self, x)?;
        Ok(self
            .mats
            .iter()
            .map(|a| dot(a.as_slice(), x.as_slice()))
            .collect())
    }

    fn adjoint(&self, z: &[T]) -> Result<DenseMatrix<T>> {
        check_measurements(self, z)?;
        let mut out = DenseMatrix::zeros(self.m, self.n);
        for (a, &zj) in self.mats.iter().zip(z) {
            out.axpy(zj, a);
        }
        Ok(out)
    }
}
