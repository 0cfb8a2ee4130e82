use crate::error::{dim_err, Result, RopError};
use crate::matrix_core::{dot, DenseMatrix};
use crate::measurement::map::{check_input, check_measurements, ExplicitMap, LinearMap};
use crate::measurement::rng::{normal_vec, substream};
use crate::scalar::Scalar;

/// Measurement values `b` (or noise `z`, residuals, ...), one per measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> MeasurementVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![T::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(dim_err(self.len().to_string(), other.len().to_string()));
        }
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

impl<T> From<Vec<T>> for MeasurementVector<T> {
    fn from(values: Vec<T>) -> Self {
        Self { values }
    }
}

/// Rank-one projection ensemble: `A_j = beta_j gamma_j^T`, `j = 1..L`.
///
/// The measurement matrices are never materialized; application and adjoint
/// use the rank-one structure in `O(L (m + n))` memory.
#[derive(Clone, Debug, PartialEq)]
pub struct RopEnsemble<T> {
    m: usize,
    n: usize,
    betas: Vec<Vec<T>>,
    gammas: Vec<Vec<T>>,
    symmetric: bool,
}

impl<T: Scalar> RopEnsemble<T> {
    /// Asymmetric ensemble from explicit vector pairs.
    pub fn new(m: usize, n: usize, betas: Vec<Vec<T>>, gammas: Vec<Vec<T>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(RopError::Argument(
                "ensemble dimensions must be positive".into(),
            ));
        }
        if betas.len() != gammas.len() {
            return Err(dim_err(
                format!("{} gamma vectors", betas.len()),
                gammas.len().to_string(),
            ));
        }
        if let Some(b) = betas.iter().find(|b| b.len() != m) {
            return Err(dim_err(format!("beta of length {m}"), b.len().to_string()));
        }
        if let Some(g) = gammas.iter().find(|g| g.len() != n) {
            return Err(dim_err(format!("gamma of length {n}"), g.len().to_string()));
        }
        if betas
            .iter()
            .chain(&gammas)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(RopError::Argument("non-finite ensemble entry".into()));
        }
        Ok(Self {
            m,
            n,
            betas,
            gammas,
            symmetric: false,
        })
    }

    /// Symmetric (SROP) ensemble: `gamma_j = beta_j`.
    pub fn new_symmetric(m: usize, betas: Vec<Vec<T>>) -> Result<Self> {
        let gammas = betas.clone();
        let mut e = Self::new(m, m, betas, gammas)?;
        e.symmetric = true;
        Ok(e)
    }

    /// Draws every entry of every `beta_j` (and `gamma_j` unless symmetric) as
    /// an independent standard normal. Measurement `j` uses substream `j` of
    /// `seed`, so ensembles are reproducible bit for bit.
    pub fn sample_gaussian(
        m: usize,
        n: usize,
        l: usize,
        symmetric: bool,
        seed: u64,
    ) -> Result<Self> {
        if symmetric && m != n {
            return Err(RopError::Argument(format!(
                "symmetric ensemble needs m == n, got {m} != {n}"
            )));
        }
        if m == 0 || n == 0 {
            return Err(RopError::Argument(
                "ensemble dimensions must be positive".into(),
            ));
        }
        let mut betas = Vec::with_capacity(l);
        let mut gammas = Vec::with_capacity(l);
        for j in 0..l {
            let mut rng = substream(seed, j as u64);
            let beta = normal_vec(&mut rng, m);
            if !symmetric {
                gammas.push(normal_vec(&mut rng, n));
            }
            betas.push(beta);
        }
        if symmetric {
            Self::new_symmetric(m, betas)
        } else {
            Self::new(m, n, betas, gammas)
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn betas(&self) -> &[Vec<T>] {
        &self.betas
    }

    pub fn gammas(&self) -> &[Vec<T>] {
        &self.gammas
    }

    /// `b_j = beta_j^T X gamma_j`.
    pub fn measure(&self, x: &DenseMatrix<T>) -> Result<MeasurementVector<T>> {
        self.apply(x).map(MeasurementVector::new)
    }

    /// Debiased symmetric operator `Ã_j = A_{2j-1} - A_{2j}` with
    /// `b̃_j = b_{2j-1} - b_{2j}` for `j = 1..floor(L/2)`; an odd final
    /// measurement is dropped.
    pub fn debias(
        &self,
        b: &MeasurementVector<T>,
    ) -> Result<(ExplicitMap<T>, MeasurementVector<T>)> {
        if !self.symmetric {
            return Err(RopError::Argument(
                "debiasing requires a symmetric ensemble".into(),
            ));
        }
        check_measurements(self, &b.values)?;
        let pairs = self.len() / 2;
        let mut mats = Vec::with_capacity(pairs);
        let mut vals = Vec::with_capacity(pairs);
        for j in 0..pairs {
            let (p, q) = (&self.betas[2 * j], &self.betas[2 * j + 1]);
            mats.push(DenseMatrix::from_fn(self.m, self.m, |i, k| {
                p[i] * p[k] - q[i] * q[k]
            }));
            vals.push(b.values[2 * j] - b.values[2 * j + 1]);
        }
        Ok((
            ExplicitMap::new(self.m, self.m, mats)?,
            MeasurementVector::new(vals),
        ))
    }
}

impl<T: Scalar> LinearMap<T> for RopEnsemble<T> {
    fn input_shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn len(&self) -> usize {
        self.betas.len()
    }

    fn measurement_matrix(&self, j: usize) -> DenseMatrix<T> {
        DenseMatrix::outer(&self.betas[j], &self.gammas[j])
    }

    fn apply(&self, x: &DenseMatrix<T>) -> Result<Vec<T>> {
        check_input(self, x)?;
        Ok(self
            .betas
            .iter()
            .zip(&self.gammas)
            .map(|(beta, gamma)| {
                let xg = x.matvec(gamma).expect("shape checked");
                dot(beta, &xg)
            })
            .collect())
    }

    fn adjoint(&self, z: &[T]) -> Result<DenseMatrix<T>> {
        check_measurements(self, z)?;
        let mut out = DenseMatrix::zeros(self.m, self.n);
        let cols = self.n;
        let data = out.as_mut_slice();
        for ((beta, gamma), &zj) in self.betas.iter().zip(&self.gammas).zip(z) {
            if zj == T::zero() {
                continue;
            }
            for (i, &bi) in beta.iter().enumerate() {
                let s = zj * bi;
                for (o, &g) in data[i * cols..(i + 1) * cols].iter_mut().zip(gamma) {
                    *o = *o + s * g;
                }
            }
        }
        Ok(out)
    }

    /// `(beta_j^T P beta_k) (gamma_j^T gamma_k)`.
    fn left_weighted_gram(&self, p: &DenseMatrix<T>) -> DenseMatrix<T> {
        let l = self.len();
        let pb: Vec<Vec<T>> = self
            .betas
            .iter()
            .map(|b| p.matvec(b).expect("weight matches ensemble"))
            .collect();
        let mut g = DenseMatrix::zeros(l, l);
        for j in 0..l {
            for k in j..l {
                let v = dot(&self.betas[j], &pb[k]) * dot(&self.gammas[j], &self.gammas[k]);
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    fn gram(&self) -> DenseMatrix<T> {
        let l = self.len();
        let mut g = DenseMatrix::zeros(l, l);
        for j in 0..l {
            for k in j..l {
                let v = dot(&self.betas[j], &self.betas[k]) * dot(&self.gammas[j], &self.gammas[k]);
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }
}
