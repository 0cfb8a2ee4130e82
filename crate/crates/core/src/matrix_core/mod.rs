//! Dense real-matrix primitives: SVD, Schatten norms, best rank-r splits,
//! inner products, and the spectahedron projection.

mod dense;
mod eigen;
mod schatten;
mod spectahedron;
mod svd;

pub(crate) use dense::dot;
pub use dense::DenseMatrix;
pub use eigen::{symmetric_eigen, Cholesky, SymmetricEigen};
pub use schatten::{
    frobenius_inner, lp_norm, numerical_rank, pow_sum, rank_split, schatten_norm, schatten_pow,
    RankSplit, DEFAULT_RANK_TOL,
};
pub use spectahedron::{project_simplex, spectahedron_project};
pub use svd::{singular_values, svd, SingularDecomposition};
