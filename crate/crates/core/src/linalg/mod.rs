//! Sparse and dense kernels: CSR storage, incomplete Cholesky, triangular
//! solves, dense symmetric and nonsymmetric eigensolvers, symmetric pencils
//! and Matrix Market I/O.

mod csr;
mod dense;
mod eig_general;
mod eig_sym;
mod ic0;
pub mod mm;
mod pencil;
mod triangular;

pub use csr::SparseMatrix;
pub use dense::{DenseCholesky, DenseMatrix};
pub use eig_general::{dense_eig_general, hessenberg_qr, GeneralEigen};
pub use eig_sym::{dense_eig_symmetric, symmetric_eigen, SymEigen};
pub use ic0::{ic0, ic0_shifted};
pub use pencil::{
    generalized_sym_eig_extremes, pencil_matrix, sym_extremes, EigenRange, SymmetricFactor,
};
pub use triangular::{solve_triangular, FactorKind, TriangularFactor};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
