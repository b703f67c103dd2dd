use super::csr::SparseMatrix;
use super::dense::{DenseCholesky, DenseMatrix};
use super::eig_sym::symmetric_eigen;
use super::triangular::TriangularFactor;
use crate::error::{check_len, Error, Result};

/// A factorization N = L Lᵀ of a symmetric positive definite matrix.
pub trait SymmetricFactor {
    fn dim(&self) -> usize;
    /// x <- L⁻¹ x
    fn solve_lower(&self, x: &mut [f64]);
    /// x <- L⁻ᵀ x
    fn solve_upper(&self, x: &mut [f64]);
    /// x <- L x
    fn mul_lower(&self, x: &mut [f64]);
    /// x <- Lᵀ x
    fn mul_upper(&self, x: &mut [f64]);
}

impl SymmetricFactor for TriangularFactor {
    fn dim(&self) -> usize {
        TriangularFactor::dim(self)
    }
    fn solve_lower(&self, x: &mut [f64]) {
        self.solve_lower_in_place(x)
    }
    fn solve_upper(&self, x: &mut [f64]) {
        self.solve_upper_in_place(x)
    }
    fn mul_lower(&self, x: &mut [f64]) {
        self.mul_lower_in_place(x)
    }
    fn mul_upper(&self, x: &mut [f64]) {
        self.mul_upper_in_place(x)
    }
}

impl SymmetricFactor for DenseCholesky {
    fn dim(&self) -> usize {
        DenseCholesky::dim(self)
    }
    fn solve_lower(&self, x: &mut [f64]) {
        self.solve_lower_in_place(x)
    }
    fn solve_upper(&self, x: &mut [f64]) {
        self.solve_upper_in_place(x)
    }
    fn mul_lower(&self, x: &mut [f64]) {
        self.mul_lower_in_place(x)
    }
    fn mul_upper(&self, x: &mut [f64]) {
        self.mul_upper_in_place(x)
    }
}

/// Smallest and largest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRange {
    pub min: f64,
    pub max: f64,
}

impl EigenRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { min: self.min * s, max: self.max * s }
    }
}

/// Dense L⁻¹ M L⁻ᵀ for a symmetric operator M given by its action.
///
/// Row j is formed from column j; the result is symmetrized.
pub fn pencil_matrix<F: SymmetricFactor + ?Sized>(
    mut apply: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    factor: &F,
) -> Result<DenseMatrix> {
    let n = factor.dim();
    let mut z = DenseMatrix::zeros(n, n);
    let mut v = vec![0.0; n];
    let mut u = vec![0.0; n];
    for j in 0..n {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[j] = 1.0;
        factor.solve_upper(&mut v);
        apply(&v, &mut u)?;
        factor.solve_lower(&mut u);
        z.row_mut(j).copy_from_slice(&u);
    }
    z.symmetrize();
    Ok(z)
}

/// Extreme eigenvalues of a dense symmetric matrix.
pub fn sym_extremes(z: &DenseMatrix) -> Result<EigenRange> {
    let e = symmetric_eigen(z, false)?;
    match (e.values.first(), e.values.last()) {
        (Some(&a), Some(&b)) => Ok(EigenRange::new(a, b)),
        _ => Err(Error::Contract("empty pencil".into())),
    }
}

/// Extreme eigenvalues of the pencil (M, N) with N = L Lᵀ, computed as the
/// extremes of the symmetric matrix L⁻¹ M L⁻ᵀ.
pub fn generalized_sym_eig_extremes<F: SymmetricFactor + ?Sized>(
    m: &SparseMatrix,
    n_factor: &F,
) -> Result<EigenRange> {
    check_len("pencil dimension", n_factor.dim(), m.nrows())?;
    if !m.is_symmetric(1e-12) {
        return Err(Error::Contract("pencil matrix M is not symmetric".into()));
    }
    let z = pencil_matrix(|x, y| m.spmv_into(x, y), n_factor)?;
    sym_extremes(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ic0;

    fn spd(n: usize, shift: f64) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, shift + i as f64));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identical_pencil_is_unit() {
        let m = spd(12, 3.0);
        let f = ic0(&m).unwrap();
        let r = generalized_sym_eig_extremes(&m, &f).unwrap();
        assert!((r.min - 1.0).abs() < 1e-12 && (r.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_pencil_scales() {
        let m = spd(10, 4.0);
        let f = ic0(&m).unwrap();
        let r = generalized_sym_eig_extremes(&m.scaled(2.5), &f).unwrap();
        assert!((r.min - 2.5).abs() < 1e-12 && (r.max - 2.5).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_dense_generalized_oracle() {
        // oracle: eigenvalues of N⁻¹M via nonsymmetric QR on the explicit product
        let m = spd(9, 1.0);
        let nmat = spd(9, 5.0);
        let f = ic0(&nmat).unwrap();
        let r = generalized_sym_eig_extremes(&m, &f).unwrap();
        let prod = nmat.to_dense().inverse().unwrap().matmul(&m.to_dense()).unwrap();
        let vals = crate::linalg::hessenberg_qr(&prod, false).unwrap().values;
        let lo = vals.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((r.min - lo).abs() < 1e-10 && (r.max - hi).abs() < 1e-10);
    }
}
