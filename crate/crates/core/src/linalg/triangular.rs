use super::csr::SparseMatrix;
use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Ic0,
    CompleteCholesky,
    Diagonal,
}

/// Sparse lower-triangular factor L with M ≈ L Lᵀ.
///
/// Rows are stored in CSR with the diagonal as the last entry of each row.
#[derive(Clone, Debug)]
pub struct TriangularFactor {
    l: SparseMatrix,
    kind: FactorKind,
}

impl TriangularFactor {
    pub fn new(l: SparseMatrix, kind: FactorKind) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::Contract("triangular factor must be square".into()));
        }
        for i in 0..l.nrows() {
            let (c, v) = l.row(i);
            match c.last() {
                Some(&j) if j == i => {
                    if v[v.len() - 1] == 0.0 {
                        return Err(Error::SingularFactor { row: i });
                    }
                }
                Some(&j) if j > i => {
                    return Err(Error::Contract(format!("entry ({i}, {j}) above the diagonal")))
                }
                _ => return Err(Error::SingularFactor { row: i }),
            }
        }
        Ok(Self { l, kind })
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(SparseMatrix::diagonal(d), FactorKind::Diagonal)
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> &SparseMatrix {
        &self.l
    }

    pub fn nnz(&self) -> usize {
        self.l.nnz()
    }

    /// x <- L⁻¹ x
    pub fn solve_lower_in_place(&self, x: &mut [f64]) {
        let (ip, ix, d) = (self.l.indptr(), self.l.indices(), self.l.data());
        for i in 0..x.len() {
            let end = ip[i + 1] - 1;
            let mut s = x[i];
            for k in ip[i]..end {
                s -= d[k] * x[ix[k]];
            }
            x[i] = s / d[end];
        }
    }

    /// x <- L⁻ᵀ x
    pub fn solve_upper_in_place(&self, x: &mut [f64]) {
        let (ip, ix, d) = (self.l.indptr(), self.l.indices(), self.l.data());
        for i in (0..x.len()).rev() {
            let end = ip[i + 1] - 1;
            x[i] /= d[end];
            let xi = x[i];
            for k in ip[i]..end {
                x[ix[k]] -= d[k] * xi;
            }
        }
    }

    /// x <- L x
    pub fn mul_lower_in_place(&self, x: &mut [f64]) {
        let (ip, ix, d) = (self.l.indptr(), self.l.indices(), self.l.data());
        for i in (0..x.len()).rev() {
            let mut s = 0.0;
            for k in ip[i]..ip[i + 1] {
                s += d[k] * x[ix[k]];
            }
            x[i] = s;
        }
    }

    /// x <- Lᵀ x
    pub fn mul_upper_in_place(&self, x: &mut [f64]) {
        let (ip, ix, d) = (self.l.indptr(), self.l.indices(), self.l.data());
        for i in 0..x.len() {
            let end = ip[i + 1] - 1;
            let xi = x[i];
            x[i] = d[end] * xi;
            for k in ip[i]..end {
                x[ix[k]] += d[k] * xi;
            }
        }
    }

    /// (L Lᵀ)⁻¹ b
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("factor solve", self.dim(), b.len())?;
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        Ok(x)
    }

    /// L Lᵀ as a sparse matrix.
    pub fn product(&self) -> SparseMatrix {
        self.l.matmul(&self.l.transpose()).expect("square factor")
    }
}

/// Solves L x = b, or Lᵀ x = b when `transposed`.
pub fn solve_triangular(f: &TriangularFactor, b: &[f64], transposed: bool) -> Result<Vec<f64>> {
    check_len("triangular solve", f.dim(), b.len())?;
    let mut x = b.to_vec();
    if transposed {
        f.solve_upper_in_place(&mut x);
    } else {
        f.solve_lower_in_place(&mut x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factor() -> TriangularFactor {
        let l = SparseMatrix::from_triplets(
            4,
            4,
            &[(0, 0, 2.0), (1, 0, -1.0), (1, 1, 3.0), (2, 1, 0.5), (2, 2, 1.5), (3, 0, 1.0), (3, 3, 4.0)],
        );
        TriangularFactor::new(l, FactorKind::Ic0).unwrap()
    }

    #[test]
    fn solves_invert_products() {
        let f = factor();
        let dense = f.l().to_dense();
        let b = vec![1.0, -2.0, 3.0, 0.25];
        let x = solve_triangular(&f, &b, false).unwrap();
        let r = dense.matvec(&x).unwrap();
        let xt = solve_triangular(&f, &b, true).unwrap();
        let rt = dense.transpose().matvec(&xt).unwrap();
        for i in 0..4 {
            assert!((r[i] - b[i]).abs() < 1e-14);
            assert!((rt[i] - b[i]).abs() < 1e-14);
        }
        let mut y = b.clone();
        f.mul_upper_in_place(&mut y);
        let yd = dense.transpose().matvec(&b).unwrap();
        for i in 0..4 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let l = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(matches!(
            TriangularFactor::new(l, FactorKind::Ic0),
            Err(Error::SingularFactor { row: 1 })
        ));
    }
}
