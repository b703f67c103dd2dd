use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::tolerances::BLOCKED_EIG_THRESHOLD;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DenseMatrix>,
}

/// Eigenvalues of a symmetric matrix, ascending, as complex numbers with zero
/// imaginary part.
pub fn dense_eig_symmetric(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    Ok(symmetric_eigen(m, false)?
        .values
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect())
}

pub fn symmetric_eigen(m: &DenseMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::Contract("symmetric eigensolver needs a square matrix".into()));
    }
    let scale = m.max_abs();
    if m.asymmetry() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (asymmetry {:e}, scale {:e})",
            m.asymmetry(),
            scale
        )));
    }
    if n == 0 {
        return Ok(SymEigen { values: vec![], vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)) });
    }
    #[cfg(feature = "large-dense")]
    if n > BLOCKED_EIG_THRESHOLD {
        return blocked::symmetric(m, want_vectors);
    }
    let _ = BLOCKED_EIG_THRESHOLD;
    tridiagonal_ql(m, want_vectors)
}

/// Householder tridiagonalization followed by implicit QL.
pub(crate) fn tridiagonal_ql(m: &DenseMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = m.rows();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, want_vectors);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = want_vectors.then(|| DenseMatrix::from_fn(n, n, |i, j| v[i][order[j]]));
    Ok(SymEigen { values, vectors })
}

fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for j in 0..n {
            d[j] = v[j][j];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 30 * n.max(1);
    let mut total = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                total += 1;
                if total > max_iter {
                    let sub = e.iter().map(|x| x * x).sum::<f64>().sqrt();
                    return Err(Error::NoConvergence { sweeps: total, subdiag_norm: sub });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for row in v.iter_mut() {
                            let hk = row[i + 1];
                            row[i + 1] = s * row[i] + c * hk;
                            row[i] = c * row[i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(feature = "large-dense")]
pub(crate) mod blocked {
    use super::SymEigen;
    use crate::error::{Error, Result};
    use crate::linalg::DenseMatrix;

    pub(crate) fn to_faer(m: &DenseMatrix) -> faer::Mat<f64> {
        faer::Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
    }

    pub(crate) fn symmetric(m: &DenseMatrix, want_vectors: bool) -> Result<SymEigen> {
        let a = to_faer(m);
        let fail = |e| Error::Contract(format!("blocked symmetric eigensolver failed: {e:?}"));
        if !want_vectors {
            let mut values = a.self_adjoint_eigenvalues(faer::Side::Lower).map_err(fail)?;
            values.sort_by(f64::total_cmp);
            return Ok(SymEigen { values, vectors: None });
        }
        let evd = a.self_adjoint_eigen(faer::Side::Lower).map_err(fail)?;
        let n = m.rows();
        let s = evd.S();
        let u = evd.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| s[x].total_cmp(&s[y]));
        let values = order.iter().map(|&k| s[k]).collect();
        let vectors = DenseMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
        Ok(SymEigen { values, vectors: Some(vectors) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            ((a + 1.0) * 0.37 + (b + 2.0) * 0.11).sin() + if i == j { 0.5 * i as f64 } else { 0.0 }
        })
    }

    #[test]
    fn diagonal_matrix_is_sorted() {
        let m = DenseMatrix::from_rows(&[&[3.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let e = symmetric_eigen(&m, true).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn residuals_are_small() {
        let m = test_matrix(40);
        let e = tridiagonal_ql(&m, true).unwrap();
        let v = e.vectors.unwrap();
        let norm = m.frobenius();
        for k in 0..40 {
            let x = v.col(k);
            let mx = m.matvec(&x).unwrap();
            let r: f64 = mx.iter().zip(&x).map(|(a, b)| (a - e.values[k] * b).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-10 * norm, "residual {r}");
        }
        let vtv = v.transpose().matmul(&v).unwrap();
        assert!(vtv.add_scaled(1.0, &DenseMatrix::identity(40), -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn values_only_path_agrees() {
        let m = test_matrix(25);
        let a = tridiagonal_ql(&m, true).unwrap().values;
        let b = tridiagonal_ql(&m, false).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonsymmetric() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(dense_eig_symmetric(&m), Err(Error::Contract(_))));
    }

    #[cfg(feature = "large-dense")]
    #[test]
    fn blocked_backend_agrees_with_ql() {
        let m = test_matrix(120);
        let a = tridiagonal_ql(&m, false).unwrap().values;
        let b = blocked::symmetric(&m, false).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11 * (1.0 + x.abs()));
        }
    }
}
