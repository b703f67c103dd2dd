use super::{true_relative_residual, KrylovOptions, KrylovResult, LinearOperator, Method, Preconditioner};
use crate::error::{check_len, Result};
use crate::linalg::{axpy, dot, norm2};
use crate::tolerances::ARNOLDI_HAPPY;

/// Full (unrestarted) right-preconditioned GMRES from x0 = 0 with modified
/// Gram-Schmidt Arnoldi and Givens rotations. Stops when the least-squares
/// residual satisfies ‖b - A x_k‖ <= tol ‖b‖. The preconditioner must be a
/// fixed linear operator.
pub fn gmres<A, P>(a: &A, b: &[f64], p: &P, opts: &KrylovOptions) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = a.dim();
    check_len("GMRES right-hand side", n, b.len())?;
    check_len("GMRES preconditioner", n, p.dim())?;
    let beta = norm2(b);
    let mut history = vec![beta];
    if beta == 0.0 {
        return Ok(KrylovResult { x: vec![0.0; n], method: Method::Gmres, iterations: 0, converged: true, history, rel_residual: 0.0 });
    }
    let maxit = opts.maxit.min(n).max(1);
    let mut v: Vec<Vec<f64>> = vec![b.iter().map(|x| x / beta).collect()];
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut converged = false;
    let mut k = 0;
    while k < maxit {
        p.apply_inverse(&v[k], &mut z)?;
        a.apply(&z, &mut w)?;
        let mut h = vec![0.0; k + 2];
        for j in 0..=k {
            h[j] = dot(&w, &v[j]);
            axpy(-h[j], &v[j], &mut w);
        }
        let hk1 = norm2(&w);
        h[k + 1] = hk1;
        for j in 0..k {
            let t = cs[j] * h[j] + sn[j] * h[j + 1];
            h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
            h[j] = t;
        }
        let denom = h[k].hypot(h[k + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
        cs.push(c);
        sn.push(s);
        h[k] = denom;
        h.truncate(k + 1);
        r_cols.push(h);
        g.push(-s * g[k]);
        g[k] *= c;
        k += 1;
        let res = g[k].abs();
        history.push(res);
        if res <= opts.tol * beta {
            converged = true;
            break;
        }
        if hk1 < ARNOLDI_HAPPY * beta {
            converged = res <= opts.tol * beta;
            break;
        }
        v.push(w.iter().map(|x| x / hk1).collect());
    }
    // back substitution R y = g
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= r_cols[j][i] * y[j];
        }
        y[i] = if r_cols[i][i] != 0.0 { s / r_cols[i][i] } else { 0.0 };
    }
    let mut u = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        axpy(*yj, &v[j], &mut u);
    }
    let mut x = vec![0.0; n];
    p.apply_inverse(&u, &mut x)?;
    let rel_residual = true_relative_residual(a, &x, b)?;
    Ok(KrylovResult { x, method: Method::Gmres, iterations: k, converged, history, rel_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Identity;
    use crate::linalg::{DenseMatrix, SparseMatrix};

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { 4.0 } else if j == i + 1 { 1.5 } else if i == j + 2 { -1.0 } else { 0.0 });
        let xt: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let b = a.matvec(&xt).unwrap();
        let r = gmres(&a, &b, &Identity(n), &KrylovOptions { tol: 1e-13, maxit: 100 }).unwrap();
        assert!(r.converged);
        assert!(r.rel_residual < 1e-12);
        assert_eq!(r.history.len(), r.iterations + 1);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = SparseMatrix::identity(12);
        let b: Vec<f64> = (0..12).map(|i| i as f64 + 1.0).collect();
        let r = gmres(&a, &b, &Identity(12), &KrylovOptions { tol: 1e-13, maxit: 50 }).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn diagonal_with_k_distinct_values_needs_k_iterations() {
        let d: Vec<f64> = (0..20).map(|i| 1.0 + (i % 4) as f64).collect();
        let a = SparseMatrix::diagonal(&d);
        let b = vec![1.0; 20];
        let r = gmres(&a, &b, &Identity(20), &KrylovOptions { tol: 1e-13, maxit: 50 }).unwrap();
        assert_eq!(r.iterations, 4);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = SparseMatrix::identity(3);
        let r = gmres(&a, &[0.0; 3], &Identity(3), &KrylovOptions { tol: 1e-13, maxit: 5 }).unwrap();
        assert_eq!(r.x, vec![0.0; 3]);
        assert_eq!(r.iterations, 0);
    }
}
