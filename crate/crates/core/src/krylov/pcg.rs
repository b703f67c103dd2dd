use super::{true_relative_residual, KrylovOptions, KrylovResult, LinearOperator, Method, Preconditioner};
use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2};

/// Preconditioned conjugate gradients from x0 = 0, stopping on ‖r‖/‖b‖ <= tol.
pub fn pcg<A, P>(a: &A, b: &[f64], m: &P, opts: &KrylovOptions) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = a.dim();
    check_len("PCG right-hand side", n, b.len())?;
    check_len("PCG preconditioner", n, m.dim())?;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let nb = norm2(b);
    let mut history = vec![nb];
    if nb == 0.0 {
        return Ok(KrylovResult { x, method: Method::Pcg, iterations: 0, converged: true, history, rel_residual: 0.0 });
    }
    let mut z = vec![0.0; n];
    m.apply_inverse(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut converged = false;
    let mut it = 0;
    while it < opts.maxit {
        a.apply(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::KrylovBreakdown(format!("pᵀAp = {pq:e} at iteration {it}: operator not SPD")));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        it += 1;
        let rn = norm2(&r);
        history.push(rn);
        if rn <= opts.tol * nb {
            converged = true;
            break;
        }
        m.apply_inverse(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let rel_residual = true_relative_residual(a, &x, b)?;
    Ok(KrylovResult { x, method: Method::Pcg, iterations: it, converged, history, rel_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Identity;
    use crate::linalg::{ic0, SparseMatrix};

    fn laplace(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn converges_on_laplacian() {
        let a = laplace(50);
        let b = vec![1.0; 50];
        let r = pcg(&a, &b, &Identity(50), &KrylovOptions { tol: 1e-10, maxit: 200 }).unwrap();
        assert!(r.converged && r.rel_residual <= 1e-9);
        assert_eq!(r.history.len(), r.iterations + 1);
        // exact factor converges in one step
        let f = ic0(&a).unwrap();
        let r = pcg(&a, &b, &f, &KrylovOptions { tol: 1e-10, maxit: 200 }).unwrap();
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn indefinite_operator_is_reported() {
        let a = SparseMatrix::diagonal(&[1.0, -1.0]);
        let res = pcg(&a, &[0.0, 1.0], &Identity(2), &KrylovOptions { tol: 1e-10, maxit: 10 });
        assert!(matches!(res, Err(Error::KrylovBreakdown(_))));
    }
}
