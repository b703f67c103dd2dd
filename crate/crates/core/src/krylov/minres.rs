use super::{true_relative_residual, KrylovOptions, KrylovResult, LinearOperator, Method, Preconditioner};
use crate::error::{check_len, Error, Result};
use crate::linalg::dot;

/// Preconditioned MINRES from x0 = 0 for symmetric A and SPD P. Stops when
/// the P⁻¹-norm of the residual drops below tol times its initial value;
/// the history records that norm.
pub fn minres<A, P>(a: &A, b: &[f64], p: &P, opts: &KrylovOptions) -> Result<KrylovResult>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = a.dim();
    check_len("MINRES right-hand side", n, b.len())?;
    check_len("MINRES preconditioner", n, p.dim())?;
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = vec![0.0; n];
    p.apply_inverse(&r1, &mut y)?;
    let b1 = dot(&r1, &y);
    if b1 < 0.0 {
        return Err(Error::KrylovBreakdown(format!("rᵀP⁻¹r = {b1:e}: preconditioner not positive definite")));
    }
    let beta1 = b1.sqrt();
    let mut history = vec![beta1];
    if beta1 == 0.0 {
        return Ok(KrylovResult { x, method: Method::Minres, iterations: 0, converged: true, history, rel_residual: 0.0 });
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut converged = false;
    let mut it = 0;
    while it < opts.maxit {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.apply(&v, &mut y)?;
        if it >= 1 {
            let f = beta / oldb;
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= f * ri;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= f * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        p.apply_inverse(&r2, &mut y)?;
        oldb = beta;
        let bb = dot(&r2, &y);
        if bb < 0.0 {
            return Err(Error::KrylovBreakdown(format!("rᵀP⁻¹r = {bb:e}: preconditioner not positive definite")));
        }
        beta = bb.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        it += 1;
        history.push(phibar);
        if phibar <= opts.tol * beta1 {
            converged = true;
            break;
        }
        if beta == 0.0 {
            break;
        }
    }
    let rel_residual = true_relative_residual(a, &x, b)?;
    Ok(KrylovResult { x, method: Method::Minres, iterations: it, converged, history, rel_residual })
}
