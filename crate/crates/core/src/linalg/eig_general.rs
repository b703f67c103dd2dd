use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::tolerances::{BLOCKED_EIG_THRESHOLD, QR_DEFLATION, QR_SWEEPS_PER_N};

/// Eigenvalues (and optionally eigenvectors) of a real nonsymmetric matrix.
///
/// Complex eigenvalues come in adjacent conjugate pairs, positive imaginary
/// part first. `vectors[k]` is the eigenvector of `values[k]`.
#[derive(Clone, Debug)]
pub struct GeneralEigen {
    pub values: Vec<Complex64>,
    pub vectors: Option<Vec<Vec<Complex64>>>,
}

/// Eigenvalues of a dense nonsymmetric matrix.
pub fn dense_eig_general(m: &DenseMatrix, want_vectors: bool) -> Result<GeneralEigen> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::Contract("eigensolver needs a square matrix".into()));
    }
    #[cfg(feature = "large-dense")]
    if n > BLOCKED_EIG_THRESHOLD && !want_vectors {
        return blocked_general(m);
    }
    let _ = BLOCKED_EIG_THRESHOLD;
    hessenberg_qr(m, want_vectors)
}

#[cfg(feature = "large-dense")]
fn blocked_general(m: &DenseMatrix) -> Result<GeneralEigen> {
    let a = super::eig_sym::blocked::to_faer(m);
    let raw = a
        .eigenvalues()
        .map_err(|e| Error::Contract(format!("blocked eigensolver failed: {e:?}")))?;
    let values = pair_conjugates(raw.into_iter().map(|z| Complex64::new(z.re, z.im)).collect());
    Ok(GeneralEigen { values, vectors: None })
}

/// Orders eigenvalues so that each complex value is immediately followed by
/// its conjugate, and makes the pair exactly conjugate.
#[cfg_attr(not(feature = "large-dense"), allow(dead_code))]
fn pair_conjugates(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.abs().total_cmp(&a.im.abs())).then(b.im.total_cmp(&a.im)));
    let mut out = Vec::with_capacity(v.len());
    let mut used = vec![false; v.len()];
    for i in 0..v.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = v[i];
        if z.im == 0.0 {
            out.push(z);
            continue;
        }
        let mut best: Option<usize> = None;
        for j in i + 1..v.len().min(i + 64) {
            if !used[j] && (v[j] - z.conj()).norm() <= 1e-8 * (1.0 + z.norm()) {
                if best.map_or(true, |b| (v[j] - z.conj()).norm() < (v[b] - z.conj()).norm()) {
                    best = Some(j);
                }
            }
        }
        match best {
            Some(j) => {
                used[j] = true;
                let re = 0.5 * (z.re + v[j].re);
                let im = 0.5 * (z.im.abs() + v[j].im.abs());
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(z),
        }
    }
    out
}

/// Householder reduction to Hessenberg form followed by the Francis
/// double-shift QR iteration.
pub fn hessenberg_qr(m: &DenseMatrix, want_vectors: bool) -> Result<GeneralEigen> {
    let n = m.rows();
    if n == 0 {
        return Ok(GeneralEigen { values: vec![], vectors: want_vectors.then(Vec::new) });
    }
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = if want_vectors {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    } else {
        Vec::new()
    };
    orthes(&mut h, &mut v, want_vectors);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    hqr2(&mut h, &mut v, &mut d, &mut e, want_vectors)?;
    let values: Vec<Complex64> = d.iter().zip(&e).map(|(&re, &im)| Complex64::new(re, im)).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        while k < n {
            if e[k] == 0.0 {
                out.push((0..n).map(|i| Complex64::new(v[i][k], 0.0)).collect());
                k += 1;
            } else {
                let z: Vec<Complex64> = (0..n).map(|i| Complex64::new(v[i][k], v[i][k + 1])).collect();
                out.push(z.clone());
                out.push(z.into_iter().map(|c| c.conj()).collect());
                k += 2;
            }
        }
        for vec in out.iter_mut() {
            let nrm = vec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                vec.iter_mut().for_each(|c| *c /= nrm);
            }
        }
        out
    });
    Ok(GeneralEigen { values, vectors })
}

fn orthes(h: &mut [Vec<f64>], v: &mut [Vec<f64>], vectors: bool) {
    let n = h.len();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let mut scale = 0.0;
        for row in h.iter().take(high + 1).skip(m) {
            scale += row[m - 1].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[i][j];
            }
            f /= hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut().take(high + 1) {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
    if !vectors {
        return;
    }
    for m in (1..high).rev() {
        if h[m][m - 1] == 0.0 {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[i][m - 1];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i] * v[i][j];
            }
            g = (g / ort[m]) / h[m][m - 1];
            for i in m..=high {
                v[i][j] += g * ort[i];
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    let z = Complex64::new(xr, xi) / Complex64::new(yr, yi);
    (z.re, z.im)
}

fn subdiag_norm(h: &[Vec<f64>], hi: usize) -> f64 {
    (1..=hi).map(|i| h[i][i - 1] * h[i][i - 1]).sum::<f64>().sqrt()
}

#[allow(clippy::many_single_char_names)]
fn hqr2(h: &mut [Vec<f64>], v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    let nn = h.len();
    let mut n = nn as isize - 1;
    let low: isize = 0;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }

    let max_sweeps = QR_SWEEPS_PER_N * nn;
    let mut sweeps = 0usize;
    let mut iter = 0;
    // columns touched by row/column updates; only the active window when
    // vectors are not wanted
    while n >= low {
        let nu = n as usize;
        let mut l = n;
        while l > low {
            let lu = l as usize;
            s = h[lu - 1][lu - 1].abs() + h[lu][lu].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[lu][lu - 1].abs() < QR_DEFLATION * s {
                break;
            }
            l -= 1;
        }
        let lu = l as usize;
        let col_end = if vectors { nn } else { nu + 1 };
        let row_start = if vectors { 0 } else { lu };

        if l == n {
            h[nu][nu] += exshift;
            d[nu] = h[nu][nu];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = h[nu][nu - 1] * h[nu - 1][nu];
            p = (h[nu - 1][nu - 1] - h[nu][nu]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[nu][nu] += exshift;
            h[nu - 1][nu - 1] += exshift;
            x = h[nu][nu];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                x = h[nu][nu - 1];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..col_end {
                    z = h[nu - 1][j];
                    h[nu - 1][j] = q * z + p * h[nu][j];
                    h[nu][j] = q * h[nu][j] - p * z;
                }
                for row in h.iter_mut().take(nu + 1).skip(row_start) {
                    z = row[nu - 1];
                    row[nu - 1] = q * z + p * row[nu];
                    row[nu] = q * row[nu] - p * z;
                }
                if vectors {
                    for row in v.iter_mut().take(high + 1) {
                        z = row[nu - 1];
                        row[nu - 1] = q * z + p * row[nu];
                        row[nu] = q * row[nu] - p * z;
                    }
                }
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::NoConvergence { sweeps, subdiag_norm: subdiag_norm(h, nu) });
            }
            x = h[nu][nu];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[nu - 1][nu - 1];
                w = h[nu][nu - 1] * h[nu - 1][nu];
            }
            if iter == 10 {
                exshift += x;
                for (i, row) in h.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                s = h[nu][nu - 1].abs() + h[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for (i, row) in h.iter_mut().enumerate().take(nu + 1) {
                        row[i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            let mut m = n - 2;
            while m >= l {
                let mu = m as usize;
                z = h[mu][mu];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[mu + 1][mu] + h[mu][mu + 1];
                q = h[mu + 1][mu + 1] - z - r - s;
                r = h[mu + 2][mu + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[mu][mu - 1].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[mu - 1][mu - 1].abs() + z.abs() + h[mu + 1][mu + 1].abs()))
                {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in mu + 2..=nu {
                h[i][i - 2] = 0.0;
                if i > mu + 2 {
                    h[i][i - 3] = 0.0;
                }
            }
            let mut k = mu;
            while k < nu {
                let notlast = k != nu - 1;
                if k != mu {
                    p = h[k][k - 1];
                    q = h[k + 1][k - 1];
                    r = if notlast { h[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != mu {
                        h[k][k - 1] = -s * x;
                    } else if l != m {
                        h[k][k - 1] = -h[k][k - 1];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..col_end {
                        p = h[k][j] + q * h[k + 1][j];
                        if notlast {
                            p += r * h[k + 2][j];
                            h[k + 2][j] -= p * z;
                        }
                        h[k][j] -= p * x;
                        h[k + 1][j] -= p * y;
                    }
                    let imax = nu.min(k + 3);
                    for row in h.iter_mut().take(imax + 1).skip(row_start) {
                        p = x * row[k] + y * row[k + 1];
                        if notlast {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k] -= p;
                        row[k + 1] -= p * q;
                    }
                    if vectors {
                        for row in v.iter_mut().take(high + 1) {
                            p = x * row[k] + y * row[k + 1];
                            if notlast {
                                p += z * row[k + 2];
                                row[k + 2] -= p * r;
                            }
                            row[k] -= p;
                            row[k + 1] -= p * q;
                        }
                    }
                }
                k += 1;
            }
        }
    }

    if !vectors || norm == 0.0 {
        return Ok(());
    }

    for n in (0..nn).rev() {
        p = d[n];
        q = e[n];
        if q == 0.0 {
            let mut l = n;
            h[n][n] = 1.0;
            for i in (0..n).rev() {
                w = h[i][i] - p;
                r = 0.0;
                for j in l..=n {
                    r += h[i][j] * h[j][n];
                }
                if e[i] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[i][n] = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = h[i][i + 1];
                        y = h[i + 1][i];
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h[i][n] = t;
                        h[i + 1][n] = if x.abs() > z.abs() { (-r - w * t) / x } else { (-s - y * t) / z };
                    }
                    t = h[i][n].abs();
                    if (eps * t) * t > 1.0 {
                        for row in h.iter_mut().take(n + 1).skip(i) {
                            row[n] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            let mut l = n - 1;
            if h[n][n - 1].abs() > h[n - 1][n].abs() {
                h[n - 1][n - 1] = q / h[n][n - 1];
                h[n - 1][n] = -(h[n][n] - p) / h[n][n - 1];
            } else {
                let (cr, ci) = cdiv(0.0, -h[n - 1][n], h[n - 1][n - 1] - p, q);
                h[n - 1][n - 1] = cr;
                h[n - 1][n] = ci;
            }
            h[n][n - 1] = 0.0;
            h[n][n] = 1.0;
            if n >= 2 {
                for i in (0..=n - 2).rev() {
                    let mut ra = 0.0;
                    let mut sa = 0.0;
                    for j in l..=n {
                        ra += h[i][j] * h[j][n - 1];
                        sa += h[i][j] * h[j][n];
                    }
                    w = h[i][i] - p;
                    if e[i] < 0.0 {
                        z = w;
                        r = ra;
                        s = sa;
                    } else {
                        l = i;
                        if e[i] == 0.0 {
                            let (cr, ci) = cdiv(-ra, -sa, w, q);
                            h[i][n - 1] = cr;
                            h[i][n] = ci;
                        } else {
                            x = h[i][i + 1];
                            y = h[i + 1][i];
                            let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                            let vi = (d[i] - p) * 2.0 * q;
                            if vr == 0.0 && vi == 0.0 {
                                vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                            }
                            let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                            h[i][n - 1] = cr;
                            h[i][n] = ci;
                            if x.abs() > z.abs() + q.abs() {
                                h[i + 1][n - 1] = (-ra - w * h[i][n - 1] + q * h[i][n]) / x;
                                h[i + 1][n] = (-sa - w * h[i][n] - q * h[i][n - 1]) / x;
                            } else {
                                let (cr, ci) = cdiv(-r - y * h[i][n - 1], -s - y * h[i][n], z, q);
                                h[i + 1][n - 1] = cr;
                                h[i + 1][n] = ci;
                            }
                        }
                        t = h[i][n - 1].abs().max(h[i][n].abs());
                        if (eps * t) * t > 1.0 {
                            for row in h.iter_mut().take(n + 1).skip(i) {
                                row[n - 1] /= t;
                                row[n] /= t;
                            }
                        }
                    }
                }
            }
        }
    }

    for j in (0..nn).rev() {
        for row in v.iter_mut().take(high + 1) {
            let mut zz = 0.0;
            for (k, hk) in h.iter().enumerate().take(j.min(high) + 1) {
                zz += row[k] * hk[j];
            }
            row[j] = zz;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &DenseMatrix, lambda: Complex64, x: &[Complex64]) -> f64 {
        let n = m.rows();
        let mut r = 0.0;
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                s += m[(i, j)] * x[j];
            }
            r += (s - lambda * x[i]).norm_sqr();
        }
        r.sqrt()
    }

    fn test_matrix(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64 * 0.61).sin() + if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let e = hessenberg_qr(&m, true).unwrap();
        assert!((e.values[0] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e.values[1] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        let v = e.vectors.unwrap();
        assert!(residual(&m, e.values[0], &v[0]) < 1e-14);
    }

    #[test]
    fn eigenpairs_have_small_residual() {
        let m = test_matrix(30);
        let e = hessenberg_qr(&m, true).unwrap();
        let v = e.vectors.as_ref().unwrap();
        let norm = m.frobenius();
        let mut complex = 0;
        for (k, lam) in e.values.iter().enumerate() {
            if lam.im != 0.0 {
                complex += 1;
            }
            assert!(residual(&m, *lam, &v[k]) <= 1e-10 * norm, "pair {k}");
        }
        assert!(complex > 0);
        let sum: Complex64 = e.values.iter().sum();
        let trace: f64 = (0..30).map(|i| m[(i, i)]).sum();
        assert!((sum.re - trace).abs() < 1e-10 && sum.im.abs() < 1e-10);
    }

    #[test]
    fn values_only_matches_vector_run() {
        let m = test_matrix(17);
        let a = hessenberg_qr(&m, true).unwrap().values;
        let b = hessenberg_qr(&m, false).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn triangular_matrix_eigenvalues_are_diagonal() {
        let m = DenseMatrix::from_rows(&[&[1.0, 5.0, -2.0], &[0.0, 3.0, 7.0], &[0.0, 0.0, -4.0]]);
        let mut v: Vec<f64> = hessenberg_qr(&m, false).unwrap().values.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![-4.0, 1.0, 3.0]);
    }

    #[cfg(feature = "large-dense")]
    #[test]
    fn blocked_backend_agrees_with_francis_qr() {
        let m = test_matrix(90);
        let a = pair_conjugates(hessenberg_qr(&m, false).unwrap().values);
        let b = blocked_general(&m).unwrap().values;
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9, "{x} vs {y}");
        }
    }
}
