use super::csr::SparseMatrix;
use super::triangular::{FactorKind, TriangularFactor};
use crate::error::{Error, Result};
use crate::tolerances::{IC0_SHIFT_RETRIES, IC0_SHIFT_START};

/// Zero fill-in incomplete Cholesky on the lower pattern of a symmetric matrix.
pub fn ic0(m: &SparseMatrix) -> Result<TriangularFactor> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Contract("IC(0) needs a square matrix".into()));
    }
    let lower = m.lower();
    let (ip, ix) = (lower.indptr().to_vec(), lower.indices().to_vec());
    let mut lv = lower.data().to_vec();
    let mut pos = vec![usize::MAX; n];
    for i in 0..n {
        let (start, end) = (ip[i], ip[i + 1]);
        if end == start || ix[end - 1] != i {
            return Err(Error::Breakdown { row: i, pivot: 0.0 });
        }
        for k in start..end {
            pos[ix[k]] = k;
        }
        for kk in start..end - 1 {
            let k = ix[kk];
            let mut s = lv[kk];
            let kend = ip[k + 1] - 1;
            for q in ip[k]..kend {
                let j = ix[q];
                let p = pos[j];
                if p != usize::MAX && p < kk {
                    s -= lv[p] * lv[q];
                }
            }
            lv[kk] = s / lv[kend];
        }
        let mut d = lv[end - 1];
        for k in start..end - 1 {
            d -= lv[k] * lv[k];
        }
        for k in start..end {
            pos[ix[k]] = usize::MAX;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Breakdown { row: i, pivot: d });
        }
        lv[end - 1] = d.sqrt();
    }
    let l = SparseMatrix::new(n, n, ip, ix, lv)?;
    TriangularFactor::new(l, FactorKind::Ic0)
}

/// IC(0) with diagonal shift retries: on breakdown factor M + σ diag(M),
/// starting at σ = 1e-3 and doubling. Returns the factor and the σ used.
pub fn ic0_shifted(m: &SparseMatrix) -> Result<(TriangularFactor, f64)> {
    let mut last = match ic0(m) {
        Ok(f) => return Ok((f, 0.0)),
        Err(e @ Error::Breakdown { .. }) => e,
        Err(e) => return Err(e),
    };
    let diag = SparseMatrix::diagonal(&m.diag());
    let mut sigma = IC0_SHIFT_START;
    for _ in 0..IC0_SHIFT_RETRIES {
        let shifted = m.add_scaled(1.0, &diag, sigma)?;
        match ic0(&shifted) {
            Ok(f) => return Ok((f, sigma)),
            Err(e @ Error::Breakdown { .. }) => last = e,
            Err(e) => return Err(e),
        }
        sigma *= 2.0;
    }
    Err(last)
}
