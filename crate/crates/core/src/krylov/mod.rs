//! GMRES, MINRES and PCG with residual histories.

mod gmres;
mod minres;
mod pcg;

pub use gmres::gmres;
pub use minres::minres;
pub use pcg::pcg;

use std::fmt;

use crate::assembly::DspSystem;
use crate::error::Result;
use crate::linalg::{DenseMatrix, SparseMatrix, TriangularFactor};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

pub trait Preconditioner {
    fn dim(&self) -> usize;
    /// z = P⁻¹ r
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let r = self.matvec(x)?;
        y.copy_from_slice(&r);
        Ok(())
    }
}

impl LinearOperator for DspSystem {
    fn dim(&self) -> usize {
        DspSystem::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.apply_into(x, y)
    }
}

impl Preconditioner for TriangularFactor {
    fn dim(&self) -> usize {
        TriangularFactor::dim(self)
    }
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        self.solve_lower_in_place(z);
        self.solve_upper_in_place(z);
        Ok(())
    }
}

impl Preconditioner for crate::schur::InnerOperator {
    fn dim(&self) -> usize {
        crate::schur::InnerOperator::dim(self)
    }
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        crate::schur::InnerOperator::apply_inverse(self, r, z)
    }
}

/// P = I.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub tol: f64,
    pub maxit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Gmres,
    Minres,
    Pcg,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gmres => "GMRES",
            Method::Minres => "MINRES",
            Method::Pcg => "PCG",
        })
    }
}

/// Outcome of a Krylov solve.
#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    /// Monitored residual norms, initial value first; `iterations + 1` entries.
    pub history: Vec<f64>,
    /// Final true relative residual ‖b - Ax‖/‖b‖.
    pub rel_residual: f64,
}

/// One row of the solver statistics table.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub method: String,
    pub recipe_id: String,
    pub h: f64,
    pub dim: usize,
    pub iterations: usize,
    pub converged: bool,
    pub rel_err: f64,
    pub wall_time: f64,
}

impl SolveStats {
    pub const CSV_HEADER: &'static str = "method,recipe-id,h,dim,n_it,converged,rel_err,wall_time";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:e},{},{},{},{:e},{:.6}",
            self.method, self.recipe_id, self.h, self.dim, self.iterations, self.converged, self.rel_err, self.wall_time
        )
    }

    pub fn from_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return None;
        }
        Some(Self {
            method: f[0].to_string(),
            recipe_id: f[1].to_string(),
            h: f[2].parse().ok()?,
            dim: f[3].parse().ok()?,
            iterations: f[4].parse().ok()?,
            converged: f[5].parse().ok()?,
            rel_err: f[6].parse().ok()?,
            wall_time: f[7].parse().ok()?,
        })
    }
}

pub(crate) fn true_relative_residual<A: LinearOperator + ?Sized>(a: &A, x: &[f64], b: &[f64]) -> Result<f64> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r)?;
    let nb = crate::linalg::norm2(b);
    let res: f64 = r.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum::<f64>().sqrt();
    Ok(if nb > 0.0 { res / nb } else { res })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_csv_round_trip() {
        let s = SolveStats {
            method: "GMRES".into(),
            recipe_id: "S1-ic0-w0.1".into(),
            h: 0.025,
            dim: 8162,
            iterations: 85,
            converged: true,
            rel_err: 3.5e-9,
            wall_time: 1.25,
        };
        assert_eq!(SolveStats::from_csv(&s.to_csv()), Some(s));
    }
}
