use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::StructuredMesh;
use super::MaterialProps;
use crate::error::{check_len, Error, Result};
use crate::linalg::{mm, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discretization {
    Mfe,
    Mhfe,
}

impl fmt::Display for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discretization::Mfe => "mfe",
            Discretization::Mhfe => "mhfe",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemMeta {
    pub discretization: Discretization,
    pub mesh: StructuredMesh,
    pub props: MaterialProps,
}

impl SystemMeta {
    /// Short identifier such as `mfe-2d-h1/40`.
    pub fn tag(&self) -> String {
        format!("{}-{}d-h1/{}", self.discretization, self.mesh.dim(), self.mesh.cells())
    }
}

/// The double saddle-point system
/// [[A, Bᵀ, 0], [B, -D, Cᵀ], [0, C, E]] with A: n×n, B: m×n, C: p×m,
/// D: m×m, E: p×p.
#[derive(Clone, Debug)]
pub struct DspSystem {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
    pub d: SparseMatrix,
    pub e: SparseMatrix,
    pub rhs: Vec<f64>,
    pub meta: SystemMeta,
}

impl DspSystem {
    pub fn new(
        a: SparseMatrix,
        b: SparseMatrix,
        c: SparseMatrix,
        d: SparseMatrix,
        e: SparseMatrix,
        rhs: Vec<f64>,
        meta: SystemMeta,
    ) -> Result<Self> {
        let (n, m, p) = (a.nrows(), b.nrows(), c.nrows());
        check_len("A columns", n, a.ncols())?;
        check_len("B columns", n, b.ncols())?;
        check_len("C columns", m, c.ncols())?;
        check_len("D rows", m, d.nrows())?;
        check_len("D columns", m, d.ncols())?;
        check_len("E rows", p, e.nrows())?;
        check_len("E columns", p, e.ncols())?;
        check_len("right-hand side", n + m + p, rhs.len())?;
        Ok(Self { a, b, c, d, e, rhs, meta })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m() + self.p()
    }

    /// Splits a full-length vector into its (x, y, z) blocks.
    pub fn split<'v>(&self, v: &'v [f64]) -> (&'v [f64], &'v [f64], &'v [f64]) {
        let (x, rest) = v.split_at(self.n());
        let (y, z) = rest.split_at(self.m());
        (x, y, z)
    }

    pub fn split_mut<'v>(&self, v: &'v mut [f64]) -> (&'v mut [f64], &'v mut [f64], &'v mut [f64]) {
        let (x, rest) = v.split_at_mut(self.n());
        let (y, z) = rest.split_at_mut(self.m());
        (x, y, z)
    }

    /// out = 𝒜 v
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("system operator input", self.dim(), v.len())?;
        check_len("system operator output", self.dim(), out.len())?;
        let (x, y, z) = self.split(v);
        let (ox, oy, oz) = self.split_mut(out);
        self.a.spmv_into(x, ox)?;
        self.b.spmv_transpose_add(1.0, y, ox)?;
        self.b.spmv_into(x, oy)?;
        self.d.spmv_add(-1.0, y, oy)?;
        self.c.spmv_transpose_add(1.0, z, oy)?;
        self.c.spmv_into(y, oz)?;
        self.e.spmv_add(1.0, z, oz)?;
        Ok(())
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// The full operator as one sparse matrix.
    pub fn assemble_full(&self) -> SparseMatrix {
        let (n, m) = (self.n(), self.m());
        let mut t = Vec::new();
        let push = |t: &mut Vec<(usize, usize, f64)>, mat: &SparseMatrix, r0: usize, c0: usize, s: f64, tr: bool| {
            for (i, j, v) in mat.triplets() {
                if tr {
                    t.push((r0 + j, c0 + i, s * v));
                } else {
                    t.push((r0 + i, c0 + j, s * v));
                }
            }
        };
        push(&mut t, &self.a, 0, 0, 1.0, false);
        push(&mut t, &self.b, 0, n, 1.0, true);
        push(&mut t, &self.b, n, 0, 1.0, false);
        push(&mut t, &self.d, n, n, -1.0, false);
        push(&mut t, &self.c, n, n + m, 1.0, true);
        push(&mut t, &self.c, n + m, n, 1.0, false);
        push(&mut t, &self.e, n + m, n + m, 1.0, false);
        SparseMatrix::from_triplets(self.dim(), self.dim(), &t)
    }

    /// Stored nonzeros of the full operator.
    pub fn nnz(&self) -> usize {
        self.a.nnz() + 2 * self.b.nnz() + self.d.nnz() + 2 * self.c.nnz() + self.e.nnz()
    }
}

/// Right-hand side 𝒜 x_true for x_true with entries uniform in [-1, 1]
/// drawn from ChaCha8 seeded with `seed`. Returns (rhs, x_true).
pub fn manufactured_rhs(sys: &DspSystem, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let rhs = sys.apply(&x)?;
    Ok((rhs, x))
}

/// Writes A.mtx, B.mtx, C.mtx, D.mtx, E.mtx, rhs.vec and manifest.txt.
pub fn export_system(sys: &DspSystem, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, m) in [("A", &sys.a), ("B", &sys.b), ("C", &sys.c), ("D", &sys.d), ("E", &sys.e)] {
        mm::save(&dir.join(format!("{name}.mtx")), m)?;
    }
    std::fs::write(dir.join("rhs.vec"), mm::write_vector(&sys.rhs))?;
    let p = &sys.meta.props;
    let manifest = format!(
        "discretization={}\ndim={}\ncells={}\nh={:.17e}\nn={}\nm={}\np={}\nnnz={}\n\
         props.young={:e}\nprops.poisson={}\nprops.biot={}\nprops.storage={:e}\n\
         props.permeability={:e}\nprops.viscosity={:e}\nprops.dt={:e}\nprops.traction={:e}\nprops.stab_factor={}\n",
        sys.meta.discretization,
        sys.meta.mesh.dim(),
        sys.meta.mesh.cells(),
        sys.meta.mesh.h(),
        sys.n(),
        sys.m(),
        sys.p(),
        sys.nnz(),
        p.young,
        p.poisson,
        p.biot,
        p.storage,
        p.permeability,
        p.viscosity,
        p.dt,
        p.traction,
        p.stab_factor
    );
    std::fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}

/// Reads back the blocks written by [`export_system`].
pub fn import_blocks(dir: &Path) -> Result<[SparseMatrix; 5]> {
    let load = |n: &str| mm::load(&dir.join(format!("{n}.mtx")));
    let out = [load("A")?, load("B")?, load("C")?, load("D")?, load("E")?];
    if out[1].ncols() != out[0].nrows() {
        return Err(Error::Parse { line: 0, msg: "B.mtx does not match A.mtx".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{assemble_mfe, mfe_to_dsp};
    use super::*;

    fn small() -> DspSystem {
        let props = MaterialProps::default();
        let mesh = StructuredMesh::new(2, 3).unwrap();
        mfe_to_dsp(&assemble_mfe(&mesh, &props).unwrap(), &props).unwrap()
    }

    #[test]
    fn operator_matches_assembled_matrix() {
        let sys = small();
        let (_, x) = manufactured_rhs(&sys, 7).unwrap();
        let full = sys.assemble_full();
        let a = sys.apply(&x).unwrap();
        let b = full.spmv(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
        assert!(full.is_symmetric(1e-15));
    }

    #[test]
    fn manufactured_rhs_is_reproducible() {
        let sys = small();
        let (r1, x1) = manufactured_rhs(&sys, 3).unwrap();
        let (r2, x2) = manufactured_rhs(&sys, 3).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(x1, x2);
        assert!(x1.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn export_round_trip() {
        let sys = small();
        let dir = std::env::temp_dir().join(format!("dsp-export-{}", std::process::id()));
        export_system(&sys, &dir).unwrap();
        let [a, b, c, d, e] = import_blocks(&dir).unwrap();
        assert_eq!(a, sys.a);
        assert_eq!(b, sys.b);
        assert_eq!(c, sys.c);
        assert_eq!(d, sys.d);
        assert_eq!(e, sys.e);
        let rhs = mm::read_vector(&std::fs::read_to_string(dir.join("rhs.vec")).unwrap()).unwrap();
        assert_eq!(rhs, sys.rhs);
        std::fs::remove_dir_all(&dir).ok();
    }
}
