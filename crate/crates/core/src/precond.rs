//! Block triangular and block diagonal preconditioners.

use crate::assembly::DspSystem;
use crate::error::{check_len, Error, Result};
use crate::krylov::Preconditioner;
use crate::linalg::{symmetric_eigen, DenseMatrix};
use crate::schur::InnerOperators;

/// 𝒫 = [[Â, Bᵀ, 0], [0, -Ŝ, Cᵀ], [0, 0, X̂]], applied by back substitution.
#[derive(Clone, Debug)]
pub struct BlockTriangular<'a> {
    pub sys: &'a DspSystem,
    pub ops: InnerOperators,
}

/// 𝒫_D = diag(Â, Ŝ, X̂).
#[derive(Clone, Debug)]
pub struct BlockDiagonal<'a> {
    pub sys: &'a DspSystem,
    pub ops: InnerOperators,
}

fn check_dims(sys: &DspSystem, ops: &InnerOperators) -> Result<()> {
    check_len("Â dimension", sys.n(), ops.a_hat.dim())?;
    check_len("Ŝ dimension", sys.m(), ops.s_hat.dim())?;
    check_len("X̂ dimension", sys.p(), ops.x_hat.dim())
}

impl<'a> BlockTriangular<'a> {
    pub fn new(sys: &'a DspSystem, ops: InnerOperators) -> Result<Self> {
        check_dims(sys, &ops)?;
        Ok(Self { sys, ops })
    }

    /// z = 𝒫⁻¹ r: z₃ = X̂⁻¹ r₃, z₂ = Ŝ⁻¹(Cᵀ z₃ - r₂), z₁ = Â⁻¹(r₁ - Bᵀ z₂).
    pub fn apply_triangular_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let sys = self.sys;
        check_len("triangular preconditioner input", sys.dim(), r.len())?;
        check_len("triangular preconditioner output", sys.dim(), z.len())?;
        let (r1, r2, r3) = sys.split(r);
        let (z1, z2, z3) = sys.split_mut(z);
        self.ops.x_hat.apply_inverse(r3, z3).map_err(|e| e.in_block("X"))?;
        let mut t2: Vec<f64> = r2.iter().map(|v| -v).collect();
        sys.c.spmv_transpose_add(1.0, z3, &mut t2)?;
        self.ops.s_hat.apply_inverse(&t2, z2).map_err(|e| e.in_block("S"))?;
        let mut t1 = r1.to_vec();
        sys.b.spmv_transpose_add(-1.0, z2, &mut t1)?;
        self.ops.a_hat.apply_inverse(&t1, z1).map_err(|e| e.in_block("A"))?;
        Ok(())
    }

    /// 𝒫 v using the linear surrogates of the inner operators.
    pub fn apply_forward(&self, v: &[f64]) -> Result<Vec<f64>> {
        let sys = self.sys;
        check_len("triangular preconditioner input", sys.dim(), v.len())?;
        let (x, y, z) = sys.split(v);
        let mut o1 = self.ops.a_hat.apply_forward(x)?;
        sys.b.spmv_transpose_add(1.0, y, &mut o1)?;
        let mut o2: Vec<f64> = self.ops.s_hat.apply_forward(y)?.into_iter().map(|t| -t).collect();
        sys.c.spmv_transpose_add(1.0, z, &mut o2)?;
        let o3 = self.ops.x_hat.apply_forward(z)?;
        Ok([o1, o2, o3].concat())
    }

    pub fn diagonal(&self) -> BlockDiagonal<'a> {
        BlockDiagonal { sys: self.sys, ops: self.ops.clone() }
    }
}

impl Preconditioner for BlockTriangular<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_triangular_inverse(r, z)
    }
}

impl<'a> BlockDiagonal<'a> {
    pub fn new(sys: &'a DspSystem, ops: InnerOperators) -> Result<Self> {
        check_dims(sys, &ops)?;
        Ok(Self { sys, ops })
    }

    /// z = 𝒫_D⁻¹ r, blockwise.
    pub fn apply_diagonal_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let sys = self.sys;
        check_len("diagonal preconditioner input", sys.dim(), r.len())?;
        check_len("diagonal preconditioner output", sys.dim(), z.len())?;
        let (r1, r2, r3) = sys.split(r);
        let (z1, z2, z3) = sys.split_mut(z);
        self.ops.a_hat.apply_inverse(r1, z1).map_err(|e| e.in_block("A"))?;
        self.ops.s_hat.apply_inverse(r2, z2).map_err(|e| e.in_block("S"))?;
        self.ops.x_hat.apply_inverse(r3, z3).map_err(|e| e.in_block("X"))?;
        Ok(())
    }

    /// Dense 𝒫_D^{-1/2} blocks from symmetric eigendecompositions.
    pub fn split_sqrt(&self, cap: usize) -> Result<SplitSqrt> {
        let inv_sqrt = |m: DenseMatrix| -> Result<DenseMatrix> {
            let e = symmetric_eigen(&m, true)?;
            let v = e.vectors.expect("vectors requested");
            let n = m.rows();
            if let Some(&l) = e.values.first() {
                if !(l > 0.0) {
                    return Err(Error::Contract(format!("inner operator not positive definite (λ_min = {l:e})")));
                }
            }
            let s: Vec<f64> = e.values.iter().map(|l| 1.0 / l.sqrt()).collect();
            let mut out = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += v[(i, k)] * s[k] * v[(j, k)];
                    }
                    out[(i, j)] = acc;
                    out[(j, i)] = acc;
                }
            }
            Ok(out)
        };
        let lin = self.ops.linear_surrogate();
        Ok(SplitSqrt {
            blocks: [
                inv_sqrt(lin.a_hat.dense_matrix(cap)?)?,
                inv_sqrt(lin.s_hat.dense_matrix(cap)?)?,
                inv_sqrt(lin.x_hat.dense_matrix(cap)?)?,
            ],
        })
    }
}

impl Preconditioner for BlockDiagonal<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_diagonal_inverse(r, z)
    }
}

/// 𝒫_D^{-1/2} as three dense symmetric blocks.
#[derive(Clone, Debug)]
pub struct SplitSqrt {
    pub blocks: [DenseMatrix; 3],
}

impl SplitSqrt {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum()
    }

    /// 𝒫_D^{-1/2} r
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("split square root input", self.dim(), r.len())?;
        let mut out = Vec::with_capacity(r.len());
        let mut off = 0;
        for b in &self.blocks {
            out.extend(b.matvec(&r[off..off + b.rows()])?);
            off += b.rows();
        }
        Ok(out)
    }
}

/// 𝒫_D^{-1/2} r for the block diagonal preconditioner (dense, desk scale).
pub fn split_sqrt_apply(p: &BlockDiagonal<'_>, r: &[f64], cap: usize) -> Result<Vec<f64>> {
    p.split_sqrt(cap)?.apply(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mfe, mfe_to_dsp, manufactured_rhs, MaterialProps, StructuredMesh};
    use crate::schur::{build_inner_operators, InnerKind, PrecondSpec, SchurRecipe};

    fn sys(cells: usize) -> DspSystem {
        let props = MaterialProps::default();
        let mesh = StructuredMesh::new(2, cells).unwrap();
        mfe_to_dsp(&assemble_mfe(&mesh, &props).unwrap(), &props).unwrap()
    }

    #[test]
    fn triangular_inverse_inverts_forward() {
        let s = sys(4);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1_omega(0.5))).unwrap();
        let p = BlockTriangular::new(&s, ops).unwrap();
        let (_, v) = manufactured_rhs(&s, 11).unwrap();
        let pv = p.apply_forward(&v).unwrap();
        let mut back = vec![0.0; v.len()];
        p.apply_triangular_inverse(&pv, &mut back).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn preconditioner_is_linear() {
        let s = sys(3);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        let p = BlockTriangular::new(&s, ops).unwrap();
        let (_, u) = manufactured_rhs(&s, 1).unwrap();
        let (_, v) = manufactured_rhs(&s, 2).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let n = s.dim();
        let (mut pu, mut pv, mut pw) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        p.apply_triangular_inverse(&u, &mut pu).unwrap();
        p.apply_triangular_inverse(&v, &mut pv).unwrap();
        p.apply_triangular_inverse(&w, &mut pw).unwrap();
        let scale = pw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            assert!((pw[i] - (2.0 * pu[i] - 3.0 * pv[i])).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn split_sqrt_squares_to_inverse() {
        let s = sys(3);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1())).unwrap();
        let p = BlockDiagonal::new(&s, ops).unwrap();
        let sq = p.split_sqrt(2000).unwrap();
        let (_, r) = manufactured_rhs(&s, 5).unwrap();
        let twice = sq.apply(&sq.apply(&r).unwrap()).unwrap();
        let mut direct = vec![0.0; r.len()];
        p.apply_diagonal_inverse(&r, &mut direct).unwrap();
        for (blk, (a, b)) in [(0, s.n()), (s.n(), s.n() + s.m()), (s.n() + s.m(), s.dim())].iter().map(|&(lo, hi)| (lo, (&twice[lo..hi], &direct[lo..hi]))) {
            let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-8 * scale, "block at {blk}");
            }
        }
    }

    #[test]
    fn inner_failure_names_block() {
        let s = sys(2);
        let mut ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        ops.x_hat = crate::schur::InnerOperator::jacobi(&crate::linalg::SparseMatrix::identity(s.p() + 1)).unwrap();
        assert!(BlockTriangular::new(&s, ops).is_err());
    }

    fn identity_ops(s: &DspSystem) -> InnerOperators {
        let base = build_inner_operators(&sys(2), &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        let id = |k: usize| crate::schur::InnerOperator::jacobi(&crate::linalg::SparseMatrix::identity(k)).unwrap();
        InnerOperators { a_hat: id(s.n()), s_hat: id(s.m()), x_hat: id(s.p()), spec: base.spec }
    }

    fn decoupled(s: &DspSystem, keep_b: bool) -> DspSystem {
        use crate::linalg::SparseMatrix;
        let b = if keep_b { s.b.clone() } else { SparseMatrix::zeros(s.m(), s.n()) };
        DspSystem::new(s.a.clone(), b, SparseMatrix::zeros(s.p(), s.m()), s.d.clone(), s.e.clone(), s.rhs.clone(), s.meta.clone())
            .unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
    }

    #[test]
    fn identity_blocks_flip_middle_sign() {
        let s = decoupled(&sys(2), false);
        let r = random(s.dim(), 3);
        let mut z = vec![0.0; r.len()];
        BlockTriangular::new(&s, identity_ops(&s)).unwrap().apply_triangular_inverse(&r, &mut z).unwrap();
        let (n, m) = (s.n(), s.m());
        for i in 0..r.len() {
            let want = if (n..n + m).contains(&i) { -r[i] } else { r[i] };
            assert_eq!(z[i], want);
        }
        BlockDiagonal::new(&s, identity_ops(&s)).unwrap().apply_diagonal_inverse(&r, &mut z).unwrap();
        assert_eq!(z, r);
    }

    #[test]
    fn exact_triangular_inverse_against_dense_product() {
        let s = sys(2);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::ExactDense, SchurRecipe::exact())).unwrap();
        let (n, m, nn) = (s.n(), s.m(), s.dim());
        let ah = ops.a_hat.dense_matrix(nn).unwrap();
        let sh = ops.s_hat.dense_matrix(nn).unwrap();
        let xh = ops.x_hat.dense_matrix(nn).unwrap();
        let (b, c) = (s.b.to_dense(), s.c.to_dense());
        let p = DenseMatrix::from_fn(nn, nn, |i, j| match (i < n, i < n + m, j < n, j < n + m) {
            (true, _, true, _) => ah[(i, j)],
            (true, _, false, true) => b[(j - n, i)],
            (false, true, false, true) if j >= n => -sh[(i - n, j - n)],
            (false, true, false, false) => c[(j - n - m, i - n)],
            (false, false, false, false) => xh[(i - n - m, j - n - m)],
            _ => 0.0,
        });
        let r = random(nn, 9);
        let mut z = vec![0.0; nn];
        BlockTriangular::new(&s, ops).unwrap().apply_triangular_inverse(&r, &mut z).unwrap();
        let back = p.matvec(&z).unwrap();
        let scale = r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (x, y) in back.iter().zip(&r) {
            assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn zero_c_decouples_last_block() {
        let s = decoupled(&sys(2), true);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1())).unwrap();
        let p = BlockTriangular::new(&s, ops.clone()).unwrap();
        let nm = s.n() + s.m();
        let mut r = random(s.dim(), 4);
        let mut z1 = vec![0.0; r.len()];
        p.apply_triangular_inverse(&r, &mut z1).unwrap();
        for v in &mut r[..nm] {
            *v = 7.0 * *v - 1.0;
        }
        let mut z2 = vec![0.0; r.len()];
        p.apply_triangular_inverse(&r, &mut z2).unwrap();
        assert_eq!(&z1[nm..], &z2[nm..]);
        assert_eq!(z1[nm..].to_vec(), ops.x_hat.solve(&r[nm..]).unwrap());
    }

    #[test]
    fn diagonal_inverse_is_symmetric_and_positive() {
        let s = sys(3);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1_omega(0.1))).unwrap();
        let p = BlockDiagonal::new(&s, ops).unwrap();
        let nn = s.dim();
        let (mut pr, mut ps) = (vec![0.0; nn], vec![0.0; nn]);
        for k in 0..100 {
            let r = random(nn, 2 * k);
            let t = random(nn, 2 * k + 1);
            p.apply_diagonal_inverse(&r, &mut pr).unwrap();
            p.apply_diagonal_inverse(&t, &mut ps).unwrap();
            let (a, b) = (crate::linalg::dot(&t, &pr), crate::linalg::dot(&r, &ps));
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300), "{a} vs {b}");
            assert!(crate::linalg::dot(&r, &pr) > 0.0);
        }
    }

    #[test]
    fn diagonal_inverse_matches_dense_blocks() {
        let s = sys(3);
        let ops = build_inner_operators(&s, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        let nn = s.dim();
        let blocks = [
            ops.a_hat.dense_matrix(nn).unwrap(),
            ops.s_hat.dense_matrix(nn).unwrap(),
            ops.x_hat.dense_matrix(nn).unwrap(),
        ];
        let r = random(nn, 21);
        let mut z = vec![0.0; nn];
        BlockDiagonal::new(&s, ops).unwrap().apply_diagonal_inverse(&r, &mut z).unwrap();
        let cuts = [0, s.n(), s.n() + s.m(), nn];
        for (k, blk) in blocks.iter().enumerate() {
            let want = blk.solve(&r[cuts[k]..cuts[k + 1]]).unwrap();
            let got = &z[cuts[k]..cuts[k + 1]];
            let scale = want.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for (x, y) in got.iter().zip(&want) {
                assert!((x - y).abs() <= 1e-11 * scale, "block {k}: {x} vs {y}");
            }
        }
    }
}
