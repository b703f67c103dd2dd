use std::fmt::Write as _;

use num_complex::Complex64;

use crate::assembly::DspSystem;
use crate::error::{Error, Result};
use crate::linalg::{dense_eig_general, symmetric_eigen, DenseMatrix, SymmetricFactor};
use crate::precond::BlockTriangular;
use crate::schur::{InnerOperator, InnerOperators};
use crate::tolerances::{BLOCKED_EIG_THRESHOLD, IMAG_REL, MAX_DENSE_N};

use super::indicators::provenance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMode {
    /// 𝒜𝒫⁻¹ with the block triangular preconditioner.
    Triangular,
    /// 𝒫_D^{-1/2} 𝒜 𝒫_D^{-1/2} with the block diagonal preconditioner.
    Diagonal,
}

impl std::fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Triangular => "triangular",
            Self::Diagonal => "diagonal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectrumOptions {
    /// Largest operator dimension that is formed densely.
    pub max_dense_n: usize,
    /// Eigenvectors (and block weights) are computed up to this dimension.
    pub vector_cap: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { max_dense_n: MAX_DENSE_N, vector_cap: BLOCKED_EIG_THRESHOLD }
    }
}

/// Squared block norms (x̄, ȳ, z̄) of the scaled eigenvector of one eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockWeights {
    pub x2: f64,
    pub y2: f64,
    pub z2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenClass {
    Real,
    Complex,
}

pub fn classify(z: Complex64) -> EigenClass {
    if z.im.abs() > IMAG_REL * z.norm().max(1.0) {
        EigenClass::Complex
    } else {
        EigenClass::Real
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub mode: SpectrumMode,
    pub values: Vec<Complex64>,
    pub weights: Option<Vec<BlockWeights>>,
    pub provenance: String,
}

impl Spectrum {
    /// `re,im,class` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,class\n");
        for z in &self.values {
            let c = match classify(*z) {
                EigenClass::Real => "real",
                EigenClass::Complex => "complex",
            };
            let _ = writeln!(s, "{:.16e},{:.16e},{c}", z.re, z.im);
        }
        s
    }

    pub fn real_range(&self) -> Option<(f64, f64)> {
        let re = self.values.iter().filter(|z| classify(**z) == EigenClass::Real).map(|z| z.re);
        re.fold(None, |acc, x| match acc {
            None => Some((x, x)),
            Some((a, b)) => Some((a.min(x), b.max(x))),
        })
    }

    pub fn complex_count(&self) -> usize {
        self.values.iter().filter(|z| classify(**z) == EigenClass::Complex).count()
    }
}

fn blockwise(sys: &DspSystem, ops: &InnerOperators, v: &mut [f64], f: fn(&InnerOperator, &mut [f64])) {
    let (x, y, z) = sys.split_mut(v);
    f(&ops.a_hat, x);
    f(&ops.s_hat, y);
    f(&ops.x_hat, z);
}

fn norm_upper2(op: &InnerOperator, v: &[f64]) -> f64 {
    let mut t = v.to_vec();
    op.mul_upper(&mut t);
    t.iter().map(|x| x * x).sum()
}

/// Full spectrum of the preconditioned operator, formed densely.
///
/// With F = blockdiag(L_A, L_S, L_X) built from the inner factors, the
/// triangular mode computes eig(F⁻¹ 𝒜 𝒫⁻¹ F), which is similar to 𝒜𝒫⁻¹,
/// and the diagonal mode computes eig(F⁻¹ 𝒜 F⁻ᵀ), which is congruent to the
/// split form. Nonlinear inner solves are replaced by their linear
/// surrogates.
pub fn full_spectrum(
    sys: &DspSystem,
    ops: &InnerOperators,
    mode: SpectrumMode,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    let nn = sys.dim();
    if nn > opts.max_dense_n {
        return Err(Error::ScaleLimit {
            n: nn,
            cap: opts.max_dense_n,
            hint: "use a coarser mesh or raise --max-dense-n".into(),
        });
    }
    let lin = ops.linear_surrogate();
    let mut mat = DenseMatrix::zeros(nn, nn);
    let mut e = vec![0.0; nn];
    let mut t = vec![0.0; nn];
    let prov = provenance(sys, ops);
    match mode {
        SpectrumMode::Triangular => {
            let prec = BlockTriangular::new(sys, lin.clone())?;
            let mut u = vec![0.0; nn];
            for j in 0..nn {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[j] = 1.0;
                blockwise(sys, &lin, &mut e, |o, v| o.mul_lower(v));
                prec.apply_triangular_inverse(&e, &mut u)?;
                sys.apply_into(&u, &mut t)?;
                blockwise(sys, &lin, &mut t, |o, v| o.solve_lower(v));
                mat.set_col(j, &t);
            }
            let want = nn <= opts.vector_cap;
            let eig = dense_eig_general(&mat, want)?;
            drop(mat);
            let weights = match eig.vectors {
                Some(vecs) => Some(
                    vecs.iter()
                        .map(|v| block_weights(sys, &lin, &prec, v))
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            Ok(Spectrum { mode, values: eig.values, weights, provenance: prov })
        }
        SpectrumMode::Diagonal => {
            for j in 0..nn {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[j] = 1.0;
                blockwise(sys, &lin, &mut e, |o, v| o.solve_upper(v));
                sys.apply_into(&e, &mut t)?;
                blockwise(sys, &lin, &mut t, |o, v| o.solve_lower(v));
                mat.set_col(j, &t);
            }
            mat.symmetrize();
            let eig = symmetric_eigen(&mat, false)?;
            let values = eig.values.into_iter().map(|l| Complex64::new(l, 0.0)).collect();
            Ok(Spectrum { mode, values, weights: None, provenance: prov })
        }
    }
}

/// Weights of w = 𝒫⁻¹ F v in the scaled variables x̄ = L_Aᵀx, ȳ = L_Sᵀy,
/// z̄ = L_Xᵀz.
fn block_weights(
    sys: &DspSystem,
    lin: &InnerOperators,
    prec: &BlockTriangular<'_>,
    v: &[Complex64],
) -> Result<BlockWeights> {
    let nn = sys.dim();
    let mut acc = BlockWeights { x2: 0.0, y2: 0.0, z2: 0.0 };
    let mut w = vec![0.0; nn];
    for part in [v.iter().map(|z| z.re).collect::<Vec<_>>(), v.iter().map(|z| z.im).collect()] {
        let mut u = part;
        blockwise(sys, lin, &mut u, |o, x| o.mul_lower(x));
        prec.apply_triangular_inverse(&u, &mut w)?;
        let (x, y, z) = sys.split(&w);
        acc.x2 += norm_upper2(&lin.a_hat, x);
        acc.y2 += norm_upper2(&lin.s_hat, y);
        acc.z2 += norm_upper2(&lin.x_hat, z);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mfe, mfe_to_dsp, MaterialProps, StructuredMesh};
    use crate::precond::BlockDiagonal;
    use crate::schur::{build_inner_operators, InnerKind, PrecondSpec, SchurRecipe};

    fn mfe(cells: usize) -> DspSystem {
        let props = MaterialProps::default();
        let mesh = StructuredMesh::new(2, cells).unwrap();
        mfe_to_dsp(&assemble_mfe(&mesh, &props).unwrap(), &props).unwrap()
    }

    /// Greedy nearest matching of two multisets; returns the largest
    /// distance relative to max(1, |λ|).
    fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut used = vec![false; b.len()];
        let mut worst = 0.0f64;
        for z in a {
            let (k, d) = b
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, w)| (k, (z - w).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            used[k] = true;
            worst = worst.max(d / z.norm().max(1.0));
        }
        worst
    }

    fn dense_operator(sys: &DspSystem) -> DenseMatrix {
        sys.assemble_full().to_dense()
    }

    #[test]
    fn triangular_matches_explicit_inverse_oracle() {
        let sys = mfe(4);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1_omega(0.5))).unwrap();
        let sp = full_spectrum(&sys, &ops, SpectrumMode::Triangular, &SpectrumOptions::default()).unwrap();
        let prec = BlockTriangular::new(&sys, ops.clone()).unwrap();
        let nn = sys.dim();
        let mut p = DenseMatrix::zeros(nn, nn);
        for j in 0..nn {
            let mut e = vec![0.0; nn];
            e[j] = 1.0;
            p.set_col(j, &prec.apply_forward(&e).unwrap());
        }
        let ap = dense_operator(&sys).matmul(&p.inverse().unwrap()).unwrap();
        let oracle = dense_eig_general(&ap, false).unwrap().values;
        let d = multiset_distance(&sp.values, &oracle);
        assert!(d < 1e-8, "distance {d}");
    }

    #[test]
    fn diagonal_matches_split_sqrt_route() {
        let sys = mfe(3);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        let sp = full_spectrum(&sys, &ops, SpectrumMode::Diagonal, &SpectrumOptions::default()).unwrap();
        assert!(sp.values.iter().all(|z| z.im == 0.0));
        let sq = BlockDiagonal::new(&sys, ops.clone()).unwrap().split_sqrt(4000).unwrap();
        let nn = sys.dim();
        let mut m = DenseMatrix::zeros(nn, nn);
        for j in 0..nn {
            let mut e = vec![0.0; nn];
            e[j] = 1.0;
            let c = sq.apply(&sys.apply(&sq.apply(&e).unwrap()).unwrap()).unwrap();
            m.set_col(j, &c);
        }
        m.symmetrize();
        let split: Vec<Complex64> = symmetric_eigen(&m, false).unwrap().values.into_iter().map(|l| Complex64::new(l, 0.0)).collect();
        assert!(multiset_distance(&sp.values, &split) < 1e-8);
        // and the nonsymmetric 𝒜𝒫_D⁻¹ has the same spectrum
        let mut pinv = DenseMatrix::zeros(nn, nn);
        let pd = BlockDiagonal::new(&sys, ops).unwrap();
        for j in 0..nn {
            let mut e = vec![0.0; nn];
            e[j] = 1.0;
            let mut z = vec![0.0; nn];
            pd.apply_diagonal_inverse(&e, &mut z).unwrap();
            pinv.set_col(j, &z);
        }
        let ap = dense_operator(&sys).matmul(&pinv).unwrap();
        let oracle = dense_eig_general(&ap, false).unwrap().values;
        assert!(multiset_distance(&sp.values, &oracle) < 1e-8);
    }

    #[test]
    fn scale_limit_is_refused() {
        let sys = mfe(3);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s2())).unwrap();
        let opts = SpectrumOptions { max_dense_n: 10, ..Default::default() };
        assert!(matches!(
            full_spectrum(&sys, &ops, SpectrumMode::Diagonal, &opts),
            Err(Error::ScaleLimit { cap: 10, .. })
        ));
    }

    #[test]
    fn weights_are_returned_for_small_runs() {
        let sys = mfe(3);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1())).unwrap();
        let sp = full_spectrum(&sys, &ops, SpectrumMode::Triangular, &SpectrumOptions::default()).unwrap();
        let w = sp.weights.as_ref().unwrap();
        assert_eq!(w.len(), sys.dim());
        assert!(w.iter().all(|b| b.x2 + b.y2 + b.z2 > 0.0));
    }
}
