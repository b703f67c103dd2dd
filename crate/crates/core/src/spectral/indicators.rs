use std::fmt;

use crate::assembly::DspSystem;
use crate::error::{Error, Result};
use crate::linalg::{pencil_matrix, sym_extremes, DenseMatrix, EigenRange};
use crate::schur::InnerOperators;
use crate::tolerances::SEMIDEFINITE_CLAMP;

/// The seven indicator intervals [γ_min, γ_max].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorSet {
    pub a: EigenRange,
    pub s: EigenRange,
    pub x: EigenRange,
    pub d: EigenRange,
    pub e: EigenRange,
    pub r: EigenRange,
    pub k: EigenRange,
}

impl IndicatorSet {
    /// γ_A = γ_S = γ_X = γ_E = γ_R = [1, 1], γ_D = γ_K = [0, 0].
    pub fn unit() -> Self {
        let one = EigenRange::new(1.0, 1.0);
        let zero = EigenRange::new(0.0, 0.0);
        Self { a: one, s: one, x: one, d: zero, e: one, r: one, k: zero }
    }

    pub fn ranges(&self) -> [(&'static str, EigenRange); 7] {
        [
            ("A", self.a),
            ("S", self.s),
            ("X", self.x),
            ("D", self.d),
            ("E", self.e),
            ("R", self.r),
            ("K", self.k),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in self.ranges() {
            if !(g.min <= g.max) || !g.min.is_finite() || !g.max.is_finite() {
                return Err(Error::Contract(format!("indicator γ_{name} has min {} > max {}", g.min, g.max)));
            }
        }
        for (name, g) in [("A", self.a), ("S", self.s), ("X", self.x), ("E", self.e), ("R", self.r)] {
            if !(g.min > 0.0) {
                return Err(Error::Contract(format!("indicator γ_{name}.min = {} must be positive", g.min)));
            }
        }
        for (name, g) in [("D", self.d), ("K", self.k)] {
            if g.min < 0.0 {
                return Err(Error::Contract(format!("indicator γ_{name}.min = {} must be nonnegative", g.min)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for IndicatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, g) in self.ranges() {
            writeln!(f, "I_{name} = [{:.4e}, {:.4e}]", g.min, g.max)?;
        }
        Ok(())
    }
}

/// Identifies the system and preconditioner a report or spectrum belongs to.
pub fn provenance(sys: &DspSystem, ops: &InnerOperators) -> String {
    format!("{}:{}", sys.meta.tag(), ops.spec.id())
}

fn clamp_semidefinite(g: EigenRange) -> EigenRange {
    if g.min < 0.0 && -g.min <= SEMIDEFINITE_CLAMP * g.max.abs().max(1.0) {
        EigenRange::new(0.0, g.max)
    } else {
        g
    }
}

/// Indicator intervals of the (linear surrogates of the) inner operators.
///
/// Every interval is the spectrum extreme of a dense L⁻¹ M L⁻ᵀ where L is
/// the factor of the inner operator. γ_S and γ_X come from the sums of the
/// R/D and K/E matrices, so S̃ and X̃ are never formed explicitly.
pub fn compute_indicators(sys: &DspSystem, ops: &InnerOperators) -> Result<IndicatorSet> {
    let lin = ops.linear_surrogate();
    let (a_hat, s_hat, x_hat) = (&lin.a_hat, &lin.s_hat, &lin.x_hat);

    let a = sym_extremes(&pencil_matrix(|x, y| sys.a.spmv_into(x, y), a_hat)?)?;

    let zr = pencil_matrix(
        |x, y| {
            let w = a_hat.solve(&sys.b.spmv_transpose(x)?)?;
            sys.b.spmv_into(&w, y)
        },
        s_hat,
    )?;
    let zd = pencil_matrix(|x, y| sys.d.spmv_into(x, y), s_hat)?;
    let (r, d, s) = split_sum(&zr, &zd)?;

    let zk = pencil_matrix(
        |x, y| {
            let w = s_hat.solve(&sys.c.spmv_transpose(x)?)?;
            sys.c.spmv_into(&w, y)
        },
        x_hat,
    )?;
    let ze = pencil_matrix(|x, y| sys.e.spmv_into(x, y), x_hat)?;
    let (k, e, x) = split_sum(&zk, &ze)?;

    let set = IndicatorSet { a, s, x, d: clamp_semidefinite(d), e, r, k: clamp_semidefinite(k) };
    set.validate()?;
    Ok(set)
}

fn split_sum(z1: &DenseMatrix, z2: &DenseMatrix) -> Result<(EigenRange, EigenRange, EigenRange)> {
    let g1 = sym_extremes(z1)?;
    let g2 = sym_extremes(z2)?;
    let g = sym_extremes(&z1.add_scaled(1.0, z2, 1.0)?)?;
    Ok((g1, g2, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mfe, mfe_to_dsp, MaterialProps, StructuredMesh};
    use crate::linalg::dense_eig_general;
    use crate::schur::{apply_omega, build_inner_operators, InnerKind, PrecondSpec, SchurRecipe};

    fn mfe(cells: usize) -> DspSystem {
        let props = MaterialProps::default();
        let mesh = StructuredMesh::new(2, cells).unwrap();
        mfe_to_dsp(&assemble_mfe(&mesh, &props).unwrap(), &props).unwrap()
    }

    /// Extremes of the real spectrum of N⁻¹M from a nonsymmetric dense solve.
    fn brute_force(m: &DenseMatrix, n: &DenseMatrix) -> EigenRange {
        let t = n.inverse().unwrap().matmul(m).unwrap();
        let ev = dense_eig_general(&t, false).unwrap().values;
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        EigenRange::new(re.iter().cloned().fold(f64::INFINITY, f64::min), re.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    }

    fn close(a: EigenRange, b: EigenRange, rel: f64) -> bool {
        let scale = a.max.abs().max(b.max.abs());
        (a.min - b.min).abs() <= rel * scale && (a.max - b.max).abs() <= rel * scale
    }

    #[test]
    fn intervals_match_dense_pencil_oracle() {
        let sys = mfe(10);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1())).unwrap();
        let ind = compute_indicators(&sys, &ops).unwrap();
        let ah = ops.a_hat.dense_matrix(4000).unwrap();
        let sh = ops.s_hat.dense_matrix(4000).unwrap();
        let xh = ops.x_hat.dense_matrix(4000).unwrap();
        let b = sys.b.to_dense();
        let c = sys.c.to_dense();
        let r = b.matmul(&ah.inverse().unwrap()).unwrap().matmul(&b.transpose()).unwrap();
        let k = c.matmul(&sh.inverse().unwrap()).unwrap().matmul(&c.transpose()).unwrap();
        let d = sys.d.to_dense();
        let e = sys.e.to_dense();
        let oracle = [
            ("A", brute_force(&sys.a.to_dense(), &ah), ind.a),
            ("R", brute_force(&r, &sh), ind.r),
            ("D", brute_force(&d, &sh), ind.d),
            ("S", brute_force(&d.add_scaled(1.0, &r, 1.0).unwrap(), &sh), ind.s),
            ("K", brute_force(&k, &xh), ind.k),
            ("E", brute_force(&e, &xh), ind.e),
            ("X", brute_force(&e.add_scaled(1.0, &k, 1.0).unwrap(), &xh), ind.x),
        ];
        for (name, want, got) in oracle {
            assert!(close(want, got, 1e-9), "γ_{name}: {want:?} vs {got:?}");
        }
    }

    #[test]
    fn exact_approximations_give_unit_intervals() {
        let sys = mfe(3);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::ExactDense, SchurRecipe::exact())).unwrap();
        let ind = compute_indicators(&sys, &ops).unwrap();
        for g in [ind.a, ind.s, ind.x] {
            assert!((g.min - 1.0).abs() < 1e-9 && (g.max - 1.0).abs() < 1e-9, "{g:?}");
        }
    }

    #[test]
    fn omega_scaling_law() {
        let sys = mfe(6);
        let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1())).unwrap();
        let base = compute_indicators(&sys, &ops).unwrap();
        let omega = 0.1;
        let mut scaled_ops = ops.clone();
        scaled_ops.s_hat = apply_omega(ops.s_hat.clone(), omega).unwrap();
        let scaled = compute_indicators(&sys, &scaled_ops).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300);
        for (g, w) in [(base.s, scaled.s), (base.r, scaled.r), (base.d, scaled.d)] {
            assert!(rel(omega * g.min, w.min) && rel(omega * g.max, w.max), "{g:?} {w:?}");
        }
        for (g, w) in [(base.a, scaled.a), (base.e, scaled.e)] {
            assert!(rel(g.min, w.min) && rel(g.max, w.max));
        }
    }

    #[test]
    fn interval_sums_are_consistent() {
        let sys = mfe(5);
        for recipe in [SchurRecipe::s1(), SchurRecipe::s2()] {
            let ops = build_inner_operators(&sys, &PrecondSpec::new(InnerKind::Ic0, recipe)).unwrap();
            let ind = compute_indicators(&sys, &ops).unwrap();
            let tol = 1e-10 * ind.s.max;
            assert!(ind.s.min >= ind.r.min + ind.d.min - tol && ind.s.max <= ind.r.max + ind.d.max + tol);
            let tol = 1e-10 * ind.x.max;
            assert!(ind.x.min >= ind.k.min + ind.e.min - tol && ind.x.max <= ind.k.max + ind.e.max + tol);
        }
    }

    #[test]
    fn unit_indicators_validate() {
        IndicatorSet::unit().validate().unwrap();
        let mut bad = IndicatorSet::unit();
        bad.a = EigenRange::new(2.0, 1.0);
        assert!(bad.validate().is_err());
    }
}
