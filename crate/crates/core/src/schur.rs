//! Schur complement approximations and the inner operators Â, Ŝ, X̂.

use std::fmt;

use crate::assembly::DspSystem;
use crate::error::{check_len, Error, Result};
use crate::krylov::{pcg, KrylovOptions};
use crate::linalg::{ic0_shifted, DenseCholesky, DenseMatrix, SparseMatrix, SymmetricFactor, TriangularFactor};

/// How an inner block is approximated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerKind {
    Jacobi,
    Ic0,
    /// IC(0)-preconditioned CG run to a relative tolerance; nonlinear.
    InnerPcg { tol: f64, maxit: usize },
    ExactDense,
}

impl fmt::Display for InnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerKind::Jacobi => f.write_str("jacobi"),
            InnerKind::Ic0 => f.write_str("ic0"),
            InnerKind::InnerPcg { tol, maxit } => write!(f, "pcg({tol:e},{maxit})"),
            InnerKind::ExactDense => f.write_str("exact"),
        }
    }
}

#[derive(Clone, Debug)]
enum Factor {
    Sparse(TriangularFactor),
    Dense(DenseCholesky),
}

/// An SPD approximation M̂(ω) = ω⁻¹ L Lᵀ of one diagonal block, applied
/// through its inverse.
#[derive(Clone, Debug)]
pub struct InnerOperator {
    kind: InnerKind,
    factor: Factor,
    target: Option<SparseMatrix>,
    omega: f64,
    shift: f64,
}

impl InnerOperator {
    pub fn new(kind: InnerKind, m: &SparseMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Contract("inner operator needs a square matrix".into()));
        }
        let (factor, shift) = match kind {
            InnerKind::Jacobi => {
                let d = m.diag();
                if let Some((i, &v)) = d.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
                    return Err(Error::DegenerateDiagonal { index: i, value: v });
                }
                let s: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
                (Factor::Sparse(TriangularFactor::from_diagonal(&s)?), 0.0)
            }
            InnerKind::Ic0 | InnerKind::InnerPcg { .. } => {
                let (f, sigma) = ic0_shifted(m)?;
                (Factor::Sparse(f), sigma)
            }
            InnerKind::ExactDense => (Factor::Dense(m.to_dense().cholesky()?), 0.0),
        };
        let target = matches!(kind, InnerKind::InnerPcg { .. }).then(|| m.clone());
        Ok(Self { kind, factor, target, omega: 1.0, shift })
    }

    pub fn jacobi(m: &SparseMatrix) -> Result<Self> {
        Self::new(InnerKind::Jacobi, m)
    }

    pub fn ic0(m: &SparseMatrix) -> Result<Self> {
        Self::new(InnerKind::Ic0, m)
    }

    pub fn exact_dense(m: &SparseMatrix) -> Result<Self> {
        Self::new(InnerKind::ExactDense, m)
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Ok(Self { kind: InnerKind::ExactDense, factor: Factor::Dense(m.cholesky()?), target: None, omega: 1.0, shift: 0.0 })
    }

    /// M̂(ω) = ω⁻¹ M̂; scalings compose.
    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        self.omega *= omega;
        Ok(self)
    }

    pub fn kind(&self) -> InnerKind {
        self.kind
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Diagonal shift σ used by IC(0) after a breakdown (0 when none).
    pub fn ic0_shift(&self) -> f64 {
        self.shift
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self.kind, InnerKind::InnerPcg { .. })
    }

    pub fn dim(&self) -> usize {
        match &self.factor {
            Factor::Sparse(f) => f.dim(),
            Factor::Dense(f) => f.dim(),
        }
    }

    /// The linear operator ω⁻¹ L Lᵀ underlying this approximation; for the
    /// inner PCG kind that is its IC(0) preconditioner.
    pub fn linear_surrogate(&self) -> Self {
        let mut s = self.clone();
        if !self.is_linear() {
            s.kind = InnerKind::Ic0;
            s.target = None;
        }
        s
    }

    /// Entries of M̂(ω)⁻¹ when the approximation is diagonal.
    pub fn diagonal_inverse(&self) -> Option<Vec<f64>> {
        match (&self.factor, self.kind) {
            (Factor::Sparse(f), InnerKind::Jacobi) => Some(f.l().diag().iter().map(|l| self.omega / (l * l)).collect()),
            _ => None,
        }
    }

    /// z = M̂(ω)⁻¹ r
    pub fn apply_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len("inner operator input", self.dim(), r.len())?;
        check_len("inner operator output", self.dim(), z.len())?;
        if let (Some(m), InnerKind::InnerPcg { tol, maxit }) = (&self.target, self.kind) {
            let Factor::Sparse(f) = &self.factor else { unreachable!() };
            let res = pcg(m, r, f, &KrylovOptions { tol, maxit })?;
            for (zi, xi) in z.iter_mut().zip(res.x) {
                *zi = self.omega * xi;
            }
            return Ok(());
        }
        z.copy_from_slice(r);
        self.solve_lower(z);
        self.solve_upper(z);
        Ok(())
    }

    pub fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; r.len()];
        self.apply_inverse(r, &mut z)?;
        Ok(z)
    }

    /// M̂(ω) x for the linear surrogate.
    pub fn apply_forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("inner operator input", self.dim(), x.len())?;
        let mut y = x.to_vec();
        self.mul_upper(&mut y);
        self.mul_lower(&mut y);
        Ok(y)
    }

    /// Dense M̂(ω), for dimensions up to `cap`.
    pub fn dense_matrix(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.dim();
        if n > cap {
            return Err(Error::ScaleLimit { n, cap, hint: "dense form of an inner operator".into() });
        }
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let c = self.apply_forward(&e)?;
            m.set_col(j, &c);
        }
        m.symmetrize();
        Ok(m)
    }
}

/// The factor of M̂(ω) = (ω^{-1/2} L)(ω^{-1/2} L)ᵀ.
impl SymmetricFactor for InnerOperator {
    fn dim(&self) -> usize {
        InnerOperator::dim(self)
    }
    fn solve_lower(&self, x: &mut [f64]) {
        match &self.factor {
            Factor::Sparse(f) => f.solve_lower_in_place(x),
            Factor::Dense(f) => f.solve_lower_in_place(x),
        }
        if self.omega != 1.0 {
            let s = self.omega.sqrt();
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
    fn solve_upper(&self, x: &mut [f64]) {
        match &self.factor {
            Factor::Sparse(f) => f.solve_upper_in_place(x),
            Factor::Dense(f) => f.solve_upper_in_place(x),
        }
        if self.omega != 1.0 {
            let s = self.omega.sqrt();
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
    fn mul_lower(&self, x: &mut [f64]) {
        match &self.factor {
            Factor::Sparse(f) => f.mul_lower_in_place(x),
            Factor::Dense(f) => f.mul_lower_in_place(x),
        }
        if self.omega != 1.0 {
            let s = 1.0 / self.omega.sqrt();
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
    fn mul_upper(&self, x: &mut [f64]) {
        match &self.factor {
            Factor::Sparse(f) => f.mul_upper_in_place(x),
            Factor::Dense(f) => f.mul_upper_in_place(x),
        }
        if self.omega != 1.0 {
            let s = 1.0 / self.omega.sqrt();
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// S̃⁽¹⁾ = D + B diag(A)⁻¹ Bᵀ
pub fn build_s1(sys: &DspSystem) -> Result<SparseMatrix> {
    let d = sys.a.diag();
    let mut inv = Vec::with_capacity(d.len());
    for (i, &v) in d.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::DegenerateDiagonal { index: i, value: v });
        }
        inv.push(1.0 / v);
    }
    let bd = sys.b.scale_columns(&inv)?;
    sys.d.add(&bd.matmul(&sys.b.transpose())?)
}

/// Fixed-stress diagonal S_K = diag(b² |Ω_i| / K_dr) from the geometry.
pub fn build_sk_physical(sys: &DspSystem) -> Result<Vec<f64>> {
    let props = &sys.meta.props;
    let kdr = props.bulk_drained();
    if !(kdr > 0.0) || !kdr.is_finite() {
        return Err(Error::Config(format!("drained bulk modulus must be positive, got {kdr}")));
    }
    let v = props.biot * props.biot * sys.meta.mesh.cell_measure() / kdr;
    Ok(vec![v; sys.m()])
}

/// Algebraic fixed-stress diagonal: (S_K)_ii = b_i A_ii⁻¹ b_iᵀ where b_i is
/// the nonzero part of row i of B and A_ii the matching principal submatrix.
pub fn build_sk_algebraic(sys: &DspSystem) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sys.m());
    for i in 0..sys.m() {
        let (cols, vals) = sys.b.row(i);
        let keep: Vec<usize> = (0..cols.len()).filter(|&k| vals[k] != 0.0).collect();
        if keep.is_empty() {
            return Err(Error::EmptyRow { row: i });
        }
        let idx: Vec<usize> = keep.iter().map(|&k| cols[k]).collect();
        let b: Vec<f64> = keep.iter().map(|&k| vals[k]).collect();
        let local = sys.a.gather_dense(&idx).cholesky().map_err(|e| e.in_block("A_ii"))?;
        let mut y = b.clone();
        local.solve_lower_in_place(&mut y);
        out.push(crate::linalg::dot(&y, &y));
    }
    Ok(out)
}

/// S̃⁽²⁾ = D + S_K
pub fn build_s2(d: &SparseMatrix, sk: &[f64]) -> Result<SparseMatrix> {
    check_len("S_K length", d.nrows(), sk.len())?;
    d.add(&SparseMatrix::diagonal(sk))
}

/// X̃ = E + C Ŝ⁻¹ Cᵀ for a diagonal Ŝ.
pub fn build_xtilde(sys: &DspSystem, s_hat: &InnerOperator) -> Result<SparseMatrix> {
    let inv = s_hat
        .diagonal_inverse()
        .ok_or_else(|| Error::Unsupported(format!("X̃ needs a diagonal Ŝ, got {}", s_hat.kind())))?;
    check_len("Ŝ dimension", sys.m(), inv.len())?;
    let cs = sys.c.scale_columns(&inv)?;
    sys.e.add(&cs.matmul(&sys.c.transpose())?)
}

/// Ŝ(ω) = ω⁻¹ Ŝ
pub fn apply_omega(s_hat: InnerOperator, omega: f64) -> Result<InnerOperator> {
    s_hat.with_omega(omega)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SVariant {
    S1,
    S2Physical,
    S2Algebraic,
    /// S̃ = D + B Â⁻¹ Bᵀ formed densely from the linear Â.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SForm {
    Ic0OfS1,
    DiagOfS1,
    DiagOfS2,
    ExactDense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XForm {
    Ic0,
    Diag,
    ExactDense,
}

/// Choice of Ŝ and X̂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurRecipe {
    pub s_variant: SVariant,
    pub s_form: SForm,
    pub omega: f64,
    pub x_form: XForm,
}

impl SchurRecipe {
    /// Ŝ = IC(0) of S̃⁽¹⁾, X̂ = IC(0) of E + C diag(S̃⁽¹⁾)⁻¹ Cᵀ.
    pub fn s1() -> Self {
        Self { s_variant: SVariant::S1, s_form: SForm::Ic0OfS1, omega: 1.0, x_form: XForm::Ic0 }
    }

    pub fn s1_omega(omega: f64) -> Self {
        Self { omega, ..Self::s1() }
    }

    /// Ŝ = diag(D + S_K) with the algebraic S_K, X̂ = IC(0) of E + C Ŝ⁻¹ Cᵀ.
    pub fn s2() -> Self {
        Self { s_variant: SVariant::S2Algebraic, s_form: SForm::DiagOfS2, omega: 1.0, x_form: XForm::Ic0 }
    }

    pub fn s2_physical() -> Self {
        Self { s_variant: SVariant::S2Physical, ..Self::s2() }
    }

    pub fn exact() -> Self {
        Self { s_variant: SVariant::Exact, s_form: SForm::ExactDense, omega: 1.0, x_form: XForm::ExactDense }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = matches!(
            (self.s_variant, self.s_form),
            (SVariant::S1, SForm::Ic0OfS1 | SForm::DiagOfS1)
                | (SVariant::S2Physical | SVariant::S2Algebraic, SForm::DiagOfS2)
                | (SVariant::Exact, SForm::ExactDense)
        );
        if !ok {
            return Err(Error::Config(format!("Ŝ form {:?} does not fit variant {:?}", self.s_form, self.s_variant)));
        }
        if !(self.omega > 0.0) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    /// Short identifier, e.g. `S1-ic0-w0.1`.
    pub fn id(&self) -> String {
        let base = match (self.s_variant, self.s_form) {
            (SVariant::S1, SForm::Ic0OfS1) => "S1-ic0",
            (SVariant::S1, _) => "S1-diag",
            (SVariant::S2Physical, _) => "S2phys-diag",
            (SVariant::S2Algebraic, _) => "S2-diag",
            (SVariant::Exact, _) => "exact",
        };
        let x = match self.x_form {
            XForm::Ic0 => "",
            XForm::Diag => "-Xdiag",
            XForm::ExactDense => "-Xexact",
        };
        if self.omega == 1.0 {
            format!("{base}{x}")
        } else {
            format!("{base}-w{}{x}", self.omega)
        }
    }
}

/// Full choice of inner operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecondSpec {
    pub a_form: InnerKind,
    pub recipe: SchurRecipe,
}

impl PrecondSpec {
    pub fn new(a_form: InnerKind, recipe: SchurRecipe) -> Self {
        Self { a_form, recipe }
    }

    pub fn id(&self) -> String {
        format!("A{}-{}", self.a_form, self.recipe.id())
    }
}

/// The three inner operators of a block preconditioner.
#[derive(Clone, Debug)]
pub struct InnerOperators {
    pub a_hat: InnerOperator,
    pub s_hat: InnerOperator,
    pub x_hat: InnerOperator,
    pub spec: PrecondSpec,
}

impl InnerOperators {
    /// Replaces nonlinear inner solves by their linear preconditioners.
    pub fn linear_surrogate(&self) -> Self {
        Self {
            a_hat: self.a_hat.linear_surrogate(),
            s_hat: self.s_hat.linear_surrogate(),
            x_hat: self.x_hat.linear_surrogate(),
            spec: self.spec,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.a_hat.is_linear() && self.s_hat.is_linear() && self.x_hat.is_linear()
    }
}

/// Dimension limit of the dense exact Schur variant.
const EXACT_CAP: usize = 4000;

fn dense_schur(
    base: &SparseMatrix,
    coupling: &SparseMatrix,
    inner: &InnerOperator,
) -> Result<DenseMatrix> {
    // base + coupling · inner⁻¹ · couplingᵀ
    let (k, n) = (coupling.nrows(), coupling.ncols());
    if k > EXACT_CAP || n > EXACT_CAP {
        return Err(Error::ScaleLimit { n: k.max(n), cap: EXACT_CAP, hint: "exact Schur complements are dense".into() });
    }
    let mut s = base.to_dense();
    let ct = coupling.transpose();
    let mut e = vec![0.0; k];
    for j in 0..k {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = ct.spmv(&e)?;
        let w = inner.solve(&col)?;
        let c = coupling.spmv(&w)?;
        for (i, v) in c.into_iter().enumerate() {
            s[(i, j)] += v;
        }
    }
    s.symmetrize();
    Ok(s)
}

pub fn build_inner_operators(sys: &DspSystem, spec: &PrecondSpec) -> Result<InnerOperators> {
    let recipe = &spec.recipe;
    recipe.validate()?;
    let a_hat = InnerOperator::new(spec.a_form, &sys.a).map_err(|e| e.in_block("A"))?;
    let omega = recipe.omega;
    let (s_hat, x_tilde) = match recipe.s_variant {
        SVariant::S1 => {
            let s1 = build_s1(sys)?;
            let s_hat = match recipe.s_form {
                SForm::Ic0OfS1 => InnerOperator::ic0(&s1),
                _ => InnerOperator::jacobi(&s1),
            }
            .map_err(|e| e.in_block("S"))?
            .with_omega(omega)?;
            let proxy = InnerOperator::jacobi(&s1).map_err(|e| e.in_block("S"))?.with_omega(omega)?;
            let xt = build_xtilde(sys, &proxy)?;
            (s_hat, xt)
        }
        SVariant::S2Physical | SVariant::S2Algebraic => {
            let sk = if recipe.s_variant == SVariant::S2Physical {
                build_sk_physical(sys)?
            } else {
                build_sk_algebraic(sys)?
            };
            let s2 = build_s2(&sys.d, &sk)?;
            let s_hat = InnerOperator::jacobi(&s2).map_err(|e| e.in_block("S"))?.with_omega(omega)?;
            let xt = build_xtilde(sys, &s_hat)?;
            (s_hat, xt)
        }
        SVariant::Exact => {
            let lin = a_hat.linear_surrogate();
            let s = dense_schur(&sys.d, &sys.b, &lin)?;
            let s_hat = InnerOperator::from_dense(&s).map_err(|e| e.in_block("S"))?.with_omega(omega)?;
            let x = dense_schur(&sys.e, &sys.c, &s_hat)?;
            let x_hat = InnerOperator::from_dense(&x).map_err(|e| e.in_block("X"))?;
            return Ok(InnerOperators { a_hat, s_hat, x_hat, spec: *spec });
        }
    };
    let x_hat = match recipe.x_form {
        XForm::Ic0 => InnerOperator::ic0(&x_tilde),
        XForm::Diag => InnerOperator::jacobi(&x_tilde),
        XForm::ExactDense => InnerOperator::exact_dense(&x_tilde),
    }
    .map_err(|e| e.in_block("X"))?;
    Ok(InnerOperators { a_hat, s_hat, x_hat, spec: *spec })
}
