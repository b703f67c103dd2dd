use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{Analysis, ExperimentConfig, Problem, RhsMode, SolverKind};
use crate::assembly::{assemble_mfe, assemble_mhfe, condense_mhfe, manufactured_rhs, mfe_to_dsp, DspSystem, StructuredMesh};
use crate::error::{Error, Result};
use crate::krylov::{gmres, minres, pcg, KrylovOptions, KrylovResult, SolveStats};
use crate::linalg::norm2;
use crate::precond::{BlockDiagonal, BlockTriangular};
use crate::schur::{build_inner_operators, InnerOperators};
use crate::spectral::{
    classify, compute_indicators, full_spectrum, provenance, verify_bounds, BoundReport, EigenClass, Spectrum,
    SpectrumMode, SpectrumOptions, Verdict,
};

/// (n, m, p, N, nonzeros) of an assembled system.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeRow {
    pub problem: Problem,
    pub cells: usize,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub nnz: usize,
}

impl SizeRow {
    pub const CSV_HEADER: &'static str = "problem,cells,n,m,p,N,nnz";

    pub fn of(problem: Problem, cells: usize, sys: &DspSystem) -> Self {
        Self { problem, cells, n: sys.n(), m: sys.m(), p: sys.p(), nnz: sys.nnz() }
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{},{},{},{}", self.problem, self.cells, self.n, self.m, self.p, self.n + self.m + self.p, self.nnz)
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub sizes: SizeRow,
    pub stats: Vec<SolveStats>,
    pub report: Option<BoundReport>,
    pub spectra: Vec<Spectrum>,
    pub verdicts: Vec<Verdict>,
}

impl RunOutcome {
    pub fn verify_failed(&self) -> bool {
        self.verdicts.iter().any(|v| !v.passed())
    }
}

pub fn build_system(cfg: &ExperimentConfig) -> Result<DspSystem> {
    let mesh = StructuredMesh::new(cfg.problem.dim(), cfg.cells)?;
    match cfg.problem {
        Problem::Mfe2d => mfe_to_dsp(&assemble_mfe(&mesh, &cfg.props)?, &cfg.props),
        Problem::Mhfe2d | Problem::Mhfe3d => condense_mhfe(&assemble_mhfe(&mesh, &cfg.props)?, &cfg.props),
    }
}

/// Runs `cfg` into a fresh `out_root/<name>/<UTC timestamp>/` directory.
pub fn run_experiment(cfg: &ExperimentConfig, out_root: &Path) -> Result<RunOutcome> {
    let dir = fresh_dir(&out_root.join(&cfg.name))?;
    run_in_dir(cfg, &dir)
}

pub(crate) fn fresh_dir(parent: &Path) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = parent.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = parent.join(format!("{stamp}-{k}"));
        k += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn right_hand_side(cfg: &ExperimentConfig, sys: &DspSystem) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    Ok(match cfg.rhs {
        RhsMode::Manufactured => {
            let (b, x) = manufactured_rhs(sys, cfg.seed)?;
            (b, Some(x))
        }
        RhsMode::Ones => {
            let x = vec![1.0; sys.dim()];
            (sys.apply(&x)?, Some(x))
        }
        RhsMode::Physical => (sys.rhs.clone(), None),
    })
}

fn solve_one(
    cfg: &ExperimentConfig,
    sys: &DspSystem,
    ops: &InnerOperators,
    solver: SolverKind,
    rhs: &[f64],
    x_true: Option<&[f64]>,
) -> Result<(KrylovResult, f64, Option<f64>)> {
    let opts = KrylovOptions { tol: cfg.tolerance(solver), maxit: cfg.maxit };
    let start = Instant::now();
    let (res, truth): (KrylovResult, Option<Vec<f64>>) = match solver {
        SolverKind::Gmres => {
            let p = BlockTriangular::new(sys, ops.clone())?;
            (gmres(sys, rhs, &p, &opts)?, x_true.map(<[f64]>::to_vec))
        }
        SolverKind::Minres => {
            let p = BlockDiagonal::new(sys, ops.clone())?;
            (minres(sys, rhs, &p, &opts)?, x_true.map(<[f64]>::to_vec))
        }
        SolverKind::PcgBlock11 => {
            let x1 = x_true.map_or_else(|| vec![1.0; sys.n()], |x| x[..sys.n()].to_vec());
            let b1 = sys.a.spmv(&x1)?;
            let m = ops.a_hat.linear_surrogate();
            (pcg(&sys.a, &b1, &m, &opts)?, Some(x1))
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let rel_err = truth.map(|t| {
        let diff: Vec<f64> = res.x.iter().zip(&t).map(|(a, b)| a - b).collect();
        norm2(&diff) / norm2(&t)
    });
    Ok((res, wall, rel_err))
}

/// Runs `cfg` and writes every artifact into `dir`.
pub fn run_in_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    let sys = build_system(cfg).map_err(|e| e.in_stage("biot-assembly"))?;
    let sizes = SizeRow::of(cfg.problem, cfg.cells, &sys);
    std::fs::write(dir.join("sizes.csv"), format!("{}\n{}\n", SizeRow::CSV_HEADER, sizes.to_csv()))?;

    let needs_ops = !cfg.solvers.is_empty() || cfg.analysis != Analysis::None;
    let ops = if needs_ops {
        Some(build_inner_operators(&sys, &cfg.spec).map_err(|e| e.in_stage("schur-approx"))?)
    } else {
        None
    };
    let prov = ops.as_ref().map(|o| provenance(&sys, o)).unwrap_or_else(|| sys.meta.tag());

    let mut stats = Vec::new();
    let mut results = format!("{}\n", SolveStats::CSV_HEADER);
    let mut convergence = String::from("method,iteration,residual\n");
    if let Some(ops) = &ops {
        let (rhs, x_true) = right_hand_side(cfg, &sys)?;
        for &solver in &cfg.solvers {
            let (res, wall, rel_err) =
                solve_one(cfg, &sys, ops, solver, &rhs, x_true.as_deref()).map_err(|e| e.in_stage("krylov"))?;
            let s = SolveStats {
                method: res.method.to_string(),
                recipe_id: prov.clone(),
                h: cfg.h(),
                dim: if solver == SolverKind::PcgBlock11 { sys.n() } else { sys.dim() },
                iterations: res.iterations,
                converged: res.converged,
                rel_err: rel_err.unwrap_or(f64::NAN),
                wall_time: wall,
            };
            let _ = writeln!(results, "{}", s.to_csv());
            for (k, r) in res.history.iter().enumerate() {
                let _ = writeln!(convergence, "{},{k},{r:e}", res.method);
            }
            stats.push(s);
        }
    }
    std::fs::write(dir.join("results.csv"), results)?;
    std::fs::write(dir.join("convergence.csv"), convergence)?;

    let mut report = None;
    let mut spectra = Vec::new();
    let mut verdicts = Vec::new();
    let mut text = String::new();
    if let (Some(ops), true) = (&ops, cfg.analysis >= Analysis::Indicators) {
        let ind = compute_indicators(&sys, ops).map_err(|e| e.in_stage("spectral"))?;
        let mut r = BoundReport::new(ind, prov.clone());
        if !ops.is_linear() {
            r = r.with_note("nonlinear inner solves replaced by their IC(0) preconditioners");
        }
        if cfg.analysis == Analysis::Indicators {
            let _ = write!(text, "indicators for {prov}\n\n{}", r.indicators);
        } else {
            text.push_str(&r.to_text());
        }
        std::fs::write(dir.join("bounds.csv"), r.to_csv())?;
        report = Some(r);
    } else {
        text.push_str("no spectral analysis requested\n");
    }
    if let (Some(ops), Some(r), true) = (&ops, &report, cfg.analysis >= Analysis::Spectrum) {
        let opts = SpectrumOptions { max_dense_n: cfg.max_dense_n, ..Default::default() };
        for &mode in &cfg.modes {
            let sp = full_spectrum(&sys, ops, mode, &opts).map_err(|e| e.in_stage("spectral"))?;
            if cfg.analysis == Analysis::Verify {
                let v = verify_bounds(&sp, r)?;
                let _ = write!(text, "\n{}", v.to_text());
                verdicts.push(v);
            }
            spectra.push(sp);
        }
    }
    std::fs::write(dir.join("bound_report.txt"), text)?;

    let mut spectrum_csv = String::from("mode,re,im,class\n");
    let mut eig_csv = format!("{}\n", EIGEN_BOUNDS_HEADER);
    for sp in &spectra {
        for line in sp.to_csv().lines().skip(1) {
            let _ = writeln!(spectrum_csv, "{},{line}", sp.mode);
        }
        if let Some(r) = &report {
            let _ = writeln!(eig_csv, "{}", eigen_bounds_row(sp, r));
        }
    }
    std::fs::write(dir.join("spectrum.csv"), spectrum_csv)?;
    std::fs::write(dir.join("eigen_bounds.csv"), eig_csv)?;
    let mut verdict_csv = String::new();
    for (k, v) in verdicts.iter().enumerate() {
        let body = v.to_csv();
        let skip = usize::from(k > 0);
        for line in body.lines().skip(skip) {
            let _ = writeln!(verdict_csv, "{line}");
        }
    }
    if !verdict_csv.is_empty() {
        std::fs::write(dir.join("verdict.csv"), verdict_csv)?;
    }

    Ok(RunOutcome { dir: dir.to_path_buf(), sizes, stats, report, spectra, verdicts })
}

pub(crate) const EIGEN_BOUNDS_HEADER: &str =
    "provenance,mode,eig_neg_lo,eig_neg_hi,eig_pos_lo,eig_pos_hi,n_complex,bound_neg_lo,bound_neg_hi,bound_pos_lo,bound_pos_hi,radius";

fn eigen_bounds_row(sp: &Spectrum, r: &BoundReport) -> String {
    let real: Vec<f64> = sp.values.iter().filter(|z| classify(**z) == EigenClass::Real).map(|z| z.re).collect();
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::NAN, f64::NAN), |(a, b), x| (if a.is_nan() { x } else { a.min(x) }, if b.is_nan() { x } else { b.max(x) }))
    };
    let neg = range(&mut real.iter().copied().filter(|x| *x < 0.0));
    let pos = range(&mut real.iter().copied().filter(|x| *x >= 0.0));
    let (bn, bp, radius) = match sp.mode {
        SpectrumMode::Triangular => ((f64::NAN, f64::NAN), (r.triangular.lo, r.triangular.hi), r.disc.radius().unwrap_or(f64::NAN)),
        SpectrumMode::Diagonal => (r.diagonal.minus, r.diagonal.plus, f64::NAN),
    };
    format!(
        "{},{},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e}",
        sp.provenance,
        sp.mode,
        neg.0,
        neg.1,
        pos.0,
        pos.1,
        sp.complex_count(),
        bn.0,
        bn.1,
        bp.0,
        bp.1,
        radius
    )
}

/// Labels an error that escaped a run with the config that caused it.
pub fn describe_failure(err: &Error, cfg: &ExperimentConfig) -> String {
    format!("error: {err}\nconfiguration:\n{}", cfg.to_text())
}
