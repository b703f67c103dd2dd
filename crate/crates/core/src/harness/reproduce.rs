use std::path::{Path, PathBuf};

use super::config::{Analysis, ExperimentConfig, Problem, RhsMode, SolverKind};
use super::run::{fresh_dir, run_in_dir};
use super::tables::{emit_table, TableId, TableOutput};
use crate::error::Result;
use crate::schur::SchurRecipe;

/// Overrides applied to every preset run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub cells: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub max_dense_n: Option<usize>,
}

fn two_d_presets(cells: usize) -> Vec<ExperimentConfig> {
    let base = ExperimentConfig { cells, ..Default::default() };
    vec![
        ExperimentConfig { name: "mfe-P1".into(), spec: spec_with(&base, SchurRecipe::s1()), ..base.clone() },
        ExperimentConfig { name: "mfe-P1w".into(), spec: spec_with(&base, SchurRecipe::s1_omega(0.1)), ..base.clone() },
        ExperimentConfig { name: "mfe-P2".into(), spec: spec_with(&base, SchurRecipe::s2()), ..base.clone() },
        ExperimentConfig {
            name: "mhfe-P".into(),
            problem: Problem::Mhfe2d,
            spec: spec_with(&base, SchurRecipe::s2()),
            ..base.clone()
        },
    ]
}

fn spec_with(base: &ExperimentConfig, recipe: SchurRecipe) -> crate::schur::PrecondSpec {
    crate::schur::PrecondSpec { recipe, ..base.spec }
}

/// The runs behind one table.
pub fn preset(table: TableId, ov: &Overrides) -> Vec<ExperimentConfig> {
    let cells = |default: &[usize]| ov.cells.clone().unwrap_or_else(|| default.to_vec());
    let mut runs: Vec<ExperimentConfig> = match table {
        TableId::Sizes => cells(&[10, 20, 40])
            .into_iter()
            .map(|c| ExperimentConfig {
                name: format!("mhfe3d-{c}"),
                problem: Problem::Mhfe3d,
                cells: c,
                solvers: vec![],
                ..Default::default()
            })
            .collect(),
        TableId::Iterations => cells(&[40])
            .into_iter()
            .flat_map(two_d_presets)
            .map(|c| ExperimentConfig { solvers: vec![SolverKind::Gmres, SolverKind::Minres], ..c })
            .collect(),
        TableId::EigenBounds => cells(&[40])
            .into_iter()
            .flat_map(two_d_presets)
            .map(|c| ExperimentConfig { solvers: vec![], analysis: Analysis::Verify, ..c })
            .collect(),
        TableId::Scalability => cells(&[10, 20])
            .into_iter()
            .map(|c| ExperimentConfig {
                name: format!("mhfe3d-{c}"),
                problem: Problem::Mhfe3d,
                cells: c,
                spec: spec_with(&ExperimentConfig::default(), SchurRecipe::s2()),
                solvers: vec![SolverKind::Gmres, SolverKind::Minres, SolverKind::PcgBlock11],
                tol: Some(1e-8),
                rhs: RhsMode::Ones,
                ..Default::default()
            })
            .collect(),
    };
    for r in &mut runs {
        if let Some(s) = ov.seed {
            r.seed = s;
        }
        if let Some(n) = ov.max_dense_n {
            r.max_dense_n = n;
        }
        if ov.cells.is_some() && !r.name.ends_with(&format!("-{}", r.cells)) {
            r.name = format!("{}-{}", r.name, r.cells);
        }
    }
    runs
}

#[derive(Clone, Debug)]
pub struct ReproduceOutcome {
    pub dir: PathBuf,
    pub table: TableOutput,
    pub verify_failed: bool,
}

/// Runs every preset of `table` below `out_root/<table>/<timestamp>/` and
/// writes `table.txt` there.
pub fn reproduce(table: TableId, out_root: &Path, ov: &Overrides, mut log: impl FnMut(&str)) -> Result<ReproduceOutcome> {
    let dir = fresh_dir(&out_root.join(table.to_string()))?;
    let mut verify_failed = false;
    for cfg in preset(table, ov) {
        log(&format!("running {} (1/h = {})", cfg.name, cfg.cells));
        let out = run_in_dir(&cfg, &dir.join(&cfg.name))?;
        verify_failed |= out.verify_failed();
    }
    let t = emit_table(&dir, table)?;
    std::fs::write(dir.join("table.txt"), &t.text)?;
    Ok(ReproduceOutcome { dir, table: t, verify_failed })
}
