use std::fmt::{self, Write as _};
use std::path::Path;

use crate::assembly::MaterialProps;
use crate::error::{Error, Result};
use crate::schur::{InnerKind, PrecondSpec, SForm, SVariant, SchurRecipe, XForm};
use crate::spectral::SpectrumMode;
use crate::tolerances::{GMRES_TOL, MAX_DENSE_N, MINRES_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Mfe2d,
    Mhfe2d,
    Mhfe3d,
}

impl Problem {
    pub fn dim(self) -> usize {
        match self {
            Problem::Mfe2d | Problem::Mhfe2d => 2,
            Problem::Mhfe3d => 3,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Mfe2d => "mfe2d",
            Problem::Mhfe2d => "mhfe2d",
            Problem::Mhfe3d => "mhfe3d",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Gmres,
    Minres,
    /// PCG on the (1,1) block with Â as preconditioner.
    PcgBlock11,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Gmres => "gmres",
            SolverKind::Minres => "minres",
            SolverKind::PcgBlock11 => "pcg-block11",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsMode {
    /// 𝒜 x_true with x_true uniform in [-1, 1].
    Manufactured,
    /// 𝒜 1.
    Ones,
    /// The assembled load vector.
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Analysis {
    None,
    Indicators,
    Bounds,
    Spectrum,
    Verify,
}

/// One experiment: problem, preconditioner, solvers and analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: Problem,
    pub cells: usize,
    pub props: MaterialProps,
    pub spec: PrecondSpec,
    pub solvers: Vec<SolverKind>,
    /// Overrides the per-method default tolerance.
    pub tol: Option<f64>,
    pub maxit: usize,
    pub rhs: RhsMode,
    pub seed: u64,
    pub analysis: Analysis,
    pub modes: Vec<SpectrumMode>,
    pub max_dense_n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            problem: Problem::Mfe2d,
            cells: 10,
            props: MaterialProps::default(),
            spec: PrecondSpec::new(InnerKind::Ic0, SchurRecipe::s1()),
            solvers: vec![SolverKind::Gmres],
            tol: None,
            maxit: 2000,
            rhs: RhsMode::Manufactured,
            seed: 42,
            analysis: Analysis::None,
            modes: vec![SpectrumMode::Triangular, SpectrumMode::Diagonal],
            max_dense_n: MAX_DENSE_N,
        }
    }
}

impl ExperimentConfig {
    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn tolerance(&self, solver: SolverKind) -> f64 {
        self.tol.unwrap_or(match solver {
            SolverKind::Gmres => GMRES_TOL,
            SolverKind::Minres | SolverKind::PcgBlock11 => MINRES_TOL,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if !text.lines().any(|l| l.trim_start().starts_with("name")) {
            if let Some(stem) = path.file_stem() {
                cfg.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, found `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one dotted key; the error message names the key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let bad = |what: &str| format!("key `{key}`: {what} `{value}`");
        let num = || value.parse::<f64>().map_err(|_| bad("expected a number, found"));
        let int = || value.parse::<usize>().map_err(|_| bad("expected a nonnegative integer, found"));
        let p = &mut self.props;
        match key {
            "name" => self.name = value.to_string(),
            "discretization" => {
                self.problem = match value {
                    "mfe2d" => Problem::Mfe2d,
                    "mhfe2d" => Problem::Mhfe2d,
                    "mhfe3d" => Problem::Mhfe3d,
                    _ => return Err(bad("expected mfe2d, mhfe2d or mhfe3d, found")),
                }
            }
            "h" => self.cells = parse_h(value).ok_or_else(|| bad("expected 1/N or a spacing dividing 1, found"))?,
            "props.young" => p.young = num()?,
            "props.poisson" => p.poisson = num()?,
            "props.biot" => p.biot = num()?,
            "props.storage" => p.storage = num()?,
            "props.permeability" => p.permeability = num()?,
            "props.viscosity" => p.viscosity = num()?,
            "props.dt" => p.dt = num()?,
            "props.traction" => p.traction = num()?,
            "props.stab_factor" => p.stab_factor = num()?,
            "recipe.a" => {
                self.spec.a_form = match value {
                    "ic0" => InnerKind::Ic0,
                    "jacobi" => InnerKind::Jacobi,
                    "exact" => InnerKind::ExactDense,
                    "inner-pcg" => InnerKind::InnerPcg { tol: 1e-2, maxit: 200 },
                    _ => return Err(bad("expected ic0, jacobi, inner-pcg or exact, found")),
                }
            }
            "recipe.a_tol" | "recipe.a_maxit" => match &mut self.spec.a_form {
                InnerKind::InnerPcg { tol, maxit } => {
                    if key == "recipe.a_tol" {
                        *tol = num()?;
                    } else {
                        *maxit = int()?;
                    }
                }
                _ => return Err(format!("key `{key}` needs recipe.a = inner-pcg set earlier")),
            },
            "recipe.s" => {
                let r = &mut self.spec.recipe;
                (r.s_variant, r.s_form) = match value {
                    "s1" => (SVariant::S1, SForm::Ic0OfS1),
                    "s1-diag" => (SVariant::S1, SForm::DiagOfS1),
                    "s2" => (SVariant::S2Algebraic, SForm::DiagOfS2),
                    "s2-physical" => (SVariant::S2Physical, SForm::DiagOfS2),
                    "exact" => (SVariant::Exact, SForm::ExactDense),
                    _ => return Err(bad("expected s1, s1-diag, s2, s2-physical or exact, found")),
                }
            }
            "recipe.omega" => self.spec.recipe.omega = num()?,
            "recipe.x" => {
                self.spec.recipe.x_form = match value {
                    "ic0" => XForm::Ic0,
                    "diag" => XForm::Diag,
                    "exact" => XForm::ExactDense,
                    _ => return Err(bad("expected ic0, diag or exact, found")),
                }
            }
            "solver" if value == "none" => self.solvers.clear(),
            "solver" => {
                self.solvers = list(value)
                    .map(|s| match s {
                        "gmres" => Ok(SolverKind::Gmres),
                        "minres" => Ok(SolverKind::Minres),
                        "pcg-block11" => Ok(SolverKind::PcgBlock11),
                        _ => Err(bad("expected gmres, minres, pcg-block11 or none, found")),
                    })
                    .collect::<std::result::Result<_, _>>()?
            }
            "solver.tol" => self.tol = Some(num()?),
            "solver.maxit" => self.maxit = int()?,
            "rhs.mode" => {
                self.rhs = match value {
                    "manufactured" => RhsMode::Manufactured,
                    "ones" => RhsMode::Ones,
                    "physical" => RhsMode::Physical,
                    _ => return Err(bad("expected manufactured, ones or physical, found")),
                }
            }
            "rhs.seed" => self.seed = value.parse().map_err(|_| bad("expected an integer seed, found"))?,
            "analysis" => {
                self.analysis = match value {
                    "none" => Analysis::None,
                    "indicators" => Analysis::Indicators,
                    "bounds" => Analysis::Bounds,
                    "spectrum" => Analysis::Spectrum,
                    "verify" => Analysis::Verify,
                    _ => return Err(bad("expected none, indicators, bounds, spectrum or verify, found")),
                }
            }
            "analysis.modes" => {
                self.modes = list(value)
                    .map(|s| match s {
                        "triangular" => Ok(SpectrumMode::Triangular),
                        "diagonal" => Ok(SpectrumMode::Diagonal),
                        _ => Err(bad("expected triangular and/or diagonal, found")),
                    })
                    .collect::<std::result::Result<_, _>>()?
            }
            "analysis.max_dense_n" => self.max_dense_n = int()?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.props.validate()?;
        self.spec.recipe.validate()?;
        if self.cells == 0 {
            return Err(Error::Config("h must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::Config(format!("solver.tol must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// The configuration in the same `key = value` form it is read from.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.props;
        let r = &self.spec.recipe;
        let s_name = match (r.s_variant, r.s_form) {
            (SVariant::S1, SForm::DiagOfS1) => "s1-diag",
            (SVariant::S1, _) => "s1",
            (SVariant::S2Algebraic, _) => "s2",
            (SVariant::S2Physical, _) => "s2-physical",
            (SVariant::Exact, _) => "exact",
        };
        let a_name = match self.spec.a_form {
            InnerKind::Ic0 => "ic0".to_string(),
            InnerKind::Jacobi => "jacobi".to_string(),
            InnerKind::ExactDense => "exact".to_string(),
            InnerKind::InnerPcg { tol, maxit } => format!("inner-pcg\nrecipe.a_tol = {tol:e}\nrecipe.a_maxit = {maxit}"),
        };
        let x_name = match r.x_form {
            XForm::Ic0 => "ic0",
            XForm::Diag => "diag",
            XForm::ExactDense => "exact",
        };
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "discretization = {}", self.problem);
        let _ = writeln!(s, "h = 1/{}", self.cells);
        for (k, v) in [
            ("young", p.young),
            ("poisson", p.poisson),
            ("biot", p.biot),
            ("storage", p.storage),
            ("permeability", p.permeability),
            ("viscosity", p.viscosity),
            ("dt", p.dt),
            ("traction", p.traction),
            ("stab_factor", p.stab_factor),
        ] {
            let _ = writeln!(s, "props.{k} = {v:e}");
        }
        let _ = writeln!(s, "recipe.a = {a_name}");
        let _ = writeln!(s, "recipe.s = {s_name}");
        let _ = writeln!(s, "recipe.omega = {}", r.omega);
        let _ = writeln!(s, "recipe.x = {x_name}");
        let solvers: Vec<String> = self.solvers.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(s, "solver = {}", if solvers.is_empty() { "none".into() } else { solvers.join(",") });
        if let Some(t) = self.tol {
            let _ = writeln!(s, "solver.tol = {t:e}");
        }
        let _ = writeln!(s, "solver.maxit = {}", self.maxit);
        let rhs = match self.rhs {
            RhsMode::Manufactured => "manufactured",
            RhsMode::Ones => "ones",
            RhsMode::Physical => "physical",
        };
        let _ = writeln!(s, "rhs.mode = {rhs}");
        let _ = writeln!(s, "rhs.seed = {}", self.seed);
        let analysis = match self.analysis {
            Analysis::None => "none",
            Analysis::Indicators => "indicators",
            Analysis::Bounds => "bounds",
            Analysis::Spectrum => "spectrum",
            Analysis::Verify => "verify",
        };
        let _ = writeln!(s, "analysis = {analysis}");
        let modes: Vec<String> = self.modes.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "analysis.modes = {}", modes.join(","));
        let _ = writeln!(s, "analysis.max_dense_n = {}", self.max_dense_n);
        s
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Cells per side from `1/N` or a spacing such as `0.025`.
pub fn parse_h(value: &str) -> Option<usize> {
    if let Some(den) = value.strip_prefix("1/") {
        return den.trim().parse().ok().filter(|&n: &usize| n > 0);
    }
    let h: f64 = value.parse().ok()?;
    if !(h > 0.0 && h <= 1.0) {
        return None;
    }
    let n = (1.0 / h).round();
    ((n * h - 1.0).abs() < 1e-9).then_some(n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_cantilever_properties() {
        let p = ExperimentConfig::default().props;
        assert_eq!((p.dt, p.young, p.poisson, p.biot, p.storage, p.permeability, p.viscosity), (1e-5, 1e5, 0.4, 1.0, 0.0, 1e-7, 1e3));
    }

    #[test]
    fn parses_dotted_keys() {
        let cfg = ExperimentConfig::parse(
            "# comment\nname = run1\ndiscretization = mhfe3d\nh = 0.1\nrecipe.s = s2\nrecipe.omega = 0.5\nsolver = gmres, minres\nanalysis = verify\n",
        )
        .unwrap();
        assert_eq!(cfg.name, "run1");
        assert_eq!(cfg.problem, Problem::Mhfe3d);
        assert_eq!(cfg.cells, 10);
        assert_eq!(cfg.spec.recipe.s_variant, SVariant::S2Algebraic);
        assert_eq!(cfg.spec.recipe.omega, 0.5);
        assert_eq!(cfg.solvers, vec![SolverKind::Gmres, SolverKind::Minres]);
        assert_eq!(cfg.analysis, Analysis::Verify);
    }

    #[test]
    fn errors_name_the_key() {
        let e = ExperimentConfig::parse("h = 1/10\nprops.young = soft\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2") && msg.contains("props.young"), "{msg}");
        let e = ExperimentConfig::parse("recipe.colour = red\n").unwrap_err();
        assert!(e.to_string().contains("recipe.colour"));
        assert!(ExperimentConfig::parse("just some words\n").is_err());
        assert!(matches!(ExperimentConfig::parse("recipe.omega = 0\n"), Err(Error::Config(_))));
    }

    #[test]
    fn text_form_round_trips() {
        let mut cfg = ExperimentConfig::parse("discretization = mhfe2d\nh = 1/8\nrecipe.a = inner-pcg\nrecipe.a_tol = 1e-3\nsolver = none\n").unwrap();
        cfg.seed = 7;
        let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn spacing_forms() {
        assert_eq!(parse_h("1/40"), Some(40));
        assert_eq!(parse_h("0.025"), Some(40));
        assert_eq!(parse_h("0.3"), None);
        assert_eq!(parse_h("1/0"), None);
    }
}
