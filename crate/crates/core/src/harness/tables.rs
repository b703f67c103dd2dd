use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::krylov::SolveStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    EigenBounds,
    Iterations,
    Sizes,
    Scalability,
}

impl FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen-bounds" => Ok(Self::EigenBounds),
            "iterations" => Ok(Self::Iterations),
            "sizes" => Ok(Self::Sizes),
            "scalability" => Ok(Self::Scalability),
            _ => Err(Error::Config(format!(
                "unknown table `{s}` (expected eigen-bounds, iterations, sizes or scalability)"
            ))),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EigenBounds => "eigen-bounds",
            Self::Iterations => "iterations",
            Self::Sizes => "sizes",
            Self::Scalability => "scalability",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableOutput {
    pub text: String,
    pub warnings: Vec<String>,
}

/// Aligned text table with ` | ` separators.
pub fn render(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    out.push('\n');
    out.push_str(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.clone()));
        out.push('\n');
    }
    out
}

fn collect(dir: &Path, name: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    if !dir.is_dir() {
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(&p, name, out)?;
        } else if p.file_name().is_some_and(|f| f == name) {
            out.push(p);
        }
    }
    Ok(())
}

/// Data rows of every `name` CSV below `dir`.
fn csv_rows(dir: &Path, name: &str) -> Result<Vec<Vec<String>>> {
    let mut files = Vec::new();
    collect(dir, name, &mut files)?;
    let mut rows = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    Ok(rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

fn fmt_interval(lo: f64, hi: f64) -> String {
    if lo.is_nan() {
        "none".into()
    } else {
        format!("[{lo:.4e}, {hi:.4e}]")
    }
}

/// Builds one of the summary tables from the artifacts below `results_dir`.
pub fn emit_table(results_dir: &Path, which: TableId) -> Result<TableOutput> {
    let mut warnings = Vec::new();
    let text = match which {
        TableId::Sizes => {
            let mut seen = BTreeMap::new();
            for r in csv_rows(results_dir, "sizes.csv")? {
                if r.len() == 7 {
                    let key = (r[0].clone(), r[1].parse::<usize>().unwrap_or(0));
                    seen.insert(key, r);
                }
            }
            let rows: Vec<Vec<String>> = seen
                .into_values()
                .map(|r| vec![r[1].clone(), r[2].clone(), r[3].clone(), r[4].clone(), r[5].clone(), r[6].clone(), r[0].clone()])
                .collect();
            if rows.is_empty() {
                warnings.push(format!("no sizes.csv found below {}", results_dir.display()));
            }
            render(&["1/h", "n", "m", "p", "N", "nonzeros", "problem"], &rows)
        }
        TableId::Iterations => {
            let mut by_prec: BTreeMap<String, [Option<SolveStats>; 2]> = BTreeMap::new();
            for s in stats(results_dir)? {
                let slot = match s.method.as_str() {
                    "GMRES" => 0,
                    "MINRES" => 1,
                    _ => continue,
                };
                let key = s.recipe_id.clone();
                by_prec.entry(key).or_default()[slot] = Some(s);
            }
            let mut rows = Vec::new();
            for (prec, pair) in &by_prec {
                let mut row = vec![prec.clone()];
                for (k, s) in pair.iter().enumerate() {
                    match s {
                        Some(s) => {
                            let flag = if s.converged { "" } else { "*" };
                            row.push(format!("{}{flag}", s.iterations));
                            row.push(format!("{:.2}", s.wall_time));
                        }
                        None => {
                            warnings.push(format!("{prec}: no {} run", ["GMRES", "MINRES"][k]));
                            row.push("missing".into());
                            row.push("missing".into());
                        }
                    }
                }
                rows.push(row);
            }
            if rows.is_empty() {
                warnings.push(format!("no solver results below {}", results_dir.display()));
            }
            render(&["prec", "GMRES n_it", "GMRES T [s]", "MINRES n_it", "MINRES T [s]"], &rows)
        }
        TableId::Scalability => {
            let mut all = stats(results_dir)?;
            all.sort_by(|a, b| b.h.total_cmp(&a.h).then(a.method.cmp(&b.method)));
            let rows: Vec<Vec<String>> = all
                .iter()
                .map(|s| {
                    vec![
                        format!("{}", (1.0 / s.h).round()),
                        s.method.clone(),
                        format!("{}{}", s.iterations, if s.converged { "" } else { "*" }),
                        format!("{:.2}", s.wall_time),
                        format!("{:.2e}", s.rel_err),
                    ]
                })
                .collect();
            if rows.is_empty() {
                warnings.push(format!("no solver results below {}", results_dir.display()));
            }
            render(&["1/h", "solver", "n_it", "T [s]", "rel. err."], &rows)
        }
        TableId::EigenBounds => {
            let mut rows = Vec::new();
            for r in csv_rows(results_dir, "eigen_bounds.csv")? {
                if r.len() != 12 {
                    warnings.push(format!("malformed eigen_bounds row: {}", r.join(",")));
                    continue;
                }
                let v: Vec<f64> = r[2..].iter().map(|s| num(s)).collect();
                let (eig, bounds) = if r[1] == "diagonal" {
                    (
                        format!("{} U {}", fmt_interval(v[0], v[1]), fmt_interval(v[2], v[3])),
                        format!("{} U {}", fmt_interval(v[5], v[6]), fmt_interval(v[7], v[8])),
                    )
                } else {
                    let mut e = fmt_interval(v[2], v[3]);
                    if v[0].is_finite() {
                        e = format!("{} U {e}", fmt_interval(v[0], v[1]));
                    }
                    (e, format!("{}  |λ-1| <= {:.4}", fmt_interval(v[7], v[8]), v[9]))
                };
                rows.push(vec![format!("{} {}", r[0], r[1]), format!("{}", v[4] as usize), eig, bounds]);
            }
            if rows.is_empty() {
                warnings.push(format!("no eigen_bounds.csv found below {}", results_dir.display()));
            }
            render(&["operator", "complex", "eigenvalues (real)", "bounds"], &rows)
        }
    };
    Ok(TableOutput { text, warnings })
}

fn stats(dir: &Path) -> Result<Vec<SolveStats>> {
    Ok(csv_rows(dir, "results.csv")?.into_iter().filter_map(|r| SolveStats::from_csv(&r.join(","))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir_gives_header_and_warning() {
        let dir = std::env::temp_dir().join(format!("dsp-empty-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let t = emit_table(&dir, TableId::Sizes).unwrap();
        assert_eq!(t.text.lines().count(), 2);
        assert_eq!(t.warnings.len(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn render_aligns_columns() {
        let t = render(&["a", "bb"], &[vec!["100".into(), "1".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "  a | bb");
        assert_eq!(lines[2], "100 |  1");
    }

    #[test]
    fn table_ids_parse() {
        for id in ["eigen-bounds", "iterations", "sizes", "scalability"] {
            assert_eq!(id.parse::<TableId>().unwrap().to_string(), id);
        }
        assert!("nope".parse::<TableId>().is_err());
    }
}
