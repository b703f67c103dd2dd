//! Matrix Market coordinate and array I/O.

use std::fmt::Write as _;
use std::path::Path;

use super::csr::SparseMatrix;
use crate::error::{Error, Result};

/// Serializes a sparse matrix as `coordinate real general`, 1-based indices,
/// 17 significant digits.
pub fn write_matrix_market(m: &SparseMatrix) -> String {
    let mut s = String::with_capacity(32 * (m.nnz() + 2));
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", m.nrows(), m.ncols(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    s
}

/// Parses `coordinate real {general|symmetric}`; symmetric input is expanded
/// to full storage.
pub fn read_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let h: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported header '{header}'") });
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported field '{}'", h[3]) });
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry '{other}'") }),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut t = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let perr = |msg: String| Error::Parse { line: ln + 1, msg };
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(perr("size line needs three integers".into()));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| perr(format!("bad integer '{s}': {e}")));
                size = Some((p(toks[0])?, p(toks[1])?, p(toks[2])?));
            }
            Some((nr, nc, _)) => {
                if toks.len() != 3 {
                    return Err(perr(format!("expected 'row col value', got '{line}'")));
                }
                let i: usize = toks[0].parse().map_err(|e| perr(format!("bad row '{}': {e}", toks[0])))?;
                let j: usize = toks[1].parse().map_err(|e| perr(format!("bad column '{}': {e}", toks[1])))?;
                let v: f64 = toks[2].parse().map_err(|e| perr(format!("bad value '{}': {e}", toks[2])))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(perr(format!("index ({i}, {j}) outside {nr}x{nc}")));
                }
                t.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    t.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or(Error::Parse { line: 1, msg: "missing size line".into() })?;
    let entries = if symmetric { t.iter().filter(|e| e.0 >= e.1).count() } else { t.len() };
    if entries != nnz {
        return Err(Error::Parse { line: 2, msg: format!("declared {nnz} entries, found {entries}") });
    }
    Ok(SparseMatrix::from_triplets(nr, nc, &t))
}

/// Dense vector as `array real general`, one value per line.
pub fn write_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(26 * (v.len() + 2));
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:.16e}");
    }
    s
}

pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut n: Option<usize> = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: ln + 1, msg };
        if n.is_none() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 || toks[1] != "1" {
                return Err(perr(format!("expected '<n> 1', got '{line}'")));
            }
            n = Some(toks[0].parse().map_err(|e| perr(format!("bad length: {e}")))?);
        } else {
            out.push(line.parse::<f64>().map_err(|e| perr(format!("bad value '{line}': {e}")))?);
        }
    }
    match n {
        Some(n) if n == out.len() => Ok(out),
        Some(n) => Err(Error::Parse { line: 2, msg: format!("declared {n} values, found {}", out.len()) }),
        None => Err(Error::Parse { line: 1, msg: "missing size line".into() }),
    }
}

pub fn save(path: &Path, m: &SparseMatrix) -> Result<()> {
    std::fs::write(path, write_matrix_market(m))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SparseMatrix> {
    read_matrix_market(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_input_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 2.0\n3 1 -1.5\n2 2 4\n";
        let m = read_matrix_market(text).unwrap();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(0, 2), -1.5);
        assert_eq!(m.get(2, 0), -1.5);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3.0\n";
        match read_matrix_market(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn array_format_is_rejected_for_matrices() {
        let text = "%%MatrixMarket matrix array real general\n1 1\n1.0\n";
        assert!(read_matrix_market(text).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            entries in proptest::collection::vec((0usize..9, 0usize..4, any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..30),
        ) {
            let m = SparseMatrix::from_triplets(9, 4, &entries);
            let back = read_matrix_market(&write_matrix_market(&m)).unwrap();
            prop_assert_eq!(back.indptr(), m.indptr());
            prop_assert_eq!(back.indices(), m.indices());
            for (a, b) in back.data().iter().zip(m.data()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn vector_round_trip(v in proptest::collection::vec(-1e300f64..1e300, 0..20)) {
            let back = read_vector(&write_vector(&v)).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
