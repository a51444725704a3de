//! Matrix Market reader and writer for the dense-convertible subset:
//! `coordinate real|integer|pattern general` and `array real|integer general`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxLayout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

struct Header {
    layout: MtxLayout,
    field: Field,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut tok = line.split_whitespace();
    let banner = tok.next().unwrap_or("");
    if banner != "%%MatrixMarket" {
        return Err(Error::UnsupportedFormat(
            "first line must start with %%MatrixMarket".into(),
        ));
    }
    let object = tok.next().unwrap_or("").to_ascii_lowercase();
    if object != "matrix" {
        return Err(Error::UnsupportedFormat(format!(
            "object '{object}' (only 'matrix' is supported)"
        )));
    }
    let layout = match tok.next().unwrap_or("").to_ascii_lowercase().as_str() {
        "coordinate" => MtxLayout::Coordinate,
        "array" => MtxLayout::Array,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "format '{other}' (expected coordinate or array)"
            )))
        }
    };
    let field = match tok.next().unwrap_or("").to_ascii_lowercase().as_str() {
        "real" | "double" | "integer" => Field::Real,
        "pattern" if layout == MtxLayout::Coordinate => Field::Pattern,
        "complex" => {
            return Err(Error::UnsupportedFormat(
                "qualifier 'complex' (complex-valued systems are not supported)".into(),
            ))
        }
        other => return Err(Error::UnsupportedFormat(format!("field qualifier '{other}'"))),
    };
    match tok.next().unwrap_or("general").to_ascii_lowercase().as_str() {
        "general" => {}
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "symmetry qualifier '{other}' (only 'general' is supported)"
            )))
        }
    }
    Ok(Header { layout, field })
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let t = tok.ok_or_else(|| Error::MalformedEntry {
        line,
        reason: format!("missing {what}"),
    })?;
    t.parse::<usize>().map_err(|_| Error::MalformedEntry {
        line,
        reason: format!("bad {what} '{t}'"),
    })
}

fn parse_value(tok: Option<&str>, line: usize) -> Result<f64> {
    let t = tok.ok_or_else(|| Error::MalformedEntry {
        line,
        reason: "missing value".into(),
    })?;
    let v = t.parse::<f64>().map_err(|_| Error::MalformedEntry {
        line,
        reason: format!("bad value '{t}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::MalformedEntry {
            line,
            reason: format!("non-finite value '{t}'"),
        });
    }
    Ok(v)
}

/// Parses Matrix Market text into a dense matrix.
///
/// Coordinate indices are 1-based; unlisted entries are zero, repeated
/// coordinates are summed, pattern entries become 1.0. Array data is
/// column-major.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::UnsupportedFormat("empty input".into()))?;
    let header = parse_header(first)?;

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| Error::MalformedEntry {
        line: 1,
        reason: "missing size line".into(),
    })?;
    let mut tok = size.split_whitespace();
    let rows = parse_index(tok.next(), size_line, "row count")?;
    let cols = parse_index(tok.next(), size_line, "column count")?;
    let mut m = DenseMatrix::zeros(rows, cols);

    match header.layout {
        MtxLayout::Coordinate => {
            let nnz = parse_index(tok.next(), size_line, "entry count")?;
            let mut seen = 0usize;
            for (ln, l) in body {
                let mut t = l.split_whitespace();
                let i = parse_index(t.next(), ln, "row index")?;
                let j = parse_index(t.next(), ln, "column index")?;
                let v = match header.field {
                    Field::Pattern => 1.0,
                    Field::Real => parse_value(t.next(), ln)?,
                };
                if t.next().is_some() {
                    return Err(Error::MalformedEntry {
                        line: ln,
                        reason: "too many fields".into(),
                    });
                }
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::IndexOutOfBounds {
                        line: ln,
                        row: i,
                        col: j,
                        rows,
                        cols,
                    });
                }
                m[(i - 1, j - 1)] += v;
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::MalformedEntry {
                    line: size_line,
                    reason: format!("header declares {nnz} entries, found {seen}"),
                });
            }
        }
        MtxLayout::Array => {
            let total = rows * cols;
            let mut k = 0usize;
            for (ln, l) in body {
                for t in l.split_whitespace() {
                    if k >= total {
                        return Err(Error::MalformedEntry {
                            line: ln,
                            reason: format!("more than {total} array values"),
                        });
                    }
                    let v = parse_value(Some(t), ln)?;
                    m[(k % rows, k / rows)] = v;
                    k += 1;
                }
            }
            if k != total {
                return Err(Error::MalformedEntry {
                    line: size_line,
                    reason: format!("expected {total} array values, found {k}"),
                });
            }
        }
    }
    Ok(m)
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text)
}

/// Serializes a dense matrix. Coordinate output lists only nonzeros.
pub fn write_matrix_market(m: &DenseMatrix, layout: MtxLayout) -> String {
    let mut out = String::new();
    match layout {
        MtxLayout::Coordinate => {
            let nnz = m.as_slice().iter().filter(|v| **v != 0.0).count();
            out.push_str("%%MatrixMarket matrix coordinate real general\n");
            let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), nnz);
            for i in 0..m.rows() {
                for (j, v) in m.row(i).iter().enumerate() {
                    if *v != 0.0 {
                        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_f64(*v));
                    }
                }
            }
        }
        MtxLayout::Array => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{} {}", m.rows(), m.cols());
            for j in 0..m.cols() {
                for i in 0..m.rows() {
                    let _ = writeln!(out, "{}", fmt_f64(m[(i, j)]));
                }
            }
        }
    }
    out
}

/// Reads an `n x 1` (or `1 x n`) Matrix Market array as a vector.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_market(path)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "{}: expected a vector, found {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.as_slice().to_vec())
}

pub fn write_vector(v: &[f64]) -> String {
    let m = DenseMatrix::from_vec(v.len(), 1, v.to_vec()).expect("finite vector");
    write_matrix_market(&m, MtxLayout::Array)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coordinate_example() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 3.0\n2 2 4.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 4.0]]));
    }

    #[test]
    fn array_example() {
        let text = "%%MatrixMarket matrix array real general\n2 1\n1.0\n2.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[1.0], [2.0]]));
    }

    #[test]
    fn array_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]));
    }

    #[test]
    fn pattern_entries_are_one() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n3 2 2\n1 2\n3 1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0], [1.0, 0.0]]));
    }

    #[test]
    fn rejected_qualifiers_are_named() {
        for (q, word) in [
            ("coordinate complex general", "complex"),
            ("coordinate real symmetric", "symmetric"),
            ("coordinate real hermitian", "hermitian"),
            ("coordinate real skew-symmetric", "skew-symmetric"),
        ] {
            let text = format!("%%MatrixMarket matrix {q}\n1 1 1\n1 1 1.0\n");
            match parse_matrix_market(&text) {
                Err(Error::UnsupportedFormat(msg)) => assert!(msg.contains(word), "{msg}"),
                other => panic!("{q}: {other:?}"),
            }
        }
    }

    #[test]
    fn malformed_and_out_of_bounds() {
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3.0\n";
        assert!(matches!(
            parse_matrix_market(bad),
            Err(Error::MalformedEntry { line: 3, .. })
        ));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3.0\n";
        assert!(matches!(parse_matrix_market(short), Err(Error::MalformedEntry { .. })));
        let arity = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n";
        assert!(matches!(parse_matrix_market(arity), Err(Error::MalformedEntry { .. })));
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(
            parse_matrix_market(oob),
            Err(Error::IndexOutOfBounds { row: 3, col: 1, .. })
        ));
        let zero = "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n";
        assert!(matches!(parse_matrix_market(zero), Err(Error::IndexOutOfBounds { .. })));
        assert!(matches!(
            parse_matrix_market("%%NotMM matrix"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    fn matrix_strategy() -> impl Strategy<Value = DenseMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6, -1e-6f64..1e-6], r * c)
                .prop_map(move |d| DenseMatrix::from_vec(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn emitted_text_parses_back_exactly(m in matrix_strategy()) {
            for layout in [MtxLayout::Coordinate, MtxLayout::Array] {
                let back = parse_matrix_market(&write_matrix_market(&m, layout)).unwrap();
                prop_assert_eq!(&back, &m);
            }
        }
    }
}
