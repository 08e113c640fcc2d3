//! Text formats for check matrices and codes.
//!
//! * alist: MacKay's layout (`n m`, max degrees, column degrees, row degrees,
//!   then 1-indexed column and row adjacency lists, zero-padded).
//! * css: `css <n> <m_x> <m_z>` header followed by one line per row of `H_X`
//!   and then `H_Z`, each a list of 0-based column indices (`-` for an empty
//!   row). Lines starting with `#` are comments.
//! * lifted: `lifted <L>` followed by two `base <rows> <cols>` blocks whose
//!   entries are `-` (zero block) or comma-separated shift exponents.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::code::{hgp, lifted_product, CodeError, CssCode, LiftedBase};
use crate::gf2::BitMatrix;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Code(#[from] CodeError),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines paired with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers(line: usize, s: &str) -> Result<Vec<usize>, FormatError> {
    s.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(line, format!("expected an integer, found {t:?}"))))
        .collect()
}

struct Lines<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    last: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Lines<'a, I> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(parse_err(self.last + 1, format!("unexpected end of input, expected {what}"))),
        }
    }
}

pub fn parse_alist(text: &str) -> Result<BitMatrix, FormatError> {
    let mut lines = Lines {
        inner: content_lines(text),
        last: 0,
    };
    let (ln, l) = lines.next("dimensions")?;
    let dims = numbers(ln, l)?;
    let [n, m] = dims[..] else {
        return Err(parse_err(ln, "expected `n m`"));
    };
    let (ln, l) = lines.next("maximum degrees")?;
    let maxes = numbers(ln, l)?;
    let [max_col, max_row] = maxes[..] else {
        return Err(parse_err(ln, "expected two maximum degrees"));
    };
    let (ln, l) = lines.next("column degrees")?;
    let col_deg = numbers(ln, l)?;
    if col_deg.len() != n {
        return Err(parse_err(ln, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    let (ln, l) = lines.next("row degrees")?;
    let row_deg = numbers(ln, l)?;
    if row_deg.len() != m {
        return Err(parse_err(ln, format!("expected {m} row degrees, found {}", row_deg.len())));
    }
    if col_deg.iter().copied().max().unwrap_or(0) > max_col || row_deg.iter().copied().max().unwrap_or(0) > max_row {
        return Err(parse_err(ln, "degree exceeds declared maximum"));
    }
    let mut h = BitMatrix::zeros(m, n);
    for (c, &deg) in col_deg.iter().enumerate() {
        let (ln, l) = lines.next("column adjacency list")?;
        let entries: Vec<usize> = numbers(ln, l)?.into_iter().filter(|&x| x != 0).collect();
        if entries.len() != deg {
            return Err(parse_err(
                ln,
                format!("column {} lists {} rows but its degree is {deg}", c + 1, entries.len()),
            ));
        }
        for r in entries {
            if r > m {
                return Err(parse_err(ln, format!("row index {r} out of range")));
            }
            if h.get(r - 1, c) {
                return Err(parse_err(ln, format!("row index {r} repeated")));
            }
            h.set(r - 1, c, true);
        }
    }
    for (r, &deg) in row_deg.iter().enumerate() {
        let (ln, l) = lines.next("row adjacency list")?;
        let entries: Vec<usize> = numbers(ln, l)?.into_iter().filter(|&x| x != 0).collect();
        if entries.len() != deg {
            return Err(parse_err(
                ln,
                format!("row {} lists {} columns but its degree is {deg}", r + 1, entries.len()),
            ));
        }
        let mut listed: Vec<usize> = entries.iter().map(|&c| c.wrapping_sub(1)).collect();
        listed.sort_unstable();
        if listed != h.row_support(r) {
            return Err(parse_err(ln, format!("row {} disagrees with the column lists", r + 1)));
        }
    }
    Ok(h)
}

pub fn write_alist(h: &BitMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let cols: Vec<Vec<usize>> = (0..n).map(|c| h.column(c).ones().collect()).collect();
    let rows: Vec<Vec<usize>> = (0..m).map(|r| h.row_support(r)).collect();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let padded = |v: &[usize], width: usize| {
        let mut out: Vec<usize> = v.iter().map(|x| x + 1).collect();
        out.resize(width, 0);
        join(&out)
    };
    let mut s = String::new();
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_col} {max_row}").unwrap();
    writeln!(s, "{}", join(&cols.iter().map(Vec::len).collect::<Vec<_>>())).unwrap();
    writeln!(s, "{}", join(&rows.iter().map(Vec::len).collect::<Vec<_>>())).unwrap();
    for c in &cols {
        writeln!(s, "{}", padded(c, max_col)).unwrap();
    }
    for r in &rows {
        writeln!(s, "{}", padded(r, max_row)).unwrap();
    }
    s
}

pub fn parse_css(name: &str, text: &str) -> Result<CssCode, FormatError> {
    let mut lines = Lines {
        inner: content_lines(text),
        last: 0,
    };
    let (ln, header) = lines.next("css header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("css") {
        return Err(parse_err(ln, "expected `css <n> <m_x> <m_z>`"));
    }
    let dims = numbers(ln, &parts.collect::<Vec<_>>().join(" "))?;
    let [n, m_x, m_z] = dims[..] else {
        return Err(parse_err(ln, "expected `css <n> <m_x> <m_z>`"));
    };
    let mut read_matrix = |rows: usize, label: &str| -> Result<BitMatrix, FormatError> {
        let mut m = BitMatrix::zeros(rows, n);
        for r in 0..rows {
            let (ln, l) = lines.next(&format!("{label} row {r}"))?;
            if l == "-" {
                continue;
            }
            for c in numbers(ln, l)? {
                if c >= n {
                    return Err(parse_err(ln, format!("column {c} out of range for n = {n}")));
                }
                m.set(r, c, !m.get(r, c));
            }
        }
        Ok(m)
    };
    let h_x = read_matrix(m_x, "H_X")?;
    let h_z = read_matrix(m_z, "H_Z")?;
    if let Some((ln, _)) = lines.inner.next() {
        return Err(parse_err(ln, "trailing content after H_Z"));
    }
    Ok(CssCode::new(name, h_x, h_z)?)
}

pub fn write_css(code: &CssCode) -> String {
    let mut s = String::new();
    writeln!(s, "# {} [[{}, {}]]", code.name(), code.n(), code.k()).unwrap();
    writeln!(s, "css {} {} {}", code.n(), code.h_x().rows(), code.h_z().rows()).unwrap();
    for h in [code.h_x(), code.h_z()] {
        for r in 0..h.rows() {
            let support = h.row_support(r);
            if support.is_empty() {
                writeln!(s, "-").unwrap();
            } else {
                writeln!(s, "{}", support.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
            }
        }
    }
    s
}

/// Parses a `lifted` file into its two ring matrices.
pub fn parse_lifted(text: &str) -> Result<(LiftedBase, LiftedBase), FormatError> {
    let mut lines = Lines {
        inner: content_lines(text),
        last: 0,
    };
    let (ln, header) = lines.next("lifted header")?;
    let lift = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["lifted", l] => l.parse::<usize>().map_err(|_| parse_err(ln, "bad lift size"))?,
        _ => return Err(parse_err(ln, "expected `lifted <L>`")),
    };
    if lift == 0 {
        return Err(parse_err(ln, "lift size must be positive"));
    }
    let mut read_base = || -> Result<LiftedBase, FormatError> {
        let (ln, header) = lines.next("base header")?;
        let (rows, cols) = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["base", r, c] => (
                r.parse::<usize>().map_err(|_| parse_err(ln, "bad row count"))?,
                c.parse::<usize>().map_err(|_| parse_err(ln, "bad column count"))?,
            ),
            _ => return Err(parse_err(ln, "expected `base <rows> <cols>`")),
        };
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, l) = lines.next("base row")?;
            let cells: Vec<&str> = l.split_whitespace().collect();
            if cells.len() != cols {
                return Err(parse_err(ln, format!("expected {cols} entries, found {}", cells.len())));
            }
            for cell in cells {
                if cell == "-" {
                    entries.push(Vec::new());
                    continue;
                }
                let exps = cell
                    .split(',')
                    .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("bad exponent {t:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(&e) = exps.iter().find(|&&e| e >= lift) {
                    return Err(parse_err(ln, format!("exponent {e} out of range for lift {lift}")));
                }
                entries.push(exps);
            }
        }
        Ok(LiftedBase::new(rows, cols, lift, entries)?)
    };
    let a = read_base()?;
    let b = read_base()?;
    Ok((a, b))
}

pub fn write_lifted(a: &LiftedBase, b: &LiftedBase) -> String {
    let mut s = String::new();
    writeln!(s, "lifted {}", a.lift()).unwrap();
    for base in [a, b] {
        writeln!(s, "base {} {}", base.rows(), base.cols()).unwrap();
        for r in 0..base.rows() {
            let cells: Vec<String> = (0..base.cols())
                .map(|c| {
                    let e = base.entry(r, c);
                    if e.is_empty() {
                        "-".to_string()
                    } else {
                        e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                    }
                })
                .collect();
            writeln!(s, "{}", cells.join(" ")).unwrap();
        }
    }
    s
}

/// Supported on-disk code descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFormat {
    /// An explicit `(H_X, H_Z)` pair.
    Css,
    /// A classical seed, expanded with the hypergraph product of itself.
    AlistHgp,
    /// Two ring matrices, expanded with the lifted product.
    Lifted,
}

impl CodeFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "css" => Some(CodeFormat::Css),
            "alist" => Some(CodeFormat::AlistHgp),
            "lifted" | "lp" => Some(CodeFormat::Lifted),
            _ => None,
        }
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_classical(path: &Path) -> Result<BitMatrix, FormatError> {
    parse_alist(&read(path)?)
}

pub fn load_code(path: &Path, format: CodeFormat) -> Result<CssCode, FormatError> {
    let text = read(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("code").to_string();
    match format {
        CodeFormat::Css => parse_css(&name, &text),
        CodeFormat::AlistHgp => {
            let h = parse_alist(&text)?;
            Ok(hgp(&h, &h)?.with_name(name))
        }
        CodeFormat::Lifted => {
            let (a, b) = parse_lifted(&text)?;
            Ok(lifted_product(&a, &b)?.with_name(name))
        }
    }
}

pub fn save_code(path: &Path, code: &CssCode) -> Result<(), FormatError> {
    fs::write(path, write_css(code)).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAMMING_ALIST: &str = "7 3\n3 4\n1 1 1 2 2 2 3\n4 4 4\n1 0 0\n2 0 0\n3 0 0\n1 2 0\n2 3 0\n1 3 0\n1 2 3\n1 4 6 7\n2 4 5 7\n3 5 6 7\n";

    #[test]
    fn reads_hamming_alist() {
        let h = parse_alist(HAMMING_ALIST).unwrap();
        assert_eq!((h.rows(), h.cols()), (3, 7));
        assert!((0..3).all(|r| h.row_weight(r) == 4));
        assert_eq!(parse_alist(&write_alist(&h)).unwrap(), h);
    }

    #[test]
    fn degree_mismatch_is_a_parse_error() {
        let bad = HAMMING_ALIST.replacen("1 1 1 2 2 2 3", "1 1 1 2 2 2 2", 1);
        match parse_alist(&bad) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("expected parse error, got {other:?}"),
        }
        let inconsistent = HAMMING_ALIST.replacen("1 4 6 7", "1 4 5 7", 1);
        assert!(matches!(parse_alist(&inconsistent), Err(FormatError::Parse { line: 12, .. })));
        assert!(matches!(parse_alist("7 3\n3 4\n"), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn css_round_trip_and_errors() {
        let h = parse_alist(HAMMING_ALIST).unwrap();
        let code = CssCode::new("steane", h.clone(), h).unwrap();
        let text = write_css(&code);
        let back = parse_css("steane", &text).unwrap();
        assert_eq!(back, code);
        assert!(matches!(parse_css("x", "css 2 1 1\n0\n0\n"), Err(FormatError::Code(_))));
        assert!(matches!(parse_css("x", "css 2 1 1\n0 5\n0\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(parse_css("x", "css 2 1 1\n-\n-\n").is_ok());
    }

    #[test]
    fn lifted_round_trip() {
        let text = "# toy\nlifted 5\nbase 1 2\n0,1 -\nbase 1 1\n3\n";
        let (a, b) = parse_lifted(text).unwrap();
        assert_eq!(a.entry(0, 0), &[0, 1]);
        assert!(a.entry(0, 1).is_empty());
        let (a2, b2) = parse_lifted(&write_lifted(&a, &b)).unwrap();
        assert_eq!((a, b), (a2, b2));
        assert!(parse_lifted("lifted 5\nbase 1 1\n7\nbase 1 1\n0\n").is_err());
    }

    #[test]
    fn load_and_save_files() {
        let dir = tempfile::tempdir().unwrap();
        let h = parse_alist(HAMMING_ALIST).unwrap();
        let code = CssCode::new("steane", h.clone(), h).unwrap();
        let path = dir.path().join("steane.css");
        save_code(&path, &code).unwrap();
        assert_eq!(load_code(&path, CodeFormat::Css).unwrap(), code);
        let missing = dir.path().join("missing.css");
        assert!(matches!(load_code(&missing, CodeFormat::Css), Err(FormatError::Io { .. })));
        assert_eq!(CodeFormat::from_path(&path), Some(CodeFormat::Css));
    }
}
