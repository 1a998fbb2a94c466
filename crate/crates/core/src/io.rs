//! Matrix Market and CSV reading/writing, plus deterministic test-matrix
//! generators.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::solver::SweepRecord;
use crate::spectral::PointCloud;

pub const HISTORY_HEADER: [&str; 6] = ["sweep", "off_row_m", "off_total", "a_mm", "alpha", "err_vs_ref"];

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub sweep: usize,
    pub off_row_m: f64,
    pub off_total: f64,
    pub a_mm: f64,
    pub alpha: Option<f64>,
    pub err_vs_ref: Option<f64>,
}

impl HistoryRow {
    /// `err_vs_ref = |a_mm − λ|` when a reference eigenvalue is given.
    pub fn from_record(r: &SweepRecord, reference: Option<f64>) -> Self {
        Self {
            sweep: r.sweep,
            off_row_m: r.off_row_m,
            off_total: r.off_total,
            a_mm: r.a_mm,
            alpha: r.alpha,
            err_vs_ref: reference.map(|l| (r.a_mm - l).abs()),
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Pattern,
}

fn parse_header(path: &Path, line: &str) -> Result<(Layout, Field, bool)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(path, 1, format!("unknown format '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        "complex" | "pattern" => return Err(Error::UnsupportedField(words[3].clone())),
        other => return Err(parse_err(path, 1, format!("unknown field '{other}'"))),
    };
    let symmetric = match words[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };
    Ok((layout, field, symmetric))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse '{tok}'")))
}

/// Reads a square Matrix Market file into a dense symmetric matrix.
///
/// `general` files must be symmetric within `4·ε·max|a_ij|`; pattern
/// entries become `1.0`; duplicate coordinate entries are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SymMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(parse_err(path, 1, "empty file")),
    };
    let (layout, field, symmetric) = parse_header(path, &header)?;

    let mut data_lines = lines.filter_map(|(no, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((no, other)),
    });

    let (size_no, size_line) = match data_lines.next() {
        Some((no, l)) => (no, l?),
        None => return Err(parse_err(path, 2, "missing size line")),
    };
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    let expected = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(path, size_no, format!("expected {expected} size fields")));
    }
    let rows: usize = parse_num(path, size_no, dims[0])?;
    let cols: usize = parse_num(path, size_no, dims[1])?;
    if rows != cols {
        return Err(parse_err(path, size_no, format!("matrix is {rows}x{cols}, not square")));
    }
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = rows;
    let mut data = vec![0.0; n * n];
    let mut last_no = size_no;

    match layout {
        Layout::Coordinate => {
            let nnz: usize = parse_num(path, size_no, dims[2])?;
            for _ in 0..nnz {
                let (no, line) = match data_lines.next() {
                    Some((no, l)) => (no, l?),
                    None => return Err(parse_err(path, last_no + 1, format!("expected {nnz} entries"))),
                };
                last_no = no;
                let tok: Vec<&str> = line.split_whitespace().collect();
                let want = if field == Field::Pattern { 2 } else { 3 };
                if tok.len() != want {
                    return Err(parse_err(path, no, format!("expected {want} fields")));
                }
                let i: usize = parse_num(path, no, tok[0])?;
                let j: usize = parse_num(path, no, tok[1])?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(path, no, format!("index ({i}, {j}) outside 1..={n}")));
                }
                let v = if field == Field::Pattern {
                    1.0
                } else {
                    parse_num(path, no, tok[2])?
                };
                let (i, j) = (i - 1, j - 1);
                data[i * n + j] += v;
                if symmetric && i != j {
                    data[j * n + i] += v;
                }
            }
        }
        Layout::Array => {
            // column-major; symmetric files hold the lower triangle only
            let mut cells = Vec::new();
            for j in 0..n {
                let start = if symmetric { j } else { 0 };
                cells.extend((start..n).map(|i| (i, j)));
            }
            for (i, j) in cells {
                let (no, line) = match data_lines.next() {
                    Some((no, l)) => (no, l?),
                    None => return Err(parse_err(path, last_no + 1, "too few array entries")),
                };
                last_no = no;
                let tok = line.trim();
                let v: f64 = parse_num(path, no, tok)?;
                data[i * n + j] = v;
                if symmetric {
                    data[j * n + i] = v;
                }
            }
        }
    }
    if let Some((no, _)) = data_lines.next() {
        return Err(parse_err(path, no, "unexpected trailing data"));
    }
    if let Some(k) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: k / n, col: k % n });
    }
    if !symmetric {
        let max = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 4.0 * f64::EPSILON * max;
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > tol {
                    return Err(Error::NotSymmetric);
                }
            }
        }
    }
    SymMatrix::from_row_major(n, data)
}

/// Writes the lower triangle in coordinate format with shortest round-trip
/// reals; zero entries are omitted.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SymMatrix) -> Result<()> {
    let n = a.n();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in j..n {
            let v = a.get(i, j);
            if v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
    }
    w.flush()?;
    Ok(())
}

/// `;` when the first line uses it and has no commas, else `,`.
fn sniff_delimiter(path: &Path) -> Result<u8> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(if first.contains(';') && !first.contains(',') { b';' } else { b',' })
}

fn read_numeric_rows(path: &Path) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(path)?)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    let mut first_line = 1;
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push((line, v)),
            Err(_) if k == 0 => first_line = 2,
            Err(_) => {
                let bad = rec.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or("");
                return Err(parse_err(path, line, format!("non-numeric cell '{bad}'")));
            }
        }
    }
    let width = rows.first().map_or(0, |(_, r)| r.len());
    for (line, r) in &rows {
        if r.len() != width {
            return Err(parse_err(path, *line, format!("expected {width} columns, found {}", r.len())));
        }
    }
    Ok((rows.into_iter().map(|(_, r)| r).collect(), first_line))
}

/// Reads a point cloud from CSV (`,` or `;` separated). A first row
/// containing any non-numeric cell is treated as a header.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let (rows, first) = read_numeric_rows(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, first, "no data rows"));
    }
    PointCloud::from_rows(&rows)
}

/// Reads a dense square matrix from a headerless CSV grid.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<SymMatrix> {
    let path = path.as_ref();
    let (rows, first) = read_numeric_rows(path)?;
    if first != 1 {
        return Err(parse_err(path, 1, "matrix CSV must not have a header"));
    }
    if rows.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = rows.len();
    if rows[0].len() != n {
        return Err(parse_err(path, 1, format!("{n} rows but {} columns", rows[0].len())));
    }
    SymMatrix::from_row_major(n, rows.concat()).map_err(|e| match e {
        Error::AsymmetricInput { .. } => Error::NotSymmetric,
        e => e,
    })
}

/// Matrix Market, or a dense CSV grid when the extension is `.csv`.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<SymMatrix> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_matrix_csv(path)
    } else {
        read_matrix_market(path)
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_history_csv(path: impl AsRef<Path>, rows: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HISTORY_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep.to_string(),
            r.off_row_m.to_string(),
            r.off_total.to_string(),
            r.a_mm.to_string(),
            fmt_opt(r.alpha),
            fmt_opt(r.err_vs_ref),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<HistoryRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(HISTORY_HEADER) {
        return Err(parse_err(path, 1, "unexpected history header"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != HISTORY_HEADER.len() {
            return Err(parse_err(path, line, "wrong number of fields"));
        }
        let opt = |k: usize| -> Result<Option<f64>> {
            match &rec[k] {
                "" => Ok(None),
                s => parse_num(path, line, s).map(Some),
            }
        };
        rows.push(HistoryRow {
            sweep: parse_num(path, line, &rec[0])?,
            off_row_m: parse_num(path, line, &rec[1])?,
            off_total: parse_num(path, line, &rec[2])?,
            a_mm: parse_num(path, line, &rec[3])?,
            alpha: opt(4)?,
            err_vs_ref: opt(5)?,
        });
    }
    Ok(rows)
}

/// The 11×11 example: `a_ii = i`, off-diagonal `1/100` in row and column 6
/// and `1/121` elsewhere (1-based indices).
pub fn gen_example1() -> SymMatrix {
    SymMatrix::from_lower_fn(11, |i, j| {
        if i == j {
            (i + 1) as f64
        } else if i == 5 || j == 5 {
            1.0 / 100.0
        } else {
            1.0 / 121.0
        }
    })
}

/// `diag(1 + x_i) + σ·u·uᵀ` with `x_i = i/(n+1)`, `u_i = sin(√2·π·x_i)`,
/// `σ = 1/n`.
pub fn gen_diag_rank1(n: usize) -> Result<SymMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("order {n} < 2")));
    }
    let h = 1.0 / (n + 1) as f64;
    let sigma = 1.0 / n as f64;
    let x: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let u: Vec<f64> = x
        .iter()
        .map(|&xi| (std::f64::consts::SQRT_2 * std::f64::consts::PI * xi).sin())
        .collect();
    Ok(SymMatrix::from_lower_fn(n, |i, j| {
        let d = if i == j { 1.0 + x[i] } else { 0.0 };
        d + sigma * u[i] * u[j]
    }))
}

/// Diagonal `1, …, n` plus a uniform(−1, 1) symmetric off-diagonal part
/// rescaled so that `α = off(H)` equals `alpha_target`.
pub fn gen_random_dd(n: usize, alpha_target: f64, seed: u64) -> Result<SymMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("order {n} < 2")));
    }
    if !(alpha_target > 0.0 && alpha_target < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha_target = {alpha_target} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = SymMatrix::from_lower_fn(n, |i, j| if i == j { (i + 1) as f64 } else { rng.gen_range(-1.0..1.0) });
    let scale = alpha_target / raw.scaled()?.off_norm();
    Ok(SymMatrix::from_lower_fn(n, |i, j| {
        if i == j {
            raw.get(i, i)
        } else {
            raw.get(i, j) * scale
        }
    }))
}
