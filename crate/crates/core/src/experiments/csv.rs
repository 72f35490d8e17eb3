//! Numeric tables with a `#`-prefixed comment block above the header row.

use std::path::Path;

use crate::error::{Error, Result};

/// First comment line of every file; excluded from body comparisons.
pub fn version_line() -> String {
    format!("floquet {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::contract(format!(
                "row has {} cells but the table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn nan_cells(&self) -> usize {
        self.rows.iter().flatten().filter(|v| v.is_nan()).count()
    }
}

/// Serialized table plus the number of NaN cells written as empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvText {
    pub text: String,
    pub nan_cells: usize,
}

/// `Debug` formatting of `f64` is the shortest string that parses back to
/// the same value.
fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

pub fn to_csv_string(table: &Table, comments: &[String]) -> Result<CsvText> {
    let mut text = format!("# {}\n", version_line());
    for c in comments {
        for line in c.lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(Error::contract("table is not rectangular"));
        }
        w.write_record(row.iter().map(|v| cell(*v))).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    text.push_str(std::str::from_utf8(&body).expect("numbers and column names are UTF-8"));
    Ok(CsvText { text, nan_cells: table.nan_cells() })
}

pub fn export_csv(table: &Table, comments: &[String], path: &Path) -> Result<CsvText> {
    let out = to_csv_string(table, comments)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, &out.text)?;
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("malformed CSV: {other:?}")),
    }
}

/// Comment lines (without the `# ` prefix) and the table. Empty cells read as NaN.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Table)> {
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').strip_prefix(' ').unwrap_or(l.trim_start_matches('#')).to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let mut table = Table::new(columns);
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(f64::NAN)
                } else {
                    c.parse::<f64>().map_err(|_| Error::Config(format!("data row {}: `{c}` is not a number", i + 1)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        table.push(row).map_err(|_| Error::Config(format!("data row {} has the wrong number of cells", i + 1)))?;
    }
    Ok((comments, table))
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Table)> {
    parse_csv(&std::fs::read_to_string(path)?)
}

/// The file without its version line, for byte-level reproducibility checks.
pub fn csv_body(text: &str) -> String {
    let version = format!("# {}", version_line());
    text.lines().filter(|l| *l != version).flat_map(|l| [l, "\n"]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![1.0, 2.5]).unwrap();
        t.push(vec![-3.0, 1e-7]).unwrap();
        let out = to_csv_string(&t, &["note".into()]).unwrap();
        let lines: Vec<&str> = out.text.lines().collect();
        assert_eq!(lines[1], "# note");
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1.0,2.5");
        assert_eq!(lines[4], "-3.0,1e-7");
        assert!(out.text.ends_with('\n'));
        let (_, back) = parse_csv(&out.text).unwrap();
        assert_eq!(back.rows.iter().flatten().count(), 4);
        assert_eq!(back, t);
    }

    #[test]
    fn nan_is_an_empty_flagged_cell() {
        let mut t = Table::new(["x", "y"]);
        t.push(vec![1.0, f64::NAN]).unwrap();
        let out = to_csv_string(&t, &[]).unwrap();
        assert_eq!(out.nan_cells, 1);
        assert!(out.text.ends_with("1.0,\n"));
        let (_, back) = parse_csv(&out.text).unwrap();
        assert!(back.rows[0][1].is_nan());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(["x"]);
        assert!(t.push(vec![1.0, 2.0]).is_err());
        assert!(parse_csv("x,y\n1,2\n3\n").is_err());
        assert!(parse_csv("x\nabc\n").is_err());
    }

    #[test]
    fn body_drops_only_the_version() {
        let t = Table::new(["x"]);
        let out = to_csv_string(&t, &["k = 1".into()]).unwrap();
        assert_eq!(csv_body(&out.text), "# k = 1\nx\n");
    }

    #[test]
    fn write_and_read_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        let mut t = Table::new(["t_us", "fidelity"]);
        t.push(vec![0.1, 0.2]).unwrap();
        export_csv(&t, &[], &path).unwrap();
        assert_eq!(read_csv(&path).unwrap().1, t);
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
            let mut t = Table::new(["v"]);
            for x in &v {
                t.push(vec![*x]).unwrap();
            }
            let (_, back) = parse_csv(&to_csv_string(&t, &[]).unwrap().text).unwrap();
            prop_assert_eq!(back.column("v").unwrap(), v);
        }
    }
}
