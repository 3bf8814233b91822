use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(&'static str),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, so every value round-trips.
pub fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &'static str, header: &'static [&'static str]) -> Self {
        Table {
            file,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Num(v) => out.push_str(&format_num(*v)),
                    Cell::Text(v) => out.push_str(v),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JsonFile {
    pub file: &'static str,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    /// Data rows; `None` for JSON files.
    pub rows: Option<usize>,
    pub bytes: u64,
    /// Header-only table.
    pub empty: bool,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<u64, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
    Ok(contents.len() as u64)
}

/// Writes every table and JSON file into `dir`. Returns the file entries and
/// a warning per empty table.
pub fn write_outputs(tables: &[Table], json: &[JsonFile], dir: &Path) -> Result<(Vec<FileEntry>, Vec<String>), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for t in tables {
        let bytes = write(dir, t.file, &t.to_csv())?;
        if t.rows.is_empty() {
            warnings.push(format!("{} has no rows", t.file));
        }
        files.push(FileEntry {
            name: t.file.to_string(),
            rows: Some(t.rows.len()),
            bytes,
            empty: t.rows.is_empty(),
        });
    }
    for j in json {
        let mut text = serde_json::to_string_pretty(&j.value).expect("json values serialize");
        text.push('\n');
        let bytes = write(dir, j.file, &text)?;
        files.push(FileEntry {
            name: j.file.to_string(),
            rows: None,
            bytes,
            empty: false,
        });
    }
    Ok((files, warnings))
}

pub(crate) fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("manifest serializes");
    text.push('\n');
    write(dir, name, &text).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("t.csv", &["scaling", "k", "x"]);
        t.push(vec!["clt".into(), 3usize.into(), 0.1.into()]);
        assert_eq!(t.to_csv(), "scaling,k,x\nclt,3,1.0000000000000001e-1\n");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 7.0, f64::MAX] {
            let s = format_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }
}
