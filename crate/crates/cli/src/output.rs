//! Byte-stable JSON and CSV rendering plus atomic file writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// C-style `%.17g`: shortest of fixed and exponent notation with 17
/// significant digits, trailing zeros removed.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON with sorted keys, two-space indentation and `%.17g` floats.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value)
        .map_err(|e| CliError::Internal(format!("serialization: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_g17(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short numeric arrays (complex pairs) stay on one line.
            if items.len() <= 2 && items.iter().all(Value::is_number) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push_str("{\n");
            for (i, (k, item)) in sorted.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key escapes"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                if i + 1 < sorted.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_g17(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Internal(format!("csv: {e}")))
    }
}

/// Gnuplot script plotting every column of `csv_name` against the first.
pub fn plot_script(csv_name: &str, header: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(
        s,
        "set xlabel '{}'",
        header.first().map(String::as_str).unwrap_or("x")
    );
    let plots: Vec<String> = (2..=header.len())
        .map(|c| format!("'{csv_name}' using 1:{c} with linespoints"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Files produced by a command, written together once computation is done.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.files
            .insert(name.to_string(), canonical_json(value)?.into_bytes());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table, plot: bool) -> Result<(), CliError> {
        self.files.insert(name.to_string(), table.to_csv()?);
        if plot {
            let script = name.trim_end_matches(".csv").to_string() + ".gp";
            self.files
                .insert(script, plot_script(name, &table.header).into_bytes());
        }
        Ok(())
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .map(|(k, v)| (k.clone(), sha256_hex(v)))
            .collect()
    }

    /// Writes every file under `dir`, each through a temporary file and rename.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            atomic_write(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes a serializable report as canonical JSON.
pub fn emit_report<T: Serialize>(report: &T, path: &Path) -> Result<(), CliError> {
    atomic_write(path, canonical_json(report)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e20, "1.5e+20"),
            (123456.0, "123456"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
            (0.0001, "0.0001"),
            (1.0 / 3.0, "0.33333333333333331"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [std::f64::consts::PI, 1.2251482265544137, -7.3e-300, 6.02e23] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_keys_sorted_and_stable() {
        let v = serde_json::json!({"b": 1.5, "a": [1.25, 2.5], "c": {"z": null, "y": "t"}});
        let a = canonical_json(&v).unwrap();
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
        assert!(a.find("\"y\"").unwrap() < a.find("\"z\"").unwrap());
        assert_eq!(a, canonical_json(&v).unwrap());
        let back: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn csv_has_header_and_plain_numbers() {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![0.5.into(), "a,b".into()]);
        t.push(vec![Cell::Empty, 3usize.into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "x,label\n0.5,\"a,b\"\n,3\n");
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        emit_report(&serde_json::json!({"k": 1}), &path).unwrap();
        emit_report(&serde_json::json!({"k": 2}), &path).unwrap();
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
        assert!(std::fs::read_to_string(&path).unwrap().contains('2'));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_report(&1, Path::new("/nonexistent-dir/sub/report.json")).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn plot_script_references_columns() {
        let s = plot_script("a.csv", &["t".into(), "d".into(), "m".into()]);
        assert!(s.contains("using 1:2") && s.contains("using 1:3"));
    }
}
