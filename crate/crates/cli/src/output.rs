//! Result records and their CSV / JSON encodings.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};

pub const COLUMNS: [&str; 12] = [
    "name",
    "n",
    "alpha",
    "beta",
    "kappa",
    "lhs",
    "rhs",
    "slack",
    "tolerance",
    "pass",
    "grid_m",
    "runtime_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// One row of output.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub grid_m: usize,
    pub runtime_ms: u64,
}

/// Full-precision text: 17 significant digits, `inf`, `-inf` or `nan`.
/// Negative zero prints as zero.
pub fn num(x: f64) -> String {
    let x = x + 0.0;
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Finite values as JSON numbers, the rest as strings.
struct JsonNum(f64);

impl Serialize for JsonNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0 + 0.0)
        } else {
            s.serialize_str(&num(self.0))
        }
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(COLUMNS.len()))?;
        m.serialize_entry("name", &self.name)?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("alpha", &JsonNum(self.alpha))?;
        m.serialize_entry("beta", &JsonNum(self.beta))?;
        m.serialize_entry("kappa", &JsonNum(self.kappa))?;
        m.serialize_entry("lhs", &JsonNum(self.lhs))?;
        m.serialize_entry("rhs", &JsonNum(self.rhs))?;
        m.serialize_entry("slack", &JsonNum(self.slack))?;
        m.serialize_entry("tolerance", &JsonNum(self.tolerance))?;
        m.serialize_entry("pass", &self.pass)?;
        m.serialize_entry("grid_m", &self.grid_m)?;
        m.serialize_entry("runtime_ms", &self.runtime_ms)?;
        m.end()
    }
}

impl Record {
    fn csv_row(&self) -> [String; 12] {
        [
            self.name.clone(),
            self.n.to_string(),
            num(self.alpha),
            num(self.beta),
            num(self.kappa),
            num(self.lhs),
            num(self.rhs),
            num(self.slack),
            num(self.tolerance),
            self.pass.to_string(),
            self.grid_m.to_string(),
            self.runtime_ms.to_string(),
        ]
    }
}

pub fn write_records<W: Write>(out: W, records: &[Record], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS)?;
            for r in records {
                w.write_record(r.csv_row())?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)
        }
    }
}

/// A plain table with a header row, numbers at full precision.
pub fn write_table<W: Write>(
    out: W,
    header: &[String],
    rows: &[Vec<f64>],
    format: Format,
) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row.iter().map(|&x| num(x)))?;
            }
            w.flush()
        }
        Format::Json => {
            let objects: Vec<Row> = rows.iter().map(|r| Row(header, r)).collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &objects)?;
            writeln!(out)
        }
    }
}

struct Row<'a>(&'a [String], &'a [f64]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, &v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, &JsonNum(v))?;
        }
        m.end()
    }
}
