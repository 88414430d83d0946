//! Photon-flux datasets on a `(φ, θ)` grid and their CSV form.
//!
//! Schema: `phi_deg,theta_deg,c_plus,c_minus,directionality`, one row per node,
//! floats in shortest round-trip scientific notation. On input the
//! `directionality` column is optional and columns may appear in any order.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: [&str; 5] = ["phi_deg", "theta_deg", "c_plus", "c_minus", "directionality"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxRow {
    pub phi_deg: f64,
    pub theta_deg: f64,
    /// Counts/s at the `+z` detector.
    pub c_plus: f64,
    /// Counts/s at the `-z` detector.
    pub c_minus: f64,
    /// `None` when both fluxes vanish.
    pub directionality: Option<f64>,
}

impl FluxRow {
    /// Row with directionality computed from the fluxes.
    pub fn new(phi_deg: f64, theta_deg: f64, c_plus: f64, c_minus: f64) -> Self {
        let sum = c_plus + c_minus;
        let directionality = (sum > 0.0).then(|| (c_plus - c_minus) / sum);
        Self { phi_deg, theta_deg, c_plus, c_minus, directionality }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FluxDataset {
    rows: Vec<FluxRow>,
}

impl FluxDataset {
    /// Validates non-negative finite counts and unique grid nodes.
    pub fn new(rows: Vec<FluxRow>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let line = i + 1;
            for (name, v) in [("c_plus", row.c_plus), ("c_minus", row.c_minus)] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::MalformedRow {
                        row: line,
                        message: format!("{name} must be a finite non-negative count rate, got {v}"),
                    });
                }
            }
            if !row.phi_deg.is_finite() || !row.theta_deg.is_finite() {
                return Err(Error::MalformedRow { row: line, message: "non-finite grid angle".into() });
            }
            if !seen.insert((row.phi_deg.to_bits(), row.theta_deg.to_bits())) {
                return Err(Error::MalformedRow {
                    row: line,
                    message: format!("duplicate node (phi {}, theta {})", row.phi_deg, row.theta_deg),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[FluxRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct azimuths, ascending.
    pub fn azimuths(&self) -> Vec<f64> {
        distinct(self.rows.iter().map(|r| r.phi_deg))
    }

    /// Distinct wave-plate angles, ascending.
    pub fn plate_angles(&self) -> Vec<f64> {
        distinct(self.rows.iter().map(|r| r.theta_deg))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER).map_err(csv_error)?;
        for r in &self.rows {
            let d = r.directionality.map(|d| format!("{d:e}")).unwrap_or_default();
            w.write_record([
                format!("{:e}", r.phi_deg),
                format!("{:e}", r.theta_deg),
                format!("{:e}", r.c_plus),
                format!("{:e}", r.c_minus),
                d,
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    /// Parse a CSV; row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(csv_error)?.clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let mut idx = [0usize; 4];
        for (slot, name) in idx.iter_mut().zip(&HEADER[..4]) {
            *slot = column(name).ok_or_else(|| Error::MissingColumn((*name).to_string()))?;
        }
        let d_idx = column(HEADER[4]);

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::MalformedRow { row, message: e.to_string() })?;
            let field = |k: usize, name: &str| -> Result<f64> {
                let text = record.get(k).ok_or_else(|| Error::MalformedRow {
                    row,
                    message: format!("missing value for {name}"),
                })?;
                text.parse::<f64>().map_err(|_| Error::MalformedRow {
                    row,
                    message: format!("cannot parse {name} value {text:?}"),
                })
            };
            let mut parsed = FluxRow::new(
                field(idx[0], HEADER[0])?,
                field(idx[1], HEADER[1])?,
                field(idx[2], HEADER[2])?,
                field(idx[3], HEADER[3])?,
            );
            if let Some(k) = d_idx {
                if record.get(k).is_some_and(|t| !t.is_empty()) {
                    parsed.directionality = Some(field(k, HEADER[4])?);
                }
            }
            rows.push(parsed);
        }
        Self::new(rows)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) if pos.record() > 0 => Error::MalformedRow {
            row: pos.record() as usize,
            message: e.to_string(),
        },
        _ => Error::Io(e.to_string()),
    }
}
