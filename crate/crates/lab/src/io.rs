//! Curve files and CSV output.

use std::fs::File;
use std::path::Path;

use libor_core::{InitialCurve, TenorStructure};

use crate::error::LabError;

/// Reads a curve file with header `T_k,B(0,T_k)` and one row per tenor date
/// `T_0..=T_N`.
pub fn read_curve(path: &Path, tenor: &TenorStructure) -> Result<InitialCurve, LabError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let mut bonds = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(row as u64 + 2);
        let field = |i: usize| -> Result<f64, LabError> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    LabError::Config(format!(
                        "{}:{line}: column {} is not a number",
                        path.display(),
                        i + 1
                    ))
                })
        };
        let (t, b) = (field(0)?, field(1)?);
        if row > tenor.n() {
            return Err(LabError::Config(format!(
                "{}:{line}: more rows than the {} tenor dates",
                path.display(),
                tenor.n() + 1
            )));
        }
        if (t - tenor.date(row)).abs() > 1e-9 {
            return Err(LabError::Config(format!(
                "{}:{line}: date {t} does not match tenor date {}",
                path.display(),
                tenor.date(row)
            )));
        }
        bonds.push(b);
    }
    if bonds.len() != tenor.n() + 1 {
        return Err(LabError::Config(format!(
            "{}: expected {} rows, found {}",
            path.display(),
            tenor.n() + 1,
            bonds.len()
        )));
    }
    InitialCurve::from_bonds(tenor.clone(), bonds)
        .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

pub fn write_curve(path: &Path, curve: &InitialCurve) -> Result<(), LabError> {
    let mut w = CsvOut::create(path, &["T_k", "B(0,T_k)"])?;
    for (t, b) in curve.tenor().dates().iter().zip(curve.bonds()) {
        w.row(&[fmt(*t), fmt(*b)])?;
    }
    w.finish()
}

/// Shortest round-trip text for a float; empty for `None`.
pub fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub struct CsvOut {
    w: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, LabError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<(), LabError> {
        self.w.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), LabError> {
        self.w.flush()?;
        Ok(())
    }
}
