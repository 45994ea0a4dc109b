//! Tabular output and checksums.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that every
//! `f64` round-trips through the text form.

use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bounds::SweepRow;
use crate::ft::CostReport;
use crate::noise::StddevHeatmap;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, OutputError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| OutputError::Csv(csv::Error::from(e.into_error())))
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        let bytes = self.to_csv_bytes()?;
        fs::write(path, bytes).map_err(|source| OutputError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// `j,re,im,abs`.
pub fn spectrum_table(values: &[Complex64]) -> Table {
    let mut t = Table::new(&["j", "re", "im", "abs"]);
    for (j, v) in values.iter().enumerate() {
        t.push(vec![j.to_string(), fmt_float(v.re), fmt_float(v.im), fmt_float(v.norm())]);
    }
    t
}

/// `k,re_g,im_g`.
pub fn signal_table(values: &[Complex64]) -> Table {
    let mut t = Table::new(&["k", "re_g", "im_g"]);
    for (k, v) in values.iter().enumerate() {
        t.push(vec![k.to_string(), fmt_float(v.re), fmt_float(v.im)]);
    }
    t
}

/// `r,depth,N,sigma`.
pub fn heatmap_table(map: &StddevHeatmap) -> Table {
    let mut t = Table::new(&["r", "depth", "N", "sigma"]);
    for (r, depth, sigma) in map.cells() {
        t.push(vec![fmt_float(r), depth.to_string(), map.n.to_string(), fmt_float(sigma)]);
    }
    t
}

/// `lambda,epsilon,J,K,M,runtime_cu,validity`.
pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["lambda", "epsilon", "J", "K", "M", "runtime_cu", "validity"]);
    for r in rows {
        t.push(vec![
            fmt_float(r.lambda),
            fmt_float(r.epsilon),
            r.grid.to_string(),
            r.max_depth.to_string(),
            fmt_opt(r.m),
            fmt_opt(r.runtime_cu),
            r.validity.clone(),
        ]);
    }
    t
}

/// `algorithm,d,physical_qubits,cu_calls,qec_cycles,feasible`; cost cells
/// are empty when the bound could not be evaluated.
pub fn comparison_table(rows: &[CostReport]) -> Table {
    let mut t = Table::new(&["algorithm", "d", "physical_qubits", "cu_calls", "qec_cycles", "feasible"]);
    for r in rows {
        t.push(vec![
            r.algorithm.as_str().into(),
            r.d.to_string(),
            r.physical_qubits.to_string(),
            fmt_opt(r.cu_calls),
            fmt_opt(r.qec_cycles),
            r.feasible.to_string(),
        ]);
    }
    t
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, OutputError> {
    let bytes = fs::read(path).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_writes_header_and_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1,x\n");
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn signal_first_row() {
        let t = signal_table(&[Complex64::new(1.0, 0.0)]);
        assert_eq!(t.rows[0][0], "0");
        assert_eq!(t.rows[0][1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(t.rows[0][2].parse::<f64>().unwrap(), 0.0);
    }
}
