use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `n x p` samples of the observed variables, one column per label.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    values: DMatrix<f64>,
    seed: Option<u64>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, values: DMatrix<f64>, seed: Option<u64>) -> Result<Self> {
        if columns.len() != values.ncols() {
            return Err(Error::Degenerate(format!(
                "{} labels for {} columns",
                columns.len(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite sample value".into()));
        }
        Ok(Self { columns, values, seed })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn column_index(&self, label: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.column(j).into_iter().copied()
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.values.column(j).mean()
    }

    /// CSV with a header row; values carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        let mut row: Vec<String> = Vec::with_capacity(self.n_vars());
        for i in 0..self.n_samples() {
            row.clear();
            row.extend((0..self.n_vars()).map(|j| format!("{:.16e}", self.values[(i, j)])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut flat = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(Error::Parse(format!("row {} has {} fields", rows + 1, rec.len())));
            }
            for field in rec.iter() {
                flat.push(
                    field.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{field}: {e}")))?,
                );
            }
            rows += 1;
        }
        let values = DMatrix::from_row_slice(rows, columns.len(), &flat);
        Self::new(columns, values, None)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
