//! Canonical SCM documents: a graph document plus the form, a dense
//! row-major weight matrix (`weights[j][i]` is the coefficient of `i` in the
//! equation of `j`) and one noise spec per node.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Form, NoiseSpec, Scm};
use crate::error::{Error, Result};
use crate::graph::io::GraphFile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScmFile {
    #[serde(flatten)]
    pub graph: GraphFile,
    pub form: Form,
    pub weights: Vec<Vec<f64>>,
    pub noise: Vec<NoiseSpec>,
}

impl ScmFile {
    pub fn from_scm(scm: &Scm) -> Self {
        let w = scm.weights();
        Self {
            graph: GraphFile::from_graph(scm.graph(), scm.treatment(), scm.outcome()),
            form: scm.form(),
            weights: (0..w.nrows()).map(|j| w.row(j).iter().copied().collect()).collect(),
            noise: scm.noise().to_vec(),
        }
    }

    pub fn to_scm(&self) -> Result<Scm> {
        let (g, t, o) = self.graph.to_graph()?;
        let n = g.node_count();
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel(format!("weights must be {n}x{n}")));
        }
        let flat: Vec<f64> = self.weights.iter().flatten().copied().collect();
        let scm = Scm::new(g, DMatrix::from_row_slice(n, n, &flat), self.form, self.noise.clone())?;
        match (t, o) {
            (Some(t), Some(o)) => scm.with_roles(t, o),
            (None, None) => Ok(scm),
            _ => Err(Error::InvalidModel("treatment and outcome must be given together".into())),
        }
    }

    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_string()?)?;
        Ok(())
    }
}

pub fn save_scm(scm: &Scm, path: impl AsRef<Path>) -> Result<()> {
    ScmFile::from_scm(scm).save(path)
}

pub fn load_scm(path: impl AsRef<Path>) -> Result<Scm> {
    ScmFile::load(path)?.to_scm()
}
