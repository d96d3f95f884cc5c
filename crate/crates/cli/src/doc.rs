//! JSON documents. Complex scalars are `[re, im]`, matrices are row-major.

use num_complex::Complex64;
use pairform::atlas::{CanonicalBlock, Family};
use pairform::canonical::{CanonicalForm, Flavor, ResidualReport};
use pairform::glr::{GlrBlock, GlrForm};
use pairform::linalg::CMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Cx = [f64; 2];
pub type Matrix = Vec<Vec<Cx>>;

pub fn to_cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn from_cx(z: Cx) -> Complex64 {
    Complex64::new(z[0], z[1])
}

pub fn to_matrix(m: &CMatrix) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| to_cx(m[(i, j)])).collect()).collect()
}

pub fn from_matrix(rows: &Matrix, n: usize, what: &str) -> Result<CMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse(format!("{what} must be {n}x{n}")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| from_cx(rows[i][j])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDoc {
    pub n: usize,
    /// Absent for operator-only input.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Matrix>,
    #[serde(rename = "C")]
    pub c: Matrix,
    /// Ground-truth blocks written by `generate`; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<BlockDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
}

impl PairDoc {
    pub fn h(&self) -> Result<CMatrix, CliError> {
        match &self.h {
            Some(h) => from_matrix(h, self.n, "H"),
            None => Err(CliError::Parse("pair document has no \"H\"".into())),
        }
    }

    pub fn c(&self) -> Result<CMatrix, CliError> {
        from_matrix(&self.c, self.n, "C")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub family: String,
    pub lambda: Cx,
    pub lambda_sq: Cx,
    pub k: usize,
    pub epsilon: i8,
}

impl From<&CanonicalBlock> for BlockDoc {
    fn from(b: &CanonicalBlock) -> Self {
        BlockDoc {
            family: b.family.name().to_string(),
            lambda: to_cx(b.lambda),
            lambda_sq: to_cx(b.lambda_sq),
            k: b.k,
            epsilon: b.epsilon,
        }
    }
}

impl BlockDoc {
    pub fn block(&self) -> Result<CanonicalBlock, CliError> {
        let b = CanonicalBlock::new(from_cx(self.lambda_sq), self.k, self.epsilon)?;
        match Family::parse(&self.family) {
            Some(f) if f == b.family => Ok(b),
            _ => Err(CliError::Parse(format!("family {:?} does not match λ² = {}", self.family, b.lambda_sq))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualDoc {
    pub h_residual: f64,
    pub c_residual: f64,
    pub pass: bool,
}

impl From<ResidualReport> for ResidualDoc {
    fn from(r: ResidualReport) -> Self {
        ResidualDoc { h_residual: r.h_residual, c_residual: r.c_residual, pass: r.pass }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlrBlockDoc {
    pub eta: Cx,
    pub k: usize,
    pub epsilon: i8,
}

/// Output of `canonicalize`, `convert`, and input of `verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormDoc {
    pub flavor: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub glr_blocks: Vec<GlrBlockDoc>,
    #[serde(rename = "M")]
    pub m: Matrix,
    pub residuals: ResidualDoc,
}

pub fn flavor_of(name: &str) -> Result<Flavor, CliError> {
    match name {
        "standard" => Ok(Flavor::Standard),
        "alternative" | "alt" => Ok(Flavor::Alternative),
        "operator-only" | "operator" => Ok(Flavor::OperatorOnly),
        other => Err(CliError::Parse(format!("unknown flavor {other:?}"))),
    }
}

impl From<&CanonicalForm> for FormDoc {
    fn from(f: &CanonicalForm) -> Self {
        FormDoc {
            flavor: f.flavor.name().to_string(),
            n: f.transition.nrows(),
            blocks: f.blocks.iter().map(BlockDoc::from).collect(),
            glr_blocks: Vec::new(),
            m: to_matrix(&f.transition),
            residuals: f.residuals.into(),
        }
    }
}

impl From<&GlrForm> for FormDoc {
    fn from(f: &GlrForm) -> Self {
        FormDoc {
            flavor: "glr".to_string(),
            n: f.transition.nrows(),
            blocks: Vec::new(),
            glr_blocks: f.blocks.iter().map(|b| GlrBlockDoc { eta: to_cx(b.eta), k: b.k, epsilon: b.epsilon }).collect(),
            m: to_matrix(&f.transition),
            residuals: f.residuals.into(),
        }
    }
}

impl FormDoc {
    pub fn is_glr(&self) -> bool {
        self.flavor == "glr"
    }

    pub fn canonical(&self) -> Result<CanonicalForm, CliError> {
        let r = self.residuals;
        Ok(CanonicalForm {
            blocks: self.blocks.iter().map(BlockDoc::block).collect::<Result<_, _>>()?,
            transition: from_matrix(&self.m, self.n, "M")?,
            flavor: flavor_of(&self.flavor)?,
            residuals: ResidualReport { h_residual: r.h_residual, c_residual: r.c_residual, pass: r.pass },
        })
    }

    pub fn glr(&self) -> Result<GlrForm, CliError> {
        let r = self.residuals;
        Ok(GlrForm {
            blocks: self
                .glr_blocks
                .iter()
                .map(|b| GlrBlock { eta: from_cx(b.eta), k: b.k, epsilon: b.epsilon })
                .collect(),
            transition: from_matrix(&self.m, self.n, "M")?,
            residuals: ResidualReport { h_residual: r.h_residual, c_residual: r.c_residual, pass: r.pass },
        })
    }
}
