//! Model files and the builtin example families.

use std::path::Path;

use clap::ValueEnum;
use mpscmi::matcore::{CMat, CVec};
use mpscmi::mpschain::{BoundaryPair, ChainGeometry, KrausFamily};
use mpscmi::puritycert::{constructive_purity_family, haar_kraus};
use mpscmi::zoo;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Left-normalization tolerance for families read from files.
pub const MODEL_TOL: f64 = 1e-8;

/// JSON model: `d` matrices of size `D×D`, entries as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond_dim: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<BoundaryFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    #[serde(rename = "L")]
    pub left: Vec<[f64; 2]>,
    #[serde(rename = "R")]
    pub right: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    #[serde(rename = "lenA")]
    pub len_a: usize,
    #[serde(rename = "lenB")]
    pub len_b: usize,
    #[serde(rename = "lenC")]
    pub len_c: usize,
}

/// A validated family with its optional chain data.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub label: String,
    pub kraus: KrausFamily,
    pub boundaries: Option<BoundaryPair>,
    pub geometry: Option<ChainGeometry>,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn vector_from(entries: &[[f64; 2]], dim: usize, which: &str) -> CliResult<CVec> {
    if entries.len() != dim {
        return Err(CliError::InvalidModel(format!(
            "boundary {which} has {} entries, expected {dim}",
            entries.len()
        )));
    }
    Ok(CVec::from_iterator(
        dim,
        entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
    ))
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let k = &model.kraus;
        let matrices = k
            .ops()
            .iter()
            .map(|a| {
                (0..a.nrows())
                    .map(|i| (0..a.ncols()).map(|j| pair(&a[(i, j)])).collect())
                    .collect()
            })
            .collect();
        Self {
            label: Some(model.label.clone()),
            d: k.d(),
            bond_dim: k.bond_dim(),
            matrices,
            boundaries: model.boundaries.as_ref().map(|b| BoundaryFile {
                left: b.left.iter().map(pair).collect(),
                right: b.right.iter().map(pair).collect(),
            }),
            geometry: model.geometry.map(|g| GeometryFile {
                len_a: g.len_a,
                len_b: g.len_b,
                len_c: g.len_c,
            }),
        }
    }

    /// Validates shapes and left-normalization within [`MODEL_TOL`].
    pub fn into_model(self) -> CliResult<Model> {
        let (d, dim) = (self.d, self.bond_dim);
        if d == 0 || dim == 0 {
            return Err(CliError::InvalidModel("d and D must be positive".into()));
        }
        if self.matrices.len() != d {
            return Err(CliError::InvalidModel(format!(
                "expected {d} matrices, found {}",
                self.matrices.len()
            )));
        }
        let mut ops = Vec::with_capacity(d);
        for (x, rows) in self.matrices.iter().enumerate() {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::InvalidModel(format!(
                    "matrix {x} is not {dim}x{dim}"
                )));
            }
            ops.push(CMat::from_fn(dim, dim, |i, j| {
                let [re, im] = rows[i][j];
                Complex64::new(re, im)
            }));
        }
        let kraus = KrausFamily::with_tolerance(ops, MODEL_TOL)?;
        let boundaries = match &self.boundaries {
            Some(b) => Some(BoundaryPair::normalized(
                vector_from(&b.left, dim, "L")?,
                vector_from(&b.right, dim, "R")?,
            )?),
            None => None,
        };
        let geometry = match self.geometry {
            Some(g) => Some(ChainGeometry::new(g.len_a, g.len_b, g.len_c)?),
            None => None,
        };
        Ok(Model {
            label: self.label.unwrap_or_else(|| "model".into()),
            kraus,
            boundaries,
            geometry,
        })
    }
}

pub fn load_model(path: &Path) -> CliResult<Model> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.into_model()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Aklt,
    AkltPauli,
    Jordan,
    Markov,
    Clock,
    Damping,
    Haar,
    Constructive,
}

/// Parameters consumed by the parametrized builtins.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinParams {
    pub dim: Option<usize>,
    pub phys: Option<usize>,
    pub gamma: f64,
    pub p: Option<String>,
    pub seed: u64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            dim: None,
            phys: None,
            gamma: 0.5,
            p: None,
            seed: 0,
        }
    }
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> CliResult<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        CliError::InvalidModel(format!("cannot parse '{v}' as a number"))
                    })
                })
                .collect()
        })
        .collect()
}

pub const DEFAULT_MARKOV: &str = "0.7,0.3;0.4,0.6";

pub fn builtin_model(kind: Builtin, params: &BuiltinParams) -> CliResult<Model> {
    let (label, kraus) = match kind {
        Builtin::Aklt => ("aklt".to_string(), zoo::aklt()),
        Builtin::AkltPauli => ("aklt-pauli".to_string(), zoo::aklt_pauli()),
        Builtin::Jordan => {
            let dim = params.dim.unwrap_or(4);
            (format!("jordan dim={dim}"), zoo::jordan(dim)?)
        }
        Builtin::Markov => {
            let text = params.p.as_deref().unwrap_or(DEFAULT_MARKOV);
            (
                format!("markov p={text}"),
                zoo::markov(&parse_matrix(text)?)?,
            )
        }
        Builtin::Clock => {
            let dim = params.dim.unwrap_or(3);
            (format!("clock dim={dim}"), zoo::clock(dim)?)
        }
        Builtin::Damping => (
            format!("damping gamma={}", params.gamma),
            zoo::damping(params.gamma)?,
        ),
        Builtin::Haar => {
            let (dim, d) = (params.dim.unwrap_or(3), params.phys.unwrap_or(5));
            (
                format!("haar D={dim} d={d} seed={}", params.seed),
                haar_kraus(dim, d, params.seed)?,
            )
        }
        Builtin::Constructive => {
            let (dim, d) = (params.dim.unwrap_or(3), params.phys.unwrap_or(5));
            (
                format!("constructive D={dim} d={d}"),
                constructive_purity_family(dim, d)?,
            )
        }
    };
    Ok(Model {
        label,
        kraus,
        boundaries: None,
        geometry: None,
    })
}
