//! The JSON system file: rank, critical elements in filtration order, an
//! optional chain model and optional surgery data.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::Complex;
use serde::de::{self, IgnoredAny, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use milnor::algebra::GramMetric;
use milnor::complex::{CochainComplex, FilteredComplex};
use milnor::flow::{
    ClosedOrbitDatum, CriticalElement, FixedPointDatum, MorseSmaleSystem, Orientation, Sign, SurgeryDatum, SurgeryMap,
};
use milnor::scalar::CMatrix;

use crate::error::CliError;

/// A complex scalar, written as `[re, im]` or as a bare real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub Complex<f64>);

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or an [re, im] pair")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar(Complex::new(v, 0.0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        self.visit_f64(v as f64)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Scalar, A::Error> {
        let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<IgnoredAny>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Scalar(Complex::new(re, im)))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ScalarVisitor)
    }
}

/// Row-major nested arrays.
pub type Matrix = Vec<Vec<Scalar>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationFile {
    #[default]
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedFile {
    pub id: String,
    pub index: usize,
    pub gram: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitFile {
    pub id: String,
    pub index: usize,
    pub period: f64,
    /// `+1` or `-1`.
    pub twist: i64,
    pub holonomy: Matrix,
    #[serde(default)]
    pub orientation: OrientationFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ElementFile {
    Fixed(FixedFile),
    Orbit(OrbitFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainModelFile {
    pub dims: Vec<usize>,
    /// `differentials[k]` maps degree `k` to `k + 1`.
    pub differentials: Vec<Matrix>,
    /// `levels[k][i]` is the filtration level of basis vector `i` in degree `k`.
    pub levels: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryFile {
    pub tau: Matrix,
    pub n_a: i64,
    pub n_a_prime: i64,
    pub gram_x: Matrix,
    pub gram_x_prime: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold_dim: Option<usize>,
    pub elements: Vec<ElementFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_model: Option<ChainModelFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub surgery: BTreeMap<String, SurgeryFile>,
    #[serde(default)]
    pub split: bool,
}

/// Unitary holonomy for the circle command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleFile {
    pub holonomy: Matrix,
}

/// A validated system together with the file it came from.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub file: SystemFile,
    pub system: MorseSmaleSystem<f64>,
    pub surgery: SurgeryMap<f64>,
    /// SHA-256 of the raw file bytes.
    pub digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Deserializes JSON, reporting the path of the offending field.
pub fn from_json<'a, T: Deserialize<'a>>(bytes: &'a [u8]) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| CliError::schema(".", e.to_string()))?;
    Ok(value)
}

/// Reads, schema-checks and validates a system file.
pub fn parse_system(path: &Path) -> Result<LoadedSystem, CliError> {
    let bytes = read(path)?;
    let file: SystemFile = from_json(&bytes)?;
    let (system, surgery) = file.to_system()?;
    Ok(LoadedSystem {
        file,
        system,
        surgery,
        digest: sha256_hex(&bytes),
    })
}

/// Reads a circle holonomy file; returns the matrix and the file digest.
pub fn parse_circle(path: &Path) -> Result<(CMatrix<f64>, String), CliError> {
    let bytes = read(path)?;
    let file: CircleFile = from_json(&bytes)?;
    let n = file.holonomy.len();
    Ok((to_cmatrix(&file.holonomy, n, n, "holonomy")?, sha256_hex(&bytes)))
}

pub fn to_cmatrix(m: &Matrix, rows: usize, cols: usize, path: &str) -> Result<CMatrix<f64>, CliError> {
    if m.len() != rows {
        return Err(CliError::schema(path, format!("expected {rows} rows, found {}", m.len())));
    }
    if let Some((i, row)) = m.iter().enumerate().find(|(_, row)| row.len() != cols) {
        return Err(CliError::schema(
            format!("{path}[{i}]"),
            format!("expected {cols} columns, found {}", row.len()),
        ));
    }
    if m.iter().flatten().any(|z| !(z.0.re.is_finite() && z.0.im.is_finite())) {
        return Err(CliError::schema(path, "non-finite entry"));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| m[i][j].0))
}

pub fn from_cmatrix(m: &CMatrix<f64>) -> Matrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Scalar(m[(i, j)])).collect())
        .collect()
}

fn sign(v: i64, path: &str) -> Result<Sign, CliError> {
    Sign::from_i64(v).ok_or_else(|| CliError::schema(path, format!("expected 1 or -1, found {v}")))
}

fn gram(m: &Matrix, rank: usize, path: &str) -> Result<GramMetric<f64>, CliError> {
    GramMetric::new(to_cmatrix(m, rank, rank, path)?).map_err(|e| CliError::invalid(path, e))
}

impl SystemFile {
    /// Builds the validated system and surgery map. Every invariant the
    /// library checks is checked here, plus the surgery sign constraint.
    pub fn to_system(&self) -> Result<(MorseSmaleSystem<f64>, SurgeryMap<f64>), CliError> {
        let r = self.rank;
        let mut elements = Vec::with_capacity(self.elements.len());
        for (i, e) in self.elements.iter().enumerate() {
            let path = format!("elements[{i}]");
            elements.push(match e {
                ElementFile::Fixed(x) => {
                    CriticalElement::Fixed(FixedPointDatum::new(&x.id, x.index, gram(&x.gram, r, &format!("{path}.gram"))?))
                }
                ElementFile::Orbit(o) => {
                    if !(o.period.is_finite() && o.period > 0.0) {
                        return Err(CliError::schema(format!("{path}.period"), "period must be positive"));
                    }
                    let orientation = match o.orientation {
                        OrientationFile::Positive => Orientation::Positive,
                        OrientationFile::Negative => Orientation::Negative,
                    };
                    let datum = ClosedOrbitDatum::new(
                        &o.id,
                        o.index,
                        o.period,
                        sign(o.twist, &format!("{path}.twist"))?,
                        to_cmatrix(&o.holonomy, r, r, &format!("{path}.holonomy"))?,
                        orientation,
                    )
                    .map_err(|e| CliError::invalid(path, e))?;
                    CriticalElement::Orbit(datum)
                }
            });
        }

        let model = match &self.chain_model {
            None => None,
            Some(m) => {
                let expected = m.dims.len().saturating_sub(1);
                if m.differentials.len() != expected {
                    return Err(CliError::schema(
                        "chain_model.differentials",
                        format!("expected {expected} matrices, found {}", m.differentials.len()),
                    ));
                }
                let diffs = m
                    .differentials
                    .iter()
                    .enumerate()
                    .map(|(k, d)| to_cmatrix(d, m.dims[k + 1], m.dims[k], &format!("chain_model.differentials[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let complex =
                    CochainComplex::new(m.dims.clone(), diffs).map_err(|e| CliError::invalid("chain_model", e))?;
                let filtered = FilteredComplex::new(complex, m.levels.clone(), self.elements.len())
                    .map_err(|e| CliError::invalid("chain_model.levels", e))?;
                Some(filtered)
            }
        };

        let system = MorseSmaleSystem::with_dimension(r, elements, model, self.split, self.manifold_dim)
            .map_err(|e| CliError::invalid("system", e))?;

        let mut surgery = SurgeryMap::new();
        for (id, s) in &self.surgery {
            let path = format!("surgery.{id}");
            let Some(orbit) = system.orbits().find(|o| &o.id == id) else {
                return Err(CliError::schema(path, "no closed orbit with this id"));
            };
            let datum = SurgeryDatum {
                tau: to_cmatrix(&s.tau, r, r, &format!("{path}.tau"))?,
                n_a: sign(s.n_a, &format!("{path}.n_a"))?,
                n_a_prime: sign(s.n_a_prime, &format!("{path}.n_a_prime"))?,
                gram_x: gram(&s.gram_x, r, &format!("{path}.gram_x"))?,
                gram_x_prime: gram(&s.gram_x_prime, r, &format!("{path}.gram_x_prime"))?,
            };
            if datum.n_a * datum.n_a_prime != -orbit.twist {
                return Err(CliError::invalid(path, milnor::Error::SignConstraint(id.clone())));
            }
            surgery.insert(id.clone(), datum);
        }
        Ok((system, surgery))
    }

    /// Inverse of [`to_system`](Self::to_system).
    pub fn from_system(system: &MorseSmaleSystem<f64>, surgery: &SurgeryMap<f64>) -> Self {
        let elements = system
            .elements()
            .iter()
            .map(|e| match e {
                CriticalElement::Fixed(x) => ElementFile::Fixed(FixedFile {
                    id: x.id.clone(),
                    index: x.index,
                    gram: from_cmatrix(x.gram.matrix()),
                }),
                CriticalElement::Orbit(o) => ElementFile::Orbit(OrbitFile {
                    id: o.id.clone(),
                    index: o.index,
                    period: o.period,
                    twist: o.twist.as_i64(),
                    holonomy: from_cmatrix(&o.holonomy),
                    orientation: match o.orientation {
                        Orientation::Positive => OrientationFile::Positive,
                        Orientation::Negative => OrientationFile::Negative,
                    },
                }),
            })
            .collect();
        let chain_model = system.chain_model().map(|f| ChainModelFile {
            dims: f.complex().dims().to_vec(),
            differentials: f.complex().differentials().iter().map(from_cmatrix).collect(),
            levels: f.levels().to_vec(),
        });
        let surgery = surgery
            .iter()
            .map(|(id, s)| {
                let file = SurgeryFile {
                    tau: from_cmatrix(&s.tau),
                    n_a: s.n_a.as_i64(),
                    n_a_prime: s.n_a_prime.as_i64(),
                    gram_x: from_cmatrix(s.gram_x.matrix()),
                    gram_x_prime: from_cmatrix(s.gram_x_prime.matrix()),
                };
                (id.clone(), file)
            })
            .collect();
        SystemFile {
            rank: system.rank(),
            manifold_dim: system.manifold_dim(),
            elements,
            chain_model,
            surgery,
            split: system.is_split(),
        }
    }
}
