//! JSON model files: named spaces, states, maps, kernels, extended kernels,
//! embeddings, and quantum objects, validated into library types on load.
//!
//! Validation failures carry the JSON path of the offending entry so a bad
//! model file can be fixed without reading the loader.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Embedding, ExtendedKernel};
use crate::measure::{FiniteSpace, InformationState, MeasurableMap, DEFAULT_TOL};
use crate::observables::Kernel;
use crate::quantum::{
    CMatrix, CVector, DensityMatrix, Povm, PureState, QuantumExtendedObservable, SuperOperator,
    QUANTUM_TOL,
};

/// Complex scalar on the wire: `[re, im]`.
type WireComplex = (f64, f64);
type WireMatrix = Vec<Vec<WireComplex>>;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    spaces: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    states: BTreeMap<String, RawState>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    kernels: BTreeMap<String, RawKernel>,
    #[serde(default)]
    extended: BTreeMap<String, RawExtended>,
    #[serde(default)]
    embeddings: BTreeMap<String, RawEmbedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quantum: Option<RawQuantum>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    space: String,
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    source: String,
    target: String,
    assign: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    input: String,
    outcome: String,
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtended {
    input: String,
    outcome: String,
    output: String,
    /// Column keys are `"omega|theta_out"`.
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmbedding {
    space: String,
    vectors: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantum {
    dim: usize,
    #[serde(default)]
    densities: BTreeMap<String, WireMatrix>,
    #[serde(default)]
    povms: BTreeMap<String, RawPovm>,
    #[serde(default)]
    qeos: BTreeMap<String, RawQeo>,
    #[serde(default)]
    superops: BTreeMap<String, RawSuperOp>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPovm {
    outcome: String,
    effects: Vec<WireMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQeo {
    outcome: String,
    prepared: Vec<Vec<WireComplex>>,
    /// `operators[k][j]` for outcome `k`, prepared state `j`.
    operators: Vec<Vec<WireMatrix>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuperOp {
    dim_in: usize,
    dim_out: usize,
    action: WireMatrix,
}

/// Quantum section of a validated model.
#[derive(Debug, Clone, Default)]
pub struct QuantumSection {
    pub dim: usize,
    pub densities: BTreeMap<String, DensityMatrix>,
    pub povms: BTreeMap<String, Povm>,
    pub qeos: BTreeMap<String, QuantumExtendedObservable>,
    pub superops: BTreeMap<String, SuperOperator>,
}

/// A fully validated model file.
#[derive(Debug, Clone, Default)]
pub struct ModelFile {
    pub spaces: BTreeMap<String, FiniteSpace>,
    pub states: BTreeMap<String, InformationState>,
    pub maps: BTreeMap<String, MeasurableMap>,
    pub kernels: BTreeMap<String, Kernel>,
    pub extended: BTreeMap<String, ExtendedKernel>,
    pub embeddings: BTreeMap<String, Embedding>,
    pub quantum: Option<QuantumSection>,
}

fn at(path: &str, e: Error) -> Error {
    Error::Invalid(format!("at {path}: {e}"))
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("at {path}: {msg}"))
}

fn lookup_space<'a>(
    spaces: &'a BTreeMap<String, FiniteSpace>,
    name: &str,
    path: &str,
) -> Result<&'a FiniteSpace> {
    spaces
        .get(name)
        .ok_or_else(|| invalid(path, format!("unknown space `{name}`")))
}

fn dense_row(space: &FiniteSpace, sparse: &BTreeMap<String, f64>, path: &str) -> Result<Vec<f64>> {
    let mut row = vec![0.0; space.len()];
    for (label, &v) in sparse {
        let i = space
            .index_of(label)
            .map_err(|_| invalid(path, format!("unknown atom `{label}`")))?;
        row[i] = v;
    }
    Ok(row)
}

fn to_matrix(wire: &WireMatrix, path: &str) -> Result<CMatrix> {
    let rows = wire.len();
    if rows == 0 {
        return Err(invalid(path, "empty matrix"));
    }
    let cols = wire[0].len();
    if wire.iter().any(|r| r.len() != cols) {
        return Err(invalid(path, "ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(wire[i][j].0, wire[i][j].1)
    }))
}

fn from_matrix(m: &CMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
        .collect()
}

/// Tolerances applied during validation.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub classical: f64,
    pub quantum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            classical: DEFAULT_TOL,
            quantum: QUANTUM_TOL,
        }
    }
}

impl Tolerances {
    /// One override for every check, as set by a global CLI flag.
    pub fn uniform(tol: f64) -> Self {
        Self {
            classical: tol,
            quantum: tol,
        }
    }
}

pub fn parse_model(bytes: &[u8]) -> Result<ModelFile> {
    parse_model_with_tol(bytes, Tolerances::default())
}

pub fn parse_model_with_tol(bytes: &[u8], tol: Tolerances) -> Result<ModelFile> {
    let raw: RawModel = serde_json::from_slice(bytes)
        .map_err(|e| Error::Invalid(format!("malformed model JSON: {e}")))?;
    validate(&raw, tol)
}

fn validate(raw: &RawModel, tol: Tolerances) -> Result<ModelFile> {
    let mut model = ModelFile::default();

    for (name, atoms) in &raw.spaces {
        let path = format!("$.spaces.{name}");
        let space = FiniteSpace::new(atoms.iter().cloned()).map_err(|e| at(&path, e))?;
        model.spaces.insert(name.clone(), space);
    }

    for (name, rs) in &raw.states {
        let path = format!("$.states.{name}");
        let space = lookup_space(&model.spaces, &rs.space, &path)?;
        let weights = dense_row(space, &rs.weights, &format!("{path}.weights"))?;
        let state = InformationState::normalize_with_tol(space, &weights, tol.classical)
            .map_err(|e| at(&path, e))?;
        model.states.insert(name.clone(), state);
    }

    for (name, rm) in &raw.maps {
        let path = format!("$.maps.{name}");
        let source = lookup_space(&model.spaces, &rm.source, &path)?.clone();
        let target = lookup_space(&model.spaces, &rm.target, &path)?.clone();
        let pairs: Vec<(&str, &str)> = rm
            .assign
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        let map = MeasurableMap::from_pairs(source, target, &pairs).map_err(|e| at(&path, e))?;
        model.maps.insert(name.clone(), map);
    }

    for (name, rk) in &raw.kernels {
        let path = format!("$.kernels.{name}");
        let input = lookup_space(&model.spaces, &rk.input, &path)?.clone();
        let outcome = lookup_space(&model.spaces, &rk.outcome, &path)?.clone();
        let mut rows = Vec::with_capacity(input.len());
        for atom in input.atoms() {
            let row_path = format!("{path}.rows.{atom}");
            let sparse = rk
                .rows
                .get(atom)
                .ok_or_else(|| invalid(&row_path, "missing row"))?;
            rows.push(dense_row(&outcome, sparse, &row_path)?);
        }
        for extra in rk.rows.keys() {
            if input.index_of(extra).is_err() {
                return Err(invalid(
                    &format!("{path}.rows.{extra}"),
                    "row for unknown input atom",
                ));
            }
        }
        let kernel =
            Kernel::with_tol(input, outcome, rows, tol.classical).map_err(|e| at(&path, e))?;
        model.kernels.insert(name.clone(), kernel);
    }

    for (name, re) in &raw.extended {
        let path = format!("$.extended.{name}");
        let input = lookup_space(&model.spaces, &re.input, &path)?.clone();
        let outcome = lookup_space(&model.spaces, &re.outcome, &path)?.clone();
        let output = lookup_space(&model.spaces, &re.output, &path)?.clone();
        let compound = FiniteSpace::product(&outcome, &output);
        let mut rows = Vec::with_capacity(input.len());
        for atom in input.atoms() {
            let row_path = format!("{path}.rows.{atom}");
            let sparse = re
                .rows
                .get(atom)
                .ok_or_else(|| invalid(&row_path, "missing row"))?;
            rows.push(dense_row(&compound, sparse, &row_path)?);
        }
        for extra in re.rows.keys() {
            if input.index_of(extra).is_err() {
                return Err(invalid(
                    &format!("{path}.rows.{extra}"),
                    "row for unknown input atom",
                ));
            }
        }
        let ext = ExtendedKernel::with_tol(input, outcome, output, rows, tol.classical)
            .map_err(|e| at(&path, e))?;
        model.extended.insert(name.clone(), ext);
    }

    for (name, re) in &raw.embeddings {
        let path = format!("$.embeddings.{name}");
        let space = lookup_space(&model.spaces, &re.space, &path)?.clone();
        let mut vectors = Vec::with_capacity(space.len());
        for atom in space.atoms() {
            let v = re
                .vectors
                .get(atom)
                .ok_or_else(|| invalid(&format!("{path}.vectors.{atom}"), "missing vector"))?;
            vectors.push(v.clone());
        }
        let emb = Embedding::new(space, vectors).map_err(|e| at(&path, e))?;
        model.embeddings.insert(name.clone(), emb);
    }

    if let Some(rq) = &raw.quantum {
        let mut q = QuantumSection {
            dim: rq.dim,
            ..Default::default()
        };
        for (name, wire) in &rq.densities {
            let path = format!("$.quantum.densities.{name}");
            let mat = to_matrix(wire, &path)?;
            if mat.nrows() != rq.dim {
                return Err(invalid(
                    &path,
                    format!("expected dimension {}, got {}", rq.dim, mat.nrows()),
                ));
            }
            let rho = DensityMatrix::with_tol(mat, tol.quantum).map_err(|e| at(&path, e))?;
            q.densities.insert(name.clone(), rho);
        }
        for (name, rp) in &rq.povms {
            let path = format!("$.quantum.povms.{name}");
            let outcome = lookup_space(&model.spaces, &rp.outcome, &path)?.clone();
            let effects = rp
                .effects
                .iter()
                .enumerate()
                .map(|(i, w)| to_matrix(w, &format!("{path}.effects[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let povm = Povm::with_tol(outcome, effects, tol.quantum).map_err(|e| at(&path, e))?;
            q.povms.insert(name.clone(), povm);
        }
        for (name, rqeo) in &rq.qeos {
            let path = format!("$.quantum.qeos.{name}");
            let outcome = lookup_space(&model.spaces, &rqeo.outcome, &path)?.clone();
            let prepared = rqeo
                .prepared
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let amps =
                        CVector::from_iterator(v.len(), v.iter().map(|&(re, im)| Complex64::new(re, im)));
                    PureState::new(amps).map_err(|e| at(&format!("{path}.prepared[{j}]"), e))
                })
                .collect::<Result<Vec<_>>>()?;
            let operators = rqeo
                .operators
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, w)| to_matrix(w, &format!("{path}.operators[{k}][{j}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let qeo = QuantumExtendedObservable::with_tol(outcome, prepared, operators, tol.quantum)
                .map_err(|e| at(&path, e))?;
            q.qeos.insert(name.clone(), qeo);
        }
        for (name, rs) in &rq.superops {
            let path = format!("$.quantum.superops.{name}");
            let action = to_matrix(&rs.action, &format!("{path}.action"))?;
            let op = SuperOperator::from_action(rs.dim_in, rs.dim_out, action)
                .map_err(|e| at(&path, e))?;
            q.superops.insert(name.clone(), op);
        }
        model.quantum = Some(q);
    }

    Ok(model)
}

/// Serialize a model back to its wire schema as canonical pretty JSON.
pub fn serialize_model(model: &ModelFile) -> String {
    let mut raw = RawModel::default();
    for (name, space) in &model.spaces {
        raw.spaces.insert(name.clone(), space.atoms().to_vec());
    }
    for (name, state) in &model.states {
        raw.states.insert(
            name.clone(),
            RawState {
                space: space_name(model, state.space()),
                weights: state
                    .space()
                    .atoms()
                    .iter()
                    .cloned()
                    .zip(state.weights().iter().copied())
                    .collect(),
            },
        );
    }
    for (name, map) in &model.maps {
        raw.maps.insert(
            name.clone(),
            RawMap {
                source: space_name(model, map.source()),
                target: space_name(model, map.target()),
                assign: map
                    .source()
                    .atoms()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        (
                            a.clone(),
                            map.target().atoms()[map.apply_index(i)].clone(),
                        )
                    })
                    .collect(),
            },
        );
    }
    for (name, k) in &model.kernels {
        raw.kernels.insert(
            name.clone(),
            RawKernel {
                input: space_name(model, k.input()),
                outcome: space_name(model, k.outcome()),
                rows: sparse_rows(k.input(), k.outcome(), k.rows()),
            },
        );
    }
    for (name, e) in &model.extended {
        let compound = FiniteSpace::product(e.outcome(), e.output());
        raw.extended.insert(
            name.clone(),
            RawExtended {
                input: space_name(model, e.input()),
                outcome: space_name(model, e.outcome()),
                output: space_name(model, e.output()),
                rows: sparse_rows(e.input(), &compound, e.rows()),
            },
        );
    }
    for (name, emb) in &model.embeddings {
        raw.embeddings.insert(
            name.clone(),
            RawEmbedding {
                space: space_name(model, emb.space()),
                vectors: emb
                    .space()
                    .atoms()
                    .iter()
                    .cloned()
                    .zip(emb.vectors().iter().cloned())
                    .collect(),
            },
        );
    }
    if let Some(q) = &model.quantum {
        let mut rq = RawQuantum {
            dim: q.dim,
            ..Default::default()
        };
        for (name, rho) in &q.densities {
            rq.densities.insert(name.clone(), from_matrix(rho.matrix()));
        }
        for (name, p) in &q.povms {
            rq.povms.insert(
                name.clone(),
                RawPovm {
                    outcome: space_name(model, p.outcome()),
                    effects: p.effects().iter().map(from_matrix).collect(),
                },
            );
        }
        for (name, qeo) in &q.qeos {
            rq.qeos.insert(
                name.clone(),
                RawQeo {
                    outcome: space_name(model, qeo.outcome()),
                    prepared: qeo
                        .prepared()
                        .iter()
                        .map(|p| p.amplitudes().iter().map(|z| (z.re, z.im)).collect())
                        .collect(),
                    operators: qeo
                        .operators()
                        .iter()
                        .map(|row| row.iter().map(from_matrix).collect())
                        .collect(),
                },
            );
        }
        for (name, op) in &q.superops {
            rq.superops.insert(
                name.clone(),
                RawSuperOp {
                    dim_in: op.dim_in(),
                    dim_out: op.dim_out(),
                    action: from_matrix(op.action_matrix()),
                },
            );
        }
        raw.quantum = Some(rq);
    }
    serde_json::to_string_pretty(&raw).expect("raw model serializes")
}

fn space_name(model: &ModelFile, space: &FiniteSpace) -> String {
    model
        .spaces
        .iter()
        .find(|(_, s)| *s == space)
        .map(|(n, _)| n.clone())
        .unwrap_or_else(|| space.to_string())
}

fn sparse_rows(
    input: &FiniteSpace,
    outcome: &FiniteSpace,
    rows: &[Vec<f64>],
) -> BTreeMap<String, BTreeMap<String, f64>> {
    input
        .atoms()
        .iter()
        .zip(rows)
        .map(|(atom, row)| {
            let sparse: BTreeMap<String, f64> = outcome
                .atoms()
                .iter()
                .zip(row)
                .filter(|(_, &v)| v != 0.0)
                .map(|(l, &v)| (l.clone(), v))
                .collect();
            (atom.clone(), sparse)
        })
        .collect()
}
