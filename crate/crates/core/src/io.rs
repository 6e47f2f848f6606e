//! JSON file formats for states, ensembles, channels and reports.
//!
//! Complex entries are `[re, im]` pairs; readers also accept a bare real
//! number. Writers print every float with 17 significant digits so identical
//! runs produce byte-identical output.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::channels::{classify, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::majorization::Ensemble;
use crate::solver::SolveReport;
use crate::state::{DensityMatrix, PureState};
use crate::tol;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn to_complex(self) -> Result<num_complex::Complex64> {
        let z = match self {
            Entry::Pair([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Parse("non-finite number".into()));
        }
        Ok(z)
    }

    fn from_complex(z: num_complex::Complex64) -> Self {
        Entry::Pair([z.re, z.im])
    }
}

type MatrixJson = Vec<Vec<Entry>>;

fn matrix_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::from_complex(m[(i, j)])).collect())
        .collect()
}

fn vector_json(v: &CVector) -> Vec<Entry> {
    v.iter().map(|z| Entry::from_complex(*z)).collect()
}

fn parse_matrix(rows: &MatrixJson, nrows: usize, ncols: usize) -> Result<CMatrix> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch {
            expected: nrows,
            got: rows.len(),
        });
    }
    let mut m = CMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch {
                expected: ncols,
                got: row.len(),
            });
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = e.to_complex()?;
        }
    }
    Ok(m)
}

fn parse_vector(entries: &[Entry], dim: usize) -> Result<CVector> {
    if entries.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: entries.len(),
        });
    }
    let v: Result<Vec<_>> = entries.iter().map(|e| e.to_complex()).collect();
    Ok(CVector::from_vec(v?))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<Entry>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleEntryJson {
    weight: f64,
    vector: Vec<Entry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleJson {
    dim: usize,
    entries: Vec<EnsembleEntryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    classes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    measure: &'a str,
    method: &'a str,
    value: f64,
    upper_bound: bool,
    converged: bool,
    restarts_used: usize,
    best_mu: &'a [f64],
    realizing_state: Vec<Entry>,
    best_ensemble: EnsembleJson,
}

/// A state file holds either a density matrix or a pure state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Mixed(DensityMatrix),
    Pure(PureState),
}

impl StateInput {
    pub fn density(&self) -> DensityMatrix {
        match self {
            StateInput::Mixed(rho) => rho.clone(),
            StateInput::Pure(psi) => psi.density(),
        }
    }
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_state(text: &str) -> Result<StateInput> {
    let s: StateJson = from_json(text)?;
    if s.dim == 0 {
        return Err(Error::Empty);
    }
    match (s.matrix, s.vector) {
        (Some(m), None) => Ok(StateInput::Mixed(DensityMatrix::new(parse_matrix(&m, s.dim, s.dim)?, tol::state())?)),
        (None, Some(v)) => Ok(StateInput::Pure(PureState::new(parse_vector(&v, s.dim)?, tol::state())?)),
        _ => Err(Error::Parse("state file needs exactly one of \"matrix\" or \"vector\"".into())),
    }
}

/// The state file's matrix (or `|v><v|` for a vector) checked for shape and
/// finiteness only, for builders that validate their own input.
pub fn parse_unchecked_matrix(text: &str) -> Result<CMatrix> {
    let s: StateJson = from_json(text)?;
    match (s.matrix, s.vector) {
        (Some(m), None) => parse_matrix(&m, s.dim, s.dim),
        (None, Some(v)) => Ok(crate::linalg::outer(&parse_vector(&v, s.dim)?)),
        _ => Err(Error::Parse("state file needs exactly one of \"matrix\" or \"vector\"".into())),
    }
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let e: EnsembleJson = from_json(text)?;
    let entries: Result<Vec<_>> = e
        .entries
        .iter()
        .map(|x| {
            if !x.weight.is_finite() {
                return Err(Error::Parse("non-finite weight".into()));
            }
            Ok((x.weight, PureState::new(parse_vector(&x.vector, e.dim)?, tol::state())?))
        })
        .collect();
    Ensemble::new(entries?)
}

/// Reads Kraus operators and classifies them; a `classes` field is ignored.
pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let ch: ChannelJson = from_json(text)?;
    let kraus: Result<Vec<_>> = ch.kraus.iter().map(|k| parse_matrix(k, ch.dim_out, ch.dim_in)).collect();
    classify(kraus?, tol::chan())
}

fn state_json(rho: &DensityMatrix) -> StateJson {
    StateJson {
        dim: rho.dim(),
        matrix: Some(matrix_json(rho.matrix())),
        vector: None,
    }
}

fn pure_json(psi: &PureState) -> StateJson {
    StateJson {
        dim: psi.dim(),
        matrix: None,
        vector: Some(vector_json(psi.amplitudes())),
    }
}

fn ensemble_json(e: &Ensemble) -> EnsembleJson {
    EnsembleJson {
        dim: e.dim(),
        entries: e
            .entries()
            .iter()
            .map(|(w, s)| EnsembleEntryJson {
                weight: *w,
                vector: vector_json(s.amplitudes()),
            })
            .collect(),
    }
}

fn channel_json(ch: &QuantumChannel) -> ChannelJson {
    ChannelJson {
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        kraus: ch.kraus().iter().map(matrix_json).collect(),
        classes: ch.tag_names().into_iter().map(String::from).collect(),
    }
}

/// Floats as `{:.16e}`: 17 significant digits, round-trip exact.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Compact JSON with [`FixedDigits`] floats; non-finite values are an error.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    let text = String::from_utf8(out).expect("serde_json writes UTF-8");
    // serde_json turns NaN and infinities into null
    if serde_json::from_str::<serde_json::Value>(&text).is_ok_and(|v| has_null(&v)) {
        return Err(Error::NonFinite(0));
    }
    Ok(text)
}

fn has_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(has_null),
        serde_json::Value::Object(o) => o.values().any(has_null),
        _ => false,
    }
}

pub fn write_state(rho: &DensityMatrix) -> Result<String> {
    to_json(&state_json(rho))
}

pub fn write_pure(psi: &PureState) -> Result<String> {
    to_json(&pure_json(psi))
}

pub fn write_ensemble(e: &Ensemble) -> Result<String> {
    to_json(&ensemble_json(e))
}

/// Channel file with its class tags as a sorted `classes` list.
pub fn write_channel(ch: &QuantumChannel) -> Result<String> {
    to_json(&channel_json(ch))
}

pub fn write_report(r: &SolveReport) -> Result<String> {
    to_json(&ReportJson {
        measure: &r.measure,
        method: &r.method,
        value: r.value,
        upper_bound: r.upper_bound,
        converged: r.converged,
        restarts_used: r.restarts_used,
        best_mu: r.best_mu.probs(),
        realizing_state: vector_json(r.realizing_state.amplitudes()),
        best_ensemble: ensemble_json(&r.best_ensemble),
    })
}

pub fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
