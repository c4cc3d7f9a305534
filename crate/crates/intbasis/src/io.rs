//! JSON schemas for modules, matrices, filtrations, towers and results.
//!
//! Scalars are encoded per field: plain integers for `Z_p`, `"num/den"`
//! strings for rationals, floats for reals. Integer literals are accepted
//! on input for every field, which lets one integer-entry module file be
//! run under `--field zp:5`, `--field rational`, or `--field real`
//! interchangeably. Emitted module JSON re-parses to an equal module.

use num::bigint::BigInt;
use num::rational::BigRational;
use serde_json::{json, Map, Value};
use std::str::FromStr;

use crate::decompose::IntervalBasis;
use crate::error::Error;
use crate::field::{FieldKind, FieldScalar, FieldSpec};
use crate::linalg::Matrix;
use crate::pmodule::{PersistenceModule, PersistencePair};
use crate::simplicial::{ChainTower, FilteredComplex, Simplex, SimplexSet};
use crate::Result;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn scalar_to_json(_field: &FieldSpec, s: &FieldScalar) -> Value {
    match s {
        FieldScalar::Prime { value, .. } => json!(value),
        FieldScalar::Rational(r) => json!(format!("{}/{}", r.numer(), r.denom())),
        FieldScalar::Real(x) => json!(x),
    }
}

pub fn scalar_from_json(field: &FieldSpec, v: &Value) -> Result<FieldScalar> {
    match (field.kind(), v) {
        (_, Value::Number(n)) if n.is_i64() || n.is_u64() => {
            let x = n
                .as_i64()
                .ok_or_else(|| parse_err(format!("integer {n} out of range")))?;
            Ok(field.from_i64(x))
        }
        (FieldKind::Real, Value::Number(n)) => {
            let x = n.as_f64().ok_or_else(|| parse_err("bad float"))?;
            if !x.is_finite() {
                return Err(parse_err("real entries must be finite"));
            }
            Ok(FieldScalar::Real(x))
        }
        (FieldKind::Rational, Value::String(s)) => {
            let (num, den) = match s.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (s.trim(), "1"),
            };
            let num = BigInt::from_str(num).map_err(|_| parse_err(format!("bad rational {s:?}")))?;
            let den = BigInt::from_str(den).map_err(|_| parse_err(format!("bad rational {s:?}")))?;
            if den == BigInt::from(0) {
                return Err(Error::DivisionByZero);
            }
            Ok(FieldScalar::Rational(BigRational::new(num, den)))
        }
        _ => Err(parse_err(format!(
            "scalar {v} is not valid for field {field}"
        ))),
    }
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    let data: Vec<Value> = (0..m.rows())
        .map(|r| {
            Value::Array(
                (0..m.cols())
                    .map(|c| scalar_to_json(m.field(), m.get(r, c)))
                    .collect(),
            )
        })
        .collect();
    json!({"rows": m.rows(), "cols": m.cols(), "data": data})
}

pub fn matrix_from_json(field: &FieldSpec, v: &Value) -> Result<Matrix> {
    let obj = v.as_object().ok_or_else(|| parse_err("matrix must be an object"))?;
    let rows = get_usize(obj, "rows")?;
    let cols = get_usize(obj, "cols")?;
    let data = obj
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("matrix needs a data array"))?;
    if data.len() != rows {
        return Err(parse_err(format!(
            "matrix declares {rows} rows but data has {}",
            data.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in data {
        let row = row
            .as_array()
            .ok_or_else(|| parse_err("matrix rows must be arrays"))?;
        if row.len() != cols {
            return Err(parse_err(format!(
                "matrix declares {cols} cols but a row has {}",
                row.len()
            )));
        }
        for cell in row {
            entries.push(scalar_from_json(field, cell)?);
        }
    }
    Matrix::new(*field, rows, cols, entries)
}

fn get_usize(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("missing or invalid field {key:?}")))
}

pub fn module_to_json(m: &PersistenceModule) -> Value {
    json!({
        "field": m.field().to_string(),
        "dims": m.dims(),
        "maps": m.maps().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

/// Parse a module, optionally reinterpreting its entries under
/// `field_override` (integer entries are valid in every field). `tol` is
/// used when the field is `"real"`.
pub fn module_from_json(
    v: &Value,
    field_override: Option<FieldSpec>,
    tol: f64,
) -> Result<PersistenceModule> {
    let obj = v.as_object().ok_or_else(|| parse_err("module must be an object"))?;
    let field = match field_override {
        Some(f) => f,
        None => {
            let name = obj
                .get("field")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err("module needs a field name"))?;
            FieldSpec::parse(name, tol)?
        }
    };
    let dims: Vec<usize> = obj
        .get("dims")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("module needs a dims array"))?
        .iter()
        .map(|d| d.as_u64().map(|x| x as usize).ok_or_else(|| parse_err("bad dim")))
        .collect::<Result<_>>()?;
    let maps: Vec<Matrix> = obj
        .get("maps")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("module needs a maps array"))?
        .iter()
        .map(|m| matrix_from_json(&field, m))
        .collect::<Result<_>>()?;
    PersistenceModule::new(field, dims, maps)
}

/// Death index as JSON: the virtual step `n + 1` renders as `"inf"` when
/// `essential_as_infinite` is set, as a number otherwise.
fn death_to_json(death: usize, steps: usize, essential_as_infinite: bool) -> Value {
    if essential_as_infinite && death == steps + 1 {
        json!("inf")
    } else {
        json!(death)
    }
}

pub fn pairs_to_json(
    pairs: &[PersistencePair],
    steps: usize,
    essential_as_infinite: bool,
) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|p| {
                json!({
                    "birth": p.birth,
                    "death": death_to_json(p.death, steps, essential_as_infinite),
                })
            })
            .collect(),
    )
}

/// Result envelope of the `decompose` command: the diagram plus the
/// interval-basis generators, aligned index by index with the pairs.
pub fn decomposition_to_json(
    m: &PersistenceModule,
    basis: &IntervalBasis,
    pairs: &[PersistencePair],
    essential_as_infinite: bool,
) -> Value {
    let generators: Vec<Value> = basis
        .elements
        .iter()
        .map(|e| {
            json!({
                "birth": e.birth,
                "vector": e.vector.iter().map(|s| scalar_to_json(m.field(), s)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "pairs": pairs_to_json(pairs, m.len(), essential_as_infinite),
        "generators": generators,
    })
}

fn simplex_from_json(v: &Value) -> Result<Simplex> {
    let verts: Vec<usize> = v
        .as_array()
        .ok_or_else(|| parse_err("a simplex is an array of vertex indices"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| parse_err(format!("bad vertex {x}")))
        })
        .collect::<Result<_>>()?;
    Simplex::new(verts)
}

/// Parse a filtration given as explicit steps or as a simplexwise list.
pub fn filtration_from_json(v: &Value) -> Result<FilteredComplex> {
    let obj = v.as_object().ok_or_else(|| parse_err("filtration must be an object"))?;
    if let Some(steps) = obj.get("steps").and_then(Value::as_array) {
        let sets = steps
            .iter()
            .map(|step| {
                let simplices = step
                    .as_array()
                    .ok_or_else(|| parse_err("each step is an array of simplices"))?
                    .iter()
                    .map(simplex_from_json)
                    .collect::<Result<Vec<_>>>()?;
                SimplexSet::new(simplices)
            })
            .collect::<Result<Vec<_>>>()?;
        return FilteredComplex::new(sets);
    }
    if let Some(entries) = obj.get("simplices").and_then(Value::as_array) {
        let entries = entries
            .iter()
            .map(|e| {
                let obj = e
                    .as_object()
                    .ok_or_else(|| parse_err("simplexwise entries are objects"))?;
                let s = simplex_from_json(
                    obj.get("v").ok_or_else(|| parse_err("entry needs vertices \"v\""))?,
                )?;
                let t = obj
                    .get("t")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| parse_err("entry needs a value \"t\""))?;
                Ok((s, t))
            })
            .collect::<Result<Vec<_>>>()?;
        return FilteredComplex::from_simplexwise(entries);
    }
    Err(parse_err(
        "filtration needs either a \"steps\" or a \"simplices\" array",
    ))
}

fn tower_from_json(v: &Value, field: &FieldSpec) -> Result<ChainTower> {
    let obj = v.as_object().ok_or_else(|| parse_err("tower must be an object"))?;
    let degrees = get_usize(obj, "degrees")?;
    let steps = obj
        .get("steps")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("tower needs a steps array"))?;
    let boundaries = steps
        .iter()
        .map(|s| {
            let arr = s
                .as_object()
                .and_then(|o| o.get("boundaries"))
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("each tower step needs a boundaries array"))?;
            arr.iter().map(|m| matrix_from_json(field, m)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let maps = obj
        .get("maps")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("tower needs a maps array"))?
        .iter()
        .map(|s| {
            let arr = s
                .as_object()
                .and_then(|o| o.get("f"))
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("each tower arrow needs an \"f\" array"))?;
            arr.iter().map(|m| matrix_from_json(field, m)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChainTower::new(*field, degrees, boundaries, maps)
}

/// Accept any of the three chain-data inputs for the homology and harmonic
/// pipelines: an explicit tower (key `degrees`), a simplexwise filtration
/// (key `simplices`), or step-listed complexes (key `steps` of arrays).
pub fn chain_input_from_json(v: &Value, field: &FieldSpec) -> Result<ChainTower> {
    let obj = v.as_object().ok_or_else(|| parse_err("input must be a JSON object"))?;
    if obj.contains_key("degrees") {
        tower_from_json(v, field)
    } else {
        let fc = filtration_from_json(v)?;
        ChainTower::from_filtration(&fc, field)
    }
}

pub fn value_from_str(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| parse_err(e.to_string()))
}

pub fn to_pretty_string(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("JSON values serialize");
    out.push('\n');
    out
}
