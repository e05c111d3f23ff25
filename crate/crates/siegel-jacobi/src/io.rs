//! JSON formats for matrices, points and tangent vectors.
//!
//! A matrix is `{"rows": r, "cols": c, "data": [[re, im], ...]}` (row-major),
//! a nested array of rows, or a bare scalar (a `1 x 1` matrix). Scalars may be
//! numbers, `[re, im]` pairs, or complex literals such as `i`, `2i`, `1-0.5i`.
//! Bare complex literals are accepted unquoted: `{"omega": i}` parses.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, RMatrix, C64};
use crate::spaces::{DiskPoint, JacobiDiskPoint, JacobiPoint, SiegelPoint, TangentVector};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parse `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (`j` is accepted for `i`), or `a,b`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return Err(perr("empty complex literal"));
    }
    if let Some((a, b)) = t.split_once(',') {
        let re = a.parse::<f64>().map_err(|_| perr(format!("bad real part in {s:?}")))?;
        let im = b.parse::<f64>().map_err(|_| perr(format!("bad imaginary part in {s:?}")))?;
        return Ok(c(re, im));
    }
    let t = t.replace('j', "i");
    if !t.ends_with('i') {
        return t.parse::<f64>().map(|x| c(x, 0.0)).map_err(|_| perr(format!("bad complex literal {s:?}")));
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not an exponent sign and not leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let coef = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| perr(format!("bad complex literal {s:?}"))),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| perr(format!("bad real part in {s:?}")))?;
            Ok(c(re, coef(&body[k..])?))
        }
        None => Ok(c(0.0, coef(body)?)),
    }
}

/// Quote bare complex literals so the text becomes valid JSON.
pub fn quote_complex_literals(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    let mut in_str = false;
    while k < chars.len() {
        let ch = chars[k];
        if in_str {
            out.push(ch);
            if ch == '\\' && k + 1 < chars.len() {
                out.push(chars[k + 1]);
                k += 2;
                continue;
            }
            if ch == '"' {
                in_str = false;
            }
            k += 1;
            continue;
        }
        if ch == '"' {
            in_str = true;
            out.push(ch);
            k += 1;
            continue;
        }
        let start_ok = ch.is_ascii_digit() || matches!(ch, '.' | '+' | '-' | 'i' | 'j');
        if start_ok {
            let mut e = k;
            while e < chars.len() && (chars[e].is_ascii_digit() || matches!(chars[e], '.' | '+' | '-' | 'e' | 'E' | 'i' | 'j')) {
                e += 1;
            }
            let tok: String = chars[k..e].iter().collect();
            if tok.contains('i') || tok.contains('j') {
                out.push('"');
                out.push_str(&tok);
                out.push('"');
            } else {
                out.push_str(&tok);
            }
            k = e;
            continue;
        }
        out.push(ch);
        k += 1;
    }
    out
}

/// Parse JSON text, tolerating bare complex literals.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .or_else(|_| serde_json::from_str(&quote_complex_literals(text)))
        .map_err(|e| perr(format!("invalid JSON: {e}")))
}

pub fn complex_from_value(v: &Value) -> Result<C64> {
    match v {
        Value::Number(x) => Ok(c(x.as_f64().ok_or_else(|| perr("number out of range"))?, 0.0)),
        Value::String(s) => parse_complex(s),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
            Ok(c(a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN)))
        }
        _ => Err(perr(format!("expected a complex scalar, got {v}"))),
    }
}

pub fn complex_to_value(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cmatrix_from_value(v: &Value) -> Result<CMatrix> {
    match v {
        Value::Object(o) if o.contains_key("data") => {
            let rows = o.get("rows").and_then(Value::as_u64).ok_or_else(|| perr("matrix needs \"rows\""))? as usize;
            let cols = o.get("cols").and_then(Value::as_u64).ok_or_else(|| perr("matrix needs \"cols\""))? as usize;
            let data = o["data"].as_array().ok_or_else(|| perr("\"data\" must be an array"))?;
            let scalar = |x: &Value| x.is_number() || x.is_string() || is_pair(x);
            let flat: Vec<C64> = if data.iter().all(scalar) {
                data.iter().map(complex_from_value).collect::<Result<_>>()?
            } else {
                let mut out = vec![];
                for r in data {
                    let r = r.as_array().ok_or_else(|| perr("matrix rows must be arrays"))?;
                    for x in r {
                        out.push(complex_from_value(x)?);
                    }
                }
                out
            };
            if flat.len() != rows * cols {
                return Err(perr(format!("matrix data has {} entries, expected {}", flat.len(), rows * cols)));
            }
            Ok(CMatrix::from_row_slice(rows, cols, &flat))
        }
        Value::Array(rows) if rows.iter().all(Value::is_array) && !rows.is_empty() && !is_pair(v) => {
            let parsed: Vec<Vec<C64>> = rows
                .iter()
                .map(|r| r.as_array().unwrap().iter().map(complex_from_value).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let cols = parsed[0].len();
            if parsed.iter().any(|r| r.len() != cols) {
                return Err(perr("ragged matrix rows"));
            }
            let flat: Vec<C64> = parsed.into_iter().flatten().collect();
            Ok(CMatrix::from_row_slice(rows.len(), cols, &flat))
        }
        Value::Array(a) if a.is_empty() => Err(perr("empty matrix")),
        _ => Ok(CMatrix::from_element(1, 1, complex_from_value(v)?)),
    }
}

fn is_pair(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(Value::is_number))
}

pub fn cmatrix_to_value(m: &CMatrix) -> Value {
    let mut data = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push(complex_to_value(m[(i, j)]));
        }
    }
    json!({"rows": m.nrows(), "cols": m.ncols(), "data": data})
}

pub fn rmatrix_from_value(v: &Value) -> Result<RMatrix> {
    let m = cmatrix_from_value(v)?;
    if m.iter().any(|z| z.im != 0.0) {
        return Err(perr("expected a real matrix"));
    }
    Ok(m.map(|z| z.re))
}

pub fn rmatrix_to_value(m: &RMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!(m.row(i).iter().copied().collect::<Vec<f64>>())).collect())
}

fn field<'a>(v: &'a Value, names: &[&str]) -> Result<&'a Value> {
    names.iter().find_map(|k| v.get(*k)).ok_or_else(|| perr(format!("missing field {:?}", names[0])))
}

pub fn siegel_point_from_value(v: &Value) -> Result<SiegelPoint> {
    SiegelPoint::new(cmatrix_from_value(field(v, &["omega", "Omega"])?)?)
}

pub fn jacobi_point_from_value(v: &Value) -> Result<JacobiPoint> {
    JacobiPoint::new(cmatrix_from_value(field(v, &["omega", "Omega"])?)?, cmatrix_from_value(field(v, &["z", "Z"])?)?)
}

pub fn disk_point_from_value(v: &Value) -> Result<DiskPoint> {
    DiskPoint::new(cmatrix_from_value(field(v, &["w", "W"])?)?)
}

pub fn jacobi_disk_point_from_value(v: &Value) -> Result<JacobiDiskPoint> {
    JacobiDiskPoint::new(cmatrix_from_value(field(v, &["w", "W"])?)?, cmatrix_from_value(field(v, &["eta"])?)?)
}

pub fn siegel_point_to_value(p: &SiegelPoint) -> Value {
    json!({"omega": cmatrix_to_value(p.omega())})
}

pub fn jacobi_point_to_value(p: &JacobiPoint) -> Value {
    json!({"omega": cmatrix_to_value(p.omega()), "z": cmatrix_to_value(p.z())})
}

pub fn disk_point_to_value(p: &DiskPoint) -> Value {
    json!({"w": cmatrix_to_value(p.w())})
}

pub fn jacobi_disk_point_to_value(p: &JacobiDiskPoint) -> Value {
    json!({"w": cmatrix_to_value(p.w()), "eta": cmatrix_to_value(p.eta())})
}

/// Tangent vector from `{"omega": .., "z": ..}` (or `w`/`eta`, or `d_omega`/`d_z`);
/// a missing second component is zero of size `m x n`.
pub fn tangent_from_value(v: &Value, n: usize, m: usize) -> Result<TangentVector> {
    let d_omega = cmatrix_from_value(field(v, &["d_omega", "omega", "Omega", "w", "W"])?)?;
    let d_z = match field(v, &["d_z", "z", "Z", "eta"]) {
        Ok(x) => cmatrix_from_value(x)?,
        Err(_) => CMatrix::zeros(m, n),
    };
    if d_omega.shape() != (n, n) || d_z.shape() != (m, n) {
        return Err(crate::error::dim(format!("tangent vector shape does not match degree ({n},{m})")));
    }
    TangentVector::new(d_omega, d_z)
}
