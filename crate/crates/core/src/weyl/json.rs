//! Text formats for Weyl tensors and their irreducible parts.
//!
//! ```text
//! {"d": 5, "components": [{"idx": [0, 1, 0, 2], "val": -2.0}]}
//! {"d": 5, "hatH": [[...]], "hatv": [...], "hatT": [[[...]]], "A": [[...]],
//!  "barR": 0.0, "barS": [[...]], "barC": [[[[...]]]],
//!  "checkv": [...], "checkT": [[[...]]], "checkH": [[...]]}
//! ```
//! Omitted components or parts are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FrameConvention;

use super::parts::IrreducibleParts;
use super::transverse::Tensor;
use super::WeylTensor;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    idx: [usize; 4],
    val: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeylDoc {
    d: usize,
    #[serde(default)]
    components: Vec<ComponentDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartsDoc {
    d: usize,
    #[serde(rename = "hatH", default, skip_serializing_if = "Option::is_none")]
    hat_h: Option<Vec<Vec<f64>>>,
    #[serde(rename = "hatv", default, skip_serializing_if = "Option::is_none")]
    hat_v: Option<Vec<f64>>,
    #[serde(rename = "hatT", default, skip_serializing_if = "Option::is_none")]
    hat_t: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "barR", default, skip_serializing_if = "Option::is_none")]
    bar_r: Option<f64>,
    #[serde(rename = "barS", default, skip_serializing_if = "Option::is_none")]
    bar_s: Option<Vec<Vec<f64>>>,
    #[serde(rename = "barC", default, skip_serializing_if = "Option::is_none")]
    bar_c: Option<Vec<Vec<Vec<Vec<f64>>>>>,
    #[serde(rename = "checkv", default, skip_serializing_if = "Option::is_none")]
    check_v: Option<Vec<f64>>,
    #[serde(rename = "checkT", default, skip_serializing_if = "Option::is_none")]
    check_t: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "checkH", default, skip_serializing_if = "Option::is_none")]
    check_h: Option<Vec<Vec<f64>>>,
}

pub fn weyl_to_json(c: &WeylTensor) -> Result<String> {
    let doc = WeylDoc {
        d: c.dim(),
        components: c
            .nonzero_entries()
            .into_iter()
            .map(|(idx, val)| ComponentDoc { idx, val })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn weyl_from_json(text: &str) -> Result<WeylTensor> {
    let doc: WeylDoc = serde_json::from_str(text)?;
    WeylTensor::from_entries(doc.d, doc.components.into_iter().map(|c| (c.idx, c.val)))
}

fn vec1(t: &Tensor<1>) -> Vec<f64> {
    t.as_slice().to_vec()
}

fn vec2(t: &Tensor<2>) -> Vec<Vec<f64>> {
    t.as_slice().chunks(t.n()).map(<[f64]>::to_vec).collect()
}

fn vec3(t: &Tensor<3>) -> Vec<Vec<Vec<f64>>> {
    let n = t.n();
    t.as_slice()
        .chunks(n * n)
        .map(|m| m.chunks(n).map(<[f64]>::to_vec).collect())
        .collect()
}

fn vec4(t: &Tensor<4>) -> Vec<Vec<Vec<Vec<f64>>>> {
    let n = t.n();
    t.as_slice()
        .chunks(n * n * n)
        .map(|c| {
            c.chunks(n * n)
                .map(|m| m.chunks(n).map(<[f64]>::to_vec).collect())
                .collect()
        })
        .collect()
}

fn shape_err(name: &str, n: usize) -> Error {
    Error::Config(format!("{name}: every axis must have length d - 2 = {n}"))
}

fn from1(name: &str, n: usize, v: Vec<f64>) -> Result<Tensor<1>> {
    if v.len() != n {
        return Err(shape_err(name, n));
    }
    Ok(Tensor::from_vec(v))
}

fn flatten<T>(
    name: &str,
    n: usize,
    rows: Vec<T>,
    mut inner: impl FnMut(T) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    if rows.len() != n {
        return Err(shape_err(name, n));
    }
    let mut flat = Vec::new();
    for r in rows {
        flat.extend(inner(r)?);
    }
    Ok(flat)
}

fn rows1(name: &str, n: usize, v: Vec<f64>) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(shape_err(name, n));
    }
    Ok(v)
}

fn fill<const R: usize>(n: usize, flat: Vec<f64>) -> Tensor<R> {
    let mut it = flat.into_iter();
    Tensor::from_fn(n, |_| it.next().expect("flattened length checked"))
}

fn from2(name: &str, n: usize, v: Vec<Vec<f64>>) -> Result<Tensor<2>> {
    Ok(fill(n, flatten(name, n, v, |r| rows1(name, n, r))?))
}

fn from3(name: &str, n: usize, v: Vec<Vec<Vec<f64>>>) -> Result<Tensor<3>> {
    let flat = flatten(name, n, v, |m| flatten(name, n, m, |r| rows1(name, n, r)))?;
    Ok(fill(n, flat))
}

fn from4(name: &str, n: usize, v: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Tensor<4>> {
    let flat = flatten(name, n, v, |c| {
        flatten(name, n, c, |m| flatten(name, n, m, |r| rows1(name, n, r)))
    })?;
    Ok(fill(n, flat))
}

pub fn parts_to_json(p: &IrreducibleParts) -> Result<String> {
    let higher = p.dim() > 4;
    let doc = PartsDoc {
        d: p.dim(),
        hat_h: Some(vec2(&p.hat_h)),
        hat_v: Some(vec1(&p.hat_v)),
        hat_t: higher.then(|| vec3(&p.hat_t)),
        a: Some(vec2(&p.a)),
        bar_r: Some(p.bar_r),
        bar_s: higher.then(|| vec2(&p.bar_s)),
        bar_c: higher.then(|| vec4(&p.bar_c)),
        check_v: Some(vec1(&p.check_v)),
        check_t: higher.then(|| vec3(&p.check_t)),
        check_h: Some(vec2(&p.check_h)),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn parts_from_json(text: &str) -> Result<IrreducibleParts> {
    let doc: PartsDoc = serde_json::from_str(text)?;
    let frame = FrameConvention::new(doc.d)?;
    let n = frame.transverse();
    let mut p = IrreducibleParts::zeros(frame);
    if let Some(v) = doc.hat_h {
        p.hat_h = from2("hatH", n, v)?;
    }
    if let Some(v) = doc.hat_v {
        p.hat_v = from1("hatv", n, v)?;
    }
    if let Some(v) = doc.hat_t {
        p.hat_t = from3("hatT", n, v)?;
    }
    if let Some(v) = doc.a {
        p.a = from2("A", n, v)?;
    }
    if let Some(v) = doc.bar_r {
        p.bar_r = v;
    }
    if let Some(v) = doc.bar_s {
        p.bar_s = from2("barS", n, v)?;
    }
    if let Some(v) = doc.bar_c {
        p.bar_c = from4("barC", n, v)?;
    }
    if let Some(v) = doc.check_v {
        p.check_v = from1("checkv", n, v)?;
    }
    if let Some(v) = doc.check_t {
        p.check_t = from3("checkT", n, v)?;
    }
    if let Some(v) = doc.check_h {
        p.check_h = from2("checkH", n, v)?;
    }
    Ok(p)
}
