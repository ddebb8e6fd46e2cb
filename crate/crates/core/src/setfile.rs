//! Reading and writing state sets.
//!
//! Text format, one member per line:
//!
//! ```text
//! # comment
//! name: pauli pairs
//! factors: 2, 2
//! X^0 Z^0 | X^1 Z^0
//! X^1 Z^1 | X^1 Z^0
//! ```
//!
//! A factor is written as `X^s Z^t`; either token may be omitted (exponent 0),
//! `X`/`Z` alone mean exponent 1 and `I` is the identity. The `factors:` line
//! may be replaced by a caller-supplied structure; `name:` is optional.
//!
//! JSON formats:
//! - labels: `{"factors":[d1,...],"members":[[[s,t],...],...]}`
//! - matrices: `{"members":[{"rows":r,"cols":c,"entries":[[re,im],...]},...]}`
//! - product states: `{"dim":d,"states":[{"alice":[[re,im],...],"bob":[[re,im],...]},...]}`

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constructions::ProductStateSet;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixJson, StateVector, C64};
use crate::weyl::{MesMembers, MesSet, WeylLabel, WeylStructure};

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum LoadedSet {
    Mes(MesSet),
    Product(ProductStateSet),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabelSetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub factors: Vec<u32>,
    pub members: Vec<Vec<[i64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixSetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Tensor ordering of the local space, informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<String>>,
    pub members: Vec<MatrixJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductStateJson {
    pub alice: Vec<[f64; 2]>,
    pub bob: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductSetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub states: Vec<ProductStateJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnySetJson {
    Labels(LabelSetJson),
    Product(ProductSetJson),
    Matrices(MatrixSetJson),
}

fn parse_exponent(tok: &str, line: usize) -> Result<i64> {
    tok.parse::<i64>().map_err(|_| Error::Parse { line, msg: format!("bad exponent '{tok}'") })
}

fn parse_factor(text: &str, line: usize) -> Result<(i64, i64)> {
    let (mut s, mut t) = (0i64, 0i64);
    let (mut seen_x, mut seen_z) = (false, false);
    for tok in text.split_whitespace() {
        let (base, exp) = match tok.split_once('^') {
            Some((b, e)) => (b, parse_exponent(e, line)?),
            None => (tok, 1),
        };
        match base {
            "X" if !seen_x => {
                s = exp;
                seen_x = true;
            }
            "Z" if !seen_z => {
                t = exp;
                seen_z = true;
            }
            "I" if exp == 1 => {}
            "X" | "Z" => return Err(Error::Parse { line, msg: format!("repeated '{base}' in factor '{text}'") }),
            _ => return Err(Error::Parse { line, msg: format!("unexpected token '{tok}'") }),
        }
    }
    if !text.split_whitespace().any(|_| true) {
        return Err(Error::Parse { line, msg: "empty factor".into() });
    }
    Ok((s, t))
}

fn parse_factors_header(rest: &str, line: usize) -> Result<Vec<u32>> {
    rest.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| Error::Parse { line, msg: format!("bad factor order '{s}'") }))
        .collect()
}

/// Parses the text format. `factors` supplies the structure when the text has
/// no `factors:` line; if both are present they must agree.
pub fn parse_label_text(text: &str, factors: Option<&[u32]>) -> Result<MesSet> {
    let mut header: Option<Vec<u32>> = None;
    let mut name: Option<String> = None;
    let mut rows: Vec<(usize, Vec<(i64, i64)>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("factors:") {
            if header.is_some() {
                return Err(Error::Parse { line, msg: "duplicate 'factors:' line".into() });
            }
            header = Some(parse_factors_header(rest, line)?);
            continue;
        }
        if let Some(rest) = content.strip_prefix("name:") {
            if name.is_some() {
                return Err(Error::Parse { line, msg: "duplicate 'name:' line".into() });
            }
            name = Some(rest.trim().to_string());
            continue;
        }
        let pairs = content.split('|').map(|f| parse_factor(f, line)).collect::<Result<Vec<_>>>()?;
        rows.push((line, pairs));
    }
    let factors = match (header, factors) {
        (Some(h), Some(f)) if h != f => return Err(Error::StructureMismatch(h, f.to_vec())),
        (Some(h), _) => h,
        (None, Some(f)) => f.to_vec(),
        (None, None) => {
            return Err(Error::invalid("factor orders unknown: add a 'factors:' line or pass the dimension"))
        }
    };
    let structure = WeylStructure::new(factors)?;
    let mut labels = Vec::with_capacity(rows.len());
    for (line, pairs) in rows {
        if pairs.len() != structure.factors().len() {
            return Err(Error::Parse {
                line,
                msg: format!("{} factors on this line, structure has {}", pairs.len(), structure.factors().len()),
            });
        }
        labels.push(structure.label(&pairs).map_err(|e| Error::Parse { line, msg: e.to_string() })?);
    }
    if labels.is_empty() {
        return Err(Error::invalid("set has no members"));
    }
    let set = MesSet::from_labels(structure, labels)?;
    Ok(match name {
        Some(n) => set.named(n),
        None => set,
    })
}

fn amps_from_json(v: &[[f64; 2]]) -> StateVector {
    StateVector::new(v.iter().map(|e| C64::new(e[0], e[1])).collect())
}

fn amps_to_json(v: &StateVector) -> Vec<[f64; 2]> {
    v.amps.iter().map(|z| [z.re, z.im]).collect()
}

/// Parses any of the JSON formats.
pub fn parse_set_json(text: &str) -> Result<LoadedSet> {
    match serde_json::from_str::<AnySetJson>(text)? {
        AnySetJson::Labels(j) => {
            let structure = WeylStructure::new(j.factors)?;
            let labels = j
                .members
                .iter()
                .map(|m| structure.label(&m.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            if labels.is_empty() {
                return Err(Error::invalid("set has no members"));
            }
            let set = MesSet::from_labels(structure, labels)?;
            Ok(LoadedSet::Mes(match j.name {
                Some(n) => set.named(n),
                None => set,
            }))
        }
        AnySetJson::Matrices(j) => {
            let mats = j.members.iter().map(ComplexMatrix::from_json).collect::<Result<Vec<_>>>()?;
            let set = MesSet::from_matrices(mats, UNITARY_TOL)?;
            Ok(LoadedSet::Mes(match j.name {
                Some(n) => set.named(n),
                None => set,
            }))
        }
        AnySetJson::Product(j) => {
            for (i, s) in j.states.iter().enumerate() {
                if s.alice.is_empty() || s.bob.is_empty() {
                    return Err(Error::invalid(format!("product state {i} is empty")));
                }
            }
            let pairs = j.states.iter().map(|s| (amps_from_json(&s.alice), amps_from_json(&s.bob))).collect();
            let set = ProductStateSet::new(j.dim, pairs)?;
            Ok(LoadedSet::Product(match j.name {
                Some(n) => set.named(n),
                None => set,
            }))
        }
    }
}

/// Reads a set file, choosing JSON when the first non-blank character is `{`.
pub fn load_set(path: &Path, factors: Option<&[u32]>) -> Result<LoadedSet> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        parse_set_json(&text)
    } else {
        parse_label_text(&text, factors).map(LoadedSet::Mes)
    }
}

pub fn label_set_json(set: &MesSet) -> Result<LabelSetJson> {
    let (structure, labels) = set.labels().ok_or_else(|| Error::invalid("set is not label-backed"))?;
    Ok(LabelSetJson {
        name: set.name.clone(),
        factors: structure.factors().to_vec(),
        members: labels.iter().map(|l| l.pairs().iter().map(|&(s, t)| [s as i64, t as i64]).collect()).collect(),
    })
}

pub fn matrix_set_json(set: &MesSet, ordering: Option<Vec<String>>) -> MatrixSetJson {
    MatrixSetJson { name: set.name.clone(), ordering, members: set.unitaries().iter().map(|u| u.to_json()).collect() }
}

pub fn product_set_json(set: &ProductStateSet) -> ProductSetJson {
    ProductSetJson {
        name: set.name.clone(),
        dim: set.dim,
        states: set
            .pairs
            .iter()
            .map(|(a, b)| ProductStateJson { alice: amps_to_json(a), bob: amps_to_json(b) })
            .collect(),
    }
}

/// JSON in the natural format for the set's backing.
pub fn export_json(set: &LoadedSet) -> Result<String> {
    let out = match set {
        LoadedSet::Mes(m) => match &m.members {
            MesMembers::Labels { .. } => serde_json::to_string_pretty(&label_set_json(m)?)?,
            MesMembers::Matrices { .. } => serde_json::to_string_pretty(&matrix_set_json(m, None))?,
        },
        LoadedSet::Product(p) => serde_json::to_string_pretty(&product_set_json(p))?,
    };
    Ok(out)
}

fn label_line(l: &WeylLabel) -> String {
    l.to_string()
}

/// Text format with a `factors:` header.
pub fn export_text(set: &MesSet) -> Result<String> {
    let (structure, labels) = set.labels().ok_or_else(|| Error::invalid("text export needs a label-backed set"))?;
    let mut out = String::new();
    if let Some(n) = &set.name {
        out.push_str(&format!("name: {n}\n"));
    }
    let f: Vec<String> = structure.factors().iter().map(|d| d.to_string()).collect();
    out.push_str(&format!("factors: {}\n", f.join(", ")));
    for l in labels {
        out.push_str(&label_line(l));
        out.push('\n');
    }
    Ok(out)
}
