//! File formats: function and set CSVs, set shorthands, Cayley specs,
//! hypergraph, system and witness dumps.

use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{CayleySpec, Payload};
use crate::error::{Error, Result};
use crate::function::{AdditiveSet, GroupFunction};
use crate::group::{quadratic_residues, FiniteAbelianGroup};
use crate::hypergraph::Hypergraph;
use crate::linear_systems::{is_s_normal_form, SystemCutRun, VarId};
use crate::norms::CutWitness;
use crate::sampling;
use crate::scalar::Scalar;
use crate::tensor::TensorView;

fn csv_reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let position = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { position, message: e.to_string() }
}

fn parse_index(text: &str, line: usize) -> Result<usize> {
    text.parse().map_err(|_| Error::Parse { position: line, message: format!("bad element index {text:?}") })
}

/// CSV with header `index,value`, one row per element.
pub fn read_function_csv<T: Scalar>(group: &FiniteAbelianGroup, text: &str) -> Result<GroupFunction<T>> {
    let mut reader = csv_reader(text, true);
    let header = reader.headers().map_err(csv_error)?;
    if header.len() != 2 || &header[0] != "index" || &header[1] != "value" {
        return Err(Error::Parse { position: 1, message: "expected header `index,value`".into() });
    }
    let mut values: Vec<Option<T>> = vec![None; group.order()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::Parse { position: line, message: "expected two columns".into() });
        }
        let x = group.check(parse_index(&record[0], line)?)?;
        if values[x].replace(T::parse_literal(&record[1])?).is_some() {
            return Err(Error::Parse { position: line, message: format!("element {x} given twice") });
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(x, v)| v.ok_or_else(|| Error::param(format!("no value for element {x}"))))
        .collect::<Result<Vec<T>>>()?;
    GroupFunction::new(group, values)
}

pub fn write_function_csv<T: Scalar>(f: &GroupFunction<T>) -> String {
    let mut out = String::from("index,value\n");
    for (x, v) in f.values().iter().enumerate() {
        out.push_str(&format!("{x},{v}\n"));
    }
    out
}

/// One member index per line.
pub fn read_set_csv(group: &FiniteAbelianGroup, text: &str) -> Result<AdditiveSet> {
    let mut members = Vec::new();
    for record in csv_reader(text, false).records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for field in record.iter().filter(|f| !f.is_empty()) {
            members.push(parse_index(field, line)?);
        }
    }
    AdditiveSet::new(group, members)
}

pub fn write_set_csv(set: &AdditiveSet) -> String {
    set.members().iter().map(|x| format!("{x}\n")).collect()
}

/// Resolves a set shorthand: `qr`, `@file`, `random:<density>`, `all`,
/// `empty`, or a comma-separated index list. Relative paths are taken from `base`.
pub fn resolve_set(group: &FiniteAbelianGroup, spec: &str, seed: u64, base: Option<&Path>) -> Result<AdditiveSet> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("qr") {
        if !group.is_cyclic() {
            return Err(Error::param("`qr` needs a cyclic group of prime order"));
        }
        return AdditiveSet::new(group, quadratic_residues(group.order() as u64)?);
    }
    if spec.eq_ignore_ascii_case("all") {
        return Ok(AdditiveSet::full(group));
    }
    if spec.eq_ignore_ascii_case("empty") || spec.is_empty() {
        return Ok(AdditiveSet::empty(group));
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(resolve_path(path, base))?;
        return read_set_csv(group, &text);
    }
    if let Some(density) = spec.strip_prefix("random:") {
        let p: f64 = density
            .parse()
            .map_err(|_| Error::Parse { position: 7, message: format!("bad density {density:?}") })?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("density {p} outside [0, 1]")));
        }
        let mut rng = sampling::rng(seed);
        let mask = group.elements().map(|_| rng.random_bool(p)).collect();
        return Ok(AdditiveSet::from_mask(group, mask));
    }
    let mut members = Vec::new();
    let mut position = 0;
    for part in spec.split(',') {
        members.push(parse_index(part.trim(), position)?);
        position += part.len() + 1;
    }
    AdditiveSet::new(group, members)
}

/// Resolves a function: `@file` (function CSV) or any set shorthand, taken as its balanced indicator.
pub fn resolve_function<T: Scalar>(
    group: &FiniteAbelianGroup,
    spec: &str,
    seed: u64,
    base: Option<&Path>,
) -> Result<GroupFunction<T>> {
    if let Some(path) = spec.trim().strip_prefix('@') {
        let text = std::fs::read_to_string(resolve_path(path, base))?;
        if text.trim_start().starts_with("index") {
            return read_function_csv(group, &text);
        }
    }
    Ok(GroupFunction::balanced_indicator(&resolve_set(group, spec, seed, base)?))
}

fn resolve_path(path: &str, base: Option<&Path>) -> PathBuf {
    let p = Path::new(path);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

/// `{"group":"Z7","k":3,"coeffs":[1,1,1],"set":"@file.csv"}`; missing `coeffs` means all ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleySpecFile {
    pub group: String,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<i64>>,
    pub set: String,
}

impl CayleySpecFile {
    pub fn resolve<T: Scalar>(&self, seed: u64, base: Option<&Path>) -> Result<CayleySpec<T>> {
        let group: FiniteAbelianGroup = self.group.parse()?;
        let set = resolve_set(&group, &self.set, seed, base)?;
        let payload = Payload::Set(set);
        match &self.coeffs {
            None => Ok(CayleySpec::classical(self.k, payload)),
            Some(c) if c.len() == self.k => Ok(CayleySpec::general(c.clone(), payload)),
            Some(c) => Err(Error::param(format!("{} coefficients given for k = {}", c.len(), self.k))),
        }
    }
}

/// Hypergraph dump, either a dense row-major array or a Cayley spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backing", rename_all = "lowercase")]
pub enum HypergraphDump {
    Dense { k: usize, vertices: usize, values: Vec<String> },
    Cayley { spec: CayleySpecFile },
}

impl HypergraphDump {
    pub fn dense<T: Scalar>(h: &Hypergraph<T>, cap: usize) -> Result<Self> {
        let tensor = h.to_tensor(cap)?;
        Ok(HypergraphDump::Dense {
            k: tensor.arity(),
            vertices: tensor.side(),
            values: tensor.data().iter().map(ToString::to_string).collect(),
        })
    }

    pub fn load<T: Scalar>(&self, seed: u64, base: Option<&Path>) -> Result<Hypergraph<T>> {
        match self {
            HypergraphDump::Dense { k, vertices, values } => {
                let data = values.iter().map(|v| T::parse_literal(v)).collect::<Result<Vec<T>>>()?;
                let weighted = data.iter().any(|v| !v.is_zero() && !v.is_one());
                Ok(Hypergraph::from_tensor(crate::tensor::DenseTensor::new(*k, *vertices, data)?, weighted))
            }
            HypergraphDump::Cayley { spec } => spec.resolve(seed, base)?.build(),
        }
    }
}

/// SystemCut run as JSON: each system a list of forms, each form a list of `[level,index]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDump {
    pub k: usize,
    pub d: usize,
    pub sf: usize,
    pub systems: Vec<Vec<Vec<VarId>>>,
    /// Per system `s >= 1`: a distinguishing subset for every form of `Phi_s + {Sigma}`.
    pub normal_form_witnesses: Vec<Vec<Option<Vec<VarId>>>>,
}

impl SystemDump {
    pub fn from_run(run: &SystemCutRun) -> Self {
        let systems = run
            .systems
            .iter()
            .map(|s| s.forms.iter().map(|f| f.support().to_vec()).collect())
            .collect();
        let normal_form_witnesses = run
            .systems
            .iter()
            .skip(1)
            .map(|s| is_s_normal_form(&s.with_sum_v0(), run.d).witnesses)
            .collect();
        SystemDump { k: run.k, d: run.d, sf: run.sf, systems, normal_form_witnesses }
    }
}

/// Packs bits LSB-first into bytes and encodes them in base64.
pub fn encode_bitmap(bits: &[bool]) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    BASE64.encode(bytes)
}

pub fn decode_bitmap(text: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| Error::Parse { position: 0, message: format!("bad base64 bitmap: {e}") })?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::param(format!("bitmap has {} bytes, expected {}", bytes.len(), len.div_ceil(8))));
    }
    Ok((0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

/// Cut witness with per-block membership bitmaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    pub k: usize,
    pub d: usize,
    pub vertices: usize,
    pub value: String,
    pub sign: i8,
    pub blocks: Vec<Vec<usize>>,
    pub sets: Vec<String>,
}

impl WitnessDump {
    pub fn from_witness<T: Scalar>(w: &CutWitness<T>) -> Self {
        WitnessDump {
            k: w.k,
            d: w.d,
            vertices: w.side,
            value: w.value.to_string(),
            sign: w.sign,
            blocks: w.blocks.clone(),
            sets: w.sets.iter().map(|s| encode_bitmap(s)).collect(),
        }
    }

    pub fn to_witness<T: Scalar>(&self) -> Result<CutWitness<T>> {
        let cells = crate::budget::cost_pow(self.vertices, self.d) as usize;
        Ok(CutWitness {
            k: self.k,
            d: self.d,
            side: self.vertices,
            blocks: self.blocks.clone(),
            sets: self.sets.iter().map(|s| decode_bitmap(s, cells)).collect::<Result<_>>()?,
            value: T::parse_literal(&self.value)?,
            sign: self.sign,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_systems::system_cut;
    use num_rational::BigRational;

    #[test]
    fn function_csv_round_trip() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let f: GroupFunction<BigRational> = read_function_csv(&g, "index,value\n2,1/3\n0,-0.5\n1,2\n").unwrap();
        assert_eq!(f.values()[0], BigRational::from_ratio(-1, 2));
        let back: GroupFunction<BigRational> = read_function_csv(&g, &write_function_csv(&f)).unwrap();
        assert_eq!(back.values(), f.values());
        assert!(read_function_csv::<f64>(&g, "index,value\n0,1\n").is_err());
        assert!(read_function_csv::<f64>(&g, "i,v\n0,1\n1,1\n2,1\n").is_err());
    }

    #[test]
    fn set_shorthands() {
        let g = FiniteAbelianGroup::cyclic(7).unwrap();
        assert_eq!(resolve_set(&g, "qr", 0, None).unwrap().members(), &[0, 1, 2, 4]);
        assert_eq!(resolve_set(&g, "3, 1", 0, None).unwrap().members(), &[1, 3]);
        assert_eq!(resolve_set(&g, "random:1", 5, None).unwrap().len(), 7);
        assert_eq!(resolve_set(&g, "random:0.5", 5, None).unwrap(), resolve_set(&g, "random:0.5", 5, None).unwrap());
        assert!(resolve_set(&g, "9", 0, None).is_err());
        let z6 = FiniteAbelianGroup::cyclic(6).unwrap();
        assert!(resolve_set(&z6, "qr", 0, None).is_err());
        assert_eq!(read_set_csv(&g, "0\n5\n").unwrap().members(), &[0, 5]);
    }

    #[test]
    fn cayley_spec_json() {
        let spec: CayleySpecFile = serde_json::from_str(r#"{"group":"Z7","k":3,"set":"qr"}"#).unwrap();
        let built: CayleySpec<f64> = spec.resolve(0, None).unwrap();
        assert!(built.is_classical());
        let bad: CayleySpecFile = serde_json::from_str(r#"{"group":"Z7","k":3,"coeffs":[1,2],"set":"qr"}"#).unwrap();
        assert!(bad.resolve::<f64>(0, None).is_err());
        let dump = HypergraphDump::Cayley { spec };
        let text = serde_json::to_string(&dump).unwrap();
        assert!(text.contains(r#""backing":"cayley""#));
        let h: Hypergraph<f64> = serde_json::from_str::<HypergraphDump>(&text).unwrap().load(0, None).unwrap();
        assert_eq!(h.value(&[1, 0, 0]), 1.0);
    }

    #[test]
    fn dense_dump_round_trip() {
        let h: Hypergraph<f64> = Hypergraph::from_indicator(2, 3, |x| x[0] == x[1]);
        let dump = HypergraphDump::dense(&h, 100).unwrap();
        let back: Hypergraph<f64> = dump.load(0, None).unwrap();
        assert_eq!(back.to_tensor(100).unwrap(), h.to_tensor(100).unwrap());
    }

    #[test]
    fn bitmaps_and_system_dump() {
        let bits = vec![true, false, true, true, false, false, false, false, true];
        assert_eq!(decode_bitmap(&encode_bitmap(&bits), bits.len()).unwrap(), bits);
        let dump = SystemDump::from_run(&system_cut(2, 1).unwrap());
        let text = serde_json::to_string(&dump).unwrap();
        assert!(text.contains("[[[0,1],[0,2]]]"));
        assert_eq!(dump.normal_form_witnesses.len(), 1);
        assert!(dump.normal_form_witnesses[0].iter().all(Option::is_some));
    }
}
