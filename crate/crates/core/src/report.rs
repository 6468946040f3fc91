//! Serde helpers shared by reports: rationals as canonical strings and
//! agent indices shifted to the 1-based labels used in market files.

use serde::ser::{SerializeSeq, Serializer};

use crate::market::{FractionalMatching, Matching, Matrix};
use crate::rational::{to_text, Rational};

pub fn ser_rational<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_text(value))
}

pub fn ser_vec<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        seq.serialize_element(&to_text(v))?;
    }
    seq.end()
}

pub fn ser_opt_vec<S: Serializer>(values: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match values {
        Some(v) => ser_vec(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_matrix<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(to_text).collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

pub fn ser_lottery<S: Serializer>(pi: &FractionalMatching, s: S) -> Result<S::Ok, S::Error> {
    ser_matrix(pi.matrix(), s)
}

pub fn ser_index<S: Serializer>(index: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*index as u64 + 1)
}

pub fn ser_indices<S: Serializer>(indices: &[usize], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(indices.len()))?;
    for i in indices {
        seq.serialize_element(&(i + 1))?;
    }
    seq.end()
}

pub fn ser_matching<S: Serializer>(m: &Matching, s: S) -> Result<S::Ok, S::Error> {
    ser_indices(m.as_slice(), s)
}

pub fn ser_matchings<S: Serializer>(ms: &[Matching], s: S) -> Result<S::Ok, S::Error> {
    let lists: Vec<Vec<usize>> = ms.iter().map(|m| m.one_based()).collect();
    serde::Serialize::serialize(&lists, s)
}

pub fn ser_opt_rational<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_str(&to_text(v)),
        None => s.serialize_none(),
    }
}
