//! JSON market files.
//!
//! ```json
//! { "n": 2,
//!   "U": [[0, "-2"], [1, 0]],
//!   "V": [["0", -2], [1, "0/1"]],
//!   "labels": { "men": ["a", "b"], "women": ["c", "d"] } }
//! ```
//!
//! Ordinal markets give `men_prefs` / `women_prefs` as 1-based
//! permutations, best first. Entries of `U` and `V` may be integers,
//! decimals with at most six fractional digits, or `"p/q"` strings; output
//! always uses the canonical string form.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::market::{represents, CardinalMarket, Matrix, OrdinalMarket};
use crate::rational::{serde_text, to_text};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub men: Vec<String>,
    pub women: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarketData {
    Cardinal(CardinalMarket),
    Ordinal(OrdinalMarket),
    /// Both utilities and preference lists were given (and agree).
    Both(CardinalMarket, OrdinalMarket),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketDoc {
    pub data: MarketData,
    pub labels: Option<Labels>,
}

impl MarketDoc {
    pub fn n(&self) -> usize {
        match &self.data {
            MarketData::Cardinal(m) | MarketData::Both(m, _) => m.n(),
            MarketData::Ordinal(o) => o.n(),
        }
    }

    pub fn cardinal(&self) -> Option<&CardinalMarket> {
        match &self.data {
            MarketData::Cardinal(m) | MarketData::Both(m, _) => Some(m),
            MarketData::Ordinal(_) => None,
        }
    }

    pub fn ordinal(&self) -> Option<&OrdinalMarket> {
        match &self.data {
            MarketData::Ordinal(o) | MarketData::Both(_, o) => Some(o),
            MarketData::Cardinal(_) => None,
        }
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidMarket(msg)
}

fn read_matrix(doc: &Map<String, Value>, field: &str, n: usize) -> Result<Matrix> {
    let rows = doc
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| bad(format!("field `{field}` must be an array of rows")))?;
    if rows.len() != n {
        return Err(bad(format!(
            "field `{field}` has {} rows, expected n = {n}",
            rows.len()
        )));
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| bad(format!("`{field}[{}]` must be an array", r + 1)))?;
            if row.len() != n {
                return Err(bad(format!(
                    "`{field}[{}]` has {} entries, expected n = {n} (unequal sides are not supported)",
                    r + 1,
                    row.len()
                )));
            }
            row.iter()
                .enumerate()
                .map(|(c, x)| {
                    serde_text::from_json(x).map_err(|e| bad(format!("`{field}[{}][{}]`: {e}", r + 1, c + 1)))
                })
                .collect()
        })
        .collect()
}

fn read_prefs(doc: &Map<String, Value>, field: &str, n: usize) -> Result<Vec<Vec<usize>>> {
    let lists: Vec<Vec<usize>> = serde_json::from_value(doc.get(field).cloned().unwrap_or(Value::Null))
        .map_err(|e| bad(format!("field `{field}` must be a list of 1-based index lists: {e}")))?;
    if lists.len() != n {
        return Err(bad(format!(
            "field `{field}` has {} lists, expected n = {n}",
            lists.len()
        )));
    }
    lists
        .into_iter()
        .enumerate()
        .map(|(a, list)| {
            list.into_iter()
                .map(|x| {
                    x.checked_sub(1)
                        .ok_or_else(|| bad(format!("`{field}[{}]` uses 0; indices are 1-based", a + 1)))
                })
                .collect()
        })
        .collect()
}

/// Parses a market document. Error messages name the offending field.
pub fn parse_market(text: &str) -> Result<MarketDoc> {
    let value: Value = serde_json::from_str(text).map_err(|e| bad(format!("not valid JSON: {e}")))?;
    let doc = value
        .as_object()
        .ok_or_else(|| bad("top level must be an object".into()))?;
    let n = doc
        .get("n")
        .and_then(Value::as_u64)
        .filter(|&n| n >= 1)
        .ok_or_else(|| bad("field `n` must be a positive integer".into()))? as usize;
    let has_cardinal = doc.contains_key("U") || doc.contains_key("V");
    let has_ordinal = doc.contains_key("men_prefs") || doc.contains_key("women_prefs");
    let cardinal = if has_cardinal {
        Some(CardinalMarket::new(
            read_matrix(doc, "U", n)?,
            read_matrix(doc, "V", n)?,
        )?)
    } else {
        None
    };
    let ordinal = if has_ordinal {
        Some(OrdinalMarket::new(
            read_prefs(doc, "men_prefs", n)?,
            read_prefs(doc, "women_prefs", n)?,
        )?)
    } else {
        None
    };
    let data = match (cardinal, ordinal) {
        (Some(c), Some(o)) => {
            if !represents(&c, &o) {
                return Err(bad("`U`/`V` do not represent `men_prefs`/`women_prefs`".into()));
            }
            MarketData::Both(c, o)
        }
        (Some(c), None) => MarketData::Cardinal(c),
        (None, Some(o)) => MarketData::Ordinal(o),
        (None, None) => return Err(bad("need `U` and `V`, or `men_prefs` and `women_prefs`".into())),
    };
    let labels = match doc.get("labels") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let labels: Labels = serde_json::from_value(v.clone()).map_err(|e| bad(format!("field `labels`: {e}")))?;
            if labels.men.len() != n || labels.women.len() != n {
                return Err(bad(format!("field `labels` must name {n} men and {n} women")));
            }
            Some(labels)
        }
    };
    Ok(MarketDoc { data, labels })
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        m.iter()
            .map(|r| Value::Array(r.iter().map(|x| Value::String(to_text(x))).collect()))
            .collect(),
    )
}

fn prefs_json(lists: &[Vec<usize>]) -> Value {
    json!(lists
        .iter()
        .map(|l| l.iter().map(|x| x + 1).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

/// Serializes a cardinal market, optionally with its ordinal reading,
/// labels and a provenance object describing how it was produced.
pub fn market_json(
    market: &CardinalMarket,
    ordinal: Option<&OrdinalMarket>,
    labels: Option<&Labels>,
    provenance: Option<Value>,
) -> Value {
    let mut doc = Map::new();
    if let Some(p) = provenance {
        doc.insert("provenance".into(), p);
    }
    doc.insert("n".into(), json!(market.n()));
    doc.insert("U".into(), matrix_json(market.u_matrix()));
    doc.insert("V".into(), matrix_json(market.v_matrix()));
    if let Some(o) = ordinal {
        doc.insert("men_prefs".into(), prefs_json(o.men_prefs()));
        doc.insert("women_prefs".into(), prefs_json(o.women_prefs()));
    }
    if let Some(l) = labels {
        doc.insert("labels".into(), json!(l));
    }
    Value::Object(doc)
}

pub fn ordinal_json(market: &OrdinalMarket, labels: Option<&Labels>) -> Value {
    let mut doc = Map::new();
    doc.insert("n".into(), json!(market.n()));
    doc.insert("men_prefs".into(), prefs_json(market.men_prefs()));
    doc.insert("women_prefs".into(), prefs_json(market.women_prefs()));
    if let Some(l) = labels {
        doc.insert("labels".into(), json!(l));
    }
    Value::Object(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rational::frac;

    #[test]
    fn round_trip_keeps_exact_values() {
        let m = examples::no_weight_repair();
        let text = market_json(&m, None, None, None).to_string();
        assert_eq!(parse_market(&text).unwrap().cardinal(), Some(&m));
    }

    #[test]
    fn mixed_literals() {
        let doc = parse_market(r#"{"n":1,"U":[[0.125]],"V":[["-3/6"]]}"#).unwrap();
        let m = doc.cardinal().unwrap();
        assert_eq!(m.u(0, 0), &frac(1, 8));
        assert_eq!(m.v(0, 0), &frac(-1, 2));
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_market(r#"{"n":2,"U":[[0,1],[1]],"V":[[0,0],[0,0]]}"#).unwrap_err();
        assert!(e.to_string().contains("`U[2]`"), "{e}");
        let e = parse_market(r#"{"n":1,"U":[[0.1234567]],"V":[[0]]}"#).unwrap_err();
        assert!(e.to_string().contains("`U[1][1]`"), "{e}");
        let e = parse_market(r#"{"n":2,"men_prefs":[[1,2],[0,1]],"women_prefs":[[1,2],[2,1]]}"#).unwrap_err();
        assert!(e.to_string().contains("men_prefs"), "{e}");
    }

    #[test]
    fn ordinal_documents() {
        let doc = parse_market(r#"{"n":2,"men_prefs":[[2,1],[1,2]],"women_prefs":[[1,2],[2,1]]}"#).unwrap();
        let o = doc.ordinal().unwrap();
        assert_eq!(o.men_prefs()[0], vec![1, 0]);
        assert_eq!(parse_market(&ordinal_json(o, None).to_string()).unwrap(), doc);
    }
}
