//! JSON form of chains: `{"dim": n, "terms": [{"coeff": "p/q", "vertices": [...]}]}`.
//! Affine vertices are arrays of rational strings; labels are plain strings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Chain, Point, Simplex};
use crate::error::{Error, Result};
use crate::rational;

pub trait VertexJson: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl VertexJson for Point {
    fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(|c| Value::String(rational::format(c))).collect())
    }

    fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse(format!("expected a coordinate array, got {v}")))?;
        arr.iter()
            .map(|c| match c {
                Value::String(s) => rational::parse(s),
                Value::Number(n) if n.is_i64() => Ok(rational::int(n.as_i64().expect("i64"))),
                other => Err(Error::Parse(format!("coordinates must be rational strings, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }
}

impl VertexJson for String {
    fn to_json(&self) -> Value {
        Value::String(self.clone())
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_str()
            .map(str::to_owned)
            .ok_or_else(|| Error::Parse(format!("expected a vertex label, got {v}")))
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TermJson {
    pub coeff: String,
    pub vertices: Vec<Value>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChainJson {
    pub dim: usize,
    pub terms: Vec<TermJson>,
}

impl<V: Ord + Clone + VertexJson> Chain<V> {
    pub fn to_json(&self) -> ChainJson {
        ChainJson {
            dim: self.dim(),
            terms: self
                .iter()
                .map(|(s, q)| TermJson {
                    coeff: rational::format(q),
                    vertices: s.vertices().iter().map(VertexJson::to_json).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ChainJson) -> Result<Self> {
        let mut c = Chain::zero(j.dim);
        for t in &j.terms {
            let verts = t.vertices.iter().map(V::from_json).collect::<Result<Vec<_>>>()?;
            if verts.len() != j.dim + 1 {
                return Err(Error::Parse(format!(
                    "simplex with {} vertices in a chain of dimension {}",
                    verts.len(),
                    j.dim
                )));
            }
            c.add_term(Simplex(verts), rational::parse(&t.coeff)?)?;
        }
        Ok(c)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("chain json")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ChainJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn affine_round_trip_is_bit_exact() {
        let mut c = Chain::zero(1);
        c.add_term(
            Simplex(vec![Point(vec![ratio(1, 3), ratio(-2, 7)]), Point(vec![ratio(5, 1), ratio(0, 1)])]),
            ratio(-9, 4),
        )
        .unwrap();
        let text = c.to_json_string();
        let back = Chain::<Point>::from_json_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json_string(), text);
        assert!(text.contains("\"-9/4\""));
    }

    #[test]
    fn rejects_wrong_vertex_count() {
        let text = r#"{"dim": 1, "terms": [{"coeff": "1", "vertices": [["0"]]}]}"#;
        assert!(Chain::<Point>::from_json_str(text).is_err());
    }
}
