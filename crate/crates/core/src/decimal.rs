//! Serde helpers rendering big integers as decimal strings, so JSON
//! consumers never lose precision above 2^53.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    let text = String::deserialize(d)?;
    BigInt::from_str(&text).map_err(D::Error::custom)
}

pub mod pairs {
    use super::*;
    use crate::factorization::Offset;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Offset], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for o in v {
            seq.serialize_element(&[o.a.to_string(), o.b.to_string()])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Offset>, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        raw.into_iter()
            .map(|[a, b]| {
                Ok(Offset {
                    a: BigInt::from_str(&a).map_err(D::Error::custom)?,
                    b: BigInt::from_str(&b).map_err(D::Error::custom)?,
                })
            })
            .collect()
    }
}
