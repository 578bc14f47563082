//! Integers that may leave the 53-bit safe range travel as decimal strings.

use std::fmt::Display;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    let text = String::deserialize(d)?;
    text.parse().map_err(D::Error::custom)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<i64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<i64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(D::Error::custom))
            .transpose()
    }
}

pub mod map {
    use std::collections::BTreeMap;

    use super::*;
    use serde::ser::SerializeMap;

    pub fn serialize<T: Display, S: Serializer>(
        v: &BTreeMap<String, T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(v.len()))?;
        for (k, x) in v {
            m.serialize_entry(k, &x.to_string())?;
        }
        m.end()
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<BTreeMap<String, T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, t)| Ok((k, t.parse().map_err(D::Error::custom)?)))
            .collect()
    }
}

pub mod map_vec {
    use std::collections::BTreeMap;

    use super::*;
    use serde::ser::SerializeMap;

    pub fn serialize<S: Serializer>(
        v: &BTreeMap<String, Vec<i64>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(v.len()))?;
        for (k, xs) in v {
            let xs: Vec<String> = xs.iter().map(i64::to_string).collect();
            m.serialize_entry(k, &xs)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Vec<i64>>, D::Error> {
        BTreeMap::<String, Vec<String>>::deserialize(d)?
            .into_iter()
            .map(|(k, ts)| {
                let xs = ts
                    .iter()
                    .map(|t| t.parse().map_err(D::Error::custom))
                    .collect::<Result<_, _>>()?;
                Ok((k, xs))
            })
            .collect()
    }
}
