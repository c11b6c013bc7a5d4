//! Basic vocabulary shared by every module: term names, timestamps and
//! typed literal values.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A schema term written as `namespace#local`.
///
/// A bare `local` is shorthand for `local#local`, so `person` and
/// `person#person` name the same class. Both parts start with a lowercase
/// ASCII letter followed by ASCII letters or digits. Comparison is
/// case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermName {
    /// Always the full `namespace#local` form. Ordering matches ordering by
    /// (namespace, local) because `#` sorts below every allowed character.
    full: String,
    split: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid term name `{0}`: expected `namespace#local` with parts matching [a-z][A-Za-z0-9]*")]
pub struct InvalidTerm(pub String);

fn valid_part(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric())
}

impl TermName {
    pub fn new(namespace: &str, local: &str) -> Result<Self, InvalidTerm> {
        if valid_part(namespace) && valid_part(local) {
            Ok(TermName {
                full: format!("{namespace}#{local}"),
                split: namespace.len(),
            })
        } else {
            Err(InvalidTerm(format!("{namespace}#{local}")))
        }
    }

    pub fn parse(s: &str) -> Result<Self, InvalidTerm> {
        match s.split_once('#') {
            Some((ns, local)) => Self::new(ns, local).map_err(|_| InvalidTerm(s.to_owned())),
            None => Self::new(s, s).map_err(|_| InvalidTerm(s.to_owned())),
        }
    }

    pub fn namespace(&self) -> &str {
        &self.full[..self.split]
    }

    pub fn local(&self) -> &str {
        &self.full[self.split + 1..]
    }

    /// True when the written form was (or can be) a bare local name.
    pub fn is_bare(&self) -> bool {
        self.namespace() == self.local()
    }
}

impl fmt::Display for TermName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bare() {
            f.write_str(self.local())
        } else {
            f.write_str(&self.full)
        }
    }
}

impl FromStr for TermName {
    type Err = InvalidTerm;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for TermName {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TermName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TermName::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Naive (zone-less) instant with one-second resolution, written
/// `YYYY-MM-DDTHH:MM:SS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(NaiveDateTime);

const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp `{0}`: expected YYYY-MM-DDTHH:MM:SS")]
pub struct InvalidTimestamp(pub String);

impl Timestamp {
    pub fn parse(s: &str) -> Result<Self, InvalidTimestamp> {
        NaiveDateTime::parse_from_str(s.trim(), TS_FORMAT)
            .map(Timestamp)
            .map_err(|_| InvalidTimestamp(s.to_owned()))
    }

    /// Seconds since 1970-01-01T00:00:00.
    pub fn from_epoch_seconds(secs: i64) -> Self {
        Timestamp(
            chrono::DateTime::from_timestamp(secs, 0)
                .expect("timestamp in range")
                .naive_utc(),
        )
    }

    pub fn epoch_seconds(&self) -> i64 {
        self.0.and_utc().timestamp()
    }

    pub fn plus_seconds(&self, secs: i64) -> Self {
        Timestamp(self.0 + chrono::TimeDelta::seconds(secs))
    }

    pub fn since(&self, earlier: Timestamp) -> chrono::TimeDelta {
        self.0 - earlier.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(TS_FORMAT))
    }
}

impl FromStr for Timestamp {
    type Err = InvalidTimestamp;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Declared type of a data property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Text,
    Integer,
    Real,
    Boolean,
    Datetime,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Text => "text",
            ValueType::Integer => "integer",
            ValueType::Real => "real",
            ValueType::Boolean => "boolean",
            ValueType::Datetime => "datetime",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Real)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A literal or an individual reference.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Datetime(Timestamp),
    /// Object of a relation fact.
    Individual(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{literal}` is not a valid {expected} literal")]
pub struct LiteralError {
    pub literal: String,
    pub expected: ValueType,
}

impl Value {
    /// Parses `literal` according to `ty`. Reals accept integer spellings.
    pub fn parse_as(literal: &str, ty: ValueType) -> Result<Value, LiteralError> {
        let err = || LiteralError {
            literal: literal.to_owned(),
            expected: ty,
        };
        Ok(match ty {
            ValueType::Text => Value::Text(literal.to_owned()),
            ValueType::Integer => Value::Integer(literal.trim().parse().map_err(|_| err())?),
            ValueType::Real => {
                let x: f64 = literal.trim().parse().map_err(|_| err())?;
                if !x.is_finite() {
                    return Err(err());
                }
                Value::Real(x)
            }
            ValueType::Boolean => Value::Boolean(literal.trim().parse().map_err(|_| err())?),
            ValueType::Datetime => Value::Datetime(Timestamp::parse(literal).map_err(|_| err())?),
        })
    }

    pub fn value_type(&self) -> Option<ValueType> {
        match self {
            Value::Text(_) => Some(ValueType::Text),
            Value::Integer(_) => Some(ValueType::Integer),
            Value::Real(_) => Some(ValueType::Real),
            Value::Boolean(_) => Some(ValueType::Boolean),
            Value::Datetime(_) => Some(ValueType::Datetime),
            Value::Individual(_) => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_individual(&self) -> Option<&str> {
        match self {
            Value::Individual(id) => Some(id),
            _ => None,
        }
    }
}

/// Lexical form; reals use the shortest spelling that parses back to the
/// same bits and always carry a decimal point.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) | Value::Individual(s) => f.write_str(s),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x:?}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Datetime(t) => write!(f, "{t}"),
        }
    }
}

/// Individual identifiers: ASCII letters, digits, `_`, `-` and `.`.
pub fn valid_individual_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_term_collapses() {
        let t = TermName::parse("person").unwrap();
        assert_eq!(t, TermName::parse("person#person").unwrap());
        assert_eq!(t.to_string(), "person");
        let d = TermName::parse("person#daughter").unwrap();
        assert_eq!(d.namespace(), "person");
        assert_eq!(d.local(), "daughter");
        assert_eq!(d.to_string(), "person#daughter");
    }

    #[test]
    fn term_syntax() {
        assert!(TermName::parse("hasMood").is_ok());
        assert!(TermName::parse("").is_err());
        assert!(TermName::parse("Person").is_err());
        assert!(TermName::parse("a#").is_err());
        assert!(TermName::parse("1abc").is_err());
        assert!(TermName::parse("a#b#c").is_err());
        assert_ne!(TermName::parse("hasmood"), TermName::parse("hasMood"));
        let t = |s| TermName::parse(s).unwrap();
        assert!(t("a#z") < t("ab#a"));
        assert!(t("a#b") < t("a#ba"));
    }

    #[test]
    fn timestamp_round_trip() {
        let t = Timestamp::parse("2013-09-18T14:00:00").unwrap();
        assert_eq!(t.to_string(), "2013-09-18T14:00:00");
        assert_eq!(Timestamp::from_epoch_seconds(t.epoch_seconds()), t);
        assert!(Timestamp::parse("2013-09-18 14:00").is_err());
        assert_eq!(t.plus_seconds(1200).since(t).num_minutes(), 20);
    }

    #[test]
    fn literals() {
        assert_eq!(Value::parse_as("55", ValueType::Real).unwrap(), Value::Real(55.0));
        assert_eq!(Value::Real(100.0).to_string(), "100.0");
        assert_eq!(Value::Real(0.1 + 0.2).to_string(), "0.30000000000000004");
        assert!(Value::parse_as("abc", ValueType::Real).is_err());
        assert!(Value::parse_as("inf", ValueType::Real).is_err());
        assert!(Value::parse_as("1.5", ValueType::Integer).is_err());
        assert_eq!(
            Value::parse_as("true", ValueType::Boolean).unwrap(),
            Value::Boolean(true)
        );
    }
}
