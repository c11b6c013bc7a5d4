//! Units of measure and quality-of-context checks.
//!
//! Every unit maps onto the canonical unit of its dimension through an
//! affine transform `canonical = scale * x + offset`. Temperature needs the
//! offset; every other built-in dimension is purely linear.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::issue::Issue;
use crate::store::{AnnotatedValue, QoC};
use crate::term::Value;

/// Two canonical magnitudes closer than this compare equal.
pub const EQUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDef {
    pub name: String,
    pub dimension: String,
    pub scale: f64,
    pub offset: f64,
}

impl UnitDef {
    pub fn new(name: &str, dimension: &str, scale: f64, offset: f64) -> Self {
        UnitDef {
            name: name.to_owned(),
            dimension: dimension.to_owned(),
            scale,
            offset,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.scale == 1.0 && self.offset == 0.0
    }

    pub fn to_canonical(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn from_canonical(&self, c: f64) -> f64 {
        (c - self.offset) / self.scale
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("unit `{0}` is already registered")]
    DuplicateUnit(String),
    #[error("unit `{0}` has a zero or non-finite scale")]
    ZeroScale(String),
    #[error("unit `{0}` has a non-finite offset")]
    InvalidOffset(String),
    #[error(
        "dimension `{dimension}` has no canonical unit yet; register one with scale 1 and offset 0 before `{unit}`"
    )]
    NoCanonicalUnit { dimension: String, unit: String },
    #[error("dimension `{dimension}` already has canonical unit `{existing}`")]
    DuplicateCanonical { dimension: String, existing: String },
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("cannot relate {from} ({from_dim}) to {to} ({to_dim})")]
    DimensionMismatch {
        from: String,
        from_dim: String,
        to: String,
        to_dim: String,
    },
    #[error("values of kinds {0} and {1} are not comparable")]
    Incomparable(String, String),
}

impl UnitError {
    pub fn kind(&self) -> &'static str {
        match self {
            UnitError::DuplicateUnit(_) => "DuplicateUnit",
            UnitError::ZeroScale(_) => "ZeroScale",
            UnitError::InvalidOffset(_) => "InvalidOffset",
            UnitError::NoCanonicalUnit { .. } => "NoCanonicalUnit",
            UnitError::DuplicateCanonical { .. } => "DuplicateCanonical",
            UnitError::UnknownUnit(_) => "UnknownUnit",
            UnitError::DimensionMismatch { .. } => "DimensionMismatch",
            UnitError::Incomparable(..) => "Incomparable",
        }
    }
}

/// Unit names are matched case-insensitively (`Fahrenheit` and
/// `fahrenheit` are the same unit).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnitRegistry {
    units: BTreeMap<String, UnitDef>,
    canonical: BTreeMap<String, String>,
}

impl UnitRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_unit(&mut self, def: UnitDef) -> Result<(), UnitError> {
        let key = def.name.to_lowercase();
        if self.units.contains_key(&key) {
            return Err(UnitError::DuplicateUnit(def.name));
        }
        if def.scale == 0.0 || !def.scale.is_finite() {
            return Err(UnitError::ZeroScale(def.name));
        }
        if !def.offset.is_finite() {
            return Err(UnitError::InvalidOffset(def.name));
        }
        match (self.canonical.get(&def.dimension), def.is_canonical()) {
            (Some(existing), true) => {
                return Err(UnitError::DuplicateCanonical {
                    dimension: def.dimension,
                    existing: existing.clone(),
                })
            }
            (None, false) => {
                return Err(UnitError::NoCanonicalUnit {
                    dimension: def.dimension,
                    unit: def.name,
                })
            }
            (None, true) => {
                self.canonical.insert(def.dimension.clone(), key.clone());
            }
            (Some(_), false) => {}
        }
        self.units.insert(key, def);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&UnitDef, UnitError> {
        self.units
            .get(&name.to_lowercase())
            .ok_or_else(|| UnitError::UnknownUnit(name.to_owned()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.units.contains_key(&name.to_lowercase())
    }

    pub fn canonical_unit(&self, dimension: &str) -> Option<&UnitDef> {
        self.canonical.get(dimension).map(|k| &self.units[k])
    }

    /// Units ordered by dimension, canonical unit first, then by name.
    pub fn units(&self) -> Vec<&UnitDef> {
        let mut v: Vec<&UnitDef> = self.units.values().collect();
        v.sort_by(|a, b| {
            (&a.dimension, !a.is_canonical(), a.name.to_lowercase()).cmp(&(
                &b.dimension,
                !b.is_canonical(),
                b.name.to_lowercase(),
            ))
        });
        v
    }

    pub fn convert(&self, value: f64, from: &str, to: &str) -> Result<f64, UnitError> {
        let (f, t) = (self.get(from)?, self.get(to)?);
        if f.dimension != t.dimension {
            return Err(UnitError::DimensionMismatch {
                from: f.name.clone(),
                from_dim: f.dimension.clone(),
                to: t.name.clone(),
                to_dim: t.dimension.clone(),
            });
        }
        if f.name.eq_ignore_ascii_case(&t.name) {
            return Ok(value);
        }
        Ok(t.from_canonical(f.to_canonical(value)))
    }

    /// Orders two annotated values. Numeric values with units compare by
    /// canonical magnitude and must share a dimension; unitless values of
    /// the same kind compare directly.
    pub fn compare(&self, a: &AnnotatedValue, b: &AnnotatedValue) -> Result<Ordering, UnitError> {
        match (&a.unit, &b.unit) {
            (Some(ua), Some(ub)) => {
                let (da, db) = (self.get(ua)?, self.get(ub)?);
                if da.dimension != db.dimension {
                    return Err(UnitError::DimensionMismatch {
                        from: da.name.clone(),
                        from_dim: da.dimension.clone(),
                        to: db.name.clone(),
                        to_dim: db.dimension.clone(),
                    });
                }
                let (Some(x), Some(y)) = (a.value.as_f64(), b.value.as_f64()) else {
                    return Err(incomparable(&a.value, &b.value));
                };
                Ok(tolerant_cmp(da.to_canonical(x), db.to_canonical(y)))
            }
            (None, None) => raw_cmp(&a.value, &b.value),
            (Some(u), None) | (None, Some(u)) => {
                let d = self.get(u)?;
                Err(UnitError::DimensionMismatch {
                    from: d.name.clone(),
                    from_dim: d.dimension.clone(),
                    to: "(unitless)".into(),
                    to_dim: "none".into(),
                })
            }
        }
    }
}

fn tolerant_cmp(x: f64, y: f64) -> Ordering {
    if (x - y).abs() <= EQUAL_TOLERANCE {
        Ordering::Equal
    } else if x < y {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Individual(_) => "individual",
        other => other.value_type().map(|t| t.as_str()).unwrap_or("?"),
    }
}

fn incomparable(a: &Value, b: &Value) -> UnitError {
    UnitError::Incomparable(kind_name(a).into(), kind_name(b).into())
}

fn raw_cmp(a: &Value, b: &Value) -> Result<Ordering, UnitError> {
    if let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) {
        return Ok(tolerant_cmp(x, y));
    }
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => Ok(x.cmp(y)),
        (Value::Boolean(x), Value::Boolean(y)) => Ok(x.cmp(y)),
        (Value::Datetime(x), Value::Datetime(y)) => Ok(x.cmp(y)),
        _ => Err(incomparable(a, b)),
    }
}

/// One issue per out-of-bound QoC field.
pub fn validate_qoc(q: &QoC) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut bad = |field: &str, why: &str, v: f64| {
        issues.push(Issue::error("InvalidQoC", format!("{field} = {v} {why}")));
    };
    if let Some(a) = q.accuracy {
        if !a.is_finite() {
            bad("accuracy", "is not finite", a);
        }
    }
    if let Some(p) = q.probability {
        if !(0.0..=1.0).contains(&p) {
            bad("probability", "is outside [0, 1]", p);
        }
    }
    if let Some(r) = q.resolution {
        if !(r > 0.0 && r.is_finite()) {
            bad("resolution", "is not a positive number", r);
        }
    }
    if let Some(e) = q.mean_error {
        if !(e >= 0.0 && e.is_finite()) {
            bad("meanError", "is negative or not finite", e);
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> UnitRegistry {
        let mut r = UnitRegistry::new();
        r.register_unit(UnitDef::new("celsius", "temperature", 1.0, 0.0))
            .unwrap();
        r.register_unit(UnitDef::new("fahrenheit", "temperature", 5.0 / 9.0, -160.0 / 9.0))
            .unwrap();
        r.register_unit(UnitDef::new("meters", "length", 1.0, 0.0)).unwrap();
        r.register_unit(UnitDef::new("feet", "length", 0.3048, 0.0)).unwrap();
        r.register_unit(UnitDef::new("kgs", "mass", 1.0, 0.0)).unwrap();
        r.register_unit(UnitDef::new("pounds", "mass", 0.45359237, 0.0))
            .unwrap();
        r
    }

    fn av(x: f64, unit: &str) -> AnnotatedValue {
        let mut v = AnnotatedValue::new(Value::Real(x), crate::Timestamp::from_epoch_seconds(0));
        v.unit = Some(unit.to_owned());
        v
    }

    #[test]
    fn register_examples() {
        let mut r = registry();
        assert_eq!(
            r.register_unit(UnitDef::new("feet", "length", 0.3048, 0.0))
                .unwrap_err()
                .kind(),
            "DuplicateUnit"
        );
        assert_eq!(
            r.register_unit(UnitDef::new("Feet", "length", 0.3048, 0.0))
                .unwrap_err()
                .kind(),
            "DuplicateUnit"
        );
        assert_eq!(
            r.register_unit(UnitDef::new("bogus", "length", 0.0, 0.0))
                .unwrap_err()
                .kind(),
            "ZeroScale"
        );
        assert_eq!(
            r.register_unit(UnitDef::new("parsec", "astro", 3.1e16, 0.0))
                .unwrap_err()
                .kind(),
            "NoCanonicalUnit"
        );
        assert_eq!(
            r.register_unit(UnitDef::new("metres", "length", 1.0, 0.0))
                .unwrap_err()
                .kind(),
            "DuplicateCanonical"
        );
        assert_eq!(r.canonical_unit("temperature").unwrap().name, "celsius");
    }

    #[test]
    fn convert_examples() {
        let r = registry();
        let c = r.convert(100.0, "fahrenheit", "celsius").unwrap();
        assert!((c - 37.77778).abs() < 1e-5, "{c}");
        assert_eq!(r.convert(6.0, "feet", "feet").unwrap(), 6.0);
        assert_eq!(r.convert(6.0, "feet", "kgs").unwrap_err().kind(), "DimensionMismatch");
        assert_eq!(r.convert(6.0, "feet", "furlongs").unwrap_err().kind(), "UnknownUnit");
        assert!((r.convert(32.0, "Fahrenheit", "celsius").unwrap()).abs() < 1e-12);
    }

    #[test]
    fn compare_examples() {
        let r = registry();
        assert_eq!(
            r.compare(&av(10.0, "Fahrenheit"), &av(150.0, "Fahrenheit")),
            Ok(Ordering::Less)
        );
        assert_eq!(
            r.compare(&av(55.0, "kgs"), &av(121.2542442, "pounds")),
            Ok(Ordering::Equal)
        );
        assert_eq!(r.compare(&av(6.0, "feet"), &av(1.8288, "meters")), Ok(Ordering::Equal));
        assert_eq!(
            r.compare(&av(7.0, "feet"), &av(1.8288, "meters")),
            Ok(Ordering::Greater)
        );
        assert_eq!(
            r.compare(&av(6.0, "feet"), &av(6.0, "kgs")).unwrap_err().kind(),
            "DimensionMismatch"
        );
        let raw = |v: Value| AnnotatedValue::new(v, crate::Timestamp::from_epoch_seconds(0));
        assert_eq!(
            r.compare(&raw(Value::Integer(3)), &raw(Value::Real(3.0))),
            Ok(Ordering::Equal)
        );
        assert_eq!(
            r.compare(&raw(Value::Text("a".into())), &raw(Value::Real(3.0)))
                .unwrap_err()
                .kind(),
            "Incomparable"
        );
    }

    #[test]
    fn qoc_examples() {
        let ok = QoC {
            probability: Some(0.9),
            mean_error: Some(1.0),
            ..QoC::default()
        };
        assert!(validate_qoc(&ok).is_empty());
        let p = QoC {
            probability: Some(1.5),
            ..QoC::default()
        };
        assert_eq!(validate_qoc(&p).len(), 1);
        let e = QoC {
            mean_error: Some(-1.0),
            ..QoC::default()
        };
        assert_eq!(validate_qoc(&e).len(), 1);
        let r = QoC {
            resolution: Some(0.0),
            probability: Some(f64::NAN),
            ..QoC::default()
        };
        assert_eq!(validate_qoc(&r).len(), 2);
    }
}
