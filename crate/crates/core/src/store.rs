//! Append-only store of individuals and annotated facts.
//!
//! Facts are never rewritten. Which fact is "current" is decided at query
//! time from timestamps, confidence and the property's functional flag,
//! so the full history of every property stays available.
//!
//! Two timestamps are kept: every fact carries its own fine-grained
//! timestamp, and every individual carries a coarse [`ProvenanceRecord`]
//! saying who created it and who last changed it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::issue::Issue;
use crate::quality::{validate_qoc, UnitRegistry};
use crate::schema::{PropertyDef, Schema};
use crate::term::{valid_individual_id, TermName, Timestamp, Value, ValueType};

/// Actor recorded for changes made by the engine itself.
pub const SYSTEM: &str = "SYSTEM";

/// Confidence threshold used when a policy does not name one.
pub const DEFAULT_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceRecord {
    pub created_by: String,
    pub created_at: Timestamp,
    pub last_modified_by: String,
    pub last_modified_at: Timestamp,
    pub last_change: String,
}

impl ProvenanceRecord {
    fn created(actor: &str, at: Timestamp) -> Self {
        ProvenanceRecord {
            created_by: actor.to_owned(),
            created_at: at,
            last_modified_by: actor.to_owned(),
            last_modified_at: at,
            last_change: "created".to_owned(),
        }
    }

    fn touch(&mut self, actor: &str, at: Timestamp, change: String) {
        if at >= self.last_modified_at {
            self.last_modified_by = actor.to_owned();
            self.last_modified_at = at;
            self.last_change = change;
        }
    }

    /// Earliest creation and latest modification of the two; ties keep
    /// `self`.
    fn combine(&self, other: &ProvenanceRecord) -> ProvenanceRecord {
        let mut out = self.clone();
        if other.created_at < self.created_at {
            out.created_by = other.created_by.clone();
            out.created_at = other.created_at;
        }
        if other.last_modified_at > self.last_modified_at {
            out.last_modified_by = other.last_modified_by.clone();
            out.last_modified_at = other.last_modified_at;
            out.last_change = other.last_change.clone();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub id: String,
    pub class: TermName,
    pub provenance: ProvenanceRecord,
}

/// Quality-of-context annotations. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QoC {
    pub accuracy: Option<f64>,
    /// Certainty of being correct, in `[0, 1]`.
    pub probability: Option<f64>,
    pub coverage: Option<String>,
    /// Smallest perceivable element; positive.
    pub resolution: Option<f64>,
    /// Average error; non-negative.
    pub mean_error: Option<f64>,
    pub recurrence: Option<String>,
}

impl QoC {
    pub fn is_empty(&self) -> bool {
        *self == QoC::default()
    }

    /// Probability used for confidence filtering; unannotated facts count
    /// as certain.
    pub fn effective_probability(&self) -> f64 {
        self.probability.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedValue {
    pub value: Value,
    pub timestamp: Timestamp,
    pub unit: Option<String>,
    pub qoc: QoC,
    pub source: Option<String>,
}

impl AnnotatedValue {
    pub fn new(value: Value, timestamp: Timestamp) -> Self {
        AnnotatedValue {
            value,
            timestamp,
            unit: None,
            qoc: QoC::default(),
            source: None,
        }
    }
}

impl fmt::Display for AnnotatedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if let Some(u) = &self.unit {
            write!(f, " {u}")?;
        }
        write!(f, " @{}", self.timestamp)?;
        if let Some(p) = self.qoc.probability {
            write!(f, " p={p:?}")?;
        }
        if let Some(e) = self.qoc.mean_error {
            write!(f, " ±{e:?}")?;
        }
        if let Some(s) = &self.source {
            write!(f, " from {s}")?;
        }
        Ok(())
    }
}

/// Annotations supplied with an assertion. A missing timestamp defaults to
/// the assertion time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    pub timestamp: Option<Timestamp>,
    pub unit: Option<String>,
    pub qoc: QoC,
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub u64);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub id: FactId,
    pub subject: String,
    pub property: TermName,
    /// For relation facts the value is [`Value::Individual`].
    pub payload: AnnotatedValue,
    pub asserted_by: String,
    /// Set on inverse facts materialized from another assertion.
    pub derived_from: Option<FactId>,
}

impl Fact {
    pub fn object(&self) -> Option<&str> {
        self.payload.value.as_individual()
    }

    fn recency(&self) -> (Timestamp, FactId) {
        (self.payload.timestamp, self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ResolutionPolicy {
    /// Greatest timestamp; equal timestamps go to the later assertion.
    #[default]
    Latest,
    /// Greatest timestamp among facts whose probability is at least the
    /// threshold.
    Confident(f64),
    /// Every current candidate.
    All,
}

impl FromStr for ResolutionPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "latest" => Ok(ResolutionPolicy::Latest),
            "all" => Ok(ResolutionPolicy::All),
            "confident" => Ok(ResolutionPolicy::Confident(DEFAULT_CONFIDENCE)),
            _ => {
                let theta = s
                    .strip_prefix("confident:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|t| (0.0..=1.0).contains(t))
                    .ok_or_else(|| format!("invalid policy `{s}`: expected latest, all, or confident:<0..1>"))?;
                Ok(ResolutionPolicy::Confident(theta))
            }
        }
    }
}

impl fmt::Display for ResolutionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolutionPolicy::Latest => f.write_str("latest"),
            ResolutionPolicy::All => f.write_str("all"),
            ResolutionPolicy::Confident(t) => write!(f, "confident:{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl FromStr for CmpOp {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "=" | "==" | "eq" => CmpOp::Eq,
            "!=" | "ne" => CmpOp::Ne,
            "<" | "lt" => CmpOp::Lt,
            "<=" | "le" => CmpOp::Le,
            ">" | "gt" => CmpOp::Gt,
            ">=" | "ge" => CmpOp::Ge,
            _ => return Err(format!("unknown comparison `{s}`")),
        })
    }
}

/// Compares a fact's value against `operand` using unit-aware ordering.
/// Facts whose value cannot be compared do not match.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuePredicate {
    pub op: CmpOp,
    pub operand: Value,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pattern {
    /// Matches subjects whose class is a subclass of this one.
    pub class: Option<TermName>,
    pub property: Option<TermName>,
    pub subject: Option<String>,
    pub value: Option<ValuePredicate>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoreError {
    #[error("invalid individual id `{0}`")]
    InvalidId(String),
    #[error("individual `{0}` already exists")]
    DuplicateIndividual(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("`{0}` is an object property; use a relation assertion")]
    NotADataProperty(TermName),
    #[error("`{0}` is a data property; use a data assertion")]
    NotAnObjectProperty(TermName),
    #[error("`{subject}` ({class}) is outside the domain of `{property}`")]
    DomainViolation {
        subject: String,
        class: TermName,
        property: TermName,
    },
    #[error("`{object}` ({class}) is outside the range of `{property}`")]
    RangeViolation {
        object: String,
        class: TermName,
        property: TermName,
    },
    #[error("`{property}` expects {expected}, got {found}")]
    TypeMismatch {
        property: TermName,
        expected: String,
        found: String,
    },
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid quality annotations: {}", .0.iter().map(|i| i.message.clone()).collect::<Vec<_>>().join("; "))]
    InvalidQoC(Vec<Issue>),
    #[error("stores were built against different schemas")]
    SchemaMismatch,
    #[error("individual `{id}` is a {left} in one store and a {right} in the other")]
    IndividualClassConflict {
        id: String,
        left: TermName,
        right: TermName,
    },
}

impl StoreError {
    pub fn kind(&self) -> &'static str {
        match self {
            StoreError::InvalidId(_) => "InvalidId",
            StoreError::DuplicateIndividual(_) => "DuplicateIndividual",
            StoreError::UnknownIndividual(_) => "UnknownIndividual",
            StoreError::UnknownClass(_) => "UnknownClass",
            StoreError::UnknownProperty(_) => "UnknownProperty",
            StoreError::NotADataProperty(_) => "NotADataProperty",
            StoreError::NotAnObjectProperty(_) => "NotAnObjectProperty",
            StoreError::DomainViolation { .. } => "DomainViolation",
            StoreError::RangeViolation { .. } => "RangeViolation",
            StoreError::TypeMismatch { .. } => "TypeMismatch",
            StoreError::UnknownUnit(_) => "UnknownUnit",
            StoreError::InvalidQoC(_) => "InvalidQoC",
            StoreError::SchemaMismatch => "SchemaMismatch",
            StoreError::IndividualClassConflict { .. } => "IndividualClassConflict",
        }
    }
}

type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextStore {
    individuals: BTreeMap<String, Individual>,
    facts: Vec<Fact>,
    by_key: BTreeMap<(String, TermName), Vec<usize>>,
}

impl ContextStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_individual(
        &mut self,
        schema: &Schema,
        class: &TermName,
        id: &str,
        actor: &str,
        at: Timestamp,
    ) -> Result<&Individual> {
        if !valid_individual_id(id) {
            return Err(StoreError::InvalidId(id.to_owned()));
        }
        if self.individuals.contains_key(id) {
            return Err(StoreError::DuplicateIndividual(id.to_owned()));
        }
        if schema.class(class).is_none() {
            return Err(StoreError::UnknownClass(class.to_string()));
        }
        let ind = Individual {
            id: id.to_owned(),
            class: class.clone(),
            provenance: ProvenanceRecord::created(actor, at),
        };
        Ok(self.individuals.entry(id.to_owned()).or_insert(ind))
    }

    pub fn individual(&self, id: &str) -> Result<&Individual> {
        self.individuals
            .get(id)
            .ok_or_else(|| StoreError::UnknownIndividual(id.to_owned()))
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual> {
        self.individuals.values()
    }

    /// All facts in assertion order.
    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        id.0.checked_sub(1).and_then(|i| self.facts.get(i as usize))
    }

    fn next_id(&self) -> FactId {
        FactId(self.facts.len() as u64 + 1)
    }

    fn push(&mut self, fact: Fact) {
        let idx = self.facts.len();
        self.by_key
            .entry((fact.subject.clone(), fact.property.clone()))
            .or_default()
            .push(idx);
        self.facts.push(fact);
    }

    fn check_annotations(
        &self,
        property: &TermName,
        numeric: bool,
        ann: &Annotations,
        units: &UnitRegistry,
    ) -> Result<()> {
        let issues = validate_qoc(&ann.qoc);
        if !issues.is_empty() {
            return Err(StoreError::InvalidQoC(issues));
        }
        if let Some(u) = &ann.unit {
            if !numeric {
                return Err(StoreError::TypeMismatch {
                    property: property.clone(),
                    expected: "unitless value".into(),
                    found: format!("value with unit {u}"),
                });
            }
            if !units.contains(u) {
                return Err(StoreError::UnknownUnit(u.clone()));
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn assert_data(
        &mut self,
        schema: &Schema,
        units: &UnitRegistry,
        subject: &str,
        property: &TermName,
        value: Value,
        ann: Annotations,
        actor: &str,
        at: Timestamp,
    ) -> Result<Fact> {
        let class = self.individual(subject)?.class.clone();
        let def = match schema.property(property) {
            Some(PropertyDef::Data(d)) => d,
            Some(PropertyDef::Object(_)) => return Err(StoreError::NotADataProperty(property.clone())),
            None => return Err(StoreError::UnknownProperty(property.to_string())),
        };
        if !schema.in_domain(&class, std::slice::from_ref(&def.domain)) {
            return Err(StoreError::DomainViolation {
                subject: subject.to_owned(),
                class,
                property: property.clone(),
            });
        }
        let found = value.value_type();
        if found != Some(def.value_type) {
            return Err(StoreError::TypeMismatch {
                property: property.clone(),
                expected: def.value_type.to_string(),
                found: found.map_or("individual".to_owned(), |t| t.to_string()),
            });
        }
        self.check_annotations(property, def.value_type.is_numeric(), &ann, units)?;

        let fact = Fact {
            id: self.next_id(),
            subject: subject.to_owned(),
            property: property.clone(),
            payload: AnnotatedValue {
                value,
                timestamp: ann.timestamp.unwrap_or(at),
                unit: ann.unit,
                qoc: ann.qoc,
                source: ann.source,
            },
            asserted_by: actor.to_owned(),
            derived_from: None,
        };
        self.push(fact.clone());
        self.individuals
            .get_mut(subject)
            .expect("checked above")
            .provenance
            .touch(actor, at, format!("asserted {property}"));
        Ok(fact)
    }

    /// Appends `(subject, property, object)` and, when the property has
    /// exactly one declared inverse, the inverse fact in the same step.
    #[allow(clippy::too_many_arguments)]
    pub fn assert_relation(
        &mut self,
        schema: &Schema,
        units: &UnitRegistry,
        subject: &str,
        property: &TermName,
        object: &str,
        ann: Annotations,
        actor: &str,
        at: Timestamp,
    ) -> Result<(Fact, Option<Fact>)> {
        let s_class = self.individual(subject)?.class.clone();
        let o_class = self.individual(object)?.class.clone();
        let def = match schema.property(property) {
            Some(PropertyDef::Object(d)) => d,
            Some(PropertyDef::Data(_)) => return Err(StoreError::NotAnObjectProperty(property.clone())),
            None => return Err(StoreError::UnknownProperty(property.to_string())),
        };
        check_relation(
            schema,
            subject,
            &s_class,
            property,
            &def.domain,
            object,
            &o_class,
            &def.range,
        )?;
        let inverse = match def.unique_inverse() {
            Some(q) => {
                let inv = schema.object_property(q).expect("inverse links are registered");
                check_relation(schema, object, &o_class, q, &inv.domain, subject, &s_class, &inv.range)?;
                Some(q.clone())
            }
            None => None,
        };
        self.check_annotations(property, false, &ann, units)?;

        let payload = AnnotatedValue {
            value: Value::Individual(object.to_owned()),
            timestamp: ann.timestamp.unwrap_or(at),
            unit: None,
            qoc: ann.qoc,
            source: ann.source,
        };
        let primary = Fact {
            id: self.next_id(),
            subject: subject.to_owned(),
            property: property.clone(),
            payload: payload.clone(),
            asserted_by: actor.to_owned(),
            derived_from: None,
        };
        self.push(primary.clone());
        self.individuals
            .get_mut(subject)
            .expect("checked above")
            .provenance
            .touch(actor, at, format!("asserted {property} {object}"));

        let derived = inverse.map(|q| {
            let fact = Fact {
                id: self.next_id(),
                subject: object.to_owned(),
                property: q.clone(),
                payload: AnnotatedValue {
                    value: Value::Individual(subject.to_owned()),
                    ..payload
                },
                asserted_by: actor.to_owned(),
                derived_from: Some(primary.id),
            };
            self.push(fact.clone());
            self.individuals
                .get_mut(object)
                .expect("checked above")
                .provenance
                .touch(actor, at, format!("derived {q} {subject}"));
            fact
        });
        Ok((primary, derived))
    }

    fn key_facts(&self, subject: &str, property: &TermName) -> impl Iterator<Item = &Fact> {
        self.by_key
            .get(&(subject.to_owned(), property.clone()))
            .into_iter()
            .flatten()
            .map(|&i| &self.facts[i])
    }

    /// Facts for `(subject, property)` that are still current: for
    /// multi-valued relations the latest fact per object, for functional
    /// relations the single latest fact, and for data properties the latest
    /// reading per source.
    fn candidates(&self, schema: &Schema, subject: &str, property: &TermName) -> Vec<&Fact> {
        let multi_valued = matches!(
            schema.property(property),
            Some(PropertyDef::Object(d)) if !d.functional
        );
        let functional = matches!(
            schema.property(property),
            Some(PropertyDef::Object(d)) if d.functional
        );
        let mut latest: BTreeMap<Option<&str>, &Fact> = BTreeMap::new();
        for f in self.key_facts(subject, property) {
            let group = if functional {
                None
            } else if multi_valued {
                f.object()
            } else {
                f.payload.source.as_deref()
            };
            let slot = latest.entry(group).or_insert(f);
            if f.recency() > slot.recency() {
                *slot = f;
            }
        }
        let mut out: Vec<&Fact> = latest.into_values().collect();
        out.sort_by_key(|f| f.id);
        out
    }

    /// Resolves the current value(s). `Latest` and `Confident` yield at
    /// most one fact; an empty result means no value.
    pub fn get_current(
        &self,
        schema: &Schema,
        subject: &str,
        property: &TermName,
        policy: ResolutionPolicy,
    ) -> Result<Vec<Fact>> {
        self.individual(subject)?;
        if schema.property(property).is_none() {
            return Err(StoreError::UnknownProperty(property.to_string()));
        }
        let facts = self.key_facts(subject, property);
        let picked: Vec<&Fact> = match policy {
            ResolutionPolicy::Latest => facts.max_by_key(|f| f.recency()).into_iter().collect(),
            ResolutionPolicy::Confident(theta) => facts
                .filter(|f| f.payload.qoc.effective_probability() >= theta)
                .max_by_key(|f| f.recency())
                .into_iter()
                .collect(),
            ResolutionPolicy::All => self.candidates(schema, subject, property),
        };
        Ok(picked.into_iter().cloned().collect())
    }

    pub fn history(&self, subject: &str, property: &TermName) -> Result<Vec<Fact>> {
        self.individual(subject)?;
        Ok(self.key_facts(subject, property).cloned().collect())
    }

    pub fn provenance(&self, subject: &str) -> Result<&ProvenanceRecord> {
        Ok(&self.individual(subject)?.provenance)
    }

    /// Overwrites a coarse record, used when restoring saved state.
    pub(crate) fn restore_provenance(&mut self, subject: &str, record: ProvenanceRecord) -> Result<()> {
        let ind = self
            .individuals
            .get_mut(subject)
            .ok_or_else(|| StoreError::UnknownIndividual(subject.to_owned()))?;
        ind.provenance = record;
        Ok(())
    }

    /// Current facts matching every constraint of `pattern`, in assertion
    /// order.
    pub fn query(&self, schema: &Schema, units: &UnitRegistry, pattern: &Pattern) -> Result<Vec<Fact>> {
        if let Some(c) = &pattern.class {
            if schema.class(c).is_none() {
                return Err(StoreError::UnknownClass(c.to_string()));
            }
        }
        if let Some(p) = &pattern.property {
            if schema.property(p).is_none() {
                return Err(StoreError::UnknownProperty(p.to_string()));
            }
        }
        if let Some(s) = &pattern.subject {
            self.individual(s)?;
        }
        let operand = pattern.value.as_ref().map(|pred| {
            let mut av = AnnotatedValue::new(pred.operand.clone(), Timestamp::from_epoch_seconds(0));
            av.unit = pred.unit.clone();
            (pred.op, av)
        });

        let mut out = Vec::new();
        for (subject, property) in self.by_key.keys() {
            if pattern.subject.as_ref().is_some_and(|s| s != subject)
                || pattern.property.as_ref().is_some_and(|p| p != property)
            {
                continue;
            }
            if let Some(c) = &pattern.class {
                let class = &self.individuals[subject].class;
                if !schema.subclass_unchecked(class, c) {
                    continue;
                }
            }
            for f in self.candidates(schema, subject, property) {
                let keep = match &operand {
                    None => true,
                    Some((op, rhs)) => match units.compare(&f.payload, rhs) {
                        Ok(ord) => {
                            use std::cmp::Ordering::*;
                            match op {
                                CmpOp::Eq => ord == Equal,
                                CmpOp::Ne => ord != Equal,
                                CmpOp::Lt => ord == Less,
                                CmpOp::Le => ord != Greater,
                                CmpOp::Gt => ord == Greater,
                                CmpOp::Ge => ord != Less,
                            }
                        }
                        Err(_) => false,
                    },
                };
                if keep {
                    out.push(f.clone());
                }
            }
        }
        out.sort_by_key(|f| f.id);
        Ok(out)
    }

    /// Follows the current `locatedin` chain: level 0 is the subject's own
    /// location, level k is k containment steps further up.
    pub fn location_at_granularity(&self, schema: &Schema, subject: &str, level: usize) -> Result<Option<String>> {
        self.individual(subject)?;
        let locatedin = schema
            .resolve_property("locatedin")
            .map_err(|_| StoreError::UnknownProperty("locatedin".into()))?;
        let mut path: Vec<String> = Vec::new();
        let mut cur = subject.to_owned();
        loop {
            let next = self
                .key_facts(&cur, &locatedin)
                .max_by_key(|f| f.recency())
                .and_then(|f| f.object().map(str::to_owned));
            let Some(next) = next else { return Ok(None) };
            if let Some(start) = path.iter().position(|p| *p == next) {
                // containment loops back on itself
                let cycle = path.len() - start;
                return Ok(Some(path[start + (level - start) % cycle].clone()));
            }
            path.push(next.clone());
            if path.len() > level {
                return Ok(Some(next));
            }
            cur = next;
        }
    }

    /// Union of two stores. Facts are interleaved by timestamp, with facts
    /// from `self` before those from `other` on equal timestamps, and are
    /// renumbered in that order.
    pub fn merge(&self, other: &ContextStore) -> Result<ContextStore> {
        let mut individuals = self.individuals.clone();
        for (id, ind) in &other.individuals {
            match individuals.get_mut(id) {
                Some(mine) if mine.class != ind.class => {
                    return Err(StoreError::IndividualClassConflict {
                        id: id.clone(),
                        left: mine.class.clone(),
                        right: ind.class.clone(),
                    })
                }
                Some(mine) => mine.provenance = mine.provenance.combine(&ind.provenance),
                None => {
                    individuals.insert(id.clone(), ind.clone());
                }
            }
        }

        let mut order: Vec<(Timestamp, u8, usize)> = self
            .facts
            .iter()
            .enumerate()
            .map(|(i, f)| (f.payload.timestamp, 0, i))
            .chain(other.facts.iter().enumerate().map(|(i, f)| (f.payload.timestamp, 1, i)))
            .collect();
        order.sort();

        let mut renumber: [Vec<FactId>; 2] = [vec![FactId(0); self.facts.len()], vec![FactId(0); other.facts.len()]];
        for (n, &(_, origin, i)) in order.iter().enumerate() {
            renumber[origin as usize][i] = FactId(n as u64 + 1);
        }
        let mut merged = ContextStore {
            individuals,
            facts: Vec::with_capacity(order.len()),
            by_key: BTreeMap::new(),
        };
        for (_, origin, i) in order {
            let src = if origin == 0 { &self.facts[i] } else { &other.facts[i] };
            let map = &renumber[origin as usize];
            let mut f = src.clone();
            f.id = map[i];
            f.derived_from = src.derived_from.map(|d| map[(d.0 - 1) as usize]);
            merged.push(f);
        }
        Ok(merged)
    }

    /// Ids of the individuals that are subjects of at least one fact.
    pub fn subjects(&self) -> BTreeSet<&str> {
        self.by_key.keys().map(|(s, _)| s.as_str()).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn check_relation(
    schema: &Schema,
    subject: &str,
    s_class: &TermName,
    property: &TermName,
    domain: &[TermName],
    object: &str,
    o_class: &TermName,
    range: &TermName,
) -> Result<()> {
    if !schema.in_domain(s_class, domain) {
        return Err(StoreError::DomainViolation {
            subject: subject.to_owned(),
            class: s_class.clone(),
            property: property.clone(),
        });
    }
    if !schema.subclass_unchecked(o_class, range) {
        return Err(StoreError::RangeViolation {
            object: object.to_owned(),
            class: o_class.clone(),
            property: property.clone(),
        });
    }
    Ok(())
}

/// Parses a literal for `property`, which must be a data property.
pub fn parse_literal(schema: &Schema, property: &TermName, literal: &str) -> Result<Value> {
    let def = match schema.property(property) {
        Some(PropertyDef::Data(d)) => d,
        Some(PropertyDef::Object(_)) => return Ok(Value::Individual(literal.to_owned())),
        None => return Err(StoreError::UnknownProperty(property.to_string())),
    };
    Value::parse_as(literal, def.value_type).map_err(|e| StoreError::TypeMismatch {
        property: property.clone(),
        expected: def.value_type.to_string(),
        found: format!("`{}`", e.literal),
    })
}

/// Value type expected for `property`, `None` for object properties.
pub fn expected_type(schema: &Schema, property: &TermName) -> Option<ValueType> {
    match schema.property(property)? {
        PropertyDef::Data(d) => Some(d.value_type),
        PropertyDef::Object(_) => None,
    }
}
