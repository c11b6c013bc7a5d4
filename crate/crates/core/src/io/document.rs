//! The `.rcm` document model and its parser.
//!
//! A document is TOML with a fixed set of top-level sections. Names inside
//! a section are written term names and are resolved when the document is
//! applied, so a section may refer to terms defined further down.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::schema::{TermKind, Volatility};
use crate::term::{Timestamp, ValueType};

use super::DocumentError;

/// Top-level section names in application order.
pub const SECTIONS: [&str; 6] = ["schema", "units", "individuals", "facts", "groups", "scenario"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcmDocument {
    #[serde(default)]
    pub schema: SchemaSection,
    #[serde(default)]
    pub units: Vec<UnitEntry>,
    #[serde(default)]
    pub individuals: Vec<IndividualEntry>,
    #[serde(default)]
    pub facts: Vec<FactEntry>,
    #[serde(default)]
    pub groups: Vec<GroupEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioScript>,
}

impl RcmDocument {
    pub fn is_empty(&self) -> bool {
        *self == RcmDocument::default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSection {
    #[serde(default)]
    pub classes: Vec<ClassEntry>,
    #[serde(default)]
    pub object_properties: Vec<ObjectPropertyEntry>,
    #[serde(default)]
    pub data_properties: Vec<DataPropertyEntry>,
    #[serde(default)]
    pub equivalences: Vec<EquivalenceEntry>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub name: String,
    pub parent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equivalent: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectPropertyEntry {
    pub name: String,
    pub domain: Vec<String>,
    pub range: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub functional: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub inverse_functional: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inverse_of: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_property_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equivalent: Vec<String>,
}

fn dynamic() -> Volatility {
    Volatility::Dynamic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPropertyEntry {
    pub name: String,
    pub domain: String,
    #[serde(rename = "type")]
    pub value_type: ValueType,
    #[serde(default = "dynamic")]
    pub volatility: Volatility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_property_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equivalent: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceEntry {
    pub term: String,
    pub kind: TermKind,
    pub iri: String,
}

/// `canonical = scale * value + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitEntry {
    pub name: String,
    pub dimension: String,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndividualEntry {
    pub id: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_modified_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_modified_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_change: Option<String>,
}

/// A scalar written either as a string or as a bare TOML value. It is
/// parsed by the property's declared type when applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Text(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Text(s) => f.write_str(s),
            Literal::Integer(i) => write!(f, "{i}"),
            Literal::Real(x) => write!(f, "{x:?}"),
            Literal::Boolean(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactEntry {
    pub subject: String,
    pub property: String,
    /// Literal for data properties, object id for relations.
    pub value: Literal,
    pub timestamp: Timestamp,
    #[serde(default, alias = "scale", skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Defaults to the source, then to the system actor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asserted_by: Option<String>,
    /// Inverse facts are re-materialized on import, so entries marked
    /// `derived` are informational and skipped.
    #[serde(default, skip_serializing_if = "is_false")]
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupEntry {
    pub id: String,
    #[serde(default)]
    pub members: Vec<String>,
    #[serde(default)]
    pub privileges: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub steps: Vec<Step>,
}

/// One scripted operation. Goals and activities are referred to by the
/// alias given in their `as` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Step {
    Trigger {
        at: Timestamp,
        event: String,
        goal: String,
        #[serde(rename = "as")]
        alias: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    AddGoal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Timestamp>,
        parent: String,
        goal: String,
        #[serde(rename = "as")]
        alias: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    AddActivity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Timestamp>,
        class: String,
        goal: String,
        #[serde(default)]
        preconditions: Vec<String>,
        #[serde(default)]
        performers: Vec<String>,
        #[serde(default)]
        atomic: bool,
        #[serde(rename = "as")]
        alias: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    AssertData {
        at: Timestamp,
        subject: String,
        property: String,
        value: Literal,
        #[serde(default, alias = "scale", skip_serializing_if = "Option::is_none")]
        unit: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        accuracy: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probability: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coverage: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean_error: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        recurrence: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        actor: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    AssertRelation {
        at: Timestamp,
        subject: String,
        property: String,
        object: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probability: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        actor: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    Start {
        at: Timestamp,
        activity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    Complete {
        at: Timestamp,
        activity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    Abort {
        at: Timestamp,
        activity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_error: Option<String>,
    },
    Expect(Expectation),
}

impl Step {
    pub fn op(&self) -> &'static str {
        match self {
            Step::Trigger { .. } => "trigger",
            Step::AddGoal { .. } => "add-goal",
            Step::AddActivity { .. } => "add-activity",
            Step::AssertData { .. } => "assert-data",
            Step::AssertRelation { .. } => "assert-relation",
            Step::Start { .. } => "start",
            Step::Complete { .. } => "complete",
            Step::Abort { .. } => "abort",
            Step::Expect(_) => "expect",
        }
    }

    pub fn at(&self) -> Option<Timestamp> {
        match self {
            Step::Trigger { at, .. }
            | Step::AssertData { at, .. }
            | Step::AssertRelation { at, .. }
            | Step::Start { at, .. }
            | Step::Complete { at, .. }
            | Step::Abort { at, .. } => Some(*at),
            Step::AddGoal { at, .. } | Step::AddActivity { at, .. } => *at,
            Step::Expect(_) => None,
        }
    }

    pub fn expect_error(&self) -> Option<&str> {
        match self {
            Step::Trigger { expect_error, .. }
            | Step::AddGoal { expect_error, .. }
            | Step::AddActivity { expect_error, .. }
            | Step::AssertData { expect_error, .. }
            | Step::AssertRelation { expect_error, .. }
            | Step::Start { expect_error, .. }
            | Step::Complete { expect_error, .. }
            | Step::Abort { expect_error, .. } => expect_error.as_deref(),
            Step::Expect(_) => None,
        }
    }
}

/// A check against engine state, written as `op = "expect"` plus
/// `expect = "<kind>"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expect", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Expectation {
    /// The value resolved by `policy` (default `latest`). With `none =
    /// true`, asserts that nothing resolves.
    Value {
        subject: String,
        property: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        policy: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Literal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
        #[serde(default, skip_serializing_if = "is_false")]
        none: bool,
    },
    Goal {
        goal: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        status: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        achieved_at: Option<Timestamp>,
    },
    Activity {
        activity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start_time: Option<Timestamp>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end_time: Option<Timestamp>,
    },
    Access {
        entity: String,
        activity_class: String,
        allowed: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        via: Option<String>,
    },
    /// Terminal flag of the situation that owns `goal`.
    Terminal { goal: String, terminal: bool },
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses a document. Nothing is resolved against an engine here; the
/// checks are syntax, section names and duplicate definitions.
pub fn parse_document(text: &str) -> Result<RcmDocument, DocumentError> {
    let syntax = |e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        DocumentError::Syntax {
            line,
            column,
            message: e.message().to_owned(),
        }
    };
    let table: toml::Table = toml::from_str(text).map_err(syntax)?;
    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            let (line, column) = find_key(text, key);
            return Err(DocumentError::UnknownSection {
                name: key.clone(),
                line,
                column,
            });
        }
    }
    let doc: RcmDocument = toml::from_str(text).map_err(syntax)?;
    check_duplicates(&doc)?;
    Ok(doc)
}

fn find_key(text: &str, key: &str) -> (usize, usize) {
    for (i, line) in text.lines().enumerate() {
        let t = line.trim_start().trim_start_matches('[').trim_start();
        if let Some(rest) = t.strip_prefix(key) {
            if rest.trim_start().starts_with(['=', ']', '.']) {
                return (i + 1, line.len() - line.trim_start().len() + 1);
            }
        }
    }
    (1, 1)
}

fn check_duplicates(doc: &RcmDocument) -> Result<(), DocumentError> {
    fn dup(section: &str, what: &'static str, names: impl Iterator<Item = String>) -> Result<(), DocumentError> {
        let mut seen = BTreeSet::new();
        for (i, n) in names.enumerate() {
            if !seen.insert(n.clone()) {
                return Err(DocumentError::DuplicateDefinitionInDocument {
                    what,
                    name: n,
                    location: format!("{section}[{i}]"),
                });
            }
        }
        Ok(())
    }
    // `x` and `x#x` are the same term.
    let norm = |s: &str| match s.split_once('#') {
        Some((ns, l)) if ns == l => l.to_owned(),
        _ => s.to_owned(),
    };
    let s = &doc.schema;
    dup("schema.classes", "class", s.classes.iter().map(|c| norm(&c.name)))?;
    let props = s
        .object_properties
        .iter()
        .map(|p| norm(&p.name))
        .chain(s.data_properties.iter().map(|p| norm(&p.name)));
    // Data properties are numbered after object properties here.
    dup("schema.properties", "property", props)?;
    dup("units", "unit", doc.units.iter().map(|u| u.name.to_lowercase()))?;
    dup(
        "individuals",
        "individual",
        doc.individuals.iter().map(|i| i.id.clone()),
    )?;
    dup("groups", "group", doc.groups.iter().map(|g| g.id.clone()))?;
    if let Some(sc) = &doc.scenario {
        let aliases = sc.steps.iter().filter_map(|st| match st {
            Step::Trigger { alias, .. } | Step::AddGoal { alias, .. } | Step::AddActivity { alias, .. } => {
                Some(alias.clone())
            }
            _ => None,
        });
        dup("scenario.steps", "alias", aliases)?;
    }
    Ok(())
}
