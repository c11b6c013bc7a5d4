//! Applying a parsed document to an engine.

use std::fmt;

use crate::engine::Engine;
use crate::quality::UnitDef;
use crate::schema::{DataPropertyDef, ObjectPropertyDef, Schema, SchemaError, TermKind};
use crate::store::{parse_literal, Annotations, ProvenanceRecord, QoC, SYSTEM};
use crate::term::{TermName, Timestamp};

use super::document::{FactEntry, Literal, RcmDocument};
use super::DocumentError;

/// Counts of what a document added.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub classes: usize,
    pub object_properties: usize,
    pub data_properties: usize,
    pub equivalences: usize,
    pub units: usize,
    pub individuals: usize,
    pub facts: usize,
    /// Entries marked `derived`, skipped because the inverse assertion
    /// re-creates them.
    pub derived_skipped: usize,
    pub groups: usize,
    /// Scenario steps present but not run.
    pub scenario_steps: usize,
}

impl Report {
    pub fn rows(&self) -> [(&'static str, usize); 10] {
        [
            ("classes", self.classes),
            ("object_properties", self.object_properties),
            ("data_properties", self.data_properties),
            ("equivalences", self.equivalences),
            ("units", self.units),
            ("individuals", self.individuals),
            ("facts", self.facts),
            ("derived_skipped", self.derived_skipped),
            ("groups", self.groups),
            ("scenario_steps", self.scenario_steps),
        ]
    }

    pub fn is_empty(&self) -> bool {
        *self == Report::default()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rows()
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(k, n)| format!("{n} {}", k.replace('_', " ")))
            .collect();
        if parts.is_empty() {
            f.write_str("nothing to apply")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

/// Applies every section in order. On error the engine is left exactly as
/// it was.
pub fn apply_document(engine: &mut Engine, doc: &RcmDocument) -> Result<Report, DocumentError> {
    let mut work = engine.clone();
    let report = apply_into(&mut work, doc)?;
    *engine = work;
    Ok(report)
}

/// Placeholder time for records a document leaves undated.
fn epoch() -> Timestamp {
    Timestamp::from_epoch_seconds(0)
}

fn apply_into(e: &mut Engine, doc: &RcmDocument) -> Result<Report, DocumentError> {
    let mut report = Report::default();
    apply_schema(e.schema_mut(), doc, &mut report)?;

    let mut units: Vec<(usize, UnitDef)> = doc
        .units
        .iter()
        .enumerate()
        .map(|(i, u)| (i, UnitDef::new(&u.name, &u.dimension, u.scale, u.offset)))
        .collect();
    // canonical units first so a dimension is anchored before it is used
    units.sort_by_key(|(_, u)| !u.is_canonical());
    for (i, u) in units {
        e.units_mut()
            .register_unit(u)
            .map_err(|err| DocumentError::at(format!("units[{i}]"), err))?;
        report.units += 1;
    }

    let mut restore = Vec::new();
    for (i, ind) in doc.individuals.iter().enumerate() {
        let loc = format!("individuals[{i}]");
        let created_by = ind.created_by.as_deref().unwrap_or(SYSTEM);
        let created_at = ind.created_at.unwrap_or_else(epoch);
        e.create_individual(&ind.class, &ind.id, created_by, created_at)
            .map_err(|err| DocumentError::at(&loc, err))?;
        if ind.last_modified_by.is_some() || ind.last_modified_at.is_some() || ind.last_change.is_some() {
            restore.push((
                ind.id.clone(),
                ProvenanceRecord {
                    created_by: created_by.to_owned(),
                    created_at,
                    last_modified_by: ind.last_modified_by.clone().unwrap_or_else(|| created_by.to_owned()),
                    last_modified_at: ind.last_modified_at.unwrap_or(created_at),
                    last_change: ind.last_change.clone().unwrap_or_else(|| "created".to_owned()),
                },
            ));
        }
        report.individuals += 1;
    }

    for (i, f) in doc.facts.iter().enumerate() {
        if f.derived {
            report.derived_skipped += 1;
            continue;
        }
        apply_fact(e, f).map_err(|err| DocumentError::at(format!("facts[{i}]"), err))?;
        report.facts += 1;
    }
    for (id, record) in restore {
        e.store_mut()
            .restore_provenance(&id, record)
            .expect("individual was just created");
    }

    for (i, g) in doc.groups.iter().enumerate() {
        let loc = format!("groups[{i}]");
        let at = |err| DocumentError::at(&loc, err);
        if e.access().group(&g.id).is_none() {
            if e.store().individual(&g.id).is_ok() {
                e.adopt_group(&g.id).map_err(at)?;
            } else {
                e.create_group(&g.id, SYSTEM, epoch()).map_err(at)?;
            }
        }
        for m in &g.members {
            e.add_member(&g.id, m).map_err(at)?;
        }
        for p in &g.privileges {
            e.grant_privilege(&g.id, p).map_err(at)?;
        }
        report.groups += 1;
    }

    report.scenario_steps = doc.scenario.as_ref().map_or(0, |s| s.steps.len());
    Ok(report)
}

fn apply_fact(e: &mut Engine, f: &FactEntry) -> crate::engine::Result<()> {
    let property = e.property(&f.property)?;
    let ann = Annotations {
        timestamp: Some(f.timestamp),
        unit: f.unit.clone(),
        qoc: QoC {
            accuracy: f.accuracy,
            probability: f.probability,
            coverage: f.coverage.clone(),
            resolution: f.resolution,
            mean_error: f.mean_error,
            recurrence: f.recurrence.clone(),
        },
        source: f.source.clone(),
    };
    let actor = f
        .asserted_by
        .clone()
        .or_else(|| f.source.clone())
        .unwrap_or_else(|| SYSTEM.to_owned());
    let literal = f.value.to_string();
    let p = property.to_string();
    if e.schema().object_property(&property).is_some() {
        if !matches!(f.value, Literal::Text(_)) {
            return Err(crate::store::StoreError::TypeMismatch {
                property,
                expected: "individual id".into(),
                found: format!("`{literal}`"),
            }
            .into());
        }
        e.assert_relation(&f.subject, &p, &literal, ann, &actor, f.timestamp)?;
    } else {
        let value = parse_literal(e.schema(), &property, &literal)?;
        e.assert_data(&f.subject, &p, value, ann, &actor, f.timestamp)?;
    }
    Ok(())
}

enum Ref {
    Ready(TermName),
    /// Names a term the document defines but that is not registered yet.
    Wait,
}

/// Resolves a reference while some document terms are still pending. An
/// exact registered name wins; a name that could denote a pending term
/// waits; anything else is resolved against what is registered.
fn lookup(
    written: &str,
    exists: impl Fn(&TermName) -> bool,
    resolve: impl Fn(&str) -> Result<TermName, SchemaError>,
    pending: &[&TermName],
) -> Result<Ref, SchemaError> {
    let exact = TermName::parse(written)?;
    if exists(&exact) {
        return Ok(Ref::Ready(exact));
    }
    let may_be_pending = pending
        .iter()
        .any(|p| **p == exact || (!written.contains('#') && p.local() == written));
    if may_be_pending {
        return Ok(Ref::Wait);
    }
    resolve(written).map(Ref::Ready)
}

fn parse_names<'a>(section: &str, names: impl Iterator<Item = &'a str>) -> Result<Vec<TermName>, DocumentError> {
    names
        .enumerate()
        .map(|(i, n)| {
            TermName::parse(n).map_err(|e| DocumentError::at(format!("{section}[{i}]"), SchemaError::from(e)))
        })
        .collect()
}

fn apply_schema(schema: &mut Schema, doc: &RcmDocument, report: &mut Report) -> Result<(), DocumentError> {
    let sec = &doc.schema;

    // classes, retried until every parent is registered
    let names = parse_names("schema.classes", sec.classes.iter().map(|c| c.name.as_str()))?;
    let mut pending: Vec<usize> = (0..names.len()).collect();
    while !pending.is_empty() {
        let mut waiting = Vec::new();
        for (k, &i) in pending.iter().enumerate() {
            let c = &sec.classes[i];
            let loc = || format!("schema.classes[{i}]");
            let open: Vec<&TermName> = waiting
                .iter()
                .chain(&pending[k..])
                .map(|&j: &usize| &names[j])
                .collect();
            let parent = lookup(
                &c.parent,
                |t| schema.class(t).is_some(),
                |w| {
                    schema.resolve_class(w).map_err(|e| match e {
                        SchemaError::UnknownClass(_) => {
                            SchemaError::UnknownParent(TermName::parse(w).expect("parsed above"))
                        }
                        e => e,
                    })
                },
                &open,
            )
            .map_err(|e| DocumentError::at(loc(), e))?;
            match parent {
                Ref::Wait => waiting.push(i),
                Ref::Ready(p) => {
                    schema
                        .define_class(names[i].clone(), p, c.label.as_deref().unwrap_or(""))
                        .map_err(|e| DocumentError::at(loc(), e))?;
                    report.classes += 1;
                }
            }
        }
        if waiting.len() == pending.len() {
            let i = waiting[0];
            return Err(DocumentError::at(
                format!("schema.classes[{i}]"),
                SchemaError::WouldCreateCycle(names[i].clone()),
            ));
        }
        pending = waiting;
    }

    // properties, retried until super-properties are registered; inverses
    // that are not yet registered are linked at the end
    let obj_names = parse_names(
        "schema.object_properties",
        sec.object_properties.iter().map(|p| p.name.as_str()),
    )?;
    let data_names = parse_names(
        "schema.data_properties",
        sec.data_properties.iter().map(|p| p.name.as_str()),
    )?;
    #[derive(Clone, Copy)]
    enum Item {
        Obj(usize),
        Data(usize),
    }
    let name_of = |it: Item| match it {
        Item::Obj(i) => &obj_names[i],
        Item::Data(i) => &data_names[i],
    };
    let loc_of = |it: Item| match it {
        Item::Obj(i) => format!("schema.object_properties[{i}]"),
        Item::Data(i) => format!("schema.data_properties[{i}]"),
    };
    let mut pending: Vec<Item> = (0..obj_names.len())
        .map(Item::Obj)
        .chain((0..data_names.len()).map(Item::Data))
        .collect();
    let mut deferred_inverses: Vec<(Item, TermName, String)> = Vec::new();
    while !pending.is_empty() {
        let mut waiting: Vec<Item> = Vec::new();
        for (k, &it) in pending.iter().enumerate() {
            let open: Vec<&TermName> = waiting.iter().chain(&pending[k..]).map(|&j| name_of(j)).collect();
            let at = |e: SchemaError| DocumentError::at(loc_of(it), e);
            let prop_ref = |w: &str| {
                lookup(
                    w,
                    |t| schema.property(t).is_some(),
                    |w| schema.resolve_property(w),
                    &open,
                )
            };
            let sup = match it {
                Item::Obj(i) => sec.object_properties[i].sub_property_of.as_deref(),
                Item::Data(i) => sec.data_properties[i].sub_property_of.as_deref(),
            };
            let sup = match sup.map(prop_ref).transpose().map_err(at)? {
                Some(Ref::Wait) => {
                    waiting.push(it);
                    continue;
                }
                Some(Ref::Ready(t)) => Some(t),
                None => None,
            };
            match it {
                Item::Obj(i) => {
                    let p = &sec.object_properties[i];
                    let domain = p
                        .domain
                        .iter()
                        .map(|d| schema.resolve_class(d))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at)?;
                    let range = schema.resolve_class(&p.range).map_err(at)?;
                    let mut def = ObjectPropertyDef::new(obj_names[i].clone(), range.clone(), range);
                    def.domain = domain;
                    def.functional = p.functional;
                    def.inverse_functional = p.inverse_functional;
                    def.sub_property_of = sup;
                    def.equivalences = p.equivalent.iter().cloned().collect();
                    for q in &p.inverse_of {
                        match prop_ref(q).map_err(at)? {
                            Ref::Ready(t) => {
                                def.inverse_of.insert(t);
                            }
                            Ref::Wait => deferred_inverses.push((it, obj_names[i].clone(), q.clone())),
                        }
                    }
                    report.equivalences += def.equivalences.len();
                    schema.define_object_property(def).map_err(at)?;
                    report.object_properties += 1;
                }
                Item::Data(i) => {
                    let p = &sec.data_properties[i];
                    let domain = schema.resolve_class(&p.domain).map_err(at)?;
                    let mut def = DataPropertyDef::new(data_names[i].clone(), domain, p.value_type, p.volatility);
                    def.sub_property_of = sup;
                    def.equivalences = p.equivalent.iter().cloned().collect();
                    report.equivalences += def.equivalences.len();
                    schema.define_data_property(def).map_err(at)?;
                    report.data_properties += 1;
                }
            }
        }
        if waiting.len() == pending.len() {
            let it = waiting[0];
            return Err(DocumentError::at(
                loc_of(it),
                SchemaError::WouldCreateCycle(name_of(it).clone()),
            ));
        }
        pending = waiting;
    }
    for (it, p, q) in deferred_inverses {
        let at = |e: SchemaError| DocumentError::at(loc_of(it), e);
        let q = schema.resolve_property(&q).map_err(at)?;
        schema.link_inverse(&p, &q).map_err(at)?;
    }

    for (i, c) in sec.classes.iter().enumerate() {
        for iri in &c.equivalent {
            schema
                .declare_equivalence(&names[i], TermKind::Class, iri)
                .map_err(|e| DocumentError::at(format!("schema.classes[{i}]"), e))?;
            report.equivalences += 1;
        }
    }
    for (i, q) in sec.equivalences.iter().enumerate() {
        let at = |e: SchemaError| DocumentError::at(format!("schema.equivalences[{i}]"), e);
        let term = match q.kind {
            TermKind::Class => schema.resolve_class(&q.term),
            TermKind::Property => schema.resolve_property(&q.term),
        }
        .map_err(at)?;
        schema.declare_equivalence(&term, q.kind, &q.iri).map_err(at)?;
        report.equivalences += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_document;

    fn apply(e: &mut Engine, text: &str) -> Result<Report, DocumentError> {
        apply_document(e, &parse_document(text).unwrap())
    }

    #[test]
    fn forward_references_resolve() {
        let mut e = Engine::new();
        let r = apply(
            &mut e,
            r#"
[[schema.classes]]
name = "sensor"
parent = "device"

[[schema.classes]]
name = "device"
parent = "entity"

[[schema.object_properties]]
name = "child"
domain = ["device"]
range = "device"
inverse_of = ["parent"]
sub_property_of = "related"

[[schema.object_properties]]
name = "parent"
domain = ["device"]
range = "device"
sub_property_of = "related"

[[schema.object_properties]]
name = "related"
domain = ["device"]
range = "device"
"#,
        )
        .unwrap();
        assert_eq!((r.classes, r.object_properties), (2, 3));
        assert!(e.is_subclass_of("sensor", "entity").unwrap());
        let child = e.schema().object_property(&TermName::parse("child").unwrap()).unwrap();
        assert_eq!(child.unique_inverse().unwrap().to_string(), "parent");
        let parent = e.schema().object_property(&TermName::parse("parent").unwrap()).unwrap();
        assert_eq!(parent.unique_inverse().unwrap().to_string(), "child");
    }

    #[test]
    fn cycles_and_dangling_references() {
        let mut e = Engine::new();
        let err = apply(
            &mut e,
            "[[schema.classes]]\nname = \"a\"\nparent = \"b\"\n[[schema.classes]]\nname = \"b\"\nparent = \"a\"\n",
        )
        .unwrap_err();
        assert_eq!(err.kind(), "WouldCreateCycle");
        assert!(err.to_string().starts_with("schema.classes[0]"), "{err}");
        let err = apply(&mut e, "[[schema.classes]]\nname = \"a\"\nparent = \"nowhere\"\n").unwrap_err();
        assert_eq!(err.kind(), "UnknownParent");
        assert_eq!(e, Engine::new());
    }

    #[test]
    fn failure_leaves_engine_unchanged() {
        let mut e = Engine::with_core();
        let before = e.clone();
        let err = apply(
            &mut e,
            "[[schema.classes]]\nname = \"fresh\"\nparent = \"entity\"\n[[schema.classes]]\nname = \"person\"\nparent = \"entity\"\n",
        )
        .unwrap_err();
        assert_eq!(err.kind(), "DuplicateTerm");
        assert_eq!(e, before);
    }

    #[test]
    fn empty_document_changes_nothing() {
        let mut e = Engine::with_core();
        let before = e.clone();
        let r = apply(&mut e, "").unwrap();
        assert!(r.is_empty());
        assert_eq!(e, before);
    }

    #[test]
    fn facts_groups_and_provenance() {
        let mut e = Engine::with_core();
        let r = apply(
            &mut e,
            r#"
[[individuals]]
id = "envreading1"
class = "environment"
created_by = "sensor1"
created_at = "2013-09-18T14:00:00"

[[individuals]]
id = "r1"
class = "person"

[[facts]]
subject = "envreading1"
property = "temperature"
value = "100.0"
timestamp = "2013-09-18T14:00:00"
scale = "Fahrenheit"
probability = 0.9
source = "sensor1"

[[groups]]
id = "team"
members = ["r1"]
"#,
        )
        .unwrap();
        assert_eq!((r.individuals, r.facts, r.groups), (2, 1, 1));
        let f = &e.store().facts()[0];
        assert_eq!(f.asserted_by, "sensor1");
        assert_eq!(f.payload.unit.as_deref(), Some("Fahrenheit"));
        let p = e.provenance("envreading1").unwrap();
        assert_eq!(p.created_by, "sensor1");
        assert_eq!(p.last_change, "asserted environment#temperature");
        assert!(e.access().group("team").unwrap().members.contains("r1"));

        let err = apply(
            &mut e,
            "[[facts]]\nsubject = \"envreading1\"\nproperty = \"temperature\"\nvalue = \"hot\"\ntimestamp = \"2013-09-18T14:00:00\"\n",
        )
        .unwrap_err();
        assert_eq!(err.kind(), "TypeMismatch");
        assert!(err.to_string().starts_with("facts[0]"), "{err}");
    }
}
