//! Canonical export: the engine state as a document that re-applies to an
//! identical state.

use serde::Serialize;

use crate::engine::Engine;
use crate::schema::Schema;
use crate::store::SYSTEM;
use crate::term::TermName;

use super::document::{
    ClassEntry, DataPropertyEntry, FactEntry, GroupEntry, IndividualEntry, Literal, ObjectPropertyEntry, RcmDocument,
    SchemaSection, UnitEntry,
};

fn names<'a>(it: impl IntoIterator<Item = &'a TermName>) -> Vec<String> {
    it.into_iter().map(|t| t.to_string()).collect()
}

/// The engine state as a document. Root classes are implied and left
/// out; definitions are ordered by name, facts by id, groups by creation.
pub fn to_document(engine: &Engine) -> RcmDocument {
    let schema = engine.schema();
    let classes = schema
        .classes()
        .filter(|c| !Schema::is_root(&c.name))
        .map(|c| ClassEntry {
            name: c.name.to_string(),
            parent: c.parent.as_ref().expect("non-root").to_string(),
            label: (c.label != c.name.local()).then(|| c.label.clone()),
            equivalent: c.equivalences.iter().cloned().collect(),
        })
        .collect();
    let object_properties = schema
        .object_properties()
        .map(|p| ObjectPropertyEntry {
            name: p.name.to_string(),
            domain: names(&p.domain),
            range: p.range.to_string(),
            functional: p.functional,
            inverse_functional: p.inverse_functional,
            inverse_of: names(&p.inverse_of),
            sub_property_of: p.sub_property_of.as_ref().map(|s| s.to_string()),
            equivalent: p.equivalences.iter().cloned().collect(),
        })
        .collect();
    let data_properties = schema
        .data_properties()
        .map(|p| DataPropertyEntry {
            name: p.name.to_string(),
            domain: p.domain.to_string(),
            value_type: p.value_type,
            volatility: p.volatility,
            sub_property_of: p.sub_property_of.as_ref().map(|s| s.to_string()),
            equivalent: p.equivalences.iter().cloned().collect(),
        })
        .collect();

    let units = engine
        .units()
        .units()
        .into_iter()
        .map(|u| UnitEntry {
            name: u.name.clone(),
            dimension: u.dimension.clone(),
            scale: u.scale,
            offset: u.offset,
        })
        .collect();

    let individuals = engine
        .store()
        .individuals()
        .map(|ind| {
            let p = &ind.provenance;
            IndividualEntry {
                id: ind.id.clone(),
                class: ind.class.to_string(),
                created_by: Some(p.created_by.clone()),
                created_at: Some(p.created_at),
                last_modified_by: Some(p.last_modified_by.clone()),
                last_modified_at: Some(p.last_modified_at),
                last_change: Some(p.last_change.clone()),
            }
        })
        .collect();

    let facts = engine
        .store()
        .facts()
        .iter()
        .map(|f| {
            let av = &f.payload;
            let default_actor = av.source.as_deref().unwrap_or(SYSTEM);
            FactEntry {
                subject: f.subject.clone(),
                property: f.property.to_string(),
                value: Literal::Text(av.value.to_string()),
                timestamp: av.timestamp,
                unit: av.unit.clone(),
                accuracy: av.qoc.accuracy,
                probability: av.qoc.probability,
                coverage: av.qoc.coverage.clone(),
                resolution: av.qoc.resolution,
                mean_error: av.qoc.mean_error,
                recurrence: av.qoc.recurrence.clone(),
                source: av.source.clone(),
                asserted_by: (f.asserted_by != default_actor).then(|| f.asserted_by.clone()),
                derived: f.derived_from.is_some(),
            }
        })
        .collect();

    let groups = engine
        .access()
        .groups()
        .iter()
        .map(|g| GroupEntry {
            id: g.id.clone(),
            members: g.members.iter().cloned().collect(),
            privileges: names(&g.privileges),
        })
        .collect();

    RcmDocument {
        schema: SchemaSection {
            classes,
            object_properties,
            data_properties,
            equivalences: Vec::new(),
        },
        units,
        individuals,
        facts,
        groups,
        scenario: None,
    }
}

fn section<T: Serialize + ?Sized>(out: &mut String, name: &str, value: &T) {
    let mut table = toml::Table::new();
    table.insert(
        name.to_owned(),
        toml::Value::try_from(value).expect("document entries serialize"),
    );
    let text = toml::to_string(&table).expect("document entries serialize");
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str(text.trim_end());
    out.push('\n');
}

/// Byte-stable text of [`to_document`], sections in application order.
/// Empty sections come first as `name = []`, since a bare key after a
/// table header would belong to that table.
pub fn export_canonical(engine: &Engine) -> String {
    let doc = to_document(engine);
    let mut out = String::new();
    let lists = [
        ("units", doc.units.is_empty()),
        ("individuals", doc.individuals.is_empty()),
        ("facts", doc.facts.is_empty()),
        ("groups", doc.groups.is_empty()),
    ];
    for (name, _) in lists.iter().filter(|(_, empty)| *empty) {
        out.push_str(&format!("{name} = []\n"));
    }
    section(&mut out, "schema", &doc.schema);
    if !doc.units.is_empty() {
        section(&mut out, "units", &doc.units);
    }
    if !doc.individuals.is_empty() {
        section(&mut out, "individuals", &doc.individuals);
    }
    if !doc.facts.is_empty() {
        section(&mut out, "facts", &doc.facts);
    }
    if !doc.groups.is_empty() {
        section(&mut out, "groups", &doc.groups);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{apply_document, parse_document};

    fn reimport(text: &str) -> Engine {
        let mut e = Engine::new();
        apply_document(&mut e, &parse_document(text).unwrap()).unwrap();
        e
    }

    #[test]
    fn empty_engine_exports_empty_sections() {
        let text = export_canonical(&Engine::new());
        let doc = parse_document(&text).unwrap();
        assert!(doc.is_empty(), "{text}");
        assert_eq!(export_canonical(&reimport(&text)), text);
    }

    #[test]
    fn core_round_trips() {
        let core = Engine::with_core();
        let text = export_canonical(&core);
        assert_eq!(export_canonical(&core), text);
        let back = reimport(&text);
        assert_eq!(back.schema().fingerprint(), core.schema().fingerprint());
        assert_eq!(export_canonical(&back), text);
    }

    #[test]
    fn derived_facts_are_marked_and_rebuilt() {
        let mut e = Engine::with_core();
        let t = crate::term::Timestamp::from_epoch_seconds(60);
        for id in ["ann", "bob"] {
            e.create_individual("person", id, SYSTEM, t).unwrap();
        }
        let (_, derived) = e
            .assert_relation("bob", "father", "ann", Default::default(), "x", t)
            .unwrap();
        assert!(derived.is_some());
        e.create_individual("location", "lab", SYSTEM, t).unwrap();
        e.assert_relation("bob", "locatedin", "lab", Default::default(), "x", t)
            .unwrap();
        let text = export_canonical(&e);
        assert!(text.contains("derived = true"), "{text}");
        let back = reimport(&text);
        assert_eq!(back.store(), e.store());
        assert_eq!(export_canonical(&back), text);
    }
}
