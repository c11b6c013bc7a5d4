//! The engine ties the registries, the fact store, access groups and live
//! situations together behind a string-keyed API.
//!
//! Term arguments are written names (`person`, `person#daughter`, or a bare
//! local part that resolves uniquely). All mutation goes through `&mut
//! self`, so wrapping an engine in a `RwLock` gives many concurrent readers
//! with serialized writers; every operation is all-or-nothing.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::access::{AccessControl, AccessError, Decision};
use crate::io::{self, DocumentError};
use crate::issue::Issue;
use crate::quality::{UnitError, UnitRegistry};
use crate::schema::{Schema, SchemaError};
use crate::situation::{ActivityId, GoalId, Situation, SituationError, SituationId, Snapshot};
use crate::store::{
    parse_literal, AnnotatedValue, Annotations, ContextStore, Fact, Pattern, ProvenanceRecord, ResolutionPolicy,
    StoreError, ValuePredicate, SYSTEM,
};
use crate::term::{TermName, Timestamp, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error(transparent)]
    Situation(#[from] SituationError),
    #[error(transparent)]
    Document(#[from] DocumentError),
}

impl Error {
    /// Stable name of the failure, e.g. `PreconditionNotMet`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(e) => e.kind(),
            Error::Store(e) => e.kind(),
            Error::Unit(e) => e.kind(),
            Error::Access(e) => e.kind(),
            Error::Situation(e) => e.kind(),
            Error::Document(e) => e.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Query constraints with written (unresolved) names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub class: Option<String>,
    pub property: Option<String>,
    pub subject: Option<String>,
    pub value: Option<ValuePredicate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Engine {
    schema: Schema,
    units: UnitRegistry,
    store: ContextStore,
    access: AccessControl,
    situations: Vec<Situation>,
}

fn term(s: &str) -> TermName {
    TermName::parse(s).expect("valid builtin term")
}

impl Engine {
    /// An engine with only the six root classes and no units.
    pub fn new() -> Self {
        Self::default()
    }

    /// An engine preloaded with the bundled core ontology and units.
    pub fn with_core() -> Self {
        let mut e = Self::new();
        for name in ["units.rcm", "core-ontology.rcm"] {
            let text = io::bundled(name).expect("bundled document exists");
            let doc = io::parse_document(text).expect("bundled document parses");
            io::apply_document(&mut e, &doc).expect("bundled document applies");
        }
        e
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_mut(&mut self) -> &mut Schema {
        &mut self.schema
    }

    pub fn units(&self) -> &UnitRegistry {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut UnitRegistry {
        &mut self.units
    }

    pub fn store(&self) -> &ContextStore {
        &self.store
    }

    pub(crate) fn store_mut(&mut self) -> &mut ContextStore {
        &mut self.store
    }

    pub fn access(&self) -> &AccessControl {
        &self.access
    }

    pub fn class(&self, written: &str) -> Result<TermName> {
        Ok(self.schema.resolve_class(written)?)
    }

    pub fn property(&self, written: &str) -> Result<TermName> {
        Ok(self.schema.resolve_property(written)?)
    }

    pub fn is_subclass_of(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.schema.is_subclass_of(&self.class(a)?, &self.class(b)?)?)
    }

    pub fn validate_schema(&self) -> Vec<Issue> {
        self.schema.validate()
    }

    // --- store ---

    pub fn create_individual(&mut self, class: &str, id: &str, actor: &str, at: Timestamp) -> Result<()> {
        let class = self.class(class)?;
        self.store.create_individual(&self.schema, &class, id, actor, at)?;
        Ok(())
    }

    pub fn assert_data(
        &mut self,
        subject: &str,
        property: &str,
        value: Value,
        ann: Annotations,
        actor: &str,
        at: Timestamp,
    ) -> Result<Fact> {
        let p = self.property(property)?;
        Ok(self
            .store
            .assert_data(&self.schema, &self.units, subject, &p, value, ann, actor, at)?)
    }

    /// Like [`Engine::assert_data`], parsing `literal` by the property's
    /// declared value type.
    pub fn assert_literal(
        &mut self,
        subject: &str,
        property: &str,
        literal: &str,
        ann: Annotations,
        actor: &str,
        at: Timestamp,
    ) -> Result<Fact> {
        let p = self.property(property)?;
        if self.schema.object_property(&p).is_some() {
            return Err(StoreError::NotADataProperty(p).into());
        }
        let value = parse_literal(&self.schema, &p, literal)?;
        Ok(self
            .store
            .assert_data(&self.schema, &self.units, subject, &p, value, ann, actor, at)?)
    }

    pub fn assert_relation(
        &mut self,
        subject: &str,
        property: &str,
        object: &str,
        ann: Annotations,
        actor: &str,
        at: Timestamp,
    ) -> Result<(Fact, Option<Fact>)> {
        let p = self.property(property)?;
        Ok(self
            .store
            .assert_relation(&self.schema, &self.units, subject, &p, object, ann, actor, at)?)
    }

    pub fn get_current(&self, subject: &str, property: &str, policy: ResolutionPolicy) -> Result<Vec<Fact>> {
        let p = self.property(property)?;
        Ok(self.store.get_current(&self.schema, subject, &p, policy)?)
    }

    pub fn history(&self, subject: &str, property: &str) -> Result<Vec<Fact>> {
        let p = self.property(property)?;
        Ok(self.store.history(subject, &p)?)
    }

    pub fn provenance(&self, subject: &str) -> Result<&ProvenanceRecord> {
        Ok(self.store.provenance(subject)?)
    }

    pub fn query(&self, q: &Query) -> Result<Vec<Fact>> {
        let resolve = |kind, name: &str, r: std::result::Result<TermName, SchemaError>| {
            r.map_err(|e| match e {
                SchemaError::AmbiguousTerm { .. } => Error::Schema(e),
                _ => Error::Schema(SchemaError::UnknownTerm {
                    kind,
                    name: name.to_owned(),
                }),
            })
        };
        let pattern = Pattern {
            class: q
                .class
                .as_deref()
                .map(|c| resolve(crate::schema::TermKind::Class, c, self.schema.resolve_class(c)))
                .transpose()?,
            property: q
                .property
                .as_deref()
                .map(|p| resolve(crate::schema::TermKind::Property, p, self.schema.resolve_property(p)))
                .transpose()?,
            subject: q.subject.clone(),
            value: q.value.clone(),
        };
        Ok(self.store.query(&self.schema, &self.units, &pattern)?)
    }

    pub fn location_at_granularity(&self, subject: &str, level: usize) -> Result<Option<String>> {
        Ok(self.store.location_at_granularity(&self.schema, subject, level)?)
    }

    /// Aggregates two engines built on the same schema and units: the
    /// stores are merged and access groups are united by id. Situations
    /// are not carried over from `other`.
    pub fn merge(&self, other: &Engine) -> Result<Engine> {
        if self.schema.fingerprint() != other.schema.fingerprint() || self.units != other.units {
            return Err(StoreError::SchemaMismatch.into());
        }
        let store = self.store.merge(&other.store)?;
        let mut access = self.access.clone();
        for g in other.access.groups() {
            if access.group(&g.id).is_none() {
                access.adopt_group(&self.schema, &store, &g.id)?;
            }
            for m in &g.members {
                access.add_member(&self.schema, &store, &g.id, m)?;
            }
            for p in &g.privileges {
                access.grant_privilege(&self.schema, &g.id, p)?;
            }
        }
        Ok(Engine {
            schema: self.schema.clone(),
            units: self.units.clone(),
            store,
            access,
            situations: self.situations.clone(),
        })
    }

    // --- units ---

    pub fn convert(&self, value: f64, from: &str, to: &str) -> Result<f64> {
        Ok(self.units.convert(value, from, to)?)
    }

    pub fn compare(&self, a: &AnnotatedValue, b: &AnnotatedValue) -> Result<Ordering> {
        Ok(self.units.compare(a, b)?)
    }

    // --- access ---

    /// Creates an individual of class `accessgroup` and registers it as an
    /// empty group.
    pub fn create_group(&mut self, id: &str, actor: &str, at: Timestamp) -> Result<()> {
        let mut store = self.store.clone();
        store.create_individual(&self.schema, &term("accessgroup"), id, actor, at)?;
        self.access.adopt_group(&self.schema, &store, id)?;
        self.store = store;
        Ok(())
    }

    pub(crate) fn adopt_group(&mut self, id: &str) -> Result<()> {
        self.access.adopt_group(&self.schema, &self.store, id)?;
        Ok(())
    }

    pub fn add_member(&mut self, group: &str, entity: &str) -> Result<()> {
        Ok(self.access.add_member(&self.schema, &self.store, group, entity)?)
    }

    pub fn grant_privilege(&mut self, group: &str, activity_class: &str) -> Result<()> {
        let class = self
            .class(activity_class)
            .map_err(|_| AccessError::NotAnActivityClass(activity_class.to_owned()))?;
        Ok(self.access.grant_privilege(&self.schema, group, &class)?)
    }

    pub fn check(&self, entity: &str, activity_class: &str) -> Result<Decision> {
        let class = self
            .class(activity_class)
            .map_err(|_| AccessError::NotAnActivityClass(activity_class.to_owned()))?;
        Ok(self.access.check(&self.schema, &self.store, entity, &class)?)
    }

    // --- situations ---

    pub fn trigger(&mut self, event: &str, root_goal: &str, t0: Timestamp) -> Result<SituationId> {
        let ind = self.store.individual(event)?;
        if !self.schema.subclass_unchecked(&ind.class, &term("event")) {
            return Err(SituationError::NotAnEvent(event.to_owned()).into());
        }
        let id = SituationId(self.situations.len() as u32 + 1);
        self.situations.push(Situation::new(id, event, root_goal, t0));
        Ok(id)
    }

    pub fn situations(&self) -> &[Situation] {
        &self.situations
    }

    pub fn situation(&self, id: SituationId) -> Result<&Situation> {
        id.0.checked_sub(1)
            .and_then(|i| self.situations.get(i as usize))
            .ok_or_else(|| SituationError::UnknownSituation(id.to_string()).into())
    }

    fn situation_mut(&mut self, id: SituationId) -> Result<&mut Situation> {
        id.0.checked_sub(1)
            .and_then(|i| self.situations.get_mut(i as usize))
            .ok_or_else(|| SituationError::UnknownSituation(id.to_string()).into())
    }

    pub fn add_goal(&mut self, sid: SituationId, description: &str, parent: GoalId) -> Result<GoalId> {
        Ok(self.situation_mut(sid)?.add_goal(description, parent)?.id)
    }

    pub fn add_activity(
        &mut self,
        sid: SituationId,
        class: &str,
        goal: GoalId,
        preconditions: &[GoalId],
        performers: &[&str],
        atomic: bool,
    ) -> Result<ActivityId> {
        let class = self
            .class(class)
            .map_err(|_| SituationError::NotAnActivityClass(class.to_owned()))?;
        if !self.schema.subclass_unchecked(&class, &term("activity")) {
            return Err(SituationError::NotAnActivityClass(class.to_string()).into());
        }
        for p in performers {
            self.store.individual(p)?;
        }
        let performers: BTreeSet<String> = performers.iter().map(|p| p.to_string()).collect();
        let pre: BTreeSet<GoalId> = preconditions.iter().copied().collect();
        Ok(self
            .situation_mut(sid)?
            .add_activity(class, goal, pre, performers, atomic)?
            .id)
    }

    pub fn start_activity(&mut self, sid: SituationId, activity: ActivityId, t: Timestamp) -> Result<()> {
        let Engine {
            schema,
            store,
            access,
            situations,
            ..
        } = self;
        let sit = sid
            .0
            .checked_sub(1)
            .and_then(|i| situations.get_mut(i as usize))
            .ok_or_else(|| SituationError::UnknownSituation(sid.to_string()))?;
        let auth = |performer: &str, class: &TermName| {
            access
                .check(schema, store, performer, class)
                .map(|d| d.is_allowed())
                .unwrap_or(false)
        };
        sit.start_activity(activity, t, &auth)?;
        Ok(())
    }

    pub fn complete_activity(&mut self, sid: SituationId, activity: ActivityId, t: Timestamp) -> Result<()> {
        self.situation_mut(sid)?.complete_activity(activity, t)?;
        Ok(())
    }

    pub fn abort_activity(&mut self, sid: SituationId, activity: ActivityId, t: Timestamp) -> Result<()> {
        self.situation_mut(sid)?.abort_activity(activity, t)?;
        Ok(())
    }

    pub fn status(&self, sid: SituationId) -> Result<Snapshot> {
        Ok(self.situation(sid)?.status())
    }
}

/// Shorthand for a system-made assertion at `at`.
pub fn system_actor() -> &'static str {
    SYSTEM
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    #[test]
    fn engine_is_shareable() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Engine>();
        assert_send_sync::<Snapshot>();
        assert_send_sync::<Fact>();
    }

    #[test]
    fn concurrent_readers() {
        let mut e = Engine::with_core();
        e.create_individual("environment", "envreading1", "sensor1", ts("2013-09-18T14:00:00"))
            .unwrap();
        e.assert_literal(
            "envreading1",
            "temperature",
            "100.0",
            Annotations::default(),
            "sensor1",
            ts("2013-09-18T14:00:00"),
        )
        .unwrap();
        let shared = std::sync::Arc::new(std::sync::RwLock::new(e));
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let s = shared.clone();
                std::thread::spawn(move || {
                    let e = s.read().unwrap();
                    e.get_current("envreading1", "temperature", ResolutionPolicy::Latest)
                        .unwrap()
                        .len()
                })
            })
            .collect();
        for r in readers {
            assert_eq!(r.join().unwrap(), 1);
        }
    }

    #[test]
    fn trigger_checks_event_class() {
        let mut e = Engine::with_core();
        let t0 = ts("2013-09-18T14:00:00");
        e.create_individual("event", "fire1", SYSTEM, t0).unwrap();
        e.create_individual("person", "xyz", SYSTEM, t0).unwrap();
        let a = e.trigger("fire1", "Evacuate", t0).unwrap();
        let b = e.trigger("fire1", "Evacuate", t0).unwrap();
        assert_ne!(a, b);
        assert_eq!(e.trigger("xyz", "Evacuate", t0).unwrap_err().kind(), "NotAnEvent");
        assert_eq!(
            e.trigger("ghost", "Evacuate", t0).unwrap_err().kind(),
            "UnknownIndividual"
        );
        assert_eq!(e.status(SituationId(7)).unwrap_err().kind(), "UnknownSituation");
    }

    #[test]
    fn activity_needs_activity_class_and_known_performers() {
        let mut e = Engine::with_core();
        let t0 = ts("2013-09-18T14:00:00");
        e.create_individual("event", "fire1", SYSTEM, t0).unwrap();
        let s = e.trigger("fire1", "Evacuate", t0).unwrap();
        let root = e.status(s).unwrap().root;
        assert_eq!(
            e.add_activity(s, "person", root, &[], &[], false).unwrap_err().kind(),
            "NotAnActivityClass"
        );
        assert_eq!(
            e.add_activity(s, "activity", root, &[], &["ghost"], false)
                .unwrap_err()
                .kind(),
            "UnknownIndividual"
        );
    }

    #[test]
    fn start_is_gated_by_groups() {
        let mut e = Engine::with_core();
        let t0 = ts("2013-09-18T14:00:00");
        e.schema_mut()
            .define_class(term("readsensors"), term("activity"), "")
            .unwrap();
        e.create_individual("event", "fire1", SYSTEM, t0).unwrap();
        e.create_individual("person", "responder1", SYSTEM, t0).unwrap();
        e.create_group("responders", SYSTEM, t0).unwrap();
        e.add_member("responders", "responder1").unwrap();
        let s = e.trigger("fire1", "Evacuate", t0).unwrap();
        let root = e.status(s).unwrap().root;
        let a = e
            .add_activity(s, "readsensors", root, &[], &["responder1"], false)
            .unwrap();
        assert_eq!(e.start_activity(s, a, t0).unwrap_err().kind(), "AccessDenied");
        e.grant_privilege("responders", "readsensors").unwrap();
        e.start_activity(s, a, t0).unwrap();
        assert_eq!(
            e.create_group("responders", SYSTEM, t0).unwrap_err().kind(),
            "DuplicateIndividual"
        );
    }

    #[test]
    fn merge_requires_same_schema() {
        let a = Engine::with_core();
        let mut b = Engine::with_core();
        b.schema_mut().define_class(term("extra"), term("entity"), "").unwrap();
        assert_eq!(a.merge(&b).unwrap_err().kind(), "SchemaMismatch");
        assert!(a.merge(&a).is_ok());
    }
}
