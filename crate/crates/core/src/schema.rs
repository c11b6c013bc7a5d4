//! Ontology registry: a single-parent class forest rooted at the six
//! top-level classes, object and data properties, and equivalence
//! mappings onto external IRIs.
//!
//! Terms are only ever added. Every registration either succeeds
//! completely or leaves the registry untouched.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::issue::Issue;
use crate::term::{InvalidTerm, TermName, ValueType};

/// The pre-seeded top-level classes.
pub const ROOT_CLASSES: [&str; 6] = ["entity", "event", "activity", "location", "time", "goal"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: TermName,
    /// `None` only for the root classes.
    pub parent: Option<TermName>,
    pub label: String,
    pub equivalences: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectPropertyDef {
    pub name: TermName,
    /// A subject is in the domain when its class is a subclass of any of
    /// these classes.
    pub domain: Vec<TermName>,
    pub range: TermName,
    pub functional: bool,
    pub inverse_functional: bool,
    pub inverse_of: BTreeSet<TermName>,
    pub sub_property_of: Option<TermName>,
    pub equivalences: BTreeSet<String>,
}

impl ObjectPropertyDef {
    pub fn new(name: TermName, domain: TermName, range: TermName) -> Self {
        ObjectPropertyDef {
            name,
            domain: vec![domain],
            range,
            functional: false,
            inverse_functional: false,
            inverse_of: BTreeSet::new(),
            sub_property_of: None,
            equivalences: BTreeSet::new(),
        }
    }

    /// The inverse used for materialization, if exactly one is declared.
    pub fn unique_inverse(&self) -> Option<&TermName> {
        if self.inverse_of.len() == 1 {
            self.inverse_of.iter().next()
        } else {
            None
        }
    }

    /// Several declared inverses leave the inverse relation unresolved.
    pub fn inverse_is_ambiguous(&self) -> bool {
        self.inverse_of.len() > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Volatility {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPropertyDef {
    pub name: TermName,
    pub domain: TermName,
    pub value_type: ValueType,
    pub volatility: Volatility,
    pub sub_property_of: Option<TermName>,
    pub equivalences: BTreeSet<String>,
}

impl DataPropertyDef {
    pub fn new(name: TermName, domain: TermName, value_type: ValueType, volatility: Volatility) -> Self {
        DataPropertyDef {
            name,
            domain,
            value_type,
            volatility,
            sub_property_of: None,
            equivalences: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Class,
    Property,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermKind::Class => "class",
            TermKind::Property => "property",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PropertyDef<'a> {
    Object(&'a ObjectPropertyDef),
    Data(&'a DataPropertyDef),
}

impl PropertyDef<'_> {
    pub fn name(&self) -> &TermName {
        match self {
            PropertyDef::Object(p) => &p.name,
            PropertyDef::Data(p) => &p.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error(transparent)]
    InvalidTerm(#[from] InvalidTerm),
    #[error("term `{0}` is already defined")]
    DuplicateTerm(TermName),
    #[error("unknown parent class `{0}`")]
    UnknownParent(TermName),
    #[error("defining `{0}` would create a cycle in the class hierarchy")]
    WouldCreateCycle(TermName),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unknown {kind} `{name}`")]
    UnknownTerm { kind: TermKind, name: String },
    #[error("`{name}` is ambiguous: matches {}", candidates.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))]
    AmbiguousTerm { name: String, candidates: Vec<TermName> },
    #[error("`{0}` is not an object property")]
    NotAnObjectProperty(TermName),
    #[error("`{0}` is not a data property")]
    NotADataProperty(TermName),
    #[error("property `{0}` needs at least one domain class")]
    EmptyDomain(TermName),
    #[error("`{iri}` is already mapped to {existing_kind} `{existing}`")]
    ConflictingMapping {
        iri: String,
        existing_kind: TermKind,
        existing: TermName,
    },
}

impl SchemaError {
    pub fn kind(&self) -> &'static str {
        match self {
            SchemaError::InvalidTerm(_) => "InvalidTerm",
            SchemaError::DuplicateTerm(_) => "DuplicateTerm",
            SchemaError::UnknownParent(_) => "UnknownParent",
            SchemaError::WouldCreateCycle(_) => "WouldCreateCycle",
            SchemaError::UnknownClass(_) => "UnknownClass",
            SchemaError::UnknownProperty(_) => "UnknownProperty",
            SchemaError::UnknownTerm { .. } => "UnknownTerm",
            SchemaError::AmbiguousTerm { .. } => "AmbiguousTerm",
            SchemaError::NotAnObjectProperty(_) => "NotAnObjectProperty",
            SchemaError::NotADataProperty(_) => "NotADataProperty",
            SchemaError::EmptyDomain(_) => "EmptyDomain",
            SchemaError::ConflictingMapping { .. } => "ConflictingMapping",
        }
    }
}

pub type Result<T, E = SchemaError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    classes: BTreeMap<TermName, ClassDef>,
    object_properties: BTreeMap<TermName, ObjectPropertyDef>,
    data_properties: BTreeMap<TermName, DataPropertyDef>,
    equivalences: BTreeMap<String, (TermKind, TermName)>,
}

impl Default for Schema {
    fn default() -> Self {
        Self::new()
    }
}

impl Schema {
    /// A registry holding only the root classes.
    pub fn new() -> Self {
        let classes = ROOT_CLASSES
            .iter()
            .map(|r| {
                let name = TermName::parse(r).expect("root names are valid");
                let def = ClassDef {
                    name: name.clone(),
                    parent: None,
                    label: r.to_string(),
                    equivalences: BTreeSet::new(),
                };
                (name, def)
            })
            .collect();
        Schema {
            classes,
            object_properties: BTreeMap::new(),
            data_properties: BTreeMap::new(),
            equivalences: BTreeMap::new(),
        }
    }

    pub fn is_root(name: &TermName) -> bool {
        name.is_bare() && ROOT_CLASSES.contains(&name.local())
    }

    pub fn define_class(&mut self, name: TermName, parent: TermName, label: &str) -> Result<&ClassDef> {
        if name == parent {
            return Err(SchemaError::WouldCreateCycle(name));
        }
        if self.classes.contains_key(&name) {
            return Err(SchemaError::DuplicateTerm(name));
        }
        if !self.classes.contains_key(&parent) {
            return Err(SchemaError::UnknownParent(parent));
        }
        // `name` is new and `parent` already exists, so the parent chain of
        // `parent` cannot reach `name`.
        let label = if label.is_empty() {
            name.local().to_owned()
        } else {
            label.to_owned()
        };
        let def = ClassDef {
            name: name.clone(),
            parent: Some(parent),
            label,
            equivalences: BTreeSet::new(),
        };
        Ok(self.classes.entry(name).or_insert(def))
    }

    fn require_class(&self, c: &TermName) -> Result<()> {
        if self.classes.contains_key(c) {
            Ok(())
        } else {
            Err(SchemaError::UnknownClass(c.to_string()))
        }
    }

    fn property_exists(&self, p: &TermName) -> bool {
        self.object_properties.contains_key(p) || self.data_properties.contains_key(p)
    }

    pub fn define_object_property(&mut self, def: ObjectPropertyDef) -> Result<&ObjectPropertyDef> {
        if self.property_exists(&def.name) {
            return Err(SchemaError::DuplicateTerm(def.name));
        }
        if def.domain.is_empty() {
            return Err(SchemaError::EmptyDomain(def.name));
        }
        for c in def.domain.iter().chain(std::iter::once(&def.range)) {
            self.require_class(c)?;
        }
        for q in def.inverse_of.iter().chain(def.sub_property_of.iter()) {
            if self.data_properties.contains_key(q) {
                return Err(SchemaError::NotAnObjectProperty(q.clone()));
            }
            if !self.object_properties.contains_key(q) {
                return Err(SchemaError::UnknownProperty(q.to_string()));
            }
        }
        self.check_iris_free(&def.equivalences, TermKind::Property, &def.name)?;

        for q in &def.inverse_of {
            self.object_properties
                .get_mut(q)
                .expect("checked above")
                .inverse_of
                .insert(def.name.clone());
        }
        for iri in &def.equivalences {
            self.equivalences
                .insert(iri.clone(), (TermKind::Property, def.name.clone()));
        }
        let name = def.name.clone();
        Ok(self.object_properties.entry(name).or_insert(def))
    }

    /// Records `p` and `q` as inverses of each other. Both must already be
    /// object properties. Idempotent.
    pub fn link_inverse(&mut self, p: &TermName, q: &TermName) -> Result<()> {
        for x in [p, q] {
            if !self.object_properties.contains_key(x) {
                return Err(if self.data_properties.contains_key(x) {
                    SchemaError::NotAnObjectProperty(x.clone())
                } else {
                    SchemaError::UnknownProperty(x.to_string())
                });
            }
        }
        self.object_properties.get_mut(p).unwrap().inverse_of.insert(q.clone());
        self.object_properties.get_mut(q).unwrap().inverse_of.insert(p.clone());
        Ok(())
    }

    pub fn define_data_property(&mut self, def: DataPropertyDef) -> Result<&DataPropertyDef> {
        if self.property_exists(&def.name) {
            return Err(SchemaError::DuplicateTerm(def.name));
        }
        self.require_class(&def.domain)?;
        if let Some(sup) = &def.sub_property_of {
            if self.object_properties.contains_key(sup) {
                return Err(SchemaError::NotADataProperty(sup.clone()));
            }
            if !self.data_properties.contains_key(sup) {
                return Err(SchemaError::UnknownProperty(sup.to_string()));
            }
        }
        self.check_iris_free(&def.equivalences, TermKind::Property, &def.name)?;
        for iri in &def.equivalences {
            self.equivalences
                .insert(iri.clone(), (TermKind::Property, def.name.clone()));
        }
        let name = def.name.clone();
        Ok(self.data_properties.entry(name).or_insert(def))
    }

    fn check_iris_free<'a>(
        &self,
        iris: impl IntoIterator<Item = &'a String>,
        kind: TermKind,
        local: &TermName,
    ) -> Result<()> {
        for iri in iris {
            if let Some((k, existing)) = self.equivalences.get(iri) {
                if *k != kind || existing != local {
                    return Err(SchemaError::ConflictingMapping {
                        iri: iri.clone(),
                        existing_kind: *k,
                        existing: existing.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reflexive-transitive subclass test over parent edges.
    pub fn is_subclass_of(&self, a: &TermName, b: &TermName) -> Result<bool> {
        self.require_class(a)?;
        self.require_class(b)?;
        Ok(self.subclass_unchecked(a, b))
    }

    /// Like [`Schema::is_subclass_of`] but treats unknown classes as
    /// unrelated.
    pub(crate) fn subclass_unchecked(&self, a: &TermName, b: &TermName) -> bool {
        let mut cur = Some(a);
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            cur = self.classes.get(c).and_then(|d| d.parent.as_ref());
        }
        false
    }

    /// Parent chain from `a` (inclusive) up to its root.
    pub fn ancestors<'a>(&'a self, a: &'a TermName) -> impl Iterator<Item = &'a TermName> + 'a {
        let mut cur = self.classes.get(a).map(|d| &d.name);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = self.classes.get(c).and_then(|d| d.parent.as_ref());
            Some(c)
        })
    }

    pub fn declare_equivalence(&mut self, local: &TermName, kind: TermKind, iri: &str) -> Result<()> {
        let exists = match kind {
            TermKind::Class => self.classes.contains_key(local),
            TermKind::Property => self.property_exists(local),
        };
        if !exists {
            return Err(SchemaError::UnknownTerm {
                kind,
                name: local.to_string(),
            });
        }
        self.check_iris_free([&iri.to_owned()], kind, local)?;
        self.equivalences.insert(iri.to_owned(), (kind, local.clone()));
        let set = match kind {
            TermKind::Class => &mut self.classes.get_mut(local).unwrap().equivalences,
            TermKind::Property => match self.object_properties.get_mut(local) {
                Some(p) => &mut p.equivalences,
                None => &mut self.data_properties.get_mut(local).unwrap().equivalences,
            },
        };
        set.insert(iri.to_owned());
        Ok(())
    }

    /// `None` means the IRI is not mapped.
    pub fn resolve_external(&self, iri: &str) -> Option<(TermKind, &TermName)> {
        self.equivalences.get(iri).map(|(k, t)| (*k, t))
    }

    pub fn class(&self, name: &TermName) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    pub fn object_property(&self, name: &TermName) -> Option<&ObjectPropertyDef> {
        self.object_properties.get(name)
    }

    pub fn data_property(&self, name: &TermName) -> Option<&DataPropertyDef> {
        self.data_properties.get(name)
    }

    pub fn property(&self, name: &TermName) -> Option<PropertyDef<'_>> {
        self.object_properties
            .get(name)
            .map(PropertyDef::Object)
            .or_else(|| self.data_properties.get(name).map(PropertyDef::Data))
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn object_properties(&self) -> impl Iterator<Item = &ObjectPropertyDef> {
        self.object_properties.values()
    }

    pub fn data_properties(&self) -> impl Iterator<Item = &DataPropertyDef> {
        self.data_properties.values()
    }

    pub fn equivalences(&self) -> impl Iterator<Item = (&str, TermKind, &TermName)> {
        self.equivalences.iter().map(|(iri, (k, t))| (iri.as_str(), *k, t))
    }

    fn resolve_in<'a, V>(
        map: &'a BTreeMap<TermName, V>,
        written: &str,
    ) -> std::result::Result<Option<&'a TermName>, SchemaError> {
        let name = TermName::parse(written)?;
        if let Some((k, _)) = map.get_key_value(&name) {
            return Ok(Some(k));
        }
        if written.contains('#') {
            return Ok(None);
        }
        let mut hits = map.keys().filter(|k| k.local() == written);
        match (hits.next(), hits.next()) {
            (None, _) => Ok(None),
            (Some(k), None) => Ok(Some(k)),
            (Some(a), Some(b)) => {
                let mut candidates = vec![a.clone(), b.clone()];
                candidates.extend(map.keys().filter(|k| k.local() == written).skip(2).cloned());
                Err(SchemaError::AmbiguousTerm {
                    name: written.to_owned(),
                    candidates,
                })
            }
        }
    }

    /// Resolves a written class name. A bare name first means `x#x`, then
    /// any single class whose local part is `x`.
    pub fn resolve_class(&self, written: &str) -> Result<TermName> {
        Self::resolve_in(&self.classes, written)?
            .cloned()
            .ok_or_else(|| SchemaError::UnknownClass(written.to_owned()))
    }

    /// Property counterpart of [`Schema::resolve_class`], searching object
    /// and data properties together.
    pub fn resolve_property(&self, written: &str) -> Result<TermName> {
        let o = Self::resolve_in(&self.object_properties, written)?;
        let d = Self::resolve_in(&self.data_properties, written)?;
        match (o, d) {
            (Some(a), Some(b)) if a == b => Ok(a.clone()),
            (Some(a), Some(b)) => {
                // An exact match wins over a local-part match.
                let exact = TermName::parse(written)?;
                if *a == exact {
                    Ok(a.clone())
                } else if *b == exact {
                    Ok(b.clone())
                } else {
                    Err(SchemaError::AmbiguousTerm {
                        name: written.to_owned(),
                        candidates: vec![a.clone(), b.clone()],
                    })
                }
            }
            (Some(a), None) | (None, Some(a)) => Ok(a.clone()),
            (None, None) => Err(SchemaError::UnknownProperty(written.to_owned())),
        }
    }

    /// True when some class in `domain` is a superclass of `class`.
    pub fn in_domain(&self, class: &TermName, domain: &[TermName]) -> bool {
        domain.iter().any(|d| self.subclass_unchecked(class, d))
    }

    /// Coherence checks over the whole registry.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();

        let mut by_label: BTreeMap<String, Vec<&TermName>> = BTreeMap::new();
        for c in self.classes.values() {
            by_label.entry(c.label.to_lowercase()).or_default().push(&c.name);
        }
        for (label, names) in by_label.iter().filter(|(_, v)| v.len() > 1) {
            let names: Vec<String> = names.iter().map(|n| n.to_string()).collect();
            issues.push(Issue::warning(
                "AmbiguousLabel",
                format!("label `{label}` is used by classes {}", names.join(", ")),
            ));
        }

        for p in self.object_properties.values() {
            for q_name in p.inverse_of.iter().filter(|q| p.name <= **q) {
                let Some(q) = self.object_properties.get(q_name) else {
                    continue;
                };
                let swapped = p.domain == [q.range.clone()] && q.domain == [p.range.clone()];
                if !swapped {
                    issues.push(Issue::error(
                        "DomainRangeMismatch",
                        format!(
                            "inverse pair `{}` ({} -> {}) and `{}` ({} -> {}) do not swap domain and range",
                            p.name,
                            join(&p.domain),
                            p.range,
                            q.name,
                            join(&q.domain),
                            q.range
                        ),
                    ));
                }
            }
            if let Some(sup) = p.sub_property_of.as_ref().and_then(|s| self.object_properties.get(s)) {
                if !p.domain.iter().all(|d| self.in_domain(d, &sup.domain)) {
                    issues.push(Issue::error(
                        "SubPropertyDomainMismatch",
                        format!(
                            "`{}` has domain {} outside its super-property `{}` domain {}",
                            p.name,
                            join(&p.domain),
                            sup.name,
                            join(&sup.domain)
                        ),
                    ));
                }
                if !self.subclass_unchecked(&p.range, &sup.range) {
                    issues.push(Issue::error(
                        "SubPropertyRangeMismatch",
                        format!(
                            "`{}` has range {} outside its super-property `{}` range {}",
                            p.name, p.range, sup.name, sup.range
                        ),
                    ));
                }
            }
        }

        for p in self.data_properties.values() {
            let Some(sup) = p.sub_property_of.as_ref().and_then(|s| self.data_properties.get(s)) else {
                continue;
            };
            if !self.subclass_unchecked(&p.domain, &sup.domain) {
                issues.push(Issue::error(
                    "SubPropertyDomainMismatch",
                    format!(
                        "`{}` has domain {} outside its super-property `{}` domain {}",
                        p.name, p.domain, sup.name, sup.domain
                    ),
                ));
            }
            if p.value_type != sup.value_type {
                issues.push(Issue::error(
                    "SubPropertyTypeMismatch",
                    format!(
                        "`{}` is {} but its super-property `{}` is {}",
                        p.name, p.value_type, sup.name, sup.value_type
                    ),
                ));
            }
        }
        issues
    }

    /// Digest of every definition; two registries with equal fingerprints
    /// hold the same terms.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for c in self.classes.values() {
            let parent = c.parent.as_ref().map(|p| p.to_string()).unwrap_or_default();
            h.update(format!(
                "C\t{}\t{}\t{}\t{:?}\n",
                c.name, parent, c.label, c.equivalences
            ));
        }
        for p in self.object_properties.values() {
            h.update(format!(
                "O\t{}\t{}\t{}\t{}\t{}\t{:?}\t{:?}\t{:?}\n",
                p.name,
                join(&p.domain),
                p.range,
                p.functional,
                p.inverse_functional,
                p.inverse_of,
                p.sub_property_of,
                p.equivalences
            ));
        }
        for p in self.data_properties.values() {
            h.update(format!(
                "D\t{}\t{}\t{}\t{:?}\t{:?}\t{:?}\n",
                p.name, p.domain, p.value_type, p.volatility, p.sub_property_of, p.equivalences
            ));
        }
        h.finalize().into()
    }
}

fn join(terms: &[TermName]) -> String {
    terms.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> TermName {
        TermName::parse(s).unwrap()
    }

    fn persons() -> Schema {
        let mut s = Schema::new();
        s.define_class(t("physicalentity"), t("entity"), "").unwrap();
        s.define_class(t("person"), t("physicalentity"), "person").unwrap();
        s.define_class(t("device"), t("physicalentity"), "").unwrap();
        s
    }

    #[test]
    fn roots_are_seeded() {
        let s = Schema::new();
        assert_eq!(s.classes().count(), 6);
        for r in ROOT_CLASSES {
            assert!(s.class(&t(r)).unwrap().parent.is_none());
        }
    }

    #[test]
    fn define_class_examples() {
        let mut s = persons();
        assert!(s.is_subclass_of(&t("physicalentity"), &t("entity")).unwrap());
        s.define_class(t("murgencydispatcher"), t("person"), "").unwrap();
        assert!(s.is_subclass_of(&t("murgencydispatcher"), &t("entity")).unwrap());
        assert_eq!(
            s.define_class(t("person"), t("person"), ""),
            Err(SchemaError::WouldCreateCycle(t("person")))
        );
        assert_eq!(
            s.define_class(t("person"), t("entity"), "").unwrap_err().kind(),
            "DuplicateTerm"
        );
        assert_eq!(
            s.define_class(t("robot"), t("machine"), "").unwrap_err(),
            SchemaError::UnknownParent(t("machine"))
        );
        assert_eq!(
            s.define_class(t("entity"), t("event"), "").unwrap_err().kind(),
            "DuplicateTerm"
        );
    }

    #[test]
    fn subclass_queries() {
        let s = persons();
        assert!(s.is_subclass_of(&t("person"), &t("entity")).unwrap());
        assert!(!s.is_subclass_of(&t("entity"), &t("person")).unwrap());
        assert!(s.is_subclass_of(&t("person"), &t("person")).unwrap());
        assert!(!s.is_subclass_of(&t("person"), &t("device")).unwrap());
        assert_eq!(
            s.is_subclass_of(&t("person"), &t("ghost")),
            Err(SchemaError::UnknownClass("ghost".into()))
        );
        let chain: Vec<String> = s.ancestors(&t("person")).map(|c| c.to_string()).collect();
        assert_eq!(chain, ["person", "physicalentity", "entity"]);
    }

    #[test]
    fn object_property_examples() {
        let mut s = persons();
        s.define_class(t("accessgroup"), t("entity"), "").unwrap();
        s.define_object_property(ObjectPropertyDef::new(t("person#contact"), t("person"), t("entity")))
            .unwrap();
        for q in ["person#father", "person#mother"] {
            s.define_object_property(ObjectPropertyDef::new(t(q), t("person"), t("person")))
                .unwrap();
        }
        let mut daughter = ObjectPropertyDef::new(t("person#daughter"), t("person"), t("person"));
        daughter.functional = true;
        daughter.inverse_functional = true;
        daughter.inverse_of = [t("person#father"), t("person#mother")].into();
        daughter.sub_property_of = Some(t("person#contact"));
        let d = s.define_object_property(daughter).unwrap();
        assert!(d.inverse_is_ambiguous());
        assert!(d.unique_inverse().is_none());
        // registration is symmetric
        for q in ["person#father", "person#mother"] {
            assert!(s
                .object_property(&t(q))
                .unwrap()
                .inverse_of
                .contains(&t("person#daughter")));
        }
        s.define_object_property(ObjectPropertyDef::new(t("groupmember"), t("accessgroup"), t("entity")))
            .unwrap();
        assert_eq!(
            s.define_object_property(ObjectPropertyDef::new(t("knows"), t("person"), t("nosuchclass"))),
            Err(SchemaError::UnknownClass("nosuchclass".into()))
        );
        let mut dangling = ObjectPropertyDef::new(t("likes2"), t("person"), t("person"));
        dangling.inverse_of.insert(t("nothere"));
        assert_eq!(
            s.define_object_property(dangling).unwrap_err().kind(),
            "UnknownProperty"
        );
        assert!(s.object_property(&t("likes2")).is_none());
    }

    #[test]
    fn data_property_examples() {
        let mut s = persons();
        let mut likes = DataPropertyDef::new(t("person#likes"), t("person"), ValueType::Text, Volatility::Dynamic);
        s.define_data_property(likes.clone()).unwrap();
        likes.name = t("person#likesfood");
        likes.sub_property_of = Some(t("person#likes"));
        s.define_data_property(likes.clone()).unwrap();
        s.define_data_property(DataPropertyDef::new(
            t("person#dateofbirth"),
            t("person"),
            ValueType::Datetime,
            Volatility::Static,
        ))
        .unwrap();
        assert_eq!(
            s.define_data_property(likes),
            Err(SchemaError::DuplicateTerm(t("person#likesfood")))
        );
        assert_eq!(s.resolve_property("likesfood").unwrap(), t("person#likesfood"));
        assert_eq!(
            s.data_property(&t("person#dateofbirth")).unwrap().volatility,
            Volatility::Static
        );
    }

    #[test]
    fn classes_and_properties_are_separate_namespaces() {
        let mut s = persons();
        s.define_data_property(DataPropertyDef::new(
            t("person"),
            t("person"),
            ValueType::Text,
            Volatility::Static,
        ))
        .unwrap();
        assert_eq!(s.resolve_class("person").unwrap(), t("person"));
        assert_eq!(s.resolve_property("person").unwrap(), t("person"));
    }

    #[test]
    fn equivalence_examples() {
        let mut s = persons();
        s.define_data_property(DataPropertyDef::new(
            t("person#dateofbirth"),
            t("person"),
            ValueType::Datetime,
            Volatility::Static,
        ))
        .unwrap();
        let soupa = "http://pervasive.semanticweb.org/ont/2004/06/person#person";
        let birth = "http://pervasive.semanticweb.org/ont/2004/06/person#birthDate";
        s.declare_equivalence(&t("person"), TermKind::Class, soupa).unwrap();
        s.declare_equivalence(&t("person#dateofbirth"), TermKind::Property, birth)
            .unwrap();
        assert_eq!(s.resolve_external(soupa), Some((TermKind::Class, &t("person"))));
        assert_eq!(s.resolve_external(soupa), s.resolve_external(soupa));
        assert_eq!(
            s.resolve_external(birth),
            Some((TermKind::Property, &t("person#dateofbirth")))
        );
        assert_eq!(s.resolve_external("http://example.org/none"), None);

        let before = s.clone();
        assert_eq!(
            s.declare_equivalence(&t("device"), TermKind::Class, soupa)
                .unwrap_err()
                .kind(),
            "ConflictingMapping"
        );
        assert_eq!(s, before);
        // re-declaring the same mapping is a no-op
        s.declare_equivalence(&t("person"), TermKind::Class, soupa).unwrap();
        assert_eq!(s, before);
        assert_eq!(
            s.declare_equivalence(&t("ghost"), TermKind::Class, "x:y")
                .unwrap_err()
                .kind(),
            "UnknownTerm"
        );
    }

    #[test]
    fn validate_examples() {
        let s = persons();
        assert!(s.validate().is_empty());

        let mut bad = persons();
        bad.define_object_property(ObjectPropertyDef::new(t("person#father"), t("device"), t("person")))
            .unwrap();
        let mut daughter = ObjectPropertyDef::new(t("person#daughter"), t("person"), t("person"));
        daughter.inverse_of.insert(t("person#father"));
        bad.define_object_property(daughter).unwrap();
        let issues = bad.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "DomainRangeMismatch");

        let mut amb = persons();
        amb.define_class(t("soupa#person"), t("entity"), "person").unwrap();
        let issues = amb.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "AmbiguousLabel");
        assert_eq!(issues[0].severity, crate::issue::Severity::Warning);
        assert_eq!(
            amb.resolve_class("person").unwrap(),
            t("person"),
            "exact bare match wins"
        );
    }

    #[test]
    fn ambiguous_bare_lookup() {
        let mut s = persons();
        s.define_class(t("a#room"), t("location"), "").unwrap();
        s.define_class(t("b#room"), t("location"), "").unwrap();
        assert_eq!(s.resolve_class("room").unwrap_err().kind(), "AmbiguousTerm");
        assert_eq!(s.resolve_class("a#room").unwrap(), t("a#room"));
    }

    #[test]
    fn fingerprint_tracks_definitions() {
        let a = persons();
        let mut b = persons();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.define_class(t("sensor"), t("device"), "").unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
