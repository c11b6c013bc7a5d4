//! Group-based access control.
//!
//! Permissions attach only to groups. A group holds member entities and
//! privileges, where a privilege is an activity class; holding a privilege
//! covers every subclass of that activity. Anyone outside every group is
//! denied.

use std::collections::BTreeSet;

use crate::schema::Schema;
use crate::store::{ContextStore, StoreError};
use crate::term::TermName;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessGroup {
    pub id: String,
    pub members: BTreeSet<String>,
    pub privileges: BTreeSet<TermName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Allowed { via: String },
    Denied,
}

impl Decision {
    pub fn is_allowed(&self) -> bool {
        matches!(self, Decision::Allowed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AccessError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("unknown access group `{0}`")]
    UnknownGroup(String),
    #[error("`{0}` is not an entity")]
    NotAnEntity(String),
    #[error("`{0}` is not an activity class")]
    NotAnActivityClass(String),
    #[error("`{0}` is not an access group")]
    NotAGroup(String),
}

impl AccessError {
    pub fn kind(&self) -> &'static str {
        match self {
            AccessError::Store(e) => e.kind(),
            AccessError::UnknownGroup(_) => "UnknownGroup",
            AccessError::NotAnEntity(_) => "NotAnEntity",
            AccessError::NotAnActivityClass(_) => "NotAnActivityClass",
            AccessError::NotAGroup(_) => "NotAGroup",
        }
    }
}

type Result<T, E = AccessError> = std::result::Result<T, E>;

/// Groups in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccessControl {
    groups: Vec<AccessGroup>,
}

fn term(s: &str) -> TermName {
    TermName::parse(s).expect("valid builtin term")
}

impl AccessControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn groups(&self) -> &[AccessGroup] {
        &self.groups
    }

    pub fn group(&self, id: &str) -> Option<&AccessGroup> {
        self.groups.iter().find(|g| g.id == id)
    }

    fn group_mut(&mut self, id: &str) -> Result<&mut AccessGroup> {
        self.groups
            .iter_mut()
            .find(|g| g.id == id)
            .ok_or_else(|| AccessError::UnknownGroup(id.to_owned()))
    }

    /// Registers an existing individual of class `accessgroup` (or a
    /// subclass) as a group.
    pub fn adopt_group(&mut self, schema: &Schema, store: &ContextStore, id: &str) -> Result<&AccessGroup> {
        let ind = store.individual(id)?;
        if !schema.subclass_unchecked(&ind.class, &term("accessgroup")) {
            return Err(AccessError::NotAGroup(id.to_owned()));
        }
        if self.group(id).is_some() {
            return Err(StoreError::DuplicateIndividual(id.to_owned()).into());
        }
        self.groups.push(AccessGroup {
            id: id.to_owned(),
            members: BTreeSet::new(),
            privileges: BTreeSet::new(),
        });
        Ok(self.groups.last().unwrap())
    }

    pub fn add_member(&mut self, schema: &Schema, store: &ContextStore, group: &str, entity: &str) -> Result<()> {
        let ind = store.individual(entity)?;
        if !schema.subclass_unchecked(&ind.class, &term("entity")) {
            return Err(AccessError::NotAnEntity(entity.to_owned()));
        }
        if self.group(group).is_none() {
            store.individual(group)?;
        }
        self.group_mut(group)?.members.insert(entity.to_owned());
        Ok(())
    }

    pub fn grant_privilege(&mut self, schema: &Schema, group: &str, activity_class: &TermName) -> Result<()> {
        self.group(group)
            .ok_or_else(|| AccessError::UnknownGroup(group.to_owned()))?;
        require_activity(schema, activity_class)?;
        self.group_mut(group)?.privileges.insert(activity_class.clone());
        Ok(())
    }

    /// Allowed through the first group, in creation order, that has the
    /// entity as a member and holds a privilege covering `activity_class`.
    pub fn check(
        &self,
        schema: &Schema,
        store: &ContextStore,
        entity: &str,
        activity_class: &TermName,
    ) -> Result<Decision> {
        store.individual(entity)?;
        require_activity(schema, activity_class)?;
        Ok(self
            .groups
            .iter()
            .find(|g| {
                g.members.contains(entity)
                    && g.privileges
                        .iter()
                        .any(|p| schema.subclass_unchecked(activity_class, p))
            })
            .map_or(Decision::Denied, |g| Decision::Allowed { via: g.id.clone() }))
    }
}

fn require_activity(schema: &Schema, class: &TermName) -> Result<()> {
    if schema.class(class).is_some() && schema.subclass_unchecked(class, &term("activity")) {
        Ok(())
    } else {
        Err(AccessError::NotAnActivityClass(class.to_string()))
    }
}
