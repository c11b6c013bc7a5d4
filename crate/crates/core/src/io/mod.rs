//! Documents, exports, scenario scripts and validation reports.

mod apply;
mod check;
mod document;
mod export;
mod rdfxml;
mod scenario;

use std::path::{Path, PathBuf};

pub use apply::{apply_document, Report};
pub use check::check_document;
pub use document::{
    parse_document, ClassEntry, DataPropertyEntry, EquivalenceEntry, Expectation, FactEntry, GroupEntry,
    IndividualEntry, Literal, ObjectPropertyEntry, RcmDocument, ScenarioScript, SchemaSection, Step, UnitEntry,
    SECTIONS,
};
pub use export::{export_canonical, to_document};
pub use rdfxml::{export_rdfxml, DEFAULT_BASE_IRI};
pub use scenario::{run_scenario, Entry, EntryKind, TimelineReport};

use crate::engine::Error;

/// Environment variable holding extra directories, `:`-separated, that are
/// searched for documents named on the command line.
pub const SEARCH_PATH_VAR: &str = "RCM_PATH";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown section `{name}` at {line}:{column}")]
    UnknownSection { name: String, line: usize, column: usize },
    #[error("{location}: {what} `{name}` is defined more than once")]
    DuplicateDefinitionInDocument {
        what: &'static str,
        name: String,
        location: String,
    },
    /// An engine error raised while applying the entry at `location`.
    #[error("{location}: {source}")]
    At { location: String, source: Box<Error> },
    /// An unexpected failure while running scenario step `index`.
    #[error("step {index} ({op}): {source}")]
    Step {
        index: usize,
        op: &'static str,
        source: Box<Error>,
    },
    #[error("{location}: {message}")]
    InvalidScript { location: String, message: String },
    #[error("document has no scenario section")]
    NoScenario,
    #[error("cannot find document `{0}`")]
    NotFound(String),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

impl DocumentError {
    /// Errors wrapping an engine error report the wrapped kind.
    pub fn kind(&self) -> &'static str {
        match self {
            DocumentError::Syntax { .. } => "SyntaxError",
            DocumentError::UnknownSection { .. } => "UnknownSection",
            DocumentError::DuplicateDefinitionInDocument { .. } => "DuplicateDefinitionInDocument",
            DocumentError::At { source, .. } | DocumentError::Step { source, .. } => source.kind(),
            DocumentError::InvalidScript { .. } => "InvalidScript",
            DocumentError::NoScenario => "NoScenario",
            DocumentError::NotFound(_) => "NotFound",
            DocumentError::Io { .. } => "IoError",
        }
    }

    pub(crate) fn at(location: impl Into<String>, e: impl Into<Error>) -> Self {
        DocumentError::At {
            location: location.into(),
            source: Box::new(e.into()),
        }
    }
}

const BUNDLED: [(&str, &str); 4] = [
    ("core-ontology.rcm", include_str!("../../data/core-ontology.rcm")),
    ("units.rcm", include_str!("../../data/units.rcm")),
    (
        "murgency-extension.rcm",
        include_str!("../../data/murgency-extension.rcm"),
    ),
    ("fire-incident.rcm", include_str!("../../data/fire-incident.rcm")),
];

/// Text of a document shipped with the crate.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Reads a document named on the command line. An existing path wins;
/// otherwise the directories in `search_path` are tried in order, and
/// finally the bundled documents.
pub fn read_document(name: &str, search_path: &[PathBuf]) -> Result<String, DocumentError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| DocumentError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })
    };
    let direct = Path::new(name);
    if direct.exists() {
        return read(direct);
    }
    if direct.is_relative() {
        for dir in search_path {
            let p = dir.join(name);
            if p.exists() {
                return read(&p);
            }
        }
    }
    let base = direct.file_name().and_then(|f| f.to_str()).unwrap_or(name);
    bundled(base)
        .filter(|_| direct.components().count() == 1)
        .map(str::to_owned)
        .ok_or_else(|| DocumentError::NotFound(name.to_owned()))
}

/// Splits a search path value the way `PATH` is split.
pub fn split_search_path(value: &str) -> Vec<PathBuf> {
    std::env::split_paths(value)
        .filter(|p| !p.as_os_str().is_empty())
        .collect()
}
