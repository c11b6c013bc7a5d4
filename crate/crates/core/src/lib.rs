//! A context and situation modeling engine.
//!
//! The pieces, from the bottom up:
//!
//! * [`schema`]: an ontology of classes and properties with external
//!   equivalences.
//! * [`store`]: individuals and append-only facts annotated with time,
//!   unit, source and quality of context.
//! * [`quality`]: unit conversion and unit-aware comparison.
//! * [`situation`]: event-triggered goal trees driven by activities.
//! * [`access`]: group membership and activity privileges.
//! * [`io`]: the `.rcm` document format, exports and scenario scripts.
//!
//! [`Engine`] owns one of each and is the usual entry point.
//!
//! ```
//! use rcm::{Engine, ResolutionPolicy, Timestamp};
//!
//! let mut engine = Engine::with_core();
//! let t = Timestamp::parse("2013-09-18T14:00:00").unwrap();
//! engine.create_individual("environment", "hall", "sensor1", t).unwrap();
//! engine.assert_literal("hall", "temperature", "100.0", Default::default(), "sensor1", t).unwrap();
//! let now = engine.get_current("hall", "temperature", ResolutionPolicy::Latest).unwrap();
//! assert_eq!(now[0].payload.value.as_f64(), Some(100.0));
//! ```

pub mod access;
pub mod engine;
pub mod io;
pub mod issue;
pub mod quality;
pub mod schema;
pub mod situation;
pub mod store;
pub mod term;

pub use access::Decision;
pub use engine::{Engine, Error, Query, Result};
pub use issue::{Issue, Severity};
pub use store::{AnnotatedValue, Annotations, Fact, QoC, ResolutionPolicy, SYSTEM};
pub use term::{TermName, Timestamp, Value, ValueType};

// The book's code blocks run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/schema.md")]
    mod schema {}
    #[doc = include_str!("../../../book/src/facts.md")]
    mod facts {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/access.md")]
    mod access {}
    #[doc = include_str!("../../../book/src/situations.md")]
    mod situations {}
    #[doc = include_str!("../../../book/src/documents.md")]
    mod documents {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
