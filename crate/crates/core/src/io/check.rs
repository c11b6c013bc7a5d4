use crate::engine::Engine;
use crate::issue::{Issue, Severity};

use super::{apply_document, parse_document};

/// Everything wrong with `text` as a document applied on top of `engine`.
/// The engine is not modified. A document that fails to parse or apply
/// yields exactly one error; one that applies yields the schema findings
/// of the combined state, warnings included.
pub fn check_document(engine: &Engine, text: &str) -> Vec<Issue> {
    let doc = match parse_document(text) {
        Ok(d) => d,
        Err(e) => return vec![Issue::error(e.kind(), e.to_string())],
    };
    let mut scratch = engine.clone();
    if let Err(e) = apply_document(&mut scratch, &doc) {
        return vec![Issue::error(e.kind(), e.to_string())];
    }
    let mut issues = scratch.validate_schema();
    issues.sort_by_key(|i| std::cmp::Reverse(i.severity == Severity::Error));
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_without_mutating() {
        let e = Engine::with_core();
        let before = e.clone();
        assert!(check_document(&e, "").is_empty());
        let bad = "[[schema.classes]]\nname = \"x\"\nparent = \"ghost\"\n";
        let issues = check_document(&e, bad);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, "UnknownParent");
        assert_eq!(e, before);
        let issues = check_document(&e, "[[schema.classes]\n");
        assert_eq!(issues[0].code, "SyntaxError");
    }

    #[test]
    fn semantic_findings() {
        let e = Engine::with_core();
        let text = "[[schema.object_properties]]\nname = \"owns\"\ndomain = [\"person\"]\nrange = \"device\"\n\n[[schema.object_properties]]\nname = \"ownsphone\"\ndomain = [\"entity\"]\nrange = \"device\"\nsub_property_of = \"owns\"\n";
        let issues = check_document(&e, text);
        assert!(
            issues.iter().any(|i| i.code == "SubPropertyDomainMismatch"),
            "{issues:?}"
        );
    }
}
