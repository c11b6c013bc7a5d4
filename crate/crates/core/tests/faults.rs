use std::fs;
use std::path::Path;

use rcm::io::{bundled, check_document};
use rcm::{Engine, Severity};

/// Each fixture names the error it must raise on its first line.
fn corpus() -> Vec<(String, String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/faults");
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rcm"))
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            let expect = text
                .lines()
                .next()
                .and_then(|l| l.strip_prefix("# expect: "))
                .expect("fixture starts with `# expect: <code>`")
                .to_owned();
            (p.file_name().unwrap().to_string_lossy().into_owned(), expect, text)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn every_seeded_fault_is_reported() {
    let core = Engine::with_core();
    let corpus = corpus();
    assert_eq!(corpus.len(), 10);
    for (name, expect, text) in corpus {
        let errors: Vec<_> = check_document(&core, &text)
            .into_iter()
            .filter(|i| i.severity == Severity::Error)
            .collect();
        assert!(
            errors.iter().any(|i| i.code == expect),
            "{name}: expected {expect}, got {errors:?}"
        );
    }
}

#[test]
fn bundled_documents_are_clean() {
    assert!(Engine::with_core().validate_schema().is_empty());
    assert!(check_document(&Engine::new(), bundled("core-ontology.rcm").unwrap()).is_empty());
    let core = Engine::with_core();
    for name in ["murgency-extension.rcm", "fire-incident.rcm"] {
        let issues = check_document(&core, bundled(name).unwrap());
        assert!(issues.is_empty(), "{name}: {issues:?}");
    }
}
