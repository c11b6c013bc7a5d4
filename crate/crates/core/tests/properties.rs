mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use rcm::io::{apply_document, export_canonical, parse_document, to_document};
use rcm::Engine;

use common::random_engine;

fn core() -> &'static Engine {
    static CORE: std::sync::OnceLock<Engine> = std::sync::OnceLock::new();
    CORE.get_or_init(Engine::with_core)
}

fn reimport(text: &str) -> Engine {
    let mut e = Engine::new();
    apply_document(&mut e, &parse_document(text).unwrap()).unwrap();
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_export_round_trips(seed: u64) {
        let e = random_engine(&mut StdRng::seed_from_u64(seed), core());
        let text = export_canonical(&e);
        let back = reimport(&text);
        prop_assert_eq!(export_canonical(&back), text);
        prop_assert_eq!(back.store(), e.store());
        prop_assert_eq!(back.schema().fingerprint(), e.schema().fingerprint());
    }

    #[test]
    fn parsed_export_equals_document(seed: u64) {
        let e = random_engine(&mut StdRng::seed_from_u64(seed), core());
        let doc = to_document(&e);
        prop_assert_eq!(parse_document(&export_canonical(&e)).unwrap(), doc);
    }

    #[test]
    fn failing_document_changes_nothing(seed: u64, fault in 0usize..4) {
        let mut e = random_engine(&mut StdRng::seed_from_u64(seed), core());
        let before = export_canonical(&e);
        let tail = [
            "[[schema.classes]]\nname = \"person\"\nparent = \"entity\"\n",
            "[[individuals]]\nid = \"late2\"\nclass = \"ghost\"\n",
            "[[facts]]\nsubject = \"late\"\nproperty = \"temperature\"\nvalue = \"hot\"\ntimestamp = \"2013-09-18T14:00:00\"\n",
            "[[groups]]\nid = \"crew\"\nprivileges = [\"person\"]\n",
        ][fault];
        let text = format!(
            "[[schema.classes]]\nname = \"newthing\"\nparent = \"entity\"\n\n[[individuals]]\nid = \"late\"\nclass = \"environment\"\n\n{tail}"
        );
        let doc = parse_document(&text).unwrap();
        prop_assert!(apply_document(&mut e, &doc).is_err());
        prop_assert_eq!(export_canonical(&e), before);
    }

    #[test]
    fn unit_round_trip(x in -1e6f64..1e6, pair in 0usize..6) {
        let e = core();
        let (a, b) = [("fahrenheit", "kelvin"), ("celsius", "fahrenheit"), ("feet", "km"),
                      ("inches", "cm"), ("pounds", "grams"), ("hours", "minutes")][pair];
        let back = e.convert(e.convert(x, a, b).unwrap(), b, a).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0), "{} -> {}", x, back);
    }
}

#[test]
fn exports_are_byte_stable() {
    for seed in 0..20 {
        let e = random_engine(&mut StdRng::seed_from_u64(seed), core());
        assert_eq!(export_canonical(&e), export_canonical(&e.clone()));
    }
}
