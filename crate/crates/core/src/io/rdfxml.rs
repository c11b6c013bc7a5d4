//! Write-only RDF/XML rendering in which every fact becomes a reified
//! `owl:Axiom` carrying its annotations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::engine::Engine;
use crate::store::Fact;
use crate::term::Value;

/// Base used when the caller does not pick one.
pub const DEFAULT_BASE_IRI: &str = "http://example.org/rocomo";

const SCHEMA_NS: &str = "rocomo-schema";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn xsd(v: &Value) -> &'static str {
    match v {
        Value::Text(_) | Value::Individual(_) => "string",
        Value::Integer(_) => "integer",
        Value::Real(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "dateTime",
    }
}

struct Writer<'a> {
    engine: &'a Engine,
    out: String,
}

impl Writer<'_> {
    /// Entity reference for an individual, namespaced by its class.
    fn individual_ref(&self, id: &str) -> String {
        let ns = self
            .engine
            .store()
            .individual(id)
            .map(|i| i.class.namespace().to_owned())
            .unwrap_or_else(|_| "rocomo".to_owned());
        format!("&{ns};{}", escape(id))
    }

    fn annotation(&mut self, name: &str, ty: &str, value: &str) {
        let _ = writeln!(
            self.out,
            "        <{SCHEMA_NS}:{name} rdf:datatype=\"&xsd;{ty}\">{}</{SCHEMA_NS}:{name}>",
            escape(value)
        );
    }

    fn target(&mut self, tag: &str, v: &Value, indent: &str) {
        match v {
            Value::Individual(o) => {
                let r = self.individual_ref(o);
                let _ = writeln!(self.out, "{indent}<{tag} rdf:resource=\"{r}\"/>");
            }
            v => {
                let _ = writeln!(
                    self.out,
                    "{indent}<{tag} rdf:datatype=\"&xsd;{}\">{}</{tag}>",
                    xsd(v),
                    escape(&v.to_string())
                );
            }
        }
    }

    fn axiom(&mut self, f: &Fact) {
        let av = &f.payload;
        self.out.push_str("    <owl:Axiom>\n");
        self.target("owl:annotatedTarget", &av.value, "        ");
        self.annotation("timeStamp", "dateTime", &av.timestamp.to_string());
        if let Some(u) = &av.unit {
            self.annotation("unit", "string", u);
        }
        let q = &av.qoc;
        let reals = [
            ("accuracy", q.accuracy),
            ("probability", q.probability),
            ("resolution", q.resolution),
            ("meanError", q.mean_error),
        ];
        for (name, x) in reals {
            if let Some(x) = x {
                self.annotation(name, "float", &format!("{x:?}"));
            }
        }
        if let Some(c) = &q.coverage {
            self.annotation("coverage", "string", c);
        }
        if let Some(r) = &q.recurrence {
            self.annotation("recurrence", "string", r);
        }
        if let Some(s) = &av.source {
            self.annotation("source", "string", s);
        }
        self.annotation("assertedBy", "string", &f.asserted_by);
        let p = &f.property;
        let _ = writeln!(
            self.out,
            "        <owl:annotatedProperty rdf:resource=\"&{};{}\"/>",
            p.namespace(),
            p.local()
        );
        let s = self.individual_ref(&f.subject);
        let _ = writeln!(self.out, "        <owl:annotatedSource rdf:resource=\"{s}\"/>");
        self.out.push_str("    </owl:Axiom>\n");
    }
}

/// Renders individuals and one axiom per fact. Every namespace that
/// appears is declared as an XML entity under `base_iri`.
pub fn export_rdfxml(engine: &Engine, base_iri: &str) -> String {
    let base = base_iri.trim_end_matches(['/', '#']);
    let store = engine.store();

    let mut namespaces: BTreeSet<&str> = BTreeSet::new();
    for ind in store.individuals() {
        namespaces.insert(ind.class.namespace());
    }
    for f in store.facts() {
        namespaces.insert(f.property.namespace());
    }
    namespaces.insert("rocomo");

    let mut w = Writer {
        engine,
        out: String::new(),
    };
    w.out.push_str("<?xml version=\"1.0\"?>\n<!DOCTYPE rdf:RDF [\n");
    for (name, iri) in [
        ("owl", "http://www.w3.org/2002/07/owl#"),
        ("xsd", "http://www.w3.org/2001/XMLSchema#"),
        ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
        ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ] {
        let _ = writeln!(w.out, "    <!ENTITY {name} \"{iri}\" >");
    }
    let _ = writeln!(w.out, "    <!ENTITY {SCHEMA_NS} \"{base}/{SCHEMA_NS}#\" >");
    for ns in &namespaces {
        let _ = writeln!(w.out, "    <!ENTITY {ns} \"{base}/{ns}#\" >");
    }
    w.out.push_str("]>\n\n");
    let _ = writeln!(w.out, "<rdf:RDF xmlns=\"{base}/rocomo#\"");
    let _ = writeln!(w.out, "     xml:base=\"{base}/rocomo\"");
    for name in ["rdf", "owl", "xsd", "rdfs", SCHEMA_NS] {
        let _ = writeln!(w.out, "     xmlns:{name}=\"&{name};\"");
    }
    for ns in &namespaces {
        let _ = writeln!(w.out, "     xmlns:{ns}=\"&{ns};\"");
    }
    let _ = writeln!(w.out, "     xmlns:owl2xml=\"http://www.w3.org/2006/12/owl2-xml#\">");

    for ind in store.individuals() {
        let about = w.individual_ref(&ind.id);
        let _ = writeln!(w.out, "\n    <owl:NamedIndividual rdf:about=\"{about}\">");
        let c = &ind.class;
        let _ = writeln!(
            w.out,
            "        <rdf:type rdf:resource=\"&{};{}\"/>",
            c.namespace(),
            c.local()
        );
        let _ = writeln!(
            w.out,
            "        <rdfs:label xml:lang=\"en\">{}</rdfs:label>",
            escape(&ind.id)
        );
        let p = &ind.provenance;
        let mut prov = |name: &str, ty: &str, v: &str| {
            let _ = writeln!(
                w.out,
                "        <{SCHEMA_NS}:{name} rdf:datatype=\"&xsd;{ty}\">{}</{SCHEMA_NS}:{name}>",
                escape(v)
            );
        };
        prov("createdBy", "string", &p.created_by);
        prov("createdAt", "dateTime", &p.created_at.to_string());
        prov("lastModifiedBy", "string", &p.last_modified_by);
        prov("lastModifiedAt", "dateTime", &p.last_modified_at.to_string());
        prov("lastChange", "string", &p.last_change);
        let facts: Vec<&Fact> = store.facts().iter().filter(|f| f.subject == ind.id).collect();
        for f in facts {
            let tag = format!("{}:{}", f.property.namespace(), f.property.local());
            w.target(&tag, &f.payload.value, "        ");
        }
        w.out.push_str("    </owl:NamedIndividual>\n");
    }
    w.out.push('\n');
    for f in store.facts() {
        w.axiom(f);
    }
    w.out.push_str("</rdf:RDF>\n");
    w.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Annotations, QoC};
    use crate::term::Timestamp;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn axiom_carries_annotations() {
        let mut e = Engine::with_core();
        let t = Timestamp::parse("2013-09-18T14:00:00").unwrap();
        e.create_individual("environment", "envreading1", "sensor1", t).unwrap();
        let ann = Annotations {
            unit: Some("Fahrenheit".into()),
            qoc: QoC {
                probability: Some(0.9),
                ..QoC::default()
            },
            source: Some("sensor1".into()),
            ..Annotations::default()
        };
        e.assert_literal("envreading1", "temperature", "100.0", ann, "sensor1", t)
            .unwrap();
        let x = export_rdfxml(&e, DEFAULT_BASE_IRI);
        for needle in [
            "<owl:annotatedTarget rdf:datatype=\"&xsd;float\">100.0</owl:annotatedTarget>",
            "<rocomo-schema:unit rdf:datatype=\"&xsd;string\">Fahrenheit</rocomo-schema:unit>",
            "<rocomo-schema:probability rdf:datatype=\"&xsd;float\">0.9</rocomo-schema:probability>",
            "<rocomo-schema:timeStamp rdf:datatype=\"&xsd;dateTime\">2013-09-18T14:00:00</rocomo-schema:timeStamp>",
            "<rocomo-schema:source rdf:datatype=\"&xsd;string\">sensor1</rocomo-schema:source>",
            "<owl:annotatedSource rdf:resource=\"&environment;envreading1\"/>",
            "<owl:annotatedProperty rdf:resource=\"&environment;temperature\"/>",
            "<!ENTITY environment \"http://example.org/rocomo/environment#\" >",
        ] {
            assert!(x.contains(needle), "missing {needle}\n{x}");
        }
        assert_eq!(export_rdfxml(&e, DEFAULT_BASE_IRI), x);
        let other = export_rdfxml(&e, "http://ex.test/r/");
        assert!(other.contains("\"http://ex.test/r/environment#\""));
    }
}
