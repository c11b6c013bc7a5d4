//! Random engine states shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use rcm::quality::UnitDef;
use rcm::schema::{DataPropertyDef, ObjectPropertyDef, Volatility};
use rcm::{Annotations, Engine, QoC, TermName, Timestamp, ValueType};

pub fn ts(s: &str) -> Timestamp {
    Timestamp::parse(s).unwrap()
}

pub fn term(s: &str) -> TermName {
    TermName::parse(s).unwrap()
}

/// 2013-09-18T14:00:00 plus `secs`.
pub fn at(secs: i64) -> Timestamp {
    ts("2013-09-18T14:00:00").plus_seconds(secs)
}

fn maybe<R: Rng, T>(rng: &mut R, p: f64, f: impl FnOnce(&mut R) -> T) -> Option<T> {
    if rng.gen_bool(p) {
        Some(f(rng))
    } else {
        None
    }
}

fn text<R: Rng>(rng: &mut R) -> String {
    const PARTS: [&str; 8] = [
        "indian",
        "happy",
        "a b",
        "quote\"d",
        "back\\slash",
        "naïve",
        "line\nbreak",
        "#hash",
    ];
    (0..rng.gen_range(1..=2))
        .map(|_| *PARTS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn real<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(-50..200) as f64,
        1 => rng.gen_range(-1e6..1e6),
        2 => rng.gen::<f64>() * 1e-7,
        _ => rng.gen_range(-300.0..300.0),
    }
}

fn literal<R: Rng>(rng: &mut R, ty: ValueType) -> String {
    match ty {
        ValueType::Text => text(rng),
        ValueType::Integer => rng.gen_range(-1_000_000i64..1_000_000).to_string(),
        ValueType::Real => format!("{:?}", real(rng)),
        ValueType::Boolean => rng.gen_bool(0.5).to_string(),
        ValueType::Datetime => at(rng.gen_range(-1_000_000..1_000_000)).to_string(),
    }
}

fn annotations<R: Rng>(rng: &mut R, t: Timestamp, unit: Option<&str>) -> Annotations {
    Annotations {
        timestamp: Some(t),
        unit: unit.map(str::to_owned),
        qoc: QoC {
            accuracy: maybe(rng, 0.2, |r| r.gen_range(0.0..1.0)),
            probability: maybe(rng, 0.5, |r| {
                *[0.0, 0.1, 0.5, 0.9, 1.0, r.gen::<f64>()].choose(r).unwrap()
            }),
            coverage: maybe(rng, 0.1, |_| "Room123".to_owned()),
            resolution: maybe(rng, 0.1, |r| r.gen_range(0.0..2.0)),
            mean_error: maybe(rng, 0.2, |r| r.gen_range(0.0..5.0)),
            recurrence: maybe(rng, 0.1, |_| "every 30s".to_owned()),
        },
        source: maybe(rng, 0.6, |r| format!("sensor{}", r.gen_range(1..4))),
    }
}

/// A random engine on top of the core: a few extension terms, a unit,
/// individuals, facts with random annotations and access groups. Every
/// operation the engine rejects is simply skipped.
pub fn random_engine<R: Rng>(rng: &mut R, core: &Engine) -> Engine {
    let mut e = core.clone();

    let mut classes: Vec<String> = vec!["person".into(), "sensor".into(), "environment".into(), "device".into()];
    for i in 0..rng.gen_range(0..5) {
        let parent = classes.choose(rng).unwrap().clone();
        let name = format!("ext#k{i}");
        let _ = e
            .schema_mut()
            .define_class(term(&name), term(&parent), &format!("K{i}"));
        classes.push(name);
    }
    for i in 0..rng.gen_range(0..3) {
        let ty = *[
            ValueType::Text,
            ValueType::Integer,
            ValueType::Real,
            ValueType::Boolean,
            ValueType::Datetime,
        ]
        .choose(rng)
        .unwrap();
        let vol = if rng.gen_bool(0.2) {
            Volatility::Static
        } else {
            Volatility::Dynamic
        };
        let domain = classes.choose(rng).unwrap();
        let _ = e.schema_mut().define_data_property(DataPropertyDef::new(
            term(&format!("ext#d{i}")),
            term(domain),
            ty,
            vol,
        ));
    }
    if rng.gen_bool(0.3) {
        let mut p = ObjectPropertyDef::new(term("ext#watches"), term("person"), term("device"));
        p.domain.push(term("sensor"));
        p.functional = rng.gen_bool(0.5);
        let _ = e.schema_mut().define_object_property(p);
    }
    if rng.gen_bool(0.3) {
        let scale = rng.gen_range(0.1..10.0);
        let _ = e
            .units_mut()
            .register_unit(UnitDef::new("furlong", "length", scale, 0.0));
    }

    let mut ids = Vec::new();
    let mut locations = Vec::new();
    for n in 0..rng.gen_range(0..15) {
        let id = format!("i{n}");
        let class = classes.choose(rng).unwrap().clone();
        let actor = format!("actor{}", rng.gen_range(0..3));
        if e.create_individual(&class, &id, &actor, at(rng.gen_range(0..100)))
            .is_ok()
        {
            ids.push(id);
        }
    }
    for n in 0..rng.gen_range(0..3) {
        let id = format!("loc{n}");
        if e.create_individual("location", &id, "SYSTEM", at(0)).is_ok() {
            locations.push(id);
        }
    }
    if ids.is_empty() {
        return e;
    }

    let data: Vec<(String, ValueType)> = e
        .schema()
        .data_properties()
        .map(|p| (p.name.to_string(), p.value_type))
        .collect();
    let objects: Vec<String> = e.schema().object_properties().map(|p| p.name.to_string()).collect();
    for _ in 0..rng.gen_range(0..40) {
        let subject = ids.choose(rng).unwrap().clone();
        let t = at(rng.gen_range(0..10_000));
        let actor = format!("actor{}", rng.gen_range(0..3));
        if rng.gen_bool(0.7) {
            let (p, ty) = data.choose(rng).unwrap().clone();
            let unit = match (p.as_str(), ty) {
                ("environment#temperature", _) => Some(*["celsius", "fahrenheit", "kelvin"].choose(rng).unwrap()),
                (_, ValueType::Real) if rng.gen_bool(0.3) => Some("meters"),
                _ => None,
            };
            let ann = annotations(rng, t, unit);
            let lit = literal(rng, ty);
            let _ = e.assert_literal(&subject, &p, &lit, ann, &actor, t);
        } else {
            let p = objects.choose(rng).unwrap().clone();
            let pool = if p == "locatedin" && !locations.is_empty() && rng.gen_bool(0.7) {
                &locations
            } else {
                &ids
            };
            let object = pool.choose(rng).unwrap().clone();
            let ann = annotations(rng, t, None);
            let _ = e.assert_relation(&subject, &p, &object, ann, &actor, t);
        }
    }

    for g in 0..rng.gen_range(0..3) {
        let id = format!("group{g}");
        if e.create_group(&id, "SYSTEM", at(rng.gen_range(0..100))).is_err() {
            continue;
        }
        for _ in 0..rng.gen_range(0..4) {
            let _ = e.add_member(&id, ids.choose(rng).unwrap());
        }
        for _ in 0..rng.gen_range(0..3) {
            let _ = e.grant_privilege(&id, "activity");
        }
    }
    e
}
