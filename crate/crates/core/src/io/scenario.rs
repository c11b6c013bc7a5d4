//! Replays a scenario script against an engine and records a timeline.

use std::collections::BTreeMap;
use std::fmt;

use crate::access::Decision;
use crate::engine::{Engine, Error};
use crate::situation::{ActivityId, ActivityState, GoalId, GoalStatus};
use crate::store::{parse_literal, AnnotatedValue, Annotations, QoC, ResolutionPolicy, SYSTEM};
use crate::term::{Timestamp, Value};

use super::document::{Expectation, Literal, ScenarioScript, Step};
use super::DocumentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    /// A situation transition (trigger, subgoal, plan, start, complete,
    /// abort).
    Transition,
    /// A fact recorded by the script.
    Assertion,
    /// An `expect` step or an `expect_error` outcome.
    Check { passed: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// Index of the script step that produced this entry.
    pub step: usize,
    pub at: Option<Timestamp>,
    pub kind: EntryKind,
    /// `trigger`, `start`, `assert`, `expect`, ...
    pub tag: String,
    pub text: String,
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = self.at.map_or_else(|| " ".repeat(19), |t| t.to_string());
        let tag = match self.kind {
            EntryKind::Check { passed: true } => format!("{} ok", self.tag),
            EntryKind::Check { passed: false } => format!("{} FAILED", self.tag),
            _ => self.tag.clone(),
        };
        write!(f, "{at}  {tag:<12}  {}", self.text)
    }
}

/// Ordered record of a run. Two runs of the same script on equal engines
/// produce equal reports.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimelineReport {
    pub name: Option<String>,
    pub steps: usize,
    pub entries: Vec<Entry>,
}

impl TimelineReport {
    pub fn checks(&self) -> impl Iterator<Item = &Entry> {
        self.entries
            .iter()
            .filter(|e| matches!(e.kind, EntryKind::Check { .. }))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::Check { passed: false })
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0
    }

    pub fn summary(&self) -> String {
        let transitions = self.entries.iter().filter(|e| e.kind == EntryKind::Transition).count();
        format!(
            "{} steps, {} transitions, {} checks, {} failed",
            self.steps,
            transitions,
            self.checks().count(),
            self.failure_count()
        )
    }
}

impl fmt::Display for TimelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "scenario {n}")?;
        }
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        write!(f, "{}", self.summary())
    }
}

struct Runner<'a> {
    engine: &'a mut Engine,
    goals: BTreeMap<String, GoalId>,
    activities: BTreeMap<String, ActivityId>,
    /// Timeline lengths already reported, per situation.
    seen: Vec<usize>,
    clock: Option<Timestamp>,
    entries: Vec<Entry>,
}

fn invalid(i: usize, message: impl Into<String>) -> DocumentError {
    DocumentError::InvalidScript {
        location: format!("scenario.steps[{i}]"),
        message: message.into(),
    }
}

/// Runs every step in order. A step that fails without a matching
/// `expect_error` stops the run with [`DocumentError::Step`]; failed
/// expectations are recorded in the report instead.
pub fn run_scenario(script: &ScenarioScript, engine: &mut Engine) -> Result<TimelineReport, DocumentError> {
    let mut last: Option<Timestamp> = None;
    for (i, step) in script.steps.iter().enumerate() {
        if let Some(t) = step.at() {
            if let Some(prev) = last.filter(|p| t < *p) {
                return Err(invalid(i, format!("time {t} is before the previous step time {prev}")));
            }
            last = Some(t);
        }
    }

    let seen = engine.situations().iter().map(|s| s.timeline().len()).collect();
    let mut r = Runner {
        engine,
        goals: BTreeMap::new(),
        activities: BTreeMap::new(),
        seen,
        clock: None,
        entries: Vec::new(),
    };
    for (i, step) in script.steps.iter().enumerate() {
        if let Some(t) = step.at() {
            r.clock = Some(t);
        }
        r.step(i, step)?;
        r.collect_transitions(i);
    }
    Ok(TimelineReport {
        name: script.name.clone(),
        steps: script.steps.len(),
        entries: r.entries,
    })
}

impl Runner<'_> {
    fn goal(&self, i: usize, alias: &str) -> Result<GoalId, DocumentError> {
        self.goals
            .get(alias)
            .copied()
            .ok_or_else(|| invalid(i, format!("no goal named `{alias}` earlier in the script")))
    }

    fn activity(&self, i: usize, alias: &str) -> Result<ActivityId, DocumentError> {
        self.activities
            .get(alias)
            .copied()
            .ok_or_else(|| invalid(i, format!("no activity named `{alias}` earlier in the script")))
    }

    fn push(&mut self, step: usize, kind: EntryKind, tag: &str, text: String) {
        self.entries.push(Entry {
            step,
            at: self.clock,
            kind,
            tag: tag.to_owned(),
            text,
        });
    }

    fn collect_transitions(&mut self, step: usize) {
        for (k, sit) in self.engine.situations().iter().enumerate() {
            if self.seen.len() <= k {
                self.seen.push(0);
            }
            for t in &sit.timeline()[self.seen[k]..] {
                let mut text = t.subject.clone();
                if !t.effects.is_empty() {
                    text.push_str(&format!("  [{}]", t.effects.join("; ")));
                }
                self.entries.push(Entry {
                    step,
                    at: Some(t.at),
                    kind: EntryKind::Transition,
                    tag: t.change.to_owned(),
                    text,
                });
            }
            self.seen[k] = sit.timeline().len();
        }
    }

    fn step(&mut self, i: usize, step: &Step) -> Result<(), DocumentError> {
        if let Step::Expect(x) = step {
            let (passed, text) = self.expect(i, x)?.map_err(|e| DocumentError::Step {
                index: i,
                op: "expect",
                source: Box::new(e),
            })?;
            self.push(i, EntryKind::Check { passed }, "expect", text);
            return Ok(());
        }
        let outcome = self.act(i, step)?;
        match (step.expect_error(), outcome) {
            (None, Ok(())) => Ok(()),
            (None, Err(e)) => Err(DocumentError::Step {
                index: i,
                op: step.op(),
                source: Box::new(e),
            }),
            (Some(want), Err(e)) => {
                let passed = e.kind() == want;
                let text = if passed {
                    format!("{} rejected as expected: {e}", step.op())
                } else {
                    format!("{} expected {want}, got {}: {e}", step.op(), e.kind())
                };
                self.push(i, EntryKind::Check { passed }, "reject", text);
                Ok(())
            }
            (Some(want), Ok(())) => {
                let text = format!("{} expected {want}, but it succeeded", step.op());
                self.push(i, EntryKind::Check { passed: false }, "reject", text);
                Ok(())
            }
        }
    }

    /// Outer error: the script itself is malformed. Inner error: the
    /// engine rejected the operation.
    fn act(&mut self, i: usize, step: &Step) -> Result<Result<(), Error>, DocumentError> {
        Ok(match step {
            Step::Trigger {
                at, event, goal, alias, ..
            } => self.engine.trigger(event, goal, *at).and_then(|sid| {
                let root = self.engine.status(sid)?.root;
                self.goals.insert(alias.clone(), root);
                Ok(())
            }),
            Step::AddGoal {
                parent, goal, alias, ..
            } => {
                let parent = self.goal(i, parent)?;
                self.engine.add_goal(parent.situation, goal, parent).map(|g| {
                    self.goals.insert(alias.clone(), g);
                })
            }
            Step::AddActivity {
                class,
                goal,
                preconditions,
                performers,
                atomic,
                alias,
                ..
            } => {
                let g = self.goal(i, goal)?;
                let pre = preconditions
                    .iter()
                    .map(|p| self.goal(i, p))
                    .collect::<Result<Vec<_>, _>>()?;
                let performers: Vec<&str> = performers.iter().map(String::as_str).collect();
                self.engine
                    .add_activity(g.situation, class, g, &pre, &performers, *atomic)
                    .map(|a| {
                        self.activities.insert(alias.clone(), a);
                    })
            }
            Step::AssertData {
                at,
                subject,
                property,
                value,
                unit,
                accuracy,
                probability,
                coverage,
                resolution,
                mean_error,
                recurrence,
                source,
                actor,
                ..
            } => {
                let ann = Annotations {
                    timestamp: Some(*at),
                    unit: unit.clone(),
                    qoc: QoC {
                        accuracy: *accuracy,
                        probability: *probability,
                        coverage: coverage.clone(),
                        resolution: *resolution,
                        mean_error: *mean_error,
                        recurrence: recurrence.clone(),
                    },
                    source: source.clone(),
                };
                let actor = actor.as_deref().or(source.as_deref()).unwrap_or(SYSTEM);
                match self
                    .engine
                    .assert_literal(subject, property, &value.to_string(), ann, actor, *at)
                {
                    Ok(f) => {
                        let text = format!("{} {} = {}", f.subject, f.property, f.payload);
                        self.push(i, EntryKind::Assertion, "assert", text);
                        Ok(())
                    }
                    Err(err) => Err(err),
                }
            }
            Step::AssertRelation {
                at,
                subject,
                property,
                object,
                probability,
                source,
                actor,
                ..
            } => {
                let ann = Annotations {
                    timestamp: Some(*at),
                    qoc: QoC {
                        probability: *probability,
                        ..QoC::default()
                    },
                    source: source.clone(),
                    ..Annotations::default()
                };
                let actor = actor.as_deref().or(source.as_deref()).unwrap_or(SYSTEM);
                match self.engine.assert_relation(subject, property, object, ann, actor, *at) {
                    Ok((f, derived)) => {
                        let mut text = format!("{} {} {}", f.subject, f.property, object);
                        if let Some(d) = derived {
                            text.push_str(&format!("  [derived {} {} {}]", d.subject, d.property, f.subject));
                        }
                        self.push(i, EntryKind::Assertion, "assert", text);
                        Ok(())
                    }
                    Err(err) => Err(err),
                }
            }
            Step::Start { at, activity, .. } => {
                let a = self.activity(i, activity)?;
                self.engine.start_activity(a.situation, a, *at)
            }
            Step::Complete { at, activity, .. } => {
                let a = self.activity(i, activity)?;
                self.engine.complete_activity(a.situation, a, *at)
            }
            Step::Abort { at, activity, .. } => {
                let a = self.activity(i, activity)?;
                self.engine.abort_activity(a.situation, a, *at)
            }
            Step::Expect(_) => unreachable!("handled by the caller"),
        })
    }

    fn expect(&self, i: usize, x: &Expectation) -> Result<Result<(bool, String), Error>, DocumentError> {
        let e = &*self.engine;
        match x {
            Expectation::Value {
                subject,
                property,
                policy,
                value,
                unit,
                source,
                none,
            } => {
                let policy: ResolutionPolicy = match policy {
                    Some(p) => p.parse().map_err(|m: String| invalid(i, m))?,
                    None => ResolutionPolicy::Latest,
                };
                Ok(self.expect_value(
                    subject,
                    property,
                    policy,
                    value.as_ref(),
                    unit.as_deref(),
                    source.as_deref(),
                    *none,
                ))
            }
            Expectation::Goal {
                goal,
                status,
                achieved_at,
            } => {
                let id = self.goal(i, goal)?;
                let want_status = match status.as_deref() {
                    None => None,
                    Some("achieved") => Some(GoalStatus::Achieved),
                    Some("pending") => Some(GoalStatus::Pending),
                    Some(other) => return Err(invalid(i, format!("unknown goal status `{other}`"))),
                };
                Ok(e.situation(id.situation).and_then(|s| {
                    let g = s.goal(id)?;
                    let found = match g.achieved_at {
                        Some(t) => format!("achieved at {t}"),
                        None => "pending".to_owned(),
                    };
                    let mut want = Vec::new();
                    let mut ok = true;
                    if let Some(st) = want_status {
                        ok &= g.status == st;
                        want.push(
                            if st == GoalStatus::Achieved {
                                "achieved"
                            } else {
                                "pending"
                            }
                            .to_owned(),
                        );
                    }
                    if let Some(t) = achieved_at {
                        ok &= g.achieved_at == Some(*t);
                        want.push(format!("at {t}"));
                    }
                    let text = format!("goal {id} \"{}\" {} (found {found})", g.description, want.join(" "));
                    Ok((ok, text))
                }))
            }
            Expectation::Activity {
                activity,
                state,
                start_time,
                end_time,
            } => {
                let id = self.activity(i, activity)?;
                let want_state: Option<ActivityState> = state
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(|m: String| invalid(i, m))?;
                Ok(e.situation(id.situation).and_then(|s| {
                    let a = s.activity(id)?;
                    let mut ok = true;
                    let mut want = Vec::new();
                    if let Some(st) = want_state {
                        ok &= a.state == st;
                        want.push(st.to_string());
                    }
                    if let Some(t) = start_time {
                        ok &= a.start_time == Some(*t);
                        want.push(format!("started {t}"));
                    }
                    if let Some(t) = end_time {
                        ok &= a.end_time == Some(*t);
                        want.push(format!("ended {t}"));
                    }
                    let text = format!("activity {id} {} {} (found {})", a.class, want.join(" "), a.state);
                    Ok((ok, text))
                }))
            }
            Expectation::Access {
                entity,
                activity_class,
                allowed,
                via,
            } => Ok(e.check(entity, activity_class).map(|d| {
                let ok = match (&d, allowed) {
                    (Decision::Allowed { via: g }, true) => via.as_ref().is_none_or(|v| v == g),
                    (Decision::Denied, false) => true,
                    _ => false,
                };
                let found = match &d {
                    Decision::Allowed { via } => format!("allowed via {via}"),
                    Decision::Denied => "denied".to_owned(),
                };
                let want = if *allowed { "allowed" } else { "denied" };
                (ok, format!("access {entity} {activity_class} {want} (found {found})"))
            })),
            Expectation::Terminal { goal, terminal } => {
                let id = self.goal(i, goal)?;
                Ok(e.situation(id.situation).map(|s| {
                    let ok = s.is_terminal() == *terminal;
                    (
                        ok,
                        format!(
                            "situation {} terminal {terminal} (found {})",
                            id.situation,
                            s.is_terminal()
                        ),
                    )
                }))
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn expect_value(
        &self,
        subject: &str,
        property: &str,
        policy: ResolutionPolicy,
        value: Option<&Literal>,
        unit: Option<&str>,
        source: Option<&str>,
        none: bool,
    ) -> Result<(bool, String), Error> {
        let e = &*self.engine;
        let facts = e.get_current(subject, property, policy)?;
        let p = e.property(property)?;
        let mut want = Vec::new();
        if let Some(v) = value {
            want.push(match unit {
                Some(u) => format!("{v} {u}"),
                None => v.to_string(),
            });
        }
        if let Some(s) = source {
            want.push(format!("from {s}"));
        }
        if none {
            want.push("nothing".to_owned());
        }
        let head = format!("{subject} {p} {policy} = {}", want.join(" "));
        let found: Vec<String> = facts.iter().map(|f| f.payload.to_string()).collect();
        let found = if found.is_empty() {
            "nothing".to_owned()
        } else {
            found.join(", ")
        };
        if none {
            return Ok((facts.is_empty(), format!("{head} (found {found})")));
        }
        let expected = match value {
            Some(v) => Some(parse_literal(e.schema(), &p, &v.to_string())?),
            None => None,
        };
        let matches = |av: &AnnotatedValue| -> bool {
            if source.is_some_and(|s| av.source.as_deref() != Some(s)) {
                return false;
            }
            let Some(want) = &expected else { return true };
            let mut rhs = AnnotatedValue::new(want.clone(), av.timestamp);
            rhs.unit = unit.map(str::to_owned).or_else(|| av.unit.clone());
            if let (Value::Individual(a), Value::Individual(b)) = (&av.value, want) {
                return a == b;
            }
            e.units()
                .compare(av, &rhs)
                .is_ok_and(|o| o == std::cmp::Ordering::Equal)
        };
        let ok = facts.iter().any(|f| matches(&f.payload));
        Ok((ok, format!("{head} (found {found})")))
    }
}
