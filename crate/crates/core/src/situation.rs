//! Goal-driven situations.
//!
//! An event opens a situation and sets its root goal. Goals form an AND
//! tree: a goal with subgoals is achieved exactly when all of them are.
//! Activities each work toward one goal (their postcondition) and may only
//! start once their precondition goals are achieved. Callers supply every
//! time; the engine only insists that time never runs backwards within a
//! situation.

use std::collections::BTreeSet;
use std::fmt;

use chrono::TimeDelta;

use crate::term::{TermName, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SituationId(pub u32);

impl fmt::Display for SituationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoalId {
    pub situation: SituationId,
    pub index: u32,
}

impl fmt::Display for GoalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.G{}", self.situation, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActivityId {
    pub situation: SituationId,
    pub index: u32,
}

impl fmt::Display for ActivityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.A{}", self.situation, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalStatus {
    Pending,
    Achieved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub id: GoalId,
    pub description: String,
    pub parent: Option<GoalId>,
    pub children: Vec<GoalId>,
    pub status: GoalStatus,
    pub achieved_at: Option<Timestamp>,
}

impl Goal {
    pub fn is_achieved(&self) -> bool {
        self.status == GoalStatus::Achieved
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub individual: String,
    pub occurred_at: Timestamp,
    pub triggers_goal: GoalId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityState {
    Pending,
    Eligible,
    Running,
    Completed,
    Aborted,
}

impl ActivityState {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivityState::Pending => "pending",
            ActivityState::Eligible => "eligible",
            ActivityState::Running => "running",
            ActivityState::Completed => "completed",
            ActivityState::Aborted => "aborted",
        }
    }
}

impl fmt::Display for ActivityState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ActivityState {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "pending" => ActivityState::Pending,
            "eligible" => ActivityState::Eligible,
            "running" => ActivityState::Running,
            "completed" => ActivityState::Completed,
            "aborted" => ActivityState::Aborted,
            _ => return Err(format!("unknown activity state `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub id: ActivityId,
    pub class: TermName,
    pub goal: GoalId,
    pub preconditions: BTreeSet<GoalId>,
    pub performers: BTreeSet<String>,
    /// Atomic activities cannot be aborted once running.
    pub atomic: bool,
    pub state: ActivityState,
    pub start_time: Option<Timestamp>,
    pub end_time: Option<Timestamp>,
}

impl Activity {
    pub fn duration(&self) -> Option<TimeDelta> {
        Some(self.end_time?.since(self.start_time?))
    }
}

/// One line of the timeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub at: Timestamp,
    pub subject: String,
    pub change: &'static str,
    pub effects: Vec<String>,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {:<8}  {}", self.at, self.change, self.subject)?;
        if !self.effects.is_empty() {
            write!(f, "  [{}]", self.effects.join("; "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SituationError {
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("goal {0} is already achieved and cannot take new subgoals")]
    ParentAlreadyAchieved(GoalId),
    #[error("activity {activity} is waiting on goals {}", join(pending))]
    PreconditionNotMet { activity: ActivityId, pending: Vec<GoalId> },
    #[error("activity {activity} ({class}) is not permitted for {}", denied.join(", "))]
    AccessDenied {
        activity: ActivityId,
        class: TermName,
        denied: Vec<String>,
    },
    #[error("time {requested} is before the situation clock {clock}")]
    ClockRegression { clock: Timestamp, requested: Timestamp },
    #[error("the root goal is achieved; no further activities can start")]
    AlreadyTerminal,
    #[error("activity {activity} is {state}, not running")]
    NotRunning { activity: ActivityId, state: ActivityState },
    #[error("activity {activity} is {state} and cannot start")]
    NotStartable { activity: ActivityId, state: ActivityState },
    #[error("activity {0} is atomic and cannot be interrupted")]
    AtomicNonInterruptable(ActivityId),
    #[error("goal {goal} still has pending subgoals {}", join(pending))]
    SubgoalsPending { goal: GoalId, pending: Vec<GoalId> },
    #[error("unknown situation `{0}`")]
    UnknownSituation(String),
    #[error("`{0}` is not an event")]
    NotAnEvent(String),
    #[error("`{0}` is not an activity class")]
    NotAnActivityClass(String),
}

impl SituationError {
    pub fn kind(&self) -> &'static str {
        match self {
            SituationError::UnknownGoal(_) => "UnknownGoal",
            SituationError::UnknownActivity(_) => "UnknownActivity",
            SituationError::ParentAlreadyAchieved(_) => "ParentAlreadyAchieved",
            SituationError::PreconditionNotMet { .. } => "PreconditionNotMet",
            SituationError::AccessDenied { .. } => "AccessDenied",
            SituationError::ClockRegression { .. } => "ClockRegression",
            SituationError::AlreadyTerminal => "AlreadyTerminal",
            SituationError::NotRunning { .. } => "NotRunning",
            SituationError::NotStartable { .. } => "NotStartable",
            SituationError::AtomicNonInterruptable(_) => "AtomicNonInterruptable",
            SituationError::SubgoalsPending { .. } => "SubgoalsPending",
            SituationError::UnknownSituation(_) => "UnknownSituation",
            SituationError::NotAnEvent(_) => "NotAnEvent",
            SituationError::NotAnActivityClass(_) => "NotAnActivityClass",
        }
    }
}

fn join(ids: &[GoalId]) -> String {
    ids.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
}

/// Decides whether a performer may carry out an activity class.
pub trait Authorizer {
    fn permits(&self, performer: &str, activity_class: &TermName) -> bool;
}

impl<F: Fn(&str, &TermName) -> bool> Authorizer for F {
    fn permits(&self, performer: &str, activity_class: &TermName) -> bool {
        self(performer, activity_class)
    }
}

/// Immutable view of a situation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub id: SituationId,
    pub event: Event,
    pub root: GoalId,
    pub goals: Vec<Goal>,
    pub activities: Vec<Activity>,
    pub clock: Timestamp,
    pub terminal: bool,
}

impl Snapshot {
    pub fn goal(&self, id: GoalId) -> Option<&Goal> {
        self.goals.iter().find(|g| g.id == id)
    }

    pub fn activity(&self, id: ActivityId) -> Option<&Activity> {
        self.activities.iter().find(|a| a.id == id)
    }

    pub fn running(&self) -> impl Iterator<Item = &Activity> {
        self.activities.iter().filter(|a| a.state == ActivityState::Running)
    }
}

type Result<T, E = SituationError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Situation {
    id: SituationId,
    event: Event,
    goals: Vec<Goal>,
    activities: Vec<Activity>,
    clock: Timestamp,
    log: Vec<Transition>,
}

impl Situation {
    /// Opens a situation whose root goal is pending. The caller has
    /// already checked that `event_individual` is an event.
    pub fn new(id: SituationId, event_individual: &str, root_goal: &str, t0: Timestamp) -> Self {
        let root = GoalId {
            situation: id,
            index: 0,
        };
        let goal = Goal {
            id: root,
            description: root_goal.to_owned(),
            parent: None,
            children: Vec::new(),
            status: GoalStatus::Pending,
            achieved_at: None,
        };
        Situation {
            id,
            event: Event {
                individual: event_individual.to_owned(),
                occurred_at: t0,
                triggers_goal: root,
            },
            goals: vec![goal],
            activities: Vec::new(),
            clock: t0,
            log: vec![Transition {
                at: t0,
                subject: event_individual.to_owned(),
                change: "trigger",
                effects: vec![format!("goal {root} \"{root_goal}\" set")],
            }],
        }
    }

    pub fn id(&self) -> SituationId {
        self.id
    }

    pub fn root(&self) -> GoalId {
        self.event.triggers_goal
    }

    pub fn clock(&self) -> Timestamp {
        self.clock
    }

    pub fn is_terminal(&self) -> bool {
        self.goals[0].is_achieved()
    }

    pub fn timeline(&self) -> &[Transition] {
        &self.log
    }

    fn goal_index(&self, g: GoalId) -> Result<usize> {
        if g.situation == self.id && (g.index as usize) < self.goals.len() {
            Ok(g.index as usize)
        } else {
            Err(SituationError::UnknownGoal(g.to_string()))
        }
    }

    fn activity_index(&self, a: ActivityId) -> Result<usize> {
        if a.situation == self.id && (a.index as usize) < self.activities.len() {
            Ok(a.index as usize)
        } else {
            Err(SituationError::UnknownActivity(a.to_string()))
        }
    }

    pub fn goal(&self, g: GoalId) -> Result<&Goal> {
        Ok(&self.goals[self.goal_index(g)?])
    }

    pub fn activity(&self, a: ActivityId) -> Result<&Activity> {
        Ok(&self.activities[self.activity_index(a)?])
    }

    pub fn add_goal(&mut self, description: &str, parent: GoalId) -> Result<&Goal> {
        let p = self.goal_index(parent)?;
        if self.goals[p].is_achieved() {
            return Err(SituationError::ParentAlreadyAchieved(parent));
        }
        let id = GoalId {
            situation: self.id,
            index: self.goals.len() as u32,
        };
        self.goals[p].children.push(id);
        self.goals.push(Goal {
            id,
            description: description.to_owned(),
            parent: Some(parent),
            children: Vec::new(),
            status: GoalStatus::Pending,
            achieved_at: None,
        });
        let at = self.clock;
        self.log.push(Transition {
            at,
            subject: format!("{id} \"{description}\""),
            change: "subgoal",
            effects: vec![format!("under {parent}")],
        });
        Ok(self.goals.last().unwrap())
    }

    /// Adds a planned activity. It is eligible at once when every
    /// precondition is already achieved. Class and performer checks are
    /// the caller's job.
    pub fn add_activity(
        &mut self,
        class: TermName,
        goal: GoalId,
        preconditions: BTreeSet<GoalId>,
        performers: BTreeSet<String>,
        atomic: bool,
    ) -> Result<&Activity> {
        self.goal_index(goal)?;
        for &g in &preconditions {
            self.goal_index(g)?;
        }
        let ready = preconditions
            .iter()
            .all(|&g| self.goals[g.index as usize].is_achieved());
        let id = ActivityId {
            situation: self.id,
            index: self.activities.len() as u32,
        };
        let state = if ready {
            ActivityState::Eligible
        } else {
            ActivityState::Pending
        };
        self.log.push(Transition {
            at: self.clock,
            subject: format!("{id} {class}"),
            change: "plan",
            effects: vec![format!("goal {goal}"), state.to_string()],
        });
        self.activities.push(Activity {
            id,
            class,
            goal,
            preconditions,
            performers,
            atomic,
            state,
            start_time: None,
            end_time: None,
        });
        Ok(self.activities.last().unwrap())
    }

    fn check_clock(&self, t: Timestamp) -> Result<()> {
        if t < self.clock {
            return Err(SituationError::ClockRegression {
                clock: self.clock,
                requested: t,
            });
        }
        Ok(())
    }

    pub fn start_activity(&mut self, a: ActivityId, t: Timestamp, auth: &dyn Authorizer) -> Result<&Activity> {
        let i = self.activity_index(a)?;
        if self.is_terminal() {
            return Err(SituationError::AlreadyTerminal);
        }
        let act = &self.activities[i];
        match act.state {
            ActivityState::Eligible => {}
            ActivityState::Pending => {
                let pending = act
                    .preconditions
                    .iter()
                    .copied()
                    .filter(|g| !self.goals[g.index as usize].is_achieved())
                    .collect();
                return Err(SituationError::PreconditionNotMet { activity: a, pending });
            }
            state => return Err(SituationError::NotStartable { activity: a, state }),
        }
        self.check_clock(t)?;
        let denied: Vec<String> = act
            .performers
            .iter()
            .filter(|p| !auth.permits(p, &act.class))
            .cloned()
            .collect();
        if !denied.is_empty() {
            return Err(SituationError::AccessDenied {
                activity: a,
                class: act.class.clone(),
                denied,
            });
        }
        self.clock = t;
        let act = &mut self.activities[i];
        act.state = ActivityState::Running;
        act.start_time = Some(t);
        let performers: Vec<&str> = act.performers.iter().map(String::as_str).collect();
        let effect = if performers.is_empty() {
            Vec::new()
        } else {
            vec![format!("by {}", performers.join(", "))]
        };
        self.log.push(Transition {
            at: t,
            subject: format!("{a} {}", act.class),
            change: "start",
            effects: effect,
        });
        Ok(&self.activities[i])
    }

    pub fn complete_activity(&mut self, a: ActivityId, t: Timestamp) -> Result<&Activity> {
        let i = self.activity_index(a)?;
        let act = &self.activities[i];
        if act.state != ActivityState::Running {
            return Err(SituationError::NotRunning {
                activity: a,
                state: act.state,
            });
        }
        self.check_clock(t)?;
        let g = act.goal;
        let pending: Vec<GoalId> = self.goals[g.index as usize]
            .children
            .iter()
            .copied()
            .filter(|c| !self.goals[c.index as usize].is_achieved())
            .collect();
        if !pending.is_empty() {
            return Err(SituationError::SubgoalsPending { goal: g, pending });
        }

        self.clock = t;
        let act = &mut self.activities[i];
        act.state = ActivityState::Completed;
        act.end_time = Some(t);
        let subject = format!("{a} {}", act.class);
        let duration = act.duration().unwrap_or_default();
        let mut effects = vec![format!("duration {}", fmt_duration(duration))];
        self.achieve(g, t, &mut effects);
        for act in &mut self.activities {
            if act.state == ActivityState::Pending
                && act
                    .preconditions
                    .iter()
                    .all(|p| self.goals[p.index as usize].is_achieved())
            {
                act.state = ActivityState::Eligible;
                effects.push(format!("{} eligible", act.id));
            }
        }
        self.log.push(Transition {
            at: t,
            subject,
            change: "complete",
            effects,
        });
        Ok(&self.activities[i])
    }

    /// Marks `g` achieved and walks up while every sibling is achieved.
    fn achieve(&mut self, g: GoalId, t: Timestamp, effects: &mut Vec<String>) {
        let mut cur = Some(g);
        while let Some(id) = cur {
            let goal = &mut self.goals[id.index as usize];
            if goal.is_achieved() {
                return;
            }
            goal.status = GoalStatus::Achieved;
            goal.achieved_at = Some(t);
            effects.push(format!("achieved {id} \"{}\"", goal.description));
            cur = goal.parent.filter(|p| {
                self.goals[p.index as usize]
                    .children
                    .iter()
                    .all(|c| self.goals[c.index as usize].is_achieved())
            });
        }
    }

    pub fn abort_activity(&mut self, a: ActivityId, t: Timestamp) -> Result<&Activity> {
        let i = self.activity_index(a)?;
        let act = &self.activities[i];
        if act.state != ActivityState::Running {
            return Err(SituationError::NotRunning {
                activity: a,
                state: act.state,
            });
        }
        if act.atomic {
            return Err(SituationError::AtomicNonInterruptable(a));
        }
        self.check_clock(t)?;
        self.clock = t;
        let act = &mut self.activities[i];
        act.state = ActivityState::Aborted;
        act.end_time = Some(t);
        self.log.push(Transition {
            at: t,
            subject: format!("{a} {}", act.class),
            change: "abort",
            effects: vec![format!("goal {} still pending", act.goal)],
        });
        Ok(&self.activities[i])
    }

    pub fn status(&self) -> Snapshot {
        Snapshot {
            id: self.id,
            event: self.event.clone(),
            root: self.root(),
            goals: self.goals.clone(),
            activities: self.activities.clone(),
            clock: self.clock,
            terminal: self.is_terminal(),
        }
    }
}

/// `20m`, `1h05m`, `45s`.
pub fn fmt_duration(d: TimeDelta) -> String {
    let secs = d.num_seconds();
    let (h, m, s) = (secs / 3600, (secs % 3600) / 60, secs % 60);
    match (h, m, s) {
        (0, 0, s) => format!("{s}s"),
        (0, m, 0) => format!("{m}m"),
        (0, m, s) => format!("{m}m{s:02}s"),
        (h, m, 0) => format!("{h}h{m:02}m"),
        (h, m, s) => format!("{h}h{m:02}m{s:02}s"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    fn t(s: &str) -> TermName {
        TermName::parse(s).unwrap()
    }

    fn allow_all(_: &str, _: &TermName) -> bool {
        true
    }

    struct Fire {
        sit: Situation,
        timeleft: GoalId,
        exits: GoalId,
        evacuated: GoalId,
        readings: ActivityId,
        floormaps: ActivityId,
        evacuate: ActivityId,
    }

    fn fire() -> Fire {
        let mut sit = Situation::new(SituationId(1), "fireincident", "Evacuate", ts("2013-09-18T14:00:00"));
        let root = sit.root();
        let timeleft = sit.add_goal("Determine time left for evacuation", root).unwrap().id;
        let exits = sit.add_goal("Determine exit routes for evacuation", root).unwrap().id;
        let evacuated = sit.add_goal("People evacuated", root).unwrap().id;
        let readings = sit
            .add_activity(
                t("getupdatedtemperaturereadings"),
                timeleft,
                BTreeSet::new(),
                ["responder1".into()].into(),
                false,
            )
            .unwrap()
            .id;
        let floormaps = sit
            .add_activity(
                t("accessbuildingfloormaps"),
                exits,
                BTreeSet::new(),
                ["responder2".into()].into(),
                false,
            )
            .unwrap()
            .id;
        let evacuate = sit
            .add_activity(
                t("evacuatepeople"),
                evacuated,
                [timeleft, exits].into(),
                ["responder1".into(), "responder2".into()].into(),
                true,
            )
            .unwrap()
            .id;
        Fire {
            sit,
            timeleft,
            exits,
            evacuated,
            readings,
            floormaps,
            evacuate,
        }
    }

    #[test]
    fn fresh_situation() {
        let sit = Situation::new(SituationId(1), "fireincident", "Evacuate", ts("2013-09-18T14:00:00"));
        let snap = sit.status();
        assert_eq!(snap.goals.len(), 1);
        assert_eq!(snap.goals[0].status, GoalStatus::Pending);
        assert!(snap.activities.is_empty());
        assert!(!snap.terminal);
        assert_eq!(snap.clock, ts("2013-09-18T14:00:00"));
        assert_eq!(sit.status(), snap);
    }

    #[test]
    fn goals_and_activities() {
        let mut f = fire();
        let snap = f.sit.status();
        assert_eq!(snap.goal(snap.root).unwrap().children.len(), 3);
        assert_eq!(snap.activity(f.readings).unwrap().state, ActivityState::Eligible);
        assert_eq!(snap.activity(f.evacuate).unwrap().state, ActivityState::Pending);
        let foreign = GoalId {
            situation: SituationId(9),
            index: 0,
        };
        assert_eq!(f.sit.add_goal("x", foreign).unwrap_err().kind(), "UnknownGoal");
        assert_eq!(
            f.sit
                .add_activity(t("x"), f.timeleft, [foreign].into(), BTreeSet::new(), false)
                .unwrap_err()
                .kind(),
            "UnknownGoal"
        );
    }

    #[test]
    fn full_run() {
        let mut f = fire();
        let t1 = ts("2013-09-18T14:01:00");
        f.sit.start_activity(f.readings, t1, &allow_all).unwrap();
        f.sit.start_activity(f.floormaps, t1, &allow_all).unwrap();
        assert_eq!(f.sit.status().running().count(), 2);
        assert_eq!(
            f.sit.start_activity(f.evacuate, t1, &allow_all).unwrap_err().kind(),
            "PreconditionNotMet"
        );
        f.sit.complete_activity(f.readings, ts("2013-09-18T14:05:00")).unwrap();
        assert_eq!(
            f.sit
                .start_activity(f.evacuate, ts("2013-09-18T14:05:00"), &allow_all)
                .unwrap_err()
                .kind(),
            "PreconditionNotMet"
        );
        f.sit.complete_activity(f.floormaps, ts("2013-09-18T14:06:00")).unwrap();
        assert_eq!(f.sit.activity(f.evacuate).unwrap().state, ActivityState::Eligible);
        let t2 = ts("2013-09-18T14:10:00");
        let t3 = ts("2013-09-18T14:30:00");
        f.sit.start_activity(f.evacuate, t2, &allow_all).unwrap();
        assert_eq!(
            f.sit.abort_activity(f.evacuate, t2).unwrap_err().kind(),
            "AtomicNonInterruptable"
        );
        let done = f.sit.complete_activity(f.evacuate, t3).unwrap();
        assert_eq!(done.duration().unwrap().num_minutes(), 20);
        let snap = f.sit.status();
        assert!(snap.terminal);
        assert!(snap.goals.iter().all(Goal::is_achieved));
        assert_eq!(snap.goal(snap.root).unwrap().achieved_at, Some(t3));
        assert_eq!(snap.goal(f.evacuated).unwrap().achieved_at, Some(t3));
        assert_eq!(
            snap.goal(f.timeleft).unwrap().achieved_at,
            Some(ts("2013-09-18T14:05:00"))
        );
        assert_eq!(snap.goal(f.exits).unwrap().achieved_at, Some(ts("2013-09-18T14:06:00")));
        assert_eq!(
            f.sit.add_goal("late", snap.root).unwrap_err().kind(),
            "ParentAlreadyAchieved"
        );

        let extra = f
            .sit
            .add_activity(t("evacuatepeople"), snap.root, BTreeSet::new(), BTreeSet::new(), false)
            .unwrap()
            .id;
        assert_eq!(
            f.sit.start_activity(extra, t3, &allow_all).unwrap_err().kind(),
            "AlreadyTerminal"
        );
    }

    #[test]
    fn lifecycle_errors() {
        let mut f = fire();
        let t1 = ts("2013-09-18T14:01:00");
        assert_eq!(
            f.sit.complete_activity(f.readings, t1).unwrap_err().kind(),
            "NotRunning"
        );
        assert_eq!(f.sit.abort_activity(f.readings, t1).unwrap_err().kind(), "NotRunning");
        assert_eq!(
            f.sit
                .start_activity(f.readings, ts("2013-09-18T13:00:00"), &allow_all)
                .unwrap_err()
                .kind(),
            "ClockRegression"
        );
        let deny_two = |p: &str, _: &TermName| p != "responder2";
        match f.sit.start_activity(f.floormaps, t1, &deny_two).unwrap_err() {
            SituationError::AccessDenied { denied, .. } => assert_eq!(denied, ["responder2"]),
            e => panic!("{e}"),
        }
        assert_eq!(f.sit.activity(f.floormaps).unwrap().state, ActivityState::Eligible);

        f.sit.start_activity(f.readings, t1, &allow_all).unwrap();
        assert_eq!(
            f.sit.start_activity(f.readings, t1, &allow_all).unwrap_err().kind(),
            "NotStartable"
        );
        let aborted = f.sit.abort_activity(f.readings, ts("2013-09-18T14:02:00")).unwrap();
        assert_eq!(aborted.state, ActivityState::Aborted);
        assert!(!f.sit.goal(f.timeleft).unwrap().is_achieved());
        assert_eq!(
            f.sit
                .complete_activity(f.readings, ts("2013-09-18T14:03:00"))
                .unwrap_err()
                .kind(),
            "NotRunning"
        );
    }

    #[test]
    fn parent_goal_needs_children_first() {
        let mut sit = Situation::new(SituationId(1), "e", "root", ts("2013-09-18T14:00:00"));
        let root = sit.root();
        let child = sit.add_goal("child", root).unwrap().id;
        let direct = sit
            .add_activity(t("act"), root, BTreeSet::new(), BTreeSet::new(), false)
            .unwrap()
            .id;
        let at = ts("2013-09-18T14:01:00");
        sit.start_activity(direct, at, &allow_all).unwrap();
        assert_eq!(sit.complete_activity(direct, at).unwrap_err().kind(), "SubgoalsPending");
        let leaf = sit
            .add_activity(t("act"), child, BTreeSet::new(), BTreeSet::new(), false)
            .unwrap()
            .id;
        sit.start_activity(leaf, at, &allow_all).unwrap();
        sit.complete_activity(leaf, at).unwrap();
        assert!(sit.is_terminal());
        // the direct activity may still finish after propagation
        sit.complete_activity(direct, at).unwrap();
        assert_eq!(sit.goal(root).unwrap().achieved_at, Some(at));
    }

    #[test]
    fn durations_format() {
        assert_eq!(fmt_duration(TimeDelta::minutes(20)), "20m");
        assert_eq!(fmt_duration(TimeDelta::seconds(45)), "45s");
        assert_eq!(fmt_duration(TimeDelta::seconds(3900)), "1h05m");
        assert_eq!(fmt_duration(TimeDelta::seconds(3901)), "1h05m01s");
    }
}
