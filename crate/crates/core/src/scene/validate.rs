use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{NameKind, SceneRepresentation, Vocabulary, PERSON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "at", content = "index")]
pub enum Location {
    Scene,
    /// Index into the static triple list, in file order after sorting by frame.
    Triple(usize),
    Action(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Scene => f.write_str("scene"),
            Location::Triple(i) => write!(f, "triple {i}"),
            Location::Action(i) => write!(f, "action {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "violation")]
pub enum ViolationKind {
    EmptyTimeline,
    FrameOutOfRange { frame: u32 },
    UnknownName { kind: NameKind, name: String },
    NonPersonSubject { subject: String },
    DuplicateTriple { frame: u32 },
    IntervalReversed { t_start: u32, t_end: u32 },
    IntervalOutOfRange { t_start: u32, t_end: u32 },
    DuplicateAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: Location,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = self.location;
        match &self.kind {
            ViolationKind::EmptyTimeline => write!(f, "frame_count must be at least 1"),
            ViolationKind::FrameOutOfRange { frame } => {
                write!(f, "frame {frame} out of range at {at}")
            }
            ViolationKind::UnknownName { kind, name } => {
                write!(f, "unknown {kind} {name:?} at {at}")
            }
            ViolationKind::NonPersonSubject { subject } => {
                write!(f, "non-person subject {subject:?} at {at}")
            }
            ViolationKind::DuplicateTriple { frame } => {
                write!(f, "duplicate triple in frame {frame} at {at}")
            }
            ViolationKind::IntervalReversed { .. } => write!(f, "interval reversed at {at}"),
            ViolationKind::IntervalOutOfRange { t_start, t_end } => {
                write!(f, "interval [{t_start}, {t_end}] outside timeline at {at}")
            }
            ViolationKind::DuplicateAction => write!(f, "duplicate action instance at {at}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: Location, kind: ViolationKind) {
        self.violations.push(Violation { location, kind });
    }
}

/// Collects every invariant violation in `scene`. Never fails; an empty
/// report means the scene is valid against `vocab`.
pub fn validate_scene(scene: &SceneRepresentation, vocab: &Vocabulary) -> ValidationReport {
    let mut report = ValidationReport::default();
    let t = scene.frame_count;
    if t == 0 {
        report.push(Location::Scene, ViolationKind::EmptyTimeline);
    }

    let check_name = |report: &mut ValidationReport, at: Location, kind: NameKind, name: &str| {
        if !vocab.contains(kind, name) {
            report.push(
                at,
                ViolationKind::UnknownName {
                    kind,
                    name: name.to_string(),
                },
            );
        }
    };

    let mut seen = HashSet::new();
    for (i, ft) in scene.triples().iter().enumerate() {
        let at = Location::Triple(i);
        if ft.frame == 0 || ft.frame > t {
            report.push(at, ViolationKind::FrameOutOfRange { frame: ft.frame });
        }
        check_name(&mut report, at, NameKind::Object, &ft.triple.subject);
        check_name(&mut report, at, NameKind::Relation, &ft.triple.relation);
        check_name(&mut report, at, NameKind::Object, &ft.triple.object);
        if ft.triple.subject != PERSON {
            report.push(
                at,
                ViolationKind::NonPersonSubject {
                    subject: ft.triple.subject.clone(),
                },
            );
        }
        if !seen.insert(ft) {
            report.push(at, ViolationKind::DuplicateTriple { frame: ft.frame });
        }
    }

    let mut seen = HashSet::new();
    for (i, a) in scene.actions().iter().enumerate() {
        let at = Location::Action(i);
        check_name(&mut report, at, NameKind::Object, &a.subject);
        check_name(&mut report, at, NameKind::Action, &a.action);
        if let Some(obj) = &a.object {
            check_name(&mut report, at, NameKind::Object, obj);
        }
        if a.subject != PERSON {
            report.push(
                at,
                ViolationKind::NonPersonSubject {
                    subject: a.subject.clone(),
                },
            );
        }
        let (s, e) = (a.t_start, a.t_end);
        if s > e {
            report.push(
                at,
                ViolationKind::IntervalReversed {
                    t_start: s,
                    t_end: e,
                },
            );
        } else if s == 0 || e > t {
            report.push(
                at,
                ViolationKind::IntervalOutOfRange {
                    t_start: s,
                    t_end: e,
                },
            );
        }
        if !seen.insert(a) {
            report.push(at, ViolationKind::DuplicateAction);
        }
    }
    report
}
