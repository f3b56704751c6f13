//! Static/dynamic scene representation and the vocabulary it draws from.
//!
//! A scene is a timeline of frames `1..=T`. The static part holds
//! subject-relation-object triples anchored to single frames; the dynamic
//! part holds action instances spanning closed frame intervals.

mod validate;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{validate_scene, Location, ValidationReport, Violation, ViolationKind};
pub use vocab::{NameKind, Vocabulary};

/// Frame index on the 1-based scene timeline.
pub type Frame = u32;

pub const PERSON: &str = "person";

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("frame {frame} outside timeline 1..={frame_count}")]
    FrameOutOfRange { frame: Frame, frame_count: Frame },
    #[error("reversed window [{lo}, {hi}]")]
    ReversedWindow { lo: Frame, hi: Frame },
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),
    #[error("malformed scene file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationTriple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl RelationTriple {
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        Self {
            subject: subject.to_string(),
            relation: relation.to_string(),
            object: object.to_string(),
        }
    }

    pub fn involves(&self, object: &str) -> bool {
        self.subject == object || self.object == object
    }
}

impl fmt::Display for RelationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

/// A relation triple tagged with the frame it was observed in.
///
/// Field order gives the canonical evidence ordering: by frame, then triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameTriple {
    pub frame: Frame,
    #[serde(flatten)]
    pub triple: RelationTriple,
}

impl fmt::Display for FrameTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.triple, self.frame)
    }
}

/// Per-frame relation triples, kept sorted by frame. Insertion order is
/// preserved within a frame.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticSr {
    triples: Vec<FrameTriple>,
}

impl StaticSr {
    pub fn new(mut triples: Vec<FrameTriple>) -> Self {
        triples.sort_by_key(|t| t.frame);
        Self { triples }
    }

    pub fn triples(&self) -> &[FrameTriple] {
        &self.triples
    }

    pub fn frame(&self, frame: Frame) -> impl Iterator<Item = &RelationTriple> {
        let lo = self.triples.partition_point(|t| t.frame < frame);
        let hi = self.triples.partition_point(|t| t.frame <= frame);
        self.triples[lo..hi].iter().map(|t| &t.triple)
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionInstance {
    pub subject: String,
    pub action: String,
    /// Object acted upon; `None` for phrases that name no object.
    pub object: Option<String>,
    pub t_start: Frame,
    pub t_end: Frame,
}

impl ActionInstance {
    pub fn new(action: &str, object: Option<&str>, t_start: Frame, t_end: Frame) -> Self {
        Self {
            subject: PERSON.to_string(),
            action: action.to_string(),
            object: object.map(str::to_string),
            t_start,
            t_end,
        }
    }

    /// Number of frames covered, counting both ends.
    pub fn duration(&self) -> u32 {
        self.t_end.saturating_sub(self.t_start) + 1
    }

    /// Canonical instance ordering: start, end, then action name.
    pub fn order_key(&self) -> (Frame, Frame, &str, &str, Option<&str>) {
        (
            self.t_start,
            self.t_end,
            self.action.as_str(),
            self.subject.as_str(),
            self.object.as_deref(),
        )
    }
}

impl PartialOrd for ActionInstance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ActionInstance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for ActionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\" [{}, {}]", self.action, self.t_start, self.t_end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicSr {
    pub actions: Vec<ActionInstance>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneRepresentation {
    pub static_sr: StaticSr,
    pub dynamic_sr: DynamicSr,
    pub frame_count: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Action interval lies inside the window.
    Contained,
    /// Action interval shares at least one frame with the window.
    Overlapping,
}

impl SceneRepresentation {
    pub fn new(
        frame_count: Frame,
        triples: Vec<FrameTriple>,
        actions: Vec<ActionInstance>,
    ) -> Self {
        Self {
            static_sr: StaticSr::new(triples),
            dynamic_sr: DynamicSr { actions },
            frame_count,
        }
    }

    pub fn triples(&self) -> &[FrameTriple] {
        self.static_sr.triples()
    }

    pub fn actions(&self) -> &[ActionInstance] {
        &self.dynamic_sr.actions
    }

    fn check_frame(&self, frame: Frame) -> Result<(), SceneError> {
        if frame == 0 || frame > self.frame_count {
            return Err(SceneError::FrameOutOfRange {
                frame,
                frame_count: self.frame_count,
            });
        }
        Ok(())
    }

    /// Triples observed in any of the given frames, in timeline order.
    pub fn static_at_frames(
        &self,
        frames: &BTreeSet<Frame>,
    ) -> Result<Vec<FrameTriple>, SceneError> {
        for &f in frames {
            self.check_frame(f)?;
        }
        Ok(self
            .triples()
            .iter()
            .filter(|t| frames.contains(&t.frame))
            .cloned()
            .collect())
    }

    /// Actions relative to the window `[lo, hi]`, ordered by start, end and
    /// action name.
    pub fn actions_in_window(
        &self,
        lo: Frame,
        hi: Frame,
        mode: WindowMode,
    ) -> Result<Vec<&ActionInstance>, SceneError> {
        if lo > hi {
            return Err(SceneError::ReversedWindow { lo, hi });
        }
        self.check_frame(lo)?;
        self.check_frame(hi)?;
        let mut out: Vec<_> = self
            .actions()
            .iter()
            .filter(|a| match mode {
                WindowMode::Contained => lo <= a.t_start && a.t_end <= hi,
                WindowMode::Overlapping => a.t_start <= hi && a.t_end >= lo,
            })
            .collect();
        out.sort();
        Ok(out)
    }

    /// The same scene with the timeline mirrored: frame `f` becomes
    /// `T + 1 - f` and every interval is flipped accordingly.
    pub fn time_reversed(&self) -> Self {
        let t = self.frame_count + 1;
        let triples = self
            .triples()
            .iter()
            .map(|ft| FrameTriple {
                frame: t - ft.frame,
                triple: ft.triple.clone(),
            })
            .collect();
        let actions = self
            .actions()
            .iter()
            .map(|a| ActionInstance {
                t_start: t - a.t_end,
                t_end: t - a.t_start,
                ..a.clone()
            })
            .collect();
        Self::new(self.frame_count, triples, actions)
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let file: SceneFile =
            serde_json::from_str(text).map_err(|e| SceneError::Format(e.to_string()))?;
        Ok(file.into())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneFile::from(self)).expect("scene serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// On-disk scene layout.
#[derive(Debug, Serialize, Deserialize)]
struct SceneFile {
    frame_count: Frame,
    #[serde(default, rename = "static")]
    static_sr: Vec<FrameTriple>,
    #[serde(default, rename = "dynamic")]
    dynamic_sr: Vec<ActionInstance>,
}

impl From<SceneFile> for SceneRepresentation {
    fn from(f: SceneFile) -> Self {
        SceneRepresentation::new(f.frame_count, f.static_sr, f.dynamic_sr)
    }
}

impl From<&SceneRepresentation> for SceneFile {
    fn from(s: &SceneRepresentation) -> Self {
        SceneFile {
            frame_count: s.frame_count,
            static_sr: s.triples().to_vec(),
            dynamic_sr: s.actions().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ft(frame: Frame, rel: &str, obj: &str) -> FrameTriple {
        FrameTriple {
            frame,
            triple: RelationTriple::new(PERSON, rel, obj),
        }
    }

    fn sample() -> SceneRepresentation {
        SceneRepresentation::new(
            3,
            vec![ft(2, "holding", "blanket")],
            vec![ActionInstance::new(
                "holding a blanket",
                Some("blanket"),
                1,
                3,
            )],
        )
    }

    #[test]
    fn static_at_frames_cases() {
        let s = sample();
        assert!(s.static_at_frames(&BTreeSet::new()).unwrap().is_empty());
        let all: BTreeSet<_> = (1..=3).collect();
        assert_eq!(s.static_at_frames(&all).unwrap(), s.triples().to_vec());
        let odd: BTreeSet<_> = [1, 3].into_iter().collect();
        assert!(s.static_at_frames(&odd).unwrap().is_empty());
        let bad: BTreeSet<_> = [4].into_iter().collect();
        assert!(matches!(
            s.static_at_frames(&bad),
            Err(SceneError::FrameOutOfRange { frame: 4, .. })
        ));
    }

    #[test]
    fn window_queries() {
        let s = SceneRepresentation::new(
            7,
            vec![],
            vec![
                ActionInstance::new("holding a box", Some("box"), 6, 7),
                ActionInstance::new("holding a bag", Some("bag"), 1, 3),
                ActionInstance::new("holding a dish", Some("dish"), 3, 5),
            ],
        );
        let all = s.actions_in_window(1, 7, WindowMode::Contained).unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!(all[0].action, "holding a bag");
        let mid: Vec<_> = s
            .actions_in_window(3, 5, WindowMode::Overlapping)
            .unwrap()
            .into_iter()
            .map(|a| a.action.as_str())
            .collect();
        assert_eq!(mid, ["holding a bag", "holding a dish"]);
        assert!(matches!(
            s.actions_in_window(5, 3, WindowMode::Contained),
            Err(SceneError::ReversedWindow { .. })
        ));
    }

    #[test]
    fn disjoint_window_excludes() {
        let s = SceneRepresentation::new(
            6,
            vec![],
            vec![ActionInstance::new("standing up", None, 2, 4)],
        );
        assert!(s
            .actions_in_window(5, 6, WindowMode::Overlapping)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn frame_lookup() {
        let s = SceneRepresentation::new(
            3,
            vec![
                ft(3, "in", "bed"),
                ft(1, "holding", "cup"),
                ft(3, "on the side of", "bed"),
            ],
            vec![],
        );
        assert_eq!(s.static_sr.frame(3).count(), 2);
        assert_eq!(s.static_sr.frame(2).count(), 0);
        assert_eq!(s.static_sr.frame(1).next().unwrap().object, "cup");
    }

    #[test]
    fn reversal_is_an_involution() {
        let s = sample();
        assert_eq!(s.time_reversed().time_reversed(), s);
        let r = s.time_reversed();
        assert_eq!(r.triples()[0].frame, 2);
        assert_eq!((r.actions()[0].t_start, r.actions()[0].t_end), (1, 3));
    }

    #[test]
    fn json_layout() {
        let s = sample();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["frame_count"], 3);
        assert_eq!(v["static"][0]["frame"], 2);
        assert_eq!(v["static"][0]["relation"], "holding");
        assert_eq!(v["dynamic"][0]["t_end"], 3);
        assert_eq!(SceneRepresentation::from_json(&s.to_json()).unwrap(), s);
    }
}
