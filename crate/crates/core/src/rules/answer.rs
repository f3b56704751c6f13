use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scene::{ActionInstance, Frame, FrameTriple};

/// The word an `or` question resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeWord {
    After,
    Before,
}

impl TimeWord {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::After => "after",
            Self::Before => "before",
        }
    }
}

/// Symbolic answer of one reasoning step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Binary(bool),
    Object(String),
    Action(String),
    Relation(String),
    Time(TimeWord),
    ObjectSet(Vec<String>),
    ActionSet(Vec<String>),
    RelationSet(Vec<String>),
    /// No entity satisfies the question.
    None,
}

pub const NONE_WORD: &str = "None";

impl Answer {
    pub fn yes() -> Self {
        Answer::Binary(true)
    }

    pub fn no() -> Self {
        Answer::Binary(false)
    }

    pub fn as_binary(&self) -> Option<bool> {
        match self {
            Answer::Binary(b) => Some(*b),
            _ => None,
        }
    }

    /// The single name carried by a name answer.
    pub fn name(&self) -> Option<&str> {
        match self {
            Answer::Object(s) | Answer::Action(s) | Answer::Relation(s) => Some(s),
            Answer::Time(t) => Some(t.as_str()),
            _ => None,
        }
    }

    /// Whether the answer asserts that something was found: `yes`, a name,
    /// or a non-empty set.
    pub fn is_positive(&self) -> bool {
        match self {
            Answer::Binary(b) => *b,
            Answer::ObjectSet(s) | Answer::ActionSet(s) | Answer::RelationSet(s) => !s.is_empty(),
            Answer::None => false,
            _ => true,
        }
    }

    /// Plain text form: `yes`/`no`, the name, `None`, or names joined by
    /// `", "` inside brackets for sets.
    pub fn text(&self) -> String {
        match self {
            Answer::Binary(true) => "yes".into(),
            Answer::Binary(false) => "no".into(),
            Answer::None => NONE_WORD.into(),
            Answer::ObjectSet(s) | Answer::ActionSet(s) | Answer::RelationSet(s) => {
                format!("[{}]", s.join(", "))
            }
            other => other.name().expect("name answer").to_string(),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// The subset of a scene that supports an answer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub triples: Vec<FrameTriple>,
    pub actions: Vec<ActionInstance>,
}

impl Evidence {
    /// Builds evidence in canonical order without duplicates.
    pub fn new(mut triples: Vec<FrameTriple>, mut actions: Vec<ActionInstance>) -> Self {
        triples.sort();
        triples.dedup();
        actions.sort();
        actions.dedup();
        Self { triples, actions }
    }

    pub fn from_triples(triples: Vec<FrameTriple>) -> Self {
        Self::new(triples, Vec::new())
    }

    pub fn from_actions(actions: Vec<ActionInstance>) -> Self {
        Self::new(Vec::new(), actions)
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty() && self.actions.is_empty()
    }

    pub fn union<'a>(parts: impl IntoIterator<Item = &'a Evidence>) -> Self {
        let mut triples = Vec::new();
        let mut actions = Vec::new();
        for p in parts {
            triples.extend(p.triples.iter().cloned());
            actions.extend(p.actions.iter().cloned());
        }
        Self::new(triples, actions)
    }

    /// Earliest and latest frame touched by any triple or action interval.
    pub fn span(&self) -> Option<(Frame, Frame)> {
        let starts = self
            .triples
            .iter()
            .map(|t| t.frame)
            .chain(self.actions.iter().map(|a| a.t_start));
        let ends = self
            .triples
            .iter()
            .map(|t| t.frame)
            .chain(self.actions.iter().map(|a| a.t_end));
        Some((starts.min()?, ends.max()?))
    }

    /// Object names of the triples and action names, deduplicated.
    pub fn names(&self) -> BTreeSet<String> {
        self.triples
            .iter()
            .map(|t| t.triple.object.clone())
            .chain(self.actions.iter().map(|a| a.action.clone()))
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self.triples.iter().map(|t| t.to_string()).collect();
        parts.extend(self.actions.iter().map(|a| a.to_string()));
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Result of one executed node: the answer and the evidence behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateResult {
    pub answer: Answer,
    pub evidence: Evidence,
}

impl IntermediateResult {
    pub fn new(answer: Answer, evidence: Evidence) -> Self {
        Self { answer, evidence }
    }
}
