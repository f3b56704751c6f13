use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{decompose, serialize_program, NodeKey, ProgramNode, QuestionType, RuleName};
use crate::rules::{Answer, NONE_WORD};

/// Answer as stored in a record: a string for single answers, an array
/// for set answers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordAnswer {
    Single(String),
    Set(Vec<String>),
}

impl RecordAnswer {
    pub fn is_yes(&self) -> bool {
        matches!(self, RecordAnswer::Single(s) if s == "yes")
    }

    pub fn is_none(&self) -> bool {
        match self {
            RecordAnswer::Single(s) => s == NONE_WORD,
            RecordAnswer::Set(_) => false,
        }
    }

    /// Names asserted by the answer; empty for `yes`/`no`/`None`.
    pub fn names(&self) -> Vec<&str> {
        match self {
            RecordAnswer::Single(s) if matches!(s.as_str(), "yes" | "no") || s == NONE_WORD => {
                vec![]
            }
            RecordAnswer::Single(s) => vec![s.as_str()],
            RecordAnswer::Set(v) => v.iter().map(String::as_str).collect(),
        }
    }

    /// Whether the answer asserts that something was found.
    pub fn is_positive(&self) -> bool {
        match self {
            RecordAnswer::Single(s) => s != "no" && s != NONE_WORD,
            RecordAnswer::Set(v) => !v.is_empty(),
        }
    }
}

impl From<&Answer> for RecordAnswer {
    fn from(a: &Answer) -> Self {
        match a {
            Answer::ObjectSet(v) | Answer::ActionSet(v) | Answer::RelationSet(v) => {
                RecordAnswer::Set(v.clone())
            }
            other => RecordAnswer::Single(other.text()),
        }
    }
}

impl fmt::Display for RecordAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordAnswer::Single(s) => f.write_str(s),
            RecordAnswer::Set(v) => write!(f, "[{}]", v.join(", ")),
        }
    }
}

/// One answered question. `children` lists the ids of its direct
/// sub-questions within the same video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub video_id: String,
    pub question_id: String,
    pub qtype: QuestionType,
    pub is_compositional: bool,
    #[serde(default)]
    pub children: Vec<String>,
    #[serde(default)]
    pub ground_truth: Option<RecordAnswer>,
    #[serde(default)]
    pub predicted: Option<RecordAnswer>,
    /// Rule that produced the answer, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleName>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<String>,
    /// Object and action names in the evidence behind the predicted answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_key: Option<NodeKey>,
    /// Why no answer was produced, when none was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    /// A missing prediction or ground truth never counts as correct.
    pub fn is_correct(&self) -> bool {
        match (&self.predicted, &self.ground_truth) {
            (Some(p), Some(g)) => p == g,
            _ => false,
        }
    }

    pub fn supports(&self, name: &str) -> bool {
        self.support
            .as_ref()
            .is_some_and(|s| s.iter().any(|x| x == name))
    }
}

/// What one program node produced: an answer with its supporting names,
/// or an error label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOutcome {
    pub answer: Result<RecordAnswer, String>,
    pub support: Option<Vec<String>>,
}

/// Which answer column [`program_records`] fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    GroundTruth,
    Predicted,
}

/// Question id of post-order node `index` of question `question_no`; the
/// root gets the bare id.
pub fn question_id(question_no: usize, index: usize, root: usize) -> String {
    if index == root {
        format!("q{question_no}")
    } else {
        format!("q{question_no}.{index}")
    }
}

/// One record per sub-question of `program` (internal filters excluded),
/// in post-order. `outcomes` is indexed by post-order node position.
pub fn program_records(
    program: &ProgramNode,
    video_id: &str,
    question_no: usize,
    outcomes: &[NodeOutcome],
    fill: Fill,
) -> Vec<PredictionRecord> {
    let nodes = decompose(program);
    assert_eq!(nodes.len(), outcomes.len(), "one outcome per node");
    let root = nodes.len() - 1;
    // Post-order position of each node's direct children.
    let mut stack: Vec<usize> = Vec::new();
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(nodes.len());
    for (i, (_, node)) in nodes.iter().enumerate() {
        let n = node.children().len();
        children.push(stack.split_off(stack.len() - n));
        stack.push(i);
    }
    nodes
        .iter()
        .enumerate()
        .filter(|(_, (_, node))| !node.is_internal())
        .map(|(i, (key, node))| {
            let o = &outcomes[i];
            let answer = o.answer.as_ref().ok().cloned();
            let (ground_truth, predicted) = match fill {
                Fill::GroundTruth => (answer, None),
                Fill::Predicted => (None, answer),
            };
            PredictionRecord {
                video_id: video_id.to_string(),
                question_id: question_id(question_no, i, root),
                qtype: node.qtype(),
                is_compositional: node.is_compositional(),
                children: children[i]
                    .iter()
                    .filter(|&&c| !nodes[c].1.is_internal())
                    .map(|&c| question_id(question_no, c, root))
                    .collect(),
                ground_truth,
                predicted,
                rule: Some(node.rule()),
                args: node.args().to_vec(),
                support: o.support.clone(),
                scene: None,
                program: (i == root).then(|| serialize_program(program)),
                node_key: Some(key.clone()),
                error: o.answer.as_ref().err().cloned(),
            }
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate question {video_id}/{question_id}")]
    Duplicate {
        video_id: String,
        question_id: String,
    },
    #[error("dangling child references: {}", .0.join(", "))]
    Dangling(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_records(reader: impl BufRead) -> Result<Vec<PredictionRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|source| RecordError::Parse {
            line: i + 1,
            source,
        })?;
        out.push(r);
    }
    Ok(out)
}

pub fn write_records<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a PredictionRecord>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Records indexed by (video, question) with every child link resolved.
#[derive(Debug, Clone)]
pub struct RecordSet {
    records: Vec<PredictionRecord>,
    children: Vec<Vec<usize>>,
}

impl RecordSet {
    pub fn new(records: Vec<PredictionRecord>) -> Result<Self, RecordError> {
        let mut index: HashMap<(&str, &str), usize> = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if index.insert((&r.video_id, &r.question_id), i).is_some() {
                return Err(RecordError::Duplicate {
                    video_id: r.video_id.clone(),
                    question_id: r.question_id.clone(),
                });
            }
        }
        let mut dangling = Vec::new();
        let children = records
            .iter()
            .map(|r| {
                r.children
                    .iter()
                    .filter_map(|c| {
                        let found = index.get(&(r.video_id.as_str(), c.as_str())).copied();
                        if found.is_none() {
                            dangling.push(format!("{}/{} -> {}", r.video_id, r.question_id, c));
                        }
                        found
                    })
                    .collect()
            })
            .collect();
        if !dangling.is_empty() {
            return Err(RecordError::Dangling(dangling));
        }
        Ok(Self { records, children })
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn children_of(&self, i: usize) -> impl Iterator<Item = &PredictionRecord> {
        self.children[i].iter().map(|&c| &self.records[c])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answers_serialize_as_strings_or_arrays() {
        let a = RecordAnswer::from(&Answer::yes());
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"yes\"");
        let s = RecordAnswer::from(&Answer::ObjectSet(vec!["box".into()]));
        assert_eq!(serde_json::to_string(&s).unwrap(), "[\"box\"]");
        let back: RecordAnswer = serde_json::from_str("[\"box\"]").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn dangling_children_are_listed() {
        let r = PredictionRecord {
            video_id: "v".into(),
            question_id: "q".into(),
            qtype: QuestionType::Conjunction,
            is_compositional: true,
            children: vec!["missing".into()],
            ground_truth: None,
            predicted: None,
            rule: None,
            args: vec![],
            support: None,
            scene: None,
            program: None,
            node_key: None,
            error: None,
        };
        let err = RecordSet::new(vec![r]).unwrap_err();
        assert!(err.to_string().contains("v/q -> missing"));
    }

    #[test]
    fn minimal_record_parses() {
        let line = r#"{"video_id":"v","question_id":"q","qtype":"Equals","is_compositional":false,"ground_truth":"yes"}"#;
        let recs = read_records(line.as_bytes()).unwrap();
        assert_eq!(recs[0].predicted, None);
        assert!(!recs[0].is_correct());
    }
}
