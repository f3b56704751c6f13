//! Recursive, trace-accumulating program execution.
//!
//! Children run left to right before their parent. Each node's result is
//! appended to the trace under its [`NodeKey`]; a failing node is recorded
//! in the error list instead, and every ancestor fails with
//! [`RuleError::Propagated`].

mod dump;

use indexmap::IndexMap;
use serde::Serialize;

pub use dump::{trace_json, trace_text};

use crate::metrics::{NodeOutcome, RecordAnswer};
use crate::program::{decompose, token_of, NodeKey, ProgramNode, QuestionType, RuleName, Token};
use crate::rules::{apply, resolve, Answer, IntermediateResult, RuleError, RuleHandle, RuleInput};
use crate::scene::{SceneRepresentation, Vocabulary};

/// Results by node, in execution order. Entries are never replaced.
pub type Trace = IndexMap<NodeKey, IntermediateResult>;

/// Selects the rule for a node from its token and rule name.
pub fn get_rule(token: &Token, rule: RuleName) -> Result<RuleHandle, RuleError> {
    resolve(token, rule)
}

/// Static facts about one executed node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeInfo {
    pub key: NodeKey,
    pub rule: RuleName,
    pub qtype: QuestionType,
    /// Filters that feed a query and are not sub-questions.
    pub internal: bool,
    pub args: Vec<String>,
    /// Keys of all direct children, internal ones included.
    pub children: Vec<NodeKey>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    pub trace: Trace,
    /// Nodes of this program in post-order.
    pub nodes: Vec<NodeInfo>,
    pub root: NodeKey,
    /// The root's answer, or `None` when the root failed.
    pub root_answer: Answer,
    pub errors: Vec<(NodeKey, RuleError)>,
}

impl ExecutionOutcome {
    pub fn error_of(&self, key: &NodeKey) -> Option<&RuleError> {
        self.errors.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    /// Answer of a node with failures read as `None`.
    pub fn answer_of(&self, key: &NodeKey) -> Answer {
        self.trace
            .get(key)
            .map_or(Answer::None, |r| r.answer.clone())
    }

    pub fn root_error(&self) -> Option<&RuleError> {
        self.error_of(&self.root)
    }
}

/// One row per sub-question answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubAnswer {
    pub key: NodeKey,
    pub qtype: QuestionType,
    pub internal: bool,
    pub answer: Answer,
}

/// One row per node of the program in execution order, failures read as
/// `None`.
pub fn answers_by_subquestion(outcome: &ExecutionOutcome) -> Vec<SubAnswer> {
    outcome
        .nodes
        .iter()
        .map(|n| SubAnswer {
            key: n.key.clone(),
            qtype: n.qtype,
            internal: n.internal,
            answer: outcome.answer_of(&n.key),
        })
        .collect()
}

/// Per-node answers and supporting names in post-order, for record
/// building. Failed nodes carry their error label.
pub fn node_outcomes(outcome: &ExecutionOutcome) -> Vec<NodeOutcome> {
    outcome
        .nodes
        .iter()
        .map(
            |n| match (outcome.error_of(&n.key), outcome.trace.get(&n.key)) {
                (None, Some(r)) => NodeOutcome {
                    answer: Ok(RecordAnswer::from(&r.answer)),
                    support: Some(r.evidence.names().into_iter().collect()),
                },
                (e, _) => NodeOutcome {
                    answer: Err(e.map_or("missing", RuleError::label).to_string()),
                    support: None,
                },
            },
        )
        .collect()
}

#[derive(Debug, Clone)]
pub struct Executor<'v> {
    vocab: &'v Vocabulary,
    memoize: bool,
}

impl<'v> Executor<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        Self {
            vocab,
            memoize: false,
        }
    }

    /// Reuse results already present in the incoming trace instead of
    /// recomputing them.
    pub fn with_memoization(mut self, on: bool) -> Self {
        self.memoize = on;
        self
    }

    /// Executes `program` on `scene`, extending `trace_in`.
    pub fn execute(
        &self,
        program: &ProgramNode,
        scene: &SceneRepresentation,
        trace_in: Trace,
    ) -> ExecutionOutcome {
        let keys = decompose(program);
        let mut run = Run {
            exec: self,
            scene,
            keys: keys.into_iter().map(|(k, _)| k),
            trace: trace_in,
            nodes: Vec::new(),
            errors: Vec::new(),
        };
        let root = run.node(program);
        let root_answer = if run.errors.iter().any(|(k, _)| *k == root) {
            Answer::None
        } else {
            run.trace[&root].answer.clone()
        };
        ExecutionOutcome {
            trace: run.trace,
            nodes: run.nodes,
            root,
            root_answer,
            errors: run.errors,
        }
    }

    pub fn execute_fresh(
        &self,
        program: &ProgramNode,
        scene: &SceneRepresentation,
    ) -> ExecutionOutcome {
        self.execute(program, scene, Trace::new())
    }
}

struct Run<'e, 'v, I> {
    exec: &'e Executor<'v>,
    scene: &'e SceneRepresentation,
    keys: I,
    trace: Trace,
    nodes: Vec<NodeInfo>,
    errors: Vec<(NodeKey, RuleError)>,
}

impl<I: Iterator<Item = NodeKey>> Run<'_, '_, I> {
    fn node(&mut self, node: &ProgramNode) -> NodeKey {
        let children: Vec<NodeKey> = node.children().iter().map(|c| self.node(c)).collect();
        let key = self.keys.next().expect("one key per node");
        self.nodes.push(NodeInfo {
            key: key.clone(),
            rule: node.rule(),
            qtype: node.qtype(),
            internal: node.is_internal(),
            args: node.args().to_vec(),
            children: children.clone(),
        });
        if self.exec.memoize && self.trace.contains_key(&key) {
            return key;
        }
        match self.evaluate(node, &children) {
            Ok(result) => {
                self.trace.entry(key.clone()).or_insert(result);
            }
            Err(e) => self.errors.push((key.clone(), e)),
        }
        key
    }

    fn evaluate(
        &self,
        node: &ProgramNode,
        children: &[NodeKey],
    ) -> Result<IntermediateResult, RuleError> {
        let mut results = Vec::with_capacity(children.len());
        for k in children {
            match self.trace.get(k) {
                Some(r) if !self.errors.iter().any(|(e, _)| e == k) => results.push(r),
                _ => return Err(RuleError::Propagated { child: k.clone() }),
            }
        }
        let handle = get_rule(&token_of(node), node.rule())?;
        apply(
            handle,
            &RuleInput {
                scene: self.scene,
                vocab: self.exec.vocab,
                args: node.args(),
                children: &results,
            },
        )
    }
}
