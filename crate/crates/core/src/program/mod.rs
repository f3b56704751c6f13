//! Question programs: typed trees of reasoning-rule calls.
//!
//! A program is written in a small functional syntax,
//! `rule(arg, arg, ...)`, where an argument is the keyword `scene`, a
//! nested call, or a vocabulary literal:
//!
//! ```text
//! query_interaction(filter_relation(scene, taking), filter_object(scene, blanket))
//! ```

mod catalog;
mod grammar;
mod templates;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{ArgSlot, InputKind, Localizer, OutputKind, RuleName, RuleSignature};
pub use grammar::{parse_program, quote_literal, serialize_program};
pub use templates::{question_to_program, QuestionInstance, Template, TEMPLATES};

use crate::scene::NameKind;

/// The fourteen sub-question categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionType {
    ObjectExists,
    RelationExists,
    Interaction,
    InteractionTemporalLoc,
    ExistsTemporalLoc,
    ObjectTemporalLoc,
    ActionTemporalLoc,
    LongestShortestAction,
    Action,
    Object,
    Choose,
    Equals,
    Conjunction,
    FirstLast,
}

impl QuestionType {
    pub const ALL: [QuestionType; 14] = [
        Self::ObjectExists,
        Self::RelationExists,
        Self::Interaction,
        Self::InteractionTemporalLoc,
        Self::ExistsTemporalLoc,
        Self::ObjectTemporalLoc,
        Self::ActionTemporalLoc,
        Self::LongestShortestAction,
        Self::Action,
        Self::Object,
        Self::Choose,
        Self::Equals,
        Self::Conjunction,
        Self::FirstLast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ObjectExists => "ObjectExists",
            Self::RelationExists => "RelationExists",
            Self::Interaction => "Interaction",
            Self::InteractionTemporalLoc => "InteractionTemporalLoc",
            Self::ExistsTemporalLoc => "ExistsTemporalLoc",
            Self::ObjectTemporalLoc => "ObjectTemporalLoc",
            Self::ActionTemporalLoc => "ActionTemporalLoc",
            Self::LongestShortestAction => "LongestShortestAction",
            Self::Action => "Action",
            Self::Object => "Object",
            Self::Choose => "Choose",
            Self::Equals => "Equals",
            Self::Conjunction => "Conjunction",
            Self::FirstLast => "FirstLast",
        }
    }

    /// Categories whose answers are drawn from the action vocabulary or
    /// whose evidence is a set of action instances.
    pub fn is_action_valued(self) -> bool {
        matches!(
            self,
            Self::Action | Self::ActionTemporalLoc | Self::LongestShortestAction
        )
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = ProgramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ProgramError::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown rule {name:?} at byte {pos}")]
    UnknownRule { pos: usize, name: String },
    #[error("{rule} takes {expected}, got {found}")]
    Arity {
        rule: RuleName,
        expected: String,
        found: String,
    },
    #[error("{value:?} is not a known {kind}")]
    UnknownLiteral { kind: String, value: String },
    #[error("unknown question category {0:?}")]
    UnknownCategory(String),
    #[error("no template matches {0}")]
    NoTemplate(String),
    #[error("template {template}: {message}")]
    Slot { template: String, message: String },
}

/// One node of a question program.
///
/// The question type is derived from the rule and, for the polymorphic
/// temporal family, from the type of the first child.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramNode {
    rule: RuleName,
    args: Vec<String>,
    children: Vec<ProgramNode>,
    qtype: QuestionType,
}

impl ProgramNode {
    /// Builds a node, checking child and argument counts against the rule
    /// signature. Literal values are checked against a vocabulary by
    /// [`parse_program`], not here.
    pub fn new(
        rule: RuleName,
        args: Vec<String>,
        children: Vec<ProgramNode>,
    ) -> Result<Self, ProgramError> {
        let sig = rule.signature();
        let (lo, hi) = sig.arg_range();
        if children.len() != sig.children || args.len() < lo || args.len() > hi {
            let expected_args = if lo == hi {
                format!("{lo}")
            } else {
                format!("{lo}..={hi}")
            };
            return Err(ProgramError::Arity {
                rule,
                expected: format!("{} children and {expected_args} arguments", sig.children),
                found: format!("{} children and {} arguments", children.len(), args.len()),
            });
        }
        let qtype = derive_qtype(rule, &children);
        Ok(Self {
            rule,
            args,
            children,
            qtype,
        })
    }

    pub fn rule(&self) -> RuleName {
        self.rule
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn children(&self) -> &[ProgramNode] {
        &self.children
    }

    pub fn qtype(&self) -> QuestionType {
        self.qtype
    }

    /// Filter primitives that hang under a query node rather than standing
    /// as sub-questions.
    pub fn is_internal(&self) -> bool {
        self.rule.is_internal()
    }

    /// Direct children that are sub-questions.
    pub fn question_children(&self) -> impl Iterator<Item = &ProgramNode> {
        self.children.iter().filter(|c| !c.is_internal())
    }

    /// A leaf question reads the scene (possibly through internal filters);
    /// a compositional question has at least one sub-question child.
    pub fn is_compositional(&self) -> bool {
        self.question_children().next().is_some()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProgramNode::size).sum::<usize>()
    }

    /// Height counted in sub-question levels; internal filters add nothing.
    pub fn question_depth(&self) -> usize {
        let below = self
            .question_children()
            .map(ProgramNode::question_depth)
            .max()
            .unwrap_or(0);
        below + usize::from(!self.is_internal())
    }

    /// Copy of this node with its literal arguments replaced.
    pub fn with_args(&self, args: Vec<String>) -> Result<Self, ProgramError> {
        Self::new(self.rule, args, self.children.clone())
    }
}

impl fmt::Display for ProgramNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_program(self))
    }
}

fn derive_qtype(rule: RuleName, children: &[ProgramNode]) -> QuestionType {
    use QuestionType as Q;
    use RuleName::*;
    match rule {
        FilterObject | QueryObject => Q::ObjectExists,
        FilterRelation | QueryRelation => Q::RelationExists,
        QueryInteraction => Q::Interaction,
        InteractionTemporalAfter
        | InteractionTemporalBefore
        | InteractionTemporalWhile
        | InteractionTemporalBetween => match children.first().map(ProgramNode::qtype) {
            Some(Q::ObjectExists | Q::RelationExists) => Q::ExistsTemporalLoc,
            _ => Q::InteractionTemporalLoc,
        },
        ActionsAfter | ActionsBefore => Q::ActionTemporalLoc,
        ObjectsAfter | ObjectsBefore | ObjectsWhile | ObjectsBetween => Q::ObjectTemporalLoc,
        LongestAction | ShortestAction => Q::LongestShortestAction,
        FilterActions => Q::Action,
        QuerySubjectRelation => Q::Object,
        Choose | Or | ChooseActionShorter | ChooseActionLonger => Q::Choose,
        ObjectEquals | ActionEquals => Q::Equals,
        ConjunctionAnd | ConjunctionXor => Q::Conjunction,
        QueryFirst | QueryLast => Q::FirstLast,
    }
}

/// The type pattern that selects a reasoning rule: the node's own
/// category followed by the categories of its sub-question children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub parent_type: QuestionType,
    pub child_types: Vec<QuestionType>,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}", self.parent_type)?;
        for c in &self.child_types {
            write!(f, ", {c}")?;
        }
        f.write_str("}")
    }
}

pub fn token_of(node: &ProgramNode) -> Token {
    Token {
        parent_type: node.qtype(),
        child_types: node.question_children().map(ProgramNode::qtype).collect(),
    }
}

/// Address of one node within a program: the canonical text of its
/// subtree plus how many identical subtrees precede it in post-order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub subtree: String,
    pub ordinal: u32,
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.subtree, self.ordinal)
    }
}

impl FromStr for NodeKey {
    type Err = ProgramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (subtree, ordinal) = s.rsplit_once('#').ok_or_else(|| ProgramError::Syntax {
            pos: 0,
            message: "node key lacks '#ordinal'".into(),
        })?;
        let ordinal = ordinal.parse().map_err(|_| ProgramError::Syntax {
            pos: subtree.len() + 1,
            message: "bad ordinal".into(),
        })?;
        Ok(Self {
            subtree: subtree.to_string(),
            ordinal,
        })
    }
}

impl Serialize for NodeKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Every node of the tree in post-order (children before parents, siblings
/// left to right), each paired with its key.
pub fn decompose(node: &ProgramNode) -> Vec<(NodeKey, &ProgramNode)> {
    fn walk<'a>(node: &'a ProgramNode, out: &mut Vec<(String, &'a ProgramNode)>) -> String {
        let mut text = String::new();
        text.push_str(node.rule.as_str());
        text.push('(');
        let mut parts: Vec<String> = Vec::new();
        if node.rule.signature().input == InputKind::Scene {
            parts.push("scene".to_string());
        }
        for c in &node.children {
            parts.push(walk(c, out));
        }
        parts.extend(node.args.iter().map(|a| quote_literal(a)));
        text.push_str(&parts.join(", "));
        text.push(')');
        out.push((text.clone(), node));
        text
    }
    let mut flat = Vec::with_capacity(node.size());
    walk(node, &mut flat);
    let mut counts: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    flat.into_iter()
        .map(|(subtree, n)| {
            let c = counts.entry(subtree.clone()).or_insert(0);
            let key = NodeKey {
                subtree,
                ordinal: *c,
            };
            *c += 1;
            (key, n)
        })
        .collect()
}

/// Name kind a literal slot accepts, if it is a vocabulary slot.
pub(crate) fn slot_kind(slot: ArgSlot) -> Option<NameKind> {
    match slot {
        ArgSlot::Object => Some(NameKind::Object),
        ArgSlot::Relation => Some(NameKind::Relation),
        ArgSlot::Action => Some(NameKind::Action),
        ArgSlot::Choice | ArgSlot::AllFlag => None,
    }
}
