//! Reasoning rules: pure functions from a scene or the results of child
//! nodes to an [`IntermediateResult`].
//!
//! A rule is selected by [`resolve`] from the node's rule name and its
//! [`Token`]; the same rule may run in different modes depending on the
//! categories of its children.

mod answer;
mod eval;
mod window;

use serde::Serialize;
use thiserror::Error;

pub use answer::{Answer, Evidence, IntermediateResult, TimeWord, NONE_WORD};
pub use eval::apply;
pub use window::{ground, Window};

use crate::program::{Localizer, NodeKey, QuestionType, RuleName, RuleSignature, Token};
use crate::scene::{SceneRepresentation, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum RuleError {
    #[error("no binding of {rule} for token {token}")]
    UnknownToken { token: Token, rule: RuleName },
    #[error("{rule}: child {index} gave {found}, expected {expected}")]
    TypeMismatch {
        rule: RuleName,
        index: usize,
        expected: &'static str,
        found: String,
    },
    #[error("{rule}: expected {expected} child results, got {found}")]
    MissingChild {
        rule: RuleName,
        expected: usize,
        found: usize,
    },
    #[error("both options hold")]
    AmbiguousChoice,
    #[error("no option holds")]
    NoValidChoice,
    #[error("child {child} failed")]
    Propagated { child: NodeKey },
}

impl RuleError {
    /// Short stable name of the error class.
    pub fn label(&self) -> &'static str {
        match self {
            RuleError::UnknownToken { .. } => "unknown_token",
            RuleError::TypeMismatch { .. } => "type_mismatch",
            RuleError::MissingChild { .. } => "missing_child",
            RuleError::AmbiguousChoice => "ambiguous_choice",
            RuleError::NoValidChoice => "no_valid_choice",
            RuleError::Propagated { .. } => "propagated",
        }
    }
}

/// How a polymorphic rule reads its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The only form the rule has.
    Plain,
    /// `query_interaction` over `query_relation` and `query_object`
    /// sub-questions instead of raw filters.
    Decomposed,
    /// Ordinal rules ranking objects by first appearance.
    Objects,
    /// Ordinal rules ranking action instances.
    Actions,
}

/// A rule bound to the child pattern it was resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RuleHandle {
    pub rule: RuleName,
    pub mode: Mode,
}

/// Everything a rule may read.
#[derive(Debug, Clone, Copy)]
pub struct RuleInput<'a> {
    pub scene: &'a SceneRepresentation,
    pub vocab: &'a Vocabulary,
    pub args: &'a [String],
    /// Results of all direct children, internal filters included, in
    /// program order.
    pub children: &'a [&'a IntermediateResult],
}

mod patterns {
    use crate::program::QuestionType as Q;

    pub const BINARY: &[Q] = &[
        Q::ObjectExists,
        Q::RelationExists,
        Q::Interaction,
        Q::InteractionTemporalLoc,
        Q::ExistsTemporalLoc,
        Q::Equals,
        Q::Conjunction,
    ];
    pub const TARGET: &[Q] = &[Q::ObjectExists, Q::RelationExists, Q::Interaction];
    pub const ANCHOR: &[Q] = &[
        Q::ObjectExists,
        Q::RelationExists,
        Q::Interaction,
        Q::Action,
        Q::ActionTemporalLoc,
        Q::LongestShortestAction,
    ];
    pub const TRIPLES: &[Q] = &[Q::RelationExists, Q::Interaction];
    pub const TEMPORAL: &[Q] = &[Q::InteractionTemporalLoc, Q::ExistsTemporalLoc];
    pub const ACTION_SOURCE: &[Q] = &[Q::Action, Q::ActionTemporalLoc, Q::LongestShortestAction];
    pub const OBJECT_SOURCE: &[Q] = &[
        Q::RelationExists,
        Q::Interaction,
        Q::Object,
        Q::ObjectTemporalLoc,
    ];
    pub const NAMED_OBJECT: &[Q] = &[Q::Object, Q::ObjectTemporalLoc, Q::FirstLast, Q::Choose];
    pub const NAMED_ACTION: &[Q] = &[
        Q::ActionTemporalLoc,
        Q::LongestShortestAction,
        Q::FirstLast,
        Q::Choose,
    ];
}

fn parent_types(rule: RuleName) -> &'static [QuestionType] {
    use QuestionType as Q;
    use RuleName::*;
    match rule {
        FilterObject | QueryObject => &[Q::ObjectExists],
        FilterRelation | QueryRelation => &[Q::RelationExists],
        QueryInteraction => &[Q::Interaction],
        InteractionTemporalAfter
        | InteractionTemporalBefore
        | InteractionTemporalWhile
        | InteractionTemporalBetween => patterns::TEMPORAL,
        ActionsAfter | ActionsBefore => &[Q::ActionTemporalLoc],
        ObjectsAfter | ObjectsBefore | ObjectsWhile | ObjectsBetween => &[Q::ObjectTemporalLoc],
        LongestAction | ShortestAction => &[Q::LongestShortestAction],
        FilterActions => &[Q::Action],
        QuerySubjectRelation => &[Q::Object],
        Choose | Or | ChooseActionShorter | ChooseActionLonger => &[Q::Choose],
        ObjectEquals | ActionEquals => &[Q::Equals],
        ConjunctionAnd | ConjunctionXor => &[Q::Conjunction],
        QueryFirst | QueryLast => &[Q::FirstLast],
    }
}

fn all_in(types: &[QuestionType], allowed: &[QuestionType]) -> bool {
    types.iter().all(|t| allowed.contains(t))
}

/// Binds `rule` to `token`, checking that the sub-question categories fit
/// the rule's input pattern and picking the mode of polymorphic rules.
pub fn resolve(token: &Token, rule: RuleName) -> Result<RuleHandle, RuleError> {
    use patterns::*;
    use QuestionType as Q;
    use RuleName::*;
    let unknown = || RuleError::UnknownToken {
        token: token.clone(),
        rule,
    };
    if !parent_types(rule).contains(&token.parent_type) {
        return Err(unknown());
    }
    let c = token.child_types.as_slice();
    let plain = |ok: bool| {
        if ok {
            Ok(RuleHandle {
                rule,
                mode: Mode::Plain,
            })
        } else {
            Err(unknown())
        }
    };
    match rule {
        FilterObject | FilterRelation | FilterActions | QueryObject | QueryRelation => {
            plain(c.is_empty())
        }
        QueryInteraction => match c {
            [] => plain(true),
            [Q::RelationExists, Q::ObjectExists] => Ok(RuleHandle {
                rule,
                mode: Mode::Decomposed,
            }),
            _ => Err(unknown()),
        },
        InteractionTemporalAfter
        | InteractionTemporalBefore
        | InteractionTemporalWhile
        | InteractionTemporalBetween => {
            let want = 1 + rule.localizer().map_or(1, Localizer::anchor_count);
            let target_ok = c.first().is_some_and(|t| TARGET.contains(t));
            let parent_ok = match c.first() {
                Some(Q::ObjectExists | Q::RelationExists) => {
                    token.parent_type == Q::ExistsTemporalLoc
                }
                _ => token.parent_type == Q::InteractionTemporalLoc,
            };
            plain(c.len() == want && target_ok && parent_ok && all_in(&c[1..], ANCHOR))
        }
        ObjectsAfter | ObjectsBefore | ObjectsWhile | ObjectsBetween => {
            let want = 1 + rule.localizer().map_or(1, Localizer::anchor_count);
            plain(c.len() == want && TRIPLES.contains(&c[0]) && all_in(&c[1..], ANCHOR))
        }
        ActionsAfter | ActionsBefore => plain(c.len() == 1 && ANCHOR.contains(&c[0])),
        LongestAction | ShortestAction => plain(c.len() == 1 && ACTION_SOURCE.contains(&c[0])),
        QuerySubjectRelation => plain(c.len() == 1 && TRIPLES.contains(&c[0])),
        Choose | ConjunctionAnd | ConjunctionXor => plain(c.len() == 2 && all_in(c, BINARY)),
        Or => plain(c.len() == 2 && all_in(c, TEMPORAL)),
        ChooseActionShorter | ChooseActionLonger => plain(c.len() == 2 && all_in(c, ACTION_SOURCE)),
        ObjectEquals => plain(c.len() == 2 && all_in(c, NAMED_OBJECT)),
        ActionEquals => plain(c.len() == 2 && all_in(c, NAMED_ACTION)),
        QueryFirst | QueryLast => match c {
            [t] if ACTION_SOURCE.contains(t) => Ok(RuleHandle {
                rule,
                mode: Mode::Actions,
            }),
            [t] if OBJECT_SOURCE.contains(t) => Ok(RuleHandle {
                rule,
                mode: Mode::Objects,
            }),
            _ => Err(unknown()),
        },
    }
}

/// One registry row per rule.
pub fn registry() -> Vec<RuleSignature> {
    RuleName::ALL.iter().map(|r| r.signature()).collect()
}
