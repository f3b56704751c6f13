//! Logical consistency rules over a parent answer and the answers of its
//! direct sub-questions.
//!
//! Each rule names a family of parents and one parent answer. For a
//! matching parent it yields one check per related question; a check holds
//! when the related question's answer agrees with what the parent answer
//! implies. Parents whose answer is `None` or missing yield no checks.

use std::fmt;

use serde::Serialize;

use super::record::{PredictionRecord, RecordAnswer};
use crate::program::{Localizer, QuestionType, RuleName};
use crate::scene::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Interaction,
    First,
    Last,
    /// Actions located relative to an anchor.
    Action,
    /// Objects located relative to an anchor.
    ObjectTemporal,
    Equals,
    And,
    Xor,
    Choose,
    After,
    Before,
    While,
    Between,
    /// Existence of an object or relation relative to an anchor.
    ObjectExists,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Interaction => "Interaction",
            Family::First => "First",
            Family::Last => "Last",
            Family::Action => "Action",
            Family::ObjectTemporal | Family::ObjectExists => "Object",
            Family::Equals => "Equals",
            Family::And => "And",
            Family::Xor => "Xor",
            Family::Choose => "Choose",
            Family::After => "After",
            Family::Before => "Before",
            Family::While => "While",
            Family::Between => "Between",
        }
    }

    /// Question category of the parents this family inspects.
    pub fn parent_type(self) -> QuestionType {
        use QuestionType as Q;
        match self {
            Family::Interaction => Q::Interaction,
            Family::First | Family::Last => Q::FirstLast,
            Family::Action => Q::ActionTemporalLoc,
            Family::ObjectTemporal => Q::ObjectTemporalLoc,
            Family::Equals => Q::Equals,
            Family::And | Family::Xor => Q::Conjunction,
            Family::Choose => Q::Choose,
            Family::After | Family::Before | Family::While | Family::Between => {
                Q::InteractionTemporalLoc
            }
            Family::ObjectExists => Q::ExistsTemporalLoc,
        }
    }
}

/// The parent answer a rule applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentAnswer {
    Yes,
    No,
    Object,
    Action,
    Temporal,
    After,
    Before,
    While,
    Between,
}

impl ParentAnswer {
    pub fn label(self) -> &'static str {
        match self {
            ParentAnswer::Yes => "Yes",
            ParentAnswer::No => "No",
            ParentAnswer::Object => "Object",
            ParentAnswer::Action => "Action",
            ParentAnswer::Temporal => "Temporal",
            ParentAnswer::After => "After",
            ParentAnswer::Before => "Before",
            ParentAnswer::While => "While",
            ParentAnswer::Between => "Between",
        }
    }

    fn localizer(self) -> Option<Localizer> {
        match self {
            ParentAnswer::After => Some(Localizer::After),
            ParentAnswer::Before => Some(Localizer::Before),
            ParentAnswer::While => Some(Localizer::While),
            ParentAnswer::Between => Some(Localizer::Between),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ConsistencyRule {
    pub family: Family,
    pub parent_answer: ParentAnswer,
}

impl fmt::Display for ConsistencyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.family.label(), self.parent_answer.label())
    }
}

/// One rule per consistency-check row: 31 in total.
pub fn default_consistency_rules() -> Vec<ConsistencyRule> {
    use Family as F;
    use ParentAnswer as P;
    let rows: [(Family, &[ParentAnswer]); 14] = [
        (F::Interaction, &[P::Yes, P::No]),
        (F::First, &[P::Object, P::Action]),
        (F::Last, &[P::Object, P::Action]),
        (F::Action, &[P::After, P::Before]),
        (
            F::ObjectTemporal,
            &[P::After, P::Before, P::While, P::Between],
        ),
        (F::Equals, &[P::Yes, P::No]),
        (F::And, &[P::Yes, P::No]),
        (F::Xor, &[P::Yes, P::No]),
        (F::Choose, &[P::Temporal, P::Object, P::Action]),
        (F::After, &[P::Yes, P::No]),
        (F::Before, &[P::Yes, P::No]),
        (F::While, &[P::Yes, P::No]),
        (F::Between, &[P::Yes, P::No]),
        (F::ObjectExists, &[P::Yes, P::No]),
    ];
    rows.iter()
        .flat_map(|(family, answers)| {
            answers.iter().map(|&parent_answer| ConsistencyRule {
                family: *family,
                parent_answer,
            })
        })
        .collect()
}

fn yes(r: &PredictionRecord) -> bool {
    r.predicted.as_ref().is_some_and(RecordAnswer::is_yes)
}

fn answer_is(r: &PredictionRecord, word: &str) -> bool {
    matches!(&r.predicted, Some(RecordAnswer::Single(s)) if s == word)
}

/// Two predictions that assert the same entity; absences never match.
fn same_entity(a: &PredictionRecord, b: &PredictionRecord) -> bool {
    match (&a.predicted, &b.predicted) {
        (Some(x), Some(y)) => !x.is_none() && x == y,
        _ => false,
    }
}

impl ConsistencyRule {
    /// Checks the rule implies for `parent`, or `None` when the rule does
    /// not apply to it. `children` are the parent's direct sub-questions in
    /// program order.
    pub fn derive(
        &self,
        parent: &PredictionRecord,
        children: &[&PredictionRecord],
        vocab: &Vocabulary,
    ) -> Option<Vec<bool>> {
        use Family as F;
        use ParentAnswer as P;
        if parent.qtype != self.family.parent_type() {
            return None;
        }
        let pred = parent.predicted.as_ref()?;
        let rule = parent.rule;
        let child = |i: usize| children.get(i).copied();
        let names = pred.names();
        match (self.family, self.parent_answer) {
            (F::Interaction, P::Yes) => pred.is_yes().then(|| {
                children
                    .iter()
                    .filter(|c| {
                        matches!(
                            c.qtype,
                            QuestionType::RelationExists | QuestionType::ObjectExists
                        )
                    })
                    .map(|c| yes(c))
                    .collect()
            }),
            (F::Interaction, P::No) => answer_is(parent, "no").then(Vec::new),
            (F::First | F::Last, kind) => {
                let want = if self.family == F::First {
                    RuleName::QueryFirst
                } else {
                    RuleName::QueryLast
                };
                let c = child(0)?;
                let actions = c.qtype.is_action_valued();
                let kind_ok = match kind {
                    P::Object => !actions,
                    P::Action => actions,
                    _ => false,
                };
                (rule == Some(want) && kind_ok)
                    .then(|| names.iter().map(|n| c.supports(n)).collect())
            }
            (F::Action, loc) => {
                let want = match loc {
                    P::After => RuleName::ActionsAfter,
                    _ => RuleName::ActionsBefore,
                };
                if rule != Some(want) {
                    return None;
                }
                let c = child(0)?;
                Some(if names.is_empty() {
                    vec![]
                } else {
                    vec![c.predicted.as_ref().is_some_and(RecordAnswer::is_positive)]
                })
            }
            (F::ObjectTemporal, loc) => {
                if rule != Some(RuleName::objects_temporal(loc.localizer()?)) {
                    return None;
                }
                let c = child(0)?;
                Some(if names.is_empty() {
                    vec![]
                } else {
                    vec![names.iter().all(|n| c.supports(n))]
                })
            }
            (F::Equals, P::Yes) => {
                let (a, b) = (child(0)?, child(1)?);
                pred.is_yes().then(|| vec![same_entity(a, b)])
            }
            (F::Equals, P::No) => {
                let (a, b) = (child(0)?, child(1)?);
                answer_is(parent, "no").then(|| vec![!same_entity(a, b)])
            }
            (F::And | F::Xor, answer) => {
                let want = if self.family == F::And {
                    RuleName::ConjunctionAnd
                } else {
                    RuleName::ConjunctionXor
                };
                if rule != Some(want) {
                    return None;
                }
                let (a, b) = (child(0)?, child(1)?);
                let (ya, yb) = (yes(a), yes(b));
                match (self.family, answer) {
                    (F::And, P::Yes) => pred.is_yes().then(|| vec![ya, yb]),
                    (F::And, P::No) => answer_is(parent, "no").then(|| vec![!(ya && yb)]),
                    (F::Xor, P::Yes) => pred.is_yes().then(|| vec![ya != yb]),
                    (F::Xor, P::No) => answer_is(parent, "no").then(|| vec![ya == yb]),
                    _ => None,
                }
            }
            (F::Choose, P::Temporal) => {
                if rule != Some(RuleName::Or) {
                    return None;
                }
                Some(if answer_is(parent, "after") {
                    vec![yes(child(0)?)]
                } else if answer_is(parent, "before") {
                    vec![yes(child(1)?)]
                } else {
                    vec![]
                })
            }
            (F::Choose, kind @ (P::Object | P::Action)) => match rule? {
                RuleName::Choose => {
                    let first = parent.args.first()?;
                    let objects = vocab.has_object(first);
                    if objects != (kind == P::Object) {
                        return None;
                    }
                    let Some(name) = names.first() else {
                        return Some(vec![]);
                    };
                    let i = parent.args.iter().position(|a| a == name);
                    Some(vec![i.and_then(child).is_some_and(yes)])
                }
                RuleName::ChooseActionShorter | RuleName::ChooseActionLonger
                    if kind == P::Action =>
                {
                    let (a, b) = (child(0)?, child(1)?);
                    Some(
                        names
                            .iter()
                            .map(|n| a.supports(n) || b.supports(n))
                            .collect(),
                    )
                }
                _ => None,
            },
            (F::After | F::Before | F::While | F::Between, answer) => {
                let loc = match self.family {
                    F::After => Localizer::After,
                    F::Before => Localizer::Before,
                    F::While => Localizer::While,
                    _ => Localizer::Between,
                };
                if rule != Some(RuleName::interaction_temporal(loc)) {
                    return None;
                }
                let target = child(0)?;
                match answer {
                    P::Yes => pred.is_yes().then(|| vec![yes(target)]),
                    P::No => answer_is(parent, "no").then(Vec::new),
                    _ => None,
                }
            }
            (F::ObjectExists, P::Yes) => {
                let target = child(0)?;
                pred.is_yes().then(|| vec![yes(target)])
            }
            (F::ObjectExists, P::No) => answer_is(parent, "no").then(Vec::new),
            _ => None,
        }
    }
}
