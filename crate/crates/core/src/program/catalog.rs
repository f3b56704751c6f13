//! The closed catalog of reasoning rules and their signatures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Temporal localizer relating a target to one or two anchor intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Localizer {
    After,
    Before,
    While,
    Between,
}

impl Localizer {
    pub const ALL: [Localizer; 4] = [Self::After, Self::Before, Self::While, Self::Between];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::After => "after",
            Self::Before => "before",
            Self::While => "while",
            Self::Between => "between",
        }
    }

    /// Anchors the localizer needs: two for `between`, one otherwise.
    pub fn anchor_count(self) -> usize {
        if self == Self::Between {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Localizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! rules {
    ($($variant:ident => $name:literal,)*) => {
        /// Every reasoning rule the executor knows, by surface name.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleName {
            $($variant,)*
        }

        impl RuleName {
            pub const ALL: &'static [RuleName] = &[$(RuleName::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleName::$variant => $name,)*
                }
            }
        }

        impl FromStr for RuleName {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(RuleName::$variant),)*
                    other => Err(other.to_string()),
                }
            }
        }
    };
}

rules! {
    FilterObject => "filter_object",
    QueryObject => "query_object",
    FilterRelation => "filter_relation",
    QueryRelation => "query_relation",
    QueryInteraction => "query_interaction",
    InteractionTemporalAfter => "interaction_temporal_after",
    InteractionTemporalBefore => "interaction_temporal_before",
    InteractionTemporalWhile => "interaction_temporal_while",
    InteractionTemporalBetween => "interaction_temporal_between",
    ActionsAfter => "actions_after",
    ActionsBefore => "actions_before",
    ObjectsAfter => "objects_after",
    ObjectsBefore => "objects_before",
    ObjectsWhile => "objects_while",
    ObjectsBetween => "objects_between",
    LongestAction => "longest_action",
    ShortestAction => "shortest_action",
    FilterActions => "filter_actions",
    QuerySubjectRelation => "query_subject_relation",
    Choose => "choose",
    Or => "or",
    ChooseActionShorter => "choose_action_shorter",
    ChooseActionLonger => "choose_action_longer",
    ObjectEquals => "object_equals",
    ActionEquals => "action_equals",
    ConjunctionAnd => "conjunction_and",
    ConjunctionXor => "conjunction_xor",
    QueryFirst => "query_first",
    QueryLast => "query_last",
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RuleName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|s| serde::de::Error::custom(format!("unknown rule {s:?}")))
    }
}

impl RuleName {
    /// Localizer of the temporal families, if this is one of them.
    pub fn localizer(self) -> Option<Localizer> {
        use RuleName::*;
        Some(match self {
            InteractionTemporalAfter | ActionsAfter | ObjectsAfter => Localizer::After,
            InteractionTemporalBefore | ActionsBefore | ObjectsBefore => Localizer::Before,
            InteractionTemporalWhile | ObjectsWhile => Localizer::While,
            InteractionTemporalBetween | ObjectsBetween => Localizer::Between,
            _ => return None,
        })
    }

    pub fn interaction_temporal(loc: Localizer) -> Self {
        match loc {
            Localizer::After => Self::InteractionTemporalAfter,
            Localizer::Before => Self::InteractionTemporalBefore,
            Localizer::While => Self::InteractionTemporalWhile,
            Localizer::Between => Self::InteractionTemporalBetween,
        }
    }

    pub fn objects_temporal(loc: Localizer) -> Self {
        match loc {
            Localizer::After => Self::ObjectsAfter,
            Localizer::Before => Self::ObjectsBefore,
            Localizer::While => Self::ObjectsWhile,
            Localizer::Between => Self::ObjectsBetween,
        }
    }

    /// Primitive filters that only feed a query node and are not
    /// sub-questions in their own right.
    pub fn is_internal(self) -> bool {
        matches!(self, RuleName::FilterObject | RuleName::FilterRelation)
    }

    pub fn signature(self) -> RuleSignature {
        signature(self)
    }
}

/// Whether a rule reads the scene directly or the trace of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Scene,
    ExeTrace,
}

/// Kind of literal a rule argument must hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgSlot {
    Object,
    Relation,
    Action,
    /// An object or action name; all choice arguments of a node share one kind.
    Choice,
    /// The literal word `all`, asking for the full set instead of one name.
    AllFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Binary,
    Object,
    Action,
    ObjectOrAction,
    Time,
    Objects,
    Relations,
    Actions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleSignature {
    pub rule: RuleName,
    pub input: InputKind,
    /// Required literal arguments, in order.
    pub args: &'static [ArgSlot],
    /// Optional literal arguments that may follow the required ones.
    pub optional_args: &'static [ArgSlot],
    /// Exact number of child programs.
    pub children: usize,
    pub output: OutputKind,
    pub description: &'static str,
}

impl RuleSignature {
    pub fn arg_range(&self) -> (usize, usize) {
        (self.args.len(), self.args.len() + self.optional_args.len())
    }
}

fn signature(rule: RuleName) -> RuleSignature {
    use ArgSlot as A;
    use InputKind::*;
    use OutputKind as O;
    use RuleName::*;
    let (input, args, optional_args, children, output, description): (
        InputKind,
        &'static [ArgSlot],
        &'static [ArgSlot],
        usize,
        OutputKind,
        &'static str,
    ) = match rule {
        FilterObject => (
            Scene,
            &[A::Object],
            &[],
            0,
            O::Objects,
            "triples involving the object",
        ),
        QueryObject => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Binary,
            "does the filtered object occur",
        ),
        FilterRelation => (
            Scene,
            &[A::Relation],
            &[],
            0,
            O::Relations,
            "triples with the relation",
        ),
        QueryRelation => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Binary,
            "does the filtered relation occur",
        ),
        QueryInteraction => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Binary,
            "does one triple carry both relation and object",
        ),
        InteractionTemporalAfter | InteractionTemporalBefore | InteractionTemporalWhile => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Binary,
            "does the target occur in the anchor-induced window",
        ),
        InteractionTemporalBetween => (
            ExeTrace,
            &[],
            &[],
            3,
            O::Binary,
            "does the target occur between two anchors",
        ),
        ActionsAfter | ActionsBefore => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Action,
            "nearest action beyond the anchor",
        ),
        ObjectsAfter | ObjectsBefore | ObjectsWhile => (
            ExeTrace,
            &[],
            &[A::AllFlag],
            2,
            O::Object,
            "objects of the relation inside the window",
        ),
        ObjectsBetween => (
            ExeTrace,
            &[],
            &[A::AllFlag],
            3,
            O::Object,
            "objects of the relation between two anchors",
        ),
        LongestAction => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Action,
            "action instance with the longest duration",
        ),
        ShortestAction => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Action,
            "action instance with the shortest duration",
        ),
        FilterActions => (
            Scene,
            &[],
            &[A::Action],
            0,
            O::Actions,
            "action instances, optionally of one name",
        ),
        QuerySubjectRelation => (
            ExeTrace,
            &[],
            &[],
            1,
            O::Object,
            "object of the earliest matched triple",
        ),
        Choose => (
            ExeTrace,
            &[A::Choice, A::Choice],
            &[],
            2,
            O::ObjectOrAction,
            "option whose question holds",
        ),
        Or => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Time,
            "after or before, whichever holds",
        ),
        ChooseActionShorter => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Action,
            "shorter of two grounded actions",
        ),
        ChooseActionLonger => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Action,
            "longer of two grounded actions",
        ),
        ObjectEquals => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Binary,
            "are two object answers the same",
        ),
        ActionEquals => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Binary,
            "are two action answers the same",
        ),
        ConjunctionAnd => (ExeTrace, &[], &[], 2, O::Binary, "both answers are yes"),
        ConjunctionXor => (
            ExeTrace,
            &[],
            &[],
            2,
            O::Binary,
            "exactly one answer is yes",
        ),
        QueryFirst => (
            ExeTrace,
            &[],
            &[],
            1,
            O::ObjectOrAction,
            "earliest candidate",
        ),
        QueryLast => (ExeTrace, &[], &[], 1, O::ObjectOrAction, "latest candidate"),
    };
    RuleSignature {
        rule,
        input,
        args,
        optional_args,
        children,
        output,
        description,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        assert_eq!(RuleName::ALL.len(), 29);
        for r in RuleName::ALL {
            assert_eq!(r.as_str().parse::<RuleName>().unwrap(), *r);
            assert_eq!(r.signature().rule, *r);
        }
        assert!("levitate".parse::<RuleName>().is_err());
    }

    #[test]
    fn scene_rules_take_no_children() {
        for r in RuleName::ALL {
            let sig = r.signature();
            if sig.input == InputKind::Scene {
                assert_eq!(sig.children, 0, "{r}");
            } else {
                assert!(sig.children >= 1, "{r}");
            }
        }
    }

    #[test]
    fn between_rules_take_two_anchors() {
        for r in RuleName::ALL {
            if r.localizer() == Some(Localizer::Between) {
                assert_eq!(r.signature().children, 3);
            }
        }
    }
}
