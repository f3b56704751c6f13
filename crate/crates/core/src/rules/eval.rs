use std::collections::BTreeMap;

use super::{
    ground, Answer, Evidence, IntermediateResult, Mode, RuleError, RuleHandle, RuleInput, TimeWord,
    Window,
};
use crate::program::{Localizer, RuleName};
use crate::scene::{ActionInstance, Frame, FrameTriple};

type RuleResult = Result<IntermediateResult, RuleError>;

/// Runs one bound rule.
pub fn apply(handle: RuleHandle, input: &RuleInput<'_>) -> RuleResult {
    use RuleName::*;
    let rule = handle.rule;
    let want = rule.signature().children;
    if input.children.len() != want {
        return Err(RuleError::MissingChild {
            rule,
            expected: want,
            found: input.children.len(),
        });
    }
    let cx = Cx { rule, input };
    match rule {
        FilterObject => Ok(cx.filter_object()),
        FilterRelation => Ok(cx.filter_relation()),
        FilterActions => Ok(cx.filter_actions()),
        QueryObject => {
            cx.query_filter(0, "an object filter", |a| matches!(a, Answer::ObjectSet(_)))
        }
        QueryRelation => cx.query_filter(0, "a relation filter", |a| {
            matches!(a, Answer::RelationSet(_))
        }),
        QueryInteraction => cx.query_interaction(handle.mode),
        InteractionTemporalAfter
        | InteractionTemporalBefore
        | InteractionTemporalWhile
        | InteractionTemporalBetween => {
            cx.interaction_temporal(rule.localizer().expect("localizer"))
        }
        ActionsAfter => Ok(cx.actions_boundary(Localizer::After)),
        ActionsBefore => Ok(cx.actions_boundary(Localizer::Before)),
        ObjectsAfter | ObjectsBefore | ObjectsWhile | ObjectsBetween => {
            cx.objects_temporal(rule.localizer().expect("localizer"))
        }
        LongestAction => Ok(cx.extremal_action(true)),
        ShortestAction => Ok(cx.extremal_action(false)),
        QuerySubjectRelation => Ok(cx.query_subject_relation()),
        Choose => cx.choose(),
        Or => cx.or(),
        ChooseActionShorter => cx.choose_action(false),
        ChooseActionLonger => cx.choose_action(true),
        ObjectEquals => cx.equals(|a| matches!(a, Answer::Object(_))),
        ActionEquals => cx.equals(|a| matches!(a, Answer::Action(_))),
        ConjunctionAnd => cx.conjunction(|a, b| a && b),
        ConjunctionXor => cx.conjunction(|a, b| a != b),
        QueryFirst => Ok(cx.ordinal(handle.mode, true)),
        QueryLast => Ok(cx.ordinal(handle.mode, false)),
    }
}

struct Cx<'a, 'b> {
    rule: RuleName,
    input: &'b RuleInput<'a>,
}

/// Distinct object names of `triples`, ordered by first frame, then name.
fn objects_by_appearance(triples: &[FrameTriple]) -> Vec<String> {
    let mut first: BTreeMap<&str, Frame> = BTreeMap::new();
    for t in triples {
        let f = first.entry(t.triple.object.as_str()).or_insert(t.frame);
        *f = (*f).min(t.frame);
    }
    let mut names: Vec<(Frame, &str)> = first.into_iter().map(|(n, f)| (f, n)).collect();
    names.sort();
    names.into_iter().map(|(_, n)| n.to_string()).collect()
}

fn distinct_action_names(actions: &[ActionInstance]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for a in actions {
        if !out.contains(&a.action) {
            out.push(a.action.clone());
        }
    }
    out
}

fn no_result() -> IntermediateResult {
    IntermediateResult::new(Answer::None, Evidence::default())
}

impl Cx<'_, '_> {
    fn arg(&self, i: usize) -> Option<&str> {
        self.input.args.get(i).map(String::as_str)
    }

    fn child(&self, i: usize) -> &IntermediateResult {
        self.input.children[i]
    }

    fn mismatch(&self, index: usize, expected: &'static str) -> RuleError {
        RuleError::TypeMismatch {
            rule: self.rule,
            index,
            expected,
            found: self.child(index).answer.text(),
        }
    }

    fn binary(&self, i: usize) -> Result<bool, RuleError> {
        self.child(i)
            .answer
            .as_binary()
            .ok_or_else(|| self.mismatch(i, "yes or no"))
    }

    fn filter_object(&self) -> IntermediateResult {
        let name = self.arg(0).unwrap_or_default();
        let triples: Vec<_> = self
            .input
            .scene
            .triples()
            .iter()
            .filter(|t| t.triple.involves(name))
            .cloned()
            .collect();
        let set = if triples.is_empty() {
            vec![]
        } else {
            vec![name.to_string()]
        };
        IntermediateResult::new(Answer::ObjectSet(set), Evidence::from_triples(triples))
    }

    fn filter_relation(&self) -> IntermediateResult {
        let name = self.arg(0).unwrap_or_default();
        let triples: Vec<_> = self
            .input
            .scene
            .triples()
            .iter()
            .filter(|t| t.triple.relation == name)
            .cloned()
            .collect();
        let set = if triples.is_empty() {
            vec![]
        } else {
            vec![name.to_string()]
        };
        IntermediateResult::new(Answer::RelationSet(set), Evidence::from_triples(triples))
    }

    fn filter_actions(&self) -> IntermediateResult {
        let wanted = self.arg(0);
        let actions: Vec<_> = self
            .input
            .scene
            .actions()
            .iter()
            .filter(|a| wanted.is_none_or(|w| a.action == w))
            .cloned()
            .collect();
        let evidence = Evidence::from_actions(actions);
        IntermediateResult::new(
            Answer::ActionSet(distinct_action_names(&evidence.actions)),
            evidence,
        )
    }

    fn query_filter(
        &self,
        i: usize,
        expected: &'static str,
        ok: fn(&Answer) -> bool,
    ) -> RuleResult {
        let c = self.child(i);
        if !ok(&c.answer) {
            return Err(self.mismatch(i, expected));
        }
        Ok(IntermediateResult::new(
            Answer::Binary(!c.evidence.triples.is_empty()),
            c.evidence.clone(),
        ))
    }

    fn query_interaction(&self, mode: Mode) -> RuleResult {
        match mode {
            Mode::Decomposed => {
                self.binary(0)?;
                self.binary(1)?;
            }
            _ => {
                if !matches!(self.child(0).answer, Answer::RelationSet(_)) {
                    return Err(self.mismatch(0, "a relation filter"));
                }
                if !matches!(self.child(1).answer, Answer::ObjectSet(_)) {
                    return Err(self.mismatch(1, "an object filter"));
                }
            }
        }
        let objects = &self.child(1).evidence.triples;
        let joined: Vec<_> = self
            .child(0)
            .evidence
            .triples
            .iter()
            .filter(|t| objects.binary_search(t).is_ok())
            .cloned()
            .collect();
        Ok(IntermediateResult::new(
            Answer::Binary(!joined.is_empty()),
            Evidence::from_triples(joined),
        ))
    }

    /// Window induced by children `1..`, or `None` when any anchor is
    /// ungrounded.
    fn window(&self, loc: Localizer) -> Option<Window> {
        let anchors: Option<Vec<_>> = self.input.children[1..].iter().map(|c| ground(c)).collect();
        Some(Window::new(loc, &anchors?))
    }

    fn interaction_temporal(&self, loc: Localizer) -> RuleResult {
        let holds = self.binary(0)?;
        let negative = IntermediateResult::new(Answer::no(), Evidence::default());
        let Some(w) = self.window(loc).filter(|_| holds) else {
            return Ok(negative);
        };
        let target = &self.child(0).evidence;
        let triples: Vec<_> = target
            .triples
            .iter()
            .filter(|t| w.contains(t.frame))
            .cloned()
            .collect();
        let actions: Vec<_> = target
            .actions
            .iter()
            .filter(|a| w.meets(a.t_start, a.t_end))
            .cloned()
            .collect();
        let evidence = Evidence::new(triples, actions);
        Ok(IntermediateResult::new(
            Answer::Binary(!evidence.is_empty()),
            evidence,
        ))
    }

    /// Nearest action past the anchor; ties go to the one whose far end is
    /// also nearer, then to `order_key`. The order is mirror-symmetric.
    fn actions_boundary(&self, loc: Localizer) -> IntermediateResult {
        let Some((start, end)) = ground(self.child(0)) else {
            return no_result();
        };
        let actions = self.input.scene.actions().iter();
        let pick = match loc {
            Localizer::After => actions.filter(|a| a.t_start > end).min(),
            _ => actions.filter(|a| a.t_end < start).min_by(|a, b| {
                (b.t_end, b.t_start)
                    .cmp(&(a.t_end, a.t_start))
                    .then_with(|| a.cmp(b))
            }),
        };
        match pick {
            Some(a) => IntermediateResult::new(
                Answer::Action(a.action.clone()),
                Evidence::from_actions(vec![a.clone()]),
            ),
            None => no_result(),
        }
    }

    fn objects_temporal(&self, loc: Localizer) -> RuleResult {
        let holds = self.binary(0)?;
        let all = self.arg(0) == Some("all");
        let empty = || {
            let answer = if all {
                Answer::ObjectSet(vec![])
            } else {
                Answer::None
            };
            IntermediateResult::new(answer, Evidence::default())
        };
        let Some(w) = self.window(loc).filter(|_| holds) else {
            return Ok(empty());
        };
        let triples: Vec<_> = self
            .child(0)
            .evidence
            .triples
            .iter()
            .filter(|t| w.contains(t.frame))
            .cloned()
            .collect();
        let names = objects_by_appearance(&triples);
        if names.is_empty() {
            return Ok(empty());
        }
        let answer = if all {
            Answer::ObjectSet(names)
        } else {
            Answer::Object(names[0].clone())
        };
        Ok(IntermediateResult::new(
            answer,
            Evidence::from_triples(triples),
        ))
    }

    fn extremal_action(&self, longest: bool) -> IntermediateResult {
        let candidates = self.child(0).evidence.actions.iter();
        let pick = if longest {
            candidates.min_by(|a, b| b.duration().cmp(&a.duration()).then_with(|| a.cmp(b)))
        } else {
            candidates.min_by(|a, b| a.duration().cmp(&b.duration()).then_with(|| a.cmp(b)))
        };
        match pick {
            Some(a) => IntermediateResult::new(
                Answer::Action(a.action.clone()),
                Evidence::from_actions(vec![a.clone()]),
            ),
            None => no_result(),
        }
    }

    fn query_subject_relation(&self) -> IntermediateResult {
        let triples = &self.child(0).evidence.triples;
        let Some(first) = triples
            .iter()
            .min_by(|a, b| (a.frame, &a.triple.object).cmp(&(b.frame, &b.triple.object)))
        else {
            return no_result();
        };
        let object = first.triple.object.clone();
        let support: Vec<_> = triples
            .iter()
            .filter(|t| t.triple.object == object)
            .cloned()
            .collect();
        IntermediateResult::new(Answer::Object(object), Evidence::from_triples(support))
    }

    /// Index of the single child answering yes.
    fn select(&self) -> Result<usize, RuleError> {
        match (self.binary(0)?, self.binary(1)?) {
            (true, false) => Ok(0),
            (false, true) => Ok(1),
            (true, true) => Err(RuleError::AmbiguousChoice),
            (false, false) => Err(RuleError::NoValidChoice),
        }
    }

    fn choose(&self) -> RuleResult {
        let i = self.select()?;
        let option = self.input.args[i].clone();
        let answer = if self.input.vocab.has_object(&option) {
            Answer::Object(option)
        } else {
            Answer::Action(option)
        };
        Ok(IntermediateResult::new(
            answer,
            self.child(i).evidence.clone(),
        ))
    }

    fn or(&self) -> RuleResult {
        let i = self.select()?;
        let word = if i == 0 {
            TimeWord::After
        } else {
            TimeWord::Before
        };
        Ok(IntermediateResult::new(
            Answer::Time(word),
            self.child(i).evidence.clone(),
        ))
    }

    fn choose_action(&self, longer: bool) -> RuleResult {
        let a = self.child(0).evidence.actions.first();
        let b = self.child(1).evidence.actions.first();
        let (Some(a), Some(b)) = (a, b) else {
            return Err(RuleError::NoValidChoice);
        };
        let by_duration = if longer {
            b.duration().cmp(&a.duration())
        } else {
            a.duration().cmp(&b.duration())
        };
        let pick = if by_duration.then_with(|| a.cmp(b)).is_le() {
            a
        } else {
            b
        };
        Ok(IntermediateResult::new(
            Answer::Action(pick.action.clone()),
            Evidence::from_actions(vec![pick.clone()]),
        ))
    }

    fn equals(&self, named: fn(&Answer) -> bool) -> RuleResult {
        for i in 0..2 {
            let a = &self.child(i).answer;
            if !(named(a) || *a == Answer::None) {
                return Err(self.mismatch(i, "a single name or None"));
            }
        }
        let (a, b) = (&self.child(0).answer, &self.child(1).answer);
        let same = *a != Answer::None && a == b;
        Ok(IntermediateResult::new(
            Answer::Binary(same),
            Evidence::union([&self.child(0).evidence, &self.child(1).evidence]),
        ))
    }

    fn conjunction(&self, op: fn(bool, bool) -> bool) -> RuleResult {
        let v = op(self.binary(0)?, self.binary(1)?);
        Ok(IntermediateResult::new(
            Answer::Binary(v),
            Evidence::union([&self.child(0).evidence, &self.child(1).evidence]),
        ))
    }

    fn ordinal(&self, mode: Mode, first: bool) -> IntermediateResult {
        let evidence = &self.child(0).evidence;
        if mode == Mode::Actions {
            let pick = if first {
                evidence.actions.first()
            } else {
                evidence.actions.last()
            };
            return match pick {
                Some(a) => IntermediateResult::new(
                    Answer::Action(a.action.clone()),
                    Evidence::from_actions(vec![a.clone()]),
                ),
                None => no_result(),
            };
        }
        let names = objects_by_appearance(&evidence.triples);
        let pick = if first { names.first() } else { names.last() };
        match pick {
            Some(name) => {
                let support: Vec<_> = evidence
                    .triples
                    .iter()
                    .filter(|t| &t.triple.object == name)
                    .cloned()
                    .collect();
                IntermediateResult::new(
                    Answer::Object(name.clone()),
                    Evidence::from_triples(support),
                )
            }
            None => no_result(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::RuleInput;
    use crate::scene::{RelationTriple, SceneRepresentation, Vocabulary};

    fn ft(frame: Frame, r: &str, o: &str) -> FrameTriple {
        FrameTriple {
            frame,
            triple: RelationTriple::new("person", r, o),
        }
    }

    fn run(
        rule: RuleName,
        mode: Mode,
        scene: &SceneRepresentation,
        args: &[&str],
        children: &[&IntermediateResult],
    ) -> RuleResult {
        let vocab = Vocabulary::default();
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        apply(
            RuleHandle { rule, mode },
            &RuleInput {
                scene,
                vocab: &vocab,
                args: &args,
                children,
            },
        )
    }

    fn leaf(rule: RuleName, scene: &SceneRepresentation, args: &[&str]) -> IntermediateResult {
        run(rule, Mode::Plain, scene, args, &[]).unwrap()
    }

    fn actions(spec: &[(Frame, Frame, &str)]) -> SceneRepresentation {
        SceneRepresentation::new(
            10,
            vec![],
            spec.iter()
                .map(|&(s, e, n)| ActionInstance::new(n, None, s, e))
                .collect(),
        )
    }

    fn anchor(s: Frame, e: Frame) -> IntermediateResult {
        IntermediateResult::new(
            Answer::ActionSet(vec!["standing up".into()]),
            Evidence::from_actions(vec![ActionInstance::new("standing up", None, s, e)]),
        )
    }

    #[test]
    fn filter_object_matches_both_positions() {
        let scene = SceneRepresentation::new(3, vec![ft(2, "holding", "blanket")], vec![]);
        let r = leaf(RuleName::FilterObject, &scene, &["blanket"]);
        assert_eq!(r.answer, Answer::ObjectSet(vec!["blanket".into()]));
        assert_eq!(r.evidence.triples.len(), 1);
        let r = leaf(RuleName::FilterObject, &scene, &["person"]);
        assert_eq!(r.evidence.triples.len(), 1);
        let r = leaf(RuleName::FilterObject, &scene, &["vacuum"]);
        assert_eq!(r.answer, Answer::ObjectSet(vec![]));
        assert!(r.evidence.is_empty());
    }

    #[test]
    fn interaction_join_is_per_triple() {
        let scene = SceneRepresentation::new(
            3,
            vec![ft(1, "taking", "dish"), ft(2, "holding", "blanket")],
            vec![],
        );
        let rel = leaf(RuleName::FilterRelation, &scene, &["taking"]);
        let obj = leaf(RuleName::FilterObject, &scene, &["blanket"]);
        let r = run(
            RuleName::QueryInteraction,
            Mode::Plain,
            &scene,
            &[],
            &[&rel, &obj],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::no());
        let obj = leaf(RuleName::FilterObject, &scene, &["dish"]);
        let r = run(
            RuleName::QueryInteraction,
            Mode::Plain,
            &scene,
            &[],
            &[&rel, &obj],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::yes());
    }

    #[test]
    fn temporal_after_and_while() {
        let scene = SceneRepresentation::new(6, vec![ft(5, "holding", "box")], vec![]);
        let rel = leaf(RuleName::FilterRelation, &scene, &["holding"]);
        let target = run(RuleName::QueryRelation, Mode::Plain, &scene, &[], &[&rel]).unwrap();
        let a = anchor(1, 3);
        let r = run(
            RuleName::InteractionTemporalAfter,
            Mode::Plain,
            &scene,
            &[],
            &[&target, &a],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::yes());

        let scene = SceneRepresentation::new(6, vec![ft(2, "holding", "box")], vec![]);
        let rel = leaf(RuleName::FilterRelation, &scene, &["holding"]);
        let target = run(RuleName::QueryRelation, Mode::Plain, &scene, &[], &[&rel]).unwrap();
        let a = anchor(3, 4);
        let r = run(
            RuleName::InteractionTemporalWhile,
            Mode::Plain,
            &scene,
            &[],
            &[&target, &a],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::no());
    }

    #[test]
    fn actions_boundary_nearest_and_ties() {
        let scene = actions(&[(1, 2, "A"), (4, 6, "B"), (7, 8, "C")]);
        let a = anchor(1, 2);
        let r = run(RuleName::ActionsAfter, Mode::Plain, &scene, &[], &[&a]).unwrap();
        assert_eq!(r.answer, Answer::Action("B".into()));
        let r = run(RuleName::ActionsBefore, Mode::Plain, &scene, &[], &[&a]).unwrap();
        assert_eq!(r.answer, Answer::None);

        let scene = actions(&[(1, 2, "A"), (4, 6, "D"), (4, 6, "B")]);
        let r = run(RuleName::ActionsAfter, Mode::Plain, &scene, &[], &[&a]).unwrap();
        assert_eq!(r.answer, Answer::Action("B".into()));

        // Same near end: the shorter action is nearer on both sides.
        let scene = actions(&[(1, 4, "A"), (3, 4, "B"), (6, 7, "C"), (6, 9, "D")]);
        let a = anchor(5, 5);
        let r = run(RuleName::ActionsAfter, Mode::Plain, &scene, &[], &[&a]).unwrap();
        assert_eq!(r.answer, Answer::Action("C".into()));
        let r = run(RuleName::ActionsBefore, Mode::Plain, &scene, &[], &[&a]).unwrap();
        assert_eq!(r.answer, Answer::Action("B".into()));
    }

    #[test]
    fn extremal_actions() {
        let scene = actions(&[(1, 5, "A"), (2, 3, "B"), (6, 7, "C")]);
        let all = leaf(RuleName::FilterActions, &scene, &[]);
        assert_eq!(
            all.answer,
            Answer::ActionSet(vec!["A".into(), "B".into(), "C".into()])
        );
        let r = run(RuleName::ShortestAction, Mode::Plain, &scene, &[], &[&all]).unwrap();
        // B and C tie on duration; B starts first.
        assert_eq!(r.answer, Answer::Action("B".into()));
        let r = run(RuleName::LongestAction, Mode::Plain, &scene, &[], &[&all]).unwrap();
        assert_eq!(r.answer, Answer::Action("A".into()));
    }

    #[test]
    fn choose_action_shorter() {
        let scene = actions(&[(1, 5, "A"), (2, 3, "B")]);
        let a = leaf(RuleName::FilterActions, &scene, &["A"]);
        let b = leaf(RuleName::FilterActions, &scene, &["B"]);
        let r = run(
            RuleName::ChooseActionShorter,
            Mode::Plain,
            &scene,
            &[],
            &[&a, &b],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::Action("B".into()));
        let missing = leaf(RuleName::FilterActions, &scene, &["Z"]);
        let e = run(
            RuleName::ChooseActionLonger,
            Mode::Plain,
            &scene,
            &[],
            &[&a, &missing],
        )
        .unwrap_err();
        assert_eq!(e, RuleError::NoValidChoice);
    }

    #[test]
    fn choose_degeneracies() {
        let scene = actions(&[]);
        let y = IntermediateResult::new(Answer::yes(), Evidence::default());
        let n = IntermediateResult::new(Answer::no(), Evidence::default());
        let args = ["dish", "box"];
        let r = run(RuleName::Choose, Mode::Plain, &scene, &args, &[&n, &y]).unwrap();
        assert_eq!(r.answer, Answer::Object("box".into()));
        let e = run(RuleName::Choose, Mode::Plain, &scene, &args, &[&y, &y]).unwrap_err();
        assert_eq!(e, RuleError::AmbiguousChoice);
        let e = run(RuleName::Or, Mode::Plain, &scene, &[], &[&n, &n]).unwrap_err();
        assert_eq!(e, RuleError::NoValidChoice);
        let r = run(RuleName::Or, Mode::Plain, &scene, &[], &[&y, &n]).unwrap();
        assert_eq!(r.answer, Answer::Time(TimeWord::After));
    }

    #[test]
    fn equals_and_conjunction() {
        let scene = actions(&[]);
        let obj = |s: &str| IntermediateResult::new(Answer::Object(s.into()), Evidence::default());
        let none = no_result();
        let eq = |a: &IntermediateResult, b: &IntermediateResult| {
            run(RuleName::ObjectEquals, Mode::Plain, &scene, &[], &[a, b]).map(|r| r.answer)
        };
        assert_eq!(eq(&obj("blanket"), &obj("blanket")), Ok(Answer::yes()));
        assert_eq!(eq(&obj("blanket"), &obj("dish")), Ok(Answer::no()));
        assert_eq!(eq(&none, &none), Ok(Answer::no()));
        let y = IntermediateResult::new(Answer::yes(), Evidence::default());
        assert!(eq(&y, &obj("dish")).is_err());
        let xor = run(
            RuleName::ConjunctionXor,
            Mode::Plain,
            &scene,
            &[],
            &[&y, &y],
        )
        .unwrap();
        assert_eq!(xor.answer, Answer::no());
        let and = run(
            RuleName::ConjunctionAnd,
            Mode::Plain,
            &scene,
            &[],
            &[&y, &y],
        )
        .unwrap();
        assert_eq!(and.answer, Answer::yes());
        assert!(run(
            RuleName::ConjunctionAnd,
            Mode::Plain,
            &scene,
            &[],
            &[&y, &obj("x")]
        )
        .is_err());
    }

    #[test]
    fn ordinals() {
        let scene = actions(&[(1, 2, "A"), (3, 4, "B")]);
        let all = leaf(RuleName::FilterActions, &scene, &[]);
        let f = run(RuleName::QueryFirst, Mode::Actions, &scene, &[], &[&all]).unwrap();
        let l = run(RuleName::QueryLast, Mode::Actions, &scene, &[], &[&all]).unwrap();
        assert_eq!(
            (f.answer, l.answer),
            (Answer::Action("A".into()), Answer::Action("B".into()))
        );

        let scene = SceneRepresentation::new(
            6,
            vec![
                ft(5, "holding", "dish"),
                ft(2, "holding", "cup"),
                ft(6, "holding", "cup"),
            ],
            vec![],
        );
        let rel = leaf(RuleName::FilterRelation, &scene, &["holding"]);
        let q = run(RuleName::QueryRelation, Mode::Plain, &scene, &[], &[&rel]).unwrap();
        let l = run(RuleName::QueryLast, Mode::Objects, &scene, &[], &[&q]).unwrap();
        assert_eq!(l.answer, Answer::Object("dish".into()));
        let empty = IntermediateResult::new(Answer::no(), Evidence::default());
        let f = run(RuleName::QueryFirst, Mode::Objects, &scene, &[], &[&empty]).unwrap();
        assert_eq!(f.answer, Answer::None);
    }

    #[test]
    fn objects_window_ordering() {
        let scene = SceneRepresentation::new(
            9,
            vec![
                ft(1, "taking", "dish"),
                ft(5, "taking", "cup"),
                ft(4, "taking", "box"),
                ft(4, "taking", "bag"),
            ],
            vec![],
        );
        let rel = leaf(RuleName::FilterRelation, &scene, &["taking"]);
        let q = run(RuleName::QueryRelation, Mode::Plain, &scene, &[], &[&rel]).unwrap();
        let a = anchor(2, 3);
        let r = run(
            RuleName::ObjectsAfter,
            Mode::Plain,
            &scene,
            &["all"],
            &[&q, &a],
        )
        .unwrap();
        assert_eq!(
            r.answer,
            Answer::ObjectSet(vec!["bag".into(), "box".into(), "cup".into()])
        );
        let r = run(RuleName::ObjectsAfter, Mode::Plain, &scene, &[], &[&q, &a]).unwrap();
        assert_eq!(r.answer, Answer::Object("bag".into()));
        let late = anchor(8, 9);
        let r = run(
            RuleName::ObjectsAfter,
            Mode::Plain,
            &scene,
            &[],
            &[&q, &late],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::None);
    }

    #[test]
    fn subject_relation_earliest() {
        let scene = SceneRepresentation::new(
            6,
            vec![
                ft(3, "holding", "dish"),
                ft(3, "holding", "box"),
                ft(4, "holding", "bag"),
            ],
            vec![],
        );
        let rel = leaf(RuleName::FilterRelation, &scene, &["holding"]);
        let q = run(RuleName::QueryRelation, Mode::Plain, &scene, &[], &[&rel]).unwrap();
        let r = run(
            RuleName::QuerySubjectRelation,
            Mode::Plain,
            &scene,
            &[],
            &[&q],
        )
        .unwrap();
        assert_eq!(r.answer, Answer::Object("box".into()));
    }

    #[test]
    fn missing_child_is_typed() {
        let scene = actions(&[]);
        let e = run(RuleName::QueryObject, Mode::Plain, &scene, &[], &[]).unwrap_err();
        assert!(matches!(
            e,
            RuleError::MissingChild {
                expected: 1,
                found: 0,
                ..
            }
        ));
    }
}
