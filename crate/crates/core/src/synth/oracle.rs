//! Brute-force reference answers.
//!
//! Works on index sets into the scene's triple and action lists and on
//! explicit frame sets over `1..=T`. Shares no evaluation code with the
//! rule engine; only the [`Answer`] type is common.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::program::{decompose, Localizer, NodeKey, ProgramNode, RuleName};
use crate::rules::{Answer, TimeWord};
use crate::scene::{Frame, SceneRepresentation, Vocabulary};

/// Failure classes the oracle distinguishes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleError {
    AmbiguousChoice,
    NoValidChoice,
    Propagated,
    /// The program does not fit the oracle's input expectations.
    IllTyped(String),
}

impl OracleError {
    pub fn label(&self) -> &'static str {
        match self {
            OracleError::AmbiguousChoice => "ambiguous_choice",
            OracleError::NoValidChoice => "no_valid_choice",
            OracleError::Propagated => "propagated",
            OracleError::IllTyped(_) => "ill_typed",
        }
    }
}

pub type OracleAnswer = Result<Answer, OracleError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleOutcome {
    pub root: OracleAnswer,
    /// Every node in post-order.
    pub nodes: Vec<(NodeKey, OracleAnswer)>,
    /// Object and action names behind each successful node, same order.
    pub support: Vec<Option<Vec<String>>>,
}

#[derive(Debug, Clone, Default)]
struct Val {
    answer: Option<Answer>,
    tri: BTreeSet<usize>,
    act: BTreeSet<usize>,
}

type Out = Result<Val, OracleError>;

struct Oracle<'a> {
    scene: &'a SceneRepresentation,
    vocab: &'a Vocabulary,
    log: Vec<(OracleAnswer, Option<Vec<String>>)>,
}

pub fn oracle_answer(
    program: &ProgramNode,
    scene: &SceneRepresentation,
    vocab: &Vocabulary,
) -> OracleOutcome {
    let mut o = Oracle {
        scene,
        vocab,
        log: Vec::new(),
    };
    let _ = o.eval(program);
    let keys = decompose(program);
    assert_eq!(keys.len(), o.log.len(), "one result per node");
    let root = o.log.last().expect("root").0.clone();
    let (answers, support): (Vec<_>, Vec<_>) = o.log.into_iter().unzip();
    OracleOutcome {
        root,
        nodes: keys.into_iter().map(|(k, _)| k).zip(answers).collect(),
        support,
    }
}

fn found(a: &Answer) -> bool {
    match a {
        Answer::Binary(b) => *b,
        Answer::None => false,
        Answer::ObjectSet(v) | Answer::ActionSet(v) | Answer::RelationSet(v) => !v.is_empty(),
        Answer::Object(_) | Answer::Action(_) | Answer::Relation(_) | Answer::Time(_) => true,
    }
}

fn ill(what: &str) -> OracleError {
    OracleError::IllTyped(what.to_string())
}

impl Oracle<'_> {
    fn eval(&mut self, node: &ProgramNode) -> Out {
        let kids: Vec<Out> = node.children().iter().map(|c| self.eval(c)).collect();
        let out = if kids.iter().any(Result::is_err) {
            Err(OracleError::Propagated)
        } else {
            let kids: Vec<Val> = kids.into_iter().map(Result::unwrap).collect();
            self.rule(node, &kids)
        };
        let entry = match &out {
            Ok(v) => (
                Ok(v.answer.clone().expect("answer set")),
                Some(self.names(v)),
            ),
            Err(e) => (Err(e.clone()), None),
        };
        self.log.push(entry);
        out
    }

    fn names(&self, v: &Val) -> Vec<String> {
        let mut s: BTreeSet<String> = BTreeSet::new();
        for &i in &v.tri {
            s.insert(self.scene.triples()[i].triple.object.clone());
        }
        for &i in &v.act {
            s.insert(self.scene.actions()[i].action.clone());
        }
        s.into_iter().collect()
    }

    fn frames(&self, v: &Val) -> BTreeSet<Frame> {
        let mut f: BTreeSet<Frame> = v
            .tri
            .iter()
            .map(|&i| self.scene.triples()[i].frame)
            .collect();
        for &i in &v.act {
            let a = &self.scene.actions()[i];
            f.extend(a.t_start..=a.t_end);
        }
        f
    }

    fn interval(&self, v: &Val) -> Option<(Frame, Frame)> {
        if !found(v.answer.as_ref()?) {
            return None;
        }
        let f = self.frames(v);
        Some((*f.first()?, *f.last()?))
    }

    /// Frames of the timeline inside the window, or `None` if an anchor is
    /// ungrounded.
    fn window(&self, loc: Localizer, anchors: &[Val]) -> Option<BTreeSet<Frame>> {
        let mut iv: Vec<(Frame, Frame)> = Vec::new();
        for a in anchors {
            iv.push(self.interval(a)?);
        }
        iv.sort();
        let t = self.scene.frame_count;
        let last = self
            .scene
            .actions()
            .iter()
            .map(|a| a.t_end)
            .chain(self.scene.triples().iter().map(|x| x.frame))
            .fold(t, Frame::max);
        Some(
            (1..=last)
                .filter(|&f| match loc {
                    Localizer::After => f > iv[0].1,
                    Localizer::Before => f < iv[0].0,
                    Localizer::While => iv[0].0 <= f && f <= iv[0].1,
                    Localizer::Between => iv[0].1 < f && f < iv[1].0,
                })
                .collect(),
        )
    }

    fn action_key(&self, i: usize) -> (Frame, Frame, &str, &str, Option<&str>) {
        let a = &self.scene.actions()[i];
        (
            a.t_start,
            a.t_end,
            &a.action,
            &a.subject,
            a.object.as_deref(),
        )
    }

    fn duration(&self, i: usize) -> i64 {
        let a = &self.scene.actions()[i];
        i64::from(a.t_end) - i64::from(a.t_start) + 1
    }

    /// Distinct objects of the given triples, ranked by earliest frame then
    /// name.
    fn ranked_objects(&self, tri: &BTreeSet<usize>) -> Vec<String> {
        let mut best: Vec<(Frame, String)> = Vec::new();
        for &i in tri {
            let t = &self.scene.triples()[i];
            match best.iter_mut().find(|(_, n)| *n == t.triple.object) {
                Some(e) => e.0 = e.0.min(t.frame),
                None => best.push((t.frame, t.triple.object.clone())),
            }
        }
        best.sort();
        best.into_iter().map(|(_, n)| n).collect()
    }

    fn with_object(&self, tri: &BTreeSet<usize>, name: &str) -> BTreeSet<usize> {
        tri.iter()
            .copied()
            .filter(|&i| self.scene.triples()[i].triple.object == name)
            .collect()
    }

    fn one_action(&self, i: Option<usize>) -> Val {
        match i {
            Some(i) => Val {
                answer: Some(Answer::Action(self.scene.actions()[i].action.clone())),
                tri: BTreeSet::new(),
                act: BTreeSet::from([i]),
            },
            None => Val {
                answer: Some(Answer::None),
                ..Val::default()
            },
        }
    }

    fn binary(v: &Val) -> Result<bool, OracleError> {
        match v.answer {
            Some(Answer::Binary(b)) => Ok(b),
            _ => Err(ill("expected a binary child")),
        }
    }

    fn rule(&self, node: &ProgramNode, k: &[Val]) -> Out {
        use RuleName::*;
        let scene = self.scene;
        let arg = |i: usize| node.args().get(i).map(String::as_str);
        let ans = |a: Answer, tri: BTreeSet<usize>, act: BTreeSet<usize>| {
            Ok(Val {
                answer: Some(a),
                tri,
                act,
            })
        };
        match node.rule() {
            FilterObject | FilterRelation => {
                let name = arg(0).ok_or_else(|| ill("missing name"))?;
                let tri: BTreeSet<usize> = (0..scene.triples().len())
                    .filter(|&i| {
                        let t = &scene.triples()[i].triple;
                        if node.rule() == FilterObject {
                            t.subject == name || t.object == name
                        } else {
                            t.relation == name
                        }
                    })
                    .collect();
                let set = if tri.is_empty() {
                    vec![]
                } else {
                    vec![name.to_string()]
                };
                let a = if node.rule() == FilterObject {
                    Answer::ObjectSet(set)
                } else {
                    Answer::RelationSet(set)
                };
                ans(a, tri, BTreeSet::new())
            }
            FilterActions => {
                let mut idx: Vec<usize> = (0..scene.actions().len())
                    .filter(|&i| arg(0).is_none_or(|n| scene.actions()[i].action == n))
                    .collect();
                idx.sort_by(|&a, &b| self.action_key(a).cmp(&self.action_key(b)));
                let mut names: Vec<String> = Vec::new();
                for &i in &idx {
                    let n = &scene.actions()[i].action;
                    if !names.contains(n) {
                        names.push(n.clone());
                    }
                }
                ans(
                    Answer::ActionSet(names),
                    BTreeSet::new(),
                    idx.into_iter().collect(),
                )
            }
            QueryObject | QueryRelation => {
                let ok = matches!(
                    (&k[0].answer, node.rule()),
                    (Some(Answer::ObjectSet(_)), QueryObject)
                        | (Some(Answer::RelationSet(_)), QueryRelation)
                );
                if !ok {
                    return Err(ill("expected a filter child"));
                }
                ans(
                    Answer::Binary(!k[0].tri.is_empty()),
                    k[0].tri.clone(),
                    BTreeSet::new(),
                )
            }
            QueryInteraction => {
                let filters = matches!(k[0].answer, Some(Answer::RelationSet(_)))
                    && matches!(k[1].answer, Some(Answer::ObjectSet(_)));
                if !filters {
                    Self::binary(&k[0])?;
                    Self::binary(&k[1])?;
                }
                let tri: BTreeSet<usize> = k[0].tri.intersection(&k[1].tri).copied().collect();
                ans(Answer::Binary(!tri.is_empty()), tri, BTreeSet::new())
            }
            InteractionTemporalAfter
            | InteractionTemporalBefore
            | InteractionTemporalWhile
            | InteractionTemporalBetween => {
                let loc = node.rule().localizer().expect("temporal rule");
                let target_yes = Self::binary(&k[0])?;
                let window = self.window(loc, &k[1..]).filter(|_| target_yes);
                let Some(w) = window else {
                    return ans(Answer::Binary(false), BTreeSet::new(), BTreeSet::new());
                };
                let tri: BTreeSet<usize> = k[0]
                    .tri
                    .iter()
                    .copied()
                    .filter(|&i| w.contains(&scene.triples()[i].frame))
                    .collect();
                let act: BTreeSet<usize> = k[0]
                    .act
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let a = &scene.actions()[i];
                        (a.t_start..=a.t_end).any(|f| w.contains(&f))
                    })
                    .collect();
                let yes = !tri.is_empty() || !act.is_empty();
                ans(Answer::Binary(yes), tri, act)
            }
            ActionsAfter | ActionsBefore => {
                let Some((lo, hi)) = self.interval(&k[0]) else {
                    return Ok(self.one_action(None));
                };
                let after = node.rule() == ActionsAfter;
                let best = (0..scene.actions().len())
                    .filter_map(|i| {
                        let a = &scene.actions()[i];
                        let gaps = if after {
                            (a.t_start > hi).then(|| (a.t_start - hi, a.t_end - hi))
                        } else {
                            (a.t_end < lo).then(|| (lo - a.t_end, lo - a.t_start))
                        };
                        gaps.map(|g| (g, self.action_key(i), i))
                    })
                    .min()
                    .map(|(_, _, i)| i);
                Ok(self.one_action(best))
            }
            ObjectsAfter | ObjectsBefore | ObjectsWhile | ObjectsBetween => {
                let loc = node.rule().localizer().expect("temporal rule");
                let all = arg(0) == Some("all");
                let holds = Self::binary(&k[0])?;
                let tri: BTreeSet<usize> = match self.window(loc, &k[1..]).filter(|_| holds) {
                    Some(w) => k[0]
                        .tri
                        .iter()
                        .copied()
                        .filter(|&i| w.contains(&scene.triples()[i].frame))
                        .collect(),
                    None => BTreeSet::new(),
                };
                let names = self.ranked_objects(&tri);
                let a = match (all, names.first()) {
                    (true, _) => Answer::ObjectSet(names.clone()),
                    (false, Some(n)) => Answer::Object(n.clone()),
                    (false, None) => Answer::None,
                };
                ans(a, tri, BTreeSet::new())
            }
            LongestAction | ShortestAction => {
                let sign = if node.rule() == LongestAction { -1 } else { 1 };
                let best = k[0]
                    .act
                    .iter()
                    .map(|&i| (sign * self.duration(i), self.action_key(i), i))
                    .min()
                    .map(|(_, _, i)| i);
                Ok(self.one_action(best))
            }
            QuerySubjectRelation => {
                let first = k[0]
                    .tri
                    .iter()
                    .map(|&i| {
                        (
                            scene.triples()[i].frame,
                            scene.triples()[i].triple.object.clone(),
                        )
                    })
                    .min();
                match first {
                    Some((_, name)) => ans(
                        Answer::Object(name.clone()),
                        self.with_object(&k[0].tri, &name),
                        BTreeSet::new(),
                    ),
                    None => ans(Answer::None, BTreeSet::new(), BTreeSet::new()),
                }
            }
            Choose | Or => {
                let yes = [Self::binary(&k[0])?, Self::binary(&k[1])?];
                let picked = match yes {
                    [true, true] => return Err(OracleError::AmbiguousChoice),
                    [false, false] => return Err(OracleError::NoValidChoice),
                    [true, false] => 0,
                    [false, true] => 1,
                };
                let a = if node.rule() == Or {
                    Answer::Time(if picked == 0 {
                        TimeWord::After
                    } else {
                        TimeWord::Before
                    })
                } else {
                    let option = node.args()[picked].clone();
                    if self.vocab.has_object(&option) {
                        Answer::Object(option)
                    } else {
                        Answer::Action(option)
                    }
                };
                ans(a, k[picked].tri.clone(), k[picked].act.clone())
            }
            ChooseActionShorter | ChooseActionLonger => {
                let firsts: Vec<Option<usize>> = k
                    .iter()
                    .map(|v| v.act.iter().copied().min_by_key(|&i| self.action_key(i)))
                    .collect();
                let (Some(a), Some(b)) = (firsts[0], firsts[1]) else {
                    return Err(OracleError::NoValidChoice);
                };
                let sign = if node.rule() == ChooseActionLonger {
                    -1
                } else {
                    1
                };
                let best = [a, b]
                    .into_iter()
                    .map(|i| (sign * self.duration(i), self.action_key(i), i))
                    .min()
                    .map(|(_, _, i)| i);
                Ok(self.one_action(best))
            }
            ObjectEquals | ActionEquals => {
                let want_object = node.rule() == ObjectEquals;
                let mut names = Vec::new();
                for v in k {
                    match (&v.answer, want_object) {
                        (Some(Answer::Object(n)), true) | (Some(Answer::Action(n)), false) => {
                            names.push(Some(n))
                        }
                        (Some(Answer::None), _) => names.push(None),
                        _ => return Err(ill("expected a name child")),
                    }
                }
                let same = matches!((names[0], names[1]), (Some(a), Some(b)) if a == b);
                ans(
                    Answer::Binary(same),
                    k[0].tri.union(&k[1].tri).copied().collect(),
                    k[0].act.union(&k[1].act).copied().collect(),
                )
            }
            ConjunctionAnd | ConjunctionXor => {
                let (a, b) = (Self::binary(&k[0])?, Self::binary(&k[1])?);
                let v = if node.rule() == ConjunctionAnd {
                    a && b
                } else {
                    a ^ b
                };
                ans(
                    Answer::Binary(v),
                    k[0].tri.union(&k[1].tri).copied().collect(),
                    k[0].act.union(&k[1].act).copied().collect(),
                )
            }
            QueryFirst | QueryLast => {
                let first = node.rule() == QueryFirst;
                let child_type = node.children()[0].qtype();
                if child_type.is_action_valued() {
                    let mut idx: Vec<usize> = k[0].act.iter().copied().collect();
                    idx.sort_by(|&a, &b| self.action_key(a).cmp(&self.action_key(b)));
                    let pick = if first { idx.first() } else { idx.last() };
                    Ok(self.one_action(pick.copied()))
                } else {
                    let names = self.ranked_objects(&k[0].tri);
                    let pick = if first { names.first() } else { names.last() };
                    match pick {
                        Some(n) => ans(
                            Answer::Object(n.clone()),
                            self.with_object(&k[0].tri, n),
                            BTreeSet::new(),
                        ),
                        None => ans(Answer::None, BTreeSet::new(), BTreeSet::new()),
                    }
                }
            }
        }
    }
}
