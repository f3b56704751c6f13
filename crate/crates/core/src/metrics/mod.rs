//! Accuracy, compositional accuracy, right-for-the-wrong-reasons, delta and
//! internal consistency over prediction records, in exact rational
//! arithmetic.

mod consistency;
mod record;
mod report;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

pub use consistency::{default_consistency_rules, ConsistencyRule, Family, ParentAnswer};
pub use record::{
    program_records, question_id, read_records, write_records, Fill, NodeOutcome, PredictionRecord,
    RecordAnswer, RecordError, RecordSet,
};
pub use report::{format_rational, Fraction, MetricsReport};

use crate::program::QuestionType;
use crate::scene::Vocabulary;

/// A count of hits out of a total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub hits: u64,
    pub total: u64,
}

impl Ratio {
    pub fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += u64::from(hit);
    }

    /// `None` on an empty denominator.
    pub fn value(&self) -> Option<BigRational> {
        (self.total > 0)
            .then(|| BigRational::new(BigInt::from(self.hits), BigInt::from(self.total)))
    }
}

fn mean(values: impl IntoIterator<Item = BigRational>) -> Option<BigRational> {
    let mut sum = BigRational::zero();
    let mut n = 0u64;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / BigRational::from_integer(BigInt::from(n)))
}

/// Per-answer-balanced accuracy of one question type: the mean over
/// observed ground-truth answers of the accuracy on questions with that
/// answer. Records without ground truth are ignored.
pub fn accuracy(records: &[PredictionRecord], qtype: QuestionType) -> Option<BigRational> {
    let mut by_answer: BTreeMap<String, Ratio> = BTreeMap::new();
    for r in records.iter().filter(|r| r.qtype == qtype) {
        if let Some(g) = &r.ground_truth {
            let key = serde_json::to_string(g).expect("answer serializes");
            by_answer.entry(key).or_default().add(r.is_correct());
        }
    }
    mean(by_answer.values().filter_map(Ratio::value))
}

/// Unweighted mean of per-type accuracies over the types present.
pub fn overall_accuracy(records: &[PredictionRecord]) -> Option<BigRational> {
    mean(
        QuestionType::ALL
            .into_iter()
            .filter_map(|t| accuracy(records, t)),
    )
}

/// Compositional parents split by how many direct children were answered
/// wrongly. Keys are wrong-child counts; key 0 is the CA set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Composition {
    pub by_wrong_children: BTreeMap<usize, Ratio>,
}

impl Composition {
    pub fn ca(&self) -> Ratio {
        self.by_wrong_children.get(&0).copied().unwrap_or_default()
    }

    pub fn rwr(&self) -> Ratio {
        let mut r = Ratio::default();
        for v in self.by_wrong_children.range(1..).map(|(_, v)| v) {
            r.hits += v.hits;
            r.total += v.total;
        }
        r
    }

    pub fn rwr_n(&self, n: usize) -> Ratio {
        if n == 0 {
            return Ratio::default();
        }
        self.by_wrong_children.get(&n).copied().unwrap_or_default()
    }

    pub fn delta(&self) -> Option<BigRational> {
        Some(self.rwr().value()? - self.ca().value()?)
    }

    fn merge(&mut self, other: &Composition) {
        for (n, r) in &other.by_wrong_children {
            let e = self.by_wrong_children.entry(*n).or_default();
            e.hits += r.hits;
            e.total += r.total;
        }
    }
}

/// Whether a record belongs to the compositional set: it is compositional,
/// has children, and it and all its children carry ground truth.
fn resolvable(set: &RecordSet, i: usize) -> bool {
    let r = &set.records()[i];
    r.is_compositional
        && !r.children.is_empty()
        && r.ground_truth.is_some()
        && set.children_of(i).all(|c| c.ground_truth.is_some())
}

/// Composition tallies per parent question type.
pub fn compositions(set: &RecordSet) -> BTreeMap<QuestionType, Composition> {
    let mut out: BTreeMap<QuestionType, Composition> = BTreeMap::new();
    for (i, r) in set.records().iter().enumerate() {
        if !resolvable(set, i) {
            continue;
        }
        let wrong = set.children_of(i).filter(|c| !c.is_correct()).count();
        out.entry(r.qtype)
            .or_default()
            .by_wrong_children
            .entry(wrong)
            .or_default()
            .add(r.is_correct());
    }
    out
}

pub fn overall_composition(per_type: &BTreeMap<QuestionType, Composition>) -> Composition {
    let mut all = Composition::default();
    for c in per_type.values() {
        all.merge(c);
    }
    all
}

/// Satisfied checks out of all checks, per rule.
pub fn consistency_counts(
    set: &RecordSet,
    rules: &[ConsistencyRule],
    vocab: &Vocabulary,
) -> Vec<(ConsistencyRule, Ratio)> {
    let mut counts = vec![Ratio::default(); rules.len()];
    for (i, r) in set.records().iter().enumerate() {
        if !r.is_compositional {
            continue;
        }
        let children: Vec<&PredictionRecord> = set.children_of(i).collect();
        for (rule, count) in rules.iter().zip(counts.iter_mut()) {
            if let Some(checks) = rule.derive(r, &children, vocab) {
                for ok in checks {
                    count.add(ok);
                }
            }
        }
    }
    rules.iter().copied().zip(counts).collect()
}

/// Mean of per-rule consistency over rules with a nonzero denominator.
pub fn internal_consistency(counts: &[(ConsistencyRule, Ratio)]) -> Option<BigRational> {
    mean(counts.iter().filter_map(|(_, r)| r.value()))
}

/// All checks pooled across rules.
pub fn weighted_internal_consistency(counts: &[(ConsistencyRule, Ratio)]) -> Option<BigRational> {
    let mut pooled = Ratio::default();
    for (_, r) in counts {
        pooled.hits += r.hits;
        pooled.total += r.total;
    }
    pooled.value()
}

/// Question types present in the record set.
pub fn observed_types(records: &[PredictionRecord]) -> BTreeSet<QuestionType> {
    records.iter().map(|r| r.qtype).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn binary(id: &str, qtype: QuestionType, gt: &str, pred: &str) -> PredictionRecord {
        PredictionRecord {
            video_id: "v".into(),
            question_id: id.into(),
            qtype,
            is_compositional: false,
            children: vec![],
            ground_truth: Some(RecordAnswer::Single(gt.into())),
            predicted: Some(RecordAnswer::Single(pred.into())),
            rule: None,
            args: vec![],
            support: None,
            scene: None,
            program: None,
            node_key: None,
            error: None,
        }
    }

    #[test]
    fn balanced_accuracy() {
        let mut recs = Vec::new();
        for i in 0..10 {
            let pred = if i < 8 { "yes" } else { "no" };
            recs.push(binary(
                &format!("y{i}"),
                QuestionType::Interaction,
                "yes",
                pred,
            ));
            let pred = if i < 4 { "no" } else { "yes" };
            recs.push(binary(
                &format!("n{i}"),
                QuestionType::Interaction,
                "no",
                pred,
            ));
        }
        assert_eq!(
            accuracy(&recs, QuestionType::Interaction),
            Some(ratio(3, 5))
        );
        recs.push(binary("e", QuestionType::Equals, "yes", "yes"));
        assert_eq!(overall_accuracy(&recs), Some(ratio(4, 5)));
        assert_eq!(accuracy(&recs, QuestionType::Choose), None);
    }

    /// Four parents with (0, 1, 1, 2) wrong children; parents right, right,
    /// wrong, right.
    fn hand_fixture() -> RecordSet {
        let mut recs = Vec::new();
        let wrong = [0, 1, 1, 2];
        let parent_ok = [true, true, false, true];
        for p in 0..4 {
            let mut kids = Vec::new();
            for c in 0..2 {
                let id = format!("p{p}c{c}");
                let pred = if c < wrong[p] { "no" } else { "yes" };
                recs.push(binary(&id, QuestionType::Interaction, "yes", pred));
                kids.push(id);
            }
            let mut parent = binary(
                &format!("p{p}"),
                QuestionType::Conjunction,
                "yes",
                if parent_ok[p] { "yes" } else { "no" },
            );
            parent.is_compositional = true;
            parent.children = kids;
            recs.push(parent);
        }
        RecordSet::new(recs).unwrap()
    }

    #[test]
    fn hand_fixture_rates() {
        let all = overall_composition(&compositions(&hand_fixture()));
        assert_eq!(all.ca().value(), Some(ratio(1, 1)));
        assert_eq!(all.rwr().value(), Some(ratio(2, 3)));
        assert_eq!(all.rwr_n(1).value(), Some(ratio(1, 2)));
        assert_eq!(all.rwr_n(2).value(), Some(ratio(1, 1)));
        assert_eq!(all.delta(), Some(ratio(-1, 3)));
    }

    #[test]
    fn empty_sets_are_undefined() {
        let set = RecordSet::new(vec![]).unwrap();
        let all = overall_composition(&compositions(&set));
        assert_eq!(all.ca().value(), None);
        assert_eq!(all.delta(), None);
        let counts = consistency_counts(&set, &default_consistency_rules(), &Vocabulary::default());
        assert_eq!(internal_consistency(&counts), None);
    }

    #[test]
    fn rule_mean() {
        let rules = default_consistency_rules();
        let counts = vec![
            (rules[0], Ratio { hits: 2, total: 2 }),
            (rules[1], Ratio { hits: 1, total: 2 }),
            (rules[2], Ratio::default()),
        ];
        assert_eq!(internal_consistency(&counts), Some(ratio(3, 4)));
        assert_eq!(weighted_internal_consistency(&counts), Some(ratio(3, 4)));
    }
}
