use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{
    accuracy, compositions, consistency_counts, internal_consistency, overall_accuracy,
    overall_composition, weighted_internal_consistency, Composition, ConsistencyRule, Ratio,
    RecordSet,
};
use crate::program::QuestionType;
use crate::scene::Vocabulary;

const RWR_COLUMNS: usize = 5;

/// Rounds half away from zero to `places` decimals.
pub fn format_rational(r: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let two = BigInt::from(2);
    let twice = r.numer().abs() * &scale * &two + r.denom();
    let scaled = twice / (r.denom() * &two);
    let sign = if r.is_negative() && !scaled.is_zero() {
        "-"
    } else {
        ""
    };
    let (int, frac) = (&scaled / &scale, &scaled % &scale);
    if places == 0 {
        return format!("{sign}{int}");
    }
    format!(
        "{sign}{int}.{:0>width$}",
        frac.to_string(),
        width = places as usize
    )
}

/// An exact rate with its decimal approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fraction {
    /// `numerator/denominator` in lowest terms.
    pub exact: String,
    pub value: f64,
}

impl Fraction {
    fn new(r: &BigRational) -> Self {
        Self {
            exact: format!("{}/{}", r.numer(), r.denom()),
            value: r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

fn frac(r: Option<BigRational>) -> Option<Fraction> {
    r.as_ref().map(Fraction::new)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRow {
    /// `None` for the overall row.
    pub qtype: Option<QuestionType>,
    pub ca: Option<Fraction>,
    pub rwr: Option<Fraction>,
    pub delta: Option<Fraction>,
    pub ic: Option<Fraction>,
    pub rwr_n: BTreeMap<usize, Option<Fraction>>,
    pub s_ca: u64,
    pub s_rwr: u64,
    pub s_rwr_n: BTreeMap<usize, u64>,
}

impl CompositionRow {
    fn new(qtype: Option<QuestionType>, c: &Composition, ic: Option<BigRational>) -> Self {
        let top = c
            .by_wrong_children
            .keys()
            .copied()
            .max()
            .unwrap_or(0)
            .max(RWR_COLUMNS);
        Self {
            qtype,
            ca: frac(c.ca().value()),
            rwr: frac(c.rwr().value()),
            delta: frac(c.delta()),
            ic: frac(ic),
            rwr_n: (1..=top).map(|n| (n, frac(c.rwr_n(n).value()))).collect(),
            s_ca: c.ca().total,
            s_rwr: c.rwr().total,
            s_rwr_n: (1..=top).map(|n| (n, c.rwr_n(n).total)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub rule: ConsistencyRule,
    pub label: String,
    pub ic: Option<Fraction>,
    pub satisfied: u64,
    pub checks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub records: usize,
    pub accuracy: BTreeMap<QuestionType, Option<Fraction>>,
    pub overall_accuracy: Option<Fraction>,
    pub compositions: Vec<CompositionRow>,
    pub overall: CompositionRow,
    pub consistency: Vec<ConsistencyRow>,
    /// Mean over rules, or pooled over checks when `ic_weighted` is set.
    pub ic: Option<Fraction>,
    pub ic_weighted: bool,
}

impl MetricsReport {
    pub fn compute(
        set: &RecordSet,
        rules: &[ConsistencyRule],
        vocab: &Vocabulary,
        ic_weighted: bool,
    ) -> Self {
        let records = set.records();
        let counts = consistency_counts(set, rules, vocab);
        let pooled = |c: &[(ConsistencyRule, Ratio)]| {
            if ic_weighted {
                weighted_internal_consistency(c)
            } else {
                internal_consistency(c)
            }
        };
        let ic_of = |t: QuestionType| {
            let sub: Vec<_> = counts
                .iter()
                .filter(|(r, _)| r.family.parent_type() == t)
                .cloned()
                .collect();
            pooled(&sub)
        };
        let per_type = compositions(set);
        let compositions_rows = per_type
            .iter()
            .map(|(t, c)| CompositionRow::new(Some(*t), c, ic_of(*t)))
            .collect();
        let overall_ic = pooled(&counts);
        Self {
            records: records.len(),
            accuracy: QuestionType::ALL
                .into_iter()
                .map(|t| (t, frac(accuracy(records, t))))
                .collect(),
            overall_accuracy: frac(overall_accuracy(records)),
            compositions: compositions_rows,
            overall: CompositionRow::new(None, &overall_composition(&per_type), overall_ic.clone()),
            consistency: counts
                .iter()
                .map(|(rule, r)| ConsistencyRow {
                    rule: *rule,
                    label: rule.to_string(),
                    ic: frac(r.value()),
                    satisfied: r.hits,
                    checks: r.total,
                })
                .collect(),
            ic: frac(overall_ic),
            ic_weighted,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text tables: accuracy per type, compositional metrics per
    /// type, and consistency per rule. Empty denominators print `N/A`.
    pub fn table(&self) -> String {
        let cell = |f: &Option<Fraction>| match f {
            Some(f) => {
                let (n, d) = f.exact.split_once('/').expect("exact fraction");
                let r = BigRational::new(
                    n.parse().expect("numerator"),
                    d.parse().expect("denominator"),
                );
                format_rational(&r, 2)
            }
            None => "N/A".to_string(),
        };
        let mut out = String::new();
        let _ = writeln!(out, "Accuracy ({} records)", self.records);
        let _ = writeln!(out, "{:<24} {:>8}", "Question type", "Acc");
        for (t, a) in &self.accuracy {
            let _ = writeln!(out, "{:<24} {:>8}", t.as_str(), cell(a));
        }
        let _ = writeln!(out, "{:<24} {:>8}", "Overall", cell(&self.overall_accuracy));
        out.push('\n');

        let _ = write!(
            out,
            "{:<24} {:>6} {:>6} {:>6} {:>6}",
            "Composition", "CA", "RWR", "Delta", "IC"
        );
        for n in 1..=RWR_COLUMNS {
            let _ = write!(out, " {:>6}", format!("RWR-{n}"));
        }
        out.push('\n');
        for row in self
            .compositions
            .iter()
            .chain(std::iter::once(&self.overall))
        {
            let name = row.qtype.map_or("Overall", QuestionType::as_str);
            let _ = write!(
                out,
                "{:<24} {:>6} {:>6} {:>6} {:>6}",
                name,
                cell(&row.ca),
                cell(&row.rwr),
                cell(&row.delta),
                cell(&row.ic)
            );
            for n in 1..=RWR_COLUMNS {
                let _ = write!(out, " {:>6}", cell(row.rwr_n.get(&n).unwrap_or(&None)));
            }
            out.push('\n');
        }
        out.push('\n');

        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>8}",
            "Consistency check", "IC", "checks"
        );
        for row in &self.consistency {
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>8}",
                row.label,
                cell(&row.ic),
                row.checks
            );
        }
        let mode = if self.ic_weighted {
            "Overall (pooled)"
        } else {
            "Overall"
        };
        let _ = writeln!(out, "{:<24} {:>8}", mode, cell(&self.ic));
        out
    }
}
