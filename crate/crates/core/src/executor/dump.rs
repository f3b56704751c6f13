use serde::Serialize;

use super::ExecutionOutcome;
use crate::program::{NodeKey, QuestionType, RuleName};
use crate::rules::{Answer, Evidence, RuleError};

/// Human-readable trace: one line per node in execution order,
/// `step. key <TAB> rule <TAB> answer <TAB> evidence`. Failed nodes show
/// `error: ...` in the answer column.
pub fn trace_text(outcome: &ExecutionOutcome) -> String {
    let mut out = String::new();
    for (i, n) in outcome.nodes.iter().enumerate() {
        let (answer, evidence) = match (outcome.error_of(&n.key), outcome.trace.get(&n.key)) {
            (Some(e), _) => (format!("error: {e}"), "-".to_string()),
            (None, Some(r)) => (r.answer.text(), r.evidence.summary()),
            (None, None) => ("missing".to_string(), "-".to_string()),
        };
        out.push_str(&format!(
            "{}. {}\t{}\t{}\t{}\n",
            i + 1,
            n.key,
            n.rule,
            answer,
            evidence
        ));
    }
    out.push_str(&format!("answer: {}\n", outcome.root_answer));
    out
}

#[derive(Serialize)]
struct Entry<'a> {
    key: &'a NodeKey,
    rule: RuleName,
    qtype: QuestionType,
    internal: bool,
    children: &'a [NodeKey],
    #[serde(skip_serializing_if = "Option::is_none")]
    answer: Option<&'a Answer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evidence: Option<&'a Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a RuleError>,
}

#[derive(Serialize)]
struct Dump<'a> {
    root: &'a NodeKey,
    answer: &'a Answer,
    steps: Vec<Entry<'a>>,
}

/// Structured trace with the same rows as [`trace_text`].
pub fn trace_json(outcome: &ExecutionOutcome) -> String {
    let steps = outcome
        .nodes
        .iter()
        .map(|n| {
            let error = outcome.error_of(&n.key);
            let result = error.is_none().then(|| outcome.trace.get(&n.key)).flatten();
            Entry {
                key: &n.key,
                rule: n.rule,
                qtype: n.qtype,
                internal: n.internal,
                children: &n.children,
                answer: result.map(|r| &r.answer),
                evidence: result.map(|r| &r.evidence),
                error,
            }
        })
        .collect();
    serde_json::to_string_pretty(&Dump {
        root: &outcome.root,
        answer: &outcome.root_answer,
        steps,
    })
    .expect("trace serializes")
}

#[cfg(test)]
mod tests {
    use crate::executor::Executor;
    use crate::program::parse_program;
    use crate::scene::{SceneRepresentation, Vocabulary};

    #[test]
    fn text_and_json_rows_agree() {
        let v = Vocabulary::default();
        let p = parse_program("query_object(filter_object(scene, dish))", &v).unwrap();
        let out = Executor::new(&v).execute_fresh(&p, &SceneRepresentation::new(1, vec![], vec![]));
        let text = super::trace_text(&out);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().contains("\tno\t"));
        let json: serde_json::Value = serde_json::from_str(&super::trace_json(&out)).unwrap();
        assert_eq!(json["steps"].as_array().unwrap().len(), 2);
        assert_eq!(json["answer"]["kind"], "binary");
    }
}
