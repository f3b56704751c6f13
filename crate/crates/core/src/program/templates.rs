//! Closed template grammar mapping question instances to programs.
//!
//! Each template pairs an English pattern with a program pattern; both use
//! `{slot}` placeholders. Slot names fix their vocabulary kind by prefix:
//! `obj*` objects, `rel*` relations, `act*` actions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::{parse_program, quote_literal, Localizer, ProgramError, ProgramNode, QuestionType};
use crate::scene::{NameKind, Vocabulary};

#[derive(Debug, Clone)]
pub struct Template {
    pub id: String,
    pub category: QuestionType,
    pub english: String,
    pub program: String,
    /// Slot names in first-appearance order.
    pub slots: Vec<String>,
}

impl Template {
    fn new(id: &str, category: QuestionType, english: &str, program: &str) -> Self {
        Self {
            id: id.to_string(),
            category,
            english: english.to_string(),
            program: program.to_string(),
            slots: placeholders(program),
        }
    }

    pub fn slot_kind(slot: &str) -> Option<NameKind> {
        if slot.starts_with("obj") {
            Some(NameKind::Object)
        } else if slot.starts_with("rel") {
            Some(NameKind::Relation)
        } else if slot.starts_with("act") {
            Some(NameKind::Action)
        } else {
            None
        }
    }

    /// Number of action slots plus whether the program reads the scene's
    /// action list at all.
    pub fn action_slots(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| Self::slot_kind(s) == Some(NameKind::Action))
            .count()
    }

    pub fn uses_actions(&self) -> bool {
        self.program.contains("filter_actions")
    }

    pub fn render(&self, slots: &BTreeMap<String, String>) -> String {
        substitute(&self.english, slots, |v| v.to_string())
    }

    pub fn lookup(id: &str) -> Option<&'static Template> {
        TEMPLATES.iter().find(|t| t.id == id)
    }
}

fn placeholders(pattern: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').expect("balanced placeholder") + open;
        let name = &rest[open + 1..close];
        if !out.iter().any(|s| s == name) {
            out.push(name.to_string());
        }
        rest = &rest[close + 1..];
    }
    out
}

fn substitute(
    pattern: &str,
    slots: &BTreeMap<String, String>,
    encode: impl Fn(&str) -> String,
) -> String {
    let mut out = pattern.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), &encode(value));
    }
    out
}

const INT: &str = "query_interaction(filter_relation(scene, {rel}), filter_object(scene, {obj}))";
const INT2: &str =
    "query_interaction(filter_relation(scene, {rel2}), filter_object(scene, {obj2}))";
const REL: &str = "query_relation(filter_relation(scene, {rel}))";
const REL2: &str = "query_relation(filter_relation(scene, {rel2}))";
const ACT: &str = "filter_actions(scene, {act})";
const ACT2: &str = "filter_actions(scene, {act2})";

pub static TEMPLATES: LazyLock<Vec<Template>> = LazyLock::new(build_templates);

fn build_templates() -> Vec<Template> {
    use QuestionType as Q;
    let mut t = vec![
        Template::new(
            "object-exists",
            Q::ObjectExists,
            "Is there a {obj} in the video?",
            "query_object(filter_object(scene, {obj}))",
        ),
        Template::new(
            "relation-exists",
            Q::RelationExists,
            "Are they {rel} something?",
            "query_relation(filter_relation(scene, {rel}))",
        ),
        Template::new("interaction", Q::Interaction, "Are they {rel} the {obj}?", INT),
        Template::new(
            "interaction-decomposed",
            Q::Interaction,
            "Is the {obj} something they are {rel}?",
            "query_interaction(query_relation(filter_relation(scene, {rel})), query_object(filter_object(scene, {obj})))",
        ),
    ];

    for loc in [Localizer::After, Localizer::Before, Localizer::While] {
        let l = loc.as_str();
        let it = format!("interaction_temporal_{l}");
        let ot = format!("objects_{l}");
        t.push(Template::new(
            &format!("interaction-{l}-action"),
            Q::InteractionTemporalLoc,
            &format!("Were they {{rel}} the {{obj}} {l} {{act}}?"),
            &format!("{it}({INT}, {ACT})"),
        ));
        t.push(Template::new(
            &format!("interaction-{l}-interaction"),
            Q::InteractionTemporalLoc,
            &format!("Were they {{rel}} the {{obj}} {l} {{rel2}} the {{obj2}}?"),
            &format!("{it}({INT}, {INT2})"),
        ));
        t.push(Template::new(
            &format!("exists-{l}-action"),
            Q::ExistsTemporalLoc,
            &format!("Is there a {{obj}} {l} {{act}}?"),
            &format!("{it}(query_object(filter_object(scene, {{obj}})), {ACT})"),
        ));
        t.push(Template::new(
            &format!("object-{l}-action"),
            Q::ObjectTemporalLoc,
            &format!("What were they {{rel}} {l} {{act}}?"),
            &format!("{ot}({REL}, {ACT})"),
        ));
        t.push(Template::new(
            &format!("object-{l}-interaction"),
            Q::ObjectTemporalLoc,
            &format!("What were they {{rel}} {l} {{rel2}} the {{obj2}}?"),
            &format!("{ot}({REL}, {INT2})"),
        ));
    }
    t.push(Template::new(
        "interaction-between-actions",
        Q::InteractionTemporalLoc,
        "Were they {rel} the {obj} between {act} and {act2}?",
        &format!("interaction_temporal_between({INT}, {ACT}, {ACT2})"),
    ));
    t.push(Template::new(
        "exists-between-actions",
        Q::ExistsTemporalLoc,
        "Is there a {obj} between {act} and {act2}?",
        &format!("interaction_temporal_between(query_object(filter_object(scene, {{obj}})), {ACT}, {ACT2})"),
    ));
    t.push(Template::new(
        "object-between-actions",
        Q::ObjectTemporalLoc,
        "What were they {rel} between {act} and {act2}?",
        &format!("objects_between({REL}, {ACT}, {ACT2})"),
    ));

    for dir in ["after", "before"] {
        t.push(Template::new(
            &format!("action-{dir}-interaction"),
            Q::ActionTemporalLoc,
            &format!("What did they do {dir} {{rel}} the {{obj}}?"),
            &format!("actions_{dir}({INT})"),
        ));
        t.push(Template::new(
            &format!("action-{dir}-action"),
            Q::ActionTemporalLoc,
            &format!("What did they do {dir} {{act}}?"),
            &format!("actions_{dir}({ACT})"),
        ));
    }

    t.extend([
        Template::new(
            "longest-action",
            Q::LongestShortestAction,
            "What did they spend the longest time doing?",
            "longest_action(filter_actions(scene))",
        ),
        Template::new(
            "shortest-action",
            Q::LongestShortestAction,
            "What did they spend the shortest time doing?",
            "shortest_action(filter_actions(scene))",
        ),
        Template::new("actions", Q::Action, "What are they doing?", "filter_actions(scene)"),
        Template::new("action-named", Q::Action, "When are they {act}?", ACT),
        Template::new(
            "object-relation",
            Q::Object,
            "What were they {rel}?",
            &format!("query_subject_relation({REL})"),
        ),
        Template::new(
            "choose-object",
            Q::Choose,
            "Were they {rel} a {obj} or a {obj2}?",
            "choose(query_interaction(filter_relation(scene, {rel}), filter_object(scene, {obj})), \
             query_interaction(filter_relation(scene, {rel}), filter_object(scene, {obj2})), {obj}, {obj2})",
        ),
        Template::new(
            "choose-action",
            Q::Choose,
            "While {rel} the {obj}, were they {act} or {act2}?",
            &format!(
                "choose(interaction_temporal_while({INT}, {ACT}), interaction_temporal_while({INT}, {ACT2}), {{act}}, {{act2}})"
            ),
        ),
        Template::new(
            "choose-time",
            Q::Choose,
            "Were they {rel} the {obj} after or before {act}?",
            &format!("or(interaction_temporal_after({INT}, {ACT}), interaction_temporal_before({INT}, {ACT}))"),
        ),
        Template::new(
            "choose-shorter",
            Q::Choose,
            "Which did they do for less time, {act} or {act2}?",
            &format!("choose_action_shorter({ACT}, {ACT2})"),
        ),
        Template::new(
            "choose-longer",
            Q::Choose,
            "Which did they do for more time, {act} or {act2}?",
            &format!("choose_action_longer({ACT}, {ACT2})"),
        ),
        Template::new(
            "equals-first-last-object",
            Q::Equals,
            "Is the first thing they were {rel} the same as the last thing they were {rel2}?",
            &format!("object_equals(query_first({REL}), query_last({REL2}))"),
        ),
        Template::new(
            "equals-object-after-before",
            Q::Equals,
            "Is what they were {rel} after {act} the same as what they were {rel2} before {act2}?",
            &format!("object_equals(objects_after({REL}, {ACT}), objects_before({REL2}, {ACT2}))"),
        ),
        Template::new(
            "equals-first-longest-action",
            Q::Equals,
            "Is the first thing they did also what they did longest?",
            "action_equals(query_first(filter_actions(scene)), longest_action(filter_actions(scene)))",
        ),
        Template::new(
            "equals-action-after-before",
            Q::Equals,
            "Is what they did after {rel} the {obj} the same as what they did before {rel2} the {obj2}?",
            &format!("action_equals(actions_after({INT}), actions_before({INT2}))"),
        ),
        Template::new(
            "and",
            Q::Conjunction,
            "Were they {rel} the {obj} and {rel2} the {obj2}?",
            &format!("conjunction_and({INT}, {INT2})"),
        ),
        Template::new(
            "xor",
            Q::Conjunction,
            "Were they {rel} the {obj} or {rel2} the {obj2}, but not both?",
            &format!("conjunction_xor({INT}, {INT2})"),
        ),
        Template::new(
            "first-object",
            Q::FirstLast,
            "What were they {rel} first?",
            &format!("query_first({REL})"),
        ),
        Template::new(
            "last-object",
            Q::FirstLast,
            "What were they {rel} last?",
            &format!("query_last({REL})"),
        ),
        Template::new(
            "first-action",
            Q::FirstLast,
            "What did they do first?",
            "query_first(filter_actions(scene))",
        ),
        Template::new(
            "last-action",
            Q::FirstLast,
            "What did they do last?",
            "query_last(filter_actions(scene))",
        ),
    ]);
    t
}

/// A question written as a filled template: category, template id and slot
/// values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuestionInstance {
    pub category: QuestionType,
    pub template: String,
    pub slots: BTreeMap<String, String>,
}

impl QuestionInstance {
    pub fn new(category: QuestionType, template: &str, slots: &[(&str, &str)]) -> Self {
        Self {
            category,
            template: template.to_string(),
            slots: slots
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn english(&self) -> Option<String> {
        Template::lookup(&self.template).map(|t| t.render(&self.slots))
    }
}

/// `CATEGORY<TAB>template-id<TAB>slot=value;slot=value`
impl fmt::Display for QuestionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots: Vec<String> = self.slots.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(
            f,
            "{}\t{}\t{}",
            self.category,
            self.template,
            slots.join(";")
        )
    }
}

impl FromStr for QuestionInstance {
    type Err = ProgramError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.split('\t');
        let (Some(cat), Some(template)) = (fields.next(), fields.next()) else {
            return Err(ProgramError::NoTemplate(line.to_string()));
        };
        let slot_field = fields.next().unwrap_or("");
        if fields.next().is_some() {
            return Err(ProgramError::NoTemplate(line.to_string()));
        }
        let mut slots = BTreeMap::new();
        for pair in slot_field.split(';').filter(|s| !s.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| ProgramError::Slot {
                template: template.to_string(),
                message: format!("malformed slot {pair:?}"),
            })?;
            slots.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            category: cat.trim().parse()?,
            template: template.trim().to_string(),
            slots,
        })
    }
}

/// Compiles a template instance to its program. Deterministic; the result's
/// question type is the template's category.
pub fn question_to_program(
    question: &QuestionInstance,
    vocab: &Vocabulary,
) -> Result<ProgramNode, ProgramError> {
    let template = Template::lookup(&question.template)
        .filter(|t| t.category == question.category)
        .ok_or_else(|| {
            ProgramError::NoTemplate(format!("{} / {}", question.category, question.template))
        })?;
    let slot_err = |message: String| ProgramError::Slot {
        template: template.id.clone(),
        message,
    };
    for name in question.slots.keys() {
        if !template.slots.contains(name) {
            return Err(slot_err(format!("unexpected slot {name:?}")));
        }
    }
    for name in &template.slots {
        let value = question
            .slots
            .get(name)
            .ok_or_else(|| slot_err(format!("missing slot {name:?}")))?;
        let kind = Template::slot_kind(name).expect("template slot names carry a kind prefix");
        if !vocab.contains(kind, value) {
            return Err(slot_err(format!("{value:?} is not a known {kind}")));
        }
    }
    let text = substitute(&template.program, &question.slots, quote_literal);
    let node = parse_program(&text, vocab)?;
    debug_assert_eq!(node.qtype(), template.category);
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{serialize_program, RuleName};

    fn sample_slots(t: &Template, vocab: &Vocabulary) -> BTreeMap<String, String> {
        t.slots
            .iter()
            .map(|s| {
                let v = match Template::slot_kind(s).unwrap() {
                    NameKind::Object => vocab.objects().nth(1 + s.len() % 3).unwrap(),
                    NameKind::Relation => vocab.relations().nth(s.len() % 5).unwrap(),
                    NameKind::Action => vocab.actions().nth(s.len() % 7).unwrap(),
                };
                (s.clone(), v.to_string())
            })
            .collect()
    }

    #[test]
    fn every_template_compiles_to_its_category() {
        let vocab = Vocabulary::default();
        let mut covered = std::collections::BTreeSet::new();
        for t in TEMPLATES.iter() {
            let q = QuestionInstance {
                category: t.category,
                template: t.id.clone(),
                slots: sample_slots(t, &vocab),
            };
            let node = question_to_program(&q, &vocab).unwrap_or_else(|e| panic!("{}: {e}", t.id));
            assert_eq!(node.qtype(), t.category, "{}", t.id);
            covered.insert(t.category);
            assert!(!t.render(&q.slots).contains('{'), "{}", t.id);
        }
        assert_eq!(covered.len(), 14);
    }

    #[test]
    fn template_ids_unique() {
        let ids: std::collections::BTreeSet<_> = TEMPLATES.iter().map(|t| &t.id).collect();
        assert_eq!(ids.len(), TEMPLATES.len());
    }

    #[test]
    fn interaction_template() {
        let vocab = Vocabulary::default();
        let q = QuestionInstance::new(
            QuestionType::Interaction,
            "interaction",
            &[("rel", "taking"), ("obj", "blanket")],
        );
        let n = question_to_program(&q, &vocab).unwrap();
        assert_eq!(n.rule(), RuleName::QueryInteraction);
        assert_eq!(n.children()[0].rule(), RuleName::FilterRelation);
        assert_eq!(n.children()[1].rule(), RuleName::FilterObject);
        assert_eq!(
            serialize_program(&n),
            "query_interaction(filter_relation(scene, taking), filter_object(scene, blanket))"
        );
    }

    #[test]
    fn degenerate_xor_is_accepted() {
        let vocab = Vocabulary::default();
        let q = QuestionInstance::new(
            QuestionType::Conjunction,
            "xor",
            &[
                ("rel", "holding"),
                ("obj", "dish"),
                ("rel2", "holding"),
                ("obj2", "dish"),
            ],
        );
        let n = question_to_program(&q, &vocab).unwrap();
        assert_eq!(n.children()[0], n.children()[1]);
    }

    #[test]
    fn no_match_and_bad_slots() {
        let vocab = Vocabulary::default();
        let free: Result<QuestionInstance, _> = "Is the person happy?".parse();
        assert!(free.is_err());
        let wrong_cat = QuestionInstance::new(QuestionType::Equals, "interaction", &[]);
        assert!(matches!(
            question_to_program(&wrong_cat, &vocab),
            Err(ProgramError::NoTemplate(_))
        ));
        let unknown = QuestionInstance::new(QuestionType::Interaction, "telepathy", &[]);
        assert!(matches!(
            question_to_program(&unknown, &vocab),
            Err(ProgramError::NoTemplate(_))
        ));
        let bad_value = QuestionInstance::new(
            QuestionType::Interaction,
            "interaction",
            &[("rel", "levitating"), ("obj", "blanket")],
        );
        assert!(matches!(
            question_to_program(&bad_value, &vocab),
            Err(ProgramError::Slot { .. })
        ));
        let missing = QuestionInstance::new(
            QuestionType::Interaction,
            "interaction",
            &[("rel", "holding")],
        );
        assert!(question_to_program(&missing, &vocab).is_err());
    }

    #[test]
    fn line_format_round_trip() {
        let q = QuestionInstance::new(
            QuestionType::InteractionTemporalLoc,
            "interaction-after-action",
            &[
                ("rel", "sitting on"),
                ("obj", "chair"),
                ("act", "holding a blanket"),
            ],
        );
        let line = q.to_string();
        assert_eq!(
            line,
            "InteractionTemporalLoc\tinteraction-after-action\tact=holding a blanket;obj=chair;rel=sitting on"
        );
        assert_eq!(line.parse::<QuestionInstance>().unwrap(), q);
    }

    #[test]
    fn distinct_fillings_distinct_trees() {
        let vocab = Vocabulary::default();
        let a = QuestionInstance::new(
            QuestionType::Interaction,
            "interaction",
            &[("rel", "holding"), ("obj", "dish")],
        );
        let b = QuestionInstance::new(
            QuestionType::Interaction,
            "interaction",
            &[("rel", "holding"), ("obj", "box")],
        );
        assert_ne!(
            question_to_program(&a, &vocab).unwrap(),
            question_to_program(&b, &vocab).unwrap()
        );
    }
}
