//! Random valid scenes, template questions over them, and reference
//! answers from an independent brute-force oracle.
//!
//! Generation is a pure function of the config: scene `i` draws from its
//! own ChaCha stream `i` under the config seed, so scenes can be produced
//! in any order or in parallel.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oracle::{oracle_answer, OracleAnswer, OracleError, OracleOutcome};

use crate::metrics::{
    program_records, write_records, Fill, NodeOutcome, PredictionRecord, RecordAnswer,
};
use crate::program::{
    question_to_program, serialize_program, ProgramNode, QuestionInstance, QuestionType, Template,
    TEMPLATES,
};
use crate::rules::NONE_WORD;
use crate::scene::{
    ActionInstance, Frame, FrameTriple, NameKind, RelationTriple, SceneRepresentation, Vocabulary,
    PERSON,
};

/// Probability that a slot is filled from the whole vocabulary instead of
/// from the scene.
const OFF_SCENE_RATE: f64 = 0.2;
/// Probability that a new action instance repeats an earlier action name.
const REPEAT_RATE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// `questions_per_type` questions of every supported type.
    #[default]
    Uniform,
    /// Per-type counts scaled by a fixed skewed profile.
    Skewed,
}

/// An inclusive `[lo, hi]` range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
}

impl Span {
    pub const fn new(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    fn range(self) -> RangeInclusive<u32> {
        self.lo..=self.hi
    }

    fn draw(self, rng: &mut impl Rng) -> u32 {
        rng.gen_range(self.range())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub scenes: usize,
    pub frame_count: Span,
    pub objects_per_scene: Span,
    pub relations_per_frame: Span,
    /// Distinct relations a scene draws its triples from.
    pub relation_pool: Span,
    pub actions_per_scene: Span,
    pub questions_per_type: usize,
    /// Largest question depth a generated program may have.
    pub max_depth: usize,
    pub distribution: Distribution,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenes: 100,
            frame_count: Span::new(4, 16),
            objects_per_scene: Span::new(2, 6),
            relations_per_frame: Span::new(0, 3),
            relation_pool: Span::new(2, 5),
            actions_per_scene: Span::new(0, 5),
            questions_per_type: 1,
            max_depth: 4,
            distribution: Distribution::Uniform,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: empty range [{lo}, {hi}]")]
    EmptyRange {
        field: &'static str,
        lo: u32,
        hi: u32,
    },
    #[error("{field}: at most {available} available, {requested} requested")]
    Infeasible {
        field: &'static str,
        requested: u32,
        available: usize,
    },
    #[error("frame_count must start at 1 or more")]
    EmptyTimeline,
    #[error("max_depth must be at least 1")]
    Depth,
    #[error("config: {0}")]
    Format(String),
}

impl SynthConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: Self = serde_json::from_str(text).map_err(|e| ConfigError::Format(e.to_string()))?;
        Ok(c)
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), ConfigError> {
        let ranges = [
            ("frame_count", self.frame_count),
            ("objects_per_scene", self.objects_per_scene),
            ("relations_per_frame", self.relations_per_frame),
            ("relation_pool", self.relation_pool),
            ("actions_per_scene", self.actions_per_scene),
        ];
        for (field, s) in ranges {
            if s.lo > s.hi {
                return Err(ConfigError::EmptyRange {
                    field,
                    lo: s.lo,
                    hi: s.hi,
                });
            }
        }
        if self.frame_count.lo == 0 {
            return Err(ConfigError::EmptyTimeline);
        }
        if self.max_depth == 0 {
            return Err(ConfigError::Depth);
        }
        let limits = [
            (
                "objects_per_scene",
                self.objects_per_scene.hi,
                scene_objects(vocab).len(),
            ),
            (
                "relation_pool",
                self.relation_pool.hi,
                vocab.len(NameKind::Relation),
            ),
            (
                "actions_per_scene",
                self.actions_per_scene.hi,
                scene_actions(vocab).len(),
            ),
        ];
        for (field, requested, available) in limits {
            if requested as usize > available {
                return Err(ConfigError::Infeasible {
                    field,
                    requested,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// Objects a triple may point at: every object but the subject itself.
fn scene_objects(vocab: &Vocabulary) -> Vec<&str> {
    vocab.objects().filter(|o| *o != PERSON).collect()
}

/// Actions an instance may perform: the vocabulary lists the empty answer
/// among the actions, and it never names a real instance.
fn scene_actions(vocab: &Vocabulary) -> Vec<&str> {
    vocab.actions().filter(|a| *a != NONE_WORD).collect()
}

fn stream(config: &SynthConfig, scene_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(scene_index as u64);
    rng
}

/// Draws one valid scene. The config must have passed
/// [`SynthConfig::validate`].
pub fn generate_scene(
    config: &SynthConfig,
    vocab: &Vocabulary,
    rng: &mut impl Rng,
) -> SceneRepresentation {
    let t = config.frame_count.draw(rng);
    let all_objects = scene_objects(vocab);
    let relations: Vec<&str> = vocab.relations().collect();
    let n = config.objects_per_scene.draw(rng) as usize;
    let objects: Vec<&str> = all_objects.choose_multiple(rng, n).copied().collect();
    let n = config.relation_pool.draw(rng) as usize;
    let pool: Vec<&str> = relations.choose_multiple(rng, n).copied().collect();

    let mut triples: BTreeSet<(Frame, &str, &str)> = BTreeSet::new();
    if !objects.is_empty() && !pool.is_empty() {
        for f in 1..=t {
            for _ in 0..config.relations_per_frame.draw(rng) {
                let r = pool[rng.gen_range(0..pool.len())];
                let o = objects[rng.gen_range(0..objects.len())];
                triples.insert((f, r, o));
            }
        }
    }

    let action_names = scene_actions(vocab);
    let wanted = config.actions_per_scene.draw(rng) as usize;
    let fresh: Vec<&str> = action_names.choose_multiple(rng, wanted).copied().collect();
    let mut actions: Vec<ActionInstance> = Vec::new();
    for name in fresh {
        let mut a = ActionInstance::new(name, None, 1, 1);
        if let Some(prev) = actions.choose(rng).filter(|_| rng.gen_bool(REPEAT_RATE)) {
            a.action = prev.action.clone();
        }
        a.t_start = rng.gen_range(1..=t);
        a.t_end = rng.gen_range(a.t_start..=t);
        let object_of = |n: &str| vocab.object_of_action(n).filter(|o| *o != PERSON);
        a.object = object_of(&a.action).map(str::to_string);
        if actions.contains(&a) {
            a.action = name.to_string();
            a.object = object_of(name).map(str::to_string);
        }
        let object = object_of(&a.action);
        // Tie the acted-on object to the interval so temporal questions
        // have something to find.
        if let (Some(o), false) = (object, pool.is_empty()) {
            let r = pool[rng.gen_range(0..pool.len())];
            triples.insert((rng.gen_range(a.t_start..=a.t_end), r, o));
        }
        actions.push(a);
    }
    let triples = triples
        .into_iter()
        .map(|(frame, r, o)| FrameTriple {
            frame,
            triple: RelationTriple::new(PERSON, r, o),
        })
        .collect();
    SceneRepresentation::new(t, triples, actions)
}

/// Question depth of each template's program, independent of slot values.
static TEMPLATE_DEPTH: LazyLock<BTreeMap<String, usize>> = LazyLock::new(|| {
    let vocab = Vocabulary::default();
    TEMPLATES
        .iter()
        .map(|t| {
            let slots = t
                .slots
                .iter()
                .map(|s| {
                    let kind = Template::slot_kind(s).expect("slot kind");
                    let name = vocab.name(kind, 0).expect("nonempty vocabulary");
                    (s.clone(), name.to_string())
                })
                .collect();
            let q = QuestionInstance {
                category: t.category,
                template: t.id.clone(),
                slots,
            };
            let p = question_to_program(&q, &vocab).expect("templates compile");
            (t.id.clone(), p.question_depth())
        })
        .collect()
});

fn needs_two_instances(t: &Template) -> bool {
    matches!(
        t.id.as_str(),
        "longest-action"
            | "shortest-action"
            | "choose-shorter"
            | "choose-longer"
            | "equals-first-longest-action"
    )
}

/// Whether `scene` has what the template's preconditions ask for.
pub fn template_supported(t: &Template, scene: &SceneRepresentation, max_depth: usize) -> bool {
    let names: BTreeSet<&str> = scene.actions().iter().map(|a| a.action.as_str()).collect();
    let instances = scene.actions().len();
    TEMPLATE_DEPTH[&t.id] <= max_depth
        && (!t.uses_actions() || instances >= 1)
        && (!needs_two_instances(t) || instances >= 2)
        && names.len() >= t.action_slots()
}

/// Relative share of each type in skewed mode; the largest is 1.
fn skew_weight(t: QuestionType) -> f64 {
    use QuestionType as Q;
    match t {
        Q::Interaction | Q::ObjectExists | Q::RelationExists => 1.0,
        Q::InteractionTemporalLoc | Q::Object => 0.7,
        Q::ExistsTemporalLoc | Q::Action => 0.5,
        Q::ObjectTemporalLoc | Q::ActionTemporalLoc => 0.35,
        Q::Choose | Q::Conjunction => 0.25,
        Q::FirstLast | Q::Equals => 0.15,
        Q::LongestShortestAction => 0.1,
    }
}

fn count_for(config: &SynthConfig, t: QuestionType) -> usize {
    match config.distribution {
        Distribution::Uniform => config.questions_per_type,
        Distribution::Skewed => {
            (config.questions_per_type as f64 * skew_weight(t)).round() as usize
        }
    }
}

/// Questions drawn for one scene.
#[derive(Debug, Clone)]
pub struct QuestionBatch {
    pub questions: Vec<(QuestionInstance, ProgramNode)>,
    /// Types with no supported template on this scene.
    pub skipped: Vec<QuestionType>,
}

struct SlotSource<'a> {
    vocab: &'a Vocabulary,
    scene: &'a SceneRepresentation,
}

impl SlotSource<'_> {
    fn any(&self, kind: NameKind, rng: &mut impl Rng) -> String {
        let names: Vec<&str> = match kind {
            NameKind::Object => scene_objects(self.vocab),
            NameKind::Relation => self.vocab.relations().collect(),
            NameKind::Action => scene_actions(self.vocab),
        };
        names[rng.gen_range(0..names.len())].to_string()
    }

    /// A (relation, object) pair seen in the scene, with each part replaced
    /// by an arbitrary name now and then.
    fn pair(&self, rng: &mut impl Rng) -> (String, String) {
        let triples = self.scene.triples();
        let (mut r, mut o) = match triples.choose(rng) {
            Some(t) => (t.triple.relation.clone(), t.triple.object.clone()),
            None => (
                self.any(NameKind::Relation, rng),
                self.any(NameKind::Object, rng),
            ),
        };
        if rng.gen_bool(OFF_SCENE_RATE) {
            r = self.any(NameKind::Relation, rng);
        }
        if rng.gen_bool(OFF_SCENE_RATE) {
            o = self.any(NameKind::Object, rng);
        }
        (r, o)
    }

    fn fill(&self, t: &Template, rng: &mut impl Rng) -> BTreeMap<String, String> {
        let mut slots = BTreeMap::new();
        for suffix in ["", "2"] {
            let (r, o) = self.pair(rng);
            slots.insert(format!("rel{suffix}"), r);
            slots.insert(format!("obj{suffix}"), o);
        }
        // Two options of a choice should differ when they can.
        if slots["obj"] == slots["obj2"] {
            slots.insert("obj2".into(), self.any(NameKind::Object, rng));
        }
        let mut names: Vec<&str> = self
            .scene
            .actions()
            .iter()
            .map(|a| a.action.as_str())
            .collect();
        names.sort_unstable();
        names.dedup();
        let picked: Vec<&str> = names.choose_multiple(rng, 2).copied().collect();
        for (slot, name) in ["act", "act2"].into_iter().zip(picked) {
            slots.insert(slot.into(), name.to_string());
        }
        slots.retain(|k, _| t.slots.contains(k));
        slots
    }
}

/// Draws template questions for `scene`: per supported type, the configured
/// count, each from a uniformly chosen supported template.
pub fn generate_questions(
    scene: &SceneRepresentation,
    config: &SynthConfig,
    vocab: &Vocabulary,
    rng: &mut impl Rng,
) -> QuestionBatch {
    let source = SlotSource { vocab, scene };
    let mut questions = Vec::new();
    let mut skipped = Vec::new();
    for qtype in QuestionType::ALL {
        let usable: Vec<&Template> = TEMPLATES
            .iter()
            .filter(|t| t.category == qtype && template_supported(t, scene, config.max_depth))
            .collect();
        if usable.is_empty() {
            skipped.push(qtype);
            continue;
        }
        for _ in 0..count_for(config, qtype) {
            let t = usable[rng.gen_range(0..usable.len())];
            let q = QuestionInstance {
                category: qtype,
                template: t.id.clone(),
                slots: source.fill(t, rng),
            };
            let p = question_to_program(&q, vocab).expect("filled templates compile");
            questions.push((q, p));
        }
    }
    QuestionBatch { questions, skipped }
}

#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub scene_id: String,
    pub question: QuestionInstance,
    pub program: ProgramNode,
    pub oracle: OracleOutcome,
}

impl LabeledInstance {
    pub fn answer(&self) -> &OracleAnswer {
        &self.oracle.root
    }

    /// Per-node outcomes in post-order, for record building.
    pub fn node_outcomes(&self) -> Vec<NodeOutcome> {
        self.oracle
            .nodes
            .iter()
            .zip(&self.oracle.support)
            .map(|((_, a), s)| NodeOutcome {
                answer: a
                    .as_ref()
                    .map(RecordAnswer::from)
                    .map_err(|e| e.label().to_string()),
                support: s.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    /// Scenes by id, in generation order.
    pub scenes: Vec<(String, SceneRepresentation)>,
    pub instances: Vec<LabeledInstance>,
    /// Types skipped per scene id.
    pub skipped: BTreeMap<String, Vec<QuestionType>>,
}

pub fn scene_id(index: usize) -> String {
    format!("scene_{index:05}")
}

pub fn generate_corpus(config: &SynthConfig, vocab: &Vocabulary) -> Result<Corpus, ConfigError> {
    config.validate(vocab)?;
    let per_scene: Vec<_> = (0..config.scenes)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config, i);
            let scene = generate_scene(config, vocab, &mut rng);
            let batch = generate_questions(&scene, config, vocab, &mut rng);
            let id = scene_id(i);
            let instances: Vec<LabeledInstance> = batch
                .questions
                .into_iter()
                .map(|(question, program)| LabeledInstance {
                    scene_id: id.clone(),
                    oracle: oracle_answer(&program, &scene, vocab),
                    question,
                    program,
                })
                .collect();
            (id, scene, instances, batch.skipped)
        })
        .collect();
    let mut corpus = Corpus {
        scenes: Vec::new(),
        instances: Vec::new(),
        skipped: BTreeMap::new(),
    };
    for (id, scene, instances, skipped) in per_scene {
        if !skipped.is_empty() {
            corpus.skipped.insert(id.clone(), skipped);
        }
        corpus.scenes.push((id, scene));
        corpus.instances.extend(instances);
    }
    Ok(corpus)
}

impl Corpus {
    /// Ground-truth records for every instance; question numbers count up
    /// within each scene.
    pub fn records(&self) -> Vec<PredictionRecord> {
        let mut out = Vec::new();
        let mut next: BTreeMap<&str, usize> = BTreeMap::new();
        for inst in &self.instances {
            let n = next.entry(&inst.scene_id).or_insert(0);
            let mut recs = program_records(
                &inst.program,
                &inst.scene_id,
                *n,
                &inst.node_outcomes(),
                Fill::GroundTruth,
            );
            *n += 1;
            for r in &mut recs {
                r.scene = Some(format!("scenes/{}.json", inst.scene_id));
            }
            out.extend(recs);
        }
        out
    }

    /// Writes `scenes/<id>.json`, `programs/<id>.txt` (one program per
    /// line, in question order), `questions.tsv` and `manifest.jsonl`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("scenes"))?;
        fs::create_dir_all(dir.join("programs"))?;
        let mut programs: BTreeMap<&str, String> = BTreeMap::new();
        for (id, scene) in &self.scenes {
            fs::write(
                dir.join("scenes").join(format!("{id}.json")),
                scene.to_json() + "\n",
            )?;
            programs.insert(id, String::new());
        }
        let mut questions = String::new();
        for inst in &self.instances {
            let p = programs
                .get_mut(inst.scene_id.as_str())
                .expect("known scene");
            p.push_str(&serialize_program(&inst.program));
            p.push('\n');
            questions.push_str(&format!("{}\t{}\n", inst.scene_id, inst.question));
        }
        for (id, text) in programs {
            fs::write(dir.join("programs").join(format!("{id}.txt")), text)?;
        }
        fs::write(dir.join("questions.tsv"), questions)?;
        let mut w = BufWriter::new(fs::File::create(dir.join("manifest.jsonl"))?);
        write_records(&mut w, &self.records())?;
        w.flush()
    }
}
