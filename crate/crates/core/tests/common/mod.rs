//! Helpers shared by the integration tests.
#![allow(dead_code)]

use stqa::executor::{ExecutionOutcome, Executor};
use stqa::rules::{Answer, RuleError};
use stqa::scene::Vocabulary;
use stqa::synth::{
    generate_corpus, Corpus, Distribution, LabeledInstance, OracleAnswer, OracleError, SynthConfig,
};

/// Comparable form of a node result: the answer, or an error class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Answer(Answer),
    Ambiguous,
    NoValid,
    Propagated,
    IllTyped,
}

pub fn from_oracle(a: &OracleAnswer) -> Outcome {
    match a {
        Ok(a) => Outcome::Answer(a.clone()),
        Err(OracleError::AmbiguousChoice) => Outcome::Ambiguous,
        Err(OracleError::NoValidChoice) => Outcome::NoValid,
        Err(OracleError::Propagated) => Outcome::Propagated,
        Err(OracleError::IllTyped(_)) => Outcome::IllTyped,
    }
}

pub fn from_executor(out: &ExecutionOutcome, i: usize) -> Outcome {
    let key = &out.nodes[i].key;
    match out.error_of(key) {
        None => Outcome::Answer(out.trace[key].answer.clone()),
        Some(RuleError::AmbiguousChoice) => Outcome::Ambiguous,
        Some(RuleError::NoValidChoice) => Outcome::NoValid,
        Some(RuleError::Propagated { .. }) => Outcome::Propagated,
        Some(_) => Outcome::IllTyped,
    }
}

/// First node where executor and oracle disagree, as (index, executor,
/// oracle).
pub fn first_mismatch(
    inst: &LabeledInstance,
    corpus: &Corpus,
    vocab: &Vocabulary,
) -> Option<(usize, Outcome, Outcome)> {
    let scene = &corpus
        .scenes
        .iter()
        .find(|(id, _)| *id == inst.scene_id)
        .expect("scene")
        .1;
    let out = Executor::new(vocab).execute_fresh(&inst.program, scene);
    assert_eq!(out.nodes.len(), inst.oracle.nodes.len());
    (0..out.nodes.len()).find_map(|i| {
        let (e, o) = (from_executor(&out, i), from_oracle(&inst.oracle.nodes[i].1));
        (e != o).then_some((i, e, o))
    })
}

/// The corpus the acceptance checks run on: uniform, fixed seed.
pub fn acceptance_config() -> SynthConfig {
    SynthConfig {
        seed: 20240601,
        scenes: 800,
        questions_per_type: 1,
        distribution: Distribution::Uniform,
        ..SynthConfig::default()
    }
}

pub fn acceptance_corpus(vocab: &Vocabulary) -> Corpus {
    generate_corpus(&acceptance_config(), vocab).expect("valid config")
}

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[derive(Debug, serde::Deserialize)]
pub struct ExtraNames {
    #[serde(default)]
    pub objects: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub actions: Vec<String>,
}

/// One program over a figure scene. `steps` lists `(rule, answer text)`
/// per node in post-order; failed nodes read `error:<label>`.
#[derive(Debug, serde::Deserialize)]
pub struct FigureCase {
    #[serde(default)]
    pub label: Option<String>,
    pub program: String,
    pub answer: String,
    #[serde(default)]
    pub steps: Vec<(String, String)>,
}

#[derive(Debug, serde::Deserialize)]
pub struct Figure {
    pub figure: String,
    pub question: String,
    pub extra: ExtraNames,
    pub scene: serde_json::Value,
    pub cases: Vec<FigureCase>,
}

impl Figure {
    pub fn vocab(&self) -> Vocabulary {
        fn s(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        Vocabulary::default()
            .extended(
                &s(&self.extra.objects),
                &s(&self.extra.relations),
                &s(&self.extra.actions),
            )
            .expect("extended vocabulary")
    }

    pub fn scene(&self) -> stqa::scene::SceneRepresentation {
        stqa::scene::SceneRepresentation::from_json(&self.scene.to_string()).expect("figure scene")
    }
}

/// All figure fixtures, sorted by file name.
pub fn figures() -> Vec<(String, Figure)> {
    let mut paths: Vec<_> = std::fs::read_dir(fixtures_dir().join("figures"))
        .expect("figures dir")
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let fig = serde_json::from_str(&std::fs::read_to_string(&p).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, fig)
        })
        .collect()
}

/// `(rule, answer text)` per node, as in a figure's `steps`.
pub fn steps_of(out: &ExecutionOutcome) -> Vec<(String, String)> {
    out.nodes
        .iter()
        .map(|n| {
            let text = match out.error_of(&n.key) {
                Some(e) => format!("error:{}", e.label()),
                None => out.trace[&n.key].answer.text(),
            };
            (n.rule.to_string(), text)
        })
        .collect()
}

/// Mismatches between a figure's expectations and the executor, one line
/// each; empty when the figure is reproduced.
pub fn check_figure(fig: &Figure) -> Vec<String> {
    let vocab = fig.vocab();
    let scene = fig.scene();
    let report = stqa::scene::validate_scene(&scene, &vocab);
    let mut problems = Vec::new();
    if !report.is_valid() {
        problems.push(format!("scene invalid: {report:?}"));
    }
    for case in &fig.cases {
        let name = case.label.as_deref().unwrap_or(&case.program);
        let program = match stqa::program::parse_program(&case.program, &vocab) {
            Ok(p) => p,
            Err(e) => {
                problems.push(format!("{name}: parse error {e}"));
                continue;
            }
        };
        let out = Executor::new(&vocab).execute_fresh(&program, &scene);
        if out.root_answer.text() != case.answer {
            problems.push(format!(
                "{name}: answer {} != {}",
                out.root_answer.text(),
                case.answer
            ));
        }
        let steps = steps_of(&out);
        if !case.steps.is_empty() && steps != case.steps {
            problems.push(format!("{name}: steps {steps:?} != {:?}", case.steps));
        }
    }
    problems
}
