mod common;

use proptest::prelude::*;

use stqa::executor::Executor;
use stqa::metrics::{program_records, read_records, write_records, Fill};
use stqa::program::{parse_program, serialize_program};
use stqa::scene::{validate_scene, SceneRepresentation, Vocabulary};
use stqa::synth::{generate_corpus, Corpus, Distribution, Span, SynthConfig};

fn small_corpus(seed: u64, frames: u32, actions: u32, skewed: bool) -> Corpus {
    let config = SynthConfig {
        seed,
        scenes: 3,
        frame_count: Span::new(1, frames),
        actions_per_scene: Span::new(0, actions),
        distribution: if skewed {
            Distribution::Skewed
        } else {
            Distribution::Uniform
        },
        ..SynthConfig::default()
    };
    generate_corpus(&config, &Vocabulary::default()).expect("valid config")
}

fn scene<'c>(corpus: &'c Corpus, id: &str) -> &'c SceneRepresentation {
    &corpus
        .scenes
        .iter()
        .find(|(s, _)| s == id)
        .expect("scene")
        .1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn executor_matches_oracle(seed in any::<u64>(), frames in 1u32..12, actions in 0u32..6, skewed in any::<bool>()) {
        let vocab = Vocabulary::default();
        let corpus = small_corpus(seed, frames, actions, skewed);
        for inst in &corpus.instances {
            prop_assert_eq!(common::first_mismatch(inst, &corpus, &vocab), None, "{}", inst.question);
        }
    }

    #[test]
    fn generated_scenes_are_valid_and_reverse_twice_to_themselves(seed in any::<u64>(), frames in 1u32..12) {
        let vocab = Vocabulary::default();
        for (_, s) in &small_corpus(seed, frames, 4, false).scenes {
            prop_assert!(validate_scene(s, &vocab).is_valid());
            prop_assert!(validate_scene(&s.time_reversed(), &vocab).is_valid());
            prop_assert_eq!(&s.time_reversed().time_reversed(), s);
            prop_assert_eq!(&SceneRepresentation::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let vocab = Vocabulary::default();
        for inst in &small_corpus(seed, 10, 4, false).instances {
            let text = serialize_program(&inst.program);
            let back = parse_program(&text, &vocab).unwrap();
            prop_assert_eq!(serialize_program(&back), text.clone());
            prop_assert_eq!(back, inst.program.clone());
        }
    }

    #[test]
    fn execution_is_pure_and_memoization_is_invisible(seed in any::<u64>()) {
        let vocab = Vocabulary::default();
        let corpus = small_corpus(seed, 10, 4, false);
        let fresh = Executor::new(&vocab);
        let memo = Executor::new(&vocab).with_memoization(true);
        let mut shared = stqa::executor::Trace::new();
        for inst in &corpus.instances {
            let s = scene(&corpus, &inst.scene_id);
            let a = fresh.execute_fresh(&inst.program, s);
            let b = fresh.execute_fresh(&inst.program, s);
            prop_assert_eq!(common::steps_of(&a), common::steps_of(&b));
            if inst.scene_id == corpus.scenes[0].0 {
                let m = memo.execute(&inst.program, s, shared);
                prop_assert_eq!(common::steps_of(&m), common::steps_of(&a));
                shared = m.trace;
            }
        }
    }

    #[test]
    fn evidence_comes_from_the_scene(seed in any::<u64>()) {
        let vocab = Vocabulary::default();
        let corpus = small_corpus(seed, 10, 4, false);
        for inst in &corpus.instances {
            let s = scene(&corpus, &inst.scene_id);
            let out = Executor::new(&vocab).execute_fresh(&inst.program, s);
            for r in out.trace.values() {
                prop_assert!(r.evidence.triples.iter().all(|t| s.triples().contains(t)));
                prop_assert!(r.evidence.actions.iter().all(|a| s.actions().contains(a)));
            }
        }
    }

    #[test]
    fn records_survive_jsonl(seed in any::<u64>()) {
        let vocab = Vocabulary::default();
        let corpus = small_corpus(seed, 10, 4, false);
        let mut recs = Vec::new();
        for (n, inst) in corpus.instances.iter().enumerate() {
            let out = Executor::new(&vocab).execute_fresh(&inst.program, scene(&corpus, &inst.scene_id));
            let outcomes = stqa::executor::node_outcomes(&out);
            recs.extend(program_records(&inst.program, &inst.scene_id, n, &outcomes, Fill::Predicted));
        }
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        prop_assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    }
}
