//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or semantic failure, 2 usage error,
//! 3 I/O error.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::executor::{node_outcomes, trace_json, trace_text, Executor};
use crate::metrics::{
    default_consistency_rules, program_records, read_records, write_records, Fill, MetricsReport,
    PredictionRecord, RecordAnswer, RecordError, RecordSet,
};
use crate::program::{parse_program, ProgramNode};
use crate::rules::registry;
use crate::scene::{validate_scene, SceneError, SceneRepresentation, Vocabulary};
use crate::synth::{generate_corpus, ConfigError, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "stqa",
    version,
    about = "Symbolic program execution and compositional QA metrics"
)]
pub struct Cli {
    /// Vocabulary file; defaults to the embedded one.
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    /// Overrides the seed of a synthesis config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check scene files (or directories of them) against the vocabulary.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Run programs and write traces plus an answers file.
    Execute(ExecuteArgs),
    /// Compute the metrics report over prediction records.
    Metrics {
        predictions: PathBuf,
        /// Also write report.txt and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the structured report instead of the table.
        #[arg(long)]
        json: bool,
        /// Pool consistency checks across rules instead of averaging rules.
        #[arg(long)]
        ic_weighted: bool,
    },
    /// Generate a synthetic corpus with oracle answers.
    Synth {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the rule registry.
    Rules {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ExecuteArgs {
    /// Scene file, used with --programs.
    #[arg(long, requires = "programs", conflicts_with = "manifest")]
    pub scene: Option<PathBuf>,
    /// One program per line; blank lines and `#` comments are skipped.
    #[arg(long, requires = "scene")]
    pub programs: Option<PathBuf>,
    /// Corpus manifest; runs every root program on its scene and carries
    /// ground truth over.
    #[arg(long, required_unless_present = "scene")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Reuse results across the questions of one scene.
    #[arg(long)]
    pub memoize: bool,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

fn scene_failure(e: SceneError) -> Failure {
    match e {
        SceneError::Io { .. } => Failure {
            code: 3,
            message: e.to_string(),
        },
        other => Failure::semantic(other.to_string()),
    }
}

fn record_failure(path: &Path, e: RecordError) -> Failure {
    match e {
        RecordError::Io(e) => Failure::io(path, e),
        other => Failure::semantic(format!("{}: {other}", path.display())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Writes via a sibling temporary file so readers never see partial output.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Failure::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Failure::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

/// Parses arguments from the process and runs.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Runs a parsed command, writing its main output to `out`. Returns the
/// exit code for outcomes that are not errors.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<u8, Failure> {
    let vocab = match &cli.vocab {
        Some(p) => Vocabulary::load(p).map_err(scene_failure)?,
        None => Vocabulary::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let emit = |out: &mut dyn Write, text: &str| -> Result<(), Failure> {
        out.write_all(text.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e))
    };
    match cli.command {
        Command::Validate { paths } => validate(&paths, &vocab, out),
        Command::Execute(args) => {
            let (code, summary) = pool.install(|| execute(&args, &vocab))?;
            emit(out, &summary)?;
            Ok(code)
        }
        Command::Metrics {
            predictions,
            out: dir,
            json,
            ic_weighted,
        } => {
            let file = fs::File::open(&predictions).map_err(|e| Failure::io(&predictions, e))?;
            let records =
                read_records(BufReader::new(file)).map_err(|e| record_failure(&predictions, e))?;
            let set = RecordSet::new(records).map_err(|e| record_failure(&predictions, e))?;
            let report =
                MetricsReport::compute(&set, &default_consistency_rules(), &vocab, ic_weighted);
            if let Some(dir) = dir {
                create_dir(&dir)?;
                write_atomic(&dir.join("report.txt"), report.table().as_bytes())?;
                write_atomic(
                    &dir.join("report.json"),
                    (report.to_json() + "\n").as_bytes(),
                )?;
            }
            let text = if json {
                report.to_json() + "\n"
            } else {
                report.table()
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Synth { config, out: dir } => {
            let mut c = SynthConfig::from_json(&read(&config)?).map_err(config_failure)?;
            if let Some(seed) = cli.seed {
                c.seed = seed;
            }
            let corpus = pool
                .install(|| generate_corpus(&c, &vocab))
                .map_err(config_failure)?;
            corpus.write(&dir).map_err(|e| Failure::io(&dir, e))?;
            emit(
                out,
                &format!(
                    "{} scenes, {} questions written to {}\n",
                    corpus.scenes.len(),
                    corpus.instances.len(),
                    dir.display()
                ),
            )?;
            let mut unsupported: BTreeMap<&str, usize> = BTreeMap::new();
            for skipped in corpus.skipped.values() {
                for t in skipped {
                    *unsupported.entry(t.as_str()).or_default() += 1;
                }
            }
            for (t, n) in unsupported {
                eprintln!("warning: no supported {t} template in {n} scenes");
            }
            Ok(0)
        }
        Command::Rules { json } => {
            let rows = registry();
            let text = if json {
                rows.iter()
                    .map(|r| serde_json::to_string(r).expect("signature serializes") + "\n")
                    .collect()
            } else {
                let mut s = String::new();
                for r in &rows {
                    let (lo, hi) = r.arg_range();
                    let _ = writeln!(
                        s,
                        "{:<30} children={} args={lo}..{hi} output={:<16} {}",
                        r.rule.as_str(),
                        r.children,
                        format!("{:?}", r.output),
                        r.description
                    );
                }
                s
            };
            emit(out, &text)?;
            Ok(0)
        }
    }
}

fn config_failure(e: ConfigError) -> Failure {
    Failure::semantic(e.to_string())
}

fn scene_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Failure::io(p, e))?
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            if found.is_empty() {
                eprintln!("warning: no scene files in {}", p.display());
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn validate(paths: &[PathBuf], vocab: &Vocabulary, out: &mut impl Write) -> Result<u8, Failure> {
    let mut failed = false;
    let mut text = String::new();
    for path in scene_files(paths)? {
        let scene = match SceneRepresentation::load(&path) {
            Ok(s) => s,
            Err(e @ SceneError::Io { .. }) => return Err(scene_failure(e)),
            Err(e) => {
                failed = true;
                let _ = writeln!(text, "{}: {e}", path.display());
                continue;
            }
        };
        let report = validate_scene(&scene, vocab);
        if report.is_valid() {
            let _ = writeln!(text, "{}: ok", path.display());
        }
        for v in &report.violations {
            failed = true;
            let _ = writeln!(text, "{}: {v}", path.display());
        }
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
    Ok(u8::from(failed))
}

/// Records of one question, keyed by its input position.
type Numbered = (usize, Vec<PredictionRecord>);

/// One program to run: scene id, question number, program.
struct Job {
    video_id: String,
    question_no: usize,
    program: ProgramNode,
}

fn question_no(id: &str) -> Option<usize> {
    id.strip_prefix('q')?.parse().ok()
}

/// Returns the exit code and a one-line summary.
fn execute(args: &ExecuteArgs, vocab: &Vocabulary) -> Result<(u8, String), Failure> {
    let mut scenes: HashMap<String, SceneRepresentation> = HashMap::new();
    let mut jobs: Vec<Job> = Vec::new();
    let mut truth: HashMap<(String, String), Option<RecordAnswer>> = HashMap::new();
    let mut bad: Vec<String> = Vec::new();

    if let (Some(scene_path), Some(programs)) = (&args.scene, &args.programs) {
        let id = scene_path
            .file_stem()
            .map_or_else(|| "scene".to_string(), |s| s.to_string_lossy().into_owned());
        scenes.insert(
            id.clone(),
            SceneRepresentation::load(scene_path).map_err(scene_failure)?,
        );
        let text = read(programs)?;
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        for (n, (line_no, line)) in lines.enumerate() {
            match parse_program(line, vocab) {
                Ok(program) => jobs.push(Job {
                    video_id: id.clone(),
                    question_no: n,
                    program,
                }),
                Err(e) => bad.push(format!("{}:{}: {e}", programs.display(), line_no + 1)),
            }
        }
    } else if let Some(manifest) = &args.manifest {
        let root = manifest.parent().unwrap_or(Path::new("."));
        let file = fs::File::open(manifest).map_err(|e| Failure::io(manifest, e))?;
        let records =
            read_records(BufReader::new(file)).map_err(|e| record_failure(manifest, e))?;
        for r in records {
            if let (Some(text), Some(scene)) = (&r.program, &r.scene) {
                if !scenes.contains_key(&r.video_id) {
                    let s = SceneRepresentation::load(&root.join(scene)).map_err(scene_failure)?;
                    scenes.insert(r.video_id.clone(), s);
                }
                match (parse_program(text, vocab), question_no(&r.question_id)) {
                    (Ok(program), Some(question_no)) => jobs.push(Job {
                        video_id: r.video_id.clone(),
                        question_no,
                        program,
                    }),
                    (Err(e), _) => bad.push(format!("{}/{}: {e}", r.video_id, r.question_id)),
                    (_, None) => bad.push(format!(
                        "{}/{}: not a root question id",
                        r.video_id, r.question_id
                    )),
                }
            }
            truth.insert((r.video_id, r.question_id), r.ground_truth);
        }
    } else {
        return Err(Failure::usage(
            "give --scene with --programs, or --manifest",
        ));
    }

    create_dir(&args.out.join("traces"))?;
    for id in scenes.keys() {
        create_dir(&args.out.join("traces").join(id))?;
    }
    let executor = Executor::new(vocab).with_memoization(args.memoize);
    let per_scene = group_by_scene(&jobs);
    // Scenes run in parallel; questions of one scene share a trace when
    // memoizing, so they run in order.
    let results: Vec<Result<Vec<Numbered>, Failure>> = per_scene
        .par_iter()
        .map(|(id, idx)| {
            let scene = &scenes[id.as_str()];
            let mut trace = Default::default();
            let mut done = Vec::new();
            for &i in idx {
                let job = &jobs[i];
                let outcome = executor.execute(&job.program, scene, std::mem::take(&mut trace));
                let stem = args
                    .out
                    .join("traces")
                    .join(id)
                    .join(format!("q{}", job.question_no));
                write_atomic(&stem.with_extension("txt"), trace_text(&outcome).as_bytes())?;
                write_atomic(
                    &stem.with_extension("json"),
                    (trace_json(&outcome) + "\n").as_bytes(),
                )?;
                let records = program_records(
                    &job.program,
                    id,
                    job.question_no,
                    &node_outcomes(&outcome),
                    Fill::Predicted,
                );
                if args.memoize {
                    trace = outcome.trace;
                }
                done.push((i, records));
            }
            Ok(done)
        })
        .collect();
    let mut ordered: Vec<Option<Vec<PredictionRecord>>> = vec![None; jobs.len()];
    for r in results {
        for (i, recs) in r? {
            ordered[i] = Some(recs);
        }
    }
    let mut records: Vec<PredictionRecord> = ordered.into_iter().flatten().flatten().collect();
    for r in &mut records {
        if let Some(g) = truth.get(&(r.video_id.clone(), r.question_id.clone())) {
            r.ground_truth = g.clone();
        }
        r.scene = None;
    }
    let mut buf = Vec::new();
    write_records(&mut buf, &records).map_err(|e| Failure::io(&args.out, e))?;
    write_atomic(&args.out.join("answers.jsonl"), &buf)?;
    for b in &bad {
        eprintln!("error: {b}");
    }
    let summary = format!("{} programs executed, {} rejected\n", jobs.len(), bad.len());
    Ok((u8::from(!bad.is_empty()), summary))
}

/// Job indices per scene, scenes in first-appearance order.
fn group_by_scene(jobs: &[Job]) -> Vec<(String, Vec<usize>)> {
    let mut order: Vec<(String, Vec<usize>)> = Vec::new();
    let mut at: HashMap<&str, usize> = HashMap::new();
    for (i, j) in jobs.iter().enumerate() {
        let slot = *at.entry(&j.video_id).or_insert_with(|| {
            order.push((j.video_id.clone(), Vec::new()));
            order.len() - 1
        });
        order[slot].1.push(i);
    }
    order
}
