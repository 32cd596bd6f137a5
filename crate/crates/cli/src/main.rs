//! `ismtree`: learn ISM trees from demonstrations, recognize scenes, predict
//! missing objects, select relation topologies, simulate active search and
//! benchmark runtimes.

mod error;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ism_harness::asr::{run_asr_simulation, two_region_world, AsrLog, AsrParams, SearchStrategy, SimWorld};
use ism_harness::bench::{bench_prediction, bench_recognition, to_csv, BenchParams};
use ism_harness::measure::{build_tree, complete_topology, optimize_topology, star_topology, CostModel, TopologyScorer};
use ism_harness::perturb::{generate_perturbed_test_set, PerturbationKind, PerturbationSpec};
use ism_harness::scenario::{generate_demonstration, GroupMotion, MotionModel, ScenarioSpec};
use ism_tree::io::{self, CloudBody, ConfigurationBody, DatasetBody, DocumentKind, ReportBody, TestSetBody};
use ism_tree::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "ismtree", version, about = "Scene recognition and object pose prediction with ISM trees")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "ISM_SEED", default_value_t = 0)]
    seed: u64,
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic demonstration and optionally a labeled test set.
    DemoGen(DemoGenArgs),
    /// Learn an ISM tree from a demonstration.
    Learn(LearnArgs),
    /// Recognize scene instances in a configuration.
    Recognize(RecognizeArgs),
    /// Predict poses of objects missing from the best scene instance.
    Predict(PredictArgs),
    /// Search for a relation topology trading false positives against runtime.
    OptimizeTopology(OptimizeArgs),
    /// Simulate active scene recognition, or replay a simulation log.
    AsrSim(AsrArgs),
    /// Time recognition or prediction over a grid of object counts and lengths.
    Bench(BenchArgs),
    /// Render a recognition report as tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct RecognitionArgs {
    /// JSON file with recognition parameters; flags override it.
    #[arg(long, env = "ISM_CONFIG")]
    config: Option<PathBuf>,
    /// Accumulator bin size, meters.
    #[arg(long, env = "ISM_BIN_SIZE")]
    bin_size: Option<f64>,
    /// Position tolerance, meters.
    #[arg(long, env = "ISM_TAU_POS")]
    tau_pos: Option<f64>,
    /// Orientation tolerance, degrees.
    #[arg(long, env = "ISM_TAU_ROT")]
    tau_rot: Option<f64>,
    /// Minimum confidence of sub-ISM results passed upwards.
    #[arg(long, env = "ISM_KEEP_THRESHOLD")]
    keep_threshold: Option<f64>,
    /// Minimum confidence of a scene instance.
    #[arg(long, env = "ISM_EPS_R")]
    eps_r: Option<f64>,
    /// Maximum results any ISM passes upwards.
    #[arg(long, env = "ISM_MAX_RESULTS")]
    max_results: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Motion {
    Static,
    Jitter,
    Pairs,
}

#[derive(Args)]
struct DemoGenArgs {
    #[arg(long, default_value = "scene")]
    category: String,
    #[arg(long, env = "ISM_OBJECTS", default_value_t = 4)]
    objects: usize,
    #[arg(long, env = "ISM_LENGTH", default_value_t = 20)]
    length: usize,
    #[arg(long, value_enum, default_value = "jitter")]
    motion: Motion,
    /// Jitter standard deviation, meters.
    #[arg(long, env = "ISM_SIGMA_POS", default_value_t = 0.02)]
    sigma_pos: f64,
    /// Jitter standard deviation, degrees.
    #[arg(long, env = "ISM_SIGMA_ROT", default_value_t = 3.0)]
    sigma_rot: f64,
    /// Bound of the x shift of each object pair, meters.
    #[arg(long, env = "ISM_PAIR_SHIFT", default_value_t = 0.3)]
    pair_shift: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write a labeled test set here.
    #[arg(long)]
    test_out: Option<PathBuf>,
    #[arg(long, default_value = "swap")]
    perturb: PerturbationKind,
    /// Shift (m) or rotation (degrees) of the perturbation.
    #[arg(long, env = "ISM_MAGNITUDE", default_value_t = 0.0)]
    magnitude: f64,
    #[arg(long, env = "ISM_COUNT", default_value_t = 100)]
    count: usize,
}

#[derive(Args)]
struct SelectionArgs {
    /// Test set for false-positive counting; swaps are generated when absent.
    #[arg(long)]
    test_set: Option<PathBuf>,
    /// Size of the generated swap test set.
    #[arg(long, env = "ISM_COUNT", default_value_t = 100)]
    count: usize,
    /// Weight of the false-positive percentage against seconds.
    #[arg(long, env = "ISM_LAMBDA_FP", default_value_t = 1.0)]
    lambda_fp: f64,
    #[arg(long, env = "ISM_MAX_EVALUATIONS", default_value_t = 200)]
    max_evaluations: usize,
    /// Runtime measure of the search.
    #[arg(long, value_enum, default_value = "evaluations")]
    cost: Cost,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cost {
    /// Counted vote comparisons; reproducible.
    Evaluations,
    WallClock,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// star, complete, optimized or file:<path>.
    #[arg(long, default_value = "star")]
    topology: String,
    #[command(flatten)]
    selection: SelectionArgs,
    #[command(flatten)]
    recognition: RecognitionArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    tree: PathBuf,
    /// A configuration, or a dataset together with --timestep.
    #[arg(long)]
    input: PathBuf,
    /// 0-based time step when the input is a dataset.
    #[arg(long)]
    timestep: Option<usize>,
}

#[derive(Args)]
struct RecognizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    recognition: RecognitionArgs,
    /// Report file; the rendered tables go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    recognition: RecognitionArgs,
    /// Poses per missing object.
    #[arg(long, env = "ISM_N_P", default_value_t = 100)]
    n_p: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    selection: SelectionArgs,
    #[command(flatten)]
    recognition: RecognitionArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Guided,
    Sweep,
    Boxes,
}

#[derive(Args)]
struct AsrArgs {
    /// World file; the built-in two-region world is used when absent.
    #[arg(long, requires = "tree")]
    world: Option<PathBuf>,
    /// Tree files of the searched categories.
    #[arg(long)]
    tree: Vec<PathBuf>,
    /// Turn of the built-in world, degrees.
    #[arg(long, env = "ISM_YAW", default_value_t = 0.0, allow_negative_numbers = true)]
    yaw: f64,
    #[arg(long, value_enum, default_value = "guided")]
    strategy: Strategy,
    /// Write the JSON-lines log here.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Summarize an existing log instead of simulating.
    #[arg(long, conflicts_with_all = ["world", "tree", "log"])]
    replay: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Recognition,
    Prediction,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "recognition")]
    kind: BenchKind,
    /// Object counts: a list "3,5,8" or a range "3..10".
    #[arg(long, default_value = "3..10")]
    n: String,
    /// Demonstration lengths, same syntax.
    #[arg(long, default_value = "25,100")]
    l: String,
    #[arg(long, env = "ISM_N_P", default_value_t = 100)]
    n_p: usize,
    #[arg(long, env = "ISM_CONFIGURATIONS", default_value_t = 5)]
    configurations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct ParamsBody {
    #[serde(flatten)]
    params: RecognitionParams,
}

impl DocumentKind for ParamsBody {
    const KIND: &'static str = "params";
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                e.exit();
            }
            let _ = e.print();
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::Args(first.to_string()).record());
            std::process::exit(2);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", e.record());
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Ctx { seed: cli.seed, verbose: cli.verbose };
    match cli.command {
        Command::DemoGen(a) => demo_gen(&ctx, a),
        Command::Learn(a) => learn(&ctx, a),
        Command::Recognize(a) => recognize(a),
        Command::Predict(a) => predict(&ctx, a),
        Command::OptimizeTopology(a) => optimize(&ctx, a),
        Command::AsrSim(a) => asr_sim(&ctx, a),
        Command::Bench(a) => bench(&ctx, a),
        Command::Report(a) => report(a),
    }
}

struct Ctx {
    seed: u64,
    verbose: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::file(path, e))
}

fn load<T: DocumentKind>(path: &Path) -> CliResult<T> {
    io::from_json(&read(path)?).map_err(|e| CliError::file(path, e))
}

fn load_dataset(path: &Path) -> CliResult<DemonstrationDataset> {
    let body: DatasetBody = load(path)?;
    DemonstrationDataset::try_from(body).map_err(|e| CliError::file(path, e))
}

fn write(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::file(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn save<T: DocumentKind>(path: Option<&Path>, body: &T) -> CliResult<()> {
    write(path, &io::to_json(body)?)
}

fn recognition_params(a: &RecognitionArgs) -> CliResult<RecognitionParams> {
    let mut p = match &a.config {
        Some(path) => load::<ParamsBody>(path)?.params,
        None => RecognitionParams::default(),
    };
    if let Some(v) = a.bin_size {
        p.bin_size = v;
    }
    if let Some(v) = a.tau_pos {
        p.position_tolerance = v;
    }
    if let Some(v) = a.tau_rot {
        p.orientation_tolerance_deg = v;
    }
    if let Some(v) = a.keep_threshold {
        p.result_keep_threshold = v;
    }
    if let Some(v) = a.eps_r {
        p.assembly_threshold = v;
    }
    if let Some(v) = a.max_results {
        p.max_results_per_ism = v;
    }
    p.validate().map_err(|e| CliError::Args(e.to_string()))?;
    Ok(p)
}

fn demo_gen(ctx: &Ctx, a: DemoGenArgs) -> CliResult<()> {
    let motion = match a.motion {
        Motion::Static => MotionModel::Static,
        Motion::Jitter => MotionModel::Jitter { sigma_pos: a.sigma_pos, sigma_rot_deg: a.sigma_rot },
        Motion::Pairs => MotionModel::RigidGroups {
            groups: (0..a.objects / 2)
                .map(|k| GroupMotion { members: vec![2 * k, 2 * k + 1], max_shift: [a.pair_shift, 0.0, 0.0], max_yaw_deg: 0.0 })
                .collect(),
        },
    };
    let spec = ScenarioSpec::new(a.category, a.objects, a.length, motion, ctx.seed);
    let ds = generate_demonstration(&spec)?;
    save(Some(&a.out), &DatasetBody::from(&ds))?;
    ctx.note(format!("{} objects x {} steps written to {}", ds.object_count(), ds.len(), a.out.display()));
    if let Some(path) = a.test_out {
        let set = generate_perturbed_test_set(&ds, &PerturbationSpec::new(a.perturb, a.magnitude, a.count, ctx.seed))?;
        save(Some(&path), &TestSetBody { configurations: set })?;
        ctx.note(format!("{} test configurations written to {}", a.count, path.display()));
    }
    Ok(())
}

fn test_set(ctx: &Ctx, ds: &DemonstrationDataset, a: &SelectionArgs) -> CliResult<Vec<LabeledConfiguration>> {
    match &a.test_set {
        Some(path) => Ok(load::<TestSetBody>(path)?.configurations),
        None => Ok(generate_perturbed_test_set(ds, &PerturbationSpec::new(PerturbationKind::Swap, 0.0, a.count, ctx.seed))?),
    }
}

fn select(ctx: &Ctx, ds: &DemonstrationDataset, sel: &SelectionArgs, rec: &RecognitionArgs) -> CliResult<(RelationTopology, String)> {
    let params = recognition_params(rec)?;
    let set = test_set(ctx, ds, sel)?;
    let cost = match sel.cost {
        Cost::Evaluations => CostModel::default(),
        Cost::WallClock => CostModel::WallClock,
    };
    let mut scorer = TopologyScorer { dataset: ds, test_set: &set, params, lambda_fp: sel.lambda_fp, cost };
    let outcome = optimize_topology(&mut scorer, &SearchParams { max_evaluations: sel.max_evaluations })?;
    let mut summary = String::new();
    for (name, topology) in [("star", star_topology(ds)), ("optimized", outcome.topology.clone()), ("complete", complete_topology(ds))] {
        let s = scorer.evaluate(&topology)?;
        summary.push_str(&format!(
            "{name}: {} relations, numFPs {:.2} %, duration {:.6} s, score {:.6}\n",
            topology.relation_count(),
            s.num_fps,
            s.duration,
            s.score
        ));
    }
    summary.push_str(&format!("{} evaluations, {} improvements\n", outcome.evaluations, outcome.improvements));
    Ok((outcome.topology, summary))
}

fn learn(ctx: &Ctx, a: LearnArgs) -> CliResult<()> {
    let ds = load_dataset(&a.dataset)?;
    let topology = match a.topology.as_str() {
        "star" => star_topology(&ds),
        "complete" => complete_topology(&ds),
        "optimized" => {
            let (t, summary) = select(ctx, &ds, &a.selection, &a.recognition)?;
            ctx.note(summary);
            t
        }
        other => match other.strip_prefix("file:") {
            Some(path) => load::<RelationTopology>(Path::new(path))?,
            None => return Err(CliError::Args(format!("unknown topology {other:?}; use star, complete, optimized or file:<path>"))),
        },
    };
    let tree = build_tree(&ds, &topology)?;
    save(Some(&a.out), &tree)?;
    ctx.note(format!("{} ISMs, height {}", tree.ism_count(), tree.height()));
    Ok(())
}

fn load_inputs(a: &InputArgs) -> CliResult<(IsmTree, Vec<ObjectState>)> {
    let tree: IsmTree = load(&a.tree)?;
    let text = read(&a.input)?;
    let kind = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|e| CliError::file(&a.input, e))?
        .get("kind")
        .and_then(|k| k.as_str().map(str::to_string));
    let objects = if kind.as_deref() == Some(DatasetBody::KIND) {
        let ds = load_dataset(&a.input)?;
        let t = a.timestep.unwrap_or(0);
        if t >= ds.len() {
            return Err(CliError::Args(format!("time step {t} is outside the {} demonstrated steps", ds.len())));
        }
        ds.configuration_at(t)
    } else {
        if a.timestep.is_some() {
            return Err(CliError::Args("--timestep needs a dataset input".into()));
        }
        io::from_json::<ConfigurationBody>(&text).map_err(|e| CliError::file(&a.input, e))?.objects
    };
    Ok((tree, objects))
}

fn recognize(a: RecognizeArgs) -> CliResult<()> {
    let params = recognition_params(&a.recognition)?;
    let (tree, objects) = load_inputs(&a.input)?;
    let body = ReportBody { category: tree.category().to_string(), instances: recognize_scene(&objects, &tree, &params)? };
    if let Some(path) = &a.out {
        save(Some(path), &body)?;
    }
    print!("{}", io::render_report(&body));
    Ok(())
}

fn predict(ctx: &Ctx, a: PredictArgs) -> CliResult<()> {
    let params = recognition_params(&a.recognition)?;
    let (tree, objects) = load_inputs(&a.input)?;
    let instances = recognize_scene(&objects, &tree, &params)?;
    let instance = instances.first().ok_or_else(|| CliError::Domain(format!("no instance of {} to predict from", tree.category())))?;
    let paths = compute_shortest_paths(&tree);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let cloud = generate_cloud_of_pose_predictions(instance, &tree, &paths, a.n_p, &mut RandomSampler(&mut rng))?;
    ctx.note(format!("{} poses for {} objects", cloud.len(), cloud.poses.len()));
    save(a.out.as_deref(), &CloudBody { category: tree.category().to_string(), cloud })
}

fn optimize(ctx: &Ctx, a: OptimizeArgs) -> CliResult<()> {
    let ds = load_dataset(&a.dataset)?;
    let (topology, summary) = select(ctx, &ds, &a.selection, &a.recognition)?;
    save(Some(&a.out), &topology)?;
    print!("{summary}");
    Ok(())
}

fn asr_sim(ctx: &Ctx, a: AsrArgs) -> CliResult<()> {
    if let Some(path) = &a.replay {
        let log = AsrLog::from_json_lines(&read(path)?).map_err(|e| CliError::file(path, e))?;
        print!("{}", summarize(&log));
        return Ok(());
    }
    let mut params = AsrParams { seed: ctx.seed, ..AsrParams::default() };
    let (world, trees) = match &a.world {
        Some(path) => {
            let world: SimWorld = load(path)?;
            let trees = a.tree.iter().map(|t| load::<IsmTree>(t)).collect::<CliResult<Vec<_>>>()?;
            (world, trees)
        }
        None => {
            if !a.tree.is_empty() {
                return Err(CliError::Args("--tree needs --world".into()));
            }
            let scene = two_region_world(a.yaw, ctx.seed)?;
            if let Strategy::Boxes = a.strategy {
                params.strategy = SearchStrategy::BoundingBoxes { regions: scene.regions.clone() };
            }
            let tree = build_tree(&scene.dataset, &star_topology(&scene.dataset))?;
            (scene.world, vec![tree])
        }
    };
    params.strategy = match a.strategy {
        Strategy::Guided => SearchStrategy::PredictionGuided,
        Strategy::Sweep => SearchStrategy::Sweep,
        Strategy::Boxes => match params.strategy {
            s @ SearchStrategy::BoundingBoxes { .. } => s,
            _ => return Err(CliError::Args("the boxes strategy needs the built-in world".into())),
        },
    };
    let log = run_asr_simulation(&world, &trees, &params)?;
    if let Some(path) = &a.log {
        write(Some(path), &log.to_json_lines()?)?;
    }
    print!("{}", summarize(&log));
    Ok(())
}

fn summarize(log: &AsrLog) -> String {
    let mut out = String::new();
    for (k, (state, v)) in log.adopted_views().enumerate() {
        out.push_str(&format!("view {:>3} {:?}: ({:.2}, {:.2}) heading {:.0}\n", k + 1, state, v.x, v.y, v.yaw_deg));
    }
    let found: Vec<String> = log.found.iter().map(|id| id.to_string()).collect();
    out.push_str(&format!("{} views, cost {:.3}, found [{}], complete {}\n", log.views, log.cost, found.join(", "), log.complete));
    out
}

fn parse_values(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Args(format!("cannot read {s:?} as a list or range of counts"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn bench(ctx: &Ctx, a: BenchArgs) -> CliResult<()> {
    let ns = parse_values(&a.n)?;
    let ls = parse_values(&a.l)?;
    let grid: Vec<(usize, usize)> = ls.iter().flat_map(|&l| ns.iter().map(move |&n| (n, l))).collect();
    let params = BenchParams { configurations: a.configurations, seed: ctx.seed, ..BenchParams::default() };
    let rows = match a.kind {
        BenchKind::Recognition => bench_recognition(&grid, &params)?,
        BenchKind::Prediction => bench_prediction(&grid, a.n_p, &params)?,
    };
    write(a.out.as_deref(), &to_csv(&rows))
}

fn report(a: ReportArgs) -> CliResult<()> {
    let body: ReportBody = load(&a.input)?;
    write(a.out.as_deref(), &io::render_report(&body))
}
