//! `qhsp`: generate states, learn hidden subgroups, dump character
//! distributions and run harness experiments.
//!
//! Exit codes: 0 success, 1 I/O or generation failure, 2 usage,
//! 3 capacity, 4 promise violation, 5 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qhsp::apps::{
    learn_global_symmetry, learn_hidden_cut, learn_stabilizer_group, learn_translation,
    mixed_state_failure_demo,
};
use qhsp::charpovm::{
    measure_epsilon, q_distribution, Copies, CopyProvider, Family, Representation, SamplerKind,
};
use qhsp::fgroup::{Subgroup, DEFAULT_ENUMERATION_BOUND};
use qhsp::harness::{generate_instance, run_experiment, ExperimentConfig, InstanceSpec};
use qhsp::hsp::{verify_output, LearnReport, SolveOptions, StateHSPInstance, Verification};
use qhsp::qstate::PureState;
use qhsp::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "qhsp",
    version,
    about = "Abelian state hidden subgroup simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a state file and its ground-truth sidecar.
    Gen(GenArgs),
    /// Learn the hidden subgroup of a state file.
    Learn(LearnArgs),
    /// Print the exact character distribution of a state.
    Dist(DistArgs),
    /// Run a harness experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenFamily {
    Stabilizer,
    RotatedStabilizer,
    Cut,
    EntangledPair,
    Translation,
    MomentumMix,
    Cluster,
    Ghz,
    Zero,
    Plus,
    W,
    Haar,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: GenFamily,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    d: u64,
    /// Block sizes for `cut`, e.g. `2,2,1`.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long)]
    period: Option<u64>,
    /// Single-copy gap for `rotated-stabilizer`.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    purity_gap: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// State file; the sidecar goes to `<out>.meta.json`. Without it both are
    /// printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Problem {
    Stabilizer,
    Cut,
    Translation,
    Global,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Exact,
    Measurement,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(value_enum)]
    problem: Problem,
    #[arg(long = "in")]
    input: PathBuf,
    /// Single-copy promise gap (per-factor distance for `cut`).
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SamplerArg::Exact)]
    sampler: SamplerArg,
    /// Block length for `global`.
    #[arg(long)]
    p: Option<usize>,
    /// Overrides the theoretical sample count.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistFamily {
    Weyl,
    Cut,
    Translation,
    ZOnly,
    Blocked,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long = "in", required_unless_present = "mixed_demo")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "mixed_demo")]
    family: Option<DistFamily>,
    /// Block length for `blocked`.
    #[arg(long)]
    p: Option<usize>,
    /// Print the mixed-state demo instead.
    #[arg(long, conflicts_with_all = ["input", "family"])]
    mixed_demo: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output directory of the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Sidecar written next to generated states.
#[derive(Debug, Serialize, Deserialize)]
struct GenMeta {
    family: String,
    seed: Option<u64>,
    n: usize,
    d: u64,
    representation: Option<Family>,
    ground_truth: Option<Subgroup>,
    epsilon: Option<f64>,
    epsilon_eff: Option<f64>,
    generators: Option<Vec<String>>,
    partition: Option<Vec<Vec<usize>>>,
    period: Option<u64>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Verification(_) => 5,
            Failure::Lib(e) => match e {
                Error::Capacity { .. } => 3,
                Error::PromiseViolation(_) => 4,
                Error::Inconsistency(_) | Error::NumericalIntegrity(_) => 5,
                Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::Shape(_)
                | Error::SpecMismatch(_)
                | Error::Unsupported(_)
                | Error::InfeasibleCode(_) => 2,
                Error::Io(_) | Error::Json(_) | Error::Generation(_) => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Verification(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn need<T>(value: Option<T>, flag: &str, family: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {family}")))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn family_name(f: GenFamily) -> String {
    f.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

/// Weyl-family ground truth for deterministic states, when enumerable.
fn weyl_meta(psi: &PureState) -> (Option<Family>, Option<Subgroup>, Option<f64>, Option<f64>) {
    let Ok(rep) = Representation::weyl(psi.d(), psi.n()) else {
        return (None, None, None, None);
    };
    if rep.spec().order() > DEFAULT_ENUMERATION_BOUND {
        return (None, None, None, None);
    }
    match measure_epsilon(&rep, psi) {
        Ok(g) => (
            Some(rep.family().clone()),
            Some(g.h_exact),
            Some(g.epsilon),
            Some(g.epsilon_eff),
        ),
        Err(_) => (None, None, None, None),
    }
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let name = family_name(args.family);
    let stochastic = !matches!(
        args.family,
        GenFamily::Cluster | GenFamily::Ghz | GenFamily::Zero | GenFamily::Plus | GenFamily::W
    );
    if stochastic && args.seed.is_none() {
        return Err(Failure::Usage(format!("--seed is required for {name}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(0));
    let n = || need(args.n, "n", &name);
    let spec = match args.family {
        GenFamily::Stabilizer => Some(InstanceSpec::Stabilizer { n: n()?, d: args.d }),
        GenFamily::RotatedStabilizer => Some(InstanceSpec::RotatedStabilizer {
            n: n()?,
            epsilon: need(args.epsilon, "epsilon", &name)?,
        }),
        GenFamily::Cut => Some(InstanceSpec::Cut {
            blocks: need(args.blocks.clone(), "blocks", &name)?,
        }),
        GenFamily::EntangledPair => Some(InstanceSpec::EntangledPair {
            n: n()?,
            purity_gap: need(args.purity_gap, "purity-gap", &name)?,
        }),
        GenFamily::Translation => Some(InstanceSpec::Translation {
            n: n()?,
            period: need(args.period, "period", &name)?,
        }),
        GenFamily::MomentumMix => Some(InstanceSpec::MomentumMix {
            n: n()?,
            eta: need(args.eta, "eta", &name)?,
        }),
        _ => None,
    };
    let (psi, meta) = match spec {
        Some(spec) => {
            let inst = generate_instance(&spec, None, &mut rng)?;
            let m = inst.meta();
            let (n, d) = (inst.state.n(), inst.state.d());
            let meta = GenMeta {
                family: name,
                seed: args.seed,
                n,
                d,
                representation: Some(inst.rep.family().clone()),
                ground_truth: m.ground_truth,
                epsilon: m.epsilon,
                epsilon_eff: m.epsilon_eff,
                generators: m.generators,
                partition: m.partition,
                period: m.period,
            };
            (inst.state, meta)
        }
        None => {
            let psi = match args.family {
                GenFamily::Cluster => PureState::cluster_ring(n()?)?,
                GenFamily::Ghz => PureState::ghz(n()?, args.d)?,
                GenFamily::Zero => PureState::zero_state(n()?, args.d)?,
                GenFamily::Plus => PureState::plus_state(n()?, args.d)?,
                GenFamily::W => PureState::w_state(n()?)?,
                GenFamily::Haar => PureState::haar_random(n()?, args.d, &mut rng)?,
                _ => unreachable!("instance families handled above"),
            };
            let (representation, ground_truth, epsilon, epsilon_eff) = weyl_meta(&psi);
            let meta = GenMeta {
                family: name,
                seed: args.seed,
                n: psi.n(),
                d: psi.d(),
                representation,
                ground_truth,
                epsilon,
                epsilon_eff,
                generators: None,
                partition: None,
                period: None,
            };
            (psi, meta)
        }
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, serde_json::to_string(&psi)? + "\n")?;
            std::fs::write(
                sidecar_path(path),
                serde_json::to_string_pretty(&meta)? + "\n",
            )?;
            print_json(&meta)
        }
        None => print_json(&serde_json::json!({ "state": psi, "meta": meta })),
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn read_state(path: &Path) -> CliResult<PureState> {
    let text = std::fs::read_to_string(path)?;
    // a `gen` dump without --out wraps the state
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = value.get("state").cloned().unwrap_or(value);
    Ok(serde_json::from_value(inner)?)
}

fn read_ground_truth(path: &Path, rep: &Representation) -> Option<Subgroup> {
    let text = std::fs::read_to_string(sidecar_path(path)).ok()?;
    let meta: GenMeta = serde_json::from_str(&text).ok()?;
    meta.ground_truth.filter(|h| h.spec() == rep.spec())
}

fn cmd_learn(args: &LearnArgs) -> CliResult<()> {
    let psi = read_state(&args.input)?;
    let opts = SolveOptions {
        sampler: match args.sampler {
            SamplerArg::Exact => SamplerKind::Exact,
            SamplerArg::Measurement => SamplerKind::Measurement,
        },
        samples: args.samples,
        early_stop: None,
    };
    let provider = CopyProvider::identical(psi.clone());
    let (n, d) = (psi.n(), psi.d());
    let (rep, result, report): (Representation, serde_json::Value, LearnReport) = match args.problem
    {
        Problem::Stabilizer => {
            let r = learn_stabilizer_group(provider, args.epsilon, args.delta, &opts, args.seed)?;
            let mut v = serde_json::to_value(&r)?;
            v["generators"] = serde_json::to_value(r.generator_strings())?;
            (Representation::weyl(d, n)?, v, r.report)
        }
        Problem::Global => {
            let p = need(args.p, "p", "global")?;
            let r = learn_global_symmetry(provider, p, args.epsilon, args.delta, &opts, args.seed)?;
            let mut v = serde_json::to_value(&r)?;
            v["generators"] = serde_json::to_value(r.generator_strings())?;
            (Representation::blocked_weyl(d, p, n)?, v, r.report)
        }
        Problem::Cut => {
            let r = learn_hidden_cut(provider, args.epsilon, args.delta, &opts, args.seed)?;
            (
                Representation::swap_cut(n)?,
                serde_json::to_value(&r)?,
                r.report,
            )
        }
        Problem::Translation => {
            let r = learn_translation(provider, args.epsilon, args.delta, &opts, args.seed)?;
            (
                Representation::translation(n)?,
                serde_json::to_value(&r)?,
                r.report,
            )
        }
    };
    let mut inst = StateHSPInstance::new(
        rep.clone(),
        CopyProvider::identical(psi),
        report.epsilon,
        args.delta,
    )?;
    if let Some(h) = read_ground_truth(&args.input, &rep) {
        inst = inst.with_ground_truth(h);
    }
    let verification: Verification = verify_output(&inst, &report)?;
    print_json(&serde_json::json!({ "result": result, "verification": verification }))?;
    if verification.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "internal verification failed: {verification:?}"
        )))
    }
}

fn cmd_dist(args: &DistArgs) -> CliResult<()> {
    if args.mixed_demo {
        let demo = mixed_state_failure_demo()?;
        eprintln!(
            "q_rho(H^perp) = {} for {}",
            demo.conjugation_invariant.mass_on_h_perp, demo.conjugation_invariant.description
        );
        return print_json(&demo);
    }
    let psi = read_state(args.input.as_deref().expect("required by clap"))?;
    let (n, d) = (psi.n(), psi.d());
    let rep = match args.family.expect("required by clap") {
        DistFamily::Weyl => Representation::weyl(d, n)?,
        DistFamily::Cut => Representation::swap_cut(n)?,
        DistFamily::Translation => Representation::translation(n)?,
        DistFamily::ZOnly => Representation::z_only(d, n)?,
        DistFamily::Blocked => Representation::blocked_weyl(d, need(args.p, "p", "blocked")?, n)?,
    };
    let q = q_distribution(&rep, &Copies::Identical(&psi))?;
    print_json(&q)
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = &args.out_dir {
        match &mut config {
            ExperimentConfig::Sweep(c) => c.output_dir = Some(dir.clone()),
            ExperimentConfig::LemmaCheck(c) => c.output_dir = Some(dir.clone()),
            ExperimentConfig::OracleEquivalence(c) => c.output_dir = Some(dir.clone()),
            ExperimentConfig::FailureDemo(c) => c.output_dir = Some(dir.clone()),
        }
    }
    let report = run_experiment(&config)?;
    if let ExperimentConfig::OracleEquivalence(_) = config {
        print_tv_table(&report.records);
    }
    print_json(&report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} check(s) failed: {}",
            report.failures.len(),
            report.failures.join("; ")
        )))
    }
}

fn print_tv_table(records: &serde_json::Value) {
    eprintln!(
        "{:<26} {:<28} {:>10} {:>10} {:>10}",
        "route", "state", "tv", "p", "exact"
    );
    for r in records.as_array().into_iter().flatten() {
        let show = |key: &str| {
            r[key]
                .as_f64()
                .map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
        };
        eprintln!(
            "{:<26} {:<28} {:>10} {:>10} {:>10}",
            r["case"]["route"].as_str().unwrap_or("?"),
            r["case"]["state"].to_string(),
            show("total_variation"),
            show("p_value"),
            show("max_abs_difference"),
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Dist(a) => cmd_dist(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
