//! `boundq` command-line driver: builds caches, partitions and quotients, runs the
//! table protocols, and verifies artifacts against a manifest.
//!
//! Exit codes: 0 success, 1 a checked inequality or verification failed, 2 invalid configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use boundq::experiments::{
    config_hash, ledger_artifact, manifest_for, partition_artifact, quotient_artifact, run_table, save_cache, selection_artifact,
    value_bound_sweep, verify_artifacts, Artifact, Manifest, MetricChoice, Profile, RunConfig, TableId, Tier, DEFAULT_MAX_HORIZON,
    DEFAULT_SEED, OUTPUT_DIR_ENV,
};
use boundq::layered::{run_layered, LayeredPlan};
use boundq::model::{BenchmarkSpec, Pomdp};
use boundq::planning::{check_value_bound, pbvi_compare, plan_compare, Objective, ObjectiveKind, PBVI_BELIEF_POINTS, PBVI_SEED};
use boundq::probes::{clock_aware_count, stationary_count, FamilyKind};
use boundq::pseudometric::{build_cache, envelope, CacheOptions, DistanceCache};
use boundq::quotient::{eps_partition, soundness_check, QuotientPomdp};
use boundq::sampling::{bootstrap_ci_max_w1, SampledLaws, DEFAULT_RESAMPLES, DEFAULT_TRAJECTORIES};
use boundq::selection::greedy_select;
use boundq::Error;

/// Manifest of the quick-profile tables at the default configuration.
const TIER1_MANIFEST: &str = include_str!("../manifests/tier1.json");

#[derive(Parser)]
#[command(name = "boundq", version, about = "Bounded-observer quotients of finite POMDPs")]
struct Cli {
    /// Output directory for artifacts.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = "artifacts")]
    output_dir: PathBuf,
    /// Master seed.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Single-threaded execution.
    #[arg(long, global = true)]
    serial: bool,
    /// Fill runtime columns (outputs are then no longer byte-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Benchmark spec, e.g. `tiger-full`, `gridworld:5`, `rocksample:4,4`, `network:9`, `random:100,4,seed=7`.
    #[arg(long, short = 'b')]
    benchmark: Option<String>,
    /// Probe family: `stationary` or `clock-aware`; defaults to the tier's family.
    #[arg(long)]
    family: Option<String>,
    /// Controller memory `m`.
    #[arg(long, short = 'm', default_value_t = 1)]
    memory: usize,
    /// Horizon `T`.
    #[arg(long = "horizon", short = 'T', default_value_t = 2)]
    horizon: usize,
    /// Comma-separated merge thresholds.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Law distance: `w1` or `tv`.
    #[arg(long, default_value = "w1")]
    metric: String,
    /// Evidence tier: `exact-clk`, `op-exact` or `op-sampling`.
    #[arg(long)]
    tier: Option<String>,
    /// Trajectories per (history, probe) cell for sampled runs.
    #[arg(long, default_value_t = DEFAULT_TRAJECTORIES)]
    trajectories: usize,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    /// Largest horizon run by horizon sweeps.
    #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
    max_horizon: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a benchmark and the size of the configured probe family.
    Bench(RunArgs),
    /// Build a distance cache and write it (binary plus CSV mirror).
    Cache(RunArgs),
    /// Write the ε-partition for each threshold.
    Partition(RunArgs),
    /// Build ε-quotients, write their kernels and report soundness.
    Quotient(RunArgs),
    /// Greedy probe-subset selection with δ_S certificates.
    Subset {
        #[command(flatten)]
        run: RunArgs,
        /// Subset size.
        #[arg(long, short = 'k', default_value_t = 5)]
        k: usize,
    },
    /// Sampled partitions with a bootstrap interval on the largest distance.
    Sample(RunArgs),
    /// Layered composition with its distortion ledger.
    Layered {
        #[command(flatten)]
        run: RunArgs,
        /// Segment length.
        #[arg(long, default_value_t = 4)]
        tau: usize,
        /// Reward Lipschitz constant `L_R`.
        #[arg(long, default_value_t = 1.0)]
        lipschitz: f64,
    },
    /// Exhaustive planning on the original and on the ε-quotient.
    Plan {
        #[command(flatten)]
        run: RunArgs,
        /// Objective: `latent`, `obs-score` or `action-obs-score`.
        #[arg(long, default_value = "latent")]
        objective: String,
        /// Override `L_R`.
        #[arg(long)]
        lipschitz: Option<f64>,
        /// Also compare PBVI on the original and the quotient.
        #[arg(long)]
        pbvi: bool,
    },
    /// Run table protocols and write their CSV artifacts.
    Table {
        #[command(flatten)]
        run: RunArgs,
        /// Table ids; empty runs the profile.
        tables: Vec<String>,
        /// `quick` (through the medium-scale study) or `full`.
        #[arg(long, default_value = "quick")]
        profile: String,
        /// Write a manifest pinning the produced tables to this path.
        #[arg(long)]
        write_manifest: Option<PathBuf>,
    },
    /// Compare artifacts with a manifest.
    Verify {
        /// Artifact directory; defaults to the output directory.
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Manifest JSON; defaults to the bundled quick-profile manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Value and regret bounds across benchmarks, memories and thresholds.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated benchmark specs (`;` separates specs containing commas).
        #[arg(long, value_delimiter = ';', default_value = "tiger-full;gridworld:3;network:4")]
        benchmarks: Vec<String>,
        /// Comma-separated memories.
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        memories: Vec<usize>,
    },
}

/// A checked property failed; maps to exit code 1.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

struct Session {
    cfg: RunConfig,
    pomdp: Pomdp,
    spec: BenchmarkSpec,
}

impl Session {
    fn new(cli: &Cli, run: &RunArgs) -> Result<Self> {
        let spec: BenchmarkSpec = run.benchmark.as_deref().unwrap_or("tiger-full").parse()?;
        let tier: Option<Tier> = run.tier.as_deref().map(str::parse).transpose()?;
        let family: Option<FamilyKind> = run.family.as_deref().map(str::parse).transpose()?;
        let (tier, family) = match (tier, family) {
            (Some(t), Some(f)) => (t, f),
            (Some(t), None) => (t, t.family_kind()),
            (None, Some(FamilyKind::ClockAware)) => (Tier::ExactClk, FamilyKind::ClockAware),
            (None, Some(f)) => (Tier::OpExact, f),
            (None, None) => (Tier::OpExact, FamilyKind::Stationary),
        };
        let mut cfg = RunConfig {
            benchmark: run.benchmark.is_some().then(|| spec.clone()),
            family,
            memory: run.memory,
            horizon: run.horizon,
            eps: run.eps.clone(),
            metric: run.metric.parse::<MetricChoice>()?,
            serial: cli.serial,
            timing: cli.timing,
            output_dir: cli.output_dir.clone(),
            seed: cli.seed,
            tier,
            max_horizon: run.max_horizon,
            ..RunConfig::default()
        };
        cfg.sampling.trajectories = run.trajectories;
        cfg.sampling.resamples = run.resamples;
        cfg.validate()?;
        Ok(Self { pomdp: spec.build()?, cfg, spec })
    }

    fn options(&self) -> CacheOptions {
        if self.cfg.serial {
            CacheOptions::serial()
        } else {
            CacheOptions::default()
        }
    }

    fn eps(&self) -> Vec<f64> {
        self.cfg.eps_or(&[0.0])
    }

    fn hash(&self, command: &str) -> Result<String> {
        Ok(config_hash(&(command, &self.cfg))?)
    }

    fn cache(&self) -> Result<(boundq::probes::ProbeFamily, DistanceCache)> {
        let family = self.cfg.tier_family(&self.pomdp)?;
        let distance = self.cfg.metric.distance(&self.pomdp);
        let cache = build_cache(&self.pomdp, &self.spec.to_string(), &family, self.cfg.horizon, &distance, self.options())?;
        Ok((family, cache))
    }
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}").replace('.', "p")
}

fn write(art: &Artifact, dir: &Path) -> Result<()> {
    let path = art.write(dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn bench(ctx: &Session) -> Result<()> {
    let p = &ctx.pomdp;
    let (m, t) = (ctx.cfg.memory, ctx.cfg.horizon);
    println!("benchmark     {}", ctx.spec);
    println!("|S| |A| |O|   {} {} {}", p.n_states(), p.n_actions(), p.n_observations());
    println!("actions       {}", p.action_names().join(", "));
    println!("observations  {}", p.observation_names().join(", "));
    println!("reward range  {}", p.reward_range());
    println!("stationary    m≤{m}: {}", stationary_count(m, p.n_actions(), p.n_observations()));
    println!("clock-aware   m={m} T={t}: {}", clock_aware_count(m, t, p.n_actions(), p.n_observations()));
    Ok(())
}

fn cache_cmd(ctx: &Session) -> Result<()> {
    let (family, cache) = ctx.cache()?;
    let path = save_cache(&cache, &ctx.cfg.output_dir)?;
    println!("{} probes, max distance {:.6}", family.len(), envelope(&cache, None)?.max());
    println!("wrote {}", path.display());
    Ok(())
}

fn partition_cmd(ctx: &Session) -> Result<()> {
    let (_, cache) = ctx.cache()?;
    for eps in ctx.eps() {
        let part = eps_partition(&cache, eps)?;
        let mut art = partition_artifact(&part, ctx.pomdp.observation_names(), ctx.hash("partition")?)?;
        art.name = format!("partition_eps{}", eps_tag(eps));
        println!("ε = {eps}: {} classes", part.class_count());
        write(&art, &ctx.cfg.output_dir)?;
    }
    Ok(())
}

fn quotient_cmd(ctx: &Session) -> Result<()> {
    let (family, cache) = ctx.cache()?;
    let distance = ctx.cfg.metric.distance(&ctx.pomdp);
    let mut failed = Vec::new();
    for eps in ctx.eps() {
        let part = eps_partition(&cache, eps)?;
        let q = QuotientPomdp::build(&ctx.pomdp, &part)?;
        let sound = soundness_check(&ctx.pomdp, &q, &family, &distance)?;
        println!("ε = {eps}: {} classes, max probe distance to the original {sound:.3e}", part.class_count());
        if eps == 0.0 && sound > 1e-9 {
            failed.push(format!("soundness {sound:.3e} > 1e-9 at ε = 0"));
        }
        let mut art = quotient_artifact(&q, ctx.hash("quotient")?)?;
        art.name = format!("quotient_eps{}", eps_tag(eps));
        write(&art, &ctx.cfg.output_dir)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CheckFailed(failed.join("; ")).into())
    }
}

fn subset_cmd(ctx: &Session, k: usize) -> Result<()> {
    let (family, cache) = ctx.cache()?;
    let selection = greedy_select(&cache, k.min(family.len()))?;
    for (step, &p) in selection.chosen.iter().enumerate() {
        println!("k = {}: probe {p} ({}), δ_S = {:.6}", step + 1, family.members()[p], selection.delta_s[step]);
    }
    write(&selection_artifact(&selection, ctx.hash("subset")?)?, &ctx.cfg.output_dir)
}

fn sample_cmd(ctx: &Session) -> Result<()> {
    let family = ctx.cfg.tier_family(&ctx.pomdp)?;
    let distance = ctx.cfg.metric.distance(&ctx.pomdp);
    let sampling = ctx.cfg.sampling();
    let laws = SampledLaws::draw(&ctx.pomdp, &family, ctx.cfg.horizon, &sampling)?;
    let cache = laws.to_cache(&distance, sampling.parallel)?;
    let (lo, hi) = bootstrap_ci_max_w1(&laws, &distance, sampling.resamples, 0.95, ctx.cfg.seed)?;
    let mut art = Artifact::new("sample", ctx.hash("sample")?, &["benchmark", "trajectories", "eps", "classes", "max_distance", "ci_lo", "ci_hi"]);
    let max = envelope(&cache, None)?.max();
    for eps in ctx.cfg.eps_or(&[0.0, 0.1, 0.25, 0.45]) {
        let classes = eps_partition(&cache, eps)?.class_count();
        art.push(vec![
            ctx.spec.to_string(),
            sampling.trajectories.to_string(),
            boundq::experiments::fnum(eps),
            classes.to_string(),
            boundq::experiments::fnum(max),
            boundq::experiments::fnum(lo),
            boundq::experiments::fnum(hi),
        ])?;
    }
    println!("max sampled distance {max:.6}, 95% interval [{lo:.6}, {hi:.6}]");
    write(&art, &ctx.cfg.output_dir)
}

fn layered_cmd(ctx: &Session, tau: usize, lipschitz: f64) -> Result<()> {
    let eps = ctx.eps()[0];
    let plan = LayeredPlan::uniform(ctx.pomdp.clone(), ctx.cfg.horizon, tau, eps, ctx.cfg.family, ctx.cfg.memory)?;
    let report = run_layered(&plan, lipschitz)?;
    println!("segments {:?}: {} histories processed vs {} direct", plan.segments, report.histories_layered, report.histories_direct);
    write(&ledger_artifact(&report, ctx.cfg.timing, ctx.hash("layered")?)?, &ctx.cfg.output_dir)?;
    if report.holds() {
        Ok(())
    } else {
        Err(CheckFailed("layered composition bound violated".into()).into())
    }
}

fn objective(pomdp: &Pomdp, id: &str, lipschitz: Option<f64>) -> Result<Objective> {
    let objective = match id {
        "latent" => Objective::latent(pomdp),
        "obs-score" => Objective::default_observation_score(pomdp),
        "action-obs-score" => Objective::default_action_observation_score(pomdp),
        other => return Err(Error::InvalidConfig(format!("unknown objective `{other}` (expected latent, obs-score or action-obs-score)")).into()),
    };
    Ok(match lipschitz {
        Some(l) => objective.with_lipschitz(l)?,
        None => objective,
    })
}

fn plan_cmd(ctx: &Session, objective_id: &str, lipschitz: Option<f64>, pbvi: bool) -> Result<()> {
    let objective = objective(&ctx.pomdp, objective_id, lipschitz)?;
    let (family, cache) = ctx.cache()?;
    let t = ctx.cfg.horizon;
    let mut failed = Vec::new();
    for eps in ctx.eps() {
        let part = eps_partition(&cache, eps)?;
        let q = QuotientPomdp::build(&ctx.pomdp, &part)?;
        let plan = plan_compare(&ctx.pomdp, &q, &family, &objective, t)?;
        let bound = check_value_bound(&ctx.pomdp, &q, &family, &objective, eps, t)?;
        println!("ε = {eps}: {} classes", part.class_count());
        println!("  original optimum  {:.6}  {}", plan.original.value, plan.original.policy);
        println!("  quotient optimum  {:.6}  {}", plan.quotient.value, plan.quotient.policy);
        println!("  regret {:.6} (bound {:.6}), max gap {:.6} (bound {:.6})", plan.regret, bound.regret_bound, bound.gap, bound.bound);
        if !bound.holds() {
            failed.push(format!("value bound violated at ε = {eps}"));
        }
        if pbvi {
            let score = match &objective.kind {
                ObjectiveKind::ObservationScore { g } => Some(g.as_slice()),
                _ => None,
            };
            let distance = ctx.cfg.metric.distance(&ctx.pomdp);
            let r = pbvi_compare(&ctx.pomdp, &family, t, eps, &distance, PBVI_BELIEF_POINTS, PBVI_SEED, score)?;
            println!(
                "  PBVI original {:.6}, quotient {:.6}, gap {:.3e}, {} classes, {} materialized states",
                r.original_value, r.quotient_value, r.gap, r.quotient_states, r.materialized_states
            );
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CheckFailed(failed.join("; ")).into())
    }
}

fn table_cmd(cli: &Cli, run: &RunArgs, ids: &[String], profile: &str, manifest: Option<&Path>) -> Result<()> {
    let ctx = Session::new(cli, run)?;
    let cfg = ctx.cfg;
    let tables: Vec<TableId> =
        if ids.is_empty() { profile.parse::<Profile>()?.tables() } else { ids.iter().map(|s| s.parse()).collect::<boundq::Result<_>>()? };
    let mut produced = Vec::new();
    for id in tables {
        let art = run_table(id, &cfg)?;
        write(&art, &cfg.output_dir)?;
        produced.push((id, art));
    }
    if let Some(path) = manifest {
        let refs: Vec<(TableId, &Artifact)> = produced.iter().map(|(id, a)| (*id, a)).collect();
        std::fs::write(path, manifest_for(&refs, 1e-6)?.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify_cmd(cli: &Cli, dir: Option<&Path>, manifest: Option<&Path>) -> Result<()> {
    let dir = dir.unwrap_or(&cli.output_dir);
    let manifest = match manifest {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::InvalidConfig(format!("manifest {}: {e}", p.display())))?;
            Manifest::from_json(&text)?
        }
        None => Manifest::from_json(TIER1_MANIFEST)?,
    };
    let report = verify_artifacts(dir, &manifest);
    for failure in report.failures() {
        println!("FAIL {}", failure.message);
    }
    let failed = report.failures().count();
    println!("{} of {} checks passed", report.outcomes.len() - failed, report.outcomes.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CheckFailed(format!("{failed} manifest checks failed")).into())
    }
}

fn sweep_cmd(ctx: &Session, benchmarks: &[String], memories: &[usize]) -> Result<()> {
    let specs: Vec<BenchmarkSpec> = benchmarks.iter().map(|s| s.parse()).collect::<boundq::Result<_>>()?;
    let eps = ctx.cfg.eps_or(&[0.0, 0.1, 0.3, 0.5]);
    let art = value_bound_sweep(&specs, memories, ctx.cfg.horizon, &eps, &ctx.cfg)?;
    write(&art, &ctx.cfg.output_dir)?;
    let holds = art.column("holds").expect("sweep has a holds column");
    let violations = art.rows.iter().filter(|r| r[holds] != "true").count();
    println!("{} rows, {violations} violations", art.rows.len());
    if violations == 0 {
        Ok(())
    } else {
        Err(CheckFailed(format!("{violations} sweep rows violate the value or regret bound")).into())
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Bench(run) => bench(&Session::new(cli, run)?),
        Command::Cache(run) => cache_cmd(&Session::new(cli, run)?),
        Command::Partition(run) => partition_cmd(&Session::new(cli, run)?),
        Command::Quotient(run) => quotient_cmd(&Session::new(cli, run)?),
        Command::Subset { run, k } => subset_cmd(&Session::new(cli, run)?, *k),
        Command::Sample(run) => sample_cmd(&Session::new(cli, run)?),
        Command::Layered { run, tau, lipschitz } => layered_cmd(&Session::new(cli, run)?, *tau, *lipschitz),
        Command::Plan { run, objective, lipschitz, pbvi } => plan_cmd(&Session::new(cli, run)?, objective, *lipschitz, *pbvi),
        Command::Table { run, tables, profile, write_manifest } => table_cmd(cli, run, tables, profile, write_manifest.as_deref()),
        Command::Verify { dir, manifest } => verify_cmd(cli, dir.as_deref(), manifest.as_deref()),
        Command::Sweep { run, benchmarks, memories } => sweep_cmd(&Session::new(cli, run)?, benchmarks, memories),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<CheckFailed>() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidConfig(_)
            | Error::InvalidBenchmark { .. }
            | Error::InvalidMetric(_)
            | Error::SizeGuard { .. }
            | Error::InvalidDistribution { .. }
            | Error::DimensionMismatch(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
