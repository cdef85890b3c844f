//! Table protocols. Each table is a fixed experiment whose thresholds, seed and
//! sampling sizes come from the [`RunConfig`]; runtimes are written only when
//! `timing` is set.

use std::path::PathBuf;
use std::time::Instant;

use super::artifact::{config_hash, fnum, Artifact};
use super::config::{RunConfig, TableId};
use crate::error::{Error, Result};
use crate::layered::{check_data_processing, direct_histories, run_layered, LayeredPlan, Wrapper};
use crate::model::{BenchmarkSpec, Pomdp};
use crate::planning::{
    check_exact_sufficiency, check_value_bound, exhaustive_search, pbvi_compare, plan_compare, Objective, PBVI_BELIEF_POINTS, PBVI_SEED,
    VALUE_TOL,
};
use crate::probes::{enumerate_family, FamilyKind, ProbeFamily, DEFAULT_FAMILY_CAP};
use crate::pseudometric::{build_cache, delta_cross_family, envelope, model_distance, CacheOptions, DistanceCache};
use crate::quotient::{adjusted_rand_index, eps_partition, Partition, QuotientPomdp};
use crate::sampling::{bootstrap_coverage, bootstrap_ci_max_w1, convergence, seed_stability, SampledLaws, CONVERGENCE_REPS, CONVERGENCE_SIZES};
use crate::selection::{effective_rank, greedy_select, hankel_rank, HANKEL_TOL};
use crate::transport::{GroundMetric, LawDistance};

/// Thresholds of the medium-scale and seed-stability protocols.
pub const MEDIUM_EPS: [f64; 4] = [0.0, 0.1, 0.25, 0.45];
/// Thresholds of the value-bound panels.
pub const VALUE_BOUND_EPS: [f64; 4] = [0.0, 0.1, 0.3, 0.5];
/// Thresholds of the data-processing check.
pub const DATA_PROCESSING_EPS: [f64; 13] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.8, 1.0];
/// Thresholds of the belief-sensitivity study.
pub const BELIEF_EPS: [f64; 3] = [0.0, 0.3, 0.5];
/// `b0(s_0)` grid of the belief-sensitivity study on two-state models.
pub const BELIEF_GRID: [f64; 5] = [0.5, 0.3, 0.1, 0.7, 0.9];
/// Trajectory counts of the coverage study.
pub const COVERAGE_SIZES: [usize; 3] = [100, 250, 500];
/// Replications of the coverage study.
pub const COVERAGE_REPLICATIONS: usize = 200;
/// Nominal bootstrap confidence.
pub const CONFIDENCE: f64 = 0.95;
/// `L_R` of GridWorld's goal reward in the value-bound panel.
pub const GRID_GOAL_LIPSCHITZ: f64 = 2.0;
/// Tiger latent-reward `L_R`.
pub const TIGER_LATENT_LIPSCHITZ: f64 = 110.0;

fn bench(spec: &str) -> Result<(String, Pomdp)> {
    let spec: BenchmarkSpec = spec.parse()?;
    Ok((spec.to_string(), spec.build()?))
}

fn options(cfg: &RunConfig) -> CacheOptions {
    if cfg.serial {
        CacheOptions::serial()
    } else {
        CacheOptions::default()
    }
}

fn w1(pomdp: &Pomdp) -> LawDistance {
    LawDistance::Wasserstein(pomdp.metric().clone())
}

fn family(pomdp: &Pomdp, kind: FamilyKind, m: usize, horizon: usize) -> Result<ProbeFamily> {
    enumerate_family(kind, m, pomdp.n_actions(), pomdp.n_observations(), horizon, DEFAULT_FAMILY_CAP)
}

fn cache(pomdp: &Pomdp, name: &str, fam: &ProbeFamily, horizon: usize, distance: &LawDistance, cfg: &RunConfig) -> Result<DistanceCache> {
    build_cache(pomdp, name, fam, horizon, distance, options(cfg))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn seconds(cfg: &RunConfig, s: f64) -> String {
    if cfg.timing {
        format!("{s:.6}")
    } else {
        String::new()
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

/// Run one table protocol.
pub fn run_table(id: TableId, cfg: &RunConfig) -> Result<Artifact> {
    let hash = config_hash(&(id.name(), cfg))?;
    match id {
        TableId::ProbeFamilyComparison => probe_family_comparison(cfg, hash),
        TableId::ObservationPlanning => observation_planning(cfg, hash),
        TableId::LatentPlanning => latent_planning(cfg, hash),
        TableId::PartitionAgreement => partition_agreement(cfg, hash),
        TableId::MediumScale => medium_scale(cfg, hash),
        TableId::ValueBounds => value_bounds(cfg, hash),
        TableId::DataProcessing => data_processing(cfg, hash),
        TableId::HierarchicalScaling => hierarchical_scaling(cfg, hash),
        TableId::SamplingVariance => sampling_variance(cfg, hash),
        TableId::BootstrapCoverage => coverage_table(cfg, hash),
        TableId::Convergence => convergence_table(cfg, hash),
        TableId::LowRank => low_rank(cfg, hash),
        TableId::BeliefSensitivity => belief_table(cfg, hash),
        TableId::PbviComparison => pbvi_table(cfg, hash),
    }
}

/// Run a table and write `<output_dir>/<name>.csv`.
pub fn write_table(id: TableId, cfg: &RunConfig) -> Result<PathBuf> {
    run_table(id, cfg)?.write(&cfg.output_dir)
}

/// Tiger horizons `{2, 4, …}` up to the configured maximum.
fn tiger_horizons(cfg: &RunConfig) -> Vec<usize> {
    [2, 4, 6, 8, 10].into_iter().filter(|&t| t <= cfg.max_horizon).collect()
}

fn probe_family_comparison(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::ProbeFamilyComparison.name(),
        hash,
        &["benchmark", "T", "histories", "op_classes", "clk_classes", "ari", "delta_clk", "obs_value_changed", "t_op", "t_clk"],
    );
    let mut cases: Vec<(&str, usize)> = tiger_horizons(cfg).into_iter().map(|t| ("tiger-full", t)).collect();
    cases.extend([("gridworld:3", 2), ("gridworld:3", 3), ("gridworld:5", 2), ("witness", 3)]);
    for (spec, t) in cases {
        let (name, p) = bench(spec)?;
        let d = w1(&p);
        let op_family = family(&p, FamilyKind::Stationary, 1, t)?;
        let clk_family = family(&p, FamilyKind::ClockAware, 1, t)?;
        let ((op_cache, op_part), t_op) = timed(|| {
            let c = cache(&p, &name, &op_family, t, &d, cfg)?;
            let part = eps_partition(&c, 0.0)?;
            Ok((c, part))
        })?;
        let ((clk_cache, clk_part), t_clk) = timed(|| {
            let c = cache(&p, &name, &clk_family, t, &d, cfg)?;
            let part = eps_partition(&c, 0.0)?;
            Ok((c, part))
        })?;
        let gap = delta_cross_family(&clk_cache, &op_cache)?;
        let op_quotient = QuotientPomdp::build(&p, &op_part)?;
        let plan = plan_compare(&p, &op_quotient, &clk_family, &Objective::default_observation_score(&p), t)?;
        art.push(vec![
            name,
            t.to_string(),
            op_cache.tree().total().to_string(),
            op_part.class_count().to_string(),
            clk_part.class_count().to_string(),
            fnum(adjusted_rand_index(&clk_part, &op_part)?),
            fnum(gap.delta),
            yes_no(plan.regret > VALUE_TOL),
            seconds(cfg, t_op),
            seconds(cfg, t_clk),
        ])?;
    }
    Ok(art)
}

/// Planning cases shared by the observation and latent tables.
fn planning_cases(cfg: &RunConfig, grid_five: bool) -> Vec<(&'static str, usize)> {
    let mut cases: Vec<(&str, usize)> = tiger_horizons(cfg).into_iter().map(|t| ("tiger-full", t)).collect();
    cases.extend([("gridworld:3", 2), ("gridworld:3", 3)]);
    if grid_five {
        cases.push(("gridworld:5", 2));
    }
    cases
}

/// Clock-aware `m = 1` family, its exact quotient and the build time.
fn clock_quotient(p: &Pomdp, name: &str, t: usize, cfg: &RunConfig) -> Result<(ProbeFamily, Partition, QuotientPomdp, f64)> {
    let fam = family(p, FamilyKind::ClockAware, 1, t)?;
    let ((part, q), secs) = timed(|| {
        let c = cache(p, name, &fam, t, &w1(p), cfg)?;
        let part = eps_partition(&c, 0.0)?;
        let q = QuotientPomdp::build(p, &part)?;
        Ok((part, q))
    })?;
    Ok((fam, part, q, secs))
}

fn observation_planning(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::ObservationPlanning.name(),
        hash,
        &["benchmark", "objective", "T", "histories", "classes", "policy", "v_orig", "v_quot", "regret", "max_deviation", "t_orig", "t_quot"],
    );
    for (spec, t) in planning_cases(cfg, true) {
        let (name, p) = bench(spec)?;
        let (fam, part, q, build) = clock_quotient(&p, &name, t, cfg)?;
        for objective in [Objective::default_observation_score(&p), Objective::default_action_observation_score(&p)] {
            let plan = plan_compare(&p, &q, &fam, &objective, t)?;
            let deviation = check_exact_sufficiency(&p, &q, &fam, &objective, t)?;
            art.push(vec![
                name.clone(),
                objective.id().into(),
                t.to_string(),
                part.tree().total().to_string(),
                part.class_count().to_string(),
                plan.original.policy.clone(),
                fnum(plan.original.value),
                fnum(plan.quotient.value),
                fnum(plan.regret),
                format!("{deviation:.3e}"),
                seconds(cfg, plan.original.seconds),
                seconds(cfg, build + plan.quotient.seconds),
            ])?;
        }
    }
    Ok(art)
}

fn latent_planning(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::LatentPlanning.name(),
        hash,
        &["benchmark", "reward", "T", "histories", "classes", "policy", "v_orig", "v_quot_on_orig", "regret", "t_orig", "t_quot"],
    );
    for (spec, t) in planning_cases(cfg, false) {
        let (name, p) = bench(spec)?;
        let (fam, part, q, build) = clock_quotient(&p, &name, t, cfg)?;
        let plan = plan_compare(&p, &q, &fam, &Objective::latent(&p), t)?;
        art.push(vec![
            name,
            "latent".into(),
            t.to_string(),
            part.tree().total().to_string(),
            part.class_count().to_string(),
            plan.original.policy.clone(),
            fnum(plan.original.value),
            fnum(plan.quotient_policy_on_original),
            fnum(plan.regret),
            seconds(cfg, plan.original.seconds),
            seconds(cfg, build + plan.quotient.seconds),
        ])?;
    }
    Ok(art)
}

fn partition_agreement(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::PartitionAgreement.name(),
        hash,
        &["benchmark", "T", "eps", "k", "delta_s", "exact_classes", "approx_classes", "ari", "chosen"],
    );
    let ks = [1usize, 3, 5];
    for (spec, t, protocol_eps) in [("tiger-full", 4usize, 0.0), ("gridworld:3", 2, 0.3)] {
        let (name, p) = bench(spec)?;
        let fam = family(&p, FamilyKind::Stationary, 2, t)?;
        let full = cache(&p, &name, &fam, t, &w1(&p), cfg)?;
        let k_max = ks.iter().copied().max().unwrap_or(1).min(fam.len());
        let selection = greedy_select(&full, k_max)?;
        for eps in cfg.eps_or(&[protocol_eps]) {
            let exact = eps_partition(&full, eps)?;
            for &k in ks.iter().filter(|&&k| k <= k_max) {
                let chosen = &selection.chosen[..k];
                let approx = eps_partition(&full.restrict(chosen)?, eps)?;
                art.push(vec![
                    name.clone(),
                    t.to_string(),
                    fnum(eps),
                    k.to_string(),
                    fnum(selection.delta_s[k - 1]),
                    exact.class_count().to_string(),
                    approx.class_count().to_string(),
                    fnum(adjusted_rand_index(&exact, &approx)?),
                    chosen.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                ])?;
            }
        }
    }
    Ok(art)
}

fn medium_scale(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::MediumScale.name(), hash, &["benchmark", "states", "eps", "classes", "ci_lo", "ci_hi", "t_cache"]);
    let eps_list = cfg.eps_or(&MEDIUM_EPS);
    if eps_list.is_empty() {
        return Ok(art);
    }
    let sampling = cfg.sampling();
    for spec in ["gridworld:8", "gridworld:10", "rocksample:4,4", "random:50,4,seed=7,structured", "random:100,4,seed=7,structured"] {
        let (name, p) = bench(spec)?;
        let d = w1(&p);
        let fam = family(&p, FamilyKind::Stationary, 1, 2)?;
        let ((laws, sampled), t_cache) = timed(|| {
            let laws = SampledLaws::draw(&p, &fam, 2, &sampling)?;
            let c = laws.to_cache(&d, sampling.parallel)?;
            Ok((laws, c))
        })?;
        let (lo, hi) = bootstrap_ci_max_w1(&laws, &d, sampling.resamples, CONFIDENCE, cfg.seed)?;
        for &eps in &eps_list {
            art.push(vec![
                name.clone(),
                p.n_states().to_string(),
                fnum(eps),
                eps_partition(&sampled, eps)?.class_count().to_string(),
                fnum(lo),
                fnum(hi),
                seconds(cfg, t_cache),
            ])?;
        }
    }
    Ok(art)
}

/// Value-bound report for one benchmark and objective at every threshold, on the
/// stationary `m`-node family at horizon `T`.
#[allow(clippy::too_many_arguments)]
fn value_bound_rows(
    art: &mut Artifact,
    panel: &str,
    name: &str,
    p: &Pomdp,
    objective: &Objective,
    m: usize,
    t: usize,
    eps_list: &[f64],
    cfg: &RunConfig,
) -> Result<()> {
    let fam = family(p, FamilyKind::Stationary, m, t)?;
    let d = w1(p);
    let c = cache(p, name, &fam, t, &d, cfg)?;
    for &eps in eps_list {
        let part = eps_partition(&c, eps)?;
        let q = QuotientPomdp::build(p, &part)?;
        let report = check_value_bound(p, &q, &fam, objective, eps, t)?;
        let dist = model_distance(p, &q, &fam, t, &d)?;
        art.push(vec![
            panel.into(),
            name.into(),
            objective.id().into(),
            m.to_string(),
            fnum(objective.reward_lipschitz),
            fnum(eps),
            part.class_count().to_string(),
            fnum(report.gap),
            fnum(dist),
            fnum(report.bound),
            fnum(objective.reward_lipschitz * t as f64 * dist),
            fnum(report.canonical_bound),
            fnum(report.regret),
            fnum(report.regret_bound),
            report.holds().to_string(),
        ])?;
    }
    Ok(())
}

const VALUE_BOUND_COLUMNS: [&str; 15] = [
    "panel",
    "benchmark",
    "objective",
    "m",
    "reward_lipschitz",
    "eps",
    "classes",
    "empirical",
    "model_distance",
    "bound",
    "lrtd",
    "canonical",
    "regret",
    "regret_bound",
    "holds",
];

fn value_bounds(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::ValueBounds.name(), hash, &VALUE_BOUND_COLUMNS);
    let eps_list = cfg.eps_or(&VALUE_BOUND_EPS);
    let (tiger, tp) = bench("tiger-full")?;
    let (grid, gp) = bench("gridworld:3")?;
    let synthetic = Objective::default_observation_score(&tp).with_lipschitz(1.0)?;
    let latent = Objective::latent(&tp).with_lipschitz(TIGER_LATENT_LIPSCHITZ)?;
    let goal = Objective::latent(&gp).with_lipschitz(GRID_GOAL_LIPSCHITZ)?;
    value_bound_rows(&mut art, "A", &tiger, &tp, &synthetic, 1, 2, &eps_list, cfg)?;
    value_bound_rows(&mut art, "B", &tiger, &tp, &latent, 1, 2, &eps_list, cfg)?;
    value_bound_rows(&mut art, "C", &grid, &gp, &goal, 1, 2, &eps_list, cfg)?;
    Ok(art)
}

/// Value-bound sweep over benchmarks, memories and thresholds with each benchmark's
/// latent reward (`L_R` = reward range).
pub fn value_bound_sweep(specs: &[BenchmarkSpec], memories: &[usize], horizon: usize, eps_list: &[f64], cfg: &RunConfig) -> Result<Artifact> {
    let hash = config_hash(&("sweep", specs, memories, horizon, eps_list, cfg))?;
    let mut art = Artifact::new("sweep", hash, &VALUE_BOUND_COLUMNS);
    for spec in specs {
        let p = spec.build()?;
        for &m in memories {
            value_bound_rows(&mut art, "sweep", &spec.to_string(), &p, &Objective::latent(&p), m, horizon, eps_list, cfg)?;
        }
    }
    Ok(art)
}

/// GridWorld merge `NW+NE → N`, `SW+SE → S` with `d(N, S) = 0.5`.
pub fn north_south_merge(grid: &Pomdp) -> Result<Wrapper> {
    if grid.n_observations() != 4 {
        return Err(Error::DimensionMismatch("the north/south merge needs the four quadrant observations".into()));
    }
    Wrapper::observation_merge(grid, &[0, 0, 1, 1], vec!["N".into(), "S".into()], GroundMetric::custom(2, vec![0.0, 0.5, 0.5, 0.0])?)
}

fn data_processing(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::DataProcessing.name(),
        hash,
        &["benchmark", "eps", "lipschitz", "before", "lhs", "rhs", "holds", "orig_max", "coarse_max"],
    );
    for spec in ["gridworld:3", "gridworld:5"] {
        let (name, g) = bench(spec)?;
        let merge = north_south_merge(&g)?;
        let coarse = crate::layered::apply_wrapper(&g, &merge)?;
        let fam = family(&g, FamilyKind::Stationary, 1, 2)?;
        let coarse_fam = family(&coarse, FamilyKind::Stationary, 1, 2)?;
        let c = cache(&g, &name, &fam, 2, &w1(&g), cfg)?;
        let orig_max = envelope(&c, None)?.max();
        let coarse_max = envelope(&cache(&coarse, &name, &coarse_fam, 2, &w1(&coarse), cfg)?, None)?.max();
        for eps in cfg.eps_or(&DATA_PROCESSING_EPS) {
            let q = QuotientPomdp::build(&g, &eps_partition(&c, eps)?)?;
            let check = check_data_processing(&g, &q, g.metric(), &merge, FamilyKind::Stationary, 1, 2)?;
            art.push(vec![
                name.clone(),
                fnum(eps),
                fnum(check.lipschitz),
                fnum(check.before),
                fnum(check.lhs),
                fnum(check.rhs),
                check.holds().to_string(),
                fnum(orig_max),
                fnum(coarse_max),
            ])?;
        }
    }
    Ok(art)
}

/// Segment length used for a layered run at horizon `T`.
pub fn layered_tau(horizon: usize) -> usize {
    if horizon <= 8 {
        4.min(horizon)
    } else {
        horizon.div_ceil(2)
    }
}

/// Threshold of the horizon-scaling study.
pub const LAYERED_EPS: f64 = 0.5;

fn hierarchical_scaling(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::HierarchicalScaling.name(),
        hash,
        &["T", "method", "tau", "layers", "histories", "classes", "empirical", "bound", "holds", "runtime"],
    );
    let (name, tiger) = bench("tiger-full")?;
    let eps = cfg.eps.as_ref().and_then(|e| e.first().copied()).unwrap_or(LAYERED_EPS);
    for t in [4usize, 6, 8, 10] {
        let direct = direct_histories(tiger.n_observations(), t);
        if t <= cfg.max_horizon {
            let (classes, secs) = timed(|| {
                let fam = family(&tiger, FamilyKind::Stationary, 1, t)?;
                let c = cache(&tiger, &name, &fam, t, &w1(&tiger), cfg)?;
                Ok(eps_partition(&c, eps)?.class_count())
            })?;
            art.push(vec![t.to_string(), "direct".into(), String::new(), "1".into(), direct.to_string(), classes.to_string(), String::new(), String::new(), String::new(), seconds(cfg, secs)])?;
        } else {
            art.push(vec![t.to_string(), "direct".into(), String::new(), "1".into(), direct.to_string(), String::new(), String::new(), String::new(), String::new(), String::new()])?;
        }
        let tau = layered_tau(t);
        let plan = LayeredPlan::uniform(tiger.clone(), t, tau, eps, FamilyKind::Stationary, 1)?;
        let (report, secs) = timed(|| run_layered(&plan, 1.0))?;
        let last = report.rows.last().expect("nonempty plan");
        art.push(vec![
            t.to_string(),
            "layered".into(),
            tau.to_string(),
            plan.segments.len().to_string(),
            report.histories_layered.to_string(),
            last.classes.to_string(),
            fnum(last.empirical),
            fnum(last.bound),
            report.holds().to_string(),
            seconds(cfg, secs),
        ])?;
    }
    Ok(art)
}

fn sampling_variance(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::SamplingVariance.name(), hash, &["benchmark", "eps", "mean", "std", "min", "max", "seeds"]);
    let eps_list = cfg.eps_or(&MEDIUM_EPS);
    if eps_list.is_empty() {
        return Ok(art);
    }
    let (name, g) = bench("gridworld:10")?;
    let fam = family(&g, FamilyKind::Stationary, 1, 2)?;
    let sampling = cfg.sampling();
    for s in seed_stability(&g, &fam, 2, &w1(&g), &sampling, &eps_list)? {
        art.push(vec![
            name.clone(),
            fnum(s.eps),
            fnum(s.mean),
            fnum(s.std),
            s.min.to_string(),
            s.max.to_string(),
            sampling.stability_seeds.len().to_string(),
        ])?;
    }
    Ok(art)
}

fn coverage_table(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::BootstrapCoverage.name(), hash, &["benchmark", "n", "replications", "coverage", "mean_width", "truth"]);
    let (name, g) = bench("gridworld:3")?;
    let fam = family(&g, FamilyKind::Stationary, 1, 2)?;
    for n in COVERAGE_SIZES {
        let r = bootstrap_coverage(&g, &fam, 2, &w1(&g), n, COVERAGE_REPLICATIONS, cfg.sampling.resamples, CONFIDENCE, cfg.seed)?;
        art.push(vec![name.clone(), n.to_string(), r.replications.to_string(), fnum(r.coverage), fnum(r.mean_width), fnum(r.truth)])?;
    }
    Ok(art)
}

fn convergence_table(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::Convergence.name(), hash, &["benchmark", "n", "eps", "mean_ari", "min_ari", "reps"]);
    let eps_list = cfg.eps_or(&crate::sampling::CONVERGENCE_EPS);
    if eps_list.is_empty() {
        return Ok(art);
    }
    let (name, g) = bench("gridworld:3")?;
    let fam = family(&g, FamilyKind::Stationary, 1, 2)?;
    let rows = convergence(&g, &fam, 2, &w1(&g), &CONVERGENCE_SIZES, CONVERGENCE_REPS, &eps_list, cfg.seed)?;
    for r in &rows {
        art.push(vec![name.clone(), r.n.to_string(), fnum(r.eps), fnum(r.mean_ari), fnum(r.min_ari), r.reps.to_string()])?;
    }
    for n in CONVERGENCE_SIZES {
        let group: Vec<_> = rows.iter().filter(|r| r.n == n).collect();
        let mean = group.iter().map(|r| r.mean_ari).sum::<f64>() / group.len() as f64;
        let min = group.iter().map(|r| r.min_ari).fold(f64::INFINITY, f64::min);
        art.push(vec![name.clone(), n.to_string(), "all".into(), fnum(mean), fnum(min), CONVERGENCE_REPS.to_string()])?;
    }
    Ok(art)
}

fn low_rank(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::LowRank.name(), hash, &["kind", "benchmark", "T", "m", "probes", "depth", "rank"]);
    for (spec, t, depth) in [("tiger-full", 4usize, Some(3usize)), ("tiger-full", 4, None), ("gridworld:3", 2, None)] {
        let (name, p) = bench(spec)?;
        let fam = family(&p, FamilyKind::Stationary, 2, t)?;
        let c = cache(&p, &name, &fam, t, &w1(&p), cfg)?;
        art.push(vec![
            "effective_99".into(),
            name,
            t.to_string(),
            "2".into(),
            fam.len().to_string(),
            depth.map_or_else(|| "all".into(), |d| d.to_string()),
            effective_rank(&c, 0.99, depth)?.to_string(),
        ])?;
    }
    for (spec, t) in [("tiger-listen", 2usize), ("tiger-full", 2), ("gridworld:3", 2)] {
        let (name, p) = bench(spec)?;
        art.push(vec!["hankel".into(), name, t.to_string(), String::new(), String::new(), String::new(), hankel_rank(&p, t, HANKEL_TOL)?.to_string()])?;
    }
    Ok(art)
}

/// One row of the belief-sensitivity study.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeliefSensitivityRow {
    /// Initial belief used.
    pub b0: Vec<f64>,
    /// Merge threshold.
    pub eps: f64,
    /// Class count under `b0`.
    pub classes: usize,
    /// ARI against the uniform-`b0` partition at the same threshold.
    pub ari: f64,
}

/// Partitions under each initial belief in `grid`, compared with the uniform-`b0` partition.
pub fn belief_sensitivity(
    pomdp: &Pomdp,
    fam: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    grid: &[Vec<f64>],
    eps_list: &[f64],
    options: CacheOptions,
) -> Result<Vec<BeliefSensitivityRow>> {
    let n = pomdp.n_states();
    let reference_model = pomdp.with_initial(vec![1.0 / n as f64; n])?;
    let reference = build_cache(&reference_model, pomdp.name(), fam, horizon, distance, options)?;
    let mut rows = Vec::new();
    for b0 in grid {
        let model = pomdp.with_initial(b0.clone())?;
        let c = build_cache(&model, pomdp.name(), fam, horizon, distance, options)?;
        for &eps in eps_list {
            let part = eps_partition(&c, eps)?;
            let ari = adjusted_rand_index(&eps_partition(&reference, eps)?, &part)?;
            rows.push(BeliefSensitivityRow { b0: b0.clone(), eps, classes: part.class_count(), ari });
        }
    }
    Ok(rows)
}

fn belief_table(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(TableId::BeliefSensitivity.name(), hash, &["benchmark", "b0_first", "b0", "eps", "classes", "ari"]);
    let spec = cfg.benchmark.clone().unwrap_or(BenchmarkSpec::TigerFull { accuracy: crate::model::TIGER_ACCURACY });
    let p = spec.build()?;
    if p.n_states() != 2 {
        return Err(Error::InvalidConfig(format!("belief grid `b0(s_0)` needs a two-state benchmark, `{spec}` has {} states", p.n_states())));
    }
    let grid: Vec<Vec<f64>> = BELIEF_GRID.iter().map(|&x| vec![x, 1.0 - x]).collect();
    let fam = family(&p, FamilyKind::Stationary, 1, 2)?;
    for row in belief_sensitivity(&p, &fam, 2, &w1(&p), &grid, &cfg.eps_or(&BELIEF_EPS), options(cfg))? {
        art.push(vec![
            spec.to_string(),
            fnum(row.b0[0]),
            row.b0.iter().map(|&x| fnum(x)).collect::<Vec<_>>().join(";"),
            fnum(row.eps),
            row.classes.to_string(),
            fnum(row.ari),
        ])?;
    }
    Ok(art)
}

/// Horizon of the PBVI comparison.
pub const PBVI_HORIZON: usize = 3;

fn pbvi_table(cfg: &RunConfig, hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        TableId::PbviComparison.name(),
        hash,
        &["benchmark", "states", "eps", "quotient_states", "materialized_states", "v_orig", "v_quot", "gap", "t_orig", "t_quot", "speedup"],
    );
    for spec in ["tiger-full", "gridworld:3", "gridworld:5", "network:4", "rocksample:4,4"] {
        let (name, p) = bench(spec)?;
        let fam = family(&p, FamilyKind::Stationary, 1, PBVI_HORIZON)?;
        for eps in cfg.eps_or(&[0.5]) {
            let r = pbvi_compare(&p, &fam, PBVI_HORIZON, eps, &w1(&p), PBVI_BELIEF_POINTS, PBVI_SEED, None)?;
            art.push(vec![
                name.clone(),
                p.n_states().to_string(),
                fnum(eps),
                r.quotient_states.to_string(),
                r.materialized_states.to_string(),
                fnum(r.original_value),
                fnum(r.quotient_value),
                fnum(r.gap),
                seconds(cfg, r.original_seconds),
                seconds(cfg, r.partition_seconds + r.build_seconds + r.quotient_seconds),
                if cfg.timing { format!("{:.3}", r.speedup) } else { String::new() },
            ])?;
        }
    }
    Ok(art)
}

/// Best policy value on a model for reporting (used by the CLI `plan` command).
pub fn best_policy(model: &Pomdp, fam: &ProbeFamily, objective: &Objective, horizon: usize) -> Result<(String, f64)> {
    let r = exhaustive_search(model, fam, objective, horizon)?;
    Ok((r.policy, r.value))
}

/// Key and pinned value columns used when deriving a manifest from a table.
pub fn manifest_columns(id: TableId) -> (&'static [&'static str], &'static [&'static str]) {
    match id {
        TableId::ProbeFamilyComparison => (&["benchmark", "T"], &["histories", "op_classes", "clk_classes", "ari", "delta_clk", "obs_value_changed"]),
        TableId::ObservationPlanning => (&["benchmark", "objective", "T"], &["classes", "v_orig", "v_quot", "regret"]),
        TableId::LatentPlanning => (&["benchmark", "T"], &["classes", "v_orig", "v_quot_on_orig", "regret"]),
        TableId::PartitionAgreement => (&["benchmark", "eps", "k"], &["delta_s", "exact_classes", "approx_classes", "ari"]),
        TableId::MediumScale => (&["benchmark", "eps"], &["classes", "ci_lo", "ci_hi"]),
        TableId::ValueBounds => (&["panel", "eps"], &["classes", "empirical", "bound", "holds"]),
        TableId::DataProcessing => (&["benchmark", "eps"], &["lhs", "rhs", "holds"]),
        TableId::HierarchicalScaling => (&["T", "method"], &["histories", "classes", "holds"]),
        TableId::SamplingVariance => (&["eps"], &["mean", "std"]),
        TableId::BootstrapCoverage => (&["n"], &["coverage", "mean_width"]),
        TableId::Convergence => (&["n", "eps"], &["mean_ari", "min_ari"]),
        TableId::LowRank => (&["kind", "benchmark", "depth"], &["rank"]),
        TableId::BeliefSensitivity => (&["b0_first", "eps"], &["classes", "ari"]),
        TableId::PbviComparison => (&["benchmark", "eps"], &["quotient_states", "v_orig", "v_quot", "gap"]),
    }
}

/// Manifest pinning every value column of `tables` at absolute tolerance `tol`.
pub fn manifest_for(tables: &[(TableId, &Artifact)], tol: f64) -> Result<super::artifact::Manifest> {
    let specs: Vec<(&Artifact, &[&str], &[&str], f64)> = tables
        .iter()
        .map(|(id, art)| {
            let (keys, cols) = manifest_columns(*id);
            (*art, keys, cols, tol)
        })
        .collect();
    super::artifact::Manifest::from_artifacts(&specs)
}
