//! End-to-end commands behind the CLI: instance-pool generation, portfolio
//! training and test evaluation, with documented on-disk formats and a
//! reproducibility manifest in every output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bacp::{BacpClass, BacpInstance};
use crate::error::{Error, Result};
use crate::instgen::{
    extract_features, generate, gmeans_cluster, select_per_cluster, Clustering, GeneratorConfig,
    FEATURE_NAMES,
};
use crate::mcts::{multi_round, MctsConfig, Portfolio};
use crate::race::{KernelEvaluator, RaceConfig, RaceRow};
use crate::selector::{
    run_entry_protocol, run_test_protocol, summarize, train_selector, virtual_best,
    ProtocolConfig, SelectorModel, SummaryRow, TestOutcome,
};
use crate::streamliner::{generate_candidates, CandidateConfig, Streamliner};

/// Significance level of the G-means split test.
pub const GMEANS_ALPHA: f64 = 1e-4;

/// Fallback budget multiplier over the test window top.
pub const FALLBACK_MULTIPLIER: u64 = 10;

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reproducibility record written to every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub root_seed: u64,
    /// Input path -> sha256 of its contents.
    pub inputs: BTreeMap<String, String>,
    /// Output file (relative to the out dir) -> sha256.
    pub outputs: BTreeMap<String, String>,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: serde_json::Value,
    root_seed: u64,
    inputs: BTreeMap<String, String>,
    output_files: &[&str],
) -> Result<()> {
    let mut outputs = BTreeMap::new();
    for rel in output_files {
        let bytes = fs::read(out_dir.join(rel))?;
        outputs.insert(rel.to_string(), sha256_hex(&bytes));
    }
    let manifest = RunManifest {
        tool: "streamline".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config,
        root_seed,
        inputs,
        outputs,
    };
    write_atomic(
        &out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    Ok(())
}

fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Run a closure inside a rayon pool of the requested width (0 keeps the
/// library default). A width of 1 gives a fully serial execution.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------------
// gen-instances
// ---------------------------------------------------------------------

/// Metadata written next to a generated pool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoolMeta {
    pub config: GeneratorConfig,
    pub warnings: Vec<String>,
    pub instance_ids: Vec<String>,
    pub cluster_count: usize,
}

#[derive(Debug, Clone)]
pub struct GenArgs {
    pub window: (u64, u64),
    pub count: usize,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
}

/// Pick generator parameter ranges by difficulty window: windows starting
/// below 10^6 nodes use the training shape ranges, harder windows the
/// test shape ranges.
pub fn config_for_window(window: (u64, u64), seed: u64, count: usize, runs: usize) -> GeneratorConfig {
    let mut cfg = if window.0 < 1_000_000 {
        GeneratorConfig::training_defaults(seed, count)
    } else {
        GeneratorConfig::test_defaults(seed, count)
    };
    cfg.cost_window = window;
    cfg.runs = runs;
    cfg
}

pub struct GenOutputs {
    pub pool: PoolMeta,
    pub features: BTreeMap<String, Vec<f64>>,
    pub clustering: Clustering,
}

pub fn gen_instances(args: &GenArgs) -> Result<GenOutputs> {
    if args.window.0 >= args.window.1 {
        return Err(Error::Validation(format!(
            "window {}..{} is empty",
            args.window.0, args.window.1
        )));
    }
    let cfg = config_for_window(args.window, args.seed, args.count, args.runs);
    let pool = with_jobs(args.jobs, || generate(&cfg))??;
    for w in &pool.warnings {
        log::warn!("{w}");
    }
    let mut instances = pool.instances.clone();
    instances.sort_by(|a, b| a.id.cmp(&b.id));

    let raw_features: Vec<(String, Vec<f64>)> = with_jobs(args.jobs, || {
        use rayon::prelude::*;
        instances
            .par_iter()
            .map(|inst| Ok((inst.id.clone(), extract_features(inst)?)))
            .collect::<Result<Vec<_>>>()
    })??;
    let features: BTreeMap<String, Vec<f64>> = raw_features.into_iter().collect();

    // z-normalise per dimension before clustering
    let ids: Vec<&String> = features.keys().collect();
    let dim = FEATURE_NAMES.len();
    let n = ids.len().max(1) as f64;
    let mut means = vec![0.0; dim];
    for id in &ids {
        for (m, x) in means.iter_mut().zip(&features[*id]) {
            *m += x / n;
        }
    }
    let mut stds = vec![0.0; dim];
    for id in &ids {
        for ((s, x), m) in stds.iter_mut().zip(&features[*id]).zip(&means) {
            *s += (x - m) * (x - m) / n;
        }
    }
    for s in &mut stds {
        *s = s.sqrt();
    }
    let normalised: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| {
            features[*id]
                .iter()
                .zip(&means)
                .zip(&stds)
                .map(|((x, m), s)| if *s > 0.0 { (x - m) / s } else { 0.0 })
                .collect()
        })
        .collect();
    let clustering = if ids.len() >= 2 {
        gmeans_cluster(&normalised, GMEANS_ALPHA, crate::seeds::derive(args.seed, "gmeans"))?
    } else {
        Clustering { labels: vec![0; ids.len()], centroids: vec![vec![0.0; dim]] }
    };

    // write the pool
    let out = &args.out;
    fs::create_dir_all(out.join("instances"))?;
    for inst in &instances {
        write_atomic(
            &out.join("instances").join(format!("{}.json", inst.id)),
            serde_json::to_string_pretty(inst)?.as_bytes(),
        )?;
    }
    let mut features_csv = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance_id".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    features_csv.write_record(&header)?;
    for inst in &instances {
        let mut row = vec![inst.id.clone()];
        row.extend(features[&inst.id].iter().map(|v| format!("{v}")));
        features_csv.write_record(&row)?;
    }
    write_atomic(
        &out.join("features.csv"),
        &features_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    let mut clusters_csv = csv::Writer::from_writer(Vec::new());
    clusters_csv.write_record(["instance_id", "cluster"])?;
    for (i, inst) in instances.iter().enumerate() {
        clusters_csv.write_record([inst.id.as_str(), &clustering.labels[i].to_string()])?;
    }
    write_atomic(
        &out.join("clusters.csv"),
        &clusters_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    let mut baseline_csv = csv::Writer::from_writer(Vec::new());
    baseline_csv.write_record(["instance_id", "baseline_cost"])?;
    for inst in &instances {
        baseline_csv.write_record([inst.id.as_str(), &pool.baseline[&inst.id].to_string()])?;
    }
    write_atomic(
        &out.join("baseline.csv"),
        &baseline_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    let meta = PoolMeta {
        config: cfg,
        warnings: pool.warnings.clone(),
        instance_ids: instances.iter().map(|i| i.id.clone()).collect(),
        cluster_count: clustering.k(),
    };
    write_atomic(&out.join("pool.json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;

    let mut outputs = vec!["pool.json", "features.csv", "clusters.csv", "baseline.csv"];
    let instance_files: Vec<String> =
        instances.iter().map(|i| format!("instances/{}.json", i.id)).collect();
    outputs.extend(instance_files.iter().map(|s| s.as_str()));
    write_manifest(
        out,
        "gen-instances",
        serde_json::to_value(&meta.config)?,
        args.seed,
        BTreeMap::new(),
        &outputs,
    )?;
    Ok(GenOutputs { pool: meta, features, clustering })
}

// ---------------------------------------------------------------------
// pool loading
// ---------------------------------------------------------------------

pub struct LoadedPool {
    pub meta: PoolMeta,
    pub instances: Vec<BacpInstance>,
    pub features: BTreeMap<String, Vec<f64>>,
    pub baseline: BTreeMap<String, u64>,
    pub clusters: BTreeMap<String, usize>,
}

pub fn load_pool(dir: &Path) -> Result<LoadedPool> {
    let meta: PoolMeta = serde_json::from_str(&fs::read_to_string(dir.join("pool.json"))?)?;
    let mut instances = Vec::new();
    for id in &meta.instance_ids {
        let path = dir.join("instances").join(format!("{id}.json"));
        let inst: BacpInstance = serde_json::from_str(&fs::read_to_string(&path)?)?;
        inst.validate()?;
        if inst.id != *id {
            return Err(Error::Validation(format!(
                "instance file {} carries id {}",
                path.display(),
                inst.id
            )));
        }
        instances.push(inst);
    }
    let mut features = BTreeMap::new();
    let mut reader = csv::Reader::from_path(dir.join("features.csv"))?;
    for record in reader.records() {
        let record = record?;
        let id = record[0].to_string();
        let values: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| Error::Validation(e.to_string())))
            .collect::<Result<_>>()?;
        features.insert(id, values);
    }
    let mut baseline = BTreeMap::new();
    let mut reader = csv::Reader::from_path(dir.join("baseline.csv"))?;
    for record in reader.records() {
        let record = record?;
        baseline.insert(
            record[0].to_string(),
            record[1].parse::<u64>().map_err(|e| Error::Validation(e.to_string()))?,
        );
    }
    let mut clusters = BTreeMap::new();
    let mut reader = csv::Reader::from_path(dir.join("clusters.csv"))?;
    for record in reader.records() {
        let record = record?;
        clusters.insert(
            record[0].to_string(),
            record[1].parse::<usize>().map_err(|e| Error::Validation(e.to_string()))?,
        );
    }
    Ok(LoadedPool { meta, instances, features, baseline, clusters })
}

// ---------------------------------------------------------------------
// train
// ---------------------------------------------------------------------

/// Search mode: the single default-analogue model or the multi-model
/// level schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    Default,
    Mm,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Default => "default",
            TrainMode::Mm => "mm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(TrainMode::Default),
            "mm" => Ok(TrainMode::Mm),
            other => Err(Error::Validation(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub instances: PathBuf,
    pub budget: usize,
    pub rounds: usize,
    pub max_level: u32,
    pub mode: TrainMode,
    pub seed: u64,
    pub out: PathBuf,
    /// Training instances taken nearest each cluster centroid; 0 uses the
    /// whole pool.
    pub per_cluster: usize,
    pub jobs: usize,
}

/// The self-contained portfolio file: candidates plus the trained
/// portfolio, so evaluation needs nothing else from the training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioFile {
    pub mode: TrainMode,
    pub training_window: (u64, u64),
    pub training_cap: u64,
    pub candidates: Vec<Streamliner>,
    pub portfolio: Portfolio,
}

pub struct TrainOutputs {
    pub portfolio_file: PortfolioFile,
    pub selector: SelectorModel,
    pub kernel_solves: u64,
}

fn write_race_log(path: &Path, rows: &[RaceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "set_key",
        "level",
        "recipe",
        "instance_id",
        "cap",
        "status",
        "cost",
        "elimination",
    ])?;
    for r in rows {
        w.write_record([
            r.set_key.as_str(),
            &r.level.to_string(),
            r.recipe.as_str(),
            r.instance_id.as_str(),
            &r.cap.to_string(),
            &r.status,
            &r.cost.to_string(),
            &r.elimination.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    write_atomic(path, &w.into_inner().map_err(|e| Error::Internal(e.to_string()))?)?;
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<TrainOutputs> {
    let pool = load_pool(&args.instances)?;
    if pool.instances.is_empty() {
        return Err(Error::Validation("instance pool is empty".into()));
    }
    let candidates = generate_candidates(&BacpClass, &CandidateConfig::default());

    // training set: whole pool or per-cluster representatives
    let mut training_ids: Vec<String> = if args.per_cluster == 0 {
        pool.meta.instance_ids.clone()
    } else {
        let ids = pool.meta.instance_ids.clone();
        let points: Vec<Vec<f64>> = ids.iter().map(|id| pool.features[id].clone()).collect();
        let labels: Vec<usize> = ids.iter().map(|id| pool.clusters[id]).collect();
        let k = labels.iter().max().map(|m| m + 1).unwrap_or(1);
        let centroids: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                let members: Vec<&Vec<f64>> = points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == c)
                    .map(|(p, _)| p)
                    .collect();
                let dim = points[0].len();
                let mut centroid = vec![0.0; dim];
                for m in &members {
                    for (ci, x) in centroid.iter_mut().zip(m.iter()) {
                        *ci += x / members.len() as f64;
                    }
                }
                centroid
            })
            .collect();
        let clustering = Clustering { labels, centroids };
        select_per_cluster(&points, &clustering, args.per_cluster)
            .into_iter()
            .map(|i| ids[i].clone())
            .collect()
    };
    training_ids.sort();

    let baseline: BTreeMap<String, u64> = training_ids
        .iter()
        .map(|id| {
            pool.baseline
                .get(id)
                .copied()
                .map(|c| (id.clone(), c))
                .ok_or_else(|| Error::Validation(format!("no baseline cost for {id}")))
        })
        .collect::<Result<_>>()?;

    let training_cap = pool.meta.config.cost_window.1;
    let evaluator = KernelEvaluator::new(pool.instances.clone(), candidates.clone());
    let race_cfg = RaceConfig {
        global_cap: training_cap,
        shuffle_seed: crate::seeds::derive(args.seed, "race-shuffle"),
        ..Default::default()
    };
    let mcts_cfg = MctsConfig {
        simulations: args.budget,
        rounds: args.rounds,
        max_level: if args.mode == TrainMode::Default { 1 } else { args.max_level },
        seed: crate::seeds::derive(args.seed, "search"),
        ..Default::default()
    };

    let rounds_out = with_jobs(args.jobs, || {
        multi_round(&mcts_cfg, &race_cfg, &candidates, &training_ids, &baseline, &evaluator)
    })??;

    let portfolio_file = PortfolioFile {
        mode: args.mode,
        training_window: pool.meta.config.cost_window,
        training_cap,
        candidates: candidates.clone(),
        portfolio: rounds_out.portfolio,
    };

    let out = &args.out;
    fs::create_dir_all(out)?;
    write_atomic(
        &out.join("streamliners.json"),
        serde_json::to_string_pretty(&candidates)?.as_bytes(),
    )?;
    let portfolio_bytes = serde_json::to_string_pretty(&portfolio_file)?;
    write_atomic(&out.join("portfolio.json"), portfolio_bytes.as_bytes())?;
    let portfolio_hash = sha256_hex(portfolio_bytes.as_bytes());

    let train_features: BTreeMap<String, Vec<f64>> = training_ids
        .iter()
        .map(|id| (id.clone(), pool.features[id].clone()))
        .collect();
    let selector = train_selector(
        &portfolio_file.portfolio,
        &train_features,
        training_cap,
        portfolio_hash,
    )?;
    write_atomic(
        &out.join("selector.json"),
        serde_json::to_string_pretty(&selector)?.as_bytes(),
    )?;

    write_race_log(&out.join("race-log.csv"), &rounds_out.race_rows)?;

    let mut trace_csv = csv::Writer::from_writer(Vec::new());
    trace_csv.write_record(["round", "iteration", "set_key", "rewards", "archive_size"])?;
    for t in &rounds_out.trace {
        trace_csv.write_record([
            &t.round.to_string(),
            &t.iteration.to_string(),
            &t.set_key,
            &t.rewards,
            &t.archive_size.to_string(),
        ])?;
    }
    write_atomic(
        &out.join("search-trace.csv"),
        &trace_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    let mut inputs = BTreeMap::new();
    inputs.insert(
        args.instances.join("pool.json").display().to_string(),
        hash_file(&args.instances.join("pool.json"))?,
    );
    write_manifest(
        out,
        "train",
        serde_json::json!({
            "mode": args.mode.as_str(),
            "budget": args.budget,
            "rounds": args.rounds,
            "max_level": args.max_level,
            "per_cluster": args.per_cluster,
            "training_instances": training_ids,
            "mcts": mcts_cfg,
            "race": race_cfg,
        }),
        args.seed,
        inputs,
        &["streamliners.json", "portfolio.json", "selector.json", "race-log.csv", "search-trace.csv"],
    )?;

    Ok(TrainOutputs {
        portfolio_file,
        selector,
        kernel_solves: crate::race::Evaluator::underlying_evaluations(&evaluator),
    })
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub portfolios: Vec<PathBuf>,
    pub selectors: Vec<PathBuf>,
    pub test_dir: PathBuf,
    pub budget: u64,
    pub out: PathBuf,
    pub vbs_only: bool,
    pub jobs: usize,
}

#[derive(Debug)]
pub struct EvalOutputs {
    pub summaries: Vec<SummaryRow>,
    pub reports: Vec<(String, String, Vec<TestOutcome>)>,
}

fn events_column(outcome: &TestOutcome) -> String {
    outcome
        .events
        .iter()
        .map(|e| {
            format!(
                "{}:{}:{}:{}",
                e.phase,
                e.entry.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
                e.status,
                e.cost
            )
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn evaluate(args: &EvalArgs) -> Result<EvalOutputs> {
    if args.budget == 0 {
        return Err(Error::Validation("test budget must be positive".into()));
    }
    if !args.vbs_only && args.portfolios.len() != args.selectors.len() {
        return Err(Error::Validation(
            "each portfolio needs a selector (or use vbs-only)".into(),
        ));
    }
    let pool = load_pool(&args.test_dir)?;
    let fallback_budget = pool
        .meta
        .config
        .cost_window
        .1
        .saturating_mul(FALLBACK_MULTIPLIER);
    let protocol = ProtocolConfig { budget: args.budget, fallback_budget };

    // features are extracted fresh at test time
    let test_features: Vec<(String, Vec<f64>)> = with_jobs(args.jobs, || {
        use rayon::prelude::*;
        pool.instances
            .par_iter()
            .map(|inst| Ok((inst.id.clone(), extract_features(inst)?)))
            .collect::<Result<Vec<_>>>()
    })??;
    let test_features: BTreeMap<String, Vec<f64>> = test_features.into_iter().collect();

    let mut summaries = Vec::new();
    let mut reports: Vec<(String, String, Vec<TestOutcome>)> = Vec::new();
    let mut inputs = BTreeMap::new();

    for (i, portfolio_path) in args.portfolios.iter().enumerate() {
        let portfolio_bytes = fs::read(portfolio_path)?;
        let portfolio_file: PortfolioFile = serde_json::from_slice(&portfolio_bytes)?;
        let mode = portfolio_file.mode.as_str().to_string();
        inputs.insert(portfolio_path.display().to_string(), sha256_hex(&portfolio_bytes));

        let selector_model = if args.vbs_only {
            None
        } else {
            let selector_path = &args.selectors[i];
            let selector_bytes = fs::read(selector_path)?;
            let model: SelectorModel = serde_json::from_slice(&selector_bytes)?;
            if model.portfolio_hash != sha256_hex(&portfolio_bytes) {
                return Err(Error::Validation(format!(
                    "selector {} was not trained against portfolio {}",
                    selector_path.display(),
                    portfolio_path.display()
                )));
            }
            inputs.insert(selector_path.display().to_string(), sha256_hex(&selector_bytes));
            Some(model)
        };

        let evaluator =
            KernelEvaluator::new(pool.instances.clone(), portfolio_file.candidates.clone());
        let ids: Vec<String> = pool.meta.instance_ids.clone();

        // per-entry outcomes for the VBS
        let per_entry: Vec<Vec<TestOutcome>> = with_jobs(args.jobs, || {
            use rayon::prelude::*;
            (0..portfolio_file.portfolio.entries.len())
                .map(|e| {
                    ids.par_iter()
                        .map(|id| {
                            run_entry_protocol(
                                &portfolio_file.portfolio,
                                e,
                                id,
                                pool.baseline[id],
                                &protocol,
                                &evaluator,
                            )
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let vbs = virtual_best(&per_entry);
        summaries.push(summarize(&mode, "vbs", &vbs));
        reports.push((mode.clone(), "vbs".into(), vbs));

        if let Some(model) = &selector_model {
            let selector_outcomes: Vec<TestOutcome> = with_jobs(args.jobs, || {
                use rayon::prelude::*;
                ids.par_iter()
                    .map(|id| {
                        run_test_protocol(
                            model,
                            &portfolio_file.portfolio,
                            &test_features[id],
                            id,
                            pool.baseline[id],
                            &protocol,
                            &evaluator,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
            })??;
            summaries.push(summarize(&mode, "selector", &selector_outcomes));
            reports.push((mode.clone(), "selector".into(), selector_outcomes));
        }
    }

    let out = &args.out;
    fs::create_dir_all(out)?;
    let mut report_csv = csv::Writer::from_writer(Vec::new());
    report_csv.write_record([
        "mode",
        "selector",
        "instance_id",
        "chosen_entry",
        "streamlined_status",
        "total_cost",
        "baseline_cost",
        "solved",
        "events",
    ])?;
    for (mode, kind, outcomes) in &reports {
        for o in outcomes {
            report_csv.write_record([
                mode.as_str(),
                kind.as_str(),
                &o.instance_id,
                &o.chosen_entry.to_string(),
                &o.streamlined_status.to_string(),
                &o.total_cost.to_string(),
                &o.baseline_cost.to_string(),
                &o.solved.to_string(),
                &events_column(o),
            ])?;
        }
    }
    write_atomic(
        &out.join("test-report.csv"),
        &report_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    let mut summary_csv = csv::Writer::from_writer(Vec::new());
    summary_csv.write_record(["mode", "selector", "pct_imp", "pct_red", "speedup"])?;
    for s in &summaries {
        summary_csv.write_record([
            s.mode.as_str(),
            s.selector.as_str(),
            &format!("{:.4}", s.pct_imp),
            &format!("{:.4}", s.pct_red),
            &format!("{:.6}", s.speedup),
        ])?;
    }
    write_atomic(
        &out.join("summary.csv"),
        &summary_csv.into_inner().map_err(|e| Error::Internal(e.to_string()))?,
    )?;

    write_manifest(
        out,
        "evaluate",
        serde_json::json!({
            "budget": args.budget,
            "fallback_budget": fallback_budget,
            "vbs_only": args.vbs_only,
            "test_dir": args.test_dir.display().to_string(),
        }),
        0,
        inputs,
        &["test-report.csv", "summary.csv"],
    )?;

    Ok(EvalOutputs { summaries, reports })
}
