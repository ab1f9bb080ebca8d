use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sagvic::graphspec::{spectral_embed, GraphConfig, SymAffinity};
use sagvic::hierclust::agglomerate;
use sagvic::numkit::rng::derive_seed;
use sagvic::sagvicreg::{
    self, synth_generate, unseen_cluster_experiment, DistortionReport, ExperimentConfig, ExperimentOutput, ToyEncoder,
    Variant,
};
use sagvic::structmetrics::{hierarchical_rand, rand_sweep, structural_similarity, Hierarchy};
use sagvic::Partition;

use super::{DemoCmd, EvalCmd, RandCmd, SpectralCmd, TrainCmd};
use crate::config::RunConfig;
use crate::encoder_file::encode_encoder;
use crate::error::{CliError, CliResult};
use crate::io::{load_embeddings, parse_csv_matrix, read_text, save_embeddings, write_bytes};

const INIT_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

pub(crate) fn eval(cmd: EvalCmd) -> CliResult<()> {
    let file = RunConfig::load_opt(cmd.common.config.as_deref())?;
    let seed = cmd.common.seed.or(file.seed).unwrap_or(0);
    let sim = cmd.similarity.over(file.similarity).resolve(seed);
    let out = cmd.out.or(file.out);

    let a = load_embeddings(&cmd.a)?;
    let b = load_embeddings(&cmd.b)?;
    let report = structural_similarity(&a, &b, &sim)?;
    for (path, x) in [(&cmd.tree_a, &a), (&cmd.tree_b, &b)] {
        if let Some(p) = path {
            write_bytes(p, agglomerate(x, sim.metric, sim.linkage)?.to_csv().as_bytes())?;
        }
    }
    emit(out.as_deref(), &to_json(&report))
}

pub(crate) fn spectral(cmd: SpectralCmd) -> CliResult<()> {
    let file = RunConfig::load_opt(cmd.config.as_deref())?;
    let out = required(cmd.out.or(file.out), "out")?;
    let w = parse_csv_matrix(&read_text(&cmd.graph)?).map_err(|e| CliError::format(&cmd.graph, e))?;
    let w = SymAffinity::new(w).map_err(|e| CliError::format(&cmd.graph, e))?;
    if cmd.dim == 0 || cmd.dim >= w.n() {
        return Err(CliError::Usage(format!(
            "--dim {} must be between 1 and {} for a {}-node graph",
            cmd.dim,
            w.n().saturating_sub(1),
            w.n()
        )));
    }
    let y = spectral_embed(&w, cmd.dim, cmd.include_trivial)?;
    save_embeddings(&out, &y)
}

pub(crate) fn train(cmd: TrainCmd) -> CliResult<()> {
    let file = RunConfig::load_opt(cmd.common.config.as_deref())?;
    let variant = required(cmd.variant.or(file.variant), "variant")?;
    let out = required(cmd.out.or(file.out), "out")?;
    let history = cmd
        .history
        .or(file.history)
        .unwrap_or_else(|| out.with_extension("history.csv"));
    let seed = cmd.common.seed.or(file.seed).unwrap_or(0);
    let synth = cmd.synth.over(file.synth).resolve(Default::default())?;
    let vicreg = cmd.vicreg.over(file.vicreg).resolve(Default::default())?;
    let mut opts = cmd.train.over(file.train).resolve(Default::default())?;
    opts.seed = derive_seed(seed, TRAIN_STREAM);

    let data = synth_generate(&sagvicreg::SynthConfig { seed, ..synth })?;
    let enc = ToyEncoder::with_default_shape(synth.ambient_dim, derive_seed(seed, INIT_STREAM))?;
    let (enc, losses) = sagvicreg::train(variant, &data.points, &data.augmenter, enc, &vicreg, &opts)?;

    write_bytes(&out, &encode_encoder(&enc))?;
    let mut csv = String::from("epoch,invariance,variance,covariance,total\n");
    for (e, l) in losses.iter().enumerate() {
        writeln!(
            csv,
            "{},{:?},{:?},{:?},{:?}",
            e + 1,
            l.invariance,
            l.variance,
            l.covariance,
            l.total
        )
        .expect("string write");
    }
    write_bytes(&history, csv.as_bytes())?;
    match losses.last() {
        Some(l) => println!(
            "variant={variant} epochs={} invariance={:?} variance={:?} covariance={:?} total={:?}",
            losses.len(),
            l.invariance,
            l.variance,
            l.covariance,
            l.total
        ),
        None => println!("variant={variant} epochs=0 (initial network saved)"),
    }
    Ok(())
}

#[derive(Serialize)]
struct LevelRand {
    level: usize,
    n_classes: usize,
    rand_index: f64,
}

#[derive(Serialize)]
struct RandReport {
    n_items: usize,
    seed: u64,
    graph: GraphConfig,
    levels: Vec<LevelRand>,
}

pub(crate) fn randindex(cmd: RandCmd) -> CliResult<()> {
    let file = RunConfig::load_opt(cmd.common.config.as_deref())?;
    let seed = cmd.common.seed.or(file.seed).unwrap_or(0);
    let graph = cmd.graph.over(file.graph).resolve()?;
    let out = cmd.out.or(file.out);
    let sweep_out = cmd.sweep_out.or(file.sweep_out);
    if cmd.sweep_min == 0 || cmd.sweep_min > cmd.sweep_max {
        return Err(CliError::Usage(format!(
            "sweep range {}..={} is empty or starts at 0",
            cmd.sweep_min, cmd.sweep_max
        )));
    }

    let x = load_embeddings(&cmd.emb)?;
    let h = Hierarchy::from_csv(&read_text(&cmd.hierarchy)?).map_err(|e| CliError::format(&cmd.hierarchy, e))?;
    let values = hierarchical_rand(&x, &h, &graph, seed)?;
    let report = RandReport {
        n_items: h.n_items(),
        seed,
        graph,
        levels: values
            .iter()
            .enumerate()
            .map(|(l, &rand_index)| LevelRand {
                level: l + 1,
                n_classes: h.n_classes(l),
                rand_index,
            })
            .collect(),
    };
    if let Some(path) = sweep_out {
        let finest: &Partition = h.finest();
        let top = cmd.sweep_max.min(x.rows());
        let rows = rand_sweep(&x, finest, cmd.sweep_min..=top, &graph, seed)?;
        let mut csv = String::from("n_clusters,rand_index\n");
        for (k, r) in rows {
            writeln!(csv, "{k},{r:?}").expect("string write");
        }
        write_bytes(&path, csv.as_bytes())?;
    }
    emit(out.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct VariantSummary {
    variant: Variant,
    mean_seen_ratio: f64,
    mean_unseen_ratio: Option<f64>,
    /// Seeds whose unseen ratio exceeds the seen ratio.
    unseen_above_seen: usize,
    mean_lca_spearman: Option<f64>,
}

#[derive(Serialize)]
struct DemoReport {
    config: ExperimentConfig,
    seeds: Vec<u64>,
    runs: Vec<DistortionReport>,
    summary: Vec<VariantSummary>,
    /// Seeds where the sag variant's LCA Spearman statistic is at least the
    /// plain variant's.
    sag_spearman_at_least_plain: Option<usize>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn summarise(cfg: ExperimentConfig, seeds: Vec<u64>, runs: Vec<DistortionReport>) -> DemoReport {
    let summary = Variant::ALL
        .iter()
        .map(|&v| {
            let rows: Vec<_> = runs.iter().map(|r| r.variant(v)).collect();
            VariantSummary {
                variant: v,
                mean_seen_ratio: mean(rows.iter().map(|d| d.seen_ratio)).unwrap_or(f64::NAN),
                mean_unseen_ratio: mean(rows.iter().filter_map(|d| d.unseen_ratio)),
                unseen_above_seen: rows
                    .iter()
                    .filter(|d| d.unseen_ratio.is_some_and(|u| u > d.seen_ratio))
                    .count(),
                mean_lca_spearman: mean(
                    rows.iter()
                        .filter_map(|d| d.unseen_similarity.as_ref())
                        .map(|s| s.lca_spearman),
                ),
            }
        })
        .collect();
    let spearman = |r: &DistortionReport, v| r.variant(v).unseen_similarity.as_ref().map(|s| s.lca_spearman);
    let sag_spearman_at_least_plain = runs
        .iter()
        .map(|r| Some(usize::from(spearman(r, Variant::Sag)? >= spearman(r, Variant::Vicreg)?)))
        .sum::<Option<usize>>();
    DemoReport {
        config: cfg,
        seeds,
        runs,
        summary,
        sag_spearman_at_least_plain,
    }
}

fn scatter_csv(points: &sagvic::Mat, labels: &[usize], seen: &[usize]) -> String {
    let mut s = String::from("x,y,cluster,seen\n");
    for (i, &c) in labels.iter().enumerate() {
        let r = points.row(i);
        writeln!(s, "{:?},{:?},{c},{}", r[0], r[1], u8::from(seen.contains(&c))).expect("string write");
    }
    s
}

/// Runs the seeds on scoped threads; results come back in seed order.
fn run_seeds(cfg: &ExperimentConfig, seeds: &[u64]) -> Vec<sagvic::Result<ExperimentOutput>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(seeds.len())
        .max(1);
    let mut slots: Vec<Option<sagvic::Result<ExperimentOutput>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..seeds.len())
                        .step_by(workers)
                        .map(|i| (i, unseen_cluster_experiment(cfg, seeds[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("experiment thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every seed ran")).collect()
}

pub(crate) fn demo_unseen(cmd: DemoCmd) -> CliResult<()> {
    let file = RunConfig::load_opt(cmd.common.config.as_deref())?;
    let seed = cmd.common.seed.or(file.seed).unwrap_or(0);
    let exp = cmd.experiment.over(file.experiment());
    let out_dir: PathBuf = cmd
        .out_dir
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("demo_unseen"));
    let base = ExperimentConfig::default();
    let mut cfg = ExperimentConfig {
        synth: cmd.synth.over(file.synth).resolve(base.synth)?,
        vicreg: cmd.vicreg.over(file.vicreg).resolve(base.vicreg)?,
        train: cmd.train.over(file.train).resolve(base.train)?,
        similarity: cmd.similarity.over(file.similarity).resolve(seed),
        ..base
    };
    if let Some(c) = exp.train_clusters {
        cfg.train_clusters = c;
    }
    if let Some(t) = exp.test_points {
        cfg.test_points_per_cluster = t;
    }
    let n_seeds = exp.seeds.unwrap_or(1);
    if n_seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    if cfg.train_clusters.is_empty() || cfg.train_clusters.iter().any(|&c| c >= cfg.synth.n_clusters) {
        return Err(CliError::Usage(format!(
            "--train-clusters must name clusters in 0..{}",
            cfg.synth.n_clusters
        )));
    }
    if cfg.test_points_per_cluster < 3 {
        return Err(CliError::Usage("--test-points must be at least 3".into()));
    }

    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| seed + i).collect();
    let outputs = run_seeds(&cfg, &seeds)
        .into_iter()
        .collect::<sagvic::Result<Vec<_>>>()?;

    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let first = &outputs[0];
    let seen = &first.report.train_clusters;
    for s in &first.scatters {
        write_bytes(
            &out_dir.join(format!("scatter_{}_train.csv", s.variant)),
            scatter_csv(&s.train, &s.train_labels, seen).as_bytes(),
        )?;
        write_bytes(
            &out_dir.join(format!("scatter_{}_test.csv", s.variant)),
            scatter_csv(&s.test, &s.test_labels, seen).as_bytes(),
        )?;
    }
    let runs = outputs.into_iter().map(|o| o.report).collect();
    let report = summarise(cfg, seeds, runs);
    write_bytes(&out_dir.join("report.json"), to_json(&report).as_bytes())?;
    for s in &report.summary {
        println!(
            "{}: seen={:.4} unseen={} unseen>seen in {}/{} seeds",
            s.variant,
            s.mean_seen_ratio,
            s.mean_unseen_ratio.map_or("n/a".into(), |u| format!("{u:.4}")),
            s.unseen_above_seen,
            report.seeds.len()
        );
    }
    Ok(())
}
