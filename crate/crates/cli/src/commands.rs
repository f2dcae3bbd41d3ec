use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use stressnav::classifier::{
    evaluate_pipeline, noise_study as run_noise_study, post_pass_verification, train_pipeline, ClassifierOutcome,
    EvaluationReport, NoiseTarget, PathEvaluation, PARAMS_FORMAT_VERSION,
};
use stressnav::demo::{demo_cases, REFERENCE_CORRELATION, REFERENCE_MAX_STRESS};
use stressnav::features::{path_correlation_series, PCA_FORMAT_VERSION};
use stressnav::path::{simulate_with, CorpusEntry, Split};
use stressnav::stokes::write_velocity_grid;
use stressnav::{
    encode_pattern, evaluate_path, generate_corpus, max_correlation, max_surface_stress, Corpus, CorpusConfig,
    Direction, PathLabel, PathOptions, PathRecord, PcaModel, RegressionParams, Vec2,
};

use crate::report;
use crate::{Cli, DemoArgs, EvaluateArgs, Figure, GenerateArgs, NoiseArgs, NoiseOn, TrainArgs};

pub const RUN_FORMAT_VERSION: u32 = 1;
pub const PARAMS_FILE: &str = "params.csv";
pub const PCA_FILE: &str = "pca.json";

fn corpus_dir(cli: &Cli, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cli.out.join("corpus"))
}

fn models_dir(cli: &Cli, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cli.out.join("model"))
}

fn report_dir(cli: &Cli, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cli.out.join("report"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Records the settings a command ran with next to its outputs.
fn write_run_config<T: Serialize>(dir: &Path, command: &str, config: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Run<'a, T> {
        format_version: u32,
        command: &'a str,
        config: &'a T,
    }
    let mut out = create(&dir.join("run_config.json"))?;
    serde_json::to_writer_pretty(
        &mut out,
        &Run {
            format_version: RUN_FORMAT_VERSION,
            command,
            config,
        },
    )?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GenerateConfig {
    branches: usize,
    curves: usize,
    seed: u64,
    train_fraction: f64,
    dt_ms: f64,
    mesh_h_um: f64,
}

pub fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let dir = corpus_dir(cli, &args.corpus);
    let mut config = if args.paper_scale {
        CorpusConfig::paper(args.seed)
    } else {
        CorpusConfig {
            branches: args.branches,
            curves: args.curves,
            ..CorpusConfig::desk(args.seed)
        }
    };
    ensure!(args.dt > 0.0 && args.dt <= 1.0, "--dt {} ms outside (0, 1]", args.dt);
    ensure!(
        args.mesh_h > 0.0 && args.mesh_h <= 1.0,
        "--mesh-h {} µm outside (0, 1]",
        args.mesh_h
    );
    config.train_fraction = args.train_fraction;
    config.path.dt_ms = args.dt;
    config.path.mesh.h_fine = args.mesh_h;
    make_dir(&dir)?;
    let total = config.branches + config.curves;
    let mut done = 0;
    let corpus = generate_corpus(&config, |entry, _| {
        done += 1;
        if !cli.quiet {
            eprintln!(
                "[{done}/{total}] {} {:?} {} samples",
                entry.id, entry.terminal_reason, entry.samples
            );
        }
    })?;
    corpus.save(&dir)?;
    write_run_config(
        &dir,
        "generate",
        &GenerateConfig {
            branches: config.branches,
            curves: config.curves,
            seed: config.seed,
            train_fraction: config.train_fraction,
            dt_ms: config.path.dt_ms,
            mesh_h_um: config.path.mesh.h_fine,
        },
    )?;
    let m = &corpus.manifest;
    let forward: Vec<&CorpusEntry> = m.entries.iter().filter(|e| e.direction == Direction::Forward).collect();
    let mut transit: Vec<f64> = forward.iter().map(|e| e.transit_ms).collect();
    transit.sort_by(f64::total_cmp);
    let median = if transit.is_empty() {
        f64::NAN
    } else if transit.len() % 2 == 1 {
        transit[transit.len() / 2]
    } else {
        0.5 * (transit[transit.len() / 2 - 1] + transit[transit.len() / 2])
    };
    let count =
        |label: PathLabel, split: Split| forward.iter().filter(|e| e.label == label && e.split == split).count();
    println!("corpus {}", dir.display());
    println!(
        "branch paths {} (train {}, test {})",
        m.branches,
        count(PathLabel::Branch, Split::Train),
        count(PathLabel::Branch, Split::Test)
    );
    println!(
        "curve paths {} (train {}, test {})",
        m.curves,
        count(PathLabel::Curve, Split::Train),
        count(PathLabel::Curve, Split::Test)
    );
    println!(
        "failure rate {:.4} ({} redrawn)",
        m.failure_rate(),
        m.failed_seeds.len()
    );
    println!("median transit {median:.1} ms");
    Ok(())
}

fn load_corpus(dir: &Path) -> Result<Corpus> {
    Corpus::load(dir).with_context(|| format!("cannot load corpus from {}", dir.display()))
}

pub fn load_models(dir: &Path) -> Result<(RegressionParams, PcaModel)> {
    let p = dir.join(PARAMS_FILE);
    let f = File::open(&p).with_context(|| format!("cannot open {}", p.display()))?;
    let params = RegressionParams::read(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))?;
    let p = dir.join(PCA_FILE);
    let f = File::open(&p).with_context(|| format!("cannot open {}", p.display()))?;
    let pca = PcaModel::read(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))?;
    Ok((params, pca))
}

#[derive(Serialize)]
struct TrainConfig {
    dt_corr_ms: f64,
    training_paths: usize,
    corpus_seed: u64,
}

pub fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let corpus = load_corpus(&corpus_dir(cli, &args.corpus))?;
    let dir = models_dir(cli, &args.models);
    let train = corpus.train();
    ensure!(!train.is_empty(), "corpus has no training paths");
    let model = train_pipeline(&train, args.dt_corr)?;
    make_dir(&dir)?;
    let mut out = create(&dir.join(PARAMS_FILE))?;
    model.fit.params.write(&mut out)?;
    out.flush()?;
    let mut out = create(&dir.join(PCA_FILE))?;
    model.pca.write(&mut out)?;
    out.flush()?;
    let mut out = create(&dir.join("training_features.csv"))?;
    report::training_features(&mut out, &model.features, &model.labels)?;
    out.flush()?;
    write_run_config(
        &dir,
        "train",
        &TrainConfig {
            dt_corr_ms: args.dt_corr,
            training_paths: train.len(),
            corpus_seed: corpus.manifest.seed,
        },
    )?;
    println!(
        "trained on {} paths; log-likelihood {:.3} (null {:.3}), {} iterations{}",
        train.len(),
        model.fit.log_likelihood,
        model.fit.null_log_likelihood,
        model.fit.iterations,
        if model.fit.params.penalized {
            ", ridge fallback"
        } else {
            ""
        }
    );
    report::parameter_table(&mut std::io::stdout().lock(), &model.fit.params)?;
    Ok(())
}

/// Test entries with their records.
fn test_set(corpus: &Corpus) -> Vec<(&CorpusEntry, &PathRecord)> {
    corpus
        .manifest
        .entries
        .iter()
        .zip(&corpus.records)
        .filter(|(e, _)| e.split == Split::Test)
        .collect()
}

fn find_path<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a PathRecord> {
    corpus
        .manifest
        .entries
        .iter()
        .position(|e| e.id == id)
        .map(|i| &corpus.records[i])
        .with_context(|| format!("no path with id {id} in the corpus"))
}

#[derive(Serialize)]
struct EvaluateConfig {
    dt_corr_ms: f64,
    threshold: f64,
    test_paths: usize,
    corpus_seed: u64,
    params_format_version: u32,
    pca_format_version: u32,
}

pub fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    ensure!(
        (0.0..=1.0).contains(&args.threshold),
        "--threshold {} outside [0, 1]",
        args.threshold
    );
    let corpus = load_corpus(&corpus_dir(cli, &args.corpus))?;
    let (params, pca) = load_models(&models_dir(cli, &args.models))?;
    let dir = report_dir(cli, &args.report);
    make_dir(&dir)?;
    let per_path = matches!(args.figure, Figure::Correlation | Figure::Pbranch);
    if per_path {
        let Some(id) = &args.path else {
            bail!("--figure {:?} needs --path <id>", args.figure);
        };
        let path = find_path(&corpus, id)?;
        if args.figure == Figure::Correlation {
            let series = path_correlation_series(path, args.dt_corr)?;
            let mut out = create(&dir.join(format!("correlation_{id}.csv")))?;
            report::correlation_series(&mut out, &series)?;
            out.flush()?;
        } else {
            let eval = evaluate_path(path, &params, &pca, args.dt_corr)?;
            let mut out = create(&dir.join(format!("pbranch_{id}.csv")))?;
            report::pbranch_trace(&mut out, &eval)?;
            out.flush()?;
        }
        return Ok(());
    }

    let tests = test_set(&corpus);
    let records: Vec<&PathRecord> = tests.iter().map(|t| t.1).collect();
    let rep = evaluate_pipeline(&records, &params, &pca, args.dt_corr)?;
    if matches!(args.figure, Figure::All | Figure::Roc) {
        let mut out = create(&dir.join("roc.csv"))?;
        report::roc_table(
            &mut out,
            &[
                ("all", &rep.roc),
                ("forward", &rep.roc_forward),
                ("reverse", &rep.roc_reverse),
            ],
        )?;
        out.flush()?;
    }
    if matches!(args.figure, Figure::All | Figure::Detection) {
        let mut out = create(&dir.join("detection.csv"))?;
        report::detection_table(&mut out, &rep.detection)?;
        out.flush()?;
    }
    if args.figure == Figure::All {
        let ids: Vec<&str> = tests.iter().map(|t| t.0.id.as_str()).collect();
        let mut out = create(&dir.join("outcomes.csv"))?;
        let outcomes: Vec<ClassifierOutcome> = rep
            .evaluations
            .iter()
            .map(|e| ClassifierOutcome::from_evaluation(e, args.threshold))
            .collect();
        report::outcome_table(&mut out, &ids, &rep.evaluations, &outcomes, args.threshold)?;
        out.flush()?;
        let mut rows = Vec::new();
        for (entry, rec) in tests.iter().filter(|t| t.0.direction == Direction::Forward) {
            rows.push((entry.id.as_str(), rec.label, post_pass_verification(rec)?));
        }
        let mut out = create(&dir.join("post_pass.csv"))?;
        report::post_pass_table(&mut out, &rows)?;
        out.flush()?;
        write_summary(&dir, &rep, &outcomes, args.threshold)?;
        write_run_config(
            &dir,
            "evaluate",
            &EvaluateConfig {
                dt_corr_ms: args.dt_corr,
                threshold: args.threshold,
                test_paths: records.len(),
                corpus_seed: corpus.manifest.seed,
                params_format_version: PARAMS_FORMAT_VERSION,
                pca_format_version: PCA_FORMAT_VERSION,
            },
        )?;
    }
    println!("AUC {:.4}", rep.roc.auc);
    println!("forward AUC {:.4}", rep.roc_forward.auc);
    println!("reverse AUC {:.4}", rep.roc_reverse.auc);
    match rep.detection.gap_at_high_tpf {
        Some(g) => println!(
            "reverse minus forward first-crossing fraction at TPF >= 0.8: {g:.4} over {} thresholds",
            rep.detection.rows_at_high_tpf
        ),
        None => println!("no threshold reaches 0.8 true positives in both directions"),
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    format_version: u32,
    test_paths: usize,
    auc: f64,
    auc_forward: f64,
    auc_reverse: f64,
    detection_gap: Option<f64>,
    detection_thresholds_at_high_tpf: usize,
    threshold: f64,
    true_positive_fraction: f64,
    false_positive_fraction: f64,
}

fn write_summary(dir: &Path, rep: &EvaluationReport, outcomes: &[ClassifierOutcome], threshold: f64) -> Result<()> {
    let frac = |label: PathLabel| {
        let of: Vec<&ClassifierOutcome> = outcomes.iter().filter(|o| o.label_true == label).collect();
        of.iter().filter(|o| o.detected).count() as f64 / of.len().max(1) as f64
    };
    let s = Summary {
        format_version: RUN_FORMAT_VERSION,
        test_paths: rep.evaluations.len(),
        auc: rep.roc.auc,
        auc_forward: rep.roc_forward.auc,
        auc_reverse: rep.roc_reverse.auc,
        detection_gap: rep.detection.gap_at_high_tpf,
        detection_thresholds_at_high_tpf: rep.detection.rows_at_high_tpf,
        threshold,
        true_positive_fraction: frac(PathLabel::Branch),
        false_positive_fraction: frac(PathLabel::Curve),
    };
    let mut out = create(&dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut out, &s)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NoiseConfig<'a> {
    dt_corr_ms: f64,
    levels: &'a [f64],
    reps: usize,
    seed: u64,
    target: NoiseTarget,
}

pub fn noise_study(cli: &Cli, args: &NoiseArgs) -> Result<()> {
    let corpus = load_corpus(&corpus_dir(cli, &args.corpus))?;
    let (params, pca) = load_models(&models_dir(cli, &args.models))?;
    let dir = report_dir(cli, &args.report);
    let records: Vec<&PathRecord> = test_set(&corpus).iter().map(|t| t.1).collect();
    let evals: Vec<PathEvaluation> = records
        .iter()
        .map(|p| evaluate_path(p, &params, &pca, args.dt_corr))
        .collect::<Result<_, _>>()?;
    let target = match args.target {
        NoiseOn::OneMinusC => NoiseTarget::OneMinusCorrelation,
        NoiseOn::C => NoiseTarget::Correlation,
    };
    let rows = run_noise_study(&evals, &params, &args.levels, args.reps, args.seed, target)?;
    make_dir(&dir)?;
    let mut out = create(&dir.join("noise.csv"))?;
    report::noise_table(&mut out, &rows)?;
    out.flush()?;
    write_run_config(
        &dir,
        "noise-study",
        &NoiseConfig {
            dt_corr_ms: args.dt_corr,
            levels: &args.levels,
            reps: args.reps,
            seed: args.seed,
            target,
        },
    )?;
    for r in &rows {
        println!("sigma {:.3}  AUC {:.4} ± {:.4}", r.sigma, r.mean_auc, r.se);
    }
    Ok(())
}

#[derive(Serialize)]
struct DemoPose {
    name: &'static str,
    u_max_um_s: f64,
    x_um: f64,
    y_um: f64,
    speed_um_s: f64,
    angular_velocity_rad_s: f64,
    reference_speed_um_s: f64,
    reference_angular_velocity_rad_s: f64,
    max_stress_pa: f64,
}

#[derive(Serialize)]
struct DemoSummary {
    format_version: u32,
    poses: Vec<DemoPose>,
    correlation: f64,
    rotation_rad: f64,
    reference_correlation: f64,
    reference_max_stress_pa: f64,
}

pub fn demo(cli: &Cli, args: &DemoArgs) -> Result<()> {
    ensure!(args.grid >= 0.05, "--grid {} µm is too fine", args.grid);
    let dir = args.dir.clone().unwrap_or_else(|| cli.out.join("demo"));
    make_dir(&dir)?;
    let models = args.models.as_deref().map(load_models).transpose()?;
    let options = PathOptions::default();
    let mut poses = Vec::new();
    let mut patterns = Vec::new();
    for case in demo_cases() {
        let op = options.operator(&case.vessel)?;
        let sol = op.solve(&case.pose, &options.fluid, case.u_max)?;
        patterns.push(encode_pattern(&sol.traction)?);
        let mut out = create(&dir.join(format!("{}_stress.csv", case.name)))?;
        report::stress_vectors(&mut out, &sol.traction)?;
        out.flush()?;
        let half = Vec2::new(6.0, 6.0);
        let mut out = create(&dir.join(format!("{}_velocity.csv", case.name)))?;
        write_velocity_grid(
            &mut out,
            &op.field(&sol),
            case.pose.center - half,
            case.pose.center + half,
            args.grid,
        )?;
        out.flush()?;
        if !cli.quiet {
            eprintln!("simulating {} path", case.name);
        }
        let path = simulate_with(&case.scenario, &op, &options)?;
        path.save(&dir.join(format!("{}.path", case.name)))?;
        let series = path_correlation_series(&path, args.dt_corr)?;
        let mut out = create(&dir.join(format!("{}_correlation.csv", case.name)))?;
        report::correlation_series(&mut out, &series)?;
        out.flush()?;
        if let Some((params, pca)) = &models {
            let eval = evaluate_path(&path, params, pca, args.dt_corr)?;
            let mut out = create(&dir.join(format!("{}_pbranch.csv", case.name)))?;
            report::pbranch_trace(&mut out, &eval)?;
            out.flush()?;
        }
        poses.push(DemoPose {
            name: case.name,
            u_max_um_s: case.u_max,
            x_um: case.pose.center.x,
            y_um: case.pose.center.y,
            speed_um_s: sol.motion.speed(),
            angular_velocity_rad_s: sol.motion.angular_velocity,
            reference_speed_um_s: case.reference_speed,
            reference_angular_velocity_rad_s: case.reference_angular_velocity,
            max_stress_pa: max_surface_stress(&sol.traction),
        });
    }
    let (correlation, rotation_rad) = max_correlation(&patterns[0], &patterns[1])?;
    let summary = DemoSummary {
        format_version: RUN_FORMAT_VERSION,
        poses,
        correlation,
        rotation_rad,
        reference_correlation: REFERENCE_CORRELATION,
        reference_max_stress_pa: REFERENCE_MAX_STRESS,
    };
    let mut out = create(&dir.join("demo_summary.json"))?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    for p in &summary.poses {
        println!(
            "{}: speed {:.1} µm/s (reference {}), angular velocity {:.1} rad/s (reference {}), max stress {:.3} Pa",
            p.name,
            p.speed_um_s,
            p.reference_speed_um_s,
            p.angular_velocity_rad_s,
            p.reference_angular_velocity_rad_s,
            p.max_stress_pa
        );
    }
    println!("stress pattern correlation {correlation:.4} (reference {REFERENCE_CORRELATION})");
    Ok(())
}
