use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use logscan::dataset::{drop_empty, split as split_dataset, Dataset, SplitSpec};
use logscan::io::{self, LabeledReport, ManifestEntry, ReportFormat, ScanFormat};
use logscan::metrics::{evaluate as score, MetricConfig, ScoreReport, ScoredPair};
use logscan::predictor::{
    extract_features, FeatureKnn, IcpNearestNeighbor, LogFeatures, PredictionOutcome, PredictorKind,
};
use logscan::synthetic::{generate_dataset, SyntheticSpec};
use logscan::{icp_align, Error, IcpConfig, PointCloud, Result, RigidTransform};

use crate::{IcpArgs, MetricArgs, PredictorArgs, SplitArgs};

fn icp_config(a: &IcpArgs) -> Result<IcpConfig<f64>> {
    let cfg = IcpConfig {
        tau: a.tau,
        max_iterations: a.max_iters,
        initial_transform: RigidTransform::identity(),
        pre_align: a.pre_align,
        stride: a.stride,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn metric_config(a: &MetricArgs) -> Result<MetricConfig> {
    let cfg = MetricConfig {
        epsilon: a.epsilon,
        filter_zero_pairs: !a.no_filter,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn split_spec(a: &SplitArgs) -> Result<SplitSpec> {
    let spec = SplitSpec {
        train_fraction: a.train_frac,
        seed: a.seed,
        runs: a.runs,
        drop_empty_baskets: a.drop_empty,
    };
    spec.validate()?;
    Ok(spec)
}

fn predictor_kinds(a: &PredictorArgs) -> Result<Vec<PredictorKind>> {
    let mut kinds = Vec::new();
    for p in &a.predictor {
        let k: PredictorKind = p.parse()?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(Error::InvalidInput("no predictor selected".into()));
    }
    if a.k == 0 {
        return Err(Error::InvalidInput("--k must be at least 1".into()));
    }
    Ok(kinds)
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = match jobs {
        Some(0) => return Err(Error::InvalidInput("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

fn report_format(s: &str) -> Result<ReportFormat> {
    s.parse()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{} does not exist",
            path.display()
        )))
    }
}

pub fn register(a: &Path, b: &Path, icp: &IcpArgs, trace_out: Option<&Path>) -> Result<()> {
    let cfg = icp_config(icp)?;
    check_exists(a)?;
    check_exists(b)?;
    let moving = io::load_scan_auto(a)?;
    let model = io::load_scan_auto(b)?;
    let (res, trace) = icp_align(&moving, &model, &cfg)?;

    let q = res.transform.rotation.to_array();
    let t = res.transform.translation;
    println!("quaternion: {} {} {} {}", q[0], q[1], q[2], q[3]);
    println!("translation: {} {} {}", t.x, t.y, t.z);
    println!("mse: {}", res.mse);
    println!("iterations: {}", trace.iterations());
    println!("terminal_reason: {}", trace.terminal_reason.as_str());

    if let Some(path) = trace_out {
        let mut csv = String::from("iteration,mse\n");
        for s in &trace.steps {
            let _ = writeln!(csv, "{},{}", s.iteration, s.mse);
        }
        let target = (path != Path::new("-")).then_some(path);
        emit(target, &csv)?;
    }
    Ok(())
}

/// A log to predict: id, scan and (for knn) its features.
struct Query<'a> {
    id: &'a str,
    scan: &'a PointCloud<f64>,
    features: Option<LogFeatures>,
}

fn run_predictor(
    kind: PredictorKind,
    train: &Dataset<f64>,
    queries: &[Query<'_>],
    icp: &IcpConfig<f64>,
    k: usize,
) -> Result<Vec<(String, PredictionOutcome)>> {
    let outcomes: Vec<PredictionOutcome> = match kind {
        PredictorKind::Icp => {
            let nn = IcpNearestNeighbor::new(train.records())?;
            queries
                .par_iter()
                .map(|q| nn.predict(q.scan, icp))
                .collect::<Result<_>>()?
        }
        PredictorKind::Mean => {
            let basket = logscan::mean_predict(train.records())?;
            queries
                .iter()
                .map(|_| PredictionOutcome {
                    predicted: basket.clone(),
                    neighbor_id: None,
                    distance: None,
                })
                .collect()
        }
        PredictorKind::Knn => {
            let knn = FeatureKnn::new(train.records())?;
            queries
                .par_iter()
                .map(|q| {
                    let f = match q.features {
                        Some(f) => f,
                        None => extract_features(q.scan)?,
                    };
                    knn.predict(&f, k)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(queries
        .iter()
        .map(|q| q.id.to_string())
        .zip(outcomes)
        .collect())
}

fn with_features(ds: &mut Dataset<f64>) -> Result<()> {
    let features = ds
        .records()
        .par_iter()
        .map(|r| extract_features(&r.scan))
        .collect::<Result<Vec<_>>>()?;
    for (r, f) in ds.records_mut().iter_mut().zip(features) {
        r.features = Some(f);
    }
    Ok(())
}

fn product_names(ds: &Dataset<f64>) -> Vec<String> {
    ds.product_names()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| io::default_product_names(ds.product_count()))
}

pub fn predict(
    train_manifest: &Path,
    test_manifest: &Path,
    baskets: Option<&Path>,
    predictor: &PredictorArgs,
    icp: &IcpArgs,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = icp_config(icp)?;
    let kinds = predictor_kinds(predictor)?;
    let [kind] = kinds[..] else {
        return Err(Error::InvalidInput(
            "predict takes exactly one --predictor".into(),
        ));
    };
    let pool = thread_pool(predictor.jobs)?;
    check_exists(train_manifest)?;
    check_exists(test_manifest)?;

    let mut train = io::load_dataset(&io::load_manifest(train_manifest, baskets)?)?;
    if train.is_empty() {
        return Err(Error::InvalidInput(
            "training manifest lists no logs".into(),
        ));
    }
    let test = io::load_scans(&io::load_manifest(test_manifest, None)?)?;

    let rows = pool.install(|| -> Result<_> {
        if kind == PredictorKind::Knn {
            with_features(&mut train)?;
        }
        let queries: Vec<Query<'_>> = test
            .iter()
            .map(|(id, scan)| Query {
                id,
                scan,
                features: None,
            })
            .collect();
        run_predictor(kind, &train, &queries, &cfg, predictor.k)
    })?;
    emit(out, &io::format_predictions(&product_names(&train), &rows))
}

pub fn evaluate(
    predictions: &Path,
    truth: &Path,
    metrics: &MetricArgs,
    label: &str,
    format: &str,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = metric_config(metrics)?;
    let format = report_format(format)?;
    check_exists(predictions)?;
    check_exists(truth)?;
    let pred = io::load_predictions(predictions)?;
    let real = io::load_baskets(truth)?;

    let missing: Vec<&str> = real
        .rows
        .keys()
        .filter(|id| !pred.rows.contains_key(*id))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = pred
        .rows
        .keys()
        .filter(|id| !real.rows.contains_key(*id))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("prediction and truth ids differ");
        if !missing.is_empty() {
            let _ = write!(msg, "; missing predictions for: {}", missing.join(", "));
        }
        if !extra.is_empty() {
            let _ = write!(msg, "; no truth for: {}", extra.join(", "));
        }
        return Err(Error::InvalidInput(msg));
    }

    let pairs = real
        .rows
        .iter()
        .map(|(id, y)| ScoredPair::new(y, &pred.rows[id]))
        .collect::<Result<Vec<_>>>()?;
    let report = score(&pairs, &cfg)?;
    let text = io::format_report(
        &[LabeledReport {
            predictor: label.to_string(),
            report,
        }],
        format,
    )?;
    emit(out, &text)
}

pub struct ExperimentArgs<'a> {
    pub manifest: &'a Path,
    pub baskets: Option<&'a Path>,
    pub split: &'a SplitArgs,
    pub predictor: &'a PredictorArgs,
    pub icp: &'a IcpArgs,
    pub metrics: &'a MetricArgs,
    pub format: &'a str,
    pub out: Option<&'a Path>,
    pub predictions_dir: Option<&'a Path>,
}

pub fn experiment(a: ExperimentArgs<'_>) -> Result<()> {
    let icp = icp_config(a.icp)?;
    let metrics = metric_config(a.metrics)?;
    let spec = split_spec(a.split)?;
    let kinds = predictor_kinds(a.predictor)?;
    let format = report_format(a.format)?;
    let pool = thread_pool(a.predictor.jobs)?;
    check_exists(a.manifest)?;
    if let Some(dir) = a.predictions_dir {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }

    let mut ds = io::load_dataset(&io::load_manifest(a.manifest, a.baskets)?)?;
    if spec.drop_empty_baskets {
        ds = drop_empty(&ds);
    }
    let names = product_names(&ds);

    let mut rows: Vec<LabeledReport> = Vec::new();
    let mut per_kind: Vec<Vec<ScoreReport>> = vec![Vec::new(); kinds.len()];
    pool.install(|| -> Result<()> {
        if kinds.contains(&PredictorKind::Knn) {
            with_features(&mut ds)?;
        }
        for run in 0..spec.runs {
            let (train, test) = split_dataset(&ds, &spec, run)?;
            let queries: Vec<Query<'_>> = test
                .records()
                .iter()
                .map(|r| Query {
                    id: &r.id,
                    scan: &r.scan,
                    features: r.features,
                })
                .collect();
            for (ki, &kind) in kinds.iter().enumerate() {
                let predicted = run_predictor(kind, &train, &queries, &icp, a.predictor.k)?;
                if let Some(dir) = a.predictions_dir {
                    let path = dir.join(format!("{kind}_run{run}.csv"));
                    io::write_predictions(&path, &names, &predicted)?;
                }
                let pairs = test
                    .records()
                    .iter()
                    .zip(&predicted)
                    .map(|(r, (_, o))| ScoredPair::new(&r.basket, &o.predicted))
                    .collect::<Result<Vec<_>>>()?;
                let report = score(&pairs, &metrics)?;
                eprintln!(
                    "run {}/{} {kind}: s_z {:.4} s_pro_x_pre {:.4} ({} train, {} test)",
                    run + 1,
                    spec.runs,
                    report.s_z,
                    report.s_pro_x_pre,
                    train.len(),
                    test.len()
                );
                rows.push(LabeledReport {
                    predictor: format!("{kind}/run{run}"),
                    report,
                });
                per_kind[ki].push(report);
            }
        }
        Ok(())
    })?;
    for (kind, reports) in kinds.iter().zip(&per_kind) {
        rows.push(LabeledReport {
            predictor: format!("{kind}/mean"),
            report: ScoreReport::mean(reports)?,
        });
    }
    emit(a.out, &io::format_report(&rows, format)?)
}

fn absolute(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn split(
    manifest: &Path,
    baskets: Option<&Path>,
    args: &SplitArgs,
    run: usize,
    out_dir: &Path,
) -> Result<()> {
    let spec = split_spec(args)?;
    check_exists(manifest)?;
    let m = io::load_manifest(manifest, baskets)?;
    let mut ds = io::load_dataset(&m)?;
    if spec.drop_empty_baskets {
        ds = drop_empty(&ds);
    }
    let (train, test) = split_dataset(&ds, &spec, run)?;
    create_dir(out_dir)?;

    let paths: std::collections::HashMap<&str, &Path> = m
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e.scan_path.as_path()))
        .collect();
    let names = product_names(&ds);
    for (name, part) in [("train.csv", &train), ("test.csv", &test)] {
        let entries = part
            .records()
            .iter()
            .map(|r| {
                Ok(ManifestEntry {
                    id: r.id.clone(),
                    scan_path: absolute(paths[r.id.as_str()])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        io::write_manifest(&out_dir.join(name), &entries)?;
    }
    io::write_baskets(
        &out_dir.join(io::DEFAULT_BASKETS_FILE),
        &names,
        ds.records().iter().map(|r| (r.id.as_str(), &r.basket)),
    )?;
    io::write_baskets(
        &out_dir.join("test_baskets.csv"),
        &names,
        test.records().iter().map(|r| (r.id.as_str(), &r.basket)),
    )?;
    eprintln!(
        "run {run}: {} train, {} test -> {}",
        train.len(),
        test.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn synth(out_dir: &Path, spec: &SyntheticSpec) -> Result<()> {
    let ds = generate_dataset(spec)?;
    let scans = out_dir.join("scans");
    create_dir(&scans)?;
    let mut entries = Vec::with_capacity(ds.len());
    for r in ds.records() {
        let path = scans.join(format!("{}.xyz", r.id));
        io::write_scan(&r.scan, &path, ScanFormat::Xyz)?;
        entries.push(ManifestEntry {
            id: r.id.clone(),
            scan_path: path,
        });
    }
    io::write_manifest(&out_dir.join("manifest.csv"), &entries)?;
    io::write_baskets(
        &out_dir.join(io::DEFAULT_BASKETS_FILE),
        &product_names(&ds),
        ds.records().iter().map(|r| (r.id.as_str(), &r.basket)),
    )?;
    eprintln!("wrote {} logs to {}", ds.len(), out_dir.display());
    Ok(())
}
