//! End-to-end batch run: ingest counts, build TDVs, compute the aligned
//! distance matrix, cluster, score ephemerality, and write reports.
//!
//! Every output is a pure function of the input bytes and the configuration.
//! The thread count only sizes the worker pool for the distance matrix, whose
//! entries land in fixed slots, so it never changes a single output byte.

mod ingest;
mod output;
mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ingest::{assemble, ingest, read_rows, write_counts_csv, CountRow, DateRange, InputFormat, Ingested};
pub use output::{fmt_f64, fmt_opt};
pub use stats::{adjusted_rand_index, mean_std};

use crate::align::{align, Alignment};
use crate::cluster::{ClusterResult, DistanceMatrix, Hdbscan, DEFAULT_MIN_CLUSTER_SIZE, NOISE};
use crate::ephemeral::{assess, EphemeralityParams, EphemeralityReport, ResolvedThresholds};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::synth::{FixtureSet, ShapeKind};
use crate::tdv::{Preprocess, Tdv, DEFAULT_SMOOTHING_WINDOW};
use output::OutDir;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run configuration. The output directory and thread count are excluded
/// from serialization because they cannot affect results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub format: InputFormat,
    /// Fixture specification to generate the input from instead of reading
    /// `inputs`.
    pub fixtures: Option<PathBuf>,
    pub range: DateRange,
    pub smooth_window: usize,
    pub metric: MetricKind,
    pub alignment: Alignment,
    pub min_cluster_size: usize,
    pub core_k: usize,
    pub ephemerality: EphemeralityParams,
    /// Topics for the aligned-pair overlay; the first two topics if unset.
    pub pair: Option<(String, String)>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            format: InputFormat::Csv,
            fixtures: None,
            range: DateRange::default(),
            smooth_window: DEFAULT_SMOOTHING_WINDOW,
            metric: MetricKind::Nds,
            alignment: Alignment::PairwiseExhaustive,
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            core_k: DEFAULT_MIN_CLUSTER_SIZE,
            ephemerality: EphemeralityParams::default(),
            pair: None,
            out: PathBuf::from("out"),
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match (self.inputs.is_empty(), &self.fixtures) {
            (true, None) => return bad("no input given".into()),
            (false, Some(_)) => return bad("inputs and fixtures are mutually exclusive".into()),
            _ => {}
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return bad(format!("smoothing window must be odd and positive, got {}", self.smooth_window));
        }
        if self.min_cluster_size < 2 {
            return bad(format!("min_cluster_size must be at least 2, got {}", self.min_cluster_size));
        }
        if self.core_k == 0 {
            return bad("core_k must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("thread count must be at least 1".into());
        }
        self.ephemerality.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub software: &'static str,
    pub version: &'static str,
    pub config: PipelineConfig,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub shift: i64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub n_topics: usize,
    pub excluded_topics: Vec<String>,
    pub out_of_range_rows: usize,
    /// `core_k` after capping at the number of topics.
    pub core_k: usize,
    pub n_clusters: usize,
    pub cluster_sizes: Vec<usize>,
    pub n_noise: usize,
    pub thresholds: ResolvedThresholds,
    pub pair: PairReport,
    /// Agreement with fixture labels, when the input was generated.
    pub adjusted_rand_index: Option<f64>,
}

/// In-memory results of a run, alongside the files written.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub tdvs: Vec<Tdv>,
    pub matrix: DistanceMatrix,
    pub clusters: ClusterResult,
    pub ephemerality: Vec<EphemeralityReport>,
    pub report: RunReport,
    /// Generator labels per topic when running on fixtures.
    pub truth: Option<Vec<ShapeKind>>,
    pub files: Vec<PathBuf>,
}

struct Loaded {
    ingested: Ingested,
    digests: Vec<InputDigest>,
    truth: Option<BTreeMap<String, ShapeKind>>,
}

fn digest(path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

fn load(config: &PipelineConfig) -> Result<Loaded> {
    if let Some(path) = &config.fixtures {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let set: FixtureSet = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        let generated = set.generate()?;
        let truth = generated
            .iter()
            .map(|g| (g.series.topic_id().to_owned(), g.label))
            .collect();
        let series: Vec<_> = generated.into_iter().map(|g| g.series).collect();
        let mut csv = Vec::new();
        write_counts_csv(&series, &mut csv)?;
        let rows = read_rows(csv.as_slice(), path, InputFormat::Csv)?;
        return Ok(Loaded {
            ingested: assemble(rows, config.range)?,
            digests: vec![digest(path, &bytes)],
            truth: Some(truth),
        });
    }
    let mut rows = Vec::new();
    let mut digests = Vec::new();
    for path in &config.inputs {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        rows.extend(read_rows(bytes.as_slice(), path, config.format)?);
        digests.push(digest(path, &bytes));
    }
    Ok(Loaded {
        ingested: assemble(rows, config.range)?,
        digests,
        truth: None,
    })
}

fn pair_indices(config: &PipelineConfig, ids: &[String]) -> Result<(usize, usize)> {
    let Some((a, b)) = &config.pair else {
        return Ok((0, 1));
    };
    let find = |id: &String| {
        ids.iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::InvalidParameter(format!("pair topic `{id}` not among analyzed topics")))
    };
    Ok((find(a)?, find(b)?))
}

pub fn run(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let loaded = load(config)?;
    let ingested = loaded.ingested;
    let n = ingested.series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "{n} topic(s) with activity in range; at least 2 are needed"
        )));
    }

    let preprocess = Preprocess {
        window: config.smooth_window,
        ..Preprocess::default()
    };
    let tdvs = ingested
        .series
        .iter()
        .map(|s| preprocess.apply(s))
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = tdvs.iter().map(|t| t.topic_id().to_owned()).collect();
    let (pa, pb) = pair_indices(config, &ids)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    let matrix = pool.install(|| DistanceMatrix::compute(&tdvs, config.metric, config.alignment))?;

    let core_k = config.core_k.min(n);
    let clusters = Hdbscan {
        min_cluster_size: config.min_cluster_size,
        core_k,
    }
    .fit(&matrix)?;
    let (ephemerality, thresholds) = assess(&tdvs, &config.ephemerality)?;
    let aligned = align(&tdvs[pa], &tdvs[pb], config.alignment, config.metric)?;

    let truth = loaded.truth.map(|t| ids.iter().map(|id| t[id]).collect::<Vec<_>>());
    let ari = truth
        .as_ref()
        .map(|t| adjusted_rand_index(t, &clusters.labels));

    let report = RunReport {
        from: ingested.from,
        to: ingested.to,
        n_topics: n,
        excluded_topics: ingested.excluded,
        out_of_range_rows: ingested.out_of_range,
        core_k,
        n_clusters: clusters.n_clusters(),
        cluster_sizes: (0..clusters.n_clusters() as i32)
            .map(|c| clusters.members(c).len())
            .collect(),
        n_noise: clusters.n_noise(),
        thresholds,
        pair: PairReport {
            a: ids[pa].clone(),
            b: ids[pb].clone(),
            shift: aligned.shift,
            distance: aligned.distance(config.metric),
        },
        adjusted_rand_index: ari,
    };
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: VERSION,
        config: config.clone(),
        inputs: loaded.digests,
    };

    let mut out = OutDir::create(&config.out)?;
    write_outputs(&mut out, &ids, &tdvs, &matrix, &clusters, &ephemerality, &report, ingested.from)?;
    write_pair(&mut out, &report.pair, &aligned)?;
    out.json("manifest.json", &manifest)?;
    out.json("run_report.json", &report)?;

    Ok(RunSummary {
        tdvs,
        matrix,
        clusters,
        ephemerality,
        report,
        truth,
        files: out.into_written(),
    })
}

fn label_str(label: i32) -> String {
    label.to_string()
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    out: &mut OutDir,
    ids: &[String],
    tdvs: &[Tdv],
    matrix: &DistanceMatrix,
    clusters: &ClusterResult,
    reports: &[EphemeralityReport],
    run: &RunReport,
    from: NaiveDate,
) -> Result<()> {
    let n = ids.len();
    let mut header: Vec<&str> = vec!["topic_id"];
    header.extend(ids.iter().map(String::as_str));
    out.csv(
        "distance_matrix.csv",
        &header,
        (0..n).map(|i| std::iter::once(ids[i].clone()).chain((0..n).map(move |j| fmt_f64(matrix.get(i, j))))),
    )?;
    out.csv(
        "shifts.csv",
        &header,
        (0..n).map(|i| std::iter::once(ids[i].clone()).chain((0..n).map(move |j| matrix.shift(i, j).to_string()))),
    )?;

    let medoid_of = |label: i32| (label != NOISE).then(|| ids[clusters.medoids[label as usize]].clone());
    out.csv(
        "clusters.csv",
        &["topic_id", "cluster", "stability", "medoid", "centroid_distance"],
        (0..n).map(|i| {
            let label = clusters.labels[i];
            let stability = (label != NOISE).then(|| clusters.stabilities[label as usize]);
            vec![
                ids[i].clone(),
                label_str(label),
                fmt_opt(stability),
                medoid_of(label).unwrap_or_default(),
                fmt_opt(clusters.centroid_distance[i]),
            ]
        }),
    )?;
    out.csv(
        "cluster_stability.csv",
        &["cluster", "size", "stability", "medoid"],
        (0..clusters.n_clusters() as i32).map(|c| {
            vec![
                label_str(c),
                clusters.members(c).len().to_string(),
                fmt_f64(clusters.stabilities[c as usize]),
                medoid_of(c).unwrap_or_default(),
            ]
        }),
    )?;

    #[derive(Serialize)]
    #[serde(tag = "record", rename_all = "lowercase")]
    enum TreeRecord<'a> {
        Cluster(&'a crate::cluster::CondensedCluster),
        Point {
            topic_id: &'a str,
            cluster: usize,
            lambda: f64,
        },
    }
    out.jsonl(
        "condensed_tree.jsonl",
        clusters
            .tree
            .clusters
            .iter()
            .map(TreeRecord::Cluster)
            .chain(clusters.tree.exits.iter().map(|e| TreeRecord::Point {
                topic_id: &ids[e.point],
                cluster: e.cluster,
                lambda: e.lambda,
            })),
    )?;

    let orientation = run.thresholds.orientation;
    out.csv(
        "ephemerality.csv",
        &["topic_id", "e_orig", "e_filtered", "e_sorted", "e_sorted_oriented", "category", "cluster"],
        reports.iter().zip(&clusters.labels).map(|(r, &label)| {
            vec![
                r.topic_id.clone(),
                fmt_f64(r.e_orig),
                fmt_f64(r.e_filtered),
                fmt_f64(r.e_sorted),
                fmt_f64(orientation.apply(r.e_sorted)),
                r.category.to_string(),
                label_str(label),
            ]
        }),
    )?;

    let mut groups: Vec<i32> = (0..clusters.n_clusters() as i32).collect();
    if clusters.n_noise() > 0 {
        groups.push(NOISE);
    }
    out.csv(
        "cluster_ephemerality.csv",
        &[
            "cluster",
            "size",
            "mean_e_orig",
            "std_e_orig",
            "mean_e_filtered",
            "std_e_filtered",
            "mean_e_sorted",
            "std_e_sorted",
        ],
        groups.iter().map(|&c| {
            let members = clusters.members(c);
            let mut row = vec![label_str(c), members.len().to_string()];
            let fields: [fn(&EphemeralityReport) -> f64; 3] = [|r| r.e_orig, |r| r.e_filtered, |r| r.e_sorted];
            for f in fields {
                let values: Vec<f64> = members.iter().map(|&i| f(&reports[i])).collect();
                let (mean, std) = mean_std(&values).expect("clusters are nonempty");
                row.push(fmt_f64(mean));
                row.push(fmt_f64(std));
            }
            row
        }),
    )?;

    out.csv(
        "curves.csv",
        &["topic_id", "day", "date", "value"],
        tdvs.iter().flat_map(|t| {
            t.values().iter().zip(from.iter_days()).enumerate().map(|(m, (v, date))| {
                vec![t.topic_id().to_owned(), m.to_string(), date.to_string(), fmt_f64(*v)]
            })
        }),
    )?;

    let mut membership: Vec<(i32, f64, usize)> = (0..n)
        .filter_map(|i| clusters.centroid_distance[i].map(|d| (clusters.labels[i], d, i)))
        .collect();
    membership.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut rank = 0;
    let mut previous = None;
    out.csv(
        "cluster_membership.csv",
        &["cluster", "rank", "topic_id", "centroid_distance"],
        membership.iter().map(|&(label, d, i)| {
            rank = if previous == Some(label) { rank + 1 } else { 0 };
            previous = Some(label);
            vec![label_str(label), rank.to_string(), ids[i].clone(), fmt_f64(d)]
        }),
    )?;

    out.csv(
        "ephemerality_scatter.csv",
        &["topic_id", "e_filtered", "e_sorted_oriented", "category", "cluster"],
        reports.iter().zip(&clusters.labels).map(|(r, &label)| {
            vec![
                r.topic_id.clone(),
                fmt_f64(r.e_filtered),
                fmt_f64(orientation.apply(r.e_sorted)),
                r.category.to_string(),
                label_str(label),
            ]
        }),
    )
}

fn write_pair(out: &mut OutDir, pair: &PairReport, aligned: &crate::align::AlignedPair) -> Result<()> {
    let header = ["position", pair.a.as_str(), pair.b.as_str()];
    out.csv(
        "aligned_pair.csv",
        &header,
        aligned
            .a
            .values()
            .iter()
            .zip(aligned.b.values())
            .enumerate()
            .map(|(m, (x, y))| vec![m.to_string(), fmt_f64(*x), fmt_f64(*y)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdv::TopicSeries;

    fn write_input(dir: &Path, series: &[TopicSeries]) -> PathBuf {
        let path = dir.join("input.csv");
        let mut buf = Vec::new();
        write_counts_csv(series, &mut buf).unwrap();
        fs::write(&path, buf).unwrap();
        path
    }

    fn day0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 8, 15).unwrap()
    }

    #[test]
    fn duplicated_topic_forms_one_cluster() {
        let dir = tempfile::tempdir().unwrap();
        let series: Vec<_> = (0..5)
            .map(|i| TopicSeries::new(format!("t{i}"), day0(), vec![4; 30]).unwrap())
            .collect();
        let config = PipelineConfig {
            inputs: vec![write_input(dir.path(), &series)],
            out: dir.path().join("out"),
            ..PipelineConfig::default()
        };
        let summary = run(&config).unwrap();
        assert_eq!(summary.clusters.labels, vec![0; 5]);
        let first = &summary.ephemerality[0];
        for r in &summary.ephemerality {
            assert_eq!((r.e_orig, r.e_filtered, r.e_sorted, r.category), (first.e_orig, first.e_filtered, first.e_sorted, first.category));
        }
        for name in ["distance_matrix.csv", "clusters.csv", "manifest.json", "run_report.json", "aligned_pair.csv"] {
            assert!(dir.path().join("out").join(name).is_file(), "{name}");
        }
    }

    #[test]
    fn too_few_topics() {
        let dir = tempfile::tempdir().unwrap();
        let series = vec![TopicSeries::new("only", day0(), vec![1, 2, 3]).unwrap()];
        let config = PipelineConfig {
            inputs: vec![write_input(dir.path(), &series)],
            out: dir.path().join("out"),
            ..PipelineConfig::default()
        };
        let err = run(&config).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let series: Vec<_> = (0..3)
            .map(|i| TopicSeries::new(format!("t{i}"), day0(), vec![1, 2 + i, 3]).unwrap())
            .collect();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let config = PipelineConfig {
            inputs: vec![write_input(dir.path(), &series)],
            out: blocker.join("out"),
            ..PipelineConfig::default()
        };
        let err = run(&config).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn config_validation() {
        let ok = PipelineConfig {
            inputs: vec!["x.csv".into()],
            ..PipelineConfig::default()
        };
        assert!(ok.validate().is_ok());
        for bad in [
            PipelineConfig { inputs: vec![], ..ok.clone() },
            PipelineConfig { fixtures: Some("f.json".into()), ..ok.clone() },
            PipelineConfig { smooth_window: 4, ..ok.clone() },
            PipelineConfig { min_cluster_size: 1, ..ok.clone() },
            PipelineConfig { threads: Some(0), ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn config_defaults_round_trip() {
        let c = PipelineConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.metric, MetricKind::Nds);
        assert_eq!(back.alignment, Alignment::PairwiseExhaustive);
        assert_eq!((back.smooth_window, back.min_cluster_size), (3, 3));
        assert_eq!(back.ephemerality, EphemeralityParams::default());
    }
}
