use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::Parser;

use topic_dynamics::ephemeral::{EphemeralityParams, Orientation, Thresholds};
use topic_dynamics::pipeline::{self, write_counts_csv, DateRange, InputFormat, PipelineConfig};
use topic_dynamics::synth::FixtureSet;
use topic_dynamics::{Alignment, Error, MetricKind, Result};

/// Cluster discussion topics by the shape of their daily activity and score
/// how ephemeral their attention is.
#[derive(Debug, Parser)]
#[command(name = "topic-dynamics", version)]
struct Cli {
    /// Daily-count file(s) with columns topic_id,date,count.
    #[arg(long, required_unless_present = "fixtures")]
    input: Vec<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: InputFormat,
    /// First day of the analyzed range (default: earliest date in the input).
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Last day of the analyzed range (default: latest date in the input).
    #[arg(long)]
    to: Option<NaiveDate>,
    #[arg(long, default_value_t = 3)]
    smooth_window: usize,
    #[arg(long, default_value = "nds")]
    metric: MetricKind,
    #[arg(long, default_value = "exhaustive")]
    alignment: Alignment,
    #[arg(long, default_value_t = 3)]
    min_cluster_size: usize,
    #[arg(long, default_value_t = 3)]
    core_k: usize,
    #[arg(long, default_value_t = 0.8)]
    mass_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    trim: f64,
    #[arg(long, default_value = "verbatim")]
    e4_orientation: Orientation,
    /// Fixed category threshold for e_filtered (default: median).
    #[arg(long, requires = "sorted_threshold")]
    filtered_threshold: Option<f64>,
    /// Fixed category threshold for the oriented e_sorted (default: median).
    #[arg(long, requires = "filtered_threshold")]
    sorted_threshold: Option<f64>,
    /// Topics to overlay in aligned_pair.csv (default: the first two).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pair: Option<Vec<String>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the distance matrix (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Generate the input from a fixture specification (JSON).
    #[arg(long, conflicts_with = "input")]
    fixtures: Option<PathBuf>,
    /// With --fixtures: write the generated counts as CSV to this path and exit.
    #[arg(long, requires = "fixtures")]
    emit_csv: Option<PathBuf>,
}

fn emit_fixtures(spec: &PathBuf, dest: &PathBuf) -> Result<()> {
    let bytes = std::fs::read(spec).map_err(|e| Error::Io {
        path: spec.clone(),
        source: e,
    })?;
    let set: FixtureSet = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        path: spec.clone(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let series: Vec<_> = set.generate()?.into_iter().map(|g| g.series).collect();
    let file = File::create(dest).map_err(|e| Error::Io {
        path: dest.clone(),
        source: e,
    })?;
    write_counts_csv(&series, file)
}

fn execute(cli: Cli) -> Result<()> {
    if let (Some(spec), Some(dest)) = (&cli.fixtures, &cli.emit_csv) {
        return emit_fixtures(spec, dest);
    }
    let thresholds = match (cli.filtered_threshold, cli.sorted_threshold) {
        (Some(filtered), Some(sorted)) => Thresholds::Fixed { filtered, sorted },
        _ => Thresholds::Median,
    };
    let config = PipelineConfig {
        inputs: cli.input,
        format: cli.format,
        fixtures: cli.fixtures,
        range: DateRange {
            from: cli.from,
            to: cli.to,
        },
        smooth_window: cli.smooth_window,
        metric: cli.metric,
        alignment: cli.alignment,
        min_cluster_size: cli.min_cluster_size,
        core_k: cli.core_k,
        ephemerality: EphemeralityParams {
            mass_threshold: cli.mass_threshold,
            trim_fraction: cli.trim,
            thresholds,
            orientation: cli.e4_orientation,
            ..EphemeralityParams::default()
        },
        pair: cli.pair.map(|p| (p[0].clone(), p[1].clone())),
        out: cli.out,
        threads: cli.threads,
    };
    let summary = pipeline::run(&config)?;
    let r = &summary.report;
    eprintln!(
        "{} topics ({} excluded, {} rows out of range): {} clusters {:?}, {} noise",
        r.n_topics,
        r.excluded_topics.len(),
        r.out_of_range_rows,
        r.n_clusters,
        r.cluster_sizes,
        r.n_noise
    );
    if let Some(ari) = r.adjusted_rand_index {
        eprintln!("adjusted Rand index vs fixture labels: {ari:.4}");
    }
    eprintln!("wrote {} files to {}", summary.files.len(), config.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
