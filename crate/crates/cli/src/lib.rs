//! `latent-fps` command-line pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Every output file is
//! written to a temporary sibling first and renamed into place.

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use latent_fps::autoencoder::{Autoencoder, LatentSpace, TrainConfig};
use latent_fps::datagen::{generate, MixtureConfig};
use latent_fps::evaluation::{learning_curve, validate_fractions, LabeledSet, Strategy};
use latent_fps::io::{read_column, read_matrix, write_column, write_matrix, MatrixFormat};
use latent_fps::selection::{farthest_point_sample, partition_quarters, random_sample, StartRule};
use latent_fps::{pca, DataMatrix};

mod report;

pub const DEFAULT_LATENT_DIM: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<latent_fps::Error> for CliError {
    fn from(e: latent_fps::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(flag: &str, msg: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

#[derive(Debug, Parser)]
#[command(name = "latent-fps", version, about = "Diverse sample selection in autoencoder latent space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Fps,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Space {
    Latent,
    Pca2,
}

/// `centroid` or a row index.
#[derive(Debug, Clone, Copy)]
struct StartArg(StartRule);

impl FromStr for StartArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "centroid" {
            return Ok(StartArg(StartRule::FarthestFromCentroid));
        }
        s.parse()
            .map(|i| StartArg(StartRule::FixedIndex(i)))
            .map_err(|_| format!("expected `centroid` or a row index, got {s:?}"))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic imbalanced two-cluster mixture.
    Generate {
        /// Feature matrix (`.csv` for CSV, EMB1 otherwise).
        #[arg(long)]
        output: PathBuf,
        /// Defaults to `labels.csv` next to the features.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Defaults to `targets.csv` next to the features.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 180)]
        majority: usize,
        #[arg(long, default_value_t = 20)]
        minority: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        stddev: f64,
        #[arg(long, default_value_t = 4.0)]
        separation: f64,
    },
    /// Train the autoencoder and write an MLP1 model file.
    TrainAe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Defaults to min(4, input columns - 1).
        #[arg(long)]
        latent_dim: Option<usize>,
        /// Comma-separated encoder hidden widths.
        #[arg(long, default_value = "32", value_delimiter = ',')]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional `epoch,loss` CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Map samples to the latent space of a trained model.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Project latent vectors onto principal components.
    Pca {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        components: usize,
        /// `order,gap` CSV from `select`; marks each row's quarter.
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Order samples for labeling.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Fps)]
        method: Method,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "centroid")]
        start: StartArg,
        #[arg(long, value_enum, default_value_t = Space::Latent)]
        space: Space,
        #[arg(long)]
        output: PathBuf,
    },
    /// Learning curves of FPS and random selection under k-NN regression.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        latent: PathBuf,
        #[arg(long, default_value = "0.25,0.5,0.75,1", value_delimiter = ',')]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "centroid")]
        start: StartArg,
        #[arg(long, value_enum, default_value_t = Space::Latent)]
        space: Space,
        #[arg(long)]
        output: PathBuf,
    },
    /// Collect figure data into tidy CSVs.
    Report {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        fps_projection: PathBuf,
        #[arg(long)]
        random_projection: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Generate {
            output,
            labels,
            targets,
            seed,
            majority,
            minority,
            dim,
            stddev,
            separation,
        } => {
            let labels = labels.unwrap_or_else(|| sibling(&output, "labels.csv"));
            let targets = targets.unwrap_or_else(|| sibling(&output, "targets.csv"));
            for p in [&output, &labels, &targets] {
                check_output(p)?;
            }
            if majority == 0 || minority == 0 {
                return Err(usage("--majority/--minority", "cluster sizes must be at least 1"));
            }
            if dim < 2 {
                return Err(usage("--dim", "need at least 2 dimensions"));
            }
            if !(stddev >= 0.0 && stddev.is_finite()) {
                return Err(usage("--stddev", "must be a finite non-negative number"));
            }
            if !separation.is_finite() {
                return Err(usage("--separation", "must be finite"));
            }
            let cfg = MixtureConfig::imbalanced_pair(majority, minority, dim, stddev, separation, seed);
            let data = generate(&cfg)?;
            write_atomic(&output, |w| write_matrix(w, &data.features, MatrixFormat::from_extension(&output)))?;
            write_atomic(&labels, |w| write_column(w, "label", &data.labels))?;
            write_atomic(&targets, |w| write_column(w, "target", &data.targets))?;
        }
        Command::TrainAe {
            input,
            model,
            latent_dim,
            hidden,
            epochs,
            learning_rate,
            batch_size,
            seed,
            history,
        } => {
            check_input(&input)?;
            check_output(&model)?;
            if let Some(h) = &history {
                check_output(h)?;
            }
            let data = read_matrix(&input)?;
            let cols = data.cols();
            if cols < 2 {
                return Err(CliError::Data(format!(
                    "{}: need at least 2 feature columns, got {cols}",
                    input.display()
                )));
            }
            let latent_dim = latent_dim.unwrap_or(DEFAULT_LATENT_DIM.min(cols - 1));
            if latent_dim == 0 || latent_dim >= cols {
                return Err(usage("--latent-dim", format!("must be in 1..{cols} for {cols} input columns")));
            }
            if hidden.contains(&0) {
                return Err(usage("--hidden", "widths must be positive"));
            }
            if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                return Err(usage("--learning-rate", "must be positive"));
            }
            if batch_size == 0 || batch_size > data.rows() {
                return Err(usage(
                    "--batch-size",
                    format!("must be in 1..={} (the number of rows)", data.rows()),
                ));
            }
            let cfg = TrainConfig {
                learning_rate,
                epochs,
                batch_size,
                seed,
                latent_dim,
                hidden,
            };
            let (ae, losses) = Autoencoder::fit(&data, &cfg)?;
            write_atomic(&model, |w| ae.write_to(BufWriter::new(w)))?;
            if let Some(h) = history {
                write_atomic(&h, |w| {
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["epoch", "loss"])?;
                    for (e, l) in losses.iter().enumerate() {
                        out.write_record([(e + 1).to_string(), l.to_string()])?;
                    }
                    out.flush()?;
                    Ok(())
                })?;
            }
        }
        Command::Encode { input, model, output } => {
            check_input(&input)?;
            check_input(&model)?;
            check_output(&output)?;
            let ae = Autoencoder::read_from(std::io::BufReader::new(open(&model)?))?;
            let data = read_matrix(&input)?;
            if data.cols() != ae.params.input_dim() {
                return Err(CliError::Data(format!(
                    "{} has {} columns but the model expects {}",
                    input.display(),
                    data.cols(),
                    ae.params.input_dim()
                )));
            }
            let latent = ae.encode(&data)?;
            write_atomic(&output, |w| {
                write_matrix(w, &latent.embeddings, MatrixFormat::from_extension(&output))
            })?;
        }
        Command::Pca {
            input,
            components,
            selection,
            output,
        } => {
            check_input(&input)?;
            if let Some(s) = &selection {
                check_input(s)?;
            }
            check_output(&output)?;
            let latent = read_matrix(&input)?;
            if components == 0 || components > latent.cols() {
                return Err(usage("--components", format!("must be in 1..={}", latent.cols())));
            }
            let model = pca::fit(&latent, components)?;
            let projected = model.transform(&latent)?;
            let batches = match &selection {
                Some(path) => quarter_column(path, latent.rows())?,
                None => vec![0; latent.rows()],
            };
            write_atomic(&output, |w| {
                let mut out = csv::Writer::from_writer(w);
                let mut header: Vec<String> = (1..=components).map(|c| format!("pc{c}")).collect();
                header.push("selected_batch".into());
                out.write_record(&header)?;
                for (row, batch) in projected.iter_rows().zip(&batches) {
                    let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    rec.push(batch.to_string());
                    out.write_record(&rec)?;
                }
                out.flush()?;
                Ok(())
            })?;
        }
        Command::Select {
            input,
            method,
            budget,
            seed,
            start,
            space,
            output,
        } => {
            check_input(&input)?;
            check_output(&output)?;
            let latent = selection_space(read_matrix(&input)?, space)?;
            let budget = budget as usize;
            if budget > latent.rows() {
                return Err(usage("--budget", format!("{budget} exceeds the {} available rows", latent.rows())));
            }
            check_start(start, latent.rows())?;
            let result = match method {
                Method::Fps => farthest_point_sample(&latent, budget, start.0)?,
                Method::Random => random_sample(&latent, budget, seed)?,
            };
            write_atomic(&output, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["order", "gap"])?;
                for (i, g) in result.order.iter().zip(&result.gaps) {
                    out.write_record([i.to_string(), g.to_string()])?;
                }
                out.flush()?;
                Ok(())
            })?;
        }
        Command::Evaluate {
            features,
            targets,
            latent,
            fractions,
            seed,
            k,
            start,
            space,
            output,
        } => {
            for p in [&features, &targets, &latent] {
                check_input(p)?;
            }
            check_output(&output)?;
            validate_fractions(&fractions).map_err(|e| usage("--fractions", e))?;
            if k == 0 {
                return Err(usage("--k", "must be at least 1"));
            }
            let features = read_matrix(&features)?;
            let targets: Vec<f32> = read_column(open(&targets)?)?;
            let all = LabeledSet::new(features, targets)?;
            let latent = selection_space(read_matrix(&latent)?, space)?;
            if latent.rows() != all.rows() {
                return Err(CliError::Data(format!(
                    "latent matrix has {} rows, features have {}",
                    latent.rows(),
                    all.rows()
                )));
            }
            check_start(start, latent.rows())?;
            let curves = [Strategy::Fps(start.0), Strategy::Random]
                .into_iter()
                .map(|s| learning_curve(&all, &latent, s, &fractions, seed, k))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| match e {
                    latent_fps::Error::Config(msg) => usage("--k/--fractions", msg),
                    other => other.into(),
                })?;
            write_atomic(&output, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["strategy", "fraction", "mae"])?;
                for c in &curves {
                    for (f, mae) in &c.points {
                        out.write_record([c.strategy.clone(), f.to_string(), mae.to_string()])?;
                    }
                }
                out.flush()?;
                Ok(())
            })?;
        }
        Command::Report {
            curve,
            fps_projection,
            random_projection,
            output_dir,
        } => {
            for p in [&curve, &fps_projection, &random_projection] {
                check_input(p)?;
            }
            fs::create_dir_all(&output_dir)
                .map_err(|e| CliError::Data(format!("{}: {e}", output_dir.display())))?;
            report::write_bundle(&curve, &fps_projection, &random_projection, &output_dir)?;
        }
    }
    Ok(())
}

fn selection_space(latent: DataMatrix, space: Space) -> CliResult<LatentSpace> {
    match space {
        Space::Latent => Ok(LatentSpace::from_matrix(latent)),
        Space::Pca2 => {
            if latent.cols() < 2 {
                return Err(usage("--space", "pca2 needs at least 2 latent columns"));
            }
            let model = pca::fit(&latent, 2)?;
            Ok(LatentSpace::from_matrix(model.transform(&latent)?))
        }
    }
}

fn check_start(start: StartArg, rows: usize) -> CliResult<()> {
    match start.0 {
        StartRule::FixedIndex(i) if i >= rows => {
            Err(usage("--start", format!("index {i} out of range for {rows} rows")))
        }
        _ => Ok(()),
    }
}

/// Quarter number (1..=4) of every row in a selection file, 0 if unselected.
fn quarter_column(path: &Path, rows: usize) -> CliResult<Vec<u8>> {
    let order = read_order(path)?;
    let mut seen = vec![false; rows];
    for &i in &order {
        if i >= rows || std::mem::replace(&mut seen[i], true) {
            return Err(CliError::Data(format!(
                "{}: index {i} is out of range or repeated",
                path.display()
            )));
        }
    }
    let part = partition_quarters(&latent_fps::selection::SelectionResult {
        gaps: vec![0.0; order.len()],
        order,
    });
    let mut out = vec![0u8; rows];
    for (i, q) in part.quarter_of() {
        out[i] = q as u8 + 1;
    }
    Ok(out)
}

fn read_order(path: &Path) -> CliResult<Vec<usize>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| data_err(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "order")
        .ok_or_else(|| CliError::Data(format!("{}: no `order` column", path.display())))?;
    let mut order = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data_err(path, e))?;
        let v = record[col]
            .parse()
            .map_err(|_| CliError::Data(format!("{}: bad index {:?}", path.display(), &record[col])))?;
        order.push(v);
    }
    Ok(order)
}

pub(crate) fn data_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub(crate) fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| data_err(path, e))
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new("")).join(name)
}

fn check_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{}: no such file", path.display())))
    }
}

fn check_output(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(CliError::Data(format!(
            "{}: directory {} does not exist",
            path.display(),
            dir.display()
        )));
    }
    if path.is_dir() {
        return Err(CliError::Data(format!("{}: is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`. Nothing is left behind when `fill` fails.
pub(crate) fn write_atomic<F>(path: &Path, fill: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> latent_fps::Result<()>,
{
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(|e| data_err(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(|e| data_err(path, e))?;
        w.flush().map_err(|e| data_err(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| data_err(path, e))?;
    tmp.persist(path).map_err(|e| data_err(path, e.error))?;
    Ok(())
}
