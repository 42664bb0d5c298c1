//! Implementations behind the `lexspec` binary.
//!
//! Every command writes its report to the supplied sink, so the binary is a
//! thin wrapper and tests can drive the commands in-process. Reports start
//! with the run configuration as `# key=value` lines (text mode) or as extra
//! columns (tsv mode).

use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::constraints::{
    parse_pairs, transitive_closure, ConstraintKind, ConstraintSet, WordPair,
};
use crate::embedding::{cosine, load_embeddings, save_embeddings, VectorSpace};
use crate::error::{Error, Result};
use crate::eval::{
    eval_bibless, eval_detection, eval_directionality, eval_graded, eval_similarity,
    parse_detection, parse_directionality, parse_graded, EvalReport, SplitProtocol,
    GRADED_LE_SCALE,
};
use crate::metrics::{dcos, le_score};
use crate::objective::{asym_distance, AblationMode, DistanceVariant, Hyperparameters};
use crate::optimizer::{run_specialization, TrainingLog};

#[derive(Debug, Parser)]
#[command(
    name = "lexspec",
    version,
    about = "Specialise word vectors for lexical entailment and evaluate them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a specialised space from constraint files.
    Specialize(SpecializeArgs),
    /// Hypernym directionality accuracy (`hypo hyper` per line).
    EvalDirection(EvalArgs),
    /// Binary LE detection accuracy (`w1 w2 le|rle|other` per line).
    EvalDetect(EvalArgs),
    /// Three-way detection plus direction (`w1 w2 le|rle|other` per line).
    EvalBibless(EvalArgs),
    /// Spearman rho between graded LE strength and ratings in [0, 6].
    EvalGraded(EvalArgs),
    /// Spearman rho between cosine similarity and ratings.
    EvalSim(EvalArgs),
    /// Print the decoding components for one word pair.
    Score(ScoreArgs),
    /// Print vector norms, shortest first.
    InspectNorms(InspectArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    #[default]
    Text,
    Tsv,
}

#[derive(Debug, Args)]
pub struct SpecializeArgs {
    /// Input embeddings, one `word v1 .. vd` per line.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Where to write the specialised embeddings.
    #[arg(long)]
    pub output: PathBuf,
    /// Synonym pairs.
    #[arg(long)]
    pub attract: Option<PathBuf>,
    /// Antonym pairs.
    #[arg(long)]
    pub repel: Option<PathBuf>,
    /// Directed `hyponym hypernym` pairs.
    #[arg(long)]
    pub entail: Option<PathBuf>,
    /// Expand entailment pairs by transitivity (default).
    #[arg(long, overrides_with = "no_closure")]
    pub closure: bool,
    #[arg(long)]
    pub no_closure: bool,
    /// Unit-normalise input vectors (default).
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, default_value_t = Hyperparameters::default().variant)]
    pub variant: DistanceVariant,
    /// sym-only, asym-only or full.
    #[arg(long, default_value_t = Hyperparameters::default().mode)]
    pub mode: AblationMode,
    #[arg(long, default_value_t = Hyperparameters::default().delta_att, allow_negative_numbers = true)]
    pub delta_att: f64,
    #[arg(long, default_value_t = Hyperparameters::default().delta_rep, allow_negative_numbers = true)]
    pub delta_rep: f64,
    #[arg(long, default_value_t = Hyperparameters::default().lambda_reg)]
    pub lambda_reg: f64,
    /// Batch size shared by all three constraint streams.
    #[arg(long, default_value_t = Hyperparameters::default().k1)]
    pub batch_size: usize,
    #[arg(long, default_value_t = Hyperparameters::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = Hyperparameters::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fractional digits written per component; full precision if omitted.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Training log path; defaults to the output path with `.log` appended.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

impl SpecializeArgs {
    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            delta_att: self.delta_att,
            delta_rep: self.delta_rep,
            lambda_reg: self.lambda_reg,
            k1: self.batch_size,
            k2: self.batch_size,
            k3: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.lr,
            variant: self.variant,
            mode: self.mode,
        }
    }

    fn log_path(&self) -> PathBuf {
        self.log.clone().unwrap_or_else(|| {
            let mut p = self.output.clone().into_os_string();
            p.push(".log");
            p.into()
        })
    }
}

/// Options shared by the evaluation commands.
#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Embeddings to evaluate, usually a specialised space.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Evaluation pairs.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = DistanceVariant::D2)]
    pub variant: DistanceVariant,
    /// Random tune/test splits for threshold-based protocols.
    #[arg(long, default_value_t = SplitProtocol::default().iterations)]
    pub iterations: usize,
    /// Share of pairs used to tune the threshold in each split.
    #[arg(long, default_value_t = SplitProtocol::default().tune_fraction)]
    pub tune_fraction: f64,
    #[arg(long, default_value_t = SplitProtocol::default().seed)]
    pub seed: u64,
    /// Unit-normalise vectors on load. Off by default: it erases the norms
    /// that carry the entailment signal.
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long, default_value_t = DistanceVariant::D2)]
    pub variant: DistanceVariant,
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Candidate hyponym.
    pub left: String,
    /// Candidate hypernym.
    pub right: String,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long)]
    pub no_normalize: bool,
    /// Words to show; the whole vocabulary when none are given.
    pub words: Vec<String>,
}

/// Run a parsed command line, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Specialize(a) => cmd_specialize(a, out),
        Command::EvalDirection(a) => cmd_eval(EvalKind::Direction, a, out),
        Command::EvalDetect(a) => cmd_eval(EvalKind::Detect, a, out),
        Command::EvalBibless(a) => cmd_eval(EvalKind::Bibless, a, out),
        Command::EvalGraded(a) => cmd_eval(EvalKind::Graded, a, out),
        Command::EvalSim(a) => cmd_eval(EvalKind::Similarity, a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::InspectNorms(a) => cmd_inspect_norms(a, out),
    }
}

fn in_file<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    in_file(
        path,
        File::open(path).map(BufReader::new).map_err(Error::from),
    )
}

fn read_with<T>(path: &Path, parse: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    let reader = open(path)?;
    in_file(path, parse(reader))
}

fn load_vectors(
    path: &Path,
    normalize: bool,
) -> Result<(VectorSpace, crate::embedding::LoadStats)> {
    read_with(path, |r| load_embeddings(r, normalize))
}

type Config = Vec<(&'static str, String)>;

fn write_header(out: &mut dyn Write, config: &Config) -> Result<()> {
    for (k, v) in config {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn path_value(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map_or_else(|| "-".to_string(), |p| p.display().to_string())
}

fn read_pairs(path: &Option<PathBuf>, kind: ConstraintKind) -> Result<Vec<WordPair>> {
    match path {
        Some(p) => Ok(read_with(p, |r| parse_pairs(r, kind))?.pairs),
        None => Ok(Vec::new()),
    }
}

/// Train and write a specialised space plus its training log.
pub fn cmd_specialize(args: &SpecializeArgs, out: &mut dyn Write) -> Result<()> {
    if args.attract.is_none() && args.repel.is_none() && args.entail.is_none() {
        return Err(Error::Config(
            "give at least one of --attract, --repel, --entail".into(),
        ));
    }
    let hp = args.hyperparameters();
    hp.validate()?;
    let closure = !args.no_closure;
    let normalize = !args.no_normalize;

    let mut config: Config = vec![
        ("command", "specialize".into()),
        ("vectors", args.vectors.display().to_string()),
        ("output", args.output.display().to_string()),
        ("attract", path_value(&args.attract)),
        ("repel", path_value(&args.repel)),
        ("entail", path_value(&args.entail)),
        ("closure", closure.to_string()),
        ("normalize", normalize.to_string()),
        ("seed", args.seed.to_string()),
    ];
    config.extend(hp.describe());

    let (space, stats) = load_vectors(&args.vectors, normalize)?;
    let attract = read_pairs(&args.attract, ConstraintKind::Attract)?;
    let repel = read_pairs(&args.repel, ConstraintKind::Repel)?;
    let mut entail = read_pairs(&args.entail, ConstraintKind::Entail)?;
    let direct_entail = entail.len();
    if closure {
        entail = in_file(
            args.entail.as_deref().unwrap_or(Path::new("-")),
            transitive_closure(&entail),
        )?;
    }
    let raw = ConstraintSet {
        attract,
        repel,
        entail,
    };
    let (kept, dropped) = raw.filter_to_vocab(&space);
    let constraints = ConstraintSet::new(kept.attract, kept.repel, kept.entail)?;

    config.extend([
        ("vocabulary", space.len().to_string()),
        ("dim", space.dim().to_string()),
        ("duplicate_words", stats.duplicates.to_string()),
        ("attract_pairs", constraints.attract.len().to_string()),
        ("repel_pairs", constraints.repel.len().to_string()),
        ("entail_direct", direct_entail.to_string()),
        ("entail_pairs", constraints.entail.len().to_string()),
        (
            "oov_dropped",
            format!("{},{},{}", dropped[0], dropped[1], dropped[2]),
        ),
    ]);

    let (trained, log) = run_specialization(space, &constraints, &hp, args.seed)?;

    let output = &args.output;
    let file = in_file(output, File::create(output).map_err(Error::from))?;
    let mut sink = BufWriter::new(file);
    in_file(output, save_embeddings(&trained, &mut sink, args.precision))?;
    in_file(output, sink.flush().map_err(Error::from))?;

    let log_path = args.log_path();
    let mut log_text = Vec::new();
    write_header(&mut log_text, &config)?;
    log.write_text(&mut log_text)?;
    in_file(
        &log_path,
        std::fs::write(&log_path, &log_text).map_err(Error::from),
    )?;

    write_header(out, &config)?;
    write_epochs(out, &log)?;
    Ok(())
}

fn write_epochs(out: &mut dyn Write, log: &TrainingLog) -> Result<()> {
    for e in &log.epochs {
        let c = &e.costs;
        writeln!(
            out,
            "epoch {}: total {:.6} (attract {:.6}, repel {:.6}, le_attract {:.6}, le {:.6}) mean_norm {:.4}",
            e.epoch,
            c.total(),
            c.attract,
            c.repel,
            c.le_attract,
            c.le,
            e.mean_norm
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalKind {
    Direction,
    Detect,
    Bibless,
    Graded,
    Similarity,
}

impl EvalKind {
    fn command(self) -> &'static str {
        match self {
            EvalKind::Direction => "eval-direction",
            EvalKind::Detect => "eval-detect",
            EvalKind::Bibless => "eval-bibless",
            EvalKind::Graded => "eval-graded",
            EvalKind::Similarity => "eval-sim",
        }
    }

    fn metric(self) -> &'static str {
        match self {
            EvalKind::Direction | EvalKind::Detect | EvalKind::Bibless => "accuracy",
            EvalKind::Graded | EvalKind::Similarity => "rho",
        }
    }
}

fn dataset<R: BufRead>(
    kind: EvalKind,
    args: &EvalArgs,
    space: &VectorSpace,
    proto: &SplitProtocol,
    reader: R,
) -> Result<EvalReport> {
    match kind {
        EvalKind::Direction => eval_directionality(space, &parse_directionality(reader)?),
        EvalKind::Detect => eval_detection(space, &parse_detection(reader)?, args.variant, proto),
        EvalKind::Bibless => eval_bibless(space, &parse_detection(reader)?, args.variant, proto),
        EvalKind::Graded => eval_graded(
            space,
            &parse_graded(reader, Some(GRADED_LE_SCALE))?,
            args.variant,
        ),
        EvalKind::Similarity => eval_similarity(space, &parse_graded(reader, None)?),
    }
}

/// Run one evaluation protocol and print the metric with its configuration.
pub fn cmd_eval(kind: EvalKind, args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    if args.iterations == 0 {
        return Err(Error::Config("--iterations must be positive".into()));
    }
    if !(args.tune_fraction > 0.0 && args.tune_fraction < 1.0) {
        return Err(Error::Config(
            "--tune-fraction must lie strictly between 0 and 1".into(),
        ));
    }
    let proto = SplitProtocol {
        iterations: args.iterations,
        tune_fraction: args.tune_fraction,
        seed: args.seed,
    };
    let (space, _) = load_vectors(&args.vectors, args.normalize)?;
    let report = read_with(&args.dataset, |r| dataset(kind, args, &space, &proto, r))?;

    let mut config: Config = vec![
        ("command", kind.command().into()),
        ("vectors", args.vectors.display().to_string()),
        ("dataset", args.dataset.display().to_string()),
        ("normalize", args.normalize.to_string()),
    ];
    if matches!(
        kind,
        EvalKind::Detect | EvalKind::Bibless | EvalKind::Graded
    ) {
        config.push(("variant", args.variant.to_string()));
    }
    if matches!(kind, EvalKind::Detect | EvalKind::Bibless) {
        config.extend([
            ("iterations", args.iterations.to_string()),
            ("tune_fraction", args.tune_fraction.to_string()),
            ("seed", args.seed.to_string()),
        ]);
    }
    let results: Config = vec![
        (kind.metric(), format!("{:.6}", report.value)),
        ("evaluated", report.evaluated.to_string()),
        ("oov", report.oov.to_string()),
    ];
    write_report(out, args.report, &config, &results)
}

fn write_report(
    out: &mut dyn Write,
    format: ReportFormat,
    config: &Config,
    results: &Config,
) -> Result<()> {
    match format {
        ReportFormat::Text => {
            write_header(out, config)?;
            for (k, v) in results {
                writeln!(out, "{k}\t{v}")?;
            }
        }
        ReportFormat::Tsv => {
            let cols = config.iter().chain(results);
            let (keys, values): (Vec<&str>, Vec<&str>) =
                cols.map(|(k, v)| (*k, v.as_str())).unzip();
            writeln!(out, "{}", keys.join("\t"))?;
            writeln!(out, "{}", values.join("\t"))?;
        }
    }
    Ok(())
}

fn full(x: impl Display) -> String {
    x.to_string()
}

/// Print cosine, cosine distance, the asymmetric distance, the combined
/// decoding score and both norms for `left` as a hyponym of `right`.
pub fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let (space, _) = load_vectors(&args.vectors, args.normalize)?;
    let x = space.vector(&args.left)?;
    let y = space.vector(&args.right)?;
    let config: Config = vec![
        ("command", "score".into()),
        ("vectors", args.vectors.display().to_string()),
        ("normalize", args.normalize.to_string()),
        ("variant", args.variant.to_string()),
        ("left", args.left.clone()),
        ("right", args.right.clone()),
    ];
    let results: Config = vec![
        ("cosine", full(cosine(x, y)?)),
        ("dcos", full(dcos(x, y)?)),
        ("distance", full(asym_distance(args.variant, x, y)?)),
        (
            "i_le",
            full(le_score(&space, &args.left, &args.right, args.variant)?),
        ),
        ("norm_left", full(space.norm(&args.left)?)),
        ("norm_right", full(space.norm(&args.right)?)),
    ];
    write_report(out, args.report, &config, &results)
}

/// Print `word<TAB>norm` sorted by norm; unknown words are listed after the
/// table as comments.
pub fn cmd_inspect_norms(args: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let (space, _) = load_vectors(&args.vectors, args.normalize)?;
    let requested: Vec<&str> = if args.words.is_empty() {
        space.words().iter().map(String::as_str).collect()
    } else {
        args.words.iter().map(String::as_str).collect()
    };
    let (known, unknown): (Vec<&str>, Vec<&str>) =
        requested.into_iter().partition(|w| space.contains(w));
    let mut rows: Vec<(&str, f64)> = known
        .into_iter()
        .map(|w| (w, space.norm(w).unwrap()))
        .collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));

    write_header(
        out,
        &vec![
            ("command", "inspect-norms".into()),
            ("vectors", args.vectors.display().to_string()),
            ("normalize", args.normalize.to_string()),
        ],
    )?;
    writeln!(out, "word\tnorm")?;
    for (w, n) in rows {
        writeln!(out, "{w}\t{n:.6}")?;
    }
    for w in unknown {
        writeln!(out, "# unknown\t{w}")?;
    }
    Ok(())
}
