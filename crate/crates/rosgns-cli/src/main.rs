//! Command-line surface for the embedding toolkit: build co-occurrence
//! statistics, train any of the three methods, evaluate on similarity
//! datasets, and inspect nearest neighbors.
//!
//! Exit codes are a stable contract: 0 success, 1 usage error, 2 data or
//! contract error, 3 numerical abort.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use rosgns::baselines::{sgd_sgns_train, svd_sppmi_factors};
use rosgns::corpus::{load_stats, save_stats, tokenize_file, tokenize_reader, CooccurrenceStats, Vocabulary};
use rosgns::embedding::{extract_embeddings, EmbeddingSet, SigmaScaling};
use rosgns::eval::{evaluate, SimilarityDataset};
use rosgns::manifold::{train, LowRankFactors, TrainResult};
use rosgns::sgns::{InitMode, SgnsConfig};

const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;
const EXIT_NUMERIC: i32 = 3;

#[derive(Parser)]
#[command(name = "rosgns", version, about = "Low-rank SGNS word embeddings: Riemannian optimizer, SVD-SPPMI and SGD baselines")]
struct Cli {
    /// Worker threads for the dense kernels (results do not depend on the
    /// thread count; --threads 1 pins the bitwise-determinism contract).
    #[arg(long, global = true, env = "ROSGNS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Riemannian optimization of the SGNS objective (projector-splitting).
    RoSgns,
    /// Truncated SVD of the shifted positive PMI matrix.
    SvdSppmi,
    /// Stochastic gradient descent over streamed word-context pairs.
    SgdSgns,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::RoSgns => "ro-sgns",
            Method::SvdSppmi => "svd-sppmi",
            Method::SgdSgns => "sgd-sgns",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build vocabulary and co-occurrence statistics from a text corpus.
    BuildCooc {
        /// Corpus file, or `-` for standard input.
        corpus: PathBuf,
        /// Context window size L (words on each side).
        #[arg(long, default_value_t = 5, env = "ROSGNS_WINDOW")]
        window: u32,
        /// Keep words occurring strictly more than this many times.
        #[arg(long, default_value_t = 200, env = "ROSGNS_MIN_COUNT")]
        min_count: u64,
        /// Output statistics file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train embeddings from a statistics file.
    Train {
        /// Statistics file produced by build-cooc.
        stats: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::RoSgns)]
        method: Method,
        /// Embedding dimension d (defaults to 100, or to the checkpoint's
        /// rank when --init is a factors file).
        #[arg(long, env = "ROSGNS_DIM")]
        dim: Option<usize>,
        /// Negative samples k per positive pair.
        #[arg(long, default_value_t = 5, env = "ROSGNS_NEG")]
        neg: u32,
        /// Step size (ro-sgns) or learning rate (sgd-sgns). Defaults per
        /// method and dimension.
        #[arg(long, env = "ROSGNS_STEP")]
        step: Option<f64>,
        /// Iterations (ro-sgns) or epochs (sgd-sgns). Defaults per method
        /// and dimension.
        #[arg(long, env = "ROSGNS_ITERS")]
        iters: Option<usize>,
        /// Optimizer initialization: `svd-sppmi`, `random`, or the path of
        /// a factors checkpoint.
        #[arg(long, default_value = "svd-sppmi")]
        init: String,
        /// Seed for random initialization and negative sampling.
        #[arg(long, default_value_t = 42, env = "ROSGNS_SEED")]
        seed: u64,
        /// Output embeddings file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-iteration objective trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// How singular values scale the word side: sqrt, full or none.
        #[arg(long, default_value = "sqrt", env = "ROSGNS_SCALING")]
        scaling: String,
        /// Corpus file (required by sgd-sgns, which streams pairs).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Also save the final factors checkpoint.
        #[arg(long)]
        save_factors: Option<PathBuf>,
    },
    /// Score an embeddings file on word-similarity datasets.
    Evaluate {
        /// Embeddings file in the text format.
        embeddings: PathBuf,
        /// One or more dataset files (`word1 word2 score` lines).
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the nearest neighbors of a word by cosine similarity.
    Neighbors {
        /// Embeddings file in the text format.
        embeddings: PathBuf,
        /// Query word.
        query: String,
        /// Number of neighbors to print.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Ranks to skip before printing (10 shows ranks 11 and up).
        #[arg(long, default_value_t = 0)]
        offset: usize,
    },
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<rosgns::Error> for CliError {
    fn from(err: rosgns::Error) -> Self {
        let code = match err {
            rosgns::Error::InvalidParameter(_) => EXIT_USAGE,
            rosgns::Error::NumericalAbort { .. } => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        Self { code, message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self { code: EXIT_DATA, message: err.to_string() }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            std::process::exit(EXIT_DATA);
        }
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}

/// Wall-clock bookkeeping per phase, echoed to stdout and recorded in the
/// run manifest.
struct Phases {
    started: Instant,
    entries: Vec<(String, f64)>,
}

impl Phases {
    fn new() -> Self {
        Self { started: Instant::now(), entries: Vec::new() }
    }

    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        println!("phase {name}: {secs:.3}s");
        self.entries.push((name.to_string(), secs));
        out
    }

    fn total(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

fn sha256_hex(path: &Path) -> Option<String> {
    let bytes = std::fs::read(path).ok()?;
    let digest = Sha256::digest(&bytes);
    Some(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(serde::Serialize)]
struct FileRecord {
    path: String,
    sha256: Option<String>,
}

impl FileRecord {
    fn new(path: &Path) -> Self {
        Self { path: path.display().to_string(), sha256: sha256_hex(path) }
    }
}

/// Everything needed to re-run a training command and reproduce its
/// outputs bit for bit: resolved configuration, input digests, output
/// digests, and timing.
#[derive(serde::Serialize)]
struct RunManifest {
    tool: String,
    method: String,
    config: BTreeMap<String, serde_json::Value>,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    phase_seconds: Vec<(String, f64)>,
    total_seconds: f64,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::BuildCooc { corpus, window, min_count, out } => {
            cmd_build_cooc(&corpus, window, min_count, &out)
        }
        Command::Train {
            stats,
            method,
            dim,
            neg,
            step,
            iters,
            init,
            seed,
            out,
            trace,
            scaling,
            corpus,
            save_factors,
        } => cmd_train(TrainArgs {
            stats,
            method,
            dim,
            neg,
            step,
            iters,
            init,
            seed,
            out,
            trace,
            scaling,
            corpus,
            save_factors,
        }),
        Command::Evaluate { embeddings, datasets, csv } => cmd_evaluate(&embeddings, &datasets, csv.as_deref()),
        Command::Neighbors { embeddings, query, count, offset } => {
            cmd_neighbors(&embeddings, &query, count, offset)
        }
    }
}

fn read_corpus(path: &Path) -> Result<Vec<String>, CliError> {
    if path.as_os_str() == "-" {
        Ok(tokenize_reader(std::io::stdin().lock())?)
    } else {
        Ok(tokenize_file(path)?)
    }
}

fn cmd_build_cooc(corpus: &Path, window: u32, min_count: u64, out: &Path) -> Result<(), CliError> {
    if window == 0 {
        return Err(CliError::usage("--window must be at least 1"));
    }
    if min_count == 0 {
        return Err(CliError::usage("--min-count must be at least 1"));
    }
    let mut phases = Phases::new();
    let tokens = phases.run("tokenize", || read_corpus(corpus))?;
    let vocab = phases.run("vocabulary", || Vocabulary::build(&tokens, min_count));
    if vocab.is_empty() {
        log::warn!("no token occurs more than {min_count} times; the statistics will be empty");
    }
    let stats = phases.run("count", || CooccurrenceStats::count(&tokens, &vocab, window));
    phases.run("write", || save_stats(out, &vocab, &stats))?;
    println!(
        "n={} m={} |D|={} nnz={} window={} min-count={} -> {}",
        stats.n(),
        stats.m(),
        stats.total_pairs(),
        stats.nnz(),
        window,
        min_count,
        out.display()
    );
    println!("total: {:.3}s", phases.total());
    Ok(())
}

struct TrainArgs {
    stats: PathBuf,
    method: Method,
    dim: Option<usize>,
    neg: u32,
    step: Option<f64>,
    iters: Option<usize>,
    init: String,
    seed: u64,
    out: PathBuf,
    trace: Option<PathBuf>,
    scaling: String,
    corpus: Option<PathBuf>,
    save_factors: Option<PathBuf>,
}

enum ResolvedInit {
    SvdSppmi,
    Random,
    Checkpoint(PathBuf, LowRankFactors),
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let scaling: SigmaScaling = args.scaling.parse()?;
    let mut phases = Phases::new();
    let (vocab, stats) = phases.run("load-stats", || load_stats(&args.stats))?;

    // Resolve the initialization first: a checkpoint fixes the dimension.
    let init = match args.init.as_str() {
        "svd-sppmi" => ResolvedInit::SvdSppmi,
        "random" => ResolvedInit::Random,
        path => {
            let (factors, _) = LowRankFactors::load(Path::new(path))?;
            ResolvedInit::Checkpoint(PathBuf::from(path), factors)
        }
    };
    let dim = match (&init, args.dim) {
        (ResolvedInit::Checkpoint(path, factors), requested) => {
            let d = factors.dims().2;
            if requested.is_some_and(|r| r != d) {
                return Err(CliError::usage(format!(
                    "--dim {} conflicts with checkpoint {} of rank {d}",
                    requested.unwrap(),
                    path.display()
                )));
            }
            d
        }
        (_, requested) => requested.unwrap_or(100),
    };
    if dim == 0 || dim > stats.n().min(stats.m()) {
        return Err(CliError::usage(format!(
            "--dim {dim} must satisfy 1 <= dim <= min(n, m) = {}",
            stats.n().min(stats.m())
        )));
    }

    // Per-method defaults for step size and iteration count.
    let (default_step, default_iters) = match args.method {
        Method::RoSgns => SgnsConfig::defaults_for_dimension(dim),
        Method::SgdSgns => (0.025, 5),
        Method::SvdSppmi => (0.0, 0),
    };
    if args.method == Method::SvdSppmi {
        if args.step.is_some() || args.iters.is_some() {
            log::warn!("--step/--iters are ignored by svd-sppmi");
        }
        if args.init != "svd-sppmi" {
            log::warn!("--init is ignored by svd-sppmi");
        }
    }
    if args.method != Method::SgdSgns && args.corpus.is_some() {
        log::warn!("--corpus is only used by sgd-sgns");
    }
    let step = args.step.unwrap_or(default_step);
    let iters = args.iters.unwrap_or(default_iters);
    let config = SgnsConfig {
        dimension: dim,
        negative_samples: args.neg,
        step_size: if args.method == Method::SvdSppmi { 1.0 } else { step },
        iterations: iters,
        init_mode: match init {
            ResolvedInit::SvdSppmi => InitMode::SvdSppmi,
            ResolvedInit::Random => InitMode::RandomFactors,
            ResolvedInit::Checkpoint(..) => InitMode::ProvidedFactors,
        },
    };
    config.validate()?;

    let provenance = format!(
        "method={} dim={dim} neg={} step={step} iters={iters} init={} seed={} scaling={} window={}",
        args.method.as_str(),
        args.neg,
        args.init,
        args.seed,
        scaling.as_str(),
        stats.window(),
    );

    let mut inputs = vec![FileRecord::new(&args.stats)];
    let mut train_result: Option<TrainResult> = None;
    let set = match args.method {
        Method::RoSgns | Method::SvdSppmi => {
            let start = match &init {
                ResolvedInit::SvdSppmi => {
                    phases.run("init-svd-sppmi", || svd_sppmi_factors(&stats, dim, args.neg))?
                }
                ResolvedInit::Random => {
                    phases.run("init-random", || LowRankFactors::random(stats.n(), stats.m(), dim, args.seed))?
                }
                ResolvedInit::Checkpoint(path, factors) => {
                    inputs.push(FileRecord::new(path));
                    factors.clone()
                }
            };
            let factors = if args.method == Method::RoSgns {
                let result = phases.run("train", || train(&stats, &config, start))?;
                println!(
                    "objective: initial {:.6e}, final {:.6e} after {} iterations",
                    result.trace.first().unwrap(),
                    result.trace.last().unwrap(),
                    result.trace.len() - 1
                );
                train_result = Some(result);
                train_result.as_ref().unwrap().factors.clone()
            } else {
                start
            };
            if let Some(path) = &args.save_factors {
                factors.save(path, iters as u64)?;
            }
            let (set, _context) = phases.run("extract", || {
                extract_embeddings(&factors, &vocab, scaling, provenance.clone())
            })?;
            set
        }
        Method::SgdSgns => {
            let corpus = args.corpus.as_deref().ok_or_else(|| {
                CliError::usage("--method sgd-sgns needs --corpus to stream word-context pairs")
            })?;
            inputs.push(FileRecord::new(corpus));
            let tokens = phases.run("tokenize", || read_corpus(corpus))?;
            let pair = phases.run("train", || {
                sgd_sgns_train(&tokens, &vocab, stats.window(), &config, iters as u32, args.seed)
            })?;
            if args.save_factors.is_some() {
                log::warn!("--save-factors is ignored by sgd-sgns (no factored state)");
            }
            EmbeddingSet::from_vocabulary(&vocab, pair.word, provenance.clone())?
        }
    };

    phases.run("write", || set.save(&args.out))?;
    let mut outputs = vec![FileRecord::new(&args.out)];
    match (&args.trace, &train_result) {
        (Some(path), Some(result)) => {
            let file = File::create(path).map_err(|e| rosgns::Error::Io { path: path.clone(), source: e })?;
            result
                .write_trace_csv(BufWriter::new(file))
                .map_err(|e| CliError::data(format!("writing {}: {e}", path.display())))?;
            outputs.push(FileRecord::new(path));
        }
        (Some(_), None) => log::warn!("--trace is only produced by ro-sgns"),
        _ => {}
    }
    if let Some(path) = &args.save_factors {
        if args.method != Method::SgdSgns {
            outputs.push(FileRecord::new(path));
        }
    }

    let mut config_map = BTreeMap::new();
    for (key, value) in [
        ("method", serde_json::json!(args.method.as_str())),
        ("dim", serde_json::json!(dim)),
        ("neg", serde_json::json!(args.neg)),
        ("step", serde_json::json!(step)),
        ("iters", serde_json::json!(iters)),
        ("init", serde_json::json!(args.init)),
        ("seed", serde_json::json!(args.seed)),
        ("scaling", serde_json::json!(scaling.as_str())),
        ("window", serde_json::json!(stats.window())),
        ("min_count", serde_json::json!(vocab.min_count())),
    ] {
        config_map.insert(key.to_string(), value);
    }
    let manifest = RunManifest {
        tool: format!("rosgns {}", env!("CARGO_PKG_VERSION")),
        method: args.method.as_str().to_string(),
        config: config_map,
        inputs,
        outputs,
        phase_seconds: phases.entries.clone(),
        total_seconds: phases.total(),
    };
    let manifest_path = PathBuf::from(format!("{}.manifest.json", args.out.display()));
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::data(format!("serializing manifest: {e}")))?;
    std::fs::write(&manifest_path, json + "\n")
        .map_err(|e| CliError::data(format!("writing {}: {e}", manifest_path.display())))?;

    println!(
        "wrote {} ({} words, d={dim}) and {}",
        args.out.display(),
        set.len(),
        manifest_path.display()
    );
    println!("total: {:.3}s", phases.total());
    Ok(())
}

fn cmd_evaluate(embeddings: &Path, datasets: &[PathBuf], csv: Option<&Path>) -> Result<(), CliError> {
    let set = EmbeddingSet::load(embeddings)?;
    let method = set
        .provenance()
        .split_whitespace()
        .find_map(|field| field.strip_prefix("method="))
        .unwrap_or("embeddings")
        .to_string();

    struct Row {
        name: String,
        result: Result<rosgns::eval::EvalReport, rosgns::Error>,
    }
    let mut rows = Vec::new();
    for path in datasets {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let dataset = SimilarityDataset::load(path, name.clone())?;
        rows.push(Row { name, result: evaluate(&set, &dataset) });
    }

    // Aligned table: one row for the method, one column per dataset.
    let cell = |row: &Row| -> String {
        match &row.result {
            Ok(report) => format!("{:.3}", report.spearman),
            Err(rosgns::Error::UndefinedCorrelation { pairs_used, pairs_total, .. }) => {
                format!("n/a ({pairs_used}/{pairs_total} pairs)")
            }
            Err(e) => format!("error: {e}"),
        }
    };
    let headers: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    let cells: Vec<String> = rows.iter().map(cell).collect();
    let widths: Vec<usize> = headers
        .iter()
        .zip(&cells)
        .map(|(h, c)| h.len().max(c.len()))
        .collect();
    let label_width = method.len().max("method".len());
    print!("{:label_width$}", "method");
    for (h, w) in headers.iter().zip(&widths) {
        print!("  {h:>w$}");
    }
    println!();
    print!("{method:label_width$}");
    for (c, w) in cells.iter().zip(&widths) {
        print!("  {c:>w$}");
    }
    println!();
    for row in &rows {
        match &row.result {
            Ok(report) => println!(
                "{}: {}/{} pairs used",
                row.name, report.pairs_used, report.pairs_total
            ),
            Err(rosgns::Error::UndefinedCorrelation { reason, pairs_used, pairs_total }) => println!(
                "{}: {}/{} pairs used ({reason})",
                row.name, pairs_used, pairs_total
            ),
            Err(_) => {}
        }
    }

    if let Some(path) = csv {
        let mut out = BufWriter::new(
            File::create(path).map_err(|e| CliError::data(format!("creating {}: {e}", path.display())))?,
        );
        writeln!(out, "method,dataset,spearman,pairs_used,pairs_total")?;
        for row in &rows {
            match &row.result {
                Ok(report) => writeln!(
                    out,
                    "{method},{},{},{},{}",
                    row.name, report.spearman, report.pairs_used, report.pairs_total
                )?,
                Err(rosgns::Error::UndefinedCorrelation { pairs_used, pairs_total, .. }) => {
                    writeln!(out, "{method},{},n/a,{},{}", row.name, pairs_used, pairs_total)?
                }
                Err(e) => return Err(CliError::data(e.to_string())),
            }
        }
        out.flush()?;
    }
    Ok(())
}

fn cmd_neighbors(embeddings: &Path, query: &str, count: usize, offset: usize) -> Result<(), CliError> {
    let set = EmbeddingSet::load(embeddings)?;
    let neighbors = set.nearest_neighbors(query, count, offset)?;
    for (rank, (token, cosine)) in neighbors.iter().enumerate() {
        println!("{:>4}  {token}  {cosine:.3}", offset + rank + 1);
    }
    Ok(())
}
