use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use whitehead_pr::classifiers::QuantizerKind;
use whitehead_pr::features::{builtin_map, pattern_pool};
use whitehead_pr::freegroup::{infer_rank, minimize, CyclicWord, Word};
use whitehead_pr::harness::{
    clustering_experiment, evaluate, generate_dataset, greedy_feature_selection, predict_reducer,
    train_pipeline, ClusterConfig, ClusterInit, DatasetKind, DatasetSpec, LabeledWordSet, Method,
    PipelineConfig, ReducerCenters, TrainedPipeline,
};

#[derive(Parser)]
#[command(name = "whitehead-pr", version, about = "Recognize Whitehead-minimal words with pattern recognition")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantizerArg {
    Equal,
    Prob,
    Minerr,
}

impl From<QuantizerArg> for QuantizerKind {
    fn from(q: QuantizerArg) -> Self {
        match q {
            QuantizerArg::Equal => QuantizerKind::EqualInterval,
            QuantizerArg::Prob => QuantizerKind::EqualProbability,
            QuantizerArg::Minerr => QuantizerKind::MinError,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset as TSV.
    Generate {
        #[arg(long, value_parser = parse_from_str::<DatasetKind>)]
        kind: DatasetKind,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long = "max-len", default_value_t = 1000)]
        max_len: usize,
        /// Words per length for D, Se and S10.
        #[arg(long = "per-len", default_value_t = 10)]
        per_len: usize,
        /// Number of words for SR and SP.
        #[arg(long, default_value_t = 5000)]
        size: usize,
        /// Shrinks the maximum length by this factor, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train a classifier and write it as JSON.
    Train {
        #[arg(long, default_value = "f6")]
        features: String,
        #[arg(long, default_value = "regression", value_parser = parse_from_str::<Method>)]
        model: Method,
        #[arg(long, value_enum, default_value = "equal")]
        quantizer: QuantizerArg,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Fixed threshold instead of a quantizer: scores at or below it are minimal.
        #[arg(long)]
        threshold: Option<f64>,
        /// Tree depth limit (default: log2 N - 1).
        #[arg(long = "max-depth")]
        max_depth: Option<usize>,
        /// Smallest tree node that may be split.
        #[arg(long = "min-node", default_value_t = 10)]
        min_node: usize,
        #[arg(long)]
        train: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate a trained model on a labeled dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value = "0,4,100", value_delimiter = ',')]
        strata: Vec<usize>,
        #[arg(long = "hist-bins", default_value_t = 50)]
        hist_bins: usize,
        /// Writes the score histogram CSV here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Greedy forward selection of pattern features.
    SelectFeatures {
        /// Middle-length range of the pattern pool, e.g. 1-3.
        #[arg(long, default_value = "1-3")]
        pool: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long, default_value = "regression", value_parser = parse_from_str::<Method>)]
        model: Method,
        #[arg(long = "max-features")]
        max_features: Option<usize>,
    },
    /// Cluster nonminimal words and score how well clusters share a reducing move.
    Cluster {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value = "f2")]
        features: String,
        #[arg(long, default_value = "estimated", value_parser = parse_from_str::<ClusterInit>)]
        init: ClusterInit,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        data: PathBuf,
        /// Writes the cluster centers as JSON here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Minimize a word and print the reducing chain.
    Minimize {
        #[arg(long)]
        word: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Predict a length-reducing Nielsen move from cluster centers.
    PredictReducer {
        #[arg(long)]
        word: String,
        #[arg(long)]
        centers: PathBuf,
    },
    /// Export the feature matrix of a dataset as CSV.
    Features {
        #[arg(long, default_value = "f6")]
        features: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_from_str<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Context<T> {
    fn data(self) -> Result<T, Failure>;
    fn model(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, err: e.into() })
    }
    fn model(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 3, err: e.into() })
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        err: anyhow::anyhow!(msg.into()),
    }
}

fn read_set(path: &Path) -> Result<LabeledWordSet, Failure> {
    let file = File::open(path)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        .data()?;
    LabeledWordSet::read_tsv(BufReader::new(file))
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        .data()
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
        .data()
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).data()?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_word(s: &str, rank: Option<usize>) -> Result<CyclicWord, Failure> {
    let rank = match rank {
        Some(r) => r,
        None => infer_rank(s).data()?.max(2),
    };
    let (cyclic, _) = Word::parse(s, rank).data()?.cyclic_reduce();
    if cyclic.is_empty() {
        return Err(usage(format!("{s:?} reduces to the empty word")));
    }
    Ok(cyclic)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            kind,
            rank,
            max_len,
            per_len,
            size,
            scale,
            seed,
            output,
        } => {
            if !(scale > 0.0 && scale <= 1.0) {
                return Err(usage(format!("--scale must lie in (0, 1], got {scale}")));
            }
            let max_length = ((max_len as f64 * scale).round() as usize).max(1);
            let spec = DatasetSpec {
                per_length: per_len,
                size,
                ..DatasetSpec::new(kind, rank, max_length, seed)
            };
            let set = generate_dataset(&spec).data()?;
            let mut out = sink(output.as_deref())?;
            set.write_tsv(&mut out).data()?;
            out.flush().data()?;
            log::info!("wrote {} words", set.len());
        }
        Command::Train {
            features,
            model,
            quantizer,
            bins,
            threshold,
            max_depth,
            min_node,
            train,
            output,
        } => {
            let set = read_set(&train)?;
            let mut cfg = PipelineConfig {
                features,
                method: model,
                quantizer: Some((quantizer.into(), bins)),
                threshold,
                ..PipelineConfig::default()
            };
            cfg.tree.max_depth = max_depth;
            cfg.tree.min_node = min_node;
            builtin_map(&cfg.features, set.rank).map_err(|e| usage(e.to_string()))?;
            let pipeline = train_pipeline(&set, &cfg).model()?;
            std::fs::write(&output, pipeline.to_json().model()? + "\n").data()?;
        }
        Command::Evaluate {
            model,
            test,
            strata,
            hist_bins,
            histogram,
        } => {
            let pipeline = TrainedPipeline::from_json(&read_text(&model)?).model()?;
            let set = read_set(&test)?;
            if set.rank != pipeline.rank {
                return Err(usage(format!(
                    "test data has rank {} but the model expects rank {}",
                    set.rank, pipeline.rank
                )));
            }
            let report = evaluate(&pipeline, &set, &strata, hist_bins).map_err(|e| usage(e.to_string()))?;
            let mut out = sink(None)?;
            report.write_accuracy_csv(&mut out).data()?;
            out.flush().data()?;
            if let Some(path) = histogram {
                let mut h = sink(Some(&path))?;
                report.histogram.write_csv(&mut h).data()?;
                h.flush().data()?;
            }
        }
        Command::SelectFeatures {
            pool,
            train,
            val,
            model,
            max_features,
        } => {
            let (lo, hi) = pool
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| usage(format!("--pool expects <min>-<max>, got {pool:?}")))?;
            let train = read_set(&train)?;
            let val = read_set(&val)?;
            let patterns = pattern_pool(train.rank, lo, hi).map_err(|e| usage(e.to_string()))?;
            let cfg = PipelineConfig {
                method: model,
                ..PipelineConfig::default()
            };
            let sel = greedy_feature_selection(&patterns, &train, &val, &cfg, max_features).model()?;
            let mut out = sink(None)?;
            writeln!(out, "step,pattern,accuracy").data()?;
            for (i, (p, a)) in sel.patterns.iter().zip(&sel.accuracies).enumerate() {
                writeln!(out, "{},{p},{a}", i + 1).data()?;
            }
            writeln!(out, "# {}", sel.map_name()).data()?;
            out.flush().data()?;
        }
        Command::Cluster {
            k,
            features,
            init,
            seed,
            data,
            output,
        } => {
            let set = read_set(&data)?;
            let map = builtin_map(&features, set.rank).map_err(|e| usage(e.to_string()))?;
            let cfg = ClusterConfig {
                k,
                ..ClusterConfig::new(init, seed)
            };
            let outcome = clustering_experiment(&set, &map, &cfg).model()?;
            let mut out = sink(None)?;
            outcome.report.write_csv(&mut out).data()?;
            out.flush().data()?;
            if let Some(path) = output {
                std::fs::write(&path, outcome.centers.to_json().model()? + "\n").data()?;
            }
        }
        Command::Minimize { word, rank } => {
            let w = parse_word(&word, rank)?;
            let (m, chain) = minimize(&w);
            let mut out = sink(None)?;
            writeln!(out, "input\t{w}\t{}", w.len()).data()?;
            for step in chain.steps() {
                writeln!(out, "step\t{step}").data()?;
            }
            writeln!(out, "minimal\t{m}\t{}", m.len()).data()?;
            out.flush().data()?;
        }
        Command::PredictReducer { word, centers } => {
            let centers = ReducerCenters::from_json(&read_text(&centers)?).model()?;
            let w = parse_word(&word, Some(2))?;
            let mv = predict_reducer(&w, &centers).model()?;
            println!("{}", mv.name());
        }
        Command::Features { features, data, output } => {
            let set = read_set(&data)?;
            let map = builtin_map(&features, set.rank).map_err(|e| usage(e.to_string()))?;
            let mut out = sink(output.as_deref())?;
            map.write_csv(&mut out, &set.words()).data()?;
            out.flush().data()?;
        }
    }
    Ok(())
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<io::Error>().or(match c.downcast_ref::<whitehead_pr::Error>() {
            Some(whitehead_pr::Error::Io(io)) => Some(io),
            _ => None,
        });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if is_broken_pipe(&f.err) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
