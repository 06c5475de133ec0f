//! `coda-aug`: augmentation, contrastive pretraining and benchmarking from the
//! command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 checkpoint format error. Machine-readable results go to standard output,
//! diagnostics to standard error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coda_augment::contrastive::InputEncoding;
use coda_augment::{Error, Strategy};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_CHECKPOINT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "coda-aug", version, about = "Data augmentation for compositional data")]
pub struct Cli {
    /// Seed for every random stream of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Append weighted synthetic rows to a table.
    Augment(AugmentArgs),
    /// Contrastive pretraining of an encoder; writes a checkpoint.
    Pretrain(PretrainArgs),
    /// Linear head on a frozen encoder; prints `auc=<value>`.
    LinearEval(EvalArgs),
    /// Joint training of encoder and linear head; prints `auc=<value>`.
    Finetune(FinetuneArgs),
    /// Synthetic augmentation benchmark; writes a tab-separated report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Mixup,
    Subcomposition,
    Cutmix,
    Multinomial,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Mixup => Strategy::AitchisonMixup,
            StrategyArg::Subcomposition => Strategy::RandomSubcompositions,
            StrategyArg::Cutmix => Strategy::CompositionalCutMix,
            StrategyArg::Multinomial => Strategy::MultinomialResampling,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EncodingArg {
    Clr,
    Raw,
}

impl From<EncodingArg> for InputEncoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Clr => InputEncoding::Clr,
            EncodingArg::Raw => InputEncoding::Raw,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    /// Name of the label column.
    #[arg(long = "label-col", default_value = "label")]
    pub label_col: String,
    /// Column to ignore as a sample identifier.
    #[arg(long = "id-col")]
    pub id_col: Option<String>,
    /// Read-depth for rows whose entries are not integer counts.
    #[arg(long = "library-size", default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub library_size: u64,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Synthetic rows per original row.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub factor: u64,
    /// Weight of each synthetic row [default: 1 / factor].
    #[arg(long)]
    pub weight: Option<f64>,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long = "learning-rate", default_value_t = 1e-3)]
    pub learning_rate: f64,
}

#[derive(Args, Debug)]
pub struct PretrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub temperature: f64,
    /// How positive pairs are generated.
    #[arg(long, value_enum, default_value = "subcomposition")]
    pub views: StrategyArg,
    #[arg(long, value_enum, default_value = "clr")]
    pub encoding: EncodingArg,
    /// Encoder widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 128, 64])]
    pub encoder: Vec<usize>,
    /// Projection head widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 16])]
    pub head: Vec<usize>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Args, Debug)]
pub struct FinetuneArgs {
    /// Pretrained encoder; without it a freshly initialised encoder is used.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Where to write the finetuned encoder.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Input encoding of a fresh encoder.
    #[arg(long, value_enum, default_value = "clr")]
    pub encoding: EncodingArg,
    /// Encoder widths of a fresh encoder.
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 128, 64])]
    pub encoder: Vec<usize>,
    /// Projection head widths of a fresh encoder.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 16])]
    pub head: Vec<usize>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON benchmark configuration; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Checkpoint { .. } => EXIT_CHECKPOINT,
        Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let threads = cli.threads.map_or(0, usize::from);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error[{}]: {err}", err.name());
            ExitCode::from(exit_code(&err))
        }
    }
}
