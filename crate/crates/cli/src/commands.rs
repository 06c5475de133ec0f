use std::fmt::Write as _;
use std::path::Path;

use coda_augment::contrastive::{
    finetune, linear_eval, load_checkpoint, pretrain, save_checkpoint, AdamConfig, ContrastiveConfig, HeadConfig,
};
use coda_augment::eval::bench::{synth_benchmark, BenchConfig};
use coda_augment::fsutil::write_atomic;
use coda_augment::{
    augment_table, load_csv, write_csv, AugmentRequest, AugmentSummary, CsvOptions, Dataset, Error, LibrarySize,
    Result,
};

use crate::{AugmentArgs, BenchArgs, Cli, Command, EvalArgs, FinetuneArgs, PretrainArgs, TableArgs, TrainingArgs};

/// Runs the parsed command and returns what it prints on standard output.
pub fn run(cli: &Cli) -> Result<String> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Augment(args) => augment(args, seed),
        Command::Pretrain(args) => pretrain_cmd(args, seed),
        Command::LinearEval(args) => linear_eval_cmd(args, seed),
        Command::Finetune(args) => finetune_cmd(args, seed),
        Command::Bench(args) => bench(args, cli.seed),
    }
}

fn library_size(table: &TableArgs) -> Result<LibrarySize> {
    LibrarySize::new(table.library_size)
}

fn load(path: &Path, table: &TableArgs) -> Result<Dataset<f64>> {
    let opts = CsvOptions {
        label_column: table.label_col.clone(),
        id_column: table.id_col.clone(),
        default_library_size: library_size(table)?,
        ..CsvOptions::default()
    };
    load_csv(path, &opts)
}

fn head_config(training: &TrainingArgs, seed: u64) -> HeadConfig {
    HeadConfig {
        epochs: training.epochs,
        adam: AdamConfig { learning_rate: training.learning_rate, ..AdamConfig::default() },
        seed,
    }
}

fn augment(args: &AugmentArgs, seed: u64) -> Result<String> {
    let request = AugmentRequest {
        strategy: args.strategy.into(),
        factor: usize::try_from(args.factor).map_err(|_| Error::InvalidConfig("factor is too large".into()))?,
        synthetic_weight: args.weight,
        seed,
        default_library_size: library_size(&args.table)?,
    };
    request.config()?;
    let ds = load(&args.input, &args.table)?;
    let out = augment_table(&ds, &request)?;
    write_csv(&out, &args.output)?;
    Ok(format!("{}\n", AugmentSummary::of(&out)))
}

fn pretrain_cmd(args: &PretrainArgs, seed: u64) -> Result<String> {
    let cfg = ContrastiveConfig {
        temperature: args.temperature,
        epochs: args.training.epochs,
        adam: AdamConfig { learning_rate: args.training.learning_rate, ..AdamConfig::default() },
        seed,
        view_strategy: args.views.into(),
        encoding: args.encoding.into(),
        library_size: library_size(&args.table)?,
        encoder_widths: args.encoder.clone(),
        head_widths: args.head.clone(),
    };
    cfg.validate()?;
    cfg.architecture(2).validate()?;
    let train = load(&args.input, &args.table)?;
    let out = pretrain(&train, &cfg)?;
    save_checkpoint(&args.output, &out.state, Some(&cfg))?;
    let mut text = format!("epochs={}\n", cfg.epochs);
    if let (Some(first), Some(last)) = (out.loss_trace.first(), out.loss_trace.last()) {
        let _ = writeln!(text, "loss_first={first}\nloss_final={last}");
    }
    let _ = writeln!(text, "fingerprint={}", out.state.fingerprint());
    Ok(text)
}

fn linear_eval_cmd(args: &EvalArgs, seed: u64) -> Result<String> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let train = load(&args.train, &args.table)?;
    let test = load(&args.test, &args.table)?;
    check_dim(checkpoint.state.architecture.input_dim, &train, &test)?;
    let auc = linear_eval(&checkpoint.state, &train, &test, &head_config(&args.training, seed))?;
    Ok(format!("auc={auc}\n"))
}

fn finetune_cmd(args: &FinetuneArgs, seed: u64) -> Result<String> {
    let train = load(&args.train, &args.table)?;
    let test = load(&args.test, &args.table)?;
    let (state, config) = match &args.checkpoint {
        Some(path) => {
            let c = load_checkpoint(path)?;
            (c.state, c.config)
        }
        None => {
            let cfg = ContrastiveConfig {
                seed,
                encoding: args.encoding.into(),
                library_size: library_size(&args.table)?,
                encoder_widths: args.encoder.clone(),
                head_widths: args.head.clone(),
                ..ContrastiveConfig::default()
            };
            (cfg.initial_state(train.dim())?, None)
        }
    };
    check_dim(state.architecture.input_dim, &train, &test)?;
    let out = finetune(&state, &train, &test, &head_config(&args.training, seed))?;
    if let Some(path) = &args.output {
        save_checkpoint(path, &out.state, config.as_ref())?;
    }
    Ok(format!("auc={}\n", out.auc))
}

fn check_dim(expected: usize, train: &Dataset<f64>, test: &Dataset<f64>) -> Result<()> {
    for ds in [train, test] {
        if ds.dim() != expected {
            return Err(Error::DimensionMismatch { left: expected, right: ds.dim() });
        }
    }
    Ok(())
}

fn bench(args: &BenchArgs, seed: Option<u64>) -> Result<String> {
    let mut cfg: BenchConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => BenchConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = synth_benchmark(&cfg)?.to_tsv();
    match &args.output {
        Some(path) => {
            write_atomic(path, report.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(report),
    }
}
