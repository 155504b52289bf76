//! `factorbnn` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod data;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use factorbnn::checkpoint::Checkpoint;
use factorbnn::config::{take_train_config, KeyValues};
use factorbnn::data::{sine, table};
use factorbnn::layers::{Network, Predictive};
use factorbnn::metrics::{self, coverage, Report};
use factorbnn::modelspec;
use factorbnn::trainer::Trainer;

use data::{check_shape, load, load_ood, Split};

#[derive(Parser)]
#[command(
    name = "factorbnn",
    version,
    about = "Message-passing Bayesian neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a noisy sine dataset as CSV.
    SynthData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a model and write `model.ckpt` and `train.log` to `--out`.
    Train {
        #[arg(long)]
        model: PathBuf,
        /// CSV file or CIFAR-10 binary directory.
        #[arg(long)]
        data: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint; writes `metrics.txt` and CSV tables to `--out`.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: String,
        /// Second dataset scored for out-of-distribution detection.
        #[arg(long)]
        ood_data: Option<String>,
        #[arg(long, default_value_t = metrics::ECE_BINS)]
        bins: usize,
        /// Evaluate a seeded random subset of this size.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the predictive distribution of every input as CSV.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a seeded ensemble and measure credible-interval coverage.
    Coverage {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed of the first ensemble member.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::SynthData {
            out,
            n,
            lo,
            hi,
            noise,
            seed,
        } => {
            let d = sine::synth(n, (lo, hi), noise, seed)?;
            table::write(&out, &d)?;
            eprintln!("wrote {n} examples to {}", out.display());
            Ok(())
        }
        Command::Train {
            model,
            data,
            config,
            seed,
            out,
        } => train(&model, &data, config.as_deref(), seed, &out),
        Command::Eval {
            checkpoint,
            data,
            ood_data,
            bins,
            limit,
            seed,
            out,
        } => eval(
            &checkpoint,
            &data,
            ood_data.as_deref(),
            bins,
            limit,
            seed,
            &out,
        ),
        Command::Predict {
            checkpoint,
            data,
            out,
        } => predict(&checkpoint, &data, &out),
        Command::Coverage { config, seed, out } => run_coverage(config.as_deref(), seed, &out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn key_values(path: Option<&Path>) -> Result<KeyValues> {
    match path {
        Some(p) => Ok(KeyValues::parse(&read_text(p)?, &p.display().to_string())?),
        None => Ok(KeyValues::default()),
    }
}

fn train(
    model: &Path,
    data: &str,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let specs = modelspec::parse(&read_text(model)?, &model.display().to_string())?;
    let mut kv = key_values(config)?;
    let mut cfg = take_train_config(&mut kv)?;
    let subset: Option<usize> = kv.take("subset")?;
    kv.finish()?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let net = Network::new(&specs)?;
    let data = load(data, Split::Train, subset, cfg.seed)?;
    check_shape(&data, &net.shapes[0])?;
    fs::create_dir_all(out)?;
    let mut trainer = Trainer::new(net, cfg, data.len())?;
    let mut log = String::new();
    writeln!(
        log,
        "# examples={} batches={} params={}",
        data.len(),
        trainer.batches().len(),
        trainer.net.param_count()
    )?;
    while trainer.epoch() < trainer.config.epochs {
        let r = trainer.run_epoch(&data)?;
        let i = r.incidents;
        let line = format!(
            "epoch={} iterations={} seconds={:.3} direct_fallbacks={} uniform_fallbacks={} improper_cavities={} \
             dropped_terms={} skipped_pairs={} clamped_marginals={} clamped_aggregates={}",
            r.epoch + 1,
            r.iterations,
            r.seconds,
            i.direct_fallbacks,
            i.uniform_fallbacks,
            i.improper_cavities,
            i.dropped_terms,
            i.skipped_pairs,
            i.clamped_marginals,
            i.clamped_aggregates
        );
        eprintln!("{line}");
        log.push_str(&line);
        log.push('\n');
    }
    Checkpoint::from_trainer(&trainer).save(&out.join("model.ckpt"))?;
    fs::write(out.join("train.log"), log)?;
    eprintln!("wrote {}", out.join("model.ckpt").display());
    Ok(())
}

fn eval(
    checkpoint: &Path,
    data: &str,
    ood: Option<&str>,
    bins: usize,
    limit: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let net = Checkpoint::load(checkpoint)?.network()?;
    let set = load(data, Split::Test, limit, seed)?;
    check_shape(&set, &net.shapes[0])?;
    let mut ev = metrics::evaluate(&net, &set, bins)?;
    fs::create_dir_all(out)?;
    if !ev.calibration.is_empty() {
        let mut csv = String::from("lo,hi,count,accuracy,confidence\n");
        for b in &ev.calibration {
            writeln!(
                csv,
                "{:?},{:?},{},{:?},{:?}",
                b.lo, b.hi, b.count, b.accuracy, b.confidence
            )?;
        }
        fs::write(out.join("calibration.csv"), csv)?;
    }
    if let Some(ood) = ood {
        let other = load_ood(ood, data, seed)?;
        check_shape(&other, &net.shapes[0])?;
        let p_in = metrics::class_probs(&ev.predictions)?;
        let p_out = metrics::class_probs(&metrics::predict_all(&net, &other)?)?;
        ev.report
            .num("ood_auroc", metrics::ood_auroc(&p_in, &p_out)?);
        let score = |ps: &[Vec<f64>]| ps.iter().map(|p| -metrics::entropy(p)).collect::<Vec<_>>();
        let mut csv = String::from("fpr,tpr\n");
        for (f, t) in metrics::roc_points(&score(&p_in), &score(&p_out)) {
            writeln!(csv, "{f:?},{t:?}")?;
        }
        fs::write(out.join("roc.csv"), csv)?;
    }
    let text = ev.report.to_text();
    fs::write(out.join("metrics.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn predict(checkpoint: &Path, data: &str, out: &Path) -> Result<()> {
    let net = Checkpoint::load(checkpoint)?.network()?;
    let set = load(data, Split::Test, None, 0)?;
    check_shape(&set, &net.shapes[0])?;
    let mut csv = String::new();
    for (i, p) in metrics::predict_all(&net, &set)?.iter().enumerate() {
        match p {
            Predictive::Regression {
                mean, latent_var, ..
            } => {
                if i == 0 {
                    csv.push_str("mean,variance,latent_variance\n");
                }
                writeln!(
                    csv,
                    "{mean:?},{:?},{latent_var:?}",
                    p.total_var().unwrap_or(f64::NAN)
                )?;
            }
            Predictive::Classes(ps) => {
                if i == 0 {
                    let names: Vec<String> = (0..ps.len()).map(|k| format!("p{k}")).collect();
                    writeln!(csv, "{}", names.join(","))?;
                }
                let vals: Vec<String> = ps.iter().map(|v| format!("{v:?}")).collect();
                writeln!(csv, "{}", vals.join(","))?;
            }
        }
    }
    fs::write(out, csv)?;
    Ok(())
}

fn coverage_config(kv: &mut KeyValues) -> Result<coverage::CoverageConfig> {
    let mut c = coverage::CoverageConfig::default();
    macro_rules! key {
        ($($name:ident),*) => {$(
            if let Some(v) = kv.take(stringify!($name))? {
                c.$name = v;
            }
        )*};
    }
    key!(seeds, first_seed, data_seed, points, noise, width, depth, iterations, p_step, threshold);
    key!(include_noise, prior_target_variance, bias_prior_variance);
    if let Some(v) = kv.take("range_lo")? {
        c.range.0 = v;
    }
    if let Some(v) = kv.take("range_hi")? {
        c.range.1 = v;
    }
    if let Some(v) = kv.take("x_lo")? {
        c.x_grid.0 = v;
    }
    if let Some(v) = kv.take("x_hi")? {
        c.x_grid.1 = v;
    }
    if let Some(v) = kv.take("x_step")? {
        c.x_grid.2 = v;
    }
    Ok(c)
}

fn run_coverage(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut kv = key_values(config)?;
    let mut cfg = coverage_config(&mut kv)?;
    kv.finish()?;
    if let Some(s) = seed {
        cfg.first_seed = s;
    }
    if !(cfg.range.0 < cfg.range.1) {
        bail!("range_lo must be below range_hi");
    }
    let res = coverage::run(&cfg, |s| {
        eprintln!("member {} of {} trained", s + 1, cfg.seeds)
    })?;
    fs::create_dir_all(out)?;
    let mut grid = String::from("p,x,rate\n");
    for (p, row) in res.grid.ps.iter().zip(&res.grid.rates) {
        for (x, r) in res.grid.xs.iter().zip(row) {
            writeln!(grid, "{p:?},{x:?},{r:?}")?;
        }
    }
    fs::write(out.join("coverage.csv"), grid)?;
    let s = &res.summary;
    let mut med = String::from("p,median_positive,median_negative\n");
    for (i, p) in res.grid.ps.iter().enumerate() {
        writeln!(
            med,
            "{p:?},{:?},{:?}",
            s.median_positive[i], s.median_negative[i]
        )?;
    }
    fs::write(out.join("medians.csv"), med)?;
    let mut report = Report::new();
    report
        .int("seeds", cfg.seeds as u64)
        .text(
            "interval_variance",
            if cfg.include_noise {
                "latent+noise"
            } else {
                "latent"
            },
        )
        .num("correlation_positive", s.positive.unwrap_or(f64::NAN))
        .num("correlation_negative", s.negative.unwrap_or(f64::NAN))
        .num("correlation_combined", s.combined.unwrap_or(f64::NAN));
    let text = report.to_text();
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
