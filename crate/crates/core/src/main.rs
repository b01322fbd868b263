use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regparam::experiments::config::read_config_file;
use regparam::experiments::studies::{
    bound_tables, noise_tables, plateau_tables, qo_tables, rate_tables, risk_curve_tables,
    run_bound_check, run_generate, run_noise_study, run_plateau_study, run_qo_comparison,
    run_rate_study, run_risk_curve, write_generated, write_tables,
};
use regparam::experiments::StudyConfig;
use regparam::Result;

#[derive(Parser)]
#[command(name = "regparam", version, about = "Learn regularization parameters by empirical risk minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a training set and write it to <out>/dataset.txt
    Generate(Opts),
    /// Empirical and Monte Carlo expected risk over the grid
    RiskCurve(Opts),
    /// Optimal risk against noise level, normalized by the predicted rate
    RateStudy(Opts),
    /// Learned parameter and its risk across noise levels
    NoiseStudy(Opts),
    /// Risk of the learned parameter as the training set grows
    PlateauStudy(Opts),
    /// Learned parameter against per-datum quasi-optimality
    CompareQo(Opts),
    /// Empirical check of the ERM oracle inequality
    BoundCheck(Opts),
}

/// Flags override values from `--config`.
#[derive(Args)]
struct Opts {
    /// key = value file; any flag below may appear in it
    #[arg(long)]
    config: Option<PathBuf>,
    /// spectral | denoise | deblur | tv
    #[arg(long)]
    model: Option<String>,
    /// signal dimension (image side for tv)
    #[arg(long)]
    d: Option<String>,
    /// source-condition exponent
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    sparsity: Option<String>,
    /// value, comma list, or lo:hi:N log-spaced
    #[arg(long)]
    tau: Option<String>,
    /// training-set size; value, comma list, or lo:hi:step
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    n_mc: Option<String>,
    /// lo:hi:N geometric grid
    #[arg(long)]
    grid: Option<String>,
    /// tikhonov, landweber, cutoff (comma list)
    #[arg(long)]
    filter: Option<String>,
    /// truncated | bregman | bregman-sign | tv
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// output directory
    #[arg(long)]
    out: Option<String>,
    /// landweber stepsize
    #[arg(long)]
    gamma: Option<String>,
    /// iterative solver tolerance
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    n_test: Option<String>,
    #[arg(long)]
    n_train: Option<String>,
    /// IDX image file for the tv model
    #[arg(long)]
    idx: Option<String>,
    /// confidence parameter of the oracle inequality
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    operator_seed: Option<String>,
    /// points in the dense grid used for the optimal risk
    #[arg(long)]
    dense_points: Option<String>,
}

impl Opts {
    fn settings(&self) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("model", &self.model),
            ("d", &self.d),
            ("s", &self.s),
            ("sparsity", &self.sparsity),
            ("tau", &self.tau),
            ("n", &self.n),
            ("n-mc", &self.n_mc),
            ("grid", &self.grid),
            ("filter", &self.filter),
            ("loss", &self.loss),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("out", &self.out),
            ("gamma", &self.gamma),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("n-test", &self.n_test),
            ("n-train", &self.n_train),
            ("idx", &self.idx),
            ("eta", &self.eta),
            ("operator-seed", &self.operator_seed),
            ("dense-points", &self.dense_points),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        Ok(map)
    }

    fn study_config(&self) -> Result<StudyConfig> {
        StudyConfig::from_map(&self.settings()?)
    }
}

fn run(cmd: Command) -> Result<Vec<PathBuf>> {
    match cmd {
        Command::Generate(o) => {
            let cfg = o.study_config()?;
            Ok(vec![write_generated(&cfg.out, &run_generate(&cfg)?)?])
        }
        Command::RiskCurve(o) => {
            let cfg = o.study_config()?;
            write_tables(&cfg.out, &risk_curve_tables(&run_risk_curve(&cfg)?))
        }
        Command::RateStudy(o) => {
            let cfg = o.study_config()?;
            write_tables(&cfg.out, &rate_tables(&run_rate_study(&cfg)?))
        }
        Command::NoiseStudy(o) => {
            let cfg = o.study_config()?;
            let (rows, summaries) = run_noise_study(&cfg)?;
            write_tables(&cfg.out, &noise_tables(&rows, &summaries))
        }
        Command::PlateauStudy(o) => {
            let cfg = o.study_config()?;
            write_tables(&cfg.out, &plateau_tables(&run_plateau_study(&cfg)?))
        }
        Command::CompareQo(o) => {
            let cfg = o.study_config()?;
            let (trials, summaries) = run_qo_comparison(&cfg)?;
            write_tables(&cfg.out, &qo_tables(&trials, &summaries))
        }
        Command::BoundCheck(o) => {
            let cfg = o.study_config()?;
            write_tables(&cfg.out, &bound_tables(&run_bound_check(&cfg)?))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
