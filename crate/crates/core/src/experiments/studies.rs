use rayon::prelude::*;

use crate::cells;
use crate::error::{invalid, Result};
use crate::operators::ForwardOperator;
use crate::param_select::{
    draw_samples, erm_select, quasi_optimality_landweber_spectral, quasi_optimality_tikhonov,
    LossSpec, ParamGrid, RegularizationMethod, TrainingSet,
};
use crate::rng::{MasterSeed, Role};
use crate::spectral_reg::{FilterKind, SpectralMethod, TruncationRadius};
use crate::theory_bounds::{
    cq_factor, effective_alpha, erm_bound, BoundFamily, TheoryParams,
};
use crate::variational_reg::{LassoMethod, SoftThresholdMethod, SolverConfig, TvMethod};

use super::config::{FilterName, GridSpec, LossChoice, ModelKind, StudyConfig};
use super::data::{DataModel, ModelSampler};
use super::io::{write_dataset, Dataset, Table};
use super::montecarlo::{expected_risk_curve, std_dev, RiskProfile, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    RiskCurve,
    Rate,
    Noise,
    Plateau,
    QuasiOptimality,
    BoundCheck,
}

/// Default candidate grid per study, model and filter.
pub fn default_grid(study: StudyKind, model: ModelKind, filter: Option<FilterName>) -> GridSpec {
    use StudyKind::*;
    match (model, filter) {
        (ModelKind::Spectral, Some(FilterName::Landweber)) => match study {
            Rate | Noise => GridSpec::new(1e-4, 1.0, 3000),
            _ => GridSpec::new(1e-3, 1.0, if study == QuasiOptimality { 800 } else { 500 }),
        },
        (ModelKind::Spectral, Some(FilterName::Cutoff)) => GridSpec::new(1e-5, 1.0, 500),
        (ModelKind::Spectral, _) => match study {
            Rate | Noise => GridSpec::new(1e-5, 1.0, 500),
            QuasiOptimality => GridSpec::new(1e-5, 10.0, 1000),
            _ => GridSpec::new(1e-4, 100.0, 500),
        },
        (ModelKind::Denoise, _) => match study {
            RiskCurve => GridSpec::new(1e-4, 10.0, 1000),
            Rate | Noise => GridSpec::new(1e-5, 1.0, 500),
            _ => GridSpec::new(1e-5, 1.0, 1000),
        },
        (ModelKind::Deblur, _) => match study {
            Rate | Noise => GridSpec::new(1e-2, 1.0, 10),
            _ => GridSpec::new(1e-2, 1.0, 50),
        },
        (ModelKind::Tv, _) => match study {
            Rate | Noise => GridSpec::new(1e-2, 1.0, 10),
            _ => GridSpec::new(1e-3, 1.0, 50),
        },
    }
}

fn default_tau(model: ModelKind) -> f64 {
    match model {
        ModelKind::Spectral => 0.01,
        ModelKind::Denoise | ModelKind::Tv => 0.25,
        ModelKind::Deblur => 0.1,
    }
}

fn default_tau_range(model: ModelKind) -> Vec<f64> {
    let (lo, hi) = match model {
        ModelKind::Spectral => (1e-4, 1e-1),
        _ => (0.1, 1.0),
    };
    crate::param_select::build_grid(lo, hi, 30)
        .expect("valid default range")
        .values()
        .to_vec()
}

fn default_plateau_ns(model: ModelKind) -> Vec<usize> {
    match model {
        ModelKind::Spectral => (5..=100).step_by(5).collect(),
        ModelKind::Denoise => (1..=20).collect(),
        ModelKind::Deblur | ModelKind::Tv => (5..=50).step_by(5).collect(),
    }
}

/// One regularization method on one data model, ready for risk evaluation.
pub struct Problem {
    /// Filter name for spectral models, model name otherwise.
    pub label: String,
    pub filter: Option<(FilterName, FilterKind)>,
    pub model: DataModel,
    pub operator: ForwardOperator,
    pub sampler: ModelSampler,
    pub method: Box<dyn RegularizationMethod>,
    pub loss: LossSpec,
}

impl Problem {
    pub fn grid(&self, cfg: &StudyConfig, study: StudyKind) -> Result<ParamGrid> {
        cfg.grid_or(default_grid(study, cfg.model, self.filter.map(|f| f.0)))
            .build()
    }

    /// `alpha` for the rate exponent: the effective exponent for spectral filters, 1/2 otherwise
    /// (so that `4 alpha / (2 alpha + 1) = 1`, the convex-case rate).
    pub fn rate_alpha(&self, cfg: &StudyConfig) -> Result<f64> {
        match self.filter {
            Some((_, kind)) => effective_alpha(kind, cfg.s),
            None => Ok(0.5),
        }
    }
}

/// The configured problems at noise level `tau` (one per filter for spectral models).
pub fn problems(cfg: &StudyConfig, tau: f64) -> Result<Vec<Problem>> {
    let model = cfg.data_model(tau);
    let inst = model.instantiate()?;
    let solver = |default: SolverConfig| SolverConfig::new(cfg.tol.unwrap_or(default.tolerance), cfg.max_iter);
    let single = |label: &str, method: Box<dyn RegularizationMethod>, loss: LossSpec| Problem {
        label: label.to_string(),
        filter: None,
        model: model.clone(),
        operator: inst.operator.clone(),
        sampler: inst.sampler.clone(),
        method,
        loss,
    };
    let sparse_loss = |d: usize| match cfg.loss {
        LossChoice::Truncated => LossSpec::truncated_squared(TruncationRadius::default()),
        other => LossSpec::l1_bregman(other.rule(), d, 1.0),
    };
    Ok(match cfg.model {
        ModelKind::Spectral => cfg
            .filters
            .iter()
            .map(|&f| {
                let kind = cfg.filter_kind(f);
                Ok(Problem {
                    label: kind.name().to_string(),
                    filter: Some((f, kind)),
                    model: model.clone(),
                    operator: inst.operator.clone(),
                    sampler: inst.sampler.clone(),
                    method: Box::new(SpectralMethod::new(&inst.operator, kind)?),
                    loss: LossSpec::truncated_squared(TruncationRadius::default()),
                })
            })
            .collect::<Result<_>>()?,
        ModelKind::Denoise => vec![single("denoise", Box::new(SoftThresholdMethod), sparse_loss(cfg.d))],
        ModelKind::Deblur => {
            let method = LassoMethod::new(inst.operator.clone(), solver(SolverConfig::lasso())?);
            vec![single("deblur", Box::new(method), sparse_loss(cfg.d))]
        }
        ModelKind::Tv => {
            let ModelSampler::Images(s) = &inst.sampler else {
                unreachable!("tv models sample images")
            };
            let (rows, cols) = s.shape();
            let method = TvMethod::new(rows, cols, solver(SolverConfig::tv())?);
            vec![single("tv", Box::new(method), LossSpec::tv_bregman(rows, cols))]
        }
    })
}

fn single_tau(cfg: &StudyConfig) -> f64 {
    cfg.taus.as_ref().map_or(default_tau(cfg.model), |t| t[0])
}

fn train_set(p: &Problem, n: usize, seed: MasterSeed) -> Result<TrainingSet> {
    draw_samples(&p.sampler, n, seed, Role::Train)
}

/// Empirical and expected risk over the grid for one training set.
#[derive(Debug, Clone)]
pub struct RiskCurveResult {
    pub label: String,
    pub lambdas: Vec<f64>,
    pub empirical: Vec<f64>,
    pub expected: Vec<Summary>,
    pub lambda_hat: f64,
}

pub fn run_risk_curve(cfg: &StudyConfig) -> Result<Vec<RiskCurveResult>> {
    let seed = MasterSeed(cfg.seed);
    let n = cfg.n_or(if cfg.model == ModelKind::Spectral { 50 } else { 10 });
    let n_mc = cfg.n_mc.unwrap_or(500);
    problems(cfg, single_tau(cfg))?
        .into_iter()
        .map(|p| {
            let grid = p.grid(cfg, StudyKind::RiskCurve)?;
            let train = train_set(&p, n, seed.derive(Role::Trial, 0))?;
            let sel = erm_select(p.method.as_ref(), &p.loss, &train, &grid)?;
            let expected = expected_risk_curve(
                p.method.as_ref(),
                &p.loss,
                &p.sampler,
                grid.values(),
                n_mc,
                seed.derive(Role::MonteCarlo, 0),
            )?;
            Ok(RiskCurveResult {
                label: p.label,
                lambdas: grid.values().to_vec(),
                empirical: sel.risk_curve,
                expected,
                lambda_hat: sel.lambda,
            })
        })
        .collect()
}

pub fn risk_curve_tables(results: &[RiskCurveResult]) -> Vec<(String, Table)> {
    results
        .iter()
        .map(|r| {
            let mut t = Table::new(&["lambda", "empirical_risk", "risk_mean", "risk_p05", "risk_p95"]);
            for (i, l) in r.lambdas.iter().enumerate() {
                let e = r.expected[i];
                t.push(cells![l, r.empirical[i], e.mean, e.p05, e.p95]);
            }
            (format!("risk_curve_{}.csv", r.label), t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub label: String,
    pub tau: f64,
    pub lambda_star: f64,
    pub risk: f64,
    pub exponent: f64,
    pub ratio: f64,
}

/// For every `tau`, the minimal Monte Carlo risk over a dense grid and its ratio to
/// `tau^(4 alpha / (2 alpha + 1))`. The Monte Carlo draws are shared across noise levels.
pub fn run_rate_study(cfg: &StudyConfig) -> Result<Vec<RateRow>> {
    let seed = MasterSeed(cfg.seed);
    let taus = cfg.taus_or(&default_tau_range(cfg.model));
    let n_mc = cfg.n_mc.unwrap_or(500);
    let mut per_tau = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let mut rows = Vec::new();
        for p in problems(cfg, tau)? {
            let dense = cfg
                .grid_or(default_grid(StudyKind::Rate, cfg.model, p.filter.map(|f| f.0)))
                .widened(cfg.dense_points)
                .build()?;
            let profile = RiskProfile::estimate(
                p.method.as_ref(),
                &p.loss,
                &p.sampler,
                &dense,
                n_mc,
                seed.derive(Role::MonteCarlo, 0),
            )?;
            let alpha = p.rate_alpha(cfg)?;
            let exponent = 4.0 * alpha / (2.0 * alpha + 1.0);
            rows.push(RateRow {
                label: p.label.clone(),
                tau,
                lambda_star: profile.best_lambda(),
                risk: profile.best_risk(),
                exponent,
                ratio: profile.best_risk() / tau.powf(exponent),
            });
        }
        per_tau.push(rows);
    }
    let mut out: Vec<RateRow> = per_tau.into_iter().flatten().collect();
    out.sort_by(|a, b| a.label.cmp(&b.label).then(a.tau.total_cmp(&b.tau)));
    Ok(out)
}

pub fn rate_tables(rows: &[RateRow]) -> Vec<(String, Table)> {
    group_by_label(rows, |r| &r.label)
        .into_iter()
        .map(|(label, rs)| {
            let mut t = Table::new(&["tau", "lambda_star", "risk", "exponent", "ratio"]);
            for r in rs {
                t.push(cells![r.tau, r.lambda_star, r.risk, r.exponent, r.ratio]);
            }
            (format!("rate_{label}.csv"), t)
        })
        .collect()
}

fn group_by_label<T>(rows: &[T], label: impl Fn(&T) -> &String) -> Vec<(String, Vec<&T>)> {
    let mut groups: Vec<(String, Vec<&T>)> = Vec::new();
    for r in rows {
        let l = label(r);
        match groups.iter_mut().find(|(g, _)| g == l) {
            Some((_, v)) => v.push(r),
            None => groups.push((l.clone(), vec![r])),
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub label: String,
    /// Noise level or training size, depending on the study.
    pub key: f64,
    pub trial: usize,
    pub lambda_hat: f64,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSummary {
    pub label: String,
    pub tau: f64,
    pub lambda_star: f64,
    pub risk_star: f64,
    pub lambda_hat: Summary,
    pub risk: Summary,
}

/// ERM trials on a fixed grid, with the expected risk of each learned parameter read off a
/// Monte Carlo curve computed once.
fn erm_trials(
    p: &Problem,
    grid: &ParamGrid,
    profile: &RiskProfile,
    n: usize,
    trials: usize,
    seed: MasterSeed,
) -> Result<Vec<(usize, f64, f64)>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let train = train_set(p, n, seed.derive(Role::Trial, t as u64))?;
            let sel = erm_select(p.method.as_ref(), &p.loss, &train, grid)?;
            Ok((t, sel.lambda, profile.mean_at(sel.index)))
        })
        .collect()
}

pub fn run_noise_study(cfg: &StudyConfig) -> Result<(Vec<TrialRow>, Vec<NoiseSummary>)> {
    let seed = MasterSeed(cfg.seed);
    let taus = cfg.taus_or(&default_tau_range(cfg.model));
    let n = cfg.n_or(5);
    let n_mc = cfg.n_mc.unwrap_or(500);
    let trials = cfg.trials.unwrap_or(30);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (ti, &tau) in taus.iter().enumerate() {
        for p in problems(cfg, tau)? {
            let grid = p.grid(cfg, StudyKind::Noise)?;
            let spec = cfg.grid_or(default_grid(StudyKind::Noise, cfg.model, p.filter.map(|f| f.0)));
            let dense = spec.widened(cfg.dense_points).build()?;
            let mc_seed = seed.derive(Role::MonteCarlo, ti as u64);
            let profile = RiskProfile::estimate(p.method.as_ref(), &p.loss, &p.sampler, &grid, n_mc, mc_seed)?;
            let star = RiskProfile::estimate(p.method.as_ref(), &p.loss, &p.sampler, &dense, n_mc, mc_seed)?;
            let results = erm_trials(&p, &grid, &profile, n, trials, seed.derive(Role::Train, ti as u64))?;
            let lambdas: Vec<f64> = results.iter().map(|r| r.1).collect();
            let risks: Vec<f64> = results.iter().map(|r| r.2).collect();
            summaries.push(NoiseSummary {
                label: p.label.clone(),
                tau,
                lambda_star: star.best_lambda(),
                risk_star: star.best_risk(),
                lambda_hat: Summary::of(&lambdas)?,
                risk: Summary::of(&risks)?,
            });
            rows.extend(results.into_iter().map(|(t, l, r)| TrialRow {
                label: p.label.clone(),
                key: tau,
                trial: t,
                lambda_hat: l,
                risk: r,
            }));
        }
    }
    Ok((rows, summaries))
}

pub fn noise_tables(rows: &[TrialRow], summaries: &[NoiseSummary]) -> Vec<(String, Table)> {
    let mut out = Vec::new();
    for (label, rs) in group_by_label(rows, |r| &r.label) {
        let mut t = Table::new(&["tau", "trial", "lambda_hat", "risk"]);
        for r in rs {
            t.push(cells![r.key, r.trial, r.lambda_hat, r.risk]);
        }
        out.push((format!("noise_{label}.csv"), t));
    }
    for (label, ss) in group_by_label(summaries, |s| &s.label) {
        let mut t = Table::new(&[
            "tau",
            "lambda_star",
            "risk_star",
            "lambda_hat_mean",
            "lambda_hat_p05",
            "lambda_hat_p95",
            "risk_mean",
            "risk_p05",
            "risk_p95",
        ]);
        for s in ss {
            t.push(cells![
                s.tau,
                s.lambda_star,
                s.risk_star,
                s.lambda_hat.mean,
                s.lambda_hat.p05,
                s.lambda_hat.p95,
                s.risk.mean,
                s.risk.p05,
                s.risk.p95
            ]);
        }
        out.push((format!("noise_{label}_summary.csv"), t));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauResult {
    pub label: String,
    pub trials: Vec<TrialRow>,
    /// `(n, summary of L(f_lambda_hat(n)))`.
    pub summary: Vec<(usize, Summary)>,
    pub oracle_lambda: f64,
    pub oracle_risk: f64,
    pub loss_bound: f64,
    pub grid_size: usize,
}

impl PlateauResult {
    pub fn mean_at(&self, n: usize) -> Option<f64> {
        self.summary.iter().find(|(m, _)| *m == n).map(|(_, s)| s.mean)
    }
}

pub fn run_plateau_study(cfg: &StudyConfig) -> Result<Vec<PlateauResult>> {
    let seed = MasterSeed(cfg.seed);
    let ns = cfg.ns_or(&default_plateau_ns(cfg.model));
    let n_mc = cfg.n_mc.unwrap_or(500);
    let trials = cfg.trials.unwrap_or(30);
    problems(cfg, single_tau(cfg))?
        .into_iter()
        .map(|p| {
            let grid = p.grid(cfg, StudyKind::Plateau)?;
            let profile = RiskProfile::estimate(
                p.method.as_ref(),
                &p.loss,
                &p.sampler,
                &grid,
                n_mc,
                seed.derive(Role::MonteCarlo, 0),
            )?;
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for &n in &ns {
                let results = erm_trials(&p, &grid, &profile, n, trials, seed.derive(Role::Train, n as u64))?;
                let risks: Vec<f64> = results.iter().map(|r| r.2).collect();
                summary.push((n, Summary::of(&risks)?));
                rows.extend(results.into_iter().map(|(t, l, r)| TrialRow {
                    label: p.label.clone(),
                    key: n as f64,
                    trial: t,
                    lambda_hat: l,
                    risk: r,
                }));
            }
            Ok(PlateauResult {
                label: p.label.clone(),
                trials: rows,
                summary,
                oracle_lambda: profile.best_lambda(),
                oracle_risk: profile.best_risk(),
                loss_bound: p.loss.bound(),
                grid_size: grid.len(),
            })
        })
        .collect()
}

pub fn plateau_tables(results: &[PlateauResult]) -> Vec<(String, Table)> {
    let mut out = Vec::new();
    for r in results {
        let mut t = Table::new(&["n", "trial", "lambda_hat", "risk"]);
        for row in &r.trials {
            t.push(cells![row.key, row.trial, row.lambda_hat, row.risk]);
        }
        out.push((format!("plateau_{}.csv", r.label), t));
        let mut s = Table::new(&["n", "risk_mean", "risk_p05", "risk_p95"]);
        for (n, sm) in &r.summary {
            s.push(cells![n, sm.mean, sm.p05, sm.p95]);
        }
        out.push((format!("plateau_{}_summary.csv", r.label), s));
        let mut o = Table::new(&["lambda_oracle", "risk_oracle", "loss_bound", "grid_size"]);
        o.push(cells![r.oracle_lambda, r.oracle_risk, r.loss_bound, r.grid_size]);
        out.push((format!("plateau_{}_oracle.csv", r.label), o));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QoTrial {
    pub label: String,
    pub tau: f64,
    pub trial: usize,
    pub learned: f64,
    pub quasi_optimal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QoSummary {
    pub label: String,
    pub tau: f64,
    pub mean: f64,
    pub std: f64,
}

/// Test error of the learned parameter minus that of per-datum quasi-optimality, both under the
/// truncated squared loss on a fixed test set; the training set is redrawn every trial.
pub fn run_qo_comparison(cfg: &StudyConfig) -> Result<(Vec<QoTrial>, Vec<QoSummary>)> {
    if cfg.model != ModelKind::Spectral {
        return Err(invalid("the quasi-optimality comparison needs the spectral model"));
    }
    let seed = MasterSeed(cfg.seed);
    let taus = cfg.taus_or(&[1e-3, 1e-2, 1e-1, 0.5]);
    let n_train = cfg.n_train.unwrap_or(1000);
    let trials = cfg.trials.unwrap_or(30);
    let radius = TruncationRadius::default();
    let mut all = Vec::new();
    let mut summaries = Vec::new();
    for (ti, &tau) in taus.iter().enumerate() {
        let model = cfg.data_model(tau);
        let inst = model.instantiate()?;
        let test = draw_samples(&inst.sampler, cfg.n_test, seed.derive(Role::Test, ti as u64), Role::Test)?;
        for &f in &cfg.filters {
            let kind = cfg.filter_kind(f);
            let method = SpectralMethod::new(&inst.operator, kind)?;
            let loss = LossSpec::truncated_squared(radius);
            let grid = cfg.grid_or(default_grid(StudyKind::QuasiOptimality, cfg.model, Some(f))).build()?;
            let samples = test
                .pairs()
                .iter()
                .map(|(y, x)| method.project(y, x))
                .collect::<Result<Vec<_>>>()?;
            let per_point: Vec<(Vec<f64>, f64)> = samples
                .par_iter()
                .map(|s| {
                    let coeffs: Vec<_> = grid.values().iter().map(|&l| method.coefficients(s.data(), l)).collect();
                    let losses: Vec<f64> = coeffs.iter().map(|c| method.truncated_loss(s, c, radius)).collect();
                    let qo = match kind {
                        FilterKind::Landweber { gamma } => {
                            quasi_optimality_landweber_spectral(&method, s.data(), &grid, gamma)?
                        }
                        _ => quasi_optimality_tikhonov(&coeffs, &grid)?,
                    };
                    let qo_loss = losses[qo.index - 1];
                    Ok((losses, qo_loss))
                })
                .collect::<Result<_>>()?;
            let n_test = per_point.len() as f64;
            let l_qo = per_point.iter().map(|p| p.1).sum::<f64>() / n_test;
            let trial_seed = seed.derive(Role::Trial, ti as u64);
            let learned: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let train = draw_samples(&inst.sampler, n_train, trial_seed.derive(Role::Trial, t as u64), Role::Train)?;
                    let sel = erm_select(&method, &loss, &train, &grid)?;
                    Ok(per_point.iter().map(|p| p.0[sel.index]).sum::<f64>() / n_test)
                })
                .collect::<Result<_>>()?;
            let diffs: Vec<f64> = learned.iter().map(|l| l - l_qo).collect();
            summaries.push(QoSummary {
                label: kind.name().to_string(),
                tau,
                mean: diffs.iter().sum::<f64>() / diffs.len() as f64,
                std: std_dev(&diffs),
            });
            all.extend(learned.iter().enumerate().map(|(t, &l)| QoTrial {
                label: kind.name().to_string(),
                tau,
                trial: t,
                learned: l,
                quasi_optimal: l_qo,
            }));
        }
    }
    let order = |l: &str| cfg.filters.iter().position(|f| cfg.filter_kind(*f).name() == l);
    summaries.sort_by_key(|s| order(&s.label));
    all.sort_by_key(|t| order(&t.label));
    Ok((all, summaries))
}

pub fn qo_tables(trials: &[QoTrial], summaries: &[QoSummary]) -> Vec<(String, Table)> {
    let mut s = Table::new(&["method", "tau", "mean", "std"]);
    for r in summaries {
        s.push(cells![r.label, r.tau, r.mean, r.std]);
    }
    let mut t = Table::new(&["method", "tau", "trial", "l_learn", "l_qo"]);
    for r in trials {
        t.push(cells![r.label, r.tau, r.trial, r.learned, r.quasi_optimal]);
    }
    vec![("qo_comparison.csv".into(), s), ("qo_trials.csv".into(), t)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckResult {
    pub label: String,
    pub n: usize,
    pub grid_size: usize,
    pub eta: f64,
    pub loss_bound: f64,
    pub oracle_lambda: f64,
    pub oracle_risk: f64,
    pub additive_term: f64,
    /// `(trial, lambda_hat, L(lambda_hat), bound)`.
    pub trials: Vec<(usize, f64, f64, f64)>,
    pub failures: usize,
    pub profile: Vec<(f64, Summary, f64)>,
    pub theory_lambda_star: f64,
    pub theory_risk_star: f64,
    pub theory_erm_bound: f64,
}

impl BoundCheckResult {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials.len() as f64
    }
}

/// Checks `L(f_lambda_hat) <= 2 L(f_lambda_grid) + (13 M / 2n) ln(2N / eta)` over repeated
/// training sets and overlays the a priori bound on the Monte Carlo risk curve.
pub fn run_bound_check(cfg: &StudyConfig) -> Result<Vec<BoundCheckResult>> {
    let seed = MasterSeed(cfg.seed);
    let tau = single_tau(cfg);
    let n = cfg.n_or(50);
    let n_mc = cfg.n_mc.unwrap_or(5000);
    let trials = cfg.trials.unwrap_or(200);
    problems(cfg, tau)?
        .into_iter()
        .map(|p| {
            let grid = p.grid(cfg, StudyKind::BoundCheck)?;
            let profile = RiskProfile::estimate(
                p.method.as_ref(),
                &p.loss,
                &p.sampler,
                &grid,
                n_mc,
                seed.derive(Role::MonteCarlo, 0),
            )?;
            let (family, alpha) = match p.filter {
                Some((_, kind)) => (BoundFamily::Spectral, effective_alpha(kind, cfg.s)?),
                None => (BoundFamily::Convex, 0.5),
            };
            let params = TheoryParams {
                tau,
                beta: 1.0,
                s: cfg.s,
                alpha,
                loss_bound: p.loss.bound(),
                eta: cfg.eta,
                n,
                grid_size: grid.len(),
                ..TheoryParams::default()
            };
            let additive_term = erm_bound(0.0, 0.0, &params)?;
            let threshold = 2.0 * profile.best_risk() + additive_term;
            let results = erm_trials(&p, &grid, &profile, n, trials, seed.derive(Role::Train, 0))?;
            let failures = results.iter().filter(|r| r.2 > threshold).count();
            let (theory_lambda_star, theory_risk_star, theory_erm_bound) = if tau > 0.0 {
                let (l, u) = family.optimal(&params)?;
                let q = grid.ratio().unwrap_or(1.0);
                (l, u, erm_bound(u, cq_factor(family, q, alpha)?, &params)?)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            let curve = grid
                .values()
                .iter()
                .zip(&profile.summaries)
                .map(|(&l, s)| Ok((l, *s, family.bound(l, &params)?)))
                .collect::<Result<_>>()?;
            Ok(BoundCheckResult {
                label: p.label.clone(),
                n,
                grid_size: grid.len(),
                eta: cfg.eta,
                loss_bound: p.loss.bound(),
                oracle_lambda: profile.best_lambda(),
                oracle_risk: profile.best_risk(),
                additive_term,
                trials: results.into_iter().map(|(t, l, r)| (t, l, r, threshold)).collect(),
                failures,
                profile: curve,
                theory_lambda_star,
                theory_risk_star,
                theory_erm_bound,
            })
        })
        .collect()
}

pub fn bound_tables(results: &[BoundCheckResult]) -> Vec<(String, Table)> {
    let mut out = Vec::new();
    for r in results {
        let mut t = Table::new(&["trial", "lambda_hat", "risk", "bound", "holds"]);
        for &(trial, l, risk, bound) in &r.trials {
            t.push(cells![trial, l, risk, bound, risk <= bound]);
        }
        out.push((format!("bound_trials_{}.csv", r.label), t));
        let mut s = Table::new(&[
            "n",
            "grid_size",
            "eta",
            "loss_bound",
            "oracle_lambda",
            "oracle_risk",
            "additive_term",
            "failures",
            "trials",
            "failure_rate",
            "theory_lambda_star",
            "theory_risk_star",
            "theory_erm_bound",
        ]);
        s.push(cells![
            r.n,
            r.grid_size,
            r.eta,
            r.loss_bound,
            r.oracle_lambda,
            r.oracle_risk,
            r.additive_term,
            r.failures,
            r.trials.len(),
            r.failure_rate(),
            r.theory_lambda_star,
            r.theory_risk_star,
            r.theory_erm_bound
        ]);
        out.push((format!("bound_summary_{}.csv", r.label), s));
        let mut c = Table::new(&["lambda", "risk_mean", "risk_p05", "risk_p95", "theory_bound"]);
        for (l, sm, u) in &r.profile {
            c.push(cells![l, sm.mean, sm.p05, sm.p95, u]);
        }
        out.push((format!("bound_curve_{}.csv", r.label), c));
    }
    out
}

/// Draws a training set and packs it with its model and operator.
pub fn run_generate(cfg: &StudyConfig) -> Result<Dataset> {
    let tau = single_tau(cfg);
    let n = cfg.n_or(50);
    let model = cfg.data_model(tau);
    let inst = model.instantiate()?;
    let data = draw_samples(&inst.sampler, n, MasterSeed(cfg.seed).derive(Role::Trial, 0), Role::Train)?;
    Ok(Dataset {
        model,
        operator: inst.operator,
        data,
    })
}

/// Writes each table under `dir`, returning the paths written.
pub fn write_tables(dir: &std::path::Path, tables: &[(String, Table)]) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|(name, t)| {
            let path = dir.join(name);
            t.write(&path)?;
            Ok(path)
        })
        .collect()
}

pub fn write_generated(dir: &std::path::Path, ds: &Dataset) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("dataset.txt");
    write_dataset(&path, ds)?;
    Ok(path)
}
