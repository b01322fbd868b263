//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the report is printed even when every
//! criterion passes.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use regparam::experiments::data::gaussian_operator;
use regparam::experiments::studies::{
    run_bound_check, run_plateau_study, run_qo_comparison, run_rate_study,
};
use regparam::experiments::StudyConfig;
use regparam::operators::{GradientOperator, IdentityOperator, LinearOperator};
use regparam::param_select::build_grid;
use regparam::rng::{MasterSeed, Role, SampleRng};
use regparam::spectral_reg::{
    landweber_iters_from_lambda, landweber_solve, spectral_filter_solve, tikhonov_solve, FilterKind,
};
use regparam::theory_bounds::{cq_factor, erm_bound, BoundFamily, TheoryParams};
use regparam::variational_reg::{
    bregman_l1, bregman_tv, lasso_solve, soft_threshold, tv_denoise, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(pairs: &[(&str, &str)]) -> StudyConfig {
    let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    StudyConfig::from_map(&map).expect("valid acceptance config")
}

fn grid_ratios() -> Outcome {
    let cases = [
        (1e-4, 100.0, 500, 1.0281),
        (1e-3, 1.0, 500, 1.0139),
        (1e-5, 1.0, 500, 1.0233),
        (1e-4, 10.0, 1000, 1.0116),
        (1e-3, 1.0, 50, 1.1514),
        (1e-2, 1.0, 50, 1.0985),
        (1e-4, 1.0, 3000, 1.0031),
        (1e-3, 1.0, 800, 1.0087),
    ];
    let mut worst: f64 = 0.0;
    for (lo, hi, n, q) in cases {
        let got = build_grid(lo, hi, n).unwrap().ratio().unwrap();
        worst = worst.max((got - q).abs());
    }
    outcome(worst <= 1e-4, format!("max |Q - Q_ref| = {worst:.2e} over 8 grids"))
}

fn solver_oracles() -> Outcome {
    let op = gaussian_operator(30, MasterSeed(11)).unwrap();
    let mut rng = MasterSeed(12).rng();
    let y = DVector::from_fn(30, |_, _| rng.sample::<f64, _>(StandardNormal));

    let mut tik: f64 = 0.0;
    for lambda in [1e-4, 1e-2, 1.0] {
        let a = tikhonov_solve(&op, &y, lambda).unwrap();
        let b = spectral_filter_solve(op.decomposition(), FilterKind::Tikhonov, &y, lambda).unwrap();
        tik = tik.max((a - b).norm());
    }

    let gamma = 0.2;
    let mut lw: f64 = 0.0;
    for k in [1u64, 10, 100, 400] {
        let lambda = 1.0 / k as f64;
        assert_eq!(landweber_iters_from_lambda(lambda), k);
        let a = landweber_solve(&op, &y, k, gamma).unwrap();
        let b = spectral_filter_solve(op.decomposition(), FilterKind::Landweber { gamma }, &y, lambda).unwrap();
        lw = lw.max((a - b).norm());
    }

    let id = IdentityOperator::new(30);
    let mut lasso: f64 = 0.0;
    for lambda in [1e-3, 0.1, 0.5, 2.0] {
        let cfg = SolverConfig::new(1e-6, 100_000).unwrap();
        let a = lasso_solve(&id, &y, lambda, &cfg).unwrap();
        let b = soft_threshold(&y, lambda).unwrap();
        lasso = lasso.max((a - b).amax());
    }

    let grad = GradientOperator::square(8);
    let img = DVector::from_fn(64, |i, _| ((i * 37) % 11) as f64 / 10.0);
    let cfg = SolverConfig::tv();
    let small = tv_denoise(&grad, &img, 1e-8, &cfg).unwrap();
    let large = tv_denoise(&grad, &img, 1e3, &cfg).unwrap();
    let tv_lo = (small.image - &img).amax();
    let tv_hi = large.image.add_scalar(-img.mean()).amax();

    let pass = tik <= 1e-10 && lw <= 1e-10 && lasso <= 1e-5 && tv_lo <= 1e-3 && tv_hi <= 1e-3;
    outcome(
        pass,
        format!(
            "tikhonov {tik:.1e}, landweber {lw:.1e}, lasso {lasso:.1e}, tv small {tv_lo:.1e}, tv large {tv_hi:.1e}"
        ),
    )
}

fn rate_reproduction() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for s in ["0.5", "1"] {
        let cfg = config(&[("s", s), ("tau", "1e-4:1e-1:10"), ("n-mc", "500"), ("seed", "1")]);
        let rows = run_rate_study(&cfg).unwrap();
        for label in ["tikhonov", "landweber"] {
            let ratios: Vec<f64> = rows.iter().filter(|r| r.label == label).map(|r| r.ratio).collect();
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            let spread = max / min;
            let trend = ratios[ratios.len() - 1] / ratios[0];
            pass &= spread < 10.0 && trend > 0.1;
            details.push(format!("s={s} {label}: max/min {spread:.2}, last/first {trend:.2}"));
        }
    }
    outcome(pass, details.join("; "))
}

fn erm_bound_validity() -> Outcome {
    let cfg = config(&[
        ("filter", "tikhonov"),
        ("s", "0.5"),
        ("tau", "0.01"),
        ("n", "50"),
        ("grid", "1e-4:100:500"),
        ("eta", "0.05"),
        ("trials", "200"),
        ("n-mc", "5000"),
        ("seed", "2"),
    ]);
    let r = &run_bound_check(&cfg).unwrap()[0];
    outcome(
        r.failure_rate() <= 0.05,
        format!(
            "{} of {} trials violate; oracle risk {:.4}, additive term {:.4}",
            r.failures,
            r.trials.len(),
            r.oracle_risk,
            r.additive_term
        ),
    )
}

fn plateau() -> Outcome {
    let cfg = config(&[("n", "20,100"), ("trials", "30"), ("n-mc", "500"), ("seed", "3")]);
    let mut pass = true;
    let mut details = Vec::new();
    for r in run_plateau_study(&cfg).unwrap() {
        let (m20, m100) = (r.mean_at(20).unwrap(), r.mean_at(100).unwrap());
        let p = TheoryParams {
            loss_bound: r.loss_bound,
            n: 20,
            grid_size: r.grid_size,
            eta: cfg.eta,
            ..TheoryParams::default()
        };
        let additive = erm_bound(0.0, 0.0, &p).unwrap();
        let ok = m100 <= 1.5 * m20
            && m20 <= 1.5 * m100
            && m20 - r.oracle_risk < additive
            && m100 - r.oracle_risk < additive;
        pass &= ok;
        details.push(format!(
            "{}: L(20) {m20:.5}, L(100) {m100:.5}, oracle {:.5}, additive {additive:.3}",
            r.label, r.oracle_risk
        ));
    }
    outcome(pass, details.join("; "))
}

fn quasi_optimality() -> Outcome {
    let cfg = config(&[("trials", "30"), ("seed", "4")]);
    let (_, summaries) = run_qo_comparison(&cfg).unwrap();
    let wanted = [("tikhonov", vec![1e-2, 1e-1, 0.5]), ("landweber", vec![1e-3, 1e-2])];
    let mut pass = true;
    let mut details = Vec::new();
    for (label, taus) in &wanted {
        let negative = summaries
            .iter()
            .filter(|s| s.label == *label && taus.iter().any(|t| (s.tau - t).abs() < 1e-12))
            .filter(|s| s.mean < 0.0)
            .count();
        pass &= negative >= 2.min(taus.len());
        details.push(format!("{label}: {negative}/{} negative", taus.len()));
    }
    let means: Vec<String> = summaries
        .iter()
        .map(|s| format!("{}@{}={:+.4}", s.label, s.tau, s.mean))
        .collect();
    details.push(means.join(" "));
    outcome(pass, details.join("; "))
}

fn sparse_vector(rng: &mut SampleRng) -> DVector<f64> {
    DVector::from_fn(6, |_, _| match rng.random_range(0..3) {
        0 => 0.0,
        _ => rng.sample::<f64, _>(StandardNormal),
    })
}

fn bregman_properties() -> Outcome {
    let mut rng = MasterSeed(5).stream(Role::Trial, 0);
    let mut min_l1 = f64::INFINITY;
    let mut iff_ok = true;
    for _ in 0..10_000 {
        let (x, r) = (sparse_vector(&mut rng), sparse_vector(&mut rng));
        let d = bregman_l1(&x, &r).unwrap();
        min_l1 = min_l1.min(d);
        let compatible = x.iter().zip(r.iter()).all(|(a, b)| *a == 0.0 || (*b != 0.0 && a.signum() == b.signum()));
        iff_ok &= (d == 0.0) == compatible;
    }

    let grad = GradientOperator::square(8);
    let cfg = SolverConfig::tv();
    let mut min_tv = f64::INFINITY;
    for _ in 0..100 {
        let truth = DVector::from_fn(64, |_, _| rng.random::<f64>());
        let y = &truth + DVector::from_fn(64, |_, _| 0.2 * rng.sample::<f64, _>(StandardNormal));
        let lambda = 10f64.powf(rng.random_range(-3.0..0.0));
        let sol = tv_denoise(&grad, &y, lambda, &cfg).unwrap();
        min_tv = min_tv.min(bregman_tv(&grad, &truth, &sol.image, &sol.eta).unwrap());
    }
    outcome(
        min_l1 >= 0.0 && iff_ok && min_tv >= -1e-6,
        format!("min l1 {min_l1:.2e}, zero iff sign-compatible: {iff_ok}, min tv {min_tv:.2e}"),
    )
}

fn theory_formulas() -> Outcome {
    let params = [
        TheoryParams::default(),
        TheoryParams {
            tau: 0.25,
            beta: 2.0,
            s: 1.0,
            alpha: 1.0,
            c0: 0.3,
            ..TheoryParams::default()
        },
        TheoryParams {
            tau: 1e-3,
            beta: 0.5,
            alpha: 0.25,
            c1: 2.0,
            c2: 0.5,
            ..TheoryParams::default()
        },
    ];
    let mut beats = true;
    let mut worst_cq: f64 = 0.0;
    for p in &params {
        for family in [BoundFamily::Spectral, BoundFamily::Convex, BoundFamily::Nonlinear] {
            let (ls, us) = family.optimal(p).unwrap();
            let grid = build_grid(ls * 1e-3, ls * 1e3, 10_000).unwrap();
            for &l in grid.values() {
                beats &= us <= family.bound(l, p).unwrap() * (1.0 + 1e-12);
            }
            for q in [1.0, 1.5, 2.0, 5.0] {
                let lhs = family.bound(q * ls, p).unwrap();
                let rhs = cq_factor(family, q, p.alpha).unwrap() * us;
                worst_cq = worst_cq.max((lhs - rhs).abs() / rhs);
            }
        }
    }
    let example = erm_bound(0.0, 1.0, &TheoryParams::default()).unwrap();
    outcome(
        beats && worst_cq <= 1e-10 && (example - 5.1498).abs() <= 1e-3,
        format!("optimum beats grid: {beats}, max C(q) error {worst_cq:.1e}, erm example {example:.4}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_regparam");
    let common = ["--d", "12", "--n-mc", "40", "--trials", "4", "--seed", "9"];
    let cases: &[&[&str]] = &[
        &["generate", "--n", "5"],
        &["risk-curve", "--grid", "1e-3:1:20"],
        &["rate-study", "--tau", "1e-3:1e-1:3", "--dense-points", "50"],
        &["noise-study", "--tau", "0.01,0.1", "--grid", "1e-3:1:20", "--dense-points", "50"],
        &["plateau-study", "--n", "3,6", "--grid", "1e-3:1:20"],
        &["compare-qo", "--n-train", "30", "--n-test", "5"],
        &["bound-check", "--grid", "1e-3:1:20"],
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut failed = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{i}_{run}"));
            let status = Command::new(bin)
                .args(case.iter().chain(common.iter()))
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                failed.push(case[0].to_string());
            }
            outputs.push(read_dir_sorted(&out));
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            failed.push(case[0].to_string());
        }
    }
    let detail = if failed.is_empty() {
        format!("{} subcommands byte-identical across two runs", cases.len())
    } else {
        format!("differing or failing: {}", failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut files: Vec<_> = entries
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("grid ratios", grid_ratios),
        ("closed-form solver oracles", solver_oracles),
        ("rate reproduction", rate_reproduction),
        ("ERM oracle inequality", erm_bound_validity),
        ("plateau", plateau),
        ("quasi-optimality comparison", quasi_optimality),
        ("Bregman properties", bregman_properties),
        ("theory formulas", theory_formulas),
        ("CLI determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let r = check();
        if !r.pass {
            failures += 1;
        }
        println!(
            "{} criterion {id} ({name}): {} [{:.1}s]",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
