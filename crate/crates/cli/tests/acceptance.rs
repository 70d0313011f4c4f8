//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use hgld::fitting::{nmle_fit, percentile_stats, sample_moments, sample_percentile, OptimizerConfig};
use hgld::gpd::{gpd_glm_fit, gpd_mle_fit, gpd_residuals, GpdParams};
use hgld::hurdle::{fit_hurdle, hurdle_sample, HurdleGldParams};
use hgld::regression::{
    gld_regression_fit, hurdle_regression_fit, lambda1_star, logistic_fit, quantile_type8,
    DesignMatrix,
};
use hgld::simulation::{run_study, simulate_model, Scenario, StudyConfig, COEFFICIENT_NAMES};
use hgld::{Gld, GldParams, Parametrization};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::Rng;

type Q = Ratio<i64>;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Written to the stderr handle directly so the lines show up without
/// `--nocapture`.
fn report(n: usize, o: &Outcome) {
    let line = format!("criterion {n}: {} - {}\n", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    std::io::stderr().write_all(line.as_bytes()).unwrap();
}

fn study(scenario: Scenario, n: usize, replicates: usize, seed: u64) -> hgld::simulation::StudySummary {
    run_study(&StudyConfig {
        scenario,
        n,
        replicates,
        seed,
        optimizer: OptimizerConfig::default(),
        max_failure_rate: 0.2,
    })
    .expect("study runs")
}

fn simulation_reproduction() -> Outcome {
    let s = study(Scenario::HrsSymmetric, 1000, 200, 20_240_601);
    let b0 = s.coefficient("nonzero", "intercept").unwrap();
    let g0 = s.coefficient("zero", "intercept").unwrap();
    let se = b0.se.unwrap();
    let pass = (b0.mean - 6.130).abs() <= 0.01
        && (se - 0.022).abs() <= 0.3 * 0.022
        && (g0.mean - 1.611).abs() <= 0.05;
    Outcome {
        pass,
        detail: format!(
            "non-zero intercept mean {:.4} SE {:.4}, zero intercept mean {:.4}, failed {}",
            b0.mean, se, g0.mean, s.failed
        ),
    }
}

fn consistency_trend() -> Outcome {
    let sizes = [100, 200, 1000];
    let mut violations = Vec::new();
    for sc in Scenario::ALL {
        let runs: Vec<_> = sizes.iter().map(|&n| study(sc, n, 100, 77)).collect();
        for part in ["nonzero", "zero"] {
            for name in COEFFICIENT_NAMES {
                let sds: Vec<f64> = runs
                    .iter()
                    .map(|r| r.coefficient(part, name).unwrap().se.unwrap())
                    .collect();
                if !(sds[0] > sds[1] && sds[1] > sds[2]) {
                    violations.push(format!("{sc} {part} {name}: {sds:.4?}"));
                }
            }
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: if violations.is_empty() {
            "SD decreases with n for all 24 coefficient series".into()
        } else {
            violations.join("; ")
        },
    }
}

fn lambda1_cross_check() -> Outcome {
    let l = lambda1_star(0.11, 0.0023, 0.19, Parametrization::Rs).unwrap();
    Outcome {
        pass: (l + 1.43).abs() <= 0.005,
        detail: format!("lambda1* = {l:.5}"),
    }
}

fn distribution_core() -> Outcome {
    let mut worst_round_trip: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    for p in common::parameter_set() {
        let g = Gld::new(p).unwrap();
        worst_round_trip = worst_round_trip.max(common::round_trip_error(&g));
        worst_mass = worst_mass.max((common::pdf_mass(&g) - 1.0).abs());
        for k in 1..=4 {
            let exact = g.raw_moment(k as u32).unwrap();
            let oracle = common::raw_moment_oracle(&p, k);
            let scale = common::tanh_sinh01(|u, v| common::quantile_oracle(&p, u, v).abs().powi(k));
            worst_moment = worst_moment.max((exact - oracle).abs() / scale);
        }
    }
    Outcome {
        pass: worst_round_trip <= 1e-10 && worst_mass <= 1e-6 && worst_moment <= 1e-8,
        detail: format!(
            "max |F(Q(u)) - u| {worst_round_trip:.2e}, max |mass - 1| {worst_mass:.2e}, max relative moment gap {worst_moment:.2e}"
        ),
    }
}

fn percentile_exact(sorted: &[Q], p: Q) -> Q {
    let pos = Q::from_integer(sorted.len() as i64 + 1) * p;
    let r = pos.floor();
    let ri = r.to_integer() as usize;
    if ri == sorted.len() {
        return sorted[ri - 1];
    }
    sorted[ri - 1] + (pos - r) * (sorted[ri] - sorted[ri - 1])
}

fn oracle_equivalence() -> Outcome {
    let q = |n, d| Q::new(n, d);
    let f = |r: Q| r.to_f64().unwrap();
    let x: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    let xq: Vec<Q> = (1..=10).map(Q::from_integer).collect();
    let mut mismatches = Vec::new();
    let mut check = |what: &str, got: f64, want: Q| {
        if got != f(want) {
            mismatches.push(format!("{what}: {got} vs {want}"));
        }
    };

    check("percentile 0.5", sample_percentile(&x, 0.5).unwrap(), q(11, 2));
    check("percentile 0.1", sample_percentile(&x, 0.1).unwrap(), q(11, 10));
    let pi = |p: Q| percentile_exact(&xq, p);
    let s = percentile_stats(&x, 0.1).unwrap();
    let (med, lo, hi) = (pi(q(1, 2)), pi(q(1, 10)), pi(q(9, 10)));
    check("rho1", s.rho1, med);
    check("rho2", s.rho2, hi - lo);
    check("rho3", s.rho3, (med - lo) / (hi - med));
    check("rho4", s.rho4, (pi(q(3, 4)) - pi(q(1, 4))) / (hi - lo));
    let m = sample_moments(&[-1.0, 0.0, 1.0]).unwrap();
    check("mean", m.mean, q(0, 1));
    check("variance", m.variance, q(2, 3));
    check("skewness", m.skewness, q(0, 1));
    check("kurtosis", m.kurtosis, q(3, 2));
    check("type8", quantile_type8(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), q(5, 2));
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "15 fixture values equal their rational evaluations".into()
        } else {
            mismatches.join("; ")
        },
    }
}

fn recovery() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (truth, seed) in [
        (GldParams::rs(0.0, 0.2, 0.15, 0.15), 101),
        (GldParams::fkml(0.0, 2.0, 0.13, 0.13), 102),
    ] {
        let x = Gld::new(truth).unwrap().sample(5000, &mut common::rng(seed));
        let fit = nmle_fit(&x, truth.parametrization, &OptimizerConfig::default()).unwrap();
        let g = Gld::new(fit.params).unwrap();
        let (_, p) = common::ks_test(&x, |v| g.cdf(v));
        pass &= p > 0.01;
        lines.push(format!("{} KS p {p:.3}", truth.parametrization));
    }
    // Four asymptotic standard errors: (1 + xi)/sqrt(n) and tau sqrt(2(1 + xi)/n).
    for (tau, xi, seed) in [(1.8, -0.22, 103), (2.0, 0.3, 104)] {
        let n = 5000.0;
        let truth = GpdParams::new(1.0, tau, xi).unwrap();
        let x = truth.sample(5000, &mut common::rng(seed));
        let fit = gpd_mle_fit(&x, 1.0, &OptimizerConfig::default()).unwrap();
        let tol_xi = 4.0 * (1.0 + xi) / f64::sqrt(n);
        let tol_tau = 4.0 * tau * f64::sqrt(2.0 * (1.0 + xi) / n);
        pass &= (fit.params.xi - xi).abs() < tol_xi && (fit.params.tau - tau).abs() < tol_tau;
        lines.push(format!(
            "GPD(tau {tau}, xi {xi}) -> ({:.3}, {:.3})",
            fit.params.tau, fit.params.xi
        ));
    }
    Outcome {
        pass,
        detail: lines.join(", "),
    }
}

fn hurdle_exactness() -> Outcome {
    let cfg = OptimizerConfig {
        n_candidates: 2000,
        ..Default::default()
    };
    let params = HurdleGldParams {
        lambda0: 0.35,
        continuous: GldParams::fkml(3.0, 2.0, 0.2, 0.1),
    };
    let x = hurdle_sample(&params, 700, &mut common::rng(105)).unwrap();
    let fit = fit_hurdle(&x, Parametrization::Fkml, &cfg).unwrap();
    let zeros = x.iter().filter(|&&v| v == 0.0).count();
    let nz: Vec<f64> = x.iter().copied().filter(|&v| v != 0.0).collect();
    let share_ok = fit.lambda0 == zeros as f64 / x.len() as f64;
    let gld_ok = fit.continuous.unwrap() == nmle_fit(&nz, Parametrization::Fkml, &cfg).unwrap();

    let d = simulate_model(Scenario::HrsSymmetric, 600, &mut common::rng(106));
    let w = DesignMatrix::with_intercept(&[&d.x1, &d.x2], 600).unwrap();
    let reg = hurdle_regression_fit(&w, &w, &d.y, Parametrization::Rs, &cfg, None).unwrap();
    let v: Vec<bool> = d.y.iter().map(|&y| y == 0.0).collect();
    let w_nz = w.select_rows(|i| !v[i]);
    let y_nz: Vec<f64> = d.y.iter().copied().filter(|&y| y != 0.0).collect();
    let zero_ok = reg.zero_part == logistic_fit(&w, &v);
    let nonzero_ok = reg.nonzero_part == gld_regression_fit(&w_nz, &y_nz, Parametrization::Rs, &cfg).unwrap();
    Outcome {
        pass: share_ok && gld_ok && zero_ok && nonzero_ok,
        detail: format!(
            "lambda0 exact {share_ok}, GLD part identical {gld_ok}, logistic part identical {zero_ok}, regression part identical {nonzero_ok}"
        ),
    }
}

fn gpd_residual_law() -> Outcome {
    let n = 5000;
    let (xi, beta) = (0.2, [1.5, -0.4]);
    let mut r = common::rng(107);
    let x: Vec<f64> = (0..n).map(|_| 2.0 * r.random::<f64>()).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&xv| {
            let mu = (beta[0] + beta[1] * xv).exp();
            let tau = mu * (1.0 - xi);
            tau * ((1.0 - r.random::<f64>()).powf(-xi) - 1.0) / xi
        })
        .collect();
    let w = DesignMatrix::with_intercept(&[&x], n).unwrap();
    let fit = gpd_glm_fit(&w, &y, 0.0, &OptimizerConfig::default()).unwrap();
    let res = gpd_residuals(&fit, &w, &y).unwrap();
    let reference = fit.error_reference();
    let (_, p) = common::ks_test(&res.error, |e| reference.cdf(e));
    Outcome {
        pass: p > 0.01,
        detail: format!("xi hat {:.3}, KS p {p:.3}", fit.xi),
    }
}

fn read_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timing.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = simulate_model(Scenario::HrsSkewed, 300, &mut common::rng(108));
    let mut body = String::from("y,x1,x2\n");
    for i in 0..d.y.len() {
        body.push_str(&format!("{},{},{}\n", d.y[i], d.x1[i], d.x2[i]));
    }
    let input = dir.path().join("data.csv");
    fs::write(&input, &body).unwrap();
    let input = input.to_str().unwrap().to_string();
    // The single-part commands get the non-zero rows.
    let positive: String = body.lines().filter(|l| !l.starts_with("0,")).map(|l| format!("{l}\n")).collect();
    let positive_input = dir.path().join("positive.csv");
    fs::write(&positive_input, positive).unwrap();
    let positive_input = positive_input.to_str().unwrap().to_string();

    let data_args = ["--input", &input, "--response", "y", "--candidates", "2000", "--seed", "11"];
    let positive_args = ["--input", &positive_input, "--response", "y", "--candidates", "2000", "--seed", "11"];
    let covariates = ["--covariates", "x1,x2", "--replicates", "8"];
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("fit", positive_args.to_vec()),
        ("fit-hurdle", data_args.to_vec()),
        ("fit-gpd", data_args.to_vec()),
        ("compare", data_args.to_vec()),
        ("regress", [&positive_args[..], &covariates[..]].concat()),
        ("hurdle-regress", [&data_args[..], &covariates[..]].concat()),
        ("hurdle-regress-gpd", [&data_args[..], &covariates[..]].concat()),
        (
            "simulate",
            vec!["--scenario", "HFKML-skewed", "--sizes", "100,150", "--replicates", "4", "--candidates", "1000", "--seed", "11"],
        ),
    ];
    let mut failures = Vec::new();
    for (cmd, args) in &runs {
        let out = dir.path().join(cmd);
        let out_arg = out.to_str().unwrap();
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let status = Command::new(env!("CARGO_BIN_EXE_hgld"))
                .arg(cmd)
                .args(args)
                .args(["--out", out_arg])
                .output()
                .unwrap();
            if !status.status.success() {
                failures.push(format!("{cmd} exited {:?}", status.status.code()));
            }
            outputs.push(read_outputs(&out));
            fs::remove_dir_all(&out).unwrap();
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            failures.push(format!("{cmd} outputs differ"));
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{} commands produced byte-identical outputs on repeat", runs.len())
        } else {
            failures.join("; ")
        },
    }
}

#[test]
fn acceptance() {
    let checks: [(usize, fn() -> Outcome); 9] = [
        (1, simulation_reproduction),
        (2, consistency_trend),
        (3, lambda1_cross_check),
        (4, distribution_core),
        (5, oracle_equivalence),
        (6, recovery),
        (7, hurdle_exactness),
        (8, gpd_residual_law),
        (9, determinism),
    ];
    let mut failed = Vec::new();
    for (n, check) in checks {
        let o = check();
        report(n, &o);
        if !o.pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
