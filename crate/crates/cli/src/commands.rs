use hgld::fitting::{nmle_fit, FitResult, OptimizerConfig};
use hgld::gpd::{
    gpd_residuals, hurdle_gpd_fit, hurdle_gpd_regression_fit, GpdFit, GpdGlmFit, GpdParams,
};
use hgld::hurdle::fit_hurdle;
use hgld::regression::{
    gld_regression_fit, hurdle_regression_fit, regression_residuals, simulate_coefficient_cis,
    CiOptions, CoefficientCi, DesignMatrix, LogisticFit, RegressionFit,
};
use hgld::simulation::{run_study, Scenario, StudyConfig, StudySummary};
use hgld::{Gld, Parametrization};
use serde::Serialize;

use crate::data::{ingest, transform, Dataset};
use crate::error::CliError;
use crate::output::{Manifest, OutDir, TIMING_FILE};
use crate::report::{
    density_bundle, histogram_table, normal_qq_table, qq_table, DensityDiagnostics, Reference,
};
use crate::{Cli, Command};

/// Interval replicates of the regression commands when --replicates is absent.
pub const DEFAULT_CI_REPLICATES: usize = 200;
/// Simulation replicates when --replicates is absent.
pub const DEFAULT_SIM_REPLICATES: usize = 1000;
const MAX_FAILURE_RATE: f64 = 0.2;

pub struct Outcome {
    pub out: OutDir,
    /// Fits that finished without meeting their convergence test.
    pub unconverged: Vec<String>,
}

struct Run<'a> {
    cli: &'a Cli,
    out: OutDir,
    unconverged: Vec<String>,
    rows: Option<(usize, usize)>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(CliError::Input(format!("--alpha must lie in (0, 1), got {}", cli.alpha)));
    }
    let mut run = Run {
        cli,
        out: OutDir::create(&cli.out)?,
        unconverged: Vec::new(),
        rows: None,
    };
    let status = match &cli.command {
        Command::Fit => run.fit(),
        Command::FitHurdle => run.fit_hurdle(),
        Command::Regress => run.regress(),
        Command::HurdleRegress => run.hurdle_regress(),
        Command::FitGpd => run.fit_gpd(),
        Command::HurdleRegressGpd => run.hurdle_regress_gpd(),
        Command::Compare => run.compare(),
        Command::Simulate { scenario, sizes } => run.simulate(scenario, sizes),
    };
    let manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        config: cli,
        rows_used: run.rows.map(|r| r.0),
        rows_dropped: run.rows.map(|r| r.1),
        outputs: run.out.files().to_vec(),
        timing_file: TIMING_FILE,
        error: status.as_ref().err().map(|e| e.to_string()),
    };
    run.out.write_json("manifest.json", &manifest)?;
    status?;
    Ok(Outcome {
        out: run.out,
        unconverged: run.unconverged,
    })
}

fn nonzero(y: &[f64]) -> Vec<f64> {
    y.iter().copied().filter(|&v| v != 0.0).collect()
}

fn smallest(values: &[f64]) -> Result<f64, CliError> {
    values
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| CliError::Input("no non-zero responses".into()))
}

fn gld_functions(params: hgld::GldParams) -> Result<(impl Fn(f64) -> f64, impl Fn(f64) -> f64), CliError> {
    let g = Gld::new(params)?;
    let q = g.clone();
    Ok((
        move |x| g.pdf(x),
        move |u| q.quantile(u).unwrap_or(f64::NAN),
    ))
}

fn gpd_functions(params: GpdParams) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    (move |x| params.pdf(x), move |u| params.quantile(u).unwrap_or(f64::NAN))
}

fn tag(par: Parametrization) -> &'static str {
    match par {
        Parametrization::Rs => "rs",
        Parametrization::Fkml => "fkml",
    }
}

#[derive(Serialize)]
struct GldReport {
    #[serde(flatten)]
    fit: FitResult,
    diagnostics: DensityDiagnostics,
}

#[derive(Serialize)]
struct FitDocument {
    n: usize,
    fits: Vec<GldReport>,
}

#[derive(Serialize)]
struct HurdleDocument<T: Serialize> {
    n: usize,
    zero_count: usize,
    lambda0: f64,
    fits: Vec<T>,
}

#[derive(Serialize)]
struct GpdReport {
    #[serde(flatten)]
    fit: GpdFit,
    threshold_default: bool,
    diagnostics: DensityDiagnostics,
}

/// The zero part either as a fit or as the reason it is missing.
#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum ZeroPart {
    Fit(LogisticFit),
    Unavailable(String),
}

impl From<hgld::Result<LogisticFit>> for ZeroPart {
    fn from(r: hgld::Result<LogisticFit>) -> Self {
        match r {
            Ok(f) => ZeroPart::Fit(f),
            Err(e) => ZeroPart::Unavailable(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Interval {
    name: String,
    estimate: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Intervals {
    Simulated {
        alpha: f64,
        replicates: usize,
        failed: usize,
        intervals: Vec<Interval>,
    },
    Skipped(String),
}

#[derive(Serialize)]
struct RegressionReport {
    coefficient_names: Vec<String>,
    #[serde(flatten)]
    fit: RegressionFit,
    intervals: Intervals,
    error_diagnostics: Option<DensityDiagnostics>,
}

#[derive(Serialize)]
struct HurdleRegressionDocument<T: Serialize> {
    n: usize,
    zero_count: usize,
    zero_coefficient_names: Vec<String>,
    zero_part: ZeroPart,
    fits: Vec<T>,
}

#[derive(Serialize)]
struct GpdRegressionReport {
    coefficient_names: Vec<String>,
    threshold_default: bool,
    #[serde(flatten)]
    fit: GpdGlmFit,
    error_reference: GpdParams,
}

#[derive(Serialize)]
struct CompareRow {
    model: String,
    #[serde(flatten)]
    distances: hgld::diagnostics::DistanceReport,
}

#[derive(Serialize)]
struct CompareDocument {
    n_nonzero: usize,
    bandwidth: hgld::diagnostics::Bandwidth,
    gld_fits: Vec<FitResult>,
    gpd_fit: GpdFit,
    distances: Vec<CompareRow>,
}

#[derive(Serialize)]
struct SimulationDocument {
    replicates: usize,
    seed: u64,
    studies: Vec<StudySummary>,
}

impl Run<'_> {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            n_candidates: self.cli.candidates,
            ..Default::default()
        }
    }

    fn load(&mut self, covariates: &[String]) -> Result<Dataset, CliError> {
        let input = self
            .cli
            .input
            .as_ref()
            .ok_or_else(|| CliError::Input("--input is required".into()))?;
        let response = self
            .cli
            .response
            .as_deref()
            .ok_or_else(|| CliError::Input("--response is required".into()))?;
        let mut data = ingest(input, response, covariates)?;
        data.response = transform(&data.response, self.cli.truncate, self.cli.log)?;
        self.rows = Some((data.len(), data.dropped));
        Ok(data)
    }

    fn zero_covariates(&self) -> Vec<String> {
        self.cli
            .zero_covariates
            .clone()
            .unwrap_or_else(|| self.cli.covariates.clone())
    }

    fn check(&mut self, label: String, converged: bool) {
        if !converged {
            self.unconverged.push(label);
        }
    }

    fn gld_report(&mut self, prefix: &str, fit: FitResult, reference: &Reference) -> Result<GldReport, CliError> {
        self.check(format!("{prefix} fit"), fit.converged);
        let (pdf, quantile) = gld_functions(fit.params)?;
        let diagnostics = density_bundle(&mut self.out, prefix, reference, pdf, quantile)?;
        Ok(GldReport { fit, diagnostics })
    }

    fn fit(&mut self) -> Result<(), CliError> {
        let data = self.load(&[])?;
        let y = data.response;
        let reference = Reference::new(&y)?;
        histogram_table(&mut self.out, "histogram.csv", &y)?;
        let mut fits = Vec::new();
        for par in self.cli.parametrization.list() {
            let fit = nmle_fit(&y, par, &self.optimizer())?;
            fits.push(self.gld_report(tag(par), fit, &reference)?);
        }
        self.out.write_json("result.json", &FitDocument { n: y.len(), fits })
    }

    fn fit_hurdle(&mut self) -> Result<(), CliError> {
        let data = self.load(&[])?;
        let y = data.response;
        let z = nonzero(&y);
        let reference = Reference::new(&z)?;
        histogram_table(&mut self.out, "histogram.csv", &z)?;
        let mut fits = Vec::new();
        let mut head = None;
        for par in self.cli.parametrization.list() {
            let fit = fit_hurdle(&y, par, &self.optimizer())?;
            head = Some((fit.n, fit.zero_count, fit.lambda0));
            fits.push(self.gld_report(tag(par), fit.continuous?, &reference)?);
        }
        let (n, zero_count, lambda0) = head.expect("at least one parametrization");
        self.out.write_json(
            "result.json",
            &HurdleDocument {
                n,
                zero_count,
                lambda0,
                fits,
            },
        )
    }

    fn fit_gpd(&mut self) -> Result<(), CliError> {
        let data = self.load(&[])?;
        let y = data.response;
        let z = nonzero(&y);
        let alpha = match self.cli.gpd_threshold {
            Some(a) => a,
            None => smallest(&z)?,
        };
        let reference = Reference::new(&z)?;
        histogram_table(&mut self.out, "histogram.csv", &z)?;
        let fit = hurdle_gpd_fit(&y, alpha, &self.optimizer())?;
        let cont = fit.continuous?;
        self.check("gpd fit".into(), cont.converged);
        let (pdf, quantile) = gpd_functions(cont.params);
        let diagnostics = density_bundle(&mut self.out, "gpd", &reference, pdf, quantile)?;
        self.out.write_json(
            "result.json",
            &HurdleDocument {
                n: fit.n,
                zero_count: fit.zero_count,
                lambda0: fit.lambda0,
                fits: vec![GpdReport {
                    fit: cont,
                    threshold_default: self.cli.gpd_threshold.is_none(),
                    diagnostics,
                }],
            },
        )
    }

    fn design(&self, data: &Dataset, names: &[String], keep: &[bool]) -> Result<DesignMatrix, CliError> {
        let n = keep.iter().filter(|&&k| k).count();
        let cols: Vec<Vec<f64>> = names
            .iter()
            .map(|c| {
                let col = data.column(c).expect("ingested column");
                col.iter().zip(keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        Ok(DesignMatrix::with_intercept(&refs, n)?)
    }

    fn ci_options(&self) -> CiOptions {
        CiOptions {
            n_reps: self.cli.replicates.unwrap_or(DEFAULT_CI_REPLICATES),
            alpha: self.cli.alpha,
            seed: self.cli.seed,
            max_failure_rate: MAX_FAILURE_RATE,
        }
    }

    /// Intervals, residual tables and error-density diagnostics of one GLD
    /// regression fit.
    fn regression_report(
        &mut self,
        prefix: &str,
        names: &[String],
        fit: RegressionFit,
        w: &DesignMatrix,
        y: &[f64],
    ) -> Result<RegressionReport, CliError> {
        self.check(format!("{prefix} regression"), fit.converged);
        let options = self.ci_options();
        let intervals = if options.n_reps == 0 {
            Intervals::Skipped("disabled".into())
        } else if !fit.converged {
            Intervals::Skipped("point estimate did not converge".into())
        } else {
            match simulate_coefficient_cis(&fit, w, &self.optimizer(), &options) {
                Ok(ci) => self.interval_report(prefix, names, &ci)?,
                Err(e) => {
                    self.unconverged.push(format!("{prefix} intervals: {e}"));
                    Intervals::Skipped(e.to_string())
                }
            }
        };

        let res = regression_residuals(&fit, w, y)?;
        self.out.write_csv(
            &format!("{prefix}_residuals.csv"),
            &["error", "quantile", "outside_support"],
            res.error
                .iter()
                .zip(&res.quantile)
                .zip(&res.outside_support)
                .map(|((&e, &q), &o)| vec![e, q, if o { 1.0 } else { 0.0 }]),
        )?;
        normal_qq_table(&mut self.out, &format!("{prefix}_residual_qq.csv"), &res.quantile)?;
        let error_diagnostics = match Reference::new(&res.error) {
            Ok(reference) => {
                let (pdf, quantile) = gld_functions(fit.error_params())?;
                Some(density_bundle(
                    &mut self.out,
                    &format!("{prefix}_error"),
                    &reference,
                    pdf,
                    quantile,
                )?)
            }
            Err(_) => None,
        };
        Ok(RegressionReport {
            coefficient_names: names.to_vec(),
            fit,
            intervals,
            error_diagnostics,
        })
    }

    fn interval_report(&mut self, prefix: &str, names: &[String], ci: &CoefficientCi) -> Result<Intervals, CliError> {
        let header: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let reps = ci.intervals.first().map_or(0, |i| i.samples.len());
        self.out.write_csv(
            &format!("{prefix}_ci_samples.csv"),
            &header,
            (0..reps).map(|r| ci.intervals.iter().map(|i| i.samples[r]).collect()),
        )?;
        Ok(Intervals::Simulated {
            alpha: ci.alpha,
            replicates: ci.n_reps,
            failed: ci.failed,
            intervals: names
                .iter()
                .zip(&ci.intervals)
                .map(|(name, i)| Interval {
                    name: name.clone(),
                    estimate: i.estimate,
                    lower: i.lower,
                    upper: i.upper,
                })
                .collect(),
        })
    }

    fn coefficient_names(names: &[String]) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain(names.iter().cloned())
            .collect()
    }

    fn regress(&mut self) -> Result<(), CliError> {
        let covariates = self.cli.covariates.clone();
        let data = self.load(&covariates)?;
        let all = vec![true; data.len()];
        let w = self.design(&data, &covariates, &all)?;
        let y = data.response.clone();
        let names = Self::coefficient_names(&covariates);
        let mut fits = Vec::new();
        for par in self.cli.parametrization.list() {
            let fit = gld_regression_fit(&w, &y, par, &self.optimizer())?;
            fits.push(self.regression_report(tag(par), &names, fit, &w, &y)?);
        }
        #[derive(Serialize)]
        struct Doc {
            n: usize,
            fits: Vec<RegressionReport>,
        }
        self.out.write_json("result.json", &Doc { n: y.len(), fits })
    }

    fn hurdle_regress(&mut self) -> Result<(), CliError> {
        let covariates = self.cli.covariates.clone();
        let zero_covariates = self.zero_covariates();
        let mut wanted = covariates.clone();
        wanted.extend(zero_covariates.iter().filter(|c| !covariates.contains(c)).cloned());
        let data = self.load(&wanted)?;
        let all = vec![true; data.len()];
        let w = self.design(&data, &covariates, &all)?;
        let z = self.design(&data, &zero_covariates, &all)?;
        let y = data.response.clone();
        let keep: Vec<bool> = y.iter().map(|&v| v != 0.0).collect();
        let w_nz = self.design(&data, &covariates, &keep)?;
        let y_nz = nonzero(&y);
        let names = Self::coefficient_names(&covariates);

        let mut fits = Vec::new();
        let mut head = None;
        for par in self.cli.parametrization.list() {
            let fit = hurdle_regression_fit(&w, &z, &y, par, &self.optimizer(), None)?;
            if let (None, Ok(zp)) = (&head, &fit.zero_part) {
                self.check("zero part".into(), zp.converged);
            }
            fits.push(self.regression_report(tag(par), &names, fit.nonzero_part, &w_nz, &y_nz)?);
            head.get_or_insert((fit.n, fit.zero_count, fit.zero_part));
        }
        let (n, zero_count, zero_part) = head.expect("at least one parametrization");
        self.out.write_json(
            "result.json",
            &HurdleRegressionDocument {
                n,
                zero_count,
                zero_coefficient_names: Self::coefficient_names(&zero_covariates),
                zero_part: zero_part.into(),
                fits,
            },
        )
    }

    fn hurdle_regress_gpd(&mut self) -> Result<(), CliError> {
        let covariates = self.cli.covariates.clone();
        let zero_covariates = self.zero_covariates();
        let mut wanted = covariates.clone();
        wanted.extend(zero_covariates.iter().filter(|c| !covariates.contains(c)).cloned());
        let data = self.load(&wanted)?;
        let all = vec![true; data.len()];
        let w = self.design(&data, &covariates, &all)?;
        let z = self.design(&data, &zero_covariates, &all)?;
        let y = data.response.clone();
        let keep: Vec<bool> = y.iter().map(|&v| v != 0.0).collect();
        let w_nz = self.design(&data, &covariates, &keep)?;
        let y_nz = nonzero(&y);
        let alpha = match self.cli.gpd_threshold {
            Some(a) => a,
            None => smallest(&y_nz)?,
        };

        let fit = hurdle_gpd_regression_fit(&w, &z, &y, alpha, &self.optimizer())?;
        if let Ok(zp) = &fit.zero_part {
            self.check("zero part".into(), zp.converged);
        }
        let glm = fit.nonzero_part;
        self.check("gpd regression".into(), glm.converged);
        if glm.converged {
            let res = gpd_residuals(&glm, &w_nz, &y_nz)?;
            self.out.write_csv(
                "gpd_residuals.csv",
                &["error", "excess", "quantile"],
                res.error
                    .iter()
                    .zip(&res.excess)
                    .zip(&res.quantile)
                    .map(|((&e, &x), &q)| vec![e, x, q]),
            )?;
            normal_qq_table(&mut self.out, "gpd_residual_qq.csv", &res.quantile)?;
            let reference = glm.error_reference();
            qq_table(&mut self.out, "gpd_excess_qq.csv", &res.excess, |u| {
                reference.quantile(u).unwrap_or(f64::NAN)
            })?;
        }
        let error_reference = glm.error_reference();
        self.out.write_json(
            "result.json",
            &HurdleRegressionDocument {
                n: fit.n,
                zero_count: fit.zero_count,
                zero_coefficient_names: Self::coefficient_names(&zero_covariates),
                zero_part: fit.zero_part.into(),
                fits: vec![GpdRegressionReport {
                    coefficient_names: Self::coefficient_names(&covariates),
                    threshold_default: self.cli.gpd_threshold.is_none(),
                    fit: glm,
                    error_reference,
                }],
            },
        )
    }

    fn compare(&mut self) -> Result<(), CliError> {
        let data = self.load(&[])?;
        let z = nonzero(&data.response);
        let reference = Reference::new(&z)?;
        let alpha = match self.cli.gpd_threshold {
            Some(a) => a,
            None => smallest(&z)?,
        };
        let xs = reference.xs();
        let mut columns: Vec<(String, Vec<f64>)> = vec![(
            "kde".into(),
            xs.iter().map(|&x| reference.estimate.evaluate(x)).collect(),
        )];
        let mut rows = Vec::new();
        let mut gld_fits = Vec::new();
        for par in self.cli.parametrization.list() {
            let fit = nmle_fit(&z, par, &self.optimizer())?;
            self.check(format!("{} fit", tag(par)), fit.converged);
            let (pdf, quantile) = gld_functions(fit.params)?;
            qq_table(&mut self.out, &format!("{}_qq.csv", tag(par)), &z, quantile)?;
            columns.push((tag(par).into(), xs.iter().map(|&x| pdf(x)).collect()));
            rows.push(CompareRow {
                model: par.to_string(),
                distances: reference.distances(pdf)?,
            });
            gld_fits.push(fit);
        }
        let gpd = hgld::gpd::gpd_mle_fit(&z, alpha, &self.optimizer())?;
        self.check("gpd fit".into(), gpd.converged);
        let (pdf, quantile) = gpd_functions(gpd.params);
        qq_table(&mut self.out, "gpd_qq.csv", &z, quantile)?;
        columns.push(("gpd".into(), xs.iter().map(|&x| pdf(x)).collect()));
        rows.push(CompareRow {
            model: "GPD".into(),
            distances: reference.distances(pdf)?,
        });

        let mut header = vec!["x"];
        header.extend(columns.iter().map(|(n, _)| n.as_str()));
        self.out.write_csv(
            "compare_density.csv",
            &header,
            xs.iter().enumerate().map(|(i, &x)| {
                std::iter::once(x).chain(columns.iter().map(|(_, c)| c[i])).collect()
            }),
        )?;
        self.out.write_labeled_csv(
            "distances.csv",
            &["model", "global", "l2", "linf"],
            rows.iter().map(|r| {
                (
                    vec![r.model.clone()],
                    vec![r.distances.global, r.distances.l2, r.distances.linf],
                )
            }),
        )?;
        histogram_table(&mut self.out, "histogram.csv", &z)?;
        self.out.write_json(
            "result.json",
            &CompareDocument {
                n_nonzero: z.len(),
                bandwidth: reference.bandwidth,
                gld_fits,
                gpd_fit: gpd,
                distances: rows,
            },
        )
    }

    fn simulate(&mut self, scenario: &str, sizes: &[usize]) -> Result<(), CliError> {
        let scenarios: Vec<Scenario> = if scenario.eq_ignore_ascii_case("all") {
            Scenario::ALL.to_vec()
        } else {
            vec![scenario.parse()?]
        };
        if sizes.is_empty() {
            return Err(CliError::Input("--sizes is empty".into()));
        }
        let replicates = self.cli.replicates.unwrap_or(DEFAULT_SIM_REPLICATES);
        let mut studies = Vec::new();
        for &sc in &scenarios {
            for &n in sizes {
                studies.push(run_study(&StudyConfig {
                    scenario: sc,
                    n,
                    replicates,
                    seed: self.cli.seed,
                    optimizer: self.optimizer(),
                    max_failure_rate: MAX_FAILURE_RATE,
                })?);
            }
        }
        self.out.write_labeled_csv(
            "simulation.csv",
            &["scenario", "part", "coefficient", "n", "target", "mean", "se", "p025", "p975", "failed"],
            studies.iter().flat_map(|s| {
                s.coefficients.iter().map(move |c| {
                    (
                        vec![s.scenario.to_string(), c.part.to_string(), c.name.to_string()],
                        vec![
                            s.n as f64,
                            c.target,
                            c.mean,
                            c.se.unwrap_or(f64::NAN),
                            c.p025,
                            c.p975,
                            s.failed as f64,
                        ],
                    )
                })
            }),
        )?;
        self.out.write_json(
            "simulation.json",
            &SimulationDocument {
                replicates,
                seed: self.cli.seed,
                studies,
            },
        )
    }
}
