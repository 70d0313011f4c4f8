//! Plot-ready diagnostics: density curves, QQ pairs, histograms and
//! residual tables.

use hgld::diagnostics::{
    density_distances_with, histogram, kde, qq_points, sheather_jones_bandwidth, Bandwidth,
    DistanceGrid, DistanceReport, KdeEstimate,
};
use hgld::numerics::normal_quantile;
use serde::Serialize;

use crate::error::CliError;
use crate::output::OutDir;

/// Points of the exported density curves.
pub const CURVE_POINTS: usize = 512;

/// Kernel estimate of one sample with the grid its distances use.
pub struct Reference {
    pub estimate: KdeEstimate,
    pub bandwidth: Bandwidth,
    pub grid: DistanceGrid,
}

impl Reference {
    pub fn new(data: &[f64]) -> Result<Self, CliError> {
        let bandwidth = sheather_jones_bandwidth(data)?;
        let estimate = kde(data, bandwidth.value)?;
        let grid = DistanceGrid::for_data(data, bandwidth.value);
        Ok(Self {
            estimate,
            bandwidth,
            grid,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        let step = (self.grid.upper - self.grid.lower) / (CURVE_POINTS - 1) as f64;
        (0..CURVE_POINTS)
            .map(|i| self.grid.lower + step * i as f64)
            .collect()
    }

    pub fn distances<F: Fn(f64) -> f64>(&self, pdf: F) -> Result<DistanceReport, CliError> {
        Ok(density_distances_with(
            pdf,
            |y| self.estimate.evaluate(y),
            self.estimate.data(),
            &self.grid,
        )?)
    }
}

#[derive(Debug, Serialize)]
pub struct DensityDiagnostics {
    pub bandwidth: Bandwidth,
    pub distances: DistanceReport,
}

/// Writes `{prefix}_density.csv` and `{prefix}_qq.csv` and returns the
/// distances to the kernel estimate.
pub fn density_bundle<F, Q>(
    out: &mut OutDir,
    prefix: &str,
    reference: &Reference,
    pdf: F,
    quantile: Q,
) -> Result<DensityDiagnostics, CliError>
where
    F: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let rows = reference
        .xs()
        .into_iter()
        .map(|x| vec![x, pdf(x), reference.estimate.evaluate(x)]);
    out.write_csv(&format!("{prefix}_density.csv"), &["x", "fitted", "kde"], rows)?;
    qq_table(out, &format!("{prefix}_qq.csv"), reference.estimate.data(), quantile)?;
    Ok(DensityDiagnostics {
        bandwidth: reference.bandwidth,
        distances: reference.distances(pdf)?,
    })
}

pub fn qq_table<Q: Fn(f64) -> f64>(
    out: &mut OutDir,
    name: &str,
    sample: &[f64],
    quantile: Q,
) -> Result<(), CliError> {
    let pairs = qq_points(sample, quantile)?;
    out.write_csv(name, &["sample", "theoretical"], pairs.into_iter().map(|(s, t)| vec![s, t]))
}

/// Normal QQ pairs of the finite quantile residuals.
pub fn normal_qq_table(out: &mut OutDir, name: &str, residuals: &[f64]) -> Result<(), CliError> {
    let finite: Vec<f64> = residuals.iter().copied().filter(|r| r.is_finite()).collect();
    if finite.is_empty() {
        return Ok(());
    }
    qq_table(out, name, &finite, normal_quantile)
}

pub fn histogram_table(out: &mut OutDir, name: &str, data: &[f64]) -> Result<(), CliError> {
    let bins = histogram(data, None)?;
    out.write_csv(
        name,
        &["lower", "upper", "count", "density"],
        bins.into_iter()
            .map(|b| vec![b.lower, b.upper, b.count as f64, b.density]),
    )
}
