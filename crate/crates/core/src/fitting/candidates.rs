use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::percentile::{rs_scale_numerator, rs_theoretical_shape};
use super::OptimizerConfig;
use crate::gld::{fkml_central_moments, rs_is_valid, GldParams, Parametrization};
use crate::numerics::sobol::ScrambledSobol2;

/// Quasi-random `(lambda3, lambda4)` pairs filling the candidate square.
pub fn quasi_random_candidates(config: &OptimizerConfig) -> Vec<[f64; 2]> {
    let (lo, hi) = (config.candidate_lower, config.candidate_upper);
    let width = hi - lo;
    ScrambledSobol2::new(config.seed)
        .points(config.n_candidates)
        .into_iter()
        .map(|[a, b]| [lo + width * a, lo + width * b])
        .collect()
}

/// The data-independent part of the candidate search: for every candidate
/// the theoretical shape statistics, the quantity that fixes `lambda2`, and
/// whether some `lambda2` of the implied sign gives a valid vector.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    parametrization: Parametrization,
    v: f64,
    shapes: Vec<[f64; 2]>,
    /// `(rho3, rho4)` for RS, `(alpha3, alpha4)` for FKML. NaN when undefined.
    stats: Vec<[f64; 2]>,
    /// RS: `lambda2 * rho2`. FKML: variance of the unit-scale variate.
    scale: Vec<f64>,
    admissible: Vec<bool>,
}

type TableKey = (Parametrization, usize, u64, u64, u64, u64);

fn cache() -> &'static Mutex<Vec<(TableKey, Arc<CandidateTable>)>> {
    static CACHE: OnceLock<Mutex<Vec<(TableKey, Arc<CandidateTable>)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

impl CandidateTable {
    pub fn new(parametrization: Parametrization, config: &OptimizerConfig) -> Self {
        let shapes = quasi_random_candidates(config);
        let v = config.percentile_v;
        let rows: Vec<([f64; 2], f64, bool)> = shapes
            .par_iter()
            .map(|&[l3, l4]| match parametrization {
                Parametrization::Rs => {
                    let stats = rs_theoretical_shape(l3, l4, v);
                    let num = rs_scale_numerator(l3, l4, v);
                    // Validity depends on lambda2 only through its sign.
                    let ok = num.is_finite()
                        && num != 0.0
                        && stats.iter().all(|s| s.is_finite())
                        && rs_is_valid(&GldParams::rs(0.0, num, l3, l4));
                    (stats, num, ok)
                }
                Parametrization::Fkml => match fkml_central_moments(l3, l4) {
                    Some([c2, c3, c4]) if c2 > 0.0 => {
                        let stats = [c3 / c2.powf(1.5), c4 / (c2 * c2)];
                        let ok = stats.iter().all(|s| s.is_finite());
                        (stats, c2, ok)
                    }
                    _ => ([f64::NAN; 2], f64::NAN, false),
                },
            })
            .collect();
        let mut stats = Vec::with_capacity(rows.len());
        let mut scale = Vec::with_capacity(rows.len());
        let mut admissible = Vec::with_capacity(rows.len());
        for (s, c, ok) in rows {
            stats.push(s);
            scale.push(c);
            admissible.push(ok);
        }
        Self {
            parametrization,
            v,
            shapes,
            stats,
            scale,
            admissible,
        }
    }

    /// Process-wide cached table for `(parametrization, config)`.
    pub fn shared(parametrization: Parametrization, config: &OptimizerConfig) -> Arc<Self> {
        let key = (
            parametrization,
            config.n_candidates,
            config.candidate_lower.to_bits(),
            config.candidate_upper.to_bits(),
            config.seed,
            config.percentile_v.to_bits(),
        );
        if let Some((_, t)) = cache().lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Arc::clone(t);
        }
        let table = Arc::new(Self::new(parametrization, config));
        let mut guard = cache().lock().unwrap();
        if let Some((_, t)) = guard.iter().find(|(k, _)| *k == key) {
            return Arc::clone(t);
        }
        guard.push((key, Arc::clone(&table)));
        table
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn percentile_v(&self) -> f64 {
        self.v
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn shape(&self, index: usize) -> [f64; 2] {
        self.shapes[index]
    }

    pub(crate) fn scale(&self, index: usize) -> f64 {
        self.scale[index]
    }

    pub fn is_admissible(&self, index: usize) -> bool {
        self.admissible[index]
    }

    /// Distance of candidate `index` to the target shape statistics.
    pub fn distance(&self, index: usize, target: [f64; 2]) -> f64 {
        let s = self.stats[index];
        (s[0] - target[0]).hypot(s[1] - target[1])
    }

    /// Admissible candidate indices ordered by distance to `target`, ties by
    /// index.
    pub fn ranked(&self, target: [f64; 2]) -> Vec<usize> {
        let mut keyed: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| self.admissible[i])
            .map(|i| (self.distance(i, target), i))
            .filter(|(h, _)| h.is_finite())
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.into_iter().map(|(_, i)| i).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_candidates_is_empty() {
        let cfg = OptimizerConfig {
            n_candidates: 0,
            ..Default::default()
        };
        assert!(quasi_random_candidates(&cfg).is_empty());
    }

    #[test]
    fn candidates_inside_square() {
        let cfg = OptimizerConfig {
            n_candidates: 2000,
            candidate_lower: -0.5,
            candidate_upper: 2.0,
            ..Default::default()
        };
        for [a, b] in quasi_random_candidates(&cfg) {
            assert!((-0.5..=2.0).contains(&a) && (-0.5..=2.0).contains(&b));
        }
    }

    #[test]
    fn ranking_is_sorted_and_admissible() {
        let cfg = OptimizerConfig {
            n_candidates: 500,
            ..Default::default()
        };
        let t = CandidateTable::new(Parametrization::Rs, &cfg);
        let r = t.ranked([1.0, 0.6]);
        assert!(!r.is_empty());
        for w in r.windows(2) {
            assert!(t.distance(w[0], [1.0, 0.6]) <= t.distance(w[1], [1.0, 0.6]));
        }
        assert!(r.iter().all(|&i| t.is_admissible(i)));
    }

    #[test]
    fn shared_tables_are_reused() {
        let cfg = OptimizerConfig {
            n_candidates: 64,
            seed: 99,
            ..Default::default()
        };
        let a = CandidateTable::shared(Parametrization::Fkml, &cfg);
        let b = CandidateTable::shared(Parametrization::Fkml, &cfg);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
