//! Figure-level scans: Fisher curves, crosstalk-strength statistics, minimal
//! resolvable distance maps, optimal-region and threshold ensembles.
//!
//! Every scan is deterministic for a given seed regardless of worker count.

use rayon::prelude::*;

use crate::crosstalk::{
    crosstalk_from_direction, sample_sphere_vector, generator_count, strength_for_mu,
    CrosstalkMatrix,
};
use crate::ensemble::{
    map_indices, map_samples, sample_rng, with_workers, CrosstalkFamily, EnsembleSpec,
    EnsembleSummary, NuSpec, StrengthSpec,
};
use crate::error::{check_param, Error, Result};
use crate::fisher::{asymptotic_q0_ensemble_stats, di_fisher, spade_w2f, DiQuadrature};
use crate::optics::{DetectionModel, SourceGeometry};
use crate::resolution::{
    find_threshold, fraction_at_k, k_profile, k_ratio_to_fraction, solve_mrd, spade_curve,
    AveragedSpade, DiCurve, MrdQuery, ThresholdQuery,
};

fn collect_ok<T>(outcomes: Vec<crate::ensemble::SampleOutcome<T>>) -> Result<Vec<T>> {
    outcomes.into_iter().map(|o| o.result).collect()
}

/// Draws the crosstalk matrices of a fixed-strength ensemble.
pub fn draw_matrices(
    samples: usize,
    seed: u64,
    dim: usize,
    p_c: f64,
    workers: usize,
) -> Result<Vec<CrosstalkMatrix>> {
    let spec = EnsembleSpec::new(samples, seed, dim, p_c, 1.0);
    collect_ok(map_samples(&spec, workers, |s| Ok(s.crosstalk.clone()))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherScanConfig {
    pub nu: f64,
    pub theta: f64,
    pub p_c: f64,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub xs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherScanRow {
    pub x: f64,
    pub spade_mean: f64,
    pub spade_std: f64,
    pub di: f64,
    pub ideal: f64,
    /// Ensemble mean of the small-separation limit.
    pub asymptote: f64,
}

/// Crosstalk-averaged SPADE, ideal direct imaging and ideal SPADE versus `x`.
pub fn fisher_scan(cfg: &FisherScanConfig, workers: usize) -> Result<Vec<FisherScanRow>> {
    if cfg.xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let canon = SourceGeometry::new(0.0, cfg.theta, cfg.nu)?;
    let asymptote = asymptotic_q0_ensemble_stats(canon.nu(), canon.theta())?.0;
    let members = draw_matrices(cfg.samples, cfg.seed, cfg.dim, cfg.p_c, workers)?;
    let ideal = CrosstalkMatrix::identity(cfg.dim)?;
    let averaged = AveragedSpade::new(&members, cfg.theta, cfg.nu)?;
    let quad = DiQuadrature::default();
    with_workers(workers, || {
        cfg.xs
            .par_iter()
            .map(|&x| {
                let g = SourceGeometry::new(x, cfg.theta, cfg.nu)?;
                let (spade_mean, spade_std) = averaged.mean_std(x)?;
                Ok(FisherScanRow {
                    x,
                    spade_mean,
                    spade_std,
                    di: di_fisher(&g, &quad)?.w2f,
                    ideal: spade_w2f(&DetectionModel::new(g, &ideal)),
                    asymptote,
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosstalkStatsRow {
    pub mu: f64,
    pub pc_predicted: f64,
    pub pc_mean: f64,
    pub pc_std: f64,
}

/// Measured strength of random unitary crosstalk at each `mu`.
///
/// The same directions are reused for every `mu`.
pub fn crosstalk_stats(
    mus: &[f64],
    dim: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<CrosstalkStatsRow>> {
    if mus.is_empty() || samples == 0 {
        return Err(Error::EmptyInput);
    }
    mus.iter()
        .map(|&mu| {
            check_param("mu", mu, mu >= 0.0, "must be nonnegative")?;
            let values = collect_ok(map_indices(seed, samples, workers, |i| {
                let mut rng = sample_rng(crate::ensemble::sub_seed(seed, i as u64));
                let lambda = sample_sphere_vector(generator_count(dim), &mut rng)?;
                Ok(crosstalk_from_direction(dim, &lambda, mu)?.measured_strength())
            }))?;
            let s = EnsembleSummary::from_values(&values)?;
            Ok(CrosstalkStatsRow {
                mu,
                pc_predicted: strength_for_mu(mu, dim),
                pc_mean: s.mean,
                pc_std: s.std,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrdScanConfig {
    pub nus: Vec<f64>,
    pub photons: Vec<f64>,
    pub p_c: f64,
    pub dim: usize,
    pub theta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Solve per matrix and average `d_min` instead of averaging `F` first.
    pub per_matrix: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrdScanRow {
    pub nu: f64,
    pub photons: f64,
    pub dmin_spade: Option<f64>,
    pub dmin_di: Option<f64>,
    pub status: &'static str,
}

impl MrdScanRow {
    pub fn spade_wins(&self) -> bool {
        matches!((self.dmin_spade, self.dmin_di), (Some(s), Some(d)) if s < d)
    }
}

/// `d_min / w` for crosstalk-averaged SPADE and ideal direct imaging.
pub fn mrd_scan(cfg: &MrdScanConfig, workers: usize) -> Result<Vec<MrdScanRow>> {
    if cfg.nus.is_empty() || cfg.photons.is_empty() {
        return Err(Error::EmptyInput);
    }
    let queries = cfg
        .photons
        .iter()
        .map(|&n| MrdQuery::new(n))
        .collect::<Result<Vec<_>>>()?;
    let members = draw_matrices(cfg.samples, cfg.seed, cfg.dim, cfg.p_c, workers)?;
    let per_nu = with_workers(workers, || {
        cfg.nus
            .par_iter()
            .map(|&nu| -> Result<Vec<MrdScanRow>> {
                let averaged = AveragedSpade::new(&members, cfg.theta, nu)?;
                let di = DiCurve::new(cfg.theta, nu)?;
                queries
                    .iter()
                    .map(|q| {
                        let spade = if cfg.per_matrix {
                            let roots: Vec<f64> = members
                                .par_iter()
                                .filter_map(|c| {
                                    solve_mrd(q, spade_curve(c, cfg.theta, nu)).ok()
                                })
                                .map(|s| s.dmin_over_w)
                                .collect();
                            (!roots.is_empty())
                                .then(|| roots.iter().sum::<f64>() / roots.len() as f64)
                        } else {
                            solve_mrd(q, |x| averaged.mean(x)).ok().map(|s| s.dmin_over_w)
                        };
                        let direct = match solve_mrd(q, |x| di.w2f(x)) {
                            Ok(s) => Some(s.dmin_over_w),
                            Err(Error::NoSolution { .. }) => None,
                            Err(e) => return Err(e),
                        };
                        let status = match (spade, direct) {
                            (Some(_), Some(_)) => "ok",
                            (None, Some(_)) => "no_root_spade",
                            (Some(_), None) => "no_root_di",
                            (None, None) => "no_root_both",
                        };
                        Ok(MrdScanRow {
                            nu,
                            photons: q.photons,
                            dmin_spade: spade,
                            dmin_di: direct,
                            status,
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_nu.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    pub p_cs: Vec<f64>,
    pub fractions: Vec<f64>,
    /// `k` at which the reached fraction is reported.
    pub k_probe: f64,
    pub dim: usize,
    pub theta: f64,
    pub samples: usize,
    pub seed: u64,
    pub nu: NuSpec,
    pub family: CrosstalkFamily,
}

/// One matrix of the optimal-region ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub nu: f64,
    /// Smallest `k` reaching each configured fraction, `None` if unreachable.
    pub ks: Vec<Option<f64>>,
    pub fraction_at_probe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub p_c: f64,
    pub fraction: f64,
    pub summary: Option<EnsembleSummary>,
    pub unreachable: usize,
    /// Share of matrices whose fraction at `k_probe` reaches `fraction`.
    pub probe_share: f64,
}

/// Per-sample results of the optimal-region scan for one strength.
pub fn region_samples(cfg: &RegionConfig, p_c: f64, workers: usize) -> Result<Vec<RegionSample>> {
    let spec = EnsembleSpec {
        sample_count: cfg.samples,
        seed: cfg.seed,
        modes_per_axis: cfg.dim,
        family: cfg.family,
        strength: StrengthSpec::Fixed(p_c),
        nu: cfg.nu,
    };
    collect_ok(map_samples(&spec, workers, |s| {
        let profile = k_profile(&s.crosstalk, p_c, cfg.theta, s.nu)?;
        let ks = cfg
            .fractions
            .iter()
            .map(|&f| match k_ratio_to_fraction(&profile, f) {
                Ok(k) => Ok(Some(k)),
                Err(Error::Unreachable { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        let fraction_at_probe =
            fraction_at_k(&s.crosstalk, &profile, cfg.k_probe, p_c, cfg.theta, s.nu)?;
        Ok(RegionSample {
            nu: s.nu,
            ks,
            fraction_at_probe,
        })
    })?)
}

/// Box statistics of the `k` needed per `(p_c, fraction)`.
pub fn optimal_region(cfg: &RegionConfig, workers: usize) -> Result<Vec<RegionRow>> {
    if cfg.p_cs.is_empty() || cfg.fractions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows = Vec::new();
    for &p_c in &cfg.p_cs {
        let samples = region_samples(cfg, p_c, workers)?;
        for (j, &fraction) in cfg.fractions.iter().enumerate() {
            let ks: Vec<f64> = samples.iter().filter_map(|s| s.ks[j]).collect();
            let reached = samples
                .iter()
                .filter(|s| s.fraction_at_probe >= fraction)
                .count();
            rows.push(RegionRow {
                p_c,
                fraction,
                summary: EnsembleSummary::from_values(&ks).ok(),
                unreachable: samples.len() - ks.len(),
                probe_share: reached as f64 / samples.len() as f64,
            });
        }
    }
    Ok(rows)
}

/// How the crosstalk strength of a threshold ensemble is set.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdStrength {
    /// One ensemble per listed `p_c`.
    Fixed(Vec<f64>),
    /// `mu = exp(r)`, `r` uniform on `[ln_lo, ln_hi]`, drawn per matrix.
    LogUniformMu { ln_lo: f64, ln_hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    pub nus: Vec<f64>,
    pub strength: ThresholdStrength,
    pub dim: usize,
    pub theta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Search window in `k = x / sqrt(p_c)`.
    pub k_window: (f64, f64),
    pub scan_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub nu: f64,
    /// `None` in log-uniform `mu` mode.
    pub p_c: Option<f64>,
    /// Statistics of `x_c / sqrt(p_c)` over matrices with a threshold.
    pub summary: Option<EnsembleSummary>,
    pub no_threshold: usize,
    pub failures: usize,
}

/// Per-matrix threshold points against ideal direct imaging.
pub fn threshold_scan(cfg: &ThresholdConfig, workers: usize) -> Result<Vec<ThresholdRow>> {
    if cfg.nus.is_empty() {
        return Err(Error::EmptyInput);
    }
    let strengths: Vec<Option<f64>> = match &cfg.strength {
        ThresholdStrength::Fixed(list) if list.is_empty() => return Err(Error::EmptyInput),
        ThresholdStrength::Fixed(list) => list.iter().map(|&p| Some(p)).collect(),
        ThresholdStrength::LogUniformMu { .. } => vec![None],
    };
    let (k_lo, k_hi) = cfg.k_window;
    ThresholdQuery::new(k_lo, k_hi, cfg.scan_points)?;
    let mut rows = Vec::new();
    for &nu in &cfg.nus {
        let di = DiCurve::new(cfg.theta, nu)?;
        for &p_c in &strengths {
            let strength = match (&cfg.strength, p_c) {
                (_, Some(p)) => StrengthSpec::Fixed(p),
                (ThresholdStrength::LogUniformMu { ln_lo, ln_hi }, None) => {
                    StrengthSpec::LogUniformMu {
                        ln_lo: *ln_lo,
                        ln_hi: *ln_hi,
                    }
                }
                _ => unreachable!("fixed strengths always carry a value"),
            };
            let spec = EnsembleSpec {
                sample_count: cfg.samples,
                seed: cfg.seed,
                modes_per_axis: cfg.dim,
                family: CrosstalkFamily::RandomUnitary,
                strength,
                nu: NuSpec::Fixed(nu),
            };
            let outcomes = map_samples(&spec, workers, |s| {
                let root = s.strength().sqrt();
                let q = ThresholdQuery::new(k_lo * root, k_hi * root, cfg.scan_points)?;
                let xc = find_threshold(&q, spade_curve(&s.crosstalk, cfg.theta, s.nu), |x| {
                    di.w2f(x)
                })?;
                Ok(xc / root)
            })?;
            let mut ks = Vec::new();
            let (mut no_threshold, mut failures) = (0, 0);
            for o in outcomes {
                match o.result {
                    Ok(k) => ks.push(k),
                    Err(Error::NoThreshold { .. }) => no_threshold += 1,
                    Err(_) => failures += 1,
                }
            }
            rows.push(ThresholdRow {
                nu,
                p_c,
                summary: EnsembleSummary::from_values(&ks).ok(),
                no_threshold,
                failures,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::log_grid;

    #[test]
    fn zero_strength_scan_matches_ideal() {
        let cfg = FisherScanConfig {
            nu: 0.7,
            theta: 0.0,
            p_c: 0.0,
            dim: 3,
            samples: 5,
            seed: 1,
            xs: log_grid(1e-3, 0.3, 6).unwrap(),
        };
        for row in fisher_scan(&cfg, 2).unwrap() {
            assert!((row.spade_mean - row.ideal).abs() < 1e-6);
            assert_eq!(row.spade_std, 0.0);
            assert!((row.asymptote - 0.08).abs() < 1e-12);
        }
    }

    #[test]
    fn crosstalk_stats_zero_mu() {
        let rows = crosstalk_stats(&[0.0, 0.1], 2, 20, 3, 1).unwrap();
        assert_eq!((rows[0].pc_mean, rows[0].pc_std, rows[0].pc_predicted), (0.0, 0.0, 0.0));
        assert!(rows[1].pc_mean > 0.0);
    }

    #[test]
    fn identity_region_is_degenerate() {
        let cfg = RegionConfig {
            p_cs: vec![1e-3],
            fractions: vec![0.9],
            k_probe: 3.0,
            dim: 3,
            theta: 0.0,
            samples: 4,
            seed: 1,
            nu: NuSpec::Uniform { lo: 0.5, hi: 1.0 },
            family: CrosstalkFamily::Identity,
        };
        let rows = optimal_region(&cfg, 1).unwrap();
        let s = rows[0].summary.as_ref().unwrap();
        assert_eq!((s.min, s.max), (0.01, 0.01));
        assert_eq!(rows[0].probe_share, 1.0);
    }
}
