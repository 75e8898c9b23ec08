//! Seeded Monte-Carlo over crosstalk ensembles and box-plot summaries.
//!
//! Sample `i` of a run with seed `s` draws from its own ChaCha8 stream seeded
//! with [`sub_seed`]`(s, i)`, so results never depend on scheduling or worker
//! count. Per-sample draw order: the `D^4 - 1` Gaussian direction components,
//! then `mu` (log-uniform mode only), then `nu` (random mode only).

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::crosstalk::{
    crosstalk_from_direction, generator_count, mu_for_strength, random_crosstalk,
    sample_sphere_vector, strength_for_mu, uniform_crosstalk, CrosstalkMatrix,
};
use crate::error::{check_param, Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(seed + (index + 1) * GOLDEN_GAMMA)`.
///
/// For a fixed seed the map `index -> sub_seed` is injective on all `u64`
/// indices below `2^64 - 1`: the affine step is a bijection modulo `2^64`
/// (odd multiplier) and `mix64` is a bijection.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn sample_rng(sub_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed)
}

/// Which crosstalk matrices the ensemble draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrosstalkFamily {
    Identity,
    /// Uniform model of the configured strength (deterministic).
    Uniform,
    /// Generic unitary crosstalk.
    RandomUnitary,
}

/// How the crosstalk strength is chosen per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrengthSpec {
    /// Fixed nominal strength; `mu` follows from the average law.
    Fixed(f64),
    /// `mu = exp(r)` with `r` uniform on `[ln_lo, ln_hi]`.
    LogUniformMu { ln_lo: f64, ln_hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuSpec {
    Fixed(f64),
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub sample_count: usize,
    pub seed: u64,
    pub modes_per_axis: usize,
    pub family: CrosstalkFamily,
    pub strength: StrengthSpec,
    pub nu: NuSpec,
}

impl EnsembleSpec {
    pub fn new(sample_count: usize, seed: u64, modes_per_axis: usize, p_c: f64, nu: f64) -> Self {
        Self {
            sample_count,
            seed,
            modes_per_axis,
            family: CrosstalkFamily::RandomUnitary,
            strength: StrengthSpec::Fixed(p_c),
            nu: NuSpec::Fixed(nu),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter {
                name: "sample_count",
                value: 0.0,
                reason: "need at least one sample",
            });
        }
        if self.modes_per_axis < 2 {
            return Err(Error::InvalidDimension {
                dim: self.modes_per_axis,
                reason: "ensembles need at least two modes per axis",
            });
        }
        match self.strength {
            StrengthSpec::Fixed(p) => {
                check_param("p_c", p, (0.0..1.0).contains(&p), "must lie in [0, 1)")?
            }
            StrengthSpec::LogUniformMu { ln_lo, ln_hi } => {
                check_param("ln_mu_lo", ln_lo, ln_lo <= ln_hi, "interval is reversed")?;
                check_param("ln_mu_hi", ln_hi, true, "must be finite")?;
            }
        }
        match self.nu {
            NuSpec::Fixed(nu) => check_param("nu", nu, (0.0..=1.0).contains(&nu), "must lie in [0, 1]")?,
            NuSpec::Uniform { lo, hi } => {
                check_param("nu_lo", lo, (0.0..=1.0).contains(&lo) && lo <= hi, "bad interval")?;
                check_param("nu_hi", hi, (0.0..=1.0).contains(&hi), "bad interval")?;
            }
        }
        Ok(())
    }

    /// Draws sample `index`.
    pub fn draw(&self, index: usize) -> Result<Sample> {
        let seed = sub_seed(self.seed, index as u64);
        let mut rng = sample_rng(seed);
        let d = self.modes_per_axis;
        let crosstalk = match (self.family, self.strength) {
            (CrosstalkFamily::Identity, _) => CrosstalkMatrix::identity(d)?,
            (CrosstalkFamily::Uniform, StrengthSpec::Fixed(p)) => uniform_crosstalk(d, p)?,
            (CrosstalkFamily::Uniform, StrengthSpec::LogUniformMu { .. }) => {
                return Err(Error::ContractViolation(
                    "uniform crosstalk needs a fixed strength".into(),
                ))
            }
            (CrosstalkFamily::RandomUnitary, StrengthSpec::Fixed(p)) => {
                random_crosstalk(d, p, &mut rng)?
            }
            (CrosstalkFamily::RandomUnitary, StrengthSpec::LogUniformMu { ln_lo, ln_hi }) => {
                // Direction first, then mu, matching the documented draw order.
                let lambda = sample_sphere_vector(generator_count(d), &mut rng)?;
                let r = if ln_hi > ln_lo { rng.gen_range(ln_lo..=ln_hi) } else { ln_lo };
                crosstalk_from_direction(d, &lambda, r.exp())?
            }
        };
        let nu = match self.nu {
            NuSpec::Fixed(nu) => nu,
            NuSpec::Uniform { lo, hi } => {
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            }
        };
        Ok(Sample {
            index,
            sub_seed: seed,
            nu,
            crosstalk,
        })
    }

    /// `mu` implied by a fixed strength, if any.
    pub fn nominal_mu(&self) -> Option<f64> {
        match self.strength {
            StrengthSpec::Fixed(p) => mu_for_strength(p, self.modes_per_axis).ok(),
            StrengthSpec::LogUniformMu { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub index: usize,
    pub sub_seed: u64,
    pub nu: f64,
    pub crosstalk: CrosstalkMatrix,
}

impl Sample {
    /// Ensemble strength used for `k = x / sqrt(p_c)` scaling: the nominal
    /// strength for fixed-strength runs, the `mu` law otherwise.
    pub fn strength(&self) -> f64 {
        let c = &self.crosstalk;
        if c.nominal_strength() > 0.0 {
            c.nominal_strength()
        } else {
            strength_for_mu(c.mu(), c.modes_per_axis())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome<T> {
    pub index: usize,
    pub sub_seed: u64,
    pub result: std::result::Result<T, Error>,
}

/// Evaluates every sample, in parallel on `workers` threads, returning
/// outcomes in index order.
pub fn map_samples<T, F>(spec: &EnsembleSpec, workers: usize, f: F) -> Result<Vec<SampleOutcome<T>>>
where
    T: Send,
    F: Fn(&Sample) -> Result<T> + Sync,
{
    spec.validate()?;
    Ok(map_indices(spec.seed, spec.sample_count, workers, |i| {
        spec.draw(i).and_then(|s| f(&s))
    }))
}

/// Runs `f(index)` for `0..count` on `workers` threads; outcomes come back in
/// index order tagged with their sub-seeds.
pub fn map_indices<T, F>(seed: u64, count: usize, workers: usize, f: F) -> Vec<SampleOutcome<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let run = |i: usize| SampleOutcome {
        index: i,
        sub_seed: sub_seed(seed, i as u64),
        result: f(i),
    };
    with_workers(workers, || (0..count).into_par_iter().map(run).collect())
}

/// Runs `job` on a dedicated pool of `workers` threads (at least one).
pub fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub summary: EnsembleSummary,
    pub outcomes: Vec<SampleOutcome<f64>>,
}

impl EnsembleRun {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }
}

/// Evaluates a scalar per sample and summarizes the successes.
pub fn run_ensemble<F>(spec: &EnsembleSpec, workers: usize, evaluator: F) -> Result<EnsembleRun>
where
    F: Fn(&Sample) -> Result<f64> + Sync,
{
    let outcomes = map_samples(spec, workers, |s| {
        let v = evaluator(s)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ContractViolation(format!("non-finite value {v}")))
        }
    })?;
    let values: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok().copied())
        .collect();
    let mut summary = EnsembleSummary::from_values(&values)?;
    summary.failures = outcomes.len() - values.len();
    Ok(EnsembleRun { summary, outcomes })
}

/// Writes `sample_index,sub_seed,value,status` rows.
pub fn write_samples_csv<W: Write>(out: &mut W, outcomes: &[SampleOutcome<f64>]) -> std::io::Result<()> {
    writeln!(out, "sample_index,sub_seed,value,status")?;
    for o in outcomes {
        match &o.result {
            Ok(v) => writeln!(out, "{},{},{},ok", o.index, o.sub_seed, v)?,
            Err(e) => writeln!(out, "{},{},,\"failed: {}\"", o.index, o.sub_seed, e.to_string().replace('"', "'"))?,
        }
    }
    Ok(())
}

/// Mean, population standard deviation and Tukey box-plot statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest value within `1.5 IQR` below `q1`.
    pub whisker_lo: f64,
    /// Largest value within `1.5 IQR` above `q3`.
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

impl EnsembleSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (mean, std) = mean_std(values)?;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = sorted_quantile(&sorted, 0.25);
        let median = sorted_quantile(&sorted, 0.5);
        let q3 = sorted_quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = sorted.iter().copied().filter(|v| (fence_lo..=fence_hi).contains(v));
        let whisker_lo = inside.clone().next().unwrap_or(q1);
        let whisker_hi = inside.last().unwrap_or(q3);
        let outliers = sorted
            .iter()
            .copied()
            .filter(|v| *v < fence_lo || *v > fence_hi)
            .collect();
        Ok(Self {
            count: values.len(),
            failures: 0,
            mean,
            std,
            median,
            q1,
            q3,
            whisker_lo,
            whisker_hi,
            outliers,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// Mean and population standard deviation (two-pass). A constant input
/// yields exactly that constant and zero spread.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    let first = *values.first().ok_or(Error::EmptyInput)?;
    if values.iter().all(|v| *v == first) {
        return Ok((first, 0.0));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Linear-interpolation quantile: position `p (n - 1)` in sorted order.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_param("p", p, (0.0..=1.0).contains(&p), "must lie in [0, 1]")?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&sorted, p))
}

fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
