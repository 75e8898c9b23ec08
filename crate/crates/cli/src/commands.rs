//! Parameter resolution, validation and execution of each subcommand.

use anyhow::{ensure, Result};

use spade_core::ensemble::{CrosstalkFamily, EnsembleSummary, NuSpec};
use spade_core::resolution::{log_grid, solve_mrd, DiCurve, MrdQuery};
use spade_core::scans::{
    crosstalk_stats, fisher_scan, mrd_scan, optimal_region, threshold_scan, FisherScanConfig,
    MrdScanConfig, RegionConfig, ThresholdConfig, ThresholdStrength,
};

use crate::config::Resolver;
use crate::output::{Cell, Table};
use crate::{FisherArgs, MrdArgs, RegionArgs, StatsArgs, ThresholdArgs};

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or parameter values (exit code 2).
    Usage(anyhow::Error),
    /// Numerical failure during a run (exit code 1).
    Compute(anyhow::Error),
}

#[derive(Debug)]
pub enum Job {
    Fisher(FisherScanConfig),
    Mrd { cfg: MrdScanConfig, ideal: bool },
    Stats { mus: Vec<f64>, dim: usize, samples: usize, seed: u64 },
    Region(RegionConfig),
    Threshold(ThresholdConfig),
}

fn check_nu(nu: f64) -> Result<()> {
    ensure!((0.0..=1.0).contains(&nu), "nu = {nu} must lie in [0, 1]");
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    ensure!((2..=8).contains(&dim), "dim = {dim} must lie in 2..=8");
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    ensure!(samples >= 1, "samples must be at least 1");
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    ensure!(theta.is_finite(), "theta must be finite");
    Ok(())
}

fn check_window(name: &str, lo: f64, hi: f64, points: usize) -> Result<()> {
    ensure!(lo > 0.0 && lo.is_finite(), "{name}-min = {lo} must be positive");
    ensure!(hi > lo && hi.is_finite(), "{name}-max = {hi} must exceed {name}-min");
    ensure!(points >= 2, "{name} grid needs at least two points");
    Ok(())
}

pub fn resolve_fisher(a: &FisherArgs, r: &mut Resolver, seed: u64) -> Result<Job> {
    let nu = r.value("nu", a.nu, 0.7)?;
    let theta = r.value("theta", a.theta, 0.0)?;
    let p_c = r.value("pc", a.pc, 0.0017)?;
    let dim = r.value("dim", a.dim, 3usize)?;
    let samples = r.value("samples", a.samples, 500usize)?;
    let x_min = r.value("x-min", a.x_min, 1e-4)?;
    let x_max = r.value("x-max", a.x_max, 0.3)?;
    let x_points = r.value("x-points", a.x_points, 60usize)?;
    check_nu(nu)?;
    check_theta(theta)?;
    ensure!((0.0..1.0).contains(&p_c), "pc = {p_c} must lie in [0, 1)");
    check_dim(dim)?;
    check_samples(samples)?;
    check_window("x", x_min, x_max, x_points)?;
    Ok(Job::Fisher(FisherScanConfig {
        nu,
        theta,
        p_c,
        dim,
        samples,
        seed,
        xs: log_grid(x_min, x_max, x_points)?,
    }))
}

pub fn resolve_mrd(a: &MrdArgs, r: &mut Resolver, seed: u64) -> Result<Job> {
    let nus = match r.optional_list("nu", a.nu.clone())? {
        Some(list) => list,
        None => {
            let lo = r.value("nu-min", a.nu_min, 0.5)?;
            let hi = r.value("nu-max", a.nu_max, 1.0)?;
            let n = r.value("nu-points", a.nu_points, 21usize)?;
            ensure!(lo < hi && n >= 2, "nu grid needs nu-min < nu-max and at least two points");
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let photons = r.list("photons", a.photons.clone(), &[1e2, 1e4, 1e6])?;
    let p_c = r.value("pc", a.pc, 0.01)?;
    let dim = r.value("dim", a.dim, 3usize)?;
    let theta = r.value("theta", a.theta, 0.0)?;
    let samples = r.value("samples", a.samples, 2000usize)?;
    let per_matrix = r.switch("per-matrix", a.per_matrix)?;
    let ideal = r.switch("ideal", a.ideal)?;
    ensure!(!nus.is_empty() && !photons.is_empty(), "nu and photons must be nonempty");
    nus.iter().try_for_each(|&nu| check_nu(nu))?;
    ensure!(
        photons.iter().all(|n| *n > 0.0 && n.is_finite()),
        "photon numbers must be positive"
    );
    ensure!((0.0..1.0).contains(&p_c), "pc = {p_c} must lie in [0, 1)");
    check_dim(dim)?;
    check_theta(theta)?;
    check_samples(samples)?;
    Ok(Job::Mrd {
        cfg: MrdScanConfig {
            nus,
            photons,
            p_c,
            dim,
            theta,
            samples,
            seed,
            per_matrix,
        },
        ideal,
    })
}

pub fn resolve_stats(a: &StatsArgs, r: &mut Resolver, seed: u64) -> Result<Job> {
    let mus = match r.optional_list("mu", a.mu.clone())? {
        Some(list) => list,
        None => {
            let lo = r.value("mu-min", a.mu_min, 0.01)?;
            let hi = r.value("mu-max", a.mu_max, 0.2)?;
            let n = r.value("mu-points", a.mu_points, 12usize)?;
            check_window("mu", lo, hi, n)?;
            log_grid(lo, hi, n)?
        }
    };
    let dim = r.value("dim", a.dim, 2usize)?;
    let samples = r.value("samples", a.samples, 500usize)?;
    ensure!(!mus.is_empty(), "mu list must be nonempty");
    ensure!(
        mus.iter().all(|m| *m >= 0.0 && m.is_finite()),
        "mu values must be nonnegative"
    );
    check_dim(dim)?;
    check_samples(samples)?;
    Ok(Job::Stats {
        mus,
        dim,
        samples,
        seed,
    })
}

pub fn resolve_region(a: &RegionArgs, r: &mut Resolver, seed: u64) -> Result<Job> {
    let p_cs = r.list("pc", a.pc.clone(), &[1e-4, 1e-3, 1e-2])?;
    let fractions = r.list("fraction", a.fraction.clone(), &[0.9, 0.95])?;
    let k_probe = r.value("k-probe", a.k_probe, 3.0)?;
    let theta = r.value("theta", a.theta, 0.0)?;
    let dim = r.value("dim", a.dim, 3usize)?;
    let samples = r.value("samples", a.samples, 200usize)?;
    let identity = r.switch("identity", a.identity)?;
    let nu = match r.optional_list("nu", a.nu.map(|v| vec![v]))? {
        Some(v) => {
            ensure!(v.len() == 1, "optimal-region takes a single nu");
            check_nu(v[0])?;
            NuSpec::Fixed(v[0])
        }
        None => NuSpec::Uniform { lo: 0.5, hi: 1.0 },
    };
    ensure!(!p_cs.is_empty() && !fractions.is_empty(), "pc and fraction must be nonempty");
    ensure!(
        p_cs.iter().all(|p| *p > 0.0 && *p < 1.0),
        "pc values must lie in (0, 1)"
    );
    ensure!(
        fractions.iter().all(|f| *f > 0.0 && *f < 1.0),
        "fractions must lie in (0, 1)"
    );
    ensure!(k_probe > 0.0 && k_probe.is_finite(), "k-probe must be positive");
    check_theta(theta)?;
    check_dim(dim)?;
    check_samples(samples)?;
    Ok(Job::Region(RegionConfig {
        p_cs,
        fractions,
        k_probe,
        dim,
        theta,
        samples,
        seed,
        nu,
        family: if identity {
            CrosstalkFamily::Identity
        } else {
            CrosstalkFamily::RandomUnitary
        },
    }))
}

pub fn resolve_threshold(a: &ThresholdArgs, r: &mut Resolver, seed: u64) -> Result<Job> {
    let nus = r.list("nu", a.nu.clone(), &[0.55, 0.6, 0.7])?;
    let interval = r.optional_list("mu-interval", a.mu_interval.clone())?;
    let strength = match interval {
        Some(iv) => {
            ensure!(
                iv.len() == 2 && iv[0] > 0.0 && iv[0] <= iv[1] && iv[1].is_finite(),
                "mu-interval must be `lo,hi` with 0 < lo <= hi"
            );
            ensure!(a.pc.is_none(), "--pc and --mu-interval are exclusive");
            ThresholdStrength::LogUniformMu {
                ln_lo: iv[0].ln(),
                ln_hi: iv[1].ln(),
            }
        }
        None => {
            let p_cs = r.list("pc", a.pc.clone(), &[0.01])?;
            ensure!(!p_cs.is_empty(), "pc list must be nonempty");
            ensure!(
                p_cs.iter().all(|p| *p > 0.0 && *p < 1.0),
                "pc values must lie in (0, 1)"
            );
            ThresholdStrength::Fixed(p_cs)
        }
    };
    let theta = r.value("theta", a.theta, 0.0)?;
    let dim = r.value("dim", a.dim, 3usize)?;
    let samples = r.value("samples", a.samples, 200usize)?;
    let k_min = r.value("k-min", a.k_min, 1e-3)?;
    let k_max = r.value("k-max", a.k_max, 10.0)?;
    let scan_points = r.value("scan-points", a.scan_points, 80usize)?;
    ensure!(!nus.is_empty(), "nu list must be nonempty");
    nus.iter().try_for_each(|&nu| check_nu(nu))?;
    check_theta(theta)?;
    check_dim(dim)?;
    check_samples(samples)?;
    check_window("k", k_min, k_max, scan_points)?;
    Ok(Job::Threshold(ThresholdConfig {
        nus,
        strength,
        dim,
        theta,
        samples,
        seed,
        k_window: (k_min, k_max),
        scan_points,
    }))
}

const BOX_COLUMNS: [&str; 11] = [
    "count", "mean", "std", "median", "q1", "q3", "whisker_lo", "whisker_hi", "min", "max",
    "outliers",
];

fn box_cells(s: Option<&EnsembleSummary>) -> Vec<Cell> {
    match s {
        Some(s) => {
            let outliers: Vec<String> = s.outliers.iter().map(f64::to_string).collect();
            vec![
                s.count.into(),
                s.mean.into(),
                s.std.into(),
                s.median.into(),
                s.q1.into(),
                s.q3.into(),
                s.whisker_lo.into(),
                s.whisker_hi.into(),
                s.min.into(),
                s.max.into(),
                Cell::Text(outliers.join(";")),
            ]
        }
        None => {
            let mut cells = vec![Cell::Int(0)];
            cells.extend((1..BOX_COLUMNS.len() - 1).map(|_| Cell::Missing));
            cells.push(Cell::Text(String::new()));
            cells
        }
    }
}

fn with_box(prefix: &[&'static str], suffix: &[&'static str]) -> Vec<&'static str> {
    prefix
        .iter()
        .chain(BOX_COLUMNS.iter())
        .chain(suffix)
        .copied()
        .collect()
}

pub fn execute(job: &Job, workers: usize) -> Result<Table> {
    match job {
        Job::Fisher(cfg) => {
            let mut t = Table::new(vec![
                "x",
                "w2F_spade_mean",
                "w2F_spade_std",
                "w2F_di",
                "w2F_ideal",
                "w2F_asymptote",
            ]);
            for row in fisher_scan(cfg, workers)? {
                t.push(vec![
                    row.x.into(),
                    row.spade_mean.into(),
                    row.spade_std.into(),
                    row.di.into(),
                    row.ideal.into(),
                    row.asymptote.into(),
                ]);
            }
            Ok(t)
        }
        Job::Mrd { cfg, ideal } => {
            let mut t = Table::new(vec![
                "nu",
                "N",
                "dmin_spade_over_w",
                "dmin_di_over_w",
                "spade_wins",
                "status",
            ]);
            let rows = if *ideal {
                ideal_mrd_rows(cfg)?
            } else {
                mrd_scan(cfg, workers)?
            };
            for row in rows {
                t.push(vec![
                    row.nu.into(),
                    row.photons.into(),
                    row.dmin_spade.into(),
                    row.dmin_di.into(),
                    row.spade_wins().into(),
                    row.status.into(),
                ]);
            }
            Ok(t)
        }
        Job::Stats {
            mus,
            dim,
            samples,
            seed,
        } => {
            let mut t = Table::new(vec!["mu", "pc_predicted", "pc_mean", "pc_std"]);
            for row in crosstalk_stats(mus, *dim, *samples, *seed, workers)? {
                t.push(vec![
                    row.mu.into(),
                    row.pc_predicted.into(),
                    row.pc_mean.into(),
                    row.pc_std.into(),
                ]);
            }
            Ok(t)
        }
        Job::Region(cfg) => {
            let mut t = Table::new(with_box(
                &["p_c", "fraction"],
                &["unreachable", "share_reaching_at_k_probe"],
            ));
            for row in optimal_region(cfg, workers)? {
                let mut cells = vec![row.p_c.into(), row.fraction.into()];
                cells.extend(box_cells(row.summary.as_ref()));
                cells.push(row.unreachable.into());
                cells.push(row.probe_share.into());
                t.push(cells);
            }
            Ok(t)
        }
        Job::Threshold(cfg) => {
            let mut t = Table::new(with_box(&["nu", "p_c"], &["no_threshold", "failures"]));
            for row in threshold_scan(cfg, workers)? {
                let mut cells = vec![
                    row.nu.into(),
                    row.p_c.map_or(Cell::Text("mu_log_uniform".into()), Cell::Num),
                ];
                cells.extend(box_cells(row.summary.as_ref()));
                cells.push(row.no_threshold.into());
                cells.push(row.failures.into());
                t.push(cells);
            }
            Ok(t)
        }
    }
}

/// Constant `w^2 F = 1` in place of SPADE, against the full direct-imaging curve.
fn ideal_mrd_rows(cfg: &MrdScanConfig) -> Result<Vec<spade_core::scans::MrdScanRow>> {
    let mut rows = Vec::new();
    for &nu in &cfg.nus {
        let di = DiCurve::new(cfg.theta, nu)?;
        for &n in &cfg.photons {
            let q = MrdQuery::new(n)?;
            let spade = solve_mrd(&q, |_| Ok(1.0))?.dmin_over_w;
            let direct = solve_mrd(&q, |x| di.w2f(x)).ok().map(|s| s.dmin_over_w);
            rows.push(spade_core::scans::MrdScanRow {
                nu,
                photons: n,
                dmin_spade: Some(spade),
                dmin_di: direct,
                status: if direct.is_some() { "ok" } else { "no_root_di" },
            });
        }
    }
    Ok(rows)
}
