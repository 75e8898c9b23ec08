//! Minimal resolvable distance, SPADE/direct-imaging threshold points and the
//! `k = x / sqrt(p_c)` optimal-region scan.
//!
//! The fixed point `d_min = 1 / sqrt(N F(d_min))` is solved in the
//! dimensionless form `2 x sqrt(N w^2 F(x)) = 1`, with `d_min / w = 2 x`.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::crosstalk::CrosstalkMatrix;
use crate::error::{check_param, Error, Result};
use crate::fisher::{di_fisher, spade_w2f, DiQuadrature};
use crate::optics::{DetectionModel, SourceGeometry};

/// Points in the bracketing scan of [`solve_mrd`].
pub const MRD_SCAN_POINTS: usize = 200;
/// Default MRD search window in `x`.
pub const MRD_WINDOW: (f64, f64) = (1e-6, 1.0);
/// Relative bracket width at which bisection stops.
const MRD_RELATIVE_TOL: f64 = 1e-12;
const THRESHOLD_RELATIVE_TOL: f64 = 1e-4;

/// `k` range and resolution of the optimal-region scan.
pub const K_GRID: (f64, f64, usize) = (0.01, 20.0, 400);

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    check_param("lo", lo, lo > 0.0, "must be positive")?;
    check_param("hi", hi, hi > lo, "must exceed the lower bound")?;
    if n < 2 {
        return Err(Error::InvalidDimension {
            dim: n,
            reason: "a grid needs at least two points",
        });
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect())
}

/// Inputs of the minimal-resolvable-distance equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrdQuery {
    pub photons: f64,
    pub window: (f64, f64),
}

impl MrdQuery {
    pub fn new(photons: f64) -> Result<Self> {
        let q = Self {
            photons,
            window: MRD_WINDOW,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.window = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        check_param("photons", self.photons, self.photons > 0.0, "must be positive")?;
        let (lo, hi) = self.window;
        check_param("x_lo", lo, lo > 0.0, "must be positive")?;
        check_param("x_hi", hi, hi > lo, "must exceed x_lo")
    }

    /// `2 x sqrt(N w^2 F) - 1`.
    pub fn residual(&self, x: f64, w2f: f64) -> f64 {
        2.0 * x * (self.photons * w2f.max(0.0)).sqrt() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrdSolution {
    pub x: f64,
    pub dmin_over_w: f64,
    pub residual: f64,
}

/// Smallest root of the MRD fixed point for the curve `x -> w^2 F(x)`.
pub fn solve_mrd<F>(q: &MrdQuery, curve: F) -> Result<MrdSolution>
where
    F: Fn(f64) -> Result<f64>,
{
    q.validate()?;
    let (lo, hi) = q.window;
    let g = |x: f64| -> Result<f64> { Ok(q.residual(x, curve(x)?)) };
    let grid = log_grid(lo, hi, MRD_SCAN_POINTS)?;
    let mut scan = Vec::with_capacity(grid.len());
    for &x in &grid {
        scan.push((x, g(x)?));
    }
    if let Some(&(x, r)) = scan.first().filter(|(_, r)| *r == 0.0) {
        return Ok(MrdSolution {
            x,
            dmin_over_w: 2.0 * x,
            residual: r,
        });
    }
    let bracket = scan
        .windows(2)
        .find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0 || w[0].1 > 0.0 && w[1].1 <= 0.0)
        .map(|w| (w[0], w[1]));
    let Some(((mut a, mut ga), (mut b, _))) = bracket else {
        return Err(Error::NoSolution { lo, hi, scan });
    };
    while (b - a) > MRD_RELATIVE_TOL * b {
        let m = (a * b).sqrt();
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let ra = g(a)?;
    let rb = g(b)?;
    let (x, residual) = if ra.abs() <= rb.abs() { (a, ra) } else { (b, rb) };
    Ok(MrdSolution {
        x,
        dmin_over_w: 2.0 * x,
        residual,
    })
}

/// Window and scan resolution for [`find_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdQuery {
    pub window: (f64, f64),
    pub scan_points: usize,
}

impl ThresholdQuery {
    pub fn new(lo: f64, hi: f64, scan_points: usize) -> Result<Self> {
        check_param("x_lo", lo, lo > 0.0, "must be positive")?;
        check_param("x_hi", hi, hi > lo, "must exceed x_lo")?;
        Ok(Self {
            window: (lo, hi),
            scan_points,
        })
    }
}

/// Smallest `x` where `spade - di` turns from `<= 0` to `> 0`.
///
/// Returns `0` when SPADE is above direct imaging on the whole window.
pub fn find_threshold<S, D>(q: &ThresholdQuery, spade: S, di: D) -> Result<f64>
where
    S: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = q.window;
    let diff = |x: f64| -> Result<f64> { Ok(spade(x)? - di(x)?) };
    let grid = log_grid(lo, hi, q.scan_points)?;
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(diff(x)?);
    }
    if values.iter().all(|v| *v > 0.0) {
        return Ok(0.0);
    }
    let Some(i) = (0..grid.len() - 1).find(|&i| values[i] <= 0.0 && values[i + 1] > 0.0) else {
        return Err(Error::NoThreshold { lo, hi });
    };
    let (mut a, mut b) = (grid[i], grid[i + 1]);
    while b - a > THRESHOLD_RELATIVE_TOL * b {
        let m = (a * b).sqrt();
        if diff(m)? > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// SPADE `w^2 F(x)` for one crosstalk matrix at fixed `(theta, nu)`.
pub fn spade_curve(
    crosstalk: &CrosstalkMatrix,
    theta: f64,
    nu: f64,
) -> impl Fn(f64) -> Result<f64> + '_ {
    move |x| {
        let g = SourceGeometry::new(x, theta, nu)?;
        Ok(spade_w2f(&DetectionModel::new(g, crosstalk)))
    }
}

/// Ensemble-averaged SPADE curve over a set of matrices sharing `(theta, nu)`.
#[derive(Debug, Clone)]
pub struct AveragedSpade<'a> {
    members: &'a [CrosstalkMatrix],
    theta: f64,
    nu: f64,
}

impl<'a> AveragedSpade<'a> {
    pub fn new(members: &'a [CrosstalkMatrix], theta: f64, nu: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyInput);
        }
        SourceGeometry::new(0.0, theta, nu)?;
        Ok(Self { members, theta, nu })
    }

    /// Mean and population standard deviation of `w^2 F(x)` over members.
    pub fn mean_std(&self, x: f64) -> Result<(f64, f64)> {
        let g = SourceGeometry::new(x, self.theta, self.nu)?;
        let values: Vec<f64> = self
            .members
            .par_iter()
            .map(|c| spade_w2f(&DetectionModel::new(g, c)))
            .collect();
        crate::ensemble::mean_std(&values)
    }

    pub fn mean(&self, x: f64) -> Result<f64> {
        Ok(self.mean_std(x)?.0)
    }
}

/// Direct-imaging `w^2 F(x)` at fixed `(theta, nu)`, memoized per `x`.
#[derive(Debug)]
pub struct DiCurve {
    quad: DiQuadrature,
    theta: f64,
    nu: f64,
    cache: Mutex<HashMap<u64, f64>>,
}

impl DiCurve {
    pub fn new(theta: f64, nu: f64) -> Result<Self> {
        SourceGeometry::new(0.0, theta, nu)?;
        Ok(Self {
            quad: DiQuadrature::default(),
            theta,
            nu,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn w2f(&self, x: f64) -> Result<f64> {
        let key = x.to_bits();
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let g = SourceGeometry::new(x, self.theta, self.nu)?;
        let v = di_fisher(&g, &self.quad)?.w2f;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// SPADE `w^2 F` on the `k` grid for one matrix, as `(k, w2f)` pairs.
pub fn k_profile(crosstalk: &CrosstalkMatrix, p_c: f64, theta: f64, nu: f64) -> Result<Vec<(f64, f64)>> {
    check_param("p_c", p_c, p_c > 0.0, "must be positive for k scaling")?;
    let (lo, hi, n) = K_GRID;
    let curve = spade_curve(crosstalk, theta, nu);
    let root = p_c.sqrt();
    log_grid(lo, hi, n)?
        .into_iter()
        .map(|k| Ok((k, curve(k * root)?)))
        .collect()
}

/// Smallest grid `k` with `w^2 F >= fraction * max`.
pub fn k_ratio_to_fraction(profile: &[(f64, f64)], fraction: f64) -> Result<f64> {
    check_param("fraction", fraction, fraction > 0.0 && fraction < 1.0, "must lie in (0, 1)")?;
    let max = profile
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if profile.is_empty() || max <= 0.0 {
        return Err(Error::Unreachable {
            fraction,
            max_achieved: max.max(0.0),
        });
    }
    profile
        .iter()
        .find(|p| p.1 >= fraction * max)
        .map(|p| p.0)
        .ok_or(Error::Unreachable {
            fraction,
            max_achieved: max,
        })
}

/// `w^2 F(k sqrt(p_c))` over the grid maximum of the profile.
pub fn fraction_at_k(
    crosstalk: &CrosstalkMatrix,
    profile: &[(f64, f64)],
    k: f64,
    p_c: f64,
    theta: f64,
    nu: f64,
) -> Result<f64> {
    check_param("k", k, k > 0.0, "must be positive")?;
    let max = profile
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::EmptyInput);
    }
    Ok(spade_curve(crosstalk, theta, nu)(k * p_c.sqrt())? / max)
}
