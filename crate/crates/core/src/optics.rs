//! Forward model for two incoherent Gaussian-PSF sources measured in a
//! crosstalk-deformed Hermite-Gauss basis.
//!
//! Everything is expressed in the dimensionless half-separation
//! `x = d / (2w)`. Derivatives are analytic in `x`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::crosstalk::CrosstalkMatrix;
use crate::error::{check_param, Error, Result};

/// Which source a quantity refers to: the one at `+d/2` or at `-d/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Separation, orientation and relative brightness of the source pair.
///
/// Stored canonically with `nu >= 1/2` (brighter source at `+d/2`) and
/// `theta` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGeometry {
    x: f64,
    theta: f64,
    nu: f64,
}

impl SourceGeometry {
    /// Accepts `nu` in `[0, 1]`; values below 1/2 are mapped to
    /// `(theta + pi, 1 - nu)`, which describes the same intensity pattern.
    pub fn new(x: f64, theta: f64, nu: f64) -> Result<Self> {
        check_param("x", x, x >= 0.0, "separation must be nonnegative")?;
        check_param("theta", theta, true, "angle must be finite")?;
        check_param("nu", nu, (0.0..=1.0).contains(&nu), "must lie in [0, 1]")?;
        let (theta, nu) = if nu < 0.5 { (theta + PI, 1.0 - nu) } else { (theta, nu) };
        Ok(Self {
            x,
            theta: theta.rem_euclid(TAU),
            nu,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn with_x(&self, x: f64) -> Result<Self> {
        Self::new(x, self.theta, self.nu)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sign-free part of `beta`: `x^{k+l} cos^k sin^l e^{-x^2/2} / sqrt(k! l!)`.
fn beta_magnitude(k: usize, l: usize, x: f64, cos: f64, sin: f64) -> f64 {
    let order = (k + l) as i32;
    x.powi(order) * cos.powi(k as i32) * sin.powi(l as i32) * (-0.5 * x * x).exp()
        / (factorial(k) * factorial(l)).sqrt()
}

/// Sign-free part of `d beta / dx`.
fn beta_magnitude_dx(k: usize, l: usize, x: f64, cos: f64, sin: f64) -> f64 {
    let order = k + l;
    let rising = if order == 0 {
        0.0
    } else {
        order as f64 * x.powi(order as i32 - 1)
    };
    let poly = rising - x.powi(order as i32 + 1);
    poly * cos.powi(k as i32) * sin.powi(l as i32) * (-0.5 * x * x).exp()
        / (factorial(k) * factorial(l)).sqrt()
}

fn parity(side: Side, order: usize) -> f64 {
    if order % 2 == 1 {
        side.sign()
    } else {
        1.0
    }
}

/// Overlap of the source-centred ground mode with `u_kl` at the origin.
pub fn beta(side: Side, k: usize, l: usize, g: &SourceGeometry) -> f64 {
    let (sin, cos) = g.theta.sin_cos();
    parity(side, k + l) * beta_magnitude(k, l, g.x, cos, sin)
}

pub fn beta_dx(side: Side, k: usize, l: usize, g: &SourceGeometry) -> f64 {
    let (sin, cos) = g.theta.sin_cos();
    parity(side, k + l) * beta_magnitude_dx(k, l, g.x, cos, sin)
}

/// One detector output: probability and its `x`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProbability {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub dp_dx: f64,
}

/// Geometry bound to a crosstalk matrix.
#[derive(Debug, Clone, Copy)]
pub struct DetectionModel<'a> {
    geometry: SourceGeometry,
    crosstalk: &'a CrosstalkMatrix,
}

impl<'a> DetectionModel<'a> {
    pub fn new(geometry: SourceGeometry, crosstalk: &'a CrosstalkMatrix) -> Self {
        Self {
            geometry,
            crosstalk,
        }
    }

    pub fn geometry(&self) -> &SourceGeometry {
        &self.geometry
    }

    pub fn crosstalk(&self) -> &'a CrosstalkMatrix {
        self.crosstalk
    }

    pub fn modes_per_axis(&self) -> usize {
        self.crosstalk.modes_per_axis()
    }

    pub fn at(&self, x: f64) -> Result<Self> {
        Ok(Self::new(self.geometry.with_x(x)?, self.crosstalk))
    }

    fn check_index(&self, n: usize, m: usize) -> Result<()> {
        let dim = self.modes_per_axis();
        if n >= dim || m >= dim {
            return Err(Error::IndexOutOfRange { n, m, dim });
        }
        Ok(())
    }

    /// `f_{+-nm,00} = sum_kl c_{nm,kl} beta_{+-kl}`.
    pub fn detector_coefficient(&self, side: Side, n: usize, m: usize) -> Result<Complex64> {
        self.check_index(n, m)?;
        let d = self.modes_per_axis();
        let row = self.crosstalk.matrix().row(n * d + m);
        let mut f = Complex64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                f += row[k * d + l] * beta(side, k, l, &self.geometry);
            }
        }
        Ok(f)
    }

    /// `nu |f_+|^2 + (1 - nu) |f_-|^2`.
    pub fn detection_probability(&self, n: usize, m: usize) -> Result<f64> {
        self.check_index(n, m)?;
        Ok(self.mode_probabilities()[n * self.modes_per_axis() + m].p)
    }

    pub fn detection_probability_dx(&self, n: usize, m: usize) -> Result<f64> {
        self.check_index(n, m)?;
        Ok(self.mode_probabilities()[n * self.modes_per_axis() + m].dp_dx)
    }

    /// All `D^2` outputs in row order `n * D + m`.
    ///
    /// Each detector amplitude splits into even and odd parts in `x`,
    /// `f_{+-} = E +- O`, so `p = |E|^2 + |O|^2 + 2 (2nu - 1) Re(conj(E) O)`.
    pub fn mode_probabilities(&self) -> Vec<ModeProbability> {
        let d = self.modes_per_axis();
        let g = &self.geometry;
        let (sin, cos) = g.theta.sin_cos();
        let mut b = vec![0.0; d * d];
        let mut db = vec![0.0; d * d];
        for k in 0..d {
            for l in 0..d {
                b[k * d + l] = beta_magnitude(k, l, g.x, cos, sin);
                db[k * d + l] = beta_magnitude_dx(k, l, g.x, cos, sin);
            }
        }
        let imbalance = 2.0 * g.nu - 1.0;
        let c = self.crosstalk.matrix();
        let mut out = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                let row = c.row(n * d + m);
                let zero = Complex64::new(0.0, 0.0);
                let (mut even, mut odd, mut deven, mut dodd) = (zero, zero, zero, zero);
                for k in 0..d {
                    for l in 0..d {
                        let j = k * d + l;
                        if (k + l) % 2 == 0 {
                            even += row[j] * b[j];
                            deven += row[j] * db[j];
                        } else {
                            odd += row[j] * b[j];
                            dodd += row[j] * db[j];
                        }
                    }
                }
                let cross = (even.conj() * odd).re;
                let p = even.norm_sqr() + odd.norm_sqr() + 2.0 * imbalance * cross;
                let dcross = (deven.conj() * odd + even.conj() * dodd).re;
                let dp_dx = 2.0 * (even.conj() * deven).re
                    + 2.0 * (odd.conj() * dodd).re
                    + 2.0 * imbalance * dcross;
                out.push(ModeProbability {
                    n,
                    m,
                    p: p.max(0.0),
                    dp_dx,
                });
            }
        }
        out
    }
}
