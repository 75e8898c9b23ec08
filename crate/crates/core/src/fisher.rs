//! Fisher information per photon, reported as `w^2 F` with respect to the
//! full separation `d`.
//!
//! Internally everything is differentiated in `x = d / (2w)`; since
//! `d = 2 w x`, `w^2 F_d = F_x / 4`.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;

use crate::crosstalk::SphereVector;
use crate::error::{check_param, Error, Result};
use crate::optics::{DetectionModel, SourceGeometry};

/// Probabilities at or below this are treated as exact zeros and their
/// Fisher term is dropped.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Default Gauss-Hermite nodes per axis for direct imaging.
pub const DEFAULT_DI_NODES: usize = 96;

/// Relative error the direct-imaging quadrature must reach.
pub const DI_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMethod {
    Spade,
    DirectImaging,
    IdealReference,
}

/// Contribution of one detector output to the SPADE Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub dp_dx: f64,
    /// `(dp/dx)^2 / (4p)`, or 0 when the term was dropped.
    pub w2f: f64,
    /// Set when `p` fell at or below [`PROBABILITY_FLOOR`].
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    Modes(Vec<ModeTerm>),
    Quadrature {
        nodes: usize,
        /// Relative difference between `nodes` and `2 * nodes` rules.
        relative_error: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherResult {
    pub w2f: f64,
    pub x: f64,
    pub method: FisherMethod,
    pub diagnostics: Diagnostics,
}

impl FisherResult {
    /// Number of mode terms that hit the probability floor.
    pub fn dropped_terms(&self) -> usize {
        match &self.diagnostics {
            Diagnostics::Modes(terms) => terms.iter().filter(|t| t.dropped).count(),
            Diagnostics::Quadrature { .. } => 0,
        }
    }
}

/// SPADE Fisher information, summed over the `D^2` measured outputs.
pub fn spade_fisher(model: &DetectionModel<'_>) -> FisherResult {
    let terms: Vec<ModeTerm> = model
        .mode_probabilities()
        .into_iter()
        .map(|mp| {
            let dropped = mp.p <= PROBABILITY_FLOOR;
            let w2f = if dropped {
                0.0
            } else {
                mp.dp_dx * mp.dp_dx / (4.0 * mp.p)
            };
            ModeTerm {
                n: mp.n,
                m: mp.m,
                p: mp.p,
                dp_dx: mp.dp_dx,
                w2f,
                dropped,
            }
        })
        .collect();
    let w2f = terms.iter().map(|t| t.w2f).sum();
    let method = if model.crosstalk().kind() == crate::crosstalk::CrosstalkKind::Identity {
        FisherMethod::IdealReference
    } else {
        FisherMethod::Spade
    };
    FisherResult {
        w2f,
        x: model.geometry().x(),
        method,
        diagnostics: Diagnostics::Modes(terms),
    }
}

/// `w^2 F` only, for scans.
pub fn spade_w2f(model: &DetectionModel<'_>) -> f64 {
    model
        .mode_probabilities()
        .iter()
        .filter(|mp| mp.p > PROBABILITY_FLOOR)
        .map(|mp| mp.dp_dx * mp.dp_dx / (4.0 * mp.p))
        .sum()
}

/// Tensor Gauss-Hermite rule for the direct-imaging integral.
///
/// With `w = 1` each source contributes the density
/// `(2/pi) exp(-2 |r - r_+-|^2)`; substituting `r = s / sqrt(2)` matches the
/// Hermite weight `exp(-|s|^2)` to one source's envelope at `x = 0`.
#[derive(Debug, Clone)]
pub struct DiQuadrature {
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
}

impl DiQuadrature {
    /// Rules with `nodes` and `2 * nodes` points per axis.
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidDimension {
                dim: nodes,
                reason: "quadrature needs at least two nodes",
            });
        }
        let rule = |n: usize| -> Vec<(f64, f64)> {
            GaussHermite::new(NonZeroUsize::new(n).expect("nonzero"))
                .as_node_weight_pairs()
                .to_vec()
        };
        Ok(Self {
            coarse: rule(nodes),
            fine: rule(2 * nodes),
        })
    }

    pub fn nodes(&self) -> usize {
        self.coarse.len()
    }

    /// `w^2 F_DI` from the coarse rule only.
    pub fn w2f(&self, g: &SourceGeometry) -> f64 {
        di_integral(&self.coarse, g)
    }
}

impl Default for DiQuadrature {
    fn default() -> Self {
        Self::new(DEFAULT_DI_NODES).expect("default node count is valid")
    }
}

/// `(1/4) F_x` over the plane, divided by the Gauss-Hermite weight.
fn di_integral(rule: &[(f64, f64)], g: &SourceGeometry) -> f64 {
    let x = g.x();
    let nu = g.nu();
    let (sin, cos) = g.theta().sin_cos();
    let prefactor = (2.0 / std::f64::consts::PI) * (-2.0 * x * x).exp() * 16.0 * 0.5 / 4.0;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for &(s1, w1) in rule {
        let mut row = 0.0;
        for &(s2, w2) in rule {
            // Projection of r on the source axis.
            let z = (s1 * cos + s2 * sin) * inv_sqrt2;
            let shift = 4.0 * x * z.abs();
            let a = nu * (4.0 * x * z - shift).exp();
            let b = (1.0 - nu) * (-4.0 * x * z - shift).exp();
            let num = (z - x) * a - (z + x) * b;
            let den = a + b;
            if den > 0.0 {
                row += w2 * shift.exp() * num * num / den;
            }
        }
        total += w1 * row;
    }
    prefactor * total
}

/// Ideal direct-imaging Fisher information with a convergence check.
pub fn di_fisher(g: &SourceGeometry, quad: &DiQuadrature) -> Result<FisherResult> {
    let coarse = di_integral(&quad.coarse, g);
    let fine = di_integral(&quad.fine, g);
    let relative_error = if fine > 0.0 {
        (fine - coarse).abs() / fine
    } else {
        (fine - coarse).abs()
    };
    if relative_error > DI_TOLERANCE {
        return Err(Error::Accuracy {
            estimate: relative_error,
            tolerance: DI_TOLERANCE,
        });
    }
    Ok(FisherResult {
        w2f: fine,
        x: g.x(),
        method: FisherMethod::DirectImaging,
        diagnostics: Diagnostics::Quadrature {
            nodes: quad.fine.len(),
            relative_error,
        },
    })
}

/// `x -> 0` limit of ideal direct imaging, `(2nu - 1)^2`.
pub fn di_asymptote(nu: f64) -> f64 {
    (2.0 * nu - 1.0).powi(2)
}

/// Weak-crosstalk small-separation limit `q0` of SPADE with two modes per
/// axis, to first order in `mu`, as a function of the Gell-Mann direction.
///
/// Components are used 1-based in the comments: `l1, l7` couple mode 00 to
/// mode 01, `l2, l8` couple 00 to 10, `l13..l15` are diagonal.
pub fn asymptotic_q0_d2(lambda: &SphereVector, mu: f64, nu: f64, theta: f64) -> Result<f64> {
    if lambda.len() != 15 {
        return Err(Error::WrongLength {
            expected: 15,
            actual: lambda.len(),
        });
    }
    check_param("mu", mu, mu >= 0.0, "must be nonnegative")?;
    check_param("nu", nu, (0.0..=1.0).contains(&nu), "must lie in [0, 1]")?;
    let l = |k: usize| lambda.components()[k - 1];
    let (s3, s6) = (3f64.sqrt(), 6f64.sqrt());
    let (sin, cos) = theta.sin_cos();

    let den_y = l(1).powi(2) + l(7).powi(2);
    let den_x = l(2).powi(2) + l(8).powi(2);
    let y_term = if den_y > 0.0 {
        sin * sin
            * (36.0 * l(7).powi(2)
                + 12.0 * mu * l(7) * l(1) * (-6.0 * l(13) + 2.0 * s3 * l(14) + s6 * l(15)))
            / den_y
    } else {
        0.0
    };
    let x_term = if den_x > 0.0 {
        cos * cos
            * (36.0 * l(8).powi(2)
                + 12.0 * s3 * mu * l(8) * l(2) * (-4.0 * l(14) + 2f64.sqrt() * l(15)))
            / den_x
    } else {
        0.0
    };
    Ok((2.0 * nu - 1.0).powi(2) / 36.0 * (y_term + x_term))
}

/// Mean and standard deviation of `q0` over uniformly random directions.
pub fn asymptotic_q0_ensemble_stats(nu: f64, theta: f64) -> Result<(f64, f64)> {
    check_param("nu", nu, (0.0..=1.0).contains(&nu), "must lie in [0, 1]")?;
    let a = (2.0 * nu - 1.0).powi(2);
    let mean = 0.5 * a;
    let std = 0.25 * a * ((3.0 + (4.0 * theta).cos()) / 2.0).sqrt();
    Ok((mean, std))
}

/// Leading-order small-separation coefficients `(q0, q1, q2)` of
/// `w^2 F = q0 + q1 x + q2 x^2` under uniform crosstalk, as published.
pub fn uniform_q_coefficients(nu: f64, theta: f64, p_c: f64) -> Result<(f64, f64, f64)> {
    check_param("nu", nu, (0.0..=1.0).contains(&nu), "must lie in [0, 1]")?;
    check_param("p_c", p_c, p_c > 0.0 && p_c < 1.0, "must lie in (0, 1)")?;
    let (sin, cos) = theta.sin_cos();
    let q0 = (2.0 * nu - 1.0).powi(2);
    let q1 = 2.0 * nu / p_c.sqrt() * (1.0 - nu) * (2.0 * nu - 1.0) * (sin.powi(3) + cos.powi(3));
    let q2 = -nu / p_c
        * (1.0 - nu)
        * (4.0 * nu - 1.0)
        * (4.0 * nu - 3.0)
        * (3.0 + (4.0 * theta).cos());
    Ok((q0, q1, q2))
}
