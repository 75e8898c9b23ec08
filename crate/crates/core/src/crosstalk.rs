//! Crosstalk matrices acting on the `D x D` block of Hermite-Gauss modes.
//!
//! Rows and columns are indexed by the mode pair `(n, m)` flattened as
//! `n * D + m`. Random generic crosstalk is `exp(-i mu lambda.G)` with
//! `lambda` uniform on the unit sphere of `R^{D^4-1}` and `G` the Gell-Mann
//! basis of su(D^2); `mu` is fixed from the requested strength through the
//! ensemble-average law `p_c = 2 mu^2 / (D^4 - 1)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::linalg::{gellmann_basis, unitary_exp, ComplexMatrix};

/// Unit vector of Gell-Mann coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereVector(Vec<f64>);

impl SphereVector {
    /// Normalizes `components`; fails on an empty or zero vector.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|v| v * v).sum::<f64>().sqrt();
        if components.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ContractViolation(
                "sphere vector needs a finite nonzero direction".into(),
            ));
        }
        Ok(Self(components.into_iter().map(|v| v / norm).collect()))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Independent standard normals, normalized: uniform on the sphere.
pub fn sample_sphere_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<SphereVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "sphere dimension must be positive",
        });
    }
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(v) = SphereVector::new(raw) {
            return Ok(v);
        }
    }
}

/// Number of su(D^2) generators, `D^4 - 1`.
pub fn generator_count(modes_per_axis: usize) -> usize {
    modes_per_axis.pow(4) - 1
}

/// `mu = sqrt(p_c (D^4 - 1) / 2)`.
pub fn mu_for_strength(p_c: f64, modes_per_axis: usize) -> Result<f64> {
    check_param("p_c", p_c, (0.0..1.0).contains(&p_c), "must lie in [0, 1)")?;
    check_dim(modes_per_axis, 1)?;
    Ok((p_c * generator_count(modes_per_axis) as f64 / 2.0).sqrt())
}

/// Ensemble-average strength `2 mu^2 / (D^4 - 1)` for a given `mu`.
pub fn strength_for_mu(mu: f64, modes_per_axis: usize) -> f64 {
    2.0 * mu * mu / generator_count(modes_per_axis) as f64
}

fn check_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "too few modes per axis",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrosstalkKind {
    Identity,
    /// `exp(-i mu lambda.G)`, unitary.
    Unitary,
    /// Constant off-diagonal `sqrt(p_c)`; a model matrix, not unitary.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    modes_per_axis: usize,
    matrix: ComplexMatrix,
    nominal_strength: f64,
    mu: f64,
    kind: CrosstalkKind,
}

impl CrosstalkMatrix {
    pub fn identity(modes_per_axis: usize) -> Result<Self> {
        check_dim(modes_per_axis, 1)?;
        Ok(Self {
            modes_per_axis,
            matrix: ComplexMatrix::identity(modes_per_axis * modes_per_axis),
            nominal_strength: 0.0,
            mu: 0.0,
            kind: CrosstalkKind::Identity,
        })
    }

    /// Wraps an arbitrary square matrix of side `D^2`.
    pub fn from_matrix(
        modes_per_axis: usize,
        matrix: ComplexMatrix,
        nominal_strength: f64,
        mu: f64,
        kind: CrosstalkKind,
    ) -> Result<Self> {
        check_dim(modes_per_axis, 1)?;
        let side = modes_per_axis * modes_per_axis;
        if matrix.rows() != side || matrix.cols() != side {
            return Err(Error::ContractViolation(format!(
                "crosstalk for D = {modes_per_axis} needs a {side}x{side} matrix"
            )));
        }
        check_param(
            "nominal_strength",
            nominal_strength,
            (0.0..1.0).contains(&nominal_strength),
            "must lie in [0, 1)",
        )?;
        check_param("mu", mu, mu >= 0.0, "must be nonnegative")?;
        Ok(Self {
            modes_per_axis,
            matrix,
            nominal_strength,
            mu,
            kind,
        })
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes_per_axis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Entry `c_{nm,kl}`.
    pub fn entry(&self, n: usize, m: usize, k: usize, l: usize) -> Complex64 {
        let d = self.modes_per_axis;
        self.matrix[(n * d + m, k * d + l)]
    }

    /// The requested strength `p_c` this matrix was generated for.
    pub fn nominal_strength(&self) -> f64 {
        self.nominal_strength
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kind(&self) -> CrosstalkKind {
        self.kind
    }

    /// The realized strength of this particular matrix.
    pub fn measured_strength(&self) -> f64 {
        strength(self)
    }

    /// Relabels modes `(n, m) -> (m, n)` on both sides.
    pub fn transposed_modes(&self) -> Self {
        let d = self.modes_per_axis;
        let swap = |i: usize| (i % d) * d + i / d;
        let matrix = ComplexMatrix::from_fn(d * d, d * d, |i, j| self.matrix[(swap(i), swap(j))]);
        Self {
            matrix,
            ..self.clone()
        }
    }

    pub fn to_record(&self) -> CrosstalkRecord {
        let side = self.matrix.rows();
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..side)
                .map(|i| self.matrix.row(i).iter().map(f).collect())
                .collect()
        };
        CrosstalkRecord {
            d: self.modes_per_axis,
            kind: self.kind,
            mu: self.mu,
            nominal_strength: self.nominal_strength,
            measured_strength: self.measured_strength(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }

    pub fn from_record(record: &CrosstalkRecord) -> Result<Self> {
        let side = record.d * record.d;
        if record.re.len() != side
            || record.im.len() != side
            || record.re.iter().chain(&record.im).any(|r| r.len() != side)
        {
            return Err(Error::ContractViolation(
                "crosstalk record has inconsistent shape".into(),
            ));
        }
        let data = record
            .re
            .iter()
            .flatten()
            .zip(record.im.iter().flatten())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::from_row_major(side, side, data)?;
        Self::from_matrix(record.d, matrix, record.nominal_strength, record.mu, record.kind)
    }
}

/// JSON form of a crosstalk matrix, for audit and replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkRecord {
    #[serde(rename = "D")]
    pub d: usize,
    pub kind: CrosstalkKind,
    pub mu: f64,
    pub nominal_strength: f64,
    pub measured_strength: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// `exp(-i mu lambda.G)` for a given direction and angle.
pub fn crosstalk_from_direction(
    modes_per_axis: usize,
    lambda: &SphereVector,
    mu: f64,
) -> Result<CrosstalkMatrix> {
    check_dim(modes_per_axis, 2)?;
    check_param("mu", mu, mu >= 0.0, "must be nonnegative")?;
    let basis = gellmann_basis(modes_per_axis * modes_per_axis)?;
    let h = basis.combine(lambda.components())?;
    let matrix = if mu == 0.0 {
        ComplexMatrix::identity(h.rows())
    } else {
        unitary_exp(&h, -mu)?
    };
    let nominal = strength_for_mu(mu, modes_per_axis);
    CrosstalkMatrix::from_matrix(
        modes_per_axis,
        matrix,
        nominal.min(1.0 - f64::EPSILON),
        mu,
        CrosstalkKind::Unitary,
    )
}

/// Random generic crosstalk with `mu` chosen directly.
pub fn random_crosstalk_with_mu<R: Rng + ?Sized>(
    modes_per_axis: usize,
    mu: f64,
    rng: &mut R,
) -> Result<CrosstalkMatrix> {
    check_dim(modes_per_axis, 2)?;
    let lambda = sample_sphere_vector(generator_count(modes_per_axis), rng)?;
    crosstalk_from_direction(modes_per_axis, &lambda, mu)
}

/// Random generic crosstalk of nominal strength `p_c`.
pub fn random_crosstalk<R: Rng + ?Sized>(
    modes_per_axis: usize,
    p_c: f64,
    rng: &mut R,
) -> Result<CrosstalkMatrix> {
    check_dim(modes_per_axis, 2)?;
    let mu = mu_for_strength(p_c, modes_per_axis)?;
    if mu == 0.0 {
        return CrosstalkMatrix::identity(modes_per_axis);
    }
    let mut c = random_crosstalk_with_mu(modes_per_axis, mu, rng)?;
    c.nominal_strength = p_c;
    Ok(c)
}

/// Diagonal one, every off-diagonal entry `sqrt(p_c)`.
pub fn uniform_crosstalk(modes_per_axis: usize, p_c: f64) -> Result<CrosstalkMatrix> {
    check_dim(modes_per_axis, 2)?;
    check_param("p_c", p_c, (0.0..1.0).contains(&p_c), "must lie in [0, 1)")?;
    let side = modes_per_axis * modes_per_axis;
    let off = Complex64::new(p_c.sqrt(), 0.0);
    let matrix = ComplexMatrix::from_fn(side, side, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            off
        }
    });
    Ok(CrosstalkMatrix {
        modes_per_axis,
        matrix,
        nominal_strength: p_c,
        mu: 0.0,
        kind: CrosstalkKind::Uniform,
    })
}

/// Mean squared modulus of the off-diagonal entries.
pub fn strength(c: &CrosstalkMatrix) -> f64 {
    let m = c.matrix();
    let side = m.rows();
    if side < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..side {
        for (j, z) in m.row(i).iter().enumerate() {
            if i != j {
                sum += z.norm_sqr();
            }
        }
    }
    sum / (side * (side - 1)) as f64
}
