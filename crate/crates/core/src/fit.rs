//! Least-squares polynomial fits and rank correlation used by the analysis
//! checks.

use crate::error::{Error, Result};

/// Coefficients `[a0, a1, ..., a_degree]` minimizing `sum (y - sum a_k x^k)^2`.
///
/// Abscissae are rescaled to `[-1, 1]` before a Householder QR solve, then
/// the coefficients are mapped back.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    let cols = degree + 1;
    if n != ys.len() {
        return Err(Error::WrongLength {
            expected: n,
            actual: ys.len(),
        });
    }
    if n < cols {
        return Err(Error::EmptyInput);
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let half = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    // Column-major design matrix in the scaled variable.
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|k| xs.iter().map(|&x| ((x - center) / half).powi(k as i32)).collect())
        .collect();
    let mut b = ys.to_vec();

    for k in 0..cols {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ContractViolation("rank-deficient fit".into()));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        for (c, vi) in b[k..].iter_mut().zip(&v) {
            *c -= f * vi;
        }
    }

    let mut scaled = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = ((k + 1)..cols).map(|j| a[j][k] * scaled[j]).sum();
        scaled[k] = (b[k] - s) / a[k][k];
    }

    // Expand sum_k c_k ((x - center)/half)^k into powers of x.
    let mut out = vec![0.0; cols];
    let mut binom = vec![vec![0.0; cols]; cols];
    for i in 0..cols {
        binom[i][0] = 1.0;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + if j < i { binom[i - 1][j] } else { 0.0 };
        }
    }
    for (k, &ck) in scaled.iter().enumerate() {
        let scale = ck / half.powi(k as i32);
        for j in 0..=k {
            out[j] += scale * binom[k][j] * (-center).powi((k - j) as i32);
        }
    }
    Ok(out)
}

/// Slope of the ordinary least-squares line through `(xs, ys)`.
pub fn slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(polyfit(xs, ys, 1)?[1])
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::WrongLength {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    Ok(pearson(&rx, &ry))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}
