//! Principal component analysis via cyclic Jacobi eigendecomposition of the
//! sample covariance.

use crate::linalg::{column_mean, covariance, SquareMatrix};
use crate::{DataMatrix, Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` unit-norm directions, one per row.
    pub components: Vec<Vec<f64>>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Trace of the fitted covariance.
    pub total_variance: f64,
}

/// Eigenvalues and eigenvectors (as columns of the second matrix) of a
/// symmetric matrix, in the order the rotations leave them.
pub fn jacobi_eigen(m: &SquareMatrix) -> (Vec<f64>, SquareMatrix) {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = SquareMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).abs())
            .fold(0.0, f64::max);
        if off < OFF_DIAGONAL_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let (apk, aqk) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..n).map(|i| a.get(i, i)).collect(), v)
}

/// Indices of `values` in descending order; values within `TIE_TOL` of each
/// other keep ascending index order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..values.len()).collect();
    let mut order = Vec::with_capacity(values.len());
    while !remaining.is_empty() {
        let mut best = 0;
        for pos in 1..remaining.len() {
            let (cand, cur) = (values[remaining[pos]], values[remaining[best]]);
            if cand > cur + TIE_TOL {
                best = pos;
            }
        }
        order.push(remaining.remove(best));
    }
    order
}

/// Flips `v` so its entry of largest magnitude (first one on ties) is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits the top-`k` principal directions of `latent`.
pub fn fit(latent: &DataMatrix, k: usize) -> Result<PcaModel> {
    if k == 0 || k > latent.cols() {
        return Err(Error::Config(format!(
            "component count {k} outside 1..={}",
            latent.cols()
        )));
    }
    let cov = covariance(latent)?;
    let mean = column_mean(latent)?;
    let (values, vectors) = jacobi_eigen(&cov);
    let n = cov.dim();
    let order = descending_order(&values);
    let mut components = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &col in order.iter().take(k) {
        let mut dir: Vec<f64> = (0..n).map(|r| vectors.get(r, col)).collect();
        canonical_sign(&mut dir);
        components.push(dir);
        eigenvalues.push(values[col]);
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        total_variance: cov.trace(),
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Projects centred rows onto the components.
    pub fn transform(&self, latent: &DataMatrix) -> Result<DataMatrix> {
        if latent.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "model fitted on {} columns, got {}",
                self.dim(),
                latent.cols()
            )));
        }
        let mut out = Vec::with_capacity(latent.rows() * self.k());
        let mut centered = vec![0.0f64; self.dim()];
        for row in latent.iter_rows() {
            for (c, (&v, &mu)) in centered.iter_mut().zip(row.iter().zip(&self.mean)) {
                *c = v as f64 - mu;
            }
            for comp in &self.components {
                out.push(comp.iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>() as f32);
            }
        }
        DataMatrix::new(latent.rows(), self.k(), out)
    }

    /// Maps projected rows back into the original space.
    pub fn inverse_transform(&self, projected: &DataMatrix) -> Result<DataMatrix> {
        if projected.cols() != self.k() {
            return Err(Error::Dimension(format!(
                "model has {} components, got {} columns",
                self.k(),
                projected.cols()
            )));
        }
        let mut out = Vec::with_capacity(projected.rows() * self.dim());
        for row in projected.iter_rows() {
            for j in 0..self.dim() {
                let v = self.mean[j]
                    + row
                        .iter()
                        .zip(&self.components)
                        .map(|(&s, comp)| s as f64 * comp[j])
                        .sum::<f64>();
                out.push(v as f32);
            }
        }
        DataMatrix::new(projected.rows(), self.dim(), out)
    }

    /// Share of the total variance carried by each kept component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        if self.total_variance <= 0.0 {
            return vec![0.0; self.k()];
        }
        self.eigenvalues
            .iter()
            .map(|&l| (l / self.total_variance).clamp(0.0, 1.0))
            .collect()
    }
}
