//! Principal components by power iteration with deflation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Unit eigenvectors of the covariance, one per component, largest
    /// eigenvalue first. Each is signed so its largest-magnitude entry is
    /// positive.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|v| {
                v.iter()
                    .zip(row.iter().zip(&self.mean))
                    .map(|(w, (x, m))| w * (x - m))
                    .sum()
            })
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let k = self.n_components();
        let mut out = Matrix::zeros(x.n_rows(), k);
        for (r, row) in x.rows().enumerate() {
            for (c, v) in self.transform_row(row).into_iter().enumerate() {
                out.set(r, c, v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub scores: Matrix,
    pub model: PcaModel,
}

fn covariance(x: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (x.n_rows(), x.n_cols());
    let mut mean = vec![0.0; d];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![0.0; d * d];
    for row in x.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    (mean, cov)
}

fn mat_vec(a: &[f64], v: &[f64]) -> Vec<f64> {
    a.chunks_exact(v.len())
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // twice, for stability
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
    }
}

fn sign_normalize(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Top-`k` eigenpairs of the symmetric positive semidefinite `d x d` matrix
/// `a`. Stops early when the remaining spectrum is numerically zero.
fn top_eigenpairs(a: &[f64], d: usize, k: usize, seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let trace: f64 = (0..d).map(|i| a[i * d + i]).sum();
    let zero = 1e-12 * trace.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);

    for _ in 0..k {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, &vectors);
        let n0 = norm(&v);
        if n0 == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= n0);

        let mut lambda = 0.0;
        for _ in 0..MAX_ITERATIONS {
            let mut w = mat_vec(a, &v);
            orthogonalize(&mut w, &vectors);
            lambda = dot(&v, &w);
            let residual: f64 = w
                .iter()
                .zip(&v)
                .map(|(wi, vi)| (wi - lambda * vi).powi(2))
                .sum::<f64>()
                .sqrt();
            let wn = norm(&w);
            if wn <= zero {
                lambda = 0.0;
                break;
            }
            w.iter_mut().for_each(|x| *x /= wn);
            v = w;
            if residual <= TOLERANCE * lambda.abs().max(1.0) {
                break;
            }
        }
        if lambda <= zero {
            break;
        }
        sign_normalize(&mut v);
        values.push(lambda);
        vectors.push(v);
    }
    (values, vectors)
}

/// Fits centered PCA on the rows of `x`.
pub fn fit_pca(x: &Matrix, k: usize, seed: u64) -> Result<PcaModel> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!(
            "cannot take {k} components of {d} features"
        )));
    }
    let (mean, cov) = covariance(x);
    let total: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    let (eigenvalues, components) = top_eigenpairs(&cov, d, k, seed);
    if eigenvalues.len() < k {
        return Err(Error::RankDeficient {
            requested: k,
            available: eigenvalues.len(),
        });
    }
    let explained_variance_ratio = eigenvalues.iter().map(|l| l / total).collect();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
    })
}

pub(crate) fn table_matrix(table: &FeatureTable, columns: &[usize]) -> Matrix {
    let data = table
        .rows()
        .flat_map(|row| columns.iter().map(move |&c| row[c] as f64))
        .collect();
    Matrix::new(table.n_rows(), columns.len(), data)
}

/// Projects the raw feature codes onto the top `k` principal components.
pub fn project_pca(table: &FeatureTable, k: usize, seed: u64) -> Result<PcaProjection> {
    let all: Vec<usize> = (0..table.n_features()).collect();
    let x = table_matrix(table, &all);
    let model = fit_pca(&x, k, seed)?;
    Ok(PcaProjection {
        scores: model.transform(&x),
        model,
    })
}
