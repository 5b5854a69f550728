//! Class-weighted ridge classifier.
//!
//! Features are standardised, labels coded as -1/+1 and each sample weighted
//! by `N / (2 N_c)`. With weighted-centred design `A = sqrt(s) (Z - z_w)` the
//! intercept direction `sqrt(s)` is orthogonal to the columns of `A`, so the
//! hat matrix splits into an unpenalised intercept projection plus the ridge
//! smoother. One eigendecomposition (of `A A^T` or `A^T A`, whichever is
//! smaller) then gives exact leave-one-out residuals for every lambda.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::check_training_set;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// `w_c = N / (2 N_c)` for classes 0 and 1.
pub fn balanced_class_weights(y: &[u8]) -> [f64; 2] {
    let n = y.len() as f64;
    let n1 = y.iter().filter(|&&l| l == 1).count() as f64;
    let n0 = n - n1;
    [n / (2.0 * n0), n / (2.0 * n1)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    weights: Vec<f64>,
    intercept: f64,
    lambda: f64,
    feature_means: Vec<f64>,
    feature_scales: Vec<f64>,
    loo_errors: Vec<(f64, f64)>,
}

impl RidgeModel {
    pub fn from_parts(
        weights: Vec<f64>,
        intercept: f64,
        lambda: f64,
        feature_means: Vec<f64>,
        feature_scales: Vec<f64>,
    ) -> Result<Self> {
        let d = weights.len();
        if feature_means.len() != d || feature_scales.len() != d {
            return Err(Error::Format("ridge vectors differ in length".into()));
        }
        if !(lambda > 0.0) || feature_scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Format("ridge lambda and scales must be positive".into()));
        }
        Ok(Self { weights, intercept, lambda, feature_means, feature_scales, loo_errors: Vec::new() })
    }

    pub(crate) fn with_loo_errors(mut self, loo: Vec<(f64, f64)>) -> Self {
        self.loo_errors = loo;
        self
    }

    /// Coefficients on standardised features.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn feature_means(&self) -> &[f64] {
        &self.feature_means
    }

    pub fn feature_scales(&self) -> &[f64] {
        &self.feature_scales
    }

    /// `(lambda, weighted LOO squared error)` for each grid value tried.
    pub fn loo_errors(&self) -> &[(f64, f64)] {
        &self.loo_errors
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: x.cols() });
        }
        Ok(x.iter_rows()
            .map(|r| {
                let mut s = self.intercept;
                for (j, &v) in r.iter().enumerate() {
                    s += (v - self.feature_means[j]) / self.feature_scales[j] * self.weights[j];
                }
                s
            })
            .collect())
    }

    /// Plain-text dump: header lines then one `index weight mean scale` row per feature.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# ridge classifier\nlambda {}\nintercept {}\nfeatures {}\n",
            self.lambda,
            self.intercept,
            self.n_features()
        );
        for j in 0..self.n_features() {
            s.push_str(&format!(
                "{j} {} {} {}\n",
                self.weights[j], self.feature_means[j], self.feature_scales[j]
            ));
        }
        s
    }
}

/// Row order that depends only on row contents, so fitting is invariant
/// (bit for bit) to any permutation of the training rows.
fn canonical_order(x: &FeatureMatrix, y: &[u8]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| {
        y[a].cmp(&y[b]).then_with(|| {
            x.row(a)
                .iter()
                .zip(x.row(b))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

fn standardisation(x: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (x.rows(), x.cols());
    let mut means = vec![0.0; d];
    let mut scales = vec![1.0; d];
    for j in 0..d {
        let first = x.get(0, j);
        if (0..n).all(|i| x.get(i, j) == first) {
            means[j] = first;
            continue;
        }
        let mean = (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
        means[j] = mean;
        scales[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    (means, scales)
}

/// Fits on every lambda in `lambda_grid` and keeps the one with the lowest
/// weighted leave-one-out squared error (first wins ties).
pub fn fit_ridge(x: &FeatureMatrix, y: &[u8], lambda_grid: &[f64]) -> Result<RidgeModel> {
    let counts = check_training_set(x, y)?;
    if x.rows() < 4 {
        return Err(Error::InvalidInput(format!("ridge needs at least 4 samples, got {}", x.rows())));
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidInput(format!("lambda grid must be positive: {lambda_grid:?}")));
    }
    let order = canonical_order(x, y);
    let x = x.select_rows(&order);
    let y: Vec<u8> = order.iter().map(|&i| y[i]).collect();
    let (n, d) = (x.rows(), x.cols());

    let (means, scales) = standardisation(&x);
    let class_w = [n as f64 / (2.0 * counts[0] as f64), n as f64 / (2.0 * counts[1] as f64)];
    let s: Vec<f64> = y.iter().map(|&l| class_w[l as usize]).collect();
    let s_sum: f64 = s.iter().sum();
    let target: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let z = DMatrix::from_fn(n, d, |i, j| (x.get(i, j) - means[j]) / scales[j]);
    let z_w: Vec<f64> = (0..d).map(|j| (0..n).map(|i| s[i] * z[(i, j)]).sum::<f64>() / s_sum).collect();
    let y_w = s.iter().zip(&target).map(|(si, ti)| si * ti).sum::<f64>() / s_sum;
    let sqrt_s: Vec<f64> = s.iter().map(|v| v.sqrt()).collect();
    let a = DMatrix::from_fn(n, d, |i, j| sqrt_s[i] * (z[(i, j)] - z_w[j]));
    let t = DVector::from_fn(n, |i, _| sqrt_s[i] * (target[i] - y_w));

    let solver = Solver::new(&a, &t);
    let intercept_leverage: Vec<f64> = s.iter().map(|si| si / s_sum).collect();
    let mut loo_errors = Vec::with_capacity(lambda_grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambda_grid {
        let (fitted, leverage) = solver.fitted_and_leverage(lambda);
        let err: f64 = (0..n)
            .map(|i| {
                let h = (intercept_leverage[i] + leverage[i]).min(1.0 - 1e-12);
                let r = (t[i] - fitted[i]) / (1.0 - h);
                r * r
            })
            .sum();
        loo_errors.push((lambda, err));
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((lambda, err));
        }
    }
    let lambda = best.expect("grid non-empty").0;
    let w = solver.weights(&a, lambda);
    let intercept = y_w - z_w.iter().zip(w.iter()).map(|(m, wj)| m * wj).sum::<f64>();
    Ok(RidgeModel {
        weights: w.iter().copied().collect(),
        intercept,
        lambda,
        feature_means: means,
        feature_scales: scales,
        loo_errors,
    })
}

/// Spectral form of the ridge problem on whichever Gram matrix is smaller.
enum Solver {
    /// `A A^T = Q diag(e) Q^T`; `qt_t = Q^T t`.
    Dual { q: DMatrix<f64>, e: Vec<f64>, qt_t: DVector<f64> },
    /// `A^T A = V diag(e) V^T`; `av = A V`, `vt_at_t = V^T A^T t`.
    Primal { v: DMatrix<f64>, e: Vec<f64>, av: DMatrix<f64>, vt_at_t: DVector<f64> },
}

impl Solver {
    fn new(a: &DMatrix<f64>, t: &DVector<f64>) -> Self {
        let (n, d) = a.shape();
        if n <= d {
            let k = a * a.transpose();
            let eig = SymmetricEigen::new(k);
            let e = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
            let qt_t = eig.eigenvectors.transpose() * t;
            Solver::Dual { q: eig.eigenvectors, e, qt_t }
        } else {
            let g = a.transpose() * a;
            let eig = SymmetricEigen::new(g);
            let e = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
            let av = a * &eig.eigenvectors;
            let vt_at_t = av.transpose() * t;
            Solver::Primal { v: eig.eigenvectors, e, av, vt_at_t }
        }
    }

    /// Fitted values `A w` and ridge leverages `diag(A (A^T A + lambda I)^-1 A^T)`.
    fn fitted_and_leverage(&self, lambda: f64) -> (DVector<f64>, Vec<f64>) {
        match self {
            Solver::Dual { q, e, qt_t } => {
                let shrink: Vec<f64> = e.iter().map(|&ev| ev / (ev + lambda)).collect();
                let coef = DVector::from_fn(e.len(), |j, _| shrink[j] * qt_t[j]);
                let fitted = q * coef;
                let leverage = (0..q.nrows())
                    .map(|i| (0..e.len()).map(|j| q[(i, j)].powi(2) * shrink[j]).sum())
                    .collect();
                (fitted, leverage)
            }
            Solver::Primal { e, av, vt_at_t, .. } => {
                let inv: Vec<f64> = e.iter().map(|&ev| 1.0 / (ev + lambda)).collect();
                let coef = DVector::from_fn(e.len(), |j, _| inv[j] * vt_at_t[j]);
                let fitted = av * coef;
                let leverage = (0..av.nrows())
                    .map(|i| (0..e.len()).map(|j| av[(i, j)].powi(2) * inv[j]).sum())
                    .collect();
                (fitted, leverage)
            }
        }
    }

    fn weights(&self, a: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
        match self {
            Solver::Dual { q, e, qt_t } => {
                let coef = DVector::from_fn(e.len(), |j, _| qt_t[j] / (e[j] + lambda));
                a.transpose() * (q * coef)
            }
            Solver::Primal { v, e, vt_at_t, .. } => {
                let coef = DVector::from_fn(e.len(), |j, _| vt_at_t[j] / (e[j] + lambda));
                v * coef
            }
        }
    }
}

/// Label 1 iff the score is non-negative (a zero score counts as class 1).
pub fn predict_ridge(m: &RidgeModel, x: &FeatureMatrix) -> Result<Vec<u8>> {
    Ok(m.decision_function(x)?.into_iter().map(|s| u8::from(s >= 0.0)).collect())
}
