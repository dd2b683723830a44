use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-8;
const RESULT_TOL: f64 = 1e-6;

/// Gaussian moments of two feature sets.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub mu_w: DVector<f64>,
    pub sigma_w: DMatrix<f64>,
}

fn moments(x: &Array2<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, d) = x.dim();
    if n < 2 || d == 0 {
        return Err(Error::Argument(format!(
            "feature matrix {n}x{d} needs at least 2 rows and 1 column"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("non-finite feature value".into()));
    }
    let m = DMatrix::from_row_iterator(n, d, x.iter().copied());
    let mu = m.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |r, c| m[(r, c)] - mu[c]);
    let sigma = centered.transpose() * &centered / (n - 1) as f64;
    Ok((mu, sigma))
}

impl FeatureStats {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>, mu_w: DVector<f64>, sigma_w: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if mu_w.len() != d || sigma.shape() != (d, d) || sigma_w.shape() != (d, d) {
            return Err(Error::Argument("inconsistent feature dimensions".into()));
        }
        for s in [&sigma, &sigma_w] {
            let scale = s.amax().max(1.0);
            if (s - s.transpose()).amax() > SYMMETRY_TOL * scale {
                return Err(Error::NumericDomain("covariance is not symmetric".into()));
            }
        }
        Ok(Self { mu, sigma, mu_w, sigma_w })
    }

    /// Means and sample covariances of two `samples x features` matrices.
    pub fn from_features(x: &Array2<f64>, y: &Array2<f64>) -> Result<Self> {
        let (mu, sigma) = moments(x)?;
        let (mu_w, sigma_w) = moments(y)?;
        Self::new(mu, sigma, mu_w, sigma_w)
    }
}

fn clamped_eigenvalues(m: DMatrix<f64>, what: &str) -> Result<DVector<f64>> {
    let sym = (&m + m.transpose()) * 0.5;
    let scale = sym.amax().max(1.0);
    let eig = SymmetricEigen::new(sym);
    let mut values = eig.eigenvalues;
    for v in values.iter_mut() {
        if *v < -EIGEN_TOL * scale {
            return Err(Error::NumericDomain(format!("{what} has eigenvalue {v}")));
        }
        *v = v.max(0.0);
    }
    Ok(values)
}

fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let values = clamped_eigenvalues(m.clone(), "covariance")?;
    let root = DMatrix::from_diagonal(&values.map(f64::sqrt));
    Ok(&eig.eigenvectors * root * eig.eigenvectors.transpose())
}

/// `|mu - mu_w|^2 + tr(S + S_w - 2 (S S_w)^(1/2))`, with the trace of the
/// product root taken as `tr((S^(1/2) S_w S^(1/2))^(1/2))`.
pub fn frechet_distance(stats: &FeatureStats) -> Result<f64> {
    clamped_eigenvalues(stats.sigma_w.clone(), "covariance")?;
    let root = psd_sqrt(&stats.sigma)?;
    let inner = &root * &stats.sigma_w * &root;
    let cross: f64 = clamped_eigenvalues(inner, "covariance product")?.iter().map(|v| v.sqrt()).sum();
    let mean_term = (&stats.mu - &stats.mu_w).norm_squared();
    let d = mean_term + stats.sigma.trace() + stats.sigma_w.trace() - 2.0 * cross;
    if d < -RESULT_TOL {
        return Err(Error::NumericDomain(format!("negative Fréchet distance {d}")));
    }
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(mu: &[f64], var: &[f64], mu_w: &[f64], var_w: &[f64]) -> FeatureStats {
        FeatureStats::new(
            DVector::from_column_slice(mu),
            DMatrix::from_diagonal(&DVector::from_column_slice(var)),
            DVector::from_column_slice(mu_w),
            DMatrix::from_diagonal(&DVector::from_column_slice(var_w)),
        )
        .unwrap()
    }

    #[test]
    fn identical_distributions_have_zero_distance() {
        let s = diag(&[1.0, 2.0], &[3.0, 0.5], &[1.0, 2.0], &[3.0, 0.5]);
        assert!(frechet_distance(&s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn scalar_case() {
        let s = diag(&[1.0], &[4.0], &[3.0], &[9.0]);
        assert!((frechet_distance(&s).unwrap() - (4.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn full_covariance_is_symmetric_in_its_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((40, 5), |_| rng.random_range(-1.0..1.0));
        let y = Array2::from_shape_fn((30, 5), |(_, c)| rng.random_range(-2.0..2.0) + c as f64);
        let a = FeatureStats::from_features(&x, &y).unwrap();
        let b = FeatureStats::from_features(&y, &x).unwrap();
        let (da, db) = (frechet_distance(&a).unwrap(), frechet_distance(&b).unwrap());
        assert!(da > 1.0);
        assert!((da - db).abs() < 1e-9 * da);
        assert!(frechet_distance(&FeatureStats::from_features(&x, &x).unwrap()).unwrap() < 1e-6);
    }

    #[test]
    fn rotated_covariances_match_their_diagonal_form() {
        // Same rotation on both sides leaves the distance unchanged.
        let (c, s) = (0.6, 0.8);
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[4.0, 1.0]));
        let b = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 9.0]));
        let rot = FeatureStats::new(
            DVector::zeros(2),
            &r * &a * r.transpose(),
            DVector::zeros(2),
            &r * &b * r.transpose(),
        )
        .unwrap();
        let expected = (2.0f64 - 1.0).powi(2) + (1.0f64 - 3.0).powi(2);
        assert!((frechet_distance(&rot).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_covariances() {
        let neg = diag(&[0.0], &[-1.0], &[0.0], &[1.0]);
        assert_eq!(frechet_distance(&neg).unwrap_err().code(), "numeric-domain");
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let err = FeatureStats::new(DVector::zeros(2), asym, DVector::zeros(2), DMatrix::identity(2, 2)).unwrap_err();
        assert_eq!(err.code(), "numeric-domain");
        let err = FeatureStats::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DVector::zeros(3),
            DMatrix::identity(3, 3),
        )
        .unwrap_err();
        assert_eq!(err.code(), "argument");
    }
}
