//! Score matrices and their first/second-moment summaries.
//!
//! A [`ScoreMatrix`] holds the n x J per-observation policy scores X_i; a
//! [`ScoreSummary`] caches the mean, the 1/n covariance, and its Cholesky
//! factor. All downstream Mahalanobis geometry goes through the cached factor.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Covariance pivot guard: the smallest Cholesky pivot (squared, i.e. the
/// smallest conditional variance) must exceed this fraction of the largest
/// diagonal entry, otherwise the covariance is treated as degenerate.
const PIVOT_RATIO_FLOOR: f64 = 1e-12;

/// n x J matrix of per-observation policy scores; all entries finite.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    data: DMatrix<f64>,
}

impl ScoreMatrix {
    /// Wrap a matrix of scores, validating shape and finiteness.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("score matrix must be nonempty"));
        }
        if let Some((i, j)) = (0..data.nrows())
            .flat_map(|i| (0..data.ncols()).map(move |j| (i, j)))
            .find(|&(i, j)| !data[(i, j)].is_finite())
        {
            return Err(Error::invalid(format!(
                "score matrix entry ({i}, {j}) is not finite"
            )));
        }
        Ok(ScoreMatrix { data })
    }

    /// Build from row slices (each of length J).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("score matrix must be nonempty"));
        }
        let j = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != j) {
            return Err(Error::DimensionMismatch {
                expected: j,
                got: rows[i].len(),
            });
        }
        ScoreMatrix::new(DMatrix::from_fn(rows.len(), j, |i, c| rows[i][c]))
    }

    /// Number of observations n.
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Number of policies J.
    pub fn num_policies(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Row i as a vector.
    pub fn row(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }
}

/// Mean, covariance (1/n convention), sample size, and the cached lower
/// Cholesky factor of the covariance.
#[derive(Debug, Clone)]
pub struct ScoreSummary {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    n: usize,
}

impl ScoreSummary {
    /// Assemble a summary from precomputed moments. The covariance must be
    /// symmetric and numerically positive definite.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>, n: usize) -> Result<Self> {
        let j = mean.len();
        if cov.nrows() != j || cov.ncols() != j {
            return Err(Error::DimensionMismatch {
                expected: j,
                got: cov.nrows(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("sample size must be positive"));
        }
        for a in 0..j {
            for b in 0..a {
                if (cov[(a, b)] - cov[(b, a)]).abs() > 1e-8 * (1.0 + cov[(a, a)].abs()) {
                    return Err(Error::invalid("covariance is not symmetric"));
                }
            }
        }
        let chol_l = cholesky_guarded(&cov)?;
        Ok(ScoreSummary {
            mean,
            cov,
            chol_l,
            n,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower Cholesky factor L with cov = L L^T.
    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.chol_l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_policies(&self) -> usize {
        self.mean.len()
    }

    /// Solve cov * x = b through the cached factor.
    pub fn cov_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut y = b.clone();
        self.chol_l.solve_lower_triangular_mut(&mut y);
        self.chol_l.tr_solve_lower_triangular_mut(&mut y);
        y
    }
}

/// Lower Cholesky factor with an explicit degeneracy guard. nalgebra's
/// factorization alone can accept matrices that are singular to working
/// precision; the pivot-ratio floor turns those into a typed error.
fn cholesky_guarded(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = cov.diagonal().amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::DegenerateCovariance(
            "covariance diagonal is zero or not finite".into(),
        ));
    }
    let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(|| {
        Error::DegenerateCovariance("covariance is not positive definite".into())
    })?;
    let l = chol.unpack();
    for i in 0..l.nrows() {
        let pivot = l[(i, i)] * l[(i, i)];
        if !(pivot > PIVOT_RATIO_FLOOR * scale) {
            return Err(Error::DegenerateCovariance(format!(
                "conditional variance of column {i} is {pivot:.3e} against scale {scale:.3e}"
            )));
        }
    }
    Ok(l)
}

/// Mean and 1/n covariance of the score rows, with the Cholesky factor cached.
/// Errors if n < 2 or the covariance fails the positive-definiteness guard.
pub fn summarize(scores: &ScoreMatrix) -> Result<ScoreSummary> {
    let n = scores.n();
    let j = scores.num_policies();
    if n < 2 {
        return Err(Error::invalid("summarize requires at least two rows"));
    }
    let x = scores.matrix();
    let mean = DVector::from_fn(j, |c, _| x.column(c).sum() / n as f64);
    let mut cov = DMatrix::zeros(j, j);
    for i in 0..n {
        for a in 0..j {
            let da = x[(i, a)] - mean[a];
            for b in 0..=a {
                cov[(a, b)] += da * (x[(i, b)] - mean[b]);
            }
        }
    }
    for a in 0..j {
        for b in 0..=a {
            let v = cov[(a, b)] / n as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let chol_l = cholesky_guarded(&cov)?;
    Ok(ScoreSummary {
        mean,
        cov,
        chol_l,
        n,
    })
}

/// Quadratic form z^T cov^{ -1 } z through the cached factor. Panics if the
/// dimension of z does not match the summary.
pub fn mahalanobis_form(z: &DVector<f64>, summary: &ScoreSummary) -> f64 {
    assert_eq!(
        z.len(),
        summary.num_policies(),
        "mahalanobis_form dimension mismatch"
    );
    let mut y = z.clone();
    summary.chol_l.solve_lower_triangular_mut(&mut y);
    y.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn summarize_hand_example() {
        // Two columns, four rows; covariance under the 1/n convention.
        let m = ScoreMatrix::from_rows(&[
            vec![1.0, 2.0],
            vec![3.0, 2.0],
            vec![2.0, 0.0],
            vec![0.0, 4.0],
        ])
        .unwrap();
        let s = summarize(&m).unwrap();
        assert_eq!(s.n(), 4);
        assert!((s.mean()[0] - 1.5).abs() < 1e-15);
        assert!((s.mean()[1] - 2.0).abs() < 1e-15);
        // E[(X1-1.5)^2] = (0.25+2.25+0.25+2.25)/4 = 1.25
        assert!((s.cov()[(0, 0)] - 1.25).abs() < 1e-14);
        // E[(X2-2)^2] = (0+0+4+4)/4 = 2
        assert!((s.cov()[(1, 1)] - 2.0).abs() < 1e-14);
        // E[(X1-1.5)(X2-2)] = (0+0+1+(-3))/4 = -0.5... check:
        // (-0.5*0 + 1.5*0 + 0.5*-2 + -1.5*2)/4 = (-1 - 3)/4 = -1.0
        assert!((s.cov()[(0, 1)] + 1.0).abs() < 1e-14);
        assert_eq!(s.cov()[(0, 1)], s.cov()[(1, 0)]);
    }

    #[test]
    fn cholesky_reconstructs_covariance() {
        let mut stream = RngStream::derive(31, &[0]);
        let m = ScoreMatrix::from_rows(
            &(0..40)
                .map(|_| {
                    let z = stream.sample_standard_normal_vec(3);
                    vec![z[0], 0.5 * z[0] + z[1], z[2] - 0.2 * z[1]]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let s = summarize(&m).unwrap();
        let l = s.chol_lower();
        let rebuilt = l * l.transpose();
        let scale = s.cov().diagonal().amax();
        for a in 0..3 {
            for b in 0..3 {
                assert!((rebuilt[(a, b)] - s.cov()[(a, b)]).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn rank_one_covariance_is_degenerate() {
        let err = ScoreSummary::from_parts(
            DVector::from_vec(vec![0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateCovariance(_)), "{err}");
    }

    #[test]
    fn duplicated_column_is_degenerate() {
        let mut stream = RngStream::derive(7, &[0]);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let z = stream.sample_standard_normal();
                vec![z, z, stream.sample_standard_normal()]
            })
            .collect();
        let m = ScoreMatrix::from_rows(&rows).unwrap();
        assert!(matches!(
            summarize(&m).unwrap_err(),
            Error::DegenerateCovariance(_)
        ));
    }

    #[test]
    fn constant_column_is_degenerate() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 3.0]).collect();
        let m = ScoreMatrix::from_rows(&rows).unwrap();
        assert!(matches!(
            summarize(&m).unwrap_err(),
            Error::DegenerateCovariance(_)
        ));
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(ScoreMatrix::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(ScoreMatrix::from_rows(&[vec![1.0, f64::INFINITY]]).is_err());
        assert!(ScoreMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(summarize(&ScoreMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap()).is_err());
    }

    #[test]
    fn mahalanobis_identity_and_diagonal() {
        let s = ScoreSummary::from_parts(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            25,
        )
        .unwrap();
        let z = DVector::from_vec(vec![3.0, 4.0]);
        assert!((mahalanobis_form(&z, &s) - 25.0).abs() < 1e-12);

        let s2 = ScoreSummary::from_parts(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]),
            25,
        )
        .unwrap();
        // 9/4 + 16/0.25 = 2.25 + 64
        assert!((mahalanobis_form(&z, &s2) - 66.25).abs() < 1e-12);
    }

    #[test]
    fn mahalanobis_matches_dense_inverse_oracle() {
        let mut stream = RngStream::derive(99, &[1]);
        for _ in 0..50 {
            // Random SPD covariance A A^T + 0.5 I at J = 4.
            let a = DMatrix::from_fn(4, 4, |_, _| stream.sample_standard_normal());
            let cov = &a * a.transpose() + DMatrix::identity(4, 4) * 0.5;
            let s = ScoreSummary::from_parts(DVector::zeros(4), cov.clone(), 10).unwrap();
            let z = DVector::from_fn(4, |_, _| stream.sample_standard_normal());
            let inv = cov.try_inverse().unwrap();
            let want = (z.transpose() * &inv * &z)[(0, 0)];
            let got = mahalanobis_form(&z, &s);
            assert!(
                (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
                "got {got}, want {want}"
            );
        }
    }

    #[test]
    fn mahalanobis_homogeneity_and_positivity() {
        let mut stream = RngStream::derive(12, &[4]);
        let a = DMatrix::from_fn(3, 3, |_, _| stream.sample_standard_normal());
        let cov = &a * a.transpose() + DMatrix::identity(3, 3);
        let s = ScoreSummary::from_parts(DVector::zeros(3), cov, 10).unwrap();
        for _ in 0..20 {
            let z = DVector::from_fn(3, |_, _| stream.sample_standard_normal());
            let q = mahalanobis_form(&z, &s);
            assert!(q >= 0.0);
            let q2 = mahalanobis_form(&(&z * 3.0), &s);
            assert!((q2 - 9.0 * q).abs() < 1e-9 * (1.0 + q.abs()));
        }
        assert_eq!(mahalanobis_form(&DVector::zeros(3), &s), 0.0);
    }

    #[test]
    fn summarize_is_row_permutation_invariant() {
        let mut stream = RngStream::derive(55, &[0]);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| stream.sample_standard_normal_vec(3))
            .collect();
        let mut permuted = rows.clone();
        permuted.reverse();
        permuted.swap(3, 11);
        let s1 = summarize(&ScoreMatrix::from_rows(&rows).unwrap()).unwrap();
        let s2 = summarize(&ScoreMatrix::from_rows(&permuted).unwrap()).unwrap();
        assert!((s1.mean() - s2.mean()).amax() < 1e-12);
        assert!((s1.cov() - s2.cov()).amax() < 1e-12);
    }
}
