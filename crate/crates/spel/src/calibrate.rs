//! Critical values for the best-value bound.
//!
//! The centerpiece is the five-step procedure behind [`infer_lower_bound`]:
//! summarize the scores, estimate the near-optimal active set, calibrate a
//! critical value (chi-square when the optimum looks unique, corrected
//! multiplier bootstrap otherwise), and hand it to the simplex program. The
//! ordinary score bootstrap and the comparator bounds (projected joint,
//! selected-policy Wald, Fang-Santos) live here too so every method shares
//! the same reporting type.

use nalgebra::{DMatrix, DVector};

use crate::dist;
use crate::geometry::{distance_to_cone, distance_to_hyperplane, ConeSpec};
use crate::profile::{simplex_lower_bound, ConfidenceBound, Method};
use crate::rng::RngStream;
use crate::scores::{summarize, ScoreMatrix, ScoreSummary};
use crate::{Error, Result};

/// Multiplier distribution for the multiplier bootstrap. Both have mean 0
/// and variance 1; Gaussian makes the conditional draw law exactly normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplier {
    #[default]
    Gaussian,
    Rademacher,
}

impl Multiplier {
    pub fn label(self) -> &'static str {
        match self {
            Multiplier::Gaussian => "gaussian",
            Multiplier::Rademacher => "rademacher",
        }
    }
}

impl std::str::FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Multiplier::Gaussian),
            "rademacher" => Ok(Multiplier::Rademacher),
            other => Err(Error::invalid(format!("unknown multiplier '{other}'"))),
        }
    }
}

/// Estimated set of near-optimal policies.
#[derive(Debug, Clone)]
pub struct ActiveSetEstimate {
    /// The near-optimal indices as a cone over the score coordinates.
    pub indices: ConeSpec,
    /// Threshold kappa_n = max_j sqrt(cov_jj log n / n).
    pub kappa: f64,
    /// Per-policy gaps max_k mean_k - mean_j.
    pub gaps: Vec<f64>,
}

/// Bootstrap calibration output: the draws, the order-statistic critical
/// value, and enough context to reproduce the run.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// Bootstrap statistics in draw order.
    pub draws: Vec<f64>,
    /// The ceil((1 - alpha) B)-th order statistic of the draws.
    pub critical_value: f64,
    pub alpha: f64,
    pub method: Method,
    /// Cone (or single-face hyperplane) the statistics were measured against.
    pub cone: ConeSpec,
    /// Master seed of the stream the draws were derived from.
    pub seed: u64,
}

/// Method selector for [`infer_lower_bound`]: the automatic dispatch or a
/// forced calibration/comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferMethod {
    #[default]
    Auto,
    Chi2,
    OrdinaryBoot,
    CorrectedBoot,
    ProjectedJoint,
    SelectedWald,
    FangSantos,
}

impl InferMethod {
    pub fn label(self) -> &'static str {
        match self {
            InferMethod::Auto => "auto",
            InferMethod::Chi2 => "chi2",
            InferMethod::OrdinaryBoot => "ordinary-boot",
            InferMethod::CorrectedBoot => "corrected-boot",
            InferMethod::ProjectedJoint => "projected-joint",
            InferMethod::SelectedWald => "selected-wald",
            InferMethod::FangSantos => "fang-santos",
        }
    }
}

impl std::str::FromStr for InferMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(InferMethod::Auto),
            "chi2" => Ok(InferMethod::Chi2),
            "ordinary-boot" => Ok(InferMethod::OrdinaryBoot),
            "corrected-boot" => Ok(InferMethod::CorrectedBoot),
            "projected-joint" => Ok(InferMethod::ProjectedJoint),
            "selected-wald" => Ok(InferMethod::SelectedWald),
            "fang-santos" => Ok(InferMethod::FangSantos),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// Everything the end-to-end procedure produced: the bound plus the active
/// set and, when a bootstrap ran, its calibration record.
#[derive(Debug, Clone)]
pub struct InferenceReport {
    pub bound: ConfidenceBound,
    pub active: ActiveSetEstimate,
    pub calibration: Option<CalibrationResult>,
}

/// ceil((1 - alpha) B)-th order statistic, no interpolation. The small
/// epsilon keeps ceil from overshooting when (1 - alpha) B is an integer
/// that floating-point puts a hair above itself.
fn order_statistic(draws: &[f64], alpha: f64) -> f64 {
    let b = draws.len();
    let k = (((1.0 - alpha) * b as f64) - 1e-9).ceil().max(1.0) as usize;
    let k = k.min(b);
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[k - 1]
}

fn argmax_mean(mean: &DVector<f64>) -> usize {
    let mut best = 0;
    for j in 1..mean.len() {
        if mean[j] > mean[best] {
            best = j;
        }
    }
    best
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::invalid("alpha must lie strictly between 0 and 1"));
    }
    Ok(())
}

fn check_draws(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::invalid("bootstrap methods need at least one draw"));
    }
    Ok(())
}

/// Near-optimal policies: those within kappa_n of the best sample mean,
/// kappa_n = max_j sqrt(cov_jj log n / n).
pub fn estimate_active_set(summary: &ScoreSummary) -> ActiveSetEstimate {
    let jdim = summary.num_policies();
    let n = summary.n() as f64;
    let kappa = (0..jdim)
        .map(|j| (summary.cov()[(j, j)] * n.ln() / n).sqrt())
        .fold(0.0f64, f64::max);
    let top = summary.mean().max();
    let gaps: Vec<f64> = (0..jdim).map(|j| top - summary.mean()[j]).collect();
    let indices: Vec<usize> = (0..jdim).filter(|&j| gaps[j] <= kappa).collect();
    let indices = ConeSpec::new(indices, jdim).expect("argmax always qualifies");
    ActiveSetEstimate {
        indices,
        kappa,
        gaps,
    }
}

/// Efron bootstrap of the score rows, measuring each resampled root
/// sqrt(n)(mean* - mean) against the original argmax hyperplane with the
/// original covariance.
pub fn ordinary_score_bootstrap(
    scores: &ScoreMatrix,
    alpha: f64,
    b: usize,
    stream: &RngStream,
) -> Result<CalibrationResult> {
    check_alpha(alpha)?;
    check_draws(b)?;
    let summary = summarize(scores)?;
    let n = scores.n();
    let jdim = summary.num_policies();
    let jhat = argmax_mean(summary.mean());
    let mut a0 = DVector::zeros(jdim);
    a0[jhat] = 1.0;

    let data = scores.matrix();
    let root_n = (n as f64).sqrt();
    let mut draws = Vec::with_capacity(b);
    for draw in 0..b {
        let mut child = stream.child(draw as u64);
        let mut mean_star = DVector::zeros(jdim);
        for _ in 0..n {
            let i = child.sample_index(n);
            for j in 0..jdim {
                mean_star[j] += data[(i, j)];
            }
        }
        mean_star /= n as f64;
        let z = (mean_star - summary.mean()) * root_n;
        draws.push(distance_to_hyperplane(&z, &summary, &a0)?);
    }
    let critical_value = order_statistic(&draws, alpha);
    Ok(CalibrationResult {
        draws,
        critical_value,
        alpha,
        method: Method::OrdinaryBoot,
        cone: ConeSpec::new(vec![jhat], jdim).expect("singleton cone"),
        seed: stream.master_seed(),
    })
}

/// Centered score rows transposed to J x n, so a multiplier root is a single
/// matrix-vector product.
fn centered_transpose(scores: &ScoreMatrix, summary: &ScoreSummary) -> DMatrix<f64> {
    let n = scores.n();
    let jdim = summary.num_policies();
    let data = scores.matrix();
    DMatrix::from_fn(jdim, n, |j, i| data[(i, j)] - summary.mean()[j])
}

fn multiplier_root(
    u_t: &DMatrix<f64>,
    multiplier: Multiplier,
    child: &mut RngStream,
) -> DVector<f64> {
    let n = u_t.ncols();
    let xi = DVector::from_fn(n, |_, _| match multiplier {
        Multiplier::Gaussian => child.sample_standard_normal(),
        Multiplier::Rademacher => child.sample_rademacher(),
    });
    (u_t * xi) / (n as f64).sqrt()
}

/// Multiplier bootstrap of the score roots, measured against the tangent
/// cone of the supplied active set.
pub fn corrected_multiplier_bootstrap(
    scores: &ScoreMatrix,
    cone: &ConeSpec,
    alpha: f64,
    b: usize,
    multiplier: Multiplier,
    stream: &RngStream,
) -> Result<CalibrationResult> {
    check_alpha(alpha)?;
    check_draws(b)?;
    let summary = summarize(scores)?;
    if cone.ambient_dim() != summary.num_policies() {
        return Err(Error::DimensionMismatch {
            expected: summary.num_policies(),
            got: cone.ambient_dim(),
        });
    }
    let u_t = centered_transpose(scores, &summary);
    let mut draws = Vec::with_capacity(b);
    for draw in 0..b {
        let mut child = stream.child(draw as u64);
        let z = multiplier_root(&u_t, multiplier, &mut child);
        draws.push(distance_to_cone(&z, &summary, cone)?.0);
    }
    let critical_value = order_statistic(&draws, alpha);
    Ok(CalibrationResult {
        draws,
        critical_value,
        alpha,
        method: Method::CorrectedBoot,
        cone: cone.clone(),
        seed: stream.master_seed(),
    })
}

fn stamp(mut bound: ConfidenceBound, alpha: f64, method: Method) -> ConfidenceBound {
    bound.level = 1.0 - alpha;
    bound.method = method;
    bound
}

/// Projected joint bound: the simplex program at the ambient chi-square(J)
/// critical value.
pub fn projected_joint_bound(summary: &ScoreSummary, alpha: f64) -> Result<ConfidenceBound> {
    check_alpha(alpha)?;
    let c = dist::chi2_quantile(summary.num_policies(), 1.0 - alpha)?;
    Ok(stamp(
        simplex_lower_bound(summary, c)?,
        alpha,
        Method::ProjectedJoint,
    ))
}

/// Naive comparator: Wald bound for the selected policy, ignoring selection.
pub fn selected_policy_wald(summary: &ScoreSummary, alpha: f64) -> Result<ConfidenceBound> {
    check_alpha(alpha)?;
    let jdim = summary.num_policies();
    let jhat = argmax_mean(summary.mean());
    let z = dist::normal_quantile(1.0 - alpha)?;
    let se = (summary.cov()[(jhat, jhat)] / summary.n() as f64).sqrt();
    let mut weights = vec![0.0; jdim];
    weights[jhat] = 1.0;
    Ok(ConfidenceBound {
        lower: summary.mean()[jhat] - z * se,
        level: 1.0 - alpha,
        critical_value: z * z,
        weights,
        face: vec![jhat],
        method: Method::SelectedWald,
    })
}

/// Fang-Santos style comparator: anchor at the pointwise maximum and
/// subtract the bootstrap quantile of the plug-in directional derivative
/// max over the estimated active set of the multiplier root.
pub fn fang_santos_bound(
    scores: &ScoreMatrix,
    alpha: f64,
    b: usize,
    multiplier: Multiplier,
    stream: &RngStream,
) -> Result<ConfidenceBound> {
    check_alpha(alpha)?;
    check_draws(b)?;
    let summary = summarize(scores)?;
    let active = estimate_active_set(&summary);
    let u_t = centered_transpose(scores, &summary);
    let mut draws = Vec::with_capacity(b);
    for draw in 0..b {
        let mut child = stream.child(draw as u64);
        let z = multiplier_root(&u_t, multiplier, &mut child);
        let stat = active
            .indices
            .active()
            .iter()
            .fold(f64::NEG_INFINITY, |a, &j| a.max(z[j]));
        draws.push(stat);
    }
    let q = order_statistic(&draws, alpha);
    let jdim = summary.num_policies();
    let jhat = argmax_mean(summary.mean());
    let mut weights = vec![0.0; jdim];
    weights[jhat] = 1.0;
    Ok(ConfidenceBound {
        lower: summary.mean().max() - q / (summary.n() as f64).sqrt(),
        level: 1.0 - alpha,
        critical_value: q,
        weights,
        face: active.indices.active().to_vec(),
        method: Method::FangSantos,
    })
}

/// End-to-end lower bound with the full report: active set, calibration
/// record when a bootstrap ran, and the bound itself.
pub fn infer_report(
    scores: &ScoreMatrix,
    alpha: f64,
    method: InferMethod,
    b: usize,
    multiplier: Multiplier,
    stream: &RngStream,
) -> Result<InferenceReport> {
    check_alpha(alpha)?;
    let summary = summarize(scores)?;
    let active = estimate_active_set(&summary);

    let (bound, calibration) = match method {
        InferMethod::Auto => {
            if active.indices.active().len() == 1 {
                let c = dist::chi2_quantile(1, 1.0 - alpha)?;
                (
                    stamp(simplex_lower_bound(&summary, c)?, alpha, Method::Chi2),
                    None,
                )
            } else {
                check_draws(b)?;
                let cal = corrected_multiplier_bootstrap(
                    scores,
                    &active.indices,
                    alpha,
                    b,
                    multiplier,
                    stream,
                )?;
                (
                    stamp(
                        simplex_lower_bound(&summary, cal.critical_value)?,
                        alpha,
                        Method::CorrectedBoot,
                    ),
                    Some(cal),
                )
            }
        }
        InferMethod::Chi2 => {
            let c = dist::chi2_quantile(1, 1.0 - alpha)?;
            (
                stamp(simplex_lower_bound(&summary, c)?, alpha, Method::Chi2),
                None,
            )
        }
        InferMethod::OrdinaryBoot => {
            check_draws(b)?;
            let cal = ordinary_score_bootstrap(scores, alpha, b, stream)?;
            (
                stamp(
                    simplex_lower_bound(&summary, cal.critical_value)?,
                    alpha,
                    Method::OrdinaryBoot,
                ),
                Some(cal),
            )
        }
        InferMethod::CorrectedBoot => {
            check_draws(b)?;
            let cal = corrected_multiplier_bootstrap(
                scores,
                &active.indices,
                alpha,
                b,
                multiplier,
                stream,
            )?;
            (
                stamp(
                    simplex_lower_bound(&summary, cal.critical_value)?,
                    alpha,
                    Method::CorrectedBoot,
                ),
                Some(cal),
            )
        }
        InferMethod::ProjectedJoint => (projected_joint_bound(&summary, alpha)?, None),
        InferMethod::SelectedWald => (selected_policy_wald(&summary, alpha)?, None),
        InferMethod::FangSantos => {
            check_draws(b)?;
            (fang_santos_bound(scores, alpha, b, multiplier, stream)?, None)
        }
    };
    Ok(InferenceReport {
        bound,
        active,
        calibration,
    })
}

/// End-to-end lower bound; see [`infer_report`] for the dispatch rules.
pub fn infer_lower_bound(
    scores: &ScoreMatrix,
    alpha: f64,
    method: InferMethod,
    b: usize,
    multiplier: Multiplier,
    stream: &RngStream,
) -> Result<ConfidenceBound> {
    infer_report(scores, alpha, method, b, multiplier, stream).map(|r| r.bound)
}
