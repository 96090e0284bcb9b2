//! Profile empirical likelihood for the best-value functional.
//!
//! Three views of the same object. [`profile_statistic`] evaluates the
//! quadratic EL statistic at a candidate best value tau0 by projecting the
//! mean onto the level set {max = tau0} and converting the projection into
//! per-observation weights. [`simplex_lower_bound`] solves the dual program,
//! maximizing w'mean - sqrt(c/n) * sqrt(w'cov w) over the policy simplex,
//! which gives the lower confidence endpoint directly. [`invert_profile_bound`]
//! computes the same endpoint by bisecting the statistic itself; the two
//! routes agree to solver tolerance and the tests hold them together.

use nalgebra::DVector;

use crate::dist;
use crate::geometry::profile_projection;
use crate::scores::{summarize, ScoreMatrix, ScoreSummary};
use crate::{Error, Result};

/// Reweighting of the observations that moves the empirical mean to a target.
#[derive(Debug, Clone)]
pub struct WeightSolution {
    /// Per-observation probabilities q_i, summing to one.
    pub weights: Vec<f64>,
    /// Quadratic EL cost sum_i (n q_i - 1)^2.
    pub cost: f64,
    /// True when every q_i is strictly positive.
    pub interior: bool,
}

/// Calibration rule that produced a confidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Chi2,
    OrdinaryBoot,
    CorrectedBoot,
    ProjectedJoint,
    SelectedWald,
    FangSantos,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Chi2 => "chi2",
            Method::OrdinaryBoot => "ordinary-boot",
            Method::CorrectedBoot => "corrected-boot",
            Method::ProjectedJoint => "projected-joint",
            Method::SelectedWald => "selected-wald",
            Method::FangSantos => "fang-santos",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One-sided lower confidence bound for the best policy value.
#[derive(Debug, Clone)]
pub struct ConfidenceBound {
    /// Lower endpoint of the one-sided interval.
    pub lower: f64,
    /// Nominal coverage 1 - alpha.
    pub level: f64,
    /// Critical value the bound was computed from.
    pub critical_value: f64,
    /// Maximizing simplex weights over policies (or the comparator's analog).
    pub weights: Vec<f64>,
    /// Support of the weights (indices with positive mass).
    pub face: Vec<usize>,
    /// Calibration rule behind `critical_value`.
    pub method: Method,
}

/// Minimum-norm EL weights moving the reweighted mean to `target`.
///
/// The closed form is q_i = (1 + a_i)/n with a_i = (x_i - mean)' cov^{-1}
/// (target - mean); the cost sum a_i^2 is reported from the weights
/// themselves rather than the quadratic form so the two routes stay
/// independently checkable.
pub fn min_norm_weights(scores: &ScoreMatrix, target: &DVector<f64>) -> Result<WeightSolution> {
    let summary = summarize(scores)?;
    if target.len() != summary.num_policies() {
        return Err(Error::DimensionMismatch {
            expected: summary.num_policies(),
            got: target.len(),
        });
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target mean must be finite"));
    }
    let n = scores.n();
    let v = summary.cov_solve(&(target - summary.mean()));
    let data = scores.matrix();
    let mut weights = Vec::with_capacity(n);
    let mut cost = 0.0;
    let mut interior = true;
    for i in 0..n {
        let mut a = 0.0;
        for j in 0..summary.num_policies() {
            a += (data[(i, j)] - summary.mean()[j]) * v[j];
        }
        cost += a * a;
        let q = (1.0 + a) / n as f64;
        if q <= 0.0 {
            interior = false;
        }
        weights.push(q);
    }
    Ok(WeightSolution {
        weights,
        cost,
        interior,
    })
}

/// Profile EL statistic for "the best value equals tau0", with the minimizing
/// face and the weight solution realizing it.
pub fn profile_statistic(
    scores: &ScoreMatrix,
    tau0: f64,
) -> Result<(f64, Vec<usize>, WeightSolution)> {
    if !tau0.is_finite() {
        return Err(Error::invalid("tau0 must be finite"));
    }
    let summary = summarize(scores)?;
    let sol = profile_projection(&summary, tau0)?;
    let weights = min_norm_weights(scores, &sol.point)?;
    Ok((summary.n() as f64 * sol.cost, sol.face, weights))
}

/// Objective of the dual program at simplex point w.
fn dual_objective(w: &DVector<f64>, summary: &ScoreSummary, r: f64) -> f64 {
    let s = (w.transpose() * summary.cov() * w)[(0, 0)].max(0.0);
    w.dot(summary.mean()) - r * s.sqrt()
}

/// Exact maximization over the segment (1-t) e_i + t e_j, t in [0, 1].
/// Stationarity reduces to a quadratic in t after squaring; all real roots
/// plus the endpoints are evaluated directly, so spurious roots are harmless.
fn refine_two_support(
    summary: &ScoreSummary,
    r: f64,
    i: usize,
    j: usize,
) -> (f64, f64) {
    let cov = summary.cov();
    let mean = summary.mean();
    let d = mean[j] - mean[i];
    let q0 = cov[(i, i)];
    let q1 = cov[(i, j)] - cov[(i, i)];
    let q2 = cov[(i, i)] - 2.0 * cov[(i, j)] + cov[(j, j)];
    let s = |t: f64| (q0 + 2.0 * q1 * t + q2 * t * t).max(0.0);
    let g = |t: f64| mean[i] + t * d - r * s(t).sqrt();

    let mut candidates = vec![0.0, 1.0];
    let aa = q2 * (d * d - r * r * q2);
    let bb = 2.0 * q1 * (d * d - r * r * q2);
    let cc = d * d * q0 - r * r * q1 * q1;
    if aa.abs() > 1e-300 {
        let disc = bb * bb - 4.0 * aa * cc;
        if disc >= 0.0 {
            let root = disc.sqrt();
            candidates.push((-bb + root) / (2.0 * aa));
            candidates.push((-bb - root) / (2.0 * aa));
        }
    } else if bb.abs() > 1e-300 {
        candidates.push(-cc / bb);
    }
    let mut best_t = 0.0;
    let mut best_v = g(0.0);
    for t in candidates {
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let v = g(t);
        if v > best_v {
            best_v = v;
            best_t = t;
        }
    }
    (best_t, best_v)
}

/// Away-step Frank-Wolfe maximization of the dual objective over the simplex,
/// from a given start vertex. Returns the maximizer.
fn simplex_ascent(summary: &ScoreSummary, r: f64, start: usize) -> DVector<f64> {
    let jdim = summary.num_policies();
    let cov = summary.cov();
    let mean = summary.mean();
    let mut w = DVector::zeros(jdim);
    w[start] = 1.0;

    let max_iter = 50_000;
    for _ in 0..max_iter {
        let cw = cov * &w;
        let sigma = w.dot(&cw).max(1e-300).sqrt();
        let grad = mean - &cw * (r / sigma);
        let h = w.dot(mean) - r * sigma;

        // Toward vertex: best gradient coordinate. Away vertex: worst
        // gradient coordinate currently carrying mass.
        let mut s_idx = 0;
        for k in 1..jdim {
            if grad[k] > grad[s_idx] {
                s_idx = k;
            }
        }
        let gap = grad[s_idx] - grad.dot(&w);
        if gap <= 5e-11 * (1.0 + h.abs()) {
            break;
        }
        let mut a_idx = None;
        for k in 0..jdim {
            if w[k] > 0.0 && a_idx.map_or(true, |a: usize| grad[k] < grad[a]) {
                a_idx = Some(k);
            }
        }
        let a_idx = a_idx.expect("simplex point has support");

        let toward_gain = gap;
        let away_gain = grad.dot(&w) - grad[a_idx];
        let (d, gamma_max) = if toward_gain >= away_gain || w[a_idx] >= 1.0 {
            let mut d = -w.clone();
            d[s_idx] += 1.0;
            (d, 1.0)
        } else {
            let mut d = w.clone();
            d[a_idx] -= 1.0;
            (d, w[a_idx] / (1.0 - w[a_idx]))
        };

        // Exact line search on the concave 1-D slice via bisection on the
        // derivative a1 - r (q1 + q2 g) / sqrt(q0 + 2 q1 g + q2 g^2).
        let a1 = d.dot(mean);
        let cd = cov * &d;
        let q0 = w.dot(&cw);
        let q1 = d.dot(&cw);
        let q2 = d.dot(&cd);
        let slope = |g: f64| {
            let s = (q0 + 2.0 * q1 * g + q2 * g * g).max(1e-300).sqrt();
            a1 - r * (q1 + q2 * g) / s
        };
        let gamma = if slope(0.0) <= 0.0 {
            0.0
        } else if slope(gamma_max) >= 0.0 {
            gamma_max
        } else {
            let (mut lo, mut hi) = (0.0, gamma_max);
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if gamma == 0.0 {
            break;
        }
        w.axpy(gamma, &d, 1.0);
        // Clean up drop steps and renormalize.
        let mut total = 0.0;
        for k in 0..jdim {
            if w[k] < 1e-15 {
                w[k] = 0.0;
            }
            total += w[k];
        }
        w /= total;
    }

    // With two support points the segment optimum is available in closed
    // form; polish the final iterate with it.
    let support: Vec<usize> = (0..jdim).filter(|&k| w[k] > 0.0).collect();
    if support.len() == 2 {
        let (i, j) = (support[0], support[1]);
        let (t, v) = refine_two_support(summary, r, i, j);
        if v >= dual_objective(&w, summary, r) {
            w.fill(0.0);
            w[i] = 1.0 - t;
            w[j] = t;
        }
    }
    w
}

/// Solve the simplex program from every vertex start and keep the best
/// objective. Used directly by the restart test; `simplex_lower_bound` wraps
/// it with the single best-vertex start.
fn best_start_vertex(summary: &ScoreSummary, r: f64) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..summary.num_policies() {
        let v = summary.mean()[k] - r * summary.cov()[(k, k)].max(0.0).sqrt();
        if v > best_v {
            best_v = v;
            best = k;
        }
    }
    best
}

pub(crate) fn simplex_solve(summary: &ScoreSummary, c: f64, start: usize) -> (f64, DVector<f64>) {
    let r = (c / summary.n() as f64).sqrt();
    let w = simplex_ascent(summary, r, start);
    (dual_objective(&w, summary, r), w)
}

/// Lower confidence endpoint via the dual simplex program at critical value c.
///
/// The reported `level` is the chi-square(1) tail level matching c, which is
/// the correct reading for the single-policy calibration; calibrated front
/// ends replace `level` and `method` with their own.
pub fn simplex_lower_bound(summary: &ScoreSummary, c: f64) -> Result<ConfidenceBound> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::invalid("critical value must be positive"));
    }
    let jdim = summary.num_policies();
    let (lower, w) = if jdim == 1 {
        let l = summary.mean()[0] - (c * summary.cov()[(0, 0)] / summary.n() as f64).sqrt();
        (l, DVector::from_element(1, 1.0))
    } else {
        let start = best_start_vertex(summary, (c / summary.n() as f64).sqrt());
        simplex_solve(summary, c, start)
    };
    let face: Vec<usize> = (0..jdim).filter(|&k| w[k] > 1e-10).collect();
    Ok(ConfidenceBound {
        lower,
        level: dist::chi2_cdf(1, c),
        critical_value: c,
        weights: w.iter().copied().collect(),
        face,
        method: Method::Chi2,
    })
}

/// Lower confidence endpoint by direct inversion: the smallest tau at or
/// below the best sample mean whose profile statistic stays within c.
pub fn invert_profile_bound(scores: &ScoreMatrix, c: f64) -> Result<f64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::invalid("critical value must be nonnegative"));
    }
    let summary = summarize(scores)?;
    let hi0 = summary.mean().max();
    if c == 0.0 {
        return Ok(hi0);
    }

    // Bracket the crossing R(tau) = c on the left branch by step doubling.
    let mut step = 1e-3 * (1.0 + hi0.abs());
    let mut lo = hi0 - step;
    let mut doublings = 0;
    while profile_projection(&summary, lo)?.cost * summary.n() as f64 <= c {
        step *= 2.0;
        lo = hi0 - step;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Solver("failed to bracket the profile crossing".into()));
        }
    }
    let mut hi = hi0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let stat = profile_projection(&summary, mid)?.cost * summary.n() as f64;
        if stat > c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Width ratio between the J-policy projected bound and the single-policy
/// bound at the same level: sqrt of the chi-square quantile ratio.
pub fn inflation_ratio(num_policies: usize, alpha: f64) -> Result<f64> {
    if num_policies == 0 {
        return Err(Error::invalid("need at least one policy"));
    }
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::invalid("alpha must be in (0, 1)"));
    }
    let top = dist::chi2_quantile(num_policies, 1.0 - alpha)?;
    let bottom = dist::chi2_quantile(1, 1.0 - alpha)?;
    Ok((top / bottom).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use nalgebra::{DMatrix, DVector};

    fn random_scores(n: usize, jdim: usize, stream: &mut RngStream) -> ScoreMatrix {
        let shift = DVector::from_fn(jdim, |_, _| stream.sample_standard_normal());
        let mix = DMatrix::from_fn(jdim, jdim, |r, c| {
            if r == c {
                1.0
            } else {
                0.3 * stream.sample_standard_normal()
            }
        });
        let data = DMatrix::from_fn(n, jdim, |_, _| stream.sample_standard_normal()) * mix.transpose();
        let data = DMatrix::from_fn(n, jdim, |i, j| data[(i, j)] + shift[j]);
        ScoreMatrix::new(data).unwrap()
    }

    #[test]
    fn min_norm_weights_hand_example() {
        // Two observations of one policy at 0 and 2: mean 1, variance 1.
        let scores = ScoreMatrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let sol = min_norm_weights(&scores, &DVector::from_vec(vec![1.5])).unwrap();
        assert!((sol.weights[0] - 0.25).abs() < 1e-14);
        assert!((sol.weights[1] - 0.75).abs() < 1e-14);
        assert!((sol.cost - 0.5).abs() < 1e-14);
        assert!(sol.interior);

        // Target outside the convex hull of the support: weights go negative.
        let far = min_norm_weights(&scores, &DVector::from_vec(vec![3.5])).unwrap();
        assert!(!far.interior);
        assert!(far.weights[0] < 0.0);
    }

    #[test]
    fn min_norm_weights_at_the_mean_are_uniform() {
        let mut stream = RngStream::derive(401, &[0]);
        let scores = random_scores(60, 3, &mut stream);
        let summary = summarize(&scores).unwrap();
        let sol = min_norm_weights(&scores, &summary.mean().clone()).unwrap();
        assert!(sol.cost < 1e-20);
        for q in &sol.weights {
            assert!((q - 1.0 / 60.0).abs() < 1e-14);
        }
        assert!(sol.interior);
    }

    #[test]
    fn min_norm_weights_invariants_on_random_instances() {
        let mut stream = RngStream::derive(402, &[0]);
        for trial in 0..60 {
            let n = 30 + stream.sample_index(100);
            let jdim = 2 + (trial % 3);
            let scores = random_scores(n, jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let target =
                summary.mean() + DVector::from_fn(jdim, |_, _| 0.3 * stream.sample_standard_normal());
            let sol = min_norm_weights(&scores, &target).unwrap();
            let total: f64 = sol.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "weights sum {total}");
            // Cost must match the Mahalanobis form route.
            let diff = &target - summary.mean();
            let quad = n as f64 * crate::scores::mahalanobis_form(&diff, &summary);
            assert!(
                (sol.cost - quad).abs() <= 1e-10 * (1.0 + quad),
                "cost {} vs quadratic form {}",
                sol.cost,
                quad
            );
            // Reweighted mean lands on the target.
            let data = scores.matrix();
            for j in 0..jdim {
                let m: f64 = (0..n).map(|i| sol.weights[i] * data[(i, j)]).sum();
                assert!((m - target[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn min_norm_weights_rejects_bad_targets() {
        let scores = ScoreMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.5], vec![1.0, 0.2]])
            .unwrap();
        assert!(min_norm_weights(&scores, &DVector::from_vec(vec![1.0])).is_err());
        assert!(min_norm_weights(&scores, &DVector::from_vec(vec![f64::NAN, 0.0])).is_err());
    }

    #[test]
    fn profile_statistic_agrees_with_weight_cost_when_interior() {
        let mut stream = RngStream::derive(403, &[0]);
        let mut interior_seen = 0;
        for trial in 0..80 {
            let n = 50 + stream.sample_index(150);
            let jdim = 2 + (trial % 3);
            let scores = random_scores(n, jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let tau0 = summary.mean().max() + 0.2 * stream.sample_standard_normal();
            let (value, face, weights) = profile_statistic(&scores, tau0).unwrap();
            let (want, want_face) = crate::geometry::profile_stat_max(&summary, tau0).unwrap();
            assert!((value - want).abs() <= 1e-10 * (1.0 + want));
            assert_eq!(face, want_face);
            if weights.interior {
                interior_seen += 1;
                assert!(
                    (value - weights.cost).abs() <= 1e-8 * (1.0 + value.abs()),
                    "trial {trial}: statistic {value} vs weight cost {}",
                    weights.cost
                );
            }
        }
        assert!(interior_seen > 20, "too few interior draws to be meaningful");
    }

    /// Projected-gradient reference: for each pinned coordinate minimize the
    /// Mahalanobis cost over the box {m_j = tau, m_k <= tau} by plain
    /// projected gradient descent on the dense inverse metric, then take the
    /// best pin. First-order and active-set-free, so independent of the
    /// production solver.
    fn pgd_profile_reference(summary: &ScoreSummary, tau: f64) -> f64 {
        let jdim = summary.num_policies();
        let q = summary.cov().clone().try_inverse().unwrap();
        // Step from the largest eigenvalue of q via power iteration.
        let mut v = DVector::from_element(jdim, 1.0_f64);
        for _ in 0..200 {
            v = &q * v;
            let norm = v.norm();
            v /= norm;
        }
        let lam = (v.transpose() * &q * &v)[(0, 0)];
        let step = 1.0 / (2.2 * lam);

        let mut best = f64::INFINITY;
        for pin in 0..jdim {
            let mut m = summary.mean().clone();
            for k in 0..jdim {
                if m[k] > tau {
                    m[k] = tau;
                }
            }
            m[pin] = tau;
            for _ in 0..60_000 {
                let grad = 2.0 * &q * (&m - summary.mean());
                m.axpy(-step, &grad, 1.0);
                for k in 0..jdim {
                    if m[k] > tau {
                        m[k] = tau;
                    }
                }
                m[pin] = tau;
            }
            let diff = &m - summary.mean();
            let cost = summary.n() as f64 * (diff.transpose() * &q * &diff)[(0, 0)];
            best = best.min(cost);
        }
        best
    }

    #[test]
    fn profile_statistic_matches_projected_gradient_reference() {
        let mut stream = RngStream::derive(404, &[0]);
        for trial in 0..40 {
            let n = 50 + stream.sample_index(150);
            let jdim = 2 + (trial % 3);
            let scores = random_scores(n, jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let tau0 = summary.mean().max() + 0.25 * stream.sample_standard_normal();
            let (value, _, _) = profile_statistic(&scores, tau0).unwrap();
            let want = pgd_profile_reference(&summary, tau0);
            assert!(
                (value - want).abs() <= 1e-6 * (1.0 + want),
                "trial {trial}: {value} vs reference {want}"
            );
        }
    }

    #[test]
    fn weight_range_shrinks_with_sample_size() {
        // Target shifted by d/sqrt(n): the weight perturbations a_i must
        // shrink as n grows.
        let shift = DVector::from_vec(vec![0.8, -0.5, 0.3]);
        let mut last = f64::INFINITY;
        for &n in &[100usize, 1000, 10000] {
            let mut stream = RngStream::derive(405, &[n as u64]);
            let scores = random_scores(n, 3, &mut stream);
            let summary = summarize(&scores).unwrap();
            let target = summary.mean() + &shift / (n as f64).sqrt();
            let sol = min_norm_weights(&scores, &target).unwrap();
            let max_a = sol
                .weights
                .iter()
                .map(|&q| (q * n as f64 - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(max_a < last, "max |a_i| not decreasing at n = {n}");
            last = max_a;
        }
    }

    #[test]
    fn simplex_bound_square_example() {
        // J=2, identity covariance, means (0.5, 0.5), n=100, c=4.
        let s = ScoreSummary::from_parts(
            DVector::from_vec(vec![0.5, 0.5]),
            DMatrix::identity(2, 2),
            100,
        )
        .unwrap();
        let b = simplex_lower_bound(&s, 4.0).unwrap();
        assert!((b.lower - 0.35857864376269044).abs() < 1e-9, "{}", b.lower);
        assert!((b.weights[0] - 0.5).abs() < 1e-6);
        assert!((b.weights[1] - 0.5).abs() < 1e-6);
        assert_eq!(b.face, vec![0, 1]);
        assert_eq!(b.critical_value, 4.0);
        // Splitting beats either vertex (vertex value 0.5 - 0.2 = 0.3).
        assert!(b.lower > 0.3 + 0.05);
    }

    #[test]
    fn simplex_bound_single_policy_closed_form() {
        let s = ScoreSummary::from_parts(
            DVector::from_vec(vec![1.3]),
            DMatrix::from_element(1, 1, 0.49),
            49,
        )
        .unwrap();
        let b = simplex_lower_bound(&s, 4.0).unwrap();
        // 1.3 - sqrt(4 * 0.49 / 49) = 1.3 - 0.2.
        assert!((b.lower - 1.1).abs() < 1e-12);
        assert_eq!(b.weights, vec![1.0]);
        assert_eq!(b.face, vec![0]);
    }

    #[test]
    fn simplex_bound_rejects_nonpositive_critical_value() {
        let s = ScoreSummary::from_parts(
            DVector::from_vec(vec![0.5, 0.1]),
            DMatrix::identity(2, 2),
            50,
        )
        .unwrap();
        assert!(simplex_lower_bound(&s, 0.0).is_err());
        assert!(simplex_lower_bound(&s, -1.0).is_err());
        assert!(simplex_lower_bound(&s, f64::NAN).is_err());
    }

    #[test]
    fn simplex_bound_matches_fine_grid_at_two_policies() {
        let mut stream = RngStream::derive(406, &[0]);
        for trial in 0..20 {
            let scores = random_scores(80, 2, &mut stream);
            let summary = summarize(&scores).unwrap();
            let c = 0.5 + 4.0 * stream.sample_uniform();
            let b = simplex_lower_bound(&summary, c).unwrap();
            let r = (c / summary.n() as f64).sqrt();
            let mut grid_best = f64::NEG_INFINITY;
            let steps = 10_000;
            for k in 0..=steps {
                let t = k as f64 / steps as f64;
                let w = DVector::from_vec(vec![1.0 - t, t]);
                grid_best = grid_best.max(dual_objective(&w, &summary, r));
            }
            assert!(
                (b.lower - grid_best).abs() <= 5e-8 * (1.0 + grid_best.abs()),
                "trial {trial}: {} vs grid {grid_best}",
                b.lower
            );
        }
    }

    #[test]
    fn simplex_bound_dominates_vertices_and_respects_the_max_mean() {
        let mut stream = RngStream::derive(407, &[0]);
        for trial in 0..40 {
            let jdim = 2 + (trial % 4);
            let scores = random_scores(60, jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let c = 0.5 + 6.0 * stream.sample_uniform();
            let b = simplex_lower_bound(&summary, c).unwrap();
            let r = (c / summary.n() as f64).sqrt();
            for k in 0..jdim {
                let vertex = summary.mean()[k] - r * summary.cov()[(k, k)].sqrt();
                assert!(b.lower >= vertex - 1e-9);
            }
            assert!(b.lower <= summary.mean().max() + 1e-10);
            let total: f64 = b.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(b.weights.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn simplex_bound_strictly_decreasing_in_critical_value() {
        let mut stream = RngStream::derive(408, &[0]);
        let scores = random_scores(100, 3, &mut stream);
        let summary = summarize(&scores).unwrap();
        let mut last = f64::INFINITY;
        for &c in &[0.25, 1.0, 2.5, 4.0, 6.5, 9.0] {
            let b = simplex_lower_bound(&summary, c).unwrap();
            assert!(b.lower < last, "not decreasing at c = {c}");
            last = b.lower;
        }
    }

    #[test]
    fn simplex_bound_shift_equivariance() {
        let mut stream = RngStream::derive(409, &[0]);
        let scores = random_scores(70, 3, &mut stream);
        let summary = summarize(&scores).unwrap();
        let b = simplex_lower_bound(&summary, 3.0).unwrap();
        let t = 2.75;
        let shifted = ScoreSummary::from_parts(
            summary.mean() + DVector::from_element(3, t),
            summary.cov().clone(),
            summary.n(),
        )
        .unwrap();
        let bs = simplex_lower_bound(&shifted, 3.0).unwrap();
        assert!((bs.lower - (b.lower + t)).abs() < 1e-9);
        for k in 0..3 {
            assert!((bs.weights[k] - b.weights[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn simplex_solver_start_invariance() {
        let mut stream = RngStream::derive(410, &[0]);
        for trial in 0..20 {
            let jdim = 2 + (trial % 4);
            let scores = random_scores(60, jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let c = 1.0 + 5.0 * stream.sample_uniform();
            let values: Vec<f64> = (0..jdim)
                .map(|start| simplex_solve(&summary, c, start).0)
                .collect();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(
                hi - lo <= 1e-9 * (1.0 + hi.abs()),
                "trial {trial}: restart spread {} to {}",
                lo,
                hi
            );
        }
    }

    #[test]
    fn inversion_agrees_with_dual_program() {
        let mut stream = RngStream::derive(411, &[0]);
        for trial in 0..30 {
            let jdim = 2 + (trial % 3);
            let scores = random_scores(60 + stream.sample_index(80), jdim, &mut stream);
            let summary = summarize(&scores).unwrap();
            let c = 0.5 + 6.0 * stream.sample_uniform();
            let direct = invert_profile_bound(&scores, c).unwrap();
            let dual = simplex_lower_bound(&summary, c).unwrap().lower;
            assert!(
                (direct - dual).abs() <= 1e-6,
                "trial {trial}: inversion {direct} vs dual {dual}"
            );
        }
    }

    #[test]
    fn inversion_collapses_to_the_best_mean_as_c_vanishes() {
        let mut stream = RngStream::derive(412, &[0]);
        let scores = random_scores(90, 3, &mut stream);
        let summary = summarize(&scores).unwrap();
        let top = summary.mean().max();
        assert_eq!(invert_profile_bound(&scores, 0.0).unwrap(), top);
        let near = invert_profile_bound(&scores, 1e-14).unwrap();
        assert!((near - top).abs() < 1e-6);
        assert!(invert_profile_bound(&scores, -0.5).is_err());
    }

    #[test]
    fn inflation_ratio_reference_values() {
        assert!((inflation_ratio(1, 0.05).unwrap() - 1.0).abs() < 1e-12);
        let r20 = inflation_ratio(20, 0.05).unwrap();
        assert!((r20 - 2.86).abs() < 0.005, "{r20}");
        assert!((r20 - 2.8594918926008352).abs() < 1e-10);
        // chi2 quantiles 124.34211340400407 (df 100) and 3.841458820694124 (df 1).
        let r100 = inflation_ratio(100, 0.05).unwrap();
        let want = (124.34211340400407f64 / 3.841458820694124).sqrt();
        assert!((r100 - want).abs() < 1e-9);
        assert!((r100 / want - 1.0).abs() < 0.10);
    }

    #[test]
    fn inflation_ratio_monotone_and_validated() {
        let mut last = 0.0;
        for j in [1usize, 2, 5, 10, 20, 50] {
            let r = inflation_ratio(j, 0.05).unwrap();
            assert!(r > last);
            last = r;
        }
        assert!(inflation_ratio(0, 0.05).is_err());
        assert!(inflation_ratio(3, 0.0).is_err());
        assert!(inflation_ratio(3, 1.0).is_err());
    }

    #[test]
    fn method_labels_are_stable() {
        assert_eq!(Method::Chi2.label(), "chi2");
        assert_eq!(Method::OrdinaryBoot.label(), "ordinary-boot");
        assert_eq!(Method::CorrectedBoot.label(), "corrected-boot");
        assert_eq!(Method::ProjectedJoint.label(), "projected-joint");
        assert_eq!(Method::SelectedWald.label(), "selected-wald");
        assert_eq!(Method::FangSantos.label(), "fang-santos");
    }
}
