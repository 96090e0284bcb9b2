//! Doubly robust policy evaluation on synthetic observational data.
//!
//! The pipeline: [`gen_semiparametric_data`] draws (W, A, Y) triples from a
//! fixed nonlinear design, [`make_policy_class`] builds a class of linear
//! threshold rules with a calibrated near-tie at the top,
//! [`fit_baseline_nuisance`] fits ridge-penalized propensity and outcome
//! models on a degree-2 feature expansion, and [`cross_fit_scores`] turns
//! everything into per-observation AIPW scores, one column per policy. The
//! score for observation i under policy j is
//!
//!   m_hat(pi_j(W_i), W_i) + 1{A_i = pi_j(W_i)} / e_hat(pi_j(W_i), W_i)
//!       * (Y_i - m_hat(A_i, W_i))
//!
//! with cross-fitting so no observation is scored by a model that saw it.

use nalgebra::{DMatrix, DVector};

use crate::rng::RngStream;
use crate::scores::ScoreMatrix;
use crate::{Error, Result};

/// Width of the covariate vector.
pub const NUM_COVARIATES: usize = 6;
/// Policies threshold a linear score of the first three covariates.
pub const POLICY_DIM: usize = 3;
/// Propensities (true and estimated) are kept inside this interval.
pub const CLIP_LO: f64 = 0.1;
pub const CLIP_HI: f64 = 0.9;

fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// True treatment propensity of the synthetic design, clipped like the
/// generator itself.
pub fn true_propensity(w: &[f64; NUM_COVARIATES]) -> f64 {
    let raw = expit(
        0.6 * w[0] - 0.5 * w[1] + 0.3 * w[2] * w[3] - 0.2 * (w[4] * w[4] - 1.0)
            + 0.15 * w[5].sin(),
    );
    raw.clamp(CLIP_LO, CLIP_HI)
}

/// True untreated outcome regression.
pub fn baseline_outcome(w: &[f64; NUM_COVARIATES]) -> f64 {
    0.5 * w[0] - 0.3 * w[1] + 0.2 * w[2] * w[2] - 0.15 * w[3] * w[4] + 0.2 * w[5].cos()
}

/// True conditional treatment effect.
pub fn treatment_effect(w: &[f64; NUM_COVARIATES]) -> f64 {
    0.6 * w[0].sin() + 0.4 * f64::from(w[1] > 0.0) - 0.3 * w[2] + 0.2 * w[0] * w[1]
}

/// Observational data: covariates, binary treatment, outcome.
#[derive(Debug, Clone)]
pub struct PolicyDataset {
    covariates: Vec<[f64; NUM_COVARIATES]>,
    treatment: Vec<bool>,
    outcome: Vec<f64>,
}

impl PolicyDataset {
    pub fn new(
        covariates: Vec<[f64; NUM_COVARIATES]>,
        treatment: Vec<bool>,
        outcome: Vec<f64>,
    ) -> Result<Self> {
        let n = covariates.len();
        if n == 0 {
            return Err(Error::invalid("dataset must contain observations"));
        }
        if treatment.len() != n || outcome.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: treatment.len().min(outcome.len()),
            });
        }
        if covariates.iter().any(|w| w.iter().any(|v| !v.is_finite()))
            || outcome.iter().any(|y| !y.is_finite())
        {
            return Err(Error::invalid("dataset values must be finite"));
        }
        Ok(PolicyDataset {
            covariates,
            treatment,
            outcome,
        })
    }

    pub fn n(&self) -> usize {
        self.covariates.len()
    }

    pub fn covariates(&self, i: usize) -> &[f64; NUM_COVARIATES] {
        &self.covariates[i]
    }

    pub fn treatment(&self, i: usize) -> bool {
        self.treatment[i]
    }

    pub fn outcome(&self, i: usize) -> f64 {
        self.outcome[i]
    }

    fn subset(&self, keep: &[usize]) -> PolicyDataset {
        PolicyDataset {
            covariates: keep.iter().map(|&i| self.covariates[i]).collect(),
            treatment: keep.iter().map(|&i| self.treatment[i]).collect(),
            outcome: keep.iter().map(|&i| self.outcome[i]).collect(),
        }
    }
}

/// A class of deterministic linear threshold rules over the first three
/// covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyClass {
    weights: Vec<[f64; POLICY_DIM]>,
    offsets: Vec<f64>,
}

impl PolicyClass {
    pub fn new(weights: Vec<[f64; POLICY_DIM]>, offsets: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("policy class must be nonempty"));
        }
        if weights.len() != offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: offsets.len(),
            });
        }
        if weights.iter().any(|b| b.iter().any(|v| !v.is_finite()))
            || offsets.iter().any(|b| !b.is_finite())
        {
            return Err(Error::invalid("policy parameters must be finite"));
        }
        Ok(PolicyClass { weights, offsets })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self, j: usize) -> &[f64; POLICY_DIM] {
        &self.weights[j]
    }

    pub fn offset(&self, j: usize) -> f64 {
        self.offsets[j]
    }

    /// The action policy j takes at covariates w.
    pub fn action(&self, j: usize, w: &[f64; NUM_COVARIATES]) -> bool {
        let beta = &self.weights[j];
        beta[0] * w[0] + beta[1] * w[1] + beta[2] * w[2] + self.offsets[j] > 0.0
    }
}

/// Fitted (or injected) nuisance functions. The propensity accessor clips,
/// so the overlap guarantee holds no matter what the inner function returns.
pub struct NuisanceFit {
    propensity: Box<dyn Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync>,
    outcome0: Box<dyn Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync>,
    outcome1: Box<dyn Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync>,
}

impl NuisanceFit {
    pub fn new(
        propensity: impl Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync + 'static,
        outcome0: impl Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync + 'static,
        outcome1: impl Fn(&[f64; NUM_COVARIATES]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NuisanceFit {
            propensity: Box::new(propensity),
            outcome0: Box::new(outcome0),
            outcome1: Box::new(outcome1),
        }
    }

    /// Estimated probability of treatment, clipped to the overlap interval.
    pub fn propensity(&self, w: &[f64; NUM_COVARIATES]) -> f64 {
        (self.propensity)(w).clamp(CLIP_LO, CLIP_HI)
    }

    /// Estimated outcome regression for the given arm.
    pub fn outcome(&self, arm: bool, w: &[f64; NUM_COVARIATES]) -> f64 {
        if arm {
            (self.outcome1)(w)
        } else {
            (self.outcome0)(w)
        }
    }
}

/// Draw n observations from the synthetic observational design.
pub fn gen_semiparametric_data(n: usize, stream: &mut RngStream) -> Result<PolicyDataset> {
    if n == 0 {
        return Err(Error::invalid("need at least one observation"));
    }
    let mut covariates = Vec::with_capacity(n);
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w = [0.0; NUM_COVARIATES];
        for v in &mut w {
            *v = stream.sample_standard_normal();
        }
        let e = true_propensity(&w);
        let a = stream.sample_uniform() < e;
        let y = baseline_outcome(&w)
            + f64::from(a) * treatment_effect(&w)
            + stream.sample_standard_normal();
        covariates.push(w);
        treatment.push(a);
        outcome.push(y);
    }
    PolicyDataset::new(covariates, treatment, outcome)
}

/// Monte Carlo estimates of the true policy values, with standard errors.
#[derive(Debug, Clone)]
pub struct TruthEstimate {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Integrate mu0(W) + pi_j(W) tau(W) over W ~ N(0, I) by Monte Carlo.
pub fn true_policy_values(
    policies: &PolicyClass,
    mc_draws: usize,
    stream: &mut RngStream,
) -> Result<TruthEstimate> {
    if mc_draws == 0 {
        return Err(Error::invalid("need at least one Monte Carlo draw"));
    }
    let jdim = policies.len();
    let mut sum = vec![0.0f64; jdim];
    let mut sumsq = vec![0.0f64; jdim];
    for _ in 0..mc_draws {
        let mut w = [0.0; NUM_COVARIATES];
        for v in &mut w {
            *v = stream.sample_standard_normal();
        }
        let mu = baseline_outcome(&w);
        let tau = treatment_effect(&w);
        for j in 0..jdim {
            let x = mu + f64::from(policies.action(j, &w)) * tau;
            sum[j] += x;
            sumsq[j] += x * x;
        }
    }
    let m = mc_draws as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let std_errors: Vec<f64> = (0..jdim)
        .map(|j| {
            let var = (sumsq[j] / m - values[j] * values[j]).max(0.0);
            (var / m).sqrt()
        })
        .collect();
    Ok(TruthEstimate { values, std_errors })
}

/// Fixed-sample evaluator used while calibrating a policy class: true values
/// are differences of the same Monte Carlo sample, so near-tie gaps are
/// resolved far more precisely than independent estimates would allow.
struct CalibrationTable {
    w_head: Vec<[f64; POLICY_DIM]>,
    tau: Vec<f64>,
    mu0_mean: f64,
}

const CALIBRATION_DRAWS: usize = 2_000_000;

impl CalibrationTable {
    fn build(stream: &mut RngStream) -> Self {
        let mut w_head = Vec::with_capacity(CALIBRATION_DRAWS);
        let mut tau = Vec::with_capacity(CALIBRATION_DRAWS);
        let mut mu0_sum = 0.0;
        for _ in 0..CALIBRATION_DRAWS {
            let mut w = [0.0; NUM_COVARIATES];
            for v in &mut w {
                *v = stream.sample_standard_normal();
            }
            w_head.push([w[0], w[1], w[2]]);
            tau.push(treatment_effect(&w));
            mu0_sum += baseline_outcome(&w);
        }
        CalibrationTable {
            w_head,
            tau,
            mu0_mean: mu0_sum / CALIBRATION_DRAWS as f64,
        }
    }

    fn value(&self, beta: &[f64; POLICY_DIM], b: f64) -> f64 {
        let mut s = 0.0;
        for (wh, &t) in self.w_head.iter().zip(&self.tau) {
            if beta[0] * wh[0] + beta[1] * wh[1] + beta[2] * wh[2] + b > 0.0 {
                s += t;
            }
        }
        self.mu0_mean + s / CALIBRATION_DRAWS as f64
    }
}

const CLASS_ATTEMPTS: usize = 200;

/// Build a policy class with a calibrated near-tie: one anchor chosen as the
/// best of twenty random rules, `n_near_tied - 1` perturbations of it with
/// true values within 0.005 of the anchor (so the whole group spans less
/// than 0.01), and the rest attenuated random rules at least 0.05 below the
/// group's best.
pub fn make_policy_class(
    num_policies: usize,
    n_near_tied: usize,
    stream: &mut RngStream,
) -> Result<PolicyClass> {
    if num_policies == 0 {
        return Err(Error::invalid("policy class must be nonempty"));
    }
    if n_near_tied == 0 || n_near_tied > num_policies {
        return Err(Error::invalid(
            "near-tied count must be between 1 and the class size",
        ));
    }
    let table = CalibrationTable::build(stream);

    let sample_rule = |stream: &mut RngStream, scale: f64| {
        let beta = [
            scale * stream.sample_standard_normal(),
            scale * stream.sample_standard_normal(),
            scale * stream.sample_standard_normal(),
        ];
        let b = scale * 0.5 * stream.sample_standard_normal();
        (beta, b)
    };

    let mut anchor = ([0.0; POLICY_DIM], 0.0);
    let mut anchor_value = f64::NEG_INFINITY;
    for _ in 0..20 {
        let (beta, b) = sample_rule(stream, 1.0);
        let v = table.value(&beta, b);
        if v > anchor_value {
            anchor = (beta, b);
            anchor_value = v;
        }
    }

    let mut weights = vec![anchor.0];
    let mut offsets = vec![anchor.1];
    let mut group_best = anchor_value;

    for slot in 1..n_near_tied {
        let mut scale = 0.3;
        let mut accepted = false;
        for _ in 0..CLASS_ATTEMPTS {
            let beta = [
                anchor.0[0] + scale * stream.sample_standard_normal(),
                anchor.0[1] + scale * stream.sample_standard_normal(),
                anchor.0[2] + scale * stream.sample_standard_normal(),
            ];
            let b = anchor.1 + scale * 0.5 * stream.sample_standard_normal();
            let v = table.value(&beta, b);
            if (v - anchor_value).abs() < 0.005 {
                weights.push(beta);
                offsets.push(b);
                group_best = group_best.max(v);
                accepted = true;
                break;
            }
            scale *= 0.7;
        }
        if !accepted {
            return Err(Error::GenerationFailed(format!(
                "could not calibrate near-tied policy {slot} within {CLASS_ATTEMPTS} attempts"
            )));
        }
    }

    for slot in n_near_tied..num_policies {
        let mut accepted = false;
        for _ in 0..CLASS_ATTEMPTS {
            let (beta, b) = sample_rule(stream, 0.3);
            let v = table.value(&beta, b);
            if v <= group_best - 0.05 {
                weights.push(beta);
                offsets.push(b);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::GenerationFailed(format!(
                "could not draw a clearly suboptimal policy for slot {slot}"
            )));
        }
    }

    PolicyClass::new(weights, offsets)
}

const NUM_FEATURES: usize = 1 + NUM_COVARIATES + NUM_COVARIATES + 15;

/// Degree-2 expansion: intercept, raw coordinates, squares, pairwise
/// products in lexicographic order.
fn expand(w: &[f64; NUM_COVARIATES]) -> [f64; NUM_FEATURES] {
    let mut f = [0.0; NUM_FEATURES];
    f[0] = 1.0;
    for k in 0..NUM_COVARIATES {
        f[1 + k] = w[k];
        f[1 + NUM_COVARIATES + k] = w[k] * w[k];
    }
    let mut idx = 1 + 2 * NUM_COVARIATES;
    for a in 0..NUM_COVARIATES {
        for b in (a + 1)..NUM_COVARIATES {
            f[idx] = w[a] * w[b];
            idx += 1;
        }
    }
    f
}

/// Ridge system solve (X'SX/n + lambda D) theta = rhs with the intercept
/// unpenalized; D is the identity minus the intercept entry.
fn solve_penalized(
    mut normal: DMatrix<f64>,
    rhs: &DVector<f64>,
    ridge: f64,
    what: &str,
) -> Result<DVector<f64>> {
    for k in 1..NUM_FEATURES {
        normal[(k, k)] += ridge;
    }
    let chol = nalgebra::Cholesky::new(normal)
        .ok_or_else(|| Error::FitFailed(format!("{what} normal equations are singular")))?;
    Ok(chol.solve(rhs))
}

fn ridge_linear(
    rows: &[[f64; NUM_FEATURES]],
    targets: &[f64],
    ridge: f64,
    what: &str,
) -> Result<DVector<f64>> {
    let n = rows.len() as f64;
    let mut normal = DMatrix::zeros(NUM_FEATURES, NUM_FEATURES);
    let mut rhs = DVector::zeros(NUM_FEATURES);
    for (f, &y) in rows.iter().zip(targets) {
        for a in 0..NUM_FEATURES {
            rhs[a] += f[a] * y / n;
            for b in a..NUM_FEATURES {
                normal[(a, b)] += f[a] * f[b] / n;
            }
        }
    }
    for a in 0..NUM_FEATURES {
        for b in 0..a {
            normal[(a, b)] = normal[(b, a)];
        }
    }
    solve_penalized(normal, &rhs, ridge, what)
}

fn ridge_logistic(rows: &[[f64; NUM_FEATURES]], labels: &[bool], ridge: f64) -> Result<DVector<f64>> {
    let n = rows.len() as f64;
    let mut theta = DVector::zeros(NUM_FEATURES);
    for _ in 0..100 {
        let mut grad = DVector::zeros(NUM_FEATURES);
        let mut hess = DMatrix::zeros(NUM_FEATURES, NUM_FEATURES);
        for (f, &y) in rows.iter().zip(labels) {
            let mut eta = 0.0;
            for a in 0..NUM_FEATURES {
                eta += f[a] * theta[a];
            }
            let p = expit(eta);
            let resid = p - f64::from(y);
            let s = (p * (1.0 - p)).max(1e-10);
            for a in 0..NUM_FEATURES {
                grad[a] += f[a] * resid / n;
                for b in a..NUM_FEATURES {
                    hess[(a, b)] += s * f[a] * f[b] / n;
                }
            }
        }
        for a in 0..NUM_FEATURES {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
            if a > 0 {
                grad[a] += ridge * theta[a];
            }
        }
        let step = solve_penalized(hess, &grad, ridge, "propensity")?;
        theta -= &step;
        if step.amax() <= 1e-8 {
            return Ok(theta);
        }
    }
    Err(Error::FitFailed(
        "propensity Newton iteration did not converge".into(),
    ))
}

/// Fit the in-repo baseline nuisance learner: ridge logistic propensity and
/// per-arm ridge linear outcome models on the degree-2 expansion.
pub fn fit_baseline_nuisance(train: &PolicyDataset, ridge: f64) -> Result<NuisanceFit> {
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::invalid("ridge penalty must be nonnegative"));
    }
    let n = train.n();
    let treated: Vec<usize> = (0..n).filter(|&i| train.treatment(i)).collect();
    let control: Vec<usize> = (0..n).filter(|&i| !train.treatment(i)).collect();
    if treated.is_empty() || control.is_empty() {
        return Err(Error::FitFailed(
            "training data must contain both treatment arms".into(),
        ));
    }

    let features: Vec<[f64; NUM_FEATURES]> =
        (0..n).map(|i| expand(train.covariates(i))).collect();
    let labels: Vec<bool> = (0..n).map(|i| train.treatment(i)).collect();
    let theta_e = ridge_logistic(&features, &labels, ridge)?;

    let arm_fit = |idx: &[usize], what: &str| -> Result<DVector<f64>> {
        let rows: Vec<[f64; NUM_FEATURES]> = idx.iter().map(|&i| features[i]).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| train.outcome(i)).collect();
        ridge_linear(&rows, &ys, ridge, what)
    };
    let theta0 = arm_fit(&control, "control outcome")?;
    let theta1 = arm_fit(&treated, "treated outcome")?;

    let predict = move |theta: &DVector<f64>, w: &[f64; NUM_COVARIATES]| {
        let f = expand(w);
        let mut s = 0.0;
        for a in 0..NUM_FEATURES {
            s += f[a] * theta[a];
        }
        s
    };
    let pe = theta_e.clone();
    let p0 = theta0.clone();
    let p1 = theta1.clone();
    Ok(NuisanceFit::new(
        move |w| expit(predict(&pe, w)),
        move |w| predict(&p0, w),
        move |w| predict(&p1, w),
    ))
}

/// Convenience factory for [`cross_fit_scores`] wrapping the baseline
/// learner at a fixed penalty.
pub fn baseline_factory(ridge: f64) -> impl Fn(&PolicyDataset) -> Result<NuisanceFit> {
    move |train: &PolicyDataset| fit_baseline_nuisance(train, ridge)
}

/// Random fold labels: a stream-shuffled permutation of 0..n taken mod k,
/// so fold sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, stream: &mut RngStream) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    stream.shuffle(&mut order);
    let mut fold = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Cross-fit AIPW scores: one row per observation, one column per policy,
/// each row scored by nuisances trained on the other folds.
pub fn cross_fit_scores<F>(
    data: &PolicyDataset,
    policies: &PolicyClass,
    folds: usize,
    factory: F,
    stream: &mut RngStream,
) -> Result<ScoreMatrix>
where
    F: Fn(&PolicyDataset) -> Result<NuisanceFit>,
{
    if folds < 2 {
        return Err(Error::invalid("cross-fitting needs at least two folds"));
    }
    let n = data.n();
    if folds > n {
        return Err(Error::invalid("more folds than observations"));
    }
    let jdim = policies.len();
    let fold = fold_assignment(n, folds, stream);

    let mut rows = vec![vec![0.0f64; jdim]; n];
    for f in 0..folds {
        let train_idx: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
        let fit = factory(&data.subset(&train_idx))?;
        for i in (0..n).filter(|&i| fold[i] == f) {
            let w = data.covariates(i);
            let e1 = fit.propensity(w);
            let m_own = fit.outcome(data.treatment(i), w);
            for j in 0..jdim {
                let a_pol = policies.action(j, w);
                let e_pol = if a_pol { e1 } else { 1.0 - e1 };
                let mut score = fit.outcome(a_pol, w);
                if data.treatment(i) == a_pol {
                    score += (data.outcome(i) - m_own) / e_pol;
                }
                rows[i][j] = score;
            }
        }
    }
    ScoreMatrix::from_rows(&rows)
}
