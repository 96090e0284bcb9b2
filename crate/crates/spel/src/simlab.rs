//! Monte Carlo designs, the experiment runner, and timing comparisons.
//!
//! Three score-level designs share one noise recipe (correlated Gaussian
//! plus heavy-tailed plus skewed components) and differ in the mean vector:
//! a unique optimum, an exact k-way tie at the top, or an equicorrelated
//! tied block. A fourth design routes through the full semiparametric
//! pipeline. [`run_experiment`] runs every inference method on each
//! repetition, records coverage and shortfall against the known (or Monte
//! Carlo) best value, and aggregates in repetition order so results are
//! identical for any worker count. [`timing_experiment`] compares the
//! score-level bootstrap against a refit-per-resample bootstrap.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::aipw::{
    baseline_factory, cross_fit_scores, fit_baseline_nuisance, gen_semiparametric_data,
    make_policy_class, true_policy_values, NuisanceFit, PolicyClass, PolicyDataset, POLICY_DIM,
};
use crate::calibrate::{
    corrected_multiplier_bootstrap, estimate_active_set, infer_report, InferMethod, Multiplier,
};
use crate::rng::RngStream;
use crate::scores::{summarize, ScoreMatrix};
use crate::{Error, Result};

/// Which data-generating design an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Unique optimum at 0.35, suboptimal means sloping down from 0.20.
    Dimension,
    /// Top k coordinates tied exactly at 0.35.
    Ties,
    /// Gaussian scores with an equicorrelated tied block at 0.30.
    Correlation,
    /// Scores produced by the cross-fitted semiparametric pipeline.
    Semiparametric,
    /// Wall-clock comparison; handled by [`timing_experiment`].
    Timing,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Dimension => "dimension",
            Experiment::Ties => "ties",
            Experiment::Correlation => "correlation",
            Experiment::Semiparametric => "semiparametric",
            Experiment::Timing => "timing",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimension" => Ok(Experiment::Dimension),
            "ties" => Ok(Experiment::Ties),
            "correlation" => Ok(Experiment::Correlation),
            "semiparametric" => Ok(Experiment::Semiparametric),
            "timing" => Ok(Experiment::Timing),
            other => Err(Error::invalid(format!("unknown experiment '{other}'"))),
        }
    }
}

/// One Monte Carlo cell: the design, its parameters, and the seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub num_policies: usize,
    /// Tie multiplicity for the ties/correlation designs; near-tied count
    /// for the semiparametric design. Ignored by the dimension design.
    pub tie_multiplicity: usize,
    /// Equicorrelation of the tied block; correlation design only.
    pub rho: f64,
    pub reps: usize,
    pub boot_draws: usize,
    pub alpha: f64,
    pub multiplier: Multiplier,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Dimension,
            n: 500,
            num_policies: 20,
            tie_multiplicity: 1,
            rho: 0.0,
            reps: 300,
            boot_draws: 500,
            alpha: 0.05,
            multiplier: Multiplier::Gaussian,
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("need at least one repetition"));
        }
        if self.boot_draws == 0 {
            return Err(Error::invalid("need at least one bootstrap draw"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if self.num_policies < 2 {
            return Err(Error::invalid("need at least two policies"));
        }
        if self.n < 2 {
            return Err(Error::invalid("need at least two observations"));
        }
        match self.experiment {
            Experiment::Dimension => Ok(()),
            Experiment::Ties | Experiment::Semiparametric => {
                check_tie_count(self.tie_multiplicity, self.num_policies)
            }
            Experiment::Correlation => {
                check_tie_count(self.tie_multiplicity, self.num_policies)?;
                check_rho(self.rho, self.tie_multiplicity)
            }
            Experiment::Timing => Err(Error::invalid(
                "timing cells run through timing_experiment, not run_experiment",
            )),
        }
    }

    /// True score means, when the design fixes them in advance.
    pub fn theta0(&self) -> Option<Vec<f64>> {
        match self.experiment {
            Experiment::Dimension => Some(theta_ties(self.num_policies, 1)),
            Experiment::Ties => Some(theta_ties(self.num_policies, self.tie_multiplicity)),
            Experiment::Correlation => {
                Some(theta_correlation(self.num_policies, self.tie_multiplicity))
            }
            Experiment::Semiparametric | Experiment::Timing => None,
        }
    }

    /// Best mean tau0 = max_j theta0_j, when known in advance.
    pub fn tau0(&self) -> Option<f64> {
        self.theta0()
            .map(|t| t.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Smallest gap tau0 - theta0_j over strictly suboptimal coordinates;
    /// +infinity when every coordinate is optimal.
    pub fn optimality_gap(&self) -> Option<f64> {
        self.theta0().map(|t| {
            let tau = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            t.iter()
                .filter(|&&v| v < tau)
                .map(|&v| tau - v)
                .fold(f64::INFINITY, f64::min)
        })
    }
}

fn check_tie_count(k: usize, num_policies: usize) -> Result<()> {
    if k == 0 || k > num_policies {
        return Err(Error::invalid(
            "tie multiplicity must be between 1 and the number of policies",
        ));
    }
    Ok(())
}

fn check_rho(rho: f64, k: usize) -> Result<()> {
    if !rho.is_finite() || rho >= 1.0 {
        return Err(Error::invalid("tied-block correlation must be below 1"));
    }
    if k >= 2 && rho <= -1.0 / (k as f64 - 1.0) {
        return Err(Error::invalid(
            "tied-block correlation leaves the positive definite range",
        ));
    }
    Ok(())
}

/// Mean vector with the top k coordinates at 0.35 and the rest sloping
/// from 0.20 down to 0.00 (the unique-optimum design is k = 1).
fn theta_ties(num_policies: usize, k: usize) -> Vec<f64> {
    let jf = num_policies as f64;
    (0..num_policies)
        .map(|idx| {
            if idx < k {
                0.35
            } else if num_policies == 2 {
                0.20
            } else {
                0.20 - 0.20 * (idx as f64 - 1.0) / (jf - 2.0)
            }
        })
        .collect()
}

fn theta_correlation(num_policies: usize, k: usize) -> Vec<f64> {
    (0..num_policies)
        .map(|idx| if idx < k { 0.30 } else { 0.10 })
        .collect()
}

fn gaussian_factor(sigma: DMatrix<f64>) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(sigma)
        .map(|c| c.unpack())
        .ok_or_else(|| Error::Solver("design covariance is not positive definite".into()))
}

/// Unique-optimum score design: theta plus correlated Gaussian,
/// heavy-tailed, and skewed noise components.
pub fn gen_scores_dimension(
    n: usize,
    num_policies: usize,
    stream: &mut RngStream,
) -> Result<(ScoreMatrix, Vec<f64>)> {
    gen_scores_ties(n, num_policies, 1, stream)
}

/// Same noise as the dimension design with the top k means tied at 0.35.
/// At k = 1 this is the dimension design draw for draw.
pub fn gen_scores_ties(
    n: usize,
    num_policies: usize,
    k: usize,
    stream: &mut RngStream,
) -> Result<(ScoreMatrix, Vec<f64>)> {
    if n < 2 || num_policies < 2 {
        return Err(Error::invalid("need n >= 2 and at least two policies"));
    }
    check_tie_count(k, num_policies)?;
    let theta = theta_ties(num_policies, k);
    let jf = num_policies as f64;
    let v: Vec<f64> = (0..num_policies)
        .map(|j| 1.0 - 0.3 * j as f64 / (jf - 1.0))
        .collect();
    let b: Vec<f64> = (0..num_policies)
        .map(|j| 1.0 - 0.5 * j as f64 / (jf - 1.0))
        .collect();
    let sigma_g = DMatrix::from_fn(num_policies, num_policies, |r, c| {
        (0.5f64.powi((r as i32 - c as i32).abs()) + 0.15) * (v[r] * v[c]).sqrt() / 1.15
    });
    let chol = gaussian_factor(sigma_g)?;

    let mut rows = vec![vec![0.0f64; num_policies]; n];
    let mut z = vec![0.0f64; num_policies];
    for row in &mut rows {
        for zj in &mut z {
            *zj = stream.sample_standard_normal();
        }
        for j in 0..num_policies {
            let mut g = 0.0;
            for (l, zl) in z.iter().enumerate().take(j + 1) {
                g += chol[(j, l)] * zl;
            }
            row[j] = theta[j] + 0.70 * g;
        }
        for (j, item) in row.iter_mut().enumerate() {
            *item += 0.20 * stream.sample_standardized_t5();
            let _ = j;
        }
        let s = stream.sample_centered_exponential();
        for (j, item) in row.iter_mut().enumerate() {
            *item += 0.10 * s * b[j];
        }
    }
    Ok((ScoreMatrix::from_rows(&rows)?, theta))
}

/// Gaussian design with a k-coordinate equicorrelated block tied at 0.30
/// and independent unit-variance coordinates at 0.10 elsewhere.
pub fn gen_scores_correlation(
    n: usize,
    num_policies: usize,
    k: usize,
    rho: f64,
    stream: &mut RngStream,
) -> Result<(ScoreMatrix, Vec<f64>)> {
    if n < 2 || num_policies < 2 {
        return Err(Error::invalid("need n >= 2 and at least two policies"));
    }
    check_tie_count(k, num_policies)?;
    check_rho(rho, k)?;
    let theta = theta_correlation(num_policies, k);
    let sigma = DMatrix::from_fn(num_policies, num_policies, |r, c| {
        if r == c {
            1.0
        } else if r < k && c < k {
            rho
        } else {
            0.0
        }
    });
    let chol = gaussian_factor(sigma)?;

    let mut rows = vec![vec![0.0f64; num_policies]; n];
    let mut z = vec![0.0f64; num_policies];
    for row in &mut rows {
        for zj in &mut z {
            *zj = stream.sample_standard_normal();
        }
        for j in 0..num_policies {
            let mut g = 0.0;
            for (l, zl) in z.iter().enumerate().take(j + 1) {
                g += chol[(j, l)] * zl;
            }
            row[j] = theta[j] + g;
        }
    }
    Ok((ScoreMatrix::from_rows(&rows)?, theta))
}

/// Outcome of one repetition under one method.
#[derive(Debug, Clone, PartialEq)]
pub struct RepRecord {
    pub rep: usize,
    pub lower: f64,
    pub covered: bool,
    pub shortfall: f64,
    pub critical_value: f64,
    pub active_size: usize,
}

/// Aggregates for one method across all repetitions, with the per-rep
/// records retained for table output.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: InferMethod,
    pub coverage: f64,
    pub mean_shortfall: f64,
    pub mean_critical_value: f64,
    pub mean_active_size: f64,
    pub reps: Vec<RepRecord>,
}

/// Full experiment output: the target value (with Monte Carlo standard
/// error when the truth itself is estimated) and one summary per method.
#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub tau0: f64,
    pub tau0_se: f64,
    pub methods: Vec<MethodSummary>,
}

/// Methods evaluated on every repetition, in reporting order.
pub const EXPERIMENT_METHODS: [InferMethod; 5] = [
    InferMethod::Auto,
    InferMethod::OrdinaryBoot,
    InferMethod::ProjectedJoint,
    InferMethod::SelectedWald,
    InferMethod::FangSantos,
];

const SEMIPARAMETRIC_RIDGE: f64 = 1e-3;
const SEMIPARAMETRIC_FOLDS: usize = 2;
const TRUTH_DRAWS: usize = 2_000_000;
/// Stream lane reserved for experiment setup; repetition indices stay below.
const SETUP_LANE: u64 = u64::MAX;

/// Run the configured Monte Carlo cell. Repetition i draws its data from
/// stream address (master_seed, [i, 0]) and method m from (master_seed,
/// [i, 1 + m]), so results depend only on the seed, never on scheduling;
/// `workers` threads split the repetitions.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<MonteCarloResult> {
    config.validate()?;
    let seed = config.master_seed;

    let (class, tau0, tau0_se) = match config.experiment {
        Experiment::Semiparametric => {
            let mut gen = RngStream::derive(seed, &[SETUP_LANE, 0]);
            let class = make_policy_class(config.num_policies, config.tie_multiplicity, &mut gen)?;
            let mut truth_stream = RngStream::derive(seed, &[SETUP_LANE, 1]);
            let truth = true_policy_values(&class, TRUTH_DRAWS, &mut truth_stream)?;
            let best = truth
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("policy class is nonempty");
            (Some(class), *best.1, truth.std_errors[best.0])
        }
        _ => (
            None,
            config.tau0().expect("score-level designs fix the truth"),
            0.0,
        ),
    };

    let run_one = |rep: usize| -> Result<Vec<RepRecord>> {
        let mut data_stream = RngStream::derive(seed, &[rep as u64, 0]);
        let scores = match config.experiment {
            Experiment::Dimension => {
                gen_scores_ties(config.n, config.num_policies, 1, &mut data_stream)?.0
            }
            Experiment::Ties => gen_scores_ties(
                config.n,
                config.num_policies,
                config.tie_multiplicity,
                &mut data_stream,
            )?
            .0,
            Experiment::Correlation => gen_scores_correlation(
                config.n,
                config.num_policies,
                config.tie_multiplicity,
                config.rho,
                &mut data_stream,
            )?
            .0,
            Experiment::Semiparametric => {
                let data = gen_semiparametric_data(config.n, &mut data_stream)?;
                cross_fit_scores(
                    &data,
                    class.as_ref().expect("class built during setup"),
                    SEMIPARAMETRIC_FOLDS,
                    baseline_factory(SEMIPARAMETRIC_RIDGE),
                    &mut data_stream,
                )?
            }
            Experiment::Timing => unreachable!("rejected by validate"),
        };
        let mut records = Vec::with_capacity(EXPERIMENT_METHODS.len());
        for (m, method) in EXPERIMENT_METHODS.iter().enumerate() {
            let method_stream = RngStream::derive(seed, &[rep as u64, 1 + m as u64]);
            let report = infer_report(
                &scores,
                config.alpha,
                *method,
                config.boot_draws,
                config.multiplier,
                &method_stream,
            )?;
            let lower = report.bound.lower;
            records.push(RepRecord {
                rep,
                lower,
                covered: lower <= tau0,
                shortfall: tau0 - lower,
                critical_value: report.bound.critical_value,
                active_size: report.active.indices.active().len(),
            });
        }
        Ok(records)
    };

    let reps = config.reps;
    let worker_count = workers.clamp(1, reps);
    let mut per_rep: Vec<Option<Result<Vec<RepRecord>>>> = Vec::new();
    if worker_count == 1 {
        for rep in 0..reps {
            per_rep.push(Some(run_one(rep)));
        }
    } else {
        let cells: Vec<Mutex<Option<Result<Vec<RepRecord>>>>> =
            (0..reps).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..worker_count {
                scope.spawn(|| loop {
                    let rep = next.fetch_add(1, Ordering::Relaxed);
                    if rep >= reps {
                        break;
                    }
                    let out = run_one(rep);
                    *cells[rep].lock().expect("result mutex poisoned") = Some(out);
                });
            }
        });
        per_rep = cells
            .into_iter()
            .map(|c| c.into_inner().expect("result mutex poisoned"))
            .collect();
    }

    // Aggregate in repetition order so floating sums are scheduling-free.
    let mut by_method: Vec<Vec<RepRecord>> = EXPERIMENT_METHODS.map(|_| Vec::new()).into();
    for slot in per_rep {
        let records = slot.expect("every repetition claimed")?;
        for (m, record) in records.into_iter().enumerate() {
            by_method[m].push(record);
        }
    }
    let methods = EXPERIMENT_METHODS
        .iter()
        .zip(by_method)
        .map(|(&method, records)| {
            let r = reps as f64;
            MethodSummary {
                method,
                coverage: records.iter().filter(|x| x.covered).count() as f64 / r,
                mean_shortfall: records.iter().map(|x| x.shortfall).sum::<f64>() / r,
                mean_critical_value: records.iter().map(|x| x.critical_value).sum::<f64>() / r,
                mean_active_size: records.iter().map(|x| x.active_size as f64).sum::<f64>() / r,
                reps: records,
            }
        })
        .collect();
    Ok(MonteCarloResult {
        tau0,
        tau0_se,
        methods,
    })
}

impl MonteCarloResult {
    /// The summary for one method.
    pub fn method(&self, method: InferMethod) -> &MethodSummary {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .expect("every experiment method is summarized")
    }
}

/// Wall-clock comparison of the two bootstrap designs.
#[derive(Debug, Clone)]
pub struct TimingReport {
    pub n: usize,
    pub num_policies: usize,
    pub boot_draws: usize,
    /// Fastest total seconds for the score-level corrected bootstrap.
    pub score_secs: f64,
    /// Fastest total seconds for the refit-per-resample bootstrap.
    pub refit_secs: f64,
    pub score_per_draw_secs: f64,
    pub refit_per_draw_secs: f64,
    /// refit cost over score-level cost, per draw.
    pub ratio: f64,
}

fn plug_in_values(data: &PolicyDataset, policies: &PolicyClass, fit: &NuisanceFit) -> Vec<f64> {
    let n = data.n();
    let jdim = policies.len();
    let mut acc = vec![0.0f64; jdim];
    for i in 0..n {
        let w = data.covariates(i);
        let e1 = fit.propensity(w);
        let m_own = fit.outcome(data.treatment(i), w);
        for (j, slot) in acc.iter_mut().enumerate() {
            let a_pol = policies.action(j, w);
            let e_pol = if a_pol { e1 } else { 1.0 - e1 };
            let mut s = fit.outcome(a_pol, w);
            if data.treatment(i) == a_pol {
                s += (data.outcome(i) - m_own) / e_pol;
            }
            *slot += s;
        }
    }
    acc.iter().map(|v| v / n as f64).collect()
}

struct TimingInstance {
    data: PolicyDataset,
    class: PolicyClass,
    scores: ScoreMatrix,
    cone: crate::geometry::ConeSpec,
}

fn timing_instance(
    n: usize,
    num_policies: usize,
    stream: &mut RngStream,
) -> Result<TimingInstance> {
    if n < 40 || num_policies < 2 {
        return Err(Error::invalid(
            "timing needs n >= 40 and at least two policies",
        ));
    }
    let data = gen_semiparametric_data(n, stream)?;
    // Random threshold rules; timing does not need a calibrated near-tie.
    let weights: Vec<[f64; POLICY_DIM]> = (0..num_policies)
        .map(|_| {
            [
                stream.sample_standard_normal(),
                stream.sample_standard_normal(),
                stream.sample_standard_normal(),
            ]
        })
        .collect();
    let offsets: Vec<f64> = (0..num_policies)
        .map(|_| 0.5 * stream.sample_standard_normal())
        .collect();
    let class = PolicyClass::new(weights, offsets)?;
    let scores = cross_fit_scores(
        &data,
        &class,
        SEMIPARAMETRIC_FOLDS,
        baseline_factory(SEMIPARAMETRIC_RIDGE),
        stream,
    )?;
    let cone = estimate_active_set(&summarize(&scores)?).indices;
    Ok(TimingInstance {
        data,
        class,
        scores,
        cone,
    })
}

/// Seconds for one run of the score-level corrected bootstrap alone, after
/// freezing the cross-fitted scores of a semiparametric instance.
pub fn frozen_score_bootstrap_secs(
    n: usize,
    num_policies: usize,
    boot_draws: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    if boot_draws == 0 {
        return Err(Error::invalid("need at least one bootstrap draw"));
    }
    let instance = timing_instance(n, num_policies, stream)?;
    let t = Instant::now();
    let cal = corrected_multiplier_bootstrap(
        &instance.scores,
        &instance.cone,
        0.05,
        boot_draws,
        Multiplier::Gaussian,
        &stream.child(0),
    )?;
    std::hint::black_box(cal.critical_value);
    Ok(t.elapsed().as_secs_f64())
}

/// Time the corrected score bootstrap against a bootstrap that refits the
/// baseline nuisance learner inside every resample. Both arms run the same
/// number of draws from the same stream addresses; the reported times are
/// the fastest of `reps` repeat measurements. Single-threaded on purpose.
pub fn timing_experiment(
    n: usize,
    num_policies: usize,
    boot_draws: usize,
    reps: usize,
    stream: &mut RngStream,
) -> Result<TimingReport> {
    if boot_draws == 0 || reps == 0 {
        return Err(Error::invalid("need at least one draw and one repetition"));
    }
    let TimingInstance {
        data,
        class,
        scores,
        cone,
    } = timing_instance(n, num_policies, stream)?;

    let draw_parent = stream.child(0);
    let mut score_secs = f64::INFINITY;
    for _ in 0..reps {
        let t = Instant::now();
        let cal = corrected_multiplier_bootstrap(
            &scores,
            &cone,
            0.05,
            boot_draws,
            Multiplier::Gaussian,
            &draw_parent,
        )?;
        std::hint::black_box(cal.critical_value);
        score_secs = score_secs.min(t.elapsed().as_secs_f64());
    }

    let mut refit_secs = f64::INFINITY;
    for _ in 0..reps {
        let t = Instant::now();
        for draw in 0..boot_draws {
            let mut child = draw_parent.child(draw as u64);
            let idx: Vec<usize> = (0..n).map(|_| child.sample_index(n)).collect();
            let resampled = PolicyDataset::new(
                idx.iter().map(|&i| *data.covariates(i)).collect(),
                idx.iter().map(|&i| data.treatment(i)).collect(),
                idx.iter().map(|&i| data.outcome(i)).collect(),
            )?;
            let fit = fit_baseline_nuisance(&resampled, SEMIPARAMETRIC_RIDGE)?;
            let best = plug_in_values(&resampled, &class, &fit)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            std::hint::black_box(best);
        }
        refit_secs = refit_secs.min(t.elapsed().as_secs_f64());
    }

    let score_per_draw_secs = score_secs / boot_draws as f64;
    let refit_per_draw_secs = refit_secs / boot_draws as f64;
    Ok(TimingReport {
        n,
        num_policies,
        boot_draws,
        score_secs,
        refit_secs,
        score_per_draw_secs,
        refit_per_draw_secs,
        ratio: refit_per_draw_secs / score_per_draw_secs,
    })
}

/// Per-draw seconds of the score-level corrected bootstrap on a ties design
/// sample; used to check that the cost scales like n times J.
pub fn score_bootstrap_cost(
    n: usize,
    num_policies: usize,
    boot_draws: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    if boot_draws == 0 {
        return Err(Error::invalid("need at least one bootstrap draw"));
    }
    let (scores, _) = gen_scores_ties(n, num_policies, 2.min(num_policies), stream)?;
    let cone = estimate_active_set(&summarize(&scores)?).indices;
    let parent = stream.child(0);
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let t = Instant::now();
        let cal = corrected_multiplier_bootstrap(
            &scores,
            &cone,
            0.05,
            boot_draws,
            Multiplier::Gaussian,
            &parent,
        )?;
        std::hint::black_box(cal.critical_value);
        best = best.min(t.elapsed().as_secs_f64());
    }
    Ok(best / boot_draws as f64)
}
