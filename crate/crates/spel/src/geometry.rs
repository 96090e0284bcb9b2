//! Mahalanobis projections onto the max functional's level sets.
//!
//! The level set M_tau = {m : max_j m_j = tau} is a union of faces
//! F_A = {m : m_j = tau for j in A, m_k <= tau otherwise}. Projecting onto a
//! single face is a closed-form equality-constrained least-squares problem;
//! projecting onto M_tau itself is done by a two-case convex reduction
//! (see [`profile_stat_max`]) rather than enumerating all 2^J - 1 faces.
//! Enumeration is kept as the `_enumerate` reference implementations and in
//! the test oracles.
//!
//! Cost normalization: [`project_onto_face`] and [`profile_stat_max`] report
//! the statistic-scaled cost n * d^2(mean, face); [`distance_to_cone`] and
//! [`distance_to_hyperplane`] report plain d^2, since their inputs (limit
//! directions, bootstrap draws) are already sqrt(n)-scaled.

use nalgebra::{DMatrix, DVector};

use crate::scores::ScoreSummary;
use crate::{Error, Result};

/// Feasibility tolerance for "coordinate does not exceed tau": boundary
/// points count as feasible.
pub(crate) fn feasibility_tol(tau: f64) -> f64 {
    1e-9 * (1.0 + tau.abs())
}

/// Cost window within which two faces count as tied (smaller cardinality,
/// then lexicographic order, wins).
fn cost_tie_window(cost: f64) -> f64 {
    1e-12 * (1.0 + cost.abs())
}

/// Tangent-cone description: the constrained coordinate block of
/// {v : max_{j in active} v_j = 0} inside an ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSpec {
    active: Vec<usize>,
    ambient_dim: usize,
}

impl ConeSpec {
    /// Validate and normalize an active-index set.
    pub fn new(mut active: Vec<usize>, ambient_dim: usize) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::invalid("cone needs a nonempty active set"));
        }
        active.sort_unstable();
        if active.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("cone active set has duplicate indices"));
        }
        if *active.last().unwrap() >= ambient_dim {
            return Err(Error::invalid(format!(
                "cone active index {} out of range for dimension {}",
                active.last().unwrap(),
                ambient_dim
            )));
        }
        Ok(ConeSpec {
            active,
            ambient_dim,
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
}

/// Projection of the summary mean onto one face of the level set.
#[derive(Debug, Clone)]
pub struct FaceProjection {
    /// Indices pinned to tau, strictly increasing.
    pub face: Vec<usize>,
    /// The projected point Pi_A(tau).
    pub point: DVector<f64>,
    /// n-scaled Mahalanobis cost of the shift mean -> point.
    pub cost: f64,
    /// Whether every unpinned coordinate of `point` stays <= tau (+tolerance).
    pub feasible: bool,
}

/// Equality projection of `anchor` onto {m : m_j = tau for j in face} under
/// the metric cov^{-1}. Returns (point, multipliers, unscaled cost).
fn eq_projection(
    anchor: &DVector<f64>,
    cov: &DMatrix<f64>,
    face: &[usize],
    tau: f64,
) -> Result<(DVector<f64>, Vec<f64>, f64)> {
    let k = face.len();
    let s_aa = DMatrix::from_fn(k, k, |r, c| cov[(face[r], face[c])]);
    let g = DVector::from_fn(k, |r, _| anchor[face[r]] - tau);
    let chol = nalgebra::Cholesky::new(s_aa).ok_or_else(|| {
        Error::Solver("face submatrix of the covariance is not positive definite".into())
    })?;
    let u = chol.solve(&g);
    let cost = g.dot(&u).max(0.0);
    let mut point = anchor.clone();
    for (idx, &a) in face.iter().enumerate() {
        point.axpy(-u[idx], &cov.column(a).into_owned(), 1.0);
    }
    // The pinned coordinates equal tau analytically; snap away the last bits
    // of rounding so downstream equality checks are exact.
    for &a in face {
        point[a] = tau;
    }
    Ok((point, u.iter().copied().collect(), cost))
}

fn check_face(face: &[usize], dim: usize) -> Result<Vec<usize>> {
    if face.is_empty() {
        return Err(Error::invalid("face must be nonempty"));
    }
    let mut sorted = face.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("face has duplicate indices"));
    }
    if *sorted.last().unwrap() >= dim {
        return Err(Error::invalid(format!(
            "face index {} out of range for dimension {}",
            sorted.last().unwrap(),
            dim
        )));
    }
    Ok(sorted)
}

/// Closed-form projection of the mean onto the face {m : m_j = tau, j in A},
/// with the n-scaled cost and a feasibility flag for the unpinned coordinates.
pub fn project_onto_face(summary: &ScoreSummary, face: &[usize], tau: f64) -> Result<FaceProjection> {
    let j = summary.num_policies();
    let face = check_face(face, j)?;
    let (point, _, cost) = eq_projection(summary.mean(), summary.cov(), &face, tau)?;
    let tol = feasibility_tol(tau);
    let feasible = (0..j)
        .filter(|k| !face.contains(k))
        .all(|k| point[k] <= tau + tol);
    Ok(FaceProjection {
        face,
        point,
        cost: summary.n() as f64 * cost,
        feasible,
    })
}

/// Solution of a level-set projection, in unscaled (plain d^2) cost.
#[derive(Debug, Clone)]
pub(crate) struct LevelSolution {
    pub cost: f64,
    pub point: DVector<f64>,
    pub face: Vec<usize>,
}

/// Composite face order: cost (within the tie window), then cardinality,
/// then lexicographic.
fn candidate_better(cost_a: f64, face_a: &[usize], cost_b: f64, face_b: &[usize]) -> bool {
    let window = cost_tie_window(cost_a.min(cost_b));
    if (cost_a - cost_b).abs() > window {
        return cost_a < cost_b;
    }
    if face_a.len() != face_b.len() {
        return face_a.len() < face_b.len();
    }
    face_a < face_b
}

/// Projection of `anchor` onto {m : m_k <= tau for k in constrained}
/// (intersected with {m_pin = tau} when `pin` is set) by a primal active-set
/// iteration: each step is a face projection plus a feasibility/multiplier
/// check, and the working set changes by one constraint at a time.
fn project_with_working_set(
    anchor: &DVector<f64>,
    cov: &DMatrix<f64>,
    constrained: &[usize],
    tau: f64,
    pin: Option<usize>,
) -> Result<LevelSolution> {
    let scale = 1.0 + tau.abs() + anchor.amax();
    let step_tol = 1e-12 * scale;

    let mut x = anchor.clone();
    for &k in constrained {
        if x[k] > tau {
            x[k] = tau;
        }
    }
    let mut working: Vec<usize> = constrained
        .iter()
        .copied()
        .filter(|&k| anchor[k] >= tau)
        .collect();
    if let Some(p) = pin {
        x[p] = tau;
        if !working.contains(&p) {
            working.push(p);
            working.sort_unstable();
        }
    }

    let max_iter = 30 * (constrained.len() + 2);
    for _ in 0..max_iter {
        let (m, u) = if working.is_empty() {
            (anchor.clone(), Vec::new())
        } else {
            let (m, u, _) = eq_projection(anchor, cov, &working, tau)?;
            (m, u)
        };
        let d = &m - &x;

        if d.amax() <= step_tol {
            // Stationary on the current face: check dual feasibility.
            let u_scale = 1.0 + u.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let mut worst: Option<(usize, f64)> = None;
            for (pos, &j) in working.iter().enumerate() {
                if pin == Some(j) {
                    continue;
                }
                if u[pos] < -1e-10 * u_scale && worst.map_or(true, |(_, v)| u[pos] < v) {
                    worst = Some((pos, u[pos]));
                }
            }
            if let Some((pos, _)) = worst {
                working.remove(pos);
                continue;
            }
            return finish_projection(anchor, cov, constrained, tau, pin, working, u);
        }

        // Step toward the face projection, blocking on the first constraint
        // outside the working set that would be crossed.
        let mut alpha = 1.0;
        let mut blocker = None;
        for &k in constrained {
            if working.binary_search(&k).is_ok() {
                continue;
            }
            if d[k] > 1e-13 * scale {
                let a = ((tau - x[k]) / d[k]).max(0.0);
                if a < alpha {
                    alpha = a;
                    blocker = Some(k);
                }
            }
        }
        x.axpy(alpha, &d, 1.0);
        for &jw in &working {
            x[jw] = tau;
        }
        if let Some(k) = blocker {
            x[k] = tau;
            working.push(k);
            working.sort_unstable();
        }
    }
    Err(Error::Solver(
        "active-set projection failed to converge".into(),
    ))
}

/// Final trim pass: drop working-set coordinates whose constraint is not
/// really binding. A coordinate is dropped only if the projection without it
/// stays feasible and its cost stays within the tie window, which is exactly
/// the predicate under which exhaustive enumeration would prefer the smaller
/// face. Candidates are visited in descending index order so equal-cardinality
/// ties resolve to the lexicographically smallest face.
fn finish_projection(
    anchor: &DVector<f64>,
    cov: &DMatrix<f64>,
    constrained: &[usize],
    tau: f64,
    pin: Option<usize>,
    working: Vec<usize>,
    multipliers: Vec<f64>,
) -> Result<LevelSolution> {
    let tol = feasibility_tol(tau);
    let mut face = working;
    let mut u = multipliers;
    let (mut point, mut cost) = if face.is_empty() {
        (anchor.clone(), 0.0)
    } else {
        let (p, _, c) = eq_projection(anchor, cov, &face, tau)?;
        (p, c)
    };

    loop {
        let u_scale = 1.0 + u.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let mut dropped = false;
        for pos in (0..face.len()).rev() {
            let j = face[pos];
            if pin == Some(j) || face.len() == 1 {
                continue;
            }
            // Only near-zero multipliers can possibly be droppable.
            if u[pos].abs() > 1e-6 * u_scale {
                continue;
            }
            let mut candidate = face.clone();
            candidate.remove(pos);
            let (p2, u2, c2) = eq_projection(anchor, cov, &candidate, tau)?;
            let feasible = constrained
                .iter()
                .filter(|k| candidate.binary_search(k).is_err())
                .all(|&k| p2[k] <= tau + tol);
            if feasible && (c2 - cost).abs() <= cost_tie_window(cost) {
                face = candidate;
                u = u2;
                point = p2;
                cost = c2;
                dropped = true;
                break;
            }
        }
        if !dropped {
            break;
        }
    }
    Ok(LevelSolution { cost, point, face })
}

/// Projection of `anchor` onto {m : max over constrained coordinates = tau},
/// leaving unconstrained coordinates free. Unscaled cost.
pub(crate) fn project_to_level_set(
    anchor: &DVector<f64>,
    cov: &DMatrix<f64>,
    constrained: &[usize],
    tau: f64,
) -> Result<LevelSolution> {
    debug_assert!(!constrained.is_empty());
    let ymax = constrained
        .iter()
        .fold(f64::NEG_INFINITY, |a, &k| a.max(anchor[k]));

    if ymax > tau {
        // The anchor sits above the level set; the nearest point of
        // {max = tau} is the projection onto the down-set {m <= tau}.
        let sol = project_with_working_set(anchor, cov, constrained, tau, None)?;
        if sol.face.is_empty() {
            return Err(Error::Solver("projection lost all active constraints".into()));
        }
        return Ok(sol);
    }

    // The anchor is on or below the level set: some coordinate must be pushed
    // up to tau. Solve one convex subproblem per pinned coordinate.
    let mut best: Option<LevelSolution> = None;
    for &j in constrained {
        let cand = project_with_working_set(anchor, cov, constrained, tau, Some(j))?;
        best = match best {
            None => Some(cand),
            Some(cur) => {
                if candidate_better(cand.cost, &cand.face, cur.cost, &cur.face) {
                    Some(cand)
                } else {
                    Some(cur)
                }
            }
        };
    }
    Ok(best.expect("constrained set is nonempty"))
}

/// Profile statistic of the max functional at level tau: the minimal n-scaled
/// face cost over feasible faces, with the minimizing face.
pub fn profile_stat_max(summary: &ScoreSummary, tau: f64) -> Result<(f64, Vec<usize>)> {
    let sol = profile_projection(summary, tau)?;
    Ok((summary.n() as f64 * sol.cost, sol.face))
}

/// Like [`profile_stat_max`] but exposing the projected point (unscaled cost).
pub(crate) fn profile_projection(summary: &ScoreSummary, tau: f64) -> Result<LevelSolution> {
    let all: Vec<usize> = (0..summary.num_policies()).collect();
    project_to_level_set(summary.mean(), summary.cov(), &all, tau)
}

/// Exhaustive-reference version of [`profile_stat_max`]: minimum over all
/// 2^J - 1 faces of the feasible equality-projection cost. J <= 12 only.
pub fn profile_stat_max_enumerate(summary: &ScoreSummary, tau: f64) -> Result<(f64, Vec<usize>)> {
    let j = summary.num_policies();
    if j > 12 {
        return Err(Error::invalid(
            "enumeration reference is limited to J <= 12",
        ));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << j) {
        let face: Vec<usize> = (0..j).filter(|&b| mask & (1 << b) != 0).collect();
        let fp = project_onto_face(summary, &face, tau)?;
        if !fp.feasible {
            continue;
        }
        best = match best {
            None => Some((fp.cost, face)),
            Some((bc, bf)) => {
                if candidate_better(fp.cost, &fp.face, bc, &bf) {
                    Some((fp.cost, fp.face))
                } else {
                    Some((bc, bf))
                }
            }
        };
    }
    best.ok_or_else(|| Error::Solver("no feasible face found".into()))
}

/// Squared Mahalanobis distance from z to the hyperplane {v : a0^T v = 0}:
/// (a0^T z)^2 / (a0^T cov a0). Unscaled.
pub fn distance_to_hyperplane(
    z: &DVector<f64>,
    summary: &ScoreSummary,
    a0: &DVector<f64>,
) -> Result<f64> {
    let j = summary.num_policies();
    if z.len() != j || a0.len() != j {
        return Err(Error::DimensionMismatch {
            expected: j,
            got: if z.len() != j { z.len() } else { a0.len() },
        });
    }
    if a0.amax() == 0.0 {
        return Err(Error::invalid("hyperplane normal must be nonzero"));
    }
    let denom = (a0.transpose() * summary.cov() * a0)[(0, 0)];
    let num = a0.dot(z);
    Ok(num * num / denom)
}

/// Squared Mahalanobis distance from z to the tangent cone
/// {v : max over active coordinates = 0}, with the minimizing face. Unscaled.
pub fn distance_to_cone(
    z: &DVector<f64>,
    summary: &ScoreSummary,
    cone: &ConeSpec,
) -> Result<(f64, Vec<usize>)> {
    let j = summary.num_policies();
    if cone.ambient_dim() != j || z.len() != j {
        return Err(Error::DimensionMismatch {
            expected: j,
            got: if z.len() != j {
                z.len()
            } else {
                cone.ambient_dim()
            },
        });
    }
    let sol = project_to_level_set(z, summary.cov(), cone.active(), 0.0)?;
    Ok((sol.cost, sol.face))
}

/// Exhaustive-reference version of [`distance_to_cone`]. |active| <= 12 only.
pub fn distance_to_cone_enumerate(
    z: &DVector<f64>,
    summary: &ScoreSummary,
    cone: &ConeSpec,
) -> Result<(f64, Vec<usize>)> {
    let j = summary.num_policies();
    if cone.ambient_dim() != j || z.len() != j {
        return Err(Error::DimensionMismatch {
            expected: j,
            got: z.len(),
        });
    }
    let active = cone.active();
    if active.len() > 12 {
        return Err(Error::invalid(
            "enumeration reference is limited to |active| <= 12",
        ));
    }
    let tol = feasibility_tol(0.0);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << active.len()) {
        let face: Vec<usize> = active
            .iter()
            .enumerate()
            .filter(|&(b, _)| mask & (1 << b) != 0)
            .map(|(_, &idx)| idx)
            .collect();
        let (point, _, cost) = eq_projection(z, summary.cov(), &face, 0.0)?;
        let feasible = active
            .iter()
            .filter(|k| face.binary_search(k).is_err())
            .all(|&k| point[k] <= tol);
        if !feasible {
            continue;
        }
        best = match best {
            None => Some((cost, face)),
            Some((bc, bf)) => {
                if candidate_better(cost, &face, bc, &bf) {
                    Some((cost, face))
                } else {
                    Some((bc, bf))
                }
            }
        };
    }
    best.ok_or_else(|| Error::Solver("no feasible face found".into()))
}
