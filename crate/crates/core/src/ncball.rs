//! NC operator unit balls D_Q = { X : ||Q(X)|| < 1 } for a linear
//! operator-valued map Q(X) = Sigma_j Q_j (x) X_j, together with sampling,
//! lower-bound estimation of sup-norms over the ball, and membership
//! certificates for the polar dual ball.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freepoly::MatrixTuple;
use crate::linalg::{derive_seed, ginibre, seeded_rng, CMatrix};

pub const BOUNDARY_RADIUS: f64 = 1.0 - 1e-6;
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum BallSpec {
    /// ||[X_1 ... X_d]|| < 1.
    RowBall { d: usize },
    /// max_j ||X_j|| < 1.
    Polydisk { d: usize },
    /// ||Sigma kron(Q_j, X_j)|| < 1 for user-supplied square Q_j.
    General { d: usize, q: Vec<CMatrix> },
}

impl BallSpec {
    pub fn row_ball(d: usize) -> Self {
        BallSpec::RowBall { d }
    }

    pub fn polydisk(d: usize) -> Self {
        BallSpec::Polydisk { d }
    }

    /// The Q_j must share a square shape and be linearly independent
    /// (rank of the stacked vectorizations equals d).
    pub fn general(q: Vec<CMatrix>) -> Result<Self> {
        let d = q.len();
        if d == 0 {
            return Err(Error::DimensionMismatch("no coefficients".into()));
        }
        let l = q[0].rows();
        for m in &q {
            if !m.is_square() || m.rows() != l {
                return Err(Error::DimensionMismatch(
                    "coefficients must share a square shape".into(),
                ));
            }
        }
        let stacked = CMatrix::from_fn(l * l, d, |i, j| q[j][(i / l, i % l)]);
        let sv = stacked.singular_values();
        let rank = sv.iter().filter(|&&s| s > 1e-12 * sv[0].max(1.0)).count();
        if rank < d {
            return Err(Error::DimensionMismatch(
                "coefficients are linearly dependent".into(),
            ));
        }
        Ok(BallSpec::General { d, q })
    }

    pub fn d(&self) -> usize {
        match self {
            BallSpec::RowBall { d } | BallSpec::Polydisk { d } | BallSpec::General { d, .. } => *d,
        }
    }
}

// JSON: {"kind": "rowball"|"polydisk"|"general", "d": d, "Q": [...]}
impl Serialize for BallSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            kind: &'a str,
            d: usize,
            #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
            q: Option<&'a Vec<CMatrix>>,
        }
        let raw = match self {
            BallSpec::RowBall { d } => Raw {
                kind: "rowball",
                d: *d,
                q: None,
            },
            BallSpec::Polydisk { d } => Raw {
                kind: "polydisk",
                d: *d,
                q: None,
            },
            BallSpec::General { d, q } => Raw {
                kind: "general",
                d: *d,
                q: Some(q),
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BallSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: String,
            d: usize,
            #[serde(rename = "Q")]
            q: Option<Vec<CMatrix>>,
        }
        let raw = Raw::deserialize(de)?;
        match raw.kind.as_str() {
            "rowball" => Ok(BallSpec::RowBall { d: raw.d }),
            "polydisk" => Ok(BallSpec::Polydisk { d: raw.d }),
            "general" => {
                let q = raw
                    .q
                    .ok_or_else(|| serde::de::Error::custom("general ball needs Q"))?;
                if q.len() != raw.d {
                    return Err(serde::de::Error::custom("Q length must equal d"));
                }
                BallSpec::general(q).map_err(serde::de::Error::custom)
            }
            other => Err(serde::de::Error::custom(format!("unknown kind `{}`", other))),
        }
    }
}

/// Q(X): block row for the row-ball, block diagonal for the polydisk,
/// Sigma kron(Q_j, X_j) in general.
pub fn q_eval(spec: &BallSpec, x: &MatrixTuple) -> Result<CMatrix> {
    if spec.d() != x.d {
        return Err(Error::DimensionMismatch(format!(
            "ball over {} letters, point has {}",
            spec.d(),
            x.d
        )));
    }
    let n = x.level;
    match spec {
        BallSpec::RowBall { d } => {
            let mut out = CMatrix::zeros(n, d * n);
            for (j, m) in x.matrices.iter().enumerate() {
                out.set_block(0, j * n, m);
            }
            Ok(out)
        }
        BallSpec::Polydisk { d } => {
            let mut out = CMatrix::zeros(d * n, d * n);
            for (j, m) in x.matrices.iter().enumerate() {
                out.set_block(j * n, j * n, m);
            }
            Ok(out)
        }
        BallSpec::General { q, .. } => {
            let l = q[0].rows();
            let mut out = CMatrix::zeros(l * n, l * n);
            for (qj, xj) in q.iter().zip(&x.matrices) {
                out = &out + &qj.kron(xj);
            }
            Ok(out)
        }
    }
}

/// ||Q(X)||.
pub fn ball_norm(spec: &BallSpec, x: &MatrixTuple) -> Result<f64> {
    Ok(q_eval(spec, x)?.opnorm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

pub fn membership(spec: &BallSpec, x: &MatrixTuple, tol: f64) -> Result<Membership> {
    let norm = ball_norm(spec, x)?;
    Ok(if norm < 1.0 - tol {
        Membership::Interior
    } else if norm <= 1.0 + tol {
        Membership::Boundary
    } else {
        Membership::Outside
    })
}

fn one_sample(spec: &BallSpec, level: usize, target: f64, seed: u64) -> MatrixTuple {
    let d = spec.d();
    let mut rng = seeded_rng(seed);
    let raw = MatrixTuple::new((0..d).map(|_| ginibre(level, &mut rng)).collect()).unwrap();
    let norm = ball_norm(spec, &raw).unwrap();
    raw.scale_re(target / norm)
}

/// `count` interior points at level n with ||Q(X)|| = s rho, s uniform in
/// (0, 1]. Deterministic in `seed`; sample i depends only on (seed, i).
pub fn sample(spec: &BallSpec, level: usize, rho: f64, count: usize, seed: u64) -> Vec<MatrixTuple> {
    assert!(rho > 0.0 && rho <= 1.0);
    (0..count)
        .map(|i| {
            let s_seed = derive_seed(seed, 0xd1ce, i as u64);
            let mut rng = seeded_rng(s_seed);
            let s = 1.0 - rand::Rng::gen::<f64>(&mut rng);
            one_sample(spec, level, s * rho * BOUNDARY_RADIUS, derive_seed(seed, 1, i as u64))
        })
        .collect()
}

/// `count` points with ||Q(X)|| = (1 - 1e-6) rho.
pub fn sample_boundary(
    spec: &BallSpec,
    level: usize,
    rho: f64,
    count: usize,
    seed: u64,
) -> Vec<MatrixTuple> {
    assert!(rho > 0.0 && rho <= 1.0);
    (0..count)
        .map(|i| one_sample(spec, level, rho * BOUNDARY_RADIUS, derive_seed(seed, 2, i as u64)))
        .collect()
}

/// Search budget for norm estimation; suprema concentrate near the
/// boundary, so 70% of samples sit at radius 1 - 1e-6.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Budget {
    pub levels: Vec<usize>,
    pub samples_per_level: usize,
    pub hill_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            levels: vec![1, 2, 3, 4],
            samples_per_level: 60,
            hill_steps: 80,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    /// A lower bound on sup over the ball; never an upper bound.
    pub lower_bound: f64,
    pub witness: MatrixTuple,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

/// Lower-bound sup_{X in D_Q} ||f(X)|| by boundary-biased sampling plus
/// random local hill-climbing projected back into the ball. Points where
/// f is not evaluable are skipped and counted.
pub fn norm_over_ball<F>(
    f: &F,
    spec: &BallSpec,
    budget: &Budget,
    seed: u64,
) -> Result<NormEstimate>
where
    F: Fn(&MatrixTuple) -> Result<CMatrix> + Sync,
{
    let tasks: Vec<(usize, usize)> = budget
        .levels
        .iter()
        .flat_map(|&lvl| (0..budget.samples_per_level).map(move |i| (lvl, i)))
        .collect();
    let evals: Vec<Option<(f64, MatrixTuple)>> = tasks
        .par_iter()
        .map(|&(lvl, i)| {
            let s = derive_seed(seed, lvl as u64, i as u64);
            let x = if i % 10 < 7 {
                sample_boundary(spec, lvl, 1.0, 1, s).pop().unwrap()
            } else {
                sample(spec, lvl, 1.0, 1, s).pop().unwrap()
            };
            f(&x).ok().map(|v| (v.opnorm(), x))
        })
        .collect();

    let mut used = 0;
    let mut skipped = 0;
    // keep the best sample at each level; suprema may only be attainable
    // at a particular level, so each one gets its own refinement run
    let mut per_level: std::collections::BTreeMap<usize, (f64, MatrixTuple)> =
        std::collections::BTreeMap::new();
    for ((lvl, _), e) in tasks.iter().zip(evals) {
        match e {
            Some((norm, x)) => {
                used += 1;
                let slot = per_level.entry(*lvl);
                match slot {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert((norm, x));
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        if norm > o.get().0 {
                            o.insert((norm, x));
                        }
                    }
                }
            }
            None => skipped += 1,
        }
    }
    if per_level.is_empty() {
        return Err(Error::AllSamplesOutOfDomain);
    }

    let refined: Vec<(f64, MatrixTuple)> = per_level
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(lvl, (norm, x))| {
            hill_climb(f, spec, norm, x, budget.hill_steps, derive_seed(seed, 0x411c, lvl as u64))
        })
        .collect();
    let (best_norm, witness) = refined
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();

    Ok(NormEstimate {
        lower_bound: best_norm,
        witness,
        samples_used: used,
        samples_skipped: skipped,
    })
}

/// Greedy local search: at each step try a few perturbations of shrinking
/// size, renormalized into the ball, and keep any improvement.
fn hill_climb<F>(
    f: &F,
    spec: &BallSpec,
    mut best_norm: f64,
    mut witness: MatrixTuple,
    steps: usize,
    seed: u64,
) -> (f64, MatrixTuple)
where
    F: Fn(&MatrixTuple) -> Result<CMatrix> + Sync,
{
    for k in 0..steps {
        let eps = 0.4 * 0.93_f64.powi(k as i32);
        for t in 0..4u64 {
            let mut rng = seeded_rng(derive_seed(seed, k as u64, t));
            let mut cand = MatrixTuple::new(
                witness
                    .matrices
                    .iter()
                    .map(|w| {
                        let noise = ginibre(witness.level, &mut rng);
                        w + &noise.scale_re(eps)
                    })
                    .collect(),
            )
            .unwrap();
            let norm = match ball_norm(spec, &cand) {
                Ok(n) => n,
                Err(_) => continue,
            };
            if norm > BOUNDARY_RADIUS {
                cand = cand.scale_re(BOUNDARY_RADIUS / norm);
            }
            if let Ok(v) = f(&cand) {
                let n = v.opnorm();
                if n > best_norm {
                    best_norm = n;
                    witness = cand;
                }
            }
        }
    }
    (best_norm, witness)
}

#[derive(Clone, Debug, Serialize)]
pub enum DualVerdict {
    /// Exact sufficient certificate via a rank-one factorization.
    CertifiedInside,
    /// All sampled pairings stayed at or below 1; carries the max seen.
    SampledInside(f64),
    /// A sampled interior point where the pairing norm exceeds 1.
    OutsideWitness { witness: MatrixTuple, norm: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualMethod {
    RankOne,
    Sampling,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualCertificate {
    pub verdict: DualVerdict,
    pub method: DualMethod,
}

/// Rank-one split b = u v^t with the second singular value below tol,
/// scaled so each factor carries sqrt(sigma).
fn rank_one_split(b: &CMatrix) -> Option<(CMatrix, CMatrix)> {
    let l = b.rows();
    if b.max_abs() == 0.0 {
        return Some((CMatrix::zeros(l, 1), CMatrix::zeros(l, 1)));
    }
    let sv = b.singular_values();
    if sv.len() > 1 && sv[1] > 1e-10 * sv[0] {
        return None;
    }
    // power iteration against b b^* for the top left singular vector
    let g = &(b * &b.adjoint());
    let mut u = CMatrix::from_fn(l, 1, |i, _| C64::new(1.0 + 0.37 * i as f64, 0.11 * i as f64));
    u = u.scale_re(1.0 / u.frobenius());
    for _ in 0..200 {
        u = g * &u;
        let norm = u.frobenius();
        if norm == 0.0 {
            return None;
        }
        u = u.scale_re(1.0 / norm);
    }
    // b = u (u^* b), so v^t = u^* b; rebalance the sqrt(sigma) factors
    let vt = &u.adjoint() * b;
    let sigma = vt.frobenius();
    let v = vt.adjoint();
    let u = u.scale_re(sigma.sqrt());
    let v = v.scale_re(1.0 / sigma.sqrt());
    Some((u, v))
}

/// Decide whether b lies in the closed polar dual of the ball. For the
/// polydisk with all rank-one coefficients b_j = u_j v_j^t, the bound
/// ||Sigma b_j (x) X_j|| <= ||[u_1 .. u_d]|| ||[v_1 .. v_d]|| is an exact
/// sufficient certificate; otherwise boundary sampling decides.
pub fn dual_membership(
    spec: &BallSpec,
    b: &MatrixTuple,
    budget: &Budget,
    seed: u64,
) -> Result<DualCertificate> {
    if spec.d() != b.d {
        return Err(Error::DimensionMismatch("dual tuple has wrong d".into()));
    }
    if let BallSpec::Polydisk { d } = spec {
        let splits: Option<Vec<(CMatrix, CMatrix)>> =
            b.matrices.iter().map(rank_one_split).collect();
        if let Some(splits) = splits {
            let l = b.level;
            let u = CMatrix::from_fn(l, *d, |i, j| splits[j].0[(i, 0)]);
            let v = CMatrix::from_fn(l, *d, |i, j| splits[j].1[(i, 0)]);
            if u.opnorm() * v.opnorm() <= 1.0 + 1e-10 {
                return Ok(DualCertificate {
                    verdict: DualVerdict::CertifiedInside,
                    method: DualMethod::RankOne,
                });
            }
            // the product bound is only sufficient; fall through to sampling
        }
    }

    let pairing = BallSpec::General {
        d: b.d,
        q: b.matrices.clone(),
    };
    let mut max_seen = 0.0_f64;
    for &lvl in &budget.levels {
        for (i, x) in sample_boundary(spec, lvl, 1.0, budget.samples_per_level, derive_seed(seed, 5, lvl as u64))
            .into_iter()
            .enumerate()
        {
            let norm = ball_norm(&pairing, &x)?;
            if norm > 1.0 + MEMBERSHIP_TOL {
                return Ok(DualCertificate {
                    verdict: DualVerdict::OutsideWitness { witness: x, norm },
                    method: DualMethod::Sampling,
                });
            }
            max_seen = max_seen.max(norm);
            let _ = i;
        }
    }
    Ok(DualCertificate {
        verdict: DualVerdict::SampledInside(max_seen),
        method: DualMethod::Sampling,
    })
}
