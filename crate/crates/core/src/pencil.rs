//! Monic linear pencils L_A(X) = I - Sigma_j kron(A_j, X_j): evaluation,
//! Neumann inversion with a truncation bound, invertibility-radius search
//! over a ball, the row-ball joint spectral radius, Burnside irreducibility,
//! and a heuristic similarity search into the closed dual ball.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freepoly::{MatrixTuple, Word};
use crate::linalg::{derive_seed, ginibre, seeded_rng, CMatrix};
use crate::ncball::{
    dual_membership, sample_boundary, BallSpec, Budget, DualCertificate, DualVerdict,
};

/// Pencil coefficients; serialized as the tuple JSON plus a marker field.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub a: MatrixTuple,
}

impl Serialize for Pencil {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            pencil: bool,
            d: usize,
            level: usize,
            matrices: &'a Vec<CMatrix>,
        }
        Raw {
            pencil: true,
            d: self.a.d,
            level: self.a.level,
            matrices: &self.a.matrices,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pencil {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            pencil: bool,
            matrices: Vec<CMatrix>,
        }
        let raw = Raw::deserialize(de)?;
        if !raw.pencil {
            return Err(serde::de::Error::custom("missing \"pencil\": true marker"));
        }
        let a = MatrixTuple::new(raw.matrices).map_err(serde::de::Error::custom)?;
        Ok(Pencil { a })
    }
}

/// Sigma_j kron(A_j, x_j), the linear part of the pencil.
pub fn pencil_linear_part(a: &MatrixTuple, x: &MatrixTuple) -> Result<CMatrix> {
    if a.d != x.d {
        return Err(Error::DimensionMismatch(format!(
            "pencil over {} letters, point has {}",
            a.d, x.d
        )));
    }
    let mn = a.level * x.level;
    let mut acc = CMatrix::zeros(mn, mn);
    for (aj, xj) in a.matrices.iter().zip(&x.matrices) {
        acc = &acc + &aj.kron(xj);
    }
    Ok(acc)
}

/// I - Sigma_j kron(A_j, x_j).
pub fn pencil_eval(a: &MatrixTuple, x: &MatrixTuple) -> Result<CMatrix> {
    let lin = pencil_linear_part(a, x)?;
    Ok(&CMatrix::identity(lin.rows()) - &lin)
}

pub fn pencil_inv(a: &MatrixTuple, x: &MatrixTuple) -> Result<CMatrix> {
    pencil_eval(a, x)?.inverse()
}

#[derive(Clone, Debug)]
pub struct NeumannInverse {
    pub value: CMatrix,
    /// q^{N+1}/(1-q) where q = ||Sigma kron(A_j, x_j)|| and N terms summed.
    pub truncation_bound: f64,
    pub terms_used: usize,
    pub contraction_norm: f64,
}

/// Truncated Neumann series for the pencil inverse. Requires the linear
/// part to be a strict contraction; stops early once a power underflows
/// `tol` in norm.
pub fn neumann_inv(
    a: &MatrixTuple,
    x: &MatrixTuple,
    max_terms: usize,
    tol: f64,
) -> Result<NeumannInverse> {
    let m = pencil_linear_part(a, x)?;
    let q = m.opnorm();
    if q >= 1.0 {
        return Err(Error::NotContractive(q));
    }
    let n = m.rows();
    let mut acc = CMatrix::identity(n);
    let mut power = CMatrix::identity(n);
    let mut used = 0;
    for _ in 0..max_terms {
        power = &power * &m;
        used += 1;
        if power.max_abs() == 0.0 {
            // nilpotent linear part: the series is exact from here on
            return Ok(NeumannInverse {
                value: acc,
                truncation_bound: 0.0,
                terms_used: used,
                contraction_norm: q,
            });
        }
        acc = &acc + &power;
        if power.opnorm() < tol {
            break;
        }
    }
    let bound = q.powi(used as i32 + 1) / (1.0 - q);
    debug_assert!(acc.opnorm() <= 1.0 / (1.0 - q) + tol);
    Ok(NeumannInverse {
        value: acc,
        truncation_bound: bound,
        terms_used: used,
        contraction_norm: q,
    })
}

/// Joint spectral radius over the row-ball: the square root of the
/// spectral radius of the m^2-by-m^2 matrix of S -> Sigma T_j S T_j^*.
pub fn jsr_rowball(t: &MatrixTuple) -> f64 {
    let m = t.level;
    let mut cp = CMatrix::zeros(m * m, m * m);
    for tj in &t.matrices {
        let conj = tj.adjoint().transpose();
        cp = &cp + &tj.kron(&conj);
    }
    cp.spec_radius().max(0.0).sqrt()
}

/// Truncation of the limit formula || Sigma_{|w|=n} T^w (T^w)^* ||^{1/2n},
/// computed by n applications of the completely positive map.
pub fn jsr_rowball_truncated(t: &MatrixTuple, n: usize) -> f64 {
    let m = t.level;
    let mut acc = CMatrix::identity(m);
    for _ in 0..n {
        let mut next = CMatrix::zeros(m, m);
        for tj in &t.matrices {
            next = &next + &(&(tj * &acc) * &tj.adjoint());
        }
        acc = next;
    }
    acc.opnorm().powf(1.0 / (2.0 * n as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusScan {
    /// Smallest dilation radius at which a singular point of the pencil
    /// was found; certifies that the dual spectral radius is >= 1/r.
    pub r_witness: Option<f64>,
    /// Largest radius scanned with no witness (evidence, not a proof).
    pub r_clean: f64,
    /// (radius, point) pairs at which the pencil is singular.
    pub witnesses: Vec<(f64, MatrixTuple)>,
}

/// Scan r D_Q for singular points of L_A, r in (0, r_max]. Along each
/// sampled boundary direction X the pencil is I - t M(X) with
/// M = Sigma kron(A_j, X_j), so singularities on the ray sit exactly at
/// t = 1/|lambda| after rotating the direction by the eigenvalue phase.
pub fn invertibility_radius(
    a: &MatrixTuple,
    spec: &BallSpec,
    budget: &Budget,
    r_max: f64,
    seed: u64,
) -> Result<RadiusScan> {
    let mut hits: Vec<(f64, MatrixTuple)> = Vec::new();
    for &lvl in &budget.levels {
        let dirs = sample_boundary(spec, lvl, 1.0, budget.samples_per_level, derive_seed(seed, 7, lvl as u64));
        let level_hits: Vec<(f64, MatrixTuple)> = dirs
            .par_iter()
            .map(|x| -> Result<Option<(f64, MatrixTuple)>> {
                let m = pencil_linear_part(a, x)?;
                let best = m
                    .eigenvalues()
                    .into_iter()
                    .max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap());
                Ok(best.and_then(|lambda| {
                    let rho = lambda.norm();
                    if rho <= 1.0 / r_max {
                        return None;
                    }
                    let radius = 1.0 / rho;
                    // I - (1/lambda) M is singular by construction
                    let witness = MatrixTuple::new(
                        x.matrices
                            .iter()
                            .map(|mj| mj.scale(lambda.inv()))
                            .collect(),
                    )
                    .unwrap();
                    Some((radius, witness))
                }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        hits.extend(level_hits);
    }
    hits.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    hits.truncate(8);
    let r_witness = hits.first().map(|(r, _)| *r);
    let r_clean = match r_witness {
        Some(r) => r * (1.0 - 1e-9),
        None => r_max,
    };
    Ok(RadiusScan {
        r_witness,
        r_clean,
        witnesses: hits,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    pub algebra_dim: usize,
    /// Words whose evaluations span the generated algebra (empty word = I).
    pub witness_words: Vec<Word>,
}

/// Burnside test: close span{I} under left multiplication by the A_j until
/// the dimension stabilizes; the tuple is irreducible iff the unital
/// algebra it generates is all of M_m.
pub fn irreducible(a: &MatrixTuple) -> Irreducibility {
    let m = a.level;
    let tol = 1e-10;
    // orthonormal basis of the span, kept alongside the generating words
    let mut basis: Vec<(Word, CMatrix)> = Vec::new();
    let mut words: Vec<Word> = Vec::new();

    let try_add = |basis: &mut Vec<(Word, CMatrix)>, words: &mut Vec<Word>, w: Word, cand: CMatrix| -> bool {
        let mut v = cand;
        let scale = v.frobenius();
        if scale == 0.0 {
            return false;
        }
        for (_, b) in basis.iter() {
            // Frobenius projection <v, b> b
            let mut inner = C64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    inner += v[(i, j)] * b[(i, j)].conj();
                }
            }
            v = &v - &b.scale(inner);
        }
        let res = v.frobenius();
        if res > tol * scale.max(1.0) {
            basis.push((w.clone(), v.scale_re(1.0 / res)));
            words.push(w);
            true
        } else {
            false
        }
    };

    try_add(&mut basis, &mut words, Word::empty(), CMatrix::identity(m));
    let mut frontier = vec![0usize];
    while !frontier.is_empty() && basis.len() < m * m {
        let mut next = Vec::new();
        for idx in frontier {
            let (w, _) = basis[idx].clone();
            for j in 1..=a.d as u8 {
                // multiply the original word evaluation, not the
                // orthonormalized representative, to keep words faithful
                let jw = Word::letter(j).concat(&w);
                let cand = a.word_eval(&jw);
                if try_add(&mut basis, &mut words, jw, cand) {
                    next.push(basis.len() - 1);
                }
            }
        }
        frontier = next;
    }
    let dim = basis.len();
    Irreducibility {
        irreducible: dim == m * m,
        algebra_dim: dim,
        witness_words: words,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Similarity {
    pub s: CMatrix,
    pub b: MatrixTuple,
    pub kappa: f64,
    pub certificate: DualCertificate,
}

fn dual_ok(cert: &DualCertificate) -> bool {
    match &cert.verdict {
        DualVerdict::CertifiedInside => true,
        DualVerdict::SampledInside(max) => *max <= 1.0 + 1e-6,
        DualVerdict::OutsideWitness { .. } => false,
    }
}

/// Sampled proxy for the dual norm of S^{-1} A S, used as the refinement
/// objective: max pairing norm over a fixed boundary sample set.
fn dual_objective(
    b: &MatrixTuple,
    samples: &[MatrixTuple],
) -> Result<f64> {
    let pairing = BallSpec::General {
        d: b.d,
        q: b.matrices.clone(),
    };
    let mut worst = 0.0_f64;
    for x in samples {
        worst = worst.max(crate::ncball::ball_norm(&pairing, x)?);
    }
    Ok(worst)
}

/// Search for S with S^{-1} A S in the closed dual ball. Stage 0 accepts
/// A as-is when it already certifies. Stage 1 takes S to be the
/// eigenvector matrix of A_1 + ... + A_d. Stage 2 refines S by random
/// perturbations minimizing the sampled pairing norm. Returns NotFound
/// rather than a fabricated certificate when the budget runs out.
pub fn similarity_to_dual_ball(
    a: &MatrixTuple,
    spec: &BallSpec,
    budget: &Budget,
    seed: u64,
) -> Result<Similarity> {
    let m = a.level;
    let finish = |s: CMatrix| -> Result<Option<Similarity>> {
        let b = a.conjugate(&s)?;
        let cert = dual_membership(spec, &b, budget, derive_seed(seed, 11, 0))?;
        if dual_ok(&cert) {
            let kappa = s.cond2()?;
            Ok(Some(Similarity {
                s,
                b,
                kappa,
                certificate: cert,
            }))
        } else {
            Ok(None)
        }
    };

    if let Some(found) = finish(CMatrix::identity(m))? {
        return Ok(found);
    }

    let coeff_sum = a
        .matrices
        .iter()
        .fold(CMatrix::zeros(m, m), |acc, aj| &acc + aj);
    let mut s = match coeff_sum.eigen_pairs() {
        Ok((_, vecs)) => vecs,
        Err(_) => CMatrix::identity(m),
    };
    if s.cond2().is_err() {
        // defective eigenvector matrix; fall back to the identity
        s = CMatrix::identity(m);
    }
    if let Some(found) = finish(s.clone())? {
        return Ok(found);
    }

    // stage 2: random descent on the sampled pairing norm
    let mut samples = Vec::new();
    for &lvl in &budget.levels {
        samples.extend(sample_boundary(spec, lvl, 1.0, budget.samples_per_level.min(20), derive_seed(seed, 13, lvl as u64)));
    }
    let mut best = dual_objective(&a.conjugate(&s)?, &samples)?;
    for k in 0..budget.hill_steps {
        let eps = 0.2 * 0.95_f64.powi(k as i32);
        for t in 0..4u64 {
            let mut rng = seeded_rng(derive_seed(seed, 17 + k as u64, t));
            let cand = &s + &ginibre(m, &mut rng).scale_re(eps);
            if cand.cond2().is_err() {
                continue;
            }
            let obj = match a.conjugate(&cand) {
                Ok(b) => dual_objective(&b, &samples)?,
                Err(_) => continue,
            };
            if obj < best {
                best = obj;
                s = cand;
            }
        }
        if best <= 1.0 - 1e-9 {
            break;
        }
    }
    if let Some(found) = finish(s)? {
        return Ok(found);
    }
    Err(Error::NotFound)
}
