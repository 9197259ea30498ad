//! State-space realizations of rational expressions. A descriptor triple
//! (A, b, c) represents r(X) = (b* kron I) L_A(X)^{-1} (c kron I); synthesis
//! composes descriptors structurally over the expression tree without any
//! minimization, so dimensions grow with the tree. Matrices of rationals
//! assemble into one block descriptor, and inverses of monic polynomials
//! carry Fornasini-Marchesini data P^{-1} = D + C* L_A^{-1} B(Z).

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freepoly::{MatPoly, MatrixTuple};
use crate::linalg::{derive_seed, CMatrix};
use crate::linearize::Linearization;
use crate::ncball::{self, BallSpec, Budget};
use crate::pencil;
use crate::ratexpr::{self, RatExpr};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Descriptor {
    pub a: MatrixTuple,
    /// n x 1.
    pub b: CMatrix,
    /// n x 1.
    pub c: CMatrix,
}

impl Descriptor {
    pub fn dim(&self) -> usize {
        self.a.level
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDescriptor {
    /// Block-diagonal over the k^2 per-entry realizations.
    pub a: MatrixTuple,
    /// N x k.
    pub b: CMatrix,
    /// N x k.
    pub c: CMatrix,
    pub k: usize,
}

fn map_singular(e: Error) -> Error {
    match e {
        Error::Singular { smallest_sv, .. } => Error::OutOfPencilDomain { smallest_sv },
        other => other,
    }
}

/// (b* kron I) L_A(x)^{-1} (c kron I).
pub fn eval_descriptor(r: &Descriptor, x: &MatrixTuple) -> Result<CMatrix> {
    let inv = pencil::pencil_inv(&r.a, x).map_err(map_singular)?;
    let eye = CMatrix::identity(x.level);
    Ok(&(&r.b.adjoint().kron(&eye) * &inv) * &r.c.kron(&eye))
}

pub fn eval_block(r: &BlockDescriptor, x: &MatrixTuple) -> Result<CMatrix> {
    let inv = pencil::pencil_inv(&r.a, x).map_err(map_singular)?;
    let eye = CMatrix::identity(x.level);
    Ok(&(&r.b.adjoint().kron(&eye) * &inv) * &r.c.kron(&eye))
}

fn tuple_with_letter(d: usize, n: usize, letter: usize, m: CMatrix) -> MatrixTuple {
    let mut mats = vec![CMatrix::zeros(n, n); d];
    mats[letter] = m;
    MatrixTuple::new(mats).unwrap()
}

fn direct_sum_tuple(a1: &MatrixTuple, a2: &MatrixTuple) -> MatrixTuple {
    a1.direct_sum(a2).unwrap()
}

fn stack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(top.rows() + bottom.rows(), top.cols());
    out.set_block(0, 0, top);
    out.set_block(top.rows(), 0, bottom);
    out
}

/// Recursive descriptor synthesis. Constants and variables get explicit
/// small realizations; sums direct-sum, products couple through a constant
/// bridge c1 b2*, and inverses border the pencil with the output row. No
/// minimization is performed.
pub fn synth(e: &RatExpr, d: usize) -> Result<Descriptor> {
    match e {
        RatExpr::Const(z) => Ok(Descriptor {
            a: MatrixTuple::zeros(d, 1),
            b: CMatrix::scalar(C64::new(1.0, 0.0)),
            c: CMatrix::scalar(*z),
        }),
        RatExpr::Var(j) => {
            if *j == 0 || *j as usize > d {
                return Err(Error::UnknownVariable(format!("Z{}", j)));
            }
            let mut e12 = CMatrix::zeros(2, 2);
            e12[(0, 1)] = C64::new(1.0, 0.0);
            let b = CMatrix::from_fn(2, 1, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
            let c = CMatrix::from_fn(2, 1, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
            Ok(Descriptor {
                a: tuple_with_letter(d, 2, *j as usize - 1, e12),
                b,
                c,
            })
        }
        RatExpr::Scale(z, inner) => {
            let r = synth(inner, d)?;
            Ok(Descriptor {
                c: r.c.scale(*z),
                ..r
            })
        }
        RatExpr::Neg(inner) => synth(&RatExpr::Scale(C64::new(-1.0, 0.0), inner.clone()), d),
        RatExpr::Add(l, r) => {
            let r1 = synth(l, d)?;
            let r2 = synth(r, d)?;
            Ok(Descriptor {
                a: direct_sum_tuple(&r1.a, &r2.a),
                b: stack(&r1.b, &r2.b),
                c: stack(&r1.c, &r2.c),
            })
        }
        RatExpr::Sub(l, r) => synth(&(**l).clone().add(RatExpr::Neg(r.clone())), d),
        RatExpr::Mul(l, r) => {
            let r1 = synth(l, d)?;
            let r2 = synth(r, d)?;
            let (n1, n2) = (r1.dim(), r2.dim());
            let bridge = &r1.c * &r2.b.adjoint();
            let mats = (0..d)
                .map(|j| {
                    let mut big = CMatrix::zeros(n1 + n2, n1 + n2);
                    big.set_block(0, 0, &r1.a.matrices[j]);
                    big.set_block(n1, n1, &r2.a.matrices[j]);
                    big.set_block(0, n1, &(&bridge * &r2.a.matrices[j]));
                    big
                })
                .collect();
            let scalar = (&r2.b.adjoint() * &r2.c)[(0, 0)];
            Ok(Descriptor {
                a: MatrixTuple::new(mats).unwrap(),
                b: stack(&r1.b, &CMatrix::zeros(n2, 1)),
                c: stack(&r1.c.scale(scalar), &r2.c),
            })
        }
        RatExpr::Inv(inner) => {
            let r = synth(inner, d)?;
            let n = r.dim();
            let gamma = (&r.b.adjoint() * &r.c)[(0, 0)];
            if gamma.norm() < 1e-10 {
                return Err(Error::DegenerateExpression(
                    "inverse of an expression vanishing at the origin".into(),
                ));
            }
            // bordered pencil [L_A(Z), c; b*, 0], renormalized to be monic
            let mut n0 = CMatrix::identity(n + 1);
            n0[(n, n)] = C64::new(0.0, 0.0);
            n0.set_block(0, n, &r.c);
            n0.set_block(n, 0, &r.b.adjoint());
            let n0_inv = n0.inverse()?;
            let mats = (0..d)
                .map(|j| {
                    let mut big = CMatrix::zeros(n + 1, n + 1);
                    big.set_block(0, 0, &r.a.matrices[j]);
                    &n0_inv * &big
                })
                .collect();
            let e_last =
                CMatrix::from_fn(n + 1, 1, |i, _| C64::new(if i == n { 1.0 } else { 0.0 }, 0.0));
            Ok(Descriptor {
                a: MatrixTuple::new(mats).unwrap(),
                b: e_last.clone(),
                c: (&n0_inv * &e_last).scale_re(-1.0),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub max_err: f64,
    pub common_points: usize,
    /// Expression evaluable but descriptor pencil singular.
    pub expr_only: usize,
    /// Descriptor evaluable outside the expression domain; descriptor
    /// domains may be strictly larger, so these are logged, not errors.
    pub descriptor_only: usize,
}

/// Compare descriptor evaluation against AST evaluation over sampled ball
/// points.
pub fn coherence_check(
    e: &RatExpr,
    r: &Descriptor,
    spec: &BallSpec,
    points: usize,
    seed: u64,
) -> Result<CoherenceReport> {
    let results: Vec<(Option<f64>, bool, bool)> = (0..points)
        .into_par_iter()
        .map(|i| {
            let lvl = 1 + i % 3;
            let x = ncball::sample(spec, lvl, 1.0, 1, derive_seed(seed, 0xc0e, i as u64))
                .pop()
                .unwrap();
            let ev = ratexpr::eval_expr(e, &x);
            let dv = eval_descriptor(r, &x);
            match (ev, dv) {
                (Ok(a), Ok(b)) => (Some(a.max_abs_diff(&b)), false, false),
                (Ok(_), Err(_)) => (None, true, false),
                (Err(_), Ok(_)) => (None, false, true),
                (Err(_), Err(_)) => (None, false, false),
            }
        })
        .collect();
    let mut report = CoherenceReport {
        max_err: 0.0,
        common_points: 0,
        expr_only: 0,
        descriptor_only: 0,
    };
    for (err, expr_only, descriptor_only) in results {
        if let Some(e) = err {
            report.common_points += 1;
            report.max_err = report.max_err.max(e);
        }
        report.expr_only += expr_only as usize;
        report.descriptor_only += descriptor_only as usize;
    }
    if report.common_points == 0 {
        return Err(Error::Degenerate);
    }
    Ok(report)
}

/// Synthesize and verify against the AST on 100 sampled points.
pub fn synth_verified(e: &RatExpr, d: usize, seed: u64) -> Result<(Descriptor, CoherenceReport)> {
    let r = synth(e, d)?;
    let spec = BallSpec::Polydisk { d };
    let report = coherence_check(e, &r, &spec, 100, seed)?;
    if report.max_err > 1e-8 {
        return Err(Error::IdentityViolation {
            residual: report.max_err,
        });
    }
    Ok((r, report))
}

/// Stack a row-major k x k grid of descriptors into one block descriptor:
/// A is block diagonal over the entries, entry (l, m)'s b sits in column l
/// of B and its c in column m of C, so cross terms vanish.
pub fn assemble(entries: &[Descriptor], k: usize) -> Result<BlockDescriptor> {
    if entries.len() != k * k {
        return Err(Error::DimensionMismatch(format!(
            "{} descriptors for a {}x{} grid",
            entries.len(),
            k,
            k
        )));
    }
    let d = entries[0].a.d;
    if entries.iter().any(|e| e.a.d != d) {
        return Err(Error::DimensionMismatch(
            "descriptors over different letter counts".into(),
        ));
    }
    let n_total: usize = entries.iter().map(|e| e.dim()).sum();
    let mut a_mats = vec![CMatrix::zeros(n_total, n_total); d];
    let mut b = CMatrix::zeros(n_total, k);
    let mut c = CMatrix::zeros(n_total, k);
    let mut row = 0;
    for lam in 0..k {
        for mu in 0..k {
            let e = &entries[lam * k + mu];
            for j in 0..d {
                a_mats[j].set_block(row, row, &e.a.matrices[j]);
            }
            for i in 0..e.dim() {
                b[(row + i, lam)] = e.b[(i, 0)];
                c[(row + i, mu)] = e.c[(i, 0)];
            }
            row += e.dim();
        }
    }
    Ok(BlockDescriptor {
        a: MatrixTuple::new(a_mats)?,
        b,
        c,
        k,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub max_identity_residual: f64,
    pub max_gamma_inv_residual: f64,
    pub points_used: usize,
    pub points_skipped: usize,
    pub pencil_bound_checked: bool,
    pub max_pencil_inv_norm: f64,
}

/// Verify the bordered factorization alpha = beta diag(I, I, r) gamma at
/// sampled points of s D_Q, with
///   alpha = [I 0 I; c L_A 0; 0 b* 0],
///   beta  = [I 0 0; c L_A 0; 0 b* I],
///   gamma = [I 0 I; 0 I -L_A^{-1} c; 0 0 I],
/// and check gamma's closed-form inverse. `value` supplies r(x); pass the
/// block evaluation for a self-check or an independent evaluator to catch
/// corrupted realizations. `pencil_bound = (kappa, rho)` additionally
/// asserts ||L_A(x)^{-1}|| <= kappa / (1 - rho) on unit-ball samples.
pub fn factorization_check<F>(
    r: &BlockDescriptor,
    value: &F,
    spec: &BallSpec,
    s: f64,
    trials: usize,
    seed: u64,
    pencil_bound: Option<(f64, f64)>,
) -> Result<FactorizationReport>
where
    F: Fn(&MatrixTuple) -> Result<CMatrix> + Sync,
{
    let outcomes: Vec<Result<Option<(f64, f64, f64)>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let lvl = 1 + i % 3;
            let base = ncball::sample(spec, lvl, 1.0, 1, derive_seed(seed, 0xfac, i as u64))
                .pop()
                .unwrap();
            let x = base.scale_re(s);
            let m = x.level;
            let eye = CMatrix::identity(r.k * m);
            let l = pencil::pencil_eval(&r.a, &x)?;
            let l_inv = match l.inverse() {
                Ok(v) => v,
                Err(_) => return Ok(None),
            };
            let rv = match value(&x) {
                Ok(v) => v,
                Err(_) => return Ok(None),
            };
            let c_big = r.c.kron(&CMatrix::identity(m));
            let b_star = r.b.adjoint().kron(&CMatrix::identity(m));
            let nn = l.rows();
            let kk = r.k * m;
            let e = kk + nn + kk;
            let mut alpha = CMatrix::zeros(e, e);
            alpha.set_block(0, 0, &eye);
            alpha.set_block(0, kk + nn, &eye);
            alpha.set_block(kk, 0, &c_big);
            alpha.set_block(kk, kk, &l);
            alpha.set_block(kk + nn, kk, &b_star);
            let mut beta = CMatrix::zeros(e, e);
            beta.set_block(0, 0, &eye);
            beta.set_block(kk, 0, &c_big);
            beta.set_block(kk, kk, &l);
            beta.set_block(kk + nn, kk, &b_star);
            beta.set_block(kk + nn, kk + nn, &eye);
            let linv_c = &l_inv * &c_big;
            let mut gamma = CMatrix::identity(e);
            gamma.set_block(0, kk + nn, &eye);
            gamma.set_block(kk, kk + nn, &linv_c.scale_re(-1.0));
            let mut mid = CMatrix::identity(e);
            mid.set_block(kk + nn, kk + nn, &rv);
            let resid = alpha.max_abs_diff(&(&(&beta * &mid) * &gamma));
            let mut gamma_inv = CMatrix::identity(e);
            gamma_inv.set_block(0, kk + nn, &eye.scale_re(-1.0));
            gamma_inv.set_block(kk, kk + nn, &linv_c);
            let gresid = (&gamma * &gamma_inv).max_abs_diff(&CMatrix::identity(e));

            let mut pnorm = 0.0;
            if pencil_bound.is_some() {
                if let Ok(inv_unit) = pencil::pencil_inv(&r.a, &base) {
                    pnorm = inv_unit.opnorm();
                }
            }
            Ok(Some((resid, gresid, pnorm)))
        })
        .collect();

    let mut report = FactorizationReport {
        max_identity_residual: 0.0,
        max_gamma_inv_residual: 0.0,
        points_used: 0,
        points_skipped: 0,
        pencil_bound_checked: pencil_bound.is_some(),
        max_pencil_inv_norm: 0.0,
    };
    for o in outcomes {
        match o? {
            Some((resid, gresid, pnorm)) => {
                report.points_used += 1;
                report.max_identity_residual = report.max_identity_residual.max(resid);
                report.max_gamma_inv_residual = report.max_gamma_inv_residual.max(gresid);
                report.max_pencil_inv_norm = report.max_pencil_inv_norm.max(pnorm);
            }
            None => report.points_skipped += 1,
        }
    }
    if report.points_used == 0 {
        return Err(Error::AllSamplesOutOfDomain);
    }
    if report.max_identity_residual > 1e-8 || report.max_gamma_inv_residual > 1e-8 {
        return Err(Error::IdentityViolation {
            residual: report.max_identity_residual.max(report.max_gamma_inv_residual),
        });
    }
    if let Some((kappa, rho)) = pencil_bound {
        let bound = kappa / (1.0 - rho);
        if report.max_pencil_inv_norm > bound + 1e-8 {
            return Err(Error::IdentityViolation {
                residual: report.max_pencil_inv_norm - bound,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FMRealization {
    pub a: MatrixTuple,
    /// Column maps: B(Z) = Sigma B_j Z_j, each n x k.
    pub b: Vec<CMatrix>,
    /// n x k.
    pub c: CMatrix,
    /// k x k.
    pub d: CMatrix,
}

impl FMRealization {
    pub fn k(&self) -> usize {
        self.c.cols()
    }

    /// B(x) = Sigma kron(B_j, x_j).
    pub fn b_at(&self, x: &MatrixTuple) -> CMatrix {
        let m = x.level;
        let mut acc = CMatrix::zeros(self.a.level * m, self.k() * m);
        for (bj, xj) in self.b.iter().zip(&x.matrices) {
            acc = &acc + &bj.kron(xj);
        }
        acc
    }
}

/// D kron I + (C* kron I) L_A(x)^{-1} B(x), the realized value of P(x)^{-1}.
pub fn fm_eval_inverse(fm: &FMRealization, x: &MatrixTuple) -> Result<CMatrix> {
    let inv = pencil::pencil_inv(&fm.a, x).map_err(map_singular)?;
    let eye = CMatrix::identity(x.level);
    let head = fm.d.kron(&eye);
    Ok(&head + &(&(&fm.c.adjoint().kron(&eye) * &inv) * &fm.b_at(x)))
}

#[derive(Clone, Debug, Serialize)]
pub struct FmCheckReport {
    pub max_residual: f64,
    pub points_used: usize,
    pub points_skipped: usize,
}

/// Verify P(x)^{-1} = D + C* L_A(x)^{-1} B(x) at sampled ball points.
pub fn fm_check(
    p: &MatPoly,
    fm: &FMRealization,
    spec: &BallSpec,
    trials: usize,
    seed: u64,
) -> Result<FmCheckReport> {
    let outcomes: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let lvl = 1 + i % 3;
            let x = ncball::sample(spec, lvl, 1.0, 1, derive_seed(seed, 0xf31, i as u64))
                .pop()
                .unwrap();
            let pv = p.eval(&x).ok()?;
            let p_inv = pv.inverse().ok()?;
            let realized = fm_eval_inverse(fm, &x).ok()?;
            Some(p_inv.max_abs_diff(&realized))
        })
        .collect();
    let mut report = FmCheckReport {
        max_residual: 0.0,
        points_used: 0,
        points_skipped: 0,
    };
    for o in outcomes {
        match o {
            Some(r) => {
                report.points_used += 1;
                report.max_residual = report.max_residual.max(r);
            }
            None => report.points_skipped += 1,
        }
    }
    if report.points_used == 0 {
        return Err(Error::AllSamplesOutOfDomain);
    }
    if report.max_residual > 1e-8 {
        return Err(Error::IdentityViolation {
            residual: report.max_residual,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct FmBoundReport {
    /// ||[I 0; -C* I]||, exact operator norm.
    pub c_factor: f64,
    /// ||[I -B(1,..,1); 0 I]||, exact operator norm at the all-ones point.
    pub b_factor: f64,
    /// Sampled sup of the bordered B factor over the ball; a lower bound.
    pub b_factor_estimate: f64,
    /// kappa such that ||diag(L_A(rZ)^{-1}, I)|| <= kappa / (1 - r).
    pub pencil_scale: f64,
    /// 1 + c_factor * b_factor * pencil_scale * weighted_part_sum.
    pub headline: f64,
}

fn bordered_c(fm: &FMRealization) -> CMatrix {
    let n = fm.a.level;
    let k = fm.k();
    let mut m = CMatrix::identity(n + k);
    m.set_block(n, 0, &fm.c.adjoint().scale_re(-1.0));
    m
}

fn bordered_b(fm: &FMRealization, bx: &CMatrix, m_level: usize) -> CMatrix {
    let n = fm.a.level * m_level;
    let k = fm.k() * m_level;
    let mut m = CMatrix::identity(n + k);
    m.set_block(0, n, &bx.scale_re(-1.0));
    m
}

/// The three factors of the inverse bound for (P^{(r)})^{-1} and the
/// resulting uniform constant. `weighted_part_sum` is Sigma j ||P_j|| and
/// `pencil_scale` the kappa certified for the pencil (1 when A lies in the
/// closed dual ball); both are trusted exact inputs.
pub fn fm_bound(
    fm: &FMRealization,
    spec: &BallSpec,
    weighted_part_sum: f64,
    pencil_scale: f64,
    budget: &Budget,
    seed: u64,
) -> Result<FmBoundReport> {
    let c_factor = bordered_c(fm).opnorm();
    let ones = MatrixTuple::scalars(&vec![C64::new(1.0, 0.0); fm.a.d]);
    let b_factor = bordered_b(fm, &fm.b_at(&ones), 1).opnorm();
    let est = ncball::norm_over_ball(
        &|x: &MatrixTuple| Ok(bordered_b(fm, &fm.b_at(x), x.level)),
        spec,
        budget,
        seed,
    )?;
    Ok(FmBoundReport {
        c_factor,
        b_factor,
        b_factor_estimate: est.lower_bound,
        pencil_scale,
        headline: 1.0 + c_factor * b_factor * pencil_scale * weighted_part_sum,
    })
}

/// Candidate FM data read off a linearization: with E the embedding of the
/// original coordinates, E* L_A^{-1} E = P^{-1} whenever the uni-triangular
/// factors act trivially on the embedded block, and then
/// (A, B_j = A_j E, C = E, D = I) realizes P^{-1}. The candidate is
/// validated by fm_check before being returned.
pub fn fm_from_linearization(lin: &Linearization, seed: u64) -> Result<FMRealization> {
    let k = lin.p.k;
    let n = k + lin.pad;
    let e = CMatrix::from_fn(n, k, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
    let fm = FMRealization {
        a: lin.a.clone(),
        b: lin.a.matrices.iter().map(|aj| aj * &e).collect(),
        c: e,
        d: CMatrix::identity(k),
    };
    let spec = BallSpec::Polydisk { d: lin.p.d };
    fm_check(&lin.p, &fm, &spec, 60, seed)?;
    Ok(fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::linalg::{ginibre, seeded_rng};
    use crate::linearize;
    use crate::ratexpr::parse_expr;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn polydisk(d: usize) -> BallSpec {
        BallSpec::Polydisk { d }
    }

    #[test]
    fn variable_descriptor_reproduces_the_variable() {
        let r = synth(&RatExpr::Var(1), 2).unwrap();
        assert_eq!(r.dim(), 2);
        let mut rng = seeded_rng(7);
        let x = MatrixTuple::new(vec![ginibre(3, &mut rng), ginibre(3, &mut rng)]).unwrap();
        let v = eval_descriptor(&r, &x).unwrap();
        assert!(v.max_abs_diff(&x.matrices[0]) < 1e-12);
    }

    #[test]
    fn geometric_series_descriptor() {
        // the 1-dimensional triple A = [1], b = c = [1] realizes (1-z)^{-1}
        let r = Descriptor {
            a: MatrixTuple::new(vec![CMatrix::scalar(c(1.0, 0.0))]).unwrap(),
            b: CMatrix::scalar(c(1.0, 0.0)),
            c: CMatrix::scalar(c(1.0, 0.0)),
        };
        let z = c(0.3, 0.2);
        let v = eval_descriptor(&r, &MatrixTuple::scalars(&[z])).unwrap();
        assert!((v[(0, 0)] - (c(1.0, 0.0) - z).inv()).norm() < 1e-12);

        // synthesized inv(1 - Z1) agrees, with larger dimension
        let e = parse_expr("inv(1 - Z1)", 1).unwrap();
        let (syn, report) = synth_verified(&e, 1, 11).unwrap();
        assert!(report.max_err <= 1e-8);
        let v2 = eval_descriptor(&syn, &MatrixTuple::scalars(&[z])).unwrap();
        assert!((v2[(0, 0)] - v[(0, 0)]).norm() < 1e-10);
    }

    #[test]
    fn singular_point_reports_pencil_domain() {
        let e = parse_expr("inv(1 - Z1)", 1).unwrap();
        let r = synth(&e, 1).unwrap();
        match eval_descriptor(&r, &MatrixTuple::scalars(&[c(1.0, 0.0)])) {
            Err(Error::OutOfPencilDomain { .. }) => {}
            other => panic!("expected OutOfPencilDomain, got {:?}", other),
        }
    }

    #[test]
    fn inverse_of_origin_vanishing_expression_is_degenerate() {
        let e = RatExpr::Var(1).inv();
        assert!(matches!(
            synth(&e, 1),
            Err(Error::DegenerateExpression(_))
        ));
    }

    #[test]
    fn parallel_sum_matches_scalar_closed_form() {
        let e = ratexpr::parallel_sum();
        let r = synth(&e, 2).unwrap();
        let mut rng = seeded_rng(13);
        for _ in 0..50 {
            let z = c(
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
            );
            let w = c(
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
            );
            let denom = c(2.0, 0.0) - z - w;
            if denom.norm() < 0.3 {
                continue;
            }
            let expect = (c(1.0, 0.0) - z) * (c(1.0, 0.0) - w) / denom;
            let v = eval_descriptor(&r, &MatrixTuple::scalars(&[z, w])).unwrap();
            assert!((v[(0, 0)] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn synth_eval_coherence_on_random_corpus() {
        let mut rng = seeded_rng(17);
        let mut checked = 0;
        for t in 0..12u64 {
            let e = ratexpr::random_expr(2, 3, &mut rng);
            let r = match synth(&e, 2) {
                Ok(r) => r,
                Err(_) => continue,
            };
            match coherence_check(&e, &r, &polydisk(2), 40, t) {
                Ok(report) => {
                    assert!(
                        report.max_err <= 1e-8,
                        "mismatch {:.3e} for {:?}",
                        report.max_err,
                        e
                    );
                    checked += 1;
                }
                Err(Error::Degenerate) => continue,
                Err(other) => panic!("{other}"),
            }
        }
        assert!(checked >= 8);
    }

    #[test]
    fn assemble_single_entry_is_identity() {
        let e = parse_expr("inv(2 - Z1)", 1).unwrap();
        let r = synth(&e, 1).unwrap();
        let block = assemble(std::slice::from_ref(&r), 1).unwrap();
        let x = MatrixTuple::new(vec![ginibre(2, &mut seeded_rng(3)).scale_re(0.4)]).unwrap();
        let a = eval_descriptor(&r, &x).unwrap();
        let b = eval_block(&block, &x).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn assemble_grid_matches_entrywise() {
        let texts = ["inv(2 - Z1)", "Z2", "Z1 * Z2", "1 - Z1"];
        let entries: Vec<Descriptor> = texts
            .iter()
            .map(|t| synth(&parse_expr(t, 2).unwrap(), 2).unwrap())
            .collect();
        let block = assemble(&entries, 2).unwrap();
        for trial in 0..50u64 {
            let lvl = 1 + (trial as usize) % 2;
            let x = ncball::sample(&polydisk(2), lvl, 1.0, 1, trial).pop().unwrap();
            let big = eval_block(&block, &x).unwrap();
            for lam in 0..2 {
                for mu in 0..2 {
                    let small = eval_descriptor(&entries[lam * 2 + mu], &x).unwrap();
                    let got = big.block(lam * lvl, mu * lvl, lvl, lvl);
                    assert!(got.max_abs_diff(&small) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn assemble_diagonal_grid_has_sparse_b_and_c() {
        let zero = synth(&RatExpr::Const(c(0.0, 0.0)), 1).unwrap();
        let diag = synth(&parse_expr("Z1", 1).unwrap(), 1).unwrap();
        let entries = vec![diag.clone(), zero.clone(), zero.clone(), diag.clone()];
        let block = assemble(&entries, 2).unwrap();
        // off-diagonal entries contribute zero c columns in their blocks
        let x = MatrixTuple::scalars(&[c(0.7, 0.0)]);
        let v = eval_block(&block, &x).unwrap();
        assert!(v[(0, 1)].norm() < 1e-14 && v[(1, 0)].norm() < 1e-14);
        assert!((v[(0, 0)] - c(0.7, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn factorization_identity_holds() {
        let e = parse_expr("inv(1 - Z1)", 1).unwrap();
        let r = synth(&e, 1).unwrap();
        let block = assemble(std::slice::from_ref(&r), 1).unwrap();
        let value = |x: &MatrixTuple| eval_block(&block, x);
        let report =
            factorization_check(&block, &value, &polydisk(1), 0.5, 100, 5, None).unwrap();
        assert!(report.points_used >= 90);
        assert!(report.max_identity_residual <= 1e-8);
        assert!(report.max_gamma_inv_residual <= 1e-8);
    }

    #[test]
    fn factorization_detects_corrupted_realization() {
        let e = parse_expr("inv(2 - Z1)", 1).unwrap();
        let r = synth(&e, 1).unwrap();
        let block = assemble(std::slice::from_ref(&r), 1).unwrap();
        // pick a C entry whose perturbation actually moves the function
        let probe = MatrixTuple::scalars(&[c(0.3, 0.1)]);
        let base_v = eval_block(&block, &probe).unwrap();
        let mut bad = None;
        for i in 0..block.c.rows() {
            let mut cand = block.clone();
            cand.c[(i, 0)] += c(1e-3, 0.0);
            if eval_block(&cand, &probe).unwrap().max_abs_diff(&base_v) > 1e-6 {
                bad = Some(cand);
                break;
            }
        }
        let bad = bad.expect("no sensitive C entry");
        let value = |x: &MatrixTuple| eval_block(&block, x);
        assert!(matches!(
            factorization_check(&bad, &value, &polydisk(1), 0.5, 50, 5, None),
            Err(Error::IdentityViolation { .. })
        ));
    }

    #[test]
    fn factorization_pencil_bound() {
        // A = [0.5]: dual norm 0.5, so ||L_A(x)^{-1}|| <= 1/(1 - 0.5)
        let r = Descriptor {
            a: MatrixTuple::new(vec![CMatrix::scalar(c(0.5, 0.0))]).unwrap(),
            b: CMatrix::scalar(c(1.0, 0.0)),
            c: CMatrix::scalar(c(1.0, 0.0)),
        };
        let block = assemble(std::slice::from_ref(&r), 1).unwrap();
        let value = |x: &MatrixTuple| eval_block(&block, x);
        let report = factorization_check(
            &block,
            &value,
            &polydisk(1),
            1.0,
            80,
            9,
            Some((1.0, 0.5)),
        )
        .unwrap();
        assert!(report.pencil_bound_checked);
        assert!(report.max_pencil_inv_norm <= 2.0 + 1e-8);
    }

    fn fm_example() -> FMRealization {
        let a = gallery::symmetrized_product_pencil();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FMRealization {
            b: vec![
                CMatrix::column(&[c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)]),
                CMatrix::column(&[c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]),
            ],
            c: CMatrix::column(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            d: CMatrix::identity(1),
            a,
        }
    }

    #[test]
    fn fm_check_passes_for_the_inverse_realization() {
        let p = gallery::example_symmetrized_product();
        let report = fm_check(&p, &fm_example(), &polydisk(2), 100, 21).unwrap();
        assert!(report.max_residual <= 1e-8);
        assert!(report.points_used >= 90);
    }

    #[test]
    fn fm_check_negative_control() {
        let p = gallery::example_symmetrized_product();
        let mut fm = fm_example();
        fm.b[0][(1, 0)] += c(1e-3, 0.0);
        assert!(matches!(
            fm_check(&p, &fm, &polydisk(2), 50, 22),
            Err(Error::IdentityViolation { .. })
        ));
    }

    #[test]
    fn fm_bound_golden_ratio_factors() {
        let fm = fm_example();
        let budget = Budget {
            levels: vec![1, 2],
            samples_per_level: 30,
            hill_steps: 20,
        };
        let report = fm_bound(&fm, &polydisk(2), 2.0, 1.0, &budget, 23).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((report.c_factor - phi).abs() < 1e-9);
        assert!((report.b_factor - phi).abs() < 1e-9);
        assert!(report.b_factor_estimate <= phi + 1e-6);
        let expect = 1.0 + (1.0 + 5.0_f64.sqrt()).powi(2) / 2.0;
        assert!((report.headline - expect).abs() < 1e-8);
        assert!((report.headline - 6.2360679).abs() < 1e-6);
    }

    #[test]
    fn fm_candidate_from_linearization() {
        let p = gallery::example_symmetrized_product();
        let lin = linearize::linearize(&p).unwrap();
        let fm = fm_from_linearization(&lin, 29).unwrap();
        let expect = fm_example();
        for j in 0..2 {
            assert!(fm.b[j].max_abs_diff(&expect.b[j]) < 1e-15);
        }
        assert!(fm.c.max_abs_diff(&expect.c) < 1e-15);
    }

    #[test]
    fn descriptor_json_round_trip() {
        let e = parse_expr("inv(2 - Z1 - Z2)", 2).unwrap();
        let r = synth(&e, 2).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: Descriptor = serde_json::from_str(&text).unwrap();
        let x = ncball::sample(&polydisk(2), 2, 1.0, 1, 31).pop().unwrap();
        let a = eval_descriptor(&r, &x).unwrap();
        let b = eval_descriptor(&back, &x).unwrap();
        assert!(a.max_abs_diff(&b) == 0.0);

        let fm = fm_example();
        let text = serde_json::to_string(&fm).unwrap();
        let back: FMRealization = serde_json::from_str(&text).unwrap();
        assert!(back.b[1].max_abs_diff(&fm.b[1]) == 0.0);
    }
}
