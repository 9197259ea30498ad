//! Linearization of matrix free polynomials: repeated application of the
//! bordering identity
//!
//!   [I, -Y1; 0, I] diag(Y0 - Y1 Y2, I) [I, 0; -Y2, I] = [Y0, -Y1; -Y2, I]
//!
//! turns any P with P(0) = I into diag(P, I_l) = F L_A G with F upper
//! uni-triangular, G lower uni-triangular, and L_A a monic linear pencil.
//! The top-degree word is split into balanced halves with symmetric
//! square-root scaling, which keeps coefficients balanced and reproduces
//! hand-computed pencils exactly.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freepoly::{MatPoly, MatrixTuple, Word};
use crate::linalg::{derive_seed, ginibre, seeded_rng, CMatrix};
use crate::pencil;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Linearization {
    pub p: MatPoly,
    /// Number of bordered coordinates: the pencil has size p.k + pad.
    pub pad: usize,
    pub f: MatPoly,
    pub g: MatPoly,
    pub f_inv: MatPoly,
    pub g_inv: MatPoly,
    /// Pencil coefficients: L_A = I - Sigma A_j Z_j.
    pub a: MatrixTuple,
}

/// I - Sigma A_j Z_j as a matrix free polynomial.
pub fn pencil_to_poly(a: &MatrixTuple, d: usize) -> MatPoly {
    let mut m = MatPoly::identity(d, a.level);
    for (j, aj) in a.matrices.iter().enumerate() {
        m.add_term(Word::letter(j as u8 + 1), aj.scale_re(-1.0));
    }
    m
}

fn check_monic(m: &MatPoly) -> Result<()> {
    if m.constant_term().max_abs_diff(&CMatrix::identity(m.k)) > 1e-12 {
        return Err(Error::NotMonicAtZero);
    }
    Ok(())
}

/// One bordering step: split off the degree-lexicographically largest word
/// of degree >= 2 and return the enlarged matrix together with the
/// elementary factors L, R satisfying diag(m, 1) = L m' R.
pub fn higman_step(m: &MatPoly) -> Result<(MatPoly, MatPoly, MatPoly)> {
    check_monic(m)?;
    let (w, i, j) = m
        .max_word_deg2()
        .ok_or_else(|| Error::DegenerateExpression("no word of degree >= 2".into()))?;
    let coeff = m.coeff(&w)[(i, j)];
    let mid = (w.len() + 1) / 2;
    let (w1, w2) = w.split_at(mid);
    // alpha beta = -coeff with |alpha| = |beta| = sqrt|coeff|
    let root = coeff.norm().sqrt();
    let beta = C64::new(root, 0.0);
    let alpha = -coeff / coeff.norm() * root;

    let k = m.k;
    // Y0 = m with the selected term removed, bordered to size k + 1
    let mut rest = m.clone();
    let mut drop = CMatrix::zeros(k, k);
    drop[(i, j)] = -coeff;
    rest.add_term(w.clone(), drop);
    let mut bordered = rest.pad_diag(1);
    // border entries -Y1 = -alpha w1 at (i, k) and -Y2 = -beta w2 at (k, j)
    let mut e = CMatrix::zeros(k + 1, k + 1);
    e[(i, k)] = -alpha;
    bordered.add_term(w1.clone(), e);
    let mut e = CMatrix::zeros(k + 1, k + 1);
    e[(k, j)] = -beta;
    bordered.add_term(w2.clone(), e);

    let mut left = MatPoly::identity(m.d, k + 1);
    let mut e = CMatrix::zeros(k + 1, k + 1);
    e[(i, k)] = alpha;
    left.add_term(w1, e);
    let mut right = MatPoly::identity(m.d, k + 1);
    let mut e = CMatrix::zeros(k + 1, k + 1);
    e[(k, j)] = beta;
    right.add_term(w2, e);

    Ok((bordered, left, right))
}

fn strict_part(m: &MatPoly, upper: bool) -> MatPoly {
    let j = m.sub(&MatPoly::identity(m.d, m.k));
    let mut out = MatPoly::zero(m.d, m.k);
    for (w, c) in j.terms() {
        let mut keep = CMatrix::zeros(m.k, m.k);
        let mut ok = true;
        for r in 0..m.k {
            for s in 0..m.k {
                let v = c[(r, s)];
                if v.norm() == 0.0 {
                    continue;
                }
                if (upper && r < s) || (!upper && r > s) {
                    keep[(r, s)] = v;
                } else {
                    ok = false;
                }
            }
        }
        assert!(ok, "factor is not uni-triangular");
        out.add_term(w.clone(), keep);
    }
    out
}

/// Inverse of a uni-triangular I + J via the finite Neumann sum
/// Sigma (-J)^i; J is strictly triangular, hence nilpotent.
pub fn unitriangular_inverse(m: &MatPoly, upper: bool) -> MatPoly {
    let j = strict_part(m, upper);
    let mut acc = MatPoly::identity(m.d, m.k);
    let mut power = MatPoly::identity(m.d, m.k);
    let neg = j.scale(C64::new(-1.0, 0.0));
    for _ in 1..m.k {
        power = power.mul(&neg);
        if power.is_zero() {
            break;
        }
        acc = acc.add(&power);
    }
    acc
}

/// Iterate the bordering step down to an affine matrix, accumulating the
/// uni-triangular factors, and read the pencil coefficients off.
pub fn linearize(p: &MatPoly) -> Result<Linearization> {
    check_monic(p)?;
    let mut m = p.clone();
    let mut f = MatPoly::identity(p.d, p.k);
    let mut g = MatPoly::identity(p.d, p.k);
    while m.degree() >= 2 {
        let (next, left, right) = higman_step(&m)?;
        f = f.pad_diag(1).mul(&left);
        g = right.mul(&g.pad_diag(1));
        m = next;
    }
    let size = m.k;
    let a = MatrixTuple::new(
        (1..=p.d as u8)
            .map(|j| m.coeff(&Word::letter(j)).scale_re(-1.0))
            .collect::<Vec<_>>(),
    )
    .unwrap_or_else(|_| MatrixTuple::zeros(p.d.max(1), size));
    let f_inv = unitriangular_inverse(&f, true);
    let g_inv = unitriangular_inverse(&g, false);
    Ok(Linearization {
        p: p.clone(),
        pad: size - p.k,
        f,
        g,
        f_inv,
        g_inv,
        a,
    })
}

fn delete_index(m: &MatPoly, idx: usize) -> MatPoly {
    let k = m.k;
    let mut out = MatPoly::zero(m.d, k - 1);
    for (w, c) in m.terms() {
        let small = c.delete_row_col(idx, idx);
        if small.max_abs() > 0.0 {
            out.add_term(w.clone(), small);
        }
    }
    out
}

/// Whether coordinate idx is decoupled: pencil row and column are zero and
/// both factors act as the identity there.
fn is_trivial_coordinate(lin: &Linearization, idx: usize) -> bool {
    let size = lin.p.k + lin.pad;
    for aj in &lin.a.matrices {
        for t in 0..size {
            if aj[(idx, t)].norm() != 0.0 || aj[(t, idx)].norm() != 0.0 {
                return false;
            }
        }
    }
    for m in [&lin.f, &lin.g] {
        for (w, c) in m.terms() {
            for t in 0..size {
                let expect = if w.is_empty() && t == idx {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                if (c[(idx, t)] - expect).norm() != 0.0 || (c[(t, idx)] - expect).norm() != 0.0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Remove bordered coordinates that decoupled into an identity block.
pub fn trim(lin: &Linearization) -> Result<Linearization> {
    let mut cur = lin.clone();
    loop {
        let size = cur.p.k + cur.pad;
        let mut removed = false;
        for idx in (cur.p.k..size).rev() {
            if is_trivial_coordinate(&cur, idx) {
                cur = Linearization {
                    p: cur.p.clone(),
                    pad: cur.pad - 1,
                    f: delete_index(&cur.f, idx),
                    g: delete_index(&cur.g, idx),
                    f_inv: delete_index(&cur.f_inv, idx),
                    g_inv: delete_index(&cur.g_inv, idx),
                    a: MatrixTuple::new(
                        cur.a
                            .matrices
                            .iter()
                            .map(|m| m.delete_row_col(idx, idx))
                            .collect(),
                    )?,
                };
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    verify(&cur, 5, 0x7213)?;
    Ok(cur)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub max_coeff_residual: f64,
    pub max_numeric_residual: f64,
    pub trials: usize,
}

/// Check diag(p, I) = F L_A G exactly on coefficients, the factor inverse
/// identities, and the evaluation identity at random tuples.
pub fn verify(lin: &Linearization, trials: usize, seed: u64) -> Result<VerifyReport> {
    let la = pencil_to_poly(&lin.a, lin.p.d);
    let lhs = lin.p.pad_diag(lin.pad);
    let rhs = lin.f.mul(&la).mul(&lin.g);
    let mut worst = lhs.max_coeff_abs_diff(&rhs);
    let eye = MatPoly::identity(lin.p.d, lin.p.k + lin.pad);
    worst = worst.max(lin.f.mul(&lin.f_inv).max_coeff_abs_diff(&eye));
    worst = worst.max(lin.g.mul(&lin.g_inv).max_coeff_abs_diff(&eye));
    if worst > 1e-12 {
        return Err(Error::IdentityViolation { residual: worst });
    }

    let mut numeric = 0.0_f64;
    for t in 0..trials {
        let mut rng = seeded_rng(derive_seed(seed, 0x11ea, t as u64));
        let n = 1 + t % 3;
        let x = MatrixTuple::new((0..lin.p.d).map(|_| ginibre(n, &mut rng)).collect()).unwrap();
        let lhs_v = lhs.eval(&x)?;
        let rhs_v = &(&lin.f.eval(&x)? * &pencil::pencil_eval(&lin.a, &x)?) * &lin.g.eval(&x)?;
        numeric = numeric.max(lhs_v.max_abs_diff(&rhs_v));
    }
    if numeric > 1e-10 {
        return Err(Error::IdentityViolation { residual: numeric });
    }
    Ok(VerifyReport {
        max_coeff_residual: worst,
        max_numeric_residual: numeric,
        trials,
    })
}

#[derive(Clone, Debug)]
pub enum AtomCertificate {
    /// The trimmed pencil is irreducible, so the polynomial admits no
    /// nontrivial factorization into non-units.
    Atom {
        linearization: Linearization,
        algebra_dim: usize,
    },
    /// The pencil came out reducible; this does not decide the question,
    /// because the bordering construction need not produce the irreducible
    /// representative.
    Inconclusive {
        reason: String,
        algebra_dim: usize,
        linearization: Linearization,
    },
}

/// Dimension of the smallest invariant subspace containing v0, the orbit
/// of v0 under the algebra generated by the tuple.
fn orbit_dim(a: &MatrixTuple, v0: &CMatrix) -> usize {
    let m = a.level;
    let mut basis: Vec<CMatrix> = Vec::new();
    let try_add = |basis: &mut Vec<CMatrix>, cand: CMatrix| -> bool {
        let mut v = cand;
        let scale = v.frobenius();
        if scale == 0.0 {
            return false;
        }
        for b in basis.iter() {
            let mut inner = C64::new(0.0, 0.0);
            for i in 0..m {
                inner += v[(i, 0)] * b[(i, 0)].conj();
            }
            v = &v - &b.scale(inner);
        }
        let res = v.frobenius();
        if res > 1e-9 * scale.max(1.0) {
            basis.push(v.scale_re(1.0 / res));
            true
        } else {
            false
        }
    };
    try_add(&mut basis, v0.clone());
    let mut frontier = vec![0usize];
    while !frontier.is_empty() && basis.len() < m {
        let mut next = Vec::new();
        for bi in frontier {
            let v = basis[bi].clone();
            for aj in &a.matrices {
                if try_add(&mut basis, aj * &v) {
                    next.push(basis.len() - 1);
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

/// Search for a vector with a proper orbit. Eigenvectors of a generic
/// algebra element land in minimal invariant subspaces, so we sweep the
/// eigenvectors of random quadratic words alongside the standard basis.
fn invariant_subspace_witness(a: &MatrixTuple, seed: u64) -> Option<usize> {
    let m = a.level;
    let mut best: Option<usize> = None;
    let consider = |v: &CMatrix, best: &mut Option<usize>| {
        let dim = orbit_dim(a, v);
        if dim < m && best.map_or(true, |b| dim < b) {
            *best = Some(dim);
        }
    };
    for i in 0..m {
        let e = CMatrix::from_fn(m, 1, |r, _| C64::new(if r == i { 1.0 } else { 0.0 }, 0.0));
        consider(&e, &mut best);
    }
    for t in 0..4u64 {
        let mut rng = seeded_rng(derive_seed(seed, 0x0a1b, t));
        let mut coin = move || {
            C64::new(
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
                rand::Rng::gen::<f64>(&mut rng) - 0.5,
            )
        };
        let mut gen = CMatrix::zeros(m, m);
        for aj in &a.matrices {
            gen = &gen + &aj.scale(coin());
            for ak in &a.matrices {
                gen = &gen + &(aj * ak).scale(coin());
            }
        }
        if let Ok((_, vecs)) = gen.eigen_pairs() {
            for col in 0..m {
                let v = CMatrix::from_fn(m, 1, |r, _| vecs[(r, col)]);
                consider(&v, &mut best);
            }
        }
    }
    best
}

/// Normalize to P P(0)^{-1}, linearize, trim, and test the pencil
/// coefficients for irreducibility.
pub fn atom_certificate(p: &MatPoly) -> Result<AtomCertificate> {
    let p0 = p.constant_term();
    let normalized = if p0.max_abs_diff(&CMatrix::identity(p.k)) > 1e-12 {
        let inv = p0.inverse().map_err(|_| Error::NotMonicAtZero)?;
        p.mul(&MatPoly::constant(p.d, inv))
    } else {
        p.clone()
    };
    let lin = trim(&linearize(&normalized)?)?;
    let irr = pencil::irreducible(&lin.a);
    if irr.irreducible {
        Ok(AtomCertificate::Atom {
            linearization: lin,
            algebra_dim: irr.algebra_dim,
        })
    } else {
        let m = lin.a.level;
        let reason = match invariant_subspace_witness(&lin.a, 0x5eed) {
            Some(dim) => format!(
                "pencil generates a {}-dimensional algebra (< {}) with an invariant subspace of dimension {}",
                irr.algebra_dim,
                m * m,
                dim
            ),
            None => format!(
                "pencil generates a {}-dimensional algebra (< {})",
                irr.algebra_dim,
                m * m
            ),
        };
        Ok(AtomCertificate::Inconclusive {
            reason,
            algebra_dim: irr.algebra_dim,
            linearization: lin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_step_reproduces_two_by_two_intermediate() {
        let p = gallery::example_symmetrized_product();
        let (m1, left, right) = higman_step(&p).unwrap();
        assert_eq!(m1.k, 2);
        // [[1 - ZW/2, -W/sqrt2], [-Z/sqrt2, 1]]
        let s = FRAC_1_SQRT_2;
        assert!((m1.coeff(&Word(vec![1, 2]))[(0, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((m1.coeff(&Word(vec![2]))[(0, 1)] - c(-s, 0.0)).norm() < 1e-15);
        assert!((m1.coeff(&Word(vec![1]))[(1, 0)] - c(-s, 0.0)).norm() < 1e-15);
        assert!((left.coeff(&Word(vec![2]))[(0, 1)] - c(s, 0.0)).norm() < 1e-15);
        assert!((right.coeff(&Word(vec![1]))[(1, 0)] - c(s, 0.0)).norm() < 1e-15);
        // the defining identity for the step
        let lhs = p.pad_diag(1);
        let rhs = left.mul(&m1).mul(&right);
        assert!(lhs.max_coeff_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn step_requires_degree_two() {
        let mut p = MatPoly::identity(1, 1);
        p.add_term(Word(vec![1]), CMatrix::scalar(c(-1.0, 0.0)));
        assert!(higman_step(&p).is_err());
    }

    #[test]
    fn step_rejects_nonmonic() {
        let mut p = MatPoly::zero(2, 1);
        p.add_term(Word::empty(), CMatrix::scalar(c(2.0, 0.0)));
        p.add_term(Word(vec![1, 2]), CMatrix::scalar(c(1.0, 0.0)));
        assert!(matches!(higman_step(&p), Err(Error::NotMonicAtZero)));
    }

    #[test]
    fn step_decreases_degree_potential() {
        // potential sum of 4^deg over nonzero entries of words of degree
        // >= 2 strictly drops, which bounds the number of steps
        let potential = |m: &MatPoly| -> f64 {
            m.terms()
                .filter(|(w, _)| w.len() >= 2)
                .map(|(w, c)| {
                    let mut nonzero = 0usize;
                    for i in 0..m.k {
                        for j in 0..m.k {
                            if c[(i, j)].norm() > 0.0 {
                                nonzero += 1;
                            }
                        }
                    }
                    nonzero as f64 * 4.0_f64.powi(w.len() as i32)
                })
                .sum()
        };
        let mut rng = seeded_rng(41);
        for _ in 0..10 {
            let mut p = MatPoly::identity(2, 1);
            for wlen in 1..=4 {
                let w: Vec<u8> = (0..wlen)
                    .map(|_| 1 + (rand::Rng::gen::<u8>(&mut rng) % 2))
                    .collect();
                let z = C64::new(
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                );
                p.add_term(Word(w), CMatrix::scalar(z));
            }
            let mut m = p;
            while m.degree() >= 2 {
                let before = potential(&m);
                let (next, _, _) = higman_step(&m).unwrap();
                assert!(potential(&next) < before);
                m = next;
            }
        }
    }

    #[test]
    fn linearize_symmetrized_product_exactly() {
        let p = gallery::example_symmetrized_product();
        let lin = linearize(&p).unwrap();
        assert_eq!(lin.pad, 2);
        let expect = gallery::symmetrized_product_pencil();
        for j in 0..2 {
            assert!(
                lin.a.matrices[j].max_abs_diff(&expect.matrices[j]) < 1e-15,
                "A_{} = {:?}",
                j,
                lin.a.matrices[j]
            );
        }
        // F carries W/sqrt2, Z/sqrt2 in the first row; G the mirror column
        let s = FRAC_1_SQRT_2;
        assert!((lin.f.coeff(&Word(vec![2]))[(0, 1)] - c(s, 0.0)).norm() < 1e-15);
        assert!((lin.f.coeff(&Word(vec![1]))[(0, 2)] - c(s, 0.0)).norm() < 1e-15);
        assert!((lin.g.coeff(&Word(vec![1]))[(1, 0)] - c(s, 0.0)).norm() < 1e-15);
        assert!((lin.g.coeff(&Word(vec![2]))[(2, 0)] - c(s, 0.0)).norm() < 1e-15);
        verify(&lin, 10, 1).unwrap();
    }

    #[test]
    fn linearize_boundary_zero_exactly() {
        let p = gallery::example_boundary_zero();
        let lin = linearize(&p).unwrap();
        assert_eq!(lin.pad, 1);
        let expect = gallery::boundary_zero_pencil();
        for j in 0..2 {
            assert!(lin.a.matrices[j].max_abs_diff(&expect.matrices[j]) < 1e-15);
        }
        verify(&lin, 10, 2).unwrap();
    }

    #[test]
    fn linearize_affine_is_identity_transform() {
        let mut p = MatPoly::identity(1, 1);
        p.add_term(Word(vec![1]), CMatrix::scalar(c(-1.0, 0.0)));
        let lin = linearize(&p).unwrap();
        assert_eq!(lin.pad, 0);
        assert!(lin.f.max_coeff_abs_diff(&MatPoly::identity(1, 1)) == 0.0);
        assert!(lin.g.max_coeff_abs_diff(&MatPoly::identity(1, 1)) == 0.0);
        assert!((lin.a.matrices[0][(0, 0)] - c(1.0, 0.0)).norm() == 0.0);
    }

    #[test]
    fn factor_inverses_are_exact() {
        let p = gallery::example_symmetrized_product();
        let lin = linearize(&p).unwrap();
        let eye = MatPoly::identity(2, 3);
        assert!(lin.f.mul(&lin.f_inv).max_coeff_abs_diff(&eye) < 1e-15);
        assert!(lin.f_inv.mul(&lin.f).max_coeff_abs_diff(&eye) < 1e-15);
        assert!(lin.g.mul(&lin.g_inv).max_coeff_abs_diff(&eye) < 1e-15);
        assert!(lin.g_inv.mul(&lin.g).max_coeff_abs_diff(&eye) < 1e-15);
    }

    #[test]
    fn trim_removes_padded_identity_block() {
        let p = gallery::example_symmetrized_product();
        let lin = linearize(&p).unwrap();
        // already trim: unchanged
        let trimmed = trim(&lin).unwrap();
        assert_eq!(trimmed.pad, lin.pad);

        // artificially pad with two decoupled coordinates
        let size = lin.p.k + lin.pad;
        let padded = Linearization {
            p: lin.p.clone(),
            pad: lin.pad + 2,
            f: lin.f.pad_diag(2),
            g: lin.g.pad_diag(2),
            f_inv: lin.f_inv.pad_diag(2),
            g_inv: lin.g_inv.pad_diag(2),
            a: MatrixTuple::new(
                lin.a
                    .matrices
                    .iter()
                    .map(|m| {
                        let mut big = CMatrix::zeros(size + 2, size + 2);
                        big.set_block(0, 0, m);
                        big
                    })
                    .collect(),
            )
            .unwrap(),
        };
        verify(&padded, 3, 3).unwrap();
        let back = trim(&padded).unwrap();
        assert_eq!(back.pad, lin.pad);
        for j in 0..2 {
            assert!(back.a.matrices[j].max_abs_diff(&lin.a.matrices[j]) == 0.0);
        }
    }

    #[test]
    fn stable_association_preserves_invertibility() {
        // det diag(p, I)(x) != 0 iff det L_A(x) != 0 since F, G are unit
        let p = gallery::example_boundary_zero();
        let lin = linearize(&p).unwrap();
        let mut rng = seeded_rng(47);
        for _ in 0..10 {
            let x = MatrixTuple::new(vec![ginibre(2, &mut rng), ginibre(2, &mut rng)]).unwrap();
            let pv = p.eval(&x).unwrap();
            let lv = pencil::pencil_eval(&lin.a, &x).unwrap();
            let p_sing = pv.smallest_singular_value() < 1e-10;
            let l_sing = lv.smallest_singular_value() < 1e-10;
            assert_eq!(p_sing, l_sing);
        }
    }

    #[test]
    fn random_polynomials_linearize_and_verify() {
        let mut rng = seeded_rng(53);
        for trial in 0..8 {
            let k = 1 + trial % 2;
            let mut p = MatPoly::identity(2, k);
            for _ in 0..4 {
                let wlen = 1 + rand::Rng::gen::<usize>(&mut rng) % 4;
                let w: Vec<u8> = (0..wlen)
                    .map(|_| 1 + (rand::Rng::gen::<u8>(&mut rng) % 2))
                    .collect();
                p.add_term(Word(w), ginibre(k, &mut rng).scale_re(0.5));
            }
            let lin = linearize(&p).unwrap();
            verify(&lin, 6, trial as u64).unwrap();
            let trimmed = trim(&lin).unwrap();
            verify(&trimmed, 6, trial as u64).unwrap();
        }
    }

    #[test]
    fn atom_certificates() {
        match atom_certificate(&gallery::example_symmetrized_product()).unwrap() {
            AtomCertificate::Atom { algebra_dim, .. } => assert_eq!(algebra_dim, 9),
            other => panic!("expected Atom, got {:?}", other),
        }
        match atom_certificate(&gallery::example_boundary_zero()).unwrap() {
            AtomCertificate::Atom { algebra_dim, .. } => assert_eq!(algebra_dim, 4),
            other => panic!("expected Atom, got {:?}", other),
        }
        // (1 - Z)(1 - W) factors, and the pencil algebra sees it
        let z = MatPoly::identity(2, 1).sub(&MatPoly::variable(2, 1));
        let w = MatPoly::identity(2, 1).sub(&MatPoly::variable(2, 2));
        match atom_certificate(&z.mul(&w)).unwrap() {
            AtomCertificate::Inconclusive {
                algebra_dim,
                reason,
                ..
            } => {
                assert!(algebra_dim < 4);
                assert!(reason.contains("invariant subspace"));
            }
            other => panic!("expected Inconclusive, got {:?}", other),
        }
    }

    #[test]
    fn atom_certificate_normalizes_constant_term() {
        let p = gallery::example_symmetrized_product().scale(c(2.0, 0.0));
        assert!(matches!(
            atom_certificate(&p).unwrap(),
            AtomCertificate::Atom { .. }
        ));

        let mut sing = MatPoly::zero(1, 1);
        sing.add_term(Word(vec![1, 1]), CMatrix::scalar(c(1.0, 0.0)));
        assert!(matches!(
            atom_certificate(&sing),
            Err(Error::NotMonicAtZero)
        ));
    }

    #[test]
    fn linearization_json_round_trip() {
        let lin = linearize(&gallery::example_boundary_zero()).unwrap();
        let text = serde_json::to_string(&lin).unwrap();
        let back: Linearization = serde_json::from_str(&text).unwrap();
        assert!(back.p.max_coeff_abs_diff(&lin.p) == 0.0);
        assert!(back.f.max_coeff_abs_diff(&lin.f) == 0.0);
        assert_eq!(back.pad, lin.pad);
        verify(&back, 3, 9).unwrap();
    }
}
