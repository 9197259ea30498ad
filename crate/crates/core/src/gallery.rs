//! Named fixtures shared across modules and the CLI: the two running
//! scalar polynomials, their hand-computed pencil coefficients, and the
//! rank-one dual-ball data for the second one.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::freepoly::MatrixTuple;
use crate::linalg::CMatrix;

pub use crate::freepoly::{example_boundary_zero, example_symmetrized_product};

/// Pencil coefficients (A_Z, A_W) in M_3 for 1 - ZW/2 - WZ/2, so that
/// I - A_Z (x) X - A_W (x) Y is the 3x3 linearized pencil.
pub fn symmetrized_product_pencil() -> MatrixTuple {
    let s = FRAC_1_SQRT_2;
    let az = CMatrix::from_real(&[&[0.0, 0.0, s], &[s, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
    let aw = CMatrix::from_real(&[&[0.0, s, 0.0], &[0.0, 0.0, 0.0], &[s, 0.0, 0.0]]);
    MatrixTuple::new(vec![az, aw]).unwrap()
}

/// Pencil coefficients (A_Z, A_W) in M_2 for 1 - 2Z/3 - 2W/3 + ZW/3.
pub fn boundary_zero_pencil() -> MatrixTuple {
    let t = 1.0 / 3.0_f64.sqrt();
    let az = CMatrix::from_real(&[&[2.0 / 3.0, -t], &[0.0, 0.0]]);
    let aw = CMatrix::from_real(&[&[2.0 / 3.0, 0.0], &[t, 0.0]]);
    MatrixTuple::new(vec![az, aw]).unwrap()
}

/// Eigenvector similarity S = [[sqrt3, 1], [1, sqrt3]] taking the
/// boundary-zero pencil coefficients into the closed dual bidisk.
pub fn boundary_zero_similarity() -> CMatrix {
    let r = 3.0_f64.sqrt();
    CMatrix::from_real(&[&[r, 1.0], &[1.0, r]])
}

/// B = S^{-1} A S for the boundary-zero pencil; B_Z = u u^t, B_W = v v^t.
pub fn boundary_zero_dual_tuple() -> MatrixTuple {
    let (u, v) = boundary_zero_dual_vectors();
    let outer = |a: &CMatrix| a * &a.transpose();
    MatrixTuple::new(vec![outer(&u), outer(&v)]).unwrap()
}

/// The rank-one vectors u = (1/sqrt2, -1/sqrt6)^t and v = (1/sqrt2, 1/sqrt6)^t.
pub fn boundary_zero_dual_vectors() -> (CMatrix, CMatrix) {
    let a = FRAC_1_SQRT_2;
    let b = 1.0 / 6.0_f64.sqrt();
    let u = CMatrix::from_fn(2, 1, |i, _| C64::new(if i == 0 { a } else { -b }, 0.0));
    let v = CMatrix::from_fn(2, 1, |i, _| C64::new(if i == 0 { a } else { b }, 0.0));
    (u, v)
}

/// Coefficients of the reducible Jordan-type pencil I - A (x) Z in M_2,
/// A = [[1, 1], [0, 1]] (d = 1).
pub fn jordan_pencil() -> MatrixTuple {
    MatrixTuple::new(vec![CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 1.0]])]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_tuple_matches_conjugated_pencil() {
        let a = boundary_zero_pencil();
        let s = boundary_zero_similarity();
        let b = a.conjugate(&s).unwrap();
        let expect = boundary_zero_dual_tuple();
        for j in 0..2 {
            assert!(b.matrices[j].max_abs_diff(&expect.matrices[j]) < 1e-14);
        }
        // closed forms: B_Z = [[1/2, -1/(2 sqrt3)], [-1/(2 sqrt3), 1/6]]
        let r = 1.0 / (2.0 * 3.0_f64.sqrt());
        let bz = CMatrix::from_real(&[&[0.5, -r], &[-r, 1.0 / 6.0]]);
        assert!(expect.matrices[0].max_abs_diff(&bz) < 1e-15);
    }

    #[test]
    fn similarity_columns_are_eigenvectors_of_coefficient_sum() {
        let a = boundary_zero_pencil();
        let sum = &a.matrices[0] + &a.matrices[1];
        let s = boundary_zero_similarity();
        // eigenvalues 1 and 1/3
        let col = |j: usize| CMatrix::from_fn(2, 1, |i, _| s[(i, j)]);
        let e0 = &sum * &col(0);
        assert!(e0.max_abs_diff(&col(0)) < 1e-14);
        let e1 = &sum * &col(1);
        assert!(e1.max_abs_diff(&col(1).scale_re(1.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn pencil_reproduces_polynomial_under_triangular_factors() {
        // diag(P, I2) = F L_A G at a generic point, with F, G the
        // uni-triangular factors carrying W/sqrt2 and Z/sqrt2 borders
        use crate::linalg::{ginibre, seeded_rng};
        let mut rng = seeded_rng(3);
        let n = 2;
        let x = ginibre(n, &mut rng);
        let y = ginibre(n, &mut rng);
        let s = FRAC_1_SQRT_2;

        let a = symmetrized_product_pencil();
        let mut la = CMatrix::identity(3 * n);
        la = &la - &a.matrices[0].kron(&x);
        la = &la - &a.matrices[1].kron(&y);

        let mut f = CMatrix::identity(3 * n);
        f.set_block(0, n, &y.scale_re(s));
        f.set_block(0, 2 * n, &x.scale_re(s));
        let mut g = CMatrix::identity(3 * n);
        g.set_block(n, 0, &x.scale_re(s));
        g.set_block(2 * n, 0, &y.scale_re(s));

        let p = example_symmetrized_product();
        let px = p
            .eval(&MatrixTuple::new(vec![x.clone(), y.clone()]).unwrap())
            .unwrap();
        let mut lhs = CMatrix::identity(3 * n);
        lhs.set_block(0, 0, &px);

        let rhs = &(&f * &la) * &g;
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }
}
