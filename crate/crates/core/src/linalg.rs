//! Dense complex matrix kernel.
//!
//! Everything downstream (polynomial evaluation, pencils, realizations,
//! bound ledgers) consumes these primitives. Decompositions (SVD,
//! eigenvalues, LU) are delegated to `faer`; this module owns the
//! representation, the compositional operations (Kronecker and direct
//! sums) and the deterministic Ginibre sampler.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a matrix is treated as
/// singular. Configurable call sites (the stability scanner) pass their own.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        let m = CMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from real entries, row-major rows.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                entries[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn scalar(z: C64) -> Self {
        Self::from_fn(1, 1, |_, _| z)
    }

    pub fn column(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), 1, |i, _| entries[i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * z)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn kron(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * b.rows, self.cols * b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a_ij = self[(i, j)];
                if a_ij == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..b.rows {
                    for q in 0..b.cols {
                        out[(i * b.rows + p, j * b.cols + q)] = a_ij * b[(p, q)];
                    }
                }
            }
        }
        out
    }

    pub fn direct_sum(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows + b.rows, self.cols + b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(self.rows + i, self.cols + j)] = b[(i, j)];
            }
        }
        out
    }

    /// Copy `b` into this matrix with top-left corner at (`row`, `col`).
    pub fn set_block(&mut self, row: usize, col: usize, b: &CMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(row + i, col + j)] = b[(i, j)];
            }
        }
    }

    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| self[(row + i, col + j)])
    }

    /// Remove row `r` and column `c`.
    pub fn delete_row_col(&self, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let si = if i >= r { i + 1 } else { i };
            let sj = if j >= c { j + 1 } else { j };
            self[(si, sj)]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_faer(&self) -> faer::Mat<C64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_faer(m: &faer::Mat<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return vec![];
        }
        self.to_faer()
            .singular_values()
            .expect("SVD did not converge")
    }

    /// Operator (spectral) norm: the largest singular value.
    pub fn opnorm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        if self.rows == 0 {
            return vec![];
        }
        self.to_faer()
            .eigenvalues()
            .expect("eigenvalue iteration did not converge")
    }

    /// Eigenvalue and right-eigenvector pairs, sorted by descending real
    /// part (ties by descending imaginary part). Columns are unit vectors
    /// with their largest-magnitude component rotated to be positive real,
    /// which pins down the phase ambiguity.
    pub fn eigen_pairs(&self) -> Result<(Vec<C64>, CMatrix)> {
        assert!(self.is_square(), "eigen_pairs of a non-square matrix");
        let n = self.rows;
        let eig = self
            .to_faer()
            .eigen()
            .map_err(|_| Error::Degenerate)?;
        let u = eig.U();
        let svals: Vec<C64> = eig.S().column_vector().iter().cloned().collect();
        let mut pairs: Vec<(C64, Vec<C64>)> = (0..n)
            .map(|j| {
                let col: Vec<C64> = (0..n).map(|i| u[(i, j)]).collect();
                (svals[j], col)
            })
            .collect();
        pairs.sort_by(|a, b| {
            b.0.re
                .partial_cmp(&a.0.re)
                .unwrap()
                .then(b.0.im.partial_cmp(&a.0.im).unwrap())
        });
        let mut vecs = CMatrix::zeros(n, n);
        for (j, (_, col)) in pairs.iter().enumerate() {
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let lead = col
                .iter()
                .copied()
                .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                .unwrap();
            let phase = if lead.norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                lead.conj() / lead.norm()
            };
            for i in 0..n {
                vecs[(i, j)] = col[i] * phase / norm;
            }
        }
        Ok((pairs.into_iter().map(|(v, _)| v).collect(), vecs))
    }

    /// Largest eigenvalue modulus.
    pub fn spec_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part (a + a*)/2.
    pub fn min_real_eig_hermitian_part(&self) -> f64 {
        assert!(self.is_square());
        if self.rows == 0 {
            return 0.0;
        }
        let h = (self + &self.adjoint()).scale_re(0.5);
        let ev: Vec<f64> = h
            .to_faer()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("Hermitian eigenvalue iteration did not converge");
        ev.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.solve_with_tol(rhs, SINGULAR_REL_TOL)
    }

    /// Solve `self * X = rhs` by partial-pivot LU, rejecting matrices whose
    /// smallest singular value is below `rel_tol * opnorm`.
    pub fn solve_with_tol(&self, rhs: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
        assert!(self.is_square());
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve: lhs is {}x{}, rhs has {} rows",
                self.rows, self.cols, rhs.rows
            )));
        }
        let sv = self.singular_values();
        let (largest, smallest) = (
            sv.first().copied().unwrap_or(0.0),
            sv.last().copied().unwrap_or(0.0),
        );
        let threshold = rel_tol * largest.max(1e-300);
        if smallest <= threshold {
            return Err(Error::Singular {
                smallest_sv: smallest,
                threshold,
            });
        }
        use faer::linalg::solvers::Solve;
        let lu = self.to_faer().partial_piv_lu();
        let x = lu.solve(rhs.to_faer());
        Ok(Self::from_faer(&x))
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.inverse_with_tol(SINGULAR_REL_TOL).map(|inv| inv.matrix)
    }

    pub fn inverse_with_tol(&self, rel_tol: f64) -> Result<Inversion> {
        let inv = self.solve_with_tol(&CMatrix::identity(self.rows), rel_tol)?;
        let sv = self.singular_values();
        let cond = sv[0] / sv[sv.len() - 1];
        Ok(Inversion { matrix: inv, cond })
    }

    /// Operator-norm condition number.
    pub fn cond2(&self) -> Result<f64> {
        assert!(self.is_square());
        let sv = self.singular_values();
        let (largest, smallest) = (sv[0], sv[sv.len() - 1]);
        let threshold = SINGULAR_REL_TOL * largest.max(1e-300);
        if smallest <= threshold {
            return Err(Error::Singular {
                smallest_sv: smallest,
                threshold,
            });
        }
        Ok(largest / smallest)
    }

    pub fn det(&self) -> C64 {
        assert!(self.is_square());
        self.to_faer().as_ref().determinant()
    }
}

/// Inverse plus its estimated condition number.
pub struct Inversion {
    pub matrix: CMatrix,
    pub cond: f64,
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a_ik = self[(i, k)];
                if a_ik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a_ik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl std::ops::Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

// JSON encoding: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        let data: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        s.serialize_field("data", &data)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let data: Vec<C64> = raw.data.iter().map(|p| C64::new(p[0], p[1])).collect();
        CMatrix::new(raw.rows, raw.cols, data).map_err(de::Error::custom)
    }
}

/// Deterministic stream cipher RNG for one top-level seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed; used to give each (level, sample)
/// task its own generator so parallel scans stay reproducible.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed
        .wrapping_add(a.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Ginibre-style random matrix: i.i.d. complex Gaussian entries with
/// variance 1/n.
pub fn ginibre(n: usize, rng: &mut impl Rng) -> CMatrix {
    let sigma = (0.5 / n as f64).sqrt();
    let normal = Normal::new(0.0, sigma).unwrap();
    CMatrix::from_fn(n, n, |_, _| {
        C64::new(normal.sample(rng), normal.sample(rng))
    })
}
