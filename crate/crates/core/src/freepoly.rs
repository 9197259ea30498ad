//! Matrix free polynomials: k-by-k matrices with entries in the free
//! algebra on d letters, stored as finitely supported maps from words to
//! coefficient matrices. Evaluation at a matrix tuple X sends the word w
//! to `kron(A_w, X^w)` (coefficient on the left).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// A word over the alphabet {1, ..., d}; the empty word is the identity
/// monomial. Ordered degree-lexicographically (length first, then letters).
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(j: u8) -> Self {
        Word(vec![j])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn split_at(&self, mid: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(mid);
        (Word(a.to_vec()), Word(b.to_vec()))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            write!(f, "Z{}", l)?;
        }
        Ok(())
    }
}

/// A point of the NC universe: a d-tuple of n-by-n matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixTuple {
    pub d: usize,
    pub level: usize,
    pub matrices: Vec<CMatrix>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::DimensionMismatch("empty tuple".into()));
        }
        let n = matrices[0].rows();
        for m in &matrices {
            if !m.is_square() || m.rows() != n {
                return Err(Error::DimensionMismatch(
                    "tuple entries must be square matrices of equal size".into(),
                ));
            }
        }
        Ok(MatrixTuple {
            d: matrices.len(),
            level: n,
            matrices,
        })
    }

    /// Scalar-level tuple from complex numbers.
    pub fn scalars(values: &[C64]) -> Self {
        MatrixTuple::new(values.iter().map(|&z| CMatrix::scalar(z)).collect()).unwrap()
    }

    pub fn zeros(d: usize, level: usize) -> Self {
        MatrixTuple {
            d,
            level,
            matrices: vec![CMatrix::zeros(level, level); d],
        }
    }

    /// max_j ||X_j||.
    pub fn sup_norm(&self) -> f64 {
        self.matrices.iter().map(|m| m.opnorm()).fold(0.0, f64::max)
    }

    pub fn scale_re(&self, r: f64) -> Self {
        MatrixTuple {
            d: self.d,
            level: self.level,
            matrices: self.matrices.iter().map(|m| m.scale_re(r)).collect(),
        }
    }

    /// Entrywise direct sum (X ⊕ Y)_j = X_j ⊕ Y_j.
    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch("direct_sum: d mismatch".into()));
        }
        MatrixTuple::new(
            self.matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a.direct_sum(b))
                .collect(),
        )
    }

    /// Joint conjugation (S^{-1} X_1 S, ..., S^{-1} X_d S).
    pub fn conjugate(&self, s: &CMatrix) -> Result<Self> {
        let s_inv = s.inverse()?;
        MatrixTuple::new(
            self.matrices
                .iter()
                .map(|m| &(&s_inv * m) * s)
                .collect(),
        )
    }

    /// X^w = X_{w_1} ... X_{w_l}; the empty word gives I_n.
    pub fn word_eval(&self, w: &Word) -> CMatrix {
        let mut acc = CMatrix::identity(self.level);
        for &l in &w.0 {
            acc = &acc * &self.matrices[(l - 1) as usize];
        }
        acc
    }
}

impl<'de> Deserialize<'de> for MatrixTuple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            matrices: Vec<CMatrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        MatrixTuple::new(raw.matrices).map_err(de::Error::custom)
    }
}

/// An element of M_k(C<Z_1, ..., Z_d>).
#[derive(Clone, PartialEq)]
pub struct MatPoly {
    pub d: usize,
    pub k: usize,
    coeffs: BTreeMap<Word, CMatrix>,
}

impl std::fmt::Debug for MatPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MatPoly(d={}, k={}) {{ ", self.d, self.k)?;
        for (w, c) in &self.coeffs {
            write!(f, "{:?}: {:?}, ", w, c)?;
        }
        write!(f, "}}")
    }
}

impl MatPoly {
    pub fn zero(d: usize, k: usize) -> Self {
        MatPoly {
            d,
            k,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(d: usize, k: usize) -> Self {
        Self::constant(d, CMatrix::identity(k))
    }

    pub fn constant(d: usize, c: CMatrix) -> Self {
        assert!(c.is_square());
        let k = c.rows();
        let mut p = Self::zero(d, k);
        p.add_term(Word::empty(), c);
        p
    }

    /// The scalar polynomial Z_j (k = 1).
    pub fn variable(d: usize, j: u8) -> Self {
        assert!(1 <= j && (j as usize) <= d);
        let mut p = Self::zero(d, 1);
        p.add_term(Word::letter(j), CMatrix::identity(1));
        p
    }

    pub fn scalar_term(d: usize, word: Word, z: C64) -> Self {
        let mut p = Self::zero(d, 1);
        p.add_term(word, CMatrix::scalar(z));
        p
    }

    /// Accumulate `c` onto the coefficient of `word`, pruning exact zeros.
    pub fn add_term(&mut self, word: Word, c: CMatrix) {
        assert_eq!(c.rows(), self.k);
        assert_eq!(c.cols(), self.k);
        assert!(word.0.iter().all(|&l| 1 <= l && (l as usize) <= self.d));
        let entry = self
            .coeffs
            .entry(word.clone())
            .or_insert_with(|| CMatrix::zeros(self.k, self.k));
        *entry = &*entry + &c;
        if entry.max_abs() == 0.0 {
            self.coeffs.remove(&word);
        }
    }

    pub fn coeff(&self, word: &Word) -> CMatrix {
        self.coeffs
            .get(word)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.k, self.k))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CMatrix)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> CMatrix {
        self.coeff(&Word::empty())
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut p = Self::zero(self.d, self.k);
        for (w, c) in &self.coeffs {
            p.add_term(w.clone(), c.scale(z));
        }
        p
    }

    /// Entrywise adjoint of every coefficient (no reversal of words); handy
    /// for building structured test polynomials.
    pub fn adjoint_coeffs(&self) -> Self {
        let mut p = Self::zero(self.d, self.k);
        for (w, c) in &self.coeffs {
            p.add_term(w.clone(), c.adjoint());
        }
        p
    }

    pub fn add(&self, other: &MatPoly) -> MatPoly {
        assert_eq!(self.d, other.d);
        assert_eq!(self.k, other.k);
        let mut p = self.clone();
        for (w, c) in &other.coeffs {
            p.add_term(w.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &MatPoly) -> MatPoly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Convolution product over words with matrix coefficient products.
    pub fn mul(&self, other: &MatPoly) -> MatPoly {
        assert_eq!(self.d, other.d);
        assert_eq!(self.k, other.k);
        let mut p = Self::zero(self.d, self.k);
        for (w1, c1) in &self.coeffs {
            for (w2, c2) in &other.coeffs {
                p.add_term(w1.concat(w2), c1 * c2);
            }
        }
        p
    }

    /// Coefficient of word w scaled by r^{|w|}, so that
    /// eval(dilate(p, r), x) = eval(p, r x) exactly.
    pub fn dilate(&self, r: f64) -> MatPoly {
        let mut p = Self::zero(self.d, self.k);
        for (w, c) in &self.coeffs {
            p.add_term(w.clone(), c.scale_re(r.powi(w.len() as i32)));
        }
        p
    }

    /// Grading by word length; the returned list has length degree + 1 and
    /// sums back to the polynomial.
    pub fn homogeneous_parts(&self) -> Vec<MatPoly> {
        let deg = self.degree();
        let mut parts = vec![Self::zero(self.d, self.k); deg + 1];
        for (w, c) in &self.coeffs {
            parts[w.len()].add_term(w.clone(), c.clone());
        }
        parts
    }

    /// Sigma_w kron(A_w, X^w), a kn-by-kn matrix.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        if self.d != x.d {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables evaluated at a {}-tuple",
                self.d, x.d
            )));
        }
        let kn = self.k * x.level;
        let mut acc = CMatrix::zeros(kn, kn);
        for (w, c) in &self.coeffs {
            acc = &acc + &c.kron(&x.word_eval(w));
        }
        Ok(acc)
    }

    /// Embed into the top-left corner of a size-(k + pad) matrix polynomial
    /// whose remaining diagonal is the identity: diag(p, I_pad).
    pub fn pad_diag(&self, pad: usize) -> MatPoly {
        let k = self.k + pad;
        let mut p = MatPoly::zero(self.d, k);
        for (w, c) in &self.coeffs {
            let mut big = CMatrix::zeros(k, k);
            big.set_block(0, 0, c);
            p.add_term(w.clone(), big);
        }
        let mut tail = CMatrix::zeros(k, k);
        for i in self.k..k {
            tail[(i, i)] = C64::new(1.0, 0.0);
        }
        if pad > 0 {
            p.add_term(Word::empty(), tail);
        }
        p
    }

    /// The scalar polynomial sitting at entry (i, j).
    pub fn entry(&self, i: usize, j: usize) -> MatPoly {
        let mut p = MatPoly::zero(self.d, 1);
        for (w, c) in &self.coeffs {
            p.add_term(w.clone(), CMatrix::scalar(c[(i, j)]));
        }
        p
    }

    /// Assemble a k-by-k matrix polynomial from scalar entries (row-major).
    pub fn from_entries(d: usize, k: usize, entries: &[MatPoly]) -> MatPoly {
        assert_eq!(entries.len(), k * k);
        let mut p = MatPoly::zero(d, k);
        for i in 0..k {
            for j in 0..k {
                let e = &entries[i * k + j];
                assert_eq!(e.k, 1);
                for (w, c) in &e.coeffs {
                    let mut big = CMatrix::zeros(k, k);
                    big[(i, j)] = c[(0, 0)];
                    p.add_term(w.clone(), big);
                }
            }
        }
        p
    }

    /// Largest degree-lexicographic word of degree >= 2 together with one
    /// entry position where it appears.
    pub fn max_word_deg2(&self) -> Option<(Word, usize, usize)> {
        let (w, c) = self.coeffs.iter().filter(|(w, _)| w.len() >= 2).next_back()?;
        for i in 0..self.k {
            for j in 0..self.k {
                if c[(i, j)].norm() != 0.0 {
                    return Some((w.clone(), i, j));
                }
            }
        }
        None
    }

    pub fn max_coeff_abs_diff(&self, other: &MatPoly) -> f64 {
        let mut worst = 0.0_f64;
        let words: std::collections::BTreeSet<&Word> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        for w in words {
            worst = worst.max(self.coeff(w).max_abs_diff(&other.coeff(w)));
        }
        worst
    }
}

// JSON: {"d": d, "k": k, "terms": [{"word": [..], "coeff": <CMatrix>}]}.
// Scalar coefficients may be given as a bare [re, im] pair.
impl Serialize for MatPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            word: &'a [u8],
            coeff: &'a CMatrix,
        }
        let terms: Vec<Term> = self
            .coeffs
            .iter()
            .map(|(w, c)| Term {
                word: &w.0,
                coeff: c,
            })
            .collect();
        let mut s = serializer.serialize_struct("MatPoly", 3)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("k", &self.k)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for MatPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coeff {
            Matrix(CMatrix),
            Scalar([f64; 2]),
        }
        #[derive(Deserialize)]
        struct Term {
            word: Vec<u8>,
            coeff: Coeff,
        }
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            k: usize,
            terms: Vec<Term>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut p = MatPoly::zero(raw.d, raw.k);
        for t in raw.terms {
            let c = match t.coeff {
                Coeff::Matrix(m) => m,
                Coeff::Scalar([re, im]) => {
                    if raw.k != 1 {
                        return Err(de::Error::custom(
                            "bare complex coefficient only allowed when k = 1",
                        ));
                    }
                    CMatrix::scalar(C64::new(re, im))
                }
            };
            if c.rows() != raw.k || c.cols() != raw.k {
                return Err(de::Error::custom("coefficient size does not match k"));
            }
            for &l in &t.word {
                if l == 0 || l as usize > raw.d {
                    return Err(de::Error::custom("word letter out of range"));
                }
            }
            p.add_term(Word(t.word), c);
        }
        Ok(p)
    }
}

/// 1 - ZW/2 - WZ/2, the linearization running example (d = 2, k = 1).
pub fn example_symmetrized_product() -> MatPoly {
    let mut p = MatPoly::zero(2, 1);
    p.add_term(Word::empty(), CMatrix::scalar(C64::new(1.0, 0.0)));
    p.add_term(Word(vec![1, 2]), CMatrix::scalar(C64::new(-0.5, 0.0)));
    p.add_term(Word(vec![2, 1]), CMatrix::scalar(C64::new(-0.5, 0.0)));
    p
}

/// 1 - 2Z/3 - 2W/3 + ZW/3 (d = 2, k = 1).
pub fn example_boundary_zero() -> MatPoly {
    let mut p = MatPoly::zero(2, 1);
    p.add_term(Word::empty(), CMatrix::scalar(C64::new(1.0, 0.0)));
    // the ZW coefficient is written as 2 (2/3) - 1 so that the term sum
    // at the boundary zero (1, 1) cancels to exactly 0.0 in evaluation order
    let a = 2.0 / 3.0;
    p.add_term(Word(vec![1]), CMatrix::scalar(C64::new(-a, 0.0)));
    p.add_term(Word(vec![2]), CMatrix::scalar(C64::new(-a, 0.0)));
    p.add_term(Word(vec![1, 2]), CMatrix::scalar(C64::new(2.0 * a - 1.0, 0.0)));
    p
}
