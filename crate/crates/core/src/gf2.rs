//! Bit-packed vectors and matrices over F₂.
//!
//! Coordinate `i` (0-based here, `i + 1` in the usual 1-based notation) of a
//! vector is stored at bit position `i` of a single `u64`, so dimensions are
//! capped at 64. Matrices act on row vectors from the right: `v ↦ v·M`, and row
//! `i` of `M` is the image of the unit vector `eᵢ`.
//!
//! The textual form of a vector is a string of `'0'`/`'1'` with the leftmost
//! character holding coordinate 1. A matrix is one such string per row.

use std::fmt;
use std::ops::{Add, AddAssign, BitXor};
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension {0} outside 1..=64")]
    InvalidDimension(usize),
    #[error("bits set above dimension {dim}")]
    StrayBits { dim: usize },
    #[error("cannot parse {0:?} as a GF(2) row")]
    Parse(String),
}

/// Mask selecting the low `dim` bits.
#[inline]
pub const fn mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

/// `v·M` for a packed row vector and packed matrix rows.
#[inline]
pub fn vec_mat(mut v: u64, rows: &[u64]) -> u64 {
    let mut acc = 0;
    while v != 0 {
        let i = v.trailing_zeros() as usize;
        acc ^= rows[i];
        v &= v - 1;
    }
    acc
}

fn check_dim(dim: usize) -> Result<(), Gf2Error> {
    if dim == 0 || dim > MAX_DIM {
        Err(Gf2Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

fn parse_row(s: &str) -> Result<(usize, u64), Gf2Error> {
    let s = s.trim();
    if s.is_empty() || s.len() > MAX_DIM {
        return Err(Gf2Error::Parse(s.to_string()));
    }
    let mut bits = 0u64;
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << i,
            _ => return Err(Gf2Error::Parse(s.to_string())),
        }
    }
    Ok((s.len(), bits))
}

fn fmt_row(f: &mut fmt::Formatter<'_>, dim: usize, bits: u64) -> fmt::Result {
    for i in 0..dim {
        f.write_str(if bits >> i & 1 == 1 { "1" } else { "0" })?;
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector {
    dim: u8,
    bits: u64,
}

impl Gf2Vector {
    pub fn new(dim: usize, bits: u64) -> Result<Self, Gf2Error> {
        check_dim(dim)?;
        if bits & !mask(dim) != 0 {
            return Err(Gf2Error::StrayBits { dim });
        }
        Ok(Self {
            dim: dim as u8,
            bits,
        })
    }

    /// Builds a vector, silently dropping bits above `dim`.
    ///
    /// # Panics
    /// Panics if `dim` is 0 or above 64.
    pub fn truncated(dim: usize, bits: u64) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "dimension {dim} outside 1..=64"
        );
        Self {
            dim: dim as u8,
            bits: bits & mask(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::truncated(dim, 0)
    }

    /// The unit vector with a one at 0-based coordinate `index`.
    pub fn unit(dim: usize, index: usize) -> Self {
        assert!(index < dim, "unit index {index} out of range for dim {dim}");
        Self::truncated(dim, 1 << index)
    }

    pub fn from_coords(coords: &[u8]) -> Self {
        let bits = coords
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (u64::from(c & 1) << i));
        Self::truncated(coords.len(), bits)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        self.bits >> index & 1 == 1
    }

    pub fn with(mut self, index: usize, value: bool) -> Self {
        assert!(index < self.dim());
        if value {
            self.bits |= 1 << index;
        } else {
            self.bits &= !(1 << index);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn try_add(self, other: Self) -> Result<Self, Gf2Error> {
        if self.dim != other.dim {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            dim: self.dim,
            bits: self.bits ^ other.bits,
        })
    }

    /// `self · m` (row vector times matrix).
    pub fn mul_mat(self, m: &Gf2Matrix) -> Result<Self, Gf2Error> {
        if m.rows() != self.dim() {
            return Err(Gf2Error::DimensionMismatch {
                expected: m.rows(),
                found: self.dim(),
            });
        }
        Ok(Self::truncated(m.cols(), vec_mat(self.bits, m.row_words())))
    }

    /// Iterates over all `2^dim` vectors in counting order.
    ///
    /// # Panics
    /// Panics for `dim > 32`.
    pub fn all(dim: usize) -> impl Iterator<Item = Self> + Clone {
        assert!(dim <= 32, "refusing to iterate 2^{dim} vectors");
        (0..1u64 << dim).map(move |b| Self::truncated(dim, b))
    }
}

impl Add for Gf2Vector {
    type Output = Self;

    /// # Panics
    /// Panics on dimension mismatch; use [`Gf2Vector::try_add`] to recover.
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("vector dimension mismatch")
    }
}

impl BitXor for Gf2Vector {
    type Output = Self;
    fn bitxor(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("vector dimension mismatch")
    }
}

impl AddAssign for Gf2Vector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_row(f, self.dim(), self.bits)
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector({self})")
    }
}

impl FromStr for Gf2Vector {
    type Err = Gf2Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (dim, bits) = parse_row(s)?;
        Self::new(dim, bits)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self, Gf2Error> {
        check_dim(cols)?;
        check_dim(rows.len())?;
        if rows.iter().any(|r| r & !mask(cols) != 0) {
            return Err(Gf2Error::StrayBits { dim: cols });
        }
        Ok(Self { cols, rows })
    }

    pub fn from_vectors(rows: &[Gf2Vector]) -> Result<Self, Gf2Error> {
        let cols = rows
            .first()
            .map(Gf2Vector::dim)
            .ok_or(Gf2Error::InvalidDimension(0))?;
        if let Some(bad) = rows.iter().find(|r| r.dim() != cols) {
            return Err(Gf2Error::DimensionMismatch {
                expected: cols,
                found: bad.dim(),
            });
        }
        Self::from_rows(cols, rows.iter().map(Gf2Vector::bits).collect())
    }

    /// Parses rows written as `'0'`/`'1'` strings.
    pub fn from_strs<S: AsRef<str>>(rows: &[S]) -> Result<Self, Gf2Error> {
        let parsed: Vec<Gf2Vector> = rows.iter().map(|r| r.as_ref().parse()).try_collect()?;
        Self::from_vectors(&parsed)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| 1u64 << i).collect(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![0; rows],
        }
    }

    /// Permutation matrix sending `eᵢ` to `e_{perm[i]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        Self {
            cols: perm.len(),
            rows: perm.iter().map(|&p| 1u64 << p).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Gf2Vector {
        Gf2Vector::truncated(self.cols, self.rows[i])
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        if value {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && self.rows.iter().enumerate().all(|(i, &r)| r == 1 << i)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Matrix product over F₂.
    pub fn mul(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.rows() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows(),
            });
        }
        Ok(Self {
            cols: other.cols,
            rows: self.rows.iter().map(|&r| vec_mat(r, &other.rows)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, Gf2Error> {
        if self.cols != other.cols || self.rows() != other.rows() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows() * 64 + self.cols,
                found: other.rows() * 64 + other.cols,
            });
        }
        Ok(Self {
            cols: self.cols,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![0u64; self.cols];
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, out) in rows.iter_mut().enumerate() {
                *out |= (r >> j & 1) << i;
            }
        }
        Self {
            cols: self.rows(),
            rows,
        }
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.rows)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows()
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<Self, Gf2Error> {
        self.inverse_counting().map(|(inv, _)| inv)
    }

    /// Gauss–Jordan inverse together with the number of row additions performed.
    pub fn inverse_counting(&self) -> Result<(Self, u64), Gf2Error> {
        if !self.is_square() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.rows(),
                found: self.cols,
            });
        }
        let n = self.rows();
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        let mut ops = 0u64;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r] >> col & 1 == 1)
                .ok_or(Gf2Error::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let (pa, pi) = (a[col], inv[col]);
            for r in 0..n {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= pa;
                    inv[r] ^= pi;
                    ops += 1;
                }
            }
        }
        Ok((Self { cols: n, rows: inv }, ops))
    }

    /// `g⁻¹·self·g`.
    pub fn conjugate_by(&self, g: &Self, g_inv: &Self) -> Result<Self, Gf2Error> {
        g_inv.mul(self)?.mul(g)
    }
}

impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            fmt_row(f, self.cols, r)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self
            .rows
            .iter()
            .map(|&r| Gf2Vector::truncated(self.cols, r).to_string());
        write!(f, "Gf2Matrix[{}]", rows.format(" "))
    }
}

impl Gf2Matrix {
    pub fn to_strings(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|&r| Gf2Vector::truncated(self.cols, r).to_string())
            .collect()
    }
}

/// An affine map `x ↦ x·linear + offset`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineMap {
    linear: Gf2Matrix,
    offset: Gf2Vector,
}

impl AffineMap {
    pub fn new(linear: Gf2Matrix, offset: Gf2Vector) -> Result<Self, Gf2Error> {
        if !linear.is_square() || linear.rows() != offset.dim() {
            return Err(Gf2Error::DimensionMismatch {
                expected: linear.rows(),
                found: offset.dim(),
            });
        }
        if !linear.is_invertible() {
            return Err(Gf2Error::SingularMatrix);
        }
        Ok(Self { linear, offset })
    }

    pub(crate) fn new_unchecked(linear: Gf2Matrix, offset: Gf2Vector) -> Self {
        Self { linear, offset }
    }

    pub fn translation(v: Gf2Vector) -> Self {
        Self {
            linear: Gf2Matrix::identity(v.dim()),
            offset: v,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::translation(Gf2Vector::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn linear(&self) -> &Gf2Matrix {
        &self.linear
    }

    pub fn offset(&self) -> Gf2Vector {
        self.offset
    }

    pub fn apply(&self, v: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        Ok(v.mul_mat(&self.linear)? + self.offset)
    }

    #[inline]
    pub fn apply_bits(&self, v: u64) -> u64 {
        vec_mat(v, self.linear.row_words()) ^ self.offset.bits()
    }

    /// Composition in application order: first `self`, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        let linear = self
            .linear
            .mul(&next.linear)
            .expect("affine maps of equal dimension");
        let offset = self
            .offset
            .mul_mat(&next.linear)
            .expect("affine maps of equal dimension")
            + next.offset;
        Self { linear, offset }
    }
}

/// Applies `f` to `v`.
pub fn apply_affine(f: &AffineMap, v: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
    f.apply(v)
}

pub fn mat_mul(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
    a.mul(b)
}

pub fn mat_inverse(a: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
    a.inverse()
}

pub fn rank(a: &Gf2Matrix) -> usize {
    a.rank()
}

pub(crate) fn rank_of_rows(rows: &[u64]) -> usize {
    rref(rows).len()
}

/// Reduced row echelon basis of the span of `rows`.
///
/// The pivot of a row is its lowest set bit (leftmost coordinate); rows come out
/// sorted by pivot and every pivot column is clear in all other rows.
pub fn rref(rows: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            if v >> b.trailing_zeros() & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            let p = v.trailing_zeros();
            for b in basis.iter_mut() {
                if *b >> p & 1 == 1 {
                    *b ^= v;
                }
            }
            basis.push(v);
        }
    }
    basis.sort_by_key(|b| b.trailing_zeros());
    basis
}

/// Reduces `v` modulo the span of an RREF basis.
#[inline]
pub(crate) fn reduce(mut v: u64, rref_basis: &[u64]) -> u64 {
    for &b in rref_basis {
        if v >> b.trailing_zeros() & 1 == 1 {
            v ^= b;
        }
    }
    v
}

/// Basis (RREF) of `{x ∈ F₂^dim : x·A = 0}` where `images[i]` is the image of `eᵢ`,
/// given as a multi-word vector.
pub(crate) fn left_kernel(dim: usize, images: &[Vec<u64>]) -> Vec<u64> {
    // Elimination on rows [image | tag]; tags of rows that reduce to zero span the kernel.
    let mut pivots: Vec<(Vec<u64>, u64)> = Vec::new();
    let mut kernel = Vec::new();
    for (i, img) in images.iter().enumerate().take(dim) {
        let mut v = img.clone();
        let mut tag = 1u64 << i;
        for (p, ptag) in &pivots {
            let (w, bit) = first_bit(p).expect("pivot rows are nonzero");
            if v[w] >> bit & 1 == 1 {
                v.iter_mut().zip(p).for_each(|(a, b)| *a ^= b);
                tag ^= ptag;
            }
        }
        if v.iter().all(|&w| w == 0) {
            kernel.push(tag);
        } else {
            pivots.push((v, tag));
        }
    }
    rref(&kernel)
}

fn first_bit(words: &[u64]) -> Option<(usize, u32)> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| (i, w.trailing_zeros()))
}

/// Number of `d`-dimensional subspaces of `F₂^n`.
pub fn gaussian_binomial(n: usize, d: usize) -> BigUint {
    assert!(d <= n, "gaussian_binomial requires d <= n");
    let two = BigUint::from(2u32);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        num *= two.pow((n - i) as u32) - 1u32;
        den *= two.pow((d - i) as u32) - 1u32;
    }
    num / den
}

/// A `d`-dimensional subspace with an invertible `g` carrying it onto the span of
/// the last `d` unit vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub basis: Vec<Gf2Vector>,
    pub mapper: Gf2Matrix,
    /// `mapper⁻¹`: complement unit vectors followed by the basis rows.
    pub frame: Gf2Matrix,
}

/// Every `d`-dimensional subspace of `F₂^n` exactly once, in reduced row echelon
/// order: pivot sets lexicographically, then free entries in counting order.
pub fn enumerate_subspaces(n: usize, d: usize) -> impl Iterator<Item = Subspace> {
    assert!(
        (1..=n).contains(&d) && n <= 32,
        "enumerate_subspaces needs 1 <= d <= n <= 32"
    );
    (0..n).combinations(d).flat_map(move |pivots| {
        // Free slots: (row, column) with column > pivot of that row and not itself a pivot.
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| {
                ((p + 1)..n)
                    .filter(|c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let complement: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let pivots_c = pivots.clone();
        (0..1u64 << free.len()).map(move |assign| {
            let mut rows: Vec<u64> = pivots_c.iter().map(|&p| 1u64 << p).collect();
            for (k, &(r, c)) in free.iter().enumerate() {
                rows[r] |= (assign >> k & 1) << c;
            }
            let mut frame: Vec<u64> = complement.iter().map(|&c| 1u64 << c).collect();
            frame.extend_from_slice(&rows);
            let frame = Gf2Matrix {
                cols: n,
                rows: frame,
            };
            let mapper = frame.inverse().expect("pivot columns complete a basis");
            Subspace {
                basis: rows.iter().map(|&r| Gf2Vector::truncated(n, r)).collect(),
                mapper,
                frame,
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> Gf2Matrix {
        Gf2Matrix::from_strs(rows).unwrap()
    }

    #[test]
    fn identity_products() {
        let i3 = Gf2Matrix::identity(3);
        assert_eq!(mat_mul(&i3, &i3).unwrap(), i3);
        assert_eq!(mat_inverse(&i3).unwrap(), i3);
        assert_eq!(rank(&i3), 3);
        assert_eq!(rank(&Gf2Matrix::zero(4, 4)), 0);
    }

    #[test]
    fn dim3_kappa_product() {
        let k1 = m(&["100", "011", "001"]);
        let k2 = m(&["101", "010", "001"]);
        assert_eq!(k1.mul(&k2).unwrap(), m(&["101", "011", "001"]));
    }

    #[test]
    fn row_swap_transvection_is_involution() {
        // P adds row i+3 into row i+2 (here i = 1, N = 5).
        let mut p = Gf2Matrix::identity(5);
        p.set(2, 3, true);
        assert!(p.mul(&p).unwrap().is_identity());
        assert_eq!(p.inverse().unwrap(), p);
    }

    #[test]
    fn unitriangular_2x2_is_own_inverse() {
        let a = m(&["11", "01"]);
        assert_eq!(a.inverse().unwrap(), a);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = m(&["110", "011", "101"]);
        assert_eq!(a.rank(), 2);
        assert_eq!(a.inverse(), Err(Gf2Error::SingularMatrix));
    }

    #[test]
    fn mismatched_dimensions() {
        let a = Gf2Matrix::identity(3);
        let b = Gf2Matrix::identity(4);
        assert!(matches!(a.mul(&b), Err(Gf2Error::DimensionMismatch { .. })));
        let v = Gf2Vector::zero(4);
        assert!(v.mul_mat(&a).is_err());
    }

    #[test]
    fn parse_and_display() {
        let v: Gf2Vector = "1011".parse().unwrap();
        assert_eq!(v.bits(), 0b1101);
        assert_eq!(v.to_string(), "1011");
        assert!("10a".parse::<Gf2Vector>().is_err());
        assert!(Gf2Vector::new(3, 0b1000).is_err());
    }

    #[test]
    fn affine_application() {
        // τ₃ of the toy cipher's three-bit hidden sum.
        let tau3 = AffineMap::new(m(&["110", "010", "001"]), "001".parse().unwrap()).unwrap();
        let e1: Gf2Vector = "100".parse().unwrap();
        assert_eq!(apply_affine(&tau3, e1).unwrap().to_string(), "111");
        let tau1 = AffineMap::new(m(&["100", "010", "011"]), e1).unwrap();
        assert_eq!(tau1.apply(Gf2Vector::zero(3)).unwrap(), e1);
    }

    #[test]
    fn affine_composition_order() {
        let a = AffineMap::new(m(&["110", "010", "001"]), "001".parse().unwrap()).unwrap();
        let b = AffineMap::new(m(&["100", "011", "001"]), "010".parse().unwrap()).unwrap();
        for v in Gf2Vector::all(3) {
            let step = b.apply(a.apply(v).unwrap()).unwrap();
            assert_eq!(a.then(&b).apply(v).unwrap(), step);
        }
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(5, 0), BigUint::one());
        assert_eq!(gaussian_binomial(3, 1), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(6, 3), BigUint::from(1395u32));
        assert_eq!(gaussian_binomial(6, 2), BigUint::from(651u32));
        assert_eq!(gaussian_binomial(4, 2), BigUint::from(35u32));
    }

    #[test]
    fn subspace_counts_and_mappers() {
        for n in 1..=6 {
            for d in 1..=n {
                let mut seen = std::collections::HashSet::new();
                let mut count = 0u64;
                for s in enumerate_subspaces(n, d) {
                    count += 1;
                    let bits: Vec<u64> = s.basis.iter().map(|v| v.bits()).collect();
                    assert_eq!(rref(&bits), bits, "basis is already reduced");
                    assert!(seen.insert(bits));
                    assert!(s.mapper.is_invertible());
                    let tail = mask(n) & !mask(n - d);
                    for v in &s.basis {
                        assert_eq!(v.mul_mat(&s.mapper).unwrap().bits() & !tail, 0);
                    }
                }
                assert_eq!(BigUint::from(count), gaussian_binomial(n, d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn full_subspace_maps_by_identity() {
        let all: Vec<_> = enumerate_subspaces(4, 4).collect();
        assert_eq!(all.len(), 1);
        assert!(all[0].mapper.is_identity());
    }

    #[test]
    fn kernel_of_projection() {
        // x ↦ x·A with A killing e₁ + e₂.
        let images = vec![vec![0b01], vec![0b01], vec![0b10]];
        assert_eq!(left_kernel(3, &images), vec![0b011]);
    }
}
