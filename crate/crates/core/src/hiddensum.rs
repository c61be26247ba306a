//! Hidden-sum groups `T∘ = {τ_a}` and the alternative sum `x ∘ a = x τ_a`.
//!
//! Three representations are used:
//!
//! * [`GeneratedGroup`]: an arbitrary list of affine generators, validated by
//!   explicit closure.
//! * [`StandardHiddenSum`]: block normal form, every `κ_a = [[Iₙ, B_a],[0, I_d]]`
//!   with `U(T) = span{e_{n+1},…,e_N}`. Only the free rows
//!   `b_i^{(s)}` (`s < i`) of the blocks are stored.
//! * [`EmbeddedHiddenSum`]: a standard form plus a conjugator `g` with
//!   `g⁻¹Tg` standard.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Standardized};
use crate::gf2::{
    left_kernel, mask, rref, vec_mat, AffineMap, Gf2Error, Gf2Matrix, Gf2Vector, MAX_DIM,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HiddenSumError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("closure exceeded {limit} elements")]
    ClosureOverflow { limit: usize },
    #[error("unitriangular form is not normalized by the translations (blocks outside [[I, B], [0, I]])")]
    NotNormalized,
    #[error("invalid standard form: {0}")]
    InvalidShape(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

/// Operations shared by every concrete hidden-sum representation, on packed vectors.
pub trait HiddenSum {
    fn dim(&self) -> usize;

    /// `x ∘ y`.
    fn circ_bits(&self, x: u64, y: u64) -> u64;

    /// Coefficients of `v` in the ∘-basis of this sum.
    fn coordinates_bits(&self, v: u64) -> u64;

    /// The vector with the given ∘-coefficients.
    fn combine_bits(&self, coeffs: u64) -> u64;

    fn circ(&self, x: Gf2Vector, y: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(x)?;
        self.check(y)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.circ_bits(x.bits(), y.bits()),
        ))
    }

    fn coords(&self, v: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(v)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.coordinates_bits(v.bits()),
        ))
    }

    fn combine(&self, coeffs: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(coeffs)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.combine_bits(coeffs.bits()),
        ))
    }

    /// The `i`-th ∘-basis vector.
    fn basis_vector(&self, i: usize) -> Gf2Vector {
        Gf2Vector::truncated(self.dim(), self.combine_bits(1 << i))
    }

    fn check(&self, v: Gf2Vector) -> Result<(), Gf2Error> {
        if v.dim() == self.dim() {
            Ok(())
        } else {
            Err(Gf2Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            })
        }
    }
}

#[inline]
fn pair_index(n: usize, s: usize, i: usize) -> usize {
    debug_assert!(s < i && i < n);
    s * n - s * (s + 1) / 2 + (i - s - 1)
}

/// True iff no non-empty subset of the blocks sums to zero.
///
/// Blocks are `n×d` packed row-major into `u128` (row `i` at bits `i·d`); the
/// check walks all `2ⁿ − 1` subsets in Gray-code order.
pub(crate) fn blocks_nondegenerate_gray(blocks: &[u128]) -> bool {
    let n = blocks.len();
    let mut acc = 0u128;
    for k in 1u64..(1u64 << n) {
        acc ^= blocks[k.trailing_zeros() as usize];
        if acc == 0 {
            return false;
        }
    }
    true
}

/// Hidden sum in block normal form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StandardHiddenSum {
    head: usize,
    tail: usize,
    pairs: Vec<u64>,
}

impl StandardHiddenSum {
    /// `head = n`, `tail = d`, `pairs` the free rows `b_i^{(s)}` for `s < i` in the
    /// order `b_2^{(1)}, …, b_n^{(1)}, b_3^{(2)}, …, b_n^{(n−1)}`, each a `d`-bit row.
    pub fn new(head: usize, tail: usize, pairs: Vec<u64>) -> Result<Self, HiddenSumError> {
        let s = Self::new_unchecked(head, tail, pairs);
        s.check_shape()?;
        if !s.is_nondegenerate() {
            return Err(HiddenSumError::InvalidShape(
                "a non-empty sum of blocks vanishes".into(),
            ));
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(head: usize, tail: usize, pairs: Vec<u64>) -> Self {
        Self { head, tail, pairs }
    }

    /// The ordinary translation group `T₊` (`d = N`).
    pub fn translations(dim: usize) -> Self {
        Self::new_unchecked(0, dim, Vec::new())
    }

    fn check_shape(&self) -> Result<(), HiddenSumError> {
        let (n, d) = (self.head, self.tail);
        let dim = n + d;
        if d == 0 || dim > MAX_DIM {
            return Err(HiddenSumError::InvalidShape(format!(
                "need 1 <= d and N <= 64, got n={n} d={d}"
            )));
        }
        if n == 1 {
            return Err(HiddenSumError::InvalidShape(
                "dim U = N - 1 is impossible".into(),
            ));
        }
        if self.pairs.len() != n * n.saturating_sub(1) / 2 {
            return Err(HiddenSumError::InvalidShape(format!(
                "expected {} block rows, found {}",
                n * n.saturating_sub(1) / 2,
                self.pairs.len()
            )));
        }
        if self.pairs.iter().any(|&p| p & !mask(d) != 0) {
            return Err(HiddenSumError::InvalidShape(
                "block row wider than d".into(),
            ));
        }
        Ok(())
    }

    /// Builds the form from full blocks `B_{e₁},…,B_{eₙ}` (each `n×d`), checking
    /// the zero diagonal, the symmetry `row s of B_i = row i of B_s`, and
    /// non-degeneracy.
    pub fn from_blocks(
        head: usize,
        tail: usize,
        blocks: &[Gf2Matrix],
    ) -> Result<Self, HiddenSumError> {
        if blocks.len() != head || blocks.iter().any(|b| b.rows() != head || b.cols() != tail) {
            return Err(HiddenSumError::InvalidShape(format!(
                "expected {head} blocks of shape {head}x{tail}"
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.row_words()[i] != 0 {
                return Err(HiddenSumError::InvalidShape(format!(
                    "row {} of B_e{} must vanish",
                    i + 1,
                    i + 1
                )));
            }
            for (s, other) in blocks.iter().enumerate() {
                if b.row_words()[s] != other.row_words()[i] {
                    return Err(HiddenSumError::InvalidShape(format!(
                        "row {} of B_e{} differs from row {} of B_e{}",
                        s + 1,
                        i + 1,
                        i + 1,
                        s + 1
                    )));
                }
            }
        }
        let mut pairs = Vec::with_capacity(head * head.saturating_sub(1) / 2);
        for (s, block) in blocks.iter().enumerate() {
            pairs.extend_from_slice(&block.row_words()[s + 1..head]);
        }
        Self::new(head, tail, pairs)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.head + self.tail
    }

    /// `n = N − dim U`.
    #[inline]
    pub fn head(&self) -> usize {
        self.head
    }

    /// `d = dim U`.
    #[inline]
    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn pairs(&self) -> &[u64] {
        &self.pairs
    }

    pub fn is_translations(&self) -> bool {
        self.head == 0
    }

    /// Row `i` of `B_{e_s}` (0-based), `d` bits.
    #[inline]
    pub fn block_row(&self, s: usize, i: usize) -> u64 {
        match s.cmp(&i) {
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => self.pairs[pair_index(self.head, s, i)],
            std::cmp::Ordering::Greater => self.pairs[pair_index(self.head, i, s)],
        }
    }

    /// `B_{e_s}` (0-based `s < n`) as an `n×d` matrix.
    pub fn block(&self, s: usize) -> Gf2Matrix {
        let rows = (0..self.head).map(|i| self.block_row(s, i)).collect();
        Gf2Matrix::from_rows(self.tail, rows).expect("block fits")
    }

    fn packed_blocks(&self) -> Vec<u128> {
        (0..self.head)
            .map(|s| {
                (0..self.head).fold(0u128, |acc, i| {
                    acc | (u128::from(self.block_row(s, i)) << (i * self.tail))
                })
            })
            .collect()
    }

    /// No non-empty `∑_{s∈S} B_{e_s}` vanishes.
    pub fn is_nondegenerate(&self) -> bool {
        let (n, d) = (self.head, self.tail);
        if n == 0 {
            return true;
        }
        if n * d <= 128 && n <= 20 {
            return blocks_nondegenerate_gray(&self.packed_blocks());
        }
        let words = (n * d).div_ceil(64);
        let images: Vec<Vec<u64>> = (0..n)
            .map(|s| {
                let mut w = vec![0u64; words];
                for i in 0..n {
                    let row = self.block_row(s, i);
                    for j in 0..d {
                        if row >> j & 1 == 1 {
                            let pos = i * d + j;
                            w[pos / 64] |= 1 << (pos % 64);
                        }
                    }
                }
                w
            })
            .collect();
        left_kernel(n, &images).is_empty()
    }

    /// `∑ aᵢ B_{eᵢ}` row by row, from the first `n` plain coordinates of `a`.
    fn block_sum(&self, a: u64) -> Vec<u64> {
        let mut rows = vec![0u64; self.head];
        let mut sel = a & mask(self.head);
        while sel != 0 {
            let s = sel.trailing_zeros() as usize;
            for (i, r) in rows.iter_mut().enumerate() {
                *r ^= self.block_row(s, i);
            }
            sel &= sel - 1;
        }
        rows
    }

    /// `x·y`: head of `x` times the block sum of `y`, landing in the tail.
    #[inline]
    pub fn product_bits(&self, x: u64, y: u64) -> u64 {
        let n = self.head;
        let mut acc = 0u64;
        let mut xs = x & mask(n);
        let ys = y & mask(n);
        while xs != 0 {
            let i = xs.trailing_zeros() as usize;
            let mut yy = ys;
            while yy != 0 {
                let s = yy.trailing_zeros() as usize;
                acc ^= self.block_row(s, i);
                yy &= yy - 1;
            }
            xs &= xs - 1;
        }
        acc << n
    }

    /// `κ_a = [[Iₙ, ∑ aᵢB_{eᵢ}],[0, I_d]]`.
    pub fn kappa_of(&self, a: Gf2Vector) -> Result<Gf2Matrix, Gf2Error> {
        self.check(a)?;
        let n = self.head;
        let sum = self.block_sum(a.bits());
        let rows = (0..self.dim())
            .map(|j| (1u64 << j) | if j < n { sum[j] << n } else { 0 })
            .collect();
        Gf2Matrix::from_rows(self.dim(), rows)
    }

    /// `x ↦ x τ_{eᵢ} = x κ_{eᵢ} + eᵢ`.
    #[inline]
    fn apply_unit_translation(&self, x: u64, i: usize) -> u64 {
        let n = self.head;
        let mut y = x ^ (1 << i);
        if i < n {
            let mut head = x & mask(n);
            while head != 0 {
                let j = head.trailing_zeros() as usize;
                y ^= self.block_row(i, j) << n;
                head &= head - 1;
            }
        }
        y
    }

    pub fn circ_add(&self, x: Gf2Vector, y: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        HiddenSum::circ(self, x, y)
    }

    /// Coefficients `λ` with `v = λ₁e₁ ∘ … ∘ λ_N e_N`: copy the first `n`
    /// coordinates, push `v` through `τ_{e₁}^{λ₁}⋯τ_{eₙ}^{λₙ}`, read the tail.
    pub fn coordinates(&self, v: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        HiddenSum::coords(self, v)
    }

    /// `x·y = x κ_y + x`.
    pub fn algebra_product(&self, x: Gf2Vector, y: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(x)?;
        self.check(y)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.product_bits(x.bits(), y.bits()),
        ))
    }

    /// `U(T)`: always the last `d` unit vectors.
    pub fn u_space(&self) -> Vec<Gf2Vector> {
        (self.head..self.dim())
            .map(|i| Gf2Vector::unit(self.dim(), i))
            .collect()
    }

    /// Translations normalising `T∘`; the block shape makes this all of `V`.
    pub fn weak_keys(&self) -> Vec<Gf2Vector> {
        (0..self.dim())
            .map(|i| Gf2Vector::unit(self.dim(), i))
            .collect()
    }

    /// Always true: the block shape is exactly the normalisation criterion.
    pub fn normalized_by_translations(&self) -> bool {
        true
    }

    pub fn to_algebra(&self) -> Algebra {
        let n = self.dim();
        let mut table = vec![0u64; n * n];
        for i in 0..self.head {
            for s in 0..self.head {
                table[i * n + s] = self.block_row(s, i) << self.head;
            }
        }
        Algebra::from_table_unchecked(n, table)
    }

    pub fn to_generated(&self) -> GeneratedGroup {
        GeneratedGroup::from_algebra(&self.to_algebra())
    }

    /// The free vector `B` as one integer, `b_2^{(1)}` in the low bits.
    pub fn free_bits(&self) -> u128 {
        self.pairs.iter().enumerate().fold(0u128, |acc, (k, &p)| {
            acc | (u128::from(p) << (k * self.tail))
        })
    }

    pub fn to_document(&self) -> GroupDocument {
        GroupDocument::from_parts(self, None)
    }

    pub fn to_toml(&self) -> String {
        self.to_document().to_toml()
    }
}

impl HiddenSum for StandardHiddenSum {
    fn dim(&self) -> usize {
        self.head + self.tail
    }

    #[inline]
    fn circ_bits(&self, x: u64, y: u64) -> u64 {
        x ^ y ^ self.product_bits(x, y)
    }

    fn coordinates_bits(&self, v: u64) -> u64 {
        let n = self.head;
        let head = v & mask(n);
        let mut x = v;
        let mut sel = head;
        while sel != 0 {
            let i = sel.trailing_zeros() as usize;
            x = self.apply_unit_translation(x, i);
            sel &= sel - 1;
        }
        debug_assert_eq!(x & mask(n), 0);
        head | (x & !mask(n))
    }

    fn combine_bits(&self, coeffs: u64) -> u64 {
        let mut x = 0u64;
        let mut sel = coeffs;
        while sel != 0 {
            let i = sel.trailing_zeros() as usize;
            x = self.apply_unit_translation(x, i);
            sel &= sel - 1;
        }
        x
    }
}

/// A group `T` with `g⁻¹Tg` in block normal form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmbeddedHiddenSum {
    std: StandardHiddenSum,
    g: Gf2Matrix,
    g_inv: Gf2Matrix,
}

impl EmbeddedHiddenSum {
    pub fn new(std: StandardHiddenSum, g: Gf2Matrix) -> Result<Self, HiddenSumError> {
        if !g.is_square() || g.rows() != std.dim() {
            return Err(Gf2Error::DimensionMismatch {
                expected: std.dim(),
                found: g.rows(),
            }
            .into());
        }
        let g_inv = g.inverse()?;
        Ok(Self { std, g, g_inv })
    }

    pub(crate) fn from_parts_unchecked(
        std: StandardHiddenSum,
        g: Gf2Matrix,
        g_inv: Gf2Matrix,
    ) -> Self {
        Self { std, g, g_inv }
    }

    pub fn standard(std: StandardHiddenSum) -> Self {
        let g = Gf2Matrix::identity(std.dim());
        Self {
            std,
            g_inv: g.clone(),
            g,
        }
    }

    pub fn std(&self) -> &StandardHiddenSum {
        &self.std
    }

    pub fn g(&self) -> &Gf2Matrix {
        &self.g
    }

    pub fn g_inv(&self) -> &Gf2Matrix {
        &self.g_inv
    }

    pub fn dim(&self) -> usize {
        self.std.dim()
    }

    /// Coordinates of `v·g` in the standard form.
    pub fn coordinates_embedded(&self, v: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        HiddenSum::coords(self, v)
    }

    /// `vᵢ = eᵢ g⁻¹`, the ∘-basis of `T`.
    pub fn basis(&self) -> Vec<Gf2Vector> {
        (0..self.dim()).map(|i| self.g_inv.row(i)).collect()
    }

    /// `0 τ_{v₁}^{λ₁} ⋯ τ_{v_N}^{λ_N}`, applying the maps of `T` one at a time.
    pub fn combine_via_translations(&self, coeffs: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(coeffs)?;
        let basis = self.g_inv.row_words();
        let mut x = 0u64;
        let mut sel = coeffs.bits();
        while sel != 0 {
            let i = sel.trailing_zeros() as usize;
            x = self.circ_bits(x, basis[i]);
            sel &= sel - 1;
        }
        Ok(Gf2Vector::truncated(self.dim(), x))
    }

    /// Structure constants of `T = g·std·g⁻¹`.
    pub fn algebra(&self) -> Algebra {
        self.std.to_algebra().conjugate(&self.g_inv, &self.g)
    }

    /// `x·y` in the algebra of `T`.
    pub fn algebra_product(&self, x: Gf2Vector, y: Gf2Vector) -> Result<Gf2Vector, Gf2Error> {
        self.check(x)?;
        self.check(y)?;
        let gw = self.g.row_words();
        let p = self
            .std
            .product_bits(vec_mat(x.bits(), gw), vec_mat(y.bits(), gw));
        Ok(Gf2Vector::truncated(
            self.dim(),
            vec_mat(p, self.g_inv.row_words()),
        ))
    }

    /// `U(T) = U(std)·g⁻¹`, as an RREF basis.
    pub fn u_space(&self) -> Vec<Gf2Vector> {
        let rows: Vec<u64> = (self.std.head()..self.dim())
            .map(|i| self.g_inv.row_words()[i])
            .collect();
        rref(&rows)
            .into_iter()
            .map(|r| Gf2Vector::truncated(self.dim(), r))
            .collect()
    }

    pub fn to_generated(&self) -> GeneratedGroup {
        GeneratedGroup::from_algebra(&self.algebra())
    }

    pub fn to_document(&self) -> GroupDocument {
        GroupDocument::from_parts(&self.std, Some(&self.g))
    }

    pub fn to_toml(&self) -> String {
        self.to_document().to_toml()
    }

    pub fn from_toml(text: &str) -> Result<Self, HiddenSumError> {
        GroupDocument::from_toml(text)?.into_embedded()
    }
}

impl HiddenSum for EmbeddedHiddenSum {
    fn dim(&self) -> usize {
        self.std.dim()
    }

    fn circ_bits(&self, x: u64, y: u64) -> u64 {
        let gw = self.g.row_words();
        let z = self.std.circ_bits(vec_mat(x, gw), vec_mat(y, gw));
        vec_mat(z, self.g_inv.row_words())
    }

    fn coordinates_bits(&self, v: u64) -> u64 {
        self.std.coordinates_bits(vec_mat(v, self.g.row_words()))
    }

    fn combine_bits(&self, coeffs: u64) -> u64 {
        vec_mat(self.std.combine_bits(coeffs), self.g_inv.row_words())
    }
}

/// Outcome of [`GeneratedGroup::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Generator (0-based) whose square is not the identity.
    GeneratorOrder(usize),
    NonCommuting(usize, usize),
    /// Some element of the closure has order above two.
    ElementOrder,
    /// Size of the orbit of `0`.
    Intransitive {
        orbit: usize,
    },
    /// Size of the group.
    WrongOrder {
        order: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::GeneratorOrder(i) => write!(f, "generator {} has order > 2", i + 1),
            Violation::NonCommuting(i, j) => {
                write!(f, "generators {} and {} do not commute", i + 1, j + 1)
            }
            Violation::ElementOrder => write!(f, "an element has order > 2"),
            Violation::Intransitive { orbit } => {
                write!(f, "not transitive: orbit of 0 has {orbit} points")
            }
            Violation::WrongOrder { order } => write!(f, "group has {order} elements"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub order: usize,
    pub violation: Option<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// A subgroup of `AGL(V,+)` given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedGroup {
    dim: usize,
    generators: Vec<AffineMap>,
}

impl GeneratedGroup {
    pub fn new(generators: Vec<AffineMap>) -> Result<Self, HiddenSumError> {
        let dim = generators
            .first()
            .map(AffineMap::dim)
            .ok_or_else(|| HiddenSumError::InvalidGroup("no generators".into()))?;
        if let Some(bad) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Gf2Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            }
            .into());
        }
        Ok(Self { dim, generators })
    }

    /// Generators `τ_b` of the group attached to `algebra`, for `b` running
    /// over [`Algebra::circ_basis`].
    pub fn from_algebra(algebra: &Algebra) -> Self {
        let dim = algebra.dim();
        let generators = algebra
            .circ_basis()
            .into_iter()
            .map(|b| {
                let e = Gf2Vector::truncated(dim, b);
                AffineMap::new_unchecked(algebra.kappa(e), e)
            })
            .collect();
        Self { dim, generators }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[AffineMap] {
        &self.generators
    }

    pub fn closure_limit(&self) -> usize {
        1usize << (self.dim + 2).min(usize::BITS as usize - 1)
    }

    /// All elements of the generated group, breadth first from the identity.
    pub fn closure(&self) -> Result<Vec<AffineMap>, HiddenSumError> {
        let limit = self.closure_limit();
        let id = AffineMap::identity(self.dim);
        let mut seen: HashSet<AffineMap> = HashSet::from([id.clone()]);
        let mut order = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &self.generators {
                let y = x.then(g);
                if seen.insert(y.clone()) {
                    if seen.len() > limit {
                        return Err(HiddenSumError::ClosureOverflow { limit });
                    }
                    order.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(order)
    }

    /// Checks that the generated group is elementary abelian and regular on `V`.
    ///
    /// Generator orders and pairwise commutation are checked before the closure
    /// is built, so a non-abelian generator set is reported as such rather than
    /// as a closure overflow.
    pub fn validate(&self) -> Result<Validation, HiddenSumError> {
        if self.dim > 16 {
            return Err(HiddenSumError::InvalidGroup(format!(
                "closure check needs N <= 16, got {}",
                self.dim
            )));
        }
        let invalid = |v| {
            Ok(Validation {
                order: 0,
                violation: Some(v),
            })
        };
        let id = AffineMap::identity(self.dim);
        for (i, g) in self.generators.iter().enumerate() {
            if g.then(g) != id {
                return invalid(Violation::GeneratorOrder(i));
            }
        }
        for (i, a) in self.generators.iter().enumerate() {
            for (j, b) in self.generators.iter().enumerate().skip(i + 1) {
                if a.then(b) != b.then(a) {
                    return invalid(Violation::NonCommuting(i, j));
                }
            }
        }
        let elements = self.closure()?;
        let order = elements.len();
        let violation = if elements.iter().any(|x| x.then(x) != id) {
            Some(Violation::ElementOrder)
        } else {
            let orbit: HashSet<u64> = elements.iter().map(|x| x.offset().bits()).collect();
            if orbit.len() != 1 << self.dim {
                Some(Violation::Intransitive { orbit: orbit.len() })
            } else if order != 1 << self.dim {
                Some(Violation::WrongOrder { order })
            } else {
                None
            }
        };
        Ok(Validation { order, violation })
    }

    pub fn is_elementary_abelian_regular(&self) -> Result<bool, HiddenSumError> {
        Ok(self.validate()?.is_valid())
    }

    fn require_valid(&self) -> Result<Vec<AffineMap>, HiddenSumError> {
        let v = self.validate()?;
        match v.violation {
            Some(reason) => Err(HiddenSumError::InvalidGroup(reason.to_string())),
            None => self.closure(),
        }
    }

    /// `κ_a` for every `a`, indexed by the packed value of `a`.
    pub fn kappa_table(&self) -> Result<Vec<Gf2Matrix>, HiddenSumError> {
        let elements = self.require_valid()?;
        let mut table = vec![Gf2Matrix::identity(self.dim); 1 << self.dim];
        for x in elements {
            table[x.offset().bits() as usize] = x.linear().clone();
        }
        Ok(table)
    }

    /// Structure constants of the validated group.
    pub fn algebra(&self) -> Result<Algebra, HiddenSumError> {
        let table = self.kappa_table()?;
        let kappas: Vec<Gf2Matrix> = (0..self.dim).map(|i| table[1 << i].clone()).collect();
        Ok(Algebra::from_basis_kappas(&kappas)?)
    }

    /// `U(T) = {a : σ_a ∈ T}`, RREF basis read off the closure.
    pub fn u_space(&self) -> Result<Vec<Gf2Vector>, HiddenSumError> {
        let elements = self.require_valid()?;
        let offsets: Vec<u64> = elements
            .iter()
            .filter(|x| x.linear().is_identity())
            .map(|x| x.offset().bits())
            .collect();
        Ok(rref(&offsets)
            .into_iter()
            .map(|r| Gf2Vector::truncated(self.dim, r))
            .collect())
    }

    /// `g⁻¹Tg`: each generator `κσ_b` becomes `(g⁻¹κg)σ_{bg}`.
    pub fn conjugate(&self, g: &Gf2Matrix) -> Result<Self, HiddenSumError> {
        let g_inv = g.inverse()?;
        let generators = self
            .generators
            .iter()
            .map(|t| {
                let linear = t.linear().conjugate_by(g, &g_inv)?;
                let offset = t.offset().mul_mat(g)?;
                Ok(AffineMap::new_unchecked(linear, offset))
            })
            .collect::<Result<Vec<_>, Gf2Error>>()?;
        Ok(Self {
            dim: self.dim,
            generators,
        })
    }

    /// True iff `x·y ∈ U(T)` for all `x, y`, i.e. `T₊ ⊆ AGL(V,∘)`.
    pub fn normalized_by_translations(&self) -> Result<bool, HiddenSumError> {
        Ok(self.algebra()?.triple_products_vanish())
    }

    /// Basis of `{v : σ_v ∈ AGL(V,∘)}`.
    pub fn weak_keys(&self) -> Result<Vec<Gf2Vector>, HiddenSumError> {
        let a = self.algebra()?;
        Ok(a.weak_keys()
            .into_iter()
            .map(|r| Gf2Vector::truncated(self.dim, r))
            .collect())
    }
}

/// Conjugates a valid group into unitriangular form with `U(T)` on the last
/// `d` coordinates.
pub fn standardize(group: &GeneratedGroup) -> Result<Standardized, HiddenSumError> {
    Ok(group.algebra()?.standardize()?)
}

impl Standardized {
    /// Block normal form, available iff `T₊ ⊆ AGL(V,∘)`.
    pub fn embedded(&self) -> Result<EmbeddedHiddenSum, HiddenSumError> {
        if !self.is_block_form() {
            return Err(HiddenSumError::NotNormalized);
        }
        let (n, d) = (self.head, self.tail);
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for s in 0..n {
            for i in (s + 1)..n {
                pairs.push(self.algebra.product_of_units(i, s) >> n);
            }
        }
        let std = StandardHiddenSum::new(n, d, pairs)?;
        EmbeddedHiddenSum::new(std, self.g.clone())
    }
}

/// The exterior algebra on `e₁, e₂, e₃` placed on `e₁…e₇`, extended by zero products.
pub fn exterior_algebra(dim: usize) -> Algebra {
    assert!(dim >= 7, "the exterior construction needs N >= 7");
    let mut table = vec![0u64; dim * dim];
    let mut set = |i: usize, j: usize, k: usize| {
        table[i * dim + j] = 1 << k;
        table[j * dim + i] = 1 << k;
    };
    // e₁e₂ = e₄, e₁e₃ = e₅, e₂e₃ = e₆, and every product equal to e₁e₂e₃ = e₇.
    set(0, 1, 3);
    set(0, 2, 4);
    set(1, 2, 5);
    set(0, 5, 6);
    set(1, 4, 6);
    set(2, 3, 6);
    Algebra::from_table(dim, table).expect("exterior algebra satisfies the ring axioms")
}

pub fn build_exterior_group(dim: usize) -> GeneratedGroup {
    GeneratedGroup::from_algebra(&exterior_algebra(dim))
}

/// Text form of a group: `N`, `n`, `d`, the blocks `B_{eᵢ}` as row strings, and
/// an optional conjugator `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDocument {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    pub d: usize,
    pub blocks: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<String>>,
}

impl GroupDocument {
    pub fn from_parts(std: &StandardHiddenSum, g: Option<&Gf2Matrix>) -> Self {
        Self {
            dim: std.dim(),
            n: std.head(),
            d: std.tail(),
            blocks: (0..std.head()).map(|s| std.block(s).to_strings()).collect(),
            g: g.map(Gf2Matrix::to_strings),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("group document serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, HiddenSumError> {
        toml::from_str(text).map_err(|e| HiddenSumError::Serialization(e.to_string()))
    }

    pub fn into_standard(&self) -> Result<StandardHiddenSum, HiddenSumError> {
        if self.n + self.d != self.dim {
            return Err(HiddenSumError::Serialization(format!(
                "N = {} but n + d = {}",
                self.dim,
                self.n + self.d
            )));
        }
        if self.n == 0 {
            if !self.blocks.is_empty() {
                return Err(HiddenSumError::Serialization("T+ has no blocks".into()));
            }
            return Ok(StandardHiddenSum::translations(self.dim));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|rows| Gf2Matrix::from_strs(rows))
            .collect::<Result<Vec<_>, _>>()?;
        StandardHiddenSum::from_blocks(self.n, self.d, &blocks)
    }

    pub fn into_embedded(&self) -> Result<EmbeddedHiddenSum, HiddenSumError> {
        let std = self.into_standard()?;
        match &self.g {
            Some(rows) => EmbeddedHiddenSum::new(std, Gf2Matrix::from_strs(rows)?),
            None => Ok(EmbeddedHiddenSum::standard(std)),
        }
    }
}
