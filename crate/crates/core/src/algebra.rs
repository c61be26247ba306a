//! Structure-constant view of a hidden sum.
//!
//! An elementary abelian regular subgroup `T ⊆ AGL(V,+)` is the same data as a
//! commutative, associative, nil F₂-algebra on `V`: with `τ_a = κ_a σ_a` the
//! product is `x·a = x κ_a + x`, and conversely `κ_a = 1 + δ_a` with `δ_a`
//! the multiplication-by-`a` map. The product is bilinear, so the whole group is
//! pinned down by the `N²` products `eᵢ·eⱼ`, which is what [`Algebra`] stores.

use thiserror::Error;

use crate::gf2::{left_kernel, mask, reduce, rref, vec_mat, Gf2Matrix, Gf2Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("products are not commutative at (e{0}, e{1})")]
    NotCommutative(usize, usize),
    #[error("products are not associative at (e{0}, e{1}, e{2})")]
    NotAssociative(usize, usize, usize),
    #[error("e{0}·e{0} is nonzero")]
    NonZeroSquare(usize),
    #[error("no common fixed vector on a nonzero quotient; the group is not unipotent")]
    NotUnipotent,
    #[error("product table has {found} entries, expected {expected}")]
    BadTable { expected: usize, found: usize },
}

/// Products `eᵢ·eⱼ` of an `N`-dimensional nil algebra, `table[i·N + j]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Algebra {
    dim: usize,
    table: Vec<u64>,
}

impl Algebra {
    /// The zero product; corresponds to the ordinary translation group `T₊`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            table: vec![0; dim * dim],
        }
    }

    /// Builds an algebra from its structure constants, checking the ring axioms
    /// on basis elements (which suffices by bilinearity).
    pub fn from_table(dim: usize, table: Vec<u64>) -> Result<Self, AlgebraError> {
        if table.len() != dim * dim || table.iter().any(|&t| t & !mask(dim) != 0) {
            return Err(AlgebraError::BadTable {
                expected: dim * dim,
                found: table.len(),
            });
        }
        let a = Self { dim, table };
        a.check_axioms()?;
        Ok(a)
    }

    pub(crate) fn from_table_unchecked(dim: usize, table: Vec<u64>) -> Self {
        debug_assert_eq!(table.len(), dim * dim);
        Self { dim, table }
    }

    /// Builds the algebra from the linear parts `κ_{eᵢ}` of the group elements
    /// sending `0` to `eᵢ`: row `j` of `κ_{eᵢ}` is `eⱼ + eⱼ·eᵢ`.
    pub fn from_basis_kappas(kappas: &[Gf2Matrix]) -> Result<Self, AlgebraError> {
        let dim = kappas.len();
        let mut table = vec![0u64; dim * dim];
        for (i, k) in kappas.iter().enumerate() {
            for j in 0..dim {
                table[j * dim + i] = k.row_words()[j] ^ (1 << j);
            }
        }
        Self::from_table(dim, table)
    }

    pub fn check_axioms(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        for i in 0..n {
            if self.table[i * n + i] != 0 {
                return Err(AlgebraError::NonZeroSquare(i));
            }
            for j in 0..n {
                if self.table[i * n + j] != self.table[j * n + i] {
                    return Err(AlgebraError::NotCommutative(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ij = self.table[i * n + j];
                for k in 0..n {
                    let left = self.mul_bits(ij, 1 << k);
                    let right = self.mul_bits(1 << i, self.table[j * n + k]);
                    if left != right {
                        return Err(AlgebraError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn table(&self) -> &[u64] {
        &self.table
    }

    #[inline]
    pub fn product_of_units(&self, i: usize, j: usize) -> u64 {
        self.table[i * self.dim + j]
    }

    /// Row `i` of the multiplication table: `eᵢ·eⱼ` for all `j`.
    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.table[i * self.dim..(i + 1) * self.dim]
    }

    /// `x·y` on packed vectors.
    #[inline]
    pub fn mul_bits(&self, mut x: u64, y: u64) -> u64 {
        let mut acc = 0;
        while x != 0 {
            let i = x.trailing_zeros() as usize;
            acc ^= vec_mat(y, self.row(i));
            x &= x - 1;
        }
        acc
    }

    pub fn mul(&self, x: Gf2Vector, y: Gf2Vector) -> Gf2Vector {
        Gf2Vector::truncated(self.dim, self.mul_bits(x.bits(), y.bits()))
    }

    /// `x ∘ y = x + y + x·y`.
    #[inline]
    pub fn circ_bits(&self, x: u64, y: u64) -> u64 {
        x ^ y ^ self.mul_bits(x, y)
    }

    /// Rows `eⱼ·a` of the multiplication-by-`a` map `δ_a`.
    pub fn delta_rows(&self, a: u64) -> Vec<u64> {
        (0..self.dim).map(|j| self.mul_bits(1 << j, a)).collect()
    }

    /// Linear part `κ_a = 1 + δ_a` of the translation sending `0` to `a`.
    pub fn kappa(&self, a: Gf2Vector) -> Gf2Matrix {
        let rows = self
            .delta_rows(a.bits())
            .into_iter()
            .enumerate()
            .map(|(j, r)| r ^ (1 << j))
            .collect();
        Gf2Matrix::from_rows(self.dim, rows).expect("square table")
    }

    /// The subspace `U(T) = {a : κ_a = 1}`, i.e. the annihilator; RREF basis.
    pub fn annihilator(&self) -> Vec<u64> {
        let images: Vec<Vec<u64>> = (0..self.dim)
            .map(|k| (0..self.dim).map(|i| self.product_of_units(i, k)).collect())
            .collect();
        left_kernel(self.dim, &images)
    }

    /// RREF basis of `{v : x·v ∈ W for all x}` for a subspace `W` given in RREF.
    pub fn preimage_into(&self, w_rref: &[u64]) -> Vec<u64> {
        let images: Vec<Vec<u64>> = (0..self.dim)
            .map(|k| {
                (0..self.dim)
                    .map(|i| reduce(self.product_of_units(i, k), w_rref))
                    .collect()
            })
            .collect();
        left_kernel(self.dim, &images)
    }

    /// Translations `σ_v` normalising `T∘`: `{v : x·v ∈ U(T) for all x}`.
    pub fn weak_keys(&self) -> Vec<u64> {
        self.preimage_into(&self.annihilator())
    }

    /// RREF basis of `V·V`.
    pub fn square_span(&self) -> Vec<u64> {
        rref(&self.table)
    }

    /// A basis adapted to `V ⊇ V² ⊇ V³ ⊇ …`, hence independent for `∘`.
    /// Unit vectors are kept wherever the flag allows.
    pub fn circ_basis(&self) -> Vec<u64> {
        let n = self.dim;
        let mut powers = vec![(0..n).map(|i| 1u64 << i).collect::<Vec<_>>()];
        loop {
            let last = powers.last().expect("nonempty");
            let next = rref(
                &last
                    .iter()
                    .flat_map(|&p| (0..n).map(move |k| (p, k)))
                    .map(|(p, k)| self.mul_bits(p, 1 << k))
                    .collect::<Vec<_>>(),
            );
            if next.is_empty() {
                break;
            }
            powers.push(next);
        }
        let mut chosen: Vec<u64> = Vec::with_capacity(n);
        let mut span: Vec<u64> = Vec::with_capacity(n);
        for level in powers.iter().rev() {
            for &v in level {
                if reduce(v, &span) != 0 {
                    chosen.push(v);
                    span = rref(&chosen);
                }
            }
        }
        chosen.sort_unstable_by_key(|v| (v.count_ones() != 1, v.trailing_zeros()));
        chosen
    }

    /// True iff `x·y·z = 0` for all `x, y, z`, i.e. `T₊ ⊆ AGL(V,∘)`.
    pub fn triple_products_vanish(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let ij = self.table[i * n + j];
                ij == 0 || (0..n).all(|k| self.mul_bits(ij, 1 << k) == 0)
            })
        })
    }

    /// Algebra of `g⁻¹Tg`: `x ·' y = ((x g⁻¹)·(y g⁻¹)) g`.
    pub fn conjugate(&self, g: &Gf2Matrix, g_inv: &Gf2Matrix) -> Self {
        let n = self.dim;
        let gi = g_inv.row_words();
        let gw = g.row_words();
        let mut table = vec![0u64; n * n];
        for i in 0..n {
            for j in i..n {
                let p = vec_mat(self.mul_bits(gi[i], gi[j]), gw);
                table[i * n + j] = p;
                table[j * n + i] = p;
            }
        }
        Self { dim: n, table }
    }

    /// Product structure on `V₁ × V₂`, with the second factor on the high coordinates.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a + b;
        let mut table = vec![0u64; n * n];
        for i in 0..a {
            for j in 0..a {
                table[i * n + j] = self.table[i * a + j];
            }
        }
        for i in 0..b {
            for j in 0..b {
                table[(a + i) * n + a + j] = other.table[i * b + j] << a;
            }
        }
        Self { dim: n, table }
    }

    /// Products `eᵢ·eⱼ` for `i < j`, `N` bits each, in the order
    /// `(1,2), (1,3), …, (N−1,N)`, packed little-endian into 64-bit words.
    pub fn packed_upper(&self) -> Vec<u64> {
        let n = self.dim;
        let total = n * (n - 1) / 2 * n;
        let mut words = vec![0u64; total.div_ceil(64).max(1)];
        let mut pos = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.table[i * n + j];
                let (w, off) = (pos / 64, pos % 64);
                words[w] |= v << off;
                if off + n > 64 {
                    words[w + 1] |= v >> (64 - off);
                }
                pos += n;
            }
        }
        words
    }

    /// Inverse of [`Algebra::packed_upper`].
    pub fn from_packed_upper(dim: usize, words: &[u64]) -> Self {
        let n = dim;
        let mut table = vec![0u64; n * n];
        let mut pos = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let (w, off) = (pos / 64, pos % 64);
                let mut v = words[w] >> off;
                if off + n > 64 {
                    v |= words[w + 1] << (64 - off);
                }
                let v = v & mask(n);
                table[i * n + j] = v;
                table[j * n + i] = v;
                pos += n;
            }
        }
        Self { dim: n, table }
    }

    /// Conjugates to a form where every `κ_a` is upper unitriangular and
    /// `U(T)` is the span of the last `d` unit vectors.
    ///
    /// The basis is built from the bottom up: starting at `W = U(T)`, each layer
    /// is the RREF basis of `{v : v·x ∈ W for all x}` reduced modulo `W`. Layers
    /// found later come first in the final basis.
    pub fn standardize(&self) -> Result<Standardized, AlgebraError> {
        let n = self.dim;
        let u = self.annihilator();
        let d = u.len();
        let mut w = u.clone();
        let mut layers: Vec<Vec<u64>> = Vec::new();
        while w.len() < n {
            let reduced: Vec<u64> = self
                .preimage_into(&w)
                .into_iter()
                .map(|v| reduce(v, &w))
                .filter(|&v| v != 0)
                .collect();
            let fresh = rref(&reduced);
            if fresh.is_empty() {
                return Err(AlgebraError::NotUnipotent);
            }
            let mut grown = w.clone();
            grown.extend_from_slice(&fresh);
            w = rref(&grown);
            layers.push(fresh);
        }
        let frame_rows: Vec<u64> = layers
            .iter()
            .rev()
            .flatten()
            .copied()
            .chain(u.iter().copied())
            .collect();
        let frame = Gf2Matrix::from_rows(n, frame_rows).expect("frame rows are in range");
        let g = frame.inverse().expect("layers form a basis");
        let algebra = self.conjugate(&g, &frame);
        Ok(Standardized {
            head: n - d,
            tail: d,
            g,
            g_inv: frame,
            algebra,
        })
    }
}

/// Result of [`Algebra::standardize`]: `g⁻¹Tg` is upper unitriangular with
/// `U(g⁻¹Tg) = span{e_{n+1},…,e_N}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Standardized {
    pub head: usize,
    pub tail: usize,
    pub g: Gf2Matrix,
    pub g_inv: Gf2Matrix,
    pub algebra: Algebra,
}

impl Standardized {
    /// `κ_{eᵢ}` of the standardized group (0-based `i`).
    pub fn kappa_unit(&self, i: usize) -> Gf2Matrix {
        self.algebra.kappa(Gf2Vector::unit(self.algebra.dim(), i))
    }

    /// True iff every `κ_a` has the block shape `[[Iₙ, B],[0, I_d]]`.
    pub fn is_block_form(&self) -> bool {
        let head = mask(self.head);
        self.algebra.table().iter().all(|&p| p & head == 0)
    }
}
