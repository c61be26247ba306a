//! Exhaustive enumeration of block normal forms and the associated counts.
//!
//! A standard form with `n = N − d` is fixed by its free vector
//! `B = (b_2^{(1)}, …, b_n^{(n−1)})` of `d·n(n−1)/2` bits. Candidates are
//! visited in increasing order of `B` read as an integer, `b_2^{(1)}` in the
//! low bits, and kept when no non-empty sum of the blocks `B_{e_s}` vanishes.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::exec::{self, Exec};
use crate::gf2::{enumerate_subspaces, gaussian_binomial, mask, Subspace};
use crate::hiddensum::{blocks_nondegenerate_gray, EmbeddedHiddenSum, StandardHiddenSum};

/// Largest free-bit count accepted by the variety enumerators.
pub const FREE_BIT_BUDGET: usize = 40;
/// Default cap on materialized output of [`enumerate_all`].
pub const DEFAULT_CAP: u64 = 1 << 22;

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("free-bit budget exceeded: {bits} > {FREE_BIT_BUDGET}")]
    BudgetExceeded { bits: usize },
    #[error("output of {count} groups exceeds the cap of {cap}")]
    CapExceeded { count: BigUint, cap: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// `d·n(n−1)/2`.
pub fn free_bits(n: usize, d: usize) -> usize {
    d * n * n.saturating_sub(1) / 2
}

fn check_variety(n: usize, d: usize) -> Result<usize, EnumerateError> {
    if n < 2 || d < 1 || n + d > 64 {
        return Err(EnumerateError::InvalidParameters(format!(
            "need n >= 2, d >= 1, n + d <= 64; got n={n} d={d}"
        )));
    }
    let bits = free_bits(n, d);
    if bits > FREE_BIT_BUDGET {
        return Err(EnumerateError::BudgetExceeded { bits });
    }
    Ok(bits)
}

/// Blocks of the candidate `free`, packed for the subset-sum check.
#[inline]
fn candidate_blocks(n: usize, d: usize, free: u64, out: &mut [u128]) {
    out.iter_mut().for_each(|b| *b = 0);
    let m = mask(d);
    let mut k = 0;
    for s in 0..n {
        for i in (s + 1)..n {
            let row = u128::from(free >> (k * d) & m);
            out[s] |= row << (i * d);
            out[i] |= row << (s * d);
            k += 1;
        }
    }
}

fn unpack(n: usize, d: usize, free: u64) -> StandardHiddenSum {
    let m = mask(d);
    let pairs = (0..n * (n - 1) / 2).map(|k| free >> (k * d) & m).collect();
    StandardHiddenSum::new_unchecked(n, d, pairs)
}

fn scan(n: usize, d: usize, range: std::ops::Range<u64>) -> impl Iterator<Item = u64> {
    let mut blocks = vec![0u128; n];
    range.filter(move |&free| {
        candidate_blocks(n, d, free, &mut blocks);
        blocks_nondegenerate_gray(&blocks)
    })
}

/// Streams `V(I_{n,d})` in free-bit order.
pub fn variety_iter(
    n: usize,
    d: usize,
) -> Result<impl Iterator<Item = StandardHiddenSum>, EnumerateError> {
    let bits = check_variety(n, d)?;
    Ok(scan(n, d, 0..1u64 << bits).map(move |free| unpack(n, d, free)))
}

pub fn enumerate_variety(n: usize, d: usize) -> Result<Vec<StandardHiddenSum>, EnumerateError> {
    enumerate_variety_with(Exec::default(), n, d)
}

/// [`enumerate_variety`] with an explicit execution mode; the order is the same
/// in both modes.
pub fn enumerate_variety_with(
    exec: Exec,
    n: usize,
    d: usize,
) -> Result<Vec<StandardHiddenSum>, EnumerateError> {
    let bits = check_variety(n, d)?;
    Ok(exec::map_ranges(exec, 0..1u64 << bits, CHUNK, |r| {
        scan(n, d, r).map(|free| unpack(n, d, free)).collect()
    }))
}

/// `|V(I_{n,d})|`. Closed forms are used for `n ≤ 3`; larger `n` is counted by
/// scanning the free bits.
pub fn count_variety(n: usize, d: usize) -> Result<BigUint, EnumerateError> {
    count_variety_with(Exec::default(), n, d)
}

pub fn count_variety_with(exec: Exec, n: usize, d: usize) -> Result<BigUint, EnumerateError> {
    let bits = check_variety(n, d)?;
    let p = |e: usize| BigUint::one() << e;
    Ok(match n {
        2 => p(d) - 1u32,
        3 => p(3 * d) - (p(d) - 1u32) * 7u32 - 1u32,
        _ => BigUint::from(exec::sum_ranges(exec, 0..1u64 << bits, CHUNK, |r| {
            scan(n, d, r).count() as u64
        })),
    })
}

/// `2^{d·n(n−1)/2} − 1 − ∑_{r=1}^{n−2} C(n,r)·(2^d − 1)^{C(n−r,2)}`.
pub fn variety_upper_bound(n: usize, d: usize) -> BigUint {
    assert!(n >= 2 && d >= 1, "variety_upper_bound needs n >= 2, d >= 1");
    let mut acc: BigInt = (BigInt::one() << free_bits(n, d)) - 1;
    let nonzero_row: BigInt = (BigInt::one() << d) - 1;
    for r in 1..=n - 2 {
        let k = n - r;
        acc -= binomial(n, r) * nonzero_row.pow((k * (k - 1) / 2) as u32);
    }
    acc.to_biguint().expect("bound is non-negative")
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn check_total(dim: usize, d: usize) -> Result<(), EnumerateError> {
    if d < 1 || d + 2 > dim {
        return Err(EnumerateError::InvalidParameters(format!(
            "need 1 <= d <= N - 2; got N={dim} d={d}"
        )));
    }
    Ok(())
}

/// `[N, d]₂ · |V(I_{N−d,d})|`: the groups with `dim U = d` and `T₊ ⊆ AGL(V,∘)`.
pub fn count_total(dim: usize, d: usize) -> Result<BigUint, EnumerateError> {
    check_total(dim, d)?;
    Ok(gaussian_binomial(dim, d) * count_variety(dim - d, d)?)
}

/// `[N, N−2]₂ · (2^{N−2} − 1)`.
pub fn count_codim2(dim: usize) -> BigUint {
    assert!(dim >= 4, "count_codim2 needs N >= 4");
    gaussian_binomial(dim, dim - 2) * ((BigUint::one() << (dim - 2)) - 1u32)
}

/// `[N, N−3]₂ · (2^{3(N−3)} − 7(2^{N−3} − 1) − 1)`.
pub fn count_codim3(dim: usize) -> BigUint {
    assert!(dim >= 5, "count_codim3 needs N >= 5");
    let d = dim - 3;
    let v = (BigUint::one() << (3 * d)) - ((BigUint::one() << d) - 1u32) * 7u32 - 1u32;
    gaussian_binomial(dim, d) * v
}

fn checked_total(dim: usize, d: usize, cap: u64) -> Result<u64, EnumerateError> {
    let count = count_total(dim, d)?;
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c),
        _ => Err(EnumerateError::CapExceeded { count, cap }),
    }
}

/// Applies `f` to every pair (standard form, subspace) with `dim U = d`,
/// subspaces outermost, in the order of [`enumerate_subspaces`] and
/// [`enumerate_variety`].
pub fn map_all<T, F>(
    exec: Exec,
    dim: usize,
    d: usize,
    cap: u64,
    f: F,
) -> Result<Vec<T>, EnumerateError>
where
    T: Send,
    F: Fn(&StandardHiddenSum, &Subspace) -> T + Sync + Send,
{
    let total = checked_total(dim, d, cap)?;
    let variety = enumerate_variety_with(exec, dim - d, d)?;
    let subspaces: Vec<Subspace> = enumerate_subspaces(dim, d).collect();
    let out = exec::flat_map_slice(exec, &subspaces, |w| {
        variety.iter().map(|t| f(t, w)).collect()
    });
    debug_assert_eq!(out.len() as u64, total);
    Ok(out)
}

/// Every group with `dim U = d` normalized by `T₊`, as `T = g·std·g⁻¹` where `g`
/// carries `U(T)` onto the last `d` coordinates.
pub fn enumerate_all(
    dim: usize,
    d: usize,
    cap: u64,
) -> Result<Vec<EmbeddedHiddenSum>, EnumerateError> {
    enumerate_all_with(Exec::default(), dim, d, cap)
}

pub fn enumerate_all_with(
    exec: Exec,
    dim: usize,
    d: usize,
    cap: u64,
) -> Result<Vec<EmbeddedHiddenSum>, EnumerateError> {
    map_all(exec, dim, d, cap, embed)
}

fn embed(t: &StandardHiddenSum, w: &Subspace) -> EmbeddedHiddenSum {
    EmbeddedHiddenSum::from_parts_unchecked(t.clone(), w.mapper.clone(), w.frame.clone())
}

/// Streaming form of [`enumerate_all`], same order, no cap.
pub fn enumerate_all_iter(
    dim: usize,
    d: usize,
) -> Result<impl Iterator<Item = EmbeddedHiddenSum>, EnumerateError> {
    check_total(dim, d)?;
    let variety = enumerate_variety_with(Exec::Sequential, dim - d, d)?;
    Ok(enumerate_subspaces(dim, d)
        .flat_map(move |w| variety.iter().map(|t| embed(t, &w)).collect::<Vec<_>>()))
}

/// One line of the count report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRecord {
    pub dim: usize,
    pub d: usize,
    pub n: usize,
    pub variety_count: BigUint,
    pub bound: BigUint,
    pub gaussian_binomial: BigUint,
    pub total: BigUint,
}

impl CountRecord {
    pub fn compute(dim: usize, d: usize) -> Result<Self, EnumerateError> {
        check_total(dim, d)?;
        let n = dim - d;
        let variety_count = count_variety(n, d)?;
        let gb = gaussian_binomial(dim, d);
        Ok(Self {
            dim,
            d,
            n,
            total: &gb * &variety_count,
            variety_count,
            bound: variety_upper_bound(n, d),
            gaussian_binomial: gb,
        })
    }
}

impl fmt::Display for CountRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} d={} n={} variety_count={} bound={} gaussian_binomial={} total={}",
            self.dim,
            self.d,
            self.n,
            self.variety_count,
            self.bound,
            self.gaussian_binomial,
            self.total
        )
    }
}

impl FromStr for CountRecord {
    type Err = EnumerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EnumerateError::InvalidParameters(format!("malformed count record: {s}"));
        let mut fields = std::collections::HashMap::new();
        for tok in s.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(bad)?;
            fields.insert(k, v);
        }
        let big = |k: &str| {
            fields
                .get(k)
                .and_then(|v| v.parse::<BigUint>().ok())
                .ok_or_else(bad)
        };
        let small = |k: &str| {
            fields
                .get(k)
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(bad)
        };
        Ok(Self {
            dim: small("N")?,
            d: small("d")?,
            n: small("n")?,
            variety_count: big("variety_count")?,
            bound: big("bound")?,
            gaussian_binomial: big("gaussian_binomial")?,
            total: big("total")?,
        })
    }
}
