//! Translation-based block ciphers and the 6-bit toy cipher.
//!
//! A round is `x ↦ (xγ)λ + k_h`: a bricklayer of S-boxes, a linear mixing
//! layer, then round-key addition. Maps act on the right, so the composition
//! order is exactly that of evaluation.
//!
//! The toy cipher has two 3-bit bricks (coordinates 1–3 and 4–6), the S-box
//! `α⁵x⁶ + αx⁵ + α²x⁴ + α⁵x³ + αx² + αx` over `F₈ = F₂[α]/(α³ + α + 1)`, and a
//! fixed 6×6 mixing layer. Its trapdoor is the product sum `∘′` of two copies
//! of a 3-dimensional hidden sum.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{mask, vec_mat, AffineMap, Gf2Error, Gf2Matrix, Gf2Vector};
use crate::hiddensum::{EmbeddedHiddenSum, GeneratedGroup, HiddenSum, HiddenSumError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CipherError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    HiddenSum(#[from] HiddenSumError),
    #[error("S-box is not a permutation: {table:?}")]
    NonBijective { table: Vec<u8> },
    #[error("mixing layer is singular")]
    SingularMixing,
    #[error("mixing layer leaves a wall invariant")]
    ImproperMixing,
    #[error("no F8 encoding makes the round map affine for the hidden sum")]
    NoEncodingVerifies,
    #[error("invalid wall structure: {0}")]
    Walls(String),
    #[error("cipher spec: {0}")]
    Spec(String),
}

/// Multiplication in `F₈`, elements as 3-bit integers (bit `i` ↔ `αⁱ`).
pub fn f8_mul(a: u8, b: u8) -> u8 {
    let mut acc = 0u8;
    for i in 0..3 {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for bit in [4, 3] {
        if acc >> bit & 1 == 1 {
            acc ^= 0b1011 << (bit - 3);
        }
    }
    acc
}

pub fn f8_pow(a: u8, e: u32) -> u8 {
    (0..e).fold(1, |acc, _| f8_mul(acc, a))
}

pub const ALPHA: u8 = 0b010;

/// Which power of `α` each brick coordinate carries: coordinate `i` ↔ `α^{order[i]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Encoding(pub [u8; 3]);

/// Encoding selected by [`calibrate_encoding`]: coordinate `i` ↔ `αⁱ`.
pub const PINNED_ENCODING: Encoding = Encoding([0, 1, 2]);

impl Encoding {
    pub fn all() -> impl Iterator<Item = Encoding> {
        (0u8..3)
            .permutations(3)
            .map(|p| Encoding([p[0], p[1], p[2]]))
    }

    pub fn to_field(self, x: u8) -> u8 {
        (0..3).fold(0, |acc, i| acc | (x >> i & 1) << self.0[i])
    }

    pub fn from_field(self, y: u8) -> u8 {
        (0..3).fold(0, |acc, i| acc | (y >> self.0[i] & 1) << i)
    }
}

/// Coefficients `(power of x, power of α)` of the toy S-box polynomial.
const SBOX_POLY: [(u32, u32); 6] = [(6, 5), (5, 1), (4, 2), (3, 5), (2, 1), (1, 1)];

/// Evaluates the toy S-box polynomial on all of `F₈` under `encoding`.
pub fn build_sbox(encoding: Encoding) -> Result<[u8; 8], CipherError> {
    let mut table = [0u8; 8];
    for (x, out) in table.iter_mut().enumerate() {
        let fx = encoding.to_field(x as u8);
        let y = SBOX_POLY.iter().fold(0, |acc, &(px, pa)| {
            acc ^ f8_mul(f8_pow(ALPHA, pa), f8_pow(fx, px))
        });
        *out = encoding.from_field(y);
    }
    if is_permutation(&table) {
        Ok(table)
    } else {
        Err(CipherError::NonBijective {
            table: table.to_vec(),
        })
    }
}

fn is_permutation(table: &[u8]) -> bool {
    let mut seen = vec![false; table.len()];
    table
        .iter()
        .all(|&y| (y as usize) < seen.len() && !std::mem::replace(&mut seen[y as usize], true))
}

fn invert_table(table: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; table.len()];
    for (x, &y) in table.iter().enumerate() {
        inv[y as usize] = x as u8;
    }
    inv
}

/// The toy mixing layer `λ`.
pub fn toy_mixing() -> Gf2Matrix {
    Gf2Matrix::from_strs(&["011010", "010000", "111010", "010111", "000010", "010110"])
        .expect("constant matrix")
}

/// Generators `κᵢ + eᵢ` of the 3-dimensional hidden sum behind the toy cipher.
pub fn brick_group() -> GeneratedGroup {
    let m = |rows: &[&str]| Gf2Matrix::from_strs(rows).expect("constant matrix");
    let kappas = [
        m(&["100", "010", "011"]),
        Gf2Matrix::identity(3),
        m(&["110", "010", "001"]),
    ];
    let generators = kappas
        .into_iter()
        .enumerate()
        .map(|(i, k)| AffineMap::new(k, Gf2Vector::unit(3, i)).expect("unitriangular"))
        .collect();
    GeneratedGroup::new(generators).expect("three generators")
}

/// Block-diagonal product: `(x₁,x₂)∘′(y₁,y₂) = (x₁∘y₁, x₂∘y₂)`, `t1` on the low
/// coordinates, re-standardized so the combined `U` is a tail again.
pub fn product_group(
    t1: &EmbeddedHiddenSum,
    t2: &EmbeddedHiddenSum,
) -> Result<EmbeddedHiddenSum, HiddenSumError> {
    let algebra = t1.algebra().direct_sum(&t2.algebra());
    algebra.standardize()?.embedded()
}

/// `∘′` on `F₂⁶`.
pub fn toy_hidden_sum() -> EmbeddedHiddenSum {
    let brick = brick_group().algebra().expect("brick group is valid");
    let single = brick
        .standardize()
        .expect("nilpotent")
        .embedded()
        .expect("block form at N = 3");
    product_group(&single, &single).expect("product of block forms is a block form")
}

/// `V = V₁ ⊕ … ⊕ V_b` with bricks of width `m`; brick `i` holds coordinates
/// `i·m … i·m + m − 1` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WallStructure {
    pub dim: usize,
    pub brick_width: usize,
    pub brick_count: usize,
}

impl WallStructure {
    pub fn new(brick_width: usize, brick_count: usize) -> Result<Self, CipherError> {
        if brick_width < 2 || brick_count < 1 || brick_width * brick_count > 16 {
            return Err(CipherError::Walls(format!(
                "m = {brick_width}, b = {brick_count}"
            )));
        }
        Ok(Self {
            dim: brick_width * brick_count,
            brick_width,
            brick_count,
        })
    }

    fn brick_mask(&self, i: usize) -> u64 {
        mask(self.brick_width) << (i * self.brick_width)
    }
}

/// True iff no wall `⊕_{i∈I} Vᵢ`, `∅ ≠ I ⊊ [b]`, is `λ`-invariant.
pub fn proper_mixing_check(lambda: &Gf2Matrix, walls: &WallStructure) -> bool {
    assert_eq!(
        lambda.rows(),
        walls.dim,
        "mixing layer must match the wall structure"
    );
    let rows = lambda.row_words();
    (1u64..(1 << walls.brick_count) - 1).all(|sel| {
        let wall = (0..walls.brick_count)
            .filter(|i| sel >> i & 1 == 1)
            .fold(0, |acc, i| acc | walls.brick_mask(i));
        (0..walls.dim).any(|j| wall >> j & 1 == 1 && rows[j] & !wall != 0)
    })
}

/// Derivation of round keys from the session key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeySchedule {
    /// `k_h = K + h`, the 1-based round index written into the low coordinates.
    #[default]
    XorRoundIndex,
    /// `k_h = K`.
    Constant,
}

impl KeySchedule {
    pub fn round_key(self, key: u64, round: usize, dim: usize) -> u64 {
        match self {
            KeySchedule::XorRoundIndex => (key ^ round as u64) & mask(dim),
            KeySchedule::Constant => key,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KeySchedule::XorRoundIndex => "xor-round-index",
            KeySchedule::Constant => "constant",
        }
    }
}

/// One round's `γ` (one table per brick) and `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    sboxes: Vec<Vec<u8>>,
    inverse_sboxes: Vec<Vec<u8>>,
    mixing: Gf2Matrix,
    mixing_inv: Gf2Matrix,
}

impl Round {
    pub fn new(
        walls: &WallStructure,
        sboxes: Vec<Vec<u8>>,
        mixing: Gf2Matrix,
    ) -> Result<Self, CipherError> {
        if sboxes.len() != walls.brick_count {
            return Err(CipherError::Walls(format!(
                "{} S-boxes for {} bricks",
                sboxes.len(),
                walls.brick_count
            )));
        }
        for s in &sboxes {
            if s.len() != 1 << walls.brick_width || !is_permutation(s) {
                return Err(CipherError::NonBijective { table: s.clone() });
            }
        }
        if mixing.rows() != walls.dim || !mixing.is_square() {
            return Err(Gf2Error::DimensionMismatch {
                expected: walls.dim,
                found: mixing.rows(),
            }
            .into());
        }
        let mixing_inv = mixing.inverse().map_err(|_| CipherError::SingularMixing)?;
        Ok(Self {
            inverse_sboxes: sboxes.iter().map(|s| invert_table(s)).collect(),
            sboxes,
            mixing,
            mixing_inv,
        })
    }

    pub fn mixing(&self) -> &Gf2Matrix {
        &self.mixing
    }

    fn bricklayer(tables: &[Vec<u8>], m: usize, x: u64) -> u64 {
        tables.iter().enumerate().fold(0, |acc, (i, s)| {
            let brick = (x >> (i * m) & mask(m)) as usize;
            acc | u64::from(s[brick]) << (i * m)
        })
    }

    /// `xγλ`.
    pub fn gamma_lambda(&self, walls: &WallStructure, x: u64) -> u64 {
        vec_mat(
            Self::bricklayer(&self.sboxes, walls.brick_width, x),
            self.mixing.row_words(),
        )
    }

    fn inverse_gamma_lambda(&self, walls: &WallStructure, y: u64) -> u64 {
        Self::bricklayer(
            &self.inverse_sboxes,
            walls.brick_width,
            vec_mat(y, self.mixing_inv.row_words()),
        )
    }
}

/// An iterated cipher with rounds `γ_h λ_h σ_{k_h}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TbCipher {
    walls: WallStructure,
    rounds: Vec<Round>,
    schedule: KeySchedule,
}

impl TbCipher {
    pub fn new(
        walls: WallStructure,
        rounds: Vec<Round>,
        schedule: KeySchedule,
    ) -> Result<Self, CipherError> {
        if rounds.is_empty() {
            return Err(CipherError::Spec("at least one round is required".into()));
        }
        Ok(Self {
            walls,
            rounds,
            schedule,
        })
    }

    /// Replaces round `h` (1-based).
    pub fn with_round(mut self, round: usize, replacement: Round) -> Result<Self, CipherError> {
        let slot = round
            .checked_sub(1)
            .and_then(|i| self.rounds.get_mut(i))
            .ok_or_else(|| CipherError::Spec(format!("no round {round}")))?;
        *slot = replacement;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.walls.dim
    }

    pub fn walls(&self) -> &WallStructure {
        &self.walls
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn schedule(&self) -> KeySchedule {
        self.schedule
    }

    pub fn has_proper_round(&self) -> bool {
        self.rounds
            .iter()
            .any(|r| proper_mixing_check(&r.mixing, &self.walls))
    }

    fn check(&self, v: Gf2Vector) -> Result<(), CipherError> {
        if v.dim() != self.dim() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            }
            .into());
        }
        Ok(())
    }

    pub fn encrypt_bits(&self, key: u64, x: u64) -> u64 {
        self.rounds.iter().enumerate().fold(x, |x, (h, r)| {
            r.gamma_lambda(&self.walls, x) ^ self.schedule.round_key(key, h + 1, self.dim())
        })
    }

    pub fn decrypt_bits(&self, key: u64, y: u64) -> u64 {
        self.rounds.iter().enumerate().rev().fold(y, |y, (h, r)| {
            r.inverse_gamma_lambda(
                &self.walls,
                y ^ self.schedule.round_key(key, h + 1, self.dim()),
            )
        })
    }

    pub fn encrypt(&self, key: Gf2Vector, plaintext: Gf2Vector) -> Result<Gf2Vector, CipherError> {
        self.check(key)?;
        self.check(plaintext)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.encrypt_bits(key.bits(), plaintext.bits()),
        ))
    }

    pub fn decrypt(&self, key: Gf2Vector, ciphertext: Gf2Vector) -> Result<Gf2Vector, CipherError> {
        self.check(key)?;
        self.check(ciphertext)?;
        Ok(Gf2Vector::truncated(
            self.dim(),
            self.decrypt_bits(key.bits(), ciphertext.bits()),
        ))
    }

    /// Encryption under `key` on every point, indexed by packed plaintext.
    pub fn encryption_table(&self, key: u64) -> Vec<u64> {
        (0..1u64 << self.dim())
            .map(|x| self.encrypt_bits(key, x))
            .collect()
    }
}

/// `x ↦ x·M + t` in ∘-coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateAffine {
    pub m: Gf2Matrix,
    pub t: Gf2Vector,
}

/// Tests whether the map with table `f` is affine for the hidden sum `sum`.
///
/// With `F(λ) = [f(combine(λ))]`, the candidate is `t = F(0)` and row `i` of
/// `M` is `F(eᵢ) + t`; the map is ∘-affine iff `F(λ) = λM + t` on every point.
pub fn is_affine_wrt<S: HiddenSum + ?Sized>(f: &[u64], sum: &S) -> Option<CoordinateAffine> {
    let n = sum.dim();
    assert!(
        n <= 16 && f.len() == 1 << n,
        "is_affine_wrt needs a full table with N <= 16"
    );
    let coords = |x: u64| sum.coordinates_bits(f[sum.combine_bits(x) as usize]);
    let t = coords(0);
    let rows: Vec<u64> = (0..n).map(|i| coords(1 << i) ^ t).collect();
    let affine = (0..1u64 << n).all(|x| coords(x) == vec_mat(x, &rows) ^ t);
    affine.then(|| CoordinateAffine {
        m: Gf2Matrix::from_rows(n, rows).expect("rows fit"),
        t: Gf2Vector::truncated(n, t),
    })
}

/// The toy cipher's parameters, as stored in a spec file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyCipherSpec {
    pub sbox: [u8; 8],
    pub mixing: Gf2Matrix,
    pub rounds: usize,
    pub schedule: KeySchedule,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    sbox: String,
    lambda: Vec<String>,
    rounds: usize,
    schedule: KeySchedule,
}

pub const DEFAULT_ROUNDS: usize = 5;

impl Default for ToyCipherSpec {
    fn default() -> Self {
        Self {
            sbox: build_sbox(PINNED_ENCODING).expect("pinned encoding gives a permutation"),
            mixing: toy_mixing(),
            rounds: DEFAULT_ROUNDS,
            schedule: KeySchedule::default(),
        }
    }
}

impl ToyCipherSpec {
    pub fn walls() -> WallStructure {
        WallStructure::new(3, 2).expect("3 x 2 bricks")
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_schedule(mut self, schedule: KeySchedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Builds the cipher after checking the S-box, invertibility, and properness.
    pub fn build(&self) -> Result<TbCipher, CipherError> {
        let walls = Self::walls();
        if self.rounds == 0 {
            return Err(CipherError::Spec("rounds must be at least 1".into()));
        }
        if !proper_mixing_check(&self.mixing, &walls) {
            if !self.mixing.is_invertible() {
                return Err(CipherError::SingularMixing);
            }
            return Err(CipherError::ImproperMixing);
        }
        let round = Round::new(&walls, vec![self.sbox.to_vec(); 2], self.mixing.clone())?;
        TbCipher::new(walls, vec![round; self.rounds], self.schedule)
    }

    /// Table of the keyless round map `γλ`.
    pub fn gamma_lambda_table(&self) -> Result<Vec<u64>, CipherError> {
        let walls = Self::walls();
        let round = Round::new(&walls, vec![self.sbox.to_vec(); 2], self.mixing.clone())?;
        Ok((0..64).map(|x| round.gamma_lambda(&walls, x)).collect())
    }

    pub fn to_toml(&self) -> String {
        let file = SpecFile {
            sbox: self.sbox.iter().map(|v| format!("{v:x}")).collect(),
            lambda: self.mixing.to_strings(),
            rounds: self.rounds,
            schedule: self.schedule,
        };
        toml::to_string(&file).expect("spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, CipherError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| CipherError::Spec(e.to_string()))?;
        let digits: Vec<u8> = file
            .sbox
            .chars()
            .map(|c| c.to_digit(16).filter(|&d| d < 8).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| {
                CipherError::Spec(format!("sbox must be 8 digits 0-7, got {:?}", file.sbox))
            })?;
        let sbox: [u8; 8] = digits.try_into().map_err(|_| {
            CipherError::Spec(format!("sbox must have 8 entries, got {:?}", file.sbox))
        })?;
        if !is_permutation(&sbox) {
            return Err(CipherError::NonBijective {
                table: sbox.to_vec(),
            });
        }
        let mixing = Gf2Matrix::from_strs(&file.lambda)?;
        if mixing.rows() != 6 || mixing.cols() != 6 {
            return Err(CipherError::Spec("lambda must be 6x6".into()));
        }
        Ok(Self {
            sbox,
            mixing,
            rounds: file.rounds,
            schedule: file.schedule,
        })
    }
}

/// First encoding, in lexicographic order of the power assignment, under which
/// the toy round map `γλ` is `∘′`-affine.
pub fn calibrate_encoding() -> Result<Encoding, CipherError> {
    let sum = toy_hidden_sum();
    for encoding in Encoding::all() {
        let Ok(sbox) = build_sbox(encoding) else {
            continue;
        };
        let spec = ToyCipherSpec {
            sbox,
            ..ToyCipherSpec::default()
        };
        if is_affine_wrt(&spec.gamma_lambda_table()?, &sum).is_some() {
            return Ok(encoding);
        }
    }
    Err(CipherError::NoEncodingVerifies)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic() {
        assert_eq!(f8_pow(ALPHA, 3), 0b011);
        assert_eq!(f8_pow(ALPHA, 7), 1);
        for a in 1..8u8 {
            assert!((1..8).any(|b| f8_mul(a, b) == 1));
        }
    }

    #[test]
    fn sbox_values() {
        for e in Encoding::all() {
            if let Ok(t) = build_sbox(e) {
                assert_eq!(t[0], 0);
            }
        }
        let t = build_sbox(PINNED_ENCODING).unwrap();
        assert_eq!(t[1], 0b110);
        assert_eq!(t, [0, 6, 3, 7, 4, 1, 5, 2]);
    }

    #[test]
    fn encoding_round_trip() {
        for e in Encoding::all() {
            for x in 0..8 {
                assert_eq!(e.from_field(e.to_field(x)), x);
            }
        }
    }

    #[test]
    fn calibration_picks_pinned() {
        assert_eq!(calibrate_encoding().unwrap(), PINNED_ENCODING);
    }

    #[test]
    fn mixing_properness() {
        let walls = ToyCipherSpec::walls();
        assert!(proper_mixing_check(&toy_mixing(), &walls));
        assert!(!proper_mixing_check(&Gf2Matrix::identity(6), &walls));
        let block =
            Gf2Matrix::from_strs(&["110000", "010000", "011000", "000101", "000010", "000111"])
                .unwrap();
        assert!(!proper_mixing_check(&block, &walls));
    }

    #[test]
    fn toy_sum_shape() {
        let t = toy_hidden_sum();
        assert_eq!((t.std().head(), t.std().tail()), (4, 2));
        let u: Vec<String> = t.u_space().iter().map(|v| v.to_string()).collect();
        assert_eq!(u, ["010000", "000010"]);
    }

    #[test]
    fn identity_cipher_adds_key() {
        let walls = ToyCipherSpec::walls();
        let id: Vec<u8> = (0..8).collect();
        let round = Round::new(&walls, vec![id.clone(), id], Gf2Matrix::identity(6)).unwrap();
        let c = TbCipher::new(walls, vec![round], KeySchedule::Constant).unwrap();
        let k: Gf2Vector = "101100".parse().unwrap();
        for p in Gf2Vector::all(6) {
            assert_eq!(c.encrypt(k, p).unwrap(), p + k);
        }
    }

    #[test]
    fn round_trip_all_plaintexts() {
        let c = ToyCipherSpec::default().build().unwrap();
        for key in [0u64, 0b101011, 63] {
            for x in 0..64 {
                assert_eq!(c.decrypt_bits(key, c.encrypt_bits(key, x)), x);
            }
        }
    }

    #[test]
    fn swap_is_not_affine() {
        let sum = toy_hidden_sum();
        let mut f: Vec<u64> = (0..64).collect();
        f.swap(0, 1);
        assert!(is_affine_wrt(&f, &sum).is_none());
        let id: Vec<u64> = (0..64).collect();
        let a = is_affine_wrt(&id, &sum).unwrap();
        assert!(a.m.is_identity() && a.t.is_zero());
    }

    #[test]
    fn spec_file_round_trip() {
        let spec = ToyCipherSpec::default();
        let text = spec.to_toml();
        assert!(text.contains("sbox = \"06374152\""));
        assert_eq!(ToyCipherSpec::from_toml(&text).unwrap(), spec);
        assert!(ToyCipherSpec::from_toml(&text.replace("06374152", "06374150")).is_err());
    }
}
