//! Global deduction against an encryption oracle that is affine for a known
//! hidden sum.
//!
//! With `vᵢ = eᵢg⁻¹` the ∘-basis and `[x]` the ∘-coordinates of `x`, an
//! ∘-affine `φ` satisfies `[vφ] = [v]·M + [t]`. Querying `0` and every `vᵢ`
//! fixes `t = [0φ]` and the rows `[vᵢφ] + t` of `M`.

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gf2::{mask, vec_mat, Gf2Error, Gf2Matrix, Gf2Vector};
use crate::hiddensum::{EmbeddedHiddenSum, HiddenSum, StandardHiddenSum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("derived rows are dependent: the oracle is not affine for this hidden sum")]
    SingularReconstruction,
    #[error("the oracle offers no decryption queries")]
    NoDecryptionOracle,
}

/// Query access to a cipher. Every call through the interface is counted.
pub struct OracleInterface<'a> {
    dim: usize,
    encrypt: Box<dyn FnMut(u64) -> u64 + 'a>,
    decrypt: Option<Box<dyn FnMut(u64) -> u64 + 'a>>,
    enc_queries: u64,
    dec_queries: u64,
}

impl<'a> OracleInterface<'a> {
    pub fn new(dim: usize, encrypt: impl FnMut(u64) -> u64 + 'a) -> Self {
        Self {
            dim,
            encrypt: Box::new(encrypt),
            decrypt: None,
            enc_queries: 0,
            dec_queries: 0,
        }
    }

    pub fn with_decrypt(mut self, decrypt: impl FnMut(u64) -> u64 + 'a) -> Self {
        self.decrypt = Some(Box::new(decrypt));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(encryptions, decryptions)` issued so far.
    pub fn counters(&self) -> (u64, u64) {
        (self.enc_queries, self.dec_queries)
    }

    fn check(&self, v: Gf2Vector) -> Result<(), Gf2Error> {
        if v.dim() == self.dim {
            Ok(())
        } else {
            Err(Gf2Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            })
        }
    }

    pub fn encrypt_query(&mut self, v: Gf2Vector) -> Result<Gf2Vector, AttackError> {
        self.check(v)?;
        Ok(Gf2Vector::truncated(self.dim, self.encrypt_bits(v.bits())))
    }

    pub fn decrypt_query(&mut self, c: Gf2Vector) -> Result<Gf2Vector, AttackError> {
        self.check(c)?;
        Ok(Gf2Vector::truncated(self.dim, self.decrypt_bits(c.bits())?))
    }

    fn encrypt_bits(&mut self, x: u64) -> u64 {
        self.enc_queries += 1;
        (self.encrypt)(x) & mask(self.dim)
    }

    fn decrypt_bits(&mut self, y: u64) -> Result<u64, AttackError> {
        let f = self
            .decrypt
            .as_mut()
            .ok_or(AttackError::NoDecryptionOracle)?;
        self.dec_queries += 1;
        Ok(f(y) & mask(self.dim))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Encryptions only; `M⁻¹` by Gauss–Jordan elimination.
    Cpa,
    /// Encryptions and decryptions; `M⁻¹` read off the decryption queries.
    CpaCca,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Cpa => "cpa",
            Variant::CpaCca => "cpa-cca",
        })
    }
}

/// The recovered map `[v] ↦ [v]·M + [t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    pub m: Gf2Matrix,
    pub m_inv: Gf2Matrix,
    pub t: Gf2Vector,
    pub hidden_sum: EmbeddedHiddenSum,
    pub variant: Variant,
    pub enc_queries: u64,
    pub dec_queries: u64,
    /// Row additions spent obtaining `M⁻¹`.
    pub row_ops: u64,
}

/// Recovers `φ` with `N + 1` encryptions (plus `N + 1` decryptions for
/// [`Variant::CpaCca`]).
pub fn mount_attack(
    oracle: &mut OracleInterface<'_>,
    sum: &EmbeddedHiddenSum,
    variant: Variant,
) -> Result<Reconstruction, AttackError> {
    let n = sum.dim();
    if oracle.dim() != n {
        return Err(Gf2Error::DimensionMismatch {
            expected: n,
            found: oracle.dim(),
        }
        .into());
    }
    let (enc0, dec0) = oracle.counters();
    let basis: Vec<u64> = sum.basis().iter().map(Gf2Vector::bits).collect();

    let t = sum.coordinates_bits(oracle.encrypt_bits(0));
    let rows: Vec<u64> = basis
        .iter()
        .map(|&v| sum.coordinates_bits(oracle.encrypt_bits(v)) ^ t)
        .collect();
    let m = Gf2Matrix::from_rows(n, rows)?;

    let (m_inv, row_ops) = match variant {
        Variant::Cpa => m
            .inverse_counting()
            .map_err(|_| AttackError::SingularReconstruction)?,
        Variant::CpaCca => {
            let s = sum.coordinates_bits(oracle.decrypt_bits(0)?);
            let inv_rows = basis
                .iter()
                .map(|&v| Ok(sum.coordinates_bits(oracle.decrypt_bits(v)?) ^ s))
                .collect::<Result<Vec<u64>, AttackError>>()?;
            let m_inv = Gf2Matrix::from_rows(n, inv_rows)?;
            if !m.mul(&m_inv)?.is_identity() {
                return Err(AttackError::SingularReconstruction);
            }
            (m_inv, n as u64)
        }
    };
    let (enc1, dec1) = oracle.counters();
    Ok(Reconstruction {
        m,
        m_inv,
        t: Gf2Vector::truncated(n, t),
        hidden_sum: sum.clone(),
        variant,
        enc_queries: enc1 - enc0,
        dec_queries: dec1 - dec0,
        row_ops,
    })
}

impl Reconstruction {
    pub fn dim(&self) -> usize {
        self.hidden_sum.dim()
    }

    pub fn predict_encrypt_bits(&self, v: u64) -> u64 {
        let s = &self.hidden_sum;
        s.combine_bits(vec_mat(s.coordinates_bits(v), self.m.row_words()) ^ self.t.bits())
    }

    pub fn predict_decrypt_bits(&self, c: u64) -> u64 {
        let s = &self.hidden_sum;
        s.combine_bits(vec_mat(
            s.coordinates_bits(c) ^ self.t.bits(),
            self.m_inv.row_words(),
        ))
    }
}

pub fn predict_encrypt(r: &Reconstruction, v: Gf2Vector) -> Result<Gf2Vector, AttackError> {
    r.hidden_sum.check(v)?;
    Ok(Gf2Vector::truncated(
        r.dim(),
        r.predict_encrypt_bits(v.bits()),
    ))
}

pub fn predict_decrypt(r: &Reconstruction, c: Gf2Vector) -> Result<Gf2Vector, AttackError> {
    r.hidden_sum.check(c)?;
    Ok(Gf2Vector::truncated(
        r.dim(),
        r.predict_decrypt_bits(c.bits()),
    ))
}

/// Outcome of checking a reconstruction against the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub points: u64,
    pub mismatches: u64,
    pub verification_queries: u64,
    pub attack_enc_queries: u64,
    pub attack_dec_queries: u64,
}

/// Compares [`predict_encrypt`] with the oracle on every point (`N ≤ 16`).
pub fn verify_global_deduction(
    oracle: &mut OracleInterface<'_>,
    r: &Reconstruction,
) -> VerificationReport {
    assert!(r.dim() <= 16, "exhaustive verification needs N <= 16");
    verify_on(oracle, r, 0..1u64 << r.dim())
}

/// Compares [`predict_encrypt`] with the oracle on the given points.
pub fn verify_on(
    oracle: &mut OracleInterface<'_>,
    r: &Reconstruction,
    points: impl IntoIterator<Item = u64>,
) -> VerificationReport {
    let before = oracle.counters().0;
    let mut count = 0;
    let mut mismatches = 0;
    for x in points {
        count += 1;
        if oracle.encrypt_bits(x) != r.predict_encrypt_bits(x) {
            mismatches += 1;
        }
    }
    VerificationReport {
        points: count,
        mismatches,
        verification_queries: oracle.counters().0 - before,
        attack_enc_queries: r.enc_queries,
        attack_dec_queries: r.dec_queries,
    }
}

/// Text report with the reconstruction in row-string form.
#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub variant: Variant,
    pub enc_queries: u64,
    pub dec_queries: u64,
    pub verification_queries: u64,
    pub mismatches: u64,
    pub row_ops: u64,
    #[serde(rename = "M")]
    pub m: Vec<String>,
    #[serde(rename = "M_inv")]
    pub m_inv: Vec<String>,
    pub t: String,
}

impl AttackReport {
    pub fn new(r: &Reconstruction, v: &VerificationReport) -> Self {
        Self {
            variant: r.variant,
            enc_queries: r.enc_queries,
            dec_queries: r.dec_queries,
            verification_queries: v.verification_queries,
            mismatches: v.mismatches,
            row_ops: r.row_ops,
            m: r.m.to_strings(),
            m_inv: r.m_inv.to_strings(),
            t: r.t.to_string(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

const RANDOM_ATTEMPTS: usize = 4096;

/// A uniformly random invertible `n×n` matrix.
pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Gf2Matrix {
    loop {
        let rows = (0..n).map(|_| rng.random::<u64>() & mask(n)).collect();
        let m = Gf2Matrix::from_rows(n, rows).expect("masked rows");
        if m.is_invertible() {
            return m;
        }
    }
}

/// A random non-degenerate block normal form with the given shape; `None` if
/// rejection sampling finds none (an odd head with `tail = 1` has none).
pub fn random_standard<R: Rng + ?Sized>(
    head: usize,
    tail: usize,
    rng: &mut R,
) -> Option<StandardHiddenSum> {
    (0..RANDOM_ATTEMPTS).find_map(|_| {
        let pairs = (0..head * head.saturating_sub(1) / 2)
            .map(|_| rng.random::<u64>() & mask(tail))
            .collect();
        StandardHiddenSum::new(head, tail, pairs).ok()
    })
}

/// `x ↦ combine([x + k₁]·M + t) + k₂`: affine for `sum`, keyed on both sides by
/// translations.
#[derive(Clone, Debug)]
pub struct SyntheticTarget {
    pub sum: EmbeddedHiddenSum,
    m: Gf2Matrix,
    m_inv: Gf2Matrix,
    t: u64,
    k1: u64,
    k2: u64,
}

impl SyntheticTarget {
    /// Random target at dimension `N ≥ 3`, with `dim U = N − ⌊N/2⌋`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        assert!(
            (3..=64).contains(&dim),
            "synthetic targets need 3 <= N <= 64"
        );
        let head = (dim / 2).max(2);
        let std =
            random_standard(head, dim - head, rng).expect("half-and-half shapes are nonempty");
        let sum = EmbeddedHiddenSum::new(std, random_invertible(dim, rng))
            .expect("invertible conjugator");
        let m = random_invertible(dim, rng);
        Self {
            sum,
            m_inv: m.inverse().expect("invertible"),
            m,
            t: rng.random::<u64>() & mask(dim),
            k1: rng.random::<u64>() & mask(dim),
            k2: rng.random::<u64>() & mask(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.dim()
    }

    pub fn encrypt(&self, x: u64) -> u64 {
        let s = &self.sum;
        s.combine_bits(vec_mat(s.coordinates_bits(x ^ self.k1), self.m.row_words()) ^ self.t)
            ^ self.k2
    }

    pub fn decrypt(&self, y: u64) -> u64 {
        let s = &self.sum;
        s.combine_bits(vec_mat(
            s.coordinates_bits(y ^ self.k2) ^ self.t,
            self.m_inv.row_words(),
        )) ^ self.k1
    }

    pub fn oracle(&self) -> OracleInterface<'_> {
        OracleInterface::new(self.dim(), |x| self.encrypt(x)).with_decrypt(|y| self.decrypt(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_oracle() {
        let sum = EmbeddedHiddenSum::standard(StandardHiddenSum::new(2, 1, vec![1]).unwrap());
        let mut oracle = OracleInterface::new(3, |x| x);
        let r = mount_attack(&mut oracle, &sum, Variant::Cpa).unwrap();
        assert!(r.m.is_identity());
        assert!(r.t.is_zero());
        assert_eq!(oracle.counters(), (4, 0));
        for v in Gf2Vector::all(3) {
            assert_eq!(predict_encrypt(&r, v).unwrap(), v);
        }
    }

    #[test]
    fn translation_with_plain_sum() {
        let plus = EmbeddedHiddenSum::standard(StandardHiddenSum::translations(5));
        let c = 0b10110u64;
        let mut oracle = OracleInterface::new(5, move |x| x ^ c);
        let r = mount_attack(&mut oracle, &plus, Variant::Cpa).unwrap();
        assert!(r.m.is_identity());
        assert_eq!(r.t.bits(), c);
        assert_eq!(verify_global_deduction(&mut oracle, &r).mismatches, 0);
    }

    #[test]
    fn missing_decryption_is_an_error() {
        let plus = EmbeddedHiddenSum::standard(StandardHiddenSum::translations(3));
        let mut oracle = OracleInterface::new(3, |x| x);
        assert_eq!(
            mount_attack(&mut oracle, &plus, Variant::CpaCca),
            Err(AttackError::NoDecryptionOracle)
        );
    }

    #[test]
    fn constant_oracle_is_singular() {
        let plus = EmbeddedHiddenSum::standard(StandardHiddenSum::translations(4));
        let mut oracle = OracleInterface::new(4, |_| 0b0110);
        assert_eq!(
            mount_attack(&mut oracle, &plus, Variant::Cpa),
            Err(AttackError::SingularReconstruction)
        );
    }

    #[test]
    fn synthetic_targets_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [6, 9, 13] {
            let target = SyntheticTarget::random(dim, &mut rng);
            for variant in [Variant::Cpa, Variant::CpaCca] {
                let mut oracle = target.oracle();
                let r = mount_attack(&mut oracle, &target.sum, variant).unwrap();
                let report = verify_global_deduction(&mut oracle, &r);
                assert_eq!(report.mismatches, 0);
                assert_eq!(r.enc_queries, dim as u64 + 1);
                for x in 0..1u64 << dim {
                    assert_eq!(r.predict_decrypt_bits(r.predict_encrypt_bits(x)), x);
                }
            }
        }
    }
}
