//! Conjugacy classes of hidden sums under `GL(V,+)`.
//!
//! A group is keyed by its structure constants `eᵢ·eⱼ` (`i < j`), which fix
//! every `κ_a` by bilinearity. Up to `N = 6` the packed constants fit in 90
//! bits and serve directly as the digest; above that the digest is a hash and
//! the full packing is kept for comparison.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Algebra;
use crate::enumerate::{self, EnumerateError, DEFAULT_CAP};
use crate::exec::{self, Exec};
use crate::gf2::{vec_mat, AffineMap, Gf2Matrix, Gf2Vector};
use crate::hiddensum::{
    EmbeddedHiddenSum, GeneratedGroup, GroupDocument, HiddenSumError, StandardHiddenSum,
};

/// Largest dimension whose keys are exact 128-bit integers.
pub const EXACT_KEY_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    HiddenSum(#[from] HiddenSumError),
    #[error("conjugate {key:#x} fell outside the enumerated universe")]
    OrbitEscapedUniverse { key: u128 },
    #[error("seed {key:#x} is not in the universe")]
    SeedNotInUniverse { key: u128 },
    #[error("the full N = {0} classification is slow; enable it explicitly")]
    CapExceeded(usize),
    #[error("classification covers 3 <= N <= 6, got {0}")]
    InvalidDimension(usize),
    #[error("enumeration produced a repeated group")]
    DuplicateGroup,
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("format: {0}")]
    Format(String),
}

/// Identifies a group as a set of maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub digest: u128,
    pub full: Option<Vec<u64>>,
}

impl CanonicalKey {
    pub fn of_algebra(algebra: &Algebra) -> Self {
        let words = algebra.packed_upper();
        if algebra.dim() <= EXACT_KEY_DIM {
            return Self {
                digest: exact_digest(&words),
                full: None,
            };
        }
        let half = |tag: u8| {
            let mut h = DefaultHasher::new();
            tag.hash(&mut h);
            algebra.dim().hash(&mut h);
            words.hash(&mut h);
            h.finish()
        };
        Self {
            digest: u128::from(half(0)) | u128::from(half(1)) << 64,
            full: Some(words),
        }
    }
}

fn exact_digest(words: &[u64]) -> u128 {
    u128::from(words[0]) | words.get(1).map_or(0, |&w| u128::from(w) << 64)
}

pub fn canonical_key(t: &EmbeddedHiddenSum) -> CanonicalKey {
    CanonicalKey::of_algebra(&t.algebra())
}

pub fn canonical_key_of_group(t: &GeneratedGroup) -> Result<CanonicalKey, ClassifyError> {
    Ok(CanonicalKey::of_algebra(&t.algebra()?))
}

/// Exact key of `g·std·g⁻¹` for `N ≤ 6`, without building the algebra.
fn embedded_key(std: &StandardHiddenSum, g: &Gf2Matrix, g_inv: &Gf2Matrix) -> u128 {
    let n = std.dim();
    debug_assert!(n <= EXACT_KEY_DIM);
    let (gw, hw) = (g.row_words(), g_inv.row_words());
    let mut key = 0u128;
    let mut pos = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let p = vec_mat(std.product_bits(gw[i], gw[j]), hw);
            key |= u128::from(p) << pos;
            pos += n;
        }
    }
    key
}

fn unpack_table(dim: usize, key: u128) -> [u64; EXACT_KEY_DIM * EXACT_KEY_DIM] {
    let mut t = [0u64; EXACT_KEY_DIM * EXACT_KEY_DIM];
    let m = (1u128 << dim) - 1;
    let mut pos = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = (key >> pos & m) as u64;
            t[i * EXACT_KEY_DIM + j] = v;
            t[j * EXACT_KEY_DIM + i] = v;
            pos += dim;
        }
    }
    t
}

/// Key of `h⁻¹Th`: `x·′y = ((x h⁻¹)·(y h⁻¹)) h`.
fn conjugate_key(dim: usize, key: u128, h: &[u64], h_inv: &[u64]) -> u128 {
    let t = unpack_table(dim, key);
    let mul = |x: u64, y: u64| {
        let mut acc = 0u64;
        let mut xs = x;
        while xs != 0 {
            let a = xs.trailing_zeros() as usize;
            let mut ys = y;
            while ys != 0 {
                let b = ys.trailing_zeros() as usize;
                acc ^= t[a * EXACT_KEY_DIM + b];
                ys &= ys - 1;
            }
            xs &= xs - 1;
        }
        acc
    };
    let mut out = 0u128;
    let mut pos = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            out |= u128::from(vec_mat(mul(h_inv[i], h_inv[j]), h)) << pos;
            pos += dim;
        }
    }
    out
}

/// `(dim U, dim V·V)`, constant on conjugacy classes.
fn key_invariants(dim: usize, key: u128) -> (u8, u8) {
    let a = Algebra::from_packed_upper(dim, &[key as u64, (key >> 64) as u64]);
    (a.annihilator().len() as u8, a.square_span().len() as u8)
}

/// The elementary transvection `e₁ ↦ e₁ + e₂` and the cycle `eᵢ ↦ eᵢ₊₁`.
pub fn gl_generators(dim: usize) -> (Gf2Matrix, Gf2Matrix) {
    assert!(dim >= 2, "gl_generators needs N >= 2");
    let mut t = Gf2Matrix::identity(dim);
    t.set(0, 1, true);
    let perm: Vec<usize> = (0..dim).map(|i| (i + 1) % dim).collect();
    (t, Gf2Matrix::permutation(&perm))
}

/// All keys of the groups with `T₊ ⊆ AGL(V,∘)` at dimension `N`, sorted, with
/// their class invariants.
#[derive(Clone, Debug)]
pub struct Universe {
    dim: usize,
    keys: Vec<u128>,
    invariants: Vec<(u8, u8)>,
}

impl Universe {
    pub fn build(dim: usize, exec: Exec) -> Result<Self, ClassifyError> {
        if !(3..=EXACT_KEY_DIM).contains(&dim) {
            return Err(ClassifyError::InvalidDimension(dim));
        }
        let mut keys = vec![0u128];
        for d in 1..=dim - 2 {
            keys.extend(enumerate::map_all(exec, dim, d, DEFAULT_CAP, |t, w| {
                embedded_key(t, &w.mapper, &w.frame)
            })?);
        }
        exec::sort_unstable(exec, &mut keys);
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(ClassifyError::DuplicateGroup);
        }
        let invariants = exec::map_slice(exec, &keys, |&k| key_invariants(dim, k));
        Ok(Self {
            dim,
            keys,
            invariants,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn contains(&self, key: u128) -> bool {
        self.index_of(key).is_some()
    }

    fn index_of(&self, key: u128) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    /// Universe indices grouped by `(dim U, dim V·V)`.
    fn strata(&self) -> BTreeMap<(u8, u8), Vec<usize>> {
        let mut out: BTreeMap<(u8, u8), Vec<usize>> = BTreeMap::new();
        for (i, &inv) in self.invariants.iter().enumerate() {
            out.entry(inv).or_default().push(i);
        }
        out
    }

    /// Breadth-first orbit of `seed`, marking `visited`. Frontier expansion
    /// runs in parallel; the returned indices are sorted.
    fn orbit_from(
        &self,
        seed: usize,
        visited: &[AtomicBool],
        exec: Exec,
    ) -> Result<Vec<usize>, ClassifyError> {
        let (t, c) = gl_generators(self.dim);
        let gens: Vec<(Vec<u64>, Vec<u64>)> = [t, c]
            .into_iter()
            .map(|h| {
                let inv = h.inverse().expect("generators are invertible");
                (h.row_words().to_vec(), inv.row_words().to_vec())
            })
            .collect();
        visited[seed].store(true, Ordering::Relaxed);
        let mut orbit = vec![seed];
        let mut frontier = vec![seed];
        while !frontier.is_empty() {
            let next: Vec<Result<usize, u128>> = exec::flat_map_slice(exec, &frontier, |&i| {
                gens.iter()
                    .filter_map(|(h, h_inv)| {
                        let k = conjugate_key(self.dim, self.keys[i], h, h_inv);
                        match self.index_of(k) {
                            None => Some(Err(k)),
                            Some(j) if !visited[j].swap(true, Ordering::Relaxed) => Some(Ok(j)),
                            Some(_) => None,
                        }
                    })
                    .collect()
            });
            frontier = next
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map_err(|key| ClassifyError::OrbitEscapedUniverse { key })?;
            orbit.extend_from_slice(&frontier);
        }
        orbit.sort_unstable();
        Ok(orbit)
    }
}

impl Universe {
    /// Sorted orbit of a key already in the universe.
    pub fn orbit_of_key(&self, key: u128, exec: Exec) -> Result<Vec<u128>, ClassifyError> {
        let idx = self
            .index_of(key)
            .ok_or(ClassifyError::SeedNotInUniverse { key })?;
        let visited: Vec<AtomicBool> = (0..self.len()).map(|_| AtomicBool::new(false)).collect();
        let orbit = self.orbit_from(idx, &visited, exec)?;
        Ok(orbit.into_iter().map(|i| self.keys[i]).collect())
    }
}

/// Keys of the `GL(V,+)`-orbit of `seed`, sorted.
pub fn gl_orbit(seed: &EmbeddedHiddenSum, universe: &Universe) -> Result<Vec<u128>, ClassifyError> {
    gl_orbit_with(seed, universe, Exec::default())
}

pub fn gl_orbit_with(
    seed: &EmbeddedHiddenSum,
    universe: &Universe,
    exec: Exec,
) -> Result<Vec<u128>, ClassifyError> {
    universe.orbit_of_key(canonical_key(seed).digest, exec)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub size: u64,
    pub dim_u: usize,
    /// Least key in the class.
    pub key: u128,
    pub representative: EmbeddedHiddenSum,
}

/// Classes ordered by decreasing `dim U`, then by least key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTable {
    pub dim: usize,
    pub classes: Vec<ClassEntry>,
}

fn representative_of(dim: usize, key: u128) -> Result<EmbeddedHiddenSum, ClassifyError> {
    let algebra = Algebra::from_packed_upper(dim, &[key as u64, (key >> 64) as u64]);
    Ok(algebra
        .standardize()
        .map_err(HiddenSumError::from)?
        .embedded()?)
}

/// Partitions the universe at dimension `N` into `GL(V,+)`-orbits.
/// `N = 6` runs only with `allow_slow`.
pub fn classify_all(dim: usize, allow_slow: bool) -> Result<ClassTable, ClassifyError> {
    classify_all_with(dim, allow_slow, Exec::default())
}

pub fn classify_all_with(
    dim: usize,
    allow_slow: bool,
    exec: Exec,
) -> Result<ClassTable, ClassifyError> {
    if dim == 6 && !allow_slow {
        return Err(ClassifyError::CapExceeded(dim));
    }
    let universe = Universe::build(dim, exec)?;
    classify_universe(&universe, exec)
}

pub fn classify_universe(universe: &Universe, exec: Exec) -> Result<ClassTable, ClassifyError> {
    let visited: Vec<AtomicBool> = (0..universe.len())
        .map(|_| AtomicBool::new(false))
        .collect();
    let mut classes = Vec::new();
    for ((dim_u, _), members) in universe.strata() {
        for &seed in &members {
            if visited[seed].load(Ordering::Relaxed) {
                continue;
            }
            let orbit = universe.orbit_from(seed, &visited, exec)?;
            debug_assert!(orbit
                .iter()
                .all(|&i| universe.invariants[i] == universe.invariants[seed]));
            let key = universe.keys[orbit[0]];
            classes.push(ClassEntry {
                size: orbit.len() as u64,
                dim_u: dim_u as usize,
                key,
                representative: representative_of(universe.dim, key)?,
            });
        }
    }
    classes.sort_by(|a, b| b.dim_u.cmp(&a.dim_u).then(a.key.cmp(&b.key)));
    Ok(ClassTable {
        dim: universe.dim,
        classes,
    })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    #[serde(rename = "N")]
    dim: usize,
    class_index: usize,
    size: u64,
    dim_u: usize,
    representative_id: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    representative: Vec<SidecarEntry>,
}

#[derive(Serialize, Deserialize)]
struct SidecarEntry {
    id: String,
    #[serde(flatten)]
    group: GroupDocument,
}

impl ClassTable {
    pub fn sizes(&self) -> Vec<u64> {
        self.classes.iter().map(|c| c.size).collect()
    }

    pub fn dims_u(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.dim_u).collect()
    }

    /// Position of the class containing `key`, found by orbit membership.
    pub fn locate(&self, universe: &Universe, key: u128) -> Result<Option<usize>, ClassifyError> {
        let least = universe.orbit_of_key(key, Exec::default())?[0];
        Ok(self.classes.iter().position(|c| c.key == least))
    }

    pub fn total(&self) -> u64 {
        self.classes.iter().map(|c| c.size).sum()
    }

    fn representative_id(&self, index: usize) -> String {
        format!("N{}-C{}", self.dim, index + 1)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (i, c) in self.classes.iter().enumerate() {
            w.serialize(CsvRow {
                dim: self.dim,
                class_index: i + 1,
                size: c.size,
                dim_u: c.dim_u,
                representative_id: self.representative_id(i),
            })
            .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    pub fn sidecar_toml(&self) -> String {
        let sidecar = Sidecar {
            representative: self
                .classes
                .iter()
                .enumerate()
                .map(|(i, c)| SidecarEntry {
                    id: self.representative_id(i),
                    group: c.representative.to_document(),
                })
                .collect(),
        };
        toml::to_string(&sidecar).expect("sidecar serializes")
    }

    pub fn from_parts(csv_text: &str, sidecar_text: &str) -> Result<Self, ClassifyError> {
        let sidecar: Sidecar =
            toml::from_str(sidecar_text).map_err(|e| ClassifyError::Format(e.to_string()))?;
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let mut dim = None;
        let mut classes = Vec::new();
        for row in reader.deserialize::<CsvRow>() {
            let row = row.map_err(|e| ClassifyError::Format(e.to_string()))?;
            if *dim.get_or_insert(row.dim) != row.dim {
                return Err(ClassifyError::Format(
                    "mixed dimensions in class table".into(),
                ));
            }
            if row.class_index != classes.len() + 1 {
                return Err(ClassifyError::Format(format!(
                    "unexpected class index {}",
                    row.class_index
                )));
            }
            let entry = sidecar
                .representative
                .iter()
                .find(|e| e.id == row.representative_id)
                .ok_or_else(|| {
                    ClassifyError::Format(format!(
                        "missing representative {}",
                        row.representative_id
                    ))
                })?;
            let representative = entry.group.into_embedded()?;
            classes.push(ClassEntry {
                size: row.size,
                dim_u: row.dim_u,
                key: canonical_key(&representative).digest,
                representative,
            });
        }
        let dim = dim.ok_or_else(|| ClassifyError::Format("empty class table".into()))?;
        Ok(Self { dim, classes })
    }

    /// Writes `<stem>.csv` and `<stem>.toml`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<(), ClassifyError> {
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(dir.join(format!("{stem}.toml")), self.sidecar_toml())?;
        Ok(())
    }

    pub fn import(dir: &Path, stem: &str) -> Result<Self, ClassifyError> {
        let csv_text = std::fs::read_to_string(dir.join(format!("{stem}.csv")))?;
        let sidecar = std::fs::read_to_string(dir.join(format!("{stem}.toml")))?;
        Self::from_parts(&csv_text, &sidecar)
    }
}

#[derive(Deserialize)]
struct AppendixFile {
    group: Vec<AppendixRecord>,
}

#[derive(Deserialize)]
struct AppendixRecord {
    #[serde(rename = "N")]
    dim: usize,
    class: String,
    kappas: Vec<Vec<String>>,
}

/// A listed class representative.
#[derive(Clone, Debug)]
pub struct AppendixGroup {
    pub label: String,
    pub group: GeneratedGroup,
}

const APPENDIX: &str = include_str!("../data/appendix.toml");

/// Reference class sizes and attack query budgets.
pub const EXPECTATIONS: &str = include_str!("../data/expectations.toml");

/// Listed representatives at dimension `N ∈ {3,4,5,6}`, labelled `C1, C2, …`.
pub fn appendix_representatives(dim: usize) -> Vec<AppendixGroup> {
    let file: AppendixFile = toml::from_str(APPENDIX).expect("bundled appendix data parses");
    file.group
        .into_iter()
        .filter(|r| r.dim == dim)
        .map(|r| {
            let generators = (0..dim)
                .map(|i| {
                    let kappa = r
                        .kappas
                        .get(i)
                        .map(|rows| Gf2Matrix::from_strs(rows).expect("bundled matrix parses"))
                        .unwrap_or_else(|| Gf2Matrix::identity(dim));
                    AffineMap::new(kappa, Gf2Vector::unit(dim, i))
                        .expect("bundled matrix is invertible")
                })
                .collect();
            AppendixGroup {
                label: r.class,
                group: GeneratedGroup::new(generators).expect("non-empty generator list"),
            }
        })
        .collect()
}

pub fn load_appendix_representatives(dim: usize) -> Vec<GeneratedGroup> {
    appendix_representatives(dim)
        .into_iter()
        .map(|a| a.group)
        .collect()
}
