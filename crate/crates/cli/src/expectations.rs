use hiddensum::classify::{ClassTable, EXPECTATIONS};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct Dimension {
    #[serde(rename = "N")]
    pub dim: usize,
    pub sizes: Vec<u64>,
    pub dim_u: Vec<usize>,
}

#[derive(Debug, Deserialize)]
pub struct AttackBudget {
    pub toy_queries_cpa: u64,
    pub toy_queries_cpa_cca: u64,
}

#[derive(Debug, Deserialize)]
pub struct Expectations {
    pub dimension: Vec<Dimension>,
    pub attack: AttackBudget,
}

impl Expectations {
    pub fn embedded() -> Result<Self, toml::de::Error> {
        toml::from_str(EXPECTATIONS)
    }

    /// `(dim U, size)` pairs, sorted.
    pub fn classes(&self, dim: usize) -> Option<Vec<(usize, u64)>> {
        let entry = self.dimension.iter().find(|e| e.dim == dim)?;
        let mut pairs: Vec<_> = entry
            .dim_u
            .iter()
            .copied()
            .zip(entry.sizes.iter().copied())
            .collect();
        pairs.sort_unstable();
        Some(pairs)
    }

    /// Classes of equal `dim U` are compared as multisets of sizes.
    pub fn check_classes(&self, dim: usize, table: &ClassTable) -> Result<(), String> {
        let expected = self
            .classes(dim)
            .ok_or_else(|| format!("no reference classes for N = {dim}"))?;
        let mut found = crate::table_sizes(table);
        found.sort_unstable();
        if found == expected {
            Ok(())
        } else {
            Err(format!("expected {expected:?}, found {found:?}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_parses() {
        let e = Expectations::embedded().unwrap();
        assert_eq!(e.dimension.len(), 4);
        assert_eq!(e.classes(4).unwrap(), vec![(2, 105), (4, 1)]);
        assert_eq!(e.attack.toy_queries_cpa, 7);
        for d in &e.dimension {
            let total: u64 = d.sizes.iter().sum();
            assert_eq!(d.sizes.len(), d.dim_u.len());
            assert!(total > 0);
        }
    }
}
