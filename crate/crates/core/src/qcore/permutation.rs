use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Bijection on `{0, …, size-1}`: element at position `i` moves to `mapping[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationMap {
    mapping: Vec<usize>,
}

impl PermutationMap {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &target in &mapping {
            if target >= mapping.len() || seen[target] {
                return Err(Error::Contract(format!(
                    "mapping {mapping:?} is not a bijection"
                )));
            }
            seen[target] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            mapping: (0..size).collect(),
        }
    }

    /// Transposition of `a` and `b`.
    pub fn swap(size: usize, a: usize, b: usize) -> Result<Self> {
        if a >= size || b >= size {
            return Err(Error::Contract(format!("swap({a}, {b}) out of range {size}")));
        }
        let mut mapping: Vec<usize> = (0..size).collect();
        mapping.swap(a, b);
        Ok(Self { mapping })
    }

    /// Permutation that gathers `order[k]` into position `k`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let mut mapping = vec![usize::MAX; order.len()];
        for (k, &from) in order.iter().enumerate() {
            if from >= order.len() || mapping[from] != usize::MAX {
                return Err(Error::Contract(format!("order {order:?} is not a permutation")));
            }
            mapping[from] = k;
        }
        Ok(Self { mapping })
    }

    /// Uniformly random permutation.
    pub fn random(size: usize, rng: &mut RandomStream) -> Self {
        let mut mapping: Vec<usize> = (0..size).collect();
        mapping.shuffle(rng);
        Self { mapping }
    }

    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut mapping = vec![0; self.mapping.len()];
        for (from, &to) in self.mapping.iter().enumerate() {
            mapping[to] = from;
        }
        Self { mapping }
    }

    /// Reorders a sequence: `out[mapping[i]] = items[i]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Result<Vec<T>> {
        if items.len() != self.mapping.len() {
            return Err(Error::Contract(format!(
                "permutation of size {} applied to {} items",
                self.mapping.len(),
                items.len()
            )));
        }
        let mut out: Vec<Option<T>> = vec![None; items.len()];
        for (item, &to) in items.iter().zip(&self.mapping) {
            out[to] = Some(item.clone());
        }
        Ok(out.into_iter().map(|x| x.expect("bijection")).collect())
    }
}

impl TryFrom<Vec<usize>> for PermutationMap {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        Self::new(mapping)
    }
}

impl From<PermutationMap> for Vec<usize> {
    fn from(p: PermutationMap) -> Self {
        p.mapping
    }
}
