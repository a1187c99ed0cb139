use std::collections::HashMap;

use crate::error::{AuditError, Result};
use crate::scalar::Scalar;

/// Dense table of per-instance vectors keyed by instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<F> {
    dim: usize,
    ids: Vec<usize>,
    values: Vec<F>,
    index: HashMap<usize, usize>,
}

impl<F: Scalar> EmbeddingTable<F> {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            ids: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, id: usize, vector: Vec<F>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(AuditError::InvalidData(format!(
                "embedding {id} has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&id) {
            return Err(AuditError::InvalidData(format!(
                "duplicate embedding id {id}"
            )));
        }
        self.index.insert(id, self.ids.len());
        self.ids.push(id);
        self.values.extend(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in file order.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn get(&self, id: usize) -> Option<&[F]> {
        self.index
            .get(&id)
            .map(|&row| &self.values[row * self.dim..(row + 1) * self.dim])
    }

    /// Ids in `0..n` without a row.
    pub fn missing_ids(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|id| !self.index.contains_key(id)).collect()
    }
}
