use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::scalar::Real;

/// Which symbol family a Gaussian table stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Entity,
    Relation,
}

/// Dense row-major table of vectors, indexed by symbol id.
///
/// This is the shape of everything that is not a Gaussian: trained point
/// estimates, gradients, optimizer moments, centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    dim: usize,
    values: Vec<T>,
}

impl<T: Real> ValueTable<T> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        ValueTable {
            dim,
            values: vec![T::zero(); rows * dim],
        }
    }

    pub fn from_rows(dim: usize, values: Vec<T>) -> Result<Self, ModelError> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(ModelError::DimMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        Ok(ValueTable { dim, values })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, id: u32) -> &[T] {
        let start = id as usize * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn row_mut(&mut self, id: u32) -> &mut [T] {
        let start = id as usize * self.dim;
        &mut self.values[start..start + self.dim]
    }

    pub fn push_row(&mut self, row: &[T]) -> Result<u32, ModelError> {
        if row.len() != self.dim {
            return Err(ModelError::DimMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        let id = self.len() as u32;
        self.values.extend_from_slice(row);
        Ok(id)
    }

    /// Appends zero rows until the table holds `rows` rows.
    pub fn grow_to(&mut self, rows: usize) {
        if rows * self.dim > self.values.len() {
            self.values.resize(rows * self.dim, T::zero());
        }
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// Widens or narrows every component to a different scalar type.
    pub fn convert<U: Real>(&self) -> ValueTable<U> {
        ValueTable {
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|&v| U::from_f64_lossy(v.to_f64_lossy()))
                .collect(),
        }
    }
}

/// Diagonal-Gaussian embedding table: one mean vector and one precision
/// vector per id, appended in id order and never removed.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTable<T> {
    kind: TableKind,
    means: ValueTable<T>,
    precisions: ValueTable<T>,
}

impl<T: Real> GaussianTable<T> {
    pub fn new(kind: TableKind, dim: usize) -> Self {
        GaussianTable {
            kind,
            means: ValueTable::zeros(0, dim),
            precisions: ValueTable::zeros(0, dim),
        }
    }

    /// Rebuilds a table from raw row-major storage, checking shape and
    /// precision positivity.
    pub fn from_raw(
        kind: TableKind,
        dim: usize,
        means: Vec<T>,
        precisions: Vec<T>,
    ) -> Result<Self, ModelError> {
        if means.len() != precisions.len() {
            return Err(ModelError::DimMismatch {
                expected: means.len(),
                got: precisions.len(),
            });
        }
        let table = GaussianTable {
            kind,
            means: ValueTable::from_rows(dim, means)?,
            precisions: ValueTable::from_rows(dim, precisions)?,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means.dim()
    }

    pub fn mean(&self, id: u32) -> &[T] {
        self.means.row(id)
    }

    pub fn precision(&self, id: u32) -> &[T] {
        self.precisions.row(id)
    }

    pub(crate) fn mean_mut(&mut self, id: u32) -> &mut [T] {
        self.means.row_mut(id)
    }

    pub(crate) fn precision_mut(&mut self, id: u32) -> &mut [T] {
        self.precisions.row_mut(id)
    }

    pub fn means(&self) -> &ValueTable<T> {
        &self.means
    }

    pub fn precisions(&self) -> &ValueTable<T> {
        &self.precisions
    }

    /// Creates Gaussians for ids that extend the table contiguously. Means
    /// are drawn uniformly from `[-6/sqrt(d), 6/sqrt(d)]` per component and
    /// precisions start at `lambda_init`.
    pub fn init_new_ids(
        &mut self,
        new_ids: impl Iterator<Item = u32>,
        lambda_init: T,
        rng: &mut ChaCha8Rng,
    ) -> Result<(), ModelError> {
        if !(lambda_init > T::zero()) {
            return Err(ModelError::BadHyper("lambda_init must be positive".into()));
        }
        let dim = self.dim();
        let bound = 6.0 / (dim as f64).sqrt();
        let mut mean = vec![T::zero(); dim];
        let precision = vec![lambda_init; dim];
        for id in new_ids {
            if id as usize != self.len() {
                return Err(ModelError::NonContiguousId {
                    len: self.len(),
                    id,
                });
            }
            for slot in mean.iter_mut() {
                *slot = T::from_f64_lossy(rng.gen_range(-bound..=bound));
            }
            self.means.push_row(&mean)?;
            self.precisions.push_row(&precision)?;
        }
        Ok(())
    }

    /// Copy of all means as a plain value table, the starting point for
    /// training the next snapshot.
    pub fn means_value_table(&self) -> ValueTable<T> {
        self.means.clone()
    }

    /// Checks that every stored precision is positive and finite.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (component, &precision) in self.precisions.as_slice().iter().enumerate() {
            if !(precision > T::zero()) || !precision.is_finite() {
                return Err(ModelError::NonPositivePrecision { component });
            }
        }
        for (component, &mean) in self.means.as_slice().iter().enumerate() {
            if !mean.is_finite() {
                return Err(ModelError::NonPositivePrecision { component });
            }
        }
        Ok(())
    }
}
