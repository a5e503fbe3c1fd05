use std::collections::HashMap;

/// Gradient rows for a subset of a parameter table, in first-touch order.
#[derive(Clone, Debug, Default)]
pub struct SparseRows {
    width: usize,
    ids: Vec<usize>,
    values: Vec<f64>,
    slots: HashMap<usize, usize>,
}

impl SparseRows {
    pub fn new(width: usize) -> Self {
        SparseRows {
            width,
            ..Default::default()
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Zero-initialized on first access.
    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        let slot = *self.slots.entry(id).or_insert_with(|| {
            self.ids.push(id);
            self.values.resize(self.values.len() + self.width, 0.0);
            self.ids.len() - 1
        });
        &mut self.values[slot * self.width..(slot + 1) * self.width]
    }

    pub fn row(&self, id: usize) -> Option<&[f64]> {
        self.slots
            .get(&id)
            .map(|&slot| &self.values[slot * self.width..(slot + 1) * self.width])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.ids
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.width.max(1)))
    }

    /// Dense `rows × width` copy.
    pub fn to_dense(&self, rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * self.width];
        for (id, row) in self.iter() {
            out[id * self.width..(id + 1) * self.width].copy_from_slice(row);
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
