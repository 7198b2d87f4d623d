//! Incremental sparse row echelon form over an exact field.
//!
//! Columns are plain indices; the caller decides which monomial each index
//! stands for, and smaller indices are eliminated first. Each stored row has
//! a unit pivot at its smallest column.

use std::collections::BTreeMap;

use crate::scalar::Coefficient;

/// Sparse vector: column index to nonzero value.
pub type SparseRow<K> = BTreeMap<usize, K>;

#[derive(Clone, Debug)]
pub struct Echelon<K: Coefficient> {
    pivots: BTreeMap<usize, SparseRow<K>>,
}

impl<K: Coefficient> Default for Echelon<K> {
    fn default() -> Self {
        Self { pivots: BTreeMap::new() }
    }
}

impl<K: Coefficient> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Eliminates pivot columns from `row` until its smallest column is free.
    /// Returns the number of row operations performed.
    fn reduce_head(&self, row: &mut SparseRow<K>) -> usize {
        let mut steps = 0;
        while let Some((&col, _)) = row.iter().next() {
            match self.pivots.get(&col) {
                Some(p) => {
                    let factor = row[&col].clone();
                    axpy(row, p, &factor);
                    steps += 1;
                }
                None => break,
            }
        }
        steps
    }

    /// Inserts a row; returns `true` when it increased the rank.
    pub fn insert(&mut self, mut row: SparseRow<K>) -> bool {
        row.retain(|_, v| !v.is_zero());
        self.reduce_head(&mut row);
        let Some((&lead, lead_val)) = row.iter().next() else {
            return false;
        };
        let inv = K::one() / lead_val.clone();
        for v in row.values_mut() {
            *v = v.clone() * inv.clone();
        }
        self.pivots.insert(lead, row);
        true
    }

    /// Fully reduces `row` so that no pivot column remains in its support.
    /// Returns the number of elimination steps.
    pub fn normal_form(&self, row: &mut SparseRow<K>) -> usize {
        row.retain(|_, v| !v.is_zero());
        let mut steps = 0;
        let mut cursor = 0usize;
        loop {
            let next = row.range(cursor..).map(|(&c, _)| c).find(|c| self.pivots.contains_key(c));
            let Some(col) = next else { break };
            let factor = row[&col].clone();
            axpy(row, &self.pivots[&col], &factor);
            steps += 1;
            cursor = col + 1;
        }
        steps
    }
}

/// `row -= factor * pivot_row`, dropping cancelled entries.
fn axpy<K: Coefficient>(row: &mut SparseRow<K>, pivot_row: &SparseRow<K>, factor: &K) {
    for (&c, v) in pivot_row {
        let delta = factor.clone() * v.clone();
        match row.get_mut(&c) {
            Some(x) => {
                let nv = x.clone() - delta;
                if nv.is_zero() {
                    row.remove(&c);
                } else {
                    *x = nv;
                }
            }
            None => {
                row.insert(c, -delta);
            }
        }
    }
}
