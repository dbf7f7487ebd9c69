//! Integer index layouts for a finite set of results.

use std::collections::HashSet;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("result set is empty")]
    Empty,
    #[error("duplicate result at position {0}")]
    Duplicate(usize),
}

impl IndexError {
    pub fn name(&self) -> &'static str {
        match self {
            IndexError::Empty => "EmptyResultSet",
            IndexError::Duplicate(_) => "DuplicateResult",
        }
    }
}

/// A non-empty ordered list of pairwise distinct results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet<T> {
    items: Vec<T>,
}

impl<T: Eq + Hash> ResultSet<T> {
    pub fn new(items: Vec<T>) -> Result<Self, IndexError> {
        if items.is_empty() {
            return Err(IndexError::Empty);
        }
        let mut seen = HashSet::with_capacity(items.len());
        if let Some(pos) = items.iter().position(|x| !seen.insert(x)) {
            return Err(IndexError::Duplicate(pos));
        }
        Ok(ResultSet { items })
    }
}

impl<T> ResultSet<T> {
    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `(k, y_k)` for `k = 1..=|M|` in input order.
pub fn linear_index<T>(rs: &ResultSet<T>) -> Vec<(usize, &T)> {
    rs.items
        .iter()
        .enumerate()
        .map(|(i, y)| (i + 1, y))
        .collect()
}

/// Index of the `k`-th (1-based) of `m` results in the symmetric layout.
pub fn symmetric_position(k: usize, m: usize) -> i64 {
    2 * k as i64 - m as i64 - 1
}

/// Inverse of [`symmetric_position`]; `None` for indices outside the layout.
pub fn linear_position(index: i64, m: usize) -> Option<usize> {
    let twice_k = index + m as i64 + 1;
    if twice_k <= 0 || twice_k % 2 != 0 {
        return None;
    }
    let k = (twice_k / 2) as usize;
    (k <= m).then_some(k)
}

/// Results labelled `-(|M|-1), -(|M|-3), ..., |M|-3, |M|-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricIndex<'a, T> {
    pub assignments: Vec<(i64, &'a T)>,
}

impl<'a, T> SymmetricIndex<'a, T> {
    pub fn indices(&self) -> Vec<i64> {
        self.assignments.iter().map(|(i, _)| *i).collect()
    }

    pub fn get(&self, index: i64) -> Option<&'a T> {
        let k = linear_position(index, self.assignments.len())?;
        Some(self.assignments[k - 1].1)
    }
}

pub fn symmetric_index<T>(rs: &ResultSet<T>) -> SymmetricIndex<'_, T> {
    let m = rs.len();
    SymmetricIndex {
        assignments: rs
            .items
            .iter()
            .enumerate()
            .map(|(i, y)| (symmetric_position(i + 1, m), y))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: usize) -> ResultSet<usize> {
        ResultSet::new((0..m).collect()).unwrap()
    }

    #[test]
    fn small_symmetric_patterns() {
        assert_eq!(symmetric_index(&set(3)).indices(), vec![-2, 0, 2]);
        assert_eq!(symmetric_index(&set(4)).indices(), vec![-3, -1, 1, 3]);
        assert_eq!(symmetric_index(&set(1)).indices(), vec![0]);
    }

    #[test]
    fn linear_examples() {
        let rs = ResultSet::new(vec!["a", "b", "c"]).unwrap();
        assert_eq!(linear_index(&rs), vec![(1, &"a"), (2, &"b"), (3, &"c")]);
        let one = ResultSet::new(vec!["y"]).unwrap();
        assert_eq!(linear_index(&one), vec![(1, &"y")]);
    }

    #[test]
    fn lookup_by_symmetric_index() {
        let rs = ResultSet::new(vec!["a", "b", "c", "d"]).unwrap();
        let idx = symmetric_index(&rs);
        assert_eq!(idx.get(-3), Some(&"a"));
        assert_eq!(idx.get(1), Some(&"c"));
        assert_eq!(idx.get(0), None);
        assert_eq!(idx.get(5), None);
    }

    #[test]
    fn validation() {
        assert_eq!(ResultSet::<u8>::new(vec![]), Err(IndexError::Empty));
        assert_eq!(ResultSet::new(vec![1, 2, 1]), Err(IndexError::Duplicate(2)));
    }

    #[test]
    fn layout_for_many_sizes() {
        for m in 1..=200 {
            let rs = set(m);
            let idx = symmetric_index(&rs).indices();
            assert_eq!(idx.first(), Some(&-(m as i64 - 1)));
            assert_eq!(idx.last(), Some(&(m as i64 - 1)));
            assert!(idx.windows(2).all(|w| w[1] - w[0] == 2));
            for (k, &i) in idx.iter().enumerate() {
                assert_eq!(linear_position(i, m), Some(k + 1));
                assert!(idx.contains(&-i));
            }
        }
    }
}
