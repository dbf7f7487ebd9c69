//! Leveled closure of a seed set under the elementary combinations.
//!
//! Level `k + 1` is level `k` together with every defined `x op y` for `x, y`
//! in level `k` (pairwise mode), or every `x op a` and `a op x` for `x` in
//! level `k` and `a` a seed (chain-strict mode). Division by zero is skipped.

use ahash::{AHashMap as HashMap, AHashSet as HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{combine, ElementaryOp, Rational};

pub const DEFAULT_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("no seeds given")]
    NoSeeds,
    #[error("level {level} would exceed the cardinality limit of {limit}")]
    LimitExceeded { level: usize, limit: usize },
    #[error("could not start worker pool: {0}")]
    WorkerPool(String),
}

impl ClosureError {
    pub fn name(&self) -> &'static str {
        match self {
            ClosureError::NoSeeds => "NoSeeds",
            ClosureError::LimitExceeded { .. } => "LimitExceeded",
            ClosureError::WorkerPool(_) => "WorkerPool",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    /// Any two members of the previous level may be combined.
    #[default]
    Pairwise,
    /// Each step combines a member of the previous level with a seed.
    ChainStrict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureOptions {
    /// Maximum cardinality of any level; `None` disables the guard.
    pub limit: Option<usize>,
    /// Worker threads; `0` uses rayon's global pool.
    pub workers: usize,
    pub mode: ChainMode,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            limit: Some(DEFAULT_LIMIT),
            workers: 0,
            mode: ChainMode::Pairwise,
        }
    }
}

/// The levels `M_0 ⊆ M_1 ⊆ ... ⊆ M_n` of a closure enumeration.
///
/// Each member is stored once together with the first level it appears in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureSet {
    seeds: Vec<Rational>,
    mode: ChainMode,
    first_level: HashMap<Rational, usize>,
    sizes: Vec<usize>,
}

impl ClosureSet {
    pub fn seeds(&self) -> &[Rational] {
        &self.seeds
    }

    pub fn mode(&self) -> ChainMode {
        self.mode
    }

    /// Number of combination steps enumerated.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `|M_k|` for `k = 0..=depth`.
    pub fn cardinality_profile(&self) -> Vec<(usize, usize)> {
        self.sizes.iter().copied().enumerate().collect()
    }

    /// Smallest level containing `q`.
    pub fn contains(&self, q: &Rational) -> Option<usize> {
        self.first_level.get(q).copied()
    }

    /// Members of level `k`, sorted ascending. Panics if `k > depth`.
    pub fn level(&self, k: usize) -> Vec<Rational> {
        assert!(k <= self.depth(), "level {k} beyond depth {}", self.depth());
        let mut v: Vec<Rational> = self
            .first_level
            .iter()
            .filter(|(_, &lvl)| lvl <= k)
            .map(|(q, _)| q.clone())
            .collect();
        v.sort_unstable();
        v
    }

    /// Members first reached at level `k`, sorted ascending.
    pub fn new_at(&self, k: usize) -> Vec<Rational> {
        let mut v: Vec<Rational> = self
            .first_level
            .iter()
            .filter(|(_, &lvl)| lvl == k)
            .map(|(q, _)| q.clone())
            .collect();
        v.sort_unstable();
        v
    }

    /// Plain-text export of level `k`: a `level k count c` header followed by
    /// one canonical rational per line, ascending.
    pub fn to_text(&self, k: usize) -> String {
        let members = self.level(k);
        let mut out = format!("level {k} count {}\n", members.len());
        for q in members {
            let _ = writeln!(out, "{q}");
        }
        out
    }

    pub fn to_export(&self) -> ClosureExport {
        ClosureExport {
            format_version: 1,
            seeds: self.seeds.clone(),
            mode: self.mode,
            n: self.depth(),
            levels: (0..=self.depth()).map(|k| self.level(k)).collect(),
        }
    }
}

/// JSON shape of an enumerated closure; every level is listed in full.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureExport {
    pub format_version: u32,
    pub seeds: Vec<Rational>,
    pub mode: ChainMode,
    pub n: usize,
    pub levels: Vec<Vec<Rational>>,
}

/// Enumerates `n` levels of the closure of `seeds`.
pub fn enumerate_closure(
    seeds: &[Rational],
    n: usize,
    opts: &ClosureOptions,
) -> Result<ClosureSet, ClosureError> {
    if seeds.is_empty() {
        return Err(ClosureError::NoSeeds);
    }
    if opts.workers == 0 {
        return enumerate_in_pool(seeds, n, opts);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| ClosureError::WorkerPool(e.to_string()))?;
    pool.install(|| enumerate_in_pool(seeds, n, opts))
}

fn enumerate_in_pool(
    seeds: &[Rational],
    n: usize,
    opts: &ClosureOptions,
) -> Result<ClosureSet, ClosureError> {
    let mut seeds_sorted = seeds.to_vec();
    seeds_sorted.sort_unstable();
    seeds_sorted.dedup();
    let limit = opts.limit.unwrap_or(usize::MAX);
    if seeds_sorted.len() > limit {
        return Err(ClosureError::LimitExceeded { level: 0, limit });
    }
    let mut first_level: HashMap<Rational, usize> =
        seeds_sorted.iter().map(|q| (q.clone(), 0)).collect();
    let mut sizes = vec![first_level.len()];

    for level in 1..=n {
        let mut current: Vec<Rational> = first_level.keys().cloned().collect();
        current.sort_unstable();
        let partners: &[Rational] = match opts.mode {
            ChainMode::Pairwise => &current,
            ChainMode::ChainStrict => &seeds_sorted,
        };
        let fresh = next_level(&current, partners, opts.mode, &first_level, limit, level)?;
        first_level.extend(fresh.into_iter().map(|q| (q, level)));
        sizes.push(first_level.len());
    }

    Ok(ClosureSet {
        seeds: seeds_sorted,
        mode: opts.mode,
        first_level,
        sizes,
    })
}

/// Values not yet in `known` produced from `current` and `partners`.
fn next_level(
    current: &[Rational],
    partners: &[Rational],
    mode: ChainMode,
    known: &HashMap<Rational, usize>,
    limit: usize,
    level: usize,
) -> Result<HashSet<Rational>, ClosureError> {
    let per_row = 4 * partners.len() * if mode == ChainMode::ChainStrict { 2 } else { 1 };
    let batch = (1 << 20) / per_row.max(1) + rayon::current_num_threads();
    let bound = current.len().saturating_mul(per_row);
    let mut fresh: HashSet<Rational> =
        HashSet::with_capacity(bound.min(limit.saturating_sub(known.len()) + 1));

    for rows in current.chunks(batch) {
        let produced: Vec<Vec<Rational>> = rows
            .par_iter()
            .map(|x| {
                let mut local = Vec::with_capacity(per_row);
                for y in partners {
                    for op in ElementaryOp::ALL {
                        if let Ok(v) = combine(x, y, op) {
                            if !known.contains_key(&v) {
                                local.push(v);
                            }
                        }
                        if mode == ChainMode::ChainStrict {
                            if let Ok(v) = combine(y, x, op) {
                                if !known.contains_key(&v) {
                                    local.push(v);
                                }
                            }
                        }
                    }
                }
                local
            })
            .collect();
        for v in produced.into_iter().flatten() {
            fresh.insert(v);
            if known.len() + fresh.len() > limit {
                return Err(ClosureError::LimitExceeded { level, limit });
            }
        }
    }
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn one() -> Vec<Rational> {
        vec![Rational::one()]
    }

    #[test]
    fn small_levels() {
        let cs = enumerate_closure(&one(), 2, &ClosureOptions::default()).unwrap();
        assert_eq!(cs.cardinality_profile(), vec![(0, 1), (1, 3), (2, 8)]);
        assert_eq!(cs.level(1), vec![r("0"), r("1"), r("2")]);
        let m2: Vec<Rational> = ["-2", "-1", "0", "1/2", "1", "2", "3", "4"]
            .iter()
            .map(|s| r(s))
            .collect();
        assert_eq!(cs.level(2), m2);
        assert_eq!(cs.contains(&r("1/2")), Some(2));
        assert_eq!(cs.contains(&r("1")), Some(0));
        assert_eq!(cs.contains(&r("5")), None);
        let cs0 = enumerate_closure(&one(), 0, &ClosureOptions::default()).unwrap();
        assert_eq!(cs0.cardinality_profile(), vec![(0, 1)]);
    }

    #[test]
    fn text_export() {
        let cs = enumerate_closure(&one(), 1, &ClosureOptions::default()).unwrap();
        assert_eq!(cs.to_text(1), "level 1 count 3\n0\n1\n2\n");
        assert_eq!(cs.to_text(0), "level 0 count 1\n1\n");
    }

    #[test]
    fn zero_seed_and_multiple_seeds() {
        let cs = enumerate_closure(&[Rational::zero()], 3, &ClosureOptions::default()).unwrap();
        assert_eq!(
            cs.cardinality_profile(),
            vec![(0, 1), (1, 1), (2, 1), (3, 1)]
        );
        let cs =
            enumerate_closure(&[r("2"), r("3"), r("2")], 1, &ClosureOptions::default()).unwrap();
        assert_eq!(cs.seeds(), &[r("2"), r("3")]);
        assert!(cs.contains(&r("2/3")).is_some() && cs.contains(&r("6")).is_some());
    }

    #[test]
    fn empty_seeds_rejected() {
        assert_eq!(
            enumerate_closure(&[], 1, &ClosureOptions::default()),
            Err(ClosureError::NoSeeds)
        );
    }

    #[test]
    fn limit_reports_level() {
        let opts = ClosureOptions {
            limit: Some(10),
            ..Default::default()
        };
        assert_eq!(
            enumerate_closure(&one(), 5, &opts),
            Err(ClosureError::LimitExceeded {
                level: 3,
                limit: 10
            })
        );
        let opts = ClosureOptions {
            limit: Some(8),
            ..Default::default()
        };
        assert!(enumerate_closure(&one(), 2, &opts).is_ok());
    }

    #[test]
    fn chain_strict_reading() {
        let opts = ClosureOptions {
            mode: ChainMode::ChainStrict,
            ..Default::default()
        };
        let cs = enumerate_closure(&one(), 2, &opts).unwrap();
        // {1} -> {0,1,2} -> adds x±1, 1-x, x*1, x/1, 1/x for x in {0,1,2}
        assert_eq!(
            cs.level(2),
            ["-1", "0", "1/2", "1", "2", "3"]
                .iter()
                .map(|s| r(s))
                .collect::<Vec<_>>()
        );
        let pairwise = enumerate_closure(&one(), 2, &ClosureOptions::default()).unwrap();
        for q in cs.level(2) {
            assert!(pairwise.contains(&q).is_some());
        }
    }

    #[test]
    fn worker_count_does_not_change_levels() {
        let a = enumerate_closure(
            &one(),
            4,
            &ClosureOptions {
                workers: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let b = enumerate_closure(
            &one(),
            4,
            &ClosureOptions {
                workers: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_export(), b.to_export());
    }
}
