//! Random-projection forest for approximate top-k angular search.
//!
//! The forest only stores tree structure and item ids; candidate re-scoring
//! reads vectors from the [`EmbeddingMatrix`] it was built over, attached at
//! query time through [`RPForest::searcher`].
//!
//! ```no_run
//! # use subjtag::ann::{IndexConfig, RPForest};
//! # use subjtag::embedding::EmbeddingMatrix;
//! # fn demo(subjects: &EmbeddingMatrix, doc_vec: &[f32]) -> subjtag::Result<()> {
//! let forest = RPForest::build(subjects, &IndexConfig::default())?;
//! let hits = forest.searcher(subjects)?.query(doc_vec, 10, 50_000)?;
//! # Ok(()) }
//! ```

mod build;
mod exact;
mod io;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};

pub use exact::exact_topk;
pub use io::{decode_forest, encode_forest, load_forest, save_forest};

pub const DEFAULT_N_TREES: usize = 100;
pub const DEFAULT_LEAF_SIZE: usize = 16;
pub const DEFAULT_SEARCH_K: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    pub n_trees: usize,
    pub leaf_size: usize,
    pub seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            n_trees: DEFAULT_N_TREES,
            leaf_size: DEFAULT_LEAF_SIZE,
            seed: 42,
        }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::input("n_trees must be at least 1"));
        }
        if self.leaf_size < 2 {
            return Err(Error::input("leaf_size must be at least 2"));
        }
        if u32::try_from(self.n_trees).is_err() || u32::try_from(self.leaf_size).is_err() {
            return Err(Error::input("n_trees and leaf_size must fit in u32"));
        }
        Ok(())
    }
}

/// Points with `dot(normal, x) - offset > 0` go right, the rest go left.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f32>,
    pub offset: f32,
}

impl Hyperplane {
    #[inline]
    pub fn margin(&self, x: &[f32]) -> f32 {
        dot(&self.normal, x) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        plane: Hyperplane,
        left: u32,
        right: u32,
    },
    /// `degenerate` leaves could not be split and may exceed `leaf_size`.
    Leaf { items: Vec<u32>, degenerate: bool },
}

/// Nodes in allocation order; the root is node 0 and children always have
/// larger indices than their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaves(&self) -> impl Iterator<Item = (&[u32], bool)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { items, degenerate } => Some((items.as_slice(), *degenerate)),
            Node::Split { .. } => None,
        })
    }
}

/// Immutable forest over the rows of one embedding matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RPForest {
    config: IndexConfig,
    dim: usize,
    item_ids: Vec<String>,
    trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub subject_code: String,
    pub score: f32,
    pub rank: usize,
}

impl RPForest {
    /// Builds `n_trees` trees in parallel. Tree `t` draws from its own
    /// generator seeded by `(cfg.seed, t)`, so the result does not depend on
    /// thread scheduling.
    pub fn build(m: &EmbeddingMatrix, cfg: &IndexConfig) -> Result<Self> {
        build::build(m, cfg, true)
    }

    /// Same output as [`RPForest::build`], one tree at a time.
    pub fn build_serial(m: &EmbeddingMatrix, cfg: &IndexConfig) -> Result<Self> {
        build::build(m, cfg, false)
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// The smallest `search_k` that makes every query exhaustive.
    pub fn exhaustive_search_k(&self) -> usize {
        self.len() * self.trees.len()
    }

    /// Pairs the forest with the vectors it was built over. Fails unless the
    /// matrix has the forest's dim and exactly its ids, in order.
    pub fn searcher<'a>(&'a self, vectors: &'a EmbeddingMatrix) -> Result<ForestIndex<'a>> {
        if vectors.dim() != self.dim {
            return Err(Error::input(format!(
                "forest has dim {}, matrix has dim {}",
                self.dim,
                vectors.dim()
            )));
        }
        if vectors.ids() != self.item_ids.as_slice() {
            return Err(Error::input(format!(
                "forest indexes {} items but matrix has {} rows with a different id set",
                self.item_ids.len(),
                vectors.len()
            )));
        }
        Ok(ForestIndex {
            forest: self,
            vectors,
        })
    }

    fn from_parts(
        config: IndexConfig,
        dim: usize,
        item_ids: Vec<String>,
        trees: Vec<Tree>,
    ) -> Self {
        RPForest {
            config,
            dim,
            item_ids,
            trees,
        }
    }
}

/// A forest bound to its vectors; cheap to copy and safe to share across
/// threads.
#[derive(Debug, Clone, Copy)]
pub struct ForestIndex<'a> {
    forest: &'a RPForest,
    vectors: &'a EmbeddingMatrix,
}

#[derive(Debug, PartialEq)]
struct QueueEntry {
    priority: f32,
    tree: u32,
    node: u32,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on priority; earlier trees and nodes first on ties.
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.tree.cmp(&self.tree))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> ForestIndex<'a> {
    pub fn forest(&self) -> &'a RPForest {
        self.forest
    }

    pub fn vectors(&self) -> &'a EmbeddingMatrix {
        self.vectors
    }

    /// Approximate top-`k` by cosine similarity.
    ///
    /// Best-first traversal over one queue holding every root at +inf. At a
    /// split with margin `m` the child on the query's side is queued at
    /// `min(p, |m|)` and the other at `min(p, -|m|)`. Leaves add their items
    /// to the pool until at least `search_k` items have been inspected. The
    /// de-duplicated pool is scored exactly.
    pub fn query(&self, q: &[f32], k: usize, search_k: usize) -> Result<Vec<Candidate>> {
        if k < 1 || search_k < 1 {
            return Err(Error::input("k and search_k must be at least 1"));
        }
        if q.len() != self.forest.dim {
            return Err(Error::input(format!(
                "query has dim {}, index has dim {}",
                q.len(),
                self.forest.dim
            )));
        }
        let pool = self.candidate_pool(q, search_k);
        let scored = pool
            .into_iter()
            .map(|i| (i as usize, dot(self.vectors.row(i as usize), q)))
            .collect();
        Ok(rank_scored(scored, self.vectors.ids(), k))
    }

    fn candidate_pool(&self, q: &[f32], search_k: usize) -> Vec<u32> {
        let trees = &self.forest.trees;
        let mut heap = BinaryHeap::with_capacity(trees.len() * 4);
        for t in 0..trees.len() {
            heap.push(QueueEntry {
                priority: f32::INFINITY,
                tree: t as u32,
                node: 0,
            });
        }
        let mut seen = vec![false; self.forest.len()];
        let mut pool = Vec::new();
        let mut inspected = 0usize;
        while let Some(entry) = heap.pop() {
            match &trees[entry.tree as usize].nodes[entry.node as usize] {
                Node::Leaf { items, .. } => {
                    inspected += items.len();
                    for &i in items {
                        if !std::mem::replace(&mut seen[i as usize], true) {
                            pool.push(i);
                        }
                    }
                    if inspected >= search_k {
                        break;
                    }
                }
                Node::Split { plane, left, right } => {
                    let m = plane.margin(q);
                    let (near, far) = if m > 0.0 {
                        (*right, *left)
                    } else {
                        (*left, *right)
                    };
                    heap.push(QueueEntry {
                        priority: entry.priority.min(m.abs()),
                        tree: entry.tree,
                        node: near,
                    });
                    heap.push(QueueEntry {
                        priority: entry.priority.min(-m.abs()),
                        tree: entry.tree,
                        node: far,
                    });
                }
            }
        }
        pool
    }
}

/// Sorts `(row, score)` by score descending then id ascending, keeps `k`,
/// and assigns 1-based ranks.
pub(crate) fn rank_scored(
    mut scored: Vec<(usize, f32)>,
    ids: &[String],
    k: usize,
) -> Vec<Candidate> {
    let by_order = |a: &(usize, f32), b: &(usize, f32)| {
        b.1.total_cmp(&a.1).then_with(|| ids[a.0].cmp(&ids[b.0]))
    };
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, by_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_order);
    scored
        .into_iter()
        .enumerate()
        .map(|(r, (i, score))| Candidate {
            subject_code: ids[i].clone(),
            score,
            rank: r + 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::normalize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_matrix(n: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let mut v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                normalize(&mut v);
                v
            })
            .collect();
        EmbeddingMatrix::from_rows((0..n).map(|i| format!("s{i:05}")).collect(), rows).unwrap()
    }

    #[test]
    fn small_corpus_is_single_leaf() {
        let m = random_matrix(10, 8, 1);
        let cfg = IndexConfig {
            n_trees: 3,
            leaf_size: 16,
            seed: 1,
        };
        let f = RPForest::build(&m, &cfg).unwrap();
        assert_eq!(f.trees().len(), 3);
        for t in f.trees() {
            assert_eq!(t.nodes.len(), 1);
            let (items, degenerate) = t.leaves().next().unwrap();
            assert_eq!(items.len(), 10);
            assert!(!degenerate);
        }
    }

    #[test]
    fn leaves_partition_items() {
        let m = random_matrix(1000, 16, 2);
        let cfg = IndexConfig {
            n_trees: 5,
            leaf_size: 16,
            seed: 9,
        };
        let f = RPForest::build(&m, &cfg).unwrap();
        for t in f.trees() {
            let mut all: Vec<u32> = t.leaves().flat_map(|(items, _)| items.to_vec()).collect();
            all.sort_unstable();
            assert_eq!(all, (0..1000).collect::<Vec<u32>>());
            assert!(t.leaves().all(|(items, deg)| deg || items.len() <= 16));
        }
    }

    #[test]
    fn serial_and_parallel_builds_match() {
        let m = random_matrix(500, 16, 3);
        let cfg = IndexConfig {
            n_trees: 8,
            leaf_size: 8,
            seed: 5,
        };
        let a = RPForest::build(&m, &cfg).unwrap();
        let b = RPForest::build_serial(&m, &cfg).unwrap();
        assert_eq!(encode_forest(&a).unwrap(), encode_forest(&b).unwrap());
    }

    #[test]
    fn self_retrieval() {
        let m = random_matrix(300, 16, 4);
        let f = RPForest::build(&m, &IndexConfig::default()).unwrap();
        let idx = f.searcher(&m).unwrap();
        let hits = idx.query(m.row(17), 1, f.exhaustive_search_k()).unwrap();
        assert_eq!(hits[0].subject_code, m.ids()[17]);
        assert!((hits[0].score - 1.0).abs() < 1e-5);
        assert_eq!(hits[0].rank, 1);
    }

    #[test]
    fn exhaustive_matches_exact() {
        let m = random_matrix(400, 12, 5);
        let cfg = IndexConfig {
            n_trees: 10,
            leaf_size: 8,
            seed: 3,
        };
        let f = RPForest::build(&m, &cfg).unwrap();
        let idx = f.searcher(&m).unwrap();
        let q = random_matrix(1, 12, 99);
        let approx = idx.query(q.row(0), 25, f.exhaustive_search_k()).unwrap();
        let exact = exact_topk(&m, q.row(0), 25).unwrap();
        assert_eq!(approx, exact);
    }

    #[test]
    fn bad_query_arguments() {
        let m = random_matrix(50, 8, 6);
        let f = RPForest::build(&m, &IndexConfig::default()).unwrap();
        let idx = f.searcher(&m).unwrap();
        assert!(idx.query(m.row(0), 0, 10).is_err());
        assert!(idx.query(m.row(0), 1, 0).is_err());
        assert!(idx.query(&[1.0; 7], 1, 10).is_err());
    }

    #[test]
    fn searcher_rejects_other_matrix() {
        let m = random_matrix(50, 8, 6);
        let other = random_matrix(40, 8, 6);
        let f = RPForest::build(&m, &IndexConfig::default()).unwrap();
        let err = f.searcher(&other).unwrap_err().to_string();
        assert!(err.contains("50") && err.contains("40"), "{err}");
        let wide = random_matrix(50, 16, 6);
        assert!(f.searcher(&wide).is_err());
    }

    #[test]
    fn duplicate_vectors_become_degenerate_leaf() {
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]; 40];
        let m =
            EmbeddingMatrix::from_rows((0..40).map(|i| format!("d{i}")).collect(), rows).unwrap();
        let cfg = IndexConfig {
            n_trees: 2,
            leaf_size: 4,
            seed: 1,
        };
        let f = RPForest::build(&m, &cfg).unwrap();
        for t in f.trees() {
            let leaves: Vec<_> = t.leaves().collect();
            assert_eq!(leaves.len(), 1);
            assert!(leaves[0].1);
            assert_eq!(leaves[0].0.len(), 40);
        }
    }

    #[test]
    fn invalid_config() {
        let m = random_matrix(5, 8, 1);
        for cfg in [
            IndexConfig {
                n_trees: 0,
                ..Default::default()
            },
            IndexConfig {
                leaf_size: 1,
                ..Default::default()
            },
        ] {
            assert!(RPForest::build(&m, &cfg).is_err());
        }
    }
}
