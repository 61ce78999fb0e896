use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Hyperplane, IndexConfig, Node, RPForest, Tree};
use crate::embedding::{dot, normalize, EmbeddingMatrix};
use crate::error::{Error, Result};

const SPLIT_ATTEMPTS: usize = 3;

pub(super) fn build(m: &EmbeddingMatrix, cfg: &IndexConfig, parallel: bool) -> Result<RPForest> {
    cfg.validate()?;
    if m.is_empty() {
        return Err(Error::input("cannot index an empty matrix"));
    }
    if u32::try_from(m.len()).is_err() {
        return Err(Error::input("too many items for a u32-addressed forest"));
    }
    let trees = if parallel {
        (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| build_tree(m, cfg, t))
            .collect()
    } else {
        (0..cfg.n_trees).map(|t| build_tree(m, cfg, t)).collect()
    };
    Ok(RPForest::from_parts(*cfg, m.dim(), m.ids().to_vec(), trees))
}

fn tree_seed(seed: u64, tree: usize) -> u64 {
    // splitmix64 step over the (seed, tree) pair.
    let mut z = seed
        ^ (tree as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn build_tree(m: &EmbeddingMatrix, cfg: &IndexConfig, t: usize) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(cfg.seed, t));
    let mut nodes = vec![placeholder()];
    // Explicit stack: duplicate-heavy data can peel one item per split.
    let mut pending: Vec<(u32, Vec<u32>)> = vec![(0, (0..m.len() as u32).collect())];
    while let Some((slot, items)) = pending.pop() {
        if items.len() <= cfg.leaf_size {
            nodes[slot as usize] = Node::Leaf {
                items,
                degenerate: false,
            };
            continue;
        }
        match split(m, &items, &mut rng) {
            Some((plane, left_items, right_items)) => {
                let left = nodes.len() as u32;
                let right = left + 1;
                nodes.push(placeholder());
                nodes.push(placeholder());
                nodes[slot as usize] = Node::Split { plane, left, right };
                pending.push((right, right_items));
                pending.push((left, left_items));
            }
            None => {
                nodes[slot as usize] = Node::Leaf {
                    items,
                    degenerate: true,
                };
            }
        }
    }
    Tree { nodes }
}

fn placeholder() -> Node {
    Node::Leaf {
        items: Vec::new(),
        degenerate: false,
    }
}

type Split = (Hyperplane, Vec<u32>, Vec<u32>);

/// Two-point split: the perpendicular bisector of two sampled items. Falls
/// back to a Gaussian direction cut at the median projection, and gives up
/// (degenerate leaf) when every attempt leaves one side empty.
fn split(m: &EmbeddingMatrix, items: &[u32], rng: &mut ChaCha8Rng) -> Option<Split> {
    let dim = m.dim();
    for _ in 0..SPLIT_ATTEMPTS {
        let i = rng.random_range(0..items.len());
        let mut j = rng.random_range(0..items.len() - 1);
        if j >= i {
            j += 1;
        }
        let a = m.row(items[i] as usize);
        let b = m.row(items[j] as usize);
        if a == b {
            continue;
        }
        let mut normal: Vec<f32> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        if !normalize(&mut normal) {
            continue;
        }
        let mid: Vec<f32> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let offset = dot(&normal, &mid);
        if let Some(s) = partition(m, items, Hyperplane { normal, offset }) {
            return Some(s);
        }
    }
    for _ in 0..SPLIT_ATTEMPTS {
        let mut normal: Vec<f32> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if !normalize(&mut normal) {
            continue;
        }
        let mut proj: Vec<f32> = items
            .iter()
            .map(|&i| dot(&normal, m.row(i as usize)))
            .collect();
        proj.sort_unstable_by(f32::total_cmp);
        let n = proj.len();
        let offset = if n % 2 == 1 {
            proj[n / 2]
        } else {
            0.5 * (proj[n / 2 - 1] + proj[n / 2])
        };
        if let Some(s) = partition(m, items, Hyperplane { normal, offset }) {
            return Some(s);
        }
    }
    None
}

fn partition(m: &EmbeddingMatrix, items: &[u32], plane: Hyperplane) -> Option<Split> {
    let (right, left): (Vec<u32>, Vec<u32>) = items
        .iter()
        .partition(|&&i| plane.margin(m.row(i as usize)) > 0.0);
    if left.is_empty() || right.is_empty() {
        None
    } else {
        Some((plane, left, right))
    }
}
