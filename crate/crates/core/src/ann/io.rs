//! `.rpf` layout, all integers little-endian:
//!
//! ```text
//! "RPF1" | version u32 = 1 | dim u32 | n_items u64 | n_trees u32
//! leaf_size u32 | seed u64
//! n_items x (id_len u16 | id UTF-8 bytes)
//! n_trees x tree:
//!   n_nodes u32, then per node a tag u8:
//!     0 leaf / 1 degenerate leaf: count u32 | count x item u32
//!     2 split: left u32 | right u32 | offset f32 | dim x normal f32
//! ```
//!
//! Vectors are not stored; see [`super::RPForest::searcher`].

use std::collections::HashSet;
use std::path::Path;

use super::{Hyperplane, IndexConfig, Node, RPForest, Tree};
use crate::binio::{read_file, ByteReader, ByteWriter};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RPF1";
const VERSION: u32 = 1;

const TAG_LEAF: u8 = 0;
const TAG_DEGENERATE: u8 = 1;
const TAG_SPLIT: u8 = 2;

pub fn save_forest(f: &RPForest, path: &Path) -> Result<()> {
    let mut w = ByteWriter::new();
    write(f, &mut w)?;
    w.write_to(path)
}

pub fn load_forest(path: &Path) -> Result<RPForest> {
    decode_forest(&read_file(path)?)
}

pub fn encode_forest(f: &RPForest) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    write(f, &mut w)?;
    Ok(w.into_inner())
}

fn write(f: &RPForest, w: &mut ByteWriter) -> Result<()> {
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u32(f.dim as u32);
    w.u64(f.item_ids.len() as u64);
    w.u32(f.config.n_trees as u32);
    w.u32(f.config.leaf_size as u32);
    w.u64(f.config.seed);
    for id in &f.item_ids {
        w.short_str(id)?;
    }
    for tree in &f.trees {
        w.u32(tree.nodes.len() as u32);
        for node in &tree.nodes {
            match node {
                Node::Leaf { items, degenerate } => {
                    w.u8(if *degenerate {
                        TAG_DEGENERATE
                    } else {
                        TAG_LEAF
                    });
                    w.u32(items.len() as u32);
                    for &i in items {
                        w.u32(i);
                    }
                }
                Node::Split { plane, left, right } => {
                    w.u8(TAG_SPLIT);
                    w.u32(*left);
                    w.u32(*right);
                    w.f32(plane.offset);
                    w.f32s(&plane.normal);
                }
            }
        }
    }
    Ok(())
}

pub fn decode_forest(bytes: &[u8]) -> Result<RPForest> {
    let mut r = ByteReader::new(bytes, "forest file");
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let dim = r.u32()? as usize;
    let n_items = usize::try_from(r.u64()?).map_err(|_| Error::format("item count overflow"))?;
    let config = IndexConfig {
        n_trees: r.u32()? as usize,
        leaf_size: r.u32()? as usize,
        seed: r.u64()?,
    };
    config
        .validate()
        .map_err(|e| Error::format(format!("forest config invalid: {e}")))?;
    if dim == 0 || n_items == 0 || n_items > bytes.len() / 2 || n_items > u32::MAX as usize {
        return Err(Error::format("forest header inconsistent with file size"));
    }
    let item_ids = (0..n_items)
        .map(|_| r.short_str())
        .collect::<Result<Vec<_>>>()?;
    if item_ids.iter().collect::<HashSet<_>>().len() != n_items {
        return Err(Error::format("forest id table has duplicates"));
    }
    let trees = (0..config.n_trees)
        .map(|t| read_tree(&mut r, dim, n_items).map_err(|e| annotate(e, t)))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(RPForest::from_parts(config, dim, item_ids, trees))
}

fn annotate(e: Error, tree: usize) -> Error {
    match e {
        Error::Format(msg) => Error::Format(format!("tree {tree}: {msg}")),
        other => other,
    }
}

fn read_tree(r: &mut ByteReader<'_>, dim: usize, n_items: usize) -> Result<Tree> {
    let n_nodes = r.u32()? as usize;
    if n_nodes == 0 {
        return Err(Error::format("tree has no nodes"));
    }
    let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
    let mut covered = vec![false; n_items];
    for idx in 0..n_nodes {
        let node = match r.u8()? {
            tag @ (TAG_LEAF | TAG_DEGENERATE) => {
                let count = r.u32()? as usize;
                let mut items = Vec::with_capacity(count.min(n_items));
                for _ in 0..count {
                    let i = r.u32()?;
                    let slot = covered
                        .get_mut(i as usize)
                        .ok_or_else(|| Error::format(format!("item {i} out of range")))?;
                    if std::mem::replace(slot, true) {
                        return Err(Error::format(format!("item {i} in two leaves")));
                    }
                    items.push(i);
                }
                Node::Leaf {
                    items,
                    degenerate: tag == TAG_DEGENERATE,
                }
            }
            TAG_SPLIT => {
                let left = r.u32()?;
                let right = r.u32()?;
                let offset = r.f32()?;
                let normal = r.f32s(dim)?;
                for child in [left, right] {
                    if child as usize <= idx || child as usize >= n_nodes {
                        return Err(Error::format(format!(
                            "node {idx} has invalid child {child}"
                        )));
                    }
                }
                Node::Split {
                    plane: Hyperplane { normal, offset },
                    left,
                    right,
                }
            }
            tag => return Err(Error::format(format!("unknown node tag {tag}"))),
        };
        nodes.push(node);
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::format("leaves do not cover every item"));
    }
    Ok(Tree { nodes })
}
