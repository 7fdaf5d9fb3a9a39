//! RFM: binary forest serialization.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic "RFM1"
//! params      n_trees u32, max_depth flag u8, max_depth u32,
//!             min_samples_split u32, features_per_split u32, bootstrap u8
//! classes     count u8, codes u8 * count
//! bands       count u8, then per band: length u8, ASCII name
//! metadata    scene_id length u32, UTF-8 bytes, seed u64,
//!             per-class training counts u64 * 8
//! trees       count u32, then every tree in pre-order:
//!               leaf:     tag 0, 8 * f64 probabilities
//!               internal: tag 1, feature u8, threshold f32,
//!                         left-subtree byte length u64, left, right
//! ```

use std::fs;
use std::path::Path;

use super::model::{ForestModel, TrainingMeta};
use super::params::ForestParams;
use super::tree::{Node, Tree};
use crate::error::{Error, Result};
use crate::taxonomy::N_CLASSES;

pub const RFM_MAGIC: &[u8; 4] = b"RFM1";

const TAG_LEAF: u8 = 0;
const TAG_SPLIT: u8 = 1;

fn encode_node(nodes: &[Node], i: usize, out: &mut Vec<u8>) {
    match &nodes[i] {
        Node::Leaf { distribution } => {
            out.push(TAG_LEAF);
            for p in distribution {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push(TAG_SPLIT);
            out.push(*feature as u8);
            out.extend_from_slice(&threshold.to_le_bytes());
            let len_at = out.len();
            out.extend_from_slice(&[0u8; 8]);
            let start = out.len();
            encode_node(nodes, *left, out);
            let left_len = (out.len() - start) as u64;
            out[len_at..len_at + 8].copy_from_slice(&left_len.to_le_bytes());
            encode_node(nodes, *right, out);
        }
    }
}

pub fn encode_model(model: &ForestModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(RFM_MAGIC);
    let p = &model.params;
    out.extend_from_slice(&(p.n_trees as u32).to_le_bytes());
    out.push(p.max_depth.is_some() as u8);
    out.extend_from_slice(&(p.max_depth.unwrap_or(0) as u32).to_le_bytes());
    out.extend_from_slice(&(p.min_samples_split as u32).to_le_bytes());
    out.extend_from_slice(&(p.features_per_split as u32).to_le_bytes());
    out.push(p.bootstrap as u8);

    out.push(model.classes.len() as u8);
    out.extend_from_slice(&model.classes);

    out.push(model.bands.len() as u8);
    for b in &model.bands {
        out.push(b.len() as u8);
        out.extend_from_slice(b.as_bytes());
    }

    out.extend_from_slice(&(model.meta.scene_id.len() as u32).to_le_bytes());
    out.extend_from_slice(model.meta.scene_id.as_bytes());
    out.extend_from_slice(&model.meta.seed.to_le_bytes());
    for c in model.meta.class_counts {
        out.extend_from_slice(&c.to_le_bytes());
    }

    out.extend_from_slice(&(model.trees.len() as u32).to_le_bytes());
    for t in &model.trees {
        encode_node(t.nodes(), 0, &mut out);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Length {
                expected: self.pos + n,
                found: self.bytes.len(),
            }),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self, len: usize) -> Result<String> {
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Format("model string is not UTF-8".into()))
    }

    fn node(&mut self, nodes: &mut Vec<Node>, n_features: usize, depth: usize) -> Result<usize> {
        if depth > 10_000 {
            return Err(Error::Format("tree nesting too deep".into()));
        }
        let id = nodes.len();
        match self.u8()? {
            TAG_LEAF => {
                let mut distribution = [0.0; N_CLASSES];
                for p in distribution.iter_mut() {
                    *p = self.f64()?;
                }
                nodes.push(Node::Leaf { distribution });
            }
            TAG_SPLIT => {
                let feature = self.u8()? as usize;
                if feature >= n_features {
                    return Err(Error::Format(format!("split on unknown feature {feature}")));
                }
                let threshold = self.f32()?;
                let left_len = self.u64()?;
                nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                });
                let start = self.pos;
                let left = self.node(nodes, n_features, depth + 1)?;
                if (self.pos - start) as u64 != left_len {
                    return Err(Error::Format(format!(
                        "left subtree length {} does not match recorded {left_len}",
                        self.pos - start
                    )));
                }
                let right = self.node(nodes, n_features, depth + 1)?;
                if let Node::Split {
                    left: l, right: r, ..
                } = &mut nodes[id]
                {
                    *l = left;
                    *r = right;
                }
            }
            tag => return Err(Error::Format(format!("unknown node tag {tag}"))),
        }
        Ok(id)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<ForestModel> {
    if bytes.len() < 4 || &bytes[..4] != RFM_MAGIC {
        return Err(Error::Format("missing RFM1 magic".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let n_trees = r.u32()? as usize;
    let has_depth = r.u8()? != 0;
    let depth = r.u32()? as usize;
    let params = ForestParams {
        n_trees,
        max_depth: has_depth.then_some(depth),
        min_samples_split: r.u32()? as usize,
        features_per_split: r.u32()? as usize,
        bootstrap: r.u8()? != 0,
    };

    let n_classes = r.u8()? as usize;
    let classes = r.take(n_classes)?.to_vec();
    if n_classes != N_CLASSES {
        return Err(Error::Format(format!(
            "model lists {n_classes} classes, expected {N_CLASSES}"
        )));
    }
    let n_bands = r.u8()? as usize;
    let mut bands = Vec::with_capacity(n_bands);
    for _ in 0..n_bands {
        let len = r.u8()? as usize;
        bands.push(r.string(len)?);
    }

    let id_len = r.u32()? as usize;
    let scene_id = r.string(id_len)?;
    let seed = r.u64()?;
    let mut class_counts = [0u64; N_CLASSES];
    for c in class_counts.iter_mut() {
        *c = r.u64()?;
    }

    let tree_count = r.u32()? as usize;
    if tree_count != n_trees {
        return Err(Error::Format(format!(
            "model declares {n_trees} trees but stores {tree_count}"
        )));
    }
    let mut trees = Vec::with_capacity(tree_count);
    for _ in 0..tree_count {
        let mut nodes = Vec::new();
        r.node(&mut nodes, n_bands, 0)?;
        trees.push(Tree { nodes });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last tree",
            bytes.len() - r.pos
        )));
    }
    Ok(ForestModel {
        params,
        classes,
        bands,
        meta: TrainingMeta {
            scene_id,
            seed,
            class_counts,
        },
        trees,
    })
}

pub fn write_model(model: &ForestModel, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode_model(model);
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
