//! Binary model files.
//!
//! Layout (all integers and reals little-endian, reals as IEEE-754 `f64`):
//!
//! ```text
//! magic    8 bytes   "KRFMODEL"
//! version  u32       1
//! length   u64       payload length in bytes
//! payload  ...
//! crc      u32       CRC-32 (IEEE) of the payload
//! ```
//!
//! Payload:
//!
//! ```text
//! space           u8 (0 euclidean, 1 circular), u32 target dim
//! num_features    u32
//! forest config   u32 num_trees, f64 beta, u64 seed
//! tree config     u8 splitter (0 fixed K, 1 adaptive, 2 binary), u32 a, u32 b
//!                 (K,0 | k_min,k_max | 0,0), u32 min_samples_leaf, f64 penalty_c,
//!                 f64 gamma, u32 max_depth, u64 seed
//! tree count      u32
//! trees           pre-order nodes:
//!   0 leaf        f64 × dim estimate, u64 sample_count, u8 degenerate
//!   1 linear      u32 classes, f64 penalty_c, classes × (num_features + 1) f64,
//!                 then one subtree per class
//!   2 threshold   u32 dim, f64 threshold, then two subtrees
//! ```
//!
//! The encoding is canonical: decoding and re-encoding yields the same bytes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::linear_classifier::OvrClassifier;
use crate::target_space::TargetSpace;
use crate::tree::{SplitRule, Splitter, TreeConfig, TreeNode, MAX_DEPTH};

use super::atomic_write;

pub const MAGIC: &[u8; 8] = b"KRFMODEL";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8;

fn format_error(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("count fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| format_error("truncated payload"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn encode_model(forest: &Forest) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    match forest.space {
        TargetSpace::Euclidean { dim } => {
            w.u8(0);
            w.u32(dim);
        }
        TargetSpace::Circular => {
            w.u8(1);
            w.u32(1);
        }
    }
    w.u32(forest.num_features);

    let fc = &forest.config;
    w.u32(fc.num_trees);
    w.f64(fc.bagging_ratio_beta);
    w.u64(fc.seed);
    let tc = &fc.tree_config;
    let (tag, a, b) = match tc.splitter {
        Splitter::KrfFixed { k } => (0, k, 0),
        Splitter::KrfAdaptive { k_min, k_max } => (1, k_min, k_max),
        Splitter::Binary => (2, 0, 0),
    };
    w.u8(tag);
    w.u32(a);
    w.u32(b);
    w.u32(tc.min_samples_leaf);
    w.f64(tc.penalty_c);
    w.f64(tc.feature_ratio_gamma);
    w.u32(tc.max_depth);
    w.u64(tc.seed);

    w.u32(forest.trees.len());
    for t in &forest.trees {
        encode_node(&mut w, t);
    }
    let payload = w.0;

    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

fn encode_node(w: &mut Writer, node: &TreeNode) {
    match node {
        TreeNode::Leaf {
            estimate,
            sample_count,
            degenerate,
        } => {
            w.u8(0);
            estimate.values().iter().for_each(|&v| w.f64(v));
            w.u64(*sample_count as u64);
            w.u8(u8::from(*degenerate));
        }
        TreeNode::Internal { rule, children } => {
            match rule {
                SplitRule::Linear(c) => {
                    w.u8(1);
                    w.u32(c.num_classes());
                    w.f64(c.penalty_c);
                    c.weights.iter().flatten().for_each(|&v| w.f64(v));
                }
                SplitRule::AxisThreshold { dim, threshold } => {
                    w.u8(2);
                    w.u32(*dim);
                    w.f64(*threshold);
                }
            }
            children.iter().for_each(|c| encode_node(w, c));
        }
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Forest> {
    if bytes.len() < HEADER_LEN {
        return Err(format_error("file too short for a model header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(format_error("not a model file (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(format_error(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let expected = (HEADER_LEN as u64).checked_add(len).and_then(|v| v.checked_add(4));
    if expected != Some(bytes.len() as u64) {
        return Err(format_error(format!(
            "payload length {len} does not match file size {}",
            bytes.len()
        )));
    }
    let payload = &bytes[HEADER_LEN..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader { buf: payload, pos: 0 };
    let space = match (r.u8()?, r.u32()?) {
        (0, dim) if dim >= 1 => TargetSpace::Euclidean { dim },
        (1, 1) => TargetSpace::Circular,
        (tag, dim) => return Err(format_error(format!("bad target space ({tag}, {dim})"))),
    };
    let num_features = r.u32()?;
    if num_features == 0 {
        return Err(format_error("zero features"));
    }
    let num_trees = r.u32()?;
    let bagging_ratio_beta = r.f64()?;
    let seed = r.u64()?;
    let splitter = match (r.u8()?, r.u32()?, r.u32()?) {
        (0, k, 0) => Splitter::KrfFixed { k },
        (1, k_min, k_max) => Splitter::KrfAdaptive { k_min, k_max },
        (2, 0, 0) => Splitter::Binary,
        (tag, ..) => return Err(format_error(format!("bad splitter tag {tag}"))),
    };
    let tree_config = TreeConfig {
        splitter,
        min_samples_leaf: r.u32()?,
        penalty_c: r.f64()?,
        feature_ratio_gamma: r.f64()?,
        max_depth: r.u32()?,
        seed: r.u64()?,
        space,
    };
    let config = ForestConfig {
        num_trees,
        bagging_ratio_beta,
        tree_config,
        seed,
    };
    config.validate().map_err(|e| format_error(format!("bad config: {e}")))?;

    let count = r.u32()?;
    if count != num_trees {
        return Err(format_error(format!("{count} trees stored, config says {num_trees}")));
    }
    let ctx = Ctx { space, num_features };
    let trees = (0..count)
        .map(|_| decode_node(&mut r, &ctx, 0))
        .collect::<Result<Vec<_>>>()?;
    if r.pos != payload.len() {
        return Err(format_error("trailing bytes after the last tree"));
    }
    Ok(Forest {
        trees,
        space,
        num_features,
        config,
    })
}

struct Ctx {
    space: TargetSpace,
    num_features: usize,
}

fn decode_node(r: &mut Reader, ctx: &Ctx, depth: usize) -> Result<TreeNode> {
    if depth > MAX_DEPTH {
        return Err(format_error("tree deeper than the depth cap"));
    }
    match r.u8()? {
        0 => {
            let values = (0..ctx.space.dim()).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            let estimate = ctx.space.point(values).map_err(|e| format_error(e.to_string()))?;
            if !ctx.space.contains(&estimate) {
                return Err(format_error("leaf angle outside [0, 2π)"));
            }
            let sample_count = r.u64()? as usize;
            if sample_count == 0 {
                return Err(format_error("empty leaf"));
            }
            let degenerate = match r.u8()? {
                0 => false,
                1 => true,
                v => return Err(format_error(format!("bad flag byte {v}"))),
            };
            Ok(TreeNode::Leaf {
                estimate,
                sample_count,
                degenerate,
            })
        }
        1 => {
            let classes = r.u32()?;
            if classes < 2 {
                return Err(format_error("linear rule with fewer than two classes"));
            }
            let penalty_c = r.f64()?;
            let weights = (0..classes)
                .map(|_| (0..=ctx.num_features).map(|_| r.f64()).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let classifier = OvrClassifier::new(weights, penalty_c).map_err(|e| format_error(e.to_string()))?;
            let children = (0..classes)
                .map(|_| decode_node(r, ctx, depth + 1))
                .collect::<Result<Vec<_>>>()?;
            Ok(TreeNode::Internal {
                rule: SplitRule::Linear(classifier),
                children,
            })
        }
        2 => {
            let dim = r.u32()?;
            if dim >= ctx.num_features {
                return Err(format_error(format!("threshold on feature {dim} of {}", ctx.num_features)));
            }
            let threshold = r.f64()?;
            let children = (0..2)
                .map(|_| decode_node(r, ctx, depth + 1))
                .collect::<Result<Vec<_>>>()?;
            Ok(TreeNode::Internal {
                rule: SplitRule::AxisThreshold { dim, threshold },
                children,
            })
        }
        tag => Err(format_error(format!("bad node tag {tag}"))),
    }
}

pub fn save_model(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &encode_model(forest))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Forest> {
    decode_model(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::train_forest;
    use crate::harness::synth::{generate, Generator, SyntheticSpec};

    fn forest(generator: Generator, splitter: Splitter) -> Forest {
        let d = generate(&SyntheticSpec { generator, n: 120, p: 3, seed: 1 }).unwrap();
        let mut fc = ForestConfig::new(TreeConfig::new(d.space, splitter));
        fc.num_trees = 3;
        fc.bagging_ratio_beta = 0.8;
        train_forest(&d, &fc).unwrap()
    }

    #[test]
    fn round_trip_is_canonical() {
        for f in [
            forest(Generator::rotation_field(5.0), Splitter::adaptive()),
            forest(Generator::PiecewiseConstant { regions: 4, noise_sigma: 1.0 }, Splitter::Binary),
        ] {
            let bytes = encode_model(&f);
            let back = decode_model(&bytes).unwrap();
            assert_eq!(back, f);
            assert_eq!(encode_model(&back), bytes);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let f = forest(Generator::rotation_field(5.0), Splitter::KrfFixed { k: 3 });
        let bytes = encode_model(&f);
        let mut bad = bytes.clone();
        bad[HEADER_LEN + 10] ^= 0x40;
        assert!(matches!(decode_model(&bad), Err(Error::Checksum { .. })));
        assert!(matches!(decode_model(&bytes[..bytes.len() - 1]), Err(Error::ModelFormat(_))));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode_model(&v2), Err(Error::ModelFormat(m)) if m.contains("version")));
        assert!(decode_model(b"hello").is_err());
    }
}
