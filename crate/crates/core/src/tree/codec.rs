//! `MCT1` binary tree format (little endian).
//!
//! ```text
//! magic "MCT1" | version u16 | kind u8 | d u32 | strategy u8
//! bin_capacity u32 | candidates u32 | max_depth u32 | seed u64 | n u64
//! root u32 | node_count u32 | nodes...
//! leaf:     0u8 | len u32 | len x u32 index
//! internal: 1u8 | minus u32 | plus u32 | variant u8 | payload
//!   0 vantage pair: plus point, minus point
//!   1 ball:         center point, radius f64
//!   2 pivot:        anchor point, threshold f64
//! ```
//! Points use the dataset binary encoding (packed words or `f64`s).

use std::io::{Read, Write};

use super::{BuildParams, MetricTree, Strategy, TreeNode};
use crate::decision::DecisionFunction;
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{MclError, Result};
use crate::io::{read_array, read_point, write_point};

pub const TREE_MAGIC: &[u8; 4] = b"MCT1";
pub const TREE_VERSION: u16 = 1;

fn err(reason: impl Into<String>) -> MclError {
    MclError::Format {
        format: "MCT1",
        reason: reason.into(),
    }
}

pub fn encode_tree<W: Write>(tree: &MetricTree, mut out: W) -> Result<()> {
    out.write_all(TREE_MAGIC)?;
    out.write_all(&TREE_VERSION.to_le_bytes())?;
    out.write_all(&[tree.spec.kind.code()])?;
    out.write_all(&(tree.spec.dim as u32).to_le_bytes())?;
    out.write_all(&[tree.strategy.code()])?;
    for v in [
        tree.params.bin_capacity,
        tree.params.candidates,
        tree.params.max_depth,
    ] {
        out.write_all(&(v as u32).to_le_bytes())?;
    }
    out.write_all(&tree.seed.to_le_bytes())?;
    out.write_all(&(tree.n as u64).to_le_bytes())?;
    out.write_all(&tree.root.to_le_bytes())?;
    out.write_all(&(tree.nodes.len() as u32).to_le_bytes())?;
    for node in &tree.nodes {
        match node {
            TreeNode::Leaf { bin } => {
                out.write_all(&[0])?;
                out.write_all(&(bin.len() as u32).to_le_bytes())?;
                for i in bin {
                    out.write_all(&i.to_le_bytes())?;
                }
            }
            TreeNode::Internal { f, minus, plus } => {
                out.write_all(&[1])?;
                out.write_all(&minus.to_le_bytes())?;
                out.write_all(&plus.to_le_bytes())?;
                match f {
                    DecisionFunction::VantagePair { plus, minus } => {
                        out.write_all(&[0])?;
                        write_point(plus, &mut out)?;
                        write_point(minus, &mut out)?;
                    }
                    DecisionFunction::Ball { center, radius } => {
                        out.write_all(&[1])?;
                        write_point(center, &mut out)?;
                        out.write_all(&radius.to_le_bytes())?;
                    }
                    DecisionFunction::Pivot { anchor, threshold } => {
                        out.write_all(&[2])?;
                        write_point(anchor, &mut out)?;
                        out.write_all(&threshold.to_le_bytes())?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn u32_le<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn f64_le<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

pub fn decode_tree<R: Read>(mut input: R) -> Result<MetricTree> {
    let r = &mut input;
    if &read_array::<4, _>(r)? != TREE_MAGIC {
        return Err(err("bad magic"));
    }
    let version = u16::from_le_bytes(read_array(r)?);
    if version != TREE_VERSION {
        return Err(err(format!("unsupported version {version}")));
    }
    let kind = DomainKind::from_code(read_array::<1, _>(r)?[0])
        .ok_or_else(|| err("unknown domain kind"))?;
    let spec = DomainSpec::new(kind, u32_le(r)? as usize)?;
    let strategy =
        Strategy::from_code(read_array::<1, _>(r)?[0]).ok_or_else(|| err("unknown strategy"))?;
    let params = BuildParams {
        bin_capacity: u32_le(r)? as usize,
        candidates: u32_le(r)? as usize,
        max_depth: u32_le(r)? as usize,
    };
    let seed = u64::from_le_bytes(read_array(r)?);
    let n = u64::from_le_bytes(read_array(r)?) as usize;
    let root = u32_le(r)?;
    let count = u32_le(r)? as usize;
    let mut nodes = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let node = match read_array::<1, _>(r)?[0] {
            0 => {
                let len = u32_le(r)? as usize;
                let bin = (0..len).map(|_| u32_le(r)).collect::<Result<Vec<_>>>()?;
                TreeNode::Leaf { bin }
            }
            1 => {
                let minus = u32_le(r)?;
                let plus = u32_le(r)?;
                let f = match read_array::<1, _>(r)?[0] {
                    0 => DecisionFunction::VantagePair {
                        plus: read_point(&spec, r)?,
                        minus: read_point(&spec, r)?,
                    },
                    1 => DecisionFunction::Ball {
                        center: read_point(&spec, r)?,
                        radius: f64_le(r)?,
                    },
                    2 => DecisionFunction::Pivot {
                        anchor: read_point(&spec, r)?,
                        threshold: f64_le(r)?,
                    },
                    t => return Err(err(format!("unknown decision function tag {t}"))),
                };
                TreeNode::Internal { f, minus, plus }
            }
            t => return Err(err(format!("unknown node tag {t}"))),
        };
        nodes.push(node);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(err("trailing bytes"));
    }
    Ok(MetricTree {
        nodes,
        root,
        spec,
        strategy,
        params,
        seed,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_dataset;
    use crate::tree::build;

    #[test]
    fn round_trip_is_bit_exact() {
        for (kind, strategy) in [
            (DomainKind::Hamming, Strategy::Vp),
            (DomainKind::UnitCube, Strategy::Ball),
            (DomainKind::Sphere, Strategy::Pivot),
            (DomainKind::Gaussian, Strategy::Vp),
        ] {
            let data = sample_dataset(&DomainSpec::new(kind, 9).unwrap(), 6, 300);
            let tree = build(&data, strategy, BuildParams::default(), 3).unwrap();
            let mut bytes = Vec::new();
            encode_tree(&tree, &mut bytes).unwrap();
            let back = decode_tree(&bytes[..]).unwrap();
            assert_eq!(back, tree);
            let mut again = Vec::new();
            encode_tree(&back, &mut again).unwrap();
            assert_eq!(again, bytes);
        }
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let data = sample_dataset(&DomainSpec::hamming(8), 6, 50);
        let tree = build(&data, Strategy::Vp, BuildParams::default(), 3).unwrap();
        let mut bytes = Vec::new();
        encode_tree(&tree, &mut bytes).unwrap();
        assert!(decode_tree(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_tree(&extra[..]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_tree(&bad[..]).is_err());
        bad = bytes;
        bad[4] = 9;
        assert!(decode_tree(&bad[..]).is_err());
    }
}
