//! Dataset files.
//!
//! Text layout: a header line `kind,d,n,seed` (seed is `-` when unknown),
//! then one point per line. Hamming points are hex strings of `ceil(d/4)`
//! digits; digit `j` holds bits `4j..4j+3` with bit `4j` as its most
//! significant bit, and padding bits are zero. Real points are
//! comma-separated decimals in shortest round-trip form.
//!
//! Binary layout (little endian): magic `MCL1`, kind `u8`, d `u32`, n `u64`,
//! seed flag `u8`, seed `u64`, then per point either `ceil(d/64)` `u64`
//! words or `d` `f64` values.

use std::io::{BufRead, Read, Write};

use crate::domain::{Dataset, DomainKind, DomainSpec, Point};
use crate::error::{MclError, Result};

pub const DATASET_MAGIC: &[u8; 4] = b"MCL1";

fn text_err(reason: impl Into<String>) -> MclError {
    MclError::Format {
        format: "dataset text",
        reason: reason.into(),
    }
}

fn bin_err(reason: impl Into<String>) -> MclError {
    MclError::Format {
        format: "dataset binary",
        reason: reason.into(),
    }
}

pub fn point_to_hex(p: &Point) -> String {
    let d = p.dim();
    (0..d.div_ceil(4))
        .map(|j| {
            let nibble = (0..4).fold(0u32, |acc, k| {
                let bit = p.bit(4 * j + k).unwrap_or(false) as u32;
                acc | bit << (3 - k)
            });
            char::from_digit(nibble, 16).unwrap()
        })
        .collect()
}

pub fn point_from_hex(s: &str, dim: usize) -> Result<Point> {
    if s.len() != dim.div_ceil(4) {
        return Err(text_err(format!(
            "expected {} hex digits, got {}",
            dim.div_ceil(4),
            s.len()
        )));
    }
    let mut bits = Vec::with_capacity(dim);
    for c in s.chars() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| text_err(format!("bad hex digit `{c}`")))?;
        for k in 0..4 {
            bits.push(v >> (3 - k) & 1 == 1);
        }
    }
    if bits[dim..].iter().any(|&b| b) {
        return Err(text_err("padding bits must be zero"));
    }
    bits.truncate(dim);
    Ok(Point::from_bits(&bits))
}

pub fn write_text<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    let seed = data.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
    writeln!(
        out,
        "{},{},{},{}",
        data.spec.kind,
        data.spec.dim,
        data.len(),
        seed
    )?;
    for p in &data.points {
        match p {
            Point::Bits { .. } => writeln!(out, "{}", point_to_hex(p))?,
            Point::Real(v) => {
                let line = v
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

pub fn read_text<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| text_err("missing header"))??;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 4 {
        return Err(text_err("header must be `kind,d,n,seed`"));
    }
    let kind: DomainKind = fields[0].parse()?;
    let dim: usize = fields[1].parse().map_err(|_| text_err("bad dimension"))?;
    let n: usize = fields[2].parse().map_err(|_| text_err("bad point count"))?;
    let seed = match fields[3] {
        "-" => None,
        s => Some(s.parse().map_err(|_| text_err("bad seed"))?),
    };
    let spec = DomainSpec::new(kind, dim)?;
    let mut points = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p = match kind {
            DomainKind::Hamming => point_from_hex(line, dim)?,
            _ => Point::Real(
                line.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| text_err(format!("bad number `{t}`")))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        spec.check(&p)?;
        points.push(p);
    }
    if points.len() != n {
        return Err(text_err(format!(
            "header promises {n} points, found {}",
            points.len()
        )));
    }
    Ok(Dataset { spec, points, seed })
}

pub fn write_binary<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&[data.spec.kind.code()])?;
    out.write_all(&(data.spec.dim as u32).to_le_bytes())?;
    out.write_all(&(data.len() as u64).to_le_bytes())?;
    out.write_all(&[data.seed.is_some() as u8])?;
    out.write_all(&data.seed.unwrap_or(0).to_le_bytes())?;
    for p in &data.points {
        write_point(p, &mut out)?;
    }
    Ok(())
}

pub(crate) fn write_point<W: Write>(p: &Point, out: &mut W) -> Result<()> {
    match p {
        Point::Bits { words, .. } => {
            for w in words {
                out.write_all(&w.to_le_bytes())?;
            }
        }
        Point::Real(v) => {
            for x in v {
                out.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub(crate) fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub(crate) fn read_point<R: Read>(spec: &DomainSpec, input: &mut R) -> Result<Point> {
    let p = match spec.kind {
        DomainKind::Hamming => {
            let words = (0..spec.words())
                .map(|_| read_array::<8, _>(input).map(u64::from_le_bytes))
                .collect::<Result<Vec<_>>>()?;
            let rem = spec.dim % 64;
            if rem != 0 && words[words.len() - 1] >> rem != 0 {
                return Err(bin_err("padding bits must be zero"));
            }
            Point::Bits {
                len: spec.dim,
                words,
            }
        }
        _ => Point::Real(
            (0..spec.dim)
                .map(|_| read_array::<8, _>(input).map(f64::from_le_bytes))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    spec.check(&p)?;
    Ok(p)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Dataset> {
    let magic = read_array::<4, _>(&mut input)?;
    if &magic != DATASET_MAGIC {
        return Err(bin_err("bad magic"));
    }
    let kind = DomainKind::from_code(read_array::<1, _>(&mut input)?[0])
        .ok_or_else(|| bin_err("unknown domain kind"))?;
    let dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let n = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let has_seed = read_array::<1, _>(&mut input)?[0];
    let seed = u64::from_le_bytes(read_array(&mut input)?);
    let spec = DomainSpec::new(kind, dim)?;
    let points = (0..n)
        .map(|_| read_point(&spec, &mut input))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        spec,
        points,
        seed: (has_seed != 0).then_some(seed),
    })
}

/// Reads either format, sniffing the binary magic.
pub fn read_any(bytes: &[u8]) -> Result<Dataset> {
    if bytes.starts_with(DATASET_MAGIC) {
        read_binary(bytes)
    } else {
        read_text(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_dataset;

    #[test]
    fn hex_layout_reads_left_to_right() {
        let p = Point::from_bit_str("10110").unwrap();
        assert_eq!(point_to_hex(&p), "b0");
        assert_eq!(point_from_hex("b0", 5).unwrap(), p);
        assert!(point_from_hex("b4", 5).is_err());
    }

    #[test]
    fn text_header_is_kind_dim_count_seed() {
        let data = sample_dataset(&DomainSpec::hamming(6), 4, 2);
        let mut buf = Vec::new();
        write_text(&data, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("hamming,6,2,4\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn both_formats_round_trip() {
        for kind in DomainKind::ALL {
            let data = sample_dataset(&DomainSpec::new(kind, 13).unwrap(), 8, 20);
            let mut text = Vec::new();
            write_text(&data, &mut text).unwrap();
            assert_eq!(read_any(&text).unwrap(), data);
            let mut bin = Vec::new();
            write_binary(&data, &mut bin).unwrap();
            assert_eq!(read_any(&bin).unwrap(), data);
        }
    }

    #[test]
    fn truncated_inputs_fail() {
        assert!(read_text(&b"hamming,4,2,1\n3\n"[..]).is_err());
        assert!(read_text(&b""[..]).is_err());
        let data = sample_dataset(&DomainSpec::gaussian(3), 8, 2);
        let mut bin = Vec::new();
        write_binary(&data, &mut bin).unwrap();
        bin.truncate(bin.len() - 3);
        assert!(read_binary(&bin[..]).is_err());
    }
}
