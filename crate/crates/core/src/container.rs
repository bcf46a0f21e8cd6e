//! The `MDC1` file container.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! "MDC1" | version u8 = 1 | constraint id u8 | d u8 | n u32
//! params: ZRCF/RF d x u32 extents; HDRF d x u32 extents, p u32; VZRCF V u64
//! payload bit length u64
//! blocks: n^d bits each, vectorized order, packed MSB-first
//! ```
//!
//! The input bit stream is cut into `k = n^d - 1` bit messages, the last one
//! padded with zeros, and each message is encoded into one block. The block
//! stream is padded with zero bits to a whole byte.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{BitArray, Shape};
use crate::codec::{
    decode_with, encode_with, Constraint, ConstraintConfig, ConstraintKind, DecodeOptions,
    EncodeOptions,
};
use crate::constraints::Codec;
use crate::error::{Error, Result};
use crate::oracle::brute_valid;

pub const MAGIC: [u8; 4] = *b"MDC1";
pub const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainerHeader {
    pub config: ConstraintConfig,
    /// Length of the original message in bits.
    pub payload_bits: u64,
}

impl ContainerHeader {
    pub fn new(config: ConstraintConfig, payload_bits: u64) -> Self {
        ContainerHeader { config, payload_bits }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let cfg = &self.config;
        let d = u8::try_from(cfg.d()).map_err(|_| Error::Parameter(format!("d={} does not fit a byte", cfg.d())))?;
        let n = u32::try_from(cfg.n()).map_err(|_| Error::Parameter(format!("n={} does not fit 32 bits", cfg.n())))?;
        let mut out = Vec::with_capacity(32);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(cfg.kind().id());
        out.push(d);
        out.extend_from_slice(&n.to_be_bytes());
        let put_u32 = |out: &mut Vec<u8>, v: usize, what: &str| -> Result<()> {
            let v = u32::try_from(v).map_err(|_| Error::Parameter(format!("{what} {v} does not fit 32 bits")))?;
            out.extend_from_slice(&v.to_be_bytes());
            Ok(())
        };
        match cfg.constraint() {
            Constraint::Zrcf { shape } | Constraint::Rf { shape } => {
                for &l in shape.extents() {
                    put_u32(&mut out, l, "extent")?;
                }
            }
            Constraint::Hdrf { shape, distance } => {
                for &l in shape.extents() {
                    put_u32(&mut out, l, "extent")?;
                }
                put_u32(&mut out, *distance, "p")?;
            }
            Constraint::Vzrcf { volume } => out.extend_from_slice(&(*volume as u64).to_be_bytes()),
        }
        out.extend_from_slice(&self.payload_bits.to_be_bytes());
        Ok(out)
    }

    /// Parses a header, returning it with the number of bytes consumed.
    ///
    /// Checks structure only; feasibility is checked when a codec is built.
    pub fn parse(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(Error::BadVersion(version));
        }
        let id = r.u8("constraint id")?;
        let kind = ConstraintKind::from_id(id).ok_or_else(|| Error::Corrupt(format!("unknown constraint id {id}")))?;
        let d = r.u8("d")? as usize;
        let n = r.u32("n")? as usize;
        let mut extents = || -> Result<Shape> {
            let ext = (0..d).map(|_| r.u32("extent").map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
            Shape::new(ext).map_err(|e| Error::Corrupt(format!("header shape: {e}")))
        };
        let constraint = match kind {
            ConstraintKind::Zrcf => Constraint::Zrcf { shape: extents()? },
            ConstraintKind::Rf => Constraint::Rf { shape: extents()? },
            ConstraintKind::Hdrf => {
                let shape = extents()?;
                let distance = r.u32("p")? as usize;
                Constraint::Hdrf { shape, distance }
            }
            ConstraintKind::Vzrcf => {
                let v = r.u64("V")?;
                let volume = usize::try_from(v).map_err(|_| Error::Corrupt(format!("V={v} out of range")))?;
                Constraint::Vzrcf { volume }
            }
        };
        let payload_bits = r.u64("payload bit length")?;
        let config =
            ConstraintConfig::new(n, d, constraint).map_err(|e| Error::Corrupt(format!("header parameters: {e}")))?;
        Ok((ContainerHeader { config, payload_bits }, r.pos))
    }

    /// Message bits per block, `n^d - 1`.
    pub fn message_bits(&self) -> Result<usize> {
        Ok(self.config.cells()? - 1)
    }

    pub fn block_count(&self) -> Result<u64> {
        let k = self.message_bits()? as u64;
        Ok(self.payload_bits.div_ceil(k))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + len;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Truncated(format!("header ends before {what} at byte {}", self.pos)))?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

/// MSB-first bits of `bytes`.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |k| b >> k & 1 == 1))
        .collect()
}

/// Packs bits MSB-first, padding the last byte with zeros.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b as u8) << (7 - k)))
        .collect()
}

pub fn encode_file(input: &[u8], cfg: &ConstraintConfig) -> Result<Vec<u8>> {
    encode_file_with(input, cfg, EncodeOptions::default())
}

pub fn encode_file_with(input: &[u8], cfg: &ConstraintConfig, opts: EncodeOptions) -> Result<Vec<u8>> {
    encode_bits(&bytes_to_bits(input), cfg, opts)
}

/// Encodes an arbitrary bit string into a container.
pub fn encode_bits(bits: &[bool], cfg: &ConstraintConfig, opts: EncodeOptions) -> Result<Vec<u8>> {
    let codec = Codec::new(cfg.clone())?;
    let header = ContainerHeader::new(cfg.clone(), bits.len() as u64);
    let k = header.message_bits()?;
    let mut stream = Vec::with_capacity(bits.len() + bits.len() / k.max(1) + 1);
    for (index, chunk) in bits.chunks(k).enumerate() {
        let mut msg = chunk.to_vec();
        msg.resize(k, false);
        let enc = encode_with(&codec, &msg, opts, |_| {}).map_err(|e| e.in_block(index as u64))?;
        stream.extend_from_slice(enc.array.bits());
    }
    let mut out = header.to_bytes()?;
    out.extend(bits_to_bytes(&stream));
    Ok(out)
}

/// A parsed container with its blocks still encoded.
#[derive(Clone, Debug)]
pub struct Container {
    pub header: ContainerHeader,
    pub blocks: Vec<BitArray>,
}

impl Container {
    /// Parses the header and splits the stream into blocks, checking lengths and padding.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let (header, used) = ContainerHeader::parse(bytes)?;
        let cfg = &header.config;
        let cells = cfg
            .cells()
            .map_err(|e| Error::Corrupt(format!("header geometry: {e}")))?;
        let blocks = header.block_count()?;
        let stream_bits = blocks as u128 * cells as u128;
        let want = stream_bits.div_ceil(8);
        let have = (bytes.len() - used) as u128;
        if have < want {
            return Err(Error::Truncated(format!(
                "{blocks} blocks need {want} bytes after the header, found {have}"
            )));
        }
        if have > want {
            return Err(Error::Corrupt(format!("{} trailing bytes after the last block", have - want)));
        }
        let bits = bytes_to_bits(&bytes[used..]);
        let stream_bits = stream_bits as usize;
        if bits[stream_bits..].iter().any(|&b| b) {
            return Err(Error::Corrupt("nonzero padding after the last block".into()));
        }
        let blocks = bits[..stream_bits]
            .chunks(cells)
            .map(|c| BitArray::from_bits(cfg.n(), cfg.d(), c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Container { header, blocks })
    }
}

pub fn decode_file(bytes: &[u8]) -> Result<Vec<u8>> {
    decode_file_with(bytes, DecodeOptions::default())
}

/// Decodes a container back to bytes. A payload that is not a whole number
/// of bytes is padded with zero bits.
pub fn decode_file_with(bytes: &[u8], opts: DecodeOptions) -> Result<Vec<u8>> {
    Ok(bits_to_bytes(&decode_bits(bytes, opts)?.1))
}

pub fn decode_bits(bytes: &[u8], opts: DecodeOptions) -> Result<(ContainerHeader, Vec<bool>)> {
    let container = Container::parse(bytes)?;
    let codec = Codec::new(container.header.config.clone())?;
    let k = container.header.message_bits()?;
    let total = container.header.payload_bits as usize;
    let mut out = Vec::with_capacity(total);
    for (index, block) in container.blocks.iter().enumerate() {
        let msg = decode_with(&codec, block, opts)
            .map_err(|e| e.in_block(index as u64))?
            .message;
        let keep = (total - out.len()).min(k);
        if msg[keep..].iter().any(|&b| b) {
            return Err(Error::Corrupt("nonzero padding in the final message".into()).in_block(index as u64));
        }
        out.extend_from_slice(&msg[..keep]);
    }
    Ok((container.header, out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub config: ConstraintConfig,
    pub blocks: u64,
    /// Indices of blocks that violate the constraint.
    pub invalid: Vec<u64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.invalid.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} blocks, {} valid, {} invalid",
            self.config,
            self.blocks,
            self.blocks - self.invalid.len() as u64,
            self.invalid.len()
        )?;
        if !self.invalid.is_empty() {
            let list: Vec<String> = self.invalid.iter().take(10).map(u64::to_string).collect();
            write!(f, " (first: {})", list.join(", "))?;
        }
        Ok(())
    }
}

/// Checks every block against the definition-direct validator.
pub fn check(bytes: &[u8]) -> Result<CheckReport> {
    let container = Container::parse(bytes)?;
    container.header.config.check_feasibility()?;
    let cfg = container.header.config;
    let invalid = container
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !brute_valid(b, &cfg))
        .map(|(i, _)| i as u64)
        .collect();
    Ok(CheckReport {
        blocks: container.blocks.len() as u64,
        config: cfg,
        invalid,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatsReport {
    pub config: ConstraintConfig,
    pub blocks: u64,
    /// ξ applications per block.
    pub histogram: BTreeMap<u64, u64>,
    pub elapsed: Duration,
}

impl StatsReport {
    pub fn mean_iterations(&self) -> f64 {
        if self.blocks == 0 {
            return 0.0;
        }
        self.histogram.iter().map(|(k, v)| (k * v) as f64).sum::<f64>() / self.blocks as f64
    }

    pub fn time_per_block(&self) -> Duration {
        if self.blocks == 0 {
            return Duration::ZERO;
        }
        self.elapsed / self.blocks as u32
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "config {}", self.config)?;
        writeln!(f, "blocks {}", self.blocks)?;
        writeln!(f, "mean iterations {:.4}", self.mean_iterations())?;
        writeln!(f, "time per block {:?}", self.time_per_block())?;
        for (k, v) in &self.histogram {
            writeln!(f, "iterations {k}: {v}")?;
        }
        Ok(())
    }
}

/// Decodes every block of a container, counting ξ⁻¹ steps per block.
pub fn stats_container(bytes: &[u8], opts: DecodeOptions) -> Result<StatsReport> {
    let container = Container::parse(bytes)?;
    let codec = Codec::new(container.header.config.clone())?;
    let mut histogram = BTreeMap::new();
    let start = Instant::now();
    for (index, block) in container.blocks.iter().enumerate() {
        let d = decode_with(&codec, block, opts).map_err(|e| e.in_block(index as u64))?;
        *histogram.entry(d.iterations).or_default() += 1;
    }
    Ok(StatsReport {
        config: container.header.config,
        blocks: container.blocks.len() as u64,
        histogram,
        elapsed: start.elapsed(),
    })
}

/// Encodes the given messages, counting ξ steps per message.
pub fn stats_messages<I>(cfg: &ConstraintConfig, messages: I, opts: EncodeOptions) -> Result<StatsReport>
where
    I: IntoIterator<Item = Vec<bool>>,
{
    let codec = Codec::new(cfg.clone())?;
    let mut histogram = BTreeMap::new();
    let mut blocks = 0u64;
    let mut elapsed = Duration::ZERO;
    for msg in messages {
        let start = Instant::now();
        let enc = encode_with(&codec, &msg, opts, |_| {}).map_err(|e| e.in_block(blocks))?;
        elapsed += start.elapsed();
        *histogram.entry(enc.iterations).or_default() += 1;
        blocks += 1;
    }
    Ok(StatsReport {
        config: cfg.clone(),
        blocks,
        histogram,
        elapsed,
    })
}

/// [`stats_messages`] over `count` uniform messages from a seeded generator.
pub fn stats_trials(cfg: &ConstraintConfig, count: u64, seed: u64, opts: EncodeOptions) -> Result<StatsReport> {
    let k = cfg.cells()? - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let messages = (0..count).map(move |_| (0..k).map(|_| rng.gen()).collect());
    stats_messages(cfg, messages, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zrcf() -> ConstraintConfig {
        ConstraintConfig::zrcf(4, &[2, 3]).unwrap()
    }

    #[test]
    fn header_layout() {
        let h = ContainerHeader::new(ConstraintConfig::hdrf(5, &[4, 4], 2).unwrap(), 24);
        let b = h.to_bytes().unwrap();
        let want: Vec<u8> = [
            &b"MDC1"[..],
            &[1, 4, 2],
            &[0, 0, 0, 5],
            &[0, 0, 0, 4, 0, 0, 0, 4],
            &[0, 0, 0, 2],
            &[0, 0, 0, 0, 0, 0, 0, 24],
        ]
        .concat();
        assert_eq!(b, want);
        assert_eq!(ContainerHeader::parse(&b).unwrap(), (h, want.len()));

        let h = ContainerHeader::new(ConstraintConfig::vzrcf(4, 2, 5).unwrap(), 7);
        let b = h.to_bytes().unwrap();
        assert_eq!(&b[7..11], &[0, 0, 0, 4]);
        assert_eq!(&b[11..19], &[0, 0, 0, 0, 0, 0, 0, 5]);
        assert_eq!(ContainerHeader::parse(&b).unwrap().0, h);
    }

    #[test]
    fn bit_packing() {
        assert_eq!(bytes_to_bits(&[0b1000_0001])[..2], [true, false]);
        assert_eq!(bits_to_bytes(&[true, false, true]), vec![0b1010_0000]);
        let data: Vec<u8> = (0..=255).collect();
        assert_eq!(bits_to_bytes(&bytes_to_bits(&data)), data);
    }

    #[test]
    fn empty_input() {
        let out = encode_file(&[], &zrcf()).unwrap();
        assert_eq!(out.len(), 4 + 3 + 4 + 8 + 8);
        assert!(decode_file(&out).unwrap().is_empty());
    }

    #[test]
    fn fifteen_bits_one_block() {
        let bits: Vec<bool> = (0..15).map(|i| i % 4 == 0).collect();
        let out = encode_bits(&bits, &zrcf(), EncodeOptions::default()).unwrap();
        let c = Container::parse(&out).unwrap();
        assert_eq!(c.blocks.len(), 1);
        assert_eq!(c.blocks[0].len(), 16);
        assert_eq!(decode_bits(&out, DecodeOptions::default()).unwrap().1, bits);
    }

    #[test]
    fn rejects_damage() {
        let out = encode_file(b"hello", &zrcf()).unwrap();
        let mut bad = out.clone();
        bad[0] = b'X';
        assert_eq!(decode_file(&bad).unwrap_err(), Error::BadMagic);
        let mut bad = out.clone();
        bad[4] = 2;
        assert_eq!(decode_file(&bad).unwrap_err(), Error::BadVersion(2));
        assert!(matches!(decode_file(&out[..out.len() - 1]), Err(Error::Truncated(_))));
        assert!(matches!(decode_file(&out[..10]), Err(Error::Truncated(_))));
        let mut bad = out.clone();
        bad.push(0);
        assert!(matches!(decode_file(&bad), Err(Error::Corrupt(_))));
    }

    #[test]
    fn infeasible_header_rejected() {
        let mut h = ContainerHeader::new(ConstraintConfig::rf(4, &[3, 3]).unwrap(), 0).to_bytes().unwrap();
        h[11..15].copy_from_slice(&1u32.to_be_bytes());
        h[15..19].copy_from_slice(&1u32.to_be_bytes());
        assert!(matches!(decode_file(&h), Err(Error::Infeasible(_))));
    }

    #[test]
    fn marker_flip_never_panics() {
        let cfg = ConstraintConfig::rf(4, &[3, 3]).unwrap();
        let data: Vec<u8> = (0u8..64).map(|i| i.wrapping_mul(37)).collect();
        let out = encode_file(&data, &cfg).unwrap();
        let header_len = ContainerHeader::parse(&out).unwrap().1;
        let blocks = Container::parse(&out).unwrap().blocks.len();
        for b in 0..blocks {
            let bit = header_len * 8 + b * 16 + 15;
            let mut bad = out.clone();
            bad[bit / 8] ^= 0x80 >> (bit % 8);
            match decode_file(&bad) {
                Ok(back) => assert_ne!(back, data),
                Err(e) => assert!(matches!(e, Error::Block { .. }), "{e}"),
            }
        }
    }

    #[test]
    fn check_and_stats() {
        let out = encode_file(&[0u8; 16], &zrcf()).unwrap();
        let report = check(&out).unwrap();
        assert!(report.passed(), "{report}");
        let stats = stats_container(&out, DecodeOptions::default()).unwrap();
        assert_eq!(stats.blocks, report.blocks);
        assert!(stats.histogram.keys().all(|&k| k >= 1));
        let trials = stats_trials(&zrcf(), 50, 1, EncodeOptions::default()).unwrap();
        assert_eq!(trials.histogram.values().sum::<u64>(), 50);
    }
}
