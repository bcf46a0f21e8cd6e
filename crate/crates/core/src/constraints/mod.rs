//! Concrete constraint codecs: zero-cuboid-free (fixed shape and volume
//! bounded), repeat-free and Hamming-distance repeat-free.
//!
//! Every indicator reports the first violation in ascending vectorized scan
//! order. For pair constraints the first position is the outer loop and the
//! second position (always after the first) is the inner loop.

mod hdrf;
mod rf;
mod vzrcf;
mod zrcf;

pub use hdrf::{find_near_repeat, HdrfCodec};
pub use rf::{find_repeat, reconstruct_repeat, RfCodec};
pub use vzrcf::{find_zero_volume, minimal_shape_set, MinimalShapeSet, VzrcfCodec};
pub use zrcf::{find_zero_cuboid, zero_window_map, ZrcfCodec};

use crate::array::{BitArray, Position, Region, Shape};
use crate::codec::{AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, PayloadLayout};
use crate::error::{Error, Result};

/// The witness an indicator reports and ξ consumes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    /// All-zero sub-array of the configured shape at `at`.
    ZeroCuboid { at: Position },
    /// All-zero sub-array with the `shape_index`-th minimal shape at `at`.
    ZeroVolume { shape_index: usize, at: Position },
    /// Identical sub-arrays at `first` and `second`.
    Repeat { first: Position, second: Position },
    /// Sub-arrays closer than the distance threshold; `diff_offsets` lists the
    /// differing cells as ascending 0-based offsets within the shape.
    NearRepeat {
        first: Position,
        second: Position,
        diff_offsets: Vec<usize>,
    },
}

/// Runs the indicator for `cfg` without requiring the configuration to be feasible.
pub fn find_violation(cfg: &ConstraintConfig, a: &BitArray) -> Result<Option<Violation>> {
    if a.n() != cfg.n() || a.d() != cfg.d() {
        return Err(Error::Parameter(format!("array {}^{} does not match {cfg}", a.n(), a.d())));
    }
    let n = cfg.n();
    let pos = |i: usize| Position::devectorize(i, n, cfg.d()).expect("scan index in range");
    Ok(match cfg.constraint() {
        Constraint::Zrcf { shape } => find_zero_cuboid(a, shape).map(|i| Violation::ZeroCuboid { at: pos(i) }),
        Constraint::Vzrcf { volume } => {
            let set = minimal_shape_set(*volume, n, cfg.d())?;
            find_zero_volume(a, &set).map(|(shape_index, i)| Violation::ZeroVolume {
                shape_index,
                at: pos(i),
            })
        }
        Constraint::Rf { shape } => find_repeat(a, shape).map(|(i, j)| Violation::Repeat {
            first: pos(i),
            second: pos(j),
        }),
        Constraint::Hdrf { shape, distance } => {
            find_near_repeat(a, shape, *distance).map(|(i, j, diff_offsets)| Violation::NearRepeat {
                first: pos(i),
                second: pos(j),
                diff_offsets,
            })
        }
    })
}

/// Vectorized start indices of every in-bounds window of `shape`, ascending.
pub(crate) fn window_starts(n: usize, shape: &Shape) -> Vec<usize> {
    if !shape.fits(n) {
        return Vec::new();
    }
    let room: Vec<usize> = shape.extents().iter().map(|&l| n - l + 1).collect();
    Shape::new(room).map(|r| r.offsets(n)).unwrap_or_default()
}

/// Packs the window at `base` into 64-bit words, cell `k` at bit `k % 64` of word `k / 64`.
pub(crate) fn pack_window(bits: &[bool], base: usize, offsets: &[usize]) -> Vec<u64> {
    let mut words = vec![0u64; offsets.len().div_ceil(64)];
    for (k, &o) in offsets.iter().enumerate() {
        if bits[base + o] {
            words[k / 64] |= 1 << (k % 64);
        }
    }
    words
}

pub(crate) fn position_of(index: u64, n: usize, d: usize) -> Result<Position> {
    usize::try_from(index)
        .map_err(|_| Error::Corrupt(format!("position index {index} out of range")))
        .and_then(|i| Position::devectorize(i, n, d).map_err(|e| Error::Corrupt(e.to_string())))
}

pub(crate) fn index_of(pos: &Position, n: usize) -> Result<u64> {
    Ok(pos.vectorize(n)? as u64)
}

fn wrong_witness(expected: &str, got: &Violation) -> Error {
    Error::Contract(format!("expected a {expected} witness, got {got:?}"))
}

/// A codec for any of the four constraints, built from a feasible configuration.
#[derive(Clone, Debug)]
pub enum Codec {
    Zrcf(ZrcfCodec),
    Vzrcf(VzrcfCodec),
    Rf(RfCodec),
    Hdrf(HdrfCodec),
}

impl Codec {
    pub fn new(cfg: ConstraintConfig) -> Result<Self> {
        Ok(match cfg.constraint() {
            Constraint::Zrcf { .. } => Codec::Zrcf(ZrcfCodec::new(cfg)?),
            Constraint::Vzrcf { .. } => Codec::Vzrcf(VzrcfCodec::new(cfg)?),
            Constraint::Rf { .. } => Codec::Rf(RfCodec::new(cfg)?),
            Constraint::Hdrf { .. } => Codec::Hdrf(HdrfCodec::new(cfg)?),
        })
    }

    fn inner(&self) -> &dyn ConstraintCodec {
        match self {
            Codec::Zrcf(c) => c,
            Codec::Vzrcf(c) => c,
            Codec::Rf(c) => c,
            Codec::Hdrf(c) => c,
        }
    }
}

impl ConstraintCodec for Codec {
    fn config(&self) -> &ConstraintConfig {
        self.inner().config()
    }

    fn layout(&self) -> &PayloadLayout {
        self.inner().layout()
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        self.inner().find_violation(a)
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        self.inner().deleted_region(violation)
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        self.inner().xi_at(a, violation)
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        self.inner().xi_inverse(a)
    }
}

/// Shared admission checks for concrete codecs.
pub(crate) fn admit(cfg: &ConstraintConfig) -> Result<()> {
    cfg.cells()?;
    cfg.check_feasibility()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_starts_ascending() {
        let s = Shape::new(vec![3, 3]).unwrap();
        assert_eq!(window_starts(4, &s), vec![0, 1, 4, 5]);
        assert_eq!(window_starts(3, &s), vec![0]);
        assert!(window_starts(2, &s).is_empty());
    }

    #[test]
    fn codec_requires_feasibility() {
        let cfg = ConstraintConfig::rf(4, &[2, 3]).unwrap();
        assert!(matches!(Codec::new(cfg), Err(Error::Infeasible(_))));
        let cfg = ConstraintConfig::rf(4, &[1, 1]).unwrap();
        assert!(matches!(Codec::new(cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn layout_width_matches_config() {
        for cfg in [
            ConstraintConfig::zrcf(4, &[2, 3]).unwrap(),
            ConstraintConfig::vzrcf(4, 2, 5).unwrap(),
            ConstraintConfig::rf(4, &[3, 3]).unwrap(),
            ConstraintConfig::hdrf(5, &[4, 4], 2).unwrap(),
            ConstraintConfig::hdrf(8, &[5, 5], 3).unwrap(),
        ] {
            let codec = Codec::new(cfg.clone()).unwrap();
            assert_eq!(codec.layout().total_width() as u128, cfg.payload_bits().unwrap(), "{cfg}");
        }
    }
}
