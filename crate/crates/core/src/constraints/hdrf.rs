use std::collections::HashMap;

use crate::array::{BitArray, Position, Region, Shape};
use crate::codec::{
    delete_and_write, read_payload, AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, FieldSpec, PayloadFields,
    PayloadLayout,
};
use crate::constraints::rf::{find_repeat, read_pair, undo_pair_deletion};
use crate::constraints::{admit, index_of, pack_window, window_starts, wrong_witness, Violation};
use crate::error::{Error, Result};

/// Start counts above this use chunk-hash pruning instead of the plain pair scan.
const PRUNE_ABOVE: usize = 32;

/// First pair of windows at Hamming distance below `p`, with the offsets
/// (indices into the window's cell order) where they differ.
///
/// The pair is the one a nested scan reports: smallest first start, then
/// smallest second start.
pub fn find_near_repeat(a: &BitArray, shape: &Shape, p: usize) -> Option<(usize, usize, Vec<usize>)> {
    if p == 0 {
        return None;
    }
    if p == 1 {
        return find_repeat(a, shape).map(|(i, j)| (i, j, Vec::new()));
    }
    let offsets = shape.offsets(a.n());
    let starts = window_starts(a.n(), shape);
    let windows: Vec<Vec<u64>> = starts.iter().map(|&s| pack_window(a.bits(), s, &offsets)).collect();
    let pair = if starts.len() > PRUNE_ABOVE && p <= offsets.len() {
        pruned_scan(a, &starts, &offsets, &windows, p)
    } else {
        pair_scan(&windows, p)
    };
    pair.map(|(x, y)| (starts[x], starts[y], differing(&windows[x], &windows[y])))
}

fn distance_below(x: &[u64], y: &[u64], p: usize) -> bool {
    let mut dist = 0usize;
    for (a, b) in x.iter().zip(y) {
        dist += (a ^ b).count_ones() as usize;
        if dist >= p {
            return false;
        }
    }
    true
}

fn differing(x: &[u64], y: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, (a, b)) in x.iter().zip(y).enumerate() {
        let mut diff = a ^ b;
        while diff != 0 {
            out.push(w * 64 + diff.trailing_zeros() as usize);
            diff &= diff - 1;
        }
    }
    out
}

fn pair_scan(windows: &[Vec<u64>], p: usize) -> Option<(usize, usize)> {
    (0..windows.len()).find_map(|x| {
        (x + 1..windows.len())
            .find(|&y| distance_below(&windows[x], &windows[y], p))
            .map(|y| (x, y))
    })
}

/// Splits the window cells into `p` chunks. Two windows at distance below `p`
/// agree on at least one chunk, so only windows sharing a chunk are compared.
fn pruned_scan(
    a: &BitArray,
    starts: &[usize],
    offsets: &[usize],
    windows: &[Vec<u64>],
    p: usize,
) -> Option<(usize, usize)> {
    let vol = offsets.len();
    let buckets: Vec<HashMap<Vec<u64>, Vec<usize>>> = (0..p)
        .map(|c| {
            let chunk = &offsets[c * vol / p..(c + 1) * vol / p];
            let mut map: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
            for (x, &s) in starts.iter().enumerate() {
                map.entry(pack_window(a.bits(), s, chunk)).or_default().push(x);
            }
            map
        })
        .collect();
    let keys: Vec<Vec<Vec<u64>>> = (0..p)
        .map(|c| {
            let chunk = &offsets[c * vol / p..(c + 1) * vol / p];
            starts.iter().map(|&s| pack_window(a.bits(), s, chunk)).collect()
        })
        .collect();

    let mut candidates = Vec::new();
    for x in 0..starts.len() {
        candidates.clear();
        for c in 0..p {
            let bucket = &buckets[c][&keys[c][x]];
            let from = bucket.partition_point(|&y| y <= x);
            candidates.extend_from_slice(&bucket[from..]);
        }
        candidates.sort_unstable();
        candidates.dedup();
        if let Some(&y) = candidates.iter().find(|&&y| distance_below(&windows[x], &windows[y], p)) {
            return Some((x, y));
        }
    }
    None
}

/// Hamming-distance repeat-free codec: ξ deletes the later window of the
/// first close pair and records both positions plus the differing offsets.
///
/// Offsets are written 1-based in window cell order, ascending, with 0 as
/// the trailing filler.
#[derive(Clone, Debug)]
pub struct HdrfCodec {
    cfg: ConstraintConfig,
    shape: Shape,
    distance: usize,
    layout: PayloadLayout,
}

impl HdrfCodec {
    pub fn new(cfg: ConstraintConfig) -> Result<Self> {
        let (shape, distance) = match cfg.constraint() {
            Constraint::Hdrf { shape, distance } => (shape.clone(), *distance),
            other => return Err(Error::Parameter(format!("not an HDRF constraint: {other:?}"))),
        };
        admit(&cfg)?;
        let position = FieldSpec::bounded(cfg.cells()? as u64);
        let diff = FieldSpec::bounded(shape.volume() as u64 + 1);
        let mut fields = vec![position, position];
        fields.resize(distance + 1, diff);
        Ok(HdrfCodec {
            cfg,
            shape,
            distance,
            layout: PayloadLayout::new(fields),
        })
    }

    pub fn distance(&self) -> usize {
        self.distance
    }
}

impl ConstraintCodec for HdrfCodec {
    fn config(&self) -> &ConstraintConfig {
        &self.cfg
    }

    fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        let pos = |i| Position::devectorize(i, a.n(), a.d()).expect("scan index in range");
        find_near_repeat(a, &self.shape, self.distance).map(|(i, j, diff_offsets)| Violation::NearRepeat {
            first: pos(i),
            second: pos(j),
            diff_offsets,
        })
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        match violation {
            Violation::NearRepeat { second, .. } => Ok(Region {
                start: second.clone(),
                shape: self.shape.clone(),
            }),
            other => Err(wrong_witness("near-repeat", other)),
        }
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        let region = self.deleted_region(violation)?;
        let Violation::NearRepeat {
            first,
            second,
            diff_offsets,
        } = violation
        else {
            unreachable!("deleted_region accepted the witness")
        };
        if diff_offsets.len() >= self.distance {
            return Err(Error::Contract(format!(
                "{} differing cells for distance threshold {}",
                diff_offsets.len(),
                self.distance
            )));
        }
        let mut values = vec![index_of(first, a.n())?, index_of(second, a.n())?];
        values.extend(diff_offsets.iter().map(|&o| o as u64 + 1));
        values.resize(self.distance + 1, 0);
        delete_and_write(a, &region, &self.layout, PayloadFields(values))
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        let fields = read_payload(a, &self.layout)?;
        let (first, second) = read_pair(a, &fields)?;
        let mut mask = vec![false; self.shape.volume()];
        let mut prev = 0u64;
        let mut ended = false;
        for &v in &fields.0[2..] {
            if v == 0 {
                ended = true;
            } else if ended || v <= prev {
                return Err(Error::Corrupt(format!(
                    "difference offsets {:?} are not ascending with trailing fillers",
                    &fields.0[2..]
                )));
            } else {
                mask[v as usize - 1] = true;
                prev = v;
            }
        }
        undo_pair_deletion(a, first, second, &self.shape, &mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::PartialArray;
    use crate::constraints::reconstruct_repeat;
    use proptest::prelude::*;

    fn naive(a: &BitArray, shape: &Shape, p: usize) -> Option<(usize, usize, Vec<usize>)> {
        let starts = window_starts(a.n(), shape);
        let content = |s: usize| {
            let pos = Position::devectorize(s, a.n(), a.d()).unwrap();
            a.subarray(&pos, shape).unwrap()
        };
        for (k, &i) in starts.iter().enumerate() {
            for &j in &starts[k + 1..] {
                let diff: Vec<usize> = content(i)
                    .iter()
                    .zip(content(j))
                    .enumerate()
                    .filter(|(_, (x, y))| **x != *y)
                    .map(|(o, _)| o)
                    .collect();
                if diff.len() < p {
                    return Some((i, j, diff));
                }
            }
        }
        None
    }

    fn random_array(n: usize, d: usize, seed: u64) -> BitArray {
        let mut s = seed | 1;
        let bits = (0..n.pow(d as u32))
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                s & 1 == 1
            })
            .collect();
        BitArray::from_bits(n, d, bits).unwrap()
    }

    #[test]
    fn identical_pair_uses_filler() {
        let c = HdrfCodec::new(ConstraintConfig::hdrf(5, &[4, 4], 2).unwrap()).unwrap();
        let a = BitArray::zeros(5, 2).unwrap();
        let v = c.find_violation(&a).unwrap();
        assert_eq!(
            v,
            Violation::NearRepeat {
                first: Position::new([0, 0]),
                second: Position::new([1, 0]),
                diff_offsets: vec![],
            }
        );
        let out = c.xi(&a).unwrap();
        // survivors 9, then I1 00000, I2 00001, P1 00000
        let tail: Vec<bool> = out.bits()[9..].to_vec();
        let mut want = vec![false; 9];
        want.push(true);
        want.extend([false; 5]);
        assert_eq!(tail, want);
        assert_eq!(c.xi_inverse(&out).unwrap(), a);
    }

    #[test]
    fn distance_one_pair_roundtrip() {
        // rows of a 5x5 array equal except one flipped cell between windows (0,0) and (1,0)
        let c = HdrfCodec::new(ConstraintConfig::hdrf(5, &[4, 4], 2).unwrap()).unwrap();
        let mut a = random_array(5, 2, 7);
        for i2 in 0..5 {
            let v = a.get_at(&Position::new([0, i2])).unwrap();
            for i1 in 1..5 {
                a.set_at(&Position::new([i1, i2]), v).unwrap();
            }
        }
        // cell (4,1) is offset 7 of window (1,0) and lies outside window (0,0)
        let flip = Position::new([4, 1]);
        let v = a.get_at(&flip).unwrap();
        a.set_at(&flip, !v).unwrap();
        let (i, j, diff) = find_near_repeat(&a, &Shape::new(vec![4, 4]).unwrap(), 2).unwrap();
        assert_eq!((i, j), (0, 1));
        assert_eq!(diff, vec![7]);
        let out = c.xi(&a).unwrap();
        let fields = read_payload(&out, c.layout()).unwrap();
        assert_eq!(fields.0, vec![0, 1, 8]);
        assert_eq!(c.xi_inverse(&out).unwrap(), a);
    }

    #[test]
    fn masked_overlap_reconstruction() {
        let shape = Shape::new(vec![3, 3]).unwrap();
        let (i1, i2) = (Position::new([0, 0]), Position::new([1, 0]));
        let mut mask = vec![false; 9];
        mask[4] = true;
        for seed in 1..50 {
            let mut a = random_array(4, 2, seed);
            // propagate rows from the first column so window (1,0) = window (0,0) ^ mask
            for (k, o) in shape.offsets(4).into_iter().enumerate() {
                let v = a.get(o) ^ mask[k];
                a.set(o + 1, v);
            }
            let partial: PartialArray = a.delete_subarray(&i2, &shape).unwrap().reinsert_holes().unwrap();
            assert_eq!(reconstruct_repeat(partial, &i1, &i2, &shape, &mask).unwrap(), a);
        }
    }

    #[test]
    fn rejects_malformed_offsets() {
        let c = HdrfCodec::new(ConstraintConfig::hdrf(8, &[5, 5], 3).unwrap()).unwrap();
        let w = c.layout().total_width();
        let build = |p: [u64; 2]| {
            let mut bits = vec![true; 63 - w];
            bits.extend(crate::codec::encode_field(0, 6).unwrap());
            bits.extend(crate::codec::encode_field(1, 6).unwrap());
            bits.extend(crate::codec::encode_field(p[0], 5).unwrap());
            bits.extend(crate::codec::encode_field(p[1], 5).unwrap());
            AlmostArray::from_bits(8, 2, bits).unwrap()
        };
        for bad in [[0, 3], [4, 2], [5, 5]] {
            assert!(matches!(c.xi_inverse(&build(bad)), Err(Error::Corrupt(_))), "{bad:?}");
        }
        assert!(c.xi_inverse(&build([2, 9])).is_ok());
    }

    #[test]
    fn p_one_matches_repeat_free() {
        let shape = Shape::new(vec![3, 3]).unwrap();
        for seed in 1..200 {
            let a = random_array(4, 2, seed);
            assert_eq!(
                find_near_repeat(&a, &shape, 1).map(|(i, j, _)| (i, j)),
                find_repeat(&a, &shape)
            );
        }
    }

    #[test]
    fn threshold_above_volume_flags_first_pair() {
        let shape = Shape::new(vec![2, 1]).unwrap();
        let a = BitArray::ones(4, 2).unwrap();
        assert_eq!(find_near_repeat(&a, &shape, 3), Some((0, 1, vec![])));
    }

    proptest! {
        #[test]
        fn pruned_scan_matches_naive(seed in any::<u64>(), n in 6usize..10, l1 in 2usize..5, l2 in 2usize..5, p in 1usize..6) {
            let shape = Shape::new(vec![l1, l2]).unwrap();
            // bias toward near repeats: a smooth array with a few flips
            let mut a = random_array(n, 2, seed);
            for i in 0..a.len() {
                if i % 3 != 0 {
                    let v = a.get(i - i % 3);
                    a.set(i, v);
                }
            }
            prop_assert_eq!(find_near_repeat(&a, &shape, p), naive(&a, &shape, p));
        }

        #[test]
        fn random_dense_matches_naive(seed in any::<u64>(), p in 2usize..12) {
            let shape = Shape::new(vec![3, 3]).unwrap();
            let a = random_array(9, 2, seed);
            prop_assert_eq!(find_near_repeat(&a, &shape, p), naive(&a, &shape, p));
        }
    }
}
