use std::collections::HashMap;

use crate::array::{BitArray, PartialArray, Position, Region, Shape};
use crate::codec::{
    delete_and_write, read_payload, AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, FieldSpec, PayloadFields,
    PayloadLayout,
};
use crate::constraints::{admit, index_of, pack_window, position_of, window_starts, wrong_witness, Violation};
use crate::error::{Error, Result};

/// First pair `(first, second)` of window starts with identical contents.
///
/// `first` is the smallest start that has an identical window after it and
/// `second` the smallest such later start, which is what a nested scan would
/// report. Windows are bucketed by their exact packed contents, so there are
/// no false matches to verify.
pub fn find_repeat(a: &BitArray, shape: &Shape) -> Option<(usize, usize)> {
    let offsets = shape.offsets(a.n());
    let starts = window_starts(a.n(), shape);
    // contents -> (first start, first later duplicate)
    let mut seen: HashMap<Vec<u64>, (usize, Option<usize>)> = HashMap::with_capacity(starts.len());
    let mut best: Option<(usize, usize)> = None;
    for s in starts {
        let key = pack_window(a.bits(), s, &offsets);
        match seen.get_mut(&key) {
            Some((first, dup @ None)) => {
                *dup = Some(s);
                if best.map_or(true, |(f, _)| *first < f) {
                    best = Some((*first, s));
                }
            }
            Some(_) => {}
            None => {
                seen.insert(key, (s, None));
            }
        }
    }
    best
}

/// Rebuilds the deleted window at `second` from the window at `first`.
///
/// `partial` must have exactly the cells of `(second, shape)` undefined.
/// Cell `second + o` receives `A[first + o] ^ mask[o]` as soon as its source
/// is defined. When the windows overlap a source may itself be a hole, but
/// following `o -> o + (first - second)` always leaves the window because the
/// starts differ, so repeated passes fill every hole.
pub fn reconstruct_repeat(
    mut partial: PartialArray,
    first: &Position,
    second: &Position,
    shape: &Shape,
    mask: &[bool],
) -> Result<BitArray> {
    if first == second {
        return Err(Error::Contract("repeat positions coincide".into()));
    }
    let n = partial.n();
    let offsets = shape.offsets(n);
    if mask.len() != offsets.len() {
        return Err(Error::Contract(format!(
            "mask of {} bits for a window of {}",
            mask.len(),
            offsets.len()
        )));
    }
    Region::new(first.clone(), shape.clone())?.check_bounds(n)?;
    Region::new(second.clone(), shape.clone())?.check_bounds(n)?;
    let src = first.vectorize(n)?;
    let dst = second.vectorize(n)?;
    if partial.undefined_count() != offsets.len() || offsets.iter().any(|&o| partial.get(dst + o).is_some()) {
        return Err(Error::Contract("undefined cells are not exactly the deleted window".into()));
    }

    let mut pending: Vec<usize> = (0..offsets.len()).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&k| match partial.get(src + offsets[k]) {
            Some(v) => {
                partial.set(dst + offsets[k], v ^ mask[k]);
                false
            }
            None => true,
        });
        if pending.len() == before {
            return Err(Error::Contract(format!("reconstruction stalled with {before} holes")));
        }
    }
    partial.into_complete()
}

/// Decodes the two positions of a repeat payload.
pub(crate) fn read_pair(a: &AlmostArray, fields: &PayloadFields) -> Result<(Position, Position)> {
    let first = position_of(fields.0[0], a.n(), a.d())?;
    let second = position_of(fields.0[1], a.n(), a.d())?;
    if first == second {
        return Err(Error::Corrupt(format!("repeat positions coincide at {first}")));
    }
    Ok((first, second))
}

/// Reinserts holes at `second` and rebuilds them from `first`.
pub(crate) fn undo_pair_deletion(
    a: &AlmostArray,
    first: Position,
    second: Position,
    shape: &Shape,
    mask: &[bool],
) -> Result<BitArray> {
    Region::new(first.clone(), shape.clone())?
        .check_bounds(a.n())
        .map_err(|e| Error::Corrupt(format!("decoded {e}")))?;
    let partial = a
        .compacted(Region {
            start: second.clone(),
            shape: shape.clone(),
        })?
        .reinsert_holes()?;
    reconstruct_repeat(partial, &first, &second, shape, mask)
}

/// Repeat-free codec: ξ deletes the later copy of the first repeated window.
#[derive(Clone, Debug)]
pub struct RfCodec {
    cfg: ConstraintConfig,
    shape: Shape,
    layout: PayloadLayout,
}

impl RfCodec {
    pub fn new(cfg: ConstraintConfig) -> Result<Self> {
        let shape = match cfg.constraint() {
            Constraint::Rf { shape } => shape.clone(),
            other => return Err(Error::Parameter(format!("not an RF constraint: {other:?}"))),
        };
        admit(&cfg)?;
        let position = FieldSpec::bounded(cfg.cells()? as u64);
        let layout = PayloadLayout::new(vec![position, position]);
        Ok(RfCodec { cfg, shape, layout })
    }
}

impl ConstraintCodec for RfCodec {
    fn config(&self) -> &ConstraintConfig {
        &self.cfg
    }

    fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        let pos = |i| Position::devectorize(i, a.n(), a.d()).expect("scan index in range");
        find_repeat(a, &self.shape).map(|(i, j)| Violation::Repeat {
            first: pos(i),
            second: pos(j),
        })
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        match violation {
            Violation::Repeat { second, .. } => Ok(Region {
                start: second.clone(),
                shape: self.shape.clone(),
            }),
            other => Err(wrong_witness("repeat", other)),
        }
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        let region = self.deleted_region(violation)?;
        let Violation::Repeat { first, second } = violation else {
            unreachable!("deleted_region accepted the witness")
        };
        let fields = PayloadFields(vec![index_of(first, a.n())?, index_of(second, a.n())?]);
        delete_and_write(a, &region, &self.layout, fields)
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        let fields = read_payload(a, &self.layout)?;
        let (first, second) = read_pair(a, &fields)?;
        undo_pair_deletion(a, first, second, &self.shape, &vec![false; self.shape.volume()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec() -> RfCodec {
        RfCodec::new(ConstraintConfig::rf(4, &[3, 3]).unwrap()).unwrap()
    }

    /// Nested loop over start pairs in scan order.
    fn naive_repeat(a: &BitArray, shape: &Shape) -> Option<(usize, usize)> {
        let starts = window_starts(a.n(), shape);
        let content = |s: usize| {
            let p = Position::devectorize(s, a.n(), a.d()).unwrap();
            a.subarray(&p, shape).unwrap()
        };
        for (k, &i) in starts.iter().enumerate() {
            for &j in &starts[k + 1..] {
                if content(i) == content(j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    #[test]
    fn all_zero_witness() {
        let v = codec().find_violation(&BitArray::zeros(4, 2).unwrap());
        assert_eq!(
            v,
            Some(Violation::Repeat {
                first: Position::new([0, 0]),
                second: Position::new([1, 0]),
            })
        );
    }

    #[test]
    fn distinct_windows_valid() {
        // search for an array whose four 3x3 windows differ
        let c = codec();
        let found = (0u32..1 << 16)
            .map(|w| BitArray::from_bits(4, 2, (0..16).map(|i| w >> i & 1 == 1).collect()).unwrap())
            .find(|a| c.is_valid(a))
            .expect("a repeat-free 4x4 array exists");
        assert!(naive_repeat(&found, &Shape::new(vec![3, 3]).unwrap()).is_none());
    }

    #[test]
    fn single_window_always_valid() {
        let c = RfCodec::new(ConstraintConfig::rf(3, &[3, 3]).unwrap()).unwrap();
        assert!(c.is_valid(&BitArray::zeros(3, 2).unwrap()));
    }

    #[test]
    fn witness_is_minimal_first_not_first_duplicate_seen() {
        // d=1, n=8, windows of length 1: starts 0 and 7 match, 1..=6 are
        // a sequence whose first internal duplicate appears later
        let bits = vec![true, false, false, true, true, true, true, true];
        let a = BitArray::from_bits(8, 1, bits).unwrap();
        let s = Shape::new(vec![1]).unwrap();
        assert_eq!(find_repeat(&a, &s), naive_repeat(&a, &s));
        assert_eq!(find_repeat(&a, &s), Some((0, 3)));
    }

    #[test]
    fn hashing_matches_nested_scan() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for (n, ext) in [(4usize, vec![2, 2]), (4, vec![3, 3]), (5, vec![2, 3]), (3, vec![1, 2, 2]), (12, vec![3])] {
            let shape = Shape::new(ext.clone()).unwrap();
            let d = ext.len();
            for _ in 0..300 {
                let bits = (0..n.pow(d as u32))
                    .map(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        state & 1 == 1
                    })
                    .collect();
                let a = BitArray::from_bits(n, d, bits).unwrap();
                assert_eq!(find_repeat(&a, &shape), naive_repeat(&a, &shape));
            }
        }
    }

    #[test]
    fn boundary_payload_fills_gap() {
        let c = codec();
        let a = BitArray::zeros(4, 2).unwrap();
        let out = c.xi(&a).unwrap();
        // 7 survivors, then I1=(0,0) -> 0000 and I2=(1,0) -> 0001, no pad
        let mut want = vec![false; 7];
        want.extend([false, false, false, false, false, false, false, true]);
        assert_eq!(out.bits(), &want[..]);
        assert_eq!(c.xi_inverse(&out).unwrap(), a);
    }

    #[test]
    fn non_overlapping_copy() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let mut a = BitArray::zeros(4, 2).unwrap();
        for (p, v) in [([0, 0], true), ([1, 0], false), ([0, 1], true), ([1, 1], true)] {
            a.set_at(&Position::new(p), v).unwrap();
        }
        for (p, v) in [([2, 2], true), ([3, 2], false), ([2, 3], true), ([3, 3], true)] {
            a.set_at(&Position::new(p), v).unwrap();
        }
        let (i1, i2) = (Position::new([0, 0]), Position::new([2, 2]));
        let partial = a.delete_subarray(&i2, &shape).unwrap().reinsert_holes().unwrap();
        let r = reconstruct_repeat(partial, &i1, &i2, &shape, &[false; 4]).unwrap();
        assert_eq!(r, a);
    }

    #[test]
    fn overlapping_rows_fill_in_order() {
        // period 1 along the first axis: every row i1 equals row i1+1 within the window
        let shape = Shape::new(vec![3, 3]).unwrap();
        let columns = [true, false, true, true];
        let mut a = BitArray::zeros(4, 2).unwrap();
        for i1 in 0..4 {
            for (i2, &c) in columns.iter().enumerate() {
                a.set_at(&Position::new([i1, i2]), c).unwrap();
            }
        }
        let (i1, i2) = (Position::new([0, 0]), Position::new([1, 0]));
        assert_eq!(a.subarray(&i1, &shape).unwrap(), a.subarray(&i2, &shape).unwrap());
        let partial = a.delete_subarray(&i2, &shape).unwrap().reinsert_holes().unwrap();
        let r = reconstruct_repeat(partial, &i1, &i2, &shape, &[false; 9]).unwrap();
        assert_eq!(r, a);
    }

    #[test]
    fn equal_positions_rejected() {
        let p = Position::new([0, 0]);
        let shape = Shape::new(vec![2, 2]).unwrap();
        let partial = BitArray::ones(4, 2).unwrap().delete_subarray(&p, &shape).unwrap().reinsert_holes().unwrap();
        assert!(matches!(
            reconstruct_repeat(partial, &p, &p, &shape, &[false; 4]),
            Err(Error::Contract(_))
        ));

        let c = codec();
        let mut bits = vec![true; 7];
        bits.extend([false, false, false, true, false, false, false, true]);
        let a = AlmostArray::from_bits(4, 2, bits).unwrap();
        assert!(matches!(c.xi_inverse(&a), Err(Error::Corrupt(_))));
    }
}
