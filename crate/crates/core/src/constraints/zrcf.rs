use crate::array::{strides, BitArray, Position, Region, Shape};
use crate::codec::{
    delete_and_write, read_payload, AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, FieldSpec, PayloadFields,
    PayloadLayout,
};
use crate::constraints::{admit, index_of, position_of, wrong_witness, Violation};
use crate::error::{Error, Result};

/// For every cell, whether the window of `shape` starting there lies inside
/// the array and is all zero.
///
/// Separable: one sliding-window pass per axis, `O(d * n^d)` overall.
pub fn zero_window_map(a: &BitArray, shape: &Shape) -> Vec<bool> {
    let n = a.n();
    let mut clear: Vec<bool> = a.bits().iter().map(|&b| !b).collect();
    if shape.dim() != a.d() || !shape.fits(n) {
        return vec![false; clear.len()];
    }
    for (&l, stride) in shape.extents().iter().zip(strides(n, a.d())) {
        if l == 1 {
            continue;
        }
        let mut next = vec![false; clear.len()];
        let block = stride * n;
        for outer in (0..clear.len()).step_by(block) {
            for base in outer..outer + stride {
                let at = |t: usize| base + t * stride;
                let mut blocked = (0..l).filter(|&t| !clear[at(t)]).count();
                next[at(0)] = blocked == 0;
                for t in 1..=n - l {
                    blocked -= usize::from(!clear[at(t - 1)]);
                    blocked += usize::from(!clear[at(t + l - 1)]);
                    next[at(t)] = blocked == 0;
                }
            }
        }
        clear = next;
    }
    clear
}

/// Vectorized index of the first all-zero window of `shape`.
pub fn find_zero_cuboid(a: &BitArray, shape: &Shape) -> Option<usize> {
    zero_window_map(a, shape).iter().position(|&z| z)
}

/// Zero-cuboid-free codec: ξ deletes the first all-zero cuboid and records its position.
#[derive(Clone, Debug)]
pub struct ZrcfCodec {
    cfg: ConstraintConfig,
    shape: Shape,
    layout: PayloadLayout,
}

impl ZrcfCodec {
    pub fn new(cfg: ConstraintConfig) -> Result<Self> {
        let shape = match cfg.constraint() {
            Constraint::Zrcf { shape } => shape.clone(),
            other => return Err(Error::Parameter(format!("not a ZRCF constraint: {other:?}"))),
        };
        admit(&cfg)?;
        let layout = PayloadLayout::new(vec![FieldSpec::bounded(cfg.cells()? as u64)]);
        Ok(ZrcfCodec { cfg, shape, layout })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }
}

impl ConstraintCodec for ZrcfCodec {
    fn config(&self) -> &ConstraintConfig {
        &self.cfg
    }

    fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        find_zero_cuboid(a, &self.shape).map(|i| Violation::ZeroCuboid {
            at: Position::devectorize(i, a.n(), a.d()).expect("scan index in range"),
        })
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        match violation {
            Violation::ZeroCuboid { at } => Ok(Region {
                start: at.clone(),
                shape: self.shape.clone(),
            }),
            other => Err(wrong_witness("zero-cuboid", other)),
        }
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        let region = self.deleted_region(violation)?;
        let fields = PayloadFields(vec![index_of(&region.start, a.n())?]);
        delete_and_write(a, &region, &self.layout, fields)
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        let fields = read_payload(a, &self.layout)?;
        let at = position_of(fields.0[0], a.n(), a.d())?;
        let c = a.compacted(Region {
            start: at,
            shape: self.shape.clone(),
        })?;
        c.reinsert(&vec![false; self.shape.volume()])
    }
}
