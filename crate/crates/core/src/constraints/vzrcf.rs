use crate::array::{BitArray, Position, Region, Shape};
use crate::codec::{
    delete_and_write, read_payload, AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, FieldSpec, PayloadFields,
    PayloadLayout,
};
use crate::constraints::zrcf::zero_window_map;
use crate::constraints::{admit, index_of, position_of, wrong_witness, Violation};
use crate::error::{Error, Result};

/// The shapes of volume at least `V` that fit in an `n^d` array and lose
/// that property when any single extent is decremented.
///
/// An all-zero sub-array of volume `>= V` exists iff an all-zero sub-array
/// with one of these shapes exists. Shapes are sorted lexicographically by
/// extents; ξ writes the index into this list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalShapeSet {
    volume: usize,
    shapes: Vec<Shape>,
}

impl MinimalShapeSet {
    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Shape> {
        self.shapes.get(index)
    }
}

/// Enumerates the minimal shapes for volume threshold `volume` in `n^d`.
///
/// For fixed leading extents the last extent of a minimal shape is forced to
/// `ceil(V / prefix)`, so only the first `d - 1` extents are searched, and a
/// leading extent never needs to exceed the value that alone reaches `V`.
pub fn minimal_shape_set(volume: usize, n: usize, d: usize) -> Result<MinimalShapeSet> {
    if volume == 0 || n == 0 || d == 0 {
        return Err(Error::Parameter(format!(
            "minimal shapes need V, n, d >= 1 (V={volume}, n={n}, d={d})"
        )));
    }
    let fits = u32::try_from(d)
        .ok()
        .and_then(|d| (n as u128).checked_pow(d))
        .map_or(true, |cells| volume as u128 <= cells);
    if !fits {
        return Err(Error::Infeasible(format!("no sub-array of {n}^{d} has volume {volume}")));
    }
    let mut shapes = Vec::new();
    let mut extents = Vec::with_capacity(d);
    collect_minimal(volume as u128, n as u128, d, 1, &mut extents, &mut shapes);
    Ok(MinimalShapeSet { volume, shapes })
}

fn collect_minimal(v: u128, n: u128, d: usize, prefix: u128, extents: &mut Vec<usize>, out: &mut Vec<Shape>) {
    let need = v.div_ceil(prefix).max(1);
    if extents.len() + 1 == d {
        if need <= n {
            extents.push(need as usize);
            if is_minimal(extents, v) {
                out.push(Shape::new(extents.clone()).expect("extents are positive"));
            }
            extents.pop();
        }
        return;
    }
    for l in 1..=need.min(n) {
        extents.push(l as usize);
        collect_minimal(v, n, d, prefix * l, extents, out);
        extents.pop();
    }
}

fn is_minimal(extents: &[usize], v: u128) -> bool {
    let vol: u128 = extents.iter().map(|&l| l as u128).product();
    vol >= v
        && extents
            .iter()
            .all(|&l| l == 1 || vol / l as u128 * (l as u128 - 1) < v)
}

/// First `(shape_index, start)` in scan order: starts ascending, and at equal
/// start the shape order of `set`.
pub fn find_zero_volume(a: &BitArray, set: &MinimalShapeSet) -> Option<(usize, usize)> {
    let maps: Vec<Vec<bool>> = set.shapes().iter().map(|s| zero_window_map(a, s)).collect();
    (0..a.len()).find_map(|i| maps.iter().position(|m| m[i]).map(|k| (k, i)))
}

/// Volume-bounded zero-cuboid-free codec: ξ records the shape index and position.
#[derive(Clone, Debug)]
pub struct VzrcfCodec {
    cfg: ConstraintConfig,
    set: MinimalShapeSet,
    layout: PayloadLayout,
}

impl VzrcfCodec {
    pub fn new(cfg: ConstraintConfig) -> Result<Self> {
        let volume = match cfg.constraint() {
            Constraint::Vzrcf { volume } => *volume,
            other => return Err(Error::Parameter(format!("not a VZRCF constraint: {other:?}"))),
        };
        admit(&cfg)?;
        let set = minimal_shape_set(volume, cfg.n(), cfg.d())?;
        let layout = PayloadLayout::new(vec![
            FieldSpec::bounded(set.len() as u64),
            FieldSpec::bounded(cfg.cells()? as u64),
        ]);
        Ok(VzrcfCodec { cfg, set, layout })
    }

    pub fn shape_set(&self) -> &MinimalShapeSet {
        &self.set
    }
}

impl ConstraintCodec for VzrcfCodec {
    fn config(&self) -> &ConstraintConfig {
        &self.cfg
    }

    fn layout(&self) -> &PayloadLayout {
        &self.layout
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        find_zero_volume(a, &self.set).map(|(shape_index, i)| Violation::ZeroVolume {
            shape_index,
            at: Position::devectorize(i, a.n(), a.d()).expect("scan index in range"),
        })
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        match violation {
            Violation::ZeroVolume { shape_index, at } => {
                let shape = self
                    .set
                    .get(*shape_index)
                    .ok_or_else(|| Error::Contract(format!("shape index {shape_index} out of range")))?;
                Ok(Region {
                    start: at.clone(),
                    shape: shape.clone(),
                })
            }
            other => Err(wrong_witness("zero-volume", other)),
        }
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        let region = self.deleted_region(violation)?;
        let Violation::ZeroVolume { shape_index, .. } = violation else {
            unreachable!("deleted_region accepted the witness")
        };
        let fields = PayloadFields(vec![*shape_index as u64, index_of(&region.start, a.n())?]);
        delete_and_write(a, &region, &self.layout, fields)
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        // the shape index comes first: it fixes how many survivors there are
        let fields = read_payload(a, &self.layout)?;
        let shape = self.set.shapes()[fields.0[0] as usize].clone();
        let at = position_of(fields.0[1], a.n(), a.d())?;
        let volume = shape.volume();
        a.compacted(Region { start: at, shape })?.reinsert(&vec![false; volume])
    }
}
