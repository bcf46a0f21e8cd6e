//! Dense binary arrays of size `n^d`.
//!
//! Cells are stored in vectorized order: position `(i_1, ..., i_d)` lives at
//! index `i_1 + i_2*n + ... + i_d*n^(d-1)`. Every scan, serialization and
//! "first match" rule in the crate uses ascending vectorized index.

use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on `n^d` for arrays that are actually materialized.
pub const MAX_CELLS: usize = 1 << 32;

/// Number of cells `n^d`, rejecting sizes that cannot be materialized.
pub fn cell_count(n: usize, d: usize) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(Error::Parameter(format!("array side n={n} and dimension d={d} must be positive")));
    }
    let mut total: usize = 1;
    for _ in 0..d {
        total = total
            .checked_mul(n)
            .filter(|&t| t <= MAX_CELLS)
            .ok_or_else(|| Error::Parameter(format!("array of size {n}^{d} is too large")))?;
    }
    Ok(total)
}

/// Extents `(l_1, ..., l_d)` of an axis-aligned sub-array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    extents: Vec<usize>,
}

impl Shape {
    pub fn new(extents: impl Into<Vec<usize>>) -> Result<Self> {
        let extents = extents.into();
        if extents.is_empty() {
            return Err(Error::Parameter("shape must have at least one dimension".into()));
        }
        if extents.contains(&0) {
            return Err(Error::Parameter(format!("shape extents must be positive, got {extents:?}")));
        }
        Ok(Shape { extents })
    }

    /// The square/cubic shape `(side, ..., side)`.
    pub fn cube(side: usize, d: usize) -> Result<Self> {
        Shape::new(vec![side; d])
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    /// The d-volume `l_1 * ... * l_d` (saturating).
    pub fn volume(&self) -> usize {
        self.extents.iter().fold(1usize, |acc, &l| acc.saturating_mul(l))
    }

    /// Whether every extent is at most `n`.
    pub fn fits(&self, n: usize) -> bool {
        self.extents.iter().all(|&l| l <= n)
    }

    /// Vectorized offsets of every cell of the shape relative to its start
    /// inside an array of side `n`, in ascending order.
    ///
    /// The k-th entry belongs to the k-th cell of the shape when the shape is
    /// itself enumerated with its first coordinate varying fastest.
    pub fn offsets(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.volume());
        let mut digits = vec![0usize; self.dim()];
        let strides = strides(n, self.dim());
        loop {
            out.push(digits.iter().zip(&strides).map(|(o, s)| o * s).sum());
            // odometer increment, first coordinate fastest
            let mut j = 0;
            loop {
                if j == digits.len() {
                    return out;
                }
                digits[j] += 1;
                if digits[j] < self.extents[j] {
                    break;
                }
                digits[j] = 0;
                j += 1;
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.extents)
    }
}

pub fn volume(shape: &Shape) -> usize {
    shape.volume()
}

/// `[1, n, n^2, ..., n^(d-1)]`.
pub(crate) fn strides(n: usize, d: usize) -> Vec<usize> {
    let mut s = Vec::with_capacity(d);
    let mut acc = 1usize;
    for _ in 0..d {
        s.push(acc);
        acc = acc.saturating_mul(n);
    }
    s
}

/// A cell coordinate `(i_1, ..., i_d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    coords: Vec<usize>,
}

impl Position {
    pub fn new(coords: impl Into<Vec<usize>>) -> Self {
        Position { coords: coords.into() }
    }

    pub fn origin(d: usize) -> Self {
        Position { coords: vec![0; d] }
    }

    /// `(n-1, ..., n-1)`, the reserved redundancy slot.
    pub fn last(n: usize, d: usize) -> Self {
        Position { coords: vec![n - 1; d] }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn vectorize(&self, n: usize) -> Result<usize> {
        let mut index = 0usize;
        let mut stride = 1usize;
        for (j, &i) in self.coords.iter().enumerate() {
            if i >= n {
                return Err(Error::Bounds(format!("coordinate {j} of {self} is not below n={n}")));
            }
            index = i
                .checked_mul(stride)
                .and_then(|t| t.checked_add(index))
                .ok_or_else(|| Error::Bounds(format!("{self} overflows the index space")))?;
            stride = stride.saturating_mul(n);
        }
        Ok(index)
    }

    pub fn devectorize(index: usize, n: usize, d: usize) -> Result<Self> {
        let cells = cell_count(n, d)?;
        if index >= cells {
            return Err(Error::Bounds(format!("index {index} is not below n^d={cells}")));
        }
        let mut rest = index;
        let coords = (0..d)
            .map(|_| {
                let c = rest % n;
                rest /= n;
                c
            })
            .collect();
        Ok(Position { coords })
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.coords)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, xs: &[usize]) -> fmt::Result {
    write!(f, "(")?;
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

pub fn vectorize(pos: &Position, n: usize) -> Result<usize> {
    pos.vectorize(n)
}

pub fn devectorize(index: usize, n: usize, d: usize) -> Result<Position> {
    Position::devectorize(index, n, d)
}

/// A sub-array `A_{I,d}`: start position plus shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub start: Position,
    pub shape: Shape,
}

impl Region {
    pub fn new(start: Position, shape: Shape) -> Result<Self> {
        if start.dim() != shape.dim() {
            return Err(Error::Parameter(format!(
                "start {start} and shape {shape} have different dimensions"
            )));
        }
        Ok(Region { start, shape })
    }

    pub fn volume(&self) -> usize {
        self.shape.volume()
    }

    /// Checks `i_j + l_j <= n` for every axis.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        for (j, (&i, &l)) in self.start.coords().iter().zip(self.shape.extents()).enumerate() {
            if i.checked_add(l).map_or(true, |end| end > n) {
                return Err(Error::Bounds(format!(
                    "sub-array at {} with shape {} leaves the array along axis {j} (n={n})",
                    self.start, self.shape
                )));
            }
        }
        Ok(())
    }

    pub fn cells(&self, n: usize) -> Result<Vec<usize>> {
        self.check_bounds(n)?;
        let base = self.start.vectorize(n)?;
        Ok(self.shape.offsets(n).into_iter().map(|o| base + o).collect())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.start, self.shape)
    }
}

/// Vectorized indices of the cells of `A_{start,shape}`, ascending.
pub fn subarray_cells(start: &Position, shape: &Shape, n: usize) -> Result<Vec<usize>> {
    Region::new(start.clone(), shape.clone())?.cells(n)
}

/// A full binary array of `n^d` cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitArray {
    n: usize,
    d: usize,
    bits: Vec<bool>,
}

impl BitArray {
    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Ok(BitArray {
            n,
            d,
            bits: vec![false; cell_count(n, d)?],
        })
    }

    pub fn ones(n: usize, d: usize) -> Result<Self> {
        Ok(BitArray {
            n,
            d,
            bits: vec![true; cell_count(n, d)?],
        })
    }

    pub fn from_bits(n: usize, d: usize, bits: Vec<bool>) -> Result<Self> {
        let cells = cell_count(n, d)?;
        if bits.len() != cells {
            return Err(Error::Structure(format!(
                "{} bits given for an array of {cells} cells",
                bits.len()
            )));
        }
        Ok(BitArray { n, d, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    /// Bit at a vectorized index. Panics when out of range, like slice indexing.
    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub fn get_at(&self, pos: &Position) -> Result<bool> {
        self.check_dim(pos.dim())?;
        Ok(self.bits[pos.vectorize(self.n)?])
    }

    pub fn set_at(&mut self, pos: &Position, value: bool) -> Result<()> {
        self.check_dim(pos.dim())?;
        let index = pos.vectorize(self.n)?;
        self.bits[index] = value;
        Ok(())
    }

    /// Index of the reserved slot `(n-1, ..., n-1)`.
    pub fn last_index(&self) -> usize {
        self.bits.len() - 1
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// The bits of `A_{start,shape}` in ascending cell order.
    pub fn subarray(&self, start: &Position, shape: &Shape) -> Result<Vec<bool>> {
        self.check_dim(start.dim())?;
        Ok(subarray_cells(start, shape, self.n)?
            .into_iter()
            .map(|c| self.bits[c])
            .collect())
    }

    /// Removes `A_{start,shape}` and packs the remaining bits at the front.
    ///
    /// Two passes over the cells: one marks the sub-array, one compacts.
    pub fn delete_subarray(&self, start: &Position, shape: &Shape) -> Result<CompactedArray> {
        self.check_dim(start.dim())?;
        let region = Region::new(start.clone(), shape.clone())?;
        let mut doomed = vec![false; self.bits.len()];
        for c in region.cells(self.n)? {
            doomed[c] = true;
        }
        let survivors = self
            .bits
            .iter()
            .zip(&doomed)
            .filter_map(|(&b, &gone)| (!gone).then_some(b))
            .collect();
        Ok(CompactedArray {
            n: self.n,
            d: self.d,
            survivors,
            region,
        })
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.d {
            return Err(Error::Parameter(format!(
                "{d}-dimensional index used on a {}-dimensional array",
                self.d
            )));
        }
        Ok(())
    }
}

impl fmt::Display for BitArray {
    /// Vectorized order, one character per cell.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn delete_subarray(a: &BitArray, start: &Position, shape: &Shape) -> Result<CompactedArray> {
    a.delete_subarray(start, shape)
}

/// `R(A_{I,d})`: the survivors of a deletion, in vectorized order, followed by
/// `gap` empty trailing slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactedArray {
    n: usize,
    d: usize,
    survivors: Vec<bool>,
    region: Region,
}

impl CompactedArray {
    pub fn from_parts(n: usize, d: usize, survivors: Vec<bool>, region: Region) -> Result<Self> {
        let cells = cell_count(n, d)?;
        if region.start.dim() != d {
            return Err(Error::Structure(format!("region {region} is not {d}-dimensional")));
        }
        region.check_bounds(n).map_err(|e| Error::Structure(e.to_string()))?;
        if survivors.len() + region.volume() != cells {
            return Err(Error::Structure(format!(
                "{} survivors plus a gap of {} do not fill {cells} cells",
                survivors.len(),
                region.volume()
            )));
        }
        Ok(CompactedArray { n, d, survivors, region })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn survivors(&self) -> &[bool] {
        &self.survivors
    }

    pub fn gap(&self) -> usize {
        self.region.volume()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Puts the survivors back around the deleted region and fills the region
    /// with `fill`, given in ascending cell order.
    pub fn reinsert(&self, fill: &[bool]) -> Result<BitArray> {
        if fill.len() != self.gap() {
            return Err(Error::Structure(format!(
                "fill of {} bits for a gap of {}",
                fill.len(),
                self.gap()
            )));
        }
        let cells = self.spread(|hole| Some(fill[hole]))?;
        Ok(BitArray {
            n: self.n,
            d: self.d,
            bits: cells.into_iter().map(|c| c.unwrap_or(false)).collect(),
        })
    }

    /// Like [`reinsert`](Self::reinsert) but leaves the region undefined.
    pub fn reinsert_holes(&self) -> Result<PartialArray> {
        Ok(PartialArray {
            n: self.n,
            d: self.d,
            cells: self.spread(|_| None)?,
        })
    }

    fn spread(&self, mut hole: impl FnMut(usize) -> Option<bool>) -> Result<Vec<Option<bool>>> {
        let total = self.survivors.len() + self.gap();
        let mut in_region = vec![false; total];
        for c in self.region.cells(self.n)? {
            in_region[c] = true;
        }
        let mut survivors = self.survivors.iter();
        let mut holes = 0usize;
        let cells = in_region
            .into_iter()
            .map(|r| {
                if r {
                    holes += 1;
                    hole(holes - 1)
                } else {
                    // lengths were checked at construction
                    survivors.next().copied()
                }
            })
            .collect();
        Ok(cells)
    }
}

pub fn reinsert_subarray(c: &CompactedArray, fill: &[bool]) -> Result<BitArray> {
    c.reinsert(fill)
}

/// An array with some undefined cells, used while rebuilding a deleted repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialArray {
    n: usize,
    d: usize,
    cells: Vec<Option<bool>>,
}

impl PartialArray {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.cells[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.cells[index] = Some(value);
    }

    pub fn undefined_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.is_none().then_some(i))
            .collect()
    }

    pub fn undefined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Converts to a full array once every cell is defined.
    pub fn into_complete(self) -> Result<BitArray> {
        let missing = self.undefined_count();
        if missing > 0 {
            return Err(Error::Contract(format!("{missing} cells are still undefined")));
        }
        Ok(BitArray {
            n: self.n,
            d: self.d,
            bits: self.cells.into_iter().map(|c| c.unwrap_or(false)).collect(),
        })
    }
}
