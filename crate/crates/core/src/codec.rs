//! The generic single-redundancy-bit encoder and decoder.
//!
//! A constraint plugs in through [`ConstraintCodec`]: an indicator that finds
//! the first violation, an injective map ξ from invalid arrays to arrays with
//! the last slot empty, and its inverse. The encoder embeds an `n^d - 1` bit
//! message, appends a 0 and applies ξ (appending a 1 each time) until the
//! array satisfies the constraint. The decoder undoes ξ while the last slot
//! holds a 1.

use std::collections::HashSet;
use std::fmt;

use crate::array::{cell_count, BitArray, CompactedArray, Region, Shape};
use crate::constraints::{minimal_shape_set, Violation};
use crate::error::{Error, Result};

/// Which parametric constraint a configuration selects, with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// No all-zero sub-array of the given shape.
    Zrcf { shape: Shape },
    /// No all-zero sub-array of volume at least `volume`.
    Vzrcf { volume: usize },
    /// No two distinct positions carry identical sub-arrays of the given shape.
    Rf { shape: Shape },
    /// Every two distinct sub-arrays of the given shape differ in at least `distance` cells.
    Hdrf { shape: Shape, distance: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ConstraintKind {
    Zrcf = 1,
    Vzrcf = 2,
    Rf = 3,
    Hdrf = 4,
}

impl ConstraintKind {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(ConstraintKind::Zrcf),
            2 => Some(ConstraintKind::Vzrcf),
            3 => Some(ConstraintKind::Rf),
            4 => Some(ConstraintKind::Hdrf),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Zrcf => "zrcf",
            ConstraintKind::Vzrcf => "vzrcf",
            ConstraintKind::Rf => "rf",
            ConstraintKind::Hdrf => "hdrf",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "zrcf" => Ok(ConstraintKind::Zrcf),
            "vzrcf" => Ok(ConstraintKind::Vzrcf),
            "rf" => Ok(ConstraintKind::Rf),
            "hdrf" => Ok(ConstraintKind::Hdrf),
            _ => Err(Error::Parameter(format!("unknown constraint {s:?}"))),
        }
    }
}

/// A constraint together with the array geometry `n^d`.
///
/// Construction checks structure only; [`check_feasibility`](Self::check_feasibility)
/// decides whether the payload fits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstraintConfig {
    n: usize,
    d: usize,
    constraint: Constraint,
}

impl ConstraintConfig {
    pub fn new(n: usize, d: usize, constraint: Constraint) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
        }
        if d < 1 {
            return Err(Error::Parameter("d must be at least 1".into()));
        }
        let cells = wide_cells(n, d)?;
        match &constraint {
            Constraint::Zrcf { shape } | Constraint::Rf { shape } | Constraint::Hdrf { shape, .. } => {
                if shape.dim() != d {
                    return Err(Error::Parameter(format!("shape {shape} is not {d}-dimensional")));
                }
                if !shape.fits(n) {
                    return Err(Error::Parameter(format!("shape {shape} has an extent above n={n}")));
                }
            }
            Constraint::Vzrcf { volume } => {
                if *volume < 1 || *volume as u128 > cells {
                    return Err(Error::Parameter(format!(
                        "volume threshold {volume} must lie in [1, n^d={cells}]"
                    )));
                }
            }
        }
        if let Constraint::Hdrf { distance, .. } = constraint {
            if distance < 1 {
                return Err(Error::Parameter("Hamming distance p must be at least 1".into()));
            }
        }
        Ok(ConstraintConfig { n, d, constraint })
    }

    pub fn zrcf(n: usize, shape: &[usize]) -> Result<Self> {
        let shape = Shape::new(shape.to_vec())?;
        ConstraintConfig::new(n, shape.dim(), Constraint::Zrcf { shape })
    }

    pub fn vzrcf(n: usize, d: usize, volume: usize) -> Result<Self> {
        ConstraintConfig::new(n, d, Constraint::Vzrcf { volume })
    }

    pub fn rf(n: usize, shape: &[usize]) -> Result<Self> {
        let shape = Shape::new(shape.to_vec())?;
        ConstraintConfig::new(n, shape.dim(), Constraint::Rf { shape })
    }

    pub fn hdrf(n: usize, shape: &[usize], distance: usize) -> Result<Self> {
        let shape = Shape::new(shape.to_vec())?;
        ConstraintConfig::new(n, shape.dim(), Constraint::Hdrf { shape, distance })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn kind(&self) -> ConstraintKind {
        match self.constraint {
            Constraint::Zrcf { .. } => ConstraintKind::Zrcf,
            Constraint::Vzrcf { .. } => ConstraintKind::Vzrcf,
            Constraint::Rf { .. } => ConstraintKind::Rf,
            Constraint::Hdrf { .. } => ConstraintKind::Hdrf,
        }
    }

    /// The fixed sub-array shape, absent for VZRCF.
    pub fn shape(&self) -> Option<&Shape> {
        match &self.constraint {
            Constraint::Zrcf { shape } | Constraint::Rf { shape } | Constraint::Hdrf { shape, .. } => Some(shape),
            Constraint::Vzrcf { .. } => None,
        }
    }

    /// Number of cells `n^d`; arrays of this config must be materializable.
    pub fn cells(&self) -> Result<usize> {
        cell_count(self.n, self.d)
    }

    /// `ceil(d * log2 n)`: bits for one position, written as its vectorized index.
    pub fn position_width(&self) -> u32 {
        // construction guarantees n^d fits in u128
        ceil_log2(wide_cells(self.n, self.d).unwrap_or(u128::MAX))
    }

    /// `ceil(log2(volume + 1))`: bits for one difference offset (HDRF only).
    pub fn diff_width(&self) -> Option<u32> {
        match &self.constraint {
            Constraint::Hdrf { shape, .. } => Some(ceil_log2(wide_volume(shape) + 1)),
            _ => None,
        }
    }

    /// Total payload width `L` written into the freed slots.
    pub fn payload_bits(&self) -> Result<u128> {
        let pos = self.position_width() as u128;
        Ok(match &self.constraint {
            Constraint::Zrcf { .. } => pos,
            Constraint::Rf { .. } => 2 * pos,
            Constraint::Hdrf { shape, distance } => {
                2 * pos + (*distance as u128 - 1) * ceil_log2(wide_volume(shape) + 1) as u128
            }
            Constraint::Vzrcf { volume } => {
                let set = minimal_shape_set(*volume, self.n, self.d)?;
                ceil_log2(set.len() as u128) as u128 + pos
            }
        })
    }

    /// Smallest number of slots any ξ application frees.
    pub fn min_deleted_volume(&self) -> Result<u128> {
        Ok(match &self.constraint {
            Constraint::Zrcf { shape } | Constraint::Rf { shape } | Constraint::Hdrf { shape, .. } => {
                wide_volume(shape)
            }
            Constraint::Vzrcf { volume } => minimal_shape_set(*volume, self.n, self.d)?
                .shapes()
                .iter()
                .map(wide_volume)
                .min()
                .unwrap_or(0),
        })
    }

    /// Whether `L + 1 <= freed slots`.
    pub fn is_feasible(&self) -> bool {
        match (self.payload_bits(), self.min_deleted_volume()) {
            (Ok(payload), Ok(room)) => payload < room,
            _ => false,
        }
    }

    /// Checks `L + 1 <= freed slots`, naming the violated inequality on failure.
    pub fn check_feasibility(&self) -> Result<()> {
        let payload = self.payload_bits()?;
        let room = self.min_deleted_volume()?;
        if payload < room {
            return Ok(());
        }
        let w = self.position_width();
        let lhs = match &self.constraint {
            Constraint::Zrcf { .. } => format!("ceil(d*log2 n) + 1 = {w} + 1"),
            Constraint::Rf { .. } => format!("2*ceil(d*log2 n) + 1 = 2*{w} + 1"),
            Constraint::Hdrf { distance, .. } => format!(
                "2*ceil(d*log2 n) + (p-1)*ceil(log2(vol+1)) + 1 = 2*{w} + {}*{} + 1",
                distance - 1,
                self.diff_width().unwrap_or(0)
            ),
            Constraint::Vzrcf { .. } => format!(
                "ceil(log2 |S|) + ceil(d*log2 n) + 1 = {} + {w} + 1",
                payload - w as u128
            ),
        };
        let rhs = match self.constraint {
            Constraint::Vzrcf { .. } => "smallest minimal-shape volume",
            _ => "sub-array volume",
        };
        Err(Error::Infeasible(format!(
            "{} violates {lhs} = {} <= {rhs} = {room}",
            self,
            payload + 1
        )))
    }
}

impl fmt::Display for ConstraintConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} d={}", self.kind(), self.n, self.d)?;
        match &self.constraint {
            Constraint::Zrcf { shape } | Constraint::Rf { shape } => write!(f, " shape={shape}"),
            Constraint::Hdrf { shape, distance } => write!(f, " shape={shape} p={distance}"),
            Constraint::Vzrcf { volume } => write!(f, " V={volume}"),
        }
    }
}

pub fn check_feasibility(cfg: &ConstraintConfig) -> Result<()> {
    cfg.check_feasibility()
}

fn wide_cells(n: usize, d: usize) -> Result<u128> {
    u32::try_from(d)
        .ok()
        .and_then(|d| (n as u128).checked_pow(d))
        .ok_or_else(|| Error::Parameter(format!("n^d = {n}^{d} is too large")))
}

fn wide_volume(shape: &Shape) -> u128 {
    shape
        .extents()
        .iter()
        .fold(1u128, |acc, &l| acc.saturating_mul(l as u128))
}

/// Smallest `w` with `2^w >= x`; 0 for `x <= 1`.
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// One fixed-width payload field holding a value below `limit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub width: u32,
    pub limit: u64,
}

impl FieldSpec {
    /// A field for values in `[0, limit)`, `ceil(log2 limit)` bits wide.
    pub fn bounded(limit: u64) -> Self {
        FieldSpec {
            width: ceil_log2(limit as u128),
            limit,
        }
    }
}

/// Ordered field widths of a constraint's payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayloadLayout {
    fields: Vec<FieldSpec>,
}

impl PayloadLayout {
    pub fn new(fields: Vec<FieldSpec>) -> Self {
        PayloadLayout { fields }
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn total_width(&self) -> usize {
        self.fields.iter().map(|f| f.width as usize).sum()
    }
}

/// Field values in layout order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayloadFields(pub Vec<u64>);

/// Fixed-width, most-significant-bit-first binary representation.
pub fn encode_field(value: u64, width: u32) -> Result<Vec<bool>> {
    if width < 64 && value >> width != 0 {
        return Err(Error::Range { value, width });
    }
    Ok((0..width).rev().map(|k| k < 64 && value >> k & 1 == 1).collect())
}

pub fn decode_field(bits: &[bool]) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::Structure(format!("{}-bit field does not fit in u64", bits.len())));
    }
    Ok(bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64))
}

/// An `n^d` array whose reserved last slot is empty, carried as `n^d - 1` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlmostArray {
    n: usize,
    d: usize,
    bits: Vec<bool>,
}

impl AlmostArray {
    pub fn from_bits(n: usize, d: usize, bits: Vec<bool>) -> Result<Self> {
        let cells = cell_count(n, d)?;
        if bits.len() + 1 != cells {
            return Err(Error::Structure(format!(
                "almost-array of {cells} cells needs {} bits, got {}",
                cells - 1,
                bits.len()
            )));
        }
        Ok(AlmostArray { n, d, bits })
    }

    /// Drops the reserved slot of a full array.
    pub fn from_array(a: &BitArray) -> Self {
        let mut bits = a.bits().to_vec();
        bits.pop();
        AlmostArray {
            n: a.n(),
            d: a.d(),
            bits,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Fills the reserved slot.
    pub fn with_marker(self, marker: bool) -> BitArray {
        let mut bits = self.bits;
        bits.push(marker);
        BitArray::from_bits(self.n, self.d, bits).expect("length checked at construction")
    }

    /// Reinterprets the leading bits as the survivors of deleting `region`.
    ///
    /// Fails with a corrupt-stream error when the region leaves the array.
    pub fn compacted(&self, region: Region) -> Result<CompactedArray> {
        region
            .check_bounds(self.n)
            .map_err(|e| Error::Corrupt(format!("decoded {e}")))?;
        let keep = (self.bits.len() + 1)
            .checked_sub(region.volume())
            .ok_or_else(|| Error::Corrupt(format!("region {region} is larger than the array")))?;
        CompactedArray::from_parts(self.n, self.d, self.bits[..keep].to_vec(), region)
    }
}

/// Writes the payload right-justified so it ends just before the reserved slot.
///
/// Empty slots between the survivors and the payload are set to 0.
pub fn write_payload(c: &CompactedArray, layout: &PayloadLayout, fields: &PayloadFields) -> Result<AlmostArray> {
    if fields.0.len() != layout.fields().len() {
        return Err(Error::Structure(format!(
            "{} payload values for {} fields",
            fields.0.len(),
            layout.fields().len()
        )));
    }
    let width = layout.total_width();
    if width + 1 > c.gap() {
        return Err(Error::Infeasible(format!(
            "payload of {width} bits plus the marker does not fit a gap of {}",
            c.gap()
        )));
    }
    let mut bits = Vec::with_capacity(c.survivors().len() + c.gap() - 1);
    bits.extend_from_slice(c.survivors());
    bits.resize(bits.len() + c.gap() - 1 - width, false);
    for (spec, &value) in layout.fields().iter().zip(&fields.0) {
        if value >= spec.limit {
            return Err(Error::Range {
                value,
                width: spec.width,
            });
        }
        bits.extend(encode_field(value, spec.width)?);
    }
    AlmostArray::from_bits(c.n(), c.d(), bits)
}

/// Reads the payload back from the bits just before the reserved slot.
pub fn read_payload(a: &AlmostArray, layout: &PayloadLayout) -> Result<PayloadFields> {
    let width = layout.total_width();
    let start = a
        .bits()
        .len()
        .checked_sub(width)
        .ok_or_else(|| Error::Structure(format!("payload of {width} bits exceeds the array")))?;
    let mut cursor = start;
    let mut values = Vec::with_capacity(layout.fields().len());
    for spec in layout.fields() {
        let end = cursor + spec.width as usize;
        let value = decode_field(&a.bits()[cursor..end])?;
        if value >= spec.limit {
            return Err(Error::Corrupt(format!(
                "payload field at bit {cursor} holds {value}, limit {}",
                spec.limit
            )));
        }
        values.push(value);
        cursor = end;
    }
    Ok(PayloadFields(values))
}

/// Indicator plus injective map ξ and its inverse for one constraint.
pub trait ConstraintCodec {
    fn config(&self) -> &ConstraintConfig;

    fn layout(&self) -> &PayloadLayout;

    /// The first violation in canonical scan order, or `None` if `a` is valid.
    fn find_violation(&self, a: &BitArray) -> Option<Violation>;

    /// The sub-array ξ deletes for this violation.
    fn deleted_region(&self, violation: &Violation) -> Result<Region>;

    /// ξ applied to `a`, given the violation the indicator reported for it.
    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray>;

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray>;

    fn is_valid(&self, a: &BitArray) -> bool {
        self.find_violation(a).is_none()
    }

    fn xi(&self, a: &BitArray) -> Result<AlmostArray> {
        match self.find_violation(a) {
            Some(v) => self.xi_at(a, &v),
            None => Err(Error::Contract("ξ applied to an array that satisfies the constraint".into())),
        }
    }
}

impl<C: ConstraintCodec + ?Sized> ConstraintCodec for &C {
    fn config(&self) -> &ConstraintConfig {
        (**self).config()
    }
    fn layout(&self) -> &PayloadLayout {
        (**self).layout()
    }
    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        (**self).find_violation(a)
    }
    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        (**self).deleted_region(violation)
    }
    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        (**self).xi_at(a, violation)
    }
    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        (**self).xi_inverse(a)
    }
}

/// Deletes `region` from `a` and writes `fields` into the freed slots.
pub(crate) fn delete_and_write(
    a: &BitArray,
    region: &Region,
    layout: &PayloadLayout,
    fields: PayloadFields,
) -> Result<AlmostArray> {
    let c = a.delete_subarray(&region.start, &region.shape)?;
    write_payload(&c, layout, &fields)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub array: BitArray,
    /// Number of ξ applications.
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Diagnostic cap on ξ applications. Unreachable for a correct codec.
    pub max_iterations: Option<u64>,
}

pub fn encode<C: ConstraintCodec + ?Sized>(codec: &C, message: &[bool]) -> Result<Encoded> {
    encode_with(codec, message, EncodeOptions::default(), |_| {})
}

/// Encodes and calls `visit` on every array the loop passes through, the
/// initial embedding and the final output included.
pub fn encode_with<C, F>(codec: &C, message: &[bool], opts: EncodeOptions, mut visit: F) -> Result<Encoded>
where
    C: ConstraintCodec + ?Sized,
    F: FnMut(&BitArray),
{
    let cfg = codec.config();
    let cells = cfg.cells()?;
    if message.len() + 1 != cells {
        return Err(Error::Parameter(format!(
            "message has {} bits, {cfg} carries exactly {}",
            message.len(),
            cells - 1
        )));
    }
    let mut array = AlmostArray::from_bits(cfg.n(), cfg.d(), message.to_vec())?.with_marker(false);
    let mut iterations = 0u64;
    loop {
        visit(&array);
        let Some(violation) = codec.find_violation(&array) else {
            return Ok(Encoded { array, iterations });
        };
        if opts.max_iterations.is_some_and(|cap| iterations >= cap) {
            return Err(Error::CapExceeded(iterations));
        }
        array = codec.xi_at(&array, &violation)?.with_marker(true);
        iterations += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Reject input arrays that violate the constraint.
    pub require_valid: bool,
    pub max_iterations: Option<u64>,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            require_valid: true,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub message: Vec<bool>,
    pub iterations: u64,
}

pub fn decode<C: ConstraintCodec + ?Sized>(codec: &C, a: &BitArray) -> Result<Vec<bool>> {
    decode_with(codec, a, DecodeOptions::default()).map(|d| d.message)
}

/// Decodes, reporting how many ξ⁻¹ steps were taken.
///
/// Arrays that do not come from the encoder may send ξ⁻¹ around a cycle; a
/// revisited state is reported as a corrupt stream.
pub fn decode_with<C: ConstraintCodec + ?Sized>(codec: &C, a: &BitArray, opts: DecodeOptions) -> Result<Decoded> {
    let cfg = codec.config();
    if a.n() != cfg.n() || a.d() != cfg.d() {
        return Err(Error::Parameter(format!(
            "array {}^{} does not match {cfg}",
            a.n(),
            a.d()
        )));
    }
    if opts.require_valid && !codec.is_valid(a) {
        return Err(Error::Corrupt("input array violates the constraint".into()));
    }
    let mut current = a.clone();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut iterations = 0u64;
    while current.get(current.last_index()) {
        if opts.max_iterations.is_some_and(|cap| iterations >= cap) {
            return Err(Error::CapExceeded(iterations));
        }
        let almost = AlmostArray::from_array(&current);
        if !seen.insert(almost.bits().to_vec()) {
            return Err(Error::Corrupt(format!("decoder revisited a state after {iterations} steps")));
        }
        current = codec.xi_inverse(&almost)?;
        iterations += 1;
    }
    let mut message = current.into_bits();
    message.pop();
    Ok(Decoded { message, iterations })
}
