//! Naive validators and audit harnesses for checking the codecs.
//!
//! Nothing here reuses the scanning code in [`crate::constraints`]: validity
//! is evaluated straight from the constraint definitions over every position,
//! every shape and every pair.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{subarray_cells, BitArray, PartialArray, Position, Region, Shape};
use crate::codec::{
    decode_with, encode_with, AlmostArray, Constraint, ConstraintCodec, ConstraintConfig, DecodeOptions,
    EncodeOptions, PayloadLayout,
};
use crate::constraints::{reconstruct_repeat, Violation};
use crate::error::{Error, Result};

/// Largest bit count enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Definition-direct membership test.
pub fn brute_valid(a: &BitArray, cfg: &ConstraintConfig) -> bool {
    let n = a.n();
    let d = a.d();
    match cfg.constraint() {
        Constraint::Zrcf { shape } => !has_zero_window(a, shape),
        Constraint::Vzrcf { volume } => all_shapes(n, d)
            .into_iter()
            .filter(|s| s.volume() >= *volume)
            .all(|s| !has_zero_window(a, &s)),
        Constraint::Rf { shape } => min_pair_distance(a, shape).map_or(true, |dist| dist >= 1),
        Constraint::Hdrf { shape, distance } => min_pair_distance(a, shape).map_or(true, |dist| dist >= *distance),
    }
}

/// Every in-bounds start of `shape`, in no particular order.
fn starts(n: usize, d: usize, shape: &Shape) -> Vec<Position> {
    let total = n.pow(d as u32);
    (0..total)
        .map(|i| Position::devectorize(i, n, d).expect("index below n^d"))
        .filter(|p| p.coords().iter().zip(shape.extents()).all(|(&c, &l)| c + l <= n))
        .collect()
}

fn contents(a: &BitArray, at: &Position, shape: &Shape) -> Vec<bool> {
    subarray_cells(at, shape, a.n())
        .expect("start is in bounds")
        .into_iter()
        .map(|i| a.get(i))
        .collect()
}

fn has_zero_window(a: &BitArray, shape: &Shape) -> bool {
    starts(a.n(), a.d(), shape)
        .iter()
        .any(|p| contents(a, p, shape).iter().all(|&b| !b))
}

fn all_shapes(n: usize, d: usize) -> Vec<Shape> {
    (0..n.pow(d as u32))
        .map(|code| {
            let ext: Vec<usize> = (0..d).map(|j| code / n.pow(j as u32) % n + 1).collect();
            Shape::new(ext).expect("extents are positive")
        })
        .collect()
}

/// Smallest Hamming distance over all pairs of distinct starts.
fn min_pair_distance(a: &BitArray, shape: &Shape) -> Option<usize> {
    let windows: Vec<Vec<bool>> = starts(a.n(), a.d(), shape)
        .iter()
        .map(|p| contents(a, p, shape))
        .collect();
    let mut best = None;
    for x in 0..windows.len() {
        for y in x + 1..windows.len() {
            let dist = windows[x].iter().zip(&windows[y]).filter(|(u, v)| u != v).count();
            best = Some(best.map_or(dist, |b: usize| b.min(dist)));
        }
    }
    best
}

/// Which inputs an audit runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Population {
    /// Every bit vector of the audited length.
    Exhaustive,
    /// `count` uniform vectors from a seeded generator.
    Sampled { count: u64, seed: u64 },
    /// Explicit inputs.
    Listed(Vec<Vec<bool>>),
}

impl Population {
    fn describe(&self) -> String {
        match self {
            Population::Exhaustive => "exhaustive".into(),
            Population::Sampled { count, seed } => format!("{count} samples, seed {seed}"),
            Population::Listed(v) => format!("{} listed inputs", v.len()),
        }
    }

    fn for_each(&self, bits: usize, mut f: impl FnMut(Vec<bool>)) -> Result<()> {
        match self {
            Population::Exhaustive => {
                if bits > EXHAUSTIVE_LIMIT {
                    return Err(Error::Parameter(format!(
                        "{bits}-bit inputs are too many to enumerate (limit {EXHAUSTIVE_LIMIT})"
                    )));
                }
                for word in 0u64..1 << bits {
                    f((0..bits).map(|i| word >> (bits - 1 - i) & 1 == 1).collect());
                }
            }
            Population::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*count {
                    f((0..bits).map(|_| rng.gen()).collect());
                }
            }
            Population::Listed(inputs) => {
                for v in inputs {
                    if v.len() != bits {
                        return Err(Error::Parameter(format!("listed input has {} bits, expected {bits}", v.len())));
                    }
                    f(v.clone());
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFailure {
    pub input: String,
    pub expected: String,
    pub actual: String,
}

/// Outcome of one audit. It passed iff `failures` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub name: String,
    pub config: String,
    pub population: String,
    /// Inputs examined.
    pub checked: u64,
    /// Inputs the audit applied to (messages encoded, or invalid arrays mapped).
    pub exercised: u64,
    pub failures: Vec<AuditFailure>,
    /// ξ applications per encoding.
    pub histogram: BTreeMap<u64, u64>,
}

impl AuditReport {
    fn new(name: &str, config: String, population: &Population) -> Self {
        AuditReport {
            name: name.into(),
            config,
            population: population.describe(),
            checked: 0,
            exercised: 0,
            failures: Vec::new(),
            histogram: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, input: impl fmt::Display, expected: impl Into<String>, actual: impl Into<String>) {
        self.failures.push(AuditFailure {
            input: input.to_string(),
            expected: expected.into(),
            actual: actual.into(),
        });
    }

    /// Folds another shard of the same audit into this one.
    pub fn merge(&mut self, other: AuditReport) {
        self.checked += other.checked;
        self.exercised += other.exercised;
        self.failures.extend(other.failures);
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
    }

    pub fn mean_iterations(&self) -> f64 {
        let total: u64 = self.histogram.values().sum();
        if total == 0 {
            return 0.0;
        }
        self.histogram.iter().map(|(k, v)| (k * v) as f64).sum::<f64>() / total as f64
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} [{}] ({}): checked {}, exercised {}, failures {}",
            self.name,
            self.config,
            self.population,
            self.checked,
            self.exercised,
            self.failures.len()
        )?;
        if !self.histogram.is_empty() {
            let hist: Vec<String> = self.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            writeln!(f, "iterations {} (mean {:.4})", hist.join(" "), self.mean_iterations())?;
        }
        for (k, fail) in self.failures.iter().take(10).enumerate() {
            writeln!(
                f,
                "failure {}: input {} expected {} actual {}",
                k + 1,
                fail.input,
                fail.expected,
                fail.actual
            )?;
        }
        if self.failures.len() > 10 {
            writeln!(f, "... {} more failures", self.failures.len() - 10)?;
        }
        Ok(())
    }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Encodes every message of the population, then checks the decoder returns
/// it, the output satisfies [`brute_valid`] and no encoder trajectory
/// revisits a state. No iteration cap is applied.
pub fn roundtrip_audit<C: ConstraintCodec + ?Sized>(codec: &C, population: &Population) -> Result<AuditReport> {
    let cfg = codec.config().clone();
    let k = cfg.cells()? - 1;
    let mut report = AuditReport::new("roundtrip", cfg.to_string(), population);
    population.for_each(k, |msg| {
        report.checked += 1;
        report.exercised += 1;
        let mut visited = HashSet::new();
        let mut revisit = false;
        let encoded = encode_with(codec, &msg, EncodeOptions::default(), |a| {
            revisit |= !visited.insert(a.bits().to_vec());
        });
        let input = bit_string(&msg);
        let enc = match encoded {
            Ok(e) => e,
            Err(e) => return report.fail(input, "an encoding", format!("error: {e}")),
        };
        *report.histogram.entry(enc.iterations).or_default() += 1;
        if revisit {
            report.fail(&input, "no revisited state", "trajectory revisits a state");
        }
        if !brute_valid(&enc.array, &cfg) {
            report.fail(&input, "a valid array", format!("invalid {}", enc.array));
        }
        match decode_with(codec, &enc.array, DecodeOptions::default()) {
            Ok(d) if d.message == msg => {}
            Ok(d) => report.fail(&input, input.clone(), bit_string(&d.message)),
            Err(e) => report.fail(&input, input.clone(), format!("error: {e}")),
        }
    })?;
    Ok(report)
}

/// All `2^k` messages when `n^d - 1` is within [`EXHAUSTIVE_LIMIT`], else `samples` seeded ones.
pub fn exhaustive_roundtrip<C: ConstraintCodec + ?Sized>(codec: &C, samples: u64, seed: u64) -> Result<AuditReport> {
    let k = codec.config().cells()? - 1;
    let population = if k <= 16 {
        Population::Exhaustive
    } else {
        Population::Sampled { count: samples, seed }
    };
    roundtrip_audit(codec, &population)
}

/// Applies ξ to every invalid array of the population and checks that the
/// images are pairwise distinct and that ξ⁻¹ restores each input.
///
/// Arrays are classified with [`brute_valid`]; a codec whose own indicator
/// disagrees is reported as a failure.
pub fn injectivity_audit<C: ConstraintCodec + ?Sized>(codec: &C, population: &Population) -> Result<AuditReport> {
    let cfg = codec.config().clone();
    let cells = cfg.cells()?;
    let mut report = AuditReport::new("injectivity", cfg.to_string(), population);
    let mut images: HashMap<AlmostArray, Vec<bool>> = HashMap::new();
    population.for_each(cells, |bits| {
        report.checked += 1;
        let a = BitArray::from_bits(cfg.n(), cfg.d(), bits).expect("population length is n^d");
        let valid = brute_valid(&a, &cfg);
        if valid != codec.is_valid(&a) {
            report.fail(&a, format!("valid={valid}"), format!("indicator says valid={}", !valid));
            return;
        }
        if valid {
            return;
        }
        report.exercised += 1;
        let img = match codec.xi(&a) {
            Ok(img) => img,
            Err(e) => return report.fail(&a, "an image", format!("error: {e}")),
        };
        match codec.xi_inverse(&img) {
            Ok(back) if back == a => {}
            Ok(back) => report.fail(&a, a.to_string(), format!("inverse gave {back}")),
            Err(e) => report.fail(&a, a.to_string(), format!("inverse error: {e}")),
        }
        if let Some(prev) = images.get(&img) {
            if prev != a.bits() {
                let img_bits = bit_string(img.bits());
                report.fail(&a, "a fresh image", format!("image {img_bits} shared with {}", bit_string(prev)));
            }
        } else {
            images.insert(img, a.into_bits());
        }
    })?;
    Ok(report)
}

/// Wraps a codec and replaces its ξ with one that skips the zero padding:
/// the payload goes straight after the survivors and the remaining slots
/// keep whatever the input held there.
#[derive(Clone, Debug)]
pub struct PadDropMutant<C>(pub C);

impl<C: ConstraintCodec> ConstraintCodec for PadDropMutant<C> {
    fn config(&self) -> &ConstraintConfig {
        self.0.config()
    }

    fn layout(&self) -> &PayloadLayout {
        self.0.layout()
    }

    fn find_violation(&self, a: &BitArray) -> Option<Violation> {
        self.0.find_violation(a)
    }

    fn deleted_region(&self, violation: &Violation) -> Result<Region> {
        self.0.deleted_region(violation)
    }

    fn xi_at(&self, a: &BitArray, violation: &Violation) -> Result<AlmostArray> {
        let honest = self.0.xi_at(a, violation)?;
        let region = self.0.deleted_region(violation)?;
        let keep = a.len() - region.volume();
        let width = self.0.layout().total_width();
        let mut bits = a.bits()[..a.len() - 1].to_vec();
        bits[..keep].copy_from_slice(&honest.bits()[..keep]);
        let payload = &honest.bits()[honest.bits().len() - width..];
        bits[keep..keep + width].copy_from_slice(payload);
        AlmostArray::from_bits(a.n(), a.d(), bits)
    }

    fn xi_inverse(&self, a: &AlmostArray) -> Result<BitArray> {
        self.0.xi_inverse(a)
    }
}

/// A violation to plant into a random array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plant {
    ZeroCuboid { at: Position, shape: Shape },
    /// `A[second + o] = A[first + o]` for every offset of `shape`.
    Repeat { first: Position, second: Position, shape: Shape },
    /// Like `Repeat`, but the copy differs at the listed cell offsets.
    NearRepeat {
        first: Position,
        second: Position,
        shape: Shape,
        flips: Vec<usize>,
    },
}

/// A uniformly random `n^d` array conditioned on containing `plant`.
///
/// For overlapping pairs the copy is filled cell by cell in the direction
/// that makes every source final before it is read, so a planted period
/// propagates through the overlap.
pub fn plant_instance(n: usize, d: usize, plant: &Plant, seed: u64) -> Result<BitArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = crate::array::cell_count(n, d)?;
    let mut a = BitArray::from_bits(n, d, (0..cells).map(|_| rng.gen()).collect())?;
    let in_bounds = |p: &Position, s: &Shape| -> Result<Vec<usize>> {
        if p.dim() != d || s.dim() != d {
            return Err(Error::Parameter(format!("plant at {p} with shape {s} is not {d}-dimensional")));
        }
        subarray_cells(p, s, n).map_err(|e| Error::Parameter(format!("plant out of bounds: {e}")))
    };
    match plant {
        Plant::ZeroCuboid { at, shape } => {
            for i in in_bounds(at, shape)? {
                a.set(i, false);
            }
        }
        Plant::Repeat { first, second, shape } => copy_window(&mut a, first, second, shape, &[], &in_bounds)?,
        Plant::NearRepeat {
            first,
            second,
            shape,
            flips,
        } => copy_window(&mut a, first, second, shape, flips, &in_bounds)?,
    }
    Ok(a)
}

fn copy_window(
    a: &mut BitArray,
    first: &Position,
    second: &Position,
    shape: &Shape,
    flips: &[usize],
    in_bounds: &dyn Fn(&Position, &Shape) -> Result<Vec<usize>>,
) -> Result<()> {
    let src = in_bounds(first, shape)?;
    let dst = in_bounds(second, shape)?;
    if first == second {
        return Err(Error::Parameter("a planted pair needs two distinct positions".into()));
    }
    let mut mask = vec![false; src.len()];
    for &o in flips {
        if o >= src.len() {
            return Err(Error::Parameter(format!("flip offset {o} outside a window of {}", src.len())));
        }
        mask[o] = true;
    }
    let order: Vec<usize> = if dst[0] > src[0] {
        (0..src.len()).collect()
    } else {
        (0..src.len()).rev().collect()
    };
    for k in order {
        let v = a.get(src[k]) ^ mask[k];
        a.set(dst[k], v);
    }
    Ok(())
}

/// Plants `count` overlapping pairs at random geometries with `n <= 8` and
/// `d` in {2, 3}, deletes the second window and checks that
/// [`reconstruct_repeat`] restores the array. A third of the instances use a
/// nonzero mask, and pairs differing only in the first coordinate are
/// forced for every tenth instance.
pub fn reconstruction_audit(count: u64, seed: u64) -> Result<AuditReport> {
    let population = Population::Sampled { count, seed };
    let mut report = AuditReport::new("reconstruction", "n<=8, d in {2,3}".into(), &population);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut made = 0u64;
    while made < count {
        let d = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=8);
        let ext: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=n)).collect();
        let shape = Shape::new(ext.clone())?;
        let pick = |rng: &mut ChaCha8Rng| -> Position {
            Position::new(ext.iter().map(|&l| rng.gen_range(0..=n - l)).collect::<Vec<_>>())
        };
        let a0 = pick(&mut rng);
        let b0 = if made % 10 == 0 {
            let mut c = a0.coords().to_vec();
            c[0] = rng.gen_range(0..=n - ext[0]);
            Position::new(c)
        } else {
            pick(&mut rng)
        };
        // either window may be the deleted one
        let (first, second) = if rng.gen_bool(0.5) { (a0, b0) } else { (b0, a0) };
        let overlaps = first
            .coords()
            .iter()
            .zip(second.coords())
            .zip(&ext)
            .all(|((&x, &y), &l)| x.abs_diff(y) < l);
        if first == second || !overlaps {
            continue;
        }
        made += 1;
        report.checked += 1;
        report.exercised += 1;
        let flips: Vec<usize> = if made % 3 == 0 {
            (0..shape.volume()).filter(|_| rng.gen_bool(0.2)).collect()
        } else {
            Vec::new()
        };
        let plant = Plant::NearRepeat {
            first: first.clone(),
            second: second.clone(),
            shape: shape.clone(),
            flips: flips.clone(),
        };
        let a = plant_instance(n, d, &plant, rng.gen())?;
        let mut mask = vec![false; shape.volume()];
        for &o in &flips {
            mask[o] = true;
        }
        let label = format!("n={n} {first}->{second} shape {shape} flips {flips:?}");
        let partial: PartialArray = a.delete_subarray(&second, &shape)?.reinsert_holes()?;
        match reconstruct_repeat(partial, &first, &second, &shape, &mask) {
            Ok(r) if r == a => {}
            Ok(r) => report.fail(label, a.to_string(), r.to_string()),
            Err(e) => report.fail(label, a.to_string(), format!("error: {e}")),
        }
    }
    Ok(report)
}
