//! Smallest parameters for which a constraint's payload fits.

use crate::array::Shape;
use crate::codec::{ceil_log2, Constraint, ConstraintConfig, ConstraintKind};
use crate::error::{Error, Result};

/// Largest side tried by the searches; sides beyond `n` never fit anyway.
const SIDE_LIMIT: usize = 1 << 16;

/// Smallest `l <= n` such that the cube `l^d` passes the feasibility check,
/// or `None` if no cube inside `n^d` does.
///
/// `distance` is only read for HDRF. VZRCF has no shape; use
/// [`min_feasible_volume`] for it.
pub fn min_square_side(kind: ConstraintKind, n: usize, d: usize, distance: usize) -> Result<Option<usize>> {
    for side in 1..=n.min(SIDE_LIMIT) {
        let shape = Shape::cube(side, d)?;
        let constraint = match kind {
            ConstraintKind::Zrcf => Constraint::Zrcf { shape },
            ConstraintKind::Rf => Constraint::Rf { shape },
            ConstraintKind::Hdrf => Constraint::Hdrf { shape, distance },
            ConstraintKind::Vzrcf => {
                return Err(Error::Parameter("VZRCF has no shape; ask for the minimal volume".into()))
            }
        };
        if ConstraintConfig::new(n, d, constraint)?.is_feasible() {
            return Ok(Some(side));
        }
    }
    Ok(None)
}

/// Smallest volume threshold `V` for which VZRCF on `n^d` is feasible.
pub fn min_feasible_volume(n: usize, d: usize) -> Result<Option<usize>> {
    let probe = ConstraintConfig::new(n, d, Constraint::Vzrcf { volume: 1 })?;
    let top = u32::try_from(d)
        .ok()
        .and_then(|d| n.checked_pow(d))
        .unwrap_or(usize::MAX)
        .min(SIDE_LIMIT);
    let w = probe.position_width() as usize;
    // ceil(log2 |S|) >= 0, so V <= w leaves no room
    for volume in (w + 1).min(top + 1)..=top {
        if ConstraintConfig::vzrcf(n, d, volume)?.is_feasible() {
            return Ok(Some(volume));
        }
    }
    Ok(None)
}

/// Smallest integer `r` with `r^d >= x`.
pub fn ceil_root(x: u128, d: u32) -> u128 {
    if d == 0 || x <= 1 {
        return x.min(1);
    }
    let mut r = (x as f64).powf(1.0 / d as f64).round() as u128;
    while r > 0 && pow_at_least(r - 1, d, x) {
        r -= 1;
    }
    while !pow_at_least(r, d, x) {
        r += 1;
    }
    r
}

fn pow_at_least(r: u128, d: u32, x: u128) -> bool {
    r.checked_pow(d).map_or(true, |p| p >= x)
}

/// Closed-form square sides: `ceil((ceil(d log2 n) + 1)^(1/d))` for ZRCF,
/// `ceil((2 ceil(d log2 n) + 1)^(1/d))` for RF, and for HDRF the least `l`
/// with `2 ceil(d log2 n) + (p - 1) ceil(log2(l^d + 1)) + 1 <= l^d`.
///
/// Returns `None` when the side would exceed `n`.
pub fn closed_form_side(kind: ConstraintKind, n: usize, d: usize, distance: usize) -> Option<usize> {
    let w = ceil_log2((n as u128).checked_pow(d as u32)?) as u128;
    let side = match kind {
        ConstraintKind::Zrcf => ceil_root(w + 1, d as u32),
        ConstraintKind::Rf => ceil_root(2 * w + 1, d as u32),
        ConstraintKind::Hdrf => (1..=n as u128).find(|&l| {
            let vol = l.pow(d as u32);
            2 * w + (distance as u128 - 1) * (ceil_log2(vol + 1) as u128) < vol
        })?,
        ConstraintKind::Vzrcf => return None,
    };
    (side <= n as u128).then_some(side as usize)
}
