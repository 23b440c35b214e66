//! Spiral enumeration σ of the upper half-lattice
//! Z²_U = {k₁ > 0, k₂ ≥ 0} ∪ {k₁ ≤ 0, k₂ > 0}.
//!
//! Ring R = |k₁| ∨ k₂ holds 4R points and is walked from (R, 0) up the right edge,
//! leftwards along the top edge and down the left edge to (-R, 1).

use crate::error::{Error, Result};

pub fn in_upper_half_lattice(k: (i64, i64)) -> bool {
    let (k1, k2) = k;
    (k1 > 0 && k2 >= 0) || (k1 <= 0 && k2 > 0)
}

/// σ(k) = 2(R-1)R + M(k).
pub fn spiral_order(k: (i64, i64)) -> Result<usize> {
    if !in_upper_half_lattice(k) {
        return Err(Error::Domain(format!("{k:?} is not in the upper half-lattice")));
    }
    let (i, j) = k;
    let ring = i.abs().max(j);
    let offset = if i == ring && j < ring {
        j + 1
    } else if j == ring && i > -ring {
        2 * ring - i + 1
    } else {
        4 * ring - j + 1
    };
    Ok((2 * (ring - 1) * ring + offset) as usize)
}

/// Inverse of [`spiral_order`]; `idx` is 1-based.
///
/// # Panics
/// If `idx == 0`.
pub fn spiral_order_inverse(idx: usize) -> (i64, i64) {
    assert!(idx >= 1, "spiral index is 1-based");
    let idx = idx as i64;
    // smallest R with 2R(R+1) ≥ idx
    let mut ring = (((1.0 + 2.0 * idx as f64).sqrt() - 1.0) / 2.0).floor() as i64;
    while 2 * ring * (ring + 1) < idx {
        ring += 1;
    }
    while ring > 1 && 2 * (ring - 1) * ring >= idx {
        ring -= 1;
    }
    let offset = idx - 2 * (ring - 1) * ring;
    if offset <= ring {
        (ring, offset - 1)
    } else if offset <= 3 * ring {
        (2 * ring + 1 - offset, ring)
    } else {
        (-ring, 4 * ring + 1 - offset)
    }
}

/// All points of Z²_{U,N} = {k ∈ Z²_U : |k₁|, |k₂| ≤ N} in lattice order.
pub fn truncated_half_lattice(cutoff: usize) -> Vec<(i64, i64)> {
    let n = cutoff as i64;
    (-n..=n).flat_map(|k1| (0..=n).map(move |k2| (k1, k2))).filter(|&k| in_upper_half_lattice(k)).collect()
}
