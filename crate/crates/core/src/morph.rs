//! Euclidean morphology on binary masks.
//!
//! All operations are driven by an exact squared Euclidean distance transform
//! between pixel centers. Dilation uses the closed disk `d ≤ r`. Rings and
//! bands use `round(d) ≤ w`, i.e. `d² ≤ w(w + 1)` on the integer lattice, so a
//! ring of width 1 is exactly the 8-connected exterior boundary.

use crate::raster::BinaryMask;

/// Squared distance reported for pixels when the target set is empty.
pub const UNREACHABLE: u64 = u64::MAX;

/// For every pixel, the squared Euclidean distance to the nearest set pixel of `mask`
/// (0 on set pixels, [`UNREACHABLE`] everywhere if `mask` is empty).
pub fn squared_distance_to(mask: &BinaryMask) -> Vec<u64> {
    let (w, h) = (mask.width(), mask.height());
    if mask.none() {
        return vec![UNREACHABLE; w * h];
    }
    // Large enough to dominate any real squared distance, small enough to stay exact in f64.
    let inf = ((w + h) * (w + h)) as f64 * 4.0 + 1.0;

    let mut grid: Vec<f64> = mask.bits().iter().map(|&b| if b { 0.0 } else { inf }).collect();

    let mut f = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    let mut v = vec![0usize; w.max(h)];
    let mut z = vec![0.0; w.max(h) + 1];

    // Columns first, then rows.
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        lower_envelope(&f[..h], &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        lower_envelope(&f[..w], &mut out[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }

    grid.into_iter()
        .map(|d| if d >= inf { UNREACHABLE } else { d as u64 })
        .collect()
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn lower_envelope(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        // z[0] is -inf, so k never underflows.
        let s = loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * (qf - p));
            if s <= z[k] {
                k -= 1;
            } else {
                break s;
            }
        };
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dx = q as f64 - v[k] as f64;
        *dq = dx * dx + f[v[k]];
    }
}

#[inline]
fn within_rounded(sq: u64, width: u32) -> bool {
    let w = width as u64;
    sq != UNREACHABLE && sq <= w * (w + 1)
}

/// Disk dilation: a pixel is set iff some set pixel lies within Euclidean distance `radius`.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let r2 = radius as u64 * radius as u64;
    let dist = squared_distance_to(mask);
    BinaryMask::new(
        mask.width(),
        mask.height(),
        dist.into_iter().map(|d| d != UNREACHABLE && d <= r2).collect(),
    )
    .expect("same dimensions")
}

/// Pixels outside Ω whose rounded distance to Ω is at most `width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExteriorRing {
    pub mask: BinaryMask,
    /// Ω covers the whole grid, so no exterior exists.
    pub saturated: bool,
}

pub fn exterior_ring(omega: &BinaryMask, width: u32) -> ExteriorRing {
    assert!(width >= 1, "ring width must be at least 1");
    if omega.all() {
        return ExteriorRing {
            mask: BinaryMask::empty(omega.width(), omega.height()),
            saturated: true,
        };
    }
    let dist = squared_distance_to(omega);
    let bits = dist
        .into_iter()
        .zip(omega.bits())
        .map(|(d, &inside)| !inside && within_rounded(d, width))
        .collect();
    ExteriorRing {
        mask: BinaryMask::new(omega.width(), omega.height(), bits).expect("same dimensions"),
        saturated: false,
    }
}

/// Two-sided band around the boundary of Ω: exterior pixels within `width` of Ω and
/// interior pixels within `width` of the complement. Empty when Ω is empty or full.
pub fn band(omega: &BinaryMask, width: u32) -> BinaryMask {
    assert!(width >= 1, "band width must be at least 1");
    let (w, h) = (omega.width(), omega.height());
    if omega.none() || omega.all() {
        return BinaryMask::empty(w, h);
    }
    let to_inside = squared_distance_to(omega);
    let to_outside = squared_distance_to(&omega.complement());
    let bits = omega
        .bits()
        .iter()
        .enumerate()
        .map(|(i, &inside)| {
            if inside {
                within_rounded(to_outside[i], width)
            } else {
                within_rounded(to_inside[i], width)
            }
        })
        .collect();
    BinaryMask::new(w, h, bits).expect("same dimensions")
}
