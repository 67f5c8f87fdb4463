use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Coord, Raster};
use crate::scalar::Scalar;

/// Square patch of side `2 * radius + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec {
    radius: usize,
}

impl PatchSpec {
    pub fn new(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Config("patch radius must be at least 1".into()));
        }
        Ok(Self { radius })
    }

    #[inline]
    pub fn radius(self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(self) -> usize {
        2 * self.radius + 1
    }

    pub fn area(self) -> usize {
        self.side() * self.side()
    }
}

/// Mean squared intensity difference between the patches centred at `a` (target) and
/// `b` (source), over offsets where both pixels are in bounds and the source pixel is
/// valid. Returns `+inf` when no offset contributes.
pub fn patch_distance<T: Scalar>(image: &Raster<T>, validity: &BinaryMask, a: Coord, b: Coord, spec: PatchSpec) -> T {
    let (w, h) = (image.width() as isize, image.height() as isize);
    let r = spec.radius() as isize;
    let (ax, ay, bx, by) = (a.x as isize, a.y as isize, b.x as isize, b.y as isize);

    // Offset range where both patches stay inside the grid.
    let dx_lo = (-r).max(-ax).max(-bx);
    let dx_hi = r.min(w - 1 - ax).min(w - 1 - bx);
    let dy_lo = (-r).max(-ay).max(-by);
    let dy_hi = r.min(h - 1 - ay).min(h - 1 - by);

    let px = image.pixels();
    let valid = validity.bits();
    let mut sum = T::zero();
    let mut count = 0usize;
    for dy in dy_lo..=dy_hi {
        let row_a = ((ay + dy) * w) as usize;
        let row_b = ((by + dy) * w) as usize;
        for dx in dx_lo..=dx_hi {
            let ib = row_b + (bx + dx) as usize;
            if !valid[ib] {
                continue;
            }
            let d = px[row_a + (ax + dx) as usize] - px[ib];
            sum = sum + d * d;
            count += 1;
        }
    }
    if count == 0 {
        T::infinity()
    } else {
        sum / T::of(count as f64)
    }
}
