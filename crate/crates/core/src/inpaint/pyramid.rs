use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;

/// One level of the coarse-to-fine schedule.
#[derive(Debug, Clone)]
pub struct PyramidLevel<T> {
    pub raster: Raster<T>,
    pub mask: BinaryMask,
    /// Power-of-two divisor relative to the full-resolution grid.
    pub scale: usize,
}

/// 2× reduction: each coarse pixel averages the (up to four) fine pixels it covers and is
/// masked if any of them is.
pub fn downsample<T: Scalar>(raster: &Raster<T>, mask: &BinaryMask) -> (Raster<T>, BinaryMask) {
    let (w, h) = (raster.width(), raster.height());
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut data = Vec::with_capacity(cw * ch);
    let mut bits = Vec::with_capacity(cw * ch);
    for cy in 0..ch {
        for cx in 0..cw {
            let mut sum = 0.0;
            let mut n = 0usize;
            let mut masked = false;
            for y in 2 * cy..(2 * cy + 2).min(h) {
                for x in 2 * cx..(2 * cx + 2).min(w) {
                    sum += raster.get(x, y).f64();
                    n += 1;
                    masked |= mask.get(x, y);
                }
            }
            data.push(T::of(sum / n as f64));
            bits.push(masked);
        }
    }
    (
        Raster::from_vec_unchecked(cw, ch, data),
        BinaryMask::new(cw, ch, bits).expect("dims"),
    )
}

/// Finest level first. Halving stops before the smaller side would drop below `min_dim`
/// or the known region would vanish.
pub fn build_pyramid<T: Scalar>(raster: &Raster<T>, mask: &BinaryMask, min_dim: usize) -> Vec<PyramidLevel<T>> {
    let mut levels = vec![PyramidLevel {
        raster: raster.clone(),
        mask: mask.clone(),
        scale: 1,
    }];
    loop {
        let last = levels.last().unwrap();
        let (w, h) = (last.raster.width(), last.raster.height());
        if w.min(h).div_ceil(2) < min_dim.max(1) || w.min(h) < 2 {
            break;
        }
        let (r, m) = downsample(&last.raster, &last.mask);
        if m.all() {
            break;
        }
        let scale = last.scale * 2;
        levels.push(PyramidLevel {
            raster: r,
            mask: m,
            scale,
        });
    }
    levels
}

/// Bilinear 2× upsampling of `coarse` onto a `width × height` grid (pixel-centre aligned,
/// clamped at borders).
pub fn upsample<T: Scalar>(coarse: &Raster<T>, width: usize, height: usize) -> Raster<T> {
    let (cw, ch) = (coarse.width(), coarse.height());
    let sx = cw as f64 / width as f64;
    let sy = ch as f64 / height as f64;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (ch - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(ch - 1);
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (cw - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(cw - 1);
            let tx = fx - x0 as f64;
            let top = coarse.get(x0, y0).f64() * (1.0 - tx) + coarse.get(x1, y0).f64() * tx;
            let bot = coarse.get(x0, y1).f64() * (1.0 - tx) + coarse.get(x1, y1).f64() * tx;
            data.push(T::of((top * (1.0 - ty) + bot * ty).max(0.0)));
        }
    }
    Raster::from_vec_unchecked(width, height, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_dims_follow_ceil_halving() {
        let img = Raster::filled(131, 70, 1.0f32);
        let mask = BinaryMask::rect(131, 70, 60, 30, 3, 3);
        let levels = build_pyramid(&img, &mask, 16);
        let dims: Vec<_> = levels
            .iter()
            .map(|l| (l.raster.width(), l.raster.height(), l.scale))
            .collect();
        assert_eq!(dims, vec![(131, 70, 1), (66, 35, 2), (33, 18, 4)]);
        for l in &levels {
            assert_eq!(l.raster.width(), 131usize.div_ceil(l.scale));
            assert_eq!(l.raster.height(), 70usize.div_ceil(l.scale));
        }
    }

    #[test]
    fn coarse_mask_is_any_covered() {
        let img = Raster::filled(8, 8, 1.0f64);
        let mut mask = BinaryMask::empty(8, 8);
        mask.set(3, 5, true);
        let (_, m) = downsample(&img, &mask);
        assert_eq!(m.count(), 1);
        assert!(m.get(1, 2));
        // Brute force over all levels: a coarse pixel is set iff a covered original pixel is.
        let mask = BinaryMask::from_fn(37, 29, |x, y| (x * 13 + y * 7) % 23 == 0);
        let img = Raster::filled(37, 29, 2.0f64);
        for l in build_pyramid(&img, &mask, 2) {
            for cy in 0..l.mask.height() {
                for cx in 0..l.mask.width() {
                    let any = (cy * l.scale..((cy + 1) * l.scale).min(29))
                        .any(|y| (cx * l.scale..((cx + 1) * l.scale).min(37)).any(|x| mask.get(x, y)));
                    assert_eq!(l.mask.get(cx, cy), any);
                }
            }
        }
    }

    #[test]
    fn upsampling_constant_is_constant() {
        let c = Raster::filled(5, 4, 3.5f64);
        let u = upsample(&c, 10, 7);
        assert!(u.pixels().iter().all(|&v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn upsampling_linear_ramp_interpolates() {
        let c = Raster::from_fn(4, 1, |x, _| x as f64 * 2.0);
        let u = upsample(&c, 8, 1);
        // Fine pixel 3 sits at coarse coordinate 1.25.
        assert!((u.get(3, 0) - 2.5).abs() < 1e-12);
        assert_eq!(u.get(0, 0), 0.0);
        assert_eq!(u.get(7, 0), 6.0);
    }
}
