use super::Undefined;
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Half-width of the profile window through the brightest pixel.
pub const PROFILE_HALF_WIDTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidelobeRatios {
    pub islr_db: f64,
    pub pslr_db: f64,
}

/// ISLR and PSLR of a 1D profile around `peak`.
///
/// The main lobe runs from the peak outwards to the first local minimum on each side; a
/// side that decreases all the way to the window end has no null and contributes no side
/// lobe. Powers are squared amplitudes.
pub fn profile_ratios(profile: &[f64], peak: usize) -> Result<SidelobeRatios, Undefined> {
    let n = profile.len();
    let mut lo = peak;
    while lo > 0 && profile[lo - 1] < profile[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < n && profile[hi + 1] < profile[hi] {
        hi += 1;
    }
    let left_null = lo > 0;
    let right_null = hi + 1 < n;
    if !left_null && !right_null {
        return Err(Undefined::NoNull);
    }
    let power = |v: f64| v * v;
    let main: f64 = profile[lo..=hi].iter().map(|&v| power(v)).sum();
    let side: Vec<f64> = profile[..lo]
        .iter()
        .chain(&profile[hi + 1..])
        .map(|&v| power(v))
        .collect();
    let side_sum: f64 = side.iter().sum();
    let side_max = side.iter().cloned().fold(0.0, f64::max);
    let peak_power = power(profile[peak]);
    if side_max == 0.0 || peak_power == 0.0 {
        return Err(Undefined::NoSidelobeEnergy);
    }
    Ok(SidelobeRatios {
        islr_db: 10.0 * (side_sum / main).log10(),
        pslr_db: 10.0 * (side_max / peak_power).log10(),
    })
}

/// Position of the global maximum, first in row-major order on ties.
pub fn brightest<T: Scalar>(image: &Raster<T>) -> (usize, usize) {
    let mut best = 0;
    for (i, &v) in image.pixels().iter().enumerate() {
        if v > image.pixels()[best] {
            best = i;
        }
    }
    (best % image.width(), best / image.width())
}

/// Side-lobe ratios of the row and column profiles through the brightest pixel, averaged
/// over the profiles on which they are defined.
pub fn sidelobe_ratios<T: Scalar>(image: &Raster<T>) -> Result<SidelobeRatios, Undefined> {
    let (w, h) = (image.width(), image.height());
    let (px, py) = brightest(image);
    let x0 = px.saturating_sub(PROFILE_HALF_WIDTH);
    let x1 = (px + PROFILE_HALF_WIDTH).min(w - 1);
    let y0 = py.saturating_sub(PROFILE_HALF_WIDTH);
    let y1 = (py + PROFILE_HALF_WIDTH).min(h - 1);
    let row: Vec<f64> = (x0..=x1).map(|x| image.get(x, py).f64()).collect();
    let col: Vec<f64> = (y0..=y1).map(|y| image.get(px, y).f64()).collect();
    let results = [profile_ratios(&row, px - x0), profile_ratios(&col, py - y0)];
    let defined: Vec<SidelobeRatios> = results.iter().filter_map(|r| r.ok()).collect();
    if defined.is_empty() {
        return Err(results[0].unwrap_err());
    }
    let k = defined.len() as f64;
    Ok(SidelobeRatios {
        islr_db: defined.iter().map(|r| r.islr_db).sum::<f64>() / k,
        pslr_db: defined.iter().map(|r| r.pslr_db).sum::<f64>() / k,
    })
}
