use super::Undefined;
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;
use crate::stats;

/// Smallest ROI on which [`cnr`] is defined.
pub const CNR_MIN_PIXELS: usize = 40;

fn roi_values<T: Scalar>(image: &Raster<T>, roi: &BinaryMask) -> Vec<f64> {
    assert!(image.matches(roi), "image and ROI differ");
    image.values_in(roi).into_iter().map(|v| v.f64()).collect()
}

/// Equivalent number of looks μ²/σ² with the unbiased variance.
pub fn enl<T: Scalar>(image: &Raster<T>, roi: &BinaryMask) -> Result<f64, Undefined> {
    let v = roi_values(image, roi);
    if v.len() < 2 {
        return Err(Undefined::TooFewPixels);
    }
    let m = stats::mean(&v).expect("nonempty");
    let var = stats::variance(&v).expect("two values");
    if var == 0.0 {
        return Err(Undefined::Homogeneous);
    }
    Ok(m * m / var)
}

/// Number of values in each 5% tail: ⌈n/20⌉.
pub fn tail_count(n: usize) -> usize {
    n.div_ceil(20)
}

/// Contrast-to-noise ratio: (mean of the top 5% − mean of the bottom 5%) / σ, with σ the
/// unbiased standard deviation of the whole ROI.
pub fn cnr<T: Scalar>(image: &Raster<T>, roi: &BinaryMask) -> Result<f64, Undefined> {
    let mut v = roi_values(image, roi);
    if v.len() < CNR_MIN_PIXELS {
        return Err(Undefined::TooFewPixels);
    }
    let sd = stats::variance(&v).expect("≥ 40 values").sqrt();
    if sd == 0.0 {
        return Err(Undefined::Homogeneous);
    }
    v.sort_by(f64::total_cmp);
    let k = tail_count(v.len());
    let low = v[..k].iter().sum::<f64>() / k as f64;
    let high = v[v.len() - k..].iter().sum::<f64>() / k as f64;
    Ok((high - low) / sd)
}
