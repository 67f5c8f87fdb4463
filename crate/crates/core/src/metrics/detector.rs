use crate::components::{connected_components, Connectivity};
use crate::morph::exterior_ring;
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;
use crate::stats;

/// 2|A∩B| / (|A|+|B|), and 1 when both masks are empty.
pub fn dice(pred: &BinaryMask, gt: &BinaryMask) -> f64 {
    assert!(pred.same_shape(gt), "mask dimensions differ");
    let a = pred.count();
    let b = gt.count();
    if a + b == 0 {
        return 1.0;
    }
    2.0 * pred.intersection(gt).count() as f64 / (a + b) as f64
}

/// Threshold detector standing in for a trained spill segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DetectorParams {
    /// Width of the exterior ring that sets the dark threshold.
    pub ring_width: u32,
    /// Flagged 8-connected regions smaller than this are dropped; 1 keeps every pixel.
    pub min_component_area: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            ring_width: 5,
            min_component_area: 16,
        }
    }
}

/// Flag pixels of Ω ∪ ring darker than the ring's 10th percentile, keeping only flagged
/// regions of at least `min_component_area` pixels. Empty output when Ω or its ring is empty.
pub fn residual_detector<T: Scalar>(image: &Raster<T>, omega: &BinaryMask, params: &DetectorParams) -> BinaryMask {
    assert!(image.matches(omega), "image and Ω differ");
    let (w, h) = (image.width(), image.height());
    let ring = exterior_ring(omega, params.ring_width).mask;
    if omega.none() || ring.none() {
        return BinaryMask::empty(w, h);
    }
    let ring_values: Vec<f64> = image.values_in(&ring).into_iter().map(|v| v.f64()).collect();
    let p10 = stats::percentile(&ring_values, 0.10).expect("nonempty ring");
    let region = omega.union(&ring);
    let flagged = BinaryMask::from_fn(w, h, |x, y| region.get(x, y) && image.get(x, y).f64() < p10);
    if params.min_component_area <= 1 {
        return flagged;
    }
    let mut kept = BinaryMask::empty(w, h);
    for c in connected_components(&flagged, Connectivity::Eight) {
        if c.len() >= params.min_component_area {
            for p in &c.pixels {
                kept.set(p.x, p.y, true);
            }
        }
    }
    kept
}

/// Dice between the detector output restricted to Ω and Ω itself.
pub fn residual_dice<T: Scalar>(image: &Raster<T>, omega: &BinaryMask, params: &DetectorParams) -> f64 {
    let flagged = residual_detector(image, omega, params).intersection(omega);
    dice(&flagged, omega)
}
