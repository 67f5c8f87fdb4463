//! Restoration-quality metrics: ENL, CNR, side-lobe ratios and residual detectability.

mod detector;
mod radiometry;
mod sidelobe;

pub use detector::{dice, residual_detector, residual_dice, DetectorParams};
pub use radiometry::{cnr, enl, tail_count, CNR_MIN_PIXELS};
pub use sidelobe::{brightest, profile_ratios, sidelobe_ratios, SidelobeRatios, PROFILE_HALF_WIDTH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;

/// Why a metric has no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Undefined {
    TooFewPixels,
    /// Zero variance over the region.
    Homogeneous,
    /// No local minimum delimits the main lobe.
    NoNull,
    NoSidelobeEnergy,
}

impl std::fmt::Display for Undefined {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Undefined::TooFewPixels => "too few pixels",
            Undefined::Homogeneous => "homogeneous region",
            Undefined::NoNull => "no null beside the main lobe",
            Undefined::NoSidelobeEnergy => "no side-lobe energy",
        })
    }
}

/// A metric value with its defined flag; serializes as `{"value": number|null, "defined": bool}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: Option<f64>,
    pub defined: bool,
}

impl MetricValue {
    pub fn defined(v: f64) -> Self {
        Self {
            value: Some(v),
            defined: true,
        }
    }

    pub fn undefined() -> Self {
        Self {
            value: None,
            defined: false,
        }
    }
}

impl From<std::result::Result<f64, Undefined>> for MetricValue {
    fn from(r: std::result::Result<f64, Undefined>) -> Self {
        match r {
            Ok(v) if v.is_finite() => Self::defined(v),
            _ => Self::undefined(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationReport {
    pub enl: MetricValue,
    pub cnr: MetricValue,
    pub islr_db: MetricValue,
    pub pslr_db: MetricValue,
    /// Residual Dice from the threshold detector, not from a trained segmenter.
    pub residual_dice: MetricValue,
    pub roi_descriptor: String,
}

/// Reports for the original and the restored image over the same regions: ENL and CNR on
/// `sea_roi ∪ Ω`, side-lobe ratios on the full frame, residual Dice on Ω.
pub fn restoration_report<T: Scalar>(
    original: &Raster<T>,
    restored: &Raster<T>,
    omega: &BinaryMask,
    sea_roi: &BinaryMask,
    detector: &DetectorParams,
) -> Result<(RestorationReport, RestorationReport)> {
    if !original.same_shape(restored) || !original.matches(omega) || !original.matches(sea_roi) {
        return Err(Error::Dimensions("images, Ω and sea ROI differ".into()));
    }
    if !sea_roi.is_disjoint(omega) {
        return Err(Error::Precondition("sea ROI overlaps Ω".into()));
    }
    let roi = sea_roi.union(omega);
    let descriptor = format!(
        "enl/cnr: sea_roi ∪ omega ({} px); sidelobes: full frame; residual dice: omega ({} px), ring {} px, min area {}",
        roi.count(),
        omega.count(),
        detector.ring_width,
        detector.min_component_area
    );
    let one = |img: &Raster<T>| {
        let sl = sidelobe_ratios(img);
        RestorationReport {
            enl: enl(img, &roi).into(),
            cnr: cnr(img, &roi).into(),
            islr_db: sl.map(|s| s.islr_db).into(),
            pslr_db: sl.map(|s| s.pslr_db).into(),
            residual_dice: if omega.none() {
                MetricValue::undefined()
            } else {
                MetricValue::defined(residual_dice(img, omega, detector))
            },
            roi_descriptor: descriptor.clone(),
        }
    };
    Ok((one(original), one(restored)))
}
