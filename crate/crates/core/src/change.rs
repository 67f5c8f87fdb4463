//! Difference-image change detection with an Otsu threshold, and pixel-level scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricValue;
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 256;

/// Per-pixel |post − pre|.
pub fn abs_diff<T: Scalar>(pre: &Raster<T>, post: &Raster<T>) -> Result<Raster<T>> {
    if !pre.same_shape(post) {
        return Err(Error::Dimensions(format!(
            "pre {}x{} vs post {}x{}",
            pre.width(),
            pre.height(),
            post.width(),
            post.height()
        )));
    }
    let data = pre
        .pixels()
        .iter()
        .zip(post.pixels())
        .map(|(&a, &b)| (b - a).abs())
        .collect();
    Raster::new(pre.width(), pre.height(), data)
}

/// Upper edges of the `bins` equal-width bins spanning [min, max], in image units.
/// The last edge is `max` itself.
pub fn bin_edges(min: f64, max: f64, bins: usize) -> Vec<f64> {
    (1..=bins)
        .map(|j| {
            if j == bins {
                max
            } else {
                min + (max - min) * j as f64 / bins as f64
            }
        })
        .collect()
}

/// Bin of `v`: the first bin whose upper edge is ≥ `v`. Bins are closed above, so a
/// threshold at edge k puts exactly the values ≤ edge k into the lower class.
fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e < v).min(edges.len() - 1)
}

/// Between-class variance ω₀ω₁(μ₀−μ₁)² of a split, as an exact ratio of integers
/// (bin centres in half-bin units). Returns (numerator, denominator).
fn between_class(n0: u64, s0: u64, n1: u64, s1: u64) -> (u128, u128) {
    let cross = (s0 as i128) * (n1 as i128) - (s1 as i128) * (n0 as i128);
    ((cross * cross) as u128, (n0 as u128) * (n1 as u128))
}

/// Otsu threshold over `bins` equal-width bins of the min-max normalized image. Returns
/// the maximizing bin upper edge in image units; ties go to the smallest edge.
pub fn otsu_threshold<T: Scalar>(image: &Raster<T>, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::Config(format!("otsu needs at least 2 bins, got {bins}")));
    }
    let (lo, hi) = image.min_max();
    let (lo, hi) = (lo.f64(), hi.f64());
    if lo == hi {
        return Err(Error::Degenerate("constant image has no Otsu threshold".into()));
    }
    let edges = bin_edges(lo, hi, bins);
    let mut hist = vec![0u64; bins];
    for v in image.pixels() {
        hist[bin_of(&edges, v.f64())] += 1;
    }
    let centre = |k: usize| 2 * k as u64 + 1;
    let n: u64 = hist.iter().sum();
    let s: u64 = hist.iter().enumerate().map(|(k, &c)| c * centre(k)).sum();

    let mut best: Option<(usize, (u128, u128))> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (k, &count) in hist.iter().enumerate().take(bins - 1) {
        n0 += count;
        s0 += count * centre(k);
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let score = between_class(n0, s0, n1, s - s0);
        let better = match best {
            None => true,
            Some((_, (num, den))) => score.0 * den > num * score.1,
        };
        if better {
            best = Some((k, score));
        }
    }
    let (k, _) = best.expect("non-constant image has a split with both classes nonempty");
    Ok(edges[k])
}

/// Change mask `|post − pre| > otsu(|post − pre|)`; a constant difference gives no change.
pub fn diff_otsu<T: Scalar>(pre: &Raster<T>, post: &Raster<T>, bins: usize) -> Result<BinaryMask> {
    let d = abs_diff(pre, post)?;
    let t = match otsu_threshold(&d, bins) {
        Ok(t) => t,
        Err(Error::Degenerate(_)) => return Ok(BinaryMask::empty(d.width(), d.height())),
        Err(e) => return Err(e),
    };
    Ok(threshold_mask(&d, t))
}

pub fn threshold_mask<T: Scalar>(image: &Raster<T>, t: f64) -> BinaryMask {
    BinaryMask::from_fn(image.width(), image.height(), |x, y| image.get(x, y).f64() > t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdEvalReport {
    pub precision: MetricValue,
    pub recall: MetricValue,
    pub f1: MetricValue,
    pub iou: MetricValue,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl CdEvalReport {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                MetricValue::undefined()
            } else {
                MetricValue::defined(num as f64 / den as f64)
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision.defined && recall.defined {
            ratio(2 * tp, 2 * tp + fp + fn_)
        } else {
            MetricValue::undefined()
        };
        Self {
            precision,
            recall,
            f1,
            iou: ratio(tp, tp + fp + fn_),
            tp,
            fp,
            fn_,
            tn,
        }
    }
}

/// Pixel confusion counts over the full frame and the derived scores.
pub fn cd_eval(pred: &BinaryMask, gt: &BinaryMask) -> Result<CdEvalReport> {
    if !pred.same_shape(gt) {
        return Err(Error::Dimensions("prediction and ground truth differ".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(CdEvalReport::from_counts(tp, fp, fn_, tn))
}
