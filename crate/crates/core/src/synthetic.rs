//! Synthetic post-event scenes: speckled sea with an elliptical dark spill, look-alikes and
//! bright vessels. Used for tests, calibration runs and CLI fixtures.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::{BinaryMask, LabelMask, Raster};
use crate::seed::{self, stage};
use crate::tre::sample_speckle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub sea_mean: f64,
    pub looks: u32,
    /// Spill intensity relative to the sea.
    pub spill_contrast: f64,
    /// Semi-axis range of the spill ellipse, in pixels.
    pub spill_radius: (usize, usize),
    pub lookalikes: usize,
    pub lookalike_contrast: f64,
    pub vessels: usize,
    pub vessel_contrast: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 192,
            height: 192,
            sea_mean: 100.0,
            looks: 4,
            spill_contrast: 0.4,
            spill_radius: (10, 18),
            lookalikes: 0,
            lookalike_contrast: 0.6,
            vessels: 0,
            vessel_contrast: 8.0,
        }
    }
}

fn ellipse(w: usize, h: usize, cx: f64, cy: f64, rx: f64, ry: f64, angle: f64) -> BinaryMask {
    let (s, c) = angle.sin_cos();
    BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let u = (dx * c + dy * s) / rx;
        let v = (-dx * s + dy * c) / ry;
        u * u + v * v <= 1.0
    })
}

/// A post-event scene and its labels. The spill is label 1, look-alikes 2, vessels 3.
pub fn synthetic_scene(spec: &SceneSpec, scene_seed: u64) -> Result<(Raster<f32>, LabelMask)> {
    let (w, h) = (spec.width, spec.height);
    let u = |tag: u64, k: u64| seed::unit(&[scene_seed, stage::SCENE, tag, k]);
    let eta: Raster<f64> = sample_speckle(w, h, spec.looks, seed::key(&[scene_seed, stage::SCENE, 0]))?;
    let mut labels = LabelMask::filled(w, h, LabelMask::SEA);
    let mut gain = vec![1.0f64; w * h];

    let (rmin, rmax) = (
        spec.spill_radius.0 as f64,
        spec.spill_radius.1.max(spec.spill_radius.0) as f64,
    );
    let radius = |a: f64| rmin + (rmax - rmin) * a;
    let place = |tag: u64, k: u64, margin: f64| {
        let cx = margin + (w as f64 - 2.0 * margin).max(1.0) * u(tag, 3 * k);
        let cy = margin + (h as f64 - 2.0 * margin).max(1.0) * u(tag, 3 * k + 1);
        (cx, cy, u(tag, 3 * k + 2) * std::f64::consts::PI)
    };

    let (rx, ry) = (radius(u(1, 100)), radius(u(1, 101)));
    let (cx, cy, angle) = place(1, 0, rmax + 4.0);
    let spill = ellipse(w, h, cx, cy, rx, ry, angle);
    for c in spill.coords() {
        labels.set(c.x, c.y, LabelMask::OIL);
        gain[c.y * w + c.x] = spec.spill_contrast;
    }

    for k in 0..spec.lookalikes as u64 {
        let (lx, ly) = (radius(u(2, 100 + 2 * k)) * 0.6, radius(u(2, 101 + 2 * k)) * 0.6);
        let (cx, cy, angle) = place(2, k, rmax * 0.6 + 2.0);
        let m = ellipse(w, h, cx, cy, lx, ly, angle);
        for c in m.coords() {
            if labels.get(c.x, c.y) == LabelMask::SEA {
                labels.set(c.x, c.y, LabelMask::LOOK_ALIKE);
                gain[c.y * w + c.x] = spec.lookalike_contrast;
            }
        }
    }

    let mut placed = 0;
    let mut attempt = 0u64;
    while placed < spec.vessels && attempt < 64 * spec.vessels as u64 {
        let (vw, vh) = (
            2 + seed::below(&[scene_seed, stage::SCENE, 3, attempt, 0], 3),
            2 + seed::below(&[scene_seed, stage::SCENE, 3, attempt, 1], 2),
        );
        attempt += 1;
        if vw + 4 >= w || vh + 4 >= h {
            break;
        }
        let x0 = 2 + seed::below(&[scene_seed, stage::SCENE, 4, attempt, 0], w - vw - 4);
        let y0 = 2 + seed::below(&[scene_seed, stage::SCENE, 4, attempt, 1], h - vh - 4);
        let clear = (y0 - 2..y0 + vh + 2).all(|y| (x0 - 2..x0 + vw + 2).all(|x| labels.get(x, y) == LabelMask::SEA));
        if !clear {
            continue;
        }
        for y in y0..y0 + vh {
            for x in x0..x0 + vw {
                labels.set(x, y, LabelMask::VESSEL);
                gain[y * w + x] = spec.vessel_contrast;
            }
        }
        placed += 1;
    }

    let post = Raster::from_fn(w, h, |x, y| (spec.sea_mean * gain[y * w + x] * eta.get(x, y)) as f32);
    Ok((post, labels))
}
