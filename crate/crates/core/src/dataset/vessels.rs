use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use crate::components::{connected_components, Connectivity};
use crate::morph::dilate;
use crate::raster::{BinaryMask, Coord, LabelMask};
use crate::seed::{self, stage};
use crate::IntensityRaster;

/// Translation attempts per vessel before it is removed instead.
pub const MAX_SHIFT_DRAWS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum VesselAction {
    Removed,
    /// Kept a translation drawn on attempt `draws`.
    Moved {
        dx: i64,
        dy: i64,
        draws: u64,
    },
    /// No admissible destination within the draw budget.
    RemovedAfterRetries,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VesselMove {
    /// Component ordinal in (min row, min col) order.
    pub component: usize,
    pub pixels: usize,
    #[serde(flatten)]
    pub action: VesselAction,
}

#[derive(Debug, Clone)]
pub struct VesselPerturbation {
    /// Image with vessels copied to their destinations (origins still hold the old vessel).
    pub image: IntensityRaster,
    /// Origins of every removed or moved vessel; these must be inpainted.
    pub extra_mask: BinaryMask,
    /// Destinations of moved vessels.
    pub destinations: BinaryMask,
    /// Labels of the perturbed (pre-event) configuration.
    pub labels: LabelMask,
    pub moves: Vec<VesselMove>,
}

/// Remove or translate each 8-connected vessel component.
///
/// A vessel is removed with probability `vessel_remove_prob`; otherwise it is shifted by an
/// integer offset whose length lies in `[vessel_shift_min, vessel_shift_max]` onto pixels that
/// are sea, in bounds and clear of the dilated oil mask. After [`MAX_SHIFT_DRAWS`] failed
/// draws the vessel is removed.
pub fn perturb_vessels(
    post: &IntensityRaster,
    labels: &LabelMask,
    config: &PipelineConfig,
    scene_seed: u64,
) -> VesselPerturbation {
    assert!(labels.matches(post), "labels and image differ");
    let (w, h) = (post.width(), post.height());
    let mut image = post.clone();
    let mut out_labels = labels.clone();
    let mut extra = BinaryMask::empty(w, h);
    let mut destinations = BinaryMask::empty(w, h);
    let keep_out = dilate(&labels.class_mask(LabelMask::OIL), config.dilation_radius);
    let mut moves = Vec::new();

    let vessels = connected_components(&labels.class_mask(config.vessel_label), Connectivity::Eight);
    for comp in &vessels {
        let k = comp.id as u64;
        let draw = |parts: &[u64]| {
            let mut key = vec![scene_seed, stage::VESSELS, k];
            key.extend_from_slice(parts);
            seed::unit(&key)
        };
        let mut action = VesselAction::Removed;
        if draw(&[0]) >= config.vessel_remove_prob {
            action = VesselAction::RemovedAfterRetries;
            for attempt in 0..MAX_SHIFT_DRAWS {
                let (lo, hi) = (config.vessel_shift_min, config.vessel_shift_max);
                let length = lo + (hi - lo) * draw(&[1, attempt]);
                let angle = std::f64::consts::TAU * draw(&[2, attempt]);
                let dx = (length * angle.cos()).round() as i64;
                let dy = (length * angle.sin()).round() as i64;
                let reach = ((dx * dx + dy * dy) as f64).sqrt();
                if reach < lo || reach > hi || (dx == 0 && dy == 0) {
                    continue;
                }
                let fits = comp.pixels.iter().all(|p| {
                    let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
                    x >= 0
                        && y >= 0
                        && (x as usize) < w
                        && (y as usize) < h
                        && out_labels.get(x as usize, y as usize) == LabelMask::SEA
                        && !keep_out.get(x as usize, y as usize)
                });
                if fits {
                    action = VesselAction::Moved {
                        dx,
                        dy,
                        draws: attempt + 1,
                    };
                    break;
                }
            }
        }

        for p in &comp.pixels {
            out_labels.set(p.x, p.y, LabelMask::SEA);
            extra.set(p.x, p.y, true);
        }
        if let VesselAction::Moved { dx, dy, .. } = action {
            for p in &comp.pixels {
                let q = Coord::new((p.x as i64 + dx) as usize, (p.y as i64 + dy) as usize);
                image.set(q.x, q.y, post.at(*p));
                out_labels.set(q.x, q.y, config.vessel_label);
                destinations.set(q.x, q.y, true);
            }
        }
        moves.push(VesselMove {
            component: comp.id,
            pixels: comp.len(),
            action,
        });
    }

    VesselPerturbation {
        image,
        extra_mask: extra,
        destinations,
        labels: out_labels,
        moves,
    }
}
