use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::refinement;
use super::vessels::{perturb_vessels, VesselMove};
use crate::error::{Error, Result};
use crate::inpaint::inpaint;
use crate::morph::dilate;
use crate::raster::{BinaryMask, LabelMask};
use crate::seed::{self, stage};
use crate::tre::tre_apply;
use crate::IntensityRaster;

pub const PROVENANCE_VERSION: u32 = 1;

/// Everything needed to regenerate `pre` bit-exactly from the post image and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: u32,
    pub scene_id: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub scene_seed: u64,
    pub inpaint_seed: u64,
    pub tre_seed: u64,
    pub refinement_stage: String,
    pub vessel_moves: Vec<VesselMove>,
    /// Pixels in the inpaint mask, oil dilation plus vacated vessel sites.
    pub inpaint_mask_pixels: usize,
    pub oil_pixels: usize,
    /// Destinations of moved vessels are pasted without seam blending.
    pub destination_seams_blended: bool,
}

/// Wall-clock time per stage. Kept out of [`Provenance`] so stored trees stay byte-stable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub vessels: Duration,
    pub inpaint: Duration,
    pub refinement: Duration,
    pub tre: Duration,
}

#[derive(Debug, Clone)]
pub struct ScenePair {
    pub scene_id: String,
    /// Synthetic pre-event image.
    pub pre: IntensityRaster,
    /// Post-event image, verbatim.
    pub post: IntensityRaster,
    /// Undilated oil mask of the input labels.
    pub change_gt: BinaryMask,
    /// Input post-event labels.
    pub labels: LabelMask,
    /// Union of the inpaint mask and moved-vessel destinations; `pre` equals `post` elsewhere
    /// when speckle and drift are off.
    pub edited: BinaryMask,
    pub provenance: Provenance,
    pub timings: StageTimings,
}

/// Synthesize the pre-event image for one scene.
pub fn build_pair(
    scene_id: &str,
    post: &IntensityRaster,
    labels: &LabelMask,
    config: &PipelineConfig,
    scene_seed: u64,
) -> Result<ScenePair> {
    config.validate()?;
    if !labels.matches(post) {
        return Err(Error::Dimensions(format!(
            "{scene_id}: labels are {}×{}, image is {}×{}",
            labels.width(),
            labels.height(),
            post.width(),
            post.height()
        )));
    }
    let oil = labels.class_mask(LabelMask::OIL);
    if oil.none() {
        return Err(Error::Precondition(format!("{scene_id}: no oil pixels in labels")));
    }
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let perturbed = perturb_vessels(post, labels, config, scene_seed);
    timings.vessels = t.elapsed();

    let omega = dilate(&oil, config.dilation_radius).union(&perturbed.extra_mask);
    let coverage = omega.count() as f64 / omega.len() as f64;
    if coverage >= config.max_mask_fraction {
        return Err(Error::Degenerate(format!(
            "{scene_id}: inpaint mask covers {:.1}% of the scene",
            coverage * 100.0
        )));
    }

    let inpaint_seed = seed::key(&[scene_seed, stage::INPAINT]);
    let t = Instant::now();
    let filled = inpaint(&perturbed.image, &omega, &config.inpaint_params(), inpaint_seed)?.raster;
    timings.inpaint = t.elapsed();

    let t = Instant::now();
    let refined = match refinement::lookup(&config.refinement_stage)? {
        Some(stage_fn) => filled.blend_masked(&stage_fn(&filled, &omega)?, &omega),
        None => filled,
    };
    timings.refinement = t.elapsed();

    let tre_seed = seed::key(&[scene_seed, stage::TRE]);
    let t = Instant::now();
    let pre = tre_apply(&refined, &omega, &config.tre_params(), tre_seed)?;
    timings.tre = t.elapsed();
    log::debug!("{scene_id}: {timings:?}");

    let provenance = Provenance {
        version: PROVENANCE_VERSION,
        scene_id: scene_id.to_string(),
        config_hash: config.hash(),
        master_seed: config.master_seed,
        scene_seed,
        inpaint_seed,
        tre_seed,
        refinement_stage: config.refinement_stage.clone(),
        vessel_moves: perturbed.moves,
        inpaint_mask_pixels: omega.count(),
        oil_pixels: oil.count(),
        destination_seams_blended: false,
    };
    Ok(ScenePair {
        scene_id: scene_id.to_string(),
        pre,
        post: post.clone(),
        change_gt: oil,
        labels: labels.clone(),
        edited: omega.union(&perturbed.destinations),
        provenance,
        timings,
    })
}
