//! Exemplar-based hole filling: PatchMatch nearest-neighbour search plus patch voting,
//! run coarse to fine.

mod init;
mod patch;
mod patchmatch;
mod pyramid;
mod vote;

pub use init::onion_peel;
pub use patch::{patch_distance, PatchSpec};
pub use patchmatch::{
    exhaustive_field, patchmatch, patchmatch_from, patchmatch_traced, NearestNeighborField, NnfEntry, SearchSchedule,
};
pub use pyramid::{build_pyramid, downsample, upsample, PyramidLevel};
pub use vote::{fill_from_nnf, vote_bandwidth};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Coord, Raster};
use crate::scalar::Scalar;
use crate::seed;

/// Largest |M|·|K| for which the coarsest level is seeded by exhaustive search.
const EXHAUSTIVE_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InpaintParams {
    /// Patch radius r; patches are (2r+1)².
    pub patch_radius: usize,
    /// PatchMatch sweeps per search.
    pub pm_iterations: usize,
    /// Search-then-vote rounds per pyramid level.
    pub em_iterations: usize,
    /// Coarsest level keeps its smaller side at or above this.
    pub pyramid_min: usize,
}

impl Default for InpaintParams {
    fn default() -> Self {
        Self {
            patch_radius: 3,
            pm_iterations: 5,
            em_iterations: 3,
            pyramid_min: 32,
        }
    }
}

impl InpaintParams {
    pub fn validate(&self) -> Result<()> {
        PatchSpec::new(self.patch_radius)?;
        if self.pm_iterations == 0 || self.em_iterations == 0 {
            return Err(Error::Config("pm_iterations and em_iterations must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> PatchSpec {
        PatchSpec::new(self.patch_radius).expect("validated radius")
    }
}

#[derive(Debug, Clone)]
pub struct Inpainted<T> {
    pub raster: Raster<T>,
    /// Field of the last search at full resolution (`None` for an empty mask).
    pub nnf: Option<NearestNeighborField<T>>,
    pub levels: usize,
}

/// Fill the masked pixels of `image` from its known region.
///
/// The coarsest pyramid level starts from the known-region mean. Each level alternates
/// PatchMatch and voting `em_iterations` times, then seeds the next finer level's masked
/// pixels by bilinear upsampling. Pixels outside the mask are returned untouched.
pub fn inpaint<T: Scalar>(
    image: &Raster<T>,
    mask: &BinaryMask,
    params: &InpaintParams,
    rng_seed: u64,
) -> Result<Inpainted<T>> {
    params.validate()?;
    if !image.matches(mask) {
        return Err(Error::Dimensions("image and mask differ".into()));
    }
    if mask.none() {
        return Ok(Inpainted {
            raster: image.clone(),
            nnf: None,
            levels: 0,
        });
    }
    if mask.all() {
        return Err(Error::Precondition("known region is empty".into()));
    }
    let spec = params.spec();
    let levels = build_pyramid(image, mask, params.pyramid_min);
    let n_levels = levels.len();

    let mut seed_values: Option<Raster<T>> = None;
    let mut last_nnf: Option<NearestNeighborField<T>> = None;
    let mut result = image.clone();

    for (depth, level) in levels.iter().enumerate().rev() {
        let mut estimate = match seed_values.take() {
            Some(up) => level.raster.blend_masked(&up, &level.mask),
            None if level.mask.count() * (level.mask.len() - level.mask.count()) <= EXHAUSTIVE_BUDGET => {
                onion_peel(&level.raster, &level.mask, spec)
                    .ok_or_else(|| Error::Precondition("known region is empty".into()))?
            }
            None => {
                let known = level.raster.values_in(&level.mask.complement());
                let mean = known.iter().map(|v| v.f64()).sum::<f64>() / known.len() as f64;
                let fill = Raster::filled(level.raster.width(), level.raster.height(), T::of(mean));
                level.raster.blend_masked(&fill, &level.mask)
            }
        };

        let mut level_nnf: Option<NearestNeighborField<T>> = None;
        if let Some(coarse) = last_nnf.take() {
            let init = upscale_field(&coarse, &level.mask)?;
            let schedule = SearchSchedule {
                iterations: 0,
                seed: rng_seed,
                level: seed::key(&[depth as u64, u64::MAX]),
            };
            let (nnf, _) = patchmatch_from(&estimate, &level.mask, spec, schedule, Some(&init))?;
            estimate = fill_from_nnf(&estimate, &level.mask, &nnf, spec)?;
            level_nnf = Some(nnf);
        }
        if level_nnf.is_none() && level.mask.count() * (level.mask.len() - level.mask.count()) <= EXHAUSTIVE_BUDGET {
            let nnf = exhaustive_field(&estimate, &level.mask, spec)?;
            estimate = fill_from_nnf(&estimate, &level.mask, &nnf, spec)?;
            level_nnf = Some(nnf);
        }
        for round in 0..params.em_iterations {
            let schedule = SearchSchedule {
                iterations: params.pm_iterations,
                seed: rng_seed,
                level: seed::key(&[depth as u64, round as u64]),
            };
            let (nnf, _) = patchmatch_from(&estimate, &level.mask, spec, schedule, level_nnf.as_ref())?;
            estimate = fill_from_nnf(&estimate, &level.mask, &nnf, spec)?;
            level_nnf = Some(nnf);
        }
        last_nnf = level_nnf;

        if depth > 0 {
            let finer = &levels[depth - 1];
            seed_values = Some(upsample(&estimate, finer.raster.width(), finer.raster.height()));
        } else {
            result = estimate;
        }
    }

    Ok(Inpainted {
        raster: image.blend_masked(&result, mask),
        nnf: last_nnf,
        levels: n_levels,
    })
}

/// Carry a coarse field to the next finer level: each fine target inherits the doubled
/// source offset of its parent. Targets whose candidate leaves the grid are left out.
fn upscale_field<T: Scalar>(
    coarse: &NearestNeighborField<T>,
    fine_mask: &BinaryMask,
) -> Result<NearestNeighborField<T>> {
    let (w, h) = (fine_mask.width(), fine_mask.height());
    let entries = fine_mask
        .coords()
        .filter_map(|t| {
            let parent = coarse.get(Coord::new(t.x / 2, t.y / 2))?;
            let sx = 2 * parent.source.x + t.x % 2;
            let sy = 2 * parent.source.y + t.y % 2;
            (sx < w && sy < h).then(|| NnfEntry {
                target: t,
                source: Coord::new(sx, sy),
                distance: T::zero(),
            })
        })
        .collect();
    NearestNeighborField::new(w, h, entries)
}
