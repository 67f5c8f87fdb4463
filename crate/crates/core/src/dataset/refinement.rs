use crate::error::{Error, Result};
use crate::raster::BinaryMask;
use crate::IntensityRaster;

/// A post-inpainting stage: receives the inpainted image and the inpaint mask and returns a
/// refined image. Only masked pixels of its output are kept.
pub type RefinementFn = fn(&IntensityRaster, &BinaryMask) -> Result<IntensityRaster>;

/// Resolve a refinement stage by name. `"none"` means no stage.
pub fn lookup(name: &str) -> Result<Option<RefinementFn>> {
    match name {
        "none" => Ok(None),
        other => Err(Error::Config(format!(
            "unknown refinement stage {other:?}; available: \"none\""
        ))),
    }
}
