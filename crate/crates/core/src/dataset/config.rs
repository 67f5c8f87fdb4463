use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inpaint::InpaintParams;
use crate::raster::LabelMask;
use crate::tre::{Conduction, KappaScale, PerturbScope, TreParams};

pub const CONFIG_VERSION: u32 = 1;

/// Every pipeline parameter, flat and snake_case, as read from a config JSON file.
/// Missing fields take their defaults; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,

    pub patch_radius: usize,
    pub pm_iterations: usize,
    pub em_iterations: usize,
    pub pyramid_min: usize,

    pub kappa: f64,
    pub kappa_scale: KappaScale,
    pub conduction: Conduction,
    pub diffusion_iterations: usize,
    pub diffusion_step: f64,
    pub band_width: u32,
    pub looks: u32,
    pub drift_alpha: f64,
    pub drift_box: usize,
    pub ring_width: u32,
    pub speckle: bool,
    pub drift: bool,
    pub perturb_scope: PerturbScope,

    pub dilation_radius: u32,
    pub vessel_label: u8,
    pub vessel_remove_prob: f64,
    pub vessel_shift_min: f64,
    pub vessel_shift_max: f64,
    pub split_fraction: f64,
    pub master_seed: u64,
    pub refinement_stage: String,
    /// Scenes whose inpaint mask covers at least this fraction are rejected.
    pub max_mask_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let ip = InpaintParams::default();
        let tp = TreParams::default();
        Self {
            version: CONFIG_VERSION,
            patch_radius: ip.patch_radius,
            pm_iterations: ip.pm_iterations,
            em_iterations: ip.em_iterations,
            pyramid_min: ip.pyramid_min,
            kappa: tp.kappa,
            kappa_scale: tp.kappa_scale,
            conduction: tp.conduction,
            diffusion_iterations: tp.diffusion_iterations,
            diffusion_step: tp.diffusion_step,
            band_width: tp.band_width,
            looks: tp.looks,
            drift_alpha: tp.drift_alpha,
            drift_box: tp.drift_box,
            ring_width: tp.ring_width,
            speckle: tp.speckle,
            drift: tp.drift,
            perturb_scope: tp.perturb_scope,
            dilation_radius: 3,
            vessel_label: LabelMask::VESSEL,
            vessel_remove_prob: 0.3,
            vessel_shift_min: 5.0,
            vessel_shift_max: 30.0,
            split_fraction: 0.9,
            master_seed: 0,
            refinement_stage: "none".into(),
            max_mask_fraction: 0.95,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn inpaint_params(&self) -> InpaintParams {
        InpaintParams {
            patch_radius: self.patch_radius,
            pm_iterations: self.pm_iterations,
            em_iterations: self.em_iterations,
            pyramid_min: self.pyramid_min,
        }
    }

    pub fn tre_params(&self) -> TreParams {
        TreParams {
            kappa: self.kappa,
            kappa_scale: self.kappa_scale,
            conduction: self.conduction,
            diffusion_iterations: self.diffusion_iterations,
            diffusion_step: self.diffusion_step,
            band_width: self.band_width,
            looks: self.looks,
            drift_alpha: self.drift_alpha,
            drift_box: self.drift_box,
            ring_width: self.ring_width,
            speckle: self.speckle,
            drift: self.drift,
            perturb_scope: self.perturb_scope,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.inpaint_params().validate()?;
        self.tre_params().validate()?;
        if self.drift_box < 3 && self.drift {
            return Err(Error::Config("drift_box must be at least 3".into()));
        }
        if !(0.0..=1.0).contains(&self.vessel_remove_prob) {
            return Err(Error::Config("vessel_remove_prob must lie in [0, 1]".into()));
        }
        if !(self.vessel_shift_min >= 0.0 && self.vessel_shift_min <= self.vessel_shift_max) {
            return Err(Error::Config("need 0 ≤ vessel_shift_min ≤ vessel_shift_max".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config("split_fraction must lie in (0, 1)".into()));
        }
        if self.vessel_label > crate::raster::MAX_LABEL || self.vessel_label == LabelMask::OIL {
            return Err(Error::Config(format!(
                "vessel_label {} is not a valid non-oil class",
                self.vessel_label
            )));
        }
        if !(self.max_mask_fraction > 0.0 && self.max_mask_fraction <= 1.0) {
            return Err(Error::Config("max_mask_fraction must lie in (0, 1]".into()));
        }
        super::refinement::lookup(&self.refinement_stage)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
