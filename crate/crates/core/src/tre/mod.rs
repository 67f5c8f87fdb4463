//! Temporal realism enhancement: radiometric alignment of the filled region to its
//! surroundings, seam diffusion, and statistical perturbations of the whole view.

mod diffusion;
mod histogram;
mod noise;

pub use diffusion::{perona_malik, Conduction, KappaScale};
pub use histogram::{histogram_match, QuantileMap};
pub use noise::{box_filter, compose_pre_event, sample_drift, sample_speckle, DriftField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{band, exterior_ring};
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;
use crate::seed::{self, stage};

/// Where speckle and drift are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PerturbScope {
    #[default]
    Global,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreParams {
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
}

impl Default for TreParams {
    fn default() -> Self {
        Self {
            kappa: 15.0,
            kappa_scale: KappaScale::Auto,
            conduction: Conduction::Exponential,
            diffusion_iterations: 20,
            diffusion_step: 0.25,
            band_width: 5,
            looks: 4,
            drift_alpha: 0.05,
            drift_box: 51,
            ring_width: 5,
            speckle: true,
            drift: true,
            perturb_scope: PerturbScope::Global,
        }
    }
}

impl TreParams {
    /// Alignment and diffusion only; speckle and drift off.
    pub fn deterministic() -> Self {
        Self {
            speckle: false,
            drift: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion_step > 0.0 && self.diffusion_step <= 0.25) {
            return Err(Error::Config(format!(
                "diffusion_step {} outside (0, 0.25]",
                self.diffusion_step
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config("kappa must be positive".into()));
        }
        if self.looks == 0 {
            return Err(Error::Config("looks must be ≥ 1".into()));
        }
        if self.drift_box.is_multiple_of(2) {
            return Err(Error::Config(format!("drift_box {} must be odd", self.drift_box)));
        }
        if !(self.drift_alpha >= 0.0 && self.drift_alpha.is_finite()) {
            return Err(Error::Config("drift_alpha must be ≥ 0".into()));
        }
        if self.band_width == 0 || self.ring_width == 0 {
            return Err(Error::Config("band_width and ring_width must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Perona–Malik diffusion over `domain` with κ resolved against the image scale.
pub fn anisotropic_diffusion<T: Scalar>(image: &Raster<T>, domain: &BinaryMask, params: &TreParams) -> Raster<T> {
    let kappa = params.kappa_scale.effective_kappa(params.kappa, image);
    perona_malik(
        image,
        domain,
        kappa,
        params.conduction,
        params.diffusion_step,
        params.diffusion_iterations,
    )
}

/// Pixels of Ω within `band_width` of its boundary.
pub fn diffusion_domain(omega: &BinaryMask, band_width: u32) -> BinaryMask {
    band(omega, band_width).intersection(omega)
}

/// Histogram matching against the exterior ring, seam diffusion over the part of Ω within
/// `band_width` of its boundary, then speckle and drift. All randomness derives from
/// `rng_seed`. With speckle and drift off, nothing outside Ω changes.
pub fn tre_apply<T: Scalar>(
    inpainted: &Raster<T>,
    omega: &BinaryMask,
    params: &TreParams,
    rng_seed: u64,
) -> Result<Raster<T>> {
    params.validate()?;
    if !inpainted.matches(omega) {
        return Err(Error::Dimensions("image and Ω differ".into()));
    }
    let (w, h) = (inpainted.width(), inpainted.height());
    let mut img = inpainted.clone();

    if !omega.none() {
        let ring = exterior_ring(omega, params.ring_width);
        if ring.saturated {
            return Err(Error::Precondition("Ω covers the whole image".into()));
        }
        img = histogram_match(&img, omega, &ring.mask)?;
        let domain = diffusion_domain(omega, params.band_width);
        img = anisotropic_diffusion(&img, &domain, params);
    }

    if !params.speckle && !params.drift {
        return Ok(img);
    }
    let speckle = if params.speckle {
        sample_speckle(w, h, params.looks, seed::key(&[rng_seed, stage::TRE, 0]))?
    } else {
        Raster::filled(w, h, T::one())
    };
    let drift = if params.drift {
        sample_drift(w, h, params.drift_box, seed::key(&[rng_seed, stage::TRE, 1]))?
    } else {
        DriftField::zeros(w, h)
    };
    let composed = compose_pre_event(&img, &speckle, &drift, params.drift_alpha)?;
    Ok(match params.perturb_scope {
        PerturbScope::Global => composed,
        PerturbScope::Omega => img.blend_masked(&composed, omega),
    })
}
