//! Dataset construction: vessel perturbation, mask assembly, pre-event synthesis, packaging
//! and train/test splitting.

mod build;
mod config;
mod pair;
mod refinement;
mod vessels;

pub use build::{
    assign_splits, build_dataset, dataset_stats, read_input_list, read_manifest, BuildOptions, DatasetManifest,
    DatasetStats, InputScene, SceneEntry, ScenePaths, SkippedScene, Split, SplitStats, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use config::{PipelineConfig, CONFIG_VERSION};
pub use pair::{build_pair, Provenance, ScenePair, StageTimings, PROVENANCE_VERSION};
pub use refinement::{lookup as lookup_refinement, RefinementFn};
pub use vessels::{perturb_vessels, VesselAction, VesselMove, VesselPerturbation, MAX_SHIFT_DRAWS};
