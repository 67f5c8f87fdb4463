use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::pair::{build_pair, ScenePair};
use crate::error::{Error, Result};
use crate::io::{load_label_mask, load_raster_auto, save_binary_mask, save_label_mask, save_raster, RasterFormat};
use crate::raster::LabelMask;
use crate::seed::{self, stage};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// One entry of the input list: a post-event image and its labels. Relative paths resolve
/// against the list file's directory. A missing id defaults to the post file stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputScene {
    #[serde(default)]
    pub id: Option<String>,
    pub post: PathBuf,
    pub labels: PathBuf,
}

impl InputScene {
    pub fn resolved_id(&self) -> Result<String> {
        let id = match &self.id {
            Some(id) => id.clone(),
            None => self
                .post
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| Error::Precondition(format!("{}: cannot derive a scene id", self.post.display())))?,
        };
        let valid = !id.is_empty()
            && id != "."
            && id != ".."
            && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !valid {
            return Err(Error::Precondition(format!(
                "scene id {id:?} must be nonempty and use only [A-Za-z0-9._-]"
            )));
        }
        Ok(id)
    }
}

/// Read a JSON array of [`InputScene`], resolving relative paths.
pub fn read_input_list(path: &Path) -> Result<Vec<InputScene>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut scenes: Vec<InputScene> = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    for s in &mut scenes {
        s.post = base.join(&s.post);
        s.labels = base.join(&s.labels);
    }
    Ok(scenes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn dir(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenePaths {
    pub pre: String,
    pub post: String,
    pub change_gt: String,
    pub labels: String,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: String,
    pub split: Split,
    pub seed: u64,
    pub paths: ScenePaths,
    pub oil_pixels: u64,
    pub total_pixels: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub pairs: usize,
    pub oil_pixels: u64,
    pub total_pixels: u64,
    /// oil_pixels / total_pixels (0 for an empty split).
    pub oil_ratio: f64,
}

impl SplitStats {
    fn add(&mut self, oil: u64, total: u64) {
        self.pairs += 1;
        self.oil_pixels += oil;
        self.total_pixels += total;
        self.oil_ratio = if self.total_pixels == 0 {
            0.0
        } else {
            self.oil_pixels as f64 / self.total_pixels as f64
        };
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub train: SplitStats,
    pub test: SplitStats,
}

impl DatasetStats {
    pub fn from_entries(entries: &[SceneEntry]) -> Self {
        let mut stats = Self::default();
        for e in entries {
            let s = match e.split {
                Split::Train => &mut stats.train,
                Split::Test => &mut stats.test,
            };
            s.add(e.oil_pixels, e.total_pixels);
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedScene {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub config: PipelineConfig,
    pub config_hash: String,
    pub scenes: Vec<SceneEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedScene>,
    pub stats: DatasetStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    /// Log and skip scenes that fail to load or are rejected instead of aborting.
    pub skip_invalid: bool,
}

/// Seeded split of sorted ids: Fisher–Yates, then the first `round(n · fraction)` go to train.
pub fn assign_splits(ids: &[String], fraction: f64, master_seed: u64) -> BTreeMap<String, Split> {
    let mut order: Vec<&String> = ids.iter().collect();
    order.sort();
    for i in (1..order.len()).rev() {
        let j = seed::below(&[master_seed, stage::SPLIT, i as u64], i + 1);
        order.swap(i, j);
    }
    let n_train = ((order.len() as f64 * fraction).round() as usize).min(order.len());
    order
        .into_iter()
        .enumerate()
        .map(|(k, id)| (id.clone(), if k < n_train { Split::Train } else { Split::Test }))
        .collect()
}

fn write_scene(out: &Path, split: Split, pair: &ScenePair) -> Result<ScenePaths> {
    let rel = format!("{}/{}", split.dir(), pair.scene_id);
    let dir = out.join(&rel);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    save_raster(&pair.pre, &dir.join("pre.fras"), RasterFormat::FloatRaster)?;
    save_raster(&pair.post, &dir.join("post.fras"), RasterFormat::FloatRaster)?;
    save_binary_mask(&pair.change_gt, &dir.join("change_gt.png"))?;
    save_label_mask(&pair.labels, &dir.join("labels.png"))?;
    let prov = dir.join("provenance.json");
    let json = serde_json::to_string_pretty(&pair.provenance).expect("provenance serializes");
    fs::write(&prov, json + "\n").map_err(|e| Error::io(&prov, e))?;
    Ok(ScenePaths {
        pre: format!("{rel}/pre.fras"),
        post: format!("{rel}/post.fras"),
        change_gt: format!("{rel}/change_gt.png"),
        labels: format!("{rel}/labels.png"),
        provenance: format!("{rel}/provenance.json"),
    })
}

fn process_scene(
    input: &InputScene,
    id: &str,
    split: Split,
    config: &PipelineConfig,
    out: &Path,
) -> Result<SceneEntry> {
    let post = load_raster_auto(&input.post)?;
    let labels = load_label_mask(&input.labels)?;
    let scene_seed = seed::derive_named(config.master_seed, id);
    let pair = build_pair(id, &post, &labels, config, scene_seed)?;
    let paths = write_scene(out, split, &pair)?;
    Ok(SceneEntry {
        id: id.to_string(),
        split,
        seed: scene_seed,
        paths,
        oil_pixels: pair.change_gt.count() as u64,
        total_pixels: pair.change_gt.len() as u64,
    })
}

fn skippable(e: &Error) -> bool {
    !matches!(e, Error::Invariant(_))
}

/// Build every scene in `inputs` into `out` and write `out/manifest.json`.
///
/// Outputs do not depend on `options.jobs`: every scene draws only from its own seed.
pub fn build_dataset(
    inputs: &[InputScene],
    config: &PipelineConfig,
    out: &Path,
    options: BuildOptions,
) -> Result<DatasetManifest> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::Precondition("input list is empty".into()));
    }
    let ids = inputs.iter().map(InputScene::resolved_id).collect::<Result<Vec<_>>>()?;
    let mut seen = BTreeSet::new();
    for id in &ids {
        if !seen.insert(id) {
            return Err(Error::Precondition(format!("duplicate scene id {id:?}")));
        }
    }
    let splits = assign_splits(&ids, config.split_fraction, config.master_seed);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    let results: Vec<Result<SceneEntry>> = pool.install(|| {
        inputs
            .par_iter()
            .zip(&ids)
            .map(|(input, id)| {
                let r = process_scene(input, id, splits[id], config, out);
                match &r {
                    Ok(_) => log::info!("{id}: done"),
                    Err(e) => log::warn!("{id}: {e}"),
                }
                r
            })
            .collect()
    });

    let mut scenes = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in ids.iter().zip(results) {
        match r {
            Ok(entry) => scenes.push(entry),
            Err(e) if options.skip_invalid && skippable(&e) => skipped.push(SkippedScene {
                id: id.clone(),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    scenes.sort_by(|a, b| a.id.cmp(&b.id));
    if scenes.is_empty() {
        return Err(Error::Degenerate("every scene was skipped".into()));
    }
    check_leakage(&scenes)?;

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        config: config.clone(),
        config_hash: config.hash(),
        stats: DatasetStats::from_entries(&scenes),
        scenes,
        skipped,
    };
    let path = out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn check_leakage(scenes: &[SceneEntry]) -> Result<()> {
    let ids = |s: Split| -> BTreeSet<&str> { scenes.iter().filter(|e| e.split == s).map(|e| e.id.as_str()).collect() };
    let (train, test) = (ids(Split::Train), ids(Split::Test));
    if let Some(id) = train.intersection(&test).next() {
        return Err(Error::Invariant(format!("scene {id:?} appears in both splits")));
    }
    if train.len() + test.len() != scenes.len() {
        return Err(Error::Invariant("duplicate scene ids in manifest".into()));
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path, source })
}

/// Recompute per-split statistics from the stored label PNGs and check them against the
/// manifest's cached values.
pub fn dataset_stats(dir: &Path) -> Result<DatasetStats> {
    let manifest = read_manifest(dir)?;
    check_leakage(&manifest.scenes)?;
    let mut recomputed = Vec::with_capacity(manifest.scenes.len());
    for e in &manifest.scenes {
        for p in [&e.paths.pre, &e.paths.post, &e.paths.change_gt, &e.paths.provenance] {
            let f = dir.join(p);
            if !f.is_file() {
                return Err(Error::io(&f, std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        let labels = load_label_mask(&dir.join(&e.paths.labels))?;
        recomputed.push(SceneEntry {
            oil_pixels: labels.count(LabelMask::OIL) as u64,
            total_pixels: (labels.width() * labels.height()) as u64,
            ..e.clone()
        });
    }
    let stats = DatasetStats::from_entries(&recomputed);
    if stats != manifest.stats {
        return Err(Error::Invariant(format!(
            "stored labels give {stats:?} but the manifest records {:?}",
            manifest.stats
        )));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("scene_{i:03}")).collect()
    }

    #[test]
    fn ten_scenes_split_nine_one() {
        let s = assign_splits(&ids(10), 0.9, 0);
        assert_eq!(s.values().filter(|&&v| v == Split::Train).count(), 9);
        assert_eq!(s.values().filter(|&&v| v == Split::Test).count(), 1);
    }

    #[test]
    fn corpus_sized_split() {
        let s = assign_splits(&ids(879), 0.9, 0);
        assert_eq!(s.values().filter(|&&v| v == Split::Train).count(), 791);
        assert_eq!(s.values().filter(|&&v| v == Split::Test).count(), 88);
    }

    #[test]
    fn split_ignores_input_order_and_tracks_seed() {
        let a = ids(50);
        let mut b = a.clone();
        b.reverse();
        assert_eq!(assign_splits(&a, 0.8, 3), assign_splits(&b, 0.8, 3));
        assert_ne!(assign_splits(&a, 0.8, 3), assign_splits(&a, 0.8, 4));
    }

    #[test]
    fn single_scene_ratio() {
        let entry = SceneEntry {
            id: "a".into(),
            split: Split::Train,
            seed: 0,
            paths: ScenePaths {
                pre: String::new(),
                post: String::new(),
                change_gt: String::new(),
                labels: String::new(),
                provenance: String::new(),
            },
            oil_pixels: 1,
            total_pixels: 100,
        };
        let st = DatasetStats::from_entries(&[entry]);
        assert_eq!(st.train.oil_ratio, 0.01);
        assert_eq!(st.test, SplitStats::default());
    }

    #[test]
    fn ids_are_validated() {
        let bad = InputScene {
            id: Some("../x".into()),
            post: "p.fras".into(),
            labels: "l.png".into(),
        };
        assert!(bad.resolved_id().is_err());
        let stem = InputScene {
            id: None,
            post: "dir/scene_7.fras".into(),
            labels: "l.png".into(),
        };
        assert_eq!(stem.resolved_id().unwrap(), "scene_7");
    }
}
