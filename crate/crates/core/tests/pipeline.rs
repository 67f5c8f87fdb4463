use std::fs;
use std::path::Path;

use spillsynth::dataset::{
    build_dataset, build_pair, dataset_stats, read_input_list, read_manifest, BuildOptions, InputScene, PipelineConfig,
    Split,
};
use spillsynth::io::{load_label_mask, load_raster_auto, save_label_mask, save_raster, RasterFormat};
use spillsynth::synthetic::{synthetic_scene, SceneSpec};
use spillsynth::{Error, LabelMask};

fn small_spec() -> SceneSpec {
    SceneSpec {
        width: 64,
        height: 64,
        spill_radius: (5, 9),
        vessels: 2,
        ..Default::default()
    }
}

fn fixture(dir: &Path, n: u64) -> Vec<InputScene> {
    let mut list = Vec::new();
    for s in 0..n {
        let (post, labels) = synthetic_scene(&small_spec(), s).unwrap();
        let id = format!("s{s:02}");
        save_raster(&post, &dir.join(format!("{id}.fras")), RasterFormat::FloatRaster).unwrap();
        save_label_mask(&labels, &dir.join(format!("{id}.png"))).unwrap();
        list.push(serde_json::json!({ "id": id, "post": format!("{id}.fras"), "labels": format!("{id}.png") }));
    }
    let path = dir.join("list.json");
    fs::write(&path, serde_json::to_string(&list).unwrap()).unwrap();
    read_input_list(&path).unwrap()
}

#[test]
fn ten_scene_build_splits_and_stats_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = fixture(tmp.path(), 10);
    let out = tmp.path().join("ds");
    let m = build_dataset(&inputs, &PipelineConfig::default(), &out, BuildOptions::default()).unwrap();
    assert_eq!(m.stats.train.pairs, 9);
    assert_eq!(m.stats.test.pairs, 1);
    assert_eq!(read_manifest(&out).unwrap(), m);
    assert_eq!(dataset_stats(&out).unwrap(), m.stats);
    for e in &m.scenes {
        let labels = load_label_mask(&out.join(&e.paths.labels)).unwrap();
        let pre = load_raster_auto(&out.join(&e.paths.pre)).unwrap();
        assert_eq!((pre.width(), pre.height()), (labels.width(), labels.height()));
        assert!(out.join(&e.paths.provenance).is_file());
        assert!(e
            .paths
            .pre
            .starts_with(if e.split == Split::Train { "train/" } else { "test/" }));
    }
}

#[test]
fn stored_gt_is_the_undilated_input_oil_mask() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = fixture(tmp.path(), 3);
    let out = tmp.path().join("ds");
    let m = build_dataset(&inputs, &PipelineConfig::default(), &out, BuildOptions::default()).unwrap();
    for e in &m.scenes {
        let input = load_label_mask(&tmp.path().join(format!("{}.png", e.id))).unwrap();
        let gt = spillsynth::io::load_binary_mask(&out.join(&e.paths.change_gt)).unwrap();
        assert_eq!(gt, input.class_mask(LabelMask::OIL));
    }
}

#[test]
fn split_is_stable_across_runs_and_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let inputs = fixture(tmp.path(), 6);
    let cfg = PipelineConfig {
        split_fraction: 0.5,
        master_seed: 42,
        ..Default::default()
    };
    let a = build_dataset(
        &inputs,
        &cfg,
        &tmp.path().join("a"),
        BuildOptions {
            jobs: 1,
            skip_invalid: false,
        },
    )
    .unwrap();
    let b = build_dataset(
        &inputs,
        &cfg,
        &tmp.path().join("b"),
        BuildOptions {
            jobs: 4,
            skip_invalid: false,
        },
    )
    .unwrap();
    assert_eq!(a, b);
    let pre = |d: &str| fs::read(tmp.path().join(d).join(&a.scenes[0].paths.pre)).unwrap();
    assert_eq!(pre("a"), pre("b"));
}

#[test]
fn duplicate_ids_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let mut inputs = fixture(tmp.path(), 2);
    inputs[1].id = inputs[0].id.clone();
    let err = build_dataset(
        &inputs,
        &PipelineConfig::default(),
        &tmp.path().join("ds"),
        BuildOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn unreadable_input_aborts_or_is_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let mut inputs = fixture(tmp.path(), 3);
    inputs[2].post = tmp.path().join("missing.fras");
    let out = tmp.path().join("ds");
    assert!(build_dataset(&inputs, &PipelineConfig::default(), &out, BuildOptions::default()).is_err());
    let opts = BuildOptions {
        jobs: 0,
        skip_invalid: true,
    };
    let m = build_dataset(&inputs, &PipelineConfig::default(), &out, opts).unwrap();
    assert_eq!(m.scenes.len(), 2);
    assert_eq!(m.skipped.len(), 1);
    assert_eq!(m.skipped[0].id, "s02");
}

#[test]
fn removed_vessels_do_not_survive_at_origin() {
    let spec = SceneSpec {
        width: 96,
        height: 96,
        vessels: 4,
        ..Default::default()
    };
    let cfg = PipelineConfig {
        vessel_remove_prob: 1.0,
        speckle: false,
        drift: false,
        ..Default::default()
    };
    for s in 0..5 {
        let (post, labels) = synthetic_scene(&spec, s).unwrap();
        let vessels = labels.class_mask(LabelMask::VESSEL);
        if vessels.none() {
            continue;
        }
        let pair = build_pair("v", &post, &labels, &cfg, s).unwrap();
        for c in vessels.coords() {
            assert_ne!(pair.pre.at(c), post.at(c), "seed {s}: vessel pixel survived at {c:?}");
        }
        let mean = |v: Vec<f32>| v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64;
        let vessel_mean = mean(post.values_in(&vessels));
        let fill_mean = mean(pair.pre.values_in(&vessels));
        assert!(
            fill_mean < 0.5 * vessel_mean,
            "seed {s}: fill {fill_mean} vs vessel {vessel_mean}"
        );
    }
}
