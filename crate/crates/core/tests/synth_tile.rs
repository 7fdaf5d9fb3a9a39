//! Generated tiles: byte stability, determinism across thread counts and
//! agreement of filtered labels with the generating truth.

use terralabel::labelgen::{filter_labels, harmonize_gl30};
use terralabel::raster::{decode_rbin, encode_rbin, RasterGrid};
use terralabel::synth::{gen_gl30, gen_scene, gen_truth, SceneLayers, SynthSpec};
use terralabel::{Taxonomy, UNCLASSIFIED};

fn layers_in_pool(spec: &SynthSpec, threads: usize) -> (Vec<u8>, SceneLayers) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let truth = gen_truth(spec).unwrap();
        let scene = gen_scene(&truth, spec, 3).unwrap();
        (encode_rbin(&truth.to_grid()), scene)
    })
}

fn all_grids(l: &SceneLayers) -> Vec<&RasterGrid> {
    l.bands.iter().chain([&l.scl, &l.cloud_conf]).collect()
}

#[test]
fn generation_ignores_thread_count() {
    let spec = SynthSpec {
        width: 96,
        height: 96,
        n_sites: 9,
        ..SynthSpec::reference(3)
    };
    let (t1, a) = layers_in_pool(&spec, 1);
    let (t4, b) = layers_in_pool(&spec, 4);
    assert_eq!(t1, t4);
    for (x, y) in all_grids(&a).into_iter().zip(all_grids(&b)) {
        assert_eq!(encode_rbin(x), encode_rbin(y));
    }
}

#[test]
fn generated_rasters_round_trip() {
    let spec = SynthSpec {
        width: 60,
        height: 48,
        n_sites: 7,
        ..SynthSpec::reference(8)
    };
    let truth = gen_truth(&spec).unwrap();
    let layers = gen_scene(&truth, &spec, 0).unwrap();
    let gl30 = gen_gl30(&truth, &spec, &Taxonomy::default()).unwrap();
    let mut grids = all_grids(&layers);
    let t = truth.to_grid();
    grids.push(&t);
    grids.push(&gl30);
    for g in grids {
        let bytes = encode_rbin(g);
        let back = decode_rbin(&bytes).unwrap();
        assert_eq!(&back, g);
        assert_eq!(encode_rbin(&back), bytes);
    }
}

#[test]
fn filtered_labels_track_truth() {
    let spec = SynthSpec::reference(42);
    let tax = Taxonomy::default();
    let truth = gen_truth(&spec).unwrap();
    let gl30 = gen_gl30(&truth, &spec, &tax).unwrap();
    let labels = harmonize_gl30(&gl30, &tax, truth.spec()).unwrap();

    let layers = gen_scene(&truth, &spec, 0).unwrap();
    let scl = terralabel::raster::resample_nearest(&layers.scl, truth.spec()).unwrap();
    let filtered = filter_labels(&labels, &scl, &tax).unwrap();

    let (mut labeled, mut wrong) = (0u64, 0u64);
    for (i, &c) in filtered.codes().iter().enumerate() {
        if c != UNCLASSIFIED {
            labeled += 1;
            wrong += (c != truth.get(i)) as u64;
        }
    }
    let rate = wrong as f64 / labeled as f64;
    assert!(labeled > 0);
    assert!(rate < 0.02, "filtered labels disagree with truth on {:.4} of {labeled} pixels", rate);
}
