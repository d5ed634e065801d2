use proptest::prelude::*;
use retarget_core::steerable::{
    decompose, deemphasize, deemphasize_plane, su_retarget, subband_saliency, texture_contrast,
    SteerablePyramid, TextureConfig,
};
use retarget_core::synth;
use retarget_core::{Grid, Image, RoiMask};

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (16usize..48, 16usize..48).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0..1.0f64, w * h)
            .prop_map(move |d| Grid::from_vec(w, h, d).unwrap())
    })
}

fn rms(a: &Grid, b: &Grid) -> f64 {
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    (s / a.len() as f64).sqrt()
}

fn energy(g: &Grid) -> f64 {
    g.data().iter().map(|v| v * v).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_inverts_decomposition(g in grid_strategy(), orientations in 1usize..6) {
        let pyr = decompose(&g, 3, orientations).unwrap();
        prop_assert!(rms(&g, &pyr.reconstruct()) <= 0.01);
    }

    #[test]
    fn local_content_is_non_negative(g in grid_strategy()) {
        let cfg = TextureConfig { levels: 3, ..Default::default() };
        let sal = subband_saliency(&decompose(&g, 3, 4).unwrap(), &cfg).unwrap();
        prop_assert!(sal.local.iter().all(|l| l.data().iter().all(|&v| v >= 0.0)));
        prop_assert!(sal.contrast.iter().all(|c| c.data().iter().all(|v| v.is_finite())));
    }

    #[test]
    fn stronger_lambda_never_grows_coefficients(g in grid_strategy(), lo in 0.0..2.0f64, extra in 0.0..3.0f64) {
        let cfg = TextureConfig { levels: 3, ..Default::default() };
        let pyr = decompose(&g, 3, 4).unwrap();
        let sal = subband_saliency(&pyr, &cfg).unwrap();
        let weak = deemphasize(&pyr, &sal, None, lo, (0.2, 1.0)).unwrap();
        let strong = deemphasize(&pyr, &sal, None, lo + extra, (0.2, 1.0)).unwrap();
        for (a, b) in weak.bands.iter().zip(&strong.bands) {
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!(y.abs() <= x.abs());
            }
        }
    }
}

#[test]
fn mid_band_sinusoid_lands_in_its_level() {
    let level = 1;
    let wavelength = SteerablePyramid::wavelength(level);
    let g = Grid::from_fn(128, 128, |x, _| {
        0.5 + 0.4 * (std::f64::consts::TAU * x as f64 / wavelength).sin()
    });
    let pyr = decompose(&g, 4, 4).unwrap();
    let total: f64 = pyr.bands.iter().map(energy).sum::<f64>() + energy(&pyr.highpass);
    let own: f64 = (0..4).map(|k| energy(pyr.band(level, k))).sum();
    assert!(own >= 0.8 * total, "{own} of {total}");
}

#[test]
fn scaling_stays_near_the_mask() {
    let scene = synth::texture_patch(3);
    let g = retarget_core::imaging::rgb_to_gray(&scene.image).unwrap();
    let cfg = TextureConfig::default();
    let out = deemphasize_plane(&g, Some(&scene.mask), &cfg).unwrap();
    let reach = scene.mask.dilate(48.0);
    let far = out
        .data()
        .iter()
        .zip(g.data())
        .zip(reach.data())
        .filter(|(_, &near)| !near)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(far <= 1e-4, "far change {far}");
}

#[test]
fn zero_texture_mask_is_left_alone() {
    let scene = synth::texture_patch(1);
    let empty_corner = RoiMask::from_fn(256, 256, |x, y| x < 24 && y < 24);
    let out = su_retarget(&scene.image, &empty_corner, &TextureConfig::default()).unwrap();
    for c in 0..3 {
        assert!(rms(out.plane(c), scene.image.plane(c)) <= 0.01);
    }
}

#[test]
fn textured_patch_loses_contrast() {
    let cfg = TextureConfig::default();
    let scene = synth::texture_patch(5);
    let out = su_retarget(&scene.image, &scene.mask, &cfg).unwrap();
    let before = texture_contrast(&scene.image, Some(&scene.mask), &cfg).unwrap();
    let after = texture_contrast(&out, Some(&scene.mask), &cfg).unwrap();
    assert!(after < 0.7 * before, "{before} -> {after}");
    assert!(out
        .planes()
        .iter()
        .all(|p| p.data().iter().all(|v| (0.0..=1.0).contains(v))));
}

#[test]
fn tiny_images_are_rejected() {
    let img = Image::rgb_filled(8, 8, [0.5; 3]);
    let mask = RoiMask::from_fn(8, 8, |x, _| x < 4);
    assert!(su_retarget(&img, &mask, &TextureConfig::default()).is_err());
}
