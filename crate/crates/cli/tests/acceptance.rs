//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use retarget_core::imaging::{gaussian_blur, rgb_to_gray, rgb_to_hsv};
use retarget_core::iterative::{
    hagiwara_retarget, normalize_importance, optimize_blackbox, optimize_feedback, saliency_error,
    LoopConfig, OptimizeReport, SegmentModel, DEFAULT_BOUNDS,
};
use retarget_core::metrics::roi_saliency_ratio;
use retarget_core::roi::{
    hue_retarget, invert_center_surround, kim_retarget, kim_target, minimize_graph_energy,
    nguyen_retarget, rotate_retarget, rotation_saliency_curve, symmetric_kl, AngleDistribution,
    Candidate, CenterSurroundOperator, CurveConfig, InversionConfig, KimConfig, NguyenConfig,
    Palettes, PatchColor, PatchGraph, Similarity,
};
use retarget_core::steerable::{
    decompose, deemphasize, local_frequency, su_retarget, subband_saliency, texture_contrast,
    TextureConfig,
};
use retarget_core::synth::{self, rng};
use retarget_core::{compute_saliency, EngineConfig, Grid, Image, RoiMask};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn saliency(img: &Image) -> Grid {
    compute_saliency(img, &EngineConfig::default())
        .expect("saliency")
        .0
        .into_grid()
}

fn ratio(img: &Image, mask: &RoiMask) -> f64 {
    roi_saliency_ratio(&saliency(img), mask).expect("ratio")
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn popout() -> Verdict {
    let start = Instant::now();
    let mut wins = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..20u64 {
        let scene = if seed < 10 {
            synth::popout_color(seed)
        } else {
            synth::popout_orientation(seed)
        };
        let s = saliency(&scene.image);
        let target = s.mean_in(&scene.mask).unwrap();
        let best_other = scene
            .distractors
            .iter()
            .filter_map(|m| s.mean_in(m))
            .fold(0.0, f64::max);
        worst = worst.min(target / best_other.max(1e-12));
        if target > best_other {
            wins += 1;
        }
    }
    let t = start.elapsed();
    verdict(
        wins >= 19 && within(t, 60),
        format!("{wins}/20 singletons win, smallest margin x{worst:.2}, {t:.1?}"),
    )
}

fn brute_error(t: &[f64], s: &[f64]) -> f64 {
    let st: f64 = t.iter().sum();
    let ss: f64 = s.iter().sum();
    let mut acc = 0.0;
    for i in 0..t.len() {
        acc += (t[i] * ss - s[i] * st).abs();
    }
    acc / (st * ss)
}

fn error_oracle() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for _ in 0..100 {
        let n = r.random_range(2..12);
        let t: Vec<f64> = (0..n).map(|_| r.random_range(0.01..5.0)).collect();
        let s: Vec<f64> = (0..n).map(|_| r.random_range(0.0..5.0)).collect();
        let e = saliency_error(&t, &s).unwrap();
        worst = worst.max((e - brute_error(&t, &s)).abs());
        let c = 2f64.powi(r.random_range(-30..30));
        let ct: Vec<f64> = t.iter().map(|v| v * c).collect();
        exact &= normalize_importance(&ct).unwrap() == normalize_importance(&t).unwrap();
        exact &= saliency_error(&ct, &s).unwrap() == e;
    }
    verdict(
        worst <= 1e-12 && exact,
        format!("max deviation {worst:.1e}, scale invariance exact: {exact}"),
    )
}

fn random_image(seed: u64) -> Grid {
    let mut r = rng(seed);
    let w = r.random_range(64..=128);
    let h = r.random_range(64..=128);
    let noise = Grid::from_fn(w, h, |_, _| r.random_range(0.0..1.0));
    if seed % 2 == 0 {
        noise
    } else {
        gaussian_blur(&noise, 1.0 + (seed % 5) as f64 * 0.5).peak_normalized()
    }
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

/// RMS of `ln L' - (ln L - max(H, 0))` where `L > 0.01`, with `L'` the local
/// content recomputed from unclamped scaled bands.
fn log_identity_rms(g: &Grid, cfg: &TextureConfig) -> f64 {
    let pyr = decompose(g, cfg.levels, cfg.orientations).unwrap();
    let sal = subband_saliency(&pyr, cfg).unwrap();
    let out = deemphasize(&pyr, &sal, None, 1.0, (0.0, f64::INFINITY)).unwrap();
    let (mut se, mut n) = (0.0, 0usize);
    for (b, band) in out.bands.iter().enumerate() {
        let after = local_frequency(band, cfg.local_sigma(b / cfg.orientations));
        for i in 0..after.len() {
            let before = sal.local[b].data()[i];
            if before > 0.01 {
                let h = sal.contrast[b].data()[i].max(0.0);
                se += (after.data()[i].ln() - (before.ln() - h)).powi(2);
                n += 1;
            }
        }
    }
    (se / n.max(1) as f64).sqrt()
}

fn steerable_round_trip() -> Verdict {
    let start = Instant::now();
    let cfg = TextureConfig::default();
    let mut worst_rt: f64 = 0.0;
    let mut worst_log: f64 = 0.0;
    for seed in 0..50u64 {
        let g = random_image(seed);
        let pyr = decompose(&g, cfg.levels, cfg.orientations).unwrap();
        worst_rt = worst_rt.max(rms(&g, &pyr.reconstruct()));
        worst_log = worst_log.max(log_identity_rms(&g, &cfg));
    }
    let t = start.elapsed();
    let structured = log_identity_rms(&rgb_to_gray(&synth::texture_patch(0).image).unwrap(), &cfg);
    println!("      info: log identity on a texture-patch scene (sharp texture edges): {structured:.3} RMS");
    verdict(
        worst_rt <= 0.01 && worst_log <= 0.05 && within(t, 120),
        format!(
            "round trip {worst_rt:.1e}, log identity {worst_log:.3} RMS (worst of 50), {t:.1?}"
        ),
    )
}

fn texture_deemphasis() -> Verdict {
    let cfg = TextureConfig::default();
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let scene = synth::texture_patch(seed);
        let out = su_retarget(&scene.image, &scene.mask, &cfg).unwrap();
        let before = texture_contrast(&scene.image, Some(&scene.mask), &cfg).unwrap();
        let after = texture_contrast(&out, Some(&scene.mask), &cfg).unwrap();
        let shrink = after / before;
        worst = worst.max(shrink);
        if shrink <= 0.7 && ratio(&out, &scene.mask) < ratio(&scene.image, &scene.mask) {
            ok += 1;
        }
    }
    verdict(
        ok == 10,
        format!("{ok}/10 scenes, largest contrast ratio after/before {worst:.3}"),
    )
}

fn strictly_decreasing(r: &OptimizeReport) -> bool {
    r.accepted_errors.first() == Some(&r.initial_error)
        && r.accepted_errors.windows(2).all(|w| w[1] < w[0])
        && r.final_error < r.initial_error
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn optimizer_contract() -> Verdict {
    let mut engine = EngineConfig::default();
    engine.spatial_frequency_weight = 1.0;
    engine.texture.levels = 2;
    let cfg = LoopConfig {
        max_iterations: 80,
        ..LoopConfig::default()
    };
    let mut ok = 0;
    let (mut black, mut feed) = (Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let n = 2 + seed as usize % 3;
        let scene = synth::segment_strips(seed, n);
        let seg = SegmentModel::new(&scene.labels, scene.targets.clone(), DEFAULT_BOUNDS).unwrap();
        let (_, b) = optimize_blackbox(&scene.image, &seg, &engine, &cfg).unwrap();
        let (_, f) = optimize_feedback(&scene.image, &seg, &engine, &cfg).unwrap();
        if strictly_decreasing(&b) && strictly_decreasing(&f) {
            ok += 1;
        }
        black.push(b.iterations);
        feed.push(f.iterations);
    }
    let (mb, mf) = (median(black), median(feed));
    verdict(
        ok == 10 && mf <= mb,
        format!("{ok}/10 runs decrease strictly, median iterations feedback {mf} vs blackbox {mb}"),
    )
}

fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as i64;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Dense matrix of the replicated-border center-surround operator.
fn dense_operator(w: usize, h: usize, sc: f64, ss: f64, radius: usize) -> Vec<Vec<f64>> {
    let c = gaussian_taps(sc, radius);
    let s = gaussian_taps(ss, radius);
    let r = radius as i64;
    let n = w * h;
    let mut m = vec![vec![0.0; n]; n];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let row = (y * w as i64 + x) as usize;
            for dy in -r..=r {
                for dx in -r..=r {
                    let sx = (x + dx).clamp(0, w as i64 - 1);
                    let sy = (y + dy).clamp(0, h as i64 - 1);
                    let (ix, iy) = ((dx + r) as usize, (dy + r) as usize);
                    m[row][(sy * w as i64 + sx) as usize] += c[ix] * c[iy] - s[ix] * s[iy];
                }
            }
        }
    }
    m
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn dense_regularized(c: &[Vec<f64>], target: &[f64], reg: f64) -> Vec<f64> {
    let n = target.len();
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            ata[i][j] = (0..n).map(|k| c[k][i] * c[k][j]).sum();
        }
        ata[i][i] += reg;
        atb[i] = (0..n).map(|k| c[k][i] * target[k]).sum();
    }
    solve_dense(ata, atb)
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn inversion_oracle() -> Verdict {
    let tight = InversionConfig {
        reg: 1e-3,
        max_iterations: 2000,
        tolerance: 1e-13,
        ..InversionConfig::default()
    };
    let mut r = rng(6);
    let line = Grid::from_fn(16, 1, |_, _| r.random_range(-1.0..1.0));
    let op1 = CenterSurroundOperator::with_radius(1.0, 1.6, 2).unwrap();
    let got1 = invert_center_surround(&line, &op1, &tight).unwrap();
    let want1 = dense_regularized(&dense_operator(16, 1, 1.0, 1.6, 2), line.data(), 1e-3);
    let gap1 = relative_gap(got1.raw.data(), &want1);

    let plane = Grid::from_fn(16, 16, |_, _| r.random_range(-1.0..1.0));
    let op2 = CenterSurroundOperator::new(1.0, 1.6).unwrap();
    let got2 = invert_center_surround(&plane, &op2, &tight).unwrap();
    let want2 = dense_regularized(
        &dense_operator(16, 16, 1.0, 1.6, op2.radius()),
        plane.data(),
        1e-3,
    );
    let gap2 = relative_gap(got2.raw.data(), &want2);

    let kim = KimConfig::default();
    let op = kim.operator().unwrap();
    let worst_res = (0..10u64)
        .map(|seed| {
            let t = kim_target(&synth::gray_roi(seed).mask).unwrap();
            invert_center_surround(&t, &op, &kim.inversion)
                .unwrap()
                .forward_residual
        })
        .fold(0.0, f64::max);
    verdict(
        gap1 <= 1e-6 && gap2 <= 1e-6 && worst_res <= 0.05,
        format!("1-D gap {gap1:.1e}, 2-D gap {gap2:.1e}, default forward residual {worst_res:.4}"),
    )
}

fn kl_by_hand(p: &[f64], q: &[f64]) -> f64 {
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..p.len() {
        a += p[i] * (p[i] / q[i]).ln();
        b += q[i] * (q[i] / p[i]).ln();
    }
    a + b
}

fn rotation_curve_oracle() -> Verdict {
    let n = 180;
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let near = |c: f64| {
                let d = (i as f64 - c).rem_euclid(180.0);
                let d = d.min(180.0 - d);
                (-d * d / 200.0).exp()
            };
            near(0.0) + near(90.0)
        })
        .collect();
    let p = AngleDistribution::from_weights(&weights, 180.0, 1e-4).unwrap();
    let curve = rotation_saliency_curve(&p, &p).unwrap();
    let bins = p.bins();
    let brute: Vec<f64> = (0..n)
        .map(|k| {
            let shifted: Vec<f64> = (0..n).map(|i| bins[(i + n - k) % n]).collect();
            kl_by_hand(&shifted, bins)
        })
        .collect();
    let top = brute.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let maxima: Vec<f64> = (0..n)
        .filter(|&k| brute[k] >= top * (1.0 - 1e-12))
        .map(|k| k as f64)
        .collect();
    let agree = curve
        .divergence
        .iter()
        .zip(&brute)
        .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
    let (phi, _) = curve.argmax();
    let argmax_ok = (phi == 45.0 || phi == 135.0)
        && maxima.iter().all(|m| *m == 45.0 || *m == 135.0)
        && maxima.contains(&phi);

    let mut r = rng(7);
    let mut zero = true;
    let mut periodic = true;
    for _ in 0..20 {
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let q = AngleDistribution::from_weights(&w, 180.0, 1e-4).unwrap();
        let w2: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let s = AngleDistribution::from_weights(&w2, 180.0, 1e-4).unwrap();
        zero &= rotation_saliency_curve(&q, &q).unwrap().divergence[0] == 0.0;
        for k in 0..n as isize {
            periodic &= symmetric_kl(&q.shifted(k), &s).unwrap()
                == symmetric_kl(&q.shifted(k + n as isize), &s).unwrap();
        }
    }
    verdict(
        agree && argmax_ok && zero && periodic,
        format!(
            "argmax {phi} (exhaustive maxima {maxima:?}), matches enumeration: {agree}, D(0)=0: {zero}, period 180 exact: {periodic}"
        ),
    )
}

fn random_color(r: &mut impl Rng) -> PatchColor {
    PatchColor::new(
        r.random_range(0.0..360.0),
        r.random_range(0.0..1.0),
        r.random_range(0.0..1.0),
    )
}

fn icm_oracle() -> Verdict {
    let mut r = rng(8);
    let shapes = [(1, 2), (1, 3), (2, 2), (1, 4)];
    let (mut exact, mut close, mut monotone) = (0, 0, true);
    for _ in 0..20 {
        let (rows, cols) = shapes[r.random_range(0..shapes.len())];
        let n = rows * cols;
        let originals: Vec<PatchColor> = (0..n).map(|_| random_color(&mut r)).collect();
        let candidates: Vec<Vec<PatchColor>> = (0..n)
            .map(|_| {
                let k = r.random_range(2..=4);
                (0..k).map(|_| random_color(&mut r)).collect()
            })
            .collect();
        let context: Vec<PatchColor> = (0..3).map(|_| random_color(&mut r)).collect();
        let mut edges = Vec::new();
        for y in 0..rows {
            for x in 0..cols {
                let i = y * cols + x;
                if x + 1 < cols {
                    edges.push((i, i + 1));
                }
                if y + 1 < rows {
                    edges.push((i, i + cols));
                }
            }
        }
        let lambda = r.random_range(0.1..1.0);
        let g = PatchGraph::new(
            originals,
            candidates.clone(),
            context,
            &edges,
            lambda,
            Similarity::default(),
        )
        .unwrap();
        let mut best = f64::INFINITY;
        let mut a = vec![0usize; n];
        loop {
            best = best.min(g.energy(&a).unwrap());
            let mut i = 0;
            while i < n {
                a[i] += 1;
                if a[i] < candidates[i].len() {
                    break;
                }
                a[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        let icm = minimize_graph_energy(&g, 100);
        let e = *icm.energies.last().unwrap();
        monotone &= icm.energies.windows(2).all(|w| w[1] <= w[0]);
        if (e - best).abs() <= 1e-9 * best.abs().max(1.0) {
            exact += 1;
        }
        if e - best <= 0.05 * best.abs() {
            close += 1;
        }
    }
    verdict(
        exact >= 16 && close == 20 && monotone,
        format!(
            "optimal on {exact}/20, within 5% on {close}/20, energy non-increasing: {monotone}"
        ),
    )
}

fn camouflage_palettes(img: &Image) -> Palettes {
    let hsv = rgb_to_hsv(img).unwrap();
    let bg = hsv.plane(0).get(0, 0) * 360.0;
    let mut palettes = Palettes::new();
    for label in 1..=2 {
        palettes.insert(
            label,
            vec![
                Candidate {
                    name: "same".into(),
                    color: PatchColor::new(bg, 0.7, 0.65),
                },
                Candidate {
                    name: "opposite".into(),
                    color: PatchColor::new(bg + 180.0, 0.7, 0.65),
                },
            ],
        );
    }
    palettes
}

fn end_to_end_gains() -> Verdict {
    let start = Instant::now();
    let mut wins = [0usize; 5];
    for seed in 0..10u64 {
        let s = synth::gray_roi(seed);
        let (out, _) = kim_retarget(&s.image, &s.mask, &KimConfig::default()).unwrap();
        wins[0] += usize::from(ratio(&out, &s.mask) > ratio(&s.image, &s.mask));

        let (out, rep) =
            hagiwara_retarget(&s.image, &s.mask, 0.05, 5, &EngineConfig::default()).unwrap();
        wins[1] += usize::from(ratio(&out, &s.mask) > rep.ratio_before);

        let s = synth::tile_floor(seed);
        let o = rotate_retarget(&s.image, &s.mask, &CurveConfig::orientation()).unwrap();
        wins[2] += usize::from(ratio(&o.image, &s.mask) > ratio(&s.image, &s.mask));

        let s = synth::hue_field(seed);
        let o = hue_retarget(&s.image, &s.mask, &CurveConfig::hue()).unwrap();
        wins[3] += usize::from(ratio(&o.image, &s.mask) > ratio(&s.image, &s.mask));

        let (s, labels) = synth::camouflage(seed, 2);
        let o = nguyen_retarget(
            &s.image,
            &s.mask,
            Some(&labels),
            &camouflage_palettes(&s.image),
            &NguyenConfig::default(),
        )
        .unwrap();
        wins[4] += usize::from(ratio(&o.image, &s.mask) > ratio(&s.image, &s.mask));
    }
    let t = start.elapsed();
    verdict(
        wins.iter().all(|&w| w >= 9) && within(t, 600),
        format!(
            "kim {}/10, hagiwara {}/10, rotate {}/10, hue {}/10, nguyen {}/10, {t:.1?}",
            wins[0], wins[1], wins[2], wins[3], wins[4]
        ),
    )
}

const DETERMINISM_CONFIG: &str = r#"
seed = 3
emit_debug = true

[iterative]
max_iterations = 4

[hagiwara]
iterations = 3

[texture]
levels = 3

[nguyen.candidates.1]
teal = [180.0, 0.7, 0.6]
ochre = [40.0, 0.7, 0.6]

[nguyen.candidates.2]
violet = [280.0, 0.6, 0.7]
"#;

const DETERMINISM_RUNS: [(&str, &str); 9] = [
    ("saliency", "synth:popout-color"),
    ("iterative", "synth:segment-strips"),
    ("feedback", "synth:segment-strips"),
    ("hagiwara", "synth:gray-roi"),
    ("texture", "synth:texture-patch"),
    ("kim", "synth:gray-roi"),
    ("rotate", "synth:tile-floor"),
    ("hue", "synth:hue-field"),
    ("nguyen", "synth:camouflage"),
];

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn cli_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    std::fs::write(&config, DETERMINISM_CONFIG).unwrap();
    let mut failures = Vec::new();
    let mut compared = 0;
    for (method, input) in DETERMINISM_RUNS {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let dir = tmp.path().join(format!("{method}-{attempt}"));
            let status = Command::new(env!("CARGO_BIN_EXE_retarget"))
                .arg(method)
                .arg("--config")
                .arg(&config)
                .arg("--input")
                .arg(input)
                .arg("--output")
                .arg(&dir)
                .output()
                .unwrap();
            if !status.status.success() {
                failures.push(format!(
                    "{method} failed: {}",
                    String::from_utf8_lossy(&status.stderr).trim()
                ));
            }
            outputs.push(if dir.is_dir() {
                files_under(&dir)
            } else {
                Vec::new()
            });
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            failures.push(format!("{method} artifacts differ"));
        }
        compared += outputs[0].len();
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("9 methods, {compared} artifacts byte-identical across reruns")
        } else {
            failures.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("pop-out fidelity", popout),
        ("saliency error oracle", error_oracle),
        ("steerable round trip", steerable_round_trip),
        ("texture de-emphasis", texture_deemphasis),
        ("optimizer contract", optimizer_contract),
        ("inversion oracle", inversion_oracle),
        ("rotation curve oracle", rotation_curve_oracle),
        ("graph energy oracle", icm_oracle),
        ("end-to-end gains", end_to_end_gains),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
