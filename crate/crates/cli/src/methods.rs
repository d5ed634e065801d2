use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use retarget_core::imaging::io::{
    read_grid, read_image, read_labels, read_mask, write_atomic, write_grid, write_image, LabelMap,
};
use retarget_core::iterative::{
    hagiwara_retarget, optimize_blackbox, optimize_feedback, Bounds, Feature, LoopConfig,
    OptimizeReport, SegmentModel, DEFAULT_BOUNDS,
};
use retarget_core::metrics::{rms_change, roi_saliency_ratio, RetargetReport};
use retarget_core::roi::{
    hue_retarget, kim_retarget, nguyen_retarget, rotate_retarget, Candidate, CurveConfig,
    CurveOutcome, KimConfig, KimFeature, NguyenConfig, Palettes, PatchColor,
};
use retarget_core::saliency::FeatureSet;
use retarget_core::steerable::{
    su_retarget, texture_contrast, ContrastDomain, TextureChannels, TextureConfig,
};
use retarget_core::{compute_saliency, synth, EngineConfig, Image, RoiMask};
use serde::Serialize;
use serde_json::{json, Value};

use crate::settings::{read_into, Keys};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Saliency,
    Iterative,
    Feedback,
    Hagiwara,
    Texture,
    Kim,
    Rotate,
    Hue,
    Nguyen,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Saliency => "saliency",
            Method::Iterative => "iterative",
            Method::Feedback => "feedback",
            Method::Hagiwara => "hagiwara",
            Method::Texture => "texture",
            Method::Kim => "kim",
            Method::Rotate => "rotate",
            Method::Hue => "hue",
            Method::Nguyen => "nguyen",
        }
    }
}

/// Everything a run needs, resolved from config file, overrides and flags.
#[derive(Debug)]
pub struct RunConfig {
    pub method: Method,
    pub input: String,
    pub output: PathBuf,
    pub mask: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub seed: u64,
    pub emit_debug: bool,
    pub wall_time: bool,
    pub engine: EngineConfig,
    pub texture: TextureConfig,
    pub loop_cfg: LoopConfig,
    pub bounds: Bounds,
    pub targets: Option<Vec<f64>>,
    pub hagiwara_step: f64,
    pub hagiwara_iterations: usize,
    pub kim: KimConfig,
    pub rotate: CurveConfig,
    pub hue: CurveConfig,
    pub nguyen: NguyenConfig,
    pub palettes: Palettes,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn read_engine(k: &mut Keys) -> Result<EngineConfig, CliError> {
    let mut e = EngineConfig::default();
    read_into!(k, usize_list, "engine.center_levels", e.center_levels);
    read_into!(k, usize_list, "engine.deltas", e.deltas);
    read_into!(k, f64, "engine.peak_threshold", e.peak_threshold);
    read_into!(k, usize, "engine.peak_scan_level", e.peak_scan_level);
    read_into!(k, f64, "engine.intensity_weight", e.intensity_weight);
    read_into!(k, f64, "engine.color_weight", e.color_weight);
    read_into!(k, f64, "engine.orientation_weight", e.orientation_weight);
    read_into!(
        k,
        f64,
        "engine.spatial_frequency_weight",
        e.spatial_frequency_weight
    );
    let f = &mut e.orientation_filter;
    read_into!(k, f64, "engine.orientation.wavelength", f.wavelength);
    read_into!(k, usize, "engine.orientation.support", f.support);
    read_into!(k, f64, "engine.orientation.sigma_across", f.sigma_across);
    read_into!(k, f64, "engine.orientation.sigma_along", f.sigma_along);
    if f.support % 2 == 0 {
        return Err(config_err("engine.orientation.support must be odd"));
    }
    e.validate()?;
    Ok(e)
}

fn read_texture(k: &mut Keys) -> Result<TextureConfig, CliError> {
    let mut t = TextureConfig::default();
    read_into!(k, usize, "texture.levels", t.levels);
    read_into!(k, usize, "texture.orientations", t.orientations);
    read_into!(k, f64, "texture.sigma_local", t.sigma_local);
    read_into!(k, f64, "texture.sigma_surround", t.sigma_surround);
    read_into!(k, f64, "texture.sigma_contrast", t.sigma_contrast);
    read_into!(k, f64, "texture.lambda", t.lambda);
    read_into!(k, f64, "texture.clamp_min", t.clamp_min);
    read_into!(k, f64, "texture.clamp_max", t.clamp_max);
    read_into!(k, f64, "texture.log_floor", t.log_floor);
    if let Some(s) = k.string("texture.channels")? {
        t.channels = match s.as_str() {
            "luminance" => TextureChannels::Luminance,
            "per-channel" => TextureChannels::PerChannel,
            _ => {
                return Err(config_err(format!(
                    "texture.channels: expected luminance or per-channel, got '{s}'"
                )))
            }
        };
    }
    if let Some(s) = k.string("texture.domain")? {
        t.domain = match s.as_str() {
            "log" => ContrastDomain::Log,
            "linear" => ContrastDomain::Linear,
            _ => {
                return Err(config_err(format!(
                    "texture.domain: expected log or linear, got '{s}'"
                )))
            }
        };
    }
    t.validate()?;
    Ok(t)
}

fn read_loop(k: &mut Keys) -> Result<(LoopConfig, Bounds, Option<Vec<f64>>), CliError> {
    let mut c = LoopConfig::default();
    read_into!(k, f64, "iterative.epsilon", c.epsilon);
    read_into!(k, usize, "iterative.max_iterations", c.max_iterations);
    read_into!(k, f64, "iterative.initial_step", c.initial_step);
    read_into!(k, f64, "iterative.min_step", c.min_step);
    read_into!(k, f64, "iterative.large_deviation", c.large_deviation);
    read_into!(k, f64, "iterative.beta_large", c.beta_large);
    read_into!(k, f64, "iterative.feedback_gain", c.feedback_gain);
    read_into!(k, f64, "iterative.blur_sigma", c.blur_sigma);
    read_into!(k, bool, "iterative.area_weighted", c.area_weighted);
    if let Some(names) = k.string_list("iterative.features")? {
        c.features = names
            .iter()
            .map(|n| {
                Feature::parse(n)
                    .ok_or_else(|| config_err(format!("iterative.features: unknown feature '{n}'")))
            })
            .collect::<Result<_, _>>()?;
    }
    c.validate()?;
    let mut bounds = DEFAULT_BOUNDS;
    for f in Feature::ALL {
        if let Some((lo, hi)) = k.pair(&format!("iterative.bounds.{}", f.as_str()))? {
            if !(lo <= 0.0 && 0.0 <= hi) {
                return Err(config_err(format!(
                    "iterative.bounds.{} must contain 0",
                    f.as_str()
                )));
            }
            bounds[f.index()] = (lo, hi);
        }
    }
    let targets = k.f64_list("iterative.targets")?;
    Ok((c, bounds, targets))
}

fn read_curve(k: &mut Keys, ns: &str, mut c: CurveConfig) -> Result<CurveConfig, CliError> {
    read_into!(k, usize, &format!("{ns}.bins"), c.bins);
    read_into!(k, f64, &format!("{ns}.tau"), c.tau);
    read_into!(k, f64, &format!("{ns}.floor"), c.floor);
    read_into!(k, f64, &format!("{ns}.vote_width"), c.vote_width);
    read_into!(k, f64, &format!("{ns}.gradient_sigma"), c.gradient_sigma);
    read_into!(k, f64, &format!("{ns}.tensor_sigma"), c.tensor_sigma);
    read_into!(k, f64, &format!("{ns}.min_coherence"), c.min_coherence);
    read_into!(k, f64, &format!("{ns}.coherence_power"), c.coherence_power);
    read_into!(k, bool, &format!("{ns}.smooth"), c.smooth);
    read_into!(k, f64, &format!("{ns}.flat_threshold"), c.flat_threshold);
    c.validate()?;
    Ok(c)
}

fn read_kim(k: &mut Keys) -> Result<KimConfig, CliError> {
    let mut c = KimConfig::default();
    read_into!(k, f64, "kim.sigma_center", c.sigma_center);
    read_into!(k, f64, "kim.sigma_surround", c.sigma_surround);
    read_into!(k, f64, "kim.reg", c.inversion.reg);
    read_into!(k, usize, "kim.max_iterations", c.inversion.max_iterations);
    read_into!(k, f64, "kim.tolerance", c.inversion.tolerance);
    read_into!(k, f64, "kim.range_min", c.inversion.range.0);
    read_into!(k, f64, "kim.range_max", c.inversion.range.1);
    if let Some(names) = k.string_list("kim.features")? {
        c.features = names
            .iter()
            .map(|n| KimFeature::parse(n))
            .collect::<Result<_, _>>()?;
    }
    c.inversion.validate()?;
    c.operator()?;
    Ok(c)
}

/// Candidates are listed as `nguyen.candidates.<label>.<name> = [hue_degrees, sat, val]`.
fn read_nguyen(k: &mut Keys) -> Result<(NguyenConfig, Palettes), CliError> {
    let mut c = NguyenConfig::default();
    read_into!(k, usize, "nguyen.patch_size", c.patch_size);
    read_into!(k, f64, "nguyen.lambda", c.lambda);
    read_into!(k, f64, "nguyen.hue_threshold", c.similarity.hue_degrees);
    read_into!(k, f64, "nguyen.value_threshold", c.similarity.value);
    read_into!(k, usize, "nguyen.max_sweeps", c.max_sweeps);
    if c.patch_size == 0 || !(c.lambda >= 0.0 && c.lambda.is_finite()) {
        return Err(config_err(
            "nguyen.patch_size must be positive and nguyen.lambda finite and >= 0",
        ));
    }
    let mut palettes = Palettes::new();
    for key in k.keys_under("nguyen.candidates") {
        let rest = &key["nguyen.candidates.".len()..];
        let (label, name) = rest.split_once('.').ok_or_else(|| {
            config_err(format!("{key}: expected nguyen.candidates.<label>.<name>"))
        })?;
        let label: u32 = label
            .parse()
            .map_err(|_| config_err(format!("{key}: label must be an integer")))?;
        let v = k.f64_list(&key)?.expect("listed key");
        if v.len() != 3 || !(0.0..=1.0).contains(&v[1]) || !(0.0..=1.0).contains(&v[2]) {
            return Err(config_err(format!(
                "{key} must be [hue_degrees, sat, val] with sat and val in [0, 1]"
            )));
        }
        palettes.entry(label).or_default().push(Candidate {
            name: name.to_string(),
            color: PatchColor::new(v[0], v[1], v[2]),
        });
    }
    Ok((c, palettes))
}

impl RunConfig {
    /// Consume every recognized key; anything left over is an error.
    pub fn from_keys(method: Method, mut k: Keys) -> Result<Self, CliError> {
        let input = k
            .string("input")?
            .ok_or_else(|| config_err("no input given (--input or input = ...)"))?;
        let output = k
            .string("output")?
            .ok_or_else(|| config_err("no output directory given (--output or output = ...)"))?;
        let mask = k.string("mask")?.map(PathBuf::from);
        let labels = k.string("labels")?.map(PathBuf::from);
        let target = k.string("target")?.map(PathBuf::from);
        let seed = k.u64("seed")?.unwrap_or(0);
        let emit_debug = k.bool("emit_debug")?.unwrap_or(false);
        let wall_time = k.bool("report.wall_time")?.unwrap_or(false);
        let mut engine = read_engine(&mut k)?;
        let texture = read_texture(&mut k)?;
        engine.texture = texture.clone();
        let features_given = k.contains("iterative.features");
        let (mut loop_cfg, bounds, targets) = read_loop(&mut k)?;
        // by default feedback only steers features whose channel is computed
        if method == Method::Feedback && !features_given && engine.spatial_frequency_weight == 0.0 {
            loop_cfg.features.retain(|&f| f != Feature::Sharpness);
        }
        let mut hagiwara_step = 0.05;
        let mut hagiwara_iterations = 10;
        read_into!(k, f64, "hagiwara.step", hagiwara_step);
        read_into!(k, usize, "hagiwara.iterations", hagiwara_iterations);
        let kim = read_kim(&mut k)?;
        let rotate = read_curve(&mut k, "rotate", CurveConfig::orientation())?;
        let hue = read_curve(&mut k, "hue", CurveConfig::hue())?;
        let (nguyen, palettes) = read_nguyen(&mut k)?;
        k.reject_unused()?;
        Ok(Self {
            method,
            input,
            output: PathBuf::from(output),
            mask,
            labels,
            target,
            seed,
            emit_debug,
            wall_time,
            engine,
            texture,
            loop_cfg,
            bounds,
            targets,
            hagiwara_step,
            hagiwara_iterations,
            kim,
            rotate,
            hue,
            nguyen,
            palettes,
        })
    }
}

struct Inputs {
    image: Image,
    mask: Option<RoiMask>,
    labels: Option<LabelMap>,
    targets: Option<Vec<f64>>,
}

/// `synth:<scene>` inputs come from the seeded scene generators.
fn synth_inputs(name: &str, seed: u64) -> Result<Inputs, CliError> {
    let scene = |s: synth::Scene| Inputs {
        image: s.image,
        mask: Some(s.mask),
        labels: None,
        targets: None,
    };
    Ok(match name {
        "popout-color" => scene(synth::popout_color(seed)),
        "popout-orientation" => scene(synth::popout_orientation(seed)),
        "texture-patch" => scene(synth::texture_patch(seed)),
        "gray-roi" => scene(synth::gray_roi(seed)),
        "tile-floor" => scene(synth::tile_floor(seed)),
        "hue-field" => scene(synth::hue_field(seed)),
        "camouflage" => {
            let (s, l) = synth::camouflage(seed, 2);
            Inputs {
                image: s.image,
                mask: Some(s.mask),
                labels: Some(l),
                targets: None,
            }
        }
        "segment-strips" => {
            let s = synth::segment_strips(seed, 3);
            Inputs {
                image: s.image,
                mask: None,
                labels: Some(s.labels),
                targets: Some(s.targets),
            }
        }
        _ => return Err(config_err(format!("unknown synthetic scene '{name}'"))),
    })
}

/// Prefix io and codec failures with the file they concern.
fn reading(path: impl AsRef<Path>) -> impl FnOnce(retarget_core::Error) -> CliError {
    let shown = path.as_ref().display().to_string();
    move |e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{shown}: {m}")),
        other => other,
    }
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let mut inputs = match cfg.input.strip_prefix("synth:") {
        Some(name) => synth_inputs(name, cfg.seed)?,
        None => Inputs {
            image: read_image(&cfg.input).map_err(reading(&cfg.input))?,
            mask: None,
            labels: None,
            targets: None,
        },
    };
    let (w, h) = inputs.image.dims();
    if let Some(p) = &cfg.mask {
        inputs.mask = Some(read_mask(p).map_err(reading(p))?);
    }
    if let Some(m) = &inputs.mask {
        m.ensure_dims(w, h)?;
    }
    if let Some(p) = &cfg.labels {
        inputs.labels = Some(read_labels(p).map_err(reading(p))?);
    }
    if let Some(l) = &inputs.labels {
        if (l.width, l.height) != (w, h) {
            return Err(config_err(format!(
                "label map is {}x{}, image is {w}x{h}",
                l.width, l.height
            )));
        }
    }
    Ok(inputs)
}

fn need_mask(inputs: &Inputs, method: Method) -> Result<&RoiMask, CliError> {
    inputs
        .mask
        .as_ref()
        .ok_or_else(|| config_err(format!("{} needs a mask (--mask)", method.as_str())))
}

/// Target importance per segment: explicit list, else the mean of the
/// target map over each segment, else the scene's own targets.
fn segment_targets(
    cfg: &RunConfig,
    inputs: &Inputs,
    labels: &LabelMap,
) -> Result<Vec<f64>, CliError> {
    if let Some(t) = &cfg.targets {
        return Ok(t.clone());
    }
    if let Some(p) = &cfg.target {
        let map = read_grid(p).map_err(reading(p))?;
        if map.dims() != (labels.width, labels.height) {
            return Err(config_err("target map and label map differ in size"));
        }
        let n = labels.labels.iter().copied().max().unwrap_or(0) as usize;
        let mut sums = vec![(0.0, 0usize); n];
        for (&l, &v) in labels.labels.iter().zip(map.data()) {
            if l >= 1 {
                sums[l as usize - 1].0 += v;
                sums[l as usize - 1].1 += 1;
            }
        }
        return Ok(sums
            .iter()
            .map(|&(s, c)| (s / c.max(1) as f64).max(1e-6))
            .collect());
    }
    inputs
        .targets
        .clone()
        .ok_or_else(|| config_err("iterative methods need targets (iterative.targets or --target)"))
}

struct Outcome {
    image: Option<Image>,
    report: RetargetReport,
    details: BTreeMap<String, Value>,
    curve: Option<String>,
    trace: bool,
}

impl Outcome {
    fn new(method: Method) -> Self {
        Self {
            image: None,
            report: RetargetReport::new(method.as_str()),
            details: BTreeMap::new(),
            curve: None,
            trace: false,
        }
    }
}

fn optimizer_outcome(method: Method, img: Image, r: OptimizeReport) -> Outcome {
    let mut o = Outcome::new(method);
    o.report.initial_error = Some(r.initial_error);
    o.report.final_error = Some(r.final_error);
    o.report.iterations = r.iterations;
    o.report.trace = r.trace;
    o.report.flags.push(r.stop.as_str().to_string());
    o.details
        .insert("accepted_errors".into(), json!(r.accepted_errors));
    o.image = Some(img);
    o.trace = true;
    o
}

fn curve_outcome(method: Method, out: CurveOutcome) -> Outcome {
    let mut o = Outcome::new(method);
    o.details
        .insert("best_phi_degrees".into(), json!(out.best_phi));
    o.details
        .insert("curve_spread".into(), json!(out.curve.spread()));
    o.report.flags = out.flags;
    o.curve = Some(out.curve.to_csv());
    o.image = Some(out.image);
    o
}

fn execute(cfg: &RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let img = &inputs.image;
    let m = cfg.method;
    Ok(match m {
        Method::Saliency => Outcome::new(m),
        Method::Iterative | Method::Feedback => {
            let labels = inputs.labels.as_ref().ok_or_else(|| {
                config_err(format!("{} needs a label map (--labels)", m.as_str()))
            })?;
            let targets = segment_targets(cfg, inputs, labels)?;
            let seg = SegmentModel::new(labels, targets, cfg.bounds)?;
            let (out, r) = if m == Method::Iterative {
                optimize_blackbox(img, &seg, &cfg.engine, &cfg.loop_cfg)?
            } else {
                optimize_feedback(img, &seg, &cfg.engine, &cfg.loop_cfg)?
            };
            optimizer_outcome(m, out, r)
        }
        Method::Hagiwara => {
            let mask = need_mask(inputs, m)?;
            let (out, r) = hagiwara_retarget(
                img,
                mask,
                cfg.hagiwara_step,
                cfg.hagiwara_iterations,
                &cfg.engine,
            )?;
            let mut o = Outcome::new(m);
            o.report.iterations = r.trace.len();
            o.report.trace = r.trace;
            o.details.insert("accepted_steps".into(), json!(r.accepted));
            o.details
                .insert("last_direction".into(), json!(r.direction));
            o.image = Some(out);
            o.trace = true;
            o
        }
        Method::Texture => {
            let mask = need_mask(inputs, m)?;
            let out = su_retarget(img, mask, &cfg.texture)?;
            let mut o = Outcome::new(m);
            o.details.insert(
                "texture_contrast_before".into(),
                json!(texture_contrast(img, Some(mask), &cfg.texture)?),
            );
            o.details.insert(
                "texture_contrast_after".into(),
                json!(texture_contrast(&out, Some(mask), &cfg.texture)?),
            );
            o.image = Some(out);
            o
        }
        Method::Kim => {
            let mask = need_mask(inputs, m)?;
            let (out, inv) = kim_retarget(img, mask, &cfg.kim)?;
            let mut o = Outcome::new(m);
            if let Some(inv) = inv {
                o.report.iterations = inv.iterations;
                o.details
                    .insert("forward_residual".into(), json!(inv.forward_residual));
                o.details
                    .insert("solver_converged".into(), json!(inv.converged));
                o.details
                    .insert("factor_min".into(), json!(inv.factors.min()));
                o.details
                    .insert("factor_max".into(), json!(inv.factors.max()));
                if !inv.converged {
                    o.report
                        .flags
                        .push("solver iteration budget exhausted".into());
                }
            }
            o.image = Some(out);
            o
        }
        Method::Rotate => {
            curve_outcome(m, rotate_retarget(img, need_mask(inputs, m)?, &cfg.rotate)?)
        }
        Method::Hue => curve_outcome(m, hue_retarget(img, need_mask(inputs, m)?, &cfg.hue)?),
        Method::Nguyen => {
            let mask = need_mask(inputs, m)?;
            if cfg.palettes.is_empty() {
                return Err(config_err(
                    "nguyen needs candidates (nguyen.candidates.<label>.<name> = [h, s, v])",
                ));
            }
            let out = nguyen_retarget(
                img,
                mask,
                inputs.labels.as_ref(),
                &cfg.palettes,
                &cfg.nguyen,
            )?;
            let mut o = Outcome::new(m);
            o.report.iterations = out.icm.sweeps;
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for c in &out.chosen {
                *counts.entry(c.clone()).or_default() += 1;
            }
            o.details.insert("patches".into(), json!(out.chosen.len()));
            o.details.insert("chosen_counts".into(), json!(counts));
            o.details.insert("energies".into(), json!(out.icm.energies));
            o.image = Some(out.image);
            o
        }
    })
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    report: &'a RetargetReport,
    input: &'a str,
    seed: u64,
    details: &'a BTreeMap<String, Value>,
}

fn write_debug(dir: &Path, name: &str, fs: &FeatureSet) -> Result<(), CliError> {
    fs.write_pgm_dir(dir.join("debug").join(name))?;
    Ok(())
}

/// Run one method and write its artifacts into `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<RetargetReport, CliError> {
    let start = Instant::now();
    let inputs = load_inputs(cfg)?;
    let (before, before_fs) = compute_saliency(&inputs.image, &cfg.engine)?;
    let mut outcome = execute(cfg, &inputs)?;
    let ratio = |s: &retarget_core::SaliencyMap| -> Result<Option<f64>, CliError> {
        match &inputs.mask {
            Some(m) if !m.is_empty() && !m.is_full() => Ok(Some(roi_saliency_ratio(s.grid(), m)?)),
            _ => Ok(None),
        }
    };
    outcome.report.ratio_before = ratio(&before)?;
    let after = match &outcome.image {
        Some(out) => {
            let (s, fs) = compute_saliency(out, &cfg.engine)?;
            outcome.report.ratio_after = ratio(&s)?;
            outcome.report.rms_change = Some(rms_change(&inputs.image, out)?);
            Some((s, fs))
        }
        None => None,
    };
    if cfg.wall_time {
        outcome.report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }

    let dir = &cfg.output;
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    match &after {
        None => write_grid(dir.join("saliency.pgm"), before.grid())?,
        Some((s, _)) => {
            write_grid(dir.join("saliency_before.pgm"), before.grid())?;
            write_grid(dir.join("saliency_after.pgm"), s.grid())?;
        }
    }
    if let Some(out) = &outcome.image {
        write_image(dir.join("output.png"), out)?;
    }
    if let Some(csv) = &outcome.curve {
        write_atomic(dir.join("curve.csv"), csv.as_bytes())?;
    }
    if outcome.trace {
        write_atomic(
            dir.join("iterations.csv"),
            outcome.report.trace_csv().as_bytes(),
        )?;
    }
    let doc = Document {
        report: &outcome.report,
        input: &cfg.input,
        seed: cfg.seed,
        details: &outcome.details,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    write_atomic(dir.join("report.json"), json.as_bytes())?;
    let row = format!(
        "{}\n{}\n",
        RetargetReport::csv_header(),
        outcome.report.csv_row()
    );
    write_atomic(dir.join("report.csv"), row.as_bytes())?;
    if cfg.emit_debug {
        write_debug(dir, "before", &before_fs)?;
        if let Some((_, fs)) = &after {
            write_debug(dir, "after", fs)?;
        }
    }
    Ok(outcome.report)
}
