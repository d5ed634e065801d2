use super::model::{
    apply_modification, area_weighted_error, saliency_error, Feature, ModificationState,
    SegmentModel,
};
use crate::error::{invalid, Result};
use crate::imaging::{Grid, Image};
use crate::metrics::TraceRow;
use crate::saliency::{compute_saliency, Channel, EngineConfig, FeatureName, FeatureSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// A segment deviation counts as large above `large_deviation / N`.
    pub large_deviation: f64,
    /// Conspicuity counts as large above this fraction of its map maximum.
    pub beta_large: f64,
    /// Feedback step per unit of normalized deviation.
    pub feedback_gain: f64,
    pub features: Vec<Feature>,
    pub blur_sigma: f64,
    pub area_weighted: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            max_iterations: 200,
            initial_step: 0.05,
            min_step: 1e-3,
            large_deviation: 0.25,
            beta_large: 0.3,
            feedback_gain: 0.5,
            features: Feature::ALL.to_vec(),
            blur_sigma: 1.5,
            area_weighted: false,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !(self.initial_step > 0.0) || !(self.min_step > 0.0) {
            return Err(invalid("epsilon must be >= 0 and steps positive"));
        }
        if !(self.large_deviation >= 0.0)
            || !(0.0..=1.0).contains(&self.beta_large)
            || !(self.feedback_gain > 0.0)
        {
            return Err(invalid(
                "deviation threshold, beta threshold or gain out of range",
            ));
        }
        if self.features.is_empty() {
            return Err(invalid("at least one modifiable feature is required"));
        }
        if !(self.blur_sigma > 0.0) {
            return Err(invalid("blur sigma must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    NoImprovement,
    NoFeasibleStep,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max iterations",
            StopReason::NoImprovement => "no improving step",
            StopReason::NoFeasibleStep => "no feasible step",
        }
    }
}

/// What the feedback case table decided for one (segment, feature) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Raise,
    Lower,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub segment: usize,
    pub feature: Feature,
    pub wants_increase: bool,
    pub beta_large: bool,
    /// Segment feature level is at or above the rest of the image.
    pub level_high: bool,
    pub action: Action,
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub initial_error: f64,
    pub final_error: f64,
    /// Number of saliency evaluations after the initial one.
    pub iterations: usize,
    /// Error after each accepted step, starting with the initial error.
    pub accepted_errors: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub proposals: Vec<Proposal>,
    pub stop: StopReason,
    pub state: ModificationState,
}

struct Evaluator<'a> {
    img: &'a Image,
    seg: &'a SegmentModel,
    engine: &'a EngineConfig,
    cfg: &'a LoopConfig,
    areas: Vec<usize>,
}

struct Evaluation {
    image: Image,
    error: f64,
    segment_saliency: Vec<f64>,
    features: FeatureSet,
}

impl Evaluator<'_> {
    fn run(&self, state: &ModificationState) -> Result<Evaluation> {
        let image = apply_modification(self.img, self.seg, state, self.cfg.blur_sigma)?;
        let (s, features) = compute_saliency(&image, self.engine)?;
        // a uniform map carries no preference between segments
        let means: Vec<f64> = self
            .seg
            .segment_means(&s)
            .into_iter()
            .map(|v| v.max(1e-12))
            .collect();
        let error = if self.cfg.area_weighted {
            area_weighted_error(self.seg.targets(), &means, &self.areas)?
        } else {
            saliency_error(self.seg.targets(), &means)?
        };
        Ok(Evaluation {
            image,
            error,
            segment_saliency: means,
            features,
        })
    }

    fn deviations(&self, e: &Evaluation) -> Result<Vec<f64>> {
        let t = super::normalize_importance(self.seg.targets())?;
        let s = super::normalize_importance(&e.segment_saliency)?;
        Ok(t.iter().zip(&s).map(|(a, b)| a - b).collect())
    }

    /// Segments with a large deviation, largest first; all deviating
    /// segments when none is large.
    fn candidates(&self, dev: &[f64]) -> Vec<usize> {
        let thr = self.cfg.large_deviation / dev.len() as f64;
        let mut c: Vec<usize> = (0..dev.len()).filter(|&i| dev[i].abs() > thr).collect();
        if c.is_empty() {
            c = (0..dev.len()).filter(|&i| dev[i] != 0.0).collect();
        }
        c.sort_by(|&a, &b| dev[b].abs().total_cmp(&dev[a].abs()).then(a.cmp(&b)));
        c
    }
}

fn step_name(segment: usize, f: Feature, value: f64) -> String {
    format!("segment={} {}={:+.6}", segment + 1, f.as_str(), value)
}

fn feasible(seg: &SegmentModel, features: &[Feature]) -> bool {
    (0..seg.segment_count()).any(|i| {
        features
            .iter()
            .any(|f| seg.bounds(i)[f.index()].0 < seg.bounds(i)[f.index()].1)
    })
}

struct Progress {
    state: ModificationState,
    cur: Evaluation,
    initial: f64,
    iterations: usize,
    accepted: Vec<f64>,
    trace: Vec<TraceRow>,
    proposals: Vec<Proposal>,
}

impl Progress {
    fn start(ev: &Evaluator) -> Result<Self> {
        let state = ModificationState::zeros(ev.seg.segment_count());
        let cur = ev.run(&state)?;
        Ok(Self {
            state,
            initial: cur.error,
            accepted: vec![cur.error],
            cur,
            iterations: 0,
            trace: Vec::new(),
            proposals: Vec::new(),
        })
    }

    /// Evaluate `state` with `(segment, feature)` set to `v`; keep it on
    /// strict improvement.
    fn try_step(&mut self, ev: &Evaluator, segment: usize, f: Feature, v: f64) -> Result<bool> {
        let mut cand = self.state.clone();
        cand.set(segment, f, v);
        let e = ev.run(&cand)?;
        self.iterations += 1;
        let ok = e.error < self.cur.error;
        self.trace.push(TraceRow {
            iteration: self.iterations,
            error: e.error,
            accepted: ok,
            step: step_name(segment, f, v),
        });
        if ok {
            self.state = cand;
            self.cur = e;
            self.accepted.push(self.cur.error);
        }
        Ok(ok)
    }

    fn finish(self, stop: StopReason) -> (Image, OptimizeReport) {
        (
            self.cur.image,
            OptimizeReport {
                initial_error: self.initial,
                final_error: self.cur.error,
                iterations: self.iterations,
                accepted_errors: self.accepted,
                trace: self.trace,
                proposals: self.proposals,
                stop,
                state: self.state,
            },
        )
    }
}

/// Coordinate descent treating the saliency model as a black box: try `+step`
/// then `-step` on each coordinate of a badly matched segment, keep the
/// first strict improvement, halve the step after a failed pair.
pub fn optimize_blackbox(
    img: &Image,
    seg: &SegmentModel,
    engine: &EngineConfig,
    cfg: &LoopConfig,
) -> Result<(Image, OptimizeReport)> {
    cfg.validate()?;
    let ev = Evaluator {
        img,
        seg,
        engine,
        cfg,
        areas: seg.areas(),
    };
    let mut run = Progress::start(&ev)?;
    if !feasible(seg, &cfg.features) {
        return Ok(run.finish(StopReason::NoFeasibleStep));
    }
    let mut steps = vec![[cfg.initial_step; 3]; seg.segment_count()];
    let stop = 'outer: loop {
        if run.cur.error < cfg.epsilon {
            break StopReason::Converged;
        }
        let dev = ev.deviations(&run.cur)?;
        let mut active = false;
        for i in ev.candidates(&dev) {
            for &f in &cfg.features {
                let (lo, hi) = seg.bounds(i)[f.index()];
                let k = f.index();
                if steps[i][k] < cfg.min_step || lo == hi {
                    continue;
                }
                active = true;
                for sign in [1.0, -1.0] {
                    let v = (run.state.get(i, f) + sign * steps[i][k]).clamp(lo, hi);
                    if v == run.state.get(i, f) {
                        continue;
                    }
                    if run.iterations >= cfg.max_iterations {
                        break 'outer StopReason::MaxIterations;
                    }
                    if run.try_step(&ev, i, f, v)? {
                        continue 'outer;
                    }
                }
                steps[i][k] /= 2.0;
            }
        }
        if !active {
            break StopReason::NoImprovement;
        }
    };
    Ok(run.finish(stop))
}

/// Feature and conspicuity maps that steer `feature`.
fn beta_maps(fs: &FeatureSet, feature: Feature) -> Option<(Grid, Grid)> {
    match feature {
        Feature::Intensity => fs
            .entry(FeatureName::Intensity)
            .map(|e| (e.feature.clone(), e.conspicuity.clone())),
        Feature::Saturation => Some((
            fs.channel_feature(Channel::Color)?,
            fs.channel_map(Channel::Color)?.clone(),
        )),
        Feature::Sharpness => fs
            .entry(FeatureName::SpatialFrequency)
            .map(|e| (e.feature.clone(), e.conspicuity.clone())),
    }
}

fn required_channel(feature: Feature) -> Channel {
    match feature {
        Feature::Intensity => Channel::Intensity,
        Feature::Saturation => Channel::Color,
        Feature::Sharpness => Channel::SpatialFrequency,
    }
}

/// The four-case rule: lower saliency only where the feature is conspicuous,
/// raise it only where it is not. Lowering pulls the feature back toward the
/// rest of the image; raising pushes it further away.
pub fn case_action(wants_increase: bool, beta_large: bool, level_high: bool) -> Action {
    match (wants_increase, beta_large) {
        (false, true) => {
            if level_high {
                Action::Lower
            } else {
                Action::Raise
            }
        }
        (true, false) => {
            if level_high {
                Action::Raise
            } else {
                Action::Lower
            }
        }
        _ => Action::Skip,
    }
}

fn segment_and_rest_means(seg: &SegmentModel, map: &Grid, segment: usize) -> (f64, f64) {
    let (mut si, mut ni, mut so, mut no) = (0.0, 0usize, 0.0, 0usize);
    for (i, &v) in map.data().iter().enumerate() {
        if seg.segment_of(i) == segment {
            si += v;
            ni += 1;
        } else {
            so += v;
            no += 1;
        }
    }
    (
        si / ni.max(1) as f64,
        if no == 0 {
            si / ni.max(1) as f64
        } else {
            so / no as f64
        },
    )
}

/// Steepest-descent flavored loop: the feature/conspicuity maps of the
/// current image pick each step's direction and its size is proportional
/// to the segment's deviation.
pub fn optimize_feedback(
    img: &Image,
    seg: &SegmentModel,
    engine: &EngineConfig,
    cfg: &LoopConfig,
) -> Result<(Image, OptimizeReport)> {
    cfg.validate()?;
    for &f in &cfg.features {
        if !engine.enabled(required_channel(f)) {
            return Err(invalid(format!(
                "feedback on {} needs the {} saliency channel enabled",
                f.as_str(),
                required_channel(f).as_str()
            )));
        }
    }
    let ev = Evaluator {
        img,
        seg,
        engine,
        cfg,
        areas: seg.areas(),
    };
    let mut run = Progress::start(&ev)?;
    if !feasible(seg, &cfg.features) {
        return Ok(run.finish(StopReason::NoFeasibleStep));
    }
    let mut scale = vec![[1.0f64; 3]; seg.segment_count()];
    let stop = 'outer: loop {
        if run.cur.error < cfg.epsilon {
            break StopReason::Converged;
        }
        let dev = ev.deviations(&run.cur)?;
        let mut active = false;
        for i in ev.candidates(&dev) {
            for &f in &cfg.features {
                let k = f.index();
                let (lo, hi) = seg.bounds(i)[k];
                let magnitude = cfg.feedback_gain * dev[i].abs() * scale[i][k];
                if lo == hi || magnitude < cfg.min_step {
                    continue;
                }
                let (bf, bc) = beta_maps(&run.cur.features, f)
                    .ok_or_else(|| invalid("missing feature maps"))?;
                let (level_in, level_out) = segment_and_rest_means(seg, &bf, i);
                let (bc_in, _) = segment_and_rest_means(seg, &bc, i);
                let beta_large = bc.max() > 0.0 && bc_in >= cfg.beta_large * bc.max();
                let wants_increase = dev[i] > 0.0;
                let level_high = level_in >= level_out;
                let action = case_action(wants_increase, beta_large, level_high);
                run.proposals.push(Proposal {
                    segment: i,
                    feature: f,
                    wants_increase,
                    beta_large,
                    level_high,
                    action,
                });
                let sign = match action {
                    Action::Raise => 1.0,
                    Action::Lower => -1.0,
                    Action::Skip => continue,
                };
                let v = (run.state.get(i, f) + sign * magnitude).clamp(lo, hi);
                if v == run.state.get(i, f) {
                    continue;
                }
                active = true;
                if run.iterations >= cfg.max_iterations {
                    break 'outer StopReason::MaxIterations;
                }
                if run.try_step(&ev, i, f, v)? {
                    continue 'outer;
                }
                scale[i][k] /= 2.0;
            }
        }
        if !active {
            break StopReason::NoImprovement;
        }
    };
    Ok(run.finish(stop))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_table() {
        // decrease wanted
        assert_eq!(case_action(false, false, true), Action::Skip);
        assert_eq!(case_action(false, true, true), Action::Lower);
        assert_eq!(case_action(false, true, false), Action::Raise);
        // increase wanted
        assert_eq!(case_action(true, true, false), Action::Skip);
        assert_eq!(case_action(true, false, true), Action::Raise);
        assert_eq!(case_action(true, false, false), Action::Lower);
    }
}
