//! Retargeting success measures and the per-run report.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::imaging::{Grid, Image, RoiMask};

pub const OUTSIDE_FLOOR: f64 = 1e-6;
pub const RATIO_CAP: f64 = 1e6;

/// Mean saliency inside `mask` over mean saliency outside it.
pub fn roi_saliency_ratio(s: &Grid, mask: &RoiMask) -> Result<f64> {
    roi_saliency_ratio_capped(s, mask, RATIO_CAP)
}

pub fn roi_saliency_ratio_capped(s: &Grid, mask: &RoiMask, cap: f64) -> Result<f64> {
    mask.ensure_dims(s.width(), s.height())?;
    if mask.is_empty() || mask.is_full() {
        return Err(invalid(
            "saliency ratio needs a mask with pixels both inside and outside",
        ));
    }
    let inside = s.mean_in(mask).expect("non-empty");
    let outside = s.mean_in(&mask.complement()).expect("non-empty");
    Ok((inside / outside.max(OUTSIDE_FLOOR)).min(cap))
}

/// Root mean square difference over all channels and pixels.
pub fn rms_change(a: &Image, b: &Image) -> Result<f64> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(invalid("images differ in shape"));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pa, pb) in a.planes().iter().zip(b.planes()) {
        for (x, y) in pa.data().iter().zip(pb.data()) {
            sum += (x - y).powi(2);
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { (sum / n as f64).sqrt() })
}

/// One evaluated proposal of an iterative method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub error: f64,
    pub accepted: bool,
    pub step: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RetargetReport {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_after: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_change: Option<f64>,
    pub iterations: usize,
    pub flags: Vec<String>,
    pub trace: Vec<TraceRow>,
    /// Left unset unless timing is requested, so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl RetargetReport {
    pub fn new(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            ..Default::default()
        }
    }

    pub fn csv_header() -> &'static str {
        "method,initial_error,final_error,ratio_before,ratio_after,rms_change,iterations,flags"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            opt(self.initial_error),
            opt(self.final_error),
            opt(self.ratio_before),
            opt(self.ratio_after),
            opt(self.rms_change),
            self.iterations,
            self.flags.join(";")
        )
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,error,accepted,step\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.error, r.accepted, r.step
            ));
        }
        out
    }
}
