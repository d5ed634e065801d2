use std::collections::BTreeMap;

use crate::error::{degenerate, invalid, Result};
use crate::imaging::io::LabelMap;
use crate::imaging::{hsv_to_rgb, rgb_to_hsv, Image, Layout, RoiMask};

/// Mean color statistics of a patch; hue in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchColor {
    pub hue: f64,
    pub sat: f64,
    pub val: f64,
}

impl PatchColor {
    pub fn new(hue: f64, sat: f64, val: f64) -> Self {
        Self {
            hue: hue.rem_euclid(360.0),
            sat,
            val,
        }
    }

    fn point(&self) -> [f64; 3] {
        let h = self.hue.to_radians();
        [self.sat * h.cos(), self.sat * h.sin(), self.val]
    }

    /// Euclidean distance in the HSV cylinder.
    pub fn distance(&self, other: &PatchColor) -> f64 {
        let (a, b) = (self.point(), other.point());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

pub fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub hue_degrees: f64,
    pub value: f64,
}

impl Default for Similarity {
    fn default() -> Self {
        Self {
            hue_degrees: 30.0,
            value: 0.2,
        }
    }
}

impl Similarity {
    pub fn similar(&self, a: &PatchColor, b: &PatchColor) -> bool {
        hue_distance(a.hue, b.hue) < self.hue_degrees && (a.val - b.val).abs() < self.value
    }
}

/// ROI patches with their candidate colors, the colors of every patch
/// outside the ROI, and 4-adjacency between ROI patches.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGraph {
    originals: Vec<PatchColor>,
    candidates: Vec<Vec<PatchColor>>,
    context: Vec<PatchColor>,
    neighbors: Vec<Vec<usize>>,
    similar: Vec<Vec<bool>>,
    lambda: f64,
}

impl PatchGraph {
    pub fn new(
        originals: Vec<PatchColor>,
        candidates: Vec<Vec<PatchColor>>,
        context: Vec<PatchColor>,
        edges: &[(usize, usize)],
        lambda: f64,
        similarity: Similarity,
    ) -> Result<Self> {
        let n = originals.len();
        if candidates.len() != n {
            return Err(invalid(format!(
                "{} patches but {} candidate lists",
                n,
                candidates.len()
            )));
        }
        if let Some(i) = candidates.iter().position(|c| c.is_empty()) {
            return Err(invalid(format!("ROI patch {i} has no candidates")));
        }
        if context.is_empty() {
            return Err(degenerate("no patches outside the ROI to contrast against"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda must be finite and >= 0"));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(invalid(format!("bad adjacency ({a}, {b}) for {n} patches")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        neighbors.iter_mut().for_each(|v| v.sort_unstable());
        let similar = neighbors
            .iter()
            .enumerate()
            .map(|(i, ns)| {
                ns.iter()
                    .map(|&j| similarity.similar(&originals[i], &originals[j]))
                    .collect()
            })
            .collect();
        Ok(Self {
            originals,
            candidates,
            context,
            neighbors,
            similar,
            lambda,
        })
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn originals(&self) -> &[PatchColor] {
        &self.originals
    }

    pub fn candidates(&self, i: usize) -> &[PatchColor] {
        &self.candidates[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Negated distance from the candidate to the closest color outside the ROI.
    pub fn data_cost(&self, i: usize, c: usize) -> f64 {
        let x = &self.candidates[i][c];
        -self
            .context
            .iter()
            .map(|y| x.distance(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance between neighboring choices, positive when the original
    /// patches are similar and negative otherwise.
    pub fn smooth_cost(&self, i: usize, a: usize, k: usize, b: usize) -> f64 {
        let j = self.neighbors[i][k];
        let d = self.candidates[i][a].distance(&self.candidates[j][b]);
        if self.similar[i][k] {
            d
        } else {
            -d
        }
    }

    fn check(&self, assignment: &[usize]) -> Result<()> {
        if assignment.len() != self.len() {
            return Err(invalid(format!(
                "assignment covers {} of {} patches",
                assignment.len(),
                self.len()
            )));
        }
        if let Some(i) = (0..self.len()).find(|&i| assignment[i] >= self.candidates[i].len()) {
            return Err(invalid(format!(
                "patch {i} has no candidate {}",
                assignment[i]
            )));
        }
        Ok(())
    }

    /// Data terms plus `lambda` times the smoothness term summed over every
    /// patch and each of its neighbors (so each pair counts twice).
    pub fn energy(&self, assignment: &[usize]) -> Result<f64> {
        self.check(assignment)?;
        let mut e = 0.0;
        for i in 0..self.len() {
            e += self.data_cost(i, assignment[i]);
            for (k, &j) in self.neighbors[i].iter().enumerate() {
                e += self.lambda * self.smooth_cost(i, assignment[i], k, assignment[j]);
            }
        }
        Ok(e)
    }

    fn local_energy(&self, assignment: &[usize], i: usize, c: usize) -> f64 {
        let pair: f64 = self.neighbors[i]
            .iter()
            .enumerate()
            .map(|(k, &j)| self.smooth_cost(i, c, k, assignment[j]))
            .sum();
        self.data_cost(i, c) + 2.0 * self.lambda * pair
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcmResult {
    pub assignment: Vec<usize>,
    /// Energy of the seed assignment followed by the energy after each sweep.
    pub energies: Vec<f64>,
    pub sweeps: usize,
}

/// Iterated conditional modes from the per-patch data-cost minimum. A patch
/// switches candidate only on a strict decrease of its local energy.
pub fn minimize_graph_energy(g: &PatchGraph, max_sweeps: usize) -> IcmResult {
    let mut assignment: Vec<usize> = (0..g.len())
        .map(|i| {
            (0..g.candidates[i].len()).fold(0, |best, c| {
                if g.data_cost(i, c) < g.data_cost(i, best) {
                    c
                } else {
                    best
                }
            })
        })
        .collect();
    let mut energies = vec![g.energy(&assignment).expect("complete assignment")];
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for i in 0..g.len() {
            let current = g.local_energy(&assignment, i, assignment[i]);
            let mut best = (assignment[i], current);
            for c in 0..g.candidates[i].len() {
                let e = g.local_energy(&assignment, i, c);
                if e < best.1 - 1e-12 * (1.0 + current.abs()) {
                    best = (c, e);
                }
            }
            if best.0 != assignment[i] {
                assignment[i] = best.0;
                changed = true;
            }
        }
        energies.push(g.energy(&assignment).expect("complete assignment"));
        if !changed {
            break;
        }
    }
    IcmResult {
        assignment,
        energies,
        sweeps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub color: PatchColor,
}

/// Candidate colors per object label.
pub type Palettes = BTreeMap<u32, Vec<Candidate>>;

#[derive(Debug, Clone, PartialEq)]
pub struct NguyenConfig {
    pub patch_size: usize,
    pub lambda: f64,
    pub similarity: Similarity,
    pub max_sweeps: usize,
}

impl Default for NguyenConfig {
    fn default() -> Self {
        Self {
            patch_size: 8,
            lambda: 1.0,
            similarity: Similarity::default(),
            max_sweeps: 100,
        }
    }
}

/// Square cells of the image; `roi_cells[i]` is the cell of ROI patch `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLayout {
    pub size: usize,
    pub cols: usize,
    pub rows: usize,
    pub roi_cells: Vec<usize>,
    pub labels: Vec<u32>,
}

impl PatchLayout {
    fn cell_pixels(
        &self,
        cell: usize,
        width: usize,
        height: usize,
    ) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = (cell % self.cols, cell / self.cols);
        let (x0, y0) = (cx * self.size, cy * self.size);
        let (x1, y1) = ((x0 + self.size).min(width), (y0 + self.size).min(height));
        (y0..y1).flat_map(move |y| (x0..x1).map(move |x| y * width + x))
    }
}

fn mean_color(hsv: &Image, pixels: impl Iterator<Item = usize>) -> Option<PatchColor> {
    let (mut cx, mut cy, mut s, mut v, mut n) = (0.0, 0.0, 0.0, 0.0, 0usize);
    for i in pixels {
        let (h, sat, val) = (
            hsv.plane(0).data()[i],
            hsv.plane(1).data()[i],
            hsv.plane(2).data()[i],
        );
        let a = h * std::f64::consts::TAU;
        cx += sat * a.cos();
        cy += sat * a.sin();
        s += sat;
        v += val;
        n += 1;
    }
    (n > 0).then(|| PatchColor::new(cy.atan2(cx).to_degrees(), s / n as f64, v / n as f64))
}

fn hsv_of(img: &Image) -> Result<Image> {
    match img.layout() {
        Layout::Hsv => Ok(img.clone()),
        _ => rgb_to_hsv(&img.to_rgb()),
    }
}

/// Partition the image into patches and attach each ROI patch's palette,
/// chosen by the majority object label under its ROI pixels (label 1 when
/// no label map is given).
pub fn build_patch_graph(
    img: &Image,
    mask: &RoiMask,
    labels: Option<&LabelMap>,
    palettes: &Palettes,
    cfg: &NguyenConfig,
) -> Result<(PatchGraph, PatchLayout)> {
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    if mask.is_empty() {
        return Err(invalid("ROI mask is empty"));
    }
    if mask.is_full() {
        return Err(degenerate(
            "ROI mask covers the whole image, leaving no surround",
        ));
    }
    if cfg.patch_size == 0 {
        return Err(invalid("patch size must be positive"));
    }
    if let Some(l) = labels {
        if (l.width, l.height) != (w, h) {
            return Err(invalid("label raster and image differ in size"));
        }
    }
    let hsv = hsv_of(img)?;
    let size = cfg.patch_size;
    let (cols, rows) = (w.div_ceil(size), h.div_ceil(size));
    let mut layout = PatchLayout {
        size,
        cols,
        rows,
        roi_cells: Vec::new(),
        labels: Vec::new(),
    };
    let mut originals = Vec::new();
    let mut candidates = Vec::new();
    let mut context = Vec::new();
    let mut index_of = vec![usize::MAX; cols * rows];
    for cell in 0..cols * rows {
        let pixels: Vec<usize> = layout.cell_pixels(cell, w, h).collect();
        let inside: Vec<usize> = pixels.iter().copied().filter(|&i| mask.data()[i]).collect();
        if inside.is_empty() {
            context.push(mean_color(&hsv, pixels.into_iter()).expect("cells are non-empty"));
            continue;
        }
        let label = match labels {
            None => 1,
            Some(l) => {
                let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
                for &i in &inside {
                    *counts.entry(l.labels[i]).or_default() += 1;
                }
                counts
                    .iter()
                    .fold(
                        (0, 0),
                        |best, (&k, &c)| if c > best.1 { (k, c) } else { best },
                    )
                    .0
            }
        };
        let palette = palettes
            .get(&label)
            .filter(|p| !p.is_empty())
            .ok_or_else(|| invalid(format!("no candidates configured for object label {label}")))?;
        index_of[cell] = originals.len();
        originals.push(mean_color(&hsv, inside.into_iter()).expect("non-empty"));
        candidates.push(palette.iter().map(|c| c.color).collect());
        layout.roi_cells.push(cell);
        layout.labels.push(label);
    }
    let mut edges = Vec::new();
    for (i, &cell) in layout.roi_cells.iter().enumerate() {
        let (cx, cy) = (cell % cols, cell / cols);
        if cx + 1 < cols && index_of[cell + 1] != usize::MAX {
            edges.push((i, index_of[cell + 1]));
        }
        if cy + 1 < rows && index_of[cell + cols] != usize::MAX {
            edges.push((i, index_of[cell + cols]));
        }
    }
    let graph = PatchGraph::new(
        originals,
        candidates,
        context,
        &edges,
        cfg.lambda,
        cfg.similarity,
    )?;
    Ok((graph, layout))
}

/// Shift hue, saturation and value of each ROI patch's masked pixels so the
/// patch means move from `from[i]` to `to[i]`; per-pixel deviations from the
/// mean are kept. Patches whose colors agree are left untouched.
pub fn transfer_colors(
    img: &Image,
    mask: &RoiMask,
    layout: &PatchLayout,
    from: &[PatchColor],
    to: &[PatchColor],
) -> Result<Image> {
    if from.len() != layout.roi_cells.len() || to.len() != from.len() {
        return Err(invalid("color lists do not match the ROI patches"));
    }
    let (w, h) = img.dims();
    mask.ensure_dims(w, h)?;
    let mut planes = hsv_of(img)?.into_planes();
    let mut touched = false;
    for (k, &cell) in layout.roi_cells.iter().enumerate() {
        let (a, b) = (from[k], to[k]);
        if a == b {
            continue;
        }
        touched = true;
        let (dh, ds, dv) = ((b.hue - a.hue) / 360.0, b.sat - a.sat, b.val - a.val);
        for i in layout.cell_pixels(cell, w, h) {
            if !mask.data()[i] {
                continue;
            }
            let hue = &mut planes[0].data_mut()[i];
            *hue = (*hue + dh).rem_euclid(1.0);
            let s = &mut planes[1].data_mut()[i];
            *s = (*s + ds).clamp(0.0, 1.0);
            let v = &mut planes[2].data_mut()[i];
            *v = (*v + dv).clamp(0.0, 1.0);
        }
    }
    if !touched {
        return Ok(img.clone());
    }
    let hsv = Image::from_planes(Layout::Hsv, planes)?;
    match img.layout() {
        Layout::Hsv => Ok(hsv),
        Layout::Rgb => hsv_to_rgb(&hsv),
        Layout::Gray => Ok(hsv_to_rgb(&hsv)?),
    }
}

#[derive(Debug, Clone)]
pub struct NguyenOutcome {
    pub image: Image,
    pub layout: PatchLayout,
    pub icm: IcmResult,
    /// Candidate name chosen for each ROI patch.
    pub chosen: Vec<String>,
}

/// Minimize the patch-graph energy and transfer each winning candidate's
/// color statistics onto its patch.
pub fn nguyen_retarget(
    img: &Image,
    mask: &RoiMask,
    labels: Option<&LabelMap>,
    palettes: &Palettes,
    cfg: &NguyenConfig,
) -> Result<NguyenOutcome> {
    let (graph, layout) = build_patch_graph(img, mask, labels, palettes, cfg)?;
    let icm = minimize_graph_energy(&graph, cfg.max_sweeps);
    let targets: Vec<PatchColor> = icm
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| graph.candidates(i)[c])
        .collect();
    let image = transfer_colors(img, mask, &layout, graph.originals(), &targets)?;
    let chosen = icm
        .assignment
        .iter()
        .zip(&layout.labels)
        .map(|(&c, l)| palettes[l][c].name.clone())
        .collect();
    Ok(NguyenOutcome {
        image,
        layout,
        icm,
        chosen,
    })
}
