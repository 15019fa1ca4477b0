//! Recovering panel attributes from rasters.
//!
//! Foreground is every pixel darker than [`BINARIZE_THRESHOLD`]. Pixels are
//! owned by the layout cell (component slot) their centre falls in, and
//! 4-connected components never cross a cell boundary, which keeps nested
//! inner shapes apart from the outer outline around them. Type and Size come
//! from IoU template matching of hole-filled silhouettes whose antialiased
//! borders count fractionally; Color from the
//! median gray level inside the outline.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{Code, ComponentValues, Layout, Panel, ANGLE_COUNT};
use crate::error::ContractViolation;
use crate::render::{nearest_color, render_entities, Entity, PanelRaster, Region, RenderOptions, ShapeGeometry};

pub const BINARIZE_THRESHOLD: u8 = 250;
pub const IOU_THRESHOLD: f64 = 0.85;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("foreground blob centred at ({x:.1}, {y:.1}) lies in no slot cell")]
    BlobOutsideCells { x: f64, y: f64 },
    #[error("entity in component {component} slot {slot} matches no template (best IoU {iou:.3})")]
    Unrecognized { component: usize, slot: usize, iou: f64 },
    #[error("raster is {found} px wide but the template bank was built for {expected} px")]
    SideMismatch { expected: u32, found: u32 },
    #[error(transparent)]
    Raster(#[from] ContractViolation),
    #[error("panel {panel}: {source}")]
    Panel { panel: String, source: Box<PerceptionError> },
}

impl PerceptionError {
    pub fn in_panel(self, panel: impl Into<String>) -> Self {
        PerceptionError::Panel { panel: panel.into(), source: Box::new(self) }
    }
}

/// The foreground of one occupied slot cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityBlob {
    pub component: usize,
    pub slot: usize,
    /// Pixel indices (`y * width + x`), ascending.
    pub mask: Vec<usize>,
    /// `(x0, y0, x1, y1)`, end-exclusive.
    pub bbox: (u32, u32, u32, u32),
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub blobs: Vec<EntityBlob>,
    /// Per component: blob count and occupancy mask.
    pub number: Vec<Code>,
    pub position: Vec<Code>,
}

/// `(component, slot)` owning each pixel, by pixel centre.
fn cell_map(layout: &Layout, side: u32) -> Vec<Option<(usize, usize)>> {
    let n = side as f64;
    (0..side * side)
        .map(|i| {
            let x = ((i % side) as f64 + 0.5) / n;
            let y = ((i / side) as f64 + 0.5) / n;
            let ci = layout.component_at(x, y)?;
            let slot = layout.components[ci].slots.iter().position(|r| r.contains(x, y))?;
            Some((ci, slot))
        })
        .collect()
}

fn make_blob(component: usize, slot: usize, mut mask: Vec<usize>, side: u32) -> EntityBlob {
    mask.sort_unstable();
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    let (mut sx, mut sy) = (0.0, 0.0);
    for &i in &mask {
        let (x, y) = (i as u32 % side, i as u32 / side);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x + 1);
        y1 = y1.max(y + 1);
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
    }
    let n = mask.len() as f64;
    EntityBlob { component, slot, mask, bbox: (x0, y0, x1, y1), centroid: (sx / n, sy / n) }
}

fn segment_with(
    r: &PanelRaster,
    layout: &Layout,
    cells: &[Option<(usize, usize)>],
) -> Result<Segmentation, PerceptionError> {
    let side = r.width;
    let fg: Vec<bool> = r.pixels.iter().map(|&p| p < BINARIZE_THRESHOLD).collect();
    let mut seen = vec![false; fg.len()];
    let mut per_cell: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for start in 0..fg.len() {
        if !fg[start] || seen[start] {
            continue;
        }
        let cell = cells[start];
        let mut queue = VecDeque::from([start]);
        let mut members = Vec::new();
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (x, y) = (i as u32 % side, i as u32 / side);
            let mut visit = |j: usize| {
                if fg[j] && !seen[j] && cells[j] == cell {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < side {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - side as usize);
            }
            if y + 1 < side {
                visit(i + side as usize);
            }
        }
        match cell {
            Some(c) => per_cell.entry(c).or_default().extend(members),
            None => {
                let b = make_blob(0, 0, members, side);
                return Err(PerceptionError::BlobOutsideCells { x: b.centroid.0, y: b.centroid.1 });
            }
        }
    }
    // Several components inside one cell are parts of one entity.
    let blobs: Vec<EntityBlob> = per_cell.into_iter().map(|((ci, slot), m)| make_blob(ci, slot, m, side)).collect();
    let mut number = vec![0; layout.components.len()];
    let mut position = vec![0; layout.components.len()];
    for b in &blobs {
        number[b.component] += 1;
        position[b.component] |= 1 << b.slot;
    }
    Ok(Segmentation { blobs, number, position })
}

/// Split the binarized raster into one blob per occupied slot cell.
pub fn segment_entities(r: &PanelRaster, layout: &Layout) -> Result<Segmentation, PerceptionError> {
    segment_with(r, layout, &cell_map(layout, r.width))
}

/// The blob plus every pixel it encloses, as sorted pixel indices.
pub fn silhouette(mask: &[usize], bbox: (u32, u32, u32, u32), side: u32) -> Vec<usize> {
    let (x0, y0, x1, y1) = bbox;
    // Local grid with a one-pixel empty border so the outside is connected.
    let w = (x1 - x0 + 2) as usize;
    let h = (y1 - y0 + 2) as usize;
    let mut solid = vec![false; w * h];
    for &i in mask {
        let (x, y) = (i as u32 % side, i as u32 / side);
        solid[(y - y0 + 1) as usize * w + (x - x0 + 1) as usize] = true;
    }
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::from([0usize]);
    outside[0] = true;
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if !solid[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    let mut out = Vec::new();
    for ly in 1..h - 1 {
        for lx in 1..w - 1 {
            if !outside[ly * w + lx] {
                let (x, y) = (x0 as usize + lx - 1, y0 as usize + ly - 1);
                out.push(y * side as usize + x);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub shape: Code,
    pub size: Code,
    pub angle: Code,
    /// Silhouette pixels as `(x, y)`.
    pub silhouette: Vec<(i32, i32)>,
    /// Coverage of each silhouette pixel, see [`coverage`].
    pub weights: Vec<f64>,
    pub mass: f64,
    /// Pixels drawn entirely in fill color, inside the outline.
    pub fill: Vec<(i32, i32)>,
    pub centroid: (f64, f64),
}

/// Soft membership of silhouette pixels. Pixels on the silhouette border
/// are covered by the black outline in proportion to their darkness;
/// everything else counts fully. Antialiased borders thus keep the
/// sub-pixel extent that binarization throws away, which is what separates
/// adjacent sizes of small shapes.
pub fn coverage(sil: &[usize], r: &PanelRaster) -> Vec<f64> {
    let side = r.width as usize;
    let mut inside = vec![false; r.pixels.len()];
    for &i in sil {
        inside[i] = true;
    }
    sil.iter()
        .map(|&i| {
            let (x, y) = (i % side, i / side);
            let border = x == 0
                || y == 0
                || x + 1 == side
                || y + 1 == side
                || [i - 1, i + 1, i - side, i + side].iter().any(|&j| !inside[j]);
            if border {
                (255.0 - r.pixels[i] as f64) / 255.0
            } else {
                1.0
            }
        })
        .collect()
}

fn weighted_centroid(points: &[(i32, i32)], weights: &[f64]) -> (f64, f64) {
    let mass: f64 = weights.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let (sx, sy) = points
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(a, b), (&(x, y), &w)| (a + w * (x as f64 + 0.5), b + w * (y as f64 + 0.5)));
    (sx / mass, sy / mass)
}

fn to_xy(i: usize, side: u32) -> (i32, i32) {
    ((i as u32 % side) as i32, (i as u32 / side) as i32)
}

fn render_template(
    layout: &Layout,
    component: usize,
    slot: usize,
    shape: Code,
    size: Code,
    angle: Code,
    opts: RenderOptions,
) -> Template {
    let colors = layout.components[component].color_range;
    let e = Entity { component, slot, shape, size, color: (colors.lo + colors.hi) / 2, angle };
    let side = opts.side;
    let raster = render_entities(&[e], layout, opts).expect("template entity is in range");
    let mask: Vec<usize> = (0..raster.pixels.len()).filter(|&i| raster.pixels[i] < BINARIZE_THRESHOLD).collect();
    let blob = make_blob(component, slot, mask, side);
    let sil_idx = silhouette(&blob.mask, blob.bbox, side);
    let weights = coverage(&sil_idx, &raster);
    let sil: Vec<(i32, i32)> = sil_idx.iter().map(|&i| to_xy(i, side)).collect();
    let g = ShapeGeometry::of(&e, layout, side);
    let s = opts.supersample.max(1);
    let step = 1.0 / s as f64;
    let fill = sil
        .iter()
        .copied()
        .filter(|&(x, y)| {
            (0..s * s).all(|k| {
                let px = x as f64 + ((k % s) as f64 + 0.5) * step;
                let py = y as f64 + ((k / s) as f64 + 0.5) * step;
                g.region(px, py) == Region::Fill
            })
        })
        .collect();
    Template {
        shape,
        size,
        angle,
        centroid: weighted_centroid(&sil, &weights),
        mass: weights.iter().sum(),
        silhouette: sil,
        weights,
        fill,
    }
}

/// Every Type x Size x Angle silhouette a component admits, rendered in
/// every slot cell of a layout. Rotations that give identical silhouettes
/// are kept once.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    pub opts: RenderOptions,
    /// `cells[component][slot]`.
    pub cells: Vec<Vec<Vec<Template>>>,
}

impl TemplateBank {
    pub fn new(layout: &Layout, opts: RenderOptions) -> Self {
        let cells = layout
            .components
            .iter()
            .enumerate()
            .map(|(ci, comp)| {
                (0..comp.slots.len())
                    .into_par_iter()
                    .map(|slot| {
                        let mut out: Vec<Template> = Vec::new();
                        for shape in comp.type_range.values() {
                            for size in comp.size_range.values() {
                                for angle in 0..ANGLE_COUNT {
                                    let t = render_template(layout, ci, slot, shape, size, angle, opts);
                                    let duplicate = out.iter().any(|o| {
                                        o.shape == shape
                                            && o.size == size
                                            && o.silhouette == t.silhouette
                                            && o.weights == t.weights
                                    });
                                    if !duplicate {
                                        out.push(t);
                                    }
                                }
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        TemplateBank { opts, cells }
    }

    pub fn templates(&self, component: usize, slot: usize) -> &[Template] {
        &self.cells[component][slot]
    }
}

/// Weighted intersection over union (sum of minima over sum of maxima) of a
/// coverage map and a template shifted by `(dx, dy)`.
pub fn soft_iou(map: &[f64], mass: f64, side: u32, t: &Template, dx: i32, dy: i32) -> f64 {
    let s = side as i32;
    let inter: f64 = t
        .silhouette
        .iter()
        .zip(&t.weights)
        .map(|(&(x, y), &w)| {
            let (x, y) = (x + dx, y + dy);
            if x >= 0 && y >= 0 && x < s && y < s {
                w.min(map[(y * s + x) as usize])
            } else {
                0.0
            }
        })
        .sum();
    inter / (mass + t.mass - inter)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub shape: Code,
    pub size: Code,
    pub iou: f64,
    /// Index of the winning template in its cell.
    pub template: usize,
    pub shift: (i32, i32),
}

fn shift_to(blob_centroid: (f64, f64), t: &Template) -> (i32, i32) {
    ((blob_centroid.0 - t.centroid.0).round() as i32, (blob_centroid.1 - t.centroid.1).round() as i32)
}

/// Best template by centroid-aligned IoU over the blob's hole-filled
/// silhouette (with soft borders); errors below [`IOU_THRESHOLD`].
pub fn classify_type_size(blob: &EntityBlob, r: &PanelRaster, bank: &TemplateBank) -> Result<Match, PerceptionError> {
    let side = r.width;
    let sil = silhouette(&blob.mask, blob.bbox, side);
    let weights = coverage(&sil, r);
    let mut map = vec![0.0; r.pixels.len()];
    for (&i, &w) in sil.iter().zip(&weights) {
        map[i] = w;
    }
    let sil_xy: Vec<(i32, i32)> = sil.iter().map(|&i| to_xy(i, side)).collect();
    let centroid = weighted_centroid(&sil_xy, &weights);
    let mass: f64 = weights.iter().sum();
    let mut best: Option<Match> = None;
    for (k, t) in bank.templates(blob.component, blob.slot).iter().enumerate() {
        let bound = mass.min(t.mass) / mass.max(t.mass);
        if best.is_some_and(|m| bound <= m.iou) {
            continue;
        }
        let shift = shift_to(centroid, t);
        let score = soft_iou(&map, mass, side, t, shift.0, shift.1);
        if best.is_none_or(|m| score > m.iou) {
            best = Some(Match { shape: t.shape, size: t.size, iou: score, template: k, shift });
        }
    }
    match best {
        Some(m) if m.iou >= IOU_THRESHOLD => Ok(m),
        other => Err(PerceptionError::Unrecognized {
            component: blob.component,
            slot: blob.slot,
            iou: other.map_or(0.0, |m| m.iou),
        }),
    }
}

fn median(mut v: Vec<u8>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

/// Median gray level inside the outline, mapped to the nearest palette
/// entry. The interior is the matched template's fill region; pixels owned
/// by another cell (an inner component drawn over an outer shape) are left
/// out. If that leaves nothing, the silhouette eroded by the outline width
/// is used, and failing that the whole silhouette.
pub fn extract_color(
    blob: &EntityBlob,
    r: &PanelRaster,
    m: &Match,
    bank: &TemplateBank,
    cells: &[Option<(usize, usize)>],
) -> Code {
    let side = r.width as i32;
    let own = Some((blob.component, blob.slot));
    let t = &bank.templates(blob.component, blob.slot)[m.template];
    let interior: Vec<u8> = t
        .fill
        .iter()
        .map(|&(x, y)| (x + m.shift.0, y + m.shift.1))
        .filter(|&(x, y)| x >= 0 && y >= 0 && x < side && y < side)
        .map(|(x, y)| (y * side + x) as usize)
        .filter(|&i| cells[i] == own)
        .map(|i| r.pixels[i])
        .collect();
    if !interior.is_empty() {
        return nearest_color(median(interior));
    }
    let sil = silhouette(&blob.mask, blob.bbox, r.width);
    let eroded = erode(&sil, r.width, crate::render::OUTLINE_PX as usize);
    let pixels = if eroded.is_empty() { sil } else { eroded };
    nearest_color(median(pixels.into_iter().map(|i| r.pixels[i]).collect()))
}

fn erode(pixels: &[usize], side: u32, times: usize) -> Vec<usize> {
    let mut current: std::collections::BTreeSet<usize> = pixels.iter().copied().collect();
    let s = side as usize;
    for _ in 0..times {
        let next: std::collections::BTreeSet<usize> = current
            .iter()
            .copied()
            .filter(|&i| {
                let (x, y) = (i % s, i / s);
                x > 0
                    && y > 0
                    && x + 1 < s
                    && y + 1 < s
                    && [i - 1, i + 1, i - s, i + s].iter().all(|j| current.contains(j))
            })
            .collect();
        if next.is_empty() {
            break;
        }
        current = next;
    }
    current.into_iter().collect()
}

/// Most frequent value, smallest on ties.
fn modal(values: &[Code]) -> Code {
    let mut counts: BTreeMap<Code, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map_or(0, |(&v, _)| v)
}

/// Per-entity readings of one panel.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityReading {
    pub component: usize,
    pub slot: usize,
    pub shape: Code,
    pub size: Code,
    pub color: Code,
    pub iou: f64,
}

/// A layout with its template bank, ready to read rasters of one size.
#[derive(Debug, Clone)]
pub struct Perceiver {
    pub layout: Layout,
    pub bank: TemplateBank,
    cells: Vec<Option<(usize, usize)>>,
}

impl Perceiver {
    pub fn new(layout: Layout, opts: RenderOptions) -> Self {
        let bank = TemplateBank::new(&layout, opts);
        let cells = cell_map(&layout, opts.side);
        Perceiver { layout, bank, cells }
    }

    fn check(&self, r: &PanelRaster) -> Result<(), PerceptionError> {
        if r.width != self.bank.opts.side || r.height != self.bank.opts.side {
            return Err(PerceptionError::SideMismatch { expected: self.bank.opts.side, found: r.width });
        }
        Ok(())
    }

    pub fn segment(&self, r: &PanelRaster) -> Result<Segmentation, PerceptionError> {
        self.check(r)?;
        segment_with(r, &self.layout, &self.cells)
    }

    pub fn read_entities(&self, r: &PanelRaster) -> Result<(Segmentation, Vec<EntityReading>), PerceptionError> {
        let seg = self.segment(r)?;
        let readings = seg
            .blobs
            .iter()
            .map(|b| {
                let m = classify_type_size(b, r, &self.bank)?;
                let color = extract_color(b, r, &m, &self.bank, &self.cells);
                Ok(EntityReading {
                    component: b.component,
                    slot: b.slot,
                    shape: m.shape,
                    size: m.size,
                    color,
                    iou: m.iou,
                })
            })
            .collect::<Result<Vec<_>, PerceptionError>>()?;
        Ok((seg, readings))
    }

    /// Attribute tuple per component. Type, Size and Color are the modal
    /// values over the component's entities; an empty component reads as
    /// all zeros.
    pub fn perceive(&self, r: &PanelRaster) -> Result<Panel, PerceptionError> {
        let (seg, readings) = self.read_entities(r)?;
        let comps = (0..self.layout.components.len())
            .map(|ci| {
                let of = |f: fn(&EntityReading) -> Code| -> Vec<Code> {
                    readings.iter().filter(|e| e.component == ci).map(f).collect()
                };
                ComponentValues {
                    number: seg.number[ci],
                    position: seg.position[ci],
                    shape: modal(&of(|e| e.shape)),
                    size: modal(&of(|e| e.size)),
                    color: modal(&of(|e| e.color)),
                }
            })
            .collect();
        Ok(Panel(comps))
    }
}

/// One-off perception; builds a template bank for the raster's size.
pub fn perceive_panel(r: &PanelRaster, layout: &Layout) -> Result<Panel, PerceptionError> {
    let opts = RenderOptions { side: r.width, ..RenderOptions::default() };
    Perceiver::new(layout.clone(), opts).perceive(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Configuration;
    use crate::render::{angle_rng, palette_intensity, render_panel};

    fn grid_panel(position: Code, number: Code) -> Panel {
        Panel(vec![ComponentValues { number, position, shape: 1, size: 3, color: 4 }])
    }

    #[test]
    fn occupancy_of_two_by_two() {
        let layout = Configuration::Grid2x2.layout();
        let r =
            render_panel(&grid_panel(0b1001, 2), &layout, &mut angle_rng("a", 0), RenderOptions::default()).unwrap();
        let seg = segment_entities(&r, &layout).unwrap();
        assert_eq!(seg.number, vec![2]);
        assert_eq!(seg.position, vec![0b1001]);
        let (c0, c3) = (seg.blobs[0].centroid, seg.blobs[1].centroid);
        assert!(c0.0 < 40.0 && c0.1 < 40.0);
        assert!(c3.0 > 40.0 && c3.1 > 40.0);
    }

    #[test]
    fn blank_and_full_panels() {
        let layout = Configuration::Grid3x3.layout();
        let blank = PanelRaster::blank(80).unwrap();
        let seg = segment_entities(&blank, &layout).unwrap();
        assert_eq!((seg.number, seg.position), (vec![0], vec![0]));
        let full =
            render_panel(&grid_panel(511, 9), &layout, &mut angle_rng("b", 0), RenderOptions::default()).unwrap();
        assert_eq!(segment_entities(&full, &layout).unwrap().number, vec![9]);
    }

    #[test]
    fn silhouette_fills_holes() {
        // A 5x5 ring in a 64x64 raster.
        let side = 64;
        let mask: Vec<usize> = (10..15)
            .flat_map(|y| (10..15).map(move |x| (y, x)))
            .filter(|&(y, x)| y == 10 || y == 14 || x == 10 || x == 14)
            .map(|(y, x)| y * side as usize + x)
            .collect();
        let sil = silhouette(&mask, (10, 10, 15, 15), side);
        assert_eq!(sil.len(), 25);
    }

    #[test]
    fn square_self_match() {
        let layout = Configuration::Center.layout();
        let panel = Panel(vec![ComponentValues { number: 1, position: 1, shape: 1, size: 4, color: 3 }]);
        let p = Perceiver::new(layout.clone(), RenderOptions::default());
        let r = render_panel(&panel, &layout, &mut angle_rng("c", 0), RenderOptions::default()).unwrap();
        let (_, readings) = p.read_entities(&r).unwrap();
        assert_eq!((readings[0].shape, readings[0].size), (1, 4));
        assert!(readings[0].iou >= 0.95);
        assert_eq!(p.perceive(&r).unwrap(), panel);
    }

    #[test]
    fn every_rotation_of_a_triangle_reads_as_triangle() {
        let layout = Configuration::Center.layout();
        let p = Perceiver::new(layout.clone(), RenderOptions::default());
        for angle in 0..ANGLE_COUNT {
            let e = Entity { component: 0, slot: 0, shape: 0, size: 2, color: 7, angle };
            let r = render_entities(&[e], &layout, RenderOptions::default()).unwrap();
            let got = p.perceive(&r).unwrap();
            assert_eq!((got.0[0].shape, got.0[0].size, got.0[0].color), (0, 2, 7), "angle {angle}");
        }
    }

    #[test]
    fn off_layout_blob_is_an_error() {
        let layout = Configuration::LeftRight.layout();
        let mut r = PanelRaster::blank(80).unwrap();
        for y in 2..8 {
            for x in 30..50 {
                r.pixels[y * 80 + x] = 0;
            }
        }
        assert!(matches!(segment_entities(&r, &layout), Err(PerceptionError::BlobOutsideCells { .. })));
    }

    #[test]
    fn unrecognized_shape_is_an_error() {
        let layout = Configuration::Center.layout();
        let mut r = PanelRaster::blank(80).unwrap();
        // A thin horizontal bar looks like nothing in the bank.
        for x in 5..75 {
            r.pixels[40 * 80 + x] = 0;
        }
        let err = perceive_panel(&r, &layout).unwrap_err();
        assert!(matches!(err, PerceptionError::Unrecognized { .. }), "{err}");
    }

    #[test]
    fn raster_size_must_match_the_bank() {
        let p = Perceiver::new(Configuration::Center.layout(), RenderOptions::default());
        let r = PanelRaster::blank(96).unwrap();
        assert_eq!(p.perceive(&r), Err(PerceptionError::SideMismatch { expected: 80, found: 96 }));
    }

    #[test]
    fn modal_prefers_smallest_on_ties() {
        assert_eq!(modal(&[3, 1, 3, 1]), 1);
        assert_eq!(modal(&[2, 2, 5]), 2);
        assert_eq!(modal(&[]), 0);
    }

    #[test]
    fn nearest_palette_for_flat_fill() {
        assert_eq!(nearest_color(palette_intensity(6) as f64 + 10.0), 6);
    }
}
