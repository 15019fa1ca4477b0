//! Rasterization of panels: grayscale, white background, black outlines.
//!
//! Geometry is evaluated at pixel centres (of the supersampled grid when
//! supersampling is on), so rendering is exact and deterministic.

use std::f64::consts::PI;
use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::domain::{decode_position, AttributeKind, Code, Layout, Panel, Problem, ANGLE_COUNT, COLOR_COUNT};
use crate::error::ContractViolation;

pub const DEFAULT_SIDE: u32 = 80;
/// Default samples per pixel along each axis. Without antialiasing, adjacent
/// sizes of a small axis-aligned square can cover the same pixels.
pub const DEFAULT_SUPERSAMPLE: u32 = 4;
pub const MIN_SIDE: u32 = 64;
/// Outline width in output pixels.
pub const OUTLINE_PX: f64 = 2.0;
/// Render-time rotations, indexed by the Angle code.
pub const ANGLES_DEG: [f64; ANGLE_COUNT as usize] = [-135.0, -90.0, -45.0, 0.0, 45.0, 90.0, 135.0, 180.0];

/// Gray level of color `c`: evenly spaced from white (0) to black (9).
pub fn palette_intensity(color: Code) -> u8 {
    (255.0 - color as f64 * 255.0 / (COLOR_COUNT - 1) as f64).round() as u8
}

/// Palette index nearest to a gray level (lower index on ties).
pub fn nearest_color(intensity: f64) -> Code {
    (0..COLOR_COUNT)
        .min_by(|&a, &b| {
            let da = (palette_intensity(a) as f64 - intensity).abs();
            let db = (palette_intensity(b) as f64 - intensity).abs();
            da.total_cmp(&db)
        })
        .expect("non-empty palette")
}

/// Entity diameter as a fraction of its slot's extent.
pub fn size_factor(size: Code) -> f64 {
    0.4 + 0.1 * size as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelRaster {
    pub width: u32,
    pub height: u32,
    /// Row-major gray levels.
    pub pixels: Vec<u8>,
    pub provenance: Provenance,
}

impl PanelRaster {
    pub fn blank(side: u32) -> Result<Self, ContractViolation> {
        check_shape(side, side)?;
        Ok(PanelRaster {
            width: side,
            height: side,
            pixels: vec![255; (side * side) as usize],
            provenance: Provenance::Generated,
        })
    }

    pub fn from_pixels(
        width: u32,
        height: u32,
        pixels: Vec<u8>,
        provenance: Provenance,
    ) -> Result<Self, ContractViolation> {
        check_shape(width, height)?;
        if pixels.len() != (width * height) as usize {
            return Err(ContractViolation::RasterShape { width, height });
        }
        Ok(PanelRaster { width, height, pixels, provenance })
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn to_png(&self) -> Vec<u8> {
        let img = GrayImage::from_raw(self.width, self.height, self.pixels.clone()).expect("buffer matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
        out.into_inner()
    }

    pub fn write_png(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_png())
    }

    /// Decode any image the `image` crate reads, converted to 8-bit gray.
    pub fn read_png(path: &Path) -> Result<Self, RasterReadError> {
        let img = image::open(path)
            .map_err(|e| RasterReadError::Decode { path: path.display().to_string(), detail: e.to_string() })?;
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        Ok(Self::from_pixels(w, h, gray.into_raw(), Provenance::External)?)
    }

    pub fn image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| Luma([self.get(x, y)]))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RasterReadError {
    #[error("cannot decode image {path}: {detail}")]
    Decode { path: String, detail: String },
    #[error(transparent)]
    Shape(#[from] ContractViolation),
}

fn check_shape(width: u32, height: u32) -> Result<(), ContractViolation> {
    if width != height || width < MIN_SIDE {
        return Err(ContractViolation::RasterShape { width, height });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub side: u32,
    /// Samples per pixel along each axis.
    pub supersample: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { side: DEFAULT_SIDE, supersample: DEFAULT_SUPERSAMPLE }
    }
}

/// One drawable entity: a shape in a slot of a layout component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entity {
    pub component: usize,
    pub slot: usize,
    pub shape: Code,
    pub size: Code,
    pub color: Code,
    pub angle: Code,
}

/// Where a point falls relative to a drawn shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Outside,
    Outline,
    Fill,
}

/// Continuous geometry of an entity, in output-pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeGeometry {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    /// `None` for a circle.
    pub sides: Option<u32>,
    /// Direction of the first edge normal, radians (y axis points down).
    pub phase: f64,
    pub outline: f64,
    /// Unit edge normals, the first `sides` entries used.
    normals: [(f64, f64); 6],
}

impl ShapeGeometry {
    pub fn of(entity: &Entity, layout: &Layout, side: u32) -> Self {
        let slot = layout.components[entity.component].slots[entity.slot];
        let (cx, cy) = slot.center();
        let side = side as f64;
        let radius = size_factor(entity.size) * slot.extent() * side / 2.0;
        // Vertex directions: triangle and pentagon point up, the square is
        // axis-aligned and the hexagon has a flat top.
        let (sides, vertex) = match entity.shape {
            0 => (Some(3), -90.0),
            1 => (Some(4), 45.0),
            2 => (Some(5), -90.0),
            3 => (Some(6), 0.0),
            _ => (None, 0.0),
        };
        let phase = match sides {
            Some(n) => (vertex + ANGLES_DEG[entity.angle as usize]).to_radians() + PI / n as f64,
            None => 0.0,
        };
        let mut normals = [(0.0, 0.0); 6];
        for (k, n) in normals.iter_mut().enumerate().take(sides.unwrap_or(0) as usize) {
            let a = phase + 2.0 * PI * k as f64 / sides.unwrap_or(1) as f64;
            *n = (a.cos(), a.sin());
        }
        let mut g = ShapeGeometry { cx: cx * side, cy: cy * side, radius, sides, phase, outline: OUTLINE_PX, normals };
        // Keep a visible fill inside the smallest shapes.
        g.outline = OUTLINE_PX.min(g.apothem() / 2.0);
        g
    }

    /// Inradius of the polygon (the radius for a circle).
    pub fn apothem(&self) -> f64 {
        match self.sides {
            Some(n) => self.radius * (PI / n as f64).cos(),
            None => self.radius,
        }
    }

    /// Distance from `(x, y)` to the boundary, positive inside.
    pub fn depth(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        match self.sides {
            None => self.radius - dx.hypot(dy),
            Some(n) => {
                let reach =
                    self.normals[..n as usize].iter().map(|&(c, s)| dx * c + dy * s).fold(f64::NEG_INFINITY, f64::max);
                self.apothem() - reach
            }
        }
    }

    pub fn region(&self, x: f64, y: f64) -> Region {
        let d = self.depth(x, y);
        if d < 0.0 {
            Region::Outside
        } else if d < self.outline {
            Region::Outline
        } else {
            Region::Fill
        }
    }

    /// Pixel bounds `(x0, y0, x1, y1)` (exclusive end) covering the shape.
    pub fn pixel_bounds(&self, side: u32) -> (u32, u32, u32, u32) {
        let clamp = |v: f64| v.clamp(0.0, side as f64) as u32;
        (
            clamp((self.cx - self.radius).floor() - 1.0),
            clamp((self.cy - self.radius).floor() - 1.0),
            clamp((self.cx + self.radius).ceil() + 1.0),
            clamp((self.cy + self.radius).ceil() + 1.0),
        )
    }
}

fn check_entity(e: &Entity, layout: &Layout) -> Result<(), ContractViolation> {
    let out = |attribute: AttributeKind, value: Code, lo: Code, hi: Code| ContractViolation::OutOfRange {
        attribute: attribute.to_string(),
        value,
        lo,
        hi,
    };
    let comp = layout
        .components
        .get(e.component)
        .ok_or_else(|| out(AttributeKind::Position, e.component as Code, 0, layout.components.len() as Code - 1))?;
    if e.slot >= comp.slots.len() {
        return Err(out(AttributeKind::Position, e.slot as Code, 0, comp.slots.len() as Code - 1));
    }
    for (kind, v) in [
        (AttributeKind::Type, e.shape),
        (AttributeKind::Size, e.size),
        (AttributeKind::Color, e.color),
        (AttributeKind::Angle, e.angle),
    ] {
        let r = comp.range(kind);
        if !r.contains(v) {
            return Err(out(kind, v, r.lo, r.hi));
        }
    }
    Ok(())
}

/// Draw entities (later ones on top) onto a white raster.
pub fn render_entities(
    entities: &[Entity],
    layout: &Layout,
    opts: RenderOptions,
) -> Result<PanelRaster, ContractViolation> {
    let mut raster = PanelRaster::blank(opts.side)?;
    for (i, e) in entities.iter().enumerate() {
        check_entity(e, layout)?;
        if entities[..i].iter().any(|o| o.component == e.component && o.slot == e.slot) {
            return Err(ContractViolation::OverlappingEntities { component: e.component, slot: e.slot });
        }
    }
    let s = opts.supersample.max(1);
    let step = 1.0 / s as f64;
    // Depth changes by at most the distance moved, so a pixel whose centre
    // is this far from every region boundary has all samples in one region.
    let reach = std::f64::consts::FRAC_1_SQRT_2 + 1e-9;
    for e in entities {
        let g = ShapeGeometry::of(e, layout, opts.side);
        let fill = palette_intensity(e.color) as u32;
        let (x0, y0, x1, y1) = g.pixel_bounds(opts.side);
        for y in y0..y1 {
            for x in x0..x1 {
                let idx = (y * opts.side + x) as usize;
                let d = g.depth(x as f64 + 0.5, y as f64 + 0.5);
                if d < -reach {
                    continue;
                }
                if d > g.outline + reach {
                    raster.pixels[idx] = fill as u8;
                    continue;
                }
                if d > reach && d < g.outline - reach {
                    raster.pixels[idx] = 0;
                    continue;
                }
                let under = raster.pixels[idx] as u32;
                let mut sum = 0;
                let mut touched = false;
                for sy in 0..s {
                    for sx in 0..s {
                        let px = x as f64 + (sx as f64 + 0.5) * step;
                        let py = y as f64 + (sy as f64 + 0.5) * step;
                        sum += match g.region(px, py) {
                            Region::Outside => under,
                            Region::Outline => {
                                touched = true;
                                0
                            }
                            Region::Fill => {
                                touched = true;
                                fill
                            }
                        };
                    }
                }
                if touched {
                    raster.pixels[idx] = ((sum as f64) / (s * s) as f64).round() as u8;
                }
            }
        }
    }
    Ok(raster)
}

/// Entities of a panel, with angles drawn from `angles`.
pub fn panel_entities(panel: &Panel, layout: &Layout, angles: &mut impl Rng) -> Result<Vec<Entity>, ContractViolation> {
    if panel.0.len() != layout.components.len() {
        return Err(ContractViolation::ComponentMismatch { left: panel.0.len(), right: layout.components.len() });
    }
    let mut out = Vec::new();
    for (ci, (v, comp)) in panel.0.iter().zip(&layout.components).enumerate() {
        let slots = comp.slots.len();
        if v.position <= 0 || v.position >= 1 << slots {
            return Err(ContractViolation::InvalidMask { mask: v.position, slots: slots as u32 });
        }
        for (slot, occupied) in decode_position(v.position, slots).into_iter().enumerate() {
            if occupied {
                out.push(Entity {
                    component: ci,
                    slot,
                    shape: v.shape,
                    size: v.size,
                    color: v.color,
                    angle: angles.gen_range(0..ANGLE_COUNT),
                });
            }
        }
    }
    Ok(out)
}

/// Deterministic angle stream for panel `panel_index` of problem `id`.
pub fn angle_rng(id: &str, panel_index: u64) -> ChaCha8Rng {
    let digest = Sha256::digest(id.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(panel_index);
    rng
}

pub fn render_panel(
    panel: &Panel,
    layout: &Layout,
    angles: &mut impl Rng,
    opts: RenderOptions,
) -> Result<PanelRaster, ContractViolation> {
    render_entities(&panel_entities(panel, layout, angles)?, layout, opts)
}

/// File stem suffixes: `q0..q7` for the context, `c0..c7` for candidates.
pub fn panel_names() -> impl Iterator<Item = String> {
    (0..8).map(|i| format!("q{i}")).chain((0..8).map(|i| format!("c{i}")))
}

/// All sixteen rasters of a problem, named `{id}_{q0..q7|c0..c7}`.
pub fn render_problem(p: &Problem, opts: RenderOptions) -> Result<Vec<(String, PanelRaster)>, ContractViolation> {
    let layout = p.layout();
    p.context
        .iter()
        .chain(&p.candidates)
        .zip(panel_names())
        .enumerate()
        .map(|(i, (panel, name))| {
            let mut rng = angle_rng(&p.id, i as u64);
            Ok((format!("{}_{name}", p.id), render_panel(panel, &layout, &mut rng, opts)?))
        })
        .collect()
}
