//! Domain types shared by every stage: attribute kinds and codes, panel
//! layouts, attribute matrices and problems.
//!
//! Every attribute is an integer code. `Type`, `Size` and `Color` are
//! ordinals, `Number` is an entity count and `Position` is an occupancy
//! bitmask over the slots of a component (bit `i` set iff slot `i` holds an
//! entity). `Angle` exists only as render-time rotation and never enters an
//! [`AttributeMatrix`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ContractViolation;

pub type Code = i64;

pub const TYPE_NAMES: [&str; 5] = ["triangle", "square", "pentagon", "hexagon", "circle"];
pub const TYPE_COUNT: i64 = 5;
pub const SIZE_COUNT: i64 = 6;
pub const COLOR_COUNT: i64 = 10;
pub const ANGLE_COUNT: i64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Number,
    Position,
    Type,
    Size,
    Color,
    /// Rotation noise. Representable, never reasoned over.
    Angle,
}

impl AttributeKind {
    pub const REASONED: [AttributeKind; 5] = [
        AttributeKind::Number,
        AttributeKind::Position,
        AttributeKind::Type,
        AttributeKind::Size,
        AttributeKind::Color,
    ];

    pub fn is_reasoned(self) -> bool {
        self != AttributeKind::Angle
    }

    pub fn name(self) -> &'static str {
        match self {
            AttributeKind::Number => "number",
            AttributeKind::Position => "position",
            AttributeKind::Type => "type",
            AttributeKind::Size => "size",
            AttributeKind::Color => "color",
            AttributeKind::Angle => "angle",
        }
    }

    /// Widest range a code of this kind may take in any layout. `Position`
    /// masks are bounded by the nine slots of the largest grid.
    pub fn declared_range(self) -> ValueRange {
        match self {
            AttributeKind::Number => ValueRange::new(1, 9),
            AttributeKind::Position => ValueRange::new(1, (1 << 9) - 1),
            AttributeKind::Type => ValueRange::new(0, TYPE_COUNT - 1),
            AttributeKind::Size => ValueRange::new(0, SIZE_COUNT - 1),
            AttributeKind::Color => ValueRange::new(0, COLOR_COUNT - 1),
            AttributeKind::Angle => ValueRange::new(0, ANGLE_COUNT - 1),
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttributeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "number" => AttributeKind::Number,
            "position" => AttributeKind::Position,
            "type" => AttributeKind::Type,
            "size" => AttributeKind::Size,
            "color" => AttributeKind::Color,
            "angle" => AttributeKind::Angle,
            other => return Err(format!("unknown attribute `{other}`")),
        })
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lo: Code,
    pub hi: Code,
}

impl ValueRange {
    pub const fn new(lo: Code, hi: Code) -> Self {
        ValueRange { lo, hi }
    }

    pub fn contains(&self, v: Code) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = Code> {
        self.lo..=self.hi
    }
}

/// Rule families an attribute can follow, plus the Position-specific set
/// operations. `DistributeThreeUp` cycles column values with
/// `S = [[0,1,0],[0,0,1],[1,0,0]]`, `DistributeThreeDown` with its transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Constant,
    Progression,
    ArithmeticPlus,
    ArithmeticMinus,
    DistributeThreeUp,
    DistributeThreeDown,
    PositionShift(u8),
    PositionUnion,
    PositionDifference,
    Unclassified,
}

impl RuleKind {
    pub fn is_distribute_three(self) -> bool {
        matches!(self, RuleKind::DistributeThreeUp | RuleKind::DistributeThreeDown)
    }

    pub fn is_position_only(self) -> bool {
        matches!(self, RuleKind::PositionShift(_) | RuleKind::PositionUnion | RuleKind::PositionDifference)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Constant => f.write_str("constant"),
            RuleKind::Progression => f.write_str("progression"),
            RuleKind::ArithmeticPlus => f.write_str("arithmetic_plus"),
            RuleKind::ArithmeticMinus => f.write_str("arithmetic_minus"),
            RuleKind::DistributeThreeUp => f.write_str("distribute_three_up"),
            RuleKind::DistributeThreeDown => f.write_str("distribute_three_down"),
            RuleKind::PositionShift(k) => write!(f, "position_shift_{k}"),
            RuleKind::PositionUnion => f.write_str("position_union"),
            RuleKind::PositionDifference => f.write_str("position_difference"),
            RuleKind::Unclassified => f.write_str("unclassified"),
        }
    }
}

impl FromStr for RuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "constant" => RuleKind::Constant,
            "progression" => RuleKind::Progression,
            "arithmetic_plus" => RuleKind::ArithmeticPlus,
            "arithmetic_minus" => RuleKind::ArithmeticMinus,
            "distribute_three_up" => RuleKind::DistributeThreeUp,
            "distribute_three_down" => RuleKind::DistributeThreeDown,
            "position_union" => RuleKind::PositionUnion,
            "position_difference" => RuleKind::PositionDifference,
            "unclassified" => RuleKind::Unclassified,
            other => match other.strip_prefix("position_shift_") {
                Some(k) => RuleKind::PositionShift(k.parse().map_err(|_| format!("bad shift offset in `{other}`"))?),
                None => return Err(format!("unknown rule kind `{other}`")),
            },
        })
    }
}

macro_rules! serde_via_str {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(RuleKind);
serde_via_str!(Configuration);
serde_via_str!(ComponentRole);
serde_via_str!(Label);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Configuration {
    Center,
    Grid2x2,
    Grid3x3,
    LeftRight,
    UpDown,
    OutInCenter,
    OutInGrid,
}

impl Configuration {
    pub const ALL: [Configuration; 7] = [
        Configuration::Center,
        Configuration::Grid2x2,
        Configuration::Grid3x3,
        Configuration::LeftRight,
        Configuration::UpDown,
        Configuration::OutInCenter,
        Configuration::OutInGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Configuration::Center => "center",
            Configuration::Grid2x2 => "grid_2x2",
            Configuration::Grid3x3 => "grid_3x3",
            Configuration::LeftRight => "left_right",
            Configuration::UpDown => "up_down",
            Configuration::OutInCenter => "out_in_center",
            Configuration::OutInGrid => "out_in_grid",
        }
    }

    pub fn layout(self) -> Layout {
        Layout::of(self)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Configuration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "center" | "center_single" => Configuration::Center,
            "grid_2x2" | "2x2grid" | "2x2_grid" | "2x2" | "distribute_four" => Configuration::Grid2x2,
            "grid_3x3" | "3x3grid" | "3x3_grid" | "3x3" | "distribute_nine" => Configuration::Grid3x3,
            "left_right" | "leftright" => Configuration::LeftRight,
            "up_down" | "updown" => Configuration::UpDown,
            "out_in_center" | "outincenter" | "out_incenter" => Configuration::OutInCenter,
            "out_in_grid" | "outingrid" | "out_ingrid" => Configuration::OutInGrid,
            _ => return Err(format!("unknown configuration `{s}`")),
        })
    }
}

/// Where a component sits in its layout. Rule pools are keyed by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentRole {
    Center,
    Left,
    Right,
    Up,
    Down,
    Out,
    InCenter,
    Grid2x2,
    Grid3x3,
    InGrid,
}

impl ComponentRole {
    pub fn name(self) -> &'static str {
        match self {
            ComponentRole::Center => "center",
            ComponentRole::Left => "left",
            ComponentRole::Right => "right",
            ComponentRole::Up => "up",
            ComponentRole::Down => "down",
            ComponentRole::Out => "out",
            ComponentRole::InCenter => "in_center",
            ComponentRole::Grid2x2 => "grid_2x2",
            ComponentRole::Grid3x3 => "grid_3x3",
            ComponentRole::InGrid => "in_grid",
        }
    }
}

impl fmt::Display for ComponentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "center" => ComponentRole::Center,
            "left" => ComponentRole::Left,
            "right" => ComponentRole::Right,
            "up" => ComponentRole::Up,
            "down" => ComponentRole::Down,
            "out" => ComponentRole::Out,
            "in_center" => ComponentRole::InCenter,
            "grid_2x2" => ComponentRole::Grid2x2,
            "grid_3x3" => ComponentRole::Grid3x3,
            "in_grid" => ComponentRole::InGrid,
            other => return Err(format!("unknown component role `{other}`")),
        })
    }
}

/// Axis-aligned rectangle in normalized panel coordinates (`0..=1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn extent(&self) -> f64 {
        (self.x1 - self.x0).min(self.y1 - self.y0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x < self.x1 && self.y0 <= y && y < self.y1
    }

    fn grid(region: Rect, n: usize) -> Vec<Rect> {
        let w = (region.x1 - region.x0) / n as f64;
        let h = (region.y1 - region.y0) / n as f64;
        (0..n * n)
            .map(|i| {
                let (r, c) = ((i / n) as f64, (i % n) as f64);
                Rect::new(region.x0 + c * w, region.y0 + r * h, region.x0 + (c + 1.0) * w, region.y0 + (r + 1.0) * h)
            })
            .collect()
    }
}

/// One independently-ruled group of entities inside a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub role: ComponentRole,
    /// Bounding region; nested components are split along these boundaries.
    pub region: Rect,
    /// Slot cells, row-major. Bit `i` of a Position mask refers to `slots[i]`.
    pub slots: Vec<Rect>,
    pub type_range: ValueRange,
    pub size_range: ValueRange,
    pub color_range: ValueRange,
}

impl Component {
    pub fn slot_count(&self) -> u32 {
        self.slots.len() as u32
    }

    /// Grid components vary Number and Position; single-slot ones do not.
    pub fn has_variable_layout(&self) -> bool {
        self.slots.len() > 1
    }

    pub fn range(&self, kind: AttributeKind) -> ValueRange {
        let n = self.slots.len() as i64;
        match kind {
            AttributeKind::Number => ValueRange::new(1, n),
            AttributeKind::Position => ValueRange::new(1, (1 << n) - 1),
            AttributeKind::Type => self.type_range,
            AttributeKind::Size => self.size_range,
            AttributeKind::Color => self.color_range,
            AttributeKind::Angle => AttributeKind::Angle.declared_range(),
        }
    }
}

/// A configuration together with the geometry of its components.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub config: Configuration,
    pub components: Vec<Component>,
}

const FULL: Rect = Rect::new(0.0, 0.0, 1.0, 1.0);
const ALL_TYPES: ValueRange = ValueRange::new(0, TYPE_COUNT - 1);
const ALL_SIZES: ValueRange = ValueRange::new(0, SIZE_COUNT - 1);
const ALL_COLORS: ValueRange = ValueRange::new(0, COLOR_COUNT - 1);
// Outer shapes of nested layouts stay white and large so inner entities sit
// clear of their outline.
const OUTER_TYPES: ValueRange = ValueRange::new(2, TYPE_COUNT - 1);
const OUTER_COLOR: ValueRange = ValueRange::new(0, 0);

impl Layout {
    pub fn of(config: Configuration) -> Layout {
        let single = |role, rect: Rect| Component {
            role,
            region: rect,
            slots: vec![rect],
            type_range: ALL_TYPES,
            size_range: ALL_SIZES,
            color_range: ALL_COLORS,
        };
        let grid = |role, region: Rect, n| Component {
            role,
            region,
            slots: Rect::grid(region, n),
            type_range: ALL_TYPES,
            size_range: ALL_SIZES,
            color_range: ALL_COLORS,
        };
        let outer = |sizes| Component {
            role: ComponentRole::Out,
            region: FULL,
            slots: vec![FULL],
            type_range: OUTER_TYPES,
            size_range: sizes,
            color_range: OUTER_COLOR,
        };
        let components = match config {
            Configuration::Center => vec![single(ComponentRole::Center, FULL)],
            Configuration::Grid2x2 => vec![grid(ComponentRole::Grid2x2, FULL, 2)],
            Configuration::Grid3x3 => vec![grid(ComponentRole::Grid3x3, FULL, 3)],
            Configuration::LeftRight => vec![
                single(ComponentRole::Left, Rect::new(0.0, 0.25, 0.5, 0.75)),
                single(ComponentRole::Right, Rect::new(0.5, 0.25, 1.0, 0.75)),
            ],
            Configuration::UpDown => vec![
                single(ComponentRole::Up, Rect::new(0.25, 0.0, 0.75, 0.5)),
                single(ComponentRole::Down, Rect::new(0.25, 0.5, 0.75, 1.0)),
            ],
            Configuration::OutInCenter => vec![
                outer(ValueRange::new(3, 5)),
                single(ComponentRole::InCenter, Rect::new(0.325, 0.325, 0.675, 0.675)),
            ],
            Configuration::OutInGrid => {
                let mut inner = grid(ComponentRole::InGrid, Rect::new(0.3, 0.3, 0.7, 0.7), 2);
                inner.size_range = ValueRange::new(2, 5);
                vec![outer(ValueRange::new(4, 5)), inner]
            }
        };
        Layout { config, components }
    }

    /// Index of the component that owns point `(x, y)`: the innermost one
    /// whose region contains it.
    pub fn component_at(&self, x: f64, y: f64) -> Option<usize> {
        self.components.iter().enumerate().rev().find(|(_, c)| c.region.contains(x, y)).map(|(i, _)| i)
    }
}

/// Encode a per-slot occupancy vector as a Position bitmask.
pub fn encode_position(occupancy: &[bool], slot_count: usize) -> Result<Code, ContractViolation> {
    if occupancy.len() != slot_count {
        return Err(ContractViolation::SlotCountMismatch { expected: slot_count, found: occupancy.len() });
    }
    Ok(occupancy.iter().enumerate().filter(|(_, &o)| o).fold(0, |m, (i, _)| m | (1 << i)))
}

pub fn decode_position(mask: Code, slot_count: usize) -> Vec<bool> {
    (0..slot_count).map(|i| mask >> i & 1 == 1).collect()
}

pub fn popcount(mask: Code) -> Code {
    mask.count_ones() as Code
}

/// Attribute values of one component in one panel. Entities of a component
/// share Type, Size and Color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentValues {
    pub color: Code,
    pub number: Code,
    pub position: Code,
    pub size: Code,
    #[serde(rename = "type")]
    pub shape: Code,
}

impl ComponentValues {
    pub fn get(&self, kind: AttributeKind) -> Code {
        match kind {
            AttributeKind::Number => self.number,
            AttributeKind::Position => self.position,
            AttributeKind::Type => self.shape,
            AttributeKind::Size => self.size,
            AttributeKind::Color => self.color,
            AttributeKind::Angle => 0,
        }
    }

    pub fn set(&mut self, kind: AttributeKind, v: Code) {
        match kind {
            AttributeKind::Number => self.number = v,
            AttributeKind::Position => self.position = v,
            AttributeKind::Type => self.shape = v,
            AttributeKind::Size => self.size = v,
            AttributeKind::Color => self.color = v,
            AttributeKind::Angle => {}
        }
    }
}

/// A panel's attributes, one entry per layout component in layout order.
/// Also the candidate attribute tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Panel(pub Vec<ComponentValues>);

impl Panel {
    pub fn component(&self, i: usize) -> &ComponentValues {
        &self.0[i]
    }
}

/// Number of attributes in which two candidate tuples differ.
///
/// Number and Position of one component are coupled (the mask's popcount is
/// the count), so a Number change counts once even though the mask changes
/// with it. A Position change that keeps the count counts once as well.
pub fn attribute_tuple_distance(a: &Panel, b: &Panel) -> Result<usize, ContractViolation> {
    if a.0.len() != b.0.len() {
        return Err(ContractViolation::ComponentMismatch { left: a.0.len(), right: b.0.len() });
    }
    Ok(a.0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| {
            let layout = usize::from(x.number != y.number || x.position != y.position);
            let rest = [AttributeKind::Type, AttributeKind::Size, AttributeKind::Color]
                .iter()
                .filter(|&&k| x.get(k) != y.get(k))
                .count();
            layout + rest
        })
        .sum())
}

/// The 3x3 matrix of one attribute of one component over a question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeMatrix {
    pub kind: AttributeKind,
    /// Slot count of the owning component (for Position semantics).
    pub slots: u32,
    pub range: ValueRange,
    /// Row-major cells; `cells[2][2]` is `None` in query form.
    pub cells: [[Option<Code>; 3]; 3],
}

impl AttributeMatrix {
    pub fn from_rows(kind: AttributeKind, slots: u32, range: ValueRange, rows: [[Code; 3]; 3]) -> Self {
        AttributeMatrix { kind, slots, range, cells: rows.map(|r| r.map(Some)) }
    }

    pub fn is_query(&self) -> bool {
        self.cells[2][2].is_none() && self.empty_cells() == 1
    }

    pub fn is_complete(&self) -> bool {
        self.empty_cells() == 0
    }

    fn empty_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Column `j` (0-based) as the vector of its three rows.
    pub fn column(&self, j: usize) -> [Option<Code>; 3] {
        [self.cells[0][j], self.cells[1][j], self.cells[2][j]]
    }

    /// Columns `a1, a2, a3` of a completed matrix.
    pub fn columns(&self) -> Option<[[Code; 3]; 3]> {
        let col = |j| -> Option<[Code; 3]> { Some([self.cells[0][j]?, self.cells[1][j]?, self.cells[2][j]?]) };
        Some([col(0)?, col(1)?, col(2)?])
    }

    pub fn with_answer(&self, v: Code) -> Self {
        let mut m = self.clone();
        m.cells[2][2] = Some(v);
        m
    }
}

/// What the generator did with one attribute of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Rule(RuleKind),
    /// Uniformity noise: random values, no rule.
    Noise,
    /// Free attribute of a grid (the non-governing one of Number/Position).
    Irrelevant,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Rule(k) => write!(f, "{k}"),
            Label::Noise => f.write_str("noise"),
            Label::Irrelevant => f.write_str("irrelevant"),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "noise" => Label::Noise,
            "irrelevant" => Label::Irrelevant,
            other => Label::Rule(other.parse()?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub attribute: AttributeKind,
    pub component: usize,
    pub label: Label,
}

/// One question: eight context panels, eight candidates and (for training
/// data) the index of the correct candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub annotations: Vec<Annotation>,
    pub candidates: Vec<Panel>,
    pub config: Configuration,
    /// Context panels in row-major order; the ninth cell is the answer.
    pub context: Vec<Panel>,
    pub id: String,
    pub truth_index: Option<usize>,
}

impl Problem {
    pub fn layout(&self) -> Layout {
        self.config.layout()
    }

    /// Value of `kind` for component `component` at grid cell `(row, col)`,
    /// `None` for the missing cell.
    fn cell(&self, component: usize, kind: AttributeKind, row: usize, col: usize) -> Option<Code> {
        let idx = row * 3 + col;
        self.context.get(idx).map(|p| p.component(component).get(kind))
    }

    pub fn query_matrix(&self, component: usize, kind: AttributeKind) -> AttributeMatrix {
        let layout = self.layout();
        let comp = &layout.components[component];
        let mut cells = [[None; 3]; 3];
        for (r, row) in cells.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.cell(component, kind, r, c);
            }
        }
        cells[2][2] = None;
        AttributeMatrix { kind, slots: comp.slot_count(), range: comp.range(kind), cells }
    }

    /// The matrix with cell (3,3) filled from candidate `candidate`.
    pub fn completed_matrix(&self, component: usize, kind: AttributeKind, candidate: usize) -> AttributeMatrix {
        let q = self.query_matrix(component, kind);
        q.with_answer(self.candidates[candidate].component(component).get(kind))
    }

    pub fn truth(&self) -> Option<&Panel> {
        self.truth_index.and_then(|i| self.candidates.get(i))
    }

    pub fn annotation(&self, component: usize, kind: AttributeKind) -> Option<Label> {
        self.annotations.iter().find(|a| a.component == component && a.attribute == kind).map(|a| a.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelRef {
    Context(usize),
    Candidate(usize),
}

impl fmt::Display for PanelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PanelRef::Context(i) => write!(f, "q{i}"),
            PanelRef::Candidate(i) => write!(f, "c{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ContextCount(usize),
    CandidateCount(usize),
    TruthIndex(usize),
    ComponentCount { panel: PanelRef, expected: usize, found: usize },
    OutOfRange { panel: PanelRef, component: usize, kind: AttributeKind, value: Code },
    PopcountMismatch { panel: PanelRef, component: usize, number: Code, position: Code },
    DistractorEqualsTruth { candidate: usize },
    BadAnnotation { component: usize, kind: AttributeKind },
    RuleViolated { component: usize, role: ComponentRole, kind: AttributeKind, rule: RuleKind, found: RuleKind },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ContextCount(n) => write!(f, "context panel count {n} != 8"),
            Violation::CandidateCount(n) => write!(f, "candidate count {n} != 8"),
            Violation::TruthIndex(i) => write!(f, "truth index {i} out of range 0..8"),
            Violation::ComponentCount { panel, expected, found } => {
                write!(f, "panel {panel} has {found} components, layout has {expected}")
            }
            Violation::OutOfRange { panel, component, kind, value } => {
                write!(f, "panel {panel} component {component}: {kind} value {value} out of range")
            }
            Violation::PopcountMismatch { panel, component, number, position } => write!(
                f,
                "panel {panel} component {component}: position {position:#b} has {} entities, number is {number}",
                popcount(*position)
            ),
            Violation::DistractorEqualsTruth { candidate } => {
                write!(f, "candidate {candidate} is identical to the truth")
            }
            Violation::BadAnnotation { component, kind } => {
                write!(f, "annotation for component {component} {kind} refers to nothing")
            }
            Violation::RuleViolated { component, role, kind, rule, found } => {
                write!(f, "component {component} ({role}) {kind}: annotated {rule} but completed matrix is {found}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Check every structural invariant of `p`. Never fails; problems are
/// reported as a list.
pub fn validate_problem(p: &Problem) -> ValidationReport {
    let mut out = Vec::new();
    let layout = p.layout();
    let ncomp = layout.components.len();

    if p.context.len() != 8 {
        out.push(Violation::ContextCount(p.context.len()));
    }
    if p.candidates.len() != 8 {
        out.push(Violation::CandidateCount(p.candidates.len()));
    }
    if let Some(t) = p.truth_index {
        if t >= p.candidates.len() || t >= 8 {
            out.push(Violation::TruthIndex(t));
        }
    }

    let panels = p
        .context
        .iter()
        .enumerate()
        .map(|(i, x)| (PanelRef::Context(i), x))
        .chain(p.candidates.iter().enumerate().map(|(i, x)| (PanelRef::Candidate(i), x)));
    let mut shape_ok = true;
    for (panel, values) in panels {
        if values.0.len() != ncomp {
            out.push(Violation::ComponentCount { panel, expected: ncomp, found: values.0.len() });
            shape_ok = false;
            continue;
        }
        for (ci, (v, comp)) in values.0.iter().zip(&layout.components).enumerate() {
            for kind in AttributeKind::REASONED {
                let value = v.get(kind);
                if !comp.range(kind).contains(value) {
                    out.push(Violation::OutOfRange { panel, component: ci, kind, value });
                    shape_ok = false;
                }
            }
            if popcount(v.position) != v.number {
                out.push(Violation::PopcountMismatch { panel, component: ci, number: v.number, position: v.position });
            }
        }
    }

    let structurally_sound = shape_ok && p.context.len() == 8 && p.candidates.len() == 8;
    let truth = p.truth_index.filter(|&t| t < p.candidates.len());
    if let (Some(t), true) = (truth, structurally_sound) {
        for (i, c) in p.candidates.iter().enumerate() {
            if i != t && *c == p.candidates[t] {
                out.push(Violation::DistractorEqualsTruth { candidate: i });
            }
        }
        for a in &p.annotations {
            if a.component >= ncomp || !a.attribute.is_reasoned() {
                out.push(Violation::BadAnnotation { component: a.component, kind: a.attribute });
                continue;
            }
            if let Label::Rule(rule) = a.label {
                let m = p.completed_matrix(a.component, a.attribute, t);
                let found = crate::induction::classify_matrix(&m).unwrap_or(RuleKind::Unclassified);
                if found != rule {
                    out.push(Violation::RuleViolated {
                        component: a.component,
                        role: layout.components[a.component].role,
                        kind: a.attribute,
                        rule,
                        found,
                    });
                }
            }
        }
    }

    ValidationReport { violations: out }
}

/// Count problems per configuration.
pub fn config_counts<'a>(problems: impl IntoIterator<Item = &'a Problem>) -> BTreeMap<Configuration, usize> {
    let mut counts = BTreeMap::new();
    for p in problems {
        *counts.entry(p.config).or_insert(0) += 1;
    }
    counts
}
