use thiserror::Error;

/// A caller broke an operation's precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractViolation {
    #[error("occupancy vector has {found} entries but the layout has {expected} slots")]
    SlotCountMismatch { expected: usize, found: usize },

    #[error("position mask {mask:#b} is not valid for {slots} slots")]
    InvalidMask { mask: i64, slots: u32 },

    #[error("panels have {left} and {right} components")]
    ComponentMismatch { left: usize, right: usize },

    #[error("problem {id} has no truth candidate to complete the matrix")]
    IncompleteProblem { id: String },

    #[error("problem {id} does not have the shape of its configuration: {detail}")]
    MalformedProblem { id: String, detail: String },

    #[error("two entities occupy slot {slot} of component {component}")]
    OverlappingEntities { component: usize, slot: usize },

    #[error("{attribute} value {value} is outside {lo}..={hi}")]
    OutOfRange { attribute: String, value: i64, lo: i64, hi: i64 },

    #[error("raster must be square and at least 64 pixels wide, got {width}x{height}")]
    RasterShape { width: u32, height: u32 },
}
