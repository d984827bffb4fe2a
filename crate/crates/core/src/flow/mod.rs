//! Morse-Smale flows: critical-element data, Milnor metrics and Franks
//! surgery.

pub mod franks;
pub mod milnor;
pub mod system;

pub use franks::{
    compare_milnor, franks_comparison_rhs, franks_surgery, surgered_block, MilnorComparison, SurgeryDatum,
    SurgeryMap, Surgered,
};
pub use milnor::{
    fixed_point_line, milnor_metric, orbit_line_metric, orbit_piece, MilnorMetric,
};
pub use system::{
    ClosedOrbitDatum, CriticalElement, FixedPointDatum, MorseSmaleSystem, Orientation, Sign,
};
