//! Cochain complexes, their cohomology and determinant lines.

pub mod cochain;
pub mod cohomology;
pub mod det_line;
pub mod filtration;

pub use cochain::{CochainComplex, GradedMetric};
pub use cohomology::{betti_numbers, cohomology, CohomologyReport};
pub use det_line::{
    canonical_element_log_norm, canonical_element_log_norm_with_lifts, canonical_element_norm,
    det_metric, transported_log_norm, wedge_oracle_log_norm, DetGenerator, MetricedDetLine,
};
pub use filtration::{
    fold_filtration, fold_lines, fuse, fusion_order_invariance_check, les_of_pair, level_lines,
    FilteredComplex, FusionTree, Les,
};
