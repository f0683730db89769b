//! Trace invariants of p-regular multigraphs.

mod enumerate;
mod graph;
mod plan;

pub use enumerate::{enumerate_multigraphs, enumerate_rank2, from_adjacency};
pub use graph::{bouquet_graph, melon_graph, GraphFlavor, MelonStyle, Slot, TraceGraph, Validation, Violation};
pub use plan::{
    evaluate, evaluate_direct, evaluate_real, evaluate_tensor, paired_trace, ContractionPlan, PlanStrategy,
    MAX_INTERMEDIATE, REAL_TOLERANCE,
};

use crate::tensor::SymmetryClass;

/// Melon convention matching a symmetry class.
pub fn melon_style(class: SymmetryClass) -> MelonStyle {
    match class {
        SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => MelonStyle::Real,
        SymmetryClass::Hermitian => MelonStyle::Hermitian,
        SymmetryClass::SelfDual => MelonStyle::SelfDual,
    }
}
