//! Homology, period matrices, Abel maps and the Riemann constant for cyclic
//! covers.

mod homology;
mod path;

pub use homology::{
    branch_tree, homology_basis, intersection_number, monodromy, symplectic_reduction, Cycle, Edge, HomologyBasis,
    Segment,
};
pub use path::{
    continue_y, integrate_from_branch, integrate_ray, integrate_segment, segment_clearance, QuadratureRule,
};
mod matrices;
pub use matrices::{cycle_periods, edge_integrals, period_matrices, PeriodData, TAU_SYMMETRY_TOL};
mod abel;
pub use abel::{AbelMap, AbelPath, AbelResult, PathHint};
mod riemann;
pub use riemann::{
    random_points, reduce_to_cell, riemann_class, riemann_constant, RiemannClass, RiemannConstantData, RiemannOptions,
};
