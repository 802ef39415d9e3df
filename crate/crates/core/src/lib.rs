//! Weighted alpha complexes in arbitrary ambient dimension.
//!
//! The alpha complex of a weighted point set is computed here without ever
//! building a Delaunay or regular triangulation. Each candidate simplex is
//! decided by one small convex quadratic program: the minimum of the power
//! distance of a base vertex over the common face of the power cells of the
//! simplex vertices. The QP is attacked from its dual, which is always
//! feasible at zero, so a candidate can be rejected early as soon as the
//! dual objective climbs past the cutoff.
//!
//! The crate is organised around that pipeline:
//!
//! * [`cech`] builds the intersection graph of the weighted balls, which
//!   bounds the constraint set of every QP by the neighbours of the base
//!   vertex.
//! * [`qp`] is the dual active-set solver with early termination.
//! * [`builder`] assembles per-vertex QP coefficients and runs the
//!   dimension-by-dimension candidate sweep into a [`FilteredComplex`].
//! * [`complex`] and [`bary`] hold the simplicial machinery (skeleta,
//!   candidate generation, boundary matrices, barycentric subdivision).
//! * [`homology`] computes Betti numbers over a prime field with sparse
//!   elimination.
//! * [`oracle`] is a deliberately independent brute-force reimplementation
//!   (exhaustive active-set enumeration, no pruning) used to certify the
//!   main path in tests and in the `verify` CLI command.
//!
//! ```
//! use alphax::{build_alpha, BuildParams, WeightedPoints};
//!
//! // Unit equilateral triangle, unweighted, cutoff 0.4.
//! let h = 3f64.sqrt() / 2.0;
//! let coords = vec![0.0, 0.0, 1.0, 0.0, 0.5, h];
//! let pts = WeightedPoints::unweighted(coords, 2, 0.4).unwrap();
//! let (complex, _witness) = build_alpha(&pts, &BuildParams::new(2)).unwrap();
//! assert_eq!(complex.sizes(), vec![3, 3, 1]);
//! ```

pub mod bary;
pub mod builder;
pub mod cech;
pub mod complex;
pub mod homology;
pub mod oracle;
pub mod qp;
pub mod tol;

pub use bary::{barycentric_embed, BarycentricEmbedding, BaryError, Flag};
pub use builder::{
    betti_pipeline, build_alpha, build_alpha_with_graph, test_simplex, vertex_coefficients,
    BuildError, BuildParams, VertexCoefficients, WitnessMap,
};
pub use cech::{
    build_cech_graph, build_complete_graph, CechGraph, GraphError, PointsError, WeightedPoints,
};
pub use complex::{FilteredComplex, InvariantError, Simplex, SimplexError};
pub use homology::{betti, rank_fp, stirling_reference, BettiVector, FpError, SparseMatrixFp};
pub use oracle::{
    brute_alpha, compare, primal_enumerate, ComplexDiff, OracleError, PrimalProblem,
    PrimalSolution,
};
pub use qp::{
    primal_from_dual, single_constraint_bound, solve_dual, DualProblem, DualSolution, DualStatus,
    DualWorkspace, QpError,
};
pub use tol::Tolerances;
