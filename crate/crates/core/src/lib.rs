//! Approximate Vietoris-Rips persistent homology in subquadratic time.
//!
//! The pipeline subsamples an n-point metric space by a farthest-first
//! traversal, builds a sparse zigzag filtration on the selected points whose
//! total number of simplex updates is controlled by the approximation
//! parameter, and computes its zigzag persistence. An exact pipeline
//! (full Vietoris-Rips filtration plus standard matrix reduction) is kept
//! alongside as a verification oracle, together with diagram-comparison
//! routines that check the advertised additive and multiplicative error
//! bounds.
//!
//! Module map:
//! * [`metric`] - finite metric spaces from point clouds or distance matrices
//! * [`greedy`] - farthest-first traversal, deletion times, level sets
//! * [`sparse`] - weights, relaxed distances, projections, critical values
//! * [`complex`] - simplicial complexes, Rips builders, zigzag event streams
//! * [`persistence`] - standard reduction and the zigzag persistence solver
//! * [`diagram`] - persistence-diagram comparison (offsets, bottleneck, bands)

pub mod complex;
pub mod diagram;
pub mod greedy;
pub mod metric;
pub mod persistence;
pub mod sparse;
pub mod textio;
