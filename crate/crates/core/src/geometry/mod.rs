//! Exact geometry of the Vicsek set: addresses, lattice points, the cable
//! systems `V̄_m`, the geodesic metric and the measures `μ` and `ν`.

pub mod address;
pub mod ball;
pub mod cache;
pub mod graph;
pub mod lattice;
pub mod measure;
pub mod metric;

pub use address::{Address, Anchor, CellMap, Digit};
pub use ball::{ball_cells, ball_measure, BallApprox, BallProfile};
pub use graph::{shared_graph, CableGraph, Edge, EdgeId, VertexId};
pub use lattice::LatticePoint;
pub use measure::{alpha_p, MeasureContext, D_H, DIAMETER};
pub use metric::{distance, distance_at, parse_radius, Length, Radius};
