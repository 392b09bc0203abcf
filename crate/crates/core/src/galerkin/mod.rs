//! Galerkin discretisation of boundary integral operators on sphere meshes.

mod assembly;
mod export;
mod mesh;
mod quadrature;
mod system;

pub use assembly::{
    check_budget, classify, dense_bytes, physical_points, quad_pair, Discretization, PanelPoints,
};
pub use export::{read_dense, write_dense, DenseMetadata};
pub use mesh::{sphere_mesh, Triangle, TriangleMesh};
pub use quadrature::{
    GaussLegendre, PairRelation, PairRule, QuadratureConfig, QuadratureRules, TriangleRule,
};
pub use system::{Assembler, PointSystem, Precomputed};
