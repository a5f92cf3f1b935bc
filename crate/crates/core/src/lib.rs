//! Timelike maximal surfaces in (1+2)-Minkowski space evolved from planar
//! initial data by the isothermal-gauge d'Alembert representation, together
//! with tools for locating and classifying where the evolution degenerates.

pub mod curvature;
pub mod embedding;
pub mod error;
pub mod evolution;
pub mod gallery;
pub mod gauge_transform;
pub mod geometry;
pub mod initial_data;
pub mod numerics;
pub mod singularity;
pub mod tolerance;

pub use error::{Result, SheetError};
pub use evolution::{
    evaluate_grid, evolve, mesh_export, FnSheet, IsothermalSheet, Jet1, Jet2, Sheet,
};
pub use geometry::{Domain, Vec2, Window};
pub use initial_data::{
    angular_lift, normalize_initial_data, null_directions, CurveProvider, InitialData,
    NormalizeOptions, VelocityProvider,
};
pub use tolerance::{ProviderKind, Tolerances};
