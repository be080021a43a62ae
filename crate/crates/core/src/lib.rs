//! Candidate articulation search for segmented 3D shapes.
//!
//! For every part the crate proposes translation axes from the part's
//! principal axes and rotation axes through a small set of pivots, and keeps
//! the motions that can travel far enough without colliding with or
//! detaching from the rest of the shape.

pub mod audit;
pub mod collision;
pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod labels;
pub mod mesh;
pub mod motion;
pub mod records;
pub mod search;
pub mod shape;
pub mod synth;

pub use error::{Error, Result};
pub use geom::{Aabb, Dir3, Line3, Obb, Pca, Point3, RigidPose, Vec3};
pub use mesh::TriMesh;
pub use shape::{GroundTruthArticulation, GtRange, Normalization, Part, Shape};
