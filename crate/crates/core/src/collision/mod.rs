//! Triangle-level distance and penetration, lifted to meshes through a BVH.

pub mod bvh;
pub mod contact;
pub mod epa;
pub mod gjk;

pub use bvh::{Bvh, BvhNode, NodeKind};
pub use contact::{
    brute_force_contact, part_contact, part_contact_with_stats, Collider, ContactClass,
    ContactQuery, ContactReport, ContactStats, Witness,
};
pub use epa::{epa_penetration, penetration, sat_penetration, Penetration};
pub use gjk::{feature_distance, gjk_distance, Triangle, CONTACT_EPS};
