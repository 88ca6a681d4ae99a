pub mod clifford;
pub mod dirac_ops;
pub mod dynamics;
pub mod geometry;
pub mod hamilton_jacobi;
pub mod poly;
pub mod stat_mech;
pub mod verify;
