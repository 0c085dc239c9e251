//! Tropical differential forms, integrable tropical connections, the bar
//! complex and descent data for rational polyhedral complexes.
//!
//! All arithmetic is exact over the rationals.

pub mod bar;
pub mod connections;
pub mod corpus;
pub mod descent;
pub mod forms;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod matroids;
pub mod polyhedra;
