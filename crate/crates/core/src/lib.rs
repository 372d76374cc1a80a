//! Balanced geodesic triangulations of closed hyperbolic surfaces.
//!
//! Given a triangulated genus-g surface with a hyperbolic structure and a
//! positive weight on every directed edge, [`balance::solve`] finds the
//! unique geodesic mapping in the marked homotopy class where every vertex
//! is the weighted barycenter of its neighbours. [`verify`] certifies that
//! the result is an embedded geodesic triangulation, and [`weights::morph`]
//! connects any two such triangulations through mean-value-coordinate
//! weights.

pub mod balance;
pub mod error;
pub mod fuchsian;
pub mod gmap;
pub mod hyp2;
pub mod io;
pub mod simplicial;
pub mod verify;
pub mod weights;

pub use balance::{solve, solve_warm, SolveTrace, SolverConfig};
pub use error::{Error, Result};
pub use fuchsian::{GroupElement, SurfaceGroup, Word};
pub use gmap::{distance_x, DeckLabels, GeodesicMapping, Label, Weights};
pub use hyp2::{HPoint, Isometry, TangentVec};
pub use simplicial::Complex;
