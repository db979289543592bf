//! Displacement interpolation of probability measures on finite graphs,
//! weak transport costs, and numerical certification of the entropy
//! inequalities they support.

pub mod cli;
pub mod clt;
pub mod error;
pub mod graph;
pub mod interpolation;
pub mod measure;
pub mod tensorize;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{cartesian_product, enumerate_geodesics, GeodesicTable, Graph, MetricGraph, ProductLayout};
pub use interpolation::Time;
pub use measure::{Coupling, Kernel, Measure};
