//! Numerical and exact verification of fractional GJMS operators on flat and
//! model geometries.

pub mod energy;
pub mod error;
pub mod fit;
pub mod mesh;
pub mod mode;
pub mod model;
pub mod params;
pub mod poly;
pub mod profile;
pub mod recursion;
pub mod report;
pub mod scattering;
pub mod special;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use fit::{ExpansionFit, FitOptions};
pub use params::FracParams;
pub use poly::RationalPoly;
pub use profile::{BesselForm, ModeProfile};
pub use mode::SolveMethod;
pub use report::VerificationReport;
pub use spectral::SpectralField;
