//! Finite element spectral laboratory for Laplace, Steklov and biharmonic
//! eigenvalue problems on planar domains with Euclidean or constant-curvature
//! metrics, with Rellich identity checks and an eigenvalue inequality suite.

pub mod constants;
pub mod eigen;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod rellich;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    Quadrature(#[from] quadrature::QuadratureError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Fem(#[from] fem::FemError),
    #[error(transparent)]
    Eigen(#[from] eigen::EigenError),
    #[error(transparent)]
    Problem(#[from] problems::ProblemError),
    #[error(transparent)]
    Constants(#[from] constants::ConstantsError),
    #[error(transparent)]
    Rellich(#[from] rellich::RellichError),
}

impl Error {
    /// Numerical breakdown, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen(_)
                | Error::Linalg(_)
                | Error::Problem(problems::ProblemError::Eigen(_) | problems::ProblemError::Linalg(_))
                | Error::Rellich(rellich::RellichError::NonFinite)
        )
    }
}
