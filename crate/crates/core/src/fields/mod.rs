//! Discrete fields on the torus `T²` and on the flattened strips `T² x I`.
//!
//! Horizontal directions are uniform periodic grids over `[0, 2π)²` handled
//! with FFTs; the depth direction uses Chebyshev–Gauss–Lobatto collocation
//! (see [`cheb`]). Fourier normalization: the forward transform carries
//! `1/(nx*ny)`, so spectral coefficients are mode amplitudes.

pub mod cheb;
pub mod fft;
pub mod snapshot;
mod strip;
mod torus;

pub use strip::{StripGrid, StripScalar, StripSpectrum, StripVector};
pub use torus::{SobolevIndex, TorusGrid, TorusScalar};
