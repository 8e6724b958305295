//! Numerical laboratory for incompressible MHD current-vortex sheets.
//!
//! The interface `x3 = f(t, x')` separates two fluid slabs of unit depth on
//! the torus `T²`. Each slab is flattened onto a fixed strip; elliptic
//! problems, Dirichlet–Neumann operators and div-curl recovery are solved
//! there with Fourier collocation in `x'` and Chebyshev collocation in `z`.

pub mod config;
pub mod diagnostics;
pub mod divcurl;
pub mod dno;
pub mod dynamics;
pub mod elliptic;
mod error;
pub mod fields;
pub mod geometry;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};

/// Which fluid region a strip flattens: `Plus` lies above the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    /// `+1` above the interface, `-1` below.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    /// Physical height of the rigid lid.
    pub fn lid_height(self) -> f64 {
        self.sign()
    }

    /// Position in `[plus, minus]` arrays.
    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}
