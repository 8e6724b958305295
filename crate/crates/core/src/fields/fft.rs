//! Two-dimensional real FFT on the periodic grid.
//!
//! Layout of the half spectrum: mode `m = iy * nx + ix`, where `ix` in
//! `0..nx` carries the x-wavenumber `kx(ix)` and `iy` in `0..ny/2+1` the
//! non-negative y-wavenumber `iy`. The forward transform carries the
//! `1/(nx*ny)` factor, so the zero mode is the grid mean.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

pub struct TorusFft {
    nx: usize,
    ny: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
}

thread_local! {
    static WORK: RefCell<(Vec<f64>, Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

impl TorusFft {
    fn new(nx: usize, ny: usize) -> Self {
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Self {
            nx,
            ny,
            r2c: rp.plan_fft_forward(ny),
            c2r: rp.plan_fft_inverse(ny),
            fwd_x: cp.plan_fft_forward(nx),
            inv_x: cp.plan_fft_inverse(nx),
        }
    }

    pub fn nky(&self) -> usize {
        self.ny / 2 + 1
    }

    /// Grid values (row-major, `ix*ny + iy`) to normalized half spectrum.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut spec = vec![Complex64::new(0.0, 0.0); self.nx * self.nky()];
        self.forward_into(values, &mut spec);
        spec
    }

    pub fn forward_into(&self, values: &[f64], spec: &mut [Complex64]) {
        let (nx, ny, nky) = (self.nx, self.ny, self.nky());
        debug_assert_eq!(values.len(), nx * ny);
        debug_assert_eq!(spec.len(), nx * nky);
        WORK.with(|w| {
            let (row, half, scratch) = &mut *w.borrow_mut();
            row.resize(ny, 0.0);
            half.resize(nky, Complex64::new(0.0, 0.0));
            let need = self.r2c.get_scratch_len().max(self.fwd_x.get_inplace_scratch_len());
            scratch.resize(need, Complex64::new(0.0, 0.0));
            for ix in 0..nx {
                row.copy_from_slice(&values[ix * ny..(ix + 1) * ny]);
                self.r2c
                    .process_with_scratch(row, half, &mut scratch[..self.r2c.get_scratch_len()])
                    .expect("r2c length mismatch");
                for (iy, h) in half.iter().enumerate() {
                    spec[iy * nx + ix] = *h;
                }
            }
            self.fwd_x.process_with_scratch(spec, &mut scratch[..self.fwd_x.get_inplace_scratch_len()]);
        });
        let norm = 1.0 / (nx * ny) as f64;
        for c in spec.iter_mut() {
            *c *= norm;
        }
    }

    /// Normalized half spectrum back to grid values. Imaginary parts of the
    /// self-conjugate columns are discarded.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut values = vec![0.0; self.nx * self.ny];
        self.inverse_into(spec, &mut values);
        values
    }

    pub fn inverse_into(&self, spec: &[Complex64], values: &mut [f64]) {
        let (nx, ny, nky) = (self.nx, self.ny, self.nky());
        debug_assert_eq!(spec.len(), nx * nky);
        WORK.with(|w| {
            let (_, half, scratch) = &mut *w.borrow_mut();
            let need = self.c2r.get_scratch_len().max(self.inv_x.get_inplace_scratch_len());
            scratch.resize(need, Complex64::new(0.0, 0.0));
            let mut work = spec.to_vec();
            self.inv_x.process_with_scratch(&mut work, &mut scratch[..self.inv_x.get_inplace_scratch_len()]);
            half.resize(nky, Complex64::new(0.0, 0.0));
            for ix in 0..nx {
                for (iy, h) in half.iter_mut().enumerate() {
                    *h = work[iy * nx + ix];
                }
                half[0].im = 0.0;
                if ny % 2 == 0 {
                    half[nky - 1].im = 0.0;
                }
                self.c2r
                    .process_with_scratch(half, &mut values[ix * ny..(ix + 1) * ny], &mut scratch[..self.c2r.get_scratch_len()])
                    .expect("c2r length mismatch");
            }
        });
    }
}

/// Shared plan for an `nx` by `ny` grid.
pub fn plan(nx: usize, ny: usize) -> Arc<TorusFft> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TorusFft>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((nx, ny))
        .or_insert_with(|| Arc::new(TorusFft::new(nx, ny)))
        .clone()
}
