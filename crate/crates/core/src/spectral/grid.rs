use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

/// Uniform periodic grid on the torus `[0, 2π)^dim` with `n` points per axis.
///
/// Flat storage is row-major with axis 0 slowest. Lattice wavenumbers run over
/// `{-n/2+1, ..., n/2}` per axis; index `n/2` is the Nyquist mode.
///
/// Cloning is cheap: wavenumber tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridData>,
}

struct GridData {
    dim: usize,
    n: usize,
    len: usize,
    wavevectors: Vec<[i32; 3]>,
    k2: Vec<f64>,
    nyquist: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        let len = n.pow(dim as u32);
        let half = (n / 2) as i32;
        let mut wavevectors = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut nyquist = Vec::with_capacity(len);
        for flat in 0..len {
            let mut k = [0i32; 3];
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let i = (rem % n) as i32;
                rem /= n;
                k[axis] = if i <= half { i } else { i - n as i32 };
            }
            k2.push(k.iter().map(|&c| (c as f64) * (c as f64)).sum());
            nyquist.push(k[..dim].contains(&half));
            wavevectors.push(k);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridData {
                dim,
                n,
                len,
                wavevectors,
                k2,
                nyquist,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        2.0 * PI
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.inner.n as f64
    }

    /// Volume of one grid cell, `(2π/n)^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Volume of the torus, `(2π)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.inner.dim as i32)
    }

    /// Integer wavevector at a flat index (unused axes are zero).
    pub fn wavevector(&self, flat: usize) -> [i32; 3] {
        self.inner.wavevectors[flat]
    }

    pub fn wavevectors(&self) -> &[[i32; 3]] {
        &self.inner.wavevectors
    }

    /// `|k|^2` per flat index.
    pub fn k2(&self) -> &[f64] {
        &self.inner.k2
    }

    /// True where any component of the wavevector equals `n/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.inner.nyquist[flat]
    }

    /// Flat index of an integer wavevector (components taken mod `n`).
    pub fn index_of(&self, k: [i32; 3]) -> usize {
        let n = self.inner.n as i32;
        let mut flat = 0usize;
        for &c in k.iter().take(self.inner.dim) {
            flat = flat * self.inner.n + c.rem_euclid(n) as usize;
        }
        flat
    }

    /// Flat index of the wavevector `-k`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let k = self.inner.wavevectors[flat];
        self.index_of([-k[0], -k[1], -k[2]])
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let n = self.inner.n;
        let mut x = [0.0; 3];
        let mut rem = flat;
        for axis in (0..self.inner.dim).rev() {
            x[axis] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    /// Samples a function of position on the grid.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn([f64; 3]) -> f64 + Send + Sync,
    {
        par::map_range(self.len(), |i| f(self.point(i)))
    }

    /// Unnormalized n-dimensional FFT in place (forward uses `e^{-ik·x}`).
    pub(crate) fn fft_in_place(&self, data: &mut [Complex64], forward: bool) {
        let plan = if forward {
            &self.inner.forward
        } else {
            &self.inner.inverse
        };
        let n = self.inner.n;
        let dim = self.inner.dim;
        debug_assert_eq!(data.len(), self.inner.len);
        // Contiguous last axis: rows can be transformed directly.
        let rows_per_task = n.max(1);
        par::for_each_chunk_mut(data, n * rows_per_task, |_, rows| plan.process(rows));
        // Remaining axes go through a line-major scratch buffer.
        let mut scratch = vec![Complex64::default(); data.len()];
        for axis in (0..dim - 1).rev() {
            let stride = n.pow((dim - 1 - axis) as u32);
            {
                let src: &[Complex64] = data;
                par::for_each_chunk_mut(&mut scratch, n * rows_per_task, |task, lines| {
                    let first_line = task * rows_per_task;
                    for (l, line) in lines.chunks_mut(n).enumerate() {
                        let id = first_line + l;
                        let (outer, inner) = (id / stride, id % stride);
                        let base = outer * n * stride + inner;
                        for (m, v) in line.iter_mut().enumerate() {
                            *v = src[base + m * stride];
                        }
                    }
                    plan.process(lines);
                });
            }
            let lines: &[Complex64] = &scratch;
            par::for_each_chunk_mut(data, stride, |block, out| {
                let (outer, m) = (block / n, block % n);
                for (inner, v) in out.iter_mut().enumerate() {
                    *v = lines[(outer * stride + inner) * n + m];
                }
            });
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim && self.inner.n == other.inner.n)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}D, N={})", self.inner.dim, self.inner.n)
    }
}
