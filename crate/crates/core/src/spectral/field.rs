use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

/// Imaginary residue above which an inverse transform is treated as corrupt.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// One scalar component stored as Fourier coefficients on the full lattice.
///
/// Coefficients are normalized so that `f(x) = Σ_k c_k e^{ik·x}`; a constant
/// field `c` has `c_0 = c`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Forward transform of real samples. The coefficients are symmetrized so
    /// `c(-k) = conj(c(k))` holds exactly.
    pub fn from_samples(grid: &Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        grid.fft_in_place(&mut coeffs, true);
        let scale = 1.0 / grid.len() as f64;
        let raw = coeffs.clone();
        par::for_each_indexed_mut(&mut coeffs, |i, c| {
            let mirror = raw[grid.conjugate_index(i)].conj();
            *c = (*c + mirror) * (0.5 * scale);
        });
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Samples a function of position and transforms it.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Send + Sync,
    {
        Self::from_samples(grid, &grid.sample(f)).expect("sample count matches grid")
    }

    /// Inverse transform. Fails if the imaginary residue exceeds
    /// [`HERMITIAN_TOLERANCE`] relative to the field magnitude.
    pub fn to_samples(&self) -> Result<Vec<f64>> {
        let mut data = self.coeffs.clone();
        self.grid.fft_in_place(&mut data, false);
        let mut max_im = 0.0f64;
        let mut max_abs = 0.0f64;
        for c in &data {
            max_im = max_im.max(c.im.abs());
            max_abs = max_abs.max(c.norm());
        }
        if max_im > HERMITIAN_TOLERANCE * max_abs.max(1.0) || !max_im.is_finite() {
            return Err(Error::CorruptField { residue: max_im });
        }
        Ok(data.into_iter().map(|c| c.re).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at an integer wavevector.
    pub fn mode(&self, k: [i32; 3]) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies a real multiplier depending on the flat index.
    pub fn map_multiplier<F>(&self, m: F) -> SpectralField
    where
        F: Fn(usize) -> f64 + Send + Sync,
    {
        let mut out = self.clone();
        par::for_each_indexed_mut(&mut out.coeffs, |i, c| *c *= m(i));
        out
    }

    /// Applies a complex multiplier depending on the flat index.
    pub fn map_complex_multiplier<F>(&self, m: F) -> SpectralField
    where
        F: Fn(usize) -> Complex64 + Send + Sync,
    {
        let mut out = self.clone();
        par::for_each_indexed_mut(&mut out.coeffs, |i, c| *c *= m(i));
        out
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        self.map_multiplier(|_| a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        let src = &other.coeffs;
        par::for_each_indexed_mut(&mut out.coeffs, |i, c| *c += a * src[i]);
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// Removes the mean (zero mode).
    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        out
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|c(k) - conj(c(-k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.coeffs.len() {
            let j = self.grid.conjugate_index(i);
            worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Transforms real samples to spectral space.
pub fn to_spectral(grid: &Grid, samples: &[f64]) -> Result<SpectralField> {
    SpectralField::from_samples(grid, samples)
}

/// Transforms a Hermitian field back to real samples.
pub fn from_spectral(f: &SpectralField) -> Result<Vec<f64>> {
    f.to_samples()
}

/// Embeds `f` unchanged (same wavevectors) on a finer grid of the same
/// dimension. Nyquist coefficients at round-off level are dropped; larger
/// Nyquist content has no unique image and is an error.
pub fn prolong(f: &SpectralField, fine: &Grid) -> Result<SpectralField> {
    let g = f.grid();
    if fine.dim() != g.dim() || fine.n() < g.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot prolong from {}D N = {} to {}D N = {}",
            g.dim(),
            g.n(),
            fine.dim(),
            fine.n()
        )));
    }
    let roundoff = 1e-14 * f.max_coeff().max(1.0);
    let mut coeffs = vec![Complex64::default(); fine.len()];
    for (i, c) in f.coeffs().iter().enumerate() {
        if *c == Complex64::default() {
            continue;
        }
        if g.is_nyquist(i) && fine.n() != g.n() {
            if c.norm() <= roundoff {
                continue;
            }
            return Err(Error::InvalidArgument(
                "prolongation needs a field without Nyquist content".into(),
            ));
        }
        coeffs[fine.index_of(g.wavevector(i))] = *c;
    }
    SpectralField::from_coeffs(fine, coeffs)
}

/// A list of components sharing one grid: `dim` for velocity, 3 for the director.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "vector field needs at least one component".into(),
            ));
        }
        let g = components[0].grid();
        if components.iter().any(|c| c.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Grid, count: usize) -> Self {
        VectorField {
            components: (0..count).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_samples(grid: &Grid, samples: &[Vec<f64>]) -> Result<Self> {
        let comps = par::map(samples, |s| SpectralField::from_samples(grid, s));
        Self::new(comps.into_iter().collect::<Result<Vec<_>>>()?)
    }

    pub fn to_samples(&self) -> Result<Vec<Vec<f64>>> {
        par::map(&self.components, |c| c.to_samples())
            .into_iter()
            .collect()
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    /// Applies `f` to each component.
    pub fn map<F>(&self, f: F) -> VectorField
    where
        F: Fn(&SpectralField) -> SpectralField + Send + Sync,
    {
        VectorField {
            components: par::map(&self.components, f),
        }
    }

    pub fn try_map<F>(&self, f: F) -> Result<VectorField>
    where
        F: Fn(&SpectralField) -> Result<SpectralField> + Send + Sync,
    {
        let comps = par::map(&self.components, f)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components: comps })
    }

    pub fn scale(&self, a: f64) -> VectorField {
        self.map(|c| c.scale(a))
    }

    pub fn axpy(&self, a: f64, other: &VectorField) -> Result<VectorField> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument("component count mismatch".into()));
        }
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components: comps })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.axpy(-1.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(SpectralField::is_finite)
    }
}
