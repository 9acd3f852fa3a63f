use num_complex::Complex64;

use super::field::{SpectralField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

/// `(i k_axis)^order` applied mode-wise. Nyquist modes are zeroed for any
/// `order >= 1`.
pub fn derivative(f: &SpectralField, axis: usize, order: u32) -> Result<SpectralField> {
    let grid = f.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for {}D grid",
            grid.dim()
        )));
    }
    if order == 0 {
        return Ok(f.clone());
    }
    let g = grid.clone();
    Ok(f.map_complex_multiplier(move |i| {
        if g.is_nyquist(i) {
            return Complex64::default();
        }
        Complex64::new(0.0, g.wavevector(i)[axis] as f64).powu(order)
    }))
}

pub fn gradient(f: &SpectralField) -> VectorField {
    let dim = f.grid().dim();
    let comps = par::map_range(dim, |axis| derivative(f, axis, 1).expect("axis < dim"));
    VectorField::new(comps).expect("components share a grid")
}

pub fn divergence(v: &VectorField) -> Result<SpectralField> {
    let grid = v.grid().clone();
    if v.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "divergence needs {} components, got {}",
            grid.dim(),
            v.len()
        )));
    }
    let mut out = SpectralField::zeros(&grid);
    let comps = v.components();
    par::for_each_indexed_mut(out.coeffs_mut(), |i, c| {
        if grid.is_nyquist(i) {
            return;
        }
        let k = grid.wavevector(i);
        let mut acc = Complex64::default();
        for (axis, comp) in comps.iter().enumerate() {
            acc += Complex64::new(0.0, k[axis] as f64) * comp.coeffs()[i];
        }
        *c = acc;
    });
    Ok(out)
}

/// `-|k|^2` multiplier with Nyquist zeroed.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let g = f.grid().clone();
    f.map_multiplier(move |i| if g.is_nyquist(i) { 0.0 } else { -g.k2()[i] })
}

/// Vorticity: a scalar `∂₁v₂ − ∂₂v₁` in 2D, the usual vector in 3D.
#[derive(Clone, Debug)]
pub enum Curl {
    Scalar(SpectralField),
    Vector(VectorField),
}

impl Curl {
    pub fn components(&self) -> Vec<&SpectralField> {
        match self {
            Curl::Scalar(s) => vec![s],
            Curl::Vector(v) => v.components().iter().collect(),
        }
    }
}

pub fn curl(v: &VectorField) -> Result<Curl> {
    let dim = v.grid().dim();
    if v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "curl needs {dim} components, got {}",
            v.len()
        )));
    }
    let d = |comp: usize, axis: usize| derivative(v.component(comp), axis, 1);
    if dim == 2 {
        return Ok(Curl::Scalar(d(1, 0)?.sub(&d(0, 1)?)?));
    }
    let wx = d(2, 1)?.sub(&d(1, 2)?)?;
    let wy = d(0, 2)?.sub(&d(2, 0)?)?;
    let wz = d(1, 0)?.sub(&d(0, 1)?)?;
    Ok(Curl::Vector(VectorField::new(vec![wx, wy, wz])?))
}

/// Leray projection `v̂ − k (k·v̂)/|k|²` for `k ≠ 0`. The mean and Nyquist
/// modes pass through: every derivative vanishes there, so they are already
/// divergence-free and orthogonal to gradients.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid().clone();
    let dim = grid.dim();
    if v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "Leray projection needs {dim} components, got {}",
            v.len()
        )));
    }
    let len = grid.len();
    // Interleave components per mode so the projection is one pass.
    let mut packed = vec![Complex64::default(); len * dim];
    let comps = v.components();
    par::for_each_chunk_mut(&mut packed, dim, |i, m| {
        for (a, c) in comps.iter().enumerate() {
            m[a] = c.coeffs()[i];
        }
        let k2 = grid.k2()[i];
        if k2 == 0.0 || grid.is_nyquist(i) {
            return;
        }
        let k = grid.wavevector(i);
        let mut kv = Complex64::default();
        for a in 0..dim {
            kv += k[a] as f64 * m[a];
        }
        for a in 0..dim {
            m[a] -= kv * (k[a] as f64 / k2);
        }
    });
    let out = (0..dim)
        .map(|a| {
            let coeffs = (0..len).map(|i| packed[i * dim + a]).collect();
            SpectralField::from_coeffs(&grid, coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(out)
}

/// True if the mode survives the two-thirds rule (`|k_i| <= n/3` on every axis).
pub fn is_resolved(grid: &Grid, flat: usize) -> bool {
    let n = grid.n() as i32;
    grid.wavevector(flat)[..grid.dim()]
        .iter()
        .all(|&c| 3 * c.abs() <= n)
}

/// Two-thirds rule: zeroes every mode with some `|k_i| > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let g = f.grid().clone();
    f.map_multiplier(move |i| if is_resolved(&g, i) { 1.0 } else { 0.0 })
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    v.map(dealias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norms::max_abs;

    fn grid(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    #[test]
    fn derivative_of_sin_is_cos() {
        let g = grid(16);
        let f = SpectralField::from_fn(&g, |x| x[0].sin());
        let df = derivative(&f, 0, 1).unwrap().to_samples().unwrap();
        let expect = g.sample(|x| x[0].cos());
        let err = df
            .iter()
            .zip(&expect)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn second_derivative_of_sin2x() {
        let g = grid(32);
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).sin());
        let d2 = derivative(&f, 0, 2).unwrap();
        let diff = d2.axpy(4.0, &f).unwrap();
        assert!(max_abs(&diff).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(16);
        let f = SpectralField::from_fn(&g, |_| 3.5);
        assert!(derivative(&f, 1, 1).unwrap().max_coeff() == 0.0);
    }

    #[test]
    fn axis_out_of_range() {
        let g = grid(16);
        assert!(derivative(&SpectralField::zeros(&g), 2, 1).is_err());
    }

    #[test]
    fn laplacian_of_two_modes() {
        let g = grid(16);
        let f = SpectralField::from_fn(&g, |x| x[0].sin() + (2.0 * x[1]).sin());
        let lap = laplacian(&f).to_samples().unwrap();
        let expect = g.sample(|x| -x[0].sin() - 4.0 * (2.0 * x[1]).sin());
        let err = lap
            .iter()
            .zip(&expect)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn leray_on_sin_x_component() {
        // v = (sin x, 0): only k = (±1, 0) modes, which are parallel to k,
        // so the projection removes them entirely.
        let g = grid(16);
        let v = VectorField::new(vec![
            SpectralField::from_fn(&g, |x| x[0].sin()),
            SpectralField::zeros(&g),
        ])
        .unwrap();
        let p = leray_project(&v).unwrap();
        assert!(p.component(0).max_coeff() < 1e-15);
        assert!(p.component(1).max_coeff() < 1e-15);

        let w = VectorField::new(vec![
            SpectralField::from_fn(&g, |x| x[1].sin()),
            SpectralField::from_fn(&g, |x| x[0].sin()),
        ])
        .unwrap();
        let pw = leray_project(&w).unwrap();
        for a in 0..2 {
            let diff = pw.component(a).sub(w.component(a)).unwrap();
            assert!(diff.max_coeff() < 1e-15);
        }
    }

    #[test]
    fn dealias_cutoff_arithmetic() {
        let g = grid(16);
        // N/2 - 1 = 7 > 16/3
        let f = SpectralField::from_fn(&g, |x| (7.0 * x[0]).cos());
        assert!(dealias(&f).max_coeff() < 1e-15);
        let low = SpectralField::from_fn(&g, |x| (5.0 * x[0]).cos() + (3.0 * x[1]).sin());
        let kept = dealias(&low);
        assert!(kept.sub(&low).unwrap().max_coeff() < 1e-15);
        assert_eq!(dealias(&kept).coeffs(), kept.coeffs());
    }

    #[test]
    fn curl_2d_and_3d() {
        let g = grid(16);
        let tg = VectorField::new(vec![
            SpectralField::from_fn(&g, |x| x[0].sin() * x[1].cos()),
            SpectralField::from_fn(&g, |x| -x[0].cos() * x[1].sin()),
        ])
        .unwrap();
        let Curl::Scalar(w) = curl(&tg).unwrap() else {
            panic!("2D curl must be scalar")
        };
        let expect = SpectralField::from_fn(&g, |x| 2.0 * x[0].sin() * x[1].sin());
        assert!(w.sub(&expect).unwrap().max_coeff() < 1e-14);

        let g3 = Grid::new(3, 8).unwrap();
        let f = SpectralField::from_fn(&g3, |x| x[0].sin() * x[1].cos() + x[2].sin());
        let Curl::Vector(c) = curl(&gradient(&f)).unwrap() else {
            panic!("3D curl must be a vector")
        };
        for comp in c.components() {
            assert!(comp.max_coeff() < 1e-14);
        }
    }
}
