use super::field::{SpectralField, VectorField};

use crate::error::{Error, Result};

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Lp exponent must be >= 1, got {p}"
        )));
    }
    Ok(())
}

/// Lᵖ norm of sampled values with equal-weight quadrature; `p = ∞` is the max.
pub fn lp_norm_samples(samples: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0, |m, s| m.max(s.abs())));
    }
    let sum: f64 = if p == 2.0 {
        samples.iter().map(|s| s * s).sum()
    } else {
        samples.iter().map(|s| s.abs().powf(p)).sum()
    };
    Ok((sum * cell_volume).powf(1.0 / p))
}

pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    lp_norm_samples(&f.to_samples()?, f.grid().cell_volume(), p)
}

/// Pointwise Euclidean magnitude of several sampled components.
pub fn magnitude(components: &[Vec<f64>]) -> Vec<f64> {
    let len = components.first().map_or(0, Vec::len);
    (0..len)
        .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .collect()
}

/// Lᵖ norm of the pointwise Euclidean magnitude of a list of components.
pub fn lp_norm_components(components: &[SpectralField], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = components
        .first()
        .ok_or_else(|| Error::InvalidArgument("no components".into()))?
        .grid()
        .clone();
    let samples = components
        .iter()
        .map(SpectralField::to_samples)
        .collect::<Result<Vec<_>>>()?;
    lp_norm_samples(&magnitude(&samples), grid.cell_volume(), p)
}

pub fn lp_norm_vector(v: &VectorField, p: f64) -> Result<f64> {
    lp_norm_components(v.components(), p)
}

/// `‖f‖²_{L²}` from coefficients: `(2π)^n Σ_k |c_k|²`.
pub fn l2_norm_sq_parseval(f: &SpectralField) -> f64 {
    f.grid().volume() * f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// `(2π)^n Σ_k w(k) |c_k|²` for a weight given per flat index.
pub fn weighted_parseval<F>(f: &SpectralField, w: F) -> f64
where
    F: Fn(usize) -> f64,
{
    f.grid().volume()
        * f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| w(i) * c.norm_sqr())
            .sum::<f64>()
}

/// Max of `|f(x)|` over the grid.
pub fn max_abs(f: &SpectralField) -> Result<f64> {
    lp_norm(f, f64::INFINITY)
}

/// Inner product `∫ f g` via Parseval (real fields).
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let s: f64 = f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| (a * b.conj()).re)
        .sum();
    Ok(f.grid().volume() * s)
}
