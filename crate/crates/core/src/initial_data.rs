//! Initial states `(u₀, d₀)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::littlewood_paley::smooth_step;
use crate::spectral::norms::{l2_norm_sq_parseval, max_abs};
use crate::spectral::{dealias_vector, leray_project, Grid, SpectralField, VectorField};

/// Which constructor an [`InitSpec`] selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    TaylorGreen,
    RandomDivfree,
    Equatorial,
    NearHarmonic,
    ConstantDirector,
}

impl InitKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "taylor_green" => InitKind::TaylorGreen,
            "random_divfree" => InitKind::RandomDivfree,
            "equatorial" => InitKind::Equatorial,
            "near_harmonic" => InitKind::NearHarmonic,
            "constant_director" => InitKind::ConstantDirector,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            InitKind::TaylorGreen => "taylor_green",
            InitKind::RandomDivfree => "random_divfree",
            InitKind::Equatorial => "equatorial",
            InitKind::NearHarmonic => "near_harmonic",
            InitKind::ConstantDirector => "constant_director",
        }
    }

    pub fn is_velocity(self) -> bool {
        matches!(self, InitKind::TaylorGreen | InitKind::RandomDivfree)
    }
}

/// Angle profile for the equatorial director `(cos θ, sin θ, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaProfile {
    /// `θ = amplitude · sin(k·x)`
    Sine {
        amplitude: f64,
        wavevector: [i32; 3],
    },
    /// Random band-limited θ rescaled so that `max |θ| = amplitude`.
    Random {
        amplitude: f64,
        slope: f64,
        seed: u64,
        band: Option<i32>,
    },
}

/// Parameters for one initial field. Unused parameters are ignored by kinds
/// that do not need them.
#[derive(Clone, Debug, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    pub amplitude: f64,
    pub spectrum_slope: f64,
    pub seed: u64,
    /// Wavevector of a sine θ profile; `None` selects a random θ.
    pub wavevector: Option<[i32; 3]>,
    /// Band limit `|k_i| <= band` of random kinds; `None` means `N/3`.
    pub band: Option<i32>,
    pub scale: f64,
    pub direction: [f64; 3],
}

impl InitSpec {
    pub fn new(kind: InitKind) -> Self {
        InitSpec {
            kind,
            amplitude: 1.0,
            spectrum_slope: -3.0,
            seed: 0,
            wavevector: Some([1, 0, 0]),
            band: None,
            scale: 1.0,
            direction: [0.0, 0.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if let Some(b) = self.band {
            if b < 1 {
                return Err(Error::InvalidArgument(format!(
                    "band must be >= 1, got {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn theta_profile(&self) -> ThetaProfile {
        match self.wavevector {
            Some(k) => ThetaProfile::Sine {
                amplitude: self.amplitude,
                wavevector: k,
            },
            None => ThetaProfile::Random {
                amplitude: self.amplitude,
                slope: self.spectrum_slope,
                seed: self.seed,
                band: self.band,
            },
        }
    }

    pub fn velocity(&self, grid: &Grid) -> Result<VectorField> {
        self.validate()?;
        match self.kind {
            InitKind::TaylorGreen => Ok(taylor_green(grid, self.amplitude)),
            InitKind::RandomDivfree => random_divfree_band(
                grid,
                self.band,
                self.spectrum_slope,
                self.seed,
                self.amplitude,
            ),
            other => Err(Error::InvalidArgument(format!(
                "`{}` does not construct a velocity field",
                other.name()
            ))),
        }
    }

    pub fn director(&self, grid: &Grid) -> Result<VectorField> {
        self.validate()?;
        match self.kind {
            InitKind::Equatorial => {
                let theta = theta_field(grid, &self.theta_profile())?;
                equatorial_director(grid, &theta)
            }
            InitKind::NearHarmonic => near_harmonic(grid, self.scale),
            InitKind::ConstantDirector => constant_director(grid, self.direction),
            other => Err(Error::InvalidArgument(format!(
                "`{}` does not construct a director field",
                other.name()
            ))),
        }
    }
}

/// Classical Taylor–Green vortex. 2D: `a(sin x cos y, −cos x sin y)`;
/// 3D: `a(sin x cos y cos z, −cos x sin y cos z, 0)`.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> VectorField {
    let a = amplitude;
    let mut comps = Vec::with_capacity(grid.dim());
    if grid.dim() == 2 {
        comps.push(SpectralField::from_fn(grid, move |x| {
            a * x[0].sin() * x[1].cos()
        }));
        comps.push(SpectralField::from_fn(grid, move |x| {
            -a * x[0].cos() * x[1].sin()
        }));
    } else {
        comps.push(SpectralField::from_fn(grid, move |x| {
            a * x[0].sin() * x[1].cos() * x[2].cos()
        }));
        comps.push(SpectralField::from_fn(grid, move |x| {
            -a * x[0].cos() * x[1].sin() * x[2].cos()
        }));
        comps.push(SpectralField::zeros(grid));
    }
    VectorField::new(comps).expect("components share a grid")
}

fn half_space(k: &[i32]) -> bool {
    for &c in k {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

/// Mean-zero real field with Gaussian coefficients `∝ |k|^slope` on the box
/// `|k_i| <= kmax`. Modes are drawn in a fixed lattice order that does not
/// depend on `N`, so the same seed yields the same continuous field on every
/// grid that can hold the box.
pub fn random_band_limited(
    grid: &Grid,
    kmax: i32,
    slope: f64,
    rng: &mut ChaCha8Rng,
) -> SpectralField {
    let dim = grid.dim();
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let side = (2 * kmax + 1) as usize;
    let total = side.pow(dim as u32);
    let fits = 2 * kmax < grid.n() as i32;
    for idx in 0..total {
        let mut k = [0i32; 3];
        let mut rem = idx;
        for axis in (0..dim).rev() {
            k[axis] = (rem % side) as i32 - kmax;
            rem /= side;
        }
        if !half_space(&k[..dim]) {
            continue;
        }
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        if !fits {
            continue;
        }
        let mag = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let c = Complex64::new(re, im) * mag.powf(slope) * std::f64::consts::FRAC_1_SQRT_2;
        coeffs[grid.index_of(k)] = c;
        coeffs[grid.index_of([-k[0], -k[1], -k[2]])] = c.conj();
    }
    SpectralField::from_coeffs(grid, coeffs).expect("length matches grid")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn band_limit(grid: &Grid, band: Option<i32>) -> Result<i32> {
    let full = (grid.n() / 3) as i32;
    match band {
        None => Ok(full),
        Some(b) if b >= 1 => Ok(b.min(full)),
        Some(b) => Err(Error::InvalidArgument(format!(
            "band must be >= 1, got {b}"
        ))),
    }
}

/// Random divergence-free velocity, dealiased, with `‖u‖_{L²} = amplitude`.
pub fn random_divfree(grid: &Grid, slope: f64, seed: u64, amplitude: f64) -> Result<VectorField> {
    random_divfree_band(grid, None, slope, seed, amplitude)
}

/// [`random_divfree`] restricted to `|k_i| <= band` (capped at `N/3`).
pub fn random_divfree_band(
    grid: &Grid,
    band: Option<i32>,
    slope: f64,
    seed: u64,
    amplitude: f64,
) -> Result<VectorField> {
    let mut rng = seeded_rng(seed);
    let kmax = band_limit(grid, band)?;
    let raw: Vec<SpectralField> = (0..grid.dim())
        .map(|_| random_band_limited(grid, kmax, slope, &mut rng))
        .collect();
    let u = dealias_vector(&leray_project(&VectorField::new(raw)?)?);
    let norm: f64 = u
        .components()
        .iter()
        .map(l2_norm_sq_parseval)
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Ok(u);
    }
    Ok(u.scale(amplitude / norm))
}

pub fn theta_field(grid: &Grid, profile: &ThetaProfile) -> Result<SpectralField> {
    match *profile {
        ThetaProfile::Sine {
            amplitude,
            wavevector: k,
        } => Ok(SpectralField::from_fn(grid, move |x| {
            amplitude * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]).sin()
        })),
        ThetaProfile::Random {
            amplitude,
            slope,
            seed,
            band,
        } => {
            let mut rng = seeded_rng(seed);
            let raw = random_band_limited(grid, band_limit(grid, band)?, slope, &mut rng);
            let peak = max_abs(&raw)?;
            Ok(if peak == 0.0 {
                raw
            } else {
                raw.scale(amplitude / peak)
            })
        }
    }
}

/// `d = (cos θ, sin θ, 0)` formed pointwise.
pub fn equatorial_director(grid: &Grid, theta: &SpectralField) -> Result<VectorField> {
    let th = theta.to_samples()?;
    let c: Vec<f64> = th.iter().map(|t| t.cos()).collect();
    let s: Vec<f64> = th.iter().map(|t| t.sin()).collect();
    VectorField::from_samples(grid, &[c, s, vec![0.0; grid.len()]])
}

pub fn constant_director(grid: &Grid, direction: [f64; 3]) -> Result<VectorField> {
    let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument(
            "director direction must be nonzero".into(),
        ));
    }
    let comps = direction
        .iter()
        .map(|&c| {
            let mut f = SpectralField::zeros(grid);
            f.coeffs_mut()[0] = Complex64::new(c / norm, 0.0);
            f
        })
        .collect();
    VectorField::new(comps)
}

/// Radius inside which the stereographic bubble is used unchanged.
const BUBBLE_INNER: f64 = 1.0;
/// Radius beyond which the director is exactly the north pole.
const BUBBLE_OUTER: f64 = 2.5;

/// Stereographic bubble of scale ρ centred at `(π, π)`, blended to the north
/// pole by a smooth window and renormalized pointwise. 2D only.
pub fn near_harmonic(grid: &Grid, scale: f64) -> Result<VectorField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument(
            "near_harmonic data is two-dimensional".into(),
        ));
    }
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "concentration scale must lie in (0, 1], got {scale}"
        )));
    }
    if scale * (grid.n() as f64) < 8.0 {
        return Err(Error::InvalidArgument(format!(
            "scale {scale} is unresolvable on N = {} (need scale·N >= 8)",
            grid.n()
        )));
    }
    let rho = scale;
    let len = grid.len();
    let mut comps = vec![vec![0.0; len]; 3];
    for i in 0..len {
        let x = grid.point(i);
        let y = [x[0] - PI, x[1] - PI];
        let r2 = y[0] * y[0] + y[1] * y[1];
        let den = r2 + rho * rho;
        let bubble = [
            2.0 * rho * y[0] / den,
            2.0 * rho * y[1] / den,
            (r2 - rho * rho) / den,
        ];
        let w = smooth_step((BUBBLE_OUTER - r2.sqrt()) / (BUBBLE_OUTER - BUBBLE_INNER));
        let v = [w * bubble[0], w * bubble[1], w * bubble[2] + (1.0 - w)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        for a in 0..3 {
            comps[a][i] = v[a] / n;
        }
    }
    VectorField::from_samples(grid, &comps)
}
