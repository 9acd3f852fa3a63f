//! Empirical constants for the Gagliardo–Nirenberg, commutator and product
//! inequalities. Constants are unknown, so the audits only report the largest
//! observed ratio `lhs / rhs` over a corpus.

use crate::error::{Error, Result};
use crate::initial_data::{random_band_limited, seeded_rng};
use crate::littlewood_paley::{fractional_laplacian, sobolev_norm};
use crate::par;
use crate::spectral::norms::magnitude;
use crate::spectral::{gradient, lp_norm, lp_norm_samples, prolong, Grid, SpectralField};

/// Coefficient modulus below which a corpus field counts as zero.
const DEGENERATE: f64 = 1e-300;

/// Left-hand operator of a Gagliardo–Nirenberg inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GnTerm {
    /// Pointwise Euclidean norm of the gradient.
    Grad,
    /// `Λ^a`
    Lambda(u32),
}

impl GnTerm {
    fn order(self) -> f64 {
        match self {
            GnTerm::Grad => 1.0,
            GnTerm::Lambda(a) => a as f64,
        }
    }

    fn label(self) -> String {
        match self {
            GnTerm::Grad => "grad f".into(),
            GnTerm::Lambda(a) => format!("Λ^{a} f"),
        }
    }

    fn norm(self, f: &SpectralField, p: f64) -> Result<f64> {
        match self {
            GnTerm::Grad => {
                let g = gradient(f).to_samples()?;
                lp_norm_samples(&magnitude(&g), f.grid().cell_volume(), p)
            }
            GnTerm::Lambda(a) => lp_norm(&fractional_laplacian(f, a as f64), p),
        }
    }
}

/// `‖T f‖_{Lᵖ} <= C ‖f‖_{Ḣ^low}^θ ‖f‖_{Ḣ^high}^{1−θ}` with `θ = num/den`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnInequality {
    pub dim: usize,
    pub lhs: GnTerm,
    pub p: f64,
    pub low: u32,
    pub high: u32,
    pub theta: (u32, u32),
}

impl GnInequality {
    const fn new(dim: usize, lhs: GnTerm, p: u32, low: u32, high: u32, theta: (u32, u32)) -> Self {
        GnInequality {
            dim,
            lhs,
            p: p as f64,
            low,
            high,
            theta,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta.0 as f64 / self.theta.1 as f64
    }

    /// Row label, e.g. `‖grad f‖_L3 <= ‖f‖_H1^(5/6) ‖f‖_H3^(1/6)`.
    pub fn id(&self) -> String {
        let (a, b) = self.theta;
        format!(
            "{}D ‖{}‖_L{} <= ‖f‖_H{}^({a}/{b}) ‖f‖_H{}^({}/{b})",
            self.dim,
            self.lhs.label(),
            self.p,
            self.low,
            self.high,
            b - a
        )
    }

    /// Difference between the scaling exponents of the two sides on ℝⁿ; zero
    /// for a dimensionally consistent inequality.
    pub fn scaling_gap(&self) -> f64 {
        let n = self.dim as f64;
        let th = self.theta();
        let lhs = self.lhs.order() - n / self.p;
        let rhs = th * (self.low as f64 - n / 2.0) + (1.0 - th) * (self.high as f64 - n / 2.0);
        lhs - rhs
    }

    /// `(lhs, rhs)` for one field.
    pub fn evaluate(&self, f: &SpectralField) -> Result<(f64, f64)> {
        let lhs = self.lhs.norm(f, self.p)?;
        let th = self.theta();
        let rhs = sobolev_norm(f, self.low as f64).powf(th)
            * sobolev_norm(f, self.high as f64).powf(1.0 - th);
        Ok((lhs, rhs))
    }
}

/// The inequalities invoked in the regularity estimates, as printed, for
/// `dim` 2 or 3.
pub fn gn_inequalities(dim: usize) -> Vec<GnInequality> {
    use GnTerm::{Grad, Lambda};
    let g = GnInequality::new;
    match dim {
        2 => vec![
            g(2, Grad, 3, 0, 2, (1, 3)),
            g(2, Grad, 3, 1, 3, (5, 6)),
            g(2, Grad, 6, 0, 3, (4, 9)),
            g(2, Lambda(2), 3, 1, 3, (1, 3)),
            g(2, Grad, 6, 1, 2, (1, 3)),
            g(2, Lambda(2), 4, 2, 4, (3, 4)),
            g(2, Lambda(3), 3, 2, 4, (1, 3)),
        ],
        3 => vec![
            g(3, Grad, 3, 0, 2, (1, 4)),
            g(3, Grad, 3, 1, 4, (5, 6)),
            g(3, Lambda(3), 3, 1, 4, (1, 6)),
            g(3, Lambda(4), 3, 2, 5, (1, 6)),
            g(3, Lambda(2), 4, 2, 5, (3, 4)),
            g(3, Lambda(3), 4, 2, 5, (5, 6)),
            g(3, Lambda(4), 2, 2, 5, (1, 3)),
            g(3, Lambda(3), 6, 2, 5, (1, 3)),
            g(3, Lambda(2), 6, 2, 5, (2, 3)),
        ],
        _ => Vec::new(),
    }
}

/// One line of an audit table.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub id: String,
    /// Largest `lhs / rhs` over evaluated members; 0 if none were evaluated.
    pub max_ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl AuditRow {
    pub fn new(id: String) -> Self {
        AuditRow {
            id,
            max_ratio: 0.0,
            evaluated: 0,
            skipped: 0,
        }
    }

    pub fn absorb(&mut self, lhs: f64, rhs: f64) {
        if rhs > 0.0 && rhs.is_finite() && lhs.is_finite() {
            self.evaluated += 1;
            self.max_ratio = self.max_ratio.max(lhs / rhs);
        } else {
            self.skipped += 1;
        }
    }
}

fn degenerate(f: &SpectralField) -> bool {
    f.without_mean().max_coeff() <= DEGENERATE
}

/// Seeded corpus of mean-zero fields with Gaussian coefficients `∝ |k|^slope`
/// on `|k_i| <= kmax`. The draw order does not depend on the grid, so the same
/// arguments give the same functions on every grid that holds them.
pub fn corpus(grid: &Grid, size: usize, kmax: i32, slope: f64, seed: u64) -> Vec<SpectralField> {
    let mut rng = seeded_rng(seed);
    (0..size)
        .map(|_| random_band_limited(grid, kmax, slope, &mut rng))
        .collect()
}

/// Max ratio per inequality over `fields`; fields without non-mean content
/// are skipped.
pub fn audit_gn_inequalities(fields: &[SpectralField], dim: usize) -> Result<Vec<AuditRow>> {
    if !(dim == 2 || dim == 3) {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 2 or 3, got {dim}"
        )));
    }
    if fields.iter().any(|f| f.grid().dim() != dim) {
        return Err(Error::GridMismatch);
    }
    let list = gn_inequalities(dim);
    let per_field: Vec<Option<Vec<(f64, f64)>>> = par::map(fields, |f| {
        if degenerate(f) {
            return Ok(None);
        }
        list.iter()
            .map(|ineq| ineq.evaluate(f))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut rows: Vec<AuditRow> = list.iter().map(|i| AuditRow::new(i.id())).collect();
    for entry in &per_field {
        match entry {
            None => rows.iter_mut().for_each(|r| r.skipped += 1),
            Some(vals) => {
                for (row, &(lhs, rhs)) in rows.iter_mut().zip(vals) {
                    row.absorb(lhs, rhs);
                }
            }
        }
    }
    Ok(rows)
}

/// Exponents `(p, p₁, q₁, p₂, q₂)` of the commutator and product estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl Exponents {
    /// Requires `1 < p, p₁, q₁, p₂, q₂ < ∞` and
    /// `1/p = 1/p₁ + 1/q₁ = 1/p₂ + 1/q₂`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.p1, self.q1, self.p2, self.q2];
        if all.iter().any(|&e| !(e > 1.0 && e.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "exponents must lie in (1, ∞), got {all:?}"
            )));
        }
        let inv = 1.0 / self.p;
        for (a, b) in [(self.p1, self.q1), (self.p2, self.q2)] {
            if (inv - 1.0 / a - 1.0 / b).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "Hölder relation violated: 1/{} != 1/{a} + 1/{b}",
                    self.p
                )));
            }
        }
        Ok(())
    }
}

/// Both sides of the commutator and product estimates for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductAudit {
    /// `‖Λ^α(fg) − fΛ^α g‖_{Lᵖ}`
    pub commutator_lhs: f64,
    /// `‖∇f‖_{L^{p₁}}‖Λ^{α−1}g‖_{L^{q₁}} + ‖Λ^α f‖_{L^{p₂}}‖g‖_{L^{q₂}}`
    pub commutator_rhs: f64,
    /// `‖Λ^α(fg)‖_{Lᵖ}`
    pub product_lhs: f64,
    /// `‖f‖_{L^{p₁}}‖Λ^α g‖_{L^{q₁}} + ‖Λ^α f‖_{L^{p₂}}‖g‖_{L^{q₂}}`
    pub product_rhs: f64,
}

/// Grid on which products of fields from `grid` are formed without aliasing.
pub fn padded_product_grid(grid: &Grid) -> Result<Grid> {
    Grid::new(grid.dim(), 2 * grid.n())
}

fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    let (a, b) = (f.to_samples()?, g.to_samples()?);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    SpectralField::from_samples(f.grid(), &prod)
}

impl ProductAudit {
    /// Evaluates every norm on the doubled grid so that `fg` is exact.
    pub fn evaluate(
        f: &SpectralField,
        g: &SpectralField,
        alpha: f64,
        e: &Exponents,
    ) -> Result<Self> {
        e.validate()?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if f.grid() != g.grid() {
            return Err(Error::GridMismatch);
        }
        let fine = padded_product_grid(f.grid())?;
        let (f, g) = (prolong(f, &fine)?, prolong(g, &fine)?);
        let lam = |h: &SpectralField, a: f64| fractional_laplacian(h, a);
        let fg = pointwise_product(&f, &g)?;
        let lam_fg = lam(&fg, alpha);
        let lam_g = lam(&g, alpha);
        let lam_f = lam(&f, alpha);
        let comm = lam_fg.sub(&pointwise_product(&f, &lam_g)?)?;
        let grad_f = lp_norm_samples(
            &magnitude(&gradient(&f).to_samples()?),
            fine.cell_volume(),
            e.p1,
        )?;
        let tail = lp_norm(&lam_f, e.p2)? * lp_norm(&g, e.q2)?;
        Ok(ProductAudit {
            commutator_lhs: lp_norm(&comm, e.p)?,
            commutator_rhs: grad_f * lp_norm(&lam(&g, alpha - 1.0), e.q1)? + tail,
            product_lhs: lp_norm(&lam_fg, e.p)?,
            product_rhs: lp_norm(&f, e.p1)? * lp_norm(&lam_g, e.q1)? + tail,
        })
    }
}

/// Max ratios of the commutator and product estimates over `pairs`.
pub fn audit_commutator_product(
    pairs: &[(SpectralField, SpectralField)],
    alpha: f64,
    e: &Exponents,
) -> Result<Vec<AuditRow>> {
    e.validate()?;
    let tag = format!(
        "α={alpha} p={} p1={} q1={} p2={} q2={}",
        e.p, e.p1, e.q1, e.p2, e.q2
    );
    let mut comm = AuditRow::new(format!("commutator {tag}"));
    let mut prod = AuditRow::new(format!("product {tag}"));
    let results = par::map(pairs, |(f, g)| {
        if degenerate(f) || degenerate(g) {
            return Ok(None);
        }
        ProductAudit::evaluate(f, g, alpha, e).map(Some)
    });
    for r in results {
        match r? {
            None => {
                comm.skipped += 1;
                prod.skipped += 1;
            }
            Some(a) => {
                comm.absorb(a.commutator_lhs, a.commutator_rhs);
                prod.absorb(a.product_lhs, a.product_rhs);
            }
        }
    }
    Ok(vec![comm, prod])
}
