//! Advection–reaction nonlinearity of the viscous Burgers-type drift on the
//! interval: `f(v)·v_x + f0(v)`, evaluated pointwise on the quadrature grid
//! (non-conservative form) and projected back to coefficients.
//!
//! For linear `f` and cubic `f0` every projected integrand is a trigonometric
//! polynomial below the grid's aliasing threshold, so the Galerkin image is
//! exact to roundoff; in particular `⟨f(v)v_x, v⟩ = 0` (the integrand is a
//! perfect derivative vanishing at the Dirichlet boundary) holds discretely.

use crate::spaces::{interval_geometry, interval_grid, interval_project, SpatialDiscretization, StateVector};
use std::sync::Arc;

/// Advection velocity function `f: R → R` multiplying `v_x`.
#[derive(Clone)]
pub enum AdvectionFn {
    /// `f ≡ 0` (reaction–diffusion reduction).
    Zero,
    /// `f(x) = a·x` (classical Burgers transport for `a = 1`).
    LinearScaled { a: f64 },
    /// Arbitrary Lipschitz `f` with its (user-asserted, unchecked) Lipschitz
    /// constant; quadrature of non-polynomial `f` is approximate, so the
    /// energy cancellation `⟨f(v)v_x, v⟩ = 0` holds only up to grid error.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
    },
}

impl AdvectionFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            AdvectionFn::Zero => 0.0,
            AdvectionFn::LinearScaled { a } => a * x,
            AdvectionFn::Custom { f, .. } => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AdvectionFn::Zero)
    }

    /// Whether the grid projection of `f(v)v_x` is alias-free (exact).
    pub fn quadrature_exact(&self) -> bool {
        !matches!(self, AdvectionFn::Custom { .. })
    }

    /// Slope scale used by the default framework constants.
    pub fn slope_bound(&self) -> f64 {
        match self {
            AdvectionFn::Zero => 0.0,
            AdvectionFn::LinearScaled { a } => a.abs(),
            AdvectionFn::Custom { lipschitz, .. } => lipschitz.abs(),
        }
    }
}

impl std::fmt::Debug for AdvectionFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdvectionFn::Zero => write!(f, "AdvectionFn::Zero"),
            AdvectionFn::LinearScaled { a } => write!(f, "AdvectionFn::LinearScaled({a})"),
            AdvectionFn::Custom { lipschitz, .. } => {
                write!(f, "AdvectionFn::Custom(lipschitz = {lipschitz})")
            }
        }
    }
}

/// Cubic reaction `f0(u) = −c3·u³ + c1·u² + c2·u` (odd leading degree with a
/// negative coefficient, so the reaction is dissipative at large amplitude).
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct CubicReaction {
    pub c3: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CubicReaction {
    pub fn eval(&self, u: f64) -> f64 {
        (-self.c3 * u + self.c1) * u * u + self.c2 * u
    }

    /// Sharp pointwise bound `sup_u f0(u)·u / u² = c1²/(4c3) + c2`
    /// (vertex of `−c3 u² + c1 u + c2` in the variable `u`).
    pub fn pairing_bound(&self) -> f64 {
        self.c1 * self.c1 / (4.0 * self.c3) + self.c2
    }

    /// One-sided Lipschitz constant `sup_u f0′(u) = c1²/(3c3) + c2`, so that
    /// `(f0(x) − f0(y))(x − y) ≤ sup f0′ · (x − y)²` for all `x, y`.
    pub fn one_sided_lipschitz(&self) -> f64 {
        self.c1 * self.c1 / (3.0 * self.c3) + self.c2
    }

    /// Coefficient-magnitude scale entering the growth-constant defaults.
    pub fn coeff_scale(&self) -> f64 {
        self.c3.abs() + self.c1.abs() + self.c2.abs()
    }

    pub fn validate(&self) -> Result<(), crate::error::SpdeError> {
        if !(self.c3 > 0.0) || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(crate::error::SpdeError::parameter(
                "reaction",
                format!(
                    "cubic reaction needs c3 > 0 and finite c1, c2, got ({}, {}, {})",
                    self.c3, self.c1, self.c2
                ),
            ));
        }
        Ok(())
    }
}

/// Galerkin image of `f(v)·v_x + f0(v)` (the non-Laplacian part of the drift).
pub fn nonlinear_term(
    disc: &SpatialDiscretization,
    advection: &AdvectionFn,
    reaction: Option<&CubicReaction>,
    v: &StateVector,
) -> StateVector {
    let g = interval_geometry(disc);
    let vals = interval_grid(g, &v.coeffs, false);
    let mut nl = vec![0.0; vals.len()];
    if !advection.is_zero() {
        let dvals = interval_grid(g, &v.coeffs, true);
        for i in 0..vals.len() {
            nl[i] = advection.eval(vals[i]) * dvals[i];
        }
    }
    if let Some(r) = reaction {
        for i in 0..vals.len() {
            nl[i] += r.eval(vals[i]);
        }
    }
    StateVector {
        coeffs: interval_project(g, &nl),
        disc_id: disc.id(),
    }
}
