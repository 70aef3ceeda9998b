//! Drift operators `A: V → V*` and noise coefficient maps for the shipped
//! model families, together with the structural constants
//! (`α, β, θ, F, C, γ` and the locality weight `ρ`) under which each family
//! satisfies the monotonicity/coercivity/growth framework.
//!
//! Every suite exposes its drift through the Galerkin image convention: the
//! returned coefficients are `⟨A(v), e_k⟩`, so `dual_pair` of a drift with a
//! state is the exact discrete duality pairing.
//!
//! Default constants are **analytic** — derived from the interpolation and
//! Young inequalities that the continuous operators satisfy, with a 5%
//! headroom where a chain of estimates is involved — so the structural checks
//! hold on every sampled state, not just asymptotically. They are deliberately
//! conservative; the calibration routines report the empirically smallest
//! constants alongside.

pub mod noise_maps;

mod burgers;
mod ns2d;
mod p_laplace;

pub use burgers::{AdvectionFn, CubicReaction};
pub use noise_maps::{lipschitz_noise_maps, BMode, GMap, HProfile, NoiseMaps};
pub use p_laplace::FdGrid;

use crate::error::SpdeError;
use crate::spaces::{
    dual_norm_vstar, l4_norm, leray_project, norm_h, norm_v, DiscId, DomainKind,
    SpatialDiscretization, StateVector,
};

use std::f64::consts::PI;

/// Scalar constants of the structural framework for one suite.
///
/// `theta` is the coercivity weight on `‖v‖^α_V`, `f_t` the constant bound
/// process, `c_h2/c_h3/c_h4` the `C`-constants of the local-monotonicity,
/// coercivity and growth conditions, `c_c5` the growth constant of the
/// locality weight `ρ`, and `gamma` the `V`-norm weight admitted in the
/// jump-intensity bound.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrameworkConstants {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub f_t: f64,
    pub c_h2: f64,
    pub c_h3: f64,
    pub c_h4: f64,
    pub c_c5: f64,
    pub gamma: f64,
}

impl FrameworkConstants {
    /// Largest admissible `gamma` for these `(theta, beta)`; `∞` when
    /// `beta = 0` (any finite value is then admissible).
    pub fn gamma_bound(&self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            self.theta / (2.0 * self.beta)
        }
    }

    pub fn validate(&self) -> Result<(), SpdeError> {
        let finite = [
            self.alpha, self.beta, self.theta, self.f_t, self.c_h2, self.c_h3, self.c_h4,
            self.c_c5, self.gamma,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(SpdeError::config(
                "constants",
                "all framework constants must be finite".to_string(),
            ));
        }
        if self.alpha <= 1.0 {
            return Err(SpdeError::config(
                "constants.alpha",
                format!("coercivity exponent must exceed 1, got {}", self.alpha),
            ));
        }
        if self.beta < 0.0 {
            return Err(SpdeError::config(
                "constants.beta",
                format!("growth exponent must be nonnegative, got {}", self.beta),
            ));
        }
        if self.theta <= 0.0 {
            return Err(SpdeError::config(
                "constants.theta",
                format!("coercivity weight must be positive, got {}", self.theta),
            ));
        }
        if self.f_t < 0.0 || self.c_h2 < 0.0 || self.c_h3 < 0.0 || self.c_h4 < 0.0 || self.c_c5 < 0.0
        {
            return Err(SpdeError::config(
                "constants",
                "bound constants must be nonnegative".to_string(),
            ));
        }
        if self.gamma < 0.0 {
            return Err(SpdeError::config(
                "constants.gamma",
                format!("jump-intensity weight must be nonnegative, got {}", self.gamma),
            ));
        }
        if self.beta > 0.0 && self.gamma >= self.gamma_bound() {
            return Err(SpdeError::config(
                "constants.gamma",
                format!(
                    "jump-intensity weight gamma = {} is not admissible: moment bounds need \
                     gamma < theta/(2 beta) = {} (theta = {}, beta = {})",
                    self.gamma,
                    self.gamma_bound(),
                    self.theta,
                    self.beta
                ),
            ));
        }
        Ok(())
    }
}

/// Functional form of the locality weight `ρ` in the monotonicity condition.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RhoForm {
    /// `ρ ≡ 0` (globally monotone drift).
    Zero,
    /// `ρ(v) = c‖v‖²_V` (transport-type nonlinearities).
    VNormSq { c: f64 },
    /// `ρ(v) = c‖v‖⁴_{L⁴}` (two-dimensional convection).
    L4Fourth { c: f64 },
}

impl RhoForm {
    pub fn eval(&self, disc: &SpatialDiscretization, v: &StateVector) -> f64 {
        match self {
            RhoForm::Zero => 0.0,
            RhoForm::VNormSq { c } => {
                let vn = norm_v(disc, v, 2.0).expect("p = 2 norm is always defined");
                c * vn * vn
            }
            RhoForm::L4Fourth { c } => c * l4_norm(disc, v).powi(4),
        }
    }

    /// Analytic constant for the growth bound
    /// `ρ(v) ≤ C (1 + ‖v‖^α_V)(1 + ‖v‖^β_H)` (uses the interpolation
    /// `‖v‖⁴_{L⁴} ≤ 2‖v‖²_H ‖v‖²_V` for the quartic form).
    pub fn growth_constant(&self) -> f64 {
        match self {
            RhoForm::Zero => 0.0,
            RhoForm::VNormSq { c } => c.abs(),
            RhoForm::L4Fourth { c } => 2.0 * c.abs(),
        }
    }

    pub fn validate(&self) -> Result<(), SpdeError> {
        let c = match self {
            RhoForm::Zero => return Ok(()),
            RhoForm::VNormSq { c } | RhoForm::L4Fourth { c } => *c,
        };
        if !c.is_finite() || c < 0.0 {
            return Err(SpdeError::config(
                "rho.c",
                format!("locality weight needs a finite nonnegative c, got {c}"),
            ));
        }
        Ok(())
    }
}

/// The drift families shipped with the library.
#[derive(Clone, Debug)]
pub enum SuiteKind {
    /// `A ≡ 0` — a diagnostic suite for pure-noise runs (compensator
    /// consistency, isometry checks). Its coercivity constant is
    /// resolution-dependent since nothing dissipates.
    ZeroDrift,
    /// `A(v) = κ Δv` on the interval or torus.
    Heat { kappa: f64 },
    /// `A(v) = ν v_xx + f(v) v_x + f0(v)` on the interval (Dirichlet).
    Burgers {
        viscosity: f64,
        advection: AdvectionFn,
        reaction: Option<CubicReaction>,
    },
    /// `A(v) = div(|∇v|^{p−2}∇v) + f0(v)` on the interval, `p > 2`,
    /// via finite differences on an oversampled grid.
    PLaplace {
        p: f64,
        reaction: Option<CubicReaction>,
        grid: p_laplace::FdGrid,
    },
    /// `A(u) = ν Δu − P[(u·∇)u] + f0` on the 2-torus (divergence-free).
    Ns2d {
        viscosity: f64,
        forcing: Option<StateVector>,
    },
}

/// A drift family + noise coefficients + declared framework constants,
/// bound to one spatial discretization.
#[derive(Clone, Debug)]
pub struct OperatorSuite {
    pub kind: SuiteKind,
    pub noise: NoiseMaps,
    pub constants: FrameworkConstants,
    pub rho: RhoForm,
    pub label: String,
    disc_id: DiscId,
    /// Per-coefficient linear diagonal `d` with `drift = explicit + d ∘ v`
    /// (the stiff part integrated implicitly by the semi-implicit scheme).
    implicit_diag: Option<Vec<f64>>,
}

impl OperatorSuite {
    fn check_disc(&self, disc: &SpatialDiscretization, context: &'static str) {
        assert_eq!(
            self.disc_id,
            disc.id(),
            "operator suite used with a different discretization ({context})"
        );
    }

    pub fn disc_id(&self) -> DiscId {
        self.disc_id
    }

    /// Full drift `A(v)` as a Galerkin image.
    pub fn drift(&self, disc: &SpatialDiscretization, t: f64, v: &StateVector) -> StateVector {
        let mut out = self.explicit_drift(disc, t, v);
        if let Some(d) = &self.implicit_diag {
            for (i, di) in d.iter().enumerate() {
                out.coeffs[i] += di * v.coeffs[i];
            }
        }
        out
    }

    /// The drift minus its linear diagonal part (what an implicit–explicit
    /// scheme treats explicitly). For suites without a diagonal split this is
    /// the whole drift.
    pub fn explicit_drift(
        &self,
        disc: &SpatialDiscretization,
        _t: f64,
        v: &StateVector,
    ) -> StateVector {
        self.check_disc(disc, "drift");
        match &self.kind {
            SuiteKind::ZeroDrift | SuiteKind::Heat { .. } => StateVector::zeros(disc),
            SuiteKind::Burgers {
                advection, reaction, ..
            } => burgers::nonlinear_term(disc, advection, reaction.as_ref(), v),
            SuiteKind::PLaplace { p, reaction, grid } => {
                p_laplace::apply(grid, *p, reaction.as_ref(), disc, v)
            }
            SuiteKind::Ns2d { forcing, .. } => {
                let mut out = ns2d::convection(disc, v)
                    .expect("suite construction guarantees a 2-component torus");
                if let Some(f) = forcing {
                    out.axpy(1.0, f);
                }
                out
            }
        }
    }

    /// Eigenvalue diagonal of the implicitly-integrated drift part, if any.
    pub fn implicit_diagonal(&self) -> Option<&[f64]> {
        self.implicit_diag.as_deref()
    }

    /// Locality weight `ρ(v)` of the monotonicity condition.
    pub fn rho_eval(&self, disc: &SpatialDiscretization, v: &StateVector) -> f64 {
        self.check_disc(disc, "rho");
        self.rho.eval(disc, v)
    }

    /// Strong-monotonicity coefficient `δ` with
    /// `⟨A(u) − A(v), u − v⟩ ≤ −δ‖u − v‖^α_V` where the family provides one
    /// (the degenerate diffusion; `δ = 0.9·2^{2−p}` shaded for the mismatch
    /// between the difference energy and the quadrature `V`-norm).
    pub fn strong_monotonicity_delta(&self) -> Option<f64> {
        match &self.kind {
            SuiteKind::PLaplace { p, .. } => Some(0.9 * 2f64.powf(2.0 - p)),
            _ => None,
        }
    }
}

fn lambda_diag(disc: &SpatialDiscretization, factor: f64) -> Vec<f64> {
    let lambda = disc.mode_lambda();
    let pcd = disc.per_component_dim();
    let mut d = vec![0.0; disc.dim()];
    for c in 0..disc.components {
        for i in 0..pcd {
            d[c * pcd + i] = factor * lambda[i];
        }
    }
    d
}

/// `‖B‖²_HS` of the state-independent diffusion part (`b²m` when additive).
fn additive_hs_level(noise: &NoiseMaps) -> f64 {
    match noise.b_mode {
        BMode::Additive => noise.b_scale * noise.b_scale * noise.wiener_modes as f64,
        BMode::Multiplicative => 0.0,
    }
}

/// Coefficient of `‖v‖²_H` in `‖B(v)‖²_HS` (`b²` when multiplicative).
fn multiplicative_hs_level(noise: &NoiseMaps) -> f64 {
    match noise.b_mode {
        BMode::Additive => 0.0,
        BMode::Multiplicative => noise.b_scale * noise.b_scale,
    }
}

fn positive(name: &'static str, x: f64) -> Result<(), SpdeError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpdeError::parameter(
            name,
            format!("needs a finite positive value, got {x}"),
        ));
    }
    Ok(())
}

/// Diagnostic suite with `A ≡ 0`: the solution is driven by noise alone.
pub fn zero_drift_suite(
    disc: &SpatialDiscretization,
    noise: NoiseMaps,
) -> Result<OperatorSuite, SpdeError> {
    let lambda_max = disc
        .mode_lambda()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1.0);
    let theta = 1e-3;
    let constants = FrameworkConstants {
        alpha: 2.0,
        beta: 0.0,
        theta,
        f_t: additive_hs_level(&noise),
        c_h2: noise.lipschitz_sq(),
        // Without dissipation the coercivity slack must come from the finite
        // spectrum: θ‖v‖²_V ≤ θ λ_max ‖v‖²_H on the retained modes.
        c_h3: theta * lambda_max + multiplicative_hs_level(&noise),
        c_h4: 1.0,
        c_c5: 0.0,
        gamma: 0.0,
    };
    constants.validate()?;
    Ok(OperatorSuite {
        kind: SuiteKind::ZeroDrift,
        noise,
        constants,
        rho: RhoForm::Zero,
        label: "zero_drift".to_string(),
        disc_id: disc.id(),
        implicit_diag: None,
    })
}

/// Linear diffusion `A(v) = κΔv`. All framework constants are exact:
/// `θ = 2κ`, and the coercivity margin vanishes identically for additive
/// noise.
pub fn heat_suite(
    disc: &SpatialDiscretization,
    kappa: f64,
    noise: NoiseMaps,
) -> Result<OperatorSuite, SpdeError> {
    positive("kappa", kappa)?;
    let constants = FrameworkConstants {
        alpha: 2.0,
        beta: 0.0,
        theta: 2.0 * kappa,
        f_t: additive_hs_level(&noise),
        c_h2: noise.lipschitz_sq(),
        c_h3: multiplicative_hs_level(&noise),
        c_h4: kappa * kappa,
        c_c5: 0.0,
        gamma: 0.0,
    };
    constants.validate()?;
    Ok(OperatorSuite {
        kind: SuiteKind::Heat { kappa },
        noise,
        constants,
        rho: RhoForm::Zero,
        label: format!("heat(kappa={kappa})"),
        disc_id: disc.id(),
        implicit_diag: Some(lambda_diag(disc, -kappa)),
    })
}

/// Viscous Burgers-type drift on the interval, with optional cubic reaction.
///
/// Defaults follow the interpolation estimate
/// `|a ∫ v_x w²| ≤ ν‖w‖²_V + c_b (1 + ‖v‖²_V)‖w‖²_H` with
/// `c_b = 0.75 (√2 a)^{4/3} / (4ν)^{1/3}`, giving `ρ(v) = 1.05·c_b‖v‖²_V`
/// and a guaranteed margin of `ν‖w‖²_V` in the monotonicity condition.
pub fn burgers_suite(
    disc: &SpatialDiscretization,
    viscosity: f64,
    advection: AdvectionFn,
    reaction: Option<CubicReaction>,
    noise: NoiseMaps,
) -> Result<OperatorSuite, SpdeError> {
    if disc.domain != DomainKind::IntervalDirichlet || disc.components != 1 {
        return Err(SpdeError::parameter(
            "domain",
            "the transport–diffusion family is defined on the scalar Dirichlet interval"
                .to_string(),
        ));
    }
    positive("viscosity", viscosity)?;
    if let Some(r) = &reaction {
        r.validate()?;
    }
    let a = advection.slope_bound();
    if !a.is_finite() {
        return Err(SpdeError::parameter(
            "advection",
            "needs a finite Lipschitz bound".to_string(),
        ));
    }

    let osl = reaction.map(|r| r.one_sided_lipschitz().max(0.0)).unwrap_or(0.0);
    let pair = reaction.map(|r| r.pairing_bound().max(0.0)).unwrap_or(0.0);
    let k_scale = reaction.map(|r| r.coeff_scale()).unwrap_or(0.0);

    let c_b = 0.75 * (std::f64::consts::SQRT_2 * a).powf(4.0 / 3.0) / (4.0 * viscosity).cbrt();
    let rho = if c_b > 0.0 {
        RhoForm::VNormSq { c: 1.05 * c_b }
    } else {
        RhoForm::Zero
    };

    // Dual-norm growth of the drift: the transport part contributes
    // `(3a²/4)(1 + 1/π²)`, the cubic reaction `54K²(1 + 1/π²)` (through
    // `‖f0(v)‖_{L¹} ≤ 3K(1 + ‖v‖³_{L³})` and `‖v‖⁶_{L³} ≤ 2‖v‖⁵_H‖v‖_V`).
    let growth_shape = 1.0 + 1.0 / (PI * PI);
    let c_h4 = 1.05
        * (3.0 * viscosity * viscosity
            + 0.75 * a * a * growth_shape
            + 54.0 * k_scale * k_scale * growth_shape);
    let f_t = additive_hs_level(&noise) + 1.05 * 54.0 * k_scale * k_scale;

    let theta = if advection.quadrature_exact() {
        2.0 * viscosity
    } else {
        // non-polynomial transport: energy cancellation only up to grid error
        1.9 * viscosity
    };

    let constants = FrameworkConstants {
        alpha: 2.0,
        beta: 4.0,
        theta,
        f_t,
        c_h2: 1.05 * c_b + 2.0 * osl + noise.lipschitz_sq(),
        c_h3: 2.0 * pair + multiplicative_hs_level(&noise),
        c_h4,
        c_c5: rho.growth_constant(),
        gamma: 0.0,
    };
    constants.validate()?;
    rho.validate()?;
    let label = format!("burgers(nu={viscosity}, a={a})");
    Ok(OperatorSuite {
        kind: SuiteKind::Burgers {
            viscosity,
            advection,
            reaction,
        },
        noise,
        constants,
        rho,
        label,
        disc_id: disc.id(),
        implicit_diag: Some(lambda_diag(disc, -viscosity)),
    })
}

/// Degenerate diffusion of exponent `p > 2` on the interval, with optional
/// cubic reaction, discretized by finite differences (see the module docs of
/// the evaluator for the exactness properties).
pub fn p_laplace_suite(
    disc: &SpatialDiscretization,
    p: f64,
    reaction: Option<CubicReaction>,
    noise: NoiseMaps,
) -> Result<OperatorSuite, SpdeError> {
    if disc.domain != DomainKind::IntervalDirichlet || disc.components != 1 {
        return Err(SpdeError::parameter(
            "domain",
            "the degenerate diffusion family is defined on the scalar Dirichlet interval"
                .to_string(),
        ));
    }
    p_laplace::validate_exponent(p)?;
    if let Some(r) = &reaction {
        r.validate()?;
    }
    let grid = p_laplace::build_fd_grid(disc);

    let osl = reaction.map(|r| r.one_sided_lipschitz().max(0.0)).unwrap_or(0.0);
    let pair = reaction.map(|r| r.pairing_bound().max(0.0)).unwrap_or(0.0);
    let k_scale = reaction.map(|r| r.coeff_scale()).unwrap_or(0.0);

    // `‖A(v)‖^{p/(p−1)}_{V*} ≤ 2(1.02‖v‖_V^{p−1})^{q} + 2(6K(1+‖v‖_V‖v‖²_H))^{q}`
    // with q = p/(p−1) ≤ 2; the 1.02 absorbs the difference-quotient vs.
    // gradient discrepancy of the oversampled grid.
    let q = p / (p - 1.0);
    let reaction_growth = 2.0 * (6.0 * k_scale).powf(q);
    let c_h4 = 1.05 * (2.0 * 1.02f64.powf(q) + reaction_growth);
    let f_t = additive_hs_level(&noise) + 1.05 * reaction_growth;

    let constants = FrameworkConstants {
        alpha: p,
        beta: 4.0,
        // The difference energy `2hΣ|Dv|^p` dominates `θ‖v‖^p_V` only up to
        // the interpolant's difference-quotient loss; 16× oversampling keeps
        // that loss within a fraction of a percent, shaded to 5% here.
        theta: 1.9,
        f_t,
        c_h2: 2.0 * osl + noise.lipschitz_sq(),
        c_h3: 2.0 * pair + multiplicative_hs_level(&noise),
        c_h4,
        c_c5: 0.0,
        gamma: 0.0,
    };
    constants.validate()?;
    Ok(OperatorSuite {
        kind: SuiteKind::PLaplace { p, reaction, grid },
        noise,
        constants,
        rho: RhoForm::Zero,
        label: format!("p_laplace(p={p})"),
        disc_id: disc.id(),
        implicit_diag: None,
    })
}

/// Incompressible Navier–Stokes on the 2-torus. A supplied forcing is made
/// admissible at construction: its mean modes are dropped and it is projected
/// onto the divergence-free subspace.
pub fn ns2d_suite(
    disc: &SpatialDiscretization,
    viscosity: f64,
    forcing: Option<StateVector>,
    noise: NoiseMaps,
) -> Result<OperatorSuite, SpdeError> {
    if disc.domain != DomainKind::Torus2d || disc.components != 2 {
        return Err(SpdeError::parameter(
            "domain",
            "the convection family is defined on the 2-component torus".to_string(),
        ));
    }
    positive("viscosity", viscosity)?;

    let forcing = match forcing {
        None => None,
        Some(mut f) => {
            if f.coeffs.len() != disc.dim() {
                return Err(SpdeError::Dimension {
                    context: "ns2d forcing",
                    expected: disc.dim(),
                    found: f.coeffs.len(),
                });
            }
            let pcd = disc.per_component_dim();
            f.coeffs[0] = 0.0;
            f.coeffs[pcd] = 0.0;
            let f = leray_project(disc, &f)?;
            if norm_h(disc, &f) == 0.0 {
                None
            } else {
                Some(f)
            }
        }
    };
    let f_vstar = forcing
        .as_ref()
        .map(|f| dual_norm_vstar(disc, f, 2.0))
        .unwrap_or(0.0);

    let nu3 = viscosity * viscosity * viscosity;
    let rho = RhoForm::L4Fourth { c: 64.0 / nu3 };
    let constants = FrameworkConstants {
        alpha: 2.0,
        beta: 2.0,
        theta: viscosity,
        // coercivity slack 2‖f‖²_{V*}/ν plus growth slack 3‖f‖²_{V*}
        f_t: additive_hs_level(&noise) + f_vstar * f_vstar * (2.0 / viscosity + 3.0),
        c_h2: noise.lipschitz_sq(),
        c_h3: multiplicative_hs_level(&noise),
        // ‖A(u)‖² ≤ 3ν²‖u‖²_V + 24‖u‖²_{L⁴}⁴-interpolated + 3‖f‖²_{V*}
        c_h4: 1.05 * (3.0 * viscosity * viscosity + 48.0),
        c_c5: rho.growth_constant(),
        gamma: 0.0,
    };
    constants.validate()?;
    Ok(OperatorSuite {
        kind: SuiteKind::Ns2d { viscosity, forcing },
        noise,
        constants,
        rho,
        label: format!("ns2d(nu={viscosity})"),
        disc_id: disc.id(),
        implicit_diag: Some(lambda_diag(disc, -viscosity)),
    })
}

#[cfg(test)]
mod tests;
