//! The noise coefficient maps `B`, `f`, `g` shared by all operator suites.
//!
//! * `B(t,v)`: linear map from the `m` Wiener directions into `H_n`; column
//!   `i` is either `b·e_i` (additive) or `b·v_i·e_i` (multiplicative,
//!   mode-diagonal). Both are globally Lipschitz in `H`.
//! * `f(t,v,z) = f_scale·h(z)·v`: state-multiplicative small-jump map with a
//!   bounded mark profile `h`.
//! * `g(t,v,z)`: large-jump map — zero, an additive mark-scaled basis-mode
//!   bump, or a state-multiplicative kick.

use crate::error::SpdeError;
use crate::noise::LevyNoiseSpec;
use crate::spaces::{SpatialDiscretization, StateVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BMode {
    Additive,
    Multiplicative,
}

/// Mark profile `h(z)` of the small-jump map.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HProfile {
    /// `h(z) = min(‖z‖, cap)`.
    NormCapped { cap: f64 },
    /// `h(z) = ‖z‖`.
    Norm,
    /// `h(z) = c`.
    Const { c: f64 },
}

impl HProfile {
    pub fn eval(&self, z: &[f64]) -> f64 {
        let r = z.iter().map(|a| a * a).sum::<f64>().sqrt();
        match self {
            HProfile::NormCapped { cap } => r.min(*cap),
            HProfile::Norm => r,
            HProfile::Const { c } => *c,
        }
    }
}

/// Large-jump map `g`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GMap {
    Zero,
    /// `g(t,v,z) = amplitude·z₁·e_{mode}` — adds a fixed profile scaled by
    /// the first mark coordinate.
    AdditiveMode { mode: usize, amplitude: f64 },
    /// `g(t,v,z) = amplitude·‖z‖·v`.
    Multiplicative { amplitude: f64 },
}

/// Validated bundle of noise coefficient maps.
#[derive(Clone, Debug)]
pub struct NoiseMaps {
    pub wiener_modes: usize,
    pub b_scale: f64,
    pub b_mode: BMode,
    pub f_scale: f64,
    pub h_profile: HProfile,
    pub g_map: GMap,
    /// `Σ_j w_j h(z_j)²` over the small atoms (precomputed).
    pub h_sq_mass: f64,
}

/// Build and validate the noise maps for a discretization and noise spec.
///
/// Checks Wiener-mode fit, mark-profile finiteness on every atom
/// (summability of the jump intensities is then automatic for the finite
/// atomic measure), and the shape of `g`.
pub fn lipschitz_noise_maps(
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    b_scale: f64,
    b_mode: BMode,
    f_scale: f64,
    h_profile: HProfile,
    g_map: GMap,
) -> Result<NoiseMaps, SpdeError> {
    if noise_spec.wiener_modes > disc.dim() {
        return Err(SpdeError::parameter(
            "wiener_modes",
            format!(
                "{} Wiener directions cannot map into a {}-dimensional space",
                noise_spec.wiener_modes,
                disc.dim()
            ),
        ));
    }
    if !(b_scale >= 0.0 && b_scale.is_finite()) || !(f_scale >= 0.0 && f_scale.is_finite()) {
        return Err(SpdeError::parameter(
            "noise_scales",
            format!("need finite b_scale, f_scale ≥ 0, got ({b_scale}, {f_scale})"),
        ));
    }
    let mut h_sq_mass = 0.0;
    for (j, atom) in noise_spec.small_atoms.iter().enumerate() {
        let h = h_profile.eval(&atom.mark);
        if !h.is_finite() {
            return Err(SpdeError::parameter(
                "h_profile",
                format!("h is not finite on atom {j}"),
            ));
        }
        h_sq_mass += atom.weight * h * h;
    }
    if let GMap::AdditiveMode { mode, .. } = g_map {
        if mode >= disc.dim() {
            return Err(SpdeError::parameter(
                "g_map",
                format!("additive mode {mode} out of range (dim {})", disc.dim()),
            ));
        }
    }
    Ok(NoiseMaps {
        wiener_modes: noise_spec.wiener_modes,
        b_scale,
        b_mode,
        f_scale,
        h_profile,
        g_map,
        h_sq_mass,
    })
}

impl NoiseMaps {
    /// `Σ_i B_i(t,v)·ΔW_i` without materializing the columns.
    pub fn diffusion_apply(&self, v: &StateVector, dw: &[f64], out: &mut StateVector) {
        debug_assert_eq!(dw.len(), self.wiener_modes);
        for (i, &dwi) in dw.iter().enumerate() {
            let column = match self.b_mode {
                BMode::Additive => self.b_scale,
                BMode::Multiplicative => self.b_scale * v.coeffs[i],
            };
            out.coeffs[i] += column * dwi;
        }
    }

    /// The `m` columns `B_i(t,v)` as states.
    pub fn diffusion_columns(
        &self,
        disc: &SpatialDiscretization,
        v: &StateVector,
    ) -> Vec<StateVector> {
        (0..self.wiener_modes)
            .map(|i| {
                let mut col = StateVector::zeros(disc);
                col.coeffs[i] = match self.b_mode {
                    BMode::Additive => self.b_scale,
                    BMode::Multiplicative => self.b_scale * v.coeffs[i],
                };
                col
            })
            .collect()
    }

    /// Hilbert–Schmidt norm squared `‖B(t,v)‖²₂ = Σ_i ‖B_i(t,v)‖²_H`.
    pub fn hs_norm_sq(&self, v: &StateVector) -> f64 {
        match self.b_mode {
            BMode::Additive => self.b_scale * self.b_scale * self.wiener_modes as f64,
            BMode::Multiplicative => {
                let s: f64 = v.coeffs[..self.wiener_modes].iter().map(|a| a * a).sum();
                self.b_scale * self.b_scale * s
            }
        }
    }

    /// Small-jump map `f(t,v,z)`.
    pub fn small_jump(&self, v: &StateVector, z: &[f64]) -> StateVector {
        let factor = self.f_scale * self.h_profile.eval(z);
        let mut out = v.clone();
        out.scale(factor);
        out
    }

    /// Large-jump map `g(t,v,z)`.
    pub fn large_jump(&self, disc: &SpatialDiscretization, v: &StateVector, z: &[f64]) -> StateVector {
        match &self.g_map {
            GMap::Zero => StateVector::zeros(disc),
            GMap::AdditiveMode { mode, amplitude } => {
                let mut out = StateVector::zeros(disc);
                out.coeffs[*mode] = amplitude * z[0];
                out
            }
            GMap::Multiplicative { amplitude } => {
                let r = z.iter().map(|a| a * a).sum::<f64>().sqrt();
                let mut out = v.clone();
                out.scale(amplitude * r);
                out
            }
        }
    }

    pub fn large_jump_is_zero(&self) -> bool {
        matches!(self.g_map, GMap::Zero)
    }

    /// Joint `H`-Lipschitz constant of the noise intensities entering the
    /// local-monotonicity display: `‖B(u)−B(v)‖²₂ + ∫‖f(u,z)−f(v,z)‖²ν(dz)
    /// ≤ L·‖u−v‖²_H` with `L = b²·1[multiplicative] + f² Σ w_j h(z_j)²`.
    pub fn lipschitz_sq(&self) -> f64 {
        let b_part = match self.b_mode {
            BMode::Additive => 0.0,
            BMode::Multiplicative => self.b_scale * self.b_scale,
        };
        b_part + self.f_scale * self.f_scale * self.h_sq_mass
    }

    /// `Σ_j w_j h(z_j)^q` (for the higher-moment side condition).
    pub fn h_pow_mass(&self, noise_spec: &LevyNoiseSpec, q: f64) -> f64 {
        noise_spec
            .small_atoms
            .iter()
            .map(|a| a.weight * self.h_profile.eval(&a.mark).powf(q))
            .sum()
    }
}
