//! Band-limited Gaussian random states used by condition probes and tests.
//!
//! Coefficients are drawn i.i.d. normal, damped by a spectral decay factor
//! `(1 + λ_i)^{-decay/2}` (so `decay = 1` is the `|k|^{-1}` profile), then the
//! whole state is rescaled to a uniformly drawn `H`-radius in `(0, radius]`.
//! Torus samples are mean-zero; velocity samples are divergence-free.

use crate::rng::PathRng;
use crate::spaces::{leray_project, norm_h, DomainKind, SpatialDiscretization, StateVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    /// Upper bound for the sampled `H`-norm.
    pub radius: f64,
    /// Spectral decay exponent.
    pub decay: f64,
    /// Project onto the divergence-free subspace (torus velocity fields).
    pub divergence_free: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            radius: 1.0,
            decay: 1.0,
            divergence_free: false,
        }
    }
}

/// Draw one random state.
pub fn sample_state(
    disc: &SpatialDiscretization,
    spec: &SampleSpec,
    rng: &mut PathRng,
) -> StateVector {
    let lambda = disc.mode_lambda();
    let pcd = disc.per_component_dim();
    let mut v = StateVector::zeros(disc);
    for c in 0..disc.components {
        for i in 0..pcd {
            let xi: f64 = StandardNormal.sample(rng);
            let damp = (1.0 + lambda[i]).powf(-0.5 * spec.decay);
            v.coeffs[c * pcd + i] = xi * damp;
        }
    }
    if disc.domain == DomainKind::Torus2d {
        // keep samples mean-zero so V-norm-based bounds are meaningful
        for c in 0..disc.components {
            v.coeffs[c * pcd] = 0.0;
        }
    }
    if spec.divergence_free {
        v = leray_project(disc, &v).expect("divergence_free sampling needs torus velocity fields");
    }
    let target: f64 = rng.gen_range(0.0..1.0f64) * spec.radius;
    let current = norm_h(disc, &v);
    if current > 0.0 {
        v.scale(target / current);
    }
    v
}

/// Draw a pair of independent states (for two-point probes).
pub fn sample_pair(
    disc: &SpatialDiscretization,
    spec: &SampleSpec,
    rng: &mut PathRng,
) -> (StateVector, StateVector) {
    let a = sample_state(disc, spec, rng);
    let b = sample_state(disc, spec, rng);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::probe_rng;
    use crate::spaces::{build_discretization, divergence_residual};

    #[test]
    fn samples_respect_radius_and_divergence() {
        let disc = build_discretization(DomainKind::Torus2d, 4, 2).unwrap();
        let spec = SampleSpec {
            radius: 2.5,
            decay: 1.0,
            divergence_free: true,
        };
        let mut rng = probe_rng(1, 7);
        for _ in 0..20 {
            let v = sample_state(&disc, &spec, &mut rng);
            assert!(norm_h(&disc, &v) <= 2.5 + 1e-12);
            assert!(divergence_residual(&disc, &v).unwrap() < 1e-10);
            let pcd = disc.per_component_dim();
            assert_eq!(v.coeffs[0], 0.0);
            assert_eq!(v.coeffs[pcd], 0.0);
        }
    }

    #[test]
    fn decay_damps_high_modes() {
        let disc = build_discretization(DomainKind::IntervalDirichlet, 64, 1).unwrap();
        let mut rng = probe_rng(2, 7);
        let spec = SampleSpec {
            radius: 1.0,
            decay: 2.0,
            divergence_free: false,
        };
        // average energy in the top half should be well below the bottom half
        let mut low = 0.0;
        let mut high = 0.0;
        for _ in 0..50 {
            let v = sample_state(&disc, &spec, &mut rng);
            low += v.coeffs[..32].iter().map(|a| a * a).sum::<f64>();
            high += v.coeffs[32..].iter().map(|a| a * a).sum::<f64>();
        }
        assert!(high < 0.05 * low, "high {high} vs low {low}");
    }
}
