//! Incompressible Navier–Stokes drift on the 2-torus: the convective term
//! `−P[(u·∇)u]` (Leray-projected), evaluated pseudo-spectrally.
//!
//! The quadrature grid resolves products of three retained factors without
//! aliasing, so the quadratic term's Galerkin image is exact; in particular
//! the energy identity `⟨P[(u·∇)u], u⟩ = 0` and the antisymmetry
//! `⟨F(u), w⟩ = −⟨(u·∇)w, u⟩` hold to roundoff on exactly divergence-free
//! states.

use crate::error::SpdeError;
use crate::spaces::torus::{component_grid, project_grid, Deriv};
use crate::spaces::{leray_project, torus_geometry, SpatialDiscretization, StateVector};

/// `F(u) = −P[(u·∇)u]` for a two-component torus velocity field.
pub(crate) fn convection(
    disc: &SpatialDiscretization,
    v: &StateVector,
) -> Result<StateVector, SpdeError> {
    let g = torus_geometry(disc);
    let n = disc.n;
    let pcd = n * n;
    let (c0, c1) = v.coeffs.split_at(pcd);

    let u1 = component_grid(&g.axis, c0, n, Deriv::None);
    let u2 = component_grid(&g.axis, c1, n, Deriv::None);
    let d1x = component_grid(&g.axis, c0, n, Deriv::X);
    let d1y = component_grid(&g.axis, c0, n, Deriv::Y);
    let d2x = component_grid(&g.axis, c1, n, Deriv::X);
    let d2y = component_grid(&g.axis, c1, n, Deriv::Y);

    let adv1 = &u1 * &d1x + &u2 * &d1y;
    let adv2 = &u1 * &d2x + &u2 * &d2y;

    let p1 = project_grid(&g.axis, &adv1, n, Deriv::None);
    let p2 = project_grid(&g.axis, &adv2, n, Deriv::None);

    let mut coeffs = vec![0.0; 2 * pcd];
    for (i, val) in p1.iter().enumerate() {
        coeffs[i] = -g.grid_weight * val;
    }
    for (i, val) in p2.iter().enumerate() {
        coeffs[pcd + i] = -g.grid_weight * val;
    }
    let raw = StateVector {
        coeffs,
        disc_id: disc.id(),
    };
    leray_project(disc, &raw)
}
