//! Real tensor trigonometric basis on `[0,2π)²` and the divergence-free
//! projector.
//!
//! Per axis the `n` orthonormal factors are
//! `1/√(2π), cos(x)/√π, …, cos(Kc·x)/√π, sin(x)/√π, …, sin(Ks·x)/√π`
//! with `Kc = ⌊n/2⌋`, `Ks = ⌈n/2⌉ − 1`, so every `n` (even or odd) yields
//! exactly `n²` orthonormal 2-d modes per component. For even `n` the top
//! cosine has no sine partner; the divergence-free projector below handles
//! those modes exactly (as the orthogonal projector onto the kernel of the
//! untruncated divergence) instead of assuming complex-exponential pairing.

use ndarray::Array2;
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Parity {
    Const,
    Cos,
    Sin,
}

pub(crate) struct AxisBasis {
    pub n: usize,
    pub kc: usize,
    pub nodes: Vec<f64>,
    /// `values[(i, j)] = φ_i(x_j)` for the `n` axis factors on the grid.
    pub values: Array2<f64>,
    pub deriv: Array2<f64>,
    pub freq: Vec<usize>,
    pub parity: Vec<Parity>,
}

/// One orthogonality block of the divergence map: the listed coefficient
/// entries feed a single orthonormal divergence target with weights `gamma`.
pub(crate) struct LerayBlock {
    pub idx: Vec<usize>,
    pub gamma: Vec<f64>,
    pub gamma_norm_sq: f64,
}

pub(crate) struct TorusGeometry {
    pub axis: AxisBasis,
    /// `‖∇(φ_ix φ_iy)‖²_{L²} = k_x² + k_y²` per flattened mode.
    pub lambda: Vec<f64>,
    pub leray_blocks: Vec<LerayBlock>,
    /// Quadrature weight per grid node, `(2π/N)²`.
    pub grid_weight: f64,
}

/// Cos/sin frequency split for an axis with `n` retained factors.
pub(crate) fn axis_split(n: usize) -> (usize, usize) {
    (n / 2, (n + 1) / 2 - 1)
}

fn build_axis(n: usize) -> AxisBasis {
    let (kc, ks) = axis_split(n);
    // Quartic products of retained factors have per-axis frequency ≤ 4·Kc;
    // the N-point periodic rule aliases only multiples of N.
    let big_n = (4 * kc + 2).max(8);
    let h = 2.0 * PI / big_n as f64;
    let nodes: Vec<f64> = (0..big_n).map(|j| j as f64 * h).collect();

    let mut freq = Vec::with_capacity(n);
    let mut parity = Vec::with_capacity(n);
    freq.push(0);
    parity.push(Parity::Const);
    for k in 1..=kc {
        freq.push(k);
        parity.push(Parity::Cos);
    }
    for k in 1..=ks {
        freq.push(k);
        parity.push(Parity::Sin);
    }

    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    let mut values = Array2::zeros((n, big_n));
    let mut deriv = Array2::zeros((n, big_n));
    for i in 0..n {
        let k = freq[i] as f64;
        for (j, &x) in nodes.iter().enumerate() {
            match parity[i] {
                Parity::Const => {
                    values[(i, j)] = inv_sqrt_2pi;
                    deriv[(i, j)] = 0.0;
                }
                Parity::Cos => {
                    values[(i, j)] = inv_sqrt_pi * (k * x).cos();
                    deriv[(i, j)] = -inv_sqrt_pi * k * (k * x).sin();
                }
                Parity::Sin => {
                    values[(i, j)] = inv_sqrt_pi * (k * x).sin();
                    deriv[(i, j)] = inv_sqrt_pi * k * (k * x).cos();
                }
            }
        }
    }
    AxisBasis {
        n,
        kc,
        nodes,
        values,
        deriv,
        freq,
        parity,
    }
}

/// Does axis factor `idx` exist in a target axis with split `(kc_t, ks_t)`?
pub(crate) fn factor_in_axis(axis: &AxisBasis, idx: usize, kc_t: usize, ks_t: usize) -> bool {
    match axis.parity[idx] {
        Parity::Const => true,
        Parity::Cos => axis.freq[idx] <= kc_t,
        Parity::Sin => axis.freq[idx] <= ks_t,
    }
}

/// Index of the same (parity, frequency) factor in a finer axis.
pub(crate) fn matching_index(coarse: &AxisBasis, idx: usize, fine: &AxisBasis) -> usize {
    match coarse.parity[idx] {
        Parity::Const => 0,
        Parity::Cos => coarse.freq[idx],
        Parity::Sin => fine.kc + coarse.freq[idx],
    }
}

pub(crate) fn build_torus(n: usize, components: usize) -> TorusGeometry {
    let axis = build_axis(n);
    let mut lambda = vec![0.0; n * n];
    for ix in 0..n {
        for iy in 0..n {
            let fx = axis.freq[ix] as f64;
            let fy = axis.freq[iy] as f64;
            lambda[ix * n + iy] = fx * fx + fy * fy;
        }
    }
    let leray_blocks = if components == 2 {
        build_leray_blocks(&axis)
    } else {
        Vec::new()
    };
    let big_n = axis.nodes.len() as f64;
    TorusGeometry {
        axis,
        lambda,
        leray_blocks,
        grid_weight: (2.0 * PI / big_n) * (2.0 * PI / big_n),
    }
}

/// Signature of an orthonormal divergence-target function.
type TargetKey = (Parity, usize, Parity, usize);

/// Derivative of one axis factor: `(target parity, weight)`, or `None` for
/// the constant factor.
fn factor_derivative(parity: Parity, freq: usize) -> Option<(Parity, f64)> {
    let k = freq as f64;
    match parity {
        Parity::Const => None,
        Parity::Cos => Some((Parity::Sin, -k)),
        Parity::Sin => Some((Parity::Cos, k)),
    }
}

fn build_leray_blocks(axis: &AxisBasis) -> Vec<LerayBlock> {
    let n = axis.n;
    let pcd = n * n;
    let mut targets: BTreeMap<TargetKey, (Vec<usize>, Vec<f64>)> = BTreeMap::new();
    for ix in 0..n {
        for iy in 0..n {
            // component 0 contributes ∂x(φ_ix)·φ_iy
            if let Some((px, w)) = factor_derivative(axis.parity[ix], axis.freq[ix]) {
                let key = (px, axis.freq[ix], axis.parity[iy], axis.freq[iy]);
                let entry = targets.entry(key).or_default();
                entry.0.push(ix * n + iy);
                entry.1.push(w);
            }
            // component 1 contributes φ_ix·∂y(φ_iy)
            if let Some((py, w)) = factor_derivative(axis.parity[iy], axis.freq[iy]) {
                let key = (axis.parity[ix], axis.freq[ix], py, axis.freq[iy]);
                let entry = targets.entry(key).or_default();
                entry.0.push(pcd + ix * n + iy);
                entry.1.push(w);
            }
        }
    }
    targets
        .into_values()
        .map(|(idx, gamma)| {
            let gamma_norm_sq = gamma.iter().map(|g| g * g).sum();
            LerayBlock {
                idx,
                gamma,
                gamma_norm_sq,
            }
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Deriv {
    None,
    X,
    Y,
}

/// Evaluate one scalar component (or its x/y derivative) on the `N × N` grid:
/// `G = Bxᵀ C By` with the coefficient matrix `C` over (x-index, y-index).
pub(crate) fn component_grid(
    axis: &AxisBasis,
    comp_coeffs: &[f64],
    n: usize,
    deriv: Deriv,
) -> Array2<f64> {
    let c = ndarray::ArrayView2::from_shape((n, n), comp_coeffs).expect("component length n²");
    let bx = if deriv == Deriv::X { &axis.deriv } else { &axis.values };
    let by = if deriv == Deriv::Y { &axis.deriv } else { &axis.values };
    bx.t().dot(&c).dot(by)
}

/// Inner products of a grid function against the (optionally differentiated)
/// basis products, *without* the quadrature weight: caller multiplies by
/// `grid_weight`.
pub(crate) fn project_grid(
    axis: &AxisBasis,
    grid: &Array2<f64>,
    _n: usize,
    deriv: Deriv,
) -> Array2<f64> {
    let bx = if deriv == Deriv::X { &axis.deriv } else { &axis.values };
    let by = if deriv == Deriv::Y { &axis.deriv } else { &axis.values };
    bx.dot(grid).dot(&by.t())
}
