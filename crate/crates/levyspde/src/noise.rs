//! Driving noise: finite-dimensional Wiener increments, a finitely atomic
//! small-jump measure on `{0 < ‖z‖ ≤ 1}` with exact compensation, and a
//! finite-rate large-jump process on `{‖z‖ > 1}`.
//!
//! Splitting the jump measure at `‖z‖ = 1` keeps the small-jump part
//! square-integrable (compensated, martingale) and the large-jump part a
//! compound Poisson process handled by interlacing. With finitely many atoms
//! `ν = Σ_j w_j δ_{z_j}` the compensated increment over a step is the exact
//! finite sum `Σ_j (k_j − w_j Δt) f(z_j)` and the second-moment identity
//! `E‖∫ f dÑ‖² = t Σ_j w_j ‖f(z_j)‖²` holds analytically, which is what the
//! isometry verifier tests against.

use crate::error::SpdeError;
use crate::rng::PathRng;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

/// One atom of the small-jump intensity measure: mass `weight` at `mark`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallAtom {
    pub mark: Vec<f64>,
    pub weight: f64,
}

/// Distribution of large-jump marks on `{‖z‖ > 1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LargeMarkFamily {
    /// Radius uniform on `[r_min, r_max]`, direction uniform on the sphere.
    UniformAnnulus { r_min: f64, r_max: f64 },
    /// Radius `r_min·U^{-1/exponent}` (Pareto tail), direction uniform.
    ParetoRadial { r_min: f64, exponent: f64 },
    /// Deterministic mark (useful for exact interlacing oracles).
    DiracAt { z: Vec<f64> },
}

/// A large-jump arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub mark: Vec<f64>,
}

/// Full description of the driving noise.
#[derive(Clone, Debug)]
pub struct LevyNoiseSpec {
    /// Number of independent Wiener directions `m`.
    pub wiener_modes: usize,
    /// Atoms of the small-jump measure (all with `0 < ‖z‖ ≤ 1`).
    pub small_atoms: Vec<SmallAtom>,
    /// Arrival rate `λ = ν(D)` of large jumps.
    pub large_rate: f64,
    /// Mark law of large jumps (normalized `ν|_D`).
    pub large_marks: LargeMarkFamily,
    /// Dimension of the mark space.
    pub mark_dim: usize,
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl LevyNoiseSpec {
    /// Validate atom supports, weights, rates and mark dimensions.
    pub fn validate(&self) -> Result<(), SpdeError> {
        for (j, atom) in self.small_atoms.iter().enumerate() {
            if atom.mark.len() != self.mark_dim {
                return Err(SpdeError::parameter(
                    "small_atoms",
                    format!(
                        "atom {j} has mark dimension {}, spec says {}",
                        atom.mark.len(),
                        self.mark_dim
                    ),
                ));
            }
            let r = norm(&atom.mark);
            if !(r > 0.0 && r <= 1.0) {
                return Err(SpdeError::parameter(
                    "small_atoms",
                    format!("atom {j} has ‖z‖ = {r}, need 0 < ‖z‖ ≤ 1"),
                ));
            }
            if !(atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(SpdeError::parameter(
                    "small_atoms",
                    format!("atom {j} has weight {}, need finite > 0", atom.weight),
                ));
            }
        }
        if !(self.large_rate >= 0.0 && self.large_rate.is_finite()) {
            return Err(SpdeError::parameter(
                "large_rate",
                format!("need finite ≥ 0, got {}", self.large_rate),
            ));
        }
        match &self.large_marks {
            LargeMarkFamily::UniformAnnulus { r_min, r_max } => {
                if !(*r_min >= 1.0 && r_max >= r_min) {
                    return Err(SpdeError::parameter(
                        "large_marks",
                        format!("uniform annulus needs 1 ≤ r_min ≤ r_max, got [{r_min}, {r_max}]"),
                    ));
                }
            }
            LargeMarkFamily::ParetoRadial { r_min, exponent } => {
                if !(*r_min >= 1.0 && *exponent > 0.0) {
                    return Err(SpdeError::parameter(
                        "large_marks",
                        format!("pareto radial needs r_min ≥ 1, exponent > 0, got ({r_min}, {exponent})"),
                    ));
                }
            }
            LargeMarkFamily::DiracAt { z } => {
                if z.len() != self.mark_dim {
                    return Err(SpdeError::parameter(
                        "large_marks",
                        format!("dirac mark dimension {} ≠ {}", z.len(), self.mark_dim),
                    ));
                }
                if !(norm(z) > 1.0) {
                    return Err(SpdeError::parameter(
                        "large_marks",
                        format!("dirac mark has ‖z‖ = {}, large jumps need ‖z‖ > 1", norm(z)),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Σ_j w_j ‖f(z_j)‖² for vector-valued `f` — the per-unit-time
    /// second moment of the compensated integral.
    pub fn second_moment_rate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        self.small_atoms
            .iter()
            .map(|a| {
                let fz = f(&a.mark);
                a.weight * fz.iter().map(|c| c * c).sum::<f64>()
            })
            .sum()
    }

    /// A noise spec with no jump activity at all.
    pub fn wiener_only(wiener_modes: usize) -> Self {
        LevyNoiseSpec {
            wiener_modes,
            small_atoms: Vec::new(),
            large_rate: 0.0,
            large_marks: LargeMarkFamily::UniformAnnulus {
                r_min: 1.0,
                r_max: 2.0,
            },
            mark_dim: 1,
        }
    }
}

/// `m` independent `N(0, dt)` Wiener increments.
pub fn sample_wiener_increments(spec: &LevyNoiseSpec, dt: f64, rng: &mut PathRng) -> Vec<f64> {
    let sd = dt.sqrt();
    (0..spec.wiener_modes)
        .map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

/// Poisson counts `k_j ~ Poisson(w_j Δt)` of each small atom over one step.
pub fn sample_small_jump_counts(spec: &LevyNoiseSpec, dt: f64, rng: &mut PathRng) -> Vec<u64> {
    spec.small_atoms
        .iter()
        .map(|a| {
            let lambda = a.weight * dt;
            if lambda == 0.0 {
                0
            } else {
                Poisson::new(lambda).expect("validated weight").sample(rng) as u64
            }
        })
        .collect()
}

/// Arrival times and marks of the large-jump compound Poisson process on
/// `(0, horizon]`, via exponential interarrivals.
pub fn sample_large_jump_times(
    spec: &LevyNoiseSpec,
    horizon: f64,
    rng: &mut PathRng,
) -> Vec<JumpEvent> {
    let mut events = Vec::new();
    if spec.large_rate == 0.0 {
        return events;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen_range(0.0..1.0f64);
        t += -(1.0 - u).ln() / spec.large_rate;
        if t > horizon {
            break;
        }
        events.push(JumpEvent {
            time: t,
            mark: sample_large_mark(spec, rng),
        });
    }
    events
}

fn sample_large_mark(spec: &LevyNoiseSpec, rng: &mut PathRng) -> Vec<f64> {
    let direction = |rng: &mut PathRng, d: usize| -> Vec<f64> {
        if d == 1 {
            return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
        }
        loop {
            let v: Vec<f64> = (0..d)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                .collect();
            let r = norm(&v);
            if r > 1e-12 {
                return v.into_iter().map(|c| c / r).collect();
            }
        }
    };
    match &spec.large_marks {
        LargeMarkFamily::UniformAnnulus { r_min, r_max } => {
            let r = rng.gen_range(*r_min..=*r_max);
            direction(rng, spec.mark_dim)
                .into_iter()
                .map(|c| c * r)
                .collect()
        }
        LargeMarkFamily::ParetoRadial { r_min, exponent } => {
            let u: f64 = rng.gen_range(0.0..1.0f64);
            let r = r_min * (1.0 - u).powf(-1.0 / exponent);
            direction(rng, spec.mark_dim)
                .into_iter()
                .map(|c| c * r)
                .collect()
        }
        LargeMarkFamily::DiracAt { z } => z.clone(),
    }
}

/// Exact compensated small-jump increment over one step:
/// `Σ_j (k_j − w_j Δt) f(z_j)` (the atomic form of "jump sum minus
/// compensator").
pub fn compensated_increment<F>(
    spec: &LevyNoiseSpec,
    f: F,
    counts: &[u64],
    dt: f64,
    dim: usize,
) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut out = vec![0.0; dim];
    for (atom, &k) in spec.small_atoms.iter().zip(counts) {
        let factor = k as f64 - atom.weight * dt;
        if factor == 0.0 {
            continue;
        }
        let fz = f(&atom.mark);
        debug_assert_eq!(fz.len(), dim);
        for (o, c) in out.iter_mut().zip(&fz) {
            *o += factor * c;
        }
    }
    out
}

/// Monte-Carlo vs analytic second moment of the compensated integral for a
/// state-independent integrand.
#[derive(Clone, Copy, Debug)]
pub struct IsometryReport {
    pub mc_second_moment: f64,
    pub analytic_second_moment: f64,
    /// Standard error of the MC mean of `‖I_T‖²`.
    pub standard_error: f64,
    /// `(mc − analytic) / SE`.
    pub z_score: f64,
    pub paths: usize,
}

/// Simulate `paths` independent compensated integrals of a constant-in-state
/// integrand `f(z)` up to time `horizon` in `n_steps` increments per path and
/// compare `E‖I_T‖²_H` against `T · Σ_j w_j ‖f(z_j)‖²`.
///
/// Sequential by design (it is cheap) so its runtime bound is thread-free.
pub fn verify_isometry<F>(
    spec: &LevyNoiseSpec,
    f: F,
    dim: usize,
    horizon: f64,
    n_steps: usize,
    paths: usize,
    master_seed: u64,
) -> Result<IsometryReport, SpdeError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    spec.validate()?;
    if n_steps == 0 || paths < 2 {
        return Err(SpdeError::parameter(
            "verify_isometry",
            "need n_steps ≥ 1 and paths ≥ 2".to_string(),
        ));
    }
    let dt = horizon / n_steps as f64;
    // Pre-evaluate the integrand once per atom.
    let f_at: Vec<Vec<f64>> = spec.small_atoms.iter().map(|a| f(&a.mark)).collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for path in 0..paths {
        let mut rng = crate::rng::trajectory_rng(master_seed, path as u64);
        let mut integral = vec![0.0; dim];
        for _ in 0..n_steps {
            let counts = sample_small_jump_counts(spec, dt, &mut rng);
            for ((atom, &k), fz) in spec.small_atoms.iter().zip(&counts).zip(&f_at) {
                let factor = k as f64 - atom.weight * dt;
                for (o, c) in integral.iter_mut().zip(fz) {
                    *o += factor * c;
                }
            }
        }
        let sq: f64 = integral.iter().map(|c| c * c).sum();
        sum += sq;
        sum_sq += sq * sq;
    }
    let mean = sum / paths as f64;
    let var = (sum_sq / paths as f64 - mean * mean).max(0.0) * paths as f64
        / (paths as f64 - 1.0);
    let se = (var / paths as f64).sqrt();
    let analytic = horizon * spec.second_moment_rate(|z| f(z));
    let z_score = if se > 0.0 { (mean - analytic) / se } else { 0.0 };
    Ok(IsometryReport {
        mc_second_moment: mean,
        analytic_second_moment: analytic,
        standard_error: se,
        z_score,
        paths,
    })
}

/// Radial density spec for discretizing an absolutely continuous small-jump
/// intensity `c·r^{-1-a} dr` on `ε < r ≤ 1` into mass-preserving atoms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialDensitySpec {
    /// Tail exponent `a` (stable-like for `0 < a < 2`).
    pub exponent: f64,
    /// Overall mass scale `c`.
    pub mass: f64,
    /// Inner cutoff `ε > 0`.
    pub eps: f64,
    /// Number of bins.
    pub bins: usize,
    /// Mirror atoms to `−r` (splits each bin's mass across ±).
    pub symmetric: bool,
}

/// Bin `[ε, 1]` geometrically and place one atom per bin at the bin's mass
/// centroid carrying the bin's exact mass, so total intensity is preserved.
pub fn atomize_radial_density(spec: &RadialDensitySpec) -> Result<Vec<SmallAtom>, SpdeError> {
    if !(spec.eps > 0.0 && spec.eps < 1.0) {
        return Err(SpdeError::parameter("eps", "need 0 < eps < 1".to_string()));
    }
    if spec.bins == 0 || !(spec.mass > 0.0) || !spec.exponent.is_finite() {
        return Err(SpdeError::parameter(
            "radial_density",
            "need bins ≥ 1, mass > 0, finite exponent".to_string(),
        ));
    }
    let a = spec.exponent;
    // antiderivatives of r^{-1-a} and r·r^{-1-a}
    let mass_anti = |r: f64| -> f64 {
        if a == 0.0 {
            r.ln()
        } else {
            -r.powf(-a) / a
        }
    };
    let centroid_anti = |r: f64| -> f64 {
        if (a - 1.0).abs() < 1e-14 {
            r.ln()
        } else {
            r.powf(1.0 - a) / (1.0 - a)
        }
    };
    let ratio = (1.0 / spec.eps).powf(1.0 / spec.bins as f64);
    let mut atoms = Vec::with_capacity(spec.bins * if spec.symmetric { 2 } else { 1 });
    let mut lo = spec.eps;
    for _ in 0..spec.bins {
        let hi = (lo * ratio).min(1.0);
        let mass = spec.mass * (mass_anti(hi) - mass_anti(lo));
        let centroid = spec.mass * (centroid_anti(hi) - centroid_anti(lo)) / mass;
        if spec.symmetric {
            atoms.push(SmallAtom {
                mark: vec![centroid],
                weight: 0.5 * mass,
            });
            atoms.push(SmallAtom {
                mark: vec![-centroid],
                weight: 0.5 * mass,
            });
        } else {
            atoms.push(SmallAtom {
                mark: vec![centroid],
                weight: mass,
            });
        }
        lo = hi;
    }
    Ok(atoms)
}
