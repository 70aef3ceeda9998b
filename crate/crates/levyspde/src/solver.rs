//! Time stepping for the Galerkin-projected equation, plus the estimators
//! built on top of it: Monte-Carlo moment bounds, mesh-refinement convergence
//! studies, and shared-noise stability checks.
//!
//! One explicit/semi-implicit Euler step reads
//!
//! ```text
//! X⁺ = X + Δt·A(t, X) + B(t, X)ΔW + Σ_j f(X, z_j)(ΔN_j − w_j Δt)
//! ```
//!
//! with the stiff diagonal part of `A` optionally treated implicitly
//! (divide by `1 − Δt·d_k`; the stored diagonals are nonpositive, so the
//! denominator is `≥ 1`). Large jumps are *interlaced*: their arrival times
//! are sampled up front, each jump `x ↦ x + g(x, z)` is applied to the state
//! at the grid point covering its arrival, and the continuous scheme resumes
//! from the post-jump value.
//!
//! Determinism contract: every trajectory draws from its own counter-derived
//! RNG stream in a fixed order — initial state, large-jump schedule, then per
//! step Wiener increments followed by small-jump counts. The order does not
//! depend on the spatial resolution, which is what lets convergence studies
//! couple all resolutions to one noise realization.

use crate::error::SpdeError;
use crate::noise::{
    compensated_increment, sample_large_jump_times, sample_small_jump_counts,
    sample_wiener_increments, JumpEvent, LevyNoiseSpec,
};
use crate::operators::OperatorSuite;
use crate::rng::{trajectory_rng, PathRng};
use crate::sampler::{sample_state, SampleSpec};
use crate::spaces::{embed, norm_h, norm_v, SpatialDiscretization, StateVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Time discretization of the drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExplicitEuler,
    SemiImplicit,
}

/// Step size, horizon, and guard rails for one trajectory.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Declare blow-up when `‖X‖_H` exceeds this.
    pub blowup_radius: f64,
    /// Record every k-th step (the initial and final states always are).
    pub record_stride: usize,
}

impl SolverConfig {
    /// Validate and return the number of steps. The horizon must be an
    /// integer multiple of the step so recorded grids align across runs.
    pub fn validate(&self) -> Result<usize, SpdeError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SpdeError::config("solver.dt", "must be finite and > 0"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(SpdeError::config("solver.t_final", "must be finite and > 0"));
        }
        if !(self.blowup_radius.is_finite() && self.blowup_radius > 0.0) {
            return Err(SpdeError::config(
                "solver.blowup_radius",
                "must be finite and > 0",
            ));
        }
        if self.record_stride == 0 {
            return Err(SpdeError::config("solver.record_stride", "must be >= 1"));
        }
        let steps = (self.t_final / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt)
        {
            return Err(SpdeError::config(
                "solver.dt",
                format!(
                    "t_final = {} is not an integer multiple of dt = {}",
                    self.t_final, self.dt
                ),
            ));
        }
        Ok(steps as usize)
    }
}

/// A large jump as it was applied: original arrival time, the step whose
/// left endpoint received it, and the mark.
#[derive(Clone, Debug, serde::Serialize)]
pub struct JumpApplication {
    pub time: f64,
    pub step: usize,
    pub mark: Vec<f64>,
}

/// Recorded output of one trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// Times of the recorded rows (every `record_stride` steps).
    pub times: Vec<f64>,
    pub norms_h: Vec<f64>,
    /// `V`-norm at the suite's exponent `α`.
    pub norms_v: Vec<f64>,
    pub snapshots: Vec<StateVector>,
    pub jumps: Vec<JumpApplication>,
    pub blown_up: bool,
    pub blowup_time: Option<f64>,
    pub final_state: StateVector,
}

/// One Euler step of the projected equation (no large jumps — those are the
/// caller's interlacing responsibility).
#[allow(clippy::too_many_arguments)]
pub fn galerkin_step(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    x: &StateVector,
    t: f64,
    dt: f64,
    dw: &[f64],
    counts: &[u64],
    noise_spec: &LevyNoiseSpec,
    scheme: Scheme,
) -> StateVector {
    let mut rhs = x.clone();
    rhs.axpy(dt, &suite.explicit_drift(disc, t, x));
    suite.noise.diffusion_apply(x, dw, &mut rhs);
    if !noise_spec.small_atoms.is_empty() {
        let comp = compensated_increment(
            noise_spec,
            |z| suite.noise.small_jump(x, z).coeffs,
            counts,
            dt,
            disc.dim(),
        );
        for (r, c) in rhs.coeffs.iter_mut().zip(&comp) {
            *r += c;
        }
    }
    match (scheme, suite.implicit_diagonal()) {
        (Scheme::ExplicitEuler, Some(diag)) => {
            for (i, d) in diag.iter().enumerate() {
                rhs.coeffs[i] += dt * d * x.coeffs[i];
            }
        }
        (Scheme::SemiImplicit, Some(diag)) => {
            for (i, d) in diag.iter().enumerate() {
                rhs.coeffs[i] /= 1.0 - dt * d;
            }
        }
        (_, None) => {}
    }
    rhs
}

fn check_initial(
    disc: &SpatialDiscretization,
    x0: &StateVector,
    context: &'static str,
) -> Result<(), SpdeError> {
    if x0.disc_id != disc.id() || x0.coeffs.len() != disc.dim() {
        return Err(SpdeError::Dimension {
            context,
            expected: disc.dim(),
            found: x0.coeffs.len(),
        });
    }
    Ok(())
}

/// Grid step whose left endpoint receives a jump arriving at `time`.
fn jump_step(time: f64, dt: f64, n_steps: usize) -> usize {
    ((time / dt).floor() as usize).min(n_steps - 1)
}

struct DriveOutcome {
    final_state: StateVector,
    blown_up: bool,
    blowup_time: Option<f64>,
    jumps: Vec<JumpApplication>,
}

/// Core stepping loop. `observe(k, t_k, state)` fires for every step index
/// `0 ..= n_steps` with the post-jump state at that grid point (the state the
/// k-th step actually starts from); on blow-up it fires once with the
/// offending state and the loop stops.
fn drive<F: FnMut(usize, f64, &StateVector)>(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    n_steps: usize,
    x0: &StateVector,
    rng: &mut PathRng,
    schedule: &[JumpEvent],
    mut observe: F,
) -> DriveOutcome {
    let dt = config.dt;
    let mut x = x0.clone();
    let mut jumps: Vec<JumpApplication> = Vec::new();
    let mut sched_i = 0usize;
    let exploded = |v: &StateVector| !v.is_finite() || norm_h(disc, v) > config.blowup_radius;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        if exploded(&x) {
            observe(k, t, &x);
            return DriveOutcome {
                final_state: x,
                blown_up: true,
                blowup_time: Some(t),
                jumps,
            };
        }
        while sched_i < schedule.len() && jump_step(schedule[sched_i].time, dt, n_steps) == k {
            let ev = &schedule[sched_i];
            let g = suite.noise.large_jump(disc, &x, &ev.mark);
            x.axpy(1.0, &g);
            jumps.push(JumpApplication {
                time: ev.time,
                step: k,
                mark: ev.mark.clone(),
            });
            sched_i += 1;
        }
        if exploded(&x) {
            observe(k, t, &x);
            return DriveOutcome {
                final_state: x,
                blown_up: true,
                blowup_time: Some(t),
                jumps,
            };
        }
        observe(k, t, &x);
        let dw = sample_wiener_increments(noise_spec, dt, rng);
        let counts = sample_small_jump_counts(noise_spec, dt, rng);
        x = galerkin_step(suite, disc, &x, t, dt, &dw, &counts, noise_spec, config.scheme);
    }
    let t_end = n_steps as f64 * dt;
    let blown = exploded(&x);
    observe(n_steps, t_end, &x);
    DriveOutcome {
        final_state: x,
        blown_up: blown,
        blowup_time: if blown { Some(t_end) } else { None },
        jumps,
    }
}

fn run_recorded(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    n_steps: usize,
    x0: &StateVector,
    rng: &mut PathRng,
    schedule: Vec<JumpEvent>,
) -> TrajectoryRecord {
    let alpha = suite.constants.alpha;
    let stride = config.record_stride;
    let mut times = Vec::new();
    let mut norms_h = Vec::new();
    let mut norms_v = Vec::new();
    let mut snapshots = Vec::new();
    let outcome = drive(
        suite,
        disc,
        noise_spec,
        config,
        n_steps,
        x0,
        rng,
        &schedule,
        |k, t, v| {
            if k % stride == 0 || k == n_steps {
                times.push(t);
                norms_h.push(norm_h(disc, v));
                norms_v.push(norm_v(disc, v, alpha).unwrap_or(f64::NAN));
                snapshots.push(v.clone());
            }
        },
    );
    if outcome.blown_up {
        // make sure the offending state is visible even off-stride
        let t = outcome.blowup_time.expect("blown up implies a time");
        if times.last().copied() != Some(t) {
            times.push(t);
            norms_h.push(norm_h(disc, &outcome.final_state));
            norms_v.push(norm_v(disc, &outcome.final_state, alpha).unwrap_or(f64::NAN));
            snapshots.push(outcome.final_state.clone());
        }
    }
    TrajectoryRecord {
        times,
        norms_h,
        norms_v,
        snapshots,
        jumps: outcome.jumps,
        blown_up: outcome.blown_up,
        blowup_time: outcome.blowup_time,
        final_state: outcome.final_state,
    }
}

/// Solve one path of the small-jump equation (Wiener + compensated Poisson),
/// ignoring any large-jump component of `noise_spec`.
pub fn solve_path_small(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    x0: &StateVector,
    rng: &mut PathRng,
) -> Result<TrajectoryRecord, SpdeError> {
    let n_steps = config.validate()?;
    check_initial(disc, x0, "solve_path_small")?;
    Ok(run_recorded(
        suite, disc, noise_spec, config, n_steps, x0, rng, Vec::new(),
    ))
}

/// Solve one path with large jumps interlaced: the arrival schedule is drawn
/// first, then the small-jump path runs between arrivals.
pub fn solve_path_interlaced(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    x0: &StateVector,
    rng: &mut PathRng,
) -> Result<TrajectoryRecord, SpdeError> {
    let n_steps = config.validate()?;
    check_initial(disc, x0, "solve_path_interlaced")?;
    let schedule = sample_large_jump_times(noise_spec, config.t_final, rng);
    Ok(run_recorded(
        suite, disc, noise_spec, config, n_steps, x0, rng, schedule,
    ))
}

/// Solve one path against a caller-supplied large-jump schedule instead of a
/// sampled one. Draw order for the per-step Wiener/Poisson increments is the
/// same as in [`solve_path_interlaced`]; no randomness is consumed for the
/// arrivals, so two runs with cloned generators and the same schedule agree
/// bit for bit. Events must be sorted by arrival time and lie in `(0, T]`.
pub fn solve_path_with_schedule(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    x0: &StateVector,
    rng: &mut PathRng,
    schedule: Vec<JumpEvent>,
) -> Result<TrajectoryRecord, SpdeError> {
    let n_steps = config.validate()?;
    check_initial(disc, x0, "solve_path_with_schedule")?;
    for pair in schedule.windows(2) {
        if pair[1].time < pair[0].time {
            return Err(SpdeError::parameter(
                "schedule",
                "jump events must be sorted by arrival time".to_string(),
            ));
        }
    }
    if let (Some(first), Some(last)) = (schedule.first(), schedule.last()) {
        if first.time <= 0.0 || last.time > config.t_final {
            return Err(SpdeError::parameter(
                "schedule",
                format!(
                    "jump times must lie in (0, {}], got range [{}, {}]",
                    config.t_final, first.time, last.time
                ),
            ));
        }
    }
    Ok(run_recorded(
        suite, disc, noise_spec, config, n_steps, x0, rng, schedule,
    ))
}

/// Initial condition of an ensemble: one fixed state, or i.i.d. draws.
#[derive(Clone, Debug)]
pub enum InitialLaw {
    Fixed(StateVector),
    Random(SampleSpec),
}

impl InitialLaw {
    /// Draw an initial state. `Fixed` consumes no randomness.
    pub fn draw(
        &self,
        disc: &SpatialDiscretization,
        rng: &mut PathRng,
    ) -> Result<StateVector, SpdeError> {
        match self {
            InitialLaw::Fixed(v) => {
                check_initial(disc, v, "initial state")?;
                Ok(v.clone())
            }
            InitialLaw::Random(spec) => Ok(sample_state(disc, spec, rng)),
        }
    }
}

struct PathMoments {
    sup_h_pow: f64,
    integral: f64,
    h_pow_records: Vec<f64>,
    blown_up: bool,
}

/// Monte-Carlo estimate of the a-priori moment functional
/// `E[sup_t ‖X_t‖^{β+2}_H] + E[∫₀ᵀ ‖X_t‖^α_V ‖X_t‖^β_H dt]`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MomentReport {
    pub paths: usize,
    pub blown_up_paths: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Recorded time grid for the per-time mean below.
    pub times: Vec<f64>,
    /// `E[‖X_t‖^{β+2}_H]` at each recorded time (surviving paths).
    pub mean_h_pow: Vec<f64>,
    /// Mean over paths of `sup_t ‖X_t‖^{β+2}_H` (sup over all steps).
    pub sup_mean: f64,
    pub sup_se: f64,
    /// Mean of the left-endpoint Riemann sum of `‖X‖^α_V ‖X‖^β_H`.
    pub integral_mean: f64,
    pub integral_se: f64,
    /// `sup_mean + integral_mean` — the quantity the moment bound controls.
    pub bound_estimate: f64,
}

#[allow(clippy::too_many_arguments)]
fn path_moments(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    n_steps: usize,
    law: &InitialLaw,
    master_seed: u64,
    index: usize,
) -> Result<PathMoments, SpdeError> {
    let mut rng = trajectory_rng(master_seed, index as u64);
    let x0 = law.draw(disc, &mut rng)?;
    let schedule = sample_large_jump_times(noise_spec, config.t_final, &mut rng);
    let alpha = suite.constants.alpha;
    let beta = suite.constants.beta;
    let q = beta + 2.0;
    let dt = config.dt;
    let stride = config.record_stride;

    let mut sup = 0.0f64;
    let mut integral = 0.0f64;
    let mut records = Vec::new();
    let outcome = drive(
        suite,
        disc,
        noise_spec,
        config,
        n_steps,
        &x0,
        &mut rng,
        &schedule,
        |k, _t, v| {
            let hn = norm_h(disc, v);
            sup = sup.max(hn.powf(q));
            if k < n_steps {
                let vn = norm_v(disc, v, alpha).unwrap_or(f64::NAN);
                integral += vn.powf(alpha) * hn.powf(beta) * dt;
            }
            if k % stride == 0 || k == n_steps {
                records.push(hn.powf(q));
            }
        },
    );
    Ok(PathMoments {
        sup_h_pow: sup,
        integral,
        h_pow_records: records,
        blown_up: outcome.blown_up,
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn moment_report(
    results: Vec<PathMoments>,
    config: &SolverConfig,
    n_steps: usize,
    alpha: f64,
    beta: f64,
) -> MomentReport {
    let paths = results.len();
    let survivors: Vec<&PathMoments> = results.iter().filter(|p| !p.blown_up).collect();
    let blown = paths - survivors.len();

    let sups: Vec<f64> = survivors.iter().map(|p| p.sup_h_pow).collect();
    let ints: Vec<f64> = survivors.iter().map(|p| p.integral).collect();
    let (sup_mean, sup_se) = mean_and_se(&sups);
    let (integral_mean, integral_se) = mean_and_se(&ints);

    let times: Vec<f64> = (0..=n_steps)
        .filter(|k| k % config.record_stride == 0 || *k == n_steps)
        .map(|k| k as f64 * config.dt)
        .collect();
    let mut mean_h_pow = vec![0.0f64; times.len()];
    if !survivors.is_empty() {
        for p in &survivors {
            for (m, r) in mean_h_pow.iter_mut().zip(&p.h_pow_records) {
                *m += r;
            }
        }
        for m in &mut mean_h_pow {
            *m /= survivors.len() as f64;
        }
    }

    MomentReport {
        paths,
        blown_up_paths: blown,
        alpha,
        beta,
        times,
        mean_h_pow,
        sup_mean,
        sup_se,
        integral_mean,
        integral_se,
        bound_estimate: sup_mean + integral_mean,
    }
}

fn run_ensemble(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    law: &InitialLaw,
    n_paths: usize,
    master_seed: u64,
    parallel: bool,
) -> Result<MomentReport, SpdeError> {
    if noise_spec.large_rate > 0.0 && !suite.noise.large_jump_is_zero() {
        return Err(SpdeError::Refused(
            "moment estimation assumes the large-jump map is absent; \
             simulate individual paths with the interlaced solver instead"
                .to_string(),
        ));
    }
    let n_steps = config.validate()?;
    let per_path = |i: usize| {
        path_moments(
            suite, disc, noise_spec, config, n_steps, law, master_seed, i,
        )
    };

    #[cfg(feature = "parallel")]
    let results: Vec<PathMoments> = if parallel {
        (0..n_paths)
            .into_par_iter()
            .map(per_path)
            .collect::<Result<Vec<_>, _>>()?
    } else {
        (0..n_paths).map(per_path).collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<PathMoments> = {
        let _ = parallel;
        (0..n_paths).map(per_path).collect::<Result<Vec<_>, _>>()?
    };

    Ok(moment_report(
        results,
        config,
        n_steps,
        suite.constants.alpha,
        suite.constants.beta,
    ))
}

/// Ensemble moment estimate; data-parallel over trajectories when the
/// `parallel` feature is on. Trajectory RNG streams are indexed by path, and
/// the reduction runs in path order, so the result is bitwise identical to
/// [`ensemble_moments_serial`].
pub fn ensemble_moments(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    law: &InitialLaw,
    n_paths: usize,
    master_seed: u64,
) -> Result<MomentReport, SpdeError> {
    run_ensemble(
        suite, disc, noise_spec, config, law, n_paths, master_seed, true,
    )
}

/// Single-threaded ensemble driver (reference implementation and benchmark
/// baseline).
pub fn ensemble_moments_serial(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    law: &InitialLaw,
    n_paths: usize,
    master_seed: u64,
) -> Result<MomentReport, SpdeError> {
    run_ensemble(
        suite, disc, noise_spec, config, law, n_paths, master_seed, false,
    )
}

/// One row of a refinement study: resolution, `H`-distance of the final
/// state to the reference run, and the error ratio to the previous row.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ConvergenceStudy {
    pub reference_n: usize,
    pub reference_final_norm: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Couple every resolution in `n_list` to the same noise realization (the
/// per-step draw order is resolution-independent), solve to the horizon, and
/// measure the final-state `H`-distance to a fine reference run (default
/// `2·max(n_list)`).
pub fn convergence_study<F, G>(
    family: F,
    initial_at: G,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    n_list: &[usize],
    reference_n: Option<usize>,
    master_seed: u64,
) -> Result<ConvergenceStudy, SpdeError>
where
    F: Fn(usize) -> Result<(SpatialDiscretization, OperatorSuite), SpdeError>,
    G: Fn(&SpatialDiscretization) -> Result<StateVector, SpdeError>,
{
    if n_list.is_empty() {
        return Err(SpdeError::parameter("n_list", "needs at least one resolution"));
    }
    let max_n = n_list.iter().copied().max().expect("nonempty");
    let ref_n = reference_n.unwrap_or(2 * max_n);
    if ref_n < max_n {
        return Err(SpdeError::parameter(
            "reference_n",
            format!("reference resolution {ref_n} is below the largest tested ({max_n})"),
        ));
    }

    let (ref_disc, ref_suite) = family(ref_n)?;
    let x0_ref = initial_at(&ref_disc)?;
    let mut rng = trajectory_rng(master_seed, 0);
    let ref_rec = solve_path_interlaced(&ref_suite, &ref_disc, noise_spec, config, &x0_ref, &mut rng)?;
    if ref_rec.blown_up {
        return Err(SpdeError::Refused(format!(
            "reference run at n = {ref_n} left the stability region — shrink dt"
        )));
    }

    let mut rows = Vec::with_capacity(n_list.len());
    let mut prev_error: Option<f64> = None;
    for &n in n_list {
        let (disc, suite) = family(n)?;
        let x0 = initial_at(&disc)?;
        let mut rng = trajectory_rng(master_seed, 0);
        let rec = solve_path_interlaced(&suite, &disc, noise_spec, config, &x0, &mut rng)?;
        if rec.blown_up {
            return Err(SpdeError::Refused(format!(
                "run at n = {n} left the stability region — shrink dt"
            )));
        }
        let mut diff = embed(&disc, &rec.final_state, &ref_disc)?;
        diff.axpy(-1.0, &ref_rec.final_state);
        let error = norm_h(&ref_disc, &diff);
        let ratio = prev_error.map(|p| p / error);
        prev_error = Some(error);
        rows.push(ConvergenceRow { n, error, ratio });
    }

    Ok(ConvergenceStudy {
        reference_n: ref_n,
        reference_final_norm: norm_h(&ref_disc, &ref_rec.final_state),
        rows,
    })
}

/// Twin trajectories under one noise realization, with the squared distance
/// discounted by the monotonicity rate.
#[derive(Clone, Debug, serde::Serialize)]
pub struct StabilityRecord {
    pub times: Vec<f64>,
    /// `‖X_k − Y_k‖²_H` at the recorded times.
    pub distance_sq: Vec<f64>,
    /// `‖X_k − Y_k‖²_H · exp(−Σ_{j<k} (C + ρ(Y_j)) Δt)`.
    pub discounted: Vec<f64>,
    /// Max over recorded times of `discounted / discounted[0]`.
    pub max_ratio: f64,
    /// True when the coefficient difference of the noise vanishes (purely
    /// additive noise), so the discounted distance must be monotone path by
    /// path, not just in expectation.
    pub shared_noise_cancels: bool,
}

/// Run two solutions under literally the same draws and track the discounted
/// squared distance. With additive noise the discounted curve must not grow
/// (up to time-discretization error); with multiplicative coefficients the
/// guarantee is in expectation only and `max_ratio` is diagnostic.
pub fn stability_check(
    suite: &OperatorSuite,
    disc: &SpatialDiscretization,
    noise_spec: &LevyNoiseSpec,
    config: &SolverConfig,
    x0: &StateVector,
    y0: &StateVector,
    master_seed: u64,
) -> Result<StabilityRecord, SpdeError> {
    let n_steps = config.validate()?;
    check_initial(disc, x0, "stability_check")?;
    check_initial(disc, y0, "stability_check")?;
    let mut rng = trajectory_rng(master_seed, 0);
    let schedule = sample_large_jump_times(noise_spec, config.t_final, &mut rng);
    let dt = config.dt;
    let c_hat = suite.constants.c_h2;

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut discount = 1.0f64;
    let mut times = vec![0.0];
    let dist_sq = |a: &StateVector, b: &StateVector| {
        let mut d = a.clone();
        d.axpy(-1.0, b);
        let n = norm_h(disc, &d);
        n * n
    };
    let d0 = dist_sq(&x, &y);
    let mut distance_sq = vec![d0];
    let mut discounted = vec![d0];

    let mut sched_i = 0usize;
    for k in 0..n_steps {
        let t = k as f64 * dt;
        while sched_i < schedule.len() && jump_step(schedule[sched_i].time, dt, n_steps) == k {
            let ev = &schedule[sched_i];
            let gx = suite.noise.large_jump(disc, &x, &ev.mark);
            let gy = suite.noise.large_jump(disc, &y, &ev.mark);
            x.axpy(1.0, &gx);
            y.axpy(1.0, &gy);
            sched_i += 1;
        }
        let rho_y = suite.rho_eval(disc, &y);
        let dw = sample_wiener_increments(noise_spec, dt, &mut rng);
        let counts = sample_small_jump_counts(noise_spec, dt, &mut rng);
        x = galerkin_step(suite, disc, &x, t, dt, &dw, &counts, noise_spec, config.scheme);
        y = galerkin_step(suite, disc, &y, t, dt, &dw, &counts, noise_spec, config.scheme);
        if !x.is_finite() || !y.is_finite() {
            return Err(SpdeError::Refused(
                "stability pair left the stability region — shrink dt".to_string(),
            ));
        }
        discount *= (-(c_hat + rho_y) * dt).exp();
        if (k + 1) % config.record_stride == 0 || k + 1 == n_steps {
            times.push((k + 1) as f64 * dt);
            let d = dist_sq(&x, &y);
            distance_sq.push(d);
            discounted.push(d * discount);
        }
    }

    let max_ratio = if d0 > 1e-300 {
        discounted
            .iter()
            .fold(0.0f64, |acc, d| acc.max(d / d0))
    } else {
        0.0
    };
    let additive_wiener = matches!(suite.noise.b_mode, crate::operators::BMode::Additive)
        || suite.noise.b_scale == 0.0
        || noise_spec.wiener_modes == 0;
    let jumps_cancel = suite.noise.f_scale == 0.0 || noise_spec.small_atoms.is_empty();
    let large_cancel = noise_spec.large_rate == 0.0
        || matches!(
            suite.noise.g_map,
            crate::operators::GMap::Zero | crate::operators::GMap::AdditiveMode { .. }
        );
    Ok(StabilityRecord {
        times,
        distance_sq,
        discounted,
        max_ratio,
        shared_noise_cancels: additive_wiener && jumps_cancel && large_cancel,
    })
}

/// `|‖x+h‖^p − ‖x‖^p − p‖x‖^{p−2}⟨x,h⟩|` on plain coefficient slices —
/// the remainder the moment machinery needs second-order control of.
pub fn taylor_remainder(p: f64, x: &[f64], h: &[f64]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let nx2 = dot(x, x);
    let xh = dot(x, h);
    let nh2 = dot(h, h);
    let fx = nx2.powf(p / 2.0);
    let fxh = (nx2 + 2.0 * xh + nh2).powf(p / 2.0);
    let grad = if xh == 0.0 {
        0.0
    } else {
        p * nx2.powf(p / 2.0 - 1.0) * xh
    };
    (fxh - fx - grad).abs()
}

/// The remainder normalized by `‖x‖^{p−2}‖h‖² + ‖h‖^p` (finite for `p ≥ 2`).
pub fn taylor_remainder_ratio(p: f64, x: &[f64], h: &[f64]) -> f64 {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nh = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nh == 0.0 {
        return 0.0;
    }
    taylor_remainder(p, x, h) / (nx.powf(p - 2.0) * nh * nh + nh.powf(p))
}

/// Largest normalized remainder over a random ensemble — a numerical stand-in
/// for the constant in the second-order Taylor bound at exponent `p`.
pub fn fitted_remainder_constant(p: f64, dim: usize, n_samples: usize, rng: &mut PathRng) -> f64 {
    use rand::Rng;
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let scale_x = 10.0f64.powf(rng.gen_range(-2.0..2.0));
        let scale_h = 10.0f64.powf(rng.gen_range(-3.0..1.0));
        let x: Vec<f64> = (0..dim).map(|_| scale_x * rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..dim).map(|_| scale_h * rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(taylor_remainder_ratio(p, &x, &h));
    }
    worst
}
