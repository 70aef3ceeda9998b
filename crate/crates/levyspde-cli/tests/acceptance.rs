//! Release acceptance suite: one test per criterion, each ending in a single
//! `criterion NN PASS` line with the measured quantity and its pinned
//! tolerance. Tolerances are fixed here on purpose — loosening one to make a
//! failing build green defeats the point of the suite.

use std::time::Instant;

use levyspde::conditions::{calibrate_local_monotonicity, check_local_monotonicity};
use levyspde::noise::{
    sample_small_jump_counts, sample_wiener_increments, verify_isometry, JumpEvent,
    LargeMarkFamily, LevyNoiseSpec, SmallAtom,
};
use levyspde::operators::{
    burgers_suite, heat_suite, lipschitz_noise_maps, ns2d_suite, p_laplace_suite, AdvectionFn,
    BMode, GMap, HProfile, NoiseMaps, RhoForm,
};
use levyspde::rng::{probe_rng, trajectory_rng};
use levyspde::sampler::{sample_state, SampleSpec};
use levyspde::solver::{
    ensemble_moments, fitted_remainder_constant, galerkin_step, solve_path_small,
    solve_path_with_schedule, stability_check, taylor_remainder, InitialLaw, Scheme, SolverConfig,
};
use levyspde::spaces::{build_discretization, dual_pair, norm_v, DomainKind};
use levyspde::{SpatialDiscretization, StateVector};

fn pass(idx: usize, msg: &str) {
    println!("criterion {idx:02} PASS — {msg}");
}

fn interval(n: usize) -> SpatialDiscretization {
    build_discretization(DomainKind::IntervalDirichlet, n, 1).unwrap()
}

/// Noise spec with no Wiener directions, no atoms, no large jumps.
fn quiet_spec() -> LevyNoiseSpec {
    LevyNoiseSpec {
        wiener_modes: 0,
        small_atoms: Vec::new(),
        large_rate: 0.0,
        large_marks: LargeMarkFamily::UniformAnnulus {
            r_min: 1.0,
            r_max: 2.0,
        },
        mark_dim: 1,
    }
}

fn no_noise(disc: &SpatialDiscretization) -> NoiseMaps {
    lipschitz_noise_maps(
        disc,
        &quiet_spec(),
        0.0,
        BMode::Additive,
        0.0,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap()
}

/// Wiener + one/two-atom small-jump spec used by the Burgers criteria.
fn burgers_noise_spec() -> LevyNoiseSpec {
    LevyNoiseSpec {
        wiener_modes: 4,
        small_atoms: vec![
            SmallAtom {
                mark: vec![0.5],
                weight: 2.0,
            },
            SmallAtom {
                mark: vec![-0.25],
                weight: 4.0,
            },
        ],
        large_rate: 0.0,
        large_marks: LargeMarkFamily::UniformAnnulus {
            r_min: 1.0,
            r_max: 2.0,
        },
        mark_dim: 1,
    }
}

#[test]
fn criterion_01_compensated_integral_isometry() {
    let spec = LevyNoiseSpec {
        wiener_modes: 0,
        small_atoms: vec![
            SmallAtom {
                mark: vec![0.3, 0.1],
                weight: 2.0,
            },
            SmallAtom {
                mark: vec![-0.5, 0.4],
                weight: 1.0,
            },
            SmallAtom {
                mark: vec![0.2, -0.8],
                weight: 0.5,
            },
        ],
        large_rate: 0.0,
        large_marks: LargeMarkFamily::UniformAnnulus {
            r_min: 1.0,
            r_max: 2.0,
        },
        mark_dim: 2,
    };
    let f = |z: &[f64]| vec![z[0] + 0.5 * z[1], 0.25 * z[1], -z[0]];

    // Exact second moment of the compensated integral, assembled by hand:
    // T · Σ_j w_j ‖f(z_j)‖².
    let horizon = 1.0;
    let exact: f64 = horizon
        * spec
            .small_atoms
            .iter()
            .map(|a| a.weight * f(&a.mark).iter().map(|c| c * c).sum::<f64>())
            .sum::<f64>();

    let start = Instant::now();
    let rep = verify_isometry(&spec, f, 3, horizon, 64, 100_000, 2024).unwrap();
    let secs = start.elapsed().as_secs_f64();

    assert!(
        (rep.analytic_second_moment - exact).abs() <= 1e-12 * exact,
        "library analytic value {} disagrees with the hand oracle {}",
        rep.analytic_second_moment,
        exact
    );
    let diff = (rep.mc_second_moment - exact).abs();
    assert!(
        diff <= 3.0 * rep.standard_error,
        "MC {} vs exact {}: off by {} > 3·SE = {}",
        rep.mc_second_moment,
        exact,
        diff,
        3.0 * rep.standard_error
    );
    assert!(secs < 30.0, "sequential run took {secs:.1} s ≥ 30 s");
    pass(
        1,
        &format!(
            "Monte-Carlo second moment {:.4} vs exact {:.4} over 100000 paths: |z| = {:.2} ≤ 3 ({:.1} s < 30 s, single-threaded)",
            rep.mc_second_moment, exact, rep.z_score.abs(), secs
        ),
    );
}

#[test]
fn criterion_02_linear_diffusion_coercivity_is_exact() {
    let disc = interval(16);
    let suite = heat_suite(&disc, 1.0, no_noise(&disc)).unwrap();
    assert_eq!(suite.constants.theta, 2.0);
    assert_eq!(suite.constants.c_h3, 0.0);
    assert_eq!(suite.constants.f_t, 0.0);

    let spec = SampleSpec {
        radius: 2.0,
        decay: 1.0,
        divergence_free: false,
    };
    let mut rng = probe_rng(9, 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v = sample_state(&disc, &spec, &mut rng);
        let a = suite.drift(&disc, 0.0, &v);
        let vn = norm_v(&disc, &v, 2.0).unwrap();
        // with zero noise and C = F = 0 the condition reduces to
        // 2⟨A(v),v⟩ + θ‖v‖²_V = 0 identically
        let margin = 2.0 * dual_pair(&disc, &a, &v) + suite.constants.theta * vn * vn;
        worst = worst.max(margin.abs());
    }
    assert!(worst <= 1e-10, "worst |margin| = {worst:.3e} > 1e-10");
    pass(
        2,
        &format!("max |2⟨A(v),v⟩ + 2‖v‖²_V| = {worst:.2e} ≤ 1e-10 over 1000 band-limited states"),
    );
}

#[test]
fn criterion_03_convection_energy_cancellation() {
    let disc = build_discretization(DomainKind::Torus2d, 16, 2).unwrap();
    let nu = 1.0;
    let suite = ns2d_suite(&disc, nu, None, no_noise(&disc)).unwrap();
    let spec = SampleSpec {
        radius: 2.0,
        decay: 1.0,
        divergence_free: true,
    };
    let mut rng = probe_rng(9, 2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u = sample_state(&disc, &spec, &mut rng);
        let a = suite.drift(&disc, 0.0, &u);
        let vn = norm_v(&disc, &u, 2.0).unwrap();
        // adding ν‖u‖²_V back removes the viscous part, leaving ⟨conv(u),u⟩
        let pair = dual_pair(&disc, &a, &u) + nu * vn * vn;
        let bound = 1e-8 * (1.0 + vn).powi(3);
        assert!(
            pair.abs() <= bound,
            "⟨conv(u),u⟩ = {pair:.3e} exceeds {bound:.3e}"
        );
        worst = worst.max(pair.abs() / (1.0 + vn).powi(3));
    }
    pass(
        3,
        &format!(
            "max |⟨conv(u),u⟩| / (1+‖u‖_V)³ = {worst:.2e} ≤ 1e-8 over 1000 divergence-free fields at n = 16 per dimension"
        ),
    );
}

#[test]
fn criterion_04_monotonicity_constant_calibrates_and_transfers() {
    let spec = burgers_noise_spec();
    let calibrated_at = |n: usize, train: u64, check: u64| {
        let disc = interval(n);
        let maps = lipschitz_noise_maps(
            &disc,
            &spec,
            0.25,
            BMode::Multiplicative,
            0.1,
            HProfile::Norm,
            GMap::Zero,
        )
        .unwrap();
        let suite = burgers_suite(
            &disc,
            1.0,
            AdvectionFn::LinearScaled { a: 1.0 },
            None,
            maps,
        )
        .unwrap();
        assert!(
            matches!(suite.rho, RhoForm::VNormSq { .. }),
            "the transport family must declare ρ(v) = c‖v‖²_V"
        );
        let cal =
            calibrate_local_monotonicity(&suite, &spec, &disc, 1000, &mut probe_rng(33, train));
        let mut declared = suite.clone();
        declared.constants.c_h2 = cal.c_used;
        let fresh =
            check_local_monotonicity(&declared, &spec, &disc, 1000, &mut probe_rng(33, check), None);
        (cal, fresh)
    };

    let (cal32, fresh32) = calibrated_at(32, 11, 12);
    let (cal64, fresh64) = calibrated_at(64, 13, 14);
    assert_eq!(
        fresh32.violations, 0,
        "n = 32: calibrated constant violated on fresh pairs: {fresh32}"
    );
    assert_eq!(
        fresh64.violations, 0,
        "n = 64: calibrated constant violated on fresh pairs: {fresh64}"
    );
    assert!(
        cal32.c_used != 0.0 && cal32.c_used.signum() == cal64.c_used.signum(),
        "calibrated constants changed sign under refinement: {} vs {}",
        cal32.c_used,
        cal64.c_used
    );
    let ratio = (cal64.c_used / cal32.c_used).max(cal32.c_used / cal64.c_used);
    assert!(
        ratio <= 2.0,
        "calibrated constant drifted under refinement: {} at n = 32 vs {} at n = 64",
        cal32.c_used,
        cal64.c_used
    );
    pass(
        4,
        &format!(
            "calibrated C = {:.3} (n = 32) and {:.3} (n = 64), ratio {:.2} ≤ 2; 0 violations on 1000 fresh pairs at each n",
            cal32.c_used, cal64.c_used, ratio
        ),
    );
}

#[test]
fn criterion_05_deterministic_decay_matches_the_heat_kernel() {
    let disc = interval(8);
    let suite = heat_suite(&disc, 1.0, no_noise(&disc)).unwrap();
    // sin(πx) has coefficient 1/√2 on the first orthonormal mode √2·sin(πx)
    let mut x0 = StateVector::zeros(&disc);
    x0.coeffs[0] = 1.0 / 2f64.sqrt();
    let config = SolverConfig {
        dt: 1e-4,
        t_final: 0.1,
        scheme: Scheme::SemiImplicit,
        blowup_radius: 1e6,
        record_stride: 100,
    };
    let rec = solve_path_small(
        &suite,
        &disc,
        &quiet_spec(),
        &config,
        &x0,
        &mut trajectory_rng(0, 0),
    )
    .unwrap();
    assert!(!rec.blown_up);

    let amplitude = rec.final_state.coeffs[0] * 2f64.sqrt();
    let exact = (-std::f64::consts::PI.powi(2) * 0.1).exp();
    let rel = ((amplitude - exact) / exact).abs();
    assert!(rel < 1e-3, "relative amplitude error {rel:.3e} ≥ 1e-3");
    assert!(
        rec.final_state.coeffs[1..].iter().all(|&c| c == 0.0),
        "diagonal dynamics must not excite other modes"
    );
    pass(
        5,
        &format!(
            "final sin(πx) amplitude {amplitude:.8} vs e^(−π²/10) = {exact:.8}: relative error {rel:.2e} < 1e-3 (semi-implicit, dt = 1e-4)"
        ),
    );
}

#[test]
fn criterion_06_interlacing_matches_the_event_augmented_oracle() {
    let disc = interval(12);
    let spec = LevyNoiseSpec {
        large_rate: 1.5,
        large_marks: LargeMarkFamily::DiracAt { z: vec![1.5] },
        ..burgers_noise_spec()
    };
    let maps = lipschitz_noise_maps(
        &disc,
        &spec,
        0.3,
        BMode::Multiplicative,
        0.1,
        HProfile::Norm,
        GMap::Multiplicative { amplitude: 0.2 },
    )
    .unwrap();
    let suite = burgers_suite(
        &disc,
        1.0,
        AdvectionFn::LinearScaled { a: 1.0 },
        None,
        maps,
    )
    .unwrap();
    let config = SolverConfig {
        dt: 0.02,
        t_final: 1.0,
        scheme: Scheme::SemiImplicit,
        blowup_radius: 1e6,
        record_stride: 10,
    };
    let n_steps = 50usize;
    // interior arrival, one exactly on a grid point, two sharing a step, and
    // one at the horizon (clamped to the final step)
    let schedule = vec![
        JumpEvent {
            time: 0.0301,
            mark: vec![1.5],
        },
        JumpEvent {
            time: 0.5,
            mark: vec![-0.8],
        },
        JumpEvent {
            time: 0.503,
            mark: vec![0.6],
        },
        JumpEvent {
            time: 1.0,
            mark: vec![1.1],
        },
    ];
    let mut x0 = StateVector::zeros(&disc);
    x0.coeffs[0] = 0.8;
    x0.coeffs[1] = -0.3;
    x0.coeffs[4] = 0.1;

    let rec = solve_path_with_schedule(
        &suite,
        &disc,
        &spec,
        &config,
        &x0,
        &mut trajectory_rng(5, 0),
        schedule.clone(),
    )
    .unwrap();
    assert!(!rec.blown_up);

    // Oracle: an event-augmented small-jump loop driven by a clone of the
    // same generator — apply the scheduled jumps to the pre-step state, then
    // take the usual Wiener/compensated-Poisson step.
    let target_step =
        |time: f64| -> usize { ((time / config.dt).floor() as usize).min(n_steps - 1) };
    let mut rng = trajectory_rng(5, 0);
    let mut x = x0.clone();
    let mut idx = 0usize;
    let mut oracle_snaps: Vec<StateVector> = Vec::new();
    for k in 0..n_steps {
        let t = k as f64 * config.dt;
        while idx < schedule.len() && target_step(schedule[idx].time) == k {
            let g = suite.noise.large_jump(&disc, &x, &schedule[idx].mark);
            x.axpy(1.0, &g);
            idx += 1;
        }
        if k % config.record_stride == 0 {
            oracle_snaps.push(x.clone());
        }
        let dw = sample_wiener_increments(&spec, config.dt, &mut rng);
        let counts = sample_small_jump_counts(&spec, config.dt, &mut rng);
        x = galerkin_step(
            &suite,
            &disc,
            &x,
            t,
            config.dt,
            &dw,
            &counts,
            &spec,
            config.scheme,
        );
    }
    oracle_snaps.push(x.clone());
    assert_eq!(idx, schedule.len(), "oracle must consume every event");

    assert_eq!(
        rec.jumps.iter().map(|j| j.step).collect::<Vec<_>>(),
        vec![1, 25, 25, 49],
        "arrivals snapped to unexpected steps"
    );
    assert_eq!(rec.snapshots.len(), oracle_snaps.len());
    let mut max_diff = 0.0f64;
    for (a, b) in rec
        .snapshots
        .iter()
        .zip(&oracle_snaps)
        .chain(std::iter::once((&rec.final_state, &x)))
    {
        for (c, d) in a.coeffs.iter().zip(&b.coeffs) {
            max_diff = max_diff.max((c - d).abs());
        }
    }
    assert!(
        max_diff <= 1e-12,
        "interlaced path and oracle differ by {max_diff:.3e}"
    );
    pass(
        6,
        &format!(
            "interlaced path equals the event-augmented oracle: max coefficient difference {max_diff:.1e} ≤ 1e-12 across 4 injected jumps"
        ),
    );
}

#[test]
fn criterion_07_degenerate_diffusion_is_monotone() {
    let disc = interval(24);
    let suite = p_laplace_suite(&disc, 3.0, None, no_noise(&disc)).unwrap();
    let spec = SampleSpec {
        radius: 2.0,
        decay: 1.0,
        divergence_free: false,
    };
    let mut rng = probe_rng(9, 3);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..1000 {
        let u = sample_state(&disc, &spec, &mut rng);
        let v = sample_state(&disc, &spec, &mut rng);
        let mut w = u.clone();
        w.axpy(-1.0, &v);
        let pair_u = dual_pair(&disc, &suite.drift(&disc, 0.0, &u), &w);
        let pair_v = dual_pair(&disc, &suite.drift(&disc, 0.0, &v), &w);
        let pair = pair_u - pair_v;
        let scale = 1.0 + pair_u.abs() + pair_v.abs();
        if pair > 1e-8 * scale {
            violations += 1;
        }
        worst = worst.max(pair / scale);
    }
    assert_eq!(violations, 0, "monotonicity violated on {violations} pairs");
    pass(
        7,
        &format!(
            "max ⟨A(u)−A(v),u−v⟩/scale = {worst:.2e} ≤ 1e-8 over 1000 random pairs (p = 3), 0 violations"
        ),
    );
}

#[test]
fn criterion_08_sixth_moment_stays_bounded_under_refinement() {
    let spec = burgers_noise_spec();
    let run_at = |n: usize| {
        let disc = interval(n);
        let maps = lipschitz_noise_maps(
            &disc,
            &spec,
            0.25,
            BMode::Multiplicative,
            0.1,
            HProfile::Norm,
            GMap::Zero,
        )
        .unwrap();
        let mut suite = burgers_suite(
            &disc,
            1.0,
            AdvectionFn::LinearScaled { a: 1.0 },
            None,
            maps,
        )
        .unwrap();
        // ask for the sixth moment: E‖X‖^{β+2} with β = 4
        suite.constants.beta = 4.0;
        suite.constants.validate().unwrap();
        let mut x0 = StateVector::zeros(&disc);
        x0.coeffs[0] = 0.8;
        let config = SolverConfig {
            dt: 1e-3,
            t_final: 0.5,
            scheme: Scheme::SemiImplicit,
            blowup_radius: 1e6,
            record_stride: 25,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        pool.install(|| {
            ensemble_moments(
                &suite,
                &disc,
                &spec,
                &config,
                &InitialLaw::Fixed(x0),
                500,
                77,
            )
        })
        .unwrap()
    };

    let start = Instant::now();
    let rep32 = run_at(32);
    let rep64 = run_at(64);
    let secs = start.elapsed().as_secs_f64();

    assert_eq!(rep32.beta, 4.0);
    assert_eq!(rep32.blown_up_paths, 0, "blow-ups at n = 32");
    assert_eq!(rep64.blown_up_paths, 0, "blow-ups at n = 64");
    assert!(rep32.sup_mean.is_finite() && rep64.sup_mean.is_finite());
    let rel = ((rep64.sup_mean - rep32.sup_mean) / rep32.sup_mean).abs();
    assert!(
        rel < 0.10,
        "sup-moment moved {:.1}% under refinement ({} vs {})",
        100.0 * rel,
        rep32.sup_mean,
        rep64.sup_mean
    );
    assert!(secs < 300.0, "took {secs:.0} s ≥ 300 s");
    pass(
        8,
        &format!(
            "sup E‖X‖⁶ = {:.6e} (n = 32) vs {:.6e} (n = 64): relative change {:.1e} < 0.1, 0/500 blow-ups per run ({:.0} s < 300 s on 4 threads)",
            rep32.sup_mean,
            rep64.sup_mean,
            rel,
            secs
        ),
    );
}

#[test]
fn criterion_09_shared_noise_distance_follows_the_spectral_gap() {
    let disc = interval(4);
    let spec = LevyNoiseSpec {
        wiener_modes: 2,
        ..quiet_spec()
    };
    let maps = lipschitz_noise_maps(
        &disc,
        &spec,
        0.05,
        BMode::Additive,
        0.0,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap();
    let suite = heat_suite(&disc, 1.0, maps).unwrap();
    // the twin difference lives purely in the lowest mode, whose squared
    // norm contracts at the exact rate e^{−2π²t} under shared additive noise
    let mut x0 = StateVector::zeros(&disc);
    x0.coeffs[0] = 1.0;
    x0.coeffs[2] = 0.2;
    let mut y0 = StateVector::zeros(&disc);
    y0.coeffs[0] = 0.4;
    y0.coeffs[2] = 0.2;
    let config = SolverConfig {
        dt: 1e-7,
        t_final: 0.05,
        scheme: Scheme::SemiImplicit,
        blowup_radius: 1e6,
        record_stride: 50_000,
    };
    let rec = stability_check(&suite, &disc, &spec, &config, &x0, &y0, 4).unwrap();
    assert!(rec.shared_noise_cancels);
    assert_eq!(rec.times.len(), 11);

    let d0 = rec.distance_sq[0];
    assert_eq!(d0, 0.36);
    let lam = std::f64::consts::PI.powi(2);
    let mut worst = 0.0f64;
    for (t, d) in rec.times.iter().zip(&rec.distance_sq) {
        let exact = d0 * (-2.0 * lam * t).exp();
        let rel = ((d - exact) / exact).abs();
        assert!(rel <= 1e-6, "t = {t}: relative error {rel:.3e} > 1e-6");
        worst = worst.max(rel);
    }
    pass(
        9,
        &format!(
            "‖X_t−Y_t‖² tracks e^(−2π²t)·‖x0−y0‖² to {worst:.2e} ≤ 1e-6 at all 11 recorded times (dt = 1e-7)"
        ),
    );
}

#[test]
fn criterion_10_taylor_second_order_bound() {
    let dim = 64usize;
    let mut fitted = Vec::new();
    for (i, &p) in [2.0, 4.0, 6.0].iter().enumerate() {
        let c_fit = fitted_remainder_constant(p, dim, 10_000, &mut probe_rng(8, 40 + i as u64));
        assert!(
            c_fit.is_finite() && c_fit > 0.0 && c_fit < 60.0,
            "p = {p}: fitted constant {c_fit} out of range"
        );
        // the fitted constant transfers to a fresh ensemble of the same size
        let c_fresh = fitted_remainder_constant(p, dim, 10_000, &mut probe_rng(8, 50 + i as u64));
        assert!(
            c_fresh <= 1.10 * c_fit && c_fit <= 1.10 * c_fresh,
            "p = {p}: fitted constants unstable ({c_fit} vs {c_fresh})"
        );
        fitted.push(c_fit);
    }

    // p = 2 is an identity: the remainder equals ‖h‖² exactly
    use rand::Rng;
    let mut rng = probe_rng(8, 60);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let h: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let nh2: f64 = h.iter().map(|c| c * c).sum();
        let rem = taylor_remainder(2.0, &x, &h);
        worst = worst.max((rem - nh2).abs() / nh2);
    }
    assert!(worst <= 1e-12, "p = 2 remainder deviates by {worst:.3e}");
    pass(
        10,
        &format!(
            "fitted C_p = {:.3}/{:.3}/{:.3} for p = 2/4/6 over 10000 samples in dimension 64; p = 2 remainder equals ‖h‖² to {:.1e} ≤ 1e-12",
            fitted[0], fitted[1], fitted[2], worst
        ),
    );
}

#[test]
fn criterion_11_cli_runs_are_byte_reproducible() {
    let bin = env!("CARGO_BIN_EXE_levyspde");
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[(&str, &str)] = &[
        ("simulate", "burgers_jumps.toml"),
        ("verify", "heat.toml"),
        ("calibrate", "burgers.toml"),
        ("moments", "heat.toml"),
        ("converge", "burgers.toml"),
        ("stability", "heat.toml"),
    ];
    for (sub, cfg) in cases {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{sub}-{run}"));
            let r = std::process::Command::new(bin)
                .args([
                    sub,
                    "--config",
                    configs.join(cfg).to_str().unwrap(),
                    "--seed",
                    "123",
                    "--out",
                    out.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            assert!(
                r.status.success(),
                "{sub} on {cfg} failed: {}",
                String::from_utf8_lossy(&r.stderr)
            );
            let mut names: Vec<String> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect();
            names.sort();
            let files: Vec<(String, Vec<u8>)> = names
                .into_iter()
                .map(|n| {
                    let bytes = std::fs::read(out.join(&n)).unwrap();
                    (n, bytes)
                })
                .collect();
            assert!(!files.is_empty(), "{sub} wrote no output files");
            outputs.push((files, r.stdout));
        }
        assert_eq!(
            outputs[0], outputs[1],
            "{sub} on {cfg}: reruns with identical config+seed differ"
        );
    }
    pass(
        11,
        "all 6 subcommands byte-identical across reruns with fixed config and seed (output files and stdout)",
    );
}
