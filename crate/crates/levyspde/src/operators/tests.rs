use super::*;
use crate::noise::{LevyNoiseSpec, SmallAtom};
use crate::rng::probe_rng;
use crate::sampler::{sample_pair, sample_state, SampleSpec};
use crate::spaces::{
    build_discretization, dual_pair, norm_h, norm_v, SpatialDiscretization, StateVector,
};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn interval(n: usize) -> SpatialDiscretization {
    build_discretization(DomainKind::IntervalDirichlet, n, 1).unwrap()
}

fn torus(n: usize) -> SpatialDiscretization {
    build_discretization(DomainKind::Torus2d, n, 2).unwrap()
}

/// Noise maps with everything switched off (drift-only experiments).
fn quiet(disc: &SpatialDiscretization) -> NoiseMaps {
    lipschitz_noise_maps(
        disc,
        &LevyNoiseSpec::wiener_only(0),
        0.0,
        BMode::Additive,
        0.0,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap()
}

fn basis_state(disc: &SpatialDiscretization, k: usize) -> StateVector {
    let mut v = StateVector::zeros(disc);
    v.coeffs[k] = 1.0;
    v
}

#[test]
fn transport_suite_with_everything_off_is_linear_diffusion() {
    let disc = interval(8);
    let suite = burgers_suite(&disc, 1.3, AdvectionFn::Zero, None, quiet(&disc)).unwrap();
    for k in 0..disc.dim() {
        let e = basis_state(&disc, k);
        let a = suite.drift(&disc, 0.0, &e);
        let lam = ((k + 1) as f64 * PI).powi(2);
        for (i, &c) in a.coeffs.iter().enumerate() {
            let expected = if i == k { -1.3 * lam } else { 0.0 };
            assert!(
                (c - expected).abs() <= 1e-10 * (1.0 + lam),
                "mode {k}: coefficient {i} = {c}, expected {expected}"
            );
        }
    }
}

#[test]
fn transport_term_matches_quadrature_oracle_on_lowest_mode() {
    let disc = interval(8);
    let suite = burgers_suite(
        &disc,
        1.0,
        AdvectionFn::LinearScaled { a: 1.0 },
        None,
        quiet(&disc),
    )
    .unwrap();

    // v = sin(πx) = e₁/√2; v·v_x = (π/2)sin(2πx) has the single coefficient
    // π/(2√2) on e₂.
    let mut v = StateVector::zeros(&disc);
    v.coeffs[0] = FRAC_1_SQRT_2;
    let nl = suite.explicit_drift(&disc, 0.0, &v);
    let expected = PI / (2.0 * std::f64::consts::SQRT_2);
    assert!((nl.coeffs[1] - expected).abs() < 1e-10, "{}", nl.coeffs[1]);
    for (i, &c) in nl.coeffs.iter().enumerate() {
        if i != 1 {
            assert!(c.abs() < 1e-10, "spurious coefficient {i}: {c}");
        }
    }

    // Independent composite-Simpson oracle for a messier state.
    let mut w = StateVector::zeros(&disc);
    w.coeffs[0] = 0.7;
    w.coeffs[2] = -0.4;
    w.coeffs[5] = 0.11;
    let nlw = suite.explicit_drift(&disc, 0.0, &w);
    let val = |x: f64| {
        let mut s = 0.0;
        for (k, &c) in w.coeffs.iter().enumerate() {
            s += c * std::f64::consts::SQRT_2 * ((k + 1) as f64 * PI * x).sin();
        }
        s
    };
    let dval = |x: f64| {
        let mut s = 0.0;
        for (k, &c) in w.coeffs.iter().enumerate() {
            let f = (k + 1) as f64 * PI;
            s += c * std::f64::consts::SQRT_2 * f * (f * x).cos();
        }
        s
    };
    let m = 2000usize;
    let h = 1.0 / m as f64;
    for k in 0..disc.dim() {
        let e = |x: f64| std::f64::consts::SQRT_2 * ((k + 1) as f64 * PI * x).sin();
        let f = |x: f64| val(x) * dval(x) * e(x);
        let mut simpson = f(0.0) + f(1.0);
        for j in 1..m {
            let x = j as f64 * h;
            simpson += if j % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        simpson *= h / 3.0;
        assert!(
            (nlw.coeffs[k] - simpson).abs() < 1e-8,
            "coefficient {k}: {} vs oracle {simpson}",
            nlw.coeffs[k]
        );
    }
}

#[test]
fn cubic_reaction_scalar_bounds_are_sharp() {
    let r = CubicReaction {
        c3: 1.0,
        c1: 2.0,
        c2: 0.5,
    };
    assert!((r.pairing_bound() - 1.5).abs() < 1e-14);
    assert!((r.one_sided_lipschitz() - (4.0 / 3.0 + 0.5)).abs() < 1e-14);

    let osl = r.one_sided_lipschitz();
    let pb = r.pairing_bound();
    let mut rng = probe_rng(7, 301);
    use rand::Rng;
    for _ in 0..5000 {
        let x: f64 = rng.gen_range(-30.0..30.0);
        let y: f64 = rng.gen_range(-30.0..30.0);
        let lhs = (r.eval(x) - r.eval(y)) * (x - y);
        assert!(lhs <= osl * (x - y) * (x - y) + 1e-9);
        assert!(r.eval(x) * x <= pb * x * x + 1e-9);
    }
}

#[test]
fn degenerate_diffusion_rejects_quadratic_exponent() {
    let disc = interval(8);
    let err = p_laplace_suite(&disc, 2.0, None, quiet(&disc)).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("p > 2"), "{msg}");
    assert!(p_laplace_suite(&disc, 1.5, None, quiet(&disc)).is_err());
}

#[test]
fn degenerate_diffusion_pairing_matches_cubic_energy_oracle() {
    // ⟨A(v), v⟩ = −∫|v′|³ = −4π²/3 for v = sin(πx), p = 3.
    let disc = interval(8);
    let suite = p_laplace_suite(&disc, 3.0, None, quiet(&disc)).unwrap();
    let mut v = StateVector::zeros(&disc);
    v.coeffs[0] = FRAC_1_SQRT_2;
    let a = suite.drift(&disc, 0.0, &v);
    let pairing = dual_pair(&disc, &a, &v);
    let exact = -4.0 * PI * PI / 3.0;
    assert!(
        (pairing - exact).abs() < 2e-3 * exact.abs(),
        "pairing {pairing} vs {exact}"
    );
}

#[test]
fn degenerate_diffusion_is_exactly_homogeneous() {
    let disc = interval(8);
    let p = 3.5;
    let suite = p_laplace_suite(&disc, p, None, quiet(&disc)).unwrap();
    let mut rng = probe_rng(11, 302);
    let v = sample_state(&disc, &SampleSpec::default(), &mut rng);
    let mut cv = v.clone();
    let c = 2.3f64;
    cv.scale(c);
    let av = suite.drift(&disc, 0.0, &v);
    let acv = suite.drift(&disc, 0.0, &cv);
    let scale = c.powf(p - 1.0);
    for (x, y) in acv.coeffs.iter().zip(&av.coeffs) {
        assert!(
            (x - scale * y).abs() <= 1e-8 * (1.0 + x.abs()),
            "{x} vs {}",
            scale * y
        );
    }
}

#[test]
fn degenerate_diffusion_difference_pairings_are_nonpositive() {
    let disc = interval(8);
    let suite = p_laplace_suite(&disc, 3.0, None, quiet(&disc)).unwrap();
    assert!((suite.strong_monotonicity_delta().unwrap() - 0.45).abs() < 1e-14);
    let spec = SampleSpec {
        radius: 2.0,
        ..SampleSpec::default()
    };
    let mut rng = probe_rng(13, 303);
    for _ in 0..300 {
        let (u, v) = sample_pair(&disc, &spec, &mut rng);
        let mut w = u.clone();
        w.axpy(-1.0, &v);
        let mut da = suite.drift(&disc, 0.0, &u);
        da.axpy(-1.0, &suite.drift(&disc, 0.0, &v));
        let pairing = dual_pair(&disc, &da, &w);
        let h = norm_h(&disc, &w);
        assert!(pairing <= 1e-9 * (1.0 + h * h), "pairing {pairing}");
    }
}

#[test]
fn convection_vanishes_on_shear_and_taylor_green_states() {
    let disc = torus(6);
    let suite = ns2d_suite(&disc, 1.0, None, quiet(&disc)).unwrap();
    let n = disc.n;
    let pcd = n * n;

    // (0, c·cos x): no y-dependence in u₂ and u₁ = 0 ⇒ (u·∇)u = 0 pointwise.
    let mut shear = StateVector::zeros(&disc);
    shear.coeffs[pcd + n] = 1.7; // comp 1, x-factor cos(1), y-factor const
    let f = suite.explicit_drift(&disc, 0.0, &shear);
    assert!(norm_h(&disc, &f) < 1e-12);

    // Taylor–Green (cos x sin y, −sin x cos y): self-advection is a pure
    // gradient, so its divergence-free projection vanishes.
    let kc = n / 2;
    let mut tg = StateVector::zeros(&disc);
    tg.coeffs[n + (kc + 1)] = PI; // comp 0: (cos1, sin1)
    tg.coeffs[pcd + (kc + 1) * n + 1] = -PI; // comp 1: (sin1, cos1)
    assert!(crate::spaces::divergence_residual(&disc, &tg).unwrap() < 1e-12);
    let ftg = suite.explicit_drift(&disc, 0.0, &tg);
    assert!(norm_h(&disc, &ftg) < 1e-10, "{}", norm_h(&disc, &ftg));
}

#[test]
fn convection_conserves_energy_on_divergence_free_states() {
    let disc = torus(6);
    let suite = ns2d_suite(&disc, 0.7, None, quiet(&disc)).unwrap();
    let spec = SampleSpec {
        radius: 2.0,
        decay: 0.5,
        divergence_free: true,
    };
    let mut rng = probe_rng(17, 304);
    for _ in 0..200 {
        let u = sample_state(&disc, &spec, &mut rng);
        let f = suite.explicit_drift(&disc, 0.0, &u);
        let vn = crate::spaces::norm_v(&disc, &u, 2.0).unwrap();
        let pairing = dual_pair(&disc, &f, &u);
        assert!(
            pairing.abs() <= 1e-9 * (1.0 + vn).powi(3),
            "⟨F(u),u⟩ = {pairing} at ‖u‖_V = {vn}"
        );
    }
}

#[test]
fn single_mode_velocity_reduces_to_linear_stokes_decay() {
    let disc = torus(6);
    let suite = ns2d_suite(&disc, 1.0, None, quiet(&disc)).unwrap();
    let n = disc.n;
    let pcd = n * n;
    let mut u = StateVector::zeros(&disc);
    u.coeffs[pcd + n] = 2.0; // (0, 2·cos x)/normalization, |k|² = 1
    let a = suite.drift(&disc, 0.0, &u);
    for (i, &c) in a.coeffs.iter().enumerate() {
        let expected = -u.coeffs[i];
        assert!((c - expected).abs() < 1e-12, "coefficient {i}");
    }
}

#[test]
fn forcing_is_projected_and_enters_the_bound_process() {
    let disc = torus(6);
    let n = disc.n;
    let pcd = n * n;
    let mut f = StateVector::zeros(&disc);
    f.coeffs[0] = 5.0; // mean mode: must be dropped
    f.coeffs[n] = 1.0; // (cos x, 0) is a pure gradient: the projection kills it
    f.coeffs[pcd + n] = 1.0; // (0, cos x) is divergence-free: it survives
    let suite = ns2d_suite(&disc, 1.0, Some(f), quiet(&disc)).unwrap();
    let stored = match &suite.kind {
        SuiteKind::Ns2d { forcing, .. } => forcing.clone().unwrap(),
        _ => unreachable!(),
    };
    assert_eq!(stored.coeffs[0], 0.0);
    assert!(stored.coeffs[n].abs() < 1e-14);
    assert!((stored.coeffs[pcd + n] - 1.0).abs() < 1e-14);
    assert!(crate::spaces::divergence_residual(&disc, &stored).unwrap() < 1e-12);
    assert!(suite.constants.f_t > 0.0);

    // zero drift at the origin picks up exactly the forcing
    let z = StateVector::zeros(&disc);
    let a = suite.drift(&disc, 0.0, &z);
    for (x, y) in a.coeffs.iter().zip(&stored.coeffs) {
        assert!((x - y).abs() < 1e-14);
    }
}

#[test]
fn admissibility_gate_on_the_jump_weight() {
    let base = FrameworkConstants {
        alpha: 2.0,
        beta: 4.0,
        theta: 2.0,
        f_t: 0.0,
        c_h2: 1.0,
        c_h3: 1.0,
        c_h4: 1.0,
        c_c5: 0.0,
        gamma: 0.0,
    };
    assert!(base.validate().is_ok());
    assert!((base.gamma_bound() - 0.25).abs() < 1e-14);

    let err = FrameworkConstants {
        gamma: 0.3,
        ..base
    }
    .validate()
    .unwrap_err();
    match err {
        SpdeError::Config { ref key, .. } => assert_eq!(key, "constants.gamma"),
        ref other => panic!("unexpected error {other:?}"),
    }

    assert!(FrameworkConstants {
        gamma: 0.2,
        ..base
    }
    .validate()
    .is_ok());
    // β = 0 admits any finite γ
    assert!(FrameworkConstants {
        beta: 0.0,
        gamma: 100.0,
        ..base
    }
    .validate()
    .is_ok());
}

#[test]
fn drift_splits_into_explicit_plus_diagonal() {
    let mut rng = probe_rng(23, 305);
    let disc = interval(8);
    let suites = [
        burgers_suite(
            &disc,
            0.8,
            AdvectionFn::LinearScaled { a: 1.0 },
            Some(CubicReaction {
                c3: 1.0,
                c1: 0.3,
                c2: 0.1,
            }),
            quiet(&disc),
        )
        .unwrap(),
        p_laplace_suite(&disc, 3.0, None, quiet(&disc)).unwrap(),
        heat_suite(&disc, 2.0, quiet(&disc)).unwrap(),
    ];
    for suite in &suites {
        let v = sample_state(&disc, &SampleSpec::default(), &mut rng);
        let full = suite.drift(&disc, 0.0, &v);
        let mut split = suite.explicit_drift(&disc, 0.0, &v);
        if let Some(d) = suite.implicit_diagonal() {
            for (i, di) in d.iter().enumerate() {
                split.coeffs[i] += di * v.coeffs[i];
            }
        }
        for (x, y) in full.coeffs.iter().zip(&split.coeffs) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn noise_map_lipschitz_identity_for_multiplicative_coefficients() {
    let disc = interval(6);
    let spec = LevyNoiseSpec {
        wiener_modes: 3,
        small_atoms: vec![
            SmallAtom {
                mark: vec![0.5],
                weight: 2.0,
            },
            SmallAtom {
                mark: vec![-0.9],
                weight: 1.0,
            },
        ],
        large_rate: 0.0,
        large_marks: crate::noise::LargeMarkFamily::DiracAt { z: vec![2.0] },
        mark_dim: 1,
    };
    let maps = lipschitz_noise_maps(
        &disc,
        &spec,
        0.4,
        BMode::Multiplicative,
        0.3,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap();

    let mut rng = probe_rng(29, 306);
    let (u, v) = sample_pair(&disc, &SampleSpec::default(), &mut rng);
    let mut w = u.clone();
    w.axpy(-1.0, &v);
    let wn = norm_h(&disc, &w);

    // ‖B(u) − B(v)‖²_HS + Σ_j w_j ‖f(u,z_j) − f(v,z_j)‖²
    let cu = maps.diffusion_columns(&disc, &u);
    let cv = maps.diffusion_columns(&disc, &v);
    let mut lhs = 0.0;
    for (a, b) in cu.iter().zip(&cv) {
        let mut d = a.clone();
        d.axpy(-1.0, b);
        lhs += norm_h(&disc, &d).powi(2);
    }
    for atom in &spec.small_atoms {
        let mut d = maps.small_jump(&u, &atom.mark);
        d.axpy(-1.0, &maps.small_jump(&v, &atom.mark));
        lhs += atom.weight * norm_h(&disc, &d).powi(2);
    }
    // exact value: the diffusion difference only sees the Wiener range
    let w_head: f64 = w.coeffs[..3].iter().map(|c| c * c).sum();
    let exact = 0.4 * 0.4 * w_head + 0.3 * 0.3 * maps.h_sq_mass * wn * wn;
    assert!(
        (lhs - exact).abs() <= 1e-10 * (1.0 + exact),
        "lhs {lhs} vs exact {exact}"
    );
    // the declared Lipschitz level dominates it
    let bound = maps.lipschitz_sq() * wn * wn;
    assert!(lhs <= bound + 1e-10 * (1.0 + bound));

    // and saturates when the Wiener range spans every mode
    let full_spec = LevyNoiseSpec {
        wiener_modes: disc.dim(),
        ..spec.clone()
    };
    let full = lipschitz_noise_maps(
        &disc,
        &full_spec,
        0.4,
        BMode::Multiplicative,
        0.3,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap();
    let cu = full.diffusion_columns(&disc, &u);
    let cv = full.diffusion_columns(&disc, &v);
    let mut sat = 0.0;
    for (a, b) in cu.iter().zip(&cv) {
        let mut d = a.clone();
        d.axpy(-1.0, b);
        sat += norm_h(&disc, &d).powi(2);
    }
    for atom in &full_spec.small_atoms {
        let mut d = full.small_jump(&u, &atom.mark);
        d.axpy(-1.0, &full.small_jump(&v, &atom.mark));
        sat += atom.weight * norm_h(&disc, &d).powi(2);
    }
    let tight = full.lipschitz_sq() * wn * wn;
    assert!(
        (sat - tight).abs() <= 1e-10 * (1.0 + tight),
        "saturated lhs {sat} vs level {tight}"
    );

    // Hilbert–Schmidt norm against explicit columns (full-span maps)
    let hs = full.hs_norm_sq(&u);
    let direct: f64 = cu.iter().map(|c| norm_h(&disc, c).powi(2)).sum();
    assert!((hs - direct).abs() < 1e-12 * (1.0 + direct));
}

#[test]
fn degenerate_diffusion_energy_identity_and_coercivity_shading() {
    // With no reaction, summation by parts makes ⟨A(v), v⟩ exactly the
    // negative discrete p-energy; and the declared coercivity weight 1.9
    // must be covered by 2× that energy against the quadrature V-norm.
    let disc = interval(10);
    let suite = p_laplace_suite(&disc, 3.0, None, quiet(&disc)).unwrap();
    let grid = super::p_laplace::build_fd_grid(&disc);
    let mut rng = probe_rng(23, 501);
    let spec = SampleSpec {
        radius: 2.0,
        decay: 1.0,
        divergence_free: false,
    };
    for _ in 0..50 {
        let v = sample_state(&disc, &spec, &mut rng);
        let pairing = dual_pair(&disc, &suite.drift(&disc, 0.0, &v), &v);
        let energy = super::p_laplace::fd_energy(&grid, 3.0, &v);
        assert!(
            (pairing + energy).abs() <= 1e-10 * (1.0 + energy),
            "pairing {pairing} vs -energy {energy}"
        );
        let vn = norm_v(&disc, &v, 3.0).unwrap();
        assert!(
            1.9 * vn.powf(3.0) <= 2.0 * energy + 1e-9 * (1.0 + energy),
            "shading violated: 1.9·‖v‖³_V = {} vs 2E = {}",
            1.9 * vn.powf(3.0),
            2.0 * energy
        );
    }
}
