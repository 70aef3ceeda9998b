//! Ensemble throughput: rayon fan-out vs the single-threaded driver.
//!
//! Both produce bitwise-identical reports (per-trajectory RNG streams,
//! ordered reduction), so this measures scheduling overhead and scaling only.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levyspde::noise::{LargeMarkFamily, SmallAtom};
use levyspde::operators::{
    burgers_suite, lipschitz_noise_maps, AdvectionFn, BMode, GMap, HProfile,
};
use levyspde::solver::{ensemble_moments, ensemble_moments_serial, InitialLaw, Scheme, SolverConfig};
use levyspde::spaces::{build_discretization, DomainKind, StateVector};
use levyspde::LevyNoiseSpec;

fn bench_ensemble(c: &mut Criterion) {
    let disc = build_discretization(DomainKind::IntervalDirichlet, 16, 1).unwrap();
    let spec = LevyNoiseSpec {
        wiener_modes: 4,
        small_atoms: vec![SmallAtom {
            mark: vec![0.5],
            weight: 4.0,
        }],
        large_rate: 0.0,
        large_marks: LargeMarkFamily::UniformAnnulus {
            r_min: 1.0,
            r_max: 2.0,
        },
        mark_dim: 1,
    };
    let maps = lipschitz_noise_maps(
        &disc,
        &spec,
        0.2,
        BMode::Multiplicative,
        0.1,
        HProfile::Norm,
        GMap::Zero,
    )
    .unwrap();
    let suite =
        burgers_suite(&disc, 1.0, AdvectionFn::LinearScaled { a: 1.0 }, None, maps).unwrap();
    let config = SolverConfig {
        dt: 1e-3,
        t_final: 0.1,
        scheme: Scheme::SemiImplicit,
        blowup_radius: 1e6,
        record_stride: 100,
    };
    let mut x0 = StateVector::zeros(&disc);
    x0.coeffs[0] = 0.8;
    let law = InitialLaw::Fixed(x0);

    let mut group = c.benchmark_group("ensemble_moments");
    for paths in [64usize, 256] {
        group.bench_with_input(BenchmarkId::new("parallel", paths), &paths, |b, &m| {
            b.iter(|| ensemble_moments(&suite, &disc, &spec, &config, &law, m, 7).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", paths), &paths, |b, &m| {
            b.iter(|| ensemble_moments_serial(&suite, &disc, &spec, &config, &law, m, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ensemble);
criterion_main!(benches);
