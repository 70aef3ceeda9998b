//! TOML experiment configuration shared by the CLI and integration tests.
//!
//! Parsing is two-stage: serde reads a permissive all-optional mirror of the
//! file (unknown keys are rejected with their location), then validation
//! resolves defaults and reports missing or inconsistent keys under their
//! full path (`solver.dt`, `operator.kind`, …). The resolved configuration
//! serializes back to canonical TOML for provenance echoes, so a rerun of
//! the same experiment writes byte-identical metadata regardless of where
//! its outputs go.
//!
//! Spatial modes in `[initial]` and `[operator.forcing]` are named by
//! frequency rather than storage index so the same file means the same
//! function at every resolution (which is what refinement studies need):
//! on the interval, `kx = k` is the k-th sine mode (1-based); on the torus,
//! `kx`/`ky` pick the factor `cos(k·)` for `k > 0`, `sin(|k|·)` for `k < 0`
//! and the constant factor for `k = 0`.

use std::path::Path;

use crate::conditions::VerifyPlan;
use crate::error::SpdeError;
use crate::noise::{LargeMarkFamily, LevyNoiseSpec, SmallAtom};
use crate::operators::{
    burgers_suite, heat_suite, lipschitz_noise_maps, ns2d_suite, p_laplace_suite,
    zero_drift_suite, AdvectionFn, BMode, CubicReaction, GMap, HProfile, OperatorSuite,
    RhoForm,
};
use crate::sampler::SampleSpec;
use crate::solver::{InitialLaw, Scheme, SolverConfig};
use crate::spaces::{
    build_discretization, leray_project, norm_h, DomainKind, SpatialDiscretization, StateVector,
};

/// One spatial mode, addressed by frequency (see the module docs).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    #[serde(default)]
    pub component: usize,
    pub kx: i64,
    #[serde(default)]
    pub ky: i64,
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiscretizationConfig {
    pub domain: DomainKind,
    pub n: usize,
    pub components: usize,
}

/// Which operator family to run, with its family-specific knobs.
#[derive(Clone, Debug, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorConfig {
    ZeroDrift,
    Heat {
        kappa: f64,
    },
    Burgers {
        viscosity: f64,
        advection: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        reaction: Option<CubicReaction>,
    },
    PLaplace {
        p: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        reaction: Option<CubicReaction>,
    },
    Ns2d {
        viscosity: f64,
        forcing: Vec<ModeEntry>,
    },
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct NoiseConfig {
    pub wiener_modes: usize,
    pub b_scale: f64,
    pub b_mode: BMode,
    pub f_scale: f64,
    pub large_rate: f64,
    pub mark_dim: usize,
    pub h_profile: HProfile,
    pub g_map: GMap,
    pub large_marks: LargeMarkFamily,
    pub small_atoms: Vec<SmallAtom>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            wiener_modes: 0,
            b_scale: 0.0,
            b_mode: BMode::Additive,
            f_scale: 0.0,
            large_rate: 0.0,
            mark_dim: 1,
            h_profile: HProfile::Norm,
            g_map: GMap::Zero,
            large_marks: LargeMarkFamily::UniformAnnulus {
                r_min: 1.0,
                r_max: 2.0,
            },
            small_atoms: Vec::new(),
        }
    }
}

/// Optional overrides layered onto the suite's analytic declarations.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_h2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_h3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_h4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_c5: Option<f64>,
    /// Moment exponent: the solver estimates `E‖X‖^{beta+2}_H`. Raising it
    /// above the operator's default asks for a higher moment of the same
    /// dynamics, which tightens the admissible `gamma` range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialConfig {
    /// Superposition of named modes (the default, empty = zero state).
    Modes { entries: Vec<ModeEntry> },
    /// Random state with the given envelope, one draw per trajectory.
    Random { radius: f64, decay: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnsembleConfig {
    pub paths: usize,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct ConvergeConfig {
    pub n_list: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_n: Option<usize>,
}

/// Fully resolved experiment description.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ExperimentConfig {
    pub label: String,
    pub discretization: DiscretizationConfig,
    pub solver: SolverConfig,
    pub ensemble: EnsembleConfig,
    pub verify: VerifyPlan,
    pub converge: ConvergeConfig,
    pub operator: OperatorConfig,
    pub constants: ConstantsOverride,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<RhoForm>,
    pub noise: NoiseConfig,
    pub initial: InitialConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_y: Option<InitialConfig>,
}

/// Everything a run needs, built from an [`ExperimentConfig`].
pub struct Experiment {
    pub disc: SpatialDiscretization,
    pub noise_spec: LevyNoiseSpec,
    pub suite: OperatorSuite,
    pub solver: SolverConfig,
    pub initial: InitialLaw,
    pub initial_y: Option<InitialLaw>,
    pub ensemble_paths: usize,
    pub verify: VerifyPlan,
    pub converge: ConvergeConfig,
    pub label: String,
}

// ---------------------------------------------------------------------------
// permissive mirror of the file
// ---------------------------------------------------------------------------

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    label: Option<String>,
    discretization: Option<RawDiscretization>,
    operator: Option<RawOperator>,
    constants: Option<ConstantsOverride>,
    rho: Option<RhoForm>,
    noise: Option<RawNoise>,
    solver: Option<RawSolver>,
    initial: Option<RawInitial>,
    initial_y: Option<RawInitial>,
    ensemble: Option<RawEnsemble>,
    verify: Option<RawVerify>,
    converge: Option<RawConverge>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    domain: Option<DomainKind>,
    n: Option<usize>,
    components: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    kind: Option<String>,
    kappa: Option<f64>,
    viscosity: Option<f64>,
    advection: Option<f64>,
    p: Option<f64>,
    reaction: Option<CubicReaction>,
    forcing: Option<Vec<ModeEntry>>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    wiener_modes: Option<usize>,
    b_scale: Option<f64>,
    b_mode: Option<BMode>,
    f_scale: Option<f64>,
    h_profile: Option<HProfile>,
    g_map: Option<GMap>,
    large_rate: Option<f64>,
    large_marks: Option<LargeMarkFamily>,
    mark_dim: Option<usize>,
    small_atoms: Option<Vec<SmallAtom>>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    dt: Option<f64>,
    t_final: Option<f64>,
    scheme: Option<Scheme>,
    blowup_radius: Option<f64>,
    record_stride: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    entries: Option<Vec<ModeEntry>>,
    radius: Option<f64>,
    decay: Option<f64>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    paths: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    triples: Option<usize>,
    s_points: Option<usize>,
    pairs: Option<usize>,
    samples: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverge {
    n_list: Option<Vec<usize>>,
    reference_n: Option<usize>,
}

fn require<T>(v: Option<T>, key: &str) -> Result<T, SpdeError> {
    v.ok_or_else(|| SpdeError::config(key, "missing required key"))
}

fn resolve_initial(raw: Option<RawInitial>, key: &str) -> Result<InitialConfig, SpdeError> {
    let Some(raw) = raw else {
        return Ok(InitialConfig::Modes { entries: Vec::new() });
    };
    let kind = raw.kind.as_deref().unwrap_or("modes");
    match kind {
        "modes" => {
            if raw.radius.is_some() || raw.decay.is_some() {
                return Err(SpdeError::config(
                    format!("{key}.radius"),
                    "only meaningful for kind = \"random\"",
                ));
            }
            Ok(InitialConfig::Modes {
                entries: raw.entries.unwrap_or_default(),
            })
        }
        "random" => {
            if raw.entries.is_some() {
                return Err(SpdeError::config(
                    format!("{key}.entries"),
                    "only meaningful for kind = \"modes\"",
                ));
            }
            Ok(InitialConfig::Random {
                radius: raw.radius.unwrap_or(1.0),
                decay: raw.decay.unwrap_or(1.0),
            })
        }
        other => Err(SpdeError::config(
            format!("{key}.kind"),
            format!("unknown initial kind `{other}` (expected `modes` or `random`)"),
        )),
    }
}

impl ExperimentConfig {
    /// Parse and resolve a TOML experiment description.
    pub fn parse(text: &str) -> Result<ExperimentConfig, SpdeError> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| SpdeError::config("<toml>", e.to_string()))?;

        let rd = require(raw.discretization, "discretization")?;
        let domain = require(rd.domain, "discretization.domain")?;
        let n = require(rd.n, "discretization.n")?;
        let components = rd.components.unwrap_or(match domain {
            DomainKind::IntervalDirichlet => 1,
            DomainKind::Torus2d => 2,
        });
        let discretization = DiscretizationConfig {
            domain,
            n,
            components,
        };

        let ro = require(raw.operator, "operator")?;
        let kind = require(ro.kind, "operator.kind")?;
        let operator = match kind.as_str() {
            "zero_drift" => OperatorConfig::ZeroDrift,
            "heat" => OperatorConfig::Heat {
                kappa: require(ro.kappa, "operator.kappa")?,
            },
            "burgers" => OperatorConfig::Burgers {
                viscosity: require(ro.viscosity, "operator.viscosity")?,
                advection: ro.advection.unwrap_or(0.0),
                reaction: ro.reaction,
            },
            "p_laplace" => OperatorConfig::PLaplace {
                p: require(ro.p, "operator.p")?,
                reaction: ro.reaction,
            },
            "ns2d" => OperatorConfig::Ns2d {
                viscosity: require(ro.viscosity, "operator.viscosity")?,
                forcing: ro.forcing.unwrap_or_default(),
            },
            other => {
                return Err(SpdeError::config(
                    "operator.kind",
                    format!(
                        "unknown operator `{other}` (expected zero_drift, heat, burgers, \
                         p_laplace, or ns2d)"
                    ),
                ))
            }
        };

        let noise = match raw.noise {
            None => NoiseConfig::default(),
            Some(rn) => {
                let d = NoiseConfig::default();
                NoiseConfig {
                    wiener_modes: rn.wiener_modes.unwrap_or(d.wiener_modes),
                    b_scale: rn.b_scale.unwrap_or(d.b_scale),
                    b_mode: rn.b_mode.unwrap_or(d.b_mode),
                    f_scale: rn.f_scale.unwrap_or(d.f_scale),
                    h_profile: rn.h_profile.unwrap_or(d.h_profile),
                    g_map: rn.g_map.unwrap_or(d.g_map),
                    large_rate: rn.large_rate.unwrap_or(d.large_rate),
                    large_marks: rn.large_marks.unwrap_or(d.large_marks),
                    mark_dim: rn.mark_dim.unwrap_or(d.mark_dim),
                    small_atoms: rn.small_atoms.unwrap_or_default(),
                }
            }
        };

        let rs = require(raw.solver, "solver")?;
        let solver = SolverConfig {
            dt: require(rs.dt, "solver.dt")?,
            t_final: require(rs.t_final, "solver.t_final")?,
            scheme: rs.scheme.unwrap_or(Scheme::SemiImplicit),
            blowup_radius: rs.blowup_radius.unwrap_or(1e6),
            record_stride: rs.record_stride.unwrap_or(1),
        };

        let initial = resolve_initial(raw.initial, "initial")?;
        let initial_y = match raw.initial_y {
            None => None,
            some => Some(resolve_initial(some, "initial_y")?),
        };

        let verify_defaults = VerifyPlan::default();
        let verify = match raw.verify {
            None => verify_defaults,
            Some(rv) => VerifyPlan {
                triples: rv.triples.unwrap_or(verify_defaults.triples),
                s_points: rv.s_points.unwrap_or(verify_defaults.s_points),
                pairs: rv.pairs.unwrap_or(verify_defaults.pairs),
                samples: rv.samples.unwrap_or(verify_defaults.samples),
            },
        };

        let converge = match raw.converge {
            None => ConvergeConfig::default(),
            Some(rc) => ConvergeConfig {
                n_list: rc.n_list.unwrap_or_default(),
                reference_n: rc.reference_n,
            },
        };

        let config = ExperimentConfig {
            label: raw.label.unwrap_or_else(|| "experiment".to_string()),
            discretization,
            solver,
            ensemble: EnsembleConfig {
                paths: raw.ensemble.and_then(|e| e.paths).unwrap_or(256),
            },
            verify,
            converge,
            operator,
            constants: raw.constants.unwrap_or_default(),
            rho: raw.rho,
            noise,
            initial,
            initial_y,
        };
        // surface structural problems (admissibility gate, bad exponents, …)
        // at load time rather than at first use
        config.build()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, SpdeError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpdeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical TOML echo of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("resolved config serializes")
    }

    /// Build at the configured resolution.
    pub fn build(&self) -> Result<Experiment, SpdeError> {
        self.build_at(self.discretization.n)
    }

    /// Build with the spatial resolution replaced by `n` (refinement studies
    /// re-enter here per resolution; mode-addressed states stay the same
    /// functions).
    pub fn build_at(&self, n: usize) -> Result<Experiment, SpdeError> {
        let disc = build_discretization(
            self.discretization.domain,
            n,
            self.discretization.components,
        )?;

        let noise_spec = LevyNoiseSpec {
            wiener_modes: self.noise.wiener_modes,
            small_atoms: self.noise.small_atoms.clone(),
            large_rate: self.noise.large_rate,
            large_marks: self.noise.large_marks.clone(),
            mark_dim: self.noise.mark_dim,
        };
        noise_spec.validate()?;
        let maps = lipschitz_noise_maps(
            &disc,
            &noise_spec,
            self.noise.b_scale,
            self.noise.b_mode,
            self.noise.f_scale,
            self.noise.h_profile,
            self.noise.g_map.clone(),
        )?;

        let mut suite = match &self.operator {
            OperatorConfig::ZeroDrift => zero_drift_suite(&disc, maps)?,
            OperatorConfig::Heat { kappa } => heat_suite(&disc, *kappa, maps)?,
            OperatorConfig::Burgers {
                viscosity,
                advection,
                reaction,
            } => {
                let adv = if *advection == 0.0 {
                    AdvectionFn::Zero
                } else {
                    AdvectionFn::LinearScaled { a: *advection }
                };
                burgers_suite(&disc, *viscosity, adv, *reaction, maps)?
            }
            OperatorConfig::PLaplace { p, reaction } => {
                p_laplace_suite(&disc, *p, *reaction, maps)?
            }
            OperatorConfig::Ns2d { viscosity, forcing } => {
                let f = if forcing.is_empty() {
                    None
                } else {
                    Some(build_mode_state(&disc, forcing, "operator.forcing")?)
                };
                ns2d_suite(&disc, *viscosity, f, maps)?
            }
        };

        let o = &self.constants;
        if let Some(theta) = o.theta {
            suite.constants.theta = theta;
        }
        if let Some(gamma) = o.gamma {
            suite.constants.gamma = gamma;
        }
        if let Some(f_t) = o.f_t {
            suite.constants.f_t = f_t;
        }
        if let Some(c) = o.c_h2 {
            suite.constants.c_h2 = c;
        }
        if let Some(c) = o.c_h3 {
            suite.constants.c_h3 = c;
        }
        if let Some(c) = o.c_h4 {
            suite.constants.c_h4 = c;
        }
        if let Some(c) = o.c_c5 {
            suite.constants.c_c5 = c;
        }
        if let Some(beta) = o.beta {
            suite.constants.beta = beta;
        }
        if let Some(rho) = self.rho {
            suite.rho = rho;
        }
        suite.constants.validate()?;

        self.solver.validate()?;

        let divergence_free = self.discretization.domain == DomainKind::Torus2d;
        let initial = resolve_law(&disc, &self.initial, divergence_free, "initial")?;
        let initial_y = match &self.initial_y {
            None => None,
            Some(cfg) => Some(resolve_law(&disc, cfg, divergence_free, "initial_y")?),
        };

        Ok(Experiment {
            disc,
            noise_spec,
            suite,
            solver: self.solver,
            initial,
            initial_y,
            ensemble_paths: self.ensemble.paths,
            verify: self.verify,
            converge: self.converge.clone(),
            label: self.label.clone(),
        })
    }
}

fn resolve_law(
    disc: &SpatialDiscretization,
    cfg: &InitialConfig,
    divergence_free: bool,
    key: &str,
) -> Result<InitialLaw, SpdeError> {
    match cfg {
        InitialConfig::Modes { entries } => {
            let mut v = build_mode_state(disc, entries, key)?;
            if divergence_free && norm_h(disc, &v) > 0.0 {
                v = leray_project(disc, &v)?;
            }
            Ok(InitialLaw::Fixed(v))
        }
        InitialConfig::Random { radius, decay } => Ok(InitialLaw::Random(SampleSpec {
            radius: *radius,
            decay: *decay,
            divergence_free,
        })),
    }
}

/// Map a frequency-addressed mode list to a coefficient vector at the given
/// resolution.
fn build_mode_state(
    disc: &SpatialDiscretization,
    entries: &[ModeEntry],
    key: &str,
) -> Result<StateVector, SpdeError> {
    let mut v = StateVector::zeros(disc);
    for (i, e) in entries.iter().enumerate() {
        let at = |field: &str| format!("{key}[{i}].{field}");
        if e.component >= disc.components {
            return Err(SpdeError::config(
                at("component"),
                format!(
                    "component {} out of range (discretization has {})",
                    e.component, disc.components
                ),
            ));
        }
        let flat = match disc.domain {
            DomainKind::IntervalDirichlet => {
                if e.ky != 0 {
                    return Err(SpdeError::config(
                        at("ky"),
                        "interval modes have a single frequency; set ky = 0",
                    ));
                }
                if e.kx < 1 || e.kx as usize > disc.n {
                    return Err(SpdeError::config(
                        at("kx"),
                        format!("sine frequency must lie in 1..={}, got {}", disc.n, e.kx),
                    ));
                }
                e.component * disc.per_component_dim() + (e.kx as usize - 1)
            }
            DomainKind::Torus2d => {
                let ix = torus_axis_index(disc.n, e.kx).ok_or_else(|| {
                    SpdeError::config(
                        at("kx"),
                        format!("frequency {} not representable at n = {}", e.kx, disc.n),
                    )
                })?;
                let iy = torus_axis_index(disc.n, e.ky).ok_or_else(|| {
                    SpdeError::config(
                        at("ky"),
                        format!("frequency {} not representable at n = {}", e.ky, disc.n),
                    )
                })?;
                e.component * disc.per_component_dim() + ix * disc.n + iy
            }
        };
        v.coeffs[flat] += e.amplitude;
    }
    Ok(v)
}

/// Axis index of a signed frequency in the torus factor basis
/// (`0 → const`, `k → cos(k·)`, `−k → sin(k·)`), if representable at `n`.
fn torus_axis_index(n: usize, k: i64) -> Option<usize> {
    let (kc, ks) = crate::spaces::torus::axis_split(n);
    if k == 0 {
        Some(0)
    } else if k > 0 {
        let k = k as usize;
        (k <= kc).then_some(k)
    } else {
        let k = (-k) as usize;
        (k <= ks).then_some(kc + k)
    }
}
