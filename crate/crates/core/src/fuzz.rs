//! Random physical three-mode states and a search for monogamy violations.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::network::CircuitParams;
use crate::quantifiers::{check_monogamy, QuantifierReport};

/// Residuals below `-RESIDUAL_TOL` count as violations.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Allowed excess of collective over pair steering.
pub const DOMINANCE_TOL: f64 = 1e-12;
/// Thresholds grow to `ROUNDING_SCALE * max|cov|` for strongly squeezed
/// states, where cancellation in conditional variances dominates.
pub const ROUNDING_SCALE: f64 = 64.0 * f64::EPSILON;
/// `|r4|` below this counts as saturation.
pub const SATURATION_TOL: f64 = 1e-6;

/// One step of a state recipe. A recipe starts with `Thermal`, which fixes
/// the number of modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Layer {
    Thermal { occupations: Vec<f64> },
    Squeeze { i: usize, j: usize, r: f64 },
    BeamSplitter { i: usize, j: usize, eta: f64 },
    Phase { mode: usize, theta: f64 },
    Loss { mode: usize, eta: f64 },
}

pub type Recipe = Vec<Layer>;

pub fn build_from_recipe(recipe: &[Layer]) -> Result<GaussianState> {
    let (first, rest) = recipe
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty recipe".into()))?;
    let mut state = match first {
        Layer::Thermal { occupations } => GaussianState::thermal(occupations)?,
        _ => {
            return Err(Error::InvalidParameter(
                "a recipe must start with a thermal layer".into(),
            ))
        }
    };
    for layer in rest {
        state = match *layer {
            Layer::Thermal { .. } => {
                return Err(Error::InvalidParameter("thermal layer after the first".into()))
            }
            Layer::Squeeze { i, j, r } => state.apply_two_mode_squeezer(i, j, r)?,
            Layer::BeamSplitter { i, j, eta } => state.apply_beamsplitter(i, j, eta)?,
            Layer::Phase { mode, theta } => state.apply_phase_rotation(mode, theta)?,
            Layer::Loss { mode, eta } => state.apply_loss(mode, eta)?,
        };
    }
    Ok(state)
}

fn distinct_pair(rng: &mut ChaCha8Rng, num_modes: usize) -> (usize, usize) {
    let i = rng.random_range(0..num_modes);
    let j = (i + rng.random_range(1..num_modes)) % num_modes;
    (i, j)
}

/// Thermal product state with `Exp(1)` occupations followed by `depth`
/// random squeezer, beam-splitter, phase and loss layers.
pub fn random_recipe(num_modes: usize, seed: u64, depth: usize) -> Result<Recipe> {
    if num_modes == 0 {
        return Err(Error::EmptyRegister);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let occupations = (0..num_modes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let mut recipe = vec![Layer::Thermal { occupations }];
    // Single-mode registers only admit local layers.
    let first_op = if num_modes > 1 { 0 } else { 2 };
    for _ in 0..depth {
        let layer = match rng.random_range(first_op..4) {
            0 => {
                let (i, j) = distinct_pair(&mut rng, num_modes);
                Layer::Squeeze {
                    i,
                    j,
                    r: rng.random_range(-2.0..=2.0),
                }
            }
            1 => {
                let (i, j) = distinct_pair(&mut rng, num_modes);
                Layer::BeamSplitter {
                    i,
                    j,
                    eta: rng.random_range(0.0..=1.0),
                }
            }
            2 => Layer::Phase {
                mode: rng.random_range(0..num_modes),
                theta: rng.random_range(0.0..TAU),
            },
            _ => Layer::Loss {
                mode: rng.random_range(0..num_modes),
                eta: rng.random_range(0.1..=1.0),
            },
        };
        recipe.push(layer);
    }
    Ok(recipe)
}

pub fn random_physical_state(num_modes: usize, seed: u64, depth: usize) -> Result<GaussianState> {
    build_from_recipe(&random_recipe(num_modes, seed, depth)?)
}

/// Recipe reproducing the tripartite circuit, modes (B, A, C).
pub fn circuit_recipe(params: &CircuitParams) -> Result<Recipe> {
    params.validate()?;
    Ok(vec![
        Layer::Thermal {
            occupations: vec![params.n_b, params.n_f, 0.0],
        },
        Layer::Squeeze {
            i: 0,
            j: 1,
            r: params.r,
        },
        Layer::Loss {
            mode: 0,
            eta: params.eta_b,
        },
        Layer::BeamSplitter {
            i: 1,
            j: 2,
            eta: params.eta0,
        },
        Layer::Loss {
            mode: 1,
            eta: params.eta_a,
        },
        Layer::Loss {
            mode: 2,
            eta: params.eta_c,
        },
    ])
}

/// Seed of trial `index` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined counter
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cyclic assignments of the shared role B over three modes.
pub const ROLES: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];

/// The worst value seen for one monitored quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub name: String,
    pub value: f64,
    pub trial: usize,
    /// Modes playing (B, A, C).
    pub role: [usize; 3],
    pub recipe: Recipe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub trials: usize,
    /// Minimum of each residual r1, r2, r3_product, r3_sum, r4.
    pub min_residuals: Vec<Extreme>,
    /// Minimum of `S_BA S_BC - 1`.
    pub min_steering_monogamy: Extreme,
    /// Minimum of `min(S_BA, S_BC) - S_coll`.
    pub min_collective_dominance: Extreme,
    /// Trials where some role has `|r4| < SATURATION_TOL`.
    pub saturation_count: usize,
    /// Trials where some role has collective steering, `S_coll < 1`.
    pub steering_count: usize,
    pub violations: Vec<Extreme>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn min_residual(&self) -> f64 {
        self.min_residuals.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }
}

struct TrialOutcome {
    scale: f64,
    reports: Vec<([usize; 3], QuantifierReport)>,
}

fn monitored(report: &QuantifierReport) -> [(&'static str, f64, f64); 7] {
    let [r1, r2, r3p, r3s, r4] = report.residuals();
    [
        (r1.0, r1.1, RESIDUAL_TOL),
        (r2.0, r2.1, RESIDUAL_TOL),
        (r3p.0, r3p.1, RESIDUAL_TOL),
        (r3s.0, r3s.1, RESIDUAL_TOL),
        (r4.0, r4.1, RESIDUAL_TOL),
        ("steering_monogamy", report.steering_monogamy, RESIDUAL_TOL),
        ("collective_dominance", report.collective_dominance, DOMINANCE_TOL),
    ]
}

/// Checks every recipe under all three role assignments. Trials run in
/// parallel; results are merged in index order.
pub fn run_recipes(recipes: &[Recipe]) -> Result<FuzzReport> {
    if recipes.is_empty() {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let outcomes = recipes
        .par_iter()
        .map(|recipe| {
            let state = build_from_recipe(recipe)?;
            if state.num_modes() != 3 {
                return Err(Error::DimensionMismatch(format!(
                    "fuzz recipes need 3 modes, got {}",
                    state.num_modes()
                )));
            }
            let reports = ROLES
                .iter()
                .map(|&[b, a, c]| Ok(([b, a, c], check_monogamy(&state, b, a, c)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialOutcome {
                scale: ROUNDING_SCALE * state.cov().amax(),
                reports,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut extremes: Vec<Option<Extreme>> = vec![None; 7];
    let mut violations = Vec::new();
    let mut saturation_count = 0;
    let mut steering_count = 0;
    for (trial, outcome) in outcomes.iter().enumerate() {
        let mut saturated = false;
        let mut steering = false;
        for (role, report) in &outcome.reports {
            saturated |= report.residual_r4.abs() < SATURATION_TOL;
            steering |= report.s_collective < 1.0;
            for (slot, (name, value, tol)) in extremes.iter_mut().zip(monitored(report)) {
                let record = || Extreme {
                    name: name.to_string(),
                    value,
                    trial,
                    role: *role,
                    recipe: recipes[trial].clone(),
                };
                if slot.as_ref().is_none_or(|e| value < e.value) {
                    *slot = Some(record());
                }
                if value < -tol.max(outcome.scale) || !value.is_finite() {
                    violations.push(record());
                }
            }
        }
        saturation_count += usize::from(saturated);
        steering_count += usize::from(steering);
    }
    let mut extremes = extremes.into_iter().map(|e| e.expect("at least one trial"));
    let min_residuals = extremes.by_ref().take(5).collect();
    Ok(FuzzReport {
        trials: recipes.len(),
        min_residuals,
        min_steering_monogamy: extremes.next().expect("seven monitored quantities"),
        min_collective_dominance: extremes.next().expect("seven monitored quantities"),
        saturation_count,
        steering_count,
        violations,
    })
}

/// Random three-mode trials of the given depth, reproducible from `seed`.
pub fn fuzz_monogamy(trials: usize, seed: u64, depth: usize) -> Result<FuzzReport> {
    let recipes = (0..trials as u64)
        .map(|t| random_recipe(3, trial_seed(seed, t), depth))
        .collect::<Result<Vec<_>>>()?;
    run_recipes(&recipes)
}
