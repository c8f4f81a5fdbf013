#![allow(dead_code)]

use cvmono::fuzz::{build_from_recipe, Layer, Recipe};
use cvmono::GaussianState;
use proptest::prelude::*;

fn pair(n: usize) -> impl Strategy<Value = (usize, usize)> {
    (0..n, 1..n).prop_map(move |(i, k)| (i, (i + k) % n))
}

pub fn layer(n: usize) -> impl Strategy<Value = Layer> {
    prop_oneof![
        (pair(n), -2.0..2.0f64).prop_map(|((i, j), r)| Layer::Squeeze { i, j, r }),
        (pair(n), 0.0..=1.0f64).prop_map(|((i, j), eta)| Layer::BeamSplitter { i, j, eta }),
        (0..n, 0.0..std::f64::consts::TAU).prop_map(|(mode, theta)| Layer::Phase { mode, theta }),
        (0..n, 0.1..=1.0f64).prop_map(|(mode, eta)| Layer::Loss { mode, eta }),
    ]
}

pub fn recipe(n: usize, max_depth: usize) -> impl Strategy<Value = Recipe> {
    (
        prop::collection::vec(0.0..3.0f64, n),
        prop::collection::vec(layer(n), 0..=max_depth),
    )
        .prop_map(|(occupations, layers)| {
            let mut r = vec![Layer::Thermal { occupations }];
            r.extend(layers);
            r
        })
}

pub fn state(n: usize, max_depth: usize) -> impl Strategy<Value = GaussianState> {
    recipe(n, max_depth).prop_map(|r| build_from_recipe(&r).expect("generated recipes are valid"))
}

pub fn max_abs_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    (a.cov() - b.cov()).abs().max().max((a.mean() - b.mean()).abs().max())
}
