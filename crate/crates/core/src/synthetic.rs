//! Seeded generators for data with a known factor structure.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::inventory::Trait;
use crate::scoring::{MatrixOrientation, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorGroup {
    pub trait_: Trait,
    pub items: usize,
    /// Loading of every item in the group on its own factor.
    pub loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub respondents: usize,
    pub groups: Vec<FactorGroup>,
    pub noise_items: usize,
    /// Loading of each noise item on every factor.
    pub noise_loading: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    /// 250 respondents x 40 items: four orthogonal factors of decreasing
    /// strength plus one weak item that belongs to none of them.
    fn default() -> Self {
        PlantedSpec {
            respondents: 250,
            groups: vec![
                FactorGroup { trait_: Trait::Openness, items: 14, loading: 0.95 },
                FactorGroup { trait_: Trait::Conscientiousness, items: 11, loading: 0.9 },
                FactorGroup { trait_: Trait::Extraversion, items: 8, loading: 0.85 },
                FactorGroup { trait_: Trait::Agreeableness, items: 6, loading: 0.5 },
            ],
            noise_items: 1,
            noise_loading: 0.2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedData {
    pub matrix: ScoreMatrix,
    pub item_traits: BTreeMap<String, Trait>,
    pub noise_items: Vec<String>,
    /// Items x factors, in group order.
    pub planted_loadings: DMatrix<f64>,
}

impl PlantedData {
    /// Factor column planted for a trait (groups are in first-appearance order).
    pub fn factor_of(&self, t: Trait) -> Option<usize> {
        let mut order: Vec<Trait> = Vec::new();
        for t2 in self.matrix.col_labels.iter().filter_map(|c| self.item_traits.get(c)) {
            if !order.contains(t2) {
                order.push(*t2);
            }
        }
        order.iter().position(|&x| x == t)
    }
}

/// Respondents x items draws of `item = loadings . factors + sqrt(1 - communality) * noise`
/// with independent standard normal factors and noise. Communalities above 1 are treated as 1.
pub fn sample_from_loadings(loadings: &DMatrix<f64>, respondents: usize, seed: u64) -> DMatrix<f64> {
    let (n_items, k) = loadings.shape();
    let uniqueness: Vec<f64> = loadings
        .row_iter()
        .map(|r| (1.0 - r.norm_squared()).max(0.0).sqrt())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = DMatrix::<f64>::zeros(respondents, n_items);
    for i in 0..respondents {
        let factors: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        for j in 0..n_items {
            let e: f64 = StandardNormal.sample(&mut rng);
            let common: f64 = (0..k).map(|f| loadings[(j, f)] * factors[f]).sum();
            values[(i, j)] = common + uniqueness[j] * e;
        }
    }
    values
}

pub fn planted_factor_data(spec: &PlantedSpec) -> PlantedData {
    let k = spec.groups.len();
    let n_items = spec.groups.iter().map(|g| g.items).sum::<usize>() + spec.noise_items;
    let mut planted = DMatrix::<f64>::zeros(n_items, k);
    let mut labels = Vec::with_capacity(n_items);
    let mut item_traits = BTreeMap::new();
    let mut row = 0;
    for (f, g) in spec.groups.iter().enumerate() {
        for _ in 0..g.items {
            planted[(row, f)] = g.loading;
            let label = format!("V{}", row + 1);
            item_traits.insert(label.clone(), g.trait_);
            labels.push(label);
            row += 1;
        }
    }
    let mut noise_items = Vec::new();
    for _ in 0..spec.noise_items {
        for f in 0..k {
            planted[(row, f)] = spec.noise_loading;
        }
        let label = format!("V{}", row + 1);
        noise_items.push(label.clone());
        labels.push(label);
        row += 1;
    }

    let values = sample_from_loadings(&planted, spec.respondents, spec.seed);
    let matrix = ScoreMatrix::new(
        (1..=spec.respondents).map(|i| format!("P{i}")).collect(),
        labels,
        values,
        MatrixOrientation::RespondentsByItems,
    )
    .expect("labels match the generated shape");
    PlantedData {
        matrix,
        item_traits,
        noise_items,
        planted_loadings: planted,
    }
}
