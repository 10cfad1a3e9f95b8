#![allow(dead_code)]

use std::collections::BTreeSet;

use permkit::perm::is_subgroup;
use permkit::{MethodSpec, Perm, PermDistribution, RngStream, Statistic};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn p(v: &[usize]) -> Perm {
    Perm::from_one_based(v.iter().copied()).unwrap()
}

pub fn ex1_set() -> Vec<Perm> {
    vec![Perm::identity(4), p(&[3, 4, 1, 2]), p(&[4, 3, 2, 1])]
}

pub const EX1_VALUES: [f64; 4] = [1.0, 2.0, -0.5, 0.3];

pub fn random_perm(n: usize, rng: &mut RngStream) -> Perm {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    Perm::from_zero_based(v).unwrap()
}

/// `k` distinct random permutations of `n`.
pub fn random_set(n: usize, k: usize, rng: &mut RngStream) -> Vec<Perm> {
    let mut seen = BTreeSet::new();
    while seen.len() < k {
        seen.insert(random_perm(n, rng));
    }
    let mut out: Vec<Perm> = seen.into_iter().collect();
    out.shuffle(rng);
    out
}

/// Values with ties about a third of the time.
pub fn random_values(n: usize, rng: &mut RngStream) -> Vec<f64> {
    if rng.random_bool(0.3) {
        (0..n).map(|_| rng.random_range(-2..=2) as f64).collect()
    } else {
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

pub fn random_weights(k: usize, rng: &mut RngStream) -> Vec<f64> {
    if rng.random_bool(0.5) {
        (0..k).map(|_| rng.random_range(1..=5) as f64).collect()
    } else {
        (0..k).map(|_| rng.random_range(0.05..1.0)).collect()
    }
}

pub fn random_statistic(n: usize, values: &[f64], rng: &mut RngStream) -> Statistic {
    let spread = values.iter().any(|&v| v != values[0]);
    match rng.random_range(0..3) {
        1 => {
            let mut mask = vec![false; n];
            let k = rng.random_range(1..n);
            for i in rand::seq::index::sample(rng, n, k) {
                mask[i] = true;
            }
            Statistic::diff_means(mask).unwrap()
        }
        2 if spread => {
            let y: Vec<f64> = (0..n)
                .map(|i| i as f64 + rng.random_range(0.0..0.5))
                .collect();
            Statistic::abs_corr().with_covariate(y)
        }
        _ => Statistic::sum_first_k(rng.random_range(1..n)),
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub values: Vec<f64>,
    pub stat: Statistic,
    pub set: Vec<Perm>,
    pub q: PermDistribution,
    pub m: usize,
}

impl SweepConfig {
    pub fn random(rng: &mut RngStream) -> Self {
        let n = rng.random_range(3..=5);
        let values = random_values(n, rng);
        let stat = random_statistic(n, &values, rng);
        let k = rng.random_range(2..=6);
        let set = random_set(n, k, rng);
        let q = PermDistribution::new(set.iter().cloned().zip(random_weights(k, rng)).collect())
            .unwrap();
        let m = rng.random_range(1..=3);
        SweepConfig {
            values,
            stat,
            set,
            q,
            m,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_subgroup(&self) -> bool {
        is_subgroup(&self.set)
    }

    /// `(label, method, factor)` for every construction with a guarantee.
    pub fn guaranteed_methods(&self) -> Vec<(&'static str, MethodSpec, u32)> {
        let uniform = PermDistribution::uniform_on(&self.set).unwrap();
        let m_distinct = self.m.min(self.set.len() - 1);
        let base: Vec<Perm> = (0..=self.m)
            .map(|i| self.set[i % self.set.len()].clone())
            .collect();
        vec![
            (
                "exhaustive-q",
                MethodSpec::Exhaustive { q: self.q.clone() },
                1,
            ),
            (
                "sampled-iid",
                MethodSpec::SampledIid {
                    source: self.q.clone().into(),
                    m: self.m,
                },
                1,
            ),
            (
                "sampled-noreplace",
                MethodSpec::SampledNoReplace {
                    source: uniform.into(),
                    m: m_distinct,
                },
                1,
            ),
            ("exchangeable", MethodSpec::Exchangeable { base }, 1),
            (
                "randomization",
                MethodSpec::Randomization {
                    set: self.set.clone(),
                },
                1,
            ),
            (
                "bc s=1",
                MethodSpec::BesagClifford {
                    q: self.q.clone(),
                    m: self.m,
                    steps: 1,
                },
                1,
            ),
            (
                "bc s=2",
                MethodSpec::BesagClifford {
                    q: self.q.clone(),
                    m: self.m,
                    steps: 2,
                },
                1,
            ),
            (
                "pbar-exhaustive",
                MethodSpec::PbarExhaustive { q: self.q.clone() },
                2,
            ),
            (
                "pbar-sampled",
                MethodSpec::PbarSampled {
                    source: self.q.clone().into(),
                    m: self.m,
                },
                2,
            ),
        ]
    }
}
