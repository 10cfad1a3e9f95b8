//! Monte Carlo type-I error curves.
//!
//! Each replicate draws an i.i.d. data vector (an exchangeable null) and runs
//! the method once. Replicate `r` uses [`RngStream`] `(seed, r)` for both the
//! data and the method's own draws, so a curve depends only on the seed.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::RngStream;
use crate::engine::{Method, MethodSpec, TestReport};
use crate::error::{Error, Result};
use crate::perm::DataVec;
use crate::stats::Statistic;

/// Rejection rule slack for levels like `1/3` that are not exact in `f64`.
pub const ALPHA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSampler {
    /// Standard normal coordinates.
    Gaussian,
    /// Uniform on `[0, 1)`.
    Uniform,
}

impl DataSampler {
    pub fn draw(self, n: usize, rng: &mut RngStream) -> DataVec {
        let v = match self {
            DataSampler::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            DataSampler::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        };
        DataVec::new(v)
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub method: MethodSpec,
    pub stat: Statistic,
    pub sampler: DataSampler,
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub alpha: f64,
    pub rate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub factor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationCurve {
    pub method: Method,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,rate,stderr,bound,factor\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.alpha, r.rate, r.stderr, r.bound, r.factor
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn rate_at(&self, alpha: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.alpha == alpha).map(|r| r.rate)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].rate <= w[1].rate)
    }

    /// Rows whose rate exceeds the guaranteed bound.
    pub fn above_bound(&self) -> impl Iterator<Item = &CalibrationRow> {
        self.rows.iter().filter(|r| r.rate > r.bound)
    }
}

/// The quantity compared against `α`: the p-value, or `1/E` for e-values.
pub fn rejection_score(r: &TestReport) -> f64 {
    r.p_value.or(r.inverse_e_value).unwrap_or(f64::INFINITY)
}

pub fn mc_calibrate(cfg: &CalibrationConfig) -> Result<CalibrationCurve> {
    if cfg.reps == 0 {
        return Err(Error::domain("calibration needs reps >= 1"));
    }
    let mut alphas = cfg.alphas.clone();
    if alphas.is_empty() {
        return Err(Error::domain("empty alpha grid"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::domain(format!("alpha {a} is outside (0, 1]")));
    }
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let n = cfg.method.n();
    let scores = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(cfg.seed, r);
            let x = cfg.sampler.draw(n, &mut rng);
            cfg.method
                .run(&x, &cfg.stat, &mut rng)
                .map(|rep| rejection_score(&rep))
        })
        .collect::<Result<Vec<f64>>>()?;

    let factor = cfg.method.validity_factor().unwrap_or(1);
    let reps = cfg.reps as f64;
    let rows = alphas
        .into_iter()
        .map(|alpha| {
            let hits = scores.iter().filter(|&&p| p <= alpha + ALPHA_SLACK).count();
            let rate = hits as f64 / reps;
            CalibrationRow {
                alpha,
                rate,
                stderr: (rate * (1.0 - rate) / reps).sqrt(),
                bound: f64::from(factor) * alpha,
                factor,
            }
        })
        .collect();
    Ok(CalibrationCurve {
        method: cfg.method.method(),
        reps: cfg.reps,
        seed: cfg.seed,
        rows,
    })
}
