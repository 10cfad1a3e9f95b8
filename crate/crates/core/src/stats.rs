//! Test statistics `T`.
//!
//! A [`Statistic`] is a pure function of the data vector. Statistics that
//! compare against fixed side information (a covariate `Y`, a group mask)
//! carry it themselves; only `X` is ever permuted.
//!
//! Larger values are evidence against the null. Engines compare permuted
//! and observed values with plain `>=`, so ties count toward the p-value.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&[f64], Option<&[f64]>) -> Result<f64> + Send + Sync;

#[derive(Clone)]
pub struct Statistic {
    name: String,
    needs_covariate: bool,
    covariate: Option<Arc<[f64]>>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Statistic")
            .field("name", &self.name)
            .field("needs_covariate", &self.needs_covariate)
            .field("covariate_len", &self.covariate.as_ref().map(|c| c.len()))
            .finish()
    }
}

impl Statistic {
    /// A user statistic. `eval` must be deterministic.
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Statistic {
            name: name.into(),
            needs_covariate: false,
            covariate: None,
            eval: Arc::new(move |x, _| f(x)),
        }
    }

    /// A user statistic of `(X, Y)` where `Y` is fixed side information,
    /// supplied later through [`with_covariate`](Self::with_covariate).
    pub fn with_covariate_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Statistic {
            name: name.into(),
            needs_covariate: true,
            covariate: None,
            eval: Arc::new(move |x, y| f(x, y.expect("covariate checked by Statistic::eval"))),
        }
    }

    /// `X₁ + … + X_k`.
    pub fn sum_first_k(k: usize) -> Self {
        Self::new(format!("sum-first-k:{k}"), move |x| {
            if k > x.len() {
                return Err(Error::Dimension {
                    expected: k,
                    got: x.len(),
                });
            }
            Ok(x[..k].iter().sum())
        })
    }

    /// `|Corr(X, Y)|`, Pearson.
    pub fn abs_corr() -> Self {
        Self::with_covariate_fn("abs-corr", |x, y| {
            let n = x.len() as f64;
            let mx = x.iter().sum::<f64>() / n;
            let my = y.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for (a, b) in x.iter().zip(y) {
                let (da, db) = (a - mx, b - my);
                sxy += da * db;
                sxx += da * da;
                syy += db * db;
            }
            if sxx == 0.0 || syy == 0.0 {
                return Err(Error::DegenerateStatistic {
                    name: "abs-corr".into(),
                    msg: "zero variance".into(),
                });
            }
            Ok((sxy / (sxx * syy).sqrt()).abs().min(1.0))
        })
    }

    /// Mean of `X` over the masked positions minus the mean over the rest.
    pub fn diff_means(mask: Vec<bool>) -> Result<Self> {
        let treated = mask.iter().filter(|&&m| m).count();
        if treated == 0 || treated == mask.len() {
            return Err(Error::domain(
                "group mask needs at least one true and one false entry",
            ));
        }
        let control = mask.len() - treated;
        Ok(Self::new("diff-means", move |x| {
            Error::check_len(mask.len(), x.len())?;
            let (mut a, mut b) = (0.0, 0.0);
            for (v, &m) in x.iter().zip(&mask) {
                if m {
                    a += v;
                } else {
                    b += v;
                }
            }
            Ok(a / treated as f64 - b / control as f64)
        }))
    }

    pub fn with_covariate(mut self, y: Vec<f64>) -> Self {
        self.covariate = Some(y.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn needs_covariate(&self) -> bool {
        self.needs_covariate
    }

    pub fn covariate(&self) -> Option<&[f64]> {
        self.covariate.as_deref()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let y = match (&self.covariate, self.needs_covariate) {
            (Some(y), true) => {
                Error::check_len(y.len(), x.len())?;
                Some(&y[..])
            }
            (None, true) => {
                return Err(Error::domain(format!(
                    "statistic `{}` needs a covariate vector",
                    self.name
                )))
            }
            (_, false) => None,
        };
        let t = (self.eval)(x, y)?;
        if t.is_nan() {
            return Err(Error::NonFinite {
                name: self.name.clone(),
            });
        }
        Ok(t)
    }
}
