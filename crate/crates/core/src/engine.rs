//! Permutation-test p-values and e-values.
//!
//! Every anchored construction compares `T(x_{σ ∘ σ₀⁻¹})` against `T(x)`,
//! where `σ₀` is a random draw from the same source as the comparison
//! permutations. Drawing `σ₀` is what makes arbitrary subsets and weighted
//! distributions valid; fixing `σ₀ = Id` gives back the naive subset
//! p-value, which is only valid when the set is a subgroup.
//!
//! All functions are pure given their [`RngStream`].

use std::num::NonZeroUsize;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::dist::{PermDistribution, PermSource, RngStream};
use crate::error::{Error, Result};
use crate::mcmc;
use crate::perm::{DataVec, Perm};
use crate::stats::Statistic;

pub const NAIVE_WARNING: &str = "validity: NOT guaranteed unless S is a subgroup";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Naive,
    ExhaustiveQ,
    SampledIid,
    SampledNoreplace,
    Exchangeable,
    PbarExhaustive,
    PbarSampled,
    Evalue,
    Randomization,
    BesagClifford,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::ExhaustiveQ => "exhaustive-q",
            Method::SampledIid => "sampled-iid",
            Method::SampledNoreplace => "sampled-noreplace",
            Method::Exchangeable => "exchangeable",
            Method::PbarExhaustive => "pbar-exhaustive",
            Method::PbarSampled => "pbar-sampled",
            Method::Evalue => "evalue",
            Method::Randomization => "randomization",
            Method::BesagClifford => "besag-clifford",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replacement {
    With,
    Without,
}

/// Outcome of one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_value: Option<f64>,
    /// `1/E`, reported next to the e-value for comparison with p-values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_e_value: Option<f64>,
    pub statistic: String,
    pub statistic_value: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: Option<u64>,
    pub anchor: Option<Perm>,
    pub support_size: Option<usize>,
    /// Sum of the distribution weights as supplied, before normalization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl TestReport {
    fn new(method: Method, stat: &Statistic, n: usize, statistic_value: f64) -> Self {
        TestReport {
            method,
            p_value: None,
            e_value: None,
            inverse_e_value: None,
            statistic: stat.name().to_string(),
            statistic_value,
            n,
            m: 0,
            seed: None,
            anchor: None,
            support_size: None,
            weight_sum: None,
            steps: None,
            warning: None,
        }
    }

    /// The p-value, or the e-value for [`Method::Evalue`].
    pub fn value(&self) -> f64 {
        self.p_value
            .or(self.e_value)
            .expect("every report carries a p-value or an e-value")
    }
}

/// The tie rule shared by every construction: ties count as "at least as
/// extreme".
#[inline]
pub(crate) fn at_least(permuted: f64, observed: f64) -> bool {
    permuted >= observed
}

fn check_dims(x: &DataVec, n: usize) -> Result<()> {
    Error::check_len(n, x.len())
}

/// `T(x_{σ ∘ σ₀⁻¹})` for every `σ` in `perms`, evaluated as `(x_{σ₀⁻¹})_σ`.
fn anchored_scores<'a>(
    x: &DataVec,
    stat: &Statistic,
    anchor: &Perm,
    perms: impl IntoIterator<Item = &'a Perm>,
) -> Result<Vec<f64>> {
    let shifted = anchor.inverse().permute(x);
    perms
        .into_iter()
        .map(|s| {
            Error::check_len(shifted.len(), s.n())?;
            stat.eval(&s.permute(&shifted))
        })
        .collect()
}

/// Total raw weight of the scores at least `observed`. Summing raw weights
/// and normalizing once keeps uniform cases exact: `count / |S|`.
fn hit_weight(scores: &[f64], raw: &[f64], observed: f64) -> f64 {
    scores
        .iter()
        .zip(raw)
        .filter(|(&t, _)| at_least(t, observed))
        .map(|(_, &w)| w)
        .sum()
}

fn grid_value(count: usize, total: usize) -> f64 {
    count as f64 / total as f64
}

/// `Σ_{σ∈S} 1{T(x_σ) ≥ T(x)} / |S|`.
///
/// With `S` a subgroup (or all of `S_n`) this is the classical permutation
/// p-value. For other subsets it is not valid; it is kept as a negative
/// control and its report carries a warning.
pub fn pvalue_naive(x: &DataVec, stat: &Statistic, set: &[Perm]) -> Result<TestReport> {
    let first = set
        .first()
        .ok_or_else(|| Error::domain("naive p-value needs a nonempty permutation set"))?;
    check_dims(x, first.n())?;
    let observed = stat.eval(x)?;
    let mut count = 0;
    for s in set {
        Error::check_len(x.len(), s.n())?;
        if at_least(stat.eval(&s.permute(x))?, observed) {
            count += 1;
        }
    }
    let mut r = TestReport::new(Method::Naive, stat, x.len(), observed);
    r.p_value = Some(grid_value(count, set.len()));
    r.support_size = Some(set.len());
    r.warning = Some(NAIVE_WARNING.to_string());
    Ok(r)
}

/// `P = Σ_σ q(σ) · 1{T(x_{σ∘σ₀⁻¹}) ≥ T(x)}` with `σ₀ ~ q` drawn from `rng`.
///
/// With `q` uniform on a set `S` this is the corrected subset test; with `q`
/// uniform on a subgroup it coincides with [`pvalue_naive`] for every anchor.
pub fn pvalue_exhaustive(
    x: &DataVec,
    stat: &Statistic,
    q: &PermDistribution,
    rng: &mut RngStream,
) -> Result<TestReport> {
    let anchor = q.draw(rng).clone();
    let mut r = pvalue_exhaustive_with_anchor(x, stat, q, &anchor)?;
    r.seed = Some(rng.seed());
    Ok(r)
}

/// [`pvalue_exhaustive`] with `σ₀` supplied by the caller.
///
/// This is a replay and testing hook. A fixed anchor voids the validity
/// guarantee, which holds only on average over `σ₀ ~ q`.
pub fn pvalue_exhaustive_with_anchor(
    x: &DataVec,
    stat: &Statistic,
    q: &PermDistribution,
    anchor: &Perm,
) -> Result<TestReport> {
    check_dims(x, q.n())?;
    check_dims(x, anchor.n())?;
    let observed = stat.eval(x)?;
    let scores = anchored_scores(x, stat, anchor, q.support())?;
    let hits = hit_weight(&scores, q.raw_weights(), observed);
    let mut r = TestReport::new(Method::ExhaustiveQ, stat, x.len(), observed);
    r.p_value = Some((hits / q.raw_sum()).min(1.0));
    r.anchor = Some(anchor.clone());
    r.support_size = Some(q.len());
    r.weight_sum = Some(q.raw_sum());
    Ok(r)
}

/// `P = (1 + Σ_{m=1}^M 1{T(x_{σ_m∘σ₀⁻¹}) ≥ T(x)}) / (1 + M)`.
///
/// `With` draws `σ₀, …, σ_M` i.i.d. from `source`; `Without` draws them
/// uniformly without replacement and requires uniform weights.
pub fn pvalue_sampled(
    x: &DataVec,
    stat: &Statistic,
    source: &PermSource,
    m: usize,
    mode: Replacement,
    rng: &mut RngStream,
) -> Result<TestReport> {
    check_dims(x, source.n())?;
    if m == 0 {
        return Err(Error::domain("sampled p-values need M >= 1"));
    }
    let count = NonZeroUsize::new(m + 1).expect("m + 1 > 0");
    let (draws, method) = match mode {
        Replacement::With => (source.draw_iid(count, rng), Method::SampledIid),
        Replacement::Without => (source.draw_distinct(count, rng)?, Method::SampledNoreplace),
    };
    let mut r = exchangeable_report(x, stat, &draws, method)?;
    r.seed = Some(rng.seed());
    r.support_size = source.support_size();
    r.weight_sum = source.raw_sum();
    Ok(r)
}

/// `P = Σ_{m=0}^M 1{T(x_{σ_m∘σ₀⁻¹}) ≥ T(x)} / (1 + M)` for a caller-supplied
/// list; slot 0 plays `σ₀`. Valid when the list is an exchangeable draw.
pub fn pvalue_exchangeable(x: &DataVec, stat: &Statistic, perms: &[Perm]) -> Result<TestReport> {
    exchangeable_report(x, stat, perms, Method::Exchangeable)
}

fn exchangeable_report(
    x: &DataVec,
    stat: &Statistic,
    perms: &[Perm],
    method: Method,
) -> Result<TestReport> {
    let anchor = perms
        .first()
        .ok_or_else(|| Error::domain("need at least one permutation"))?;
    check_dims(x, anchor.n())?;
    let observed = stat.eval(x)?;
    let scores = anchored_scores(x, stat, anchor, perms)?;
    let count = scores.iter().filter(|&&t| at_least(t, observed)).count();
    let mut r = TestReport::new(method, stat, x.len(), observed);
    r.p_value = Some(grid_value(count, perms.len()));
    r.m = perms.len() - 1;
    r.anchor = Some(anchor.clone());
    Ok(r)
}

/// `P̄ = Σ_{σ,σ₀} q(σ) q(σ₀) · 1{T(x_{σ∘σ₀⁻¹}) ≥ T(x)}`: the anchored
/// p-value averaged over its anchor. Deterministic in `x`; valid up to a
/// factor of 2.
pub fn pbar_exhaustive(x: &DataVec, stat: &Statistic, q: &PermDistribution) -> Result<TestReport> {
    check_dims(x, q.n())?;
    let observed = stat.eval(x)?;
    let mut total = 0.0;
    for (anchor, w0) in q.support().iter().zip(q.raw_weights()) {
        let scores = anchored_scores(x, stat, anchor, q.support())?;
        total += w0 * hit_weight(&scores, q.raw_weights(), observed);
    }
    let mut r = TestReport::new(Method::PbarExhaustive, stat, x.len(), observed);
    r.p_value = Some((total / (q.raw_sum() * q.raw_sum())).min(1.0));
    r.support_size = Some(q.len());
    r.weight_sum = Some(q.raw_sum());
    Ok(r)
}

/// `P̄ = Σ_{m,m'} 1{T(x_{σ_m∘σ_{m'}⁻¹}) ≥ T(x)} / (1 + M)²` with
/// `σ₀, …, σ_M` i.i.d. from `source`. Valid up to a factor of 2.
pub fn pbar_sampled(
    x: &DataVec,
    stat: &Statistic,
    source: &PermSource,
    m: usize,
    rng: &mut RngStream,
) -> Result<TestReport> {
    check_dims(x, source.n())?;
    if m == 0 {
        return Err(Error::domain("sampled p-values need M >= 1"));
    }
    let draws = source.draw_iid(NonZeroUsize::new(m + 1).expect("m + 1 > 0"), rng);
    let mut r = pbar_from_draws(x, stat, &draws)?;
    r.seed = Some(rng.seed());
    r.support_size = source.support_size();
    r.weight_sum = source.raw_sum();
    Ok(r)
}

/// [`pbar_sampled`] on a fixed list of draws.
pub fn pbar_from_draws(x: &DataVec, stat: &Statistic, draws: &[Perm]) -> Result<TestReport> {
    let first = draws
        .first()
        .ok_or_else(|| Error::domain("need at least one permutation"))?;
    check_dims(x, first.n())?;
    let observed = stat.eval(x)?;
    let mut count = 0;
    for anchor in draws {
        count += anchored_scores(x, stat, anchor, draws)?
            .into_iter()
            .filter(|&t| at_least(t, observed))
            .count();
    }
    let mut r = TestReport::new(Method::PbarSampled, stat, x.len(), observed);
    r.p_value = Some(grid_value(count, draws.len() * draws.len()));
    r.m = draws.len() - 1;
    Ok(r)
}

/// `E = (M + 1) / Σ_{m=0}^M exp(T(x_{σ_m∘σ₀⁻¹}) − T(x))` for an exchangeable
/// list with `σ₀` in slot 0.
///
/// The sum is computed directly while the largest exponent stays below 700
/// and in log space beyond that, so it never overflows.
pub fn evalue(x: &DataVec, stat: &Statistic, perms: &[Perm]) -> Result<TestReport> {
    let anchor = perms
        .first()
        .ok_or_else(|| Error::domain("need at least one permutation"))?;
    check_dims(x, anchor.n())?;
    let observed = stat.eval(x)?;
    let diffs: Vec<f64> = anchored_scores(x, stat, anchor, perms)?
        .into_iter()
        .map(|t| t - observed)
        .collect();
    let (e, inv) = evalue_from_diffs(&diffs);
    let mut r = TestReport::new(Method::Evalue, stat, x.len(), observed);
    r.e_value = Some(e);
    r.inverse_e_value = Some(inv);
    r.m = perms.len() - 1;
    r.anchor = Some(anchor.clone());
    Ok(r)
}

const EXP_SAFE: f64 = 700.0;

/// Returns `(E, 1/E)` from the exponents `T_m − T`.
pub(crate) fn evalue_from_diffs(diffs: &[f64]) -> (f64, f64) {
    let k = diffs.len() as f64;
    let max = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= EXP_SAFE {
        let s: f64 = diffs.iter().map(|d| d.exp()).sum();
        (k / s, s / k)
    } else {
        let scaled: f64 = diffs.iter().map(|d| (d - max).exp()).sum();
        let log_s = max + scaled.ln();
        ((k.ln() - log_s).exp(), (log_s - k.ln()).exp())
    }
}

/// Randomization-test p-value: `Σ_{σ∈S} 1{T(x_σ) ≥ T(x_{σ_asgn})} / |S|`,
/// where `σ_asgn` is the realized assignment, drawn uniformly from `S` by
/// the study design.
pub fn randomization_pvalue(
    assigned: &Perm,
    x: &DataVec,
    stat: &Statistic,
    set: &[Perm],
) -> Result<TestReport> {
    if !set.contains(assigned) {
        return Err(Error::domain(
            "the realized assignment is not a member of the randomization set",
        ));
    }
    check_dims(x, assigned.n())?;
    let observed = stat.eval(&assigned.permute(x))?;
    let mut count = 0;
    for s in set {
        if at_least(stat.eval(&s.permute(x))?, observed) {
            count += 1;
        }
    }
    let mut r = TestReport::new(Method::Randomization, stat, x.len(), observed);
    r.p_value = Some(grid_value(count, set.len()));
    r.anchor = Some(assigned.clone());
    r.support_size = Some(set.len());
    Ok(r)
}

/// Checks `Σ_k w_k 1{Σ_i w_i 1{t_i ≥ t_k} ≤ α} ≤ α` in exact arithmetic.
///
/// Weights and `α` must be finite and nonnegative; scores may be infinite.
/// Panics if the lists differ in length.
pub fn harrison_check(weights: &[f64], scores: &[f64], alpha: f64) -> bool {
    let (lhs, alpha) = harrison_sides(weights, scores, alpha);
    lhs <= alpha
}

/// Both sides of the inequality checked by [`harrison_check`], exactly.
pub fn harrison_sides(weights: &[f64], scores: &[f64], alpha: f64) -> (BigRational, BigRational) {
    assert_eq!(
        weights.len(),
        scores.len(),
        "weights and scores differ in length"
    );
    let exact = |v: f64| {
        assert!(
            v.is_finite() && v >= 0.0,
            "weights and alpha must be finite and nonnegative"
        );
        BigRational::from_float(v).expect("finite float")
    };
    let alpha = exact(alpha);
    let w: Vec<BigRational> = weights.iter().map(|&v| exact(v)).collect();

    // Visit scores from largest to smallest; the inner sum for a tie block
    // is the weight of everything at or above it.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let zero = || BigRational::from_integer(BigInt::from(0));
    let mut above = zero();
    let mut lhs = zero();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut block = zero();
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            block += &w[order[j]];
            j += 1;
        }
        above += &block;
        if above <= alpha {
            lhs += block;
        }
        i = j;
    }
    (lhs, alpha)
}

/// A complete test recipe, used by the calibration harness, the exact
/// oracle and the command line.
#[derive(Debug, Clone)]
pub enum MethodSpec {
    /// Naive subset p-value on a fixed set (negative control).
    Naive {
        set: Vec<Perm>,
    },
    /// Anchored p-value with `σ₀ ~ q` (corrected subset test when `q` is
    /// uniform on a set).
    Exhaustive {
        q: PermDistribution,
    },
    /// `M` draws plus an anchor, i.i.d. from `source`.
    SampledIid {
        source: PermSource,
        m: usize,
    },
    /// `M + 1` distinct draws, uniformly without replacement.
    SampledNoReplace {
        source: PermSource,
        m: usize,
    },
    /// A uniformly random ordering of a fixed list, fed to
    /// [`pvalue_exchangeable`].
    Exchangeable {
        base: Vec<Perm>,
    },
    PbarExhaustive {
        q: PermDistribution,
    },
    PbarSampled {
        source: PermSource,
        m: usize,
    },
    /// E-value on `M + 1` i.i.d. draws from `source`.
    Evalue {
        source: PermSource,
        m: usize,
    },
    /// Randomization test with the assignment drawn uniformly from `set`.
    Randomization {
        set: Vec<Perm>,
    },
    /// Besag–Clifford with the permutation kernel driven by `q`.
    BesagClifford {
        q: PermDistribution,
        m: usize,
        steps: usize,
    },
}

impl MethodSpec {
    pub fn n(&self) -> usize {
        match self {
            MethodSpec::Naive { set } | MethodSpec::Randomization { set } => set[0].n(),
            MethodSpec::Exchangeable { base } => base[0].n(),
            MethodSpec::Exhaustive { q }
            | MethodSpec::PbarExhaustive { q }
            | MethodSpec::BesagClifford { q, .. } => q.n(),
            MethodSpec::SampledIid { source, .. }
            | MethodSpec::SampledNoReplace { source, .. }
            | MethodSpec::PbarSampled { source, .. }
            | MethodSpec::Evalue { source, .. } => source.n(),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodSpec::Naive { .. } => Method::Naive,
            MethodSpec::Exhaustive { .. } => Method::ExhaustiveQ,
            MethodSpec::SampledIid { .. } => Method::SampledIid,
            MethodSpec::SampledNoReplace { .. } => Method::SampledNoreplace,
            MethodSpec::Exchangeable { .. } => Method::Exchangeable,
            MethodSpec::PbarExhaustive { .. } => Method::PbarExhaustive,
            MethodSpec::PbarSampled { .. } => Method::PbarSampled,
            MethodSpec::Evalue { .. } => Method::Evalue,
            MethodSpec::Randomization { .. } => Method::Randomization,
            MethodSpec::BesagClifford { .. } => Method::BesagClifford,
        }
    }

    /// Type-I error guarantee: `P(P ≤ α) ≤ factor · α`. `None` for methods
    /// without one (naive on non-subgroups, e-values).
    pub fn validity_factor(&self) -> Option<u32> {
        match self {
            MethodSpec::Naive { set } => crate::perm::is_subgroup(set).then_some(1),
            MethodSpec::Evalue { .. } => None,
            MethodSpec::PbarExhaustive { .. } | MethodSpec::PbarSampled { .. } => Some(2),
            _ => Some(1),
        }
    }

    pub fn run(&self, x: &DataVec, stat: &Statistic, rng: &mut RngStream) -> Result<TestReport> {
        match self {
            MethodSpec::Naive { set } => pvalue_naive(x, stat, set),
            MethodSpec::Exhaustive { q } => pvalue_exhaustive(x, stat, q, rng),
            MethodSpec::SampledIid { source, m } => {
                pvalue_sampled(x, stat, source, *m, Replacement::With, rng)
            }
            MethodSpec::SampledNoReplace { source, m } => {
                pvalue_sampled(x, stat, source, *m, Replacement::Without, rng)
            }
            MethodSpec::Exchangeable { base } => {
                use rand::seq::SliceRandom;
                let mut perms = base.clone();
                perms.shuffle(rng);
                let mut r = pvalue_exchangeable(x, stat, &perms)?;
                r.seed = Some(rng.seed());
                Ok(r)
            }
            MethodSpec::PbarExhaustive { q } => pbar_exhaustive(x, stat, q),
            MethodSpec::PbarSampled { source, m } => pbar_sampled(x, stat, source, *m, rng),
            MethodSpec::Evalue { source, m } => {
                if *m == 0 {
                    return Err(Error::domain("e-values need M >= 1"));
                }
                let draws = source.draw_iid(NonZeroUsize::new(m + 1).expect("m + 1 > 0"), rng);
                let mut r = evalue(x, stat, &draws)?;
                r.seed = Some(rng.seed());
                r.support_size = source.support_size();
                r.weight_sum = source.raw_sum();
                Ok(r)
            }
            MethodSpec::Randomization { set } => {
                use rand::Rng;
                let first = set
                    .first()
                    .ok_or_else(|| Error::domain("randomization set is empty"))?;
                Error::check_len(x.len(), first.n())?;
                let assigned = &set[rng.random_range(0..set.len())];
                let mut r = randomization_pvalue(assigned, x, stat, set)?;
                r.seed = Some(rng.seed());
                Ok(r)
            }
            MethodSpec::BesagClifford { q, m, steps } => {
                mcmc::bc_pvalue_permutation(x, stat, q, *m, *steps, rng)
            }
        }
    }
}
