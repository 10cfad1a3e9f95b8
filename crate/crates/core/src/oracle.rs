//! Exact laws of p-values under the conditional null.
//!
//! Conditioning on the order statistics turns an exchangeable null into the
//! uniform law over all `n!` arrangements of a fixed multiset of values.
//! [`exact_p_distribution`] enumerates those arrangements jointly with the
//! method's internal randomness (anchors, ordered draw tuples, orderings) and
//! returns the law of the p-value with exact rational atoms and
//! probabilities. Distribution weights are used exactly as supplied: every
//! finite `f64` is a dyadic rational, so the enumeration never rounds.
//!
//! Statistic values stay `f64` and are compared with the same `>=` rule the
//! engine uses; the permuted data are formed straight from the definition
//! `x_{σ ∘ σ₀⁻¹}`, independently of the engine's evaluation order.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dist::{PermDistribution, PermSource};
use crate::engine::{at_least, MethodSpec};
use crate::error::{Error, Result};
use crate::perm::{factorial, Perm};
use crate::stats::Statistic;

/// Largest `n` whose `n!` arrangements are enumerated.
pub const MAX_N: usize = 8;
/// Largest number of internal-randomness outcomes enumerated per arrangement.
pub const MAX_DRAW_OUTCOMES: usize = 1_000_000;

/// A finite law with exact rational atoms and probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    atoms: BTreeMap<BigRational, BigRational>,
}

impl ExactDistribution {
    pub fn from_atoms(atoms: impl IntoIterator<Item = (BigRational, BigRational)>) -> Self {
        let mut map = BTreeMap::new();
        for (v, p) in atoms {
            if !p.is_zero() {
                *map.entry(v).or_insert_with(BigRational::zero) += p;
            }
        }
        ExactDistribution { atoms: map }
    }

    pub fn atoms(&self) -> &BTreeMap<BigRational, BigRational> {
        &self.atoms
    }

    pub fn probability_of(&self, value: &BigRational) -> BigRational {
        self.atoms
            .get(value)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `P(P ≤ alpha)`.
    pub fn cdf(&self, alpha: &BigRational) -> BigRational {
        self.atoms
            .range(..=alpha.clone())
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// `P(P ≤ alpha)` for a floating-point level, comparing atoms in `f64`
    /// with a `1e-12` allowance for rounding of `alpha`.
    pub fn cdf_f64(&self, alpha: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(v, _)| to_f64(v) <= alpha + 1e-12)
            .fold(0.0, |acc, (_, p)| acc + to_f64(p))
    }

    pub fn total(&self) -> BigRational {
        self.atoms
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// `(value, probability)` pairs as `"num/den"` strings, ascending.
    pub fn to_strings(&self) -> Vec<(String, String)> {
        self.atoms
            .iter()
            .map(|(v, p)| (fmt_ratio(v), fmt_ratio(p)))
            .collect()
    }
}

impl fmt::Display for ExactDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (v, p)) in self.to_strings().into_iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {p}")?;
        }
        f.write_str("}")
    }
}

/// Always `num/den`, including integers (`1/1`).
pub fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditResult {
    pub pass: bool,
    pub factor: u32,
    /// The atom where `P(P ≤ α) − factor·α` is largest.
    pub worst_alpha: BigRational,
    pub worst_cdf: BigRational,
    /// Every atom `(α, P(P ≤ α))` with `P(P ≤ α) > factor·α`.
    pub violations: Vec<(BigRational, BigRational)>,
}

/// Checks `P(P ≤ α) ≤ factor · α` at every atom. The CDF is a step function,
/// so the atoms are the only levels that need checking.
pub fn validity_audit(dist: &ExactDistribution, factor: u32) -> AuditResult {
    let f = BigRational::from_integer(BigInt::from(factor));
    let mut cdf = BigRational::zero();
    let mut worst: Option<(BigRational, BigRational, BigRational)> = None;
    let mut violations = Vec::new();
    for (alpha, p) in &dist.atoms {
        cdf += p;
        let bound = &f * alpha;
        let excess = &cdf - &bound;
        if cdf > bound {
            violations.push((alpha.clone(), cdf.clone()));
        }
        if worst.as_ref().is_none_or(|(e, _, _)| excess > *e) {
            worst = Some((excess, alpha.clone(), cdf.clone()));
        }
    }
    let (_, worst_alpha, worst_cdf) =
        worst.unwrap_or_else(|| (BigRational::zero(), BigRational::one(), BigRational::zero()));
    AuditResult {
        pass: violations.is_empty(),
        factor,
        worst_alpha,
        worst_cdf,
        violations,
    }
}

/// Exact weights of a distribution as integers over a common denominator.
fn integer_weights(q: &PermDistribution) -> (Vec<BigUint>, BigUint) {
    let exact: Vec<BigRational> = q
        .raw_weights()
        .iter()
        .map(|&w| BigRational::from_float(w).expect("weights are finite"))
        .collect();
    let lcd = exact
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigUint> = exact
        .iter()
        .map(|r| {
            (r.numer() * (&lcd / r.denom()))
                .to_biguint()
                .expect("weights are nonnegative")
        })
        .collect();
    let total = ints.iter().sum();
    (ints, total)
}

fn finite(source: &PermSource) -> Result<&PermDistribution> {
    source.as_finite().ok_or_else(|| {
        Error::domain("exact enumeration needs an explicit finite permutation distribution")
    })
}

fn capped_power(base: usize, exp: usize) -> Result<usize> {
    let what = || Error::Capacity {
        what: format!("enumerating {base}^{exp} draw tuples"),
        cap: MAX_DRAW_OUTCOMES,
    };
    let v = u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(what)?;
    if v > MAX_DRAW_OUTCOMES {
        return Err(what());
    }
    Ok(v)
}

/// `composites[i][j] = σ_i ∘ σ_j⁻¹`.
fn anchored_composites(perms: &[Perm]) -> Vec<Vec<Perm>> {
    let inverses: Vec<Perm> = perms.iter().map(Perm::inverse).collect();
    perms
        .iter()
        .map(|s| {
            inverses
                .iter()
                .map(|inv| s.compose(inv).expect("shared n"))
                .collect()
        })
        .collect()
}

enum Plan {
    Naive {
        set: Vec<Perm>,
    },
    Anchored {
        w: Vec<BigUint>,
        comp: Vec<Vec<Perm>>,
    },
    Iid {
        w: Vec<BigUint>,
        comp: Vec<Vec<Perm>>,
        m: usize,
        averaged: bool,
    },
    NoReplace {
        comp: Vec<Vec<Perm>>,
        m: usize,
    },
    Orderings {
        comp: Vec<Vec<Perm>>,
        orderings: Vec<Perm>,
    },
    PbarExhaustive {
        w: Vec<BigUint>,
        comp: Vec<Vec<Perm>>,
    },
    Randomization {
        set: Vec<Perm>,
    },
    BesagClifford {
        perms: Vec<Perm>,
        w: Vec<BigUint>,
        wsum: BigUint,
        m: usize,
        steps: usize,
    },
}

/// A compiled enumeration: per-arrangement atom and probability
/// denominators plus the method's draw space.
struct Enumeration {
    plan: Plan,
    /// Perms that draw indices refer to.
    draws_from: Vec<Perm>,
    atom_den: BigUint,
    prob_den: BigUint,
}

fn compile(method: &MethodSpec, n: usize) -> Result<Enumeration> {
    let check = |k: usize| Error::check_len(n, k);
    Ok(match method {
        MethodSpec::Naive { set } => {
            check(set.first().ok_or_else(|| Error::domain("empty set"))?.n())?;
            Enumeration {
                atom_den: set.len().into(),
                prob_den: BigUint::one(),
                draws_from: Vec::new(),
                plan: Plan::Naive { set: set.clone() },
            }
        }
        MethodSpec::Exhaustive { q } => {
            check(q.n())?;
            let (w, wsum) = integer_weights(q);
            Enumeration {
                atom_den: wsum.clone(),
                prob_den: wsum,
                draws_from: q.support().to_vec(),
                plan: Plan::Anchored {
                    w,
                    comp: anchored_composites(q.support()),
                },
            }
        }
        MethodSpec::SampledIid { source, m } | MethodSpec::PbarSampled { source, m } => {
            let q = finite(source)?;
            check(q.n())?;
            if *m == 0 {
                return Err(Error::domain("sampled methods need M >= 1"));
            }
            capped_power(q.len(), m + 1)?;
            let averaged = matches!(method, MethodSpec::PbarSampled { .. });
            let (w, wsum) = integer_weights(q);
            let k = m + 1;
            Enumeration {
                atom_den: if averaged { (k * k).into() } else { k.into() },
                prob_den: wsum.pow(k as u32),
                draws_from: q.support().to_vec(),
                plan: Plan::Iid {
                    w,
                    comp: anchored_composites(q.support()),
                    m: *m,
                    averaged,
                },
            }
        }
        MethodSpec::SampledNoReplace { source, m } => {
            let q = finite(source)?;
            check(q.n())?;
            if !q.is_uniform() {
                return Err(Error::domain(
                    "sampling without replacement requires uniform weights",
                ));
            }
            let k = q.len();
            if *m == 0 || m + 1 > k {
                return Err(Error::domain(format!(
                    "cannot draw {} distinct permutations from {k}",
                    m + 1
                )));
            }
            let tuples: usize = (k - m..=k).product();
            if tuples > MAX_DRAW_OUTCOMES {
                return Err(Error::Capacity {
                    what: format!("enumerating {tuples} ordered draw tuples"),
                    cap: MAX_DRAW_OUTCOMES,
                });
            }
            Enumeration {
                atom_den: (m + 1).into(),
                prob_den: tuples.into(),
                draws_from: q.support().to_vec(),
                plan: Plan::NoReplace {
                    comp: anchored_composites(q.support()),
                    m: *m,
                },
            }
        }
        MethodSpec::Exchangeable { base } => {
            check(base.first().ok_or_else(|| Error::domain("empty list"))?.n())?;
            let orderings = Perm::all(base.len())?;
            if orderings.len() > MAX_DRAW_OUTCOMES {
                return Err(Error::Capacity {
                    what: "enumerating orderings".into(),
                    cap: MAX_DRAW_OUTCOMES,
                });
            }
            Enumeration {
                atom_den: base.len().into(),
                prob_den: orderings.len().into(),
                draws_from: base.clone(),
                plan: Plan::Orderings {
                    comp: anchored_composites(base),
                    orderings,
                },
            }
        }
        MethodSpec::PbarExhaustive { q } => {
            check(q.n())?;
            let (w, wsum) = integer_weights(q);
            Enumeration {
                atom_den: &wsum * &wsum,
                prob_den: BigUint::one(),
                draws_from: Vec::new(),
                plan: Plan::PbarExhaustive {
                    w,
                    comp: anchored_composites(q.support()),
                },
            }
        }
        MethodSpec::Randomization { set } => {
            check(set.first().ok_or_else(|| Error::domain("empty set"))?.n())?;
            Enumeration {
                atom_den: set.len().into(),
                prob_den: set.len().into(),
                draws_from: set.clone(),
                plan: Plan::Randomization { set: set.clone() },
            }
        }
        MethodSpec::BesagClifford { q, m, steps } => {
            check(q.n())?;
            if *m == 0 || *steps == 0 {
                return Err(Error::domain("Besag–Clifford needs M >= 1 and s >= 1"));
            }
            capped_power(q.len(), *steps)?;
            let (w, wsum) = integer_weights(q);
            let per_chain = wsum.pow(*steps as u32);
            Enumeration {
                atom_den: (m + 1).into(),
                prob_den: per_chain.pow(*m as u32 + 1),
                draws_from: Vec::new(),
                plan: Plan::BesagClifford {
                    perms: q.support().to_vec(),
                    w,
                    wsum,
                    m: *m,
                    steps: *steps,
                },
            }
        }
        MethodSpec::Evalue { .. } => {
            return Err(Error::domain(
                "e-values have no p-value law; use exact_e_expectation",
            ))
        }
    })
}

/// `ind[i][j] = 1{T(x_{σ_i ∘ σ_j⁻¹}) ≥ T(x)}`.
fn indicator_matrix(
    x: &[f64],
    stat: &Statistic,
    observed: f64,
    comp: &[Vec<Perm>],
) -> Result<Vec<Vec<bool>>> {
    comp.iter()
        .map(|row| {
            row.iter()
                .map(|c| Ok(at_least(stat.eval(&c.permute(x))?, observed)))
                .collect()
        })
        .collect()
}

fn weighted_count(w: &[BigUint], hits: impl Iterator<Item = bool>) -> BigUint {
    w.iter().zip(hits).filter(|(_, h)| *h).map(|(w, _)| w).sum()
}

/// Calls `f` on every tuple in `{0..len}^k`.
fn for_each_tuple(len: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut idx = vec![0usize; k];
    loop {
        f(&idx)?;
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < len {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Calls `f` on every injective tuple in `{0..len}^k`.
fn for_each_injective(
    len: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn rec(
        len: usize,
        k: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if cur.len() == k {
            return f(cur);
        }
        for i in 0..len {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(len, k, cur, used, f)?;
                cur.pop();
                used[i] = false;
            }
        }
        Ok(())
    }
    rec(
        len,
        k,
        &mut Vec::with_capacity(k),
        &mut vec![false; len],
        &mut f,
    )
}

type StateKey = Vec<u64>;

fn state_key(x: &[f64]) -> StateKey {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Law of the state after `steps` moves, each moving `x ↦ x_s` with
/// `s = step(σ_i)` chosen with integer weight `w_i`.
fn walk(
    start: &[f64],
    perms: &[Perm],
    w: &[BigUint],
    steps: usize,
) -> BTreeMap<StateKey, (Vec<f64>, BigUint)> {
    let mut cur = BTreeMap::new();
    cur.insert(state_key(start), (start.to_vec(), BigUint::one()));
    for _ in 0..steps {
        let mut next: BTreeMap<StateKey, (Vec<f64>, BigUint)> = BTreeMap::new();
        for (state, weight) in cur.values() {
            for (s, wi) in perms.iter().zip(w) {
                let moved = s.permute(state);
                let entry = next
                    .entry(state_key(&moved))
                    .or_insert_with(|| (moved, BigUint::zero()));
                entry.1 += weight * wi;
            }
        }
        cur = next;
    }
    cur
}

fn binomial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

impl Enumeration {
    /// Enumerates one arrangement `x`. `emit(draws, atom_num, weight)`
    /// receives indices into `draws_from`, the atom numerator over
    /// `atom_den`, and the outcome weight over `prob_den`.
    fn visit(
        &self,
        x: &[f64],
        stat: &Statistic,
        emit: &mut dyn FnMut(&[usize], BigUint, BigUint),
    ) -> Result<()> {
        let observed = stat.eval(x)?;
        match &self.plan {
            Plan::Naive { set } => {
                let mut hits = 0usize;
                for s in set {
                    if at_least(stat.eval(&s.permute(x))?, observed) {
                        hits += 1;
                    }
                }
                emit(&[], hits.into(), BigUint::one());
            }
            Plan::Anchored { w, comp } => {
                let ind = indicator_matrix(x, stat, observed, comp)?;
                for j in 0..w.len() {
                    let atom = weighted_count(w, ind.iter().map(|row| row[j]));
                    emit(&[j], atom, w[j].clone());
                }
            }
            Plan::Iid {
                w,
                comp,
                m,
                averaged,
            } => {
                let ind = indicator_matrix(x, stat, observed, comp)?;
                for_each_tuple(w.len(), m + 1, |t| {
                    let atom: usize = if *averaged {
                        t.iter()
                            .map(|&a| t.iter().filter(|&&b| ind[b][a]).count())
                            .sum()
                    } else {
                        1 + t[1..].iter().filter(|&&b| ind[b][t[0]]).count()
                    };
                    let weight = t.iter().fold(BigUint::one(), |acc, &i| acc * &w[i]);
                    emit(t, atom.into(), weight);
                    Ok(())
                })?;
            }
            Plan::NoReplace { comp, m } => {
                let ind = indicator_matrix(x, stat, observed, comp)?;
                for_each_injective(comp.len(), m + 1, |t| {
                    let atom = 1 + t[1..].iter().filter(|&&b| ind[b][t[0]]).count();
                    emit(t, atom.into(), BigUint::one());
                    Ok(())
                })?;
            }
            Plan::Orderings { comp, orderings } => {
                let ind = indicator_matrix(x, stat, observed, comp)?;
                for o in orderings {
                    let t = o.zero_based();
                    let atom = t.iter().filter(|&&b| ind[b][t[0]]).count();
                    emit(t, atom.into(), BigUint::one());
                }
            }
            Plan::PbarExhaustive { w, comp } => {
                let ind = indicator_matrix(x, stat, observed, comp)?;
                let mut atom = BigUint::zero();
                for (j, wj) in w.iter().enumerate() {
                    atom += wj * weighted_count(w, ind.iter().map(|row| row[j]));
                }
                emit(&[], atom, BigUint::one());
            }
            Plan::Randomization { set } => {
                let scores = set
                    .iter()
                    .map(|s| stat.eval(&s.permute(x)))
                    .collect::<Result<Vec<f64>>>()?;
                for (j, &obs) in scores.iter().enumerate() {
                    let hits = scores.iter().filter(|&&t| at_least(t, obs)).count();
                    emit(&[j], hits.into(), BigUint::one());
                }
            }
            Plan::BesagClifford {
                perms,
                w,
                wsum,
                m,
                steps,
            } => {
                let inverses: Vec<Perm> = perms.iter().map(Perm::inverse).collect();
                let chain_total = wsum.pow(*steps as u32);
                for (hidden, hidden_w) in walk(x, &inverses, w, *steps).into_values() {
                    let mut success = BigUint::zero();
                    for (sib, sib_w) in walk(&hidden, perms, w, *steps).into_values() {
                        if at_least(stat.eval(&sib)?, observed) {
                            success += sib_w;
                        }
                    }
                    let failure = &chain_total - &success;
                    for k in 0..=*m {
                        let weight = &hidden_w
                            * binomial(*m, k)
                            * success.pow(k as u32)
                            * failure.pow((m - k) as u32);
                        emit(&[], (1 + k).into(), weight);
                    }
                }
            }
        }
        Ok(())
    }
}

fn arrangements(values: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = values.len();
    if n == 0 {
        return Err(Error::domain("need at least one value"));
    }
    if n > MAX_N {
        return Err(Error::Capacity {
            what: format!("enumerating {n}! arrangements"),
            cap: factorial(MAX_N),
        });
    }
    Ok(Perm::all(n)?.iter().map(|p| p.permute(values)).collect())
}

/// Exact law of the method's p-value when the data are a uniformly random
/// arrangement of `values`.
pub fn exact_p_distribution(
    values: &[f64],
    stat: &Statistic,
    method: &MethodSpec,
) -> Result<ExactDistribution> {
    let arr = arrangements(values)?;
    let en = compile(method, values.len())?;
    let counts = arr
        .par_iter()
        .map(|x| {
            let mut local: BTreeMap<BigUint, BigUint> = BTreeMap::new();
            en.visit(x, stat, &mut |_, atom, weight| {
                *local.entry(atom).or_default() += weight;
            })?;
            Ok(local)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            Ok(a)
        })?;
    let atom_den = BigInt::from(en.atom_den.clone());
    let prob_den = BigInt::from(&en.prob_den * BigUint::from(arr.len()));
    Ok(ExactDistribution::from_atoms(counts.into_iter().map(
        |(atom, weight)| {
            (
                BigRational::new(BigInt::from(atom), atom_den.clone()),
                BigRational::new(BigInt::from(weight), prob_den.clone()),
            )
        },
    )))
}

/// One outcome of the enumeration: an arrangement of the data, the
/// method's realized draws, the p-value there and its probability.
#[derive(Debug, Clone)]
pub struct OraclePoint<'a> {
    pub data: &'a [f64],
    /// Draws in the order the engine consumes them (anchor first). Empty for
    /// deterministic methods; also empty for Besag–Clifford, whose siblings
    /// are aggregated into a binomial law per hidden state.
    pub draws: Vec<Perm>,
    pub value: BigRational,
    pub probability: BigRational,
}

/// Visits every enumeration outcome in a fixed order.
pub fn for_each_point(
    values: &[f64],
    stat: &Statistic,
    method: &MethodSpec,
    mut f: impl FnMut(OraclePoint<'_>),
) -> Result<()> {
    let arr = arrangements(values)?;
    let en = compile(method, values.len())?;
    let atom_den = BigInt::from(en.atom_den.clone());
    let prob_den = BigInt::from(&en.prob_den * BigUint::from(arr.len()));
    for x in &arr {
        en.visit(x, stat, &mut |draws, atom, weight| {
            f(OraclePoint {
                data: x,
                draws: draws.iter().map(|&i| en.draws_from[i].clone()).collect(),
                value: BigRational::new(BigInt::from(atom), atom_den.clone()),
                probability: BigRational::new(BigInt::from(weight), prob_den.clone()),
            })
        })?;
    }
    Ok(())
}

/// `E[E]` for the e-value on `M + 1` i.i.d. draws from `q`, under the
/// conditional null. Probabilities are exact; the e-values themselves are
/// `f64`, summed with Neumaier compensation.
pub fn exact_e_expectation(
    values: &[f64],
    stat: &Statistic,
    q: &PermDistribution,
    m: usize,
) -> Result<f64> {
    let arr = arrangements(values)?;
    Error::check_len(values.len(), q.n())?;
    capped_power(q.len(), m + 1)?;
    let (w, wsum) = integer_weights(q);
    let comp = anchored_composites(q.support());
    let denom = wsum.pow(m as u32 + 1).to_f64().unwrap_or(f64::INFINITY);
    let per_arrangement = arr
        .par_iter()
        .map(|x| {
            let observed = stat.eval(x)?;
            let growth = comp
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| Ok((stat.eval(&c.permute(x))? - observed).exp()))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = Neumaier::default();
            for_each_tuple(w.len(), m + 1, |t| {
                let weight = t.iter().fold(BigUint::one(), |a, &i| a * &w[i]);
                let s: f64 = t.iter().map(|&b| growth[b][t[0]]).sum();
                let e = (m + 1) as f64 / s;
                acc.add(weight.to_f64().unwrap_or(f64::INFINITY) / denom * e);
                Ok(())
            })?;
            Ok(acc.total())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = Neumaier::default();
    for v in per_arrangement {
        acc.add(v);
    }
    Ok(acc.total() / arr.len() as f64)
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Perm {
        Perm::from_one_based(v.iter().copied()).unwrap()
    }

    fn ex1_set() -> Vec<Perm> {
        vec![Perm::identity(4), p(&[3, 4, 1, 2]), p(&[4, 3, 2, 1])]
    }

    type Atom = ((i64, i64), (i64, i64));

    const VALUES: [f64; 4] = [1.0, 2.0, -0.5, 0.3];

    fn law(pairs: &[Atom]) -> ExactDistribution {
        ExactDistribution::from_atoms(
            pairs
                .iter()
                .map(|&((a, b), (c, d))| (ratio(a, b), ratio(c, d))),
        )
    }

    #[test]
    fn naive_subset_law() {
        let d = exact_p_distribution(
            &VALUES,
            &Statistic::sum_first_k(2),
            &MethodSpec::Naive { set: ex1_set() },
        )
        .unwrap();
        assert_eq!(d, law(&[((1, 3), (1, 2)), ((1, 1), (1, 2))]));
        let audit = validity_audit(&d, 1);
        assert!(!audit.pass);
        assert_eq!(audit.violations[0].0, ratio(1, 3));
        assert_eq!(audit.worst_alpha, ratio(1, 3));
    }

    #[test]
    fn corrected_subset_law() {
        let q = PermDistribution::uniform_on(&ex1_set()).unwrap();
        let d = exact_p_distribution(
            &VALUES,
            &Statistic::sum_first_k(2),
            &MethodSpec::Exhaustive { q },
        )
        .unwrap();
        assert_eq!(
            d,
            law(&[((1, 3), (1, 6)), ((2, 3), (1, 3)), ((1, 1), (1, 2))])
        );
        assert!(validity_audit(&d, 1).pass);
    }

    #[test]
    fn pbar_law() {
        let q = PermDistribution::uniform_on(&ex1_set()).unwrap();
        let d = exact_p_distribution(
            &VALUES,
            &Statistic::sum_first_k(2),
            &MethodSpec::PbarExhaustive { q },
        )
        .unwrap();
        assert_eq!(d, law(&[((5, 9), (1, 2)), ((1, 1), (1, 2))]));
        assert!(validity_audit(&d, 2).pass);
    }

    #[test]
    fn audit_boundaries() {
        let d = law(&[((1, 2), (1, 2)), ((1, 1), (1, 2))]);
        let a = validity_audit(&d, 1);
        assert!(a.pass);
        let d = law(&[((1, 4), (1, 2)), ((1, 1), (1, 2))]);
        assert!(!validity_audit(&d, 1).pass);
        assert!(validity_audit(&d, 2).pass);
    }

    #[test]
    fn tuple_enumerators() {
        let mut seen = Vec::new();
        for_each_tuple(3, 2, |t| {
            seen.push(t.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 9);
        let mut inj = 0;
        for_each_injective(4, 3, |t| {
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            inj += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(inj, 24);
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
    }

    #[test]
    fn integer_weights_are_exact() {
        let q = PermDistribution::new(vec![
            (Perm::identity(3), 0.5),
            (p(&[2, 1, 3]), 0.25),
            (p(&[3, 1, 2]), 3.0),
        ])
        .unwrap();
        let (w, s) = integer_weights(&q);
        assert_eq!(w, vec![2u32.into(), 1u32.into(), 12u32.into()]);
        assert_eq!(s, BigUint::from(15u32));
    }

    #[test]
    fn caps() {
        let t = Statistic::sum_first_k(1);
        let big: Vec<f64> = (0..9).map(f64::from).collect();
        let q = PermDistribution::point_mass(Perm::identity(9));
        assert!(matches!(
            exact_p_distribution(&big, &t, &MethodSpec::PbarExhaustive { q }),
            Err(Error::Capacity { .. })
        ));
        let q = PermDistribution::uniform_on(&Perm::all(4).unwrap()).unwrap();
        let spec = MethodSpec::SampledIid {
            source: q.into(),
            m: 5,
        };
        assert!(matches!(
            exact_p_distribution(&VALUES, &t, &spec),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn e_expectation_examples() {
        let q = PermDistribution::uniform_on(&ex1_set()).unwrap();
        let flat = [2.0; 4];
        let e = exact_e_expectation(&flat, &Statistic::sum_first_k(2), &q, 1).unwrap();
        assert_eq!(e, 1.0);

        // Two arrangements × four draw pairs; the e-values pair up to 2.
        let s2 = PermDistribution::uniform_on(&Perm::all(2).unwrap()).unwrap();
        let e = exact_e_expectation(&[0.0, 1.0], &Statistic::sum_first_k(1), &s2, 1).unwrap();
        assert!((e - 1.0).abs() < 1e-15, "{e}");

        let e = exact_e_expectation(&VALUES, &Statistic::sum_first_k(2), &q, 1).unwrap();
        assert!(e <= 1.0 + 1e-12, "{e}");
    }
}
