//! Finite distributions over permutations and reproducible samplers.
//!
//! # Random streams
//!
//! All randomness flows through [`RngStream`], a ChaCha8 generator keyed by a
//! 64-bit `seed` and positioned on the 64-bit ChaCha stream `counter`. The
//! pair `(seed, counter)` fully determines the draw sequence on every
//! platform. Calibration replicate `r` uses stream `r`, so results do not
//! depend on how replicates are scheduled across workers.

use std::collections::BTreeSet;
use std::num::NonZeroUsize;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::{factorial, strip_comment, Perm};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(counter);
        RngStream { seed, counter, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A distribution `q` over a finite, explicitly listed set of permutations.
///
/// Weights are stored both as given (`raw_weights`) and normalized. Zero
/// weights are pruned at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PermDistribution {
    n: usize,
    perms: Vec<Perm>,
    raw: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    raw_sum: f64,
}

impl PermDistribution {
    pub fn new(entries: Vec<(Perm, f64)>) -> Result<Self> {
        let mut perms = Vec::with_capacity(entries.len());
        let mut raw = Vec::with_capacity(entries.len());
        for (p, w) in entries {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::domain(format!(
                    "weight {w} for {p} is not a finite nonnegative number"
                )));
            }
            if w > 0.0 {
                perms.push(p);
                raw.push(w);
            }
        }
        let Some(first) = perms.first() else {
            return Err(Error::domain("distribution has no positive-weight support"));
        };
        let n = first.n();
        let mut seen = BTreeSet::new();
        for p in &perms {
            Error::check_len(n, p.n())?;
            if !seen.insert(p) {
                return Err(Error::domain(format!("permutation {p} listed twice")));
            }
        }
        let raw_sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / raw_sum).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(PermDistribution {
            n,
            perms,
            raw,
            weights,
            cumulative,
            raw_sum,
        })
    }

    pub fn uniform_on(set: &[Perm]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::domain(
                "cannot build a uniform distribution on an empty set",
            ));
        }
        Self::new(set.iter().map(|p| (p.clone(), 1.0)).collect())
    }

    pub fn point_mass(p: Perm) -> Self {
        Self::new(vec![(p, 1.0)]).expect("a single unit weight is a valid distribution")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn support(&self) -> &[Perm] {
        &self.perms
    }

    /// Normalized weights, aligned with [`support`](Self::support).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.raw
    }

    /// Sum of the weights as supplied, before normalization.
    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Perm, f64)> {
        self.perms.iter().zip(self.weights.iter().copied())
    }

    pub fn weight_of(&self, p: &Perm) -> f64 {
        self.perms
            .iter()
            .position(|s| s == p)
            .map_or(0.0, |i| self.weights[i])
    }

    pub fn is_uniform(&self) -> bool {
        self.raw.iter().all(|&w| w == self.raw[0])
    }

    /// Index of one draw, by inverting the cumulative weights in support order.
    pub(crate) fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.perms.len() - 1)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &Perm {
        &self.perms[self.draw_index(rng)]
    }
}

pub fn uniform_on(set: &[Perm]) -> Result<PermDistribution> {
    PermDistribution::uniform_on(set)
}

/// `count` i.i.d. draws from `d`.
pub fn sample_iid(d: &PermDistribution, count: NonZeroUsize, rng: &mut RngStream) -> Vec<Perm> {
    (0..count.get()).map(|_| d.draw(rng).clone()).collect()
}

/// A uniformly random `count`-subset of `set`, in uniformly random order
/// (partial Fisher–Yates over positions).
pub fn sample_without_replacement(
    set: &[Perm],
    count: NonZeroUsize,
    rng: &mut RngStream,
) -> Result<Vec<Perm>> {
    let count = count.get();
    if count > set.len() {
        return Err(Error::domain(format!(
            "cannot draw {count} permutations without replacement from a set of {}",
            set.len()
        )));
    }
    let mut idx: Vec<usize> = (0..set.len()).collect();
    for k in 0..count {
        let j = rng.random_range(k..idx.len());
        idx.swap(k, j);
    }
    Ok(idx[..count].iter().map(|&i| set[i].clone()).collect())
}

/// Where sampled tests get their permutations from.
#[derive(Debug, Clone, PartialEq)]
pub enum PermSource {
    /// An explicit finite distribution.
    Finite(PermDistribution),
    /// Uniform on all of `S_n`, drawn by Fisher–Yates without enumerating it.
    Symmetric { n: usize },
}

impl PermSource {
    pub fn n(&self) -> usize {
        match self {
            PermSource::Finite(d) => d.n(),
            PermSource::Symmetric { n } => *n,
        }
    }

    /// Support size, or `None` when it does not fit in a `usize`.
    pub fn support_size(&self) -> Option<usize> {
        match self {
            PermSource::Finite(d) => Some(d.len()),
            PermSource::Symmetric { n } => (1..=*n).try_fold(1usize, |acc, k| acc.checked_mul(k)),
        }
    }

    pub fn as_finite(&self) -> Option<&PermDistribution> {
        match self {
            PermSource::Finite(d) => Some(d),
            PermSource::Symmetric { .. } => None,
        }
    }

    pub fn raw_sum(&self) -> Option<f64> {
        self.as_finite().map(PermDistribution::raw_sum)
    }

    pub fn draw_iid(&self, count: NonZeroUsize, rng: &mut RngStream) -> Vec<Perm> {
        match self {
            PermSource::Finite(d) => sample_iid(d, count, rng),
            PermSource::Symmetric { n } => (0..count.get())
                .map(|_| uniform_symmetric(*n, rng))
                .collect(),
        }
    }

    /// Distinct draws, uniformly without replacement. Weighted finite
    /// sources are rejected.
    pub fn draw_distinct(&self, count: NonZeroUsize, rng: &mut RngStream) -> Result<Vec<Perm>> {
        match self {
            PermSource::Finite(d) => {
                if !d.is_uniform() {
                    return Err(Error::domain(
                        "sampling without replacement requires uniform weights",
                    ));
                }
                sample_without_replacement(d.support(), count, rng)
            }
            PermSource::Symmetric { n } => {
                if self.support_size().is_some_and(|s| s < count.get()) {
                    return Err(Error::domain(format!(
                        "cannot draw {count} distinct permutations of {n} elements"
                    )));
                }
                let mut seen = BTreeSet::new();
                let mut out = Vec::with_capacity(count.get());
                while out.len() < count.get() {
                    let p = uniform_symmetric(*n, rng);
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
                Ok(out)
            }
        }
    }
}

impl From<PermDistribution> for PermSource {
    fn from(d: PermDistribution) -> Self {
        PermSource::Finite(d)
    }
}

fn uniform_symmetric(n: usize, rng: &mut RngStream) -> Perm {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Perm::from_zero_based(image).expect("a shuffle of 0..n is a bijection")
}

/// The full symmetric group as an explicit uniform distribution, for small `n`.
pub fn full_group(n: usize) -> Result<PermDistribution> {
    const MAX_N: usize = 8;
    if n > MAX_N {
        return Err(Error::Capacity {
            what: format!("explicit enumeration of S_{n}"),
            cap: factorial(MAX_N),
        });
    }
    PermDistribution::uniform_on(&Perm::all(n)?)
}

/// Parses a distribution file: `weight  i1 i2 … in` per line, `#` comments.
/// Weights need not sum to one.
pub fn parse_distribution(text: &str, origin: &str) -> Result<PermDistribution> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            origin: origin.to_string(),
            line: lineno + 1,
            msg,
        };
        let (w, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| parse_err("expected `weight i1 i2 … in`".into()))?;
        let w: f64 = w
            .parse()
            .map_err(|_| parse_err(format!("`{w}` is not a weight")))?;
        if !w.is_finite() || w < 0.0 {
            return Err(parse_err(format!(
                "weight {w} must be finite and nonnegative"
            )));
        }
        let p = crate::perm::parse_perm(rest).map_err(|e| parse_err(e.to_string()))?;
        if let Some((first, _)) = entries.first() {
            let first: &Perm = first;
            if first.n() != p.n() {
                return Err(parse_err(format!(
                    "permutation has length {}, expected {}",
                    p.n(),
                    first.n()
                )));
            }
        }
        entries.push((p, w));
    }
    PermDistribution::new(entries).map_err(|e| Error::Parse {
        origin: origin.to_string(),
        line: 0,
        msg: e.to_string(),
    })
}
