//! Permutations of `[n]`, their action on data vectors, and subgroup closure.
//!
//! A permutation `σ` acts on a vector by reindexing:
//! `x_σ = (x_{σ(1)}, …, x_{σ(n)})`.
//!
//! # Composition convention
//!
//! `ρ ∘ τ` means "apply `ρ` first": `(ρ ∘ τ)(i) = τ(ρ(i))`. With this
//! convention the reindexing identity
//!
//! ```text
//! (x_τ)_{ρ ∘ τ⁻¹} = x_ρ
//! ```
//!
//! holds literally, which is what every anchored test in this crate relies
//! on. In particular `x_{σ ∘ σ₀⁻¹} = (x_{σ₀⁻¹})_σ`.
//!
//! Images are one-based at every external boundary (constructors taking
//! `one_based`, the text format, JSON) and zero-based internally.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default bound on the size of a generated subgroup.
pub const DEFAULT_SUBGROUP_CAP: usize = 1_000_000;

/// A permutation of `{1, …, n}`, `n ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    // zero-based image: image[i] = σ(i+1) - 1
    image: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations need n >= 1");
        Perm {
            image: (0..n).collect(),
        }
    }

    /// Builds a permutation from its one-based image `(σ(1), …, σ(n))`.
    pub fn from_one_based(image: impl IntoIterator<Item = usize>) -> Result<Self> {
        let image: Vec<usize> = image
            .into_iter()
            .map(|v| {
                v.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPerm("entries are one-based; found 0".into()))
            })
            .collect::<Result<_>>()?;
        Self::from_zero_based(image)
    }

    pub fn from_zero_based(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::InvalidPerm("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n {
                return Err(Error::InvalidPerm(format!(
                    "not a bijection: entry {} out of range 1..={n}",
                    v + 1
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPerm(format!(
                    "not a bijection: entry {} repeated",
                    v + 1
                )));
            }
        }
        Ok(Perm { image })
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.image
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|v| v + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `x_σ`, reindexing any slice. Panics on a length mismatch; use
    /// [`apply`] for the checked version.
    pub fn permute<T: Clone>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n(), "length mismatch in Perm::permute");
        self.image.iter().map(|&j| x[j].clone()).collect()
    }

    /// `self ∘ other`, applying `self` first.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        Error::check_len(self.n(), other.n())?;
        Ok(Perm {
            image: self.image.iter().map(|&i| other.image[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Perm { image: inv }
    }

    /// Every permutation of `[n]` in lexicographic order. Capped at `n ≤ 10`.
    pub fn all(n: usize) -> Result<Vec<Perm>> {
        const MAX_N: usize = 10;
        if n == 0 {
            return Err(Error::InvalidPerm("empty permutation".into()));
        }
        if n > MAX_N {
            return Err(Error::Capacity {
                what: format!("enumerating all {n}! permutations"),
                cap: factorial(MAX_N),
            });
        }
        let mut out = Vec::with_capacity(factorial(n));
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm { image: cur.clone() });
            if !next_permutation(&mut cur) {
                break;
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.one_based())
    }
}

/// One-based, whitespace separated: `3 4 1 2`.
impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        Ok(())
    }
}

impl Serialize for Perm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

/// Observations `X₁, …, X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVec(Vec<f64>);

impl DataVec {
    pub fn new(values: Vec<f64>) -> Self {
        DataVec(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn permuted(&self, s: &Perm) -> Result<DataVec> {
        apply(self, s)
    }
}

impl Deref for DataVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for DataVec {
    fn from(v: Vec<f64>) -> Self {
        DataVec(v)
    }
}

impl From<&[f64]> for DataVec {
    fn from(v: &[f64]) -> Self {
        DataVec(v.to_vec())
    }
}

/// `x_σ = (x_{σ(1)}, …, x_{σ(n)})`.
pub fn apply(x: &DataVec, s: &Perm) -> Result<DataVec> {
    Error::check_len(s.n(), x.len())?;
    Ok(DataVec(s.permute(&x.0)))
}

/// `r ∘ t` with `(r ∘ t)(i) = t(r(i))`.
pub fn compose(r: &Perm, t: &Perm) -> Result<Perm> {
    r.compose(t)
}

pub fn inverse(s: &Perm) -> Perm {
    s.inverse()
}

/// Closure of `{Id} ∪ generators` under composition, by breadth-first search.
///
/// The result is sorted in lexicographic image order. Fails with a capacity
/// error once the closure would grow beyond `cap` elements.
pub fn generate_subgroup(n: usize, generators: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    for g in generators {
        Error::check_len(n, g.n())?;
    }
    if cap == 0 {
        return Err(Error::Capacity {
            what: "subgroup closure".into(),
            cap,
        });
    }
    let id = Perm::identity(n);
    let mut seen: BTreeSet<Perm> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = g.compose(h)?;
            if !seen.contains(&next) {
                if seen.len() >= cap {
                    return Err(Error::Capacity {
                        what: "subgroup closure".into(),
                        cap,
                    });
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Whether `set` is closed under composition (and therefore, being finite,
/// a subgroup when nonempty).
pub fn is_subgroup(set: &[Perm]) -> bool {
    if set.is_empty() {
        return false;
    }
    let members: BTreeSet<&Perm> = set.iter().collect();
    set.iter().all(|a| {
        set.iter()
            .all(|b| a.compose(b).is_ok_and(|c| members.contains(&c)))
    })
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|&e| e > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Parses one line of the permutation text format.
pub fn parse_perm(line: &str) -> Result<Perm> {
    let entries = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::InvalidPerm(format!("`{tok}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    Perm::from_one_based(entries)
}

/// Parses a permutation-set file: one permutation per line, `#` comments and
/// blank lines ignored. `origin` names the input in diagnostics.
pub fn parse_perm_set(text: &str, origin: &str) -> Result<Vec<Perm>> {
    let mut out: Vec<Perm> = Vec::new();
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
        let p = parse_perm(line).map_err(|e| parse_err(e.to_string()))?;
        if let Some(first) = out.first() {
            if first.n() != p.n() {
                return Err(parse_err(format!(
                    "permutation has length {}, expected {}",
                    p.n(),
                    first.n()
                )));
            }
        }
        out.push(p);
    }
    Ok(out)
}

pub fn format_perm_set(set: &[Perm]) -> String {
    let mut s = String::new();
    for p in set {
        s.push_str(&p.to_string());
        s.push('\n');
    }
    s
}

pub(crate) fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Perm {
        Perm::from_one_based(v.iter().copied()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let x = DataVec::new(vec![10.0, 20.0, 30.0]);
        assert_eq!(
            apply(&x, &p(&[2, 3, 1])).unwrap().values(),
            &[20.0, 30.0, 10.0]
        );

        let x = DataVec::new(vec![1.0, 2.0, -0.5, 0.3]);
        assert_eq!(apply(&x, &Perm::identity(4)).unwrap(), x);
        assert_eq!(
            apply(&x, &p(&[3, 4, 1, 2])).unwrap().values(),
            &[-0.5, 0.3, 1.0, 2.0]
        );
    }

    #[test]
    fn apply_rejects_length_mismatch() {
        let x = DataVec::new(vec![1.0, 2.0]);
        assert_eq!(
            apply(&x, &Perm::identity(3)),
            Err(Error::Dimension {
                expected: 3,
                got: 2
            })
        );
    }

    #[test]
    fn compose_examples() {
        let s = p(&[2, 3, 1]);
        assert_eq!(compose(&Perm::identity(3), &s).unwrap(), s);
        assert_eq!(
            compose(&p(&[4, 3, 2, 1]), &p(&[3, 4, 1, 2])).unwrap(),
            p(&[2, 1, 4, 3])
        );
        assert!(compose(&s, &inverse(&s)).unwrap().is_identity());
        assert!(compose(&s, &Perm::identity(4)).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&p(&[2, 3, 1])), p(&[3, 1, 2]));
        assert!(inverse(&Perm::identity(5)).is_identity());
        let dbl = p(&[3, 4, 1, 2]);
        assert_eq!(inverse(&dbl), dbl);
        assert!(compose(&dbl, &dbl).unwrap().is_identity());
    }

    #[test]
    fn subgroup_examples() {
        let klein = generate_subgroup(4, &[p(&[2, 1, 4, 3]), p(&[3, 4, 1, 2])], 100).unwrap();
        assert_eq!(
            klein,
            vec![
                p(&[1, 2, 3, 4]),
                p(&[2, 1, 4, 3]),
                p(&[3, 4, 1, 2]),
                p(&[4, 3, 2, 1])
            ]
        );
        assert_eq!(
            generate_subgroup(4, &[], 10).unwrap(),
            vec![Perm::identity(4)]
        );
        let cyc = generate_subgroup(4, &[p(&[2, 3, 4, 1])], 100).unwrap();
        assert_eq!(cyc.len(), 4);
        assert!(is_subgroup(&cyc));
    }

    #[test]
    fn subgroup_cap() {
        let gens = [p(&[2, 1, 3, 4, 5]), p(&[2, 3, 4, 5, 1])];
        assert_eq!(generate_subgroup(5, &gens, 1000).unwrap().len(), 120);
        assert!(matches!(
            generate_subgroup(5, &gens, 119),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn rejects_non_bijections() {
        let err = parse_perm("3 3 1 2").unwrap_err();
        assert!(err.to_string().contains("not a bijection"));
        assert!(parse_perm("0 1 2").is_err());
        assert!(parse_perm("1 5 2").is_err());
        assert!(parse_perm("").is_err());
        assert!(parse_perm("1 x 2").is_err());
    }

    #[test]
    fn set_file_diagnostics_name_line() {
        let text = "# header\n1 2 3 4\n\n3 3 1 2\n";
        match parse_perm_set(text, "S.txt") {
            Err(Error::Parse { origin, line, msg }) => {
                assert_eq!(origin, "S.txt");
                assert_eq!(line, 4);
                assert!(msg.contains("not a bijection"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_perm_set("1 2 3\n1 2\n", "f").is_err());
    }

    #[test]
    fn all_perms_lexicographic() {
        let s3 = Perm::all(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert!(s3.windows(2).all(|w| w[0] < w[1]));
        assert!(is_subgroup(&s3));
        assert!(matches!(Perm::all(11), Err(Error::Capacity { .. })));
    }

    #[test]
    fn example_one_set_is_not_a_subgroup() {
        let s = vec![Perm::identity(4), p(&[3, 4, 1, 2]), p(&[4, 3, 2, 1])];
        assert!(!is_subgroup(&s));
    }
}
