//! Permutation tests over arbitrary sets and distributions of permutations.
//!
//! The classical permutation test is valid when the permutations form a
//! group. This crate implements the anchored variants that stay valid for
//! any fixed subset `S ⊆ S_n` or any distribution `q` over permutations,
//! together with averaged p-values, e-values, randomization tests and the
//! Besag–Clifford construction for Markov chains. An exact enumeration
//! oracle and a Monte Carlo calibration harness check validity.
//!
//! ```
//! use permkit::{DataVec, Perm, PermDistribution, RngStream, Statistic};
//! use permkit::engine::pvalue_exhaustive;
//!
//! let p = |v: [usize; 4]| Perm::from_one_based(v).unwrap();
//! let set = [Perm::identity(4), p([3, 4, 1, 2]), p([4, 3, 2, 1])];
//! let q = PermDistribution::uniform_on(&set).unwrap();
//! let x = DataVec::new(vec![1.0, 2.0, -0.5, 0.3]);
//! let report = pvalue_exhaustive(&x, &Statistic::sum_first_k(2), &q, &mut RngStream::new(7, 0)).unwrap();
//! assert!(report.p_value.unwrap() >= 1.0 / 3.0);
//! ```
//!
//! Runnable tours live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `naive_failure` | the naive subset p-value is anti-conservative |
//! | `corrected_subset` | drawing an anchor restores validity |
//! | `weighted_distribution` | arbitrary weighted `q` |
//! | `sampled_tests` | Monte Carlo p-values with and without replacement |
//! | `averaged_pvalues` | `P̄` and its factor-2 guarantee |
//! | `evalues` | e-values and `P ≤ 1/E` |
//! | `randomization` | randomization tests over a design set |
//! | `besag_clifford` | exchangeable draws from a Markov kernel |
//! | `subgroups` | closure of generators and the subgroup collapse |
//! | `calibration` | Monte Carlo type-I error curves |
//! | `independence` | testing `X ⟂ Y` with `|Corr|` |

pub mod calibrate;
pub mod cli;
pub mod dist;
pub mod engine;
pub mod error;
pub mod mcmc;
pub mod oracle;
pub mod perm;
pub mod stats;

pub use calibrate::{mc_calibrate, CalibrationConfig, CalibrationCurve, DataSampler};
pub use dist::{PermDistribution, PermSource, RngStream};
pub use engine::{Method, MethodSpec, Replacement, TestReport};
pub use error::{Error, Result};
pub use oracle::{exact_e_expectation, exact_p_distribution, validity_audit, ExactDistribution};
pub use perm::{generate_subgroup, DataVec, Perm};
pub use stats::Statistic;
