//! Simulated rejection rates under an i.i.d. Gaussian null, next to the
//! exact rates from enumeration.

use permkit::{
    exact_p_distribution, mc_calibrate, CalibrationConfig, DataSampler, MethodSpec, Perm,
    PermDistribution, Statistic,
};

fn main() -> permkit::Result<()> {
    let set = vec![
        Perm::identity(4),
        Perm::from_one_based([3, 4, 1, 2])?,
        Perm::from_one_based([4, 3, 2, 1])?,
    ];
    let q = PermDistribution::uniform_on(&set)?;
    let stat = Statistic::sum_first_k(2);
    let alphas = vec![0.2, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];

    for (label, method) in [
        ("naive", MethodSpec::Naive { set: set.clone() }),
        ("corrected", MethodSpec::Exhaustive { q: q.clone() }),
        (
            "sampled M=5",
            MethodSpec::SampledIid {
                source: q.clone().into(),
                m: 5,
            },
        ),
        ("pbar", MethodSpec::PbarExhaustive { q: q.clone() }),
    ] {
        let exact = exact_p_distribution(&[1.0, 2.0, -0.5, 0.3], &stat, &method)?;
        let curve = mc_calibrate(&CalibrationConfig {
            method,
            stat: stat.clone(),
            sampler: DataSampler::Gaussian,
            alphas: alphas.clone(),
            reps: 50_000,
            seed: 1,
        })?;
        println!("{label}");
        for row in &curve.rows {
            let flag = if row.rate > row.bound + 4.0 * row.stderr {
                "  above bound"
            } else {
                ""
            };
            println!(
                "  alpha {:.3}  rate {:.4} ± {:.4}  exact {:.4}  bound {:.3}{flag}",
                row.alpha,
                row.rate,
                row.stderr,
                exact.cdf_f64(row.alpha),
                row.bound
            );
        }
    }
    Ok(())
}
