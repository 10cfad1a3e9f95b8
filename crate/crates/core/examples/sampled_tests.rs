//! Monte Carlo p-values: i.i.d. draws from `q`, distinct draws from `S`, and
//! uniform draws from all of `S_n` without enumerating it.

use permkit::engine::pvalue_sampled;
use permkit::{DataVec, Perm, PermDistribution, PermSource, Replacement, RngStream, Statistic};

fn main() -> permkit::Result<()> {
    let stat = Statistic::sum_first_k(5);
    let x = DataVec::new(
        (0..20)
            .map(|i| {
                if i < 5 {
                    1.0 + 0.1 * i as f64
                } else {
                    0.05 * i as f64
                }
            })
            .collect(),
    );

    let all = PermSource::Symmetric { n: 20 };
    for m in [99, 999, 9999] {
        let r = pvalue_sampled(
            &x,
            &stat,
            &all,
            m,
            Replacement::With,
            &mut RngStream::new(1, 0),
        )?;
        println!("S_20, M = {m:>5}: P = {:.4}", r.value());
    }

    let set: Vec<Perm> = (0..20)
        .map(|k| Perm::from_zero_based((0..20).map(|i| (i + k) % 20).collect()))
        .collect::<permkit::Result<_>>()?;
    let cyclic = PermSource::from(PermDistribution::uniform_on(&set)?);
    let r = pvalue_sampled(
        &x,
        &stat,
        &cyclic,
        9,
        Replacement::Without,
        &mut RngStream::new(1, 0),
    )?;
    println!("10 distinct rotations: P = {:.4}", r.value());
    let r = pvalue_sampled(
        &x,
        &stat,
        &cyclic,
        19,
        Replacement::Without,
        &mut RngStream::new(1, 0),
    )?;
    println!("all 20 rotations:      P = {:.4}", r.value());
    Ok(())
}
