//! Averaging over the anchor removes its randomness at the cost of a factor
//! of two in the guarantee.

use permkit::engine::{pbar_exhaustive, pbar_sampled};
use permkit::{
    exact_p_distribution, validity_audit, DataVec, MethodSpec, Perm, PermDistribution, RngStream,
    Statistic,
};

fn main() -> permkit::Result<()> {
    let set = vec![
        Perm::identity(4),
        Perm::from_one_based([3, 4, 1, 2])?,
        Perm::from_one_based([4, 3, 2, 1])?,
    ];
    let q = PermDistribution::uniform_on(&set)?;
    let stat = Statistic::sum_first_k(2);
    let x = DataVec::new(vec![1.0, 2.0, -0.5, 0.3]);

    println!(
        "exhaustive average: {:.4}",
        pbar_exhaustive(&x, &stat, &q)?.value()
    );
    for m in [10, 100, 2000] {
        let r = pbar_sampled(&x, &stat, &q.clone().into(), m, &mut RngStream::new(5, 0))?;
        println!("sampled, M = {m:>4}:  {:.4}", r.value());
    }

    let law = exact_p_distribution(x.values(), &stat, &MethodSpec::PbarExhaustive { q })?;
    println!("law: {law}");
    println!("factor 1: {}", validity_audit(&law, 1).pass);
    println!("factor 2: {}", validity_audit(&law, 2).pass);
    Ok(())
}
