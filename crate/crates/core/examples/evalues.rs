//! Permutation e-values and their relation to the matching p-value.

use std::num::NonZeroUsize;

use permkit::engine::{evalue, pvalue_exchangeable};
use permkit::{
    exact_e_expectation, DataVec, Perm, PermDistribution, PermSource, RngStream, Statistic,
};

fn main() -> permkit::Result<()> {
    let stat = Statistic::sum_first_k(3);
    let x = DataVec::new(vec![1.4, 0.9, 1.1, -0.3, 0.2, -0.8, 0.0, 0.4]);
    let source = PermSource::Symmetric { n: 8 };

    let draws = source.draw_iid(
        NonZeroUsize::new(200).expect("nonzero"),
        &mut RngStream::new(9, 0),
    );
    let e = evalue(&x, &stat, &draws)?;
    let p = pvalue_exchangeable(&x, &stat, &draws)?;
    println!(
        "E = {:.3}  1/E = {:.4}  P = {:.4}",
        e.value(),
        e.inverse_e_value.expect("e-value report"),
        p.value()
    );

    let q = PermDistribution::uniform_on(&Perm::all(4)?)?;
    for m in [1, 2] {
        let mean = exact_e_expectation(&[1.0, 2.0, -0.5, 0.3], &Statistic::sum_first_k(2), &q, m)?;
        println!("exact null mean of E with M = {m}: {mean:.12}");
    }
    Ok(())
}
