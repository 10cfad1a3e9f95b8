//! Drawing an anchor `σ₀` uniformly from `S` makes the subset test valid.

use permkit::engine::pvalue_exhaustive_with_anchor;
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

    for anchor in &set {
        let r = pvalue_exhaustive_with_anchor(&x, &stat, &q, anchor)?;
        println!("anchor {anchor}: P = {:.4}", r.value());
    }

    let spec = MethodSpec::Exhaustive { q };
    for seed in 0..3 {
        let r = spec.run(&x, &stat, &mut RngStream::new(seed, 0))?;
        let anchor = r.anchor.as_ref().expect("anchored method");
        println!("seed {seed}: drew {anchor}, P = {:.4}", r.value());
    }

    let law = exact_p_distribution(x.values(), &stat, &spec)?;
    let audit = validity_audit(&law, 1);
    println!("law of P: {law}  valid: {}", audit.pass);
    Ok(())
}
