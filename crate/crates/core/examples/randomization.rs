//! A randomization test: the assignment was drawn uniformly from a design
//! set, so the observed statistic is the one at that assignment.

use permkit::engine::randomization_pvalue;
use permkit::{exact_p_distribution, validity_audit, DataVec, MethodSpec, Perm, Statistic};

fn main() -> permkit::Result<()> {
    // Six units; the design picks one of four balanced splits.
    let design = vec![
        Perm::identity(6),
        Perm::from_one_based([4, 5, 6, 1, 2, 3])?,
        Perm::from_one_based([1, 4, 5, 2, 3, 6])?,
        Perm::from_one_based([2, 6, 4, 1, 3, 5])?,
    ];
    let treated = vec![true, true, true, false, false, false];
    let stat = Statistic::diff_means(treated)?;
    let outcomes = DataVec::new(vec![3.1, 2.4, 2.9, 1.0, 1.6, 0.7]);

    for assigned in &design {
        let r = randomization_pvalue(assigned, &outcomes, &stat, &design)?;
        println!("assigned {assigned}: P = {:.3}", r.value());
    }

    let law = exact_p_distribution(
        outcomes.values(),
        &stat,
        &MethodSpec::Randomization { set: design },
    )?;
    println!("law over arrangements: {law}");
    println!("valid: {}", validity_audit(&law, 1).pass);
    Ok(())
}
