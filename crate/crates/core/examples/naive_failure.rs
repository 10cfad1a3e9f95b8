//! The naive subset p-value on a set that is not a group.
//!
//! Enumerating every arrangement of four fixed values shows
//! `P(P ≤ 1/3) = 1/2`: the test rejects far too often at level 1/3.

use permkit::oracle::{for_each_point, to_f64};
use permkit::perm::is_subgroup;
use permkit::{exact_p_distribution, validity_audit, MethodSpec, Perm, Statistic};

fn main() -> permkit::Result<()> {
    let set = vec![
        Perm::identity(4),
        Perm::from_one_based([3, 4, 1, 2])?,
        Perm::from_one_based([4, 3, 2, 1])?,
    ];
    println!("S is a subgroup: {}", is_subgroup(&set));

    let values = [1.0, 2.0, -0.5, 0.3];
    let stat = Statistic::sum_first_k(2);
    let naive = MethodSpec::Naive { set };

    let law = exact_p_distribution(&values, &stat, &naive)?;
    println!("law of P: {law}");

    let audit = validity_audit(&law, 1);
    println!(
        "valid: {}  worst level {} has P(P <= a) = {}",
        audit.pass, audit.worst_alpha, audit.worst_cdf
    );

    println!("\nfirst arrangements:");
    let mut shown = 0;
    for_each_point(&values, &stat, &naive, |pt| {
        if shown < 6 {
            println!("  x = {:?}  P = {:.4}", pt.data, to_f64(&pt.value));
            shown += 1;
        }
    })?;
    Ok(())
}
