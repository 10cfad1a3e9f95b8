//! Generated subgroups, and why the anchor does not matter on a group.

use permkit::engine::{pvalue_exhaustive_with_anchor, pvalue_naive};
use permkit::perm::{format_perm_set, is_subgroup, parse_perm_set};
use permkit::{generate_subgroup, DataVec, PermDistribution, Statistic};

fn main() -> permkit::Result<()> {
    let gens = parse_perm_set("2 1 4 3\n3 4 1 2\n", "klein")?;
    let klein = generate_subgroup(4, &gens, 100)?;
    print!("Klein four-group:\n{}", format_perm_set(&klein));

    let gens = parse_perm_set("2 1 3 4 5 6\n2 3 4 5 6 1\n", "s6")?;
    let s6 = generate_subgroup(6, &gens, 1000)?;
    println!("<(1 2), (1 2 3 4 5 6)> has {} elements", s6.len());
    match generate_subgroup(6, &gens, 100) {
        Err(e) => println!("with cap 100: {e}"),
        Ok(_) => unreachable!(),
    }

    let q = PermDistribution::uniform_on(&klein)?;
    let stat = Statistic::sum_first_k(2);
    let x = DataVec::new(vec![0.3, 1.7, -0.2, 0.9]);
    println!("subgroup: {}", is_subgroup(&klein));
    println!("naive P = {}", pvalue_naive(&x, &stat, &klein)?.value());
    for a in &klein {
        let p = pvalue_exhaustive_with_anchor(&x, &stat, &q, a)?.value();
        println!("  anchor {a}: P = {p}");
    }
    Ok(())
}
