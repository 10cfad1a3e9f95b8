//! Any distribution `q` over permutations, with unnormalized weights.

use permkit::dist::parse_distribution;
use permkit::{exact_p_distribution, validity_audit, DataVec, MethodSpec, RngStream, Statistic};

const Q: &str = "\
# weight  permutation
4.0  1 2 3 4 5
2.0  2 1 3 4 5
1.0  1 3 2 5 4
1.0  5 4 3 2 1
0.5  2 3 4 5 1
";

fn main() -> permkit::Result<()> {
    let q = parse_distribution(Q, "inline")?;
    println!(
        "support {} with weights {:?} (given sum {})",
        q.len(),
        q.weights(),
        q.raw_sum()
    );

    let stat = Statistic::sum_first_k(2);
    let x = DataVec::new(vec![2.1, 1.7, -0.4, 0.0, 0.9]);
    let spec = MethodSpec::Exhaustive { q };

    let r = spec.run(&x, &stat, &mut RngStream::new(2024, 0))?;
    println!("{}", serde_json::to_string(&r).expect("report serializes"));

    let law = exact_p_distribution(x.values(), &stat, &spec)?;
    let audit = validity_audit(&law, 1);
    println!("{} atoms, valid: {}", law.atoms().len(), audit.pass);
    for (alpha, cdf) in [(1, 10), (1, 4), (1, 2)].map(|(a, b)| {
        let a = permkit::oracle::ratio(a, b);
        let c = law.cdf(&a);
        (a, c)
    }) {
        println!("  P(P <= {alpha}) = {cdf}");
    }
    Ok(())
}
