//! Exchangeable copies from a Markov chain: `s` steps back to a hidden
//! state, then `M` independent `s`-step runs forward.

use permkit::mcmc::{bc_pvalue, bc_pvalue_permutation, MarkovKernel};
use permkit::{
    exact_p_distribution, validity_audit, DataVec, MethodSpec, Perm, PermDistribution, RngStream,
    Statistic,
};
use rand::Rng;

/// Adjacent transpositions on a binary sequence: a reversible chain whose
/// stationary law is uniform over sequences with the same number of ones.
struct AdjacentSwap;

impl MarkovKernel for AdjacentSwap {
    type State = Vec<u8>;

    fn forward(&self, z: &Vec<u8>, rng: &mut RngStream) -> Vec<u8> {
        let mut z = z.clone();
        let i = rng.random_range(0..z.len() - 1);
        z.swap(i, i + 1);
        z
    }

    fn backward(&self, z: &Vec<u8>, rng: &mut RngStream) -> Vec<u8> {
        self.forward(z, rng)
    }
}

fn longest_run(z: &Vec<u8>) -> permkit::Result<f64> {
    let (mut best, mut cur) = (0, 0);
    for &b in z {
        cur = if b == 1 { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    Ok(best as f64)
}

fn main() -> permkit::Result<()> {
    let z = vec![0, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0];
    for steps in [1, 5, 25] {
        let out = bc_pvalue(
            &z,
            199,
            steps,
            &AdjacentSwap,
            longest_run,
            &mut RngStream::new(3, 0),
        )?;
        println!("swap chain, s = {steps:>2}: P = {:.3}", out.p_value);
    }

    let set = vec![
        Perm::identity(4),
        Perm::from_one_based([3, 4, 1, 2])?,
        Perm::from_one_based([4, 3, 2, 1])?,
    ];
    let q = PermDistribution::uniform_on(&set)?;
    let stat = Statistic::sum_first_k(2);
    let x = DataVec::new(vec![1.0, 2.0, -0.5, 0.3]);
    let r = bc_pvalue_permutation(&x, &stat, &q, 3, 2, &mut RngStream::new(4, 0))?;
    println!(
        "permutation kernel: P = {:.3}, anchor {}",
        r.value(),
        r.anchor.expect("anchor")
    );

    let law = exact_p_distribution(
        x.values(),
        &stat,
        &MethodSpec::BesagClifford { q, m: 3, steps: 2 },
    )?;
    println!(
        "exact law (M = 3, s = 2): {law}  valid: {}",
        validity_audit(&law, 1).pass
    );
    Ok(())
}
