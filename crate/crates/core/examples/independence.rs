//! Testing independence of paired data with `|Corr(X, Y)|`, permuting `X`
//! while `Y` stays fixed.

use permkit::engine::pvalue_sampled;
use permkit::{DataVec, PermSource, Replacement, RngStream, Statistic};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> permkit::Result<()> {
    let n = 30;
    let mut rng = RngStream::new(17, 0);
    let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    let stat = Statistic::abs_corr().with_covariate(y.clone());
    let all = PermSource::Symmetric { n };
    for rho in [0.0, 0.3, 0.6] {
        let x = DataVec::new(
            y.iter()
                .zip(&noise)
                .map(|(a, e)| rho * a + (1.0 - rho * rho).sqrt() * e)
                .collect(),
        );
        let r = pvalue_sampled(
            &x,
            &stat,
            &all,
            4999,
            Replacement::With,
            &mut RngStream::new(17, 1),
        )?;
        println!(
            "rho = {rho}: |r| = {:.3}, P = {:.4}",
            r.statistic_value,
            r.value()
        );
    }
    Ok(())
}
