//! Exact sampling from a random 6-site kernel, checked against the
//! brute-force subset law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tidpp::discrete::{exact_distribution, inclusion_prob, tv_distance, DiscreteKernel, Sampler};

fn main() -> tidpp::error::Result<()> {
    let k = DiscreteKernel::random(6, 0.05, 0.95, &mut ChaCha8Rng::seed_from_u64(7));
    println!("spectrum {:.3?}", k.eigenvalues());
    let exact = exact_distribution(&k)?;
    println!("P(0 and 1 both present) = {:.4}", inclusion_prob(&k, &[0, 1])?);
    println!("count law {:.4?}", exact.count_law());
    let sampler = Sampler::new(&k)?;
    for seed in 1..=3 {
        let hist = sampler.histogram(seed, 100_000)?;
        println!("seed {seed}: TV(empirical, exact) = {:.4}", tv_distance(&hist, &exact));
    }
    Ok(())
}
