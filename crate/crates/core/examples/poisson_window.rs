//! Poisson counts on a window, dyadic count fields, and independence of
//! disjoint halves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tidpp::continuum::{dyadic_project, sample_poisson, write_counts_csv, WindowBox};
use tidpp::stats::{covariance, MomentSummary};

fn main() -> tidpp::error::Result<()> {
    let cube = WindowBox::unit(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (left, right) = (WindowBox::new(vec![0.0, 0.0], vec![0.5, 1.0])?, WindowBox::new(vec![0.5, 0.0], vec![1.0, 1.0])?);
    let (mut total, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..50_000 {
        let c = sample_poisson(&cube, 5.0, &mut rng)?;
        total.push(c.len() as f64);
        a.push(c.count_in(&left) as f64);
        b.push(c.count_in(&right) as f64);
    }
    let m = MomentSummary::from_samples(&total);
    let cov = covariance(&a, &b);
    println!("mean {:.4} ± {:.4}, variance {:.4}, half covariance {:.4} ± {:.4}", m.mean.value, m.mean.std_error, m.variance.value, cov.value, cov.std_error);

    let config = sample_poisson(&cube, 20.0, &mut rng)?;
    println!("{} points; level-3 count field:", config.len());
    write_counts_csv(std::io::stdout().lock(), 2, &dyadic_project(&config, 3)?)
}
