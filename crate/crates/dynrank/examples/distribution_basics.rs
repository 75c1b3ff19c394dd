//! The ranking distribution itself: probabilities, scores, sampling and
//! the enumeration Fisher information.
//!
//! Run with: cargo run --example distribution_basics

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dynrank::plackett_luce::{fisher_information, log_pmf, sample, score};
use dynrank::Ranking;

fn main() -> dynrank::Result<()> {
    // Four items with log-scale worths; higher worth means better expected
    // placement. Selection probabilities are proportional to exp(worth).
    let worths = [1.0, 0.2, -0.3, -0.9];

    let observed = Ranking::new(4, vec![0, 1, 2, 3])?;
    println!(
        "P[ranking 1>2>3>4] = {:.6}",
        log_pmf(&observed, &worths)?.exp()
    );

    // An upset: the weakest item wins. The score rewards it strongly and
    // punishes the favourite.
    let upset = Ranking::new(4, vec![3, 1, 2, 0])?;
    println!("P[upset 4>2>3>1]  = {:.6}", log_pmf(&upset, &worths)?.exp());
    let g = score(&upset, &worths)?;
    println!(
        "score after upset  = [{:+.3}, {:+.3}, {:+.3}, {:+.3}] (sums to {:.1e})",
        g[0],
        g[1],
        g[2],
        g[3],
        g.iter().sum::<f64>()
    );

    // Partial rankings: only a podium is observed, everyone else is
    // implicitly below.
    let podium = Ranking::new(4, vec![0, 2])?;
    println!(
        "P[top two = (1, 3)] = {:.6}",
        log_pmf(&podium, &worths)?.exp()
    );

    // Sequential sampling draws rankings from the same distribution.
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut wins = [0usize; 4];
    let draws = 100_000;
    for _ in 0..draws {
        wins[sample(&worths, 4, &mut rng)?.ordering()[0]] += 1;
    }
    println!("\nempirical win rates over {draws} draws:");
    let denom: f64 = worths.iter().map(|w| w.exp()).sum();
    for (i, w) in wins.iter().enumerate() {
        println!(
            "  item {}: {:.4} (softmax of worths gives {:.4})",
            i + 1,
            *w as f64 / draws as f64,
            worths[i].exp() / denom
        );
    }

    // Exact Fisher information by enumerating all 24 rankings.
    let info = fisher_information(&worths)?;
    println!("\nFisher information (row 1): {:+.4?}", {
        let row: Vec<f64> = (0..4).map(|c| info[(0, c)]).collect();
        row
    });
    Ok(())
}
