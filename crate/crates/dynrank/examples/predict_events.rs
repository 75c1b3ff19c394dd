//! One-step-ahead prediction: next-season strengths, the implied ranking,
//! and win / podium probabilities for the bundled tournament data.
//!
//! Run with: cargo run --example predict_events

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dynrank::io::{load_dataset, RunConfig};
use dynrank::{
    event_probability, fit, predict_worth, predicted_ranking, standard_errors, EventConfig,
    ModelSpec, OptimizerConfig, RankingEvent,
};

fn main() -> dynrank::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let config = RunConfig {
        covariate_names: vec!["home_ice".into()],
        sparse_covariates: vec!["home_ice".into()],
        ..RunConfig::default()
    };
    let data = load_dataset(
        &dir.join("example_rankings.csv"),
        Some(&dir.join("example_covariates.csv")),
        &config,
    )?;

    let spec = ModelSpec::mean_reverting(data.n_items(), 1)?;
    let optimizer = OptimizerConfig::default();
    let mut fitted = fit(&data, &spec, &optimizer)?;
    standard_errors(&mut fitted, &data, &optimizer)?;
    println!(
        "mean-reverting fit: loglik {:.3}, aic {:.3}",
        fitted.loglik, fitted.aic
    );

    // Next season: no home team among the contenders, so the home-ice
    // covariate is zero for everyone.
    let next_covariates = vec![0.0; data.n_items()];
    let worths = predict_worth(&fitted, &next_covariates)?;

    // Suppose the eight currently strongest teams contest the next title.
    let mut by_strength: Vec<usize> = (0..data.n_items()).collect();
    by_strength.sort_by(|&a, &b| worths[b].partial_cmp(&worths[a]).unwrap());
    let mut participants = by_strength[..8].to_vec();
    participants.sort_unstable();

    let podium = predicted_ranking(&worths, &participants)?;
    println!("\npredicted next-season ranking of the eight contenders:");
    for (pos, &i) in podium.iter().enumerate() {
        println!(
            "  {}. {:8} (strength {:+.3})",
            pos + 1,
            data.item_labels()[i],
            worths[i]
        );
    }

    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let event_config = EventConfig::default();
    println!("\nwin and podium probabilities:");
    for &i in podium.iter().take(4) {
        let gold = event_probability(
            &worths,
            &RankingEvent::top_k(participants.clone(), i, 1)?,
            &event_config,
            &mut rng,
        )?;
        let podium_prob = event_probability(
            &worths,
            &RankingEvent::top_k(participants.clone(), i, 3)?,
            &event_config,
            &mut rng,
        )?;
        println!(
            "  {:8} P[wins] = {:.3}   P[podium] = {:.3}",
            data.item_labels()[i],
            gold.probability,
            podium_prob.probability
        );
    }

    // The probability that the podium comes out exactly as predicted.
    let exact = event_probability(
        &worths,
        &RankingEvent::exact_ordering(participants.clone(), podium[..3].to_vec())?,
        &event_config,
        &mut rng,
    )?;
    println!(
        "\nP[podium is exactly ({}, {}, {})] = {:.4}",
        data.item_labels()[podium[0]],
        data.item_labels()[podium[1]],
        data.item_labels()[podium[2]],
        exact.probability
    );
    Ok(())
}
