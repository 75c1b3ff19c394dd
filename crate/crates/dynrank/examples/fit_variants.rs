//! Fit the static, mean-reverting and random-walk variants to the bundled
//! tournament data and compare them by AIC.
//!
//! Run with: cargo run --example fit_variants

use std::path::Path;

use dynrank::io::{load_dataset, RunConfig};
use dynrank::{
    fit, standard_errors, unconditional_worth, ModelSpec, OptimizerConfig, Variant,
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
    println!(
        "panel: {} teams, {} seasons, {} ranked per season\n",
        data.n_items(),
        data.n_periods(),
        data.ranking(0).ranked_count()
    );

    let optimizer = OptimizerConfig::default();
    let mut results = Vec::new();
    for variant in [Variant::Static, Variant::MeanReverting, Variant::RandomWalk] {
        let spec = match variant {
            Variant::Static => ModelSpec::static_model(data.n_items(), 1)?,
            Variant::MeanReverting => ModelSpec::mean_reverting(data.n_items(), 1)?,
            Variant::RandomWalk => ModelSpec::random_walk(data.n_items(), 1)?,
        };
        let mut fitted = fit(&data, &spec, &optimizer)?;
        standard_errors(&mut fitted, &data, &optimizer)?;
        println!(
            "{:14} loglik {:9.3}  aic {:9.3}  ({} free parameters)",
            variant.as_str(),
            fitted.loglik,
            fitted.aic,
            spec.free_param_len()
        );
        results.push(fitted);
    }

    let best = results
        .iter()
        .min_by(|a, b| a.aic.partial_cmp(&b.aic).unwrap())
        .unwrap();
    println!("\nbest by AIC: {}", best.spec.variant().as_str());

    // Dynamics of the winning model with normal-theory standard errors.
    let inference = best.inference.as_ref().unwrap();
    let k = best.free_params.len();
    println!(
        "  alpha = {:.3} (se {:.3}), phi = {:.3} (se {:.3}), home_ice = {:.3} (se {:.3})",
        best.free_params[k - 2],
        inference.std_errors[k - 2],
        best.free_params[k - 1],
        inference.std_errors[k - 1],
        best.free_params[k - 3],
        inference.std_errors[k - 3],
    );

    // Long-run strengths imply an "ultimate" ranking of the teams.
    let ultimate = unconditional_worth(&best.params, &best.spec)?;
    let mut order: Vec<usize> = (0..data.n_items()).collect();
    order.sort_by(|&a, &b| ultimate[b].partial_cmp(&ultimate[a]).unwrap());
    println!("\nlong-run strength, top six:");
    for &i in order.iter().take(6) {
        println!("  {:8} {:+.3}", data.item_labels()[i], ultimate[i]);
    }
    Ok(())
}
