//! A desk-scale Monte Carlo study: how accurate are the estimates, and how
//! honest are the confidence intervals, as the panel grows?
//!
//! Run with: cargo run --release --example coverage_study

use dynrank::{replication_study, OptimizerConfig, ParameterGroup, SimulationDesign};

fn main() -> dynrank::Result<()> {
    let design = SimulationDesign {
        item_counts: vec![10],
        horizons: vec![10, 20, 40],
        replications: 100,
        seed: 2024,
        ..SimulationDesign::default()
    };
    let config = OptimizerConfig {
        restarts: 1,
        ..OptimizerConfig::default()
    };
    println!(
        "replicating simulate -> fit -> confidence intervals, {} runs per cell\n",
        design.replications
    );
    let report = replication_study(&design, &config)?;

    println!("{:>4} {:>4} {:>7} {:>9} {:>9} {:>6}", "N", "T", "group", "MAE", "coverage", "fails");
    for cell in &report.cells {
        println!(
            "{:>4} {:>4} {:>7} {:>9.4} {:>9} {:>6}",
            cell.n_items,
            cell.horizon,
            cell.group.as_str(),
            cell.mae,
            cell.coverage
                .map(|c| format!("{c:.3}"))
                .unwrap_or_else(|| "NA".into()),
            cell.n_fail
        );
    }

    // Mean absolute errors fall with the horizon; coverage climbs toward
    // the nominal 95 per cent.
    let alpha_short = report.cell(10, 10, ParameterGroup::Alpha).unwrap();
    let alpha_long = report.cell(10, 40, ParameterGroup::Alpha).unwrap();
    println!(
        "\nscore-loading MAE {:.3} -> {:.3} and coverage {:.3} -> {:.3} from T=10 to T=40",
        alpha_short.mae,
        alpha_long.mae,
        alpha_short.coverage.unwrap(),
        alpha_long.coverage.unwrap()
    );
    Ok(())
}
