//! Command-line surface: `fit`, `simulate`, `study` and `predict`.
//!
//! Every subcommand takes `--config PATH` plus `--key value` overrides for
//! any configuration key; see [`crate::io::RunConfig`]. Exit codes: 0 on
//! success, 1 for usage or configuration errors, 2 for data validation
//! errors, 3 for numerical failures (including a fit that did not
//! converge).

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::estimate::{fit, standard_errors, FitResult};
use crate::filter::{ModelSpec, ParameterVector, Variant};
use crate::io::{
    load_dataset, load_next_covariates, load_worths, render_aic_comparison,
    render_covariates_csv, render_fit_summary, render_parameter_table, render_predicted_ranking,
    render_predicted_worths, render_rankings_csv, render_worth_paths_csv, RunConfig,
    VariantChoice,
};
use crate::optim::OptimizerConfig;
use crate::predict::{event_probability, predict_worth, predicted_ranking, EventConfig, RankingEvent};
use crate::simulate::{omega_grid, replication_study, simulate_panel, SimulateOptions, SimulationDesign};

const USAGE: &str = "\
dynrank - score-driven Plackett-Luce models for time-varying rankings

USAGE:
  dynrank <fit|simulate|study|predict> [--config PATH] [--key value ...]

COMMON FLAGS:
  --config PATH       flat key = value configuration file
  --out DIR           output directory (default: out)
  --seed INT          random seed
  --variant NAME      static | mean-reverting | random-walk | all (fit only)

fit:      --rankings PATH [--covariates PATH]
          writes parameters.csv, summary.csv, worth_paths.csv
          (per-variant suffixes plus aic_comparison.csv for --variant all)
simulate: --sim_items N --sim_periods T [--sim_top K]
          writes rankings.csv, covariates.csv, latent_worths.csv
study:    --study_items LIST --study_horizons LIST --study_replications R
          writes study.csv
predict:  --rankings PATH [--covariates PATH] [--next_covariates PATH]
          [--worths PATH] [--participants A,B,C] [--event SPEC ...]
          event specs: top:ITEM:K | rank:ITEM:R | order:A,B,C
          writes predicted_worths.csv, predicted_ranking.csv, events.csv
";

/// Run the CLI; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(command) = args.first() else {
        print!("{USAGE}");
        return Err(Error::Usage("missing subcommand".into()));
    };
    match command.as_str() {
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            Ok(())
        }
        "fit" => cmd_fit(&parse_config(&args[1..])?),
        "simulate" => cmd_simulate(&parse_config(&args[1..])?),
        "study" => cmd_study(&parse_config(&args[1..])?),
        "predict" => cmd_predict(&parse_config(&args[1..])?),
        other => {
            print!("{USAGE}");
            Err(Error::Usage(format!("unknown subcommand '{other}'")))
        }
    }
}

/// `--key value` pairs; a `--config` file is loaded first, everything else
/// overrides it in command-line order.
fn parse_config(args: &[String]) -> Result<RunConfig> {
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let Some(key) = args[i].strip_prefix("--") else {
            return Err(Error::Usage(format!(
                "expected '--key value', found '{}'",
                args[i]
            )));
        };
        let Some(value) = args.get(i + 1) else {
            return Err(Error::Usage(format!("flag '--{key}' needs a value")));
        };
        pairs.push((key.to_string(), value.clone()));
        i += 2;
    }

    let mut config = RunConfig::default();
    for (key, value) in &pairs {
        if key == "config" {
            config.merge_file(Path::new(value))?;
        }
    }
    for (key, value) in &pairs {
        if key != "config" {
            config.apply(key, value)?;
        }
    }
    Ok(config)
}

fn write_output(out_dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    std::fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_spec(variant: Variant, config: &RunConfig, data: &PanelDataset) -> Result<ModelSpec> {
    let (default_p, default_q) = match variant {
        Variant::Static => (0, 0),
        Variant::MeanReverting | Variant::RandomWalk => (1, 1),
    };
    let p = config.score_order.unwrap_or(default_p);
    let q = config.ar_order.unwrap_or(default_q);
    Ok(ModelSpec::new(variant, data.n_items(), data.n_covariates(), p, q)?
        .with_absent_mode(config.absent_mode))
}

fn fit_one(
    variant: Variant,
    config: &RunConfig,
    data: &PanelDataset,
    optimizer: &OptimizerConfig,
) -> Result<FitResult> {
    let spec = build_spec(variant, config, data)?;
    let mut fitted = fit(data, &spec, optimizer)?;
    for w in &fitted.warnings {
        eprintln!("warning: {w}");
    }
    if fitted.converged {
        standard_errors(&mut fitted, data, optimizer)?;
    }
    println!(
        "{}: loglik {:.6}, aic {:.6}, converged {}",
        variant.as_str(),
        fitted.loglik,
        fitted.aic,
        fitted.converged
    );
    Ok(fitted)
}

fn write_fit_outputs(
    fitted: &FitResult,
    data: &PanelDataset,
    config: &RunConfig,
    suffix: &str,
) -> Result<()> {
    if fitted.inference.is_some() {
        let table = render_parameter_table(
            fitted,
            data.item_labels(),
            data.covariate_names(),
            config.confidence_level,
        )?;
        write_output(&config.out, &format!("parameters{suffix}.csv"), &table)?;
    }
    write_output(
        &config.out,
        &format!("summary{suffix}.csv"),
        &render_fit_summary(fitted),
    )?;
    write_output(
        &config.out,
        &format!("worth_paths{suffix}.csv"),
        &render_worth_paths_csv(
            data.item_labels(),
            data.period_labels(),
            fitted.filter.worth_path(),
        ),
    )?;
    Ok(())
}

fn cmd_fit(config: &RunConfig) -> Result<()> {
    let rankings_path = config
        .rankings
        .as_ref()
        .ok_or_else(|| Error::Usage("fit needs --rankings PATH".into()))?;
    let data = load_dataset(rankings_path, config.covariates.as_deref(), config)?;
    let optimizer = config.optimizer();

    match config.variant {
        VariantChoice::One(variant) => {
            let fitted = fit_one(variant, config, &data, &optimizer)?;
            write_fit_outputs(&fitted, &data, config, "")?;
            if !fitted.converged {
                return Err(Error::Optimization(
                    "the optimizer did not converge".into(),
                ));
            }
            Ok(())
        }
        VariantChoice::All => {
            let variants = [Variant::Static, Variant::MeanReverting, Variant::RandomWalk];
            let mut fits = Vec::new();
            for variant in variants {
                let fitted = fit_one(variant, config, &data, &optimizer)?;
                let suffix = format!("_{}", variant.as_str());
                write_fit_outputs(&fitted, &data, config, &suffix)?;
                fits.push(fitted);
            }
            let refs: Vec<&FitResult> = fits.iter().collect();
            write_output(
                &config.out,
                "aic_comparison.csv",
                &render_aic_comparison(&refs),
            )?;
            if fits.iter().any(|f| !f.converged) {
                return Err(Error::Optimization(
                    "at least one variant did not converge".into(),
                ));
            }
            Ok(())
        }
    }
}

/// True parameters for simulation: grid intercepts plus the configured
/// dynamics, shaped to the requested variant.
fn simulation_params(config: &RunConfig, variant: Variant) -> Result<(ParameterVector, ModelSpec)> {
    let n = config.sim_items;
    let m = config.sim_covariates;
    let omega = omega_grid(n)?;
    let beta = vec![config.sim_beta; m];
    let (params, spec) = match variant {
        Variant::Static => (
            ParameterVector::new(omega, beta, vec![], vec![])?,
            ModelSpec::static_model(n, m)?,
        ),
        Variant::MeanReverting => (
            ParameterVector::new(omega, beta, vec![config.sim_alpha], vec![config.sim_phi])?,
            ModelSpec::mean_reverting(n, m)?,
        ),
        Variant::RandomWalk => (
            ParameterVector::new(omega, beta, vec![config.sim_alpha], vec![1.0])?,
            ModelSpec::random_walk(n, m)?,
        ),
    };
    Ok((params, spec.with_absent_mode(config.absent_mode)))
}

fn cmd_simulate(config: &RunConfig) -> Result<()> {
    let VariantChoice::One(variant) = config.variant else {
        return Err(Error::Usage("simulate needs a single --variant".into()));
    };
    let (params, spec) = simulation_params(config, variant)?;
    let options = SimulateOptions {
        top: if config.sim_top == 0 {
            None
        } else {
            Some(config.sim_top)
        },
        ..Default::default()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let sim = simulate_panel(&params, &spec, config.sim_periods, &options, &mut rng)?;

    write_output(&config.out, "rankings.csv", &render_rankings_csv(&sim.data))?;
    if sim.data.n_covariates() > 0 {
        write_output(
            &config.out,
            "covariates.csv",
            &render_covariates_csv(&sim.data),
        )?;
    }
    write_output(
        &config.out,
        "latent_worths.csv",
        &render_worth_paths_csv(
            sim.data.item_labels(),
            sim.data.period_labels(),
            &sim.latent_worths,
        ),
    )?;
    Ok(())
}

fn cmd_study(config: &RunConfig) -> Result<()> {
    let design = SimulationDesign {
        item_counts: config.study_items.clone(),
        horizons: config.study_horizons.clone(),
        replications: config.study_replications,
        n_covariates: config.sim_covariates,
        beta: config.sim_beta,
        alpha: config.sim_alpha,
        phi: config.sim_phi,
        confidence_level: config.confidence_level,
        seed: config.seed,
        oracle_mode: config.oracle_mode,
    };
    let report = replication_study(&design, &config.optimizer())?;
    write_output(&config.out, "study.csv", &report.to_csv())
}

fn parse_event(
    spec_text: &str,
    labels: &[String],
    participants: &[usize],
) -> Result<RankingEvent> {
    let lookup = |label: &str| -> Result<usize> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Usage(format!("unknown item '{label}' in event '{spec_text}'")))
    };
    let parts: Vec<&str> = spec_text.split(':').collect();
    match parts.as_slice() {
        ["top", item, k] => {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Usage(format!("bad k in event '{spec_text}'")))?;
            RankingEvent::top_k(participants.to_vec(), lookup(item)?, k)
        }
        ["rank", item, r] => {
            let r: usize = r
                .parse()
                .map_err(|_| Error::Usage(format!("bad rank in event '{spec_text}'")))?;
            RankingEvent::at_rank(participants.to_vec(), lookup(item)?, r)
        }
        ["order", sequence] => {
            let seq = sequence
                .split(',')
                .map(|l| lookup(l.trim()))
                .collect::<Result<Vec<usize>>>()?;
            RankingEvent::exact_ordering(participants.to_vec(), seq)
        }
        _ => Err(Error::Usage(format!(
            "cannot parse event '{spec_text}' (expected top:ITEM:K, rank:ITEM:R or order:A,B,C)"
        ))),
    }
}

fn cmd_predict(config: &RunConfig) -> Result<()> {
    // Worths either come from a file or from a fresh fit.
    let (labels, worths) = if let Some(worths_path) = &config.worths {
        let (labels, worths) = load_worths(worths_path)?;
        (labels, worths)
    } else {
        let rankings_path = config.rankings.as_ref().ok_or_else(|| {
            Error::Usage("predict needs --rankings PATH (or --worths PATH)".into())
        })?;
        let data = load_dataset(rankings_path, config.covariates.as_deref(), config)?;
        let VariantChoice::One(variant) = config.variant else {
            return Err(Error::Usage("predict needs a single --variant".into()));
        };
        let optimizer = config.optimizer();
        let fitted = fit_one(variant, config, &data, &optimizer)?;
        if !fitted.converged {
            return Err(Error::Optimization(
                "the optimizer did not converge".into(),
            ));
        }
        let next = match &config.next_covariates {
            Some(path) => {
                load_next_covariates(path, data.item_labels(), data.covariate_names())?
            }
            None => vec![0.0; data.n_items() * data.n_covariates()],
        };
        let worths = predict_worth(&fitted, &next)?;
        (data.item_labels().to_vec(), worths)
    };

    let participants: Vec<usize> = if config.participants.is_empty() {
        (0..labels.len()).collect()
    } else {
        config
            .participants
            .iter()
            .map(|label| {
                labels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| Error::Usage(format!("unknown participant '{label}'")))
            })
            .collect::<Result<Vec<usize>>>()?
    };

    write_output(
        &config.out,
        "predicted_worths.csv",
        &render_predicted_worths(&labels, &worths),
    )?;
    let ordering = predicted_ranking(&worths, &participants)?;
    write_output(
        &config.out,
        "predicted_ranking.csv",
        &render_predicted_ranking(&labels, &ordering),
    )?;

    if !config.events.is_empty() {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        let event_config = EventConfig::default();
        let mut out = String::from("event,probability,method,std_error\n");
        for spec_text in &config.events {
            let event = parse_event(spec_text, &labels, &participants)?;
            let estimate = event_probability(&worths, &event, &event_config, &mut rng)?;
            let method = if estimate.exact { "exact" } else { "monte-carlo" };
            let se = estimate
                .std_error
                .map(|s| format!("{s:.6}"))
                .unwrap_or_default();
            // Ordering events carry commas; keep the CSV single-delimiter.
            let name = spec_text.replace(',', ";");
            out.push_str(&format!(
                "{name},{:.6},{method},{se}\n",
                estimate.probability
            ));
        }
        write_output(&config.out, "events.csv", &out)?;
    }
    Ok(())
}
