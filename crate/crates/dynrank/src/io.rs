//! File formats and run configuration.
//!
//! Rankings and covariates travel as long-format CSV (UTF-8, comma
//! delimiter, header row, `.` decimal separator, LF line endings on
//! output):
//!
//! - rankings: `time,item,rank` with one row per ranked item and period;
//!   items absent from a period simply have no rows there.
//! - covariates: `time,item,covariate,value`.
//!
//! Within a period the ranks must form a contiguous `1..m` block with no
//! duplicates; a duplicate rank is a tie, which this model does not
//! support, and is rejected at parse time with the offending line number.
//!
//! Run configuration is a flat `key = value` file (`#` starts a comment);
//! every key can also be overridden on the command line as `--key value`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::filter::{AbsentMode, Variant};
use crate::optim::OptimizerConfig;
use crate::ranking::Ranking;
use crate::stats::two_sided_p_value;

/// Which model variants a `fit` run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantChoice {
    One(Variant),
    /// Fit all three variants and write an AIC comparison.
    All,
}

/// One run's settings: data locations, model shape, optimizer knobs and the
/// simulation / study / prediction inputs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub rankings: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    pub out: PathBuf,
    pub variant: VariantChoice,
    pub score_order: Option<usize>,
    pub ar_order: Option<usize>,
    pub absent_mode: AbsentMode,
    pub covariate_names: Vec<String>,
    pub sparse_covariates: Vec<String>,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub relative_tolerance: f64,
    pub restarts: usize,
    pub fd_step: f64,
    pub hessian_step: f64,
    pub confidence_level: f64,
    pub sim_items: usize,
    pub sim_periods: usize,
    pub sim_covariates: usize,
    pub sim_alpha: f64,
    pub sim_phi: f64,
    pub sim_beta: f64,
    /// 0 keeps simulated rankings complete; otherwise ranks the top `k`.
    pub sim_top: usize,
    pub study_items: Vec<usize>,
    pub study_horizons: Vec<usize>,
    pub study_replications: usize,
    pub oracle_mode: bool,
    pub participants: Vec<String>,
    pub events: Vec<String>,
    pub next_covariates: Option<PathBuf>,
    pub worths: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rankings: None,
            covariates: None,
            out: PathBuf::from("out"),
            variant: VariantChoice::One(Variant::MeanReverting),
            score_order: None,
            ar_order: None,
            absent_mode: AbsentMode::PartialLikelihood,
            covariate_names: Vec::new(),
            sparse_covariates: Vec::new(),
            seed: 0,
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            relative_tolerance: 1e-9,
            restarts: 3,
            fd_step: 1e-6,
            hessian_step: 1e-4,
            confidence_level: 0.95,
            sim_items: 20,
            sim_periods: 20,
            sim_covariates: 1,
            sim_alpha: 0.4,
            sim_phi: 0.5,
            sim_beta: 1.0,
            sim_top: 0,
            study_items: vec![20],
            study_horizons: vec![20],
            study_replications: 500,
            oracle_mode: false,
            participants: Vec::new(),
            events: Vec::new(),
            next_covariates: None,
            worths: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    parse_list(value)
        .iter()
        .map(|s| parse_num(key, s))
        .collect()
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "rankings" => self.rankings = Some(PathBuf::from(value)),
            "covariates" => self.covariates = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "variant" => {
                self.variant = if value == "all" {
                    VariantChoice::All
                } else {
                    VariantChoice::One(Variant::parse(value)?)
                }
            }
            "score_order" => self.score_order = Some(parse_num(key, value)?),
            "ar_order" => self.ar_order = Some(parse_num(key, value)?),
            "absent_mode" => self.absent_mode = AbsentMode::parse(value)?,
            "covariate_names" => self.covariate_names = parse_list(value),
            "sparse_covariates" => self.sparse_covariates = parse_list(value),
            "seed" => self.seed = parse_num(key, value)?,
            "max_iterations" => self.max_iterations = parse_num(key, value)?,
            "gradient_tolerance" => self.gradient_tolerance = parse_num(key, value)?,
            "relative_tolerance" => self.relative_tolerance = parse_num(key, value)?,
            "restarts" => self.restarts = parse_num(key, value)?,
            "fd_step" => self.fd_step = parse_num(key, value)?,
            "hessian_step" => self.hessian_step = parse_num(key, value)?,
            "confidence_level" => self.confidence_level = parse_num(key, value)?,
            "sim_items" => self.sim_items = parse_num(key, value)?,
            "sim_periods" => self.sim_periods = parse_num(key, value)?,
            "sim_covariates" => self.sim_covariates = parse_num(key, value)?,
            "sim_alpha" => self.sim_alpha = parse_num(key, value)?,
            "sim_phi" => self.sim_phi = parse_num(key, value)?,
            "sim_beta" => self.sim_beta = parse_num(key, value)?,
            "sim_top" => self.sim_top = parse_num(key, value)?,
            "study_items" => self.study_items = parse_usize_list(key, value)?,
            "study_horizons" => self.study_horizons = parse_usize_list(key, value)?,
            "study_replications" => self.study_replications = parse_num(key, value)?,
            "oracle_mode" => self.oracle_mode = parse_num(key, value)?,
            "participants" => self.participants = parse_list(value),
            "event" | "events" => self.events.extend(
                value
                    .split(';')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty()),
            ),
            "next_covariates" => self.next_covariates = Some(PathBuf::from(value)),
            "worths" => self.worths = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Usage(format!("unknown configuration key '{other}'")));
            }
        }
        Ok(())
    }

    /// Load a flat `key = value` configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::default();
        config.merge_file(path)?;
        Ok(config)
    }

    /// Merge a configuration file; relative paths inside it resolve against
    /// the file's own directory.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Usage(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim();
            self.apply(key, value)?;
            if matches!(
                key,
                "rankings" | "covariates" | "out" | "next_covariates" | "worths"
            ) {
                self.rebase_path(key, base);
            }
        }
        Ok(())
    }

    fn rebase_path(&mut self, key: &str, base: &Path) {
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        match key {
            "rankings" => self.rankings.iter_mut().for_each(rebase),
            "covariates" => self.covariates.iter_mut().for_each(rebase),
            "next_covariates" => self.next_covariates.iter_mut().for_each(rebase),
            "worths" => self.worths.iter_mut().for_each(rebase),
            "out" => rebase(&mut self.out),
            _ => {}
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            relative_tolerance: self.relative_tolerance,
            restarts: self.restarts,
            fd_step: self.fd_step,
            hessian_step: self.hessian_step,
            seed: self.seed,
        }
    }
}

struct CsvTable {
    /// (1-based line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &Path, expected_header: &[&str]) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header_line)) = lines.next() else {
        return Err(Error::DataGeneral(format!("{}: empty file", path.display())));
    };
    let header: Vec<String> = header_line
        .trim_end_matches('\r')
        .split(',')
        .map(|f| f.trim().to_lowercase())
        .collect();
    if header != expected_header {
        return Err(Error::Data {
            line: 1,
            message: format!(
                "{}: expected header '{}', found '{}'",
                path.display(),
                expected_header.join(","),
                header.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != expected_header.len() {
            return Err(Error::Data {
                line: idx + 1,
                message: format!(
                    "expected {} fields, found {}",
                    expected_header.len(),
                    fields.len()
                ),
            });
        }
        rows.push((idx + 1, fields));
    }
    Ok(CsvTable { rows })
}

/// Order period labels: numerically when every label parses as an integer,
/// lexicographically otherwise (ISO dates sort correctly either way).
fn sort_period_labels(labels: &mut [String]) {
    if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
}

/// Load a panel from a rankings file and an optional covariates file.
///
/// Items are enumerated in first-appearance order; periods are ordered by
/// their time labels. Every validation failure carries the offending line.
pub fn load_dataset(
    rankings_path: &Path,
    covariates_path: Option<&Path>,
    config: &RunConfig,
) -> Result<PanelDataset> {
    let table = read_csv(rankings_path, &["time", "item", "rank"])?;
    if table.rows.is_empty() {
        return Err(Error::DataGeneral(format!(
            "{}: no ranking rows",
            rankings_path.display()
        )));
    }

    let mut item_labels: Vec<String> = Vec::new();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut period_labels: Vec<String> = Vec::new();
    let mut seen_period: HashMap<String, ()> = HashMap::new();
    // (line, period label, item index, rank)
    let mut records: Vec<(usize, String, usize, usize)> = Vec::new();

    for (line, fields) in &table.rows {
        let time = fields[0].clone();
        let item = fields[1].clone();
        if time.is_empty() || item.is_empty() {
            return Err(Error::Data {
                line: *line,
                message: "empty time or item field".into(),
            });
        }
        let rank: usize = fields[2].parse().map_err(|_| Error::Data {
            line: *line,
            message: format!("rank '{}' is not a positive integer", fields[2]),
        })?;
        if rank == 0 {
            return Err(Error::Data {
                line: *line,
                message: "rank 0 is invalid; ranks start at 1".into(),
            });
        }
        let idx = *item_index.entry(item.clone()).or_insert_with(|| {
            item_labels.push(item.clone());
            item_labels.len() - 1
        });
        if seen_period.insert(time.clone(), ()).is_none() {
            period_labels.push(time.clone());
        }
        records.push((*line, time, idx, rank));
    }

    sort_period_labels(&mut period_labels);
    let period_index: HashMap<&str, usize> = period_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let n_periods = period_labels.len();

    // The covariates file may name items that never enter a ranking (for
    // instance items below every truncation cut); they still belong to the
    // universe. Extend the enumeration before the rankings are built.
    let cov_table = match covariates_path {
        Some(cov_path) => Some(read_csv(cov_path, &["time", "item", "covariate", "value"])?),
        None => None,
    };
    if let Some(table) = &cov_table {
        for (_, fields) in &table.rows {
            if !item_index.contains_key(&fields[1]) {
                item_labels.push(fields[1].clone());
                item_index.insert(fields[1].clone(), item_labels.len() - 1);
            }
        }
    }
    let n_items = item_labels.len();

    // rank -> item per period, with duplicate detection.
    let mut per_period: Vec<HashMap<usize, (usize, usize)>> = vec![HashMap::new(); n_periods];
    let mut per_period_items: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n_periods];
    for (line, time, item, rank) in &records {
        let t = period_index[time.as_str()];
        if let Some(prev_line) = per_period_items[t].get(item) {
            return Err(Error::Data {
                line: *line,
                message: format!(
                    "duplicate (time, item) row: also at line {prev_line} for time '{time}'"
                ),
            });
        }
        per_period_items[t].insert(*item, *line);
        if let Some((other_item, other_line)) = per_period[t].get(rank) {
            return Err(Error::Data {
                line: *line,
                message: format!(
                    "rank {rank} at time '{time}' already used by '{}' on line {other_line}; tied ranks are not supported",
                    item_labels[*other_item]
                ),
            });
        }
        per_period[t].insert(*rank, (*item, *line));
    }

    let mut rankings = Vec::with_capacity(n_periods);
    for (t, ranks) in per_period.iter().enumerate() {
        let m = ranks.len();
        let mut ordering = Vec::with_capacity(m);
        for r in 1..=m {
            match ranks.get(&r) {
                Some((item, _)) => ordering.push(*item),
                None => {
                    let max_rank = ranks.keys().max().copied().unwrap_or(0);
                    let (_, line) = ranks[ranks.keys().max().unwrap()];
                    return Err(Error::Data {
                        line,
                        message: format!(
                            "time '{}' has {m} ranked items but rank {r} is missing (max rank {max_rank}); ranks must be contiguous from 1",
                            period_labels[t]
                        ),
                    });
                }
            }
        }
        rankings.push(Ranking::new(n_items, ordering)?);
    }

    // Covariates.
    let mut covariate_names = config.covariate_names.clone();
    let mut covariates = Vec::new();
    if let Some(cov_table) = &cov_table {
        if covariate_names.is_empty() {
            for (_, fields) in &cov_table.rows {
                if !covariate_names.contains(&fields[2]) {
                    covariate_names.push(fields[2].clone());
                }
            }
        }
        let name_index: HashMap<&str, usize> = covariate_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let m = covariate_names.len();
        let mut values: Vec<Option<f64>> = vec![None; n_periods * n_items * m];
        for (line, fields) in &cov_table.rows {
            let Some(&t) = period_index.get(fields[0].as_str()) else {
                return Err(Error::Data {
                    line: *line,
                    message: format!("time '{}' does not appear in the rankings file", fields[0]),
                });
            };
            // Every covariate-file item is in the index by construction.
            let i = item_index[fields[1].as_str()];
            let Some(&j) = name_index.get(fields[2].as_str()) else {
                return Err(Error::Data {
                    line: *line,
                    message: format!("unknown covariate '{}'", fields[2]),
                });
            };
            let value: f64 = fields[3].parse().map_err(|_| Error::Data {
                line: *line,
                message: format!("value '{}' is not a number", fields[3]),
            })?;
            if !value.is_finite() {
                return Err(Error::Data {
                    line: *line,
                    message: "covariate values must be finite".into(),
                });
            }
            let slot = &mut values[(t * n_items + i) * m + j];
            if slot.is_some() {
                return Err(Error::Data {
                    line: *line,
                    message: format!(
                        "duplicate covariate cell (time '{}', item '{}', covariate '{}')",
                        fields[0], fields[1], fields[2]
                    ),
                });
            }
            *slot = Some(value);
        }

        // A missing cell defaults to zero only for covariates declared
        // sparse, and, under the zero-score treatment, for items absent
        // from the period's ranking.
        covariates = vec![0.0; n_periods * n_items * m];
        for t in 0..n_periods {
            let ranked: Vec<bool> = {
                let mut mask = vec![false; n_items];
                for &i in rankings[t].ordering() {
                    mask[i] = true;
                }
                mask
            };
            for i in 0..n_items {
                let required = match config.absent_mode {
                    AbsentMode::PartialLikelihood => true,
                    AbsentMode::ZeroScore => ranked[i],
                };
                for j in 0..m {
                    match values[(t * n_items + i) * m + j] {
                        Some(v) => covariates[(t * n_items + i) * m + j] = v,
                        None => {
                            let sparse =
                                config.sparse_covariates.contains(&covariate_names[j]);
                            if required && !sparse {
                                return Err(Error::DataGeneral(format!(
                                    "missing covariate '{}' for item '{}' at time '{}' (declare it sparse to default missing cells to zero)",
                                    covariate_names[j], item_labels[i], period_labels[t]
                                )));
                            }
                        }
                    }
                }
            }
        }
    } else if !covariate_names.is_empty() {
        return Err(Error::Usage(
            "covariate names are declared but no covariates file was given".into(),
        ));
    }

    PanelDataset::new(
        rankings,
        covariates,
        covariate_names,
        item_labels,
        period_labels,
    )
}

/// Worths file for prediction without a fit: `item,worth`.
pub fn load_worths(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let table = read_csv(path, &["item", "worth"])?;
    let mut labels = Vec::new();
    let mut worths = Vec::new();
    for (line, fields) in &table.rows {
        if labels.contains(&fields[0]) {
            return Err(Error::Data {
                line: *line,
                message: format!("duplicate item '{}'", fields[0]),
            });
        }
        let w: f64 = fields[1].parse().map_err(|_| Error::Data {
            line: *line,
            message: format!("worth '{}' is not a number", fields[1]),
        })?;
        labels.push(fields[0].clone());
        worths.push(w);
    }
    if labels.is_empty() {
        return Err(Error::DataGeneral(format!(
            "{}: no worth rows",
            path.display()
        )));
    }
    Ok((labels, worths))
}

/// Next-period covariates for prediction: `item,covariate,value`; cells not
/// listed default to zero.
pub fn load_next_covariates(
    path: &Path,
    item_labels: &[String],
    covariate_names: &[String],
) -> Result<Vec<f64>> {
    let table = read_csv(path, &["item", "covariate", "value"])?;
    let mut out = vec![0.0; item_labels.len() * covariate_names.len()];
    let m = covariate_names.len();
    for (line, fields) in &table.rows {
        let Some(i) = item_labels.iter().position(|l| l == &fields[0]) else {
            return Err(Error::Data {
                line: *line,
                message: format!("unknown item '{}'", fields[0]),
            });
        };
        let Some(j) = covariate_names.iter().position(|n| n == &fields[1]) else {
            return Err(Error::Data {
                line: *line,
                message: format!("unknown covariate '{}'", fields[1]),
            });
        };
        let value: f64 = fields[2].parse().map_err(|_| Error::Data {
            line: *line,
            message: format!("value '{}' is not a number", fields[2]),
        })?;
        out[i * m + j] = value;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Output rendering. All tables list item labels lexicographically so that
// reruns diff cleanly.
// ---------------------------------------------------------------------------

fn sorted_item_order(labels: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    order
}

/// Rankings in the long `time,item,rank` format.
pub fn render_rankings_csv(data: &PanelDataset) -> String {
    let mut out = String::from("time,item,rank\n");
    for t in 0..data.n_periods() {
        for (pos, &i) in data.ranking(t).ordering().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                data.period_labels()[t],
                data.item_labels()[i],
                pos + 1
            );
        }
    }
    out
}

/// Covariates in the long `time,item,covariate,value` format. Values use
/// the shortest representation that round-trips through parsing.
pub fn render_covariates_csv(data: &PanelDataset) -> String {
    let mut out = String::from("time,item,covariate,value\n");
    for t in 0..data.n_periods() {
        for i in 0..data.n_items() {
            for j in 0..data.n_covariates() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    data.period_labels()[t],
                    data.item_labels()[i],
                    data.covariate_names()[j],
                    data.covariate(t, i, j)
                );
            }
        }
    }
    out
}

/// A `(period, item)` worth matrix as `time` plus one column per item.
pub fn render_worth_paths_csv(
    item_labels: &[String],
    period_labels: &[String],
    worths: &[f64],
) -> String {
    let n = item_labels.len();
    let order = sorted_item_order(item_labels);
    let mut out = String::from("time");
    for &i in &order {
        let _ = write!(out, ",{}", item_labels[i]);
    }
    out.push('\n');
    for (t, period) in period_labels.iter().enumerate() {
        let _ = write!(out, "{period}");
        for &i in &order {
            let _ = write!(out, ",{:.10}", worths[t * n + i]);
        }
        out.push('\n');
    }
    out
}

/// Parameter table: estimate, standard error, z, p-value and confidence
/// bounds per parameter. Intercept rows are sorted by item label and the
/// derived last intercept is included with its delta-method standard error.
pub fn render_parameter_table(
    fit: &FitResult,
    item_labels: &[String],
    covariate_names: &[String],
    level: f64,
) -> Result<String> {
    let inference = fit
        .inference
        .as_ref()
        .ok_or_else(|| Error::Optimization("parameter table requires standard errors".into()))?;
    let intervals = crate::estimate::confidence_interval(fit, level)?;
    let n = fit.spec.n_items();

    // name -> (estimate, se, interval)
    let mut rows: Vec<(String, f64, f64, (f64, f64))> = Vec::new();
    let derived_index = intervals.len() - 1;
    let order = sorted_item_order(&item_labels[..n]);
    for i in order {
        if i + 1 == n {
            rows.push((
                format!("omega:{}", item_labels[i]),
                fit.omega_last(),
                inference.omega_last_se,
                intervals[derived_index],
            ));
        } else {
            rows.push((
                format!("omega:{}", item_labels[i]),
                fit.free_params[i],
                inference.std_errors[i],
                intervals[i],
            ));
        }
    }
    let mut at = n - 1;
    for name in covariate_names {
        rows.push((
            format!("beta:{name}"),
            fit.free_params[at],
            inference.std_errors[at],
            intervals[at],
        ));
        at += 1;
    }
    for k in 1..=fit.spec.score_order() {
        rows.push((
            format!("alpha:{k}"),
            fit.free_params[at],
            inference.std_errors[at],
            intervals[at],
        ));
        at += 1;
    }
    if fit.spec.variant() != Variant::RandomWalk {
        for l in 1..=fit.spec.ar_order() {
            rows.push((
                format!("phi:{l}"),
                fit.free_params[at],
                inference.std_errors[at],
                intervals[at],
            ));
            at += 1;
        }
    }

    let mut out = String::from("parameter,estimate,std_error,z,p_value,ci_low,ci_high\n");
    for (name, est, se, (lo, hi)) in rows {
        let z = if se > 0.0 { est / se } else { f64::NAN };
        let p = if z.is_finite() {
            two_sided_p_value(z)
        } else {
            f64::NAN
        };
        let _ = writeln!(
            out,
            "{name},{est:.6},{se:.6},{z:.6},{p:.6},{lo:.6},{hi:.6}"
        );
    }
    Ok(out)
}

/// Key-value fit summary.
pub fn render_fit_summary(fit: &FitResult) -> String {
    let mut out = String::from("key,value\n");
    let _ = writeln!(out, "variant,{}", fit.spec.variant().as_str());
    let _ = writeln!(out, "absent_mode,{}", fit.spec.absent_mode().as_str());
    let _ = writeln!(out, "loglik,{:.6}", fit.loglik);
    let _ = writeln!(out, "aic,{:.6}", fit.aic);
    let _ = writeln!(out, "n_free_params,{}", fit.spec.free_param_len());
    let _ = writeln!(out, "converged,{}", fit.converged);
    let _ = writeln!(out, "iterations,{}", fit.iterations);
    let _ = writeln!(out, "gradient_norm,{:.3e}", fit.grad_norm);
    let _ = writeln!(out, "connected,{}", fit.connectivity.connected);
    for w in &fit.warnings {
        let _ = writeln!(out, "warning,{}", w.replace(',', ";"));
    }
    out
}

/// AIC comparison across fitted variants; the lowest AIC is flagged.
pub fn render_aic_comparison(fits: &[&FitResult]) -> String {
    let mut out = String::from("variant,loglik,n_params,aic,best\n");
    let best = fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.aic.partial_cmp(&b.1.aic).unwrap())
        .map(|(i, _)| i);
    for (i, fit) in fits.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{:.6},{},{:.6},{}",
            fit.spec.variant().as_str(),
            fit.loglik,
            fit.spec.free_param_len(),
            fit.aic,
            Some(i) == best
        );
    }
    out
}

/// Predicted worths sorted by item label.
pub fn render_predicted_worths(item_labels: &[String], worths: &[f64]) -> String {
    let mut out = String::from("item,worth\n");
    for &i in &sorted_item_order(item_labels) {
        let _ = writeln!(out, "{},{:.6}", item_labels[i], worths[i]);
    }
    out
}

/// A predicted ordering as `rank,item`.
pub fn render_predicted_ranking(item_labels: &[String], ordering: &[usize]) -> String {
    let mut out = String::from("rank,item\n");
    for (pos, &i) in ordering.iter().enumerate() {
        let _ = writeln!(out, "{},{}", pos + 1, item_labels[i]);
    }
    out
}
