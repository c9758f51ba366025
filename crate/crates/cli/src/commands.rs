use std::thread;

use qtransfer::channel::single_shot_fidelity;
use qtransfer::compare::{self, interior_grid, Method};
use qtransfer::entpur::{expected_fidelity_dp, mc_partition, partition_size, McAccumulator, McEstimate};
use qtransfer::estimate::estimation_fidelity;
use qtransfer::qubitpur::average_fidelity;
use qtransfer::{Error, WernerParam};
use serde_json::Value;

use crate::args::{Format, RunConfig, StrategyKind};
use crate::error::{CliError, EXIT_OK};
use crate::format::{object, to_json_string, Cell, Table};
use crate::Outcome;

/// Fixed partition count so results do not depend on the number of cores.
pub const MC_PARTITIONS: u64 = 8;

/// Monte Carlo over [`MC_PARTITIONS`] streams run on separate threads, merged in stream order.
/// Identical to `mc_simulate_partitioned(.., MC_PARTITIONS)`.
pub fn mc_parallel(n: usize, lam0: WernerParam, samples: u64, seed: u64) -> Result<McEstimate, Error> {
    if samples == 0 {
        return Err(Error::Input("Monte Carlo needs at least one sample".into()));
    }
    let parts: Vec<Result<McAccumulator, Error>> = thread::scope(|s| {
        let handles: Vec<_> = (0..MC_PARTITIONS)
            .map(|i| {
                s.spawn(move || mc_partition(n, lam0, partition_size(samples, MC_PARTITIONS, i), seed, i))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Monte Carlo worker panicked"))
            .collect()
    });
    let mut total = McAccumulator::default();
    for part in parts {
        total.merge(&part?);
    }
    Ok(total.finish(seed))
}

fn render_record(fields: &[(&'static str, Cell)], format: Format, precision: u8) -> String {
    match format {
        Format::Csv => {
            let mut t = Table::new(fields.iter().map(|(k, _)| *k).collect());
            t.push(fields.iter().map(|(_, v)| v.clone()).collect());
            t.to_csv(precision)
        }
        Format::Json => to_json_string(&object(fields.iter().map(|(k, v)| (*k, v)), precision)),
    }
}

fn render_table(table: &Table, format: Format, precision: u8) -> String {
    match format {
        Format::Csv => table.to_csv(precision),
        Format::Json => to_json_string(&table.to_json_value(precision)),
    }
}

fn ok(report: String) -> Outcome {
    Outcome {
        report,
        status: EXIT_OK,
        failures: Vec::new(),
    }
}

pub fn single(lambda0: f64, config: &RunConfig) -> Result<Outcome, CliError> {
    let lam = WernerParam::new(lambda0)?;
    let fields = [("lambda0", lambda0.into()), ("fidelity", single_shot_fidelity(lam).into())];
    Ok(ok(render_record(&fields, config.format.unwrap_or(Format::Csv), config.precision)))
}

fn require_lambda(lambda0: Option<f64>, method: &str) -> Result<WernerParam, CliError> {
    let l = lambda0.ok_or_else(|| CliError::input(format!("strategy {method} needs --lambda0")))?;
    Ok(WernerParam::protocol(l)?)
}

pub fn strategy(
    kind: StrategyKind,
    n: usize,
    lambda0: Option<f64>,
    mc_samples: Option<u64>,
    distribution: bool,
    config: &RunConfig,
) -> Result<Outcome, CliError> {
    if n == 0 {
        return Err(CliError::input("--n must be positive"));
    }
    if mc_samples.is_some() && kind != StrategyKind::Ent {
        return Err(CliError::input("--mc-samples applies to the ent strategy only"));
    }
    if distribution && kind != StrategyKind::Qubit {
        return Err(CliError::input("--distribution applies to the qubit strategy only"));
    }
    let format = config.format.unwrap_or(Format::Json);
    let precision = config.precision;
    let mut fields: Vec<(&'static str, Cell)> = Vec::new();
    match kind {
        StrategyKind::Est => {
            let lam = lambda0.map(WernerParam::protocol).transpose()?;
            fields.push(("method", Method::Estimation.name().into()));
            fields.push(("n", n.into()));
            fields.push(("lambda0", lam.map(WernerParam::value).into()));
            fields.push(("fidelity", estimation_fidelity(n)?.fidelity.into()));
        }
        StrategyKind::Ent => {
            let lam = require_lambda(lambda0, "ent")?;
            fields.push(("method", Method::EntPur.name().into()));
            fields.push(("n", n.into()));
            fields.push(("lambda0", lam.value().into()));
            fields.push(("fidelity", expected_fidelity_dp(n, lam)?.expected_fidelity.into()));
            if let Some(samples) = mc_samples {
                let mc = mc_parallel(n, lam, samples, config.seed)?;
                fields.push(("mc_estimate", mc.estimate.into()));
                fields.push(("mc_stderr", mc.stderr.into()));
                fields.push(("samples", mc.samples.into()));
                fields.push(("seed", mc.seed.into()));
            }
        }
        StrategyKind::Qubit => {
            let lam = require_lambda(lambda0, "qubit")?;
            let res = average_fidelity(n, lam)?;
            fields.push(("method", Method::QubitPur.name().into()));
            fields.push(("n", n.into()));
            fields.push(("lambda0", lam.value().into()));
            fields.push(("fidelity", res.expected_fidelity.into()));
            if distribution {
                let mut table = Table::new(vec!["M", "p_M", "f_M"]);
                for (&m, &p) in &res.distribution.probs {
                    table.push(vec![m.into(), p.into(), res.per_m_fidelity[&m].into()]);
                }
                return Ok(ok(match format {
                    Format::Csv => table.to_csv(precision),
                    Format::Json => {
                        let mut obj = object(fields.iter().map(|(k, v)| (*k, v)), precision);
                        obj["distribution"] = table.to_json_value(precision);
                        to_json_string(&obj)
                    }
                }));
            }
        }
    }
    Ok(ok(render_record(&fields, format, precision)))
}

/// Comma list of counts; `a-b` expands to the inclusive range.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::input(format!("cannot parse N list {s:?}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        match item.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>, CliError> {
    if s.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    Ok(s.split(',').map(|m| m.trim().parse()).collect::<Result<_, Error>>()?)
}

pub fn sweep(methods: &str, n: &str, grid: u64, config: &RunConfig) -> Result<Outcome, CliError> {
    let methods = parse_methods(methods)?;
    let ns = parse_n_list(n)?;
    let rows = compare::sweep(&methods, &ns, &interior_grid(grid as usize))?;
    let mut table = Table::new(vec!["method", "N", "lambda0", "fidelity"]);
    for r in rows {
        table.push(vec![r.method.name().into(), r.n.into(), r.lambda0.value().into(), r.fidelity.into()]);
    }
    Ok(ok(render_table(&table, config.format.unwrap_or(Format::Csv), config.precision)))
}

pub fn crossings(n_max: usize, tol: f64, config: &RunConfig) -> Result<Outcome, CliError> {
    if n_max == 0 {
        return Err(CliError::input("--n-max must be at least 1"));
    }
    let mut table = Table::new(vec!["N", "lambda1", "lambda2"]);
    for n in 1..=n_max {
        let c = compare::crossing_points(n, tol).map_err(|e| match e {
            Error::Ambiguous { .. } => CliError::Ambiguous { n, source: e },
            other => CliError::Core(other),
        })?;
        table.push(vec![n.into(), c.lambda_1.into(), c.lambda_2.into()]);
    }
    Ok(ok(render_table(&table, config.format.unwrap_or(Format::Csv), config.precision)))
}

pub fn validate(mc_samples: u64, config: &RunConfig) -> Result<Outcome, CliError> {
    if mc_samples < 2 {
        return Err(CliError::input("--mc-samples must be at least 2"));
    }
    let summary = crate::validate::run_validation(&crate::validate::Formulas::default(), config.seed, mc_samples)?;
    let precision = config.precision;
    let report = match config.format.unwrap_or(Format::Json) {
        Format::Csv => summary.table().to_csv(precision),
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("passed".into(), Value::from(summary.passed()));
            obj.insert("seed".into(), Value::from(config.seed));
            obj.insert("mc_samples".into(), Value::from(mc_samples));
            obj.insert("checks".into(), summary.table().to_json_value(precision));
            to_json_string(&Value::Object(obj))
        }
    };
    Ok(Outcome {
        report,
        status: summary.exit_status(),
        failures: summary.failed().map(|c| c.name.to_owned()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qtransfer::entpur::mc_simulate_partitioned;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("9").unwrap(), vec![9]);
        assert_eq!(parse_n_list("1-3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_n_list("3-1").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("all").unwrap(), Method::ALL.to_vec());
        assert_eq!(parse_methods("qubit_pur,est").unwrap(), vec![Method::QubitPur, Method::Estimation]);
        assert!(parse_methods("magic").is_err());
    }

    #[test]
    fn threaded_mc_matches_sequential_partitions() {
        let lam = WernerParam::new(0.8).unwrap();
        let par = mc_parallel(9, lam, 10_003, 7).unwrap();
        let seq = mc_simulate_partitioned(9, lam, 10_003, 7, MC_PARTITIONS).unwrap();
        assert_eq!(par, seq);
        assert_eq!(mc_parallel(3, lam, 5, 1).unwrap().samples, 5);
    }
}
