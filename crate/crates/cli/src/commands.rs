use std::fmt;
use std::path::Path;

use matchdist::classical::Size;
use matchdist::generalised::{gmd_moments_asymptotic, GmdDistribution, GmdParams};
use matchdist::hypothesis::{matching_test, power_curve, Alternative};
use matchdist::inference::{
    fit, mom_approx, mom_estimate, Boundary, CiMethod, Dataset, FitOptions, TailSplit,
};
use matchdist::oracle::{enumerate_generalised, simulate_two_step};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::{Record, Value};
use crate::{AlternativeArg, ApproxFlag, CiMethodArg, DistArgs, TailSplitArg};

#[derive(Debug)]
pub enum CliError {
    Domain(matchdist::Error),
    Io(std::io::Error),
    Input(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

impl From<matchdist::Error> for CliError {
    fn from(e: matchdist::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn distribution(args: &DistArgs) -> Result<GmdDistribution> {
    let params = GmdParams::new(args.size, args.trials, args.prob)?;
    Ok(GmdDistribution::new(params, args.approx.into())?)
}

fn dist_record(command: &str, columns: &[&str], args: &DistArgs, dist: &GmdDistribution) -> Record {
    Record::new(command, columns)
        .param("size", args.size.to_string())
        .param("trials", args.trials)
        .param("prob", args.prob)
        .param("method", dist.method().to_string())
}

fn support(dist: &GmdDistribution, points: &[usize]) -> Vec<usize> {
    if points.is_empty() {
        (0..=dist.support_upper()).collect()
    } else {
        points.to_vec()
    }
}

pub fn pmf(args: &DistArgs, points: &[usize], log: bool) -> Result<Record> {
    let dist = distribution(args)?;
    let mut rec = dist_record("pmf", &["k", "probability"], args, &dist).param("log", log);
    for k in support(&dist, points) {
        let v = if log { dist.log_pmf(k) } else { dist.pmf(k) };
        rec.push(vec![k.into(), v.into()]);
    }
    Ok(rec)
}

pub fn cdf(args: &DistArgs, points: &[usize], lower_tail: bool, log_p: bool) -> Result<Record> {
    let dist = distribution(args)?;
    let mut rec = dist_record("cdf", &["k", "probability"], args, &dist)
        .param("lower_tail", lower_tail)
        .param("log_p", log_p);
    for k in support(&dist, points) {
        let v = match (lower_tail, log_p) {
            (true, false) => dist.cdf(k),
            (true, true) => dist.log_cdf(k),
            (false, false) => dist.sf(k),
            (false, true) => dist.log_sf(k),
        };
        rec.push(vec![k.into(), v.into()]);
    }
    Ok(rec)
}

pub fn quantile(args: &DistArgs, probs: &[f64], lower_tail: bool, log_p: bool) -> Result<Record> {
    let dist = distribution(args)?;
    let mut rec = dist_record("quantile", &["p", "quantile"], args, &dist)
        .param("lower_tail", lower_tail)
        .param("log_p", log_p);
    for &p in probs {
        let prob = if log_p { p.exp() } else { p };
        let q = if lower_tail {
            dist.quantile(prob)?
        } else {
            dist.quantile_upper(prob)?
        };
        rec.push(vec![p.into(), q.into()]);
    }
    Ok(rec)
}

pub fn sample(args: &DistArgs, count: usize, seed: u64) -> Result<Record> {
    let dist = distribution(args)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = dist_record("sample", &["value"], args, &dist).param("seed", seed);
    for v in dist.sample(count, &mut rng) {
        rec.push(vec![v.into()]);
    }
    Ok(rec)
}

pub fn hdr(args: &DistArgs, cover_prob: f64) -> Result<Record> {
    let dist = distribution(args)?;
    let region = dist.hdr(cover_prob)?;
    let mut rec = dist_record(
        "hdr",
        &["region", "points", "cover_prob", "coverage", "contiguous"],
        args,
        &dist,
    );
    rec.push(vec![
        region.describe().into(),
        Value::Ints(region.points.clone()),
        region.cover_prob.into(),
        region.coverage.into(),
        region.contiguous.into(),
    ]);
    Ok(rec)
}

pub fn moments(args: &DistArgs, include_sd: bool, asymptotic: bool) -> Result<Record> {
    let params = GmdParams::new(args.size, args.trials, args.prob)?;
    let m = if asymptotic {
        gmd_moments_asymptotic(&params)
    } else {
        matchdist::generalised::gmd_moments(&params)
    };
    let mut columns = vec!["mean", "variance"];
    if include_sd {
        columns.push("sd");
    }
    columns.extend(["skewness", "kurtosis"]);
    let mut rec = Record::new("moments", &columns)
        .param("size", args.size.to_string())
        .param("trials", args.trials)
        .param("prob", args.prob)
        .param("asymptotic", asymptotic);
    let mut row: Vec<Value> = vec![m.mean.into(), m.variance.into()];
    if include_sd {
        row.push(m.std_dev().into());
    }
    row.push(m.skewness.into());
    row.push(m.kurtosis.into());
    rec.push(row);
    Ok(rec)
}

pub fn read_dataset(path: &Path, size: usize) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut observations = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let k = line.parse::<usize>().map_err(|_| {
            CliError::Input(format!(
                "{}:{}: expected a non-negative integer, found {line:?}",
                path.display(),
                i + 1
            ))
        })?;
        observations.push(k);
    }
    Ok(Dataset::new(size, observations)?)
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::None => "none",
        Boundary::AtZero => "at-zero",
        Boundary::AtOne => "at-one",
    }
}

pub fn mle(
    path: &Path,
    size: usize,
    method: CiMethodArg,
    level: f64,
    resamples: usize,
    seed: u64,
    split: TailSplitArg,
) -> Result<Record> {
    let data = read_dataset(path, size)?;
    let options = FitOptions {
        level,
        method: match method {
            CiMethodArg::Asymptotic => CiMethod::Asymptotic,
            CiMethodArg::Bootstrap => CiMethod::Bootstrap,
        },
        split: match split {
            TailSplitArg::Fractional => TailSplit::Fractional,
            TailSplitArg::Absolute => TailSplit::Absolute,
        },
        resamples,
        seed,
    };
    let r = fit(&data, &options)?;
    if r.ci.pinned {
        eprintln!(
            "note: the estimate is on the boundary, so the asymptotic interval collapses onto it; \
             use --ci-method bootstrap for a non-degenerate interval"
        );
    }
    let method_name = match options.method {
        CiMethod::Asymptotic => "asymptotic",
        CiMethod::Bootstrap => "bootstrap",
    };
    let mut rec = Record::new(
        "mle",
        &[
            "theta_hat",
            "phi_hat",
            "max_loglik",
            "boundary",
            "ci_lower",
            "ci_upper",
            "conf_level",
            "ci_method",
            "pinned",
            "mom_estimate",
            "mom_approx",
        ],
    )
    .param("size", size)
    .param("observations", data.len())
    .param("mean_matches", data.mean());
    if options.method == CiMethod::Bootstrap {
        rec = rec.param("bootstrap_sims", resamples).param("seed", seed);
    }
    rec.push(vec![
        r.estimate.theta_hat.into(),
        r.estimate.phi_hat.into(),
        r.estimate.max_loglik.into(),
        boundary_name(r.estimate.boundary).into(),
        r.ci.lower.into(),
        r.ci.upper.into(),
        level.into(),
        method_name.into(),
        r.ci.pinned.into(),
        mom_estimate(&data).ok().into(),
        mom_approx(&data).ok().into(),
    ]);
    Ok(rec)
}

pub fn test(
    path: &Path,
    size: usize,
    null_prob: f64,
    alternative: AlternativeArg,
    approx: ApproxFlag,
) -> Result<Record> {
    let data = read_dataset(path, size)?;
    let alt = match alternative {
        AlternativeArg::Greater => Alternative::Greater,
        AlternativeArg::Less => Alternative::Less,
        AlternativeArg::TwoSided => Alternative::TwoSided,
    };
    let r = matching_test(&data, null_prob, alt, approx.into())?;
    let alt_name = match alt {
        Alternative::Greater => "greater",
        Alternative::Less => "less",
        Alternative::TwoSided => "two-sided",
    };
    let mut rec = Record::new(
        "test",
        &[
            "observed_total",
            "trials",
            "mean_matches",
            "null_prob",
            "alternative",
            "p_value",
            "method",
        ],
    )
    .param("size", size);
    rec.push(vec![
        r.observed_total.into(),
        r.trials.into(),
        r.mean_matches.into(),
        r.null_prob.into(),
        alt_name.into(),
        r.p_value.into(),
        r.method.to_string().into(),
    ]);
    Ok(rec)
}

pub fn default_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

pub fn power(size: usize, trials: usize, alpha: f64, grid: &[f64]) -> Result<Record> {
    let grid = if grid.is_empty() {
        default_grid()
    } else {
        grid.to_vec()
    };
    let curve = power_curve(size, trials, alpha, &grid)?;
    let mut rec = Record::new("power", &["theta", "power"])
        .param("size", size)
        .param("trials", trials)
        .param("alpha", alpha)
        .param("t_star", curve.t_star);
    for (theta, p) in curve.points {
        rec.push(vec![theta.into(), p.into()]);
    }
    Ok(rec)
}

pub fn oracle(
    size: usize,
    prob: f64,
    simulate: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<Record> {
    match simulate {
        None => {
            let d = enumerate_generalised(size, prob)?;
            let mut rec = Record::new("oracle", &["k", "probability"])
                .param("size", size)
                .param("prob", prob);
            for (k, p) in d.probabilities.iter().enumerate() {
                rec.push(vec![k.into(), (*p).into()]);
            }
            Ok(rec)
        }
        Some(reps) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts = simulate_two_step(size, prob, trials, reps, &mut rng)?;
            let mut rec = Record::new("oracle", &["total", "count", "proportion"])
                .param("size", size)
                .param("prob", prob)
                .param("trials", trials)
                .param("replications", reps)
                .param("seed", seed);
            for (t, &c) in counts.iter().enumerate() {
                rec.push(vec![t.into(), c.into(), (c as f64 / reps as f64).into()]);
            }
            Ok(rec)
        }
    }
}

/// Size helper for figure emitters.
pub fn finite_dist(n: usize, prob: f64) -> Result<GmdDistribution> {
    Ok(GmdDistribution::single(Size::Finite(n), prob)?)
}
