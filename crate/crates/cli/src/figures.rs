use std::path::Path;

use matchdist::classical::{poisson_sse, ClassicalTable};
use matchdist::hypothesis::power_curve;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{default_grid, finite_dist, CliError};
use crate::output::{Format, Record};
use crate::FigureArg;

/// Upper summation limit for the SSE against Poisson(1).
const SSE_UPPER: usize = 60;
const GENERALISED_PROB: f64 = 0.2;
const FIGURE4_SIZE: usize = 12;
const FIGURE4_SAMPLES: usize = 10_000;
const FIGURE4_SEED: u64 = 1;

/// Classical pmfs for sizes 1..=12.
fn classical_pmfs() -> Record {
    let table = ClassicalTable::build(12);
    let mut rec = Record::new("figure1", &["size", "k", "probability"]);
    for n in 1..=12usize {
        for k in 0..=n {
            rec.push(vec![n.into(), k.into(), table.pmf(k, n).into()]);
        }
    }
    rec
}

fn sse_curve() -> Record {
    let table = ClassicalTable::build(12);
    let mut rec = Record::new("figure2", &["size", "sse"]).param("upper", SSE_UPPER);
    for n in 1..=12usize {
        rec.push(vec![n.into(), poisson_sse(&table, n, SSE_UPPER).into()]);
    }
    rec
}

fn generalised_pmfs() -> Result<Record, CliError> {
    let mut rec =
        Record::new("figure3", &["size", "k", "probability"]).param("prob", GENERALISED_PROB);
    for n in 1..=12usize {
        let dist = finite_dist(n, GENERALISED_PROB)?;
        for k in 0..=n {
            rec.push(vec![n.into(), k.into(), dist.pmf(k).into()]);
        }
    }
    Ok(rec)
}

/// Long format with one row per `(panel, x)`: pmf, cdf, quantile and the
/// empirical proportions of seeded draws.
fn probability_panels() -> Result<Record, CliError> {
    let dist = finite_dist(FIGURE4_SIZE, GENERALISED_PROB)?;
    let mut rec = Record::new("figure4", &["panel", "x", "y"])
        .param("size", FIGURE4_SIZE)
        .param("prob", GENERALISED_PROB)
        .param("samples", FIGURE4_SAMPLES)
        .param("seed", FIGURE4_SEED);
    for k in 0..=FIGURE4_SIZE {
        rec.push(vec!["pmf".into(), (k as f64).into(), dist.pmf(k).into()]);
    }
    for k in 0..=FIGURE4_SIZE {
        rec.push(vec!["cdf".into(), (k as f64).into(), dist.cdf(k).into()]);
    }
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        let q = dist.quantile(p)?;
        rec.push(vec!["quantile".into(), p.into(), (q as f64).into()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(FIGURE4_SEED);
    let mut counts = [0usize; FIGURE4_SIZE + 1];
    for v in dist.sample(FIGURE4_SAMPLES, &mut rng) {
        counts[v] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        let prop = *c as f64 / FIGURE4_SAMPLES as f64;
        rec.push(vec!["sample".into(), (k as f64).into(), prop.into()]);
    }
    Ok(rec)
}

fn power_curves() -> Result<Record, CliError> {
    let alpha = 0.05;
    let grid = default_grid();
    let mut rec = Record::new("figure5", &["size", "trials", "t_star", "theta", "power"])
        .param("alpha", alpha);
    for n in [4usize, 6, 8, 10] {
        for m in 1..=5usize {
            let curve = power_curve(n, m, alpha, &grid)?;
            for (theta, p) in curve.points {
                rec.push(vec![
                    n.into(),
                    m.into(),
                    curve.t_star.into(),
                    theta.into(),
                    p.into(),
                ]);
            }
        }
    }
    Ok(rec)
}

pub fn build(figure: FigureArg) -> Result<Vec<Record>, CliError> {
    Ok(match figure {
        FigureArg::One => vec![classical_pmfs()],
        FigureArg::Two => vec![sse_curve()],
        FigureArg::Three => vec![generalised_pmfs()?],
        FigureArg::Four => vec![probability_panels()?],
        FigureArg::Five => vec![power_curves()?],
        FigureArg::All => vec![
            classical_pmfs(),
            sse_curve(),
            generalised_pmfs()?,
            probability_panels()?,
            power_curves()?,
        ],
    })
}

pub fn emit(figure: FigureArg, out_dir: Option<&Path>, format: Format) -> Result<(), CliError> {
    let records = build(figure)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for rec in &records {
            let path = dir.join(format!("{}.{ext}", rec.command));
            std::fs::write(&path, rec.render(format))?;
            println!("{}", path.display());
        }
        return Ok(());
    }
    match (format, records.as_slice()) {
        (_, [single]) => single.write(format)?,
        (Format::Csv, many) => {
            let blocks: Vec<String> = many
                .iter()
                .map(|r| format!("# {}\n{}", r.command, r.to_csv()))
                .collect();
            print!("{}", blocks.join("\n"));
        }
        (Format::Json, many) => {
            let all: Vec<_> = many.iter().map(Record::to_json).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&all).expect("valid JSON")
            );
        }
    }
    Ok(())
}
