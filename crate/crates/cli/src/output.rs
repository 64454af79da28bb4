use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use cellsched::algorithms::Algorithm;

use crate::sweep::{Plan, Record};
use crate::{CliError, CliResult};

/// One algorithm on one instance at one deadline and neighbor policy.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub seed: u64,
    pub instance: usize,
    pub algorithm: &'static str,
    #[serde(rename = "T")]
    pub deadline: f64,
    /// Empty for algorithms without a neighbor policy.
    #[serde(rename = "M")]
    pub m: String,
    pub energy: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub active_columns: usize,
    pub termination: String,
}

#[derive(Debug, Serialize)]
struct TimingRow<'a> {
    seed: u64,
    instance: usize,
    algorithm: &'a str,
    #[serde(rename = "T")]
    deadline: f64,
    #[serde(rename = "M")]
    m: &'a str,
    wall_s: f64,
    pricing_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub algorithm: &'static str,
    #[serde(rename = "T")]
    pub deadline: f64,
    #[serde(rename = "M")]
    pub m: String,
    pub instances: usize,
    pub feasible: usize,
    /// Over feasible instances only.
    pub mean_energy: Option<f64>,
    pub mean_iterations: f64,
    pub mean_active_columns: f64,
}

/// Bounding interval statistics for one policy, per deadline and pooled
/// over all deadlines (`T` empty).
#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "T")]
    pub deadline: Option<f64>,
    pub cases: usize,
    /// Cases where both bounds are finite.
    pub bounded: usize,
    pub mean_gap_pct: Option<f64>,
    pub mean_lower: Option<f64>,
    pub mean_upper: Option<f64>,
    pub mean_near: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn policy_keys(plan: &Plan, alg: Algorithm) -> Vec<String> {
    match alg {
        Algorithm::LeOff | Algorithm::LeOn | Algorithm::Near => {
            plan.policies.iter().map(|p| p.to_string()).collect()
        }
        _ => vec![String::new()],
    }
}

pub fn aggregate(plan: &Plan, records: &[Record]) -> Vec<AggregateRow> {
    let mut groups: HashMap<(&str, String, u64), Vec<&ResultRow>> = HashMap::new();
    for r in records {
        groups
            .entry((r.row.algorithm, r.row.m.clone(), r.row.deadline.to_bits()))
            .or_default()
            .push(&r.row);
    }
    let mut out = Vec::new();
    for &alg in &plan.algos {
        for m in policy_keys(plan, alg) {
            for &t in &plan.deadlines {
                let rows = groups
                    .get(&(alg.name(), m.clone(), t.to_bits()))
                    .map(Vec::as_slice)
                    .unwrap_or(&[]);
                let feasible: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.feasible)
                    .map(|r| r.energy)
                    .collect();
                let n = rows.len().max(1) as f64;
                out.push(AggregateRow {
                    algorithm: alg.name(),
                    deadline: t,
                    m: m.clone(),
                    instances: rows.len(),
                    feasible: feasible.len(),
                    mean_energy: mean(&feasible),
                    mean_iterations: rows.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
                    mean_active_columns: rows.iter().map(|r| r.active_columns as f64).sum::<f64>()
                        / n,
                });
            }
        }
    }
    out
}

pub fn gaps(plan: &Plan, records: &[Record]) -> Vec<GapRow> {
    if !(plan.algos.contains(&Algorithm::LeOff) && plan.algos.contains(&Algorithm::LeOn)) {
        return Vec::new();
    }
    let mut by_key: HashMap<(usize, &str, &str, u64), &ResultRow> = HashMap::new();
    for r in records {
        by_key.insert(
            (
                r.row.instance,
                r.row.algorithm,
                r.row.m.as_str(),
                r.row.deadline.to_bits(),
            ),
            &r.row,
        );
    }
    let mut out = Vec::new();
    for p in &plan.policies {
        let m = p.to_string();
        let mut pooled = (0usize, Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for &t in &plan.deadlines {
            let (mut cases, mut gap, mut lo, mut hi, mut near) =
                (0usize, Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for k in 0..plan.instances {
                let get = |alg: Algorithm| {
                    by_key
                        .get(&(k, alg.name(), m.as_str(), t.to_bits()))
                        .copied()
                };
                let (Some(off), Some(on)) = (get(Algorithm::LeOff), get(Algorithm::LeOn)) else {
                    continue;
                };
                cases += 1;
                if off.feasible && on.feasible {
                    gap.push(100.0 * (on.energy - off.energy) / off.energy);
                    lo.push(off.energy);
                    hi.push(on.energy);
                    if let Some(n) = get(Algorithm::Near) {
                        near.push(n.energy);
                    }
                }
            }
            out.push(GapRow {
                m: m.clone(),
                deadline: Some(t),
                cases,
                bounded: gap.len(),
                mean_gap_pct: mean(&gap),
                mean_lower: mean(&lo),
                mean_upper: mean(&hi),
                mean_near: mean(&near),
            });
            pooled.0 += cases;
            pooled.1.extend(gap);
            pooled.2.extend(lo);
            pooled.3.extend(hi);
            pooled.4.extend(near);
        }
        out.push(GapRow {
            m,
            deadline: None,
            cases: pooled.0,
            bounded: pooled.1.len(),
            mean_gap_pct: mean(&pooled.1),
            mean_lower: mean(&pooled.2),
            mean_upper: mean(&pooled.3),
            mean_near: mean(&pooled.4),
        });
    }
    out
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> CliResult<()> {
    let fault = |e: csv::Error| CliError::Fault(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fault)?;
    for r in rows {
        w.serialize(r).map_err(fault)?;
    }
    w.flush()
        .map_err(|e| CliError::Fault(format!("writing {}: {e}", path.display())))
}

/// Writes `results.csv`, `aggregate.csv`, `gaps.csv` when both bounds ran,
/// and `timing.csv` when requested.
pub fn write_all(plan: &Plan, records: &[Record]) -> CliResult<()> {
    fs::create_dir_all(&plan.out)
        .map_err(|e| CliError::Fault(format!("creating {}: {e}", plan.out.display())))?;
    write_csv(
        &plan.out.join("results.csv"),
        records.iter().map(|r| &r.row),
    )?;
    write_csv(&plan.out.join("aggregate.csv"), aggregate(plan, records))?;
    let g = gaps(plan, records);
    if !g.is_empty() {
        write_csv(&plan.out.join("gaps.csv"), g)?;
    }
    if plan.timing {
        write_csv(
            &plan.out.join("timing.csv"),
            records.iter().map(|r| TimingRow {
                seed: r.row.seed,
                instance: r.row.instance,
                algorithm: r.row.algorithm,
                deadline: r.row.deadline,
                m: &r.row.m,
                wall_s: r.wall.as_secs_f64(),
                pricing_s: r.pricing.as_secs_f64(),
            }),
        )?;
    }
    Ok(())
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}"))
        .unwrap_or_else(|| "-".into())
}

pub fn print_summary(plan: &Plan, records: &[Record], elapsed: Duration) {
    println!(
        "{} instances ({} layout, seeds {}..{}), {} rows in {:.1} s -> {}",
        plan.instances,
        plan.gen.layout.name(),
        plan.instance_seed(0),
        plan.instance_seed(plan.instances - 1),
        records.len(),
        elapsed.as_secs_f64(),
        plan.out.display()
    );
    println!();
    println!(
        "{:<8} {:>9} {:>6} {:>9} {:>14} {:>10} {:>8}",
        "algo", "M", "T", "feasible", "mean energy J", "mean iter", "active"
    );
    for a in aggregate(plan, records) {
        println!(
            "{:<8} {:>9} {:>6} {:>9} {:>14} {:>10.1} {:>8.1}",
            a.algorithm,
            if a.m.is_empty() { "-" } else { &a.m },
            a.deadline,
            format!("{}/{}", a.feasible, a.instances),
            opt(a.mean_energy, 3),
            a.mean_iterations,
            a.mean_active_columns
        );
    }
    let g = gaps(plan, records);
    if !g.is_empty() {
        println!();
        println!(
            "{:<9} {:>6} {:>9} {:>10} {:>12} {:>12} {:>12}",
            "M", "T", "bounded", "gap %", "lower J", "upper J", "near J"
        );
        for r in g {
            println!(
                "{:<9} {:>6} {:>9} {:>10} {:>12} {:>12} {:>12}",
                r.m,
                r.deadline
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "all".into()),
                format!("{}/{}", r.bounded, r.cases),
                opt(r.mean_gap_pct, 3),
                opt(r.mean_lower, 3),
                opt(r.mean_upper, 3),
                opt(r.mean_near, 3)
            );
        }
    }
}
