use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;

use cellsched::algorithms::{self, Algorithm, SolveOptions, SolveReport};
use cellsched::model::NetworkInstance;
use cellsched::netgen::{generate, GenConfig, Layout};
use cellsched::pricing_local::{build_scenarios, select_neighbors, LeMode, MPolicy, ScenarioTable};

use crate::config::{m_value_to_string, FileConfig};
use crate::output::{self, ResultRow};
use crate::{CliError, CliResult, LeModeArg, SweepArgs};

/// Networks above this many cells need `--force-exact` for OCS.
pub const EXACT_SOFT_LIMIT: usize = 12;

const DEFAULT_DEADLINES: [f64; 6] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5];

/// Validates an exact-pricing request and widens the solver limit when forced.
pub fn check_exact(cells: usize, force: bool, opts: &mut SolveOptions) -> CliResult<()> {
    if cells > EXACT_SOFT_LIMIT {
        if !force {
            return Err(CliError::Config(format!(
                "ocs on {cells} cells scans 2^{cells} clusters per round; pass --force-exact to run it anyway"
            )));
        }
        warn!("exact pricing over {cells} cells is long-running");
        opts.exact_limit = opts.exact_limit.max(cells);
    }
    Ok(())
}

/// Fully resolved sweep.
#[derive(Debug, Clone)]
pub struct Plan {
    pub gen: GenConfig,
    pub solver: SolveOptions,
    /// Sorted in canonical order, no duplicates.
    pub algos: Vec<Algorithm>,
    pub deadlines: Vec<f64>,
    pub policies: Vec<MPolicy>,
    pub instances: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub timing: bool,
}

fn expand_algos(names: &[String], le_mode: LeModeArg) -> CliResult<Vec<Algorithm>> {
    let mut out = Vec::new();
    for name in names {
        let name = name.trim().to_ascii_lowercase();
        if name == "bound" {
            match le_mode {
                LeModeArg::Off => out.push(Algorithm::LeOff),
                LeModeArg::On => out.extend([Algorithm::LeOn, Algorithm::Near]),
                LeModeArg::Both => out.extend([Algorithm::LeOff, Algorithm::LeOn, Algorithm::Near]),
            }
        } else {
            out.push(name.parse()?);
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::Config("no algorithms selected".into()));
    }
    Ok(out)
}

impl Plan {
    fn base(
        args: &SweepArgs,
        file: &FileConfig,
        default_m: &[&str],
        default_instances: usize,
    ) -> CliResult<Self> {
        let gen = args.net.apply(file.generator.clone())?;
        let deadlines = args
            .deadlines
            .clone()
            .or_else(|| file.sweep.deadlines.clone())
            .unwrap_or_else(|| DEFAULT_DEADLINES.to_vec());
        if deadlines.is_empty() || deadlines.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Config("deadlines must be positive".into()));
        }
        let m_strings: Vec<String> = match (&args.m, &file.sweep.m) {
            (Some(m), _) => m.clone(),
            (None, Some(vals)) => vals
                .iter()
                .map(m_value_to_string)
                .collect::<CliResult<_>>()?,
            (None, None) => default_m.iter().map(|s| s.to_string()).collect(),
        };
        let policies = m_strings
            .iter()
            .map(|s| s.parse::<MPolicy>())
            .collect::<Result<Vec<_>, _>>()?;
        if policies.contains(&MPolicy::Uniform(0)) {
            return Err(CliError::Config("M must be at least 1".into()));
        }
        let instances = args
            .instances
            .or(file.sweep.instances)
            .unwrap_or(default_instances);
        if instances == 0 {
            return Err(CliError::Config("--instances must be positive".into()));
        }
        let jobs = args.jobs.or(file.sweep.jobs);
        if jobs == Some(0) {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        Ok(Plan {
            gen,
            solver: file.solver.clone(),
            algos: Vec::new(),
            deadlines,
            policies,
            instances,
            seed: args.seed.or(file.sweep.seed).unwrap_or(0),
            jobs,
            out: args.out.clone(),
            timing: args.timing,
        })
    }

    pub fn for_run(
        args: &SweepArgs,
        file: &FileConfig,
        algos: Option<&[String]>,
        le_mode: Option<LeModeArg>,
    ) -> CliResult<Self> {
        let mut plan = Plan::base(args, file, &["5"], 100)?;
        let names: Vec<String> = match (algos, &file.sweep.algos) {
            (Some(a), _) => a.to_vec(),
            (None, Some(a)) => a.clone(),
            (None, None) if plan.gen.layout == Layout::Hex19 => vec!["bound".into()],
            (None, None) => ["ocs", "near", "allon", "tdma"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        };
        plan.algos = expand_algos(&names, le_mode.unwrap_or(LeModeArg::Both))?;
        plan.check_exact(args.force_exact)?;
        Ok(plan)
    }

    pub fn for_bound(
        args: &SweepArgs,
        file: &FileConfig,
        le_mode: Option<LeModeArg>,
    ) -> CliResult<Self> {
        let mut plan = Plan::base(args, file, &["1", "3", "5", "neighbor"], 20)?;
        plan.algos = expand_algos(&["bound".to_string()], le_mode.unwrap_or(LeModeArg::Both))?;
        if args.force_exact {
            warn!("--force-exact has no effect on bound runs");
        }
        Ok(plan)
    }

    fn check_exact(&mut self, force: bool) -> CliResult<()> {
        if self.algos.contains(&Algorithm::Ocs) {
            let cells = self.gen.cell_centers().len();
            check_exact(cells, force, &mut self.solver)?;
        }
        Ok(())
    }

    fn uses_policies(alg: Algorithm) -> bool {
        matches!(alg, Algorithm::LeOff | Algorithm::LeOn | Algorithm::Near)
    }

    /// Seed of instance `k`.
    pub fn instance_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }
}

/// One result row plus the timings kept out of the main table.
#[derive(Debug, Clone)]
pub struct Record {
    pub row: ResultRow,
    pub wall: Duration,
    pub pricing: Duration,
}

fn record(
    plan: &Plan,
    k: usize,
    t: f64,
    m: Option<&MPolicy>,
    rep: &SolveReport,
    wall: Duration,
) -> Record {
    Record {
        row: ResultRow {
            seed: plan.instance_seed(k),
            instance: k,
            algorithm: rep.algorithm.name(),
            deadline: t,
            m: m.map(|p| p.to_string()).unwrap_or_default(),
            energy: rep.energy,
            feasible: rep.feasible,
            iterations: rep.iterations,
            active_columns: rep.active_columns(),
            termination: rep.termination.to_string(),
        },
        wall,
        pricing: rep.pricing_time,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

/// Every row for instance `k`, ordered by algorithm, then M, then T.
fn run_instance(plan: &Plan, k: usize) -> CliResult<Vec<Record>> {
    let cfg = GenConfig {
        seed: plan.instance_seed(k),
        deadline_s: plan.deadlines[0],
        ..plan.gen.clone()
    };
    let base = generate(&cfg)?;
    let at = |t: f64| -> CliResult<NetworkInstance> {
        Ok(base.with_deadline(t).map_err(cellsched::Error::from)?)
    };
    let opts = &plan.solver;
    let mut tables: HashMap<usize, ScenarioTable> = HashMap::new();
    let mut le_on: HashMap<(usize, usize), (SolveReport, Duration)> = HashMap::new();
    let mut out = Vec::new();

    for &alg in &plan.algos {
        if !Plan::uses_policies(alg) {
            for &t in &plan.deadlines {
                let inst = at(t)?;
                let (rep, wall) = timed(|| match alg {
                    Algorithm::Ocs => algorithms::ocs(&inst, opts),
                    Algorithm::AllOn => algorithms::all_on(&inst, opts),
                    _ => Ok(algorithms::tdma(&inst)),
                });
                out.push(record(plan, k, t, None, &rep?, wall));
            }
            continue;
        }
        for (mi, policy) in plan.policies.iter().enumerate() {
            if let Entry::Vacant(slot) = tables.entry(mi) {
                slot.insert(build_scenarios(&base, &select_neighbors(&base, policy)?)?);
            }
            let table = &tables[&mi];
            for (ti, &t) in plan.deadlines.iter().enumerate() {
                let inst = at(t)?;
                let (rep, wall) = match alg {
                    Algorithm::LeOff => {
                        let (r, w) = timed(|| algorithms::le_run(&inst, table, LeMode::Off, opts));
                        (r?, w)
                    }
                    Algorithm::LeOn => {
                        let (r, w) = timed(|| algorithms::le_run(&inst, table, LeMode::On, opts));
                        let r = r?;
                        le_on.insert((mi, ti), (r.clone(), w));
                        (r, w)
                    }
                    _ => {
                        let (on, on_wall) = match le_on.get(&(mi, ti)) {
                            Some((r, w)) => (r.clone(), *w),
                            None => {
                                let (r, w) =
                                    timed(|| algorithms::le_run(&inst, table, LeMode::On, opts));
                                (r?, w)
                            }
                        };
                        let (r, w) = timed(|| algorithms::near_from_le_on(&inst, &on));
                        (r?, on_wall + w)
                    }
                };
                out.push(record(plan, k, t, Some(policy), &rep, wall));
            }
        }
    }
    info!("instance {k} (seed {}) done", plan.instance_seed(k));
    Ok(out)
}

/// Runs the sweep and writes every artifact into `plan.out`.
pub fn execute(plan: &Plan) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = plan.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Fault(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let per_instance: Vec<CliResult<Vec<Record>>> = pool.install(|| {
        (0..plan.instances)
            .into_par_iter()
            .map(|k| run_instance(plan, k))
            .collect()
    });
    let mut records = Vec::new();
    for r in per_instance {
        records.extend(r?);
    }
    output::write_all(plan, &records)?;
    output::print_summary(plan, &records, start.elapsed());
    Ok(())
}
