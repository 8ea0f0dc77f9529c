//! Experiment harness: flat key-value configuration with protocol defaults,
//! seeded batch runs, deterministic atomically-written reports, and paired
//! report comparison with signed-rank annotations.

use crate::optimizer::{
    run_many, ClpsoConfig, OptimizerConfig, OptimizerId, PsoConfig, SpadeConfig, TraceRecord,
};
use crate::problems::{default_budget, default_dimension, make_objective, valid_ids, SUITE};
use crate::stats::{
    error_stats, wilcoxon_signed_rank, ComparisonVerdict, ErrorStats, WilcoxonResult, SIGNIFICANCE,
};
use crate::topology::TopologyVariant;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Benchmark dimensions covered by the experimental protocol.
pub const PROTOCOL_DIMENSIONS: [usize; 4] = [10, 30, 50, 100];

/// Optimizer-parameter overrides. Unset fields keep the protocol defaults,
/// so an empty config reproduces the reference settings exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterOverrides {
    /// Inertia schedule `start,end` (a single number means a constant).
    pub w: Option<(f64, f64)>,
    /// Exemplar attraction (exploitation) schedule; plain PSO uses a constant.
    pub c1: Option<(f64, f64)>,
    /// Popular-particle attraction schedule; plain PSO uses a constant.
    pub c2: Option<(f64, f64)>,
    /// Exploration / comprehensive-learning attraction schedule (constant
    /// for the comprehensive-learning baseline).
    pub c: Option<(f64, f64)>,
    pub knn_degree: Option<usize>,
    pub degree_growth: Option<usize>,
    pub expert_count: Option<usize>,
    pub velocity_fraction: Option<f64>,
    pub refresh_gap: Option<u32>,
}

/// A fully described experiment. Built from [`Default`], then layered with
/// [`ExperimentConfig::apply_file`] and per-key [`ExperimentConfig::set`]
/// calls (command-line overrides win by coming last).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub optimizer: OptimizerId,
    /// Problem ids, run in order.
    pub problems: Vec<String>,
    /// Explicit dimension; overrides each problem's natural dimension.
    pub dimension: Option<usize>,
    pub runs: usize,
    pub base_seed: u64,
    /// Explicit evaluation budget; the default is problem-dependent.
    pub budget: Option<u64>,
    /// Decision-graph variant (spade only); unset means the distance graph.
    pub topology: Option<TopologyVariant>,
    pub population: Option<usize>,
    pub overrides: ParameterOverrides,
    /// Directory holding benchmark transform files; unset means seeded
    /// transforms.
    pub data_dir: Option<PathBuf>,
    /// Output directory; kept out of the provenance hash (it does not affect
    /// results).
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            optimizer: OptimizerId::Spade,
            problems: Vec::new(),
            dimension: None,
            runs: 30,
            base_seed: 1,
            budget: None,
            topology: None,
            population: None,
            overrides: ParameterOverrides::default(),
            data_dir: None,
            out_dir: None,
        }
    }
}

/// One resolved problem of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemPlan {
    pub id: String,
    pub dimension: usize,
    pub budget: u64,
}

fn parse_num<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse {
        what: format!("config key `{key}`"),
        message: format!("`{value}` is not {what}"),
    })
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [one] => {
            let v = parse_num::<f64>(key, one, "a number")?;
            Ok((v, v))
        }
        [a, b] => Ok((
            parse_num::<f64>(key, a, "a number")?,
            parse_num::<f64>(key, b, "a number")?,
        )),
        _ => Err(Error::Parse {
            what: format!("config key `{key}`"),
            message: format!("`{value}` is not `start,end` or a single number"),
        }),
    }
}

const CONFIG_KEYS: &str = "optimizer, problems, dimension, runs, seed, budget, topology, \
population, w, c1, c2, c, knn_degree, degree_growth, expert_count, velocity_fraction, \
refresh_gap, data_dir, out_dir";

impl ExperimentConfig {
    /// Protocol defaults plus the contents of a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    /// Applies `key = value` lines from a file. Blank lines and `#` comments
    /// are ignored; later assignments to the same key win.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.apply_str(&text, &path.display().to_string())
    }

    /// Applies config text; `what` names the source in error messages.
    pub fn apply_str(&mut self, text: &str, what: &str) -> Result<()> {
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: what.to_string(),
                message: format!("line {}: expected `key = value`, found `{line}`", ln + 1),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one configuration key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "optimizer" => self.optimizer = value.parse()?,
            "problem" | "problems" => {
                self.problems = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
            }
            "dim" | "dimension" => self.dimension = Some(parse_num(key, value, "a dimension")?),
            "runs" => self.runs = parse_num(key, value, "a run count")?,
            "seed" => self.base_seed = parse_num(key, value, "a seed")?,
            "budget" => self.budget = Some(parse_num(key, value, "an evaluation budget")?),
            "topology" => self.topology = Some(value.parse()?),
            "population" => self.population = Some(parse_num(key, value, "a swarm size")?),
            "w" => self.overrides.w = Some(parse_pair(key, value)?),
            "c1" => self.overrides.c1 = Some(parse_pair(key, value)?),
            "c2" => self.overrides.c2 = Some(parse_pair(key, value)?),
            "c" => self.overrides.c = Some(parse_pair(key, value)?),
            "knn_degree" => {
                self.overrides.knn_degree = Some(parse_num(key, value, "a degree")?)
            }
            "degree_growth" => {
                self.overrides.degree_growth = Some(parse_num(key, value, "a degree increment")?)
            }
            "expert_count" => {
                self.overrides.expert_count = Some(parse_num(key, value, "a count")?)
            }
            "velocity_fraction" => {
                self.overrides.velocity_fraction = Some(parse_num(key, value, "a fraction")?)
            }
            "refresh_gap" => self.overrides.refresh_gap = Some(parse_num(key, value, "a gap")?),
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "out" | "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Parse {
                    what: format!("config key `{other}`"),
                    message: format!("unknown key (valid: {CONFIG_KEYS})"),
                })
            }
        }
        Ok(())
    }

    /// Canonical `key = value` rendering of everything that affects results,
    /// in a fixed order. Unset optional keys are omitted, so an empty config
    /// and an explicitly-defaulted one canonicalise identically only when
    /// they truly coincide.
    pub fn canonical_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("optimizer = {}", self.optimizer),
            format!("problems = {}", self.problems.join(",")),
        ];
        if let Some(d) = self.dimension {
            lines.push(format!("dimension = {d}"));
        }
        lines.push(format!("runs = {}", self.runs));
        lines.push(format!("seed = {}", self.base_seed));
        if let Some(b) = self.budget {
            lines.push(format!("budget = {b}"));
        }
        if let Some(t) = self.topology {
            lines.push(format!("topology = {t}"));
        }
        if let Some(p) = self.population {
            lines.push(format!("population = {p}"));
        }
        let o = &self.overrides;
        let pair = |name: &str, v: (f64, f64)| format!("{name} = {},{}", v.0, v.1);
        if let Some(v) = o.w {
            lines.push(pair("w", v));
        }
        if let Some(v) = o.c1 {
            lines.push(pair("c1", v));
        }
        if let Some(v) = o.c2 {
            lines.push(pair("c2", v));
        }
        if let Some(v) = o.c {
            lines.push(pair("c", v));
        }
        if let Some(v) = o.knn_degree {
            lines.push(format!("knn_degree = {v}"));
        }
        if let Some(v) = o.degree_growth {
            lines.push(format!("degree_growth = {v}"));
        }
        if let Some(v) = o.expert_count {
            lines.push(format!("expert_count = {v}"));
        }
        if let Some(v) = o.velocity_fraction {
            lines.push(format!("velocity_fraction = {v}"));
        }
        if let Some(v) = o.refresh_gap {
            lines.push(format!("refresh_gap = {v}"));
        }
        if let Some(d) = &self.data_dir {
            lines.push(format!("data_dir = {}", d.display()));
        }
        lines
    }

    /// SHA-256 of the canonical lines, hex-encoded.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for line in self.canonical_lines() {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        format!("{:x}", hasher.finalize())
    }

    /// Validates the experiment and resolves each problem's dimension and
    /// budget.
    pub fn resolve(&self) -> Result<Vec<ProblemPlan>> {
        if self.problems.is_empty() {
            return Err(Error::InvalidConfig(
                "no problems selected (set `problems` or pass --problem)".into(),
            ));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        let mut plans = Vec::with_capacity(self.problems.len());
        for id in &self.problems {
            if !valid_ids().contains(&id.as_str()) {
                return Err(Error::UnknownProblem {
                    id: id.clone(),
                    valid: valid_ids().join(", "),
                });
            }
            let dimension = self
                .dimension
                .or_else(|| default_dimension(id))
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("problem `{id}` needs an explicit dimension"))
                })?;
            if SUITE.iter().any(|e| e.id == *id) && !PROTOCOL_DIMENSIONS.contains(&dimension) {
                return Err(Error::InvalidConfig(format!(
                    "benchmark `{id}` runs at dimensions {PROTOCOL_DIMENSIONS:?}, requested {dimension}"
                )));
            }
            let budget = self
                .budget
                .unwrap_or(default_budget(id, dimension) as u64);
            plans.push(ProblemPlan {
                id: id.clone(),
                dimension,
                budget,
            });
        }
        Ok(plans)
    }

    /// Builds the optimizer configuration for one resolved budget, applying
    /// overrides and rejecting keys that do not exist for the chosen
    /// optimizer.
    pub fn optimizer_config(&self, budget: u64) -> Result<OptimizerConfig> {
        let o = &self.overrides;
        let reject = |key: &str, valid_for: &str| -> Result<()> {
            Err(Error::InvalidConfig(format!(
                "`{key}` only applies to {valid_for}, not {}",
                self.optimizer
            )))
        };
        let constant = |v: (f64, f64), key: &str| -> Result<f64> {
            if v.0 == v.1 {
                Ok(v.0)
            } else {
                Err(Error::InvalidConfig(format!(
                    "`{key}` is a single constant for {}, got {},{}",
                    self.optimizer, v.0, v.1
                )))
            }
        };
        match self.optimizer {
            OptimizerId::Spade => {
                let mut c = SpadeConfig::protocol(budget);
                if let Some(v) = self.population {
                    c.population = v;
                }
                if let Some(v) = self.topology {
                    c.topology = v;
                }
                if let Some(v) = o.w {
                    c.w_schedule = v;
                }
                if let Some(v) = o.c1 {
                    c.c1_schedule = v;
                }
                if let Some(v) = o.c2 {
                    c.c2_schedule = v;
                }
                if let Some(v) = o.c {
                    c.c_schedule = v;
                }
                if let Some(v) = o.knn_degree {
                    c.knn_degree = v;
                }
                if let Some(v) = o.degree_growth {
                    c.degree_growth = v;
                }
                if let Some(v) = o.expert_count {
                    c.expert_count = v;
                }
                if let Some(v) = o.velocity_fraction {
                    c.velocity_fraction = v;
                }
                if let Some(v) = o.refresh_gap {
                    c.refresh_gap = v;
                }
                c.validate()?;
                Ok(OptimizerConfig::Spade(c))
            }
            OptimizerId::Pso => {
                if self.topology.is_some() {
                    reject("topology", "spade")?;
                }
                if o.knn_degree.is_some() {
                    reject("knn_degree", "spade")?;
                }
                if o.degree_growth.is_some() {
                    reject("degree_growth", "spade")?;
                }
                if o.expert_count.is_some() {
                    reject("expert_count", "spade")?;
                }
                if o.c.is_some() {
                    reject("c", "spade and clpso")?;
                }
                if o.refresh_gap.is_some() {
                    reject("refresh_gap", "spade and clpso")?;
                }
                let mut c = PsoConfig::protocol(budget);
                if let Some(v) = self.population {
                    c.population = v;
                }
                if let Some(v) = o.w {
                    c.w_schedule = v;
                }
                if let Some(v) = o.c1 {
                    c.c1 = constant(v, "c1")?;
                }
                if let Some(v) = o.c2 {
                    c.c2 = constant(v, "c2")?;
                }
                if let Some(v) = o.velocity_fraction {
                    c.velocity_fraction = v;
                }
                c.validate()?;
                Ok(OptimizerConfig::Pso(c))
            }
            OptimizerId::Clpso => {
                if self.topology.is_some() {
                    reject("topology", "spade")?;
                }
                if o.knn_degree.is_some() {
                    reject("knn_degree", "spade")?;
                }
                if o.degree_growth.is_some() {
                    reject("degree_growth", "spade")?;
                }
                if o.expert_count.is_some() {
                    reject("expert_count", "spade")?;
                }
                if o.c1.is_some() {
                    reject("c1", "spade and pso")?;
                }
                if o.c2.is_some() {
                    reject("c2", "spade and pso")?;
                }
                let mut c = ClpsoConfig::protocol(budget);
                if let Some(v) = self.population {
                    c.population = v;
                }
                if let Some(v) = o.w {
                    c.w_schedule = v;
                }
                if let Some(v) = o.c {
                    c.c = constant(v, "c")?;
                }
                if let Some(v) = o.refresh_gap {
                    c.refresh_gap = v;
                }
                if let Some(v) = o.velocity_fraction {
                    c.velocity_fraction = v;
                }
                c.validate()?;
                Ok(OptimizerConfig::Clpso(c))
            }
        }
    }
}

/// Everything needed to regenerate a report: code version, config hash, the
/// canonical config itself, and the explicit run seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub package_version: String,
    pub config_hash: String,
    pub config: Vec<String>,
    pub seeds: Vec<u64>,
}

/// One run's outcome as stored in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub best_fitness: f64,
    pub error: f64,
    pub evaluations: u64,
    pub best_position: Vec<f64>,
}

/// Aggregated results for one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEntry {
    pub problem: String,
    pub dimension: usize,
    pub budget: u64,
    pub stats: ErrorStats,
    pub runs: Vec<RunSummary>,
}

impl ProblemEntry {
    pub fn errors(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.error).collect()
    }
}

/// The serialisable report body (`report.json`). Traces are kept out of the
/// JSON and written as separate CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub optimizer: OptimizerId,
    pub provenance: Provenance,
    pub entries: Vec<ProblemEntry>,
}

/// Per-iteration traces of every run of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemTraces {
    pub problem: String,
    pub dimension: usize,
    pub per_run: Vec<Vec<TraceRecord>>,
}

/// A complete experiment outcome: the report body plus plot traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub file: ReportFile,
    pub traces: Vec<ProblemTraces>,
}

/// Runs every problem of the experiment with seeds
/// `base_seed .. base_seed + runs`. Identical configs produce identical
/// reports (no timestamps, no environment capture).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let plans = config.resolve()?;
    let seeds: Vec<u64> = (0..config.runs as u64).map(|r| config.base_seed + r).collect();
    let mut entries = Vec::with_capacity(plans.len());
    let mut traces = Vec::with_capacity(plans.len());
    for plan in &plans {
        let objective = make_objective(
            &plan.id,
            plan.dimension,
            config.base_seed,
            config.data_dir.as_deref(),
        )?;
        let optimizer = config.optimizer_config(plan.budget)?;
        let results = run_many(&optimizer, objective.as_ref(), config.base_seed, config.runs)?;
        let errors: Vec<f64> = results.iter().map(|r| r.error).collect();
        let stats = error_stats(&errors)?;
        entries.push(ProblemEntry {
            problem: plan.id.clone(),
            dimension: plan.dimension,
            budget: plan.budget,
            stats,
            runs: results
                .iter()
                .map(|r| RunSummary {
                    seed: r.seed,
                    best_fitness: r.best_fitness,
                    error: r.error,
                    evaluations: r.evaluations,
                    best_position: r.best_position.clone(),
                })
                .collect(),
        });
        traces.push(ProblemTraces {
            problem: plan.id.clone(),
            dimension: plan.dimension,
            per_run: results.into_iter().map(|r| r.trace).collect(),
        });
    }
    Ok(Report {
        file: ReportFile {
            optimizer: config.optimizer,
            provenance: Provenance {
                package_version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash: config.config_hash(),
                config: config.canonical_lines(),
                seeds,
            },
            entries,
        },
        traces,
    })
}

/// Writes `bytes` to `path` atomically: a sibling temp file is written in
/// full, then renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("`{}` has no file name", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Serialises the report body as pretty JSON with a trailing newline.
pub fn report_json(file: &ReportFile) -> Result<String> {
    let mut text = serde_json::to_string_pretty(file).map_err(|e| Error::Parse {
        what: "report".into(),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

/// Aggregate table (`summary.csv`): one row per problem.
pub fn summary_csv(file: &ReportFile) -> String {
    let mut out = String::from("problem,dimension,budget,runs,best,mean,std_dev\n");
    for e in &file.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.problem,
            e.dimension,
            e.budget,
            e.runs.len(),
            e.stats.min,
            e.stats.mean,
            e.stats.std_dev
        ));
    }
    out
}

/// Writes `report.json`, `summary.csv`, and per-run trace CSVs under
/// `dir/traces/`, all atomically.
pub fn write_report(report: &Report, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    write_atomic(&dir.join("report.json"), report_json(&report.file)?.as_bytes())?;
    write_atomic(&dir.join("summary.csv"), summary_csv(&report.file).as_bytes())?;
    emit_plot_data(report, &dir.join("traces"))
}

/// Writes one CSV per run (`<problem>_D<dim>_run<k>.csv`) with the iteration
/// trace: best error, the three diversity columns, and the selected-particle
/// index.
pub fn emit_plot_data(report: &Report, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    for pt in &report.traces {
        for (k, trace) in pt.per_run.iter().enumerate() {
            let mut text = String::from(TraceRecord::CSV_HEADER);
            text.push('\n');
            for rec in trace {
                text.push_str(&rec.csv_row());
                text.push('\n');
            }
            let name = format!("{}_D{}_run{}.csv", pt.problem, pt.dimension, k);
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
    }
    Ok(())
}

/// Reads a `report.json` back.
pub fn load_report(path: &Path) -> Result<ReportFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        what: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One row of a report comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub problem: String,
    pub dimension: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// '+' first report wins (lower mean error), '-' loses, '≈' tie.
    pub symbol: char,
    /// Present when both entries have the same number of runs (paired test).
    pub wilcoxon: Option<WilcoxonResult>,
}

/// Paired comparison of two reports over the same problem set.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name_a: String,
    pub name_b: String,
    pub rows: Vec<ComparisonRow>,
    pub verdict: ComparisonVerdict,
}

/// Compares two reports problem-by-problem: mean errors decide the win /
/// loss / tie verdict, and per-run errors (paired by seed order) feed a
/// signed-rank test where run counts permit. Reports must cover exactly the
/// same `(problem, dimension)` set.
pub fn compare(a: &ReportFile, b: &ReportFile) -> Result<Comparison> {
    let keys = |r: &ReportFile| -> BTreeSet<(String, usize)> {
        r.entries
            .iter()
            .map(|e| (e.problem.clone(), e.dimension))
            .collect()
    };
    let ka = keys(a);
    let kb = keys(b);
    if ka != kb {
        let fmt_set = |s: Vec<&(String, usize)>| {
            s.iter()
                .map(|(p, d)| format!("{p}(D{d})"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let only_a: Vec<_> = ka.difference(&kb).collect();
        let only_b: Vec<_> = kb.difference(&ka).collect();
        let mut parts = Vec::new();
        if !only_a.is_empty() {
            parts.push(format!("only in first: {}", fmt_set(only_a)));
        }
        if !only_b.is_empty() {
            parts.push(format!("only in second: {}", fmt_set(only_b)));
        }
        return Err(Error::ReportMismatch(parts.join("; ")));
    }
    let mut rows = Vec::with_capacity(a.entries.len());
    let mut verdict = ComparisonVerdict::default();
    for ea in &a.entries {
        let eb = b
            .entries
            .iter()
            .find(|e| e.problem == ea.problem && e.dimension == ea.dimension)
            .expect("key sets match");
        let mean_a = ea.stats.mean;
        let mean_b = eb.stats.mean;
        verdict.record(mean_a, mean_b);
        let symbol = if mean_a < mean_b {
            '+'
        } else if mean_a > mean_b {
            '-'
        } else {
            '≈'
        };
        let errors_a = ea.errors();
        let errors_b = eb.errors();
        let wilcoxon = if errors_a.len() == errors_b.len() && errors_a.len() >= 5 {
            Some(wilcoxon_signed_rank(&errors_a, &errors_b)?)
        } else {
            None
        };
        rows.push(ComparisonRow {
            problem: ea.problem.clone(),
            dimension: ea.dimension,
            mean_a,
            mean_b,
            symbol,
            wilcoxon,
        });
    }
    Ok(Comparison {
        name_a: a.optimizer.to_string(),
        name_b: b.optimizer.to_string(),
        rows,
        verdict,
    })
}

impl Comparison {
    /// Machine-readable table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem,dimension,mean_a,mean_b,verdict,p_value\n");
        for r in &self.rows {
            let p = r
                .wilcoxon
                .as_ref()
                .map(|w| w.p_value.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.problem, r.dimension, r.mean_a, r.mean_b, r.symbol, p
            ));
        }
        out
    }
}

impl fmt::Display for Comparison {
    /// Aligned plain-text table; the verdict column annotates the attained
    /// level in parentheses when it clears the significance threshold.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>5}  {:>13}  {:>13}  verdict",
            "problem", "dim", self.name_a, self.name_b
        )?;
        for r in &self.rows {
            let verdict = match &r.wilcoxon {
                Some(w) if w.p_value < SIGNIFICANCE => {
                    format!("{} (p={:.4})", r.symbol, w.p_value)
                }
                _ => r.symbol.to_string(),
            };
            writeln!(
                f,
                "{:<14} {:>5}  {:>13.6e}  {:>13.6e}  {}",
                r.problem, r.dimension, r.mean_a, r.mean_b, verdict
            )?;
        }
        write!(
            f,
            "total vs {}: {}+ / {}- / {}≈",
            self.name_b, self.verdict.wins, self.verdict.losses, self.verdict.ties
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            optimizer: OptimizerId::Pso,
            problems: vec!["sphere".into()],
            dimension: Some(4),
            runs: 3,
            budget: Some(1200),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_text_round_trips_through_set() {
        let mut c = ExperimentConfig::default();
        c.apply_str(
            "# protocol tweaks\noptimizer = clpso\nproblems = f5, f8\ndimension = 10\n\
             runs = 7\nseed = 42\nbudget = 5000\nc = 2.5\nrefresh_gap = 9\n",
            "test",
        )
        .unwrap();
        assert_eq!(c.optimizer, OptimizerId::Clpso);
        assert_eq!(c.problems, vec!["f5", "f8"]);
        assert_eq!(c.dimension, Some(10));
        assert_eq!(c.runs, 7);
        assert_eq!(c.base_seed, 42);
        assert_eq!(c.budget, Some(5000));
        assert_eq!(c.overrides.c, Some((2.5, 2.5)));
        assert_eq!(c.overrides.refresh_gap, Some(9));
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let mut c = ExperimentConfig::default();
        assert!(c.apply_str("wibble = 3\n", "test").is_err());
        assert!(c.apply_str("runs = many\n", "test").is_err());
        assert!(c.apply_str("no equals sign\n", "test").is_err());
        assert!(c.apply_str("w = 1,2,3\n", "test").is_err());
        // Later assignments win.
        c.apply_str("runs = 3\nruns = 5\n", "test").unwrap();
        assert_eq!(c.runs, 5);
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let mut a = tiny_config();
        let b = tiny_config();
        assert_eq!(a.config_hash(), b.config_hash());
        a.out_dir = Some(PathBuf::from("/somewhere/else"));
        assert_eq!(a.config_hash(), b.config_hash());
        a.runs = 4;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn resolve_applies_protocol_defaults() {
        let c = ExperimentConfig {
            problems: vec!["ssrp".into(), "ode-params".into()],
            ..ExperimentConfig::default()
        };
        let plans = c.resolve().unwrap();
        assert_eq!(plans[0].dimension, 20);
        assert_eq!(plans[0].budget, 200_000);
        assert_eq!(plans[1].dimension, 12);
        assert_eq!(plans[1].budget, 150_000);
    }

    #[test]
    fn resolve_validates_dimensions() {
        let mut c = ExperimentConfig {
            problems: vec!["f5".into()],
            ..ExperimentConfig::default()
        };
        assert!(c.resolve().is_err(), "benchmarks need a dimension");
        c.dimension = Some(20);
        assert!(c.resolve().is_err(), "20 is not a protocol dimension");
        c.dimension = Some(30);
        assert_eq!(c.resolve().unwrap()[0].budget, 300_000);
        c.problems = vec!["nope".into()];
        assert!(matches!(
            c.resolve().unwrap_err(),
            Error::UnknownProblem { .. }
        ));
        c.problems = vec![];
        assert!(c.resolve().is_err());
    }

    #[test]
    fn optimizer_overrides_apply_and_foreign_keys_are_rejected() {
        let mut c = ExperimentConfig::default();
        c.set("w", "0.8,0.3").unwrap();
        c.set("knn_degree", "3").unwrap();
        match c.optimizer_config(10_000).unwrap() {
            OptimizerConfig::Spade(s) => {
                assert_eq!(s.w_schedule, (0.8, 0.3));
                assert_eq!(s.knn_degree, 3);
                assert_eq!(s.c1_schedule, (2.5, 0.5));
            }
            _ => panic!("expected spade"),
        }
        c.optimizer = OptimizerId::Pso;
        assert!(c.optimizer_config(10_000).is_err(), "knn_degree is spade-only");
        c.overrides.knn_degree = None;
        match c.optimizer_config(10_000).unwrap() {
            OptimizerConfig::Pso(p) => assert_eq!(p.w_schedule, (0.8, 0.3)),
            _ => panic!("expected pso"),
        }
        c.set("c1", "1.5,0.5").unwrap();
        assert!(c.optimizer_config(10_000).is_err(), "pso c1 is constant");
        c.set("c1", "1.5").unwrap();
        match c.optimizer_config(10_000).unwrap() {
            OptimizerConfig::Pso(p) => assert_eq!(p.c1, 1.5),
            _ => panic!("expected pso"),
        }
    }

    #[test]
    fn experiment_is_deterministic_and_aggregates_are_consistent() {
        let config = tiny_config();
        let r1 = run_experiment(&config).unwrap();
        let r2 = run_experiment(&config).unwrap();
        assert_eq!(r1, r2);
        let entry = &r1.file.entries[0];
        assert_eq!(entry.runs.len(), 3);
        let recomputed = error_stats(&entry.errors()).unwrap();
        assert_eq!(entry.stats, recomputed);
        assert_eq!(r1.file.provenance.seeds, vec![1, 2, 3]);
        assert_eq!(r1.traces[0].per_run.len(), 3);
        // Sphere knows its optimum, so error equals fitness.
        assert_eq!(entry.runs[0].error, entry.runs[0].best_fitness);
    }

    #[test]
    fn reports_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&tiny_config()).unwrap();
        write_report(&report, dir.path()).unwrap();
        let loaded = load_report(&dir.path().join("report.json")).unwrap();
        assert_eq!(loaded, report.file);
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with("problem,dimension,budget,runs,best,mean,std_dev\n"));
        assert_eq!(summary.lines().count(), 2);
        let trace0 = std::fs::read_to_string(dir.path().join("traces/sphere_D4_run0.csv")).unwrap();
        assert!(trace0.starts_with(TraceRecord::CSV_HEADER));
        assert_eq!(
            trace0.lines().count(),
            report.traces[0].per_run[0].len() + 1
        );
        // Writing twice produces identical bytes.
        let first = std::fs::read(dir.path().join("report.json")).unwrap();
        write_report(&report, dir.path()).unwrap();
        let second = std::fs::read(dir.path().join("report.json")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn self_comparison_is_all_ties() {
        // Three runs: too few pairs for a signed-rank test, verdict only.
        let report = run_experiment(&tiny_config()).unwrap();
        let c = compare(&report.file, &report.file).unwrap();
        assert_eq!(c.verdict.ties, 1);
        assert_eq!(c.verdict.wins + c.verdict.losses, 0);
        assert_eq!(c.rows[0].symbol, '≈');
        assert!(c.rows[0].wilcoxon.is_none());
        // Six runs: the vacuous paired test reports level 1.
        let six = synthetic_report("f8", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let c = compare(&six, &six).unwrap();
        assert_eq!(c.rows[0].wilcoxon.as_ref().unwrap().p_value, 1.0);
        let text = c.to_string();
        assert!(text.contains('≈'));
        assert!(c.to_csv().starts_with("problem,dimension,mean_a,mean_b,verdict,p_value\n"));
    }

    fn synthetic_report(problem: &str, errors: &[f64]) -> ReportFile {
        ReportFile {
            optimizer: OptimizerId::Spade,
            provenance: Provenance {
                package_version: "test".into(),
                config_hash: "0".into(),
                config: vec![],
                seeds: (1..=errors.len() as u64).collect(),
            },
            entries: vec![ProblemEntry {
                problem: problem.into(),
                dimension: 10,
                budget: 1000,
                stats: error_stats(errors).unwrap(),
                runs: errors
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| RunSummary {
                        seed: i as u64 + 1,
                        best_fitness: e,
                        error: e,
                        evaluations: 1000,
                        best_position: vec![0.0],
                    })
                    .collect(),
            }],
        }
    }

    #[test]
    fn dominant_report_wins_with_annotated_p() {
        let a = synthetic_report("f8", &[1.0, 2.0, 1.5, 0.5, 1.2, 0.8]);
        let b = synthetic_report("f8", &[5.0, 6.0, 5.5, 4.5, 5.2, 4.8]);
        let c = compare(&a, &b).unwrap();
        assert_eq!(c.verdict.wins, 1);
        assert_eq!(c.rows[0].symbol, '+');
        let w = c.rows[0].wilcoxon.as_ref().unwrap();
        assert!(w.p_value < SIGNIFICANCE);
        assert!(c.to_string().contains("(p="));
    }

    #[test]
    fn mismatched_reports_list_the_difference() {
        let a = synthetic_report("f8", &[1.0; 5]);
        let b = synthetic_report("f9", &[1.0; 5]);
        let err = compare(&a, &b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("only in first: f8(D10)"), "{msg}");
        assert!(msg.contains("only in second: f9(D10)"), "{msg}");
    }
}
