//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 I/O.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::{heatmaps_from_dir, render_grid, render_heatmaps};
use crate::complexity::{Calibration, LabeledRuleSet, Thresholds, WolframClass};
use crate::debruijn::{dump, enumerate, initial_condition, initial_conditions};
use crate::eca::{evolve, symmetry_orbit, Configuration, EcaRule};
use crate::error::Error;
use crate::global_rule::{GlobalRule, MixedAssignment};
use crate::sweep::{self, ExecuteOptions, GrSelection, Side, SweepPlan};

pub const DEFAULT_WIDTH: usize = 26;
pub const DEFAULT_STEPS: usize = 60;
pub const DEFAULT_INITS: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "interacting-ca",
    version,
    about = "Interacting elementary cellular automata under 3-color global rules"
)]
pub struct Cli {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Row width.
    #[arg(long, global = true)]
    width: Option<usize>,
    /// Update steps per run.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Trained thresholds file. Without it, thresholds are calibrated on the fly.
    #[arg(long, global = true, value_name = "FILE")]
    thresholds: Option<PathBuf>,
    /// Labeled rule set (`rule,class` lines). Defaults to the shipped labels.
    #[arg(long, global = true, value_name = "FILE")]
    labels: Option<PathBuf>,
    /// Reject rule pairs that disagree on the all-zero neighborhood.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the 88 representative rules with their class labels and orbits.
    Rules,
    /// Evolve one elementary rule and print the grid.
    Step {
        #[arg(long)]
        rule: u32,
        /// Initial row as digits, e.g. 0001000.
        #[arg(long)]
        init: String,
        /// Also write <BASE>.txt and <BASE>.ppm.
        #[arg(long, value_name = "BASE")]
        render: Option<PathBuf>,
    },
    /// Print the 27-entry table of a global rule and its conflict flag.
    Compose {
        #[arg(long)]
        eps: u32,
        #[arg(long = "eps-prime")]
        eps_prime: u32,
        #[arg(long)]
        gr: u64,
    },
    /// One interacting execution; prints the record.
    Run {
        #[arg(long)]
        eps: u32,
        #[arg(long = "eps-prime")]
        eps_prime: u32,
        #[arg(long)]
        gr: u64,
        /// 1-based de Bruijn initial row.
        #[arg(long = "init-index")]
        init_index: usize,
        #[arg(long, value_name = "BASE")]
        render: Option<PathBuf>,
    },
    /// One rule without interaction; prints the record.
    Isolated {
        #[arg(long)]
        rule: u32,
        #[arg(long = "init-index")]
        init_index: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Ones)]
        side: SideArg,
    },
    /// Print de Bruijn initial rows, one per line; `--width` truncates each
    /// sequence, otherwise the full sequence is printed.
    Debruijn {
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 3)]
        alphabet: usize,
        #[arg(long, default_value_t = DEFAULT_INITS)]
        count: usize,
    },
    /// Train class thresholds on the labeled rules.
    Calibrate {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        inits: InitsArg,
    },
    /// Run global rules × rule pairs × initial rows into shard files.
    Sweep {
        /// `1,5,9`, `100-199` or `sample:SEED:COUNT`.
        #[arg(long)]
        grs: String,
        #[command(flatten)]
        inits: InitsArg,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Keep completed shards instead of recomputing them.
        #[arg(long)]
        resume: bool,
        /// Stop after writing this many shards.
        #[arg(long = "max-shards")]
        max_shards: Option<usize>,
    },
    /// Build heat maps from a sweep directory.
    Aggregate {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long = "out-csv", value_name = "FILE")]
        out_csv: PathBuf,
        #[arg(long = "out-svg", value_name = "FILE")]
        out_svg: PathBuf,
    },
}

#[derive(Debug, Args)]
struct InitsArg {
    /// Number of de Bruijn initial rows.
    #[arg(long = "inits")]
    count: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Ones,
    Twos,
}

/// Effective settings after merging the config file and flags.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Config {
    pub width: usize,
    pub steps: usize,
    pub init_count: usize,
    pub output_dir: PathBuf,
    pub worker_count: usize,
    pub strict_conflicts: bool,
    pub thresholds_path: Option<PathBuf>,
    pub labels_path: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            width: DEFAULT_WIDTH,
            steps: DEFAULT_STEPS,
            init_count: DEFAULT_INITS,
            output_dir: PathBuf::from("sweep-out"),
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            strict_conflicts: false,
            thresholds_path: None,
            labels_path: None,
        }
    }
}

impl Config {
    /// Applies `key = value` lines over the current values.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("config line {}: bad value {value:?} for {key}", i + 1);
            match key {
                "width" => self.width = value.parse().map_err(|_| bad())?,
                "steps" => self.steps = value.parse().map_err(|_| bad())?,
                "init_count" => self.init_count = value.parse().map_err(|_| bad())?,
                "output_dir" => self.output_dir = PathBuf::from(value),
                "worker_count" => self.worker_count = value.parse().map_err(|_| bad())?,
                "strict_conflicts" => self.strict_conflicts = value.parse().map_err(|_| bad())?,
                "thresholds_path" => self.thresholds_path = Some(PathBuf::from(value)),
                "labels_path" => self.labels_path = Some(PathBuf::from(value)),
                _ => return Err(format!("config line {}: unknown key {key:?}", i + 1)),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.width == 0 {
            return Err("width must be at least 1".into());
        }
        if self.init_count == 0 {
            return Err("init_count must be at least 1".into());
        }
        if self.worker_count == 0 {
            return Err("worker_count must be at least 1".into());
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut fields = BTreeMap::new();
        fields.insert("width", self.width.to_string());
        fields.insert("steps", self.steps.to_string());
        fields.insert("init_count", self.init_count.to_string());
        fields.insert("output_dir", self.output_dir.display().to_string());
        fields.insert("worker_count", self.worker_count.to_string());
        fields.insert("strict_conflicts", self.strict_conflicts.to_string());
        if let Some(p) = &self.thresholds_path {
            fields.insert("thresholds_path", p.display().to_string());
        }
        if let Some(p) = &self.labels_path {
            fields.insert("labels_path", p.display().to_string());
        }
        fields
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// The merged configuration, and whether the width was set explicitly by
/// either the config file or a flag.
fn effective_config(cli: &Cli) -> Result<(Config, bool), Failure> {
    let mut config = Config::default();
    let mut width_set = cli.width.is_some();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        config.apply_file_text(&text).map_err(Failure::Usage)?;
        width_set |= text
            .lines()
            .filter_map(|l| l.split_once('='))
            .any(|(k, _)| k.trim() == "width");
    }
    if let Some(w) = cli.width {
        config.width = w;
    }
    if let Some(s) = cli.steps {
        config.steps = s;
    }
    if cli.strict {
        config.strict_conflicts = true;
    }
    if cli.thresholds.is_some() {
        config.thresholds_path.clone_from(&cli.thresholds);
    }
    if cli.labels.is_some() {
        config.labels_path.clone_from(&cli.labels);
    }
    match &cli.command {
        Command::Sweep {
            inits, out, jobs, ..
        } => {
            if let Some(c) = inits.count {
                config.init_count = c;
            }
            if let Some(o) = out {
                config.output_dir.clone_from(o);
            }
            if let Some(j) = jobs {
                config.worker_count = *j;
            }
        }
        Command::Calibrate { inits, .. } => {
            if let Some(c) = inits.count {
                config.init_count = c;
            }
        }
        _ => {}
    }
    config.validate().map_err(Failure::Usage)?;
    Ok((config, width_set))
}

fn load_labels(config: &Config) -> Result<LabeledRuleSet, Error> {
    match &config.labels_path {
        Some(p) => LabeledRuleSet::load(p),
        None => Ok(LabeledRuleSet::builtin()),
    }
}

fn load_thresholds(config: &Config) -> Result<Thresholds, Error> {
    if let Some(p) = &config.thresholds_path {
        let t = Thresholds::load(p)?;
        let prov = t.provenance();
        if prov.width != config.width || prov.steps != config.steps {
            eprintln!(
                "warning: thresholds were trained at width {} / {} steps, running at width {} / {} steps",
                prov.width, prov.steps, config.width, config.steps
            );
        }
        return Ok(t);
    }
    // Training always uses the default row count so that a small sweep does
    // not inherit thresholds fit to a handful of rows.
    let labels = load_labels(config)?;
    let inits = initial_conditions(config.width, DEFAULT_INITS)?;
    Ok(Calibration::run(&labels, config.width, config.steps, &inits)?.thresholds)
}

fn init_row(config: &Config, init_index: usize) -> Result<Configuration, Failure> {
    if init_index == 0 {
        return Err(Failure::Usage("--init-index is 1-based".into()));
    }
    let rows = initial_conditions(config.width, init_index)?;
    Ok(rows[init_index - 1].clone())
}

fn rule(n: u32) -> Result<EcaRule, Failure> {
    EcaRule::new(n).map_err(|e| Failure::Usage(e.to_string()))
}

fn mixed(index: u64) -> Result<MixedAssignment, Failure> {
    MixedAssignment::from_index(index).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (config, width_set) = effective_config(&cli)?;
    match &cli.command {
        Command::Rules => {
            let labels = load_labels(&config)?;
            println!("rule,class,orbit");
            for (r, c) in labels.iter() {
                let orbit: Vec<String> = symmetry_orbit(u32::from(r))?
                    .iter()
                    .map(u8::to_string)
                    .collect();
                println!("{r},{c},{}", orbit.join(" "));
            }
        }
        Command::Step {
            rule: n,
            init,
            render,
        } => {
            let init = Configuration::parse(init).map_err(|e| Failure::Usage(e.to_string()))?;
            let grid = evolve(&rule(*n)?, &init, config.steps)?;
            print!("{}", crate::aggregate::grid_text(&grid));
            if let Some(base) = render {
                render_grid(&grid, base)?;
            }
        }
        Command::Compose { eps, eps_prime, gr } => {
            let (a, b, m) = (rule(*eps)?, rule(*eps_prime)?, mixed(*gr)?);
            let composed = if config.strict_conflicts {
                GlobalRule::compose_strict(a, b, m)?
            } else {
                GlobalRule::compose(a, b, m)
            };
            println!("table={}", composed.table_string());
            println!("conflict={}", u8::from(composed.conflict()));
        }
        Command::Run {
            eps,
            eps_prime,
            gr,
            init_index,
            render,
        } => {
            let (a, b, m) = (rule(*eps)?, rule(*eps_prime)?, mixed(*gr)?);
            let init = init_row(&config, *init_index)?;
            let thresholds = load_thresholds(&config)?;
            let record = sweep::run_one(
                a,
                b,
                m,
                config.strict_conflicts,
                &init,
                *init_index,
                config.steps,
                &thresholds,
            )?;
            println!("{}", sweep::SHARD_HEADER);
            println!("{}", record.to_csv());
            if let Some(base) = render {
                let grid = GlobalRule::compose(a, b, m).evolve(&init, config.steps)?;
                render_grid(&grid, base)?;
            }
        }
        Command::Isolated {
            rule: n,
            init_index,
            side,
        } => {
            let r = rule(*n)?;
            let init = init_row(&config, *init_index)?;
            let thresholds = load_thresholds(&config)?;
            let side = match side {
                SideArg::Ones => Side::Ones,
                SideArg::Twos => Side::Twos,
            };
            let record =
                sweep::run_isolated(r, side, &init, *init_index, config.steps, &thresholds);
            println!("{}", sweep::SHARD_HEADER);
            println!("{}", record.to_csv());
        }
        Command::Debruijn {
            order,
            alphabet,
            count,
        } => {
            let seqs = enumerate(*alphabet, *order, *count)?;
            let rows = seqs
                .iter()
                .map(|s| initial_condition(s, if width_set { config.width } else { s.len() }))
                .collect::<Result<Vec<_>, _>>()?;
            print!("{}", dump(&rows));
        }
        Command::Calibrate { out, .. } => {
            let labels = load_labels(&config)?;
            let inits = initial_conditions(config.width, config.init_count)?;
            let cal = Calibration::run(&labels, config.width, config.steps, &inits)?;
            cal.thresholds.save(out)?;
            print!("{}", cal.thresholds.to_text());
            for c in WolframClass::ALL {
                println!("mean_class_{c}={}", cal.class_means[c.index()]);
            }
            println!("training_misclassified={}", cal.misclassified().len());
        }
        Command::Sweep {
            grs,
            resume,
            max_shards,
            ..
        } => {
            let indices = GrSelection::parse(grs)
                .and_then(|s| s.indices())
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let thresholds = load_thresholds(&config)?;
            let mut plan = SweepPlan::new(indices, config.init_count, config.width, config.steps);
            plan.strict_conflicts = config.strict_conflicts;
            let dir = &config.output_dir;
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_text(&dir.join("config.txt"), &config.to_text())?;
            write_text(&dir.join("thresholds.txt"), &thresholds.to_text())?;
            let summary = sweep::execute(
                &plan,
                &thresholds,
                dir,
                ExecuteOptions {
                    workers: config.worker_count,
                    resume: *resume,
                    shard_limit: *max_shards,
                },
            )?;
            print!("{}", summary.to_text());
        }
        Command::Aggregate {
            input,
            out_csv,
            out_svg,
        } => {
            let labels = load_labels(&config)?;
            let maps = heatmaps_from_dir(input, &labels)?;
            render_heatmaps(&maps, out_csv, out_svg)?;
            println!("records={}", maps.records());
            println!("skipped={}", maps.skipped());
            for c in WolframClass::ALL {
                match maps.modal_cell(c) {
                    Some((a, b)) => println!("class_{c}: n={} modal=({a},{b})", maps.total(c)),
                    None => println!("class_{c}: empty"),
                }
            }
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
