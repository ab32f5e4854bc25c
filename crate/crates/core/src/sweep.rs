//! Experiment matrix: global rules × rule pairs × initial rows.
//!
//! Work is partitioned by global rule. Each rule index gets one shard file,
//! `gr_NNNNNN.csv`, written to a temporary name and renamed into place once
//! its `#done` marker line is on disk. Shards without the marker are treated
//! as absent, so an interrupted run can simply be resumed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complexity::{Scorer, Thresholds, WolframClass};
use crate::debruijn::initial_conditions;
use crate::eca::{evolve_unchecked, Configuration, EcaRule, EvolutionGrid, BINARY, TERNARY};
use crate::error::{Error, Result};
use crate::global_rule::{pair_enumeration, GlobalRule, MixedAssignment, MIXED_SPACE};

pub const SHARD_HEADER: &str = "gr_index,eps,eps_prime,init_index,score,class,conflict";
pub const DONE_MARKER: &str = "#done";
/// `gr_index` of isolated baseline runs.
pub const ISOLATED: u64 = 0;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Scored {
        score: i64,
        class: WolframClass,
    },
    /// Conflicted pair under strict mode; nothing was executed.
    Rejected,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RunRecord {
    pub gr_index: u64,
    pub eps: u8,
    pub eps_prime: u8,
    /// 1-based position of the initial row in the de Bruijn enumeration.
    pub init_index: usize,
    pub outcome: Outcome,
    pub conflict: bool,
}

impl RunRecord {
    pub fn score(&self) -> Option<i64> {
        match self.outcome {
            Outcome::Scored { score, .. } => Some(score),
            Outcome::Rejected => None,
        }
    }

    pub fn class(&self) -> Option<WolframClass> {
        match self.outcome {
            Outcome::Scored { class, .. } => Some(class),
            Outcome::Rejected => None,
        }
    }

    /// One CSV line without the trailing newline. Rejected runs carry `NA`
    /// in the score and class columns.
    pub fn to_csv(&self) -> String {
        let (score, class) = match self.outcome {
            Outcome::Scored { score, class } => (score.to_string(), class.to_string()),
            Outcome::Rejected => ("NA".to_string(), "NA".to_string()),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.gr_index,
            self.eps,
            self.eps_prime,
            self.init_index,
            score,
            class,
            u8::from(self.conflict)
        )
    }

    pub fn parse_csv(line: &str) -> Option<RunRecord> {
        let f: Vec<&str> = line.trim().split(',').collect();
        let [gr, eps, eps_prime, init, score, class, conflict] = f[..] else {
            return None;
        };
        let outcome = match (score, class) {
            ("NA", "NA") => Outcome::Rejected,
            (s, c) => Outcome::Scored {
                score: s.parse().ok()?,
                class: WolframClass::from_number(c.parse().ok()?)?,
            },
        };
        Some(RunRecord {
            gr_index: gr.parse().ok()?,
            eps: eps.parse().ok()?,
            eps_prime: eps_prime.parse().ok()?,
            init_index: init.parse().ok()?,
            outcome,
            conflict: match conflict {
                "0" => false,
                "1" => true,
                _ => return None,
            },
        })
    }
}

/// Holds per-thread compressor state for repeated runs.
pub struct Runner<'a> {
    scorer: Scorer,
    thresholds: &'a Thresholds,
}

impl<'a> Runner<'a> {
    pub fn new(thresholds: &'a Thresholds) -> Self {
        Runner {
            scorer: Scorer::new(),
            thresholds,
        }
    }

    fn scored(&mut self, grid: &EvolutionGrid) -> Outcome {
        let s = self.scorer.score(grid);
        Outcome::Scored {
            score: s.normalized,
            class: self.thresholds.classify(s.normalized as f64),
        }
    }

    /// Runs `init` (already checked to be ternary) under a composed rule.
    fn run_composed(
        &mut self,
        gr: &GlobalRule,
        strict: bool,
        init: &[u8],
        init_index: usize,
        steps: usize,
    ) -> RunRecord {
        let outcome = if strict && gr.conflict() {
            Outcome::Rejected
        } else {
            let grid = evolve_unchecked(gr, init, steps);
            self.scored(&grid)
        };
        RunRecord {
            gr_index: gr.index(),
            eps: gr.eps().number(),
            eps_prime: gr.eps_prime().number(),
            init_index,
            outcome,
            conflict: gr.conflict(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn run_one(
        &mut self,
        eps: EcaRule,
        eps_prime: EcaRule,
        mixed: MixedAssignment,
        strict: bool,
        init: &Configuration,
        init_index: usize,
        steps: usize,
    ) -> Result<RunRecord> {
        init.check_alphabet(TERNARY)?;
        let gr = GlobalRule::compose(eps, eps_prime, mixed);
        Ok(self.run_composed(&gr, strict, init.cells(), init_index, steps))
    }

    pub fn run_isolated(
        &mut self,
        rule: EcaRule,
        side: Side,
        init: &Configuration,
        init_index: usize,
        steps: usize,
    ) -> RunRecord {
        let grid = isolated_grid(rule, side, init, steps);
        RunRecord {
            gr_index: ISOLATED,
            eps: rule.number(),
            eps_prime: rule.number(),
            init_index,
            outcome: self.scored(&grid),
            conflict: false,
        }
    }
}

/// Which alphabet an isolated rule runs on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    /// `{0,1}`, the role of the first rule.
    Ones,
    /// `{0,2}`, the role of the second rule.
    Twos,
}

/// Evolution of `rule` alone, with symbols outside its alphabet cleared.
pub fn isolated_grid(
    rule: EcaRule,
    side: Side,
    init: &Configuration,
    steps: usize,
) -> EvolutionGrid {
    match side {
        Side::Ones => evolve_unchecked(&rule, init.project(BINARY).cells(), steps),
        Side::Twos => {
            let ones: Vec<u8> = init.cells().iter().map(|&s| u8::from(s == 2)).collect();
            let grid = evolve_unchecked(&rule, &ones, steps);
            let cells: Vec<u8> = grid.cells().iter().map(|&s| 2 * s).collect();
            let rows: Vec<Vec<u8>> = cells.chunks(grid.width()).map(<[u8]>::to_vec).collect();
            EvolutionGrid::from_rows(&rows).expect("recolored grid keeps its shape")
        }
    }
}

/// One interacting execution: compose, evolve, score, classify.
#[allow(clippy::too_many_arguments)]
pub fn run_one(
    eps: EcaRule,
    eps_prime: EcaRule,
    mixed: MixedAssignment,
    strict: bool,
    init: &Configuration,
    init_index: usize,
    steps: usize,
    thresholds: &Thresholds,
) -> Result<RunRecord> {
    Runner::new(thresholds).run_one(eps, eps_prime, mixed, strict, init, init_index, steps)
}

/// Baseline execution of one rule without interaction, recorded under `gr_index` 0.
pub fn run_isolated(
    rule: EcaRule,
    side: Side,
    init: &Configuration,
    init_index: usize,
    steps: usize,
    thresholds: &Thresholds,
) -> RunRecord {
    Runner::new(thresholds).run_isolated(rule, side, init, init_index, steps)
}

/// Which global rules a sweep visits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GrSelection {
    List(Vec<u64>),
    Range(u64, u64),
    Sample { seed: u64, count: usize },
}

impl GrSelection {
    /// Parses `3,17,40`, `100-199` or `sample:SEED:COUNT`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad global rule selection {text:?}"));
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("sample:") {
            let (seed, count) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(GrSelection::Sample {
                seed: seed.parse().map_err(|_| bad())?,
                count: count.parse().map_err(|_| bad())?,
            });
        }
        if let Some((lo, hi)) = text.split_once('-') {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().parse().map_err(|_| bad())?;
            return Ok(GrSelection::Range(lo, hi));
        }
        let list = text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<u64>>>()?;
        Ok(GrSelection::List(list))
    }

    /// Sorted, deduplicated, validated indices.
    pub fn indices(&self) -> Result<Vec<u64>> {
        let mut out = match self {
            GrSelection::List(v) => v.clone(),
            GrSelection::Range(lo, hi) => {
                if lo > hi {
                    return Err(Error::InvalidParameter(format!("empty range {lo}-{hi}")));
                }
                (*lo..=*hi).collect()
            }
            GrSelection::Sample { seed, count } => sample_indices(*seed, *count)?,
        };
        out.sort_unstable();
        out.dedup();
        if let Some(&bad) = out.iter().find(|&&i| !(1..=MIXED_SPACE).contains(&i)) {
            return Err(Error::MixedIndexOutOfRange(bad));
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("no global rules selected".into()));
        }
        Ok(out)
    }
}

/// `count` distinct indices drawn uniformly from 1..=531441, ascending.
pub fn sample_indices(seed: u64, count: usize) -> Result<Vec<u64>> {
    if count == 0 || count as u64 > MIXED_SPACE {
        return Err(Error::InvalidParameter(format!(
            "sample size {count} outside 1..={MIXED_SPACE}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<u64> = rand::seq::index::sample(&mut rng, MIXED_SPACE as usize, count)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SweepPlan {
    pub gr_indices: Vec<u64>,
    pub pairs: Vec<(u8, u8)>,
    pub init_count: usize,
    pub width: usize,
    pub steps: usize,
    pub strict_conflicts: bool,
}

impl SweepPlan {
    /// A plan over all 3916 representative pairs.
    pub fn new(gr_indices: Vec<u64>, init_count: usize, width: usize, steps: usize) -> Self {
        SweepPlan {
            gr_indices,
            pairs: pair_enumeration(),
            init_count,
            width,
            steps,
            strict_conflicts: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&bad) = self
            .gr_indices
            .iter()
            .find(|&&i| !(1..=MIXED_SPACE).contains(&i))
        {
            return Err(Error::MixedIndexOutOfRange(bad));
        }
        let mut sorted = self.gr_indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.gr_indices.len() {
            return Err(Error::InvalidParameter(
                "duplicate global rule index".into(),
            ));
        }
        if self.pairs.is_empty() || self.init_count == 0 || self.width == 0 {
            return Err(Error::InvalidParameter(
                "plan needs at least one pair, one initial row and a nonzero width".into(),
            ));
        }
        Ok(())
    }

    pub fn records_per_shard(&self) -> usize {
        self.pairs.len() * self.init_count
    }

    /// Everything that must match for shards from two runs to be mixed.
    fn fingerprint(&self, thresholds: &Thresholds) -> String {
        let mut pairs = String::new();
        for (a, b) in &self.pairs {
            let _ = write!(pairs, "{a}:{b} ");
        }
        format!(
            "width={}\nsteps={}\ninits={}\nstrict_conflicts={}\npairs={}\n{}",
            self.width,
            self.steps,
            self.init_count,
            self.strict_conflicts,
            pairs.trim_end(),
            thresholds.to_text()
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ExecuteOptions {
    pub workers: usize,
    /// Skip shards that already carry their completion marker.
    pub resume: bool,
    /// Stop after writing this many shards.
    pub shard_limit: Option<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Summary {
    pub shards_total: usize,
    pub shards_skipped: usize,
    pub shards_written: usize,
    pub executions: usize,
    pub records: usize,
    pub conflicts: usize,
    pub wall: Duration,
}

impl Summary {
    pub fn to_text(&self) -> String {
        format!(
            "shards_total={}\nshards_skipped={}\nshards_written={}\nexecutions={}\nrecords={}\nconflict_records={}\nwall_ms={}\n",
            self.shards_total,
            self.shards_skipped,
            self.shards_written,
            self.executions,
            self.records,
            self.conflicts,
            self.wall.as_millis()
        )
    }
}

pub fn shard_path(dir: &Path, gr_index: u64) -> PathBuf {
    dir.join(format!("gr_{gr_index:06}.csv"))
}

/// Whether the shard exists and ends with its completion marker.
pub fn shard_is_complete(path: &Path) -> bool {
    fs::read_to_string(path)
        .map(|text| text.lines().last() == Some(DONE_MARKER))
        .unwrap_or(false)
}

/// Records of a completed shard; `None` when the shard is missing or unmarked.
pub fn read_shard(path: &Path) -> Result<Option<Vec<RunRecord>>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    if text.lines().last() != Some(DONE_MARKER) {
        return Ok(None);
    }
    let origin = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, SHARD_HEADER)) => {}
        _ => return Err(Error::parse(&origin, 1, "missing shard header")),
    }
    lines
        .filter(|(_, l)| *l != DONE_MARKER)
        .map(|(i, l)| {
            RunRecord::parse_csv(l).ok_or_else(|| Error::parse(&origin, i + 1, "malformed record"))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Completed shard files in `dir`, sorted by name.
pub fn list_shards(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("gr_") && name.ends_with(".csv") && shard_is_complete(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn shard_text(
    runner: &mut Runner<'_>,
    plan: &SweepPlan,
    gr_index: u64,
    inits: &[Configuration],
) -> Result<String> {
    let mixed = MixedAssignment::from_index(gr_index)?;
    let mut text = String::with_capacity(plan.records_per_shard() * 24 + 64);
    text.push_str(SHARD_HEADER);
    text.push('\n');
    for &(a, b) in &plan.pairs {
        let gr = GlobalRule::compose(EcaRule::from_number(a), EcaRule::from_number(b), mixed);
        for (i, init) in inits.iter().enumerate() {
            let record =
                runner.run_composed(&gr, plan.strict_conflicts, init.cells(), i + 1, plan.steps);
            text.push_str(&record.to_csv());
            text.push('\n');
        }
    }
    text.push_str(DONE_MARKER);
    text.push('\n');
    Ok(text)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(contents.as_bytes())
        .and_then(|()| f.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs every shard of the plan into `out_dir`.
///
/// Shard contents depend only on the plan and thresholds, never on the
/// worker count or scheduling.
pub fn execute(
    plan: &SweepPlan,
    thresholds: &Thresholds,
    out_dir: &Path,
    options: ExecuteOptions,
) -> Result<Summary> {
    let start = Instant::now();
    plan.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let plan_path = out_dir.join("plan.txt");
    let fingerprint = plan.fingerprint(thresholds);
    match fs::read_to_string(&plan_path) {
        Ok(existing) if existing != fingerprint => {
            return Err(Error::InvalidParameter(format!(
                "{} was written for a different plan or thresholds",
                plan_path.display()
            )));
        }
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::write(&plan_path, &fingerprint).map_err(|e| Error::io(&plan_path, e))?;
        }
        Err(e) => return Err(Error::io(&plan_path, e)),
    }

    let inits = initial_conditions(plan.width, plan.init_count)?;
    let pending: Vec<u64> = plan
        .gr_indices
        .iter()
        .copied()
        .filter(|&g| !(options.resume && shard_is_complete(&shard_path(out_dir, g))))
        .collect();
    let skipped = plan.gr_indices.len() - pending.len();
    let todo = &pending[..options.shard_limit.unwrap_or(usize::MAX).min(pending.len())];

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start workers: {e}")))?;
    pool.install(|| {
        todo.par_iter()
            .map_init(
                || Runner::new(thresholds),
                |runner, &g| {
                    let text = shard_text(runner, plan, g, &inits)?;
                    write_atomic(&shard_path(out_dir, g), &text)
                },
            )
            .collect::<Result<Vec<()>>>()
    })?;

    let complete = plan
        .gr_indices
        .iter()
        .filter(|&&g| shard_is_complete(&shard_path(out_dir, g)))
        .count();
    let conflicted_pairs = plan
        .pairs
        .iter()
        .filter(|&&(a, b)| {
            EcaRule::from_number(a).output(0, 0, 0) == 1
                && EcaRule::from_number(b).output(0, 0, 0) == 1
        })
        .count();
    let summary = Summary {
        shards_total: plan.gr_indices.len(),
        shards_skipped: skipped,
        shards_written: todo.len(),
        executions: todo.len() * plan.records_per_shard(),
        records: complete * plan.records_per_shard(),
        conflicts: complete * conflicted_pairs * plan.init_count,
        wall: start.elapsed(),
    };
    let summary_path = out_dir.join("summary.txt");
    fs::write(&summary_path, summary.to_text()).map_err(|e| Error::io(&summary_path, e))?;
    Ok(summary)
}
