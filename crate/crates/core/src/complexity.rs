//! Compression-based complexity scores and Wolfram-class assignment.
//!
//! A grid is serialized row-major as ASCII digits and compressed with raw
//! deflate at a fixed level. Its score is the compressed length minus the
//! compressed length of an all-`'0'` string of the same length, so uniform
//! grids score zero. Thresholds between classes are trained on elementary
//! rules with known labels: classes are ordered by mean score and the three
//! cuts are placed to misclassify as few training rules as possible.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use libdeflater::{CompressionLvl, Compressor};
use rayon::prelude::*;

use crate::debruijn::initial_conditions;
use crate::eca::{
    evolve_unchecked, representative_of, Configuration, EcaRule, EvolutionGrid, LocalRule,
};
use crate::error::{Error, Result};

/// Deflate level used for every score. Changing it changes every score.
pub const COMPRESSION_LEVEL: i32 = 9;

const BUILTIN_LABELS: &str = include_str!("../data/eca_classes.csv");

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum WolframClass {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl WolframClass {
    pub const ALL: [WolframClass; 4] = [
        WolframClass::One,
        WolframClass::Two,
        WolframClass::Three,
        WolframClass::Four,
    ];

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(WolframClass::One),
            2 => Some(WolframClass::Two),
            3 => Some(WolframClass::Three),
            4 => Some(WolframClass::Four),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Zero-based position, for indexing 4-element arrays.
    pub fn index(self) -> usize {
        self as usize - 1
    }
}

impl fmt::Display for WolframClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClassScore {
    pub raw_bytes: usize,
    pub baseline_bytes: usize,
    pub normalized: i64,
    pub class: Option<WolframClass>,
}

impl ClassScore {
    pub fn with_class(mut self, thresholds: &Thresholds) -> Self {
        self.class = Some(thresholds.classify(self.normalized as f64));
        self
    }
}

/// Row-major ASCII digits, no separators.
pub fn serialize_grid(grid: &EvolutionGrid) -> Vec<u8> {
    grid.cells().iter().map(|&c| b'0' + c).collect()
}

/// Reusable compressor state. One per thread.
pub struct Scorer {
    compressor: Compressor,
    text: Vec<u8>,
    out: Vec<u8>,
    baselines: HashMap<usize, usize>,
}

impl Default for Scorer {
    fn default() -> Self {
        Self::new()
    }
}

impl Scorer {
    pub fn new() -> Self {
        let level =
            CompressionLvl::new(COMPRESSION_LEVEL).expect("level within libdeflate's range");
        Scorer {
            compressor: Compressor::new(level),
            text: Vec::new(),
            out: Vec::new(),
            baselines: HashMap::new(),
        }
    }

    pub fn compressed_len(&mut self, data: &[u8]) -> usize {
        let bound = self.compressor.deflate_compress_bound(data.len());
        if self.out.len() < bound {
            self.out.resize(bound, 0);
        }
        self.compressor
            .deflate_compress(data, &mut self.out)
            .expect("output buffer sized by the compress bound")
    }

    pub fn baseline(&mut self, len: usize) -> usize {
        if let Some(&b) = self.baselines.get(&len) {
            return b;
        }
        let zeros = vec![b'0'; len];
        let b = self.compressed_len(&zeros);
        self.baselines.insert(len, b);
        b
    }

    /// Scores an already serialized grid.
    pub fn score_text(&mut self, text: &[u8]) -> ClassScore {
        let raw_bytes = self.compressed_len(text);
        let baseline_bytes = self.baseline(text.len());
        ClassScore {
            raw_bytes,
            baseline_bytes,
            normalized: raw_bytes as i64 - baseline_bytes as i64,
            class: None,
        }
    }

    pub fn score(&mut self, grid: &EvolutionGrid) -> ClassScore {
        let mut text = std::mem::take(&mut self.text);
        text.clear();
        text.extend(grid.cells().iter().map(|&c| b'0' + c));
        let s = self.score_text(&text);
        self.text = text;
        s
    }
}

/// One-shot scoring with a fresh compressor.
pub fn score(grid: &EvolutionGrid) -> ClassScore {
    Scorer::new().score(grid)
}

/// Class labels for elementary rules, keyed by orbit representative.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LabeledRuleSet {
    id: String,
    labels: BTreeMap<u8, WolframClass>,
}

impl LabeledRuleSet {
    /// The shipped labeling of the 88 representatives.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LABELS, "<builtin>").expect("shipped label file parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `rule,class` lines. `#` starts a comment; a `# id: NAME` comment
    /// names the set. A `rule,class` header line is allowed.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut id = None;
        let mut labels = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(name) = comment.trim().strip_prefix("id:") {
                    id.get_or_insert_with(|| name.trim().to_string());
                }
                continue;
            }
            if line.is_empty() || line == "rule,class" {
                continue;
            }
            let (rule, class) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `rule,class`"))?;
            let rule: u8 = rule
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad rule number {rule:?}")))?;
            let class = class
                .trim()
                .parse()
                .ok()
                .and_then(WolframClass::from_number)
                .ok_or_else(|| Error::parse(origin, i + 1, format!("bad class {class:?}")))?;
            let rep = representative_of(rule);
            if labels.insert(rep, class).is_some_and(|c| c != class) {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("conflicting labels for the orbit of rule {rule}"),
                ));
            }
        }
        let missing: Vec<u8> = crate::eca::representatives()
            .into_iter()
            .filter(|r| !labels.contains_key(r))
            .collect();
        if !missing.is_empty() {
            return Err(Error::parse(
                origin,
                0,
                format!("no label for representatives {missing:?}"),
            ));
        }
        Ok(LabeledRuleSet {
            id: id.unwrap_or_else(|| origin.to_string()),
            labels,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Label of `rule`'s orbit.
    pub fn class_of(&self, rule: u8) -> Result<WolframClass> {
        self.labels
            .get(&representative_of(rule))
            .copied()
            .ok_or(Error::UnlabeledRule(rule))
    }

    /// Representatives and labels, ascending by rule number.
    pub fn iter(&self) -> impl Iterator<Item = (u8, WolframClass)> + '_ {
        self.labels.iter().map(|(&r, &c)| (r, c))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# id: {}\nrule,class\n", self.id);
        for (r, c) in self.iter() {
            out.push_str(&format!("{r},{c}\n"));
        }
        out
    }
}

/// Where a set of thresholds came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Provenance {
    pub labels: String,
    pub width: usize,
    pub steps: usize,
    pub inits: usize,
}

/// Cut points on the normalized score separating the four classes.
#[derive(Clone, PartialEq, Debug)]
pub struct Thresholds {
    order: [WolframClass; 4],
    cuts: [f64; 3],
    provenance: Provenance,
}

impl Thresholds {
    pub fn new(order: [WolframClass; 4], cuts: [f64; 3], provenance: Provenance) -> Result<Self> {
        let mut seen = order;
        seen.sort();
        if seen != WolframClass::ALL {
            return Err(Error::InvalidParameter(format!(
                "class order {order:?} is not a permutation of 1..=4"
            )));
        }
        if cuts.iter().any(|c| !c.is_finite()) || !cuts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!(
                "cuts {cuts:?} are not finite and strictly increasing"
            )));
        }
        Ok(Thresholds {
            order,
            cuts,
            provenance,
        })
    }

    pub fn order(&self) -> &[WolframClass; 4] {
        &self.order
    }

    pub fn cuts(&self) -> &[f64; 3] {
        &self.cuts
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// A score lying exactly on a cut goes to the lower interval.
    pub fn classify(&self, normalized: f64) -> WolframClass {
        self.cuts
            .iter()
            .position(|&cut| normalized <= cut)
            .map_or(self.order[3], |i| self.order[i])
    }

    pub fn to_text(&self) -> String {
        let order: Vec<String> = self.order.iter().map(|c| c.to_string()).collect();
        let cuts: Vec<String> = self.cuts.iter().map(|c| c.to_string()).collect();
        format!(
            "order={}\ncuts={}\nlabels={}\nwidth={}\nsteps={}\ninits={}\n",
            order.join(","),
            cuts.join(","),
            self.provenance.labels,
            self.provenance.width,
            self.provenance.steps,
            self.provenance.inits,
        )
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key=value`"))?;
            fields.insert(key.trim(), (i + 1, value.trim()));
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::parse(origin, 0, format!("missing field `{key}`")))
        };
        let number = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            v.parse()
                .map_err(|_| Error::parse(origin, line, format!("bad {key} {v:?}")))
        };

        let (line, v) = get("order")?;
        let order: Vec<WolframClass> = v
            .split(',')
            .map(|s| s.trim().parse().ok().and_then(WolframClass::from_number))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::parse(origin, line, format!("bad order {v:?}")))?;
        let order: [WolframClass; 4] = order
            .try_into()
            .map_err(|_| Error::parse(origin, line, "order needs four classes"))?;

        let (line, v) = get("cuts")?;
        let cuts: Vec<f64> = v
            .split(',')
            .map(|s| s.trim().parse().ok())
            .collect::<Option<_>>()
            .ok_or_else(|| Error::parse(origin, line, format!("bad cuts {v:?}")))?;
        let cuts: [f64; 3] = cuts
            .try_into()
            .map_err(|_| Error::parse(origin, line, "cuts needs three values"))?;

        let provenance = Provenance {
            labels: get("labels")?.1.to_string(),
            width: number("width")?,
            steps: number("steps")?,
            inits: number("inits")?,
        };
        Thresholds::new(order, cuts, provenance)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Assigns the class of the interval containing the normalized score.
pub fn classify(score: &ClassScore, thresholds: &Thresholds) -> WolframClass {
    thresholds.classify(score.normalized as f64)
}

/// Mean normalized score of `rule` over `inits`, each projected onto the
/// rule's alphabet.
pub fn mean_score<R: LocalRule + ?Sized>(
    scorer: &mut Scorer,
    rule: &R,
    inits: &[Configuration],
    steps: usize,
) -> f64 {
    let total: i64 = inits
        .iter()
        .map(|init| {
            let row = init.project(rule.alphabet());
            scorer
                .score(&evolve_unchecked(rule, row.cells(), steps))
                .normalized
        })
        .sum();
    total as f64 / inits.len() as f64
}

/// Full output of a calibration run.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub thresholds: Thresholds,
    /// Mean score per labeled rule, ascending by rule number.
    pub rule_means: Vec<(u8, WolframClass, f64)>,
    /// Mean of the per-rule means for each class, indexed by `WolframClass::index`.
    pub class_means: [f64; 4],
}

impl Calibration {
    pub fn run(
        labels: &LabeledRuleSet,
        width: usize,
        steps: usize,
        inits: &[Configuration],
    ) -> Result<Self> {
        if inits.is_empty() {
            return Err(Error::Calibration("no initial conditions".into()));
        }
        if let Some(bad) = inits.iter().find(|i| i.width() != width) {
            return Err(Error::Calibration(format!(
                "initial row of width {} does not match width {width}",
                bad.width()
            )));
        }
        let rules: Vec<(u8, WolframClass)> = labels.iter().collect();
        let rule_means: Vec<(u8, WolframClass, f64)> = rules
            .par_iter()
            .map_init(Scorer::new, |scorer, &(rule, class)| {
                let mean = mean_score(scorer, &EcaRule::from_number(rule), inits, steps);
                (rule, class, mean)
            })
            .collect();

        let mut sums = [0.0f64; 4];
        let mut counts = [0usize; 4];
        for &(_, class, mean) in &rule_means {
            sums[class.index()] += mean;
            counts[class.index()] += 1;
        }
        if let Some(empty) = WolframClass::ALL.iter().find(|c| counts[c.index()] == 0) {
            return Err(Error::Calibration(format!(
                "no labeled rules in class {empty}"
            )));
        }
        let mut class_means = [0.0f64; 4];
        for c in WolframClass::ALL {
            class_means[c.index()] = sums[c.index()] / counts[c.index()] as f64;
        }

        let mut order = WolframClass::ALL;
        order.sort_by(|a, b| class_means[a.index()].total_cmp(&class_means[b.index()]));
        for pair in order.windows(2) {
            if class_means[pair[0].index()] == class_means[pair[1].index()] {
                return Err(Error::Calibration(format!(
                    "classes {} and {} have the same mean score {}",
                    pair[0],
                    pair[1],
                    class_means[pair[0].index()]
                )));
            }
        }
        let scored: Vec<(f64, WolframClass)> = rule_means
            .iter()
            .map(|&(_, class, mean)| (mean, class))
            .collect();
        let cuts = fewest_error_cuts(&scored, &order)?;
        let provenance = Provenance {
            labels: labels.id().to_string(),
            width,
            steps,
            inits: inits.len(),
        };
        Ok(Calibration {
            thresholds: Thresholds::new(order, cuts, provenance)?,
            rule_means,
            class_means,
        })
    }

    /// Training rules whose mean score lands outside their labeled class.
    pub fn misclassified(&self) -> Vec<(u8, WolframClass, WolframClass)> {
        self.rule_means
            .iter()
            .filter_map(|&(rule, label, mean)| {
                let got = self.thresholds.classify(mean);
                (got != label).then_some((rule, label, got))
            })
            .collect()
    }
}

/// Cut points minimizing training misclassifications for a fixed class order.
///
/// Candidate cuts are midpoints between consecutive distinct scores. Ties are
/// broken toward the lowest cut positions, so the result is deterministic.
fn fewest_error_cuts(
    scored: &[(f64, WolframClass)],
    order: &[WolframClass; 4],
) -> Result<[f64; 3]> {
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // group equal scores, since a cut can never separate them
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<[usize; 4]> = Vec::new();
    for &(x, class) in &sorted {
        if values.last() != Some(&x) {
            values.push(x);
            counts.push([0; 4]);
        }
        counts.last_mut().expect("pushed above")[class.index()] += 1;
    }
    if values.len() < 4 {
        return Err(Error::Calibration(format!(
            "only {} distinct scores, need at least 4 to place three cuts",
            values.len()
        )));
    }
    // prefix[g][c] = rules of class c among the first g value groups
    let mut prefix = vec![[0usize; 4]; values.len() + 1];
    for (g, c) in counts.iter().enumerate() {
        for k in 0..4 {
            prefix[g + 1][k] = prefix[g][k] + c[k];
        }
    }
    let correct = |lo: usize, hi: usize, class: WolframClass| {
        prefix[hi][class.index()] - prefix[lo][class.index()]
    };
    let n = values.len();
    let mut best: Option<(usize, [usize; 3])> = None;
    // a cut at position p separates value groups ..p from p..
    for i in 1..n - 2 {
        let first = correct(0, i, order[0]);
        for j in i + 1..n - 1 {
            let second = first + correct(i, j, order[1]);
            for k in j + 1..n {
                let hits = second + correct(j, k, order[2]) + correct(k, n, order[3]);
                if best.is_none_or(|(b, _)| hits > b) {
                    best = Some((hits, [i, j, k]));
                }
            }
        }
    }
    let (_, positions) = best.expect("at least one cut triple");
    Ok(positions.map(|p| (values[p - 1] + values[p]) / 2.0))
}

/// Trains thresholds: per-rule mean scores, classes ordered by mean, fewest-error cuts.
pub fn calibrate(
    labels: &LabeledRuleSet,
    width: usize,
    steps: usize,
    inits: &[Configuration],
) -> Result<Thresholds> {
    Ok(Calibration::run(labels, width, steps, inits)?.thresholds)
}

/// Scores recorded at one ladder point.
#[derive(Clone, Debug)]
pub struct LadderPoint {
    pub width: usize,
    pub steps: usize,
    /// Highest-scoring input at this point.
    pub best: ClassScore,
}

#[derive(Clone, Debug)]
pub struct AsymptoticScore {
    pub best: ClassScore,
    pub points: Vec<LadderPoint>,
}

/// Finite stand-in for the lim sup over inputs and run lengths: the largest
/// score over the first `inits_per_point` de Bruijn rows at every
/// `(width, steps)` ladder point.
pub fn asymptotic_score<R: LocalRule + ?Sized>(
    rule: &R,
    ladder: &[(usize, usize)],
    inits_per_point: usize,
) -> Result<AsymptoticScore> {
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty ladder".into()));
    }
    if !ladder
        .windows(2)
        .all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
    {
        return Err(Error::InvalidParameter(format!(
            "ladder {ladder:?} is not nondecreasing"
        )));
    }
    let mut scorer = Scorer::new();
    let mut points = Vec::with_capacity(ladder.len());
    for &(width, steps) in ladder {
        let inits = initial_conditions(width, inits_per_point)?;
        let best = inits
            .iter()
            .map(|init| {
                let row = init.project(rule.alphabet());
                scorer.score(&evolve_unchecked(rule, row.cells(), steps))
            })
            .max_by_key(|s| s.normalized)
            .expect("at least one initial condition");
        points.push(LadderPoint { width, steps, best });
    }
    let best = points
        .iter()
        .map(|p| p.best)
        .max_by_key(|s| s.normalized)
        .expect("nonempty ladder");
    Ok(AsymptoticScore { best, points })
}
