//! Elementary cellular automata: rule tables, cyclic rows and spacetime grids.
//!
//! Rules use the Wolfram enumeration. The neighborhood `(left, center, right)`
//! over `{0,1}` is read as the number `4*left + 2*center + right`, and bit `k`
//! of the rule number is the output for neighborhood `k`.
//!
//! Rows are finite and cyclic: cell `-1` is cell `width - 1`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub const BINARY: &[u8] = &[0, 1];
pub const TERNARY: &[u8] = &[0, 1, 2];

/// Number of elementary rules that are pairwise inequivalent under
/// left-right reflection and 0/1 complement.
pub const REPRESENTATIVE_COUNT: usize = 88;

/// A radius-one rule that can be applied to a cyclic row.
pub trait LocalRule {
    /// Symbols this rule accepts.
    fn alphabet(&self) -> &'static [u8];

    /// Writes one synchronous update of `src` into `dst`.
    ///
    /// Both slices have the same nonzero length and `src` only holds symbols
    /// from [`LocalRule::alphabet`].
    fn apply(&self, src: &[u8], dst: &mut [u8]);
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct EcaRule {
    number: u8,
    table: [u8; 8],
}

impl EcaRule {
    pub fn new(number: u32) -> Result<Self> {
        let number = u8::try_from(number).map_err(|_| Error::RuleOutOfRange(number))?;
        Ok(Self::from_number(number))
    }

    pub const fn from_number(number: u8) -> Self {
        let mut table = [0u8; 8];
        let mut k = 0;
        while k < 8 {
            table[k] = (number >> k) & 1;
            k += 1;
        }
        EcaRule { number, table }
    }

    fn from_table(table: [u8; 8]) -> Self {
        let number = table
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &bit)| acc | (bit << k));
        EcaRule { number, table }
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    pub fn table(&self) -> &[u8; 8] {
        &self.table
    }

    /// Output for the neighborhood `(left, center, right)`.
    pub fn output(&self, left: u8, center: u8, right: u8) -> u8 {
        self.table[usize::from(4 * left + 2 * center + right)]
    }

    /// The mirror-image rule: left and right neighbors exchange roles.
    pub fn reflect(&self) -> Self {
        let mut table = [0u8; 8];
        for (k, slot) in table.iter_mut().enumerate() {
            let mirrored = ((k & 1) << 2) | (k & 2) | (k >> 2);
            *slot = self.table[mirrored];
        }
        Self::from_table(table)
    }

    /// The rule obtained by exchanging 0 and 1 in both inputs and outputs.
    pub fn complement(&self) -> Self {
        let mut table = [0u8; 8];
        for (k, slot) in table.iter_mut().enumerate() {
            *slot = 1 - self.table[7 - k];
        }
        Self::from_table(table)
    }

    pub fn step(&self, config: &Configuration) -> Result<Configuration> {
        config.check_alphabet(BINARY)?;
        let mut cells = vec![0; config.width()];
        self.apply(config.cells(), &mut cells);
        Ok(Configuration { cells })
    }
}

impl fmt::Debug for EcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EcaRule({})", self.number)
    }
}

impl fmt::Display for EcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number)
    }
}

impl LocalRule for EcaRule {
    fn alphabet(&self) -> &'static [u8] {
        BINARY
    }

    fn apply(&self, src: &[u8], dst: &mut [u8]) {
        let n = src.len();
        let mut code = (usize::from(src[n - 1]) << 1) | usize::from(src[0]);
        for i in 0..n {
            let right = src[if i + 1 == n { 0 } else { i + 1 }];
            code = ((code << 1) & 0b110) | usize::from(right);
            dst[i] = self.table[code];
        }
    }
}

/// Returns the table for a Wolfram rule number.
pub fn rule_table(number: u32) -> Result<EcaRule> {
    EcaRule::new(number)
}

/// The equivalence class of `number` under reflection and complement.
pub fn symmetry_orbit(number: u32) -> Result<BTreeSet<u8>> {
    let rule = EcaRule::new(number)?;
    let reflected = rule.reflect();
    Ok([
        rule.number(),
        reflected.number(),
        rule.complement().number(),
        reflected.complement().number(),
    ]
    .into_iter()
    .collect())
}

/// Smallest rule number in the orbit of `number`.
pub fn representative_of(number: u8) -> u8 {
    let rule = EcaRule::from_number(number);
    let reflected = rule.reflect();
    [
        number,
        reflected.number(),
        rule.complement().number(),
        reflected.complement().number(),
    ]
    .into_iter()
    .min()
    .unwrap_or(number)
}

/// Minimal member of every symmetry orbit, ascending. Always 88 entries.
pub fn representatives() -> Vec<u8> {
    (0..=255u8).filter(|&n| representative_of(n) == n).collect()
}

/// A finite cyclic row of symbols.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Configuration {
    cells: Vec<u8>,
}

impl Configuration {
    /// Builds a row over `{0,1,2}`. Empty rows are rejected.
    pub fn new(cells: Vec<u8>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidWidth {
                width: 0,
                reason: "a row needs at least one cell",
            });
        }
        let config = Configuration { cells };
        config.check_alphabet(TERNARY)?;
        Ok(config)
    }

    pub fn zeros(width: usize) -> Result<Self> {
        Self::new(vec![0; width])
    }

    /// Parses a string of ASCII digits such as `"0010200"`.
    pub fn parse(digits: &str) -> Result<Self> {
        let cells = digits
            .trim()
            .bytes()
            .map(|b| match b {
                b'0'..=b'2' => Ok(b - b'0'),
                _ => Err(Error::InvalidParameter(format!(
                    "row {digits:?} must only contain the digits 0, 1 and 2"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells)
    }

    pub fn width(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<u8> {
        self.cells
    }

    pub fn check_alphabet(&self, alphabet: &'static [u8]) -> Result<()> {
        match self
            .cells
            .iter()
            .enumerate()
            .find(|(_, s)| !alphabet.contains(s))
        {
            Some((cell, &symbol)) => Err(Error::ForeignSymbol {
                symbol,
                cell,
                alphabet,
            }),
            None => Ok(()),
        }
    }

    /// Maps every symbol outside `alphabet` to 0.
    pub fn project(&self, alphabet: &[u8]) -> Configuration {
        let cells = self
            .cells
            .iter()
            .map(|s| if alphabet.contains(s) { *s } else { 0 })
            .collect();
        Configuration { cells }
    }

    pub fn mirrored(&self) -> Configuration {
        let mut cells = self.cells.clone();
        cells.reverse();
        Configuration { cells }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Spacetime output of a run: `steps + 1` rows of equal width, stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EvolutionGrid {
    width: usize,
    cells: Vec<u8>,
}

impl EvolutionGrid {
    /// Builds a grid from explicit rows. Rows must be nonempty and of equal width.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 {
            return Err(Error::InvalidWidth {
                width,
                reason: "a grid needs at least one nonempty row",
            });
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("grid rows differ in width".into()));
        }
        let cells: Vec<u8> = rows.concat();
        if let Some(&s) = cells.iter().find(|&&s| s > 2) {
            return Err(Error::InvalidParameter(format!(
                "grid symbol {s} outside 0..=2"
            )));
        }
        Ok(EvolutionGrid { width, cells })
    }

    pub fn zeros(width: usize, steps: usize) -> Self {
        EvolutionGrid {
            width,
            cells: vec![0; width * (steps + 1)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of update steps, one less than the row count.
    pub fn steps(&self) -> usize {
        self.cells.len() / self.width - 1
    }

    pub fn row_count(&self) -> usize {
        self.cells.len() / self.width
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.cells[t * self.width..(t + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks_exact(self.width)
    }

    pub fn last_row(&self) -> &[u8] {
        self.row(self.row_count() - 1)
    }

    /// All cells, row-major.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }
}

/// Runs `rule` from `init` for `steps` updates, keeping every row.
pub fn evolve<R: LocalRule + ?Sized>(
    rule: &R,
    init: &Configuration,
    steps: usize,
) -> Result<EvolutionGrid> {
    init.check_alphabet(rule.alphabet())?;
    Ok(evolve_unchecked(rule, init.cells(), steps))
}

pub(crate) fn evolve_unchecked<R: LocalRule + ?Sized>(
    rule: &R,
    init: &[u8],
    steps: usize,
) -> EvolutionGrid {
    let width = init.len();
    let mut cells = vec![0u8; width * (steps + 1)];
    cells[..width].copy_from_slice(init);
    for t in 0..steps {
        let (done, rest) = cells.split_at_mut((t + 1) * width);
        rule.apply(&done[t * width..], &mut rest[..width]);
    }
    EvolutionGrid { width, cells }
}
