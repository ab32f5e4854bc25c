//! Three-color global rules built from two elementary rules.
//!
//! The first rule acts on `{0,1}`, the second on `{0,2}`. The 27 neighborhoods
//! over `{0,1,2}` split into 8 over `{0,1}`, 7 over `{0,2}` (the all-zero one is
//! shared) and 12 mixed ones containing both 1 and 2. The outputs on the mixed
//! neighborhoods are the free parameters of a global rule; enumerating them as
//! base-3 tuples in lexicographic order gives indices 1..=531441.

use std::fmt;

use crate::eca::{
    representatives, Configuration, EcaRule, EvolutionGrid, LocalRule, BINARY, TERNARY,
};
use crate::error::{Error, Result};

pub const MIXED_COUNT: usize = 12;
/// `3^12`, the number of mixed assignments per pair of elementary rules.
pub const MIXED_SPACE: u64 = 531_441;
/// Number of unordered pairs, with repetition, of the 88 representatives.
pub const PAIR_COUNT: usize = 3916;

/// The mixed neighborhoods, in the order the assignment digits bind to them.
pub const MIXED_TRIPLETS: [[u8; 3]; MIXED_COUNT] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [2, 0, 1],
    [1, 2, 0],
    [2, 1, 0],
    [1, 1, 2],
    [1, 2, 1],
    [2, 1, 1],
    [1, 2, 2],
    [2, 1, 2],
    [2, 2, 1],
];

const fn code3(t: [u8; 3]) -> usize {
    9 * t[0] as usize + 3 * t[1] as usize + t[2] as usize
}

/// Outputs of a global rule on the 12 mixed neighborhoods.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MixedAssignment {
    digits: [u8; MIXED_COUNT],
}

impl MixedAssignment {
    pub fn from_digits(digits: [u8; MIXED_COUNT]) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d > 2) {
            return Err(Error::InvalidParameter(format!(
                "mixed assignment digit {d} outside 0..=2"
            )));
        }
        Ok(MixedAssignment { digits })
    }

    /// Decodes a 1-based index; the first digit is the most significant.
    pub fn from_index(index: u64) -> Result<Self> {
        if !(1..=MIXED_SPACE).contains(&index) {
            return Err(Error::MixedIndexOutOfRange(index));
        }
        let mut rest = index - 1;
        let mut digits = [0u8; MIXED_COUNT];
        for d in digits.iter_mut().rev() {
            *d = (rest % 3) as u8;
            rest /= 3;
        }
        Ok(MixedAssignment { digits })
    }

    pub fn index(&self) -> u64 {
        1 + self
            .digits
            .iter()
            .fold(0u64, |acc, &d| acc * 3 + u64::from(d))
    }

    pub fn digits(&self) -> &[u8; MIXED_COUNT] {
        &self.digits
    }
}

/// Substitutes 2 by 1 in a row over `{0,2}`.
pub fn recolor_to_01(cells: &[u8]) -> Result<Vec<u8>> {
    substitute(cells, 2, 1, &[0, 2])
}

/// Substitutes 1 by 2 in a row over `{0,1}`.
pub fn recolor_to_02(cells: &[u8]) -> Result<Vec<u8>> {
    substitute(cells, 1, 2, BINARY)
}

fn substitute(cells: &[u8], from: u8, to: u8, alphabet: &'static [u8]) -> Result<Vec<u8>> {
    cells
        .iter()
        .enumerate()
        .map(|(cell, &s)| match s {
            0 => Ok(0),
            s if s == from => Ok(to),
            symbol => Err(Error::ForeignSymbol {
                symbol,
                cell,
                alphabet,
            }),
        })
        .collect()
}

/// A 3-color radius-one rule extending `eps` on `{0,1}` and `eps_prime` on `{0,2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlobalRule {
    eps: EcaRule,
    eps_prime: EcaRule,
    mixed: MixedAssignment,
    table: [u8; 27],
    conflict: bool,
}

impl GlobalRule {
    /// Builds the 27-entry table.
    ///
    /// The shared all-zero neighborhood takes `eps`'s output when it is live,
    /// otherwise `2 * eps_prime`'s. When both rules map it to a live cell the
    /// result is flagged as conflicted and `eps` wins.
    pub fn compose(eps: EcaRule, eps_prime: EcaRule, mixed: MixedAssignment) -> Self {
        let mut slots: [Option<u8>; 27] = [None; 27];
        let mut set = |code: usize, value: u8| {
            assert!(slots[code].is_none(), "neighborhood {code} written twice");
            slots[code] = Some(value);
        };

        for k in 1..8u8 {
            let (p, q, r) = (k >> 2, (k >> 1) & 1, k & 1);
            set(code3([p, q, r]), eps.output(p, q, r));
            set(code3([2 * p, 2 * q, 2 * r]), 2 * eps_prime.output(p, q, r));
        }

        let zero_eps = eps.output(0, 0, 0);
        let zero_prime = eps_prime.output(0, 0, 0);
        let conflict = zero_eps == 1 && zero_prime == 1;
        set(
            0,
            if zero_eps != 0 {
                zero_eps
            } else {
                2 * zero_prime
            },
        );

        for (triplet, &digit) in MIXED_TRIPLETS.iter().zip(mixed.digits.iter()) {
            set(code3(*triplet), digit);
        }

        let mut table = [0u8; 27];
        for (out, slot) in table.iter_mut().zip(slots) {
            *out = slot.expect("every neighborhood is assigned");
        }
        GlobalRule {
            eps,
            eps_prime,
            mixed,
            table,
            conflict,
        }
    }

    /// Like [`GlobalRule::compose`], but rejects conflicted pairs.
    pub fn compose_strict(
        eps: EcaRule,
        eps_prime: EcaRule,
        mixed: MixedAssignment,
    ) -> Result<Self> {
        let gr = Self::compose(eps, eps_prime, mixed);
        if gr.conflict {
            return Err(Error::SharedTripletConflict {
                eps: eps.number(),
                eps_prime: eps_prime.number(),
            });
        }
        Ok(gr)
    }

    pub fn eps(&self) -> EcaRule {
        self.eps
    }

    pub fn eps_prime(&self) -> EcaRule {
        self.eps_prime
    }

    pub fn mixed(&self) -> MixedAssignment {
        self.mixed
    }

    pub fn index(&self) -> u64 {
        self.mixed.index()
    }

    /// Indexed by the base-3 neighborhood code `9*left + 3*center + right`.
    pub fn table(&self) -> &[u8; 27] {
        &self.table
    }

    pub fn conflict(&self) -> bool {
        self.conflict
    }

    /// Whether the shared all-zero neighborhood follows `eps`.
    pub fn honors_eps(&self) -> bool {
        self.table[0] == self.eps.output(0, 0, 0)
    }

    /// Whether the shared all-zero neighborhood follows `eps_prime` (recolored).
    pub fn honors_eps_prime(&self) -> bool {
        self.table[0] == 2 * self.eps_prime.output(0, 0, 0)
    }

    pub fn step(&self, config: &Configuration) -> Result<Configuration> {
        config.check_alphabet(TERNARY)?;
        let mut cells = vec![0; config.width()];
        self.apply(config.cells(), &mut cells);
        Configuration::new(cells)
    }

    pub fn evolve(&self, init: &Configuration, steps: usize) -> Result<EvolutionGrid> {
        crate::eca::evolve(self, init, steps)
    }

    /// The table as 27 ASCII digits, neighborhood code ascending.
    pub fn table_string(&self) -> String {
        self.table.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

impl fmt::Debug for GlobalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GlobalRule")
            .field("eps", &self.eps.number())
            .field("eps_prime", &self.eps_prime.number())
            .field("index", &self.index())
            .field("table", &self.table_string())
            .field("conflict", &self.conflict)
            .finish()
    }
}

impl LocalRule for GlobalRule {
    fn alphabet(&self) -> &'static [u8] {
        TERNARY
    }

    fn apply(&self, src: &[u8], dst: &mut [u8]) {
        let n = src.len();
        let mut code = 3 * usize::from(src[n - 1]) + usize::from(src[0]);
        for i in 0..n {
            let right = src[if i + 1 == n { 0 } else { i + 1 }];
            code = (code % 9) * 3 + usize::from(right);
            dst[i] = self.table[code];
        }
    }
}

/// Free-function form of [`GlobalRule::step`].
pub fn global_step(gr: &GlobalRule, config: &Configuration) -> Result<Configuration> {
    gr.step(config)
}

/// All pairs `(a, b)` of representatives with `a <= b`, lexicographically sorted.
pub fn pair_enumeration() -> Vec<(u8, u8)> {
    let reps = representatives();
    reps.iter()
        .enumerate()
        .flat_map(|(i, &a)| reps[i..].iter().map(move |&b| (a, b)))
        .collect()
}
