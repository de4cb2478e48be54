use std::ops::RangeInclusive;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::compile::{available_cells, Compiled};
use super::machine::{simulate, Atm, AtmError, SpaceBound};
use crate::game::{solve, Outcome, SolveError, SolveOptions};
use crate::par;
use crate::structure::{
    count_structures, encode, encoding_len, enumerate_structures, random_structure, ElementOrder, Structure,
};
use crate::syntax::Vocabulary;

/// Simulated tapes never get longer than this many cells past the input.
const TAPE_SLACK: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct CaptureConfig {
    pub sizes: RangeInclusive<usize>,
    /// Sizes with at most this many structures are run exhaustively.
    pub exhaustive_limit: u128,
    /// Structures drawn per size otherwise.
    pub samples: usize,
    pub seed: u64,
    pub solve: SolveOptions,
    /// Solve instances concurrently.
    pub parallel: bool,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        CaptureConfig {
            sizes: 0..=2,
            exhaustive_limit: 5000,
            samples: 200,
            seed: 0,
            solve: SolveOptions::default(),
            parallel: true,
        }
    }
}

/// One structure: the machine's verdict on its encoding and the game's.
#[derive(Debug, Clone)]
pub struct CaptureRow {
    pub size: usize,
    pub encoding: String,
    pub accepted: bool,
    pub outcome: Outcome,
    pub positions: usize,
}

impl CaptureRow {
    /// Acceptance must match an Eloise win; rejection an Abelard win or a
    /// draw. Unknown never agrees.
    pub fn agrees(&self) -> bool {
        match self.outcome {
            Outcome::EloiseWins => self.accepted,
            Outcome::AbelardWins | Outcome::Draw => !self.accepted,
            Outcome::Unknown => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("simulation of `{encoding}` failed: {source}")]
    Simulate { encoding: String, source: AtmError },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn instances(input: &Vocabulary, cfg: &CaptureConfig) -> Vec<Structure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for n in cfg.sizes.clone() {
        if count_structures(input, n) <= cfg.exhaustive_limit {
            out.extend(enumerate_structures(input, n));
        } else {
            out.extend((0..cfg.samples).map(|_| random_structure(input, n, 0.5, &mut rng)));
        }
    }
    out
}

/// Runs the compiled formula and the machine side by side on every
/// structure of the configured sizes (or a seeded sample).
pub fn capture_experiment(
    atm: &Atm,
    compiled: &Compiled,
    space: &SpaceBound,
    cfg: &CaptureConfig,
) -> Result<Vec<CaptureRow>, CaptureError> {
    let input = compiled.layout.input();
    let ms = instances(&input, cfg);
    let rows = par::map(&ms, cfg.parallel, |m| {
        let n = m.size();
        let encoding = encode(m, &ElementOrder::natural(m));
        let need = encoding_len(&input, n) + 1;
        let cells = available_cells(space, n)
            .map_or(usize::MAX, |c| usize::try_from(c).unwrap_or(usize::MAX))
            .clamp(need, need + TAPE_SLACK);
        let accepted = simulate(atm, &encoding, cells).map_err(|source| CaptureError::Simulate {
            encoding: encoding.clone(),
            source,
        })?;
        let v = solve(&compiled.ast, m, &[], cfg.solve.sequential())?;
        Ok(CaptureRow {
            size: n,
            encoding,
            accepted,
            outcome: v.outcome,
            positions: v.stats.positions,
        })
    });
    rows.into_iter().collect()
}
