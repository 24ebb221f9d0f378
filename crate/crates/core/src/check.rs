//! Verification reports and the exhaustive/sampled sweep driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::GroupElement;

/// Loop counts up to this bound are swept exhaustively in auto mode.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000_000;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0x5eed;
const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckMode {
    /// Exhaustive when the loop count is at most [`EXHAUSTIVE_LIMIT`],
    /// sampled otherwise.
    Auto { seed: u64, count: u64 },
    Exhaustive,
    Sampled { seed: u64, count: u64 },
}

impl Default for CheckMode {
    fn default() -> Self {
        CheckMode::Auto { seed: DEFAULT_SEED, count: DEFAULT_SAMPLES }
    }
}

impl CheckMode {
    pub fn sampled(seed: u64, count: u64) -> Self {
        CheckMode::Sampled { seed, count }
    }

    /// Same policy with a different sample count.
    pub fn with_count(self, count: u64) -> Self {
        match self {
            CheckMode::Auto { seed, .. } => CheckMode::Auto { seed, count },
            CheckMode::Sampled { seed, .. } => CheckMode::Sampled { seed, count },
            CheckMode::Exhaustive => CheckMode::Exhaustive,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            CheckMode::Auto { seed, .. } | CheckMode::Sampled { seed, .. } => *seed,
            CheckMode::Exhaustive => DEFAULT_SEED,
        }
    }

    pub fn resolve(&self, total: u128) -> ModeMeta {
        match *self {
            CheckMode::Exhaustive => ModeMeta::exhaustive(total),
            CheckMode::Auto { seed, count } => {
                if total <= EXHAUSTIVE_LIMIT {
                    ModeMeta::exhaustive(total)
                } else {
                    ModeMeta::sampled(seed, count)
                }
            }
            CheckMode::Sampled { seed, count } => {
                if u128::from(count) >= total {
                    ModeMeta::exhaustive(total)
                } else {
                    ModeMeta::sampled(seed, count)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Sampled,
    /// Decided from subgroup structure, no element sweep.
    Structural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeMeta {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub count: u64,
}

impl ModeMeta {
    pub fn exhaustive(total: u128) -> Self {
        ModeMeta { method: Method::Exhaustive, seed: None, count: total.min(u128::from(u64::MAX)) as u64 }
    }

    pub fn sampled(seed: u64, count: u64) -> Self {
        ModeMeta { method: Method::Sampled, seed: Some(seed), count }
    }

    pub fn structural() -> Self {
        ModeMeta { method: Method::Structural, seed: None, count: 0 }
    }

    /// Combines two sweeps into one description (sampled dominates).
    pub fn merge(self, other: ModeMeta) -> ModeMeta {
        let method = match (self.method, other.method) {
            (Method::Sampled, _) | (_, Method::Sampled) => Method::Sampled,
            (Method::Exhaustive, _) | (_, Method::Exhaustive) => Method::Exhaustive,
            _ => Method::Structural,
        };
        ModeMeta { method, seed: self.seed.or(other.seed), count: self.count.saturating_add(other.count) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub elements: Vec<GroupElement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

impl Witness {
    pub fn new(elements: Vec<GroupElement>) -> Self {
        Witness { elements, trace: Vec::new() }
    }

    pub fn traced(elements: Vec<GroupElement>, trace: Vec<String>) -> Self {
        Witness { elements, trace }
    }

    pub fn coords(&self) -> Vec<Vec<u64>> {
        self.elements.iter().map(GroupElement::to_vec).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub clause: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub mode: ModeMeta,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ClauseReport {
    pub fn from_sweep(clause: impl Into<String>, (mode, witness): (ModeMeta, Option<Witness>)) -> Self {
        ClauseReport {
            clause: clause.into(),
            verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
            witness,
            mode,
            notes: Vec::new(),
        }
    }

    pub fn structural(clause: impl Into<String>, ok: bool, witness: Option<Witness>) -> Self {
        ClauseReport {
            clause: clause.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            witness,
            mode: ModeMeta::structural(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(clause: impl Into<String>, why: impl Into<String>) -> Self {
        ClauseReport {
            clause: clause.into(),
            verdict: Verdict::Skipped,
            witness: None,
            mode: ModeMeta::structural(),
            notes: vec![why.into()],
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub clauses: Vec<ClauseReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), clauses: Vec::new(), notices: Vec::new() }
    }

    pub fn push(&mut self, clause: ClauseReport) {
        self.clauses.push(clause);
    }

    pub fn notice(&mut self, text: impl Into<String>) {
        self.notices.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.clauses.iter().all(ClauseReport::passed)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| c.clause == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseReport> {
        self.clauses.iter().filter(|c| !c.passed())
    }
}

fn decode(mut idx: u64, dims: &[u64], out: &mut [u64]) {
    for (o, &d) in out.iter_mut().zip(dims) {
        *o = idx % d;
        idx /= d;
    }
}

/// Runs `f` over the tuple space `[0,d_0) x [0,d_1) x ...`, exhaustively or
/// on seeded samples according to `mode`. Returns the first failure in
/// tuple (or sample) order, so results are deterministic.
pub fn sweep<F>(dims: &[u64], mode: &CheckMode, f: F) -> (ModeMeta, Option<Witness>)
where
    F: Fn(&[u64]) -> Option<Witness> + Sync,
{
    let total: u128 = dims.iter().map(|&d| u128::from(d)).product();
    let meta = mode.resolve(total);
    if total == 0 {
        return (ModeMeta::exhaustive(0), None);
    }
    let witness = match meta.method {
        Method::Exhaustive => {
            let total = total as u64;
            let chunks = total.div_ceil(CHUNK);
            (0..chunks).into_par_iter().find_map_first(|c| {
                let mut t = vec![0u64; dims.len()];
                (c * CHUNK..((c + 1) * CHUNK).min(total)).find_map(|i| {
                    decode(i, dims, &mut t);
                    f(&t)
                })
            })
        }
        _ => {
            let seed = meta.seed.unwrap_or(DEFAULT_SEED);
            let count = meta.count;
            let chunks = count.div_ceil(CHUNK);
            (0..chunks).into_par_iter().find_map_first(|c| {
                let mut rng = chunk_rng(seed, c);
                let mut t = vec![0u64; dims.len()];
                let n = CHUNK.min(count - c * CHUNK);
                (0..n).find_map(|_| {
                    for (x, &d) in t.iter_mut().zip(dims) {
                        *x = rng.gen_range(0..d);
                    }
                    f(&t)
                })
            })
        }
    };
    (meta, witness)
}

/// Per-chunk generator derived from `(seed, chunk)`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}
