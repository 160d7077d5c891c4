//! Two-party protocol simulation with bit-exact cost accounting.
//!
//! Provides the two upper-bound protocols for the bipartite collision
//! problem — a deterministic one that ships the whole zero-half index set,
//! and a randomized one-sided variant that samples a birthday-sized subset
//! of it — plus the randomized decision-to-search reduction that answers a
//! collision decision query with any solver for the weak bipartite
//! pigeonhole search problem.
//!
//! Cost model: one payload bit costs one unit. Protocol messages are
//! materialized bit strings; an invoked pigeonhole solver is charged its
//! declared symbolic cost instead of being simulated, so the reduction's
//! total cost is an exact arithmetic identity in the round count.

use std::collections::{BTreeSet, HashSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gadgets::is_permutation;
use crate::instances::{
    concat, find_collisions, gen_promise, split, BipartitePair, CollisionPair, NumberList,
    PromiseClass,
};
use crate::rng::{self, SeededRng};

/// Who sends a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speaker {
    Alice,
    Bob,
}

/// Message payload: either materialized bits, or a symbolic charge for a
/// sub-protocol whose internals are not simulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageBits {
    Literal(Vec<bool>),
    Charged(u64),
}

impl MessageBits {
    pub fn bit_len(&self) -> u64 {
        match self {
            MessageBits::Literal(bits) => bits.len() as u64,
            MessageBits::Charged(bits) => *bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub speaker: Speaker,
    pub payload: MessageBits,
}

/// Ordered message log of one protocol run. The cost is always the sum of
/// the message lengths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn push(&mut self, speaker: Speaker, payload: MessageBits) {
        self.messages.push(Message { speaker, payload });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// Total communication in bits.
    pub fn cost(&self) -> u64 {
        self.messages.iter().map(|m| m.payload.bit_len()).sum()
    }
}

/// What a protocol run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Decision(PromiseClass),
    Collision(CollisionPair),
}

/// Answer, transcript, and the seeds consumed along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOutcome {
    pub answer: Answer,
    pub transcript: Transcript,
    pub seed_trace: Vec<u64>,
}

impl ProtocolOutcome {
    pub fn decision(&self) -> Option<PromiseClass> {
        match self.answer {
            Answer::Decision(class) => Some(class),
            Answer::Collision(_) => None,
        }
    }
}

/// A valid square instance has `2^(2h)` numbers of `2h` bits; returns `h`.
fn bicol_half_bits(p: &BipartitePair) -> Result<u32> {
    let h = p.half_bits();
    if 2 * h >= usize::BITS || p.len() != 1usize << (2 * h) {
        return Err(Error::NotBicolShape { len: p.len(), half_bits: h });
    }
    Ok(h)
}

fn index_bits(value: usize, width: u32) -> Vec<bool> {
    (0..width).rev().map(|b| (value >> b) & 1 == 1).collect()
}

/// Alice's pre-check: count how often each half-number occurs in her list.
/// On a promise input, any count other than `sqrt(N)` proves the 2-to-1
/// case outright. Returns the positions of the all-zero half-number when
/// the counts are uniform.
fn zero_block_indices(p: &BipartitePair, h: u32) -> Option<Vec<usize>> {
    let side = 1usize << h;
    let mut counts = vec![0usize; side];
    for &x in p.x_entries() {
        counts[x as usize] += 1;
    }
    if counts.iter().any(|&c| c != side) {
        return None;
    }
    Some(
        p.x_entries()
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 0)
            .map(|(i, _)| i)
            .collect(),
    )
}

fn has_duplicate(values: impl IntoIterator<Item = u64>) -> bool {
    let mut seen = HashSet::new();
    values.into_iter().any(|v| !seen.insert(v))
}

/// Deterministic decision protocol. Alice first checks her half-number
/// counts and announces 2-to-1 with a single bit if they are not uniform;
/// otherwise she sends the `sqrt(N)` positions of her all-zero half-number
/// (one `2h`-bit index each) and Bob answers with one bit telling whether
/// his halves repeat on those positions. Cost is at most
/// `sqrt(N) * log2(N) + 1` bits, and the answer is correct on every promise
/// input.
pub fn run_deterministic_bicol(p: &BipartitePair) -> Result<ProtocolOutcome> {
    let h = bicol_half_bits(p)?;
    let mut transcript = Transcript::default();

    let Some(zero_idx) = zero_block_indices(p, h) else {
        transcript.push(Speaker::Alice, MessageBits::Literal(vec![true]));
        return Ok(ProtocolOutcome {
            answer: Answer::Decision(PromiseClass::TwoToOne),
            transcript,
            seed_trace: Vec::new(),
        });
    };

    for &i in &zero_idx {
        transcript.push(Speaker::Alice, MessageBits::Literal(index_bits(i, 2 * h)));
    }
    let duplicate = has_duplicate(zero_idx.iter().map(|&i| p.y_entries()[i]));
    transcript.push(Speaker::Bob, MessageBits::Literal(vec![duplicate]));

    let class = if duplicate { PromiseClass::TwoToOne } else { PromiseClass::OneToOne };
    Ok(ProtocolOutcome {
        answer: Answer::Decision(class),
        transcript,
        seed_trace: Vec::new(),
    })
}

/// Randomized one-sided decision protocol. After the same count pre-check,
/// Alice samples `min(ceil(c * N^(1/4)), sqrt(N))` of her zero-half
/// positions uniformly without replacement and sends only those; Bob checks
/// them for a repeat. A 1-to-1 input can never produce a repeat, so errors
/// are one-sided; on a 2-to-1 input the sampled positions contain both
/// members of some pair with the birthday probability driven by `c`.
pub fn run_randomized_bicol(p: &BipartitePair, c: f64, seed: u64) -> Result<ProtocolOutcome> {
    let h = bicol_half_bits(p)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::NonPositiveSampling(c));
    }
    let mut transcript = Transcript::default();

    let Some(zero_idx) = zero_block_indices(p, h) else {
        transcript.push(Speaker::Alice, MessageBits::Literal(vec![true]));
        return Ok(ProtocolOutcome {
            answer: Answer::Decision(PromiseClass::TwoToOne),
            transcript,
            seed_trace: vec![seed],
        });
    };

    let side = zero_idx.len(); // sqrt(N)
    let quarter_root = (p.len() as f64).powf(0.25);
    let sample_size = ((c * quarter_root).ceil() as usize).clamp(1, side);
    let mut rng = rng::seeded(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, side, sample_size)
        .iter()
        .map(|t| zero_idx[t])
        .collect();
    picked.sort_unstable();

    for &i in &picked {
        transcript.push(Speaker::Alice, MessageBits::Literal(index_bits(i, 2 * h)));
    }
    let duplicate = has_duplicate(picked.iter().map(|&i| p.y_entries()[i]));
    transcript.push(Speaker::Bob, MessageBits::Literal(vec![duplicate]));

    let class = if duplicate { PromiseClass::TwoToOne } else { PromiseClass::OneToOne };
    Ok(ProtocolOutcome {
        answer: Answer::Decision(class),
        transcript,
        seed_trace: vec![seed],
    })
}

/// Generate a 2-to-1 instance whose half-number counts are all exactly
/// `sqrt(N)`, i.e. one that passes the protocols' count pre-check and
/// exercises the sampled birthday path: for every high half, a random half
/// of the possible low halves is chosen as support and duplicated.
pub fn gen_balanced_two_to_one(half_bits: u32, seed: u64) -> Result<BipartitePair> {
    if half_bits == 0 || 2 * half_bits >= usize::BITS {
        return Err(Error::BitWidth { bits: half_bits, max: crate::instances::MAX_HALF_BITS });
    }
    let side = 1usize << half_bits;
    let mut rng = rng::seeded(seed);
    let mut values = Vec::with_capacity(side * side);
    for x in 0..side as u64 {
        for y in index::sample(&mut rng, side, side / 2).iter() {
            let v = (x << half_bits) | y as u64;
            values.push(v);
            values.push(v);
        }
    }
    values.shuffle(&mut rng);
    split(&NumberList::new(2 * half_bits, values)?)
}

/// A square instance extended with one planted copy of every possible
/// number and shuffled by a public permutation. The reducer remembers which
/// positions hold planted numbers; the search oracle cannot tell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pair: BipartitePair,
    planted_positions: BTreeSet<usize>,
    permutation: Vec<usize>,
}

impl PlantedInstance {
    pub fn pair(&self) -> &BipartitePair {
        &self.pair
    }

    pub fn planted_positions(&self) -> &BTreeSet<usize> {
        &self.planted_positions
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_planted(&self, position: usize) -> bool {
        self.planted_positions.contains(&position)
    }
}

/// Plant with an explicit permutation of `0..2N`: position `perm[i]` of the
/// output holds input entry `i` for `i < N` and planted number `i - N` for
/// `i >= N`. The planted block runs through `0..N` in increasing order,
/// split into halves.
pub fn plant_with_permutation(p: &BipartitePair, perm: &[usize]) -> Result<PlantedInstance> {
    let h = bicol_half_bits(p)?;
    let n = p.len();
    let total = 2 * n;
    if perm.len() != total {
        return Err(Error::PermLength { got: perm.len(), expected: total });
    }
    if !is_permutation(perm) {
        return Err(Error::NotAPermutation { domain: total });
    }
    let mask = (1u64 << h) - 1;
    let mut xs = vec![0u64; total];
    let mut ys = vec![0u64; total];
    for i in 0..n {
        xs[perm[i]] = p.x_entries()[i];
        ys[perm[i]] = p.y_entries()[i];
    }
    for v in 0..n as u64 {
        let pos = perm[n + v as usize];
        xs[pos] = v >> h;
        ys[pos] = v & mask;
    }
    Ok(PlantedInstance {
        pair: BipartitePair::new(h, xs, ys)?,
        planted_positions: perm[n..].iter().copied().collect(),
        permutation: perm.to_vec(),
    })
}

/// Plant and shuffle with a uniformly random public permutation drawn from
/// the seed.
pub fn plant_and_shuffle(p: &BipartitePair, seed: u64) -> Result<PlantedInstance> {
    let mut perm: Vec<usize> = (0..2 * p.len()).collect();
    perm.shuffle(&mut rng::seeded(seed));
    plant_with_permutation(p, &perm)
}

/// How a pigeonhole oracle picks among the collisions of its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStrategy {
    /// The lexicographically smallest pair `(i, j)`.
    LexFirst,
    /// A uniformly random collision pair.
    UniformRandom,
    /// The pair with the smallest maximal index — the first collision
    /// completed when scanning the list left to right.
    MinIndexAdversary,
}

impl OracleStrategy {
    pub const ALL: [OracleStrategy; 3] = [
        OracleStrategy::LexFirst,
        OracleStrategy::UniformRandom,
        OracleStrategy::MinIndexAdversary,
    ];

    pub fn token(self) -> &'static str {
        match self {
            OracleStrategy::LexFirst => "lex",
            OracleStrategy::UniformRandom => "rand",
            OracleStrategy::MinIndexAdversary => "adv",
        }
    }
}

impl std::str::FromStr for OracleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(OracleStrategy::LexFirst),
            "rand" => Ok(OracleStrategy::UniformRandom),
            "adv" => Ok(OracleStrategy::MinIndexAdversary),
            other => Err(Error::Malformed(format!("unknown oracle strategy `{other}`"))),
        }
    }
}

/// A solver for the bipartite pigeonhole search problem, pluggable into the
/// decision-to-search reduction. Implementations must return a genuine
/// collision of their input; the reduction verifies every answer.
pub trait CollisionOracle {
    /// Declared communication cost of one invocation, charged symbolically.
    fn symbolic_cost(&self) -> u64;

    fn find_collision(&self, pair: &BipartitePair, rng: &mut SeededRng) -> Result<CollisionPair>;
}

/// A perfect pigeonhole solver: computes all collisions by brute force and
/// picks one according to its strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhpOracle {
    pub strategy: OracleStrategy,
    pub symbolic_cost: u64,
}

impl PhpOracle {
    pub fn new(strategy: OracleStrategy, symbolic_cost: u64) -> Self {
        Self { strategy, symbolic_cost }
    }
}

impl CollisionOracle for PhpOracle {
    fn symbolic_cost(&self) -> u64 {
        self.symbolic_cost
    }

    fn find_collision(&self, pair: &BipartitePair, rng: &mut SeededRng) -> Result<CollisionPair> {
        let collisions = find_collisions(&concat(pair));
        if collisions.is_empty() {
            return Err(Error::NoCollision);
        }
        let chosen = match self.strategy {
            OracleStrategy::LexFirst => *collisions.iter().next().expect("nonempty"),
            OracleStrategy::UniformRandom => {
                let all: Vec<CollisionPair> = collisions.into_iter().collect();
                all[rng.gen_range(0..all.len())]
            }
            OracleStrategy::MinIndexAdversary => collisions
                .into_iter()
                .min_by_key(|p| {
                    let (i, j) = p.indices();
                    (j, i)
                })
                .expect("nonempty"),
        };
        Ok(chosen)
    }
}

/// Decide a promise instance with a pigeonhole search oracle. Each round
/// plants and shuffles with fresh public randomness, asks the oracle for a
/// collision of the planted instance, and records whether the collision
/// avoids every planted position; the answer is 2-to-1 iff some round found
/// a planted-free collision.
///
/// On a 1-to-1 input every collision of the planted instance contains a
/// planted number, so the output is 1-to-1 with certainty. On a 2-to-1
/// input each round succeeds with probability exactly 1/3 over the public
/// permutation, independently of the oracle's strategy, so the failure
/// probability decays as `(2/3)^rounds`.
///
/// Cost: per round, the oracle's symbolic cost plus two bits in which the
/// parties exchange the planted-membership verdict of the two returned
/// positions, for exactly `rounds * (cost + 2)` in total.
pub fn decision_from_search(
    p: &BipartitePair,
    oracle: &dyn CollisionOracle,
    rounds: usize,
    seed: u64,
) -> Result<ProtocolOutcome> {
    bicol_half_bits(p)?;
    if rounds == 0 {
        return Err(Error::ZeroRounds);
    }
    let charged = oracle.symbolic_cost();
    let mut transcript = Transcript::default();
    let mut seed_trace = Vec::with_capacity(rounds);
    let mut planted_free_found = false;

    for round in 0..rounds {
        let round_seed = rng::derive(seed, round as u64);
        seed_trace.push(round_seed);
        let planted = plant_and_shuffle(p, rng::derive(round_seed, 0))?;
        let mut oracle_rng = rng::seeded(rng::derive(round_seed, 1));
        let answer = oracle.find_collision(planted.pair(), &mut oracle_rng)?;
        let (i, j) = answer.indices();
        if j >= planted.pair().len() {
            return Err(Error::OracleOutOfRange { index: j, len: planted.pair().len() });
        }
        let (left, right) = (planted.pair().full(i), planted.pair().full(j));
        if left != right {
            return Err(Error::OracleBreach { i, j, left, right });
        }
        let i_planted = planted.is_planted(i);
        let j_planted = planted.is_planted(j);
        transcript.push(Speaker::Alice, MessageBits::Charged(charged));
        transcript.push(Speaker::Alice, MessageBits::Literal(vec![i_planted]));
        transcript.push(Speaker::Bob, MessageBits::Literal(vec![j_planted]));
        if !i_planted && !j_planted {
            planted_free_found = true;
        }
    }

    let class = if planted_free_found { PromiseClass::TwoToOne } else { PromiseClass::OneToOne };
    Ok(ProtocolOutcome { answer: Answer::Decision(class), transcript, seed_trace })
}

/// Recipe for fresh promise instances: length `2^bits` with `bits`-bit
/// numbers (even, so the bipartite split exists) of a fixed promise class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceRecipe {
    bits: u32,
    class: PromiseClass,
}

impl InstanceRecipe {
    pub fn new(bits: u32, class: PromiseClass) -> Result<Self> {
        if bits == 0 || !bits.is_multiple_of(2) {
            return Err(Error::OddBitWidth { bits });
        }
        if bits >= usize::BITS {
            return Err(Error::BitWidth { bits, max: crate::instances::MAX_BITS });
        }
        if class == PromiseClass::Neither {
            return Err(Error::UngenerableClass { class: "neither" });
        }
        Ok(Self { bits, class })
    }

    /// Length of the generated instances, `2^bits`.
    pub fn instance_len(&self) -> usize {
        1 << self.bits
    }

    pub fn class(&self) -> PromiseClass {
        self.class
    }

    pub fn generate(&self, seed: u64) -> Result<BipartitePair> {
        split(&gen_promise(self.instance_len(), self.class, seed)?)
    }
}

/// Aggregate statistics of a Monte-Carlo campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessStats {
    pub trials: usize,
    pub correct: usize,
    pub correct_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_cost: f64,
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson95(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl SuccessStats {
    pub fn from_counts(correct: usize, trials: usize, total_cost: u64) -> Self {
        let (wilson_low, wilson_high) = wilson95(correct, trials);
        SuccessStats {
            trials,
            correct,
            correct_rate: correct as f64 / trials as f64,
            wilson_low,
            wilson_high,
            mean_cost: total_cost as f64 / trials as f64,
        }
    }
}

/// Run [`decision_from_search`] on `trials` fresh instances drawn from the
/// recipe and report the empirical correct-answer rate with its Wilson 95%
/// interval and the mean cost. Each trial's seeds are derived from the
/// master seed and the trial index, so the result does not depend on
/// execution order.
pub fn estimate_success(
    recipe: &InstanceRecipe,
    oracle: &dyn CollisionOracle,
    rounds: usize,
    trials: usize,
    seed: u64,
) -> Result<SuccessStats> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let mut correct = 0usize;
    let mut total_cost = 0u64;
    for trial in 0..trials as u64 {
        let instance = recipe.generate(rng::derive(seed, 2 * trial))?;
        let outcome =
            decision_from_search(&instance, oracle, rounds, rng::derive(seed, 2 * trial + 1))?;
        total_cost += outcome.transcript.cost();
        if outcome.decision() == Some(recipe.class()) {
            correct += 1;
        }
    }
    Ok(SuccessStats::from_counts(correct, trials, total_cost))
}
