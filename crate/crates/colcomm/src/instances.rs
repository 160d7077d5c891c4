//! Lists of fixed-width numbers, bipartite half-number splits, promise
//! classification, seeded instance generators, and brute-force collision
//! search.
//!
//! A decision instance is a list `z` of `M` numbers, each `bits` wide. Its
//! bipartite form gives Alice the high half of every number and Bob the low
//! half. The promise classes are 1-to-1 (all entries distinct) and 2-to-1
//! (every present value occurs exactly twice); anything else violates the
//! promise.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Widest supported full number; keeps all arithmetic inside `u64`.
pub const MAX_BITS: u32 = 63;
/// Widest supported half number.
pub const MAX_HALF_BITS: u32 = 31;

/// Which promise (if any) a list satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromiseClass {
    /// Every entry occurs exactly once.
    OneToOne,
    /// Every value present in the list occurs exactly twice.
    TwoToOne,
    /// The promise is violated.
    Neither,
}

impl PromiseClass {
    pub fn token(self) -> &'static str {
        match self {
            PromiseClass::OneToOne => "1to1",
            PromiseClass::TwoToOne => "2to1",
            PromiseClass::Neither => "neither",
        }
    }
}

impl fmt::Display for PromiseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PromiseClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1to1" => Ok(PromiseClass::OneToOne),
            "2to1" => Ok(PromiseClass::TwoToOne),
            "neither" => Ok(PromiseClass::Neither),
            other => Err(Error::Malformed(format!("unknown promise class `{other}`"))),
        }
    }
}

/// An ordered list of `M >= 1` numbers, each strictly below `2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberList {
    bits: u32,
    entries: Vec<u64>,
}

impl NumberList {
    pub fn new(bits: u32, entries: Vec<u64>) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::BitWidth { bits, max: MAX_BITS });
        }
        if entries.is_empty() {
            return Err(Error::EmptyList);
        }
        let limit = 1u64 << bits;
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &v)| v >= limit) {
            return Err(Error::EntryOutOfRange { index, value, bits });
        }
        Ok(Self { bits, entries })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-emptiness is a construction invariant
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }
}

/// The bipartite form: Alice's high halves `x` and Bob's low halves `y`,
/// entrywise. Both lists have the same length and entries fit `half_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitePair {
    half_bits: u32,
    x_entries: Vec<u64>,
    y_entries: Vec<u64>,
}

impl BipartitePair {
    pub fn new(half_bits: u32, x_entries: Vec<u64>, y_entries: Vec<u64>) -> Result<Self> {
        if half_bits == 0 || half_bits > MAX_HALF_BITS {
            return Err(Error::BitWidth { bits: half_bits, max: MAX_HALF_BITS });
        }
        if x_entries.len() != y_entries.len() {
            return Err(Error::HalfLengthMismatch {
                x_len: x_entries.len(),
                y_len: y_entries.len(),
            });
        }
        if x_entries.is_empty() {
            return Err(Error::EmptyList);
        }
        let limit = 1u64 << half_bits;
        for side in [&x_entries, &y_entries] {
            if let Some((index, &value)) = side.iter().enumerate().find(|(_, &v)| v >= limit) {
                return Err(Error::EntryOutOfRange { index, value, bits: half_bits });
            }
        }
        Ok(Self { half_bits, x_entries, y_entries })
    }

    pub fn half_bits(&self) -> u32 {
        self.half_bits
    }

    pub fn len(&self) -> usize {
        self.x_entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_entries(&self) -> &[u64] {
        &self.x_entries
    }

    pub fn y_entries(&self) -> &[u64] {
        &self.y_entries
    }

    /// Full number at `idx` (high half shifted above the low half).
    pub fn full(&self, idx: usize) -> u64 {
        (self.x_entries[idx] << self.half_bits) | self.y_entries[idx]
    }
}

/// Two distinct positions holding equal numbers, stored `i < j` (0-based).
/// Displayed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CollisionPair {
    i: usize,
    j: usize,
}

impl CollisionPair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::DegeneratePair { index: a });
        }
        Ok(Self { i: a.min(b), j: a.max(b) })
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.i == idx || self.j == idx
    }
}

impl fmt::Display for CollisionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i + 1, self.j + 1)
    }
}

/// Decide which promise class a list satisfies. Total: any list maps to
/// exactly one of the three classes.
pub fn classify(z: &NumberList) -> PromiseClass {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &v in z.entries() {
        *counts.entry(v).or_insert(0) += 1;
    }
    if counts.values().all(|&c| c == 1) {
        PromiseClass::OneToOne
    } else if counts.values().all(|&c| c == 2) {
        PromiseClass::TwoToOne
    } else {
        PromiseClass::Neither
    }
}

/// Concatenate halves entrywise: `z_i = x_i · 2^half_bits + y_i`. Alice's
/// half is the high-order half.
pub fn concat(p: &BipartitePair) -> NumberList {
    let bits = 2 * p.half_bits();
    let entries = (0..p.len()).map(|i| p.full(i)).collect();
    NumberList::new(bits, entries).expect("concatenation preserves ranges")
}

/// Split every number into its high and low half. Requires an even bit
/// width; inverse of [`concat`].
pub fn split(z: &NumberList) -> Result<BipartitePair> {
    if !z.bits().is_multiple_of(2) {
        return Err(Error::OddBitWidth { bits: z.bits() });
    }
    let half = z.bits() / 2;
    let mask = (1u64 << half) - 1;
    let x = z.entries().iter().map(|&v| v >> half).collect();
    let y = z.entries().iter().map(|&v| v & mask).collect();
    BipartitePair::new(half, x, y)
}

/// Generate a promise instance of a given class: a uniform random
/// permutation of `0..len` for 1-to-1, or a uniform random 2-to-1 list (a
/// random `len/2`-subset of values, each duplicated, shuffled). `len` must
/// be a power of two `>= 2`; deterministic in `seed`.
pub fn gen_promise(len: usize, class: PromiseClass, seed: u64) -> Result<NumberList> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len });
    }
    let bits = len.trailing_zeros();
    let mut rng = rng::seeded(seed);
    let entries = match class {
        PromiseClass::OneToOne => {
            let mut v: Vec<u64> = (0..len as u64).collect();
            v.shuffle(&mut rng);
            v
        }
        PromiseClass::TwoToOne => {
            let support = index::sample(&mut rng, len, len / 2);
            let mut v: Vec<u64> = support
                .iter()
                .flat_map(|s| [s as u64, s as u64])
                .collect();
            v.shuffle(&mut rng);
            v
        }
        PromiseClass::Neither => {
            return Err(Error::UngenerableClass { class: "neither" })
        }
    };
    NumberList::new(bits, entries)
}

/// All pairs of distinct positions holding equal numbers, as a set of
/// canonical `i < j` pairs.
pub fn find_collisions(z: &NumberList) -> BTreeSet<CollisionPair> {
    let mut by_value: HashMap<u64, Vec<usize>> = HashMap::new();
    for (idx, &v) in z.entries().iter().enumerate() {
        by_value.entry(v).or_default().push(idx);
    }
    let mut out = BTreeSet::new();
    for positions in by_value.values() {
        for (a, &i) in positions.iter().enumerate() {
            for &j in &positions[a + 1..] {
                out.insert(CollisionPair::new(i, j).expect("positions are distinct"));
            }
        }
    }
    out
}

/// A decision instance in either wire form.
///
/// JSON wire format, with entries as zero-padded lowercase hex:
///
/// ```text
/// {"n": 4, "form": "full", "z": ["f", "3"]}
/// {"n": 4, "form": "bipartite", "x": ["3"], "y": ["3"]}
/// ```
///
/// Full entries are padded to `ceil(n/4)` digits, half entries to
/// `ceil((n/2)/4)` digits; serialization round-trips bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Full(NumberList),
    Bipartite(BipartitePair),
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    n: u32,
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<Vec<String>>,
}

fn hex_width(bits: u32) -> usize {
    bits.div_ceil(4) as usize
}

fn encode_hex(values: &[u64], bits: u32) -> Vec<String> {
    let width = hex_width(bits);
    values.iter().map(|v| format!("{v:0width$x}")).collect()
}

fn decode_hex(strings: &[String]) -> Result<Vec<u64>> {
    strings
        .iter()
        .map(|s| {
            u64::from_str_radix(s, 16)
                .map_err(|e| Error::Malformed(format!("bad hex entry `{s}`: {e}")))
        })
        .collect()
}

impl Instance {
    pub fn len(&self) -> usize {
        match self {
            Instance::Full(z) => z.len(),
            Instance::Bipartite(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Full-number view; concatenates the halves if bipartite.
    pub fn number_list(&self) -> NumberList {
        match self {
            Instance::Full(z) => z.clone(),
            Instance::Bipartite(p) => concat(p),
        }
    }

    /// Bipartite view; splits the full numbers if needed (even width only).
    pub fn bipartite(&self) -> Result<BipartitePair> {
        match self {
            Instance::Full(z) => split(z),
            Instance::Bipartite(p) => Ok(p.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        let wire = match self {
            Instance::Full(z) => InstanceWire {
                n: z.bits(),
                form: "full".into(),
                z: Some(encode_hex(z.entries(), z.bits())),
                x: None,
                y: None,
            },
            Instance::Bipartite(p) => InstanceWire {
                n: 2 * p.half_bits(),
                form: "bipartite".into(),
                z: None,
                x: Some(encode_hex(p.x_entries(), p.half_bits())),
                y: Some(encode_hex(p.y_entries(), p.half_bits())),
            },
        };
        serde_json::to_string(&wire).expect("wire struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        match wire.form.as_str() {
            "full" => {
                let z = wire
                    .z
                    .ok_or_else(|| Error::Malformed("full form requires field `z`".into()))?;
                Ok(Instance::Full(NumberList::new(wire.n, decode_hex(&z)?)?))
            }
            "bipartite" => {
                if !wire.n.is_multiple_of(2) {
                    return Err(Error::OddBitWidth { bits: wire.n });
                }
                let x = wire
                    .x
                    .ok_or_else(|| Error::Malformed("bipartite form requires field `x`".into()))?;
                let y = wire
                    .y
                    .ok_or_else(|| Error::Malformed("bipartite form requires field `y`".into()))?;
                Ok(Instance::Bipartite(BipartitePair::new(
                    wire.n / 2,
                    decode_hex(&x)?,
                    decode_hex(&y)?,
                )?))
            }
            other => Err(Error::Malformed(format!("unknown form `{other}`"))),
        }
    }
}
