//! The composed collision problem over a gadget, and the rectangular
//! reduction that maps it to a plain bipartite collision instance.
//!
//! A composed input holds `N = 2^n` blocks per party, each block a list of
//! `n` gadget inputs; block `j` decodes through the gadget to an `n`-bit
//! number `z_j`, and the whole input decodes to a collision instance
//! `(z_1, ..., z_N)`. Unfolding expands one block pair `(a, b)` into the
//! ordered list of all `|S|^n` symmetric variants
//!
//! ```text
//! entry(i_1, ..., i_n) = (s_{i_1}^row(a_1) ... s_{i_n}^row(a_n),
//!                         s_{i_1}^col(b_1) ... s_{i_n}^col(b_n))
//! ```
//!
//! indexed lexicographically with the first position most significant. Each
//! entry is a pair of `k*n`-bit half-numbers. Regularity of the gadget makes
//! the entry set of a block equal the full preimage of its decoded value, so
//! concatenating the per-block lists turns a 1-to-1 (resp. 2-to-1) decoded
//! instance into a 1-to-1 (resp. 2-to-1) bipartite instance of length
//! `N * |S|^n`. Both output halves are computed by maps that read only one
//! party's input, so the reduction is rectangular.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{check_regular, Gadget, Regularity, RegularityCertificate, SymmetryGroup};
use crate::instances::{classify, BipartitePair, NumberList, PromiseClass, MAX_HALF_BITS};
use crate::rng;

/// Largest single-input space `2^(2kn)` the exhaustive checker accepts by
/// default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 1 << 12;

/// A gadget bundled with a group it has been verified to be regular under.
/// Construction runs the full regularity check and keeps the certificate.
#[derive(Debug, Clone)]
pub struct RegularGadget {
    gadget: Gadget,
    group: SymmetryGroup,
    certificate: RegularityCertificate,
}

impl RegularGadget {
    pub fn new(gadget: Gadget, group: SymmetryGroup) -> Result<Self> {
        match check_regular(&gadget, &group)? {
            Regularity::Pass(certificate) => Ok(Self { gadget, group, certificate }),
            Regularity::Fail(violation) => {
                Err(Error::NotRegular { witness: violation.to_string() })
            }
        }
    }

    /// The versatile gadget with its 8-element group.
    pub fn ver() -> Self {
        Self::new(crate::gadgets::ver_gadget(), crate::gadgets::ver_group())
            .expect("Ver is regular under its group")
    }

    /// The two-bit Xor gadget with its 2-element group.
    pub fn xor() -> Self {
        Self::new(crate::gadgets::xor_gadget(), crate::gadgets::xor_group())
            .expect("Xor is regular under its group")
    }

    pub fn gadget(&self) -> &Gadget {
        &self.gadget
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn certificate(&self) -> &RegularityCertificate {
        &self.certificate
    }
}

/// Per-party input to the composed problem: `2^n` blocks of `n` gadget
/// inputs each, for both parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedInput {
    k: u32,
    block_len: usize,
    alice: Vec<Vec<u64>>,
    bob: Vec<Vec<u64>>,
}

impl ComposedInput {
    pub fn new(k: u32, alice: Vec<Vec<u64>>, bob: Vec<Vec<u64>>) -> Result<Self> {
        if k == 0 || k > crate::gadgets::MAX_GADGET_BITS {
            return Err(Error::GadgetWidth { k, max: crate::gadgets::MAX_GADGET_BITS });
        }
        let blocks = alice.len();
        if blocks != bob.len() || blocks == 0 {
            return Err(Error::ComposedShape {
                blocks,
                block_len: alice.first().map_or(0, Vec::len),
            });
        }
        let block_len = alice[0].len();
        if block_len == 0
            || block_len >= usize::BITS as usize
            || blocks != 1usize << block_len
        {
            return Err(Error::ComposedShape { blocks, block_len });
        }
        let limit = 1u64 << k;
        for block in alice.iter().chain(bob.iter()) {
            if block.len() != block_len {
                return Err(Error::ComposedShape { blocks, block_len: block.len() });
            }
            if let Some(&value) = block.iter().find(|&&v| v >= limit) {
                return Err(Error::BlockValue { value, k });
            }
        }
        Ok(Self { k, block_len, alice, bob })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of blocks, `2^n`.
    pub fn block_count(&self) -> usize {
        self.alice.len()
    }

    /// Gadget inputs per block, `n`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn alice_blocks(&self) -> &[Vec<u64>] {
        &self.alice
    }

    pub fn bob_blocks(&self) -> &[Vec<u64>] {
        &self.bob
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ComposedWire {
            k: self.k,
            n: self.block_len,
            alice: self.alice.clone(),
            bob: self.bob.clone(),
        })
        .expect("wire struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: ComposedWire = serde_json::from_str(text)?;
        let parsed = ComposedInput::new(wire.k, wire.alice, wire.bob)?;
        if parsed.block_len() != wire.n {
            return Err(Error::Malformed(format!(
                "declared n={} but blocks have length {}",
                wire.n,
                parsed.block_len()
            )));
        }
        Ok(parsed)
    }
}

#[derive(Serialize, Deserialize)]
struct ComposedWire {
    k: u32,
    n: usize,
    alice: Vec<Vec<u64>>,
    bob: Vec<Vec<u64>>,
}

/// The ordered list of `|S|^n` unfolded variants of one block pair. Each
/// entry is an (Alice half, Bob half) pair of `half_bits`-wide numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldList {
    half_bits: u32,
    entries: Vec<(u64, u64)>,
}

impl UnfoldList {
    pub fn half_bits(&self) -> u32 {
        self.half_bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }
}

fn check_block(k: u32, block: &[u64]) -> Result<()> {
    if block.is_empty() {
        return Err(Error::BlockShape { left: block.len(), right: block.len() });
    }
    let limit = 1u64 << k;
    if let Some(&value) = block.iter().find(|&&v| v >= limit) {
        return Err(Error::BlockValue { value, k });
    }
    Ok(())
}

fn half_width(k: u32, block_len: usize) -> Result<u32> {
    let bits = k * block_len as u32;
    if block_len as u32 > MAX_HALF_BITS || bits > MAX_HALF_BITS {
        return Err(Error::UnfoldTooWide { bits: k.saturating_mul(block_len as u32) });
    }
    Ok(bits)
}

/// Apply the gadget coordinatewise to a block pair and pack the resulting
/// bits into a number, first coordinate most significant.
pub fn eval_gn(gadget: &Gadget, a: &[u64], b: &[u64]) -> Result<u64> {
    if a.len() != b.len() || a.is_empty() || a.len() > 63 {
        return Err(Error::BlockShape { left: a.len(), right: b.len() });
    }
    check_block(gadget.k(), a)?;
    check_block(gadget.k(), b)?;
    let mut acc = 0u64;
    for (&ai, &bi) in a.iter().zip(b) {
        acc = (acc << 1) | u64::from(gadget.bit(ai as usize, bi as usize));
    }
    Ok(acc)
}

/// Decode a composed input through the gadget and classify the resulting
/// list of block values.
pub fn eval_composed(gadget: &Gadget, input: &ComposedInput) -> Result<PromiseClass> {
    Ok(classify(&decode_composed(gadget, input)?))
}

/// The list `(z_1, ..., z_N)` a composed input encodes.
pub fn decode_composed(gadget: &Gadget, input: &ComposedInput) -> Result<NumberList> {
    if gadget.k() != input.k() {
        return Err(Error::GadgetArityMismatch { expected: input.k(), got: gadget.k() });
    }
    let values = input
        .alice_blocks()
        .iter()
        .zip(input.bob_blocks())
        .map(|(a, b)| eval_gn(gadget, a, b))
        .collect::<Result<Vec<_>>>()?;
    NumberList::new(input.block_len() as u32, values)
}

#[derive(Clone, Copy)]
enum Side {
    Row,
    Col,
}

/// One side of the unfolded list: for every index tuple, the concatenation
/// of the permuted block symbols. Reads only this side's block.
fn unfold_side(group: &SymmetryGroup, k: u32, block: &[u64], side: Side) -> Result<Vec<u64>> {
    check_block(k, block)?;
    let width = half_width(k, block.len())?;
    debug_assert!(width > 0);
    let n = block.len();
    let order = group.order();
    let mut total = 1usize;
    let mut strides = vec![1usize; n];
    for j in (0..n).rev() {
        strides[j] = total;
        total = total.checked_mul(order).ok_or(Error::UnfoldTooLarge)?;
    }
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut acc = 0u64;
        for (j, &symbol) in block.iter().enumerate() {
            let element = &group.elements()[(idx / strides[j]) % order];
            let permuted = match side {
                Side::Row => element.row_perm()[symbol as usize],
                Side::Col => element.col_perm()[symbol as usize],
            };
            acc = (acc << k) | permuted as u64;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Unfold one block pair into the ordered list of all `|S|^n` symmetric
/// variants.
pub fn unfold(rg: &RegularGadget, a: &[u64], b: &[u64]) -> Result<UnfoldList> {
    if a.len() != b.len() {
        return Err(Error::BlockShape { left: a.len(), right: b.len() });
    }
    let k = rg.gadget().k();
    let alice = unfold_side(rg.group(), k, a, Side::Row)?;
    let bob = unfold_side(rg.group(), k, b, Side::Col)?;
    Ok(UnfoldList {
        half_bits: half_width(k, a.len())?,
        entries: alice.into_iter().zip(bob).collect(),
    })
}

/// The deduplicated entry set of [`unfold`]. For a regular gadget no
/// deduplication actually occurs: the list entries are pairwise distinct.
pub fn set_unfold(rg: &RegularGadget, a: &[u64], b: &[u64]) -> Result<BTreeSet<(u64, u64)>> {
    Ok(unfold(rg, a, b)?.entries().iter().copied().collect())
}

fn side_map(rg: &RegularGadget, blocks: &[Vec<u64>], side: Side) -> Result<Vec<u64>> {
    if blocks.is_empty() {
        return Err(Error::ComposedShape { blocks: 0, block_len: 0 });
    }
    let block_len = blocks[0].len();
    let k = rg.gadget().k();
    let mut out = Vec::new();
    for block in blocks {
        if block.len() != block_len {
            return Err(Error::BlockShape { left: block_len, right: block.len() });
        }
        out.extend(unfold_side(rg.group(), k, block, side)?);
    }
    Ok(out)
}

/// Alice's half of the reduced instance: the concatenated row-side unfolds
/// of her blocks. Never reads Bob's input.
pub fn alice_map(rg: &RegularGadget, alice_blocks: &[Vec<u64>]) -> Result<Vec<u64>> {
    side_map(rg, alice_blocks, Side::Row)
}

/// Bob's half of the reduced instance. Never reads Alice's input.
pub fn bob_map(rg: &RegularGadget, bob_blocks: &[Vec<u64>]) -> Result<Vec<u64>> {
    side_map(rg, bob_blocks, Side::Col)
}

/// Reduce a composed input to a bipartite collision instance of length
/// `N * |S|^n` by concatenating the per-block unfolds in block order. The
/// two halves come from [`alice_map`] and [`bob_map`] and depend only on the
/// respective party's blocks.
pub fn reduce_to_bicol(rg: &RegularGadget, input: &ComposedInput) -> Result<BipartitePair> {
    if rg.gadget().k() != input.k() {
        return Err(Error::GadgetArityMismatch { expected: input.k(), got: rg.gadget().k() });
    }
    let width = half_width(input.k(), input.block_len())?;
    let xs = alice_map(rg, input.alice_blocks())?;
    let ys = bob_map(rg, input.bob_blocks())?;
    BipartitePair::new(width, xs, ys)
}

/// Enumerate the full preimage of an `n`-bit value under the coordinatewise
/// gadget directly from the truth table: the cartesian product of the
/// per-coordinate preimages, packed like unfold entries. Independent of the
/// group and of the unfold path; used as the reference for verification.
pub fn product_preimage(gadget: &Gadget, value: u64, block_len: usize) -> BTreeSet<(u64, u64)> {
    let per_bit: Vec<Vec<(u64, u64)>> = (0..block_len)
        .map(|j| {
            let bit = ((value >> (block_len - 1 - j)) & 1) as u8;
            gadget.preimage(bit)
        })
        .collect();
    let k = gadget.k();
    let mut acc: Vec<(u64, u64)> = vec![(0, 0)];
    for options in &per_bit {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for &(xa, xb) in &acc {
            for &(pa, pb) in options {
                next.push(((xa << k) | pa, (xb << k) | pb));
            }
        }
        acc = next;
    }
    acc.into_iter().collect()
}

/// Draw a uniformly random composed input that decodes to `target`: every
/// coordinate's gadget input is sampled uniformly from the preimage of the
/// required bit.
pub fn sample_composed_input(
    gadget: &Gadget,
    target: &NumberList,
    seed: u64,
) -> Result<ComposedInput> {
    let block_len = target.bits() as usize;
    if block_len >= usize::BITS as usize || target.len() != 1usize << block_len {
        return Err(Error::ComposedShape { blocks: target.len(), block_len });
    }
    let preimages = [gadget.preimage(0), gadget.preimage(1)];
    if preimages[0].is_empty() || preimages[1].is_empty() {
        return Err(Error::Malformed("gadget is constant; cannot hit both values".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut alice = Vec::with_capacity(target.len());
    let mut bob = Vec::with_capacity(target.len());
    for &value in target.entries() {
        let mut a = Vec::with_capacity(block_len);
        let mut b = Vec::with_capacity(block_len);
        for j in 0..block_len {
            let bit = ((value >> (block_len - 1 - j)) & 1) as usize;
            let options = &preimages[bit];
            let (pa, pb) = options[rng.gen_range(0..options.len())];
            a.push(pa);
            b.push(pb);
        }
        alice.push(a);
        bob.push(b);
    }
    ComposedInput::new(gadget.k(), alice, bob)
}

/// How [`verify_claim`] picks the input pairs it checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimMode {
    /// Every ordered pair of single inputs; the single-input space
    /// `2^(2kn)` must stay within the cap.
    Exhaustive,
    /// `trials` seeded random ordered pairs.
    Sampled { trials: usize },
}

/// A concrete witness against one of the four unfold set properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClaimViolation {
    /// The entry set differs from the product of per-coordinate preimages.
    ProductStructure { alice: Vec<u64>, bob: Vec<u64> },
    /// The entry list repeats an entry.
    RepeatedEntry { alice: Vec<u64>, bob: Vec<u64>, first: usize, second: usize },
    /// Inputs with different decoded values share an entry.
    OverlapAcrossValues {
        first: (Vec<u64>, Vec<u64>),
        second: (Vec<u64>, Vec<u64>),
        shared: (u64, u64),
    },
    /// Inputs with equal decoded values produce different entry sets.
    MismatchWithinValue {
        first: (Vec<u64>, Vec<u64>),
        second: (Vec<u64>, Vec<u64>),
    },
}

/// Result of a [`verify_claim`] run.
#[derive(Debug, Clone)]
pub struct ClaimReport {
    pub pairs_checked: usize,
    pub violations: Vec<ClaimViolation>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct SingleCheck {
    alice: Vec<u64>,
    bob: Vec<u64>,
    value: u64,
    set: BTreeSet<(u64, u64)>,
}

fn check_single(
    rg: &RegularGadget,
    a: Vec<u64>,
    b: Vec<u64>,
    violations: &mut Vec<ClaimViolation>,
) -> Result<SingleCheck> {
    let list = unfold(rg, &a, &b)?;
    let mut first_seen: HashMap<(u64, u64), usize> = HashMap::new();
    for (idx, &entry) in list.entries().iter().enumerate() {
        if let Some(&first) = first_seen.get(&entry) {
            violations.push(ClaimViolation::RepeatedEntry {
                alice: a.clone(),
                bob: b.clone(),
                first,
                second: idx,
            });
            break;
        }
        first_seen.insert(entry, idx);
    }
    let set: BTreeSet<(u64, u64)> = list.entries().iter().copied().collect();
    let value = eval_gn(rg.gadget(), &a, &b)?;
    if set != product_preimage(rg.gadget(), value, a.len()) {
        violations.push(ClaimViolation::ProductStructure { alice: a.clone(), bob: b.clone() });
    }
    Ok(SingleCheck { alice: a, bob: b, value, set })
}

fn check_pair(first: &SingleCheck, second: &SingleCheck, violations: &mut Vec<ClaimViolation>) {
    if first.value != second.value {
        if let Some(&shared) = first.set.intersection(&second.set).next() {
            violations.push(ClaimViolation::OverlapAcrossValues {
                first: (first.alice.clone(), first.bob.clone()),
                second: (second.alice.clone(), second.bob.clone()),
                shared,
            });
        }
    } else if first.set != second.set {
        violations.push(ClaimViolation::MismatchWithinValue {
            first: (first.alice.clone(), first.bob.clone()),
            second: (second.alice.clone(), second.bob.clone()),
        });
    }
}

fn decode_block(mut idx: usize, k: u32, block_len: usize) -> Vec<u64> {
    let mut block = vec![0u64; block_len];
    for j in (0..block_len).rev() {
        block[j] = (idx & ((1 << k) - 1)) as u64;
        idx >>= k;
    }
    block
}

/// Check the four set properties of the unfold map over block pairs of
/// length `block_len`:
///
/// 1. the entry set equals the product of per-coordinate preimages,
/// 2. the entry list has no repeats,
/// 3. inputs with different decoded values have disjoint entry sets,
/// 4. inputs with equal decoded values have equal entry sets.
///
/// Exhaustive mode walks every ordered pair of single inputs; sampled mode
/// draws `trials` seeded pairs. All violations found are reported with
/// witnesses.
pub fn verify_claim(
    rg: &RegularGadget,
    block_len: usize,
    mode: ClaimMode,
    seed: u64,
    cap: usize,
) -> Result<ClaimReport> {
    let k = rg.gadget().k();
    half_width(k, block_len)?;
    let mut violations = Vec::new();
    let pairs_checked;

    match mode {
        ClaimMode::Exhaustive => {
            let side = 1usize << (k as usize * block_len);
            let space = side.checked_mul(side).ok_or(Error::UnfoldTooLarge)?;
            if space > cap {
                return Err(Error::ExhaustiveCap { space, cap });
            }
            let mut singles = Vec::with_capacity(space);
            for ai in 0..side {
                for bi in 0..side {
                    let a = decode_block(ai, k, block_len);
                    let b = decode_block(bi, k, block_len);
                    singles.push(check_single(rg, a, b, &mut violations)?);
                }
            }
            pairs_checked = space * space;
            for first in &singles {
                for second in &singles {
                    check_pair(first, second, &mut violations);
                }
            }
        }
        ClaimMode::Sampled { trials } => {
            if trials == 0 {
                return Err(Error::ZeroTrials);
            }
            let mut rng = rng::seeded(seed);
            let limit = 1u64 << k;
            let draw_block = |rng: &mut crate::rng::SeededRng| -> Vec<u64> {
                (0..block_len).map(|_| rng.gen_range(0..limit)).collect()
            };
            for _ in 0..trials {
                let first = check_single(
                    rg,
                    draw_block(&mut rng),
                    draw_block(&mut rng),
                    &mut violations,
                )?;
                let second = check_single(
                    rg,
                    draw_block(&mut rng),
                    draw_block(&mut rng),
                    &mut violations,
                )?;
                check_pair(&first, &second, &mut violations);
            }
            pairs_checked = trials;
        }
    }

    Ok(ClaimReport { pairs_checked, violations })
}
