//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- instances ----
    #[error("bit width {bits} outside supported range 1..={max}")]
    BitWidth { bits: u32, max: u32 },
    #[error("list must contain at least one entry")]
    EmptyList,
    #[error("entry {value} at position {index} does not fit in {bits} bits")]
    EntryOutOfRange { index: usize, value: u64, bits: u32 },
    #[error("half lists must have equal length, got {x_len} and {y_len}")]
    HalfLengthMismatch { x_len: usize, y_len: usize },
    #[error("bit width {bits} is odd and cannot be split into halves")]
    OddBitWidth { bits: u32 },
    #[error("length {len} is not a power of two >= 2")]
    NotPowerOfTwo { len: usize },
    #[error("cannot generate an instance of class {class}")]
    UngenerableClass { class: &'static str },
    #[error("collision pair needs two distinct indices, got {index} twice")]
    DegeneratePair { index: usize },

    // ---- gadgets ----
    #[error("gadget bit width {k} outside supported range 1..={max}")]
    GadgetWidth { k: u32, max: u32 },
    #[error("gadget table must be {expected}x{expected} cells of 0/1")]
    MalformedTable { expected: usize },
    #[error("gadget input ({x}, {y}) outside domain 0..{domain}")]
    GadgetInput { x: u64, y: u64, domain: usize },
    #[error("permutation must be a bijection on 0..{domain}")]
    NotAPermutation { domain: usize },
    #[error("row permutation acts on {row} points but column permutation on {col}")]
    PermSizeMismatch { row: usize, col: usize },
    #[error("group elements must act on a common domain, found sizes {first} and {second}")]
    MixedDomains { first: usize, second: usize },
    #[error("point ({x}, {y}) outside domain 0..{domain}")]
    PointOutOfDomain { x: u64, y: u64, domain: usize },
    #[error("element list is not a group: {reason}")]
    NotAGroup { reason: String },
    #[error("gadget acts on {gadget} points per side but group on {group}")]
    DomainMismatch { gadget: usize, group: usize },
    #[error("gadget is not regular under the supplied group: {witness}")]
    NotRegular { witness: String },

    // ---- unfold ----
    #[error("blocks must have equal nonzero length, got {left} and {right}")]
    BlockShape { left: usize, right: usize },
    #[error("block value {value} does not fit in {k} bits")]
    BlockValue { value: u64, k: u32 },
    #[error("composed input needs 2^n blocks of length n, got {blocks} blocks of length {block_len}")]
    ComposedShape { blocks: usize, block_len: usize },
    #[error("input carries gadget width {expected} but the gadget has width {got}")]
    GadgetArityMismatch { expected: u32, got: u32 },
    #[error("unfolded halves of {bits} bits exceed the supported limit")]
    UnfoldTooWide { bits: u32 },
    #[error("unfold list size overflows the address space")]
    UnfoldTooLarge,
    #[error("exhaustive check over {space} inputs exceeds the cap {cap}")]
    ExhaustiveCap { space: usize, cap: usize },

    // ---- protocols ----
    #[error("{len} numbers with {half_bits}-bit halves do not form a square bipartite collision instance")]
    NotBicolShape { len: usize, half_bits: u32 },
    #[error("permutation has length {got}, expected {expected}")]
    PermLength { got: usize, expected: usize },
    #[error("sampling constant must be positive, got {0}")]
    NonPositiveSampling(f64),
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("oracle returned ({i}, {j}) but the entries differ: {left} vs {right}")]
    OracleBreach { i: usize, j: usize, left: u64, right: u64 },
    #[error("oracle returned position {index} outside the list of length {len}")]
    OracleOutOfRange { index: usize, len: usize },
    #[error("input admits no collision")]
    NoCollision,

    // ---- serialization / io ----
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
