//! Bipartite gadget functions and the permutation symmetry groups under
//! which they are regular.
//!
//! A gadget is a boolean function on `{0,1}^k x {0,1}^k`, stored as its full
//! `2^k x 2^k` truth-table matrix. A symmetry group is an ordered list of
//! row/column permutation pairs acting on the gadget's domain. The gadget is
//! *regular* under a group when the orbit of every point equals the whole
//! preimage of that point's value, and the action on each preimage is free
//! and transitive: for any ordered pair of same-value points there is exactly
//! one group element mapping the first to the second.
//!
//! The canonical instances are the versatile gadget `Ver(x, y) = 1` iff
//! `x + y mod 4` is 2 or 3 (one 8-element group), and the two-bit `Xor`
//! (identity plus the double-negation map).

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest supported gadget side; tables grow as `4^k`.
pub const MAX_GADGET_BITS: u32 = 8;

/// A bipartite boolean function on `{0,1}^k x {0,1}^k` as a truth-table
/// matrix: `table[x][y]` is the value at row `x`, column `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    k: u32,
    table: Vec<Vec<u8>>,
}

impl Gadget {
    pub fn new(k: u32, table: Vec<Vec<u8>>) -> Result<Self> {
        if k == 0 || k > MAX_GADGET_BITS {
            return Err(Error::GadgetWidth { k, max: MAX_GADGET_BITS });
        }
        let side = 1usize << k;
        let well_formed = table.len() == side
            && table
                .iter()
                .all(|row| row.len() == side && row.iter().all(|&c| c <= 1));
        if !well_formed {
            return Err(Error::MalformedTable { expected: side });
        }
        Ok(Self { k, table })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of points per side, `2^k`.
    pub fn domain_size(&self) -> usize {
        1 << self.k
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.table
    }

    /// Value at `(x, y)`; rejects out-of-range inputs.
    pub fn eval(&self, x: u64, y: u64) -> Result<u8> {
        let side = self.domain_size() as u64;
        if x >= side || y >= side {
            return Err(Error::GadgetInput { x, y, domain: side as usize });
        }
        Ok(self.table[x as usize][y as usize])
    }

    pub(crate) fn bit(&self, x: usize, y: usize) -> u8 {
        self.table[x][y]
    }

    /// All points with value `b`, scanned row-major.
    pub fn preimage(&self, b: u8) -> Vec<(u64, u64)> {
        let side = self.domain_size();
        let mut out = Vec::new();
        for x in 0..side {
            for y in 0..side {
                if self.table[x][y] == b {
                    out.push((x as u64, y as u64));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GadgetWire { k: self.k, table: self.table.clone() })
            .expect("wire struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: GadgetWire = serde_json::from_str(text)?;
        Gadget::new(wire.k, wire.table)
    }
}

#[derive(Serialize, Deserialize)]
struct GadgetWire {
    k: u32,
    table: Vec<Vec<u8>>,
}

/// The versatile gadget: `k = 2`, value 1 iff `x + y mod 4` is 2 or 3.
pub fn ver_gadget() -> Gadget {
    let table = (0..4)
        .map(|x| (0..4).map(|y| u8::from((x + y) % 4 >= 2)).collect())
        .collect();
    Gadget::new(2, table).expect("4x4 boolean table")
}

/// The two-bit exclusive-or gadget (`k = 1`).
pub fn xor_gadget() -> Gadget {
    Gadget::new(1, vec![vec![0, 1], vec![1, 0]]).expect("2x2 boolean table")
}

/// A row/column permutation pair acting on `(x, y)` componentwise. Both
/// permutations are explicit lookup arrays on the same domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
}

pub(crate) fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

impl GroupElement {
    pub fn new(row_perm: Vec<usize>, col_perm: Vec<usize>) -> Result<Self> {
        if row_perm.len() != col_perm.len() {
            return Err(Error::PermSizeMismatch { row: row_perm.len(), col: col_perm.len() });
        }
        if row_perm.is_empty() || !is_permutation(&row_perm) || !is_permutation(&col_perm) {
            return Err(Error::NotAPermutation { domain: row_perm.len() });
        }
        Ok(Self { row_perm, col_perm })
    }

    pub fn identity(domain: usize) -> Self {
        let id: Vec<usize> = (0..domain).collect();
        Self { row_perm: id.clone(), col_perm: id }
    }

    pub fn domain_size(&self) -> usize {
        self.row_perm.len()
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    pub fn is_identity(&self) -> bool {
        self.row_perm.iter().enumerate().all(|(i, &v)| i == v)
            && self.col_perm.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Apply to a point; rejects out-of-range coordinates.
    pub fn act(&self, x: u64, y: u64) -> Result<(u64, u64)> {
        let domain = self.domain_size() as u64;
        if x >= domain || y >= domain {
            return Err(Error::PointOutOfDomain { x, y, domain: domain as usize });
        }
        let (px, py) = self.apply(x as usize, y as usize);
        Ok((px as u64, py as u64))
    }

    pub(crate) fn apply(&self, x: usize, y: usize) -> (usize, usize) {
        (self.row_perm[x], self.col_perm[y])
    }

    /// Composition `self . other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        let row_perm = other.row_perm.iter().map(|&v| self.row_perm[v]).collect();
        let col_perm = other.col_perm.iter().map(|&v| self.col_perm[v]).collect();
        Self { row_perm, col_perm }
    }

    pub fn inverse(&self) -> Self {
        let mut row_perm = vec![0; self.row_perm.len()];
        let mut col_perm = vec![0; self.col_perm.len()];
        for (i, &v) in self.row_perm.iter().enumerate() {
            row_perm[v] = i;
        }
        for (i, &v) in self.col_perm.iter().enumerate() {
            col_perm[v] = i;
        }
        Self { row_perm, col_perm }
    }
}

/// An ordered list of permutation pairs forming a group under componentwise
/// composition. Construction checks the axioms, so a value of this type is
/// always a genuine group; the element order is preserved as given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::NotAGroup { reason: "no elements".into() });
        }
        let domain = elements[0].domain_size();
        for e in &elements {
            if e.domain_size() != domain {
                return Err(Error::MixedDomains { first: domain, second: e.domain_size() });
            }
        }
        let set: HashSet<&GroupElement> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(Error::NotAGroup { reason: "repeated element".into() });
        }
        if !elements.iter().any(|e| e.is_identity()) {
            return Err(Error::NotAGroup { reason: "identity missing".into() });
        }
        // Closure; inverses then exist because the element set is finite.
        for a in &elements {
            for b in &elements {
                if !set.contains(&a.compose(b)) {
                    return Err(Error::NotAGroup { reason: "not closed under composition".into() });
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn domain_size(&self) -> usize {
        self.elements[0].domain_size()
    }

    /// Elements in their fixed order; position `i` holds the `(i+1)`-th
    /// element of the ordering.
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn to_json(&self) -> String {
        let wire: Vec<ElementWire> = self
            .elements
            .iter()
            .map(|e| ElementWire { row: e.row_perm().to_vec(), col: e.col_perm().to_vec() })
            .collect();
        serde_json::to_string(&wire).expect("wire struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: Vec<ElementWire> = serde_json::from_str(text)?;
        let elements = wire
            .into_iter()
            .map(|e| GroupElement::new(e.row, e.col))
            .collect::<Result<Vec<_>>>()?;
        SymmetryGroup::new(elements)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementWire {
    row: Vec<usize>,
    col: Vec<usize>,
}

fn mod4_map(f: impl Fn(usize) -> isize) -> Vec<usize> {
    (0..4).map(|v| f(v).rem_euclid(4) as usize).collect()
}

/// The 8-element group under which `Ver` is regular, in its fixed order:
/// `(x, y)`, `(x+1, y-1)`, `(x+2, y-2)`, `(x+3, y-3)`, `(1-x, -y)`,
/// `(2-x, 3-y)`, `(3-x, 2-y)`, `(-x, 1-y)`, all mod 4. The first element is
/// the identity.
pub fn ver_group() -> SymmetryGroup {
    let shift = |a: isize, b: isize| {
        GroupElement::new(
            mod4_map(|x| x as isize + a),
            mod4_map(|y| y as isize + b),
        )
        .expect("affine maps are bijections")
    };
    let flip = |a: isize, b: isize| {
        GroupElement::new(
            mod4_map(|x| a - x as isize),
            mod4_map(|y| b - y as isize),
        )
        .expect("affine maps are bijections")
    };
    SymmetryGroup::new(vec![
        shift(0, 0),
        shift(1, -1),
        shift(2, -2),
        shift(3, -3),
        flip(1, 0),
        flip(2, 3),
        flip(3, 2),
        flip(0, 1),
    ])
    .expect("the fixed element list is a group")
}

/// The two generators of [`ver_group`]: `(x+1, y-1)` and `(1-x, -y)` mod 4.
pub fn ver_generators() -> Vec<GroupElement> {
    vec![
        GroupElement::new(mod4_map(|x| x as isize + 1), mod4_map(|y| y as isize - 1))
            .expect("affine maps are bijections"),
        GroupElement::new(mod4_map(|x| 1 - x as isize), mod4_map(|y| -(y as isize)))
            .expect("affine maps are bijections"),
    ]
}

/// The 2-element group under which `Xor` is regular: identity and
/// `(x, y) -> (not x, not y)`.
pub fn xor_group() -> SymmetryGroup {
    SymmetryGroup::new(vec![
        GroupElement::identity(2),
        GroupElement::new(vec![1, 0], vec![1, 0]).expect("negation is a bijection"),
    ])
    .expect("two-element group")
}

/// Close a generator list into a full group on `0..domain`. Deterministic
/// canonical order: breadth-first from the identity, expanding each element
/// by the generators in index order ("current, then generator").
pub fn close_group(domain: usize, generators: &[GroupElement]) -> Result<SymmetryGroup> {
    if domain == 0 {
        return Err(Error::NotAPermutation { domain });
    }
    for g in generators {
        if g.domain_size() != domain {
            return Err(Error::MixedDomains { first: domain, second: g.domain_size() });
        }
    }
    let mut elements = vec![GroupElement::identity(domain)];
    let mut seen: HashSet<GroupElement> = elements.iter().cloned().collect();
    let mut cursor = 0;
    while cursor < elements.len() {
        let current = elements[cursor].clone();
        for gen in generators {
            let next = gen.compose(&current);
            if seen.insert(next.clone()) {
                elements.push(next);
            }
        }
        cursor += 1;
    }
    SymmetryGroup::new(elements)
}

/// The set of images of `(x, y)` under every element of the group.
pub fn orbit(group: &SymmetryGroup, x: u64, y: u64) -> Result<BTreeSet<(u64, u64)>> {
    let domain = group.domain_size() as u64;
    if x >= domain || y >= domain {
        return Err(Error::PointOutOfDomain { x, y, domain: domain as usize });
    }
    Ok(group
        .elements()
        .iter()
        .map(|s| {
            let (px, py) = s.apply(x as usize, y as usize);
            (px as u64, py as u64)
        })
        .collect())
}

/// Evidence that a gadget/group pair passed the regularity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityCertificate {
    pub group_order: usize,
    /// Sizes of the value-0 and value-1 preimages.
    pub preimage_sizes: [usize; 2],
    /// Number of ordered same-preimage point pairs whose mapping
    /// multiplicity was verified to be exactly one.
    pub uniqueness_checks: usize,
}

/// A concrete witness that the regularity conditions fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegularityViolation {
    /// Some point's orbit is not the whole preimage of its value.
    OrbitMismatch {
        point: (u64, u64),
        value: u8,
        orbit_size: usize,
        preimage_size: usize,
    },
    /// Some ordered same-preimage pair is connected by a number of group
    /// elements different from one.
    MappingMultiplicity {
        from: (u64, u64),
        to: (u64, u64),
        value: u8,
        count: usize,
    },
}

impl std::fmt::Display for RegularityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegularityViolation::OrbitMismatch { point, value, orbit_size, preimage_size } => {
                write!(
                    f,
                    "orbit of ({}, {}) has {} points but the value-{} preimage has {}",
                    point.0, point.1, orbit_size, value, preimage_size
                )
            }
            RegularityViolation::MappingMultiplicity { from, to, value, count } => write!(
                f,
                "{} group elements map ({}, {}) to ({}, {}) inside the value-{} preimage, expected exactly 1",
                count, from.0, from.1, to.0, to.1, value
            ),
        }
    }
}

/// Outcome of [`check_regular`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regularity {
    Pass(RegularityCertificate),
    Fail(RegularityViolation),
}

impl Regularity {
    pub fn is_pass(&self) -> bool {
        matches!(self, Regularity::Pass(_))
    }
}

/// Check that `gadget` is regular under `group`: every orbit equals the
/// preimage of its value, and each ordered same-preimage pair is connected
/// by exactly one element. Returns a pass certificate or the first
/// violation found; a domain-size mismatch is a hard error.
pub fn check_regular(gadget: &Gadget, group: &SymmetryGroup) -> Result<Regularity> {
    if gadget.domain_size() != group.domain_size() {
        return Err(Error::DomainMismatch {
            gadget: gadget.domain_size(),
            group: group.domain_size(),
        });
    }
    let preimages = [gadget.preimage(0), gadget.preimage(1)];

    for (b, points_of_value) in preimages.iter().enumerate() {
        let preimage_set: BTreeSet<(u64, u64)> = points_of_value.iter().copied().collect();
        for &(x, y) in points_of_value {
            let points = orbit(group, x, y)?;
            if points != preimage_set {
                return Ok(Regularity::Fail(RegularityViolation::OrbitMismatch {
                    point: (x, y),
                    value: b as u8,
                    orbit_size: points.len(),
                    preimage_size: points_of_value.len(),
                }));
            }
        }
    }

    let mut uniqueness_checks = 0;
    for (b, points_of_value) in preimages.iter().enumerate() {
        for &from in points_of_value {
            for &to in points_of_value {
                let count = group
                    .elements()
                    .iter()
                    .filter(|s| s.apply(from.0 as usize, from.1 as usize)
                        == (to.0 as usize, to.1 as usize))
                    .count();
                uniqueness_checks += 1;
                if count != 1 {
                    return Ok(Regularity::Fail(RegularityViolation::MappingMultiplicity {
                        from,
                        to,
                        value: b as u8,
                        count,
                    }));
                }
            }
        }
    }

    Ok(Regularity::Pass(RegularityCertificate {
        group_order: group.order(),
        preimage_sizes: [preimages[0].len(), preimages[1].len()],
        uniqueness_checks,
    }))
}
