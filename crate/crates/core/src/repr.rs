//! Representative matrices: a finite name for each `∼C` class of valuations.
//!
//! Two valuations are equivalent when a bijection of the alphabet fixing
//! every constant maps one onto the other. The class of `v` is captured by
//! the `|X|×|X|` matrix `R_[v]` whose entry `(i, j)` is
//!
//! * the constant `c` if `v(xᵢ) = v(xⱼ) = c ∈ C`,
//! * [`MatrixEntry::One`] if `v(xᵢ) = v(xⱼ) ∉ C`,
//! * [`MatrixEntry::Zero`] otherwise.
//!
//! Not every matrix over `{0̄, 1̄} ∪ C` names a class; the ones that do are
//! exactly those whose formula `E(R)` is consistent. Consistent matrices are
//! in one-to-one correspondence with *labelled partitions* of the registers
//! ([`Partition`]): a set partition plus an injective partial map from blocks
//! to constants. [`Universe`] enumerates them through restricted growth
//! strings instead of scanning every matrix; [`literal_universe`] keeps the
//! full scan for cross-checking.

use std::collections::{BTreeSet, HashMap};

use crate::automaton::{Assignment, ConstantSet, Symbol, Valuation};
use crate::eqlogic::{Atom, ConstraintSystem, Var};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatrixEntry {
    Zero,
    One,
    Const(Symbol),
}

impl MatrixEntry {
    pub fn is_zero(self) -> bool {
        self == MatrixEntry::Zero
    }
}

/// Square matrix over `{0̄, 1̄} ∪ C`, row-major. Need not be consistent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepMatrix {
    n: usize,
    entries: Vec<MatrixEntry>,
}

impl RepMatrix {
    pub fn from_entries(n: usize, entries: Vec<MatrixEntry>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Usage(format!(
                "a {n}x{n} matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(RepMatrix { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<MatrixEntry>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Usage("matrix rows must all have length n".into()));
        }
        Ok(RepMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    /// The all-distinct matrix: `1̄` on the diagonal, `0̄` elsewhere.
    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { MatrixEntry::One } else { MatrixEntry::Zero })
            .collect();
        RepMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> MatrixEntry {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[MatrixEntry] {
        &self.entries
    }

    /// Whether registers `i` and `j` hold the same value (`1̄` or a constant).
    pub fn equal(&self, i: usize, j: usize) -> bool {
        !self.get(i, j).is_zero()
    }

    /// The constant held by register `i`, if any.
    pub fn constant(&self, i: usize) -> Option<Symbol> {
        match self.get(i, i) {
            MatrixEntry::Const(c) => Some(c),
            _ => None,
        }
    }

    /// The labelled partition of a consistent matrix; `None` when the matrix
    /// violates the structural invariants.
    pub fn partition(&self) -> Option<Partition> {
        if !has_matrix_shape_unchecked(self) {
            return None;
        }
        let n = self.n;
        let mut block_of = vec![usize::MAX; n];
        let mut labels = Vec::new();
        for i in 0..n {
            match (0..i).find(|&j| self.equal(i, j)) {
                Some(j) => block_of[i] = block_of[j],
                None => {
                    block_of[i] = labels.len();
                    labels.push(self.constant(i));
                }
            }
        }
        Some(Partition { block_of, labels })
    }

    /// Lookup key; only meaningful for consistent matrices.
    pub fn key(&self) -> MatrixKey {
        MatrixKey(
            (0..self.n)
                .map(|i| match self.constant(i) {
                    Some(c) => const_code(c),
                    None => (0..self.n).find(|&j| self.equal(i, j)).unwrap_or(i) as u64,
                })
                .collect(),
        )
    }
}

/// Compact identity of a consistent matrix: for each register either its
/// constant or the smallest register it shares a value with.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixKey(Box<[u64]>);

impl std::borrow::Borrow<[u64]> for MatrixKey {
    fn borrow(&self) -> &[u64] {
        &self.0
    }
}

pub(crate) fn const_code(c: Symbol) -> u64 {
    (1u64 << 32) | c.0 as u64
}

impl MatrixKey {
    pub fn of_values(values: &[Symbol], constants: &ConstantSet) -> Self {
        MatrixKey(
            values
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    if constants.contains(*s) {
                        const_code(*s)
                    } else {
                        values.iter().position(|t| t == s).unwrap_or(i) as u64
                    }
                })
                .collect(),
        )
    }
}

/// A set partition of the registers (as a restricted growth string) with an
/// optional distinct constant attached to each block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    /// Block index of each register; block `b` first appears before `b + 1`.
    pub block_of: Vec<usize>,
    /// Constant carried by each block.
    pub labels: Vec<Option<Symbol>>,
}

impl Partition {
    pub fn num_blocks(&self) -> usize {
        self.labels.len()
    }

    pub fn to_matrix(&self) -> RepMatrix {
        let n = self.block_of.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (bi, bj) = (self.block_of[i], self.block_of[j]);
                entries.push(if bi != bj {
                    MatrixEntry::Zero
                } else {
                    self.labels[bi].map_or(MatrixEntry::One, MatrixEntry::Const)
                });
            }
        }
        RepMatrix { n, entries }
    }

    pub fn key(&self) -> MatrixKey {
        let mut first = vec![usize::MAX; self.labels.len()];
        MatrixKey(
            self.block_of
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    if first[b] == usize::MAX {
                        first[b] = i;
                    }
                    match self.labels[b] {
                        Some(c) => const_code(c),
                        None => first[b] as u64,
                    }
                })
                .collect(),
        )
    }

    /// Registers of each block, in block order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (i, &b) in self.block_of.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// Position in the canonical enumeration order of [`Universe`]:
    /// restricted growth string first, then block labels with "no constant"
    /// before constants in ascending order.
    pub(crate) fn order_key(&self, constants: &ConstantSet) -> (Vec<usize>, Vec<usize>) {
        let labels = self
            .labels
            .iter()
            .map(|l| l.and_then(|c| constants.index_of(c)).map_or(0, |k| k + 1))
            .collect();
        (self.block_of.clone(), labels)
    }
}

/// A location paired with a consistent representative matrix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepConfig {
    pub location: usize,
    pub matrix: RepMatrix,
}

impl RepConfig {
    pub fn new(location: usize, matrix: RepMatrix) -> Self {
        RepConfig { location, matrix }
    }
}

/// `R_[v]`.
pub fn matrix_of_valuation(v: &Valuation, constants: &ConstantSet) -> RepMatrix {
    let n = v.len();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (v.get(i), v.get(j));
            entries.push(if a != b {
                MatrixEntry::Zero
            } else if constants.contains(a) {
                MatrixEntry::Const(a)
            } else {
                MatrixEntry::One
            });
        }
    }
    RepMatrix { n, entries }
}

/// `u ∼C v`, decided by comparing representative matrices.
pub fn equivalent(u: &Valuation, v: &Valuation, constants: &ConstantSet) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::Usage(format!(
            "valuations of different lengths ({} and {})",
            u.len(),
            v.len()
        )));
    }
    Ok(matrix_of_valuation(u, constants) == matrix_of_valuation(v, constants))
}

/// `E(R)`: the conjunction read off entry by entry. Duplicate atoms are
/// emitted once.
pub fn formula_e_of_matrix(r: &RepMatrix, constants: &ConstantSet) -> ConstraintSystem {
    let mut seen = BTreeSet::new();
    let mut s = ConstraintSystem::new();
    let mut add = |a: Atom| {
        if seen.insert(a.normalized()) {
            s.push(a);
        }
    };
    for i in 0..r.n {
        for j in 0..r.n {
            let (xi, xj) = (Var::Reg(i), Var::Reg(j));
            match r.get(i, j) {
                MatrixEntry::Const(c) => {
                    add(Atom::eq(xi, xj));
                    add(Atom::eq(xi, Var::Const(c)));
                }
                MatrixEntry::One => {
                    add(Atom::eq(xi, xj));
                    for c in constants.iter() {
                        add(Atom::neq(xi, Var::Const(c)));
                    }
                }
                MatrixEntry::Zero => add(Atom::neq(xi, xj)),
            }
        }
    }
    s
}

/// Whether `R` names a class: every constant entry lies in `C` and `E(R)`
/// is consistent.
pub fn is_consistent_matrix(r: &RepMatrix, constants: &ConstantSet) -> bool {
    constants_within(r, constants) && formula_e_of_matrix(r, constants).is_consistent()
}

fn constants_within(r: &RepMatrix, constants: &ConstantSet) -> bool {
    r.entries.iter().all(|e| match e {
        MatrixEntry::Const(c) => constants.contains(*c),
        _ => true,
    })
}

/// The structural characterisation of consistency: symmetric, non-zero
/// diagonal, transitive, and constants coherent along rows and diagonals.
pub fn has_matrix_shape(r: &RepMatrix, constants: &ConstantSet) -> bool {
    constants_within(r, constants) && has_matrix_shape_unchecked(r)
}

fn has_matrix_shape_unchecked(r: &RepMatrix) -> bool {
    let n = r.n;
    for i in 0..n {
        if r.get(i, i).is_zero() {
            return false;
        }
        for j in 0..n {
            let e = r.get(i, j);
            if e != r.get(j, i) {
                return false;
            }
            match e {
                MatrixEntry::Const(_) if r.get(i, i) != e || r.get(j, j) != e => return false,
                MatrixEntry::One
                    if r.get(i, i) != MatrixEntry::One || r.get(j, j) != MatrixEntry::One =>
                {
                    return false
                }
                _ => {}
            }
            if let (MatrixEntry::Const(c), MatrixEntry::Const(d)) = (r.get(i, i), r.get(j, j)) {
                if c == d && e != MatrixEntry::Const(c) {
                    return false;
                }
            }
            if !e.is_zero() {
                for k in 0..n {
                    if !r.get(j, k).is_zero() && r.get(i, k).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `E(v)` (or `E'(v)` when `primed`): constants held, pairwise equalities
/// and disequalities among registers.
///
/// Registers holding a non-constant value are additionally asserted to
/// differ from every constant, so that `E(v)` pins down the class of `v`
/// exactly (it agrees with `E(R_[v])`).
pub fn formula_e_of_valuation(
    v: &Valuation,
    constants: &ConstantSet,
    primed: bool,
) -> ConstraintSystem {
    let var = |i: usize| if primed { Var::Primed(i) } else { Var::Reg(i) };
    let mut s = ConstraintSystem::new();
    for i in 0..v.len() {
        s.declare(var(i));
        if constants.contains(v.get(i)) {
            s.push(Atom::eq(var(i), Var::Const(v.get(i))));
        } else {
            for c in constants.iter() {
                s.push(Atom::neq(var(i), Var::Const(c)));
            }
        }
    }
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            s.push(if v.get(i) == v.get(j) {
                Atom::eq(var(i), var(j))
            } else {
                Atom::neq(var(i), var(j))
            });
        }
    }
    s
}

/// `E(π)`: one equality `x'ₖ = e` per binding.
pub fn formula_e_of_assignment(pi: &Assignment) -> ConstraintSystem {
    ConstraintSystem::from_atoms(
        pi.bindings().map(|(reg, term)| Atom::eq(Var::Primed(reg), term.into())),
    )
}

/// The canonical valuation of a consistent matrix.
///
/// Register `xᵢ` starts at its diagonal constant or at the `i`-th fresh
/// symbol (the `i`-th positive natural outside `C`); then, row by row, every
/// later register sharing a value with `xᵢ` copies it.
pub fn canonical_valuation(r: &RepMatrix, constants: &ConstantSet) -> Result<Valuation> {
    if !is_consistent_matrix(r, constants) {
        return Err(Error::Precondition(
            "canonical valuation requested for an inconsistent matrix".into(),
        ));
    }
    Ok(canonical_valuation_unchecked(r, constants))
}

pub(crate) fn canonical_valuation_unchecked(r: &RepMatrix, constants: &ConstantSet) -> Valuation {
    let n = r.n;
    let fresh = constants.fresh_symbols(n);
    let mut w: Vec<Symbol> = (0..n).map(|i| r.constant(i).unwrap_or(fresh[i])).collect();
    for i in 0..n.saturating_sub(1) {
        for j in i + 1..n {
            if r.equal(i, j) {
                w[j] = w[i];
            }
        }
    }
    Valuation(w)
}

/// All consistent matrices over `n` registers, in canonical order, with an
/// index for lookups.
#[derive(Clone, Debug)]
pub struct Universe {
    registers: usize,
    constants: ConstantSet,
    matrices: Vec<RepMatrix>,
    index: HashMap<MatrixKey, u32>,
}

impl Universe {
    /// Enumerates labelled partitions: every restricted growth string of
    /// length `n`, and for each, every injective partial map from its blocks
    /// to `C`.
    pub fn new(n: usize, constants: &ConstantSet) -> Self {
        let mut matrices = Vec::new();
        for_each_partition(n, constants, |p| matrices.push(p.to_matrix()));
        Self::from_ordered(n, constants, matrices)
    }

    /// The literal scan over all `(|C|+2)^(n²)` matrices, reordered into the
    /// canonical order.
    pub fn literal(n: usize, constants: &ConstantSet) -> Result<Self> {
        let mut matrices = literal_universe(n, constants)?;
        matrices.sort_by_cached_key(|m| {
            m.partition().expect("consistent matrix").order_key(constants)
        });
        Ok(Self::from_ordered(n, constants, matrices))
    }

    fn from_ordered(n: usize, constants: &ConstantSet, matrices: Vec<RepMatrix>) -> Self {
        let index = matrices
            .iter()
            .enumerate()
            .map(|(k, m)| (m.key(), k as u32))
            .collect();
        Universe { registers: n, constants: constants.clone(), matrices, index }
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn constants(&self) -> &ConstantSet {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[RepMatrix] {
        &self.matrices
    }

    pub fn get(&self, index: u32) -> &RepMatrix {
        &self.matrices[index as usize]
    }

    pub fn index_of_key(&self, key: &MatrixKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub(crate) fn index_of_key_slice(&self, key: &[u64]) -> Option<u32> {
        self.index.get(key).copied()
    }

    /// Index of `m`, or `None` when `m` is not a consistent matrix of this
    /// universe.
    pub fn index_of(&self, m: &RepMatrix) -> Option<u32> {
        if m.size() != self.registers || !is_consistent_matrix(m, &self.constants) {
            return None;
        }
        self.index_of_key(&m.key())
    }

    pub fn index_of_valuation(&self, v: &Valuation) -> Option<u32> {
        self.index_of_key(&MatrixKey::of_values(v.values(), &self.constants))
    }
}

/// `UniverseR` as a set of matrices.
pub fn universe(n: usize, constants: &ConstantSet) -> Vec<RepMatrix> {
    Universe::new(n, constants).matrices
}

/// Calls `f` on every labelled partition of `n` registers, in canonical
/// order.
pub fn for_each_partition(n: usize, constants: &ConstantSet, mut f: impl FnMut(&Partition)) {
    fn grow(
        i: usize,
        blocks: usize,
        rgs: &mut Vec<usize>,
        n: usize,
        constants: &ConstantSet,
        f: &mut dyn FnMut(&Partition),
    ) {
        if i == n {
            let mut labels = vec![None; blocks];
            let mut used = vec![false; constants.len()];
            label(0, &mut labels, &mut used, rgs, constants, f);
            return;
        }
        for b in 0..=blocks {
            rgs.push(b);
            grow(i + 1, blocks.max(b + 1), rgs, n, constants, f);
            rgs.pop();
        }
    }
    fn label(
        b: usize,
        labels: &mut Vec<Option<Symbol>>,
        used: &mut Vec<bool>,
        rgs: &[usize],
        constants: &ConstantSet,
        f: &mut dyn FnMut(&Partition),
    ) {
        if b == labels.len() {
            f(&Partition { block_of: rgs.to_vec(), labels: labels.clone() });
            return;
        }
        labels[b] = None;
        label(b + 1, labels, used, rgs, constants, f);
        for (k, c) in constants.iter().enumerate() {
            if !used[k] {
                used[k] = true;
                labels[b] = Some(c);
                label(b + 1, labels, used, rgs, constants, f);
                used[k] = false;
            }
        }
        labels[b] = None;
    }
    grow(0, 0, &mut Vec::with_capacity(n), n, constants, &mut f);
}

/// Largest scan [`literal_universe`] agrees to run.
const LITERAL_SCAN_LIMIT: u64 = 1 << 26;

/// Every matrix over `{0̄, 1̄} ∪ C` whose `E(R)` is consistent, found by
/// exhaustive scan. Exponential in `n²`; refused for `n > 4` or scans above
/// 2²⁶ matrices.
pub fn literal_universe(n: usize, constants: &ConstantSet) -> Result<Vec<RepMatrix>> {
    let alphabet: Vec<MatrixEntry> = [MatrixEntry::Zero, MatrixEntry::One]
        .into_iter()
        .chain(constants.iter().map(MatrixEntry::Const))
        .collect();
    let cells = (n * n) as u32;
    let total = (alphabet.len() as u64).checked_pow(cells);
    if n > 4 || total.map_or(true, |t| t > LITERAL_SCAN_LIMIT) {
        return Err(Error::Usage(format!(
            "literal matrix scan over {n} registers and {} constants is too large",
            constants.len()
        )));
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; n * n];
    loop {
        let m = RepMatrix { n, entries: digits.iter().map(|&d| alphabet[d]).collect() };
        if is_consistent_matrix(&m, constants) {
            out.push(m);
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(out);
            }
            digits[k] += 1;
            if digits[k] < alphabet.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}
